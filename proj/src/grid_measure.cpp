#include "polegrowth/grid_measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace polegrowth {

LogSizeGrid LogSizeGrid::make(double x_lo, double x_hi, int n) {
  if (!(x_lo > 0.0) || !(x_hi > x_lo) || n < 2)
    throw ValidationError("size grid: need 0 < x_lo < x_hi and n >= 2");
  LogSizeGrid g;
  g.x_lo = x_lo;
  g.x_hi = x_hi;
  g.n = n;
  g.u_lo = std::log(x_lo);
  g.du = (std::log(x_hi) - g.u_lo) / n;
  return g;
}

int LogSizeGrid::index(double x) const {
  if (!(x > 0.0)) return -1;
  const double pos = (std::log(x) - u_lo) / du;
  if (pos < 0.0 || pos >= n) return -1;
  return static_cast<int>(pos);
}

int RateNodeSet::nearest(double value) const {
  int best = 0;
  double d = std::abs(v[0] - value);
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double dk = std::abs(v[k] - value);
    if (dk < d) {
      d = dk;
      best = static_cast<int>(k);
    }
  }
  return best;
}

RateNodeSet make_rate_nodes(const ModelParams& p, int n_v, double v0) {
  bool atomic = true;
  std::vector<double> atoms{v0};
  for (const auto& k : p.rho) {
    if (const auto* pm = std::get_if<PointMassKernel>(&k)) {
      atoms.push_back(pm->value);
    } else if (const auto* gk = std::get_if<GridKernel>(&k)) {
      for (Eigen::Index i = 0; i < gk->nodes.size(); ++i)
        atoms.push_back(gk->nodes(i));
    } else {
      atomic = false;
    }
  }
  RateNodeSet set;
  if (atomic) {
    std::sort(atoms.begin(), atoms.end());
    for (double a : atoms)
      if (set.v.empty() || a - set.v.back() > 1e-12) set.v.push_back(a);
    return set;
  }
  if (n_v < 1) throw ValidationError("rate nodes: need n_v >= 1");
  if (n_v == 1) {
    set.v.push_back(0.5 * (p.e_min + p.e_max));
    return set;
  }
  for (int i = 0; i < n_v; ++i)
    set.v.push_back(p.e_min + (p.e_max - p.e_min) * i / (n_v - 1.0));
  return set;
}

GridMeasure GridMeasure::zero(const LogSizeGrid& g, const RateNodeSet& nodes) {
  GridMeasure m;
  m.grid = g;
  m.nodes = nodes;
  const auto n_v = static_cast<Eigen::Index>(nodes.v.size());
  m.mass[0] = Eigen::ArrayXXd::Zero(n_v, g.n);
  m.mass[1] = Eigen::ArrayXXd::Zero(n_v, g.n);
  return m;
}

void GridMeasure::deposit(int type, int node, double size, double w) {
  const int j = grid.index(size);
  if (j < 0) {
    outside += w;
    return;
  }
  mass[type](node, j) += w;
}

double GridMeasure::integrate(
    const std::function<double(double, double, int)>& f) const {
  double acc = 0.0;
  for (int type = 0; type < 2; ++type)
    for (Eigen::Index k = 0; k < mass[type].rows(); ++k)
      for (int j = 0; j < grid.n; ++j)
        acc += mass[type](k, j) * f(grid.center(j), nodes.v[k], type);
  return acc;
}

double l1_distance(const GridMeasure& a, const GridMeasure& b) {
  if (a.grid.n != b.grid.n || a.nodes.v.size() != b.nodes.v.size())
    throw ValidationError("grid l1: shapes differ");
  return (a.mass[0] - b.mass[0]).abs().sum() +
         (a.mass[1] - b.mass[1]).abs().sum() + std::abs(a.outside - b.outside);
}

std::string grid_measure_csv(const GridMeasure& m) {
  std::string out = "t,type,v_node,log_x_bin,mass\n";
  char buf[160];
  for (int type = 0; type < 2; ++type)
    for (Eigen::Index k = 0; k < m.mass[type].rows(); ++k)
      for (int j = 0; j < m.grid.n; ++j) {
        if (m.mass[type](k, j) == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%d,%.17g\n", m.time,
                      type, m.nodes.v[k], j, m.mass[type](k, j));
        out += buf;
      }
  return out;
}

RootLaw RootLaw::fixed(double x0, double v0, int p0) {
  RootLaw law;
  law.fixed_ = true;
  law.state_ = {x0, v0, p0};
  return law;
}

RootLaw RootLaw::from_profile(GridMeasure profile) {
  const double total = profile.total();
  if (!(total > 0.0)) throw ValidationError("root profile: empty measure");
  RootLaw law;
  law.fixed_ = false;
  law.profile_ = std::move(profile);
  double acc = 0.0;
  for (int type = 0; type < 2; ++type)
    for (Eigen::Index k = 0; k < law.profile_.mass[type].rows(); ++k)
      for (int j = 0; j < law.profile_.grid.n; ++j) {
        acc += law.profile_.mass[type](k, j) / total;
        law.cumulative_.push_back(acc);
      }
  law.cumulative_.back() = 1.0;
  return law;
}

RootLaw::State RootLaw::sample(RngStream& rng) const {
  if (fixed_) return state_;
  const double u = rng.uniform01();
  const auto it =
      std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  auto flat = static_cast<std::size_t>(it - cumulative_.begin());
  const auto n_x = static_cast<std::size_t>(profile_.grid.n);
  const auto n_v = profile_.nodes.v.size();
  const int j = static_cast<int>(flat % n_x);
  flat /= n_x;
  const int k = static_cast<int>(flat % n_v);
  const int type = static_cast<int>(flat / n_v);
  // Uniform position inside the cell: the profile is piecewise constant in
  // log-size, exactly what the finite-volume state represents.
  const double u_pos = profile_.grid.edge_log(j) + profile_.grid.du * rng.uniform01();
  return {std::exp(u_pos), profile_.nodes.v[static_cast<std::size_t>(k)], type};
}

GridMeasure RootLaw::as_grid_measure(const LogSizeGrid& g,
                                     const RateNodeSet& nodes) const {
  if (!fixed_) {
    GridMeasure m = profile_;
    const double total = m.total();
    m.mass[0] /= total;
    m.mass[1] /= total;
    return m;
  }
  GridMeasure m = GridMeasure::zero(g, nodes);
  m.deposit(state_.p0, nodes.nearest(state_.v0), state_.x0, 1.0);
  return m;
}

}  // namespace polegrowth
