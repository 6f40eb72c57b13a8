#include "polegrowth/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polegrowth/quadrature.hpp"

namespace polegrowth {

DivisionRate DivisionRate::power(double c, double gamma) {
  if (!(c > 0.0)) throw ValidationError("division rate: need c > 0");
  if (!(gamma > 0.0)) throw ValidationError("division rate: need gamma > 0");
  DivisionRate b;
  b.family_ = Family::kPower;
  b.c_ = c;
  b.gamma_ = gamma;
  return b;
}

DivisionRate DivisionRate::table(std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2)
    throw ValidationError("division rate table: need at least two knots");
  if (knots.front().first != 0.0 || knots.front().second != 0.0)
    throw ValidationError("division rate table: first knot must be (0, 0)");
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (knots[k].second < 0.0)
      throw ValidationError("division rate table: negative value");
    if (k > 0 && !(knots[k].first > knots[k - 1].first))
      throw ValidationError("division rate table: knots must be sorted");
  }
  const auto& a = knots[knots.size() - 2];
  const auto& z = knots.back();
  const double slope = (z.second - a.second) / (z.first - a.first);
  if (!(slope > 0.0))
    throw ValidationError(
        "division rate table: extrapolation slope must be positive");
  DivisionRate b;
  b.family_ = Family::kTable;
  b.knots_ = std::move(knots);
  b.tail_slope_ = slope;
  return b;
}

double DivisionRate::operator()(double x) const {
  if (x < 0.0) throw ValidationError("division rate: negative size");
  if (family_ == Family::kPower) return c_ * std::pow(x, gamma_);
  const auto& k = knots_;
  if (x >= k.back().first)
    return k.back().second + tail_slope_ * (x - k.back().first);
  auto it = std::upper_bound(
      k.begin(), k.end(), x,
      [](double v, const auto& kn) { return v < kn.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (x - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

double DivisionRate::hazard_between(double y0, double y1) const {
  if (!(y0 > 0.0) || !(y1 >= y0))
    throw ValidationError("hazard_between: need 0 < y0 <= y1");
  if (family_ == Family::kPower)
    return c_ / gamma_ * (std::pow(y1, gamma_) - std::pow(y0, gamma_));
  return integrate_adaptive([this](double s) { return (*this)(s) / s; }, y0,
                            y1, 1e-10);
}

double cumulative_hazard(const DivisionRate& B, double x, double v, double t) {
  if (!(x > 0.0) || !(v > 0.0))
    throw ValidationError("cumulative_hazard: need x > 0 and v > 0");
  if (t < 0.0) throw ValidationError("cumulative_hazard: negative time");
  if (t == 0.0) return 0.0;
  if (B.is_power()) {
    const double g = B.power_exponent();
    return B.power_coeff() * std::pow(x, g) * std::expm1(g * v * t) / (g * v);
  }
  return integrate_adaptive([&](double s) { return B(x * std::exp(v * s)); },
                            0.0, t, 1e-10);
}

double invert_hazard(const DivisionRate& B, double x, double v, double target) {
  if (!(x > 0.0) || !(v > 0.0))
    throw ValidationError("invert_hazard: need x > 0 and v > 0");
  if (target < 0.0) throw ValidationError("invert_hazard: negative target");
  if (target == 0.0) return 0.0;
  if (B.is_power()) {
    const double g = B.power_exponent();
    return std::log1p(g * v * target / (B.power_coeff() * std::pow(x, g))) /
           (g * v);
  }
  double hi = 1.0;
  int doublings = 0;
  while (cumulative_hazard(B, x, v, hi) < target) {
    hi *= 2.0;
    if (++doublings > 200)
      throw std::runtime_error("invert_hazard: hazard does not reach target");
  }
  return bisect_nondecreasing(
      [&](double t) { return cumulative_hazard(B, x, v, t); }, 0.0, hi, target,
      1e-12);
}

void ModelParams::set_theta0(double t0) {
  theta0 = t0;
  theta1 = 1.0 - t0;
}

void ModelParams::validate() const {
  if (!(theta0 > 0.0 && theta0 < 1.0))
    throw ValidationError("model: theta0 must lie in (0,1)");
  if (theta1 != 1.0 - theta0)
    throw ValidationError("model: theta1 must equal 1 - theta0 exactly");
  if (!(e_min > 0.0 && e_min <= e_max && std::isfinite(e_max)))
    throw ValidationError("model: need 0 < e_min <= e_max < inf");
  for (const auto& k : rho) {
    if (const auto* pm = std::get_if<PointMassKernel>(&k)) {
      if (pm->value < e_min || pm->value > e_max)
        throw ValidationError("model: point-mass rate outside [e_min, e_max]");
    } else if (const auto* gk = std::get_if<GridKernel>(&k)) {
      if (gk->nodes.size() < 1 || gk->rows.rows() != gk->nodes.size() ||
          gk->rows.cols() != gk->nodes.size())
        throw ValidationError("model: grid kernel shape mismatch");
      if (gk->nodes.minCoeff() < e_min || gk->nodes.maxCoeff() > e_max)
        throw ValidationError("model: grid kernel nodes outside support");
      for (Eigen::Index i = 0; i < gk->rows.rows(); ++i) {
        if (gk->rows.row(i).minCoeff() < 0.0 ||
            std::abs(gk->rows.row(i).sum() - 1.0) > 1e-12)
          throw ValidationError("model: grid kernel rows must be stochastic");
      }
    } else if (const auto* tg = std::get_if<TruncGaussKernel>(&k)) {
      if (!(tg->sigma > 0.0))
        throw ValidationError("model: truncated Gaussian needs sigma > 0");
    }
  }
}

bool ModelParams::symmetric_single_kernel() const {
  if (theta0 != 0.5) return false;
  if (rho[0].index() != rho[1].index()) return false;
  if (const auto* a = std::get_if<PointMassKernel>(&rho[0]))
    return a->value == std::get<PointMassKernel>(rho[1]).value;
  if (const auto* a = std::get_if<TruncGaussKernel>(&rho[0]))
    return a->sigma == std::get<TruncGaussKernel>(rho[1]).sigma;
  const auto& a = std::get<GridKernel>(rho[0]);
  const auto& b = std::get<GridKernel>(rho[1]);
  return a.nodes == b.nodes && a.rows == b.rows;
}

int nearest_grid_node(const Eigen::VectorXd& nodes, double v) {
  Eigen::Index best = 0;
  (nodes.array() - v).abs().minCoeff(&best);
  return static_cast<int>(best);
}

double sample_rate(const ModelParams& p, int child_type, double v,
                   RngStream& rng) {
  if (v < p.e_min || v > p.e_max)
    throw ValidationError("sample_rate: parent rate outside [e_min, e_max]");
  const RateKernel& k = p.rho[child_type];
  if (const auto* pm = std::get_if<PointMassKernel>(&k)) return pm->value;
  if (const auto* gk = std::get_if<GridKernel>(&k)) {
    const int row = nearest_grid_node(gk->nodes, v);
    double u = rng.uniform01();
    double acc = 0.0;
    Eigen::Index j = 0;
    for (; j < gk->rows.cols() - 1; ++j) {
      acc += gk->rows(row, j);
      if (u < acc) break;
    }
    return gk->nodes(j);
  }
  const auto& tg = std::get<TruncGaussKernel>(k);
  return truncated_normal_quantile(v, tg.sigma, p.e_min, p.e_max,
                                   rng.uniform01());
}

double rate_kernel_density(const ModelParams& p, int child_type, double v,
                           double vp) {
  const auto* tg = std::get_if<TruncGaussKernel>(&p.rho[child_type]);
  if (tg == nullptr)
    throw ValidationError("rate_kernel_density: kernel has no density");
  if (vp < p.e_min || vp > p.e_max) return 0.0;
  const double s = tg->sigma;
  const double mass =
      normal_cdf((p.e_max - v) / s) - normal_cdf((p.e_min - v) / s);
  const double z = (vp - v) / s;
  return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * M_PI) * mass);
}

Eigen::VectorXd lump_rate_kernel(const ModelParams& p, int child_type,
                                 double v, const std::vector<double>& nodes) {
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  Eigen::Map<const Eigen::VectorXd> node_vec(nodes.data(), n);
  const RateKernel& k = p.rho[child_type];
  if (const auto* pm = std::get_if<PointMassKernel>(&k)) {
    out(nearest_grid_node(node_vec, pm->value)) = 1.0;
    return out;
  }
  if (const auto* gk = std::get_if<GridKernel>(&k)) {
    const int row = nearest_grid_node(gk->nodes, v);
    for (Eigen::Index j = 0; j < gk->nodes.size(); ++j)
      out(nearest_grid_node(node_vec, gk->nodes(j))) += gk->rows(row, j);
    return out;
  }
  const auto& tg = std::get<TruncGaussKernel>(k);
  // Mass of the truncated Gaussian over each node's cell (midpoint edges).
  const double total =
      normal_cdf((p.e_max - v) / tg.sigma) - normal_cdf((p.e_min - v) / tg.sigma);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = j == 0 ? p.e_min : 0.5 * (nodes[j - 1] + nodes[j]);
    const double hi = j == n - 1 ? p.e_max : 0.5 * (nodes[j] + nodes[j + 1]);
    out(j) = (normal_cdf((hi - v) / tg.sigma) - normal_cdf((lo - v) / tg.sigma)) /
             total;
  }
  out /= out.sum();
  return out;
}

GridKernel make_gaussian_grid_kernel(int n, double sigma, double e_min,
                                     double e_max) {
  if (n < 1) throw ValidationError("grid kernel: need at least one node");
  GridKernel gk;
  gk.nodes.resize(n);
  for (int i = 0; i < n; ++i)
    gk.nodes(i) =
        n == 1 ? 0.5 * (e_min + e_max)
               : e_min + (e_max - e_min) * static_cast<double>(i) / (n - 1);
  gk.rows.resize(n, n);
  for (int i = 0; i < n; ++i) {
    if (sigma <= 0.0) {
      gk.rows.row(i).setZero();
      gk.rows(i, i) = 1.0;
      continue;
    }
    for (int j = 0; j < n; ++j) {
      const double lo = j == 0 ? e_min : 0.5 * (gk.nodes(j - 1) + gk.nodes(j));
      const double hi =
          j == n - 1 ? e_max : 0.5 * (gk.nodes(j) + gk.nodes(j + 1));
      gk.rows(i, j) = normal_cdf((hi - gk.nodes(i)) / sigma) -
                      normal_cdf((lo - gk.nodes(i)) / sigma);
    }
    gk.rows.row(i) /= gk.rows.row(i).sum();
  }
  return gk;
}

}  // namespace polegrowth
