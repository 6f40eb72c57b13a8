#include "polegrowth/estimator.hpp"
#include <algorithm>

#include <cmath>
#include <cstdio>

#include "polegrowth/parallel.hpp"
#include "polegrowth/quadrature.hpp"

namespace polegrowth {

double SmoothingKernel::base(double x) const {
  if (x < -1.0 || x > 1.0) return 0.0;
  switch (shape_) {
    case KernelShape::kRectangular:
      return 0.5;
    case KernelShape::kTriangular:
      return 1.0 - std::abs(x);
    case KernelShape::kEpanechnikov:
      return 0.75 * (1.0 - x * x);
  }
  return 0.0;
}

double SmoothingKernel::operator()(double x) const {
  if (x < -1.0 || x > 1.0) return 0.0;
  if (poly_.size() == 0) return base(x);
  double p = 0.0;
  const double x2 = x * x;
  for (Eigen::Index i = poly_.size() - 1; i >= 0; --i) p = p * x2 + poly_(i);
  return p * base(x);
}

double SmoothingKernel::moment(int k) const {
  return integrate_adaptive(
      [this, k](double x) { return std::pow(x, k) * (*this)(x); }, -1.0, 1.0,
      1e-12, 1e-14);
}

namespace {

// Exact even moments of the base shapes: int x^k base(x) dx over [-1,1].
double base_even_moment(KernelShape shape, int k) {
  switch (shape) {
    case KernelShape::kRectangular:
      return 1.0 / (k + 1);
    case KernelShape::kTriangular:
      return 2.0 / ((k + 1.0) * (k + 2.0));
    case KernelShape::kEpanechnikov:
      return 1.5 * (1.0 / (k + 1.0) - 1.0 / (k + 3.0));
  }
  return 0.0;
}

}  // namespace

SmoothingKernel make_kernel(KernelShape shape, int n0) {
  if (n0 < 1) throw ValidationError("kernel: order must be >= 1");
  SmoothingKernel k;
  k.shape_ = shape;
  k.order_ = n0;
  // Symmetry kills all odd moments. Even moments 2..n0 are removed by an
  // even polynomial p(x) = sum a_i x^{2i} solving the linear moment system.
  const int n_kill = n0 / 2;  // even moments 2, 4, ..., 2*n_kill
  if (n_kill > 0) {
    Eigen::MatrixXd A(n_kill + 1, n_kill + 1);
    for (int row = 0; row <= n_kill; ++row)
      for (int col = 0; col <= n_kill; ++col)
        A(row, col) = base_even_moment(shape, 2 * (row + col));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_kill + 1);
    rhs(0) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
      throw ValidationError("kernel: moment system is singular");
    k.poly_ = lu.solve(rhs);
  }
  for (int m = 0; m <= n0; ++m) {
    const double target = m == 0 ? 1.0 : 0.0;
    if (std::abs(k.moment(m) - target) > 1e-10)
      throw ValidationError("kernel: moment condition failed at construction");
  }
  return k;
}

std::vector<PairObservation> to_pairs(
    const std::vector<TransitionObservation>& obs) {
  std::vector<PairObservation> out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back({o.mother_xi, o.child_xi, o.mother_tau});
  return out;
}

double bandwidth_schedule(double n, double s, double c0) {
  if (!(n >= 2.0) || !(s > 0.0) || !(c0 > 0.0))
    throw ValidationError("bandwidth schedule: need n >= 2, s > 0, c0 > 0");
  return c0 * std::pow(n, -1.0 / (2.0 * s + 1.0));
}

double threshold_schedule(double n) {
  if (!(n >= 2.0)) throw ValidationError("threshold schedule: need n >= 2");
  return 1.0 / std::log(n);
}

std::vector<EstimatePoint> estimate_division_rate(
    const std::vector<PairObservation>& obs, const EstimationConfig& config,
    const SmoothingKernel& kernel) {
  const auto n = static_cast<std::int64_t>(obs.size());
  if (n < 2) throw ValidationError("estimator: need at least two observations");
  for (const auto& o : obs)
    if (!(o.tau_parent > 0.0))
      throw ValidationError("estimator: nonpositive growth rate");
  // canonical summation order: the estimate is exactly permutation invariant
  std::vector<PairObservation> sorted = obs;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.xi_child != b.xi_child) return a.xi_child < b.xi_child;
    if (a.xi_parent != b.xi_parent) return a.xi_parent < b.xi_parent;
    return a.tau_parent < b.tau_parent;
  });
  const double h = config.h > 0.0
                       ? config.h
                       : bandwidth_schedule(static_cast<double>(n), config.s,
                                            config.c0);
  const double varpi = config.varpi > 0.0
                           ? config.varpi
                           : threshold_schedule(static_cast<double>(n));
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<EstimatePoint> out;
  out.reserve(config.y_grid.size());
  for (double y : config.y_grid) {
    const double half = 0.5 * y;
    double num = 0.0, denom = 0.0;
    for (const auto& o : sorted) {
      num += kernel((o.xi_child - half) / h);
      if (o.xi_parent <= y && o.xi_child >= half) denom += 1.0 / o.tau_parent;
    }
    num *= inv_n / h;
    denom *= inv_n;
    EstimatePoint pt;
    pt.y = y;
    pt.thresholded = denom < varpi;
    const double used = pt.thresholded ? varpi : denom;
    double value = half * num / used;
    pt.clipped = value < 0.0;
    pt.b_hat = pt.clipped ? 0.0 : value;
    out.push_back(pt);
  }
  return out;
}

double l2_grid_norm(const std::vector<double>& y_grid,
                    const std::vector<double>& values) {
  if (y_grid.size() != values.size() || y_grid.size() < 2)
    throw ValidationError("l2 norm: grid/value size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < y_grid.size(); ++i) {
    const double w = y_grid[i + 1] - y_grid[i];
    acc += 0.5 * w * (values[i] * values[i] + values[i + 1] * values[i + 1]);
  }
  return std::sqrt(acc);
}

RiskStudyResult risk_study(const ModelParams& params,
                           const std::vector<std::int64_t>& n_list, int n_mc,
                           const EstimationConfig& config,
                           const SmoothingKernel& kernel, double x0, double v0,
                           std::int64_t burn_in, std::uint64_t seed,
                           int n_threads) {
  if (!params.symmetric_single_kernel())
    throw ValidationError(
        "risk study requires theta0 = 1/2 and identical rate kernels");
  if (n_mc < 2) throw ValidationError("risk study: need n_mc >= 2");
  std::vector<double> truth(config.y_grid.size());
  for (std::size_t i = 0; i < config.y_grid.size(); ++i)
    truth[i] = params.B(config.y_grid[i]);

  RiskStudyResult result;
  const std::uint64_t domain = derive_key(seed, 47);
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::int64_t n = n_list[ni];
    std::vector<double> errs(n_mc);
    parallel_for(n_mc, n_threads, [&](std::int64_t rep) {
      const auto chain =
          run_chain(params, x0, v0, 0, n + burn_in, burn_in,
                    derive_key(domain, ni * 100000ULL + rep));
      const auto est = estimate_division_rate(to_pairs(chain), config, kernel);
      std::vector<double> diff(est.size());
      for (std::size_t i = 0; i < est.size(); ++i)
        diff[i] = est[i].b_hat - truth[i];
      errs[rep] = l2_grid_norm(config.y_grid, diff);
    });
    double sumsq = 0.0;
    for (double e : errs) sumsq += e * e;
    const double mse = sumsq / n_mc;
    const double risk = std::sqrt(mse);
    double var = 0.0;
    for (double e : errs) var += (e * e - mse) * (e * e - mse);
    var /= (n_mc - 1.0) * n_mc;
    // delta method: se(sqrt(m)) ~ se(m) / (2 sqrt(m))
    const double se = 0.5 * std::sqrt(var) / risk;
    result.rows.push_back({n, risk, se});
  }

  // least-squares slope of log risk on log n
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto m = static_cast<double>(result.rows.size());
  for (const auto& r : result.rows) {
    const double lx = std::log(static_cast<double>(r.n));
    const double ly = std::log(r.risk);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  result.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return result;
}

std::string estimate_csv(const std::vector<EstimatePoint>& pts) {
  std::string out = "y,b_hat,thresholded,clipped\n";
  char buf[120];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%d\n", p.y, p.b_hat,
                  p.thresholded ? 1 : 0, p.clipped ? 1 : 0);
    out += buf;
  }
  return out;
}

std::string risk_csv(const RiskStudyResult& r) {
  std::string out = "n,risk,se\n";
  char buf[120];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n",
                  static_cast<long long>(row.n), row.risk, row.se);
    out += buf;
  }
  return out;
}

}  // namespace polegrowth
