#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "polegrowth/rng.hpp"

namespace polegrowth {

// Thrown on any constructor/precondition violation. The CLI maps it to
// exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Size-dependent division hazard B. Two families:
//   power: B(x) = c x^gamma, c > 0, gamma > 0.
//   table: linear interpolation through sorted knots (x_k, B_k), first knot
//          pinned at (0, 0), extrapolated linearly beyond the last knot with
//          the final segment's slope (which must be positive so that
//          \int^inf B(x)/x dx diverges and lifetimes stay finite).
class DivisionRate {
 public:
  static DivisionRate power(double c, double gamma);
  static DivisionRate table(std::vector<std::pair<double, double>> knots);

  double operator()(double x) const;

  // \int_{y0}^{y1} B(s)/s ds for 0 < y0 <= y1: the hazard accumulated while
  // the cell grows through sizes [y0, y1]. Closed form for the power family,
  // adaptive quadrature (rel. tol. 1e-10) for tables.
  double hazard_between(double y0, double y1) const;

  bool is_power() const { return family_ == Family::kPower; }
  double power_coeff() const { return c_; }
  double power_exponent() const { return gamma_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  enum class Family { kPower, kTable };
  Family family_ = Family::kPower;
  double c_ = 1.0, gamma_ = 1.0;
  std::vector<std::pair<double, double>> knots_;
  double tail_slope_ = 0.0;
};

// Cumulative hazard along the exponential-growth flow,
//   Lambda(t) = \int_0^t B(x e^{v s}) ds.
// Power family in closed form, otherwise adaptive quadrature (rel. tol 1e-10).
double cumulative_hazard(const DivisionRate& B, double x, double v, double t);

// Smallest t with Lambda(t) = target. Closed-form inverse for the power
// family; bracketing + bisection to absolute time tolerance 1e-12 otherwise.
double invert_hazard(const DivisionRate& B, double x, double v, double target);

// Growth-rate inheritance kernel families. All of them place the child's
// rate inside [e_min, e_max] with probability one.
struct PointMassKernel {
  double value;
};
struct GridKernel {
  Eigen::VectorXd nodes;  // uniform grid on [e_min, e_max]
  Eigen::MatrixXd rows;   // row-stochastic
};
struct TruncGaussKernel {
  double sigma;  // child rate ~ N(v, sigma^2) truncated to [e_min, e_max]
};
using RateKernel = std::variant<PointMassKernel, GridKernel, TruncGaussKernel>;

struct ModelParams {
  DivisionRate B = DivisionRate::power(1.0, 1.0);
  double theta0 = 0.5;
  double theta1 = 0.5;
  std::array<RateKernel, 2> rho = {PointMassKernel{1.0}, PointMassKernel{1.0}};
  double e_min = 1.0;
  double e_max = 1.0;

  double theta(int type) const { return type == 0 ? theta0 : theta1; }
  void set_theta0(double t0);
  // Throws ValidationError if any field is out of contract.
  void validate() const;
  bool symmetric_single_kernel() const;
};

int nearest_grid_node(const Eigen::VectorXd& nodes, double v);

// One draw from rho_{child_type}(v, .). v must lie in [e_min, e_max].
double sample_rate(const ModelParams& p, int child_type, double v,
                   RngStream& rng);

// Density of rho_{child_type}(v, .) at v' when the kernel is continuous
// (truncated Gaussian); throws for atomic kernels.
double rate_kernel_density(const ModelParams& p, int child_type, double v,
                           double vp);

// Mass of rho_{child_type}(v, .) lumped onto each node's cell of a uniform
// node set (used by the grid solver). Exact for point-mass and grid kernels.
Eigen::VectorXd lump_rate_kernel(const ModelParams& p, int child_type,
                                 double v, const std::vector<double>& nodes);

GridKernel make_gaussian_grid_kernel(int n, double sigma, double e_min,
                                     double e_max);

}  // namespace polegrowth
