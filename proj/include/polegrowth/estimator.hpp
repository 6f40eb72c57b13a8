#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "polegrowth/model.hpp"
#include "polegrowth/transition.hpp"

namespace polegrowth {

enum class KernelShape { kRectangular, kTriangular, kEpanechnikov };

// Compactly supported smoothing kernel on [-1, 1]. Symmetric base shapes
// have vanishing odd moments (order 1); for n0 >= 2 the base is multiplied
// by an even polynomial chosen so that moments 1..n0 all vanish while the
// integral stays 1. Such kernels take negative values.
class SmoothingKernel {
 public:
  double operator()(double x) const;
  int order() const { return order_; }
  KernelShape shape() const { return shape_; }
  double support_radius() const { return 1.0; }
  // int x^k K(x) dx by adaptive quadrature (construction checks these).
  double moment(int k) const;

  friend SmoothingKernel make_kernel(KernelShape shape, int n0);

 private:
  KernelShape shape_ = KernelShape::kEpanechnikov;
  int order_ = 1;
  Eigen::VectorXd poly_;  // coefficients of the even correction polynomial
  double base(double x) const;
};

// Builds a kernel of order n0 >= 1 and verifies its moment conditions by
// quadrature to 1e-10.
SmoothingKernel make_kernel(KernelShape shape, int n0);

// Division-rate estimator inputs: stationary mother/child pairs
// (xi_parent, xi_child, tau_parent) from the symmetric-division,
// single-kernel regime.
struct PairObservation {
  double xi_parent;
  double xi_child;
  double tau_parent;
};

std::vector<PairObservation> to_pairs(
    const std::vector<TransitionObservation>& obs);

struct EstimationConfig {
  std::vector<double> y_grid;
  double h = 0.0;        // 0: use the bandwidth schedule
  double varpi = 0.0;    // 0: use 1/log n
  double c0 = 1.0;
  double s = 2.0;        // assumed smoothness for the schedule
};

// h = c0 n^{-1/(2s+1)}.
double bandwidth_schedule(double n, double s, double c0);
// varpi = 1 / log n.
double threshold_schedule(double n);

struct EstimatePoint {
  double y;
  double b_hat;
  bool thresholded;  // denominator was below varpi and got clamped
  bool clipped;      // negative numerator (higher-order kernel) clipped to 0
};

// Plug-in estimator
//   Bhat(y) = (y/2) [n^{-1} sum K_h(xi_child - y/2)]
//             / [n^{-1} sum (1/tau_parent) 1{xi_parent <= y, xi_child >= y/2}
//                or varpi, whichever is larger].
std::vector<EstimatePoint> estimate_division_rate(
    const std::vector<PairObservation>& obs, const EstimationConfig& config,
    const SmoothingKernel& kernel);

// L2 norm over the y grid (trapezoid weights) of f - g.
double l2_grid_norm(const std::vector<double>& y_grid,
                    const std::vector<double>& values);

struct RiskRow {
  std::int64_t n;
  double risk;  // root mean squared L2(D) error over the repetitions
  double se;
};
struct RiskStudyResult {
  std::vector<RiskRow> rows;
  double slope;  // of log risk against log n
};

// For each n: n_mc independent stationary samples of size n, the estimator
// at the scheduled bandwidth/threshold, and the L2(D) distance to the truth.
// Requires the symmetric single-kernel regime.
RiskStudyResult risk_study(const ModelParams& params,
                           const std::vector<std::int64_t>& n_list, int n_mc,
                           const EstimationConfig& config,
                           const SmoothingKernel& kernel, double x0, double v0,
                           std::int64_t burn_in, std::uint64_t seed,
                           int n_threads);

std::string estimate_csv(const std::vector<EstimatePoint>& pts);
std::string risk_csv(const RiskStudyResult& r);

}  // namespace polegrowth
