#pragma once

#include <functional>
#include <string>
#include <vector>

#include "polegrowth/grid_measure.hpp"

namespace polegrowth {

struct SolverOptions {
  double dt = 0.0;         // 0: choose from the advection stability bound
  double safety = 0.9;     // dt <= safety * d(log x) / e_max
  int save_every = 1;      // frame stride
  double overflow_tol = 1e-3;  // abort when this fraction escapes above x_hi
};

struct Timeline {
  std::vector<GridMeasure> frames;
  double dt = 0.0;        // step actually used
  double frame_dt = 0.0;  // dt * save_every
  double lost_above = 0.0;
  double lost_below = 0.0;
};

// Explicit first-order scheme for the mean-measure balance law: upwind
// advection in log-size (exponential growth is constant-speed transport
// there), exponential in-cell division loss, and a conservative remap of the
// divided mass onto the two child positions theta_{i'} x with rate-kernel
// mixing across the node set. All masses stay nonnegative.
Timeline solve_gf_equation(const ModelParams& params, const GridMeasure& init,
                           double t_end, const SolverOptions& opt = {});

// Average of the binned alive-cell measure at time t over n_rep independent
// trees started from `root_law`. Per-cell standard errors optionally
// returned through `se_out`.
GridMeasure empirical_mean_measure(const ModelParams& params,
                                   const RootLaw& root_law, double t,
                                   std::int64_t n_rep, const LogSizeGrid& grid,
                                   const RateNodeSet& nodes, std::uint64_t seed,
                                   std::int64_t n_cap, int n_threads,
                                   GridMeasure* se_out = nullptr);

// Test function with an analytic size derivative, for weak-form residuals.
struct TestFunction {
  std::string id;
  std::function<double(double, double, int)> f;     // (x, v, type)
  std::function<double(double, double, int)> dfdx;  // d/dx
};

// Compactly supported bumps in log-size plus the two moment functions.
std::vector<TestFunction> default_test_battery();

// Worst normalized residual of the dual (weak) formulation
//   d/dt <n,phi> = <n, x v dphi/dx> - <n, B phi>
//                  + <n, B(x) sum_{i'} int phi(theta_{i'} x, v', i')
//                                        rho_{i'}(v, dv')>
// over consecutive frames and the battery, with forward time differences.
double weak_residual(const ModelParams& params, const Timeline& timeline,
                     const std::vector<TestFunction>& battery);

struct EmpiricalResidualRow {
  std::string phi_id;
  double t;
  double mean;  // centered-difference residual of the weak form
  double se;
  double z;
};

// Monte Carlo weak-form residual on tree ensembles: per replicate, the
// centered difference of <Z(t), phi> minus the generator term at t; the
// identity predicts mean zero up to O(h^2).
std::vector<EmpiricalResidualRow> weak_residual_empirical(
    const ModelParams& params, const RootLaw& root_law,
    const std::vector<double>& t_list, double h,
    const std::vector<TestFunction>& battery, std::int64_t n_rep,
    std::uint64_t seed, std::int64_t n_cap, int n_threads);

// int g(v') rho_{i'}(v, dv'), exact for atomic kernels, Gauss-Legendre
// quadrature for the truncated Gaussian.
double kernel_expectation(const ModelParams& params, int child_type, double v,
                          const std::function<double(double)>& g);

}  // namespace polegrowth
