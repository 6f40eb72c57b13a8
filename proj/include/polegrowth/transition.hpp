#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "polegrowth/model.hpp"
#include "polegrowth/rng.hpp"

namespace polegrowth {

// One step of the size-at-birth chain along the genealogy: a mother observed
// at birth and the child selected at her division.
struct TransitionObservation {
  double mother_xi;
  double mother_tau;
  int mother_type;
  double child_xi;   // >= theta_{child_type} * mother_xi always
  double child_tau;
  int child_type;
};

// Density in x' of the one-step kernel, marginal over the child's rate:
//   theta_{i'} B(x'/theta_{i'}) / (v x') 1{x' >= x theta_{i'}}
//     exp(-int_{x theta_{i'}}^{x'} B(s/theta_{i'}) / (v s) ds).
// The theta_{i'} prefactor is the probability that the followed child has
// type i'; summing over i' and integrating over x' gives exactly 1.
double transition_density(const ModelParams& p, double x, int i, double v,
                          double xp, int ip);

// Joint density in (x', v') when rho_{i'} has a density (truncated Gaussian).
double transition_density_joint(const ModelParams& p, double x, int i,
                                double v, double xp, int ip, double vp);

// P(child size <= xp and child type = ip | mother born at (x, v)).
// Used to push an empirical measure through one exact transition step.
double child_size_cdf(const ModelParams& p, double x, double v, double xp,
                      int ip);

// Simulates one division: lifetime, split, theta-weighted child selection,
// inherited rate.
TransitionObservation sample_transition(const ModelParams& p, double x, int i,
                                        double v, RngStream& rng);

// n_steps transitions of the chain started at (x0, v0, p0); the first
// burn_in transitions are discarded. burn_in must be < n_steps.
std::vector<TransitionObservation> run_chain(const ModelParams& p, double x0,
                                             double v0, int p0,
                                             std::int64_t n_steps,
                                             std::int64_t burn_in,
                                             std::uint64_t seed);

// Histogram on [lo, hi] with n uniform bins; out-of-range samples are
// dropped from `mass` but counted in `total`.
struct Histogram1D {
  Eigen::ArrayXd edges;  // n+1
  Eigen::ArrayXd mass;   // n, nonnegative
  double total = 0.0;    // includes out-of-range mass

  static Histogram1D uniform(double lo, double hi, int n);
  void add(double x, double w = 1.0);
  double width(int j) const { return edges(j + 1) - edges(j); }
  // Normalized density at x from the bin containing it (0 outside).
  double density(double x) const;
  Eigen::ArrayXd probabilities() const { return mass / total; }
};

// L1 distance between the bin probability vectors of two histograms with
// identical edges.
double l1_distance(const Histogram1D& a, const Histogram1D& b);

// Empirical invariant estimate of the chain: histograms of the child size
// at birth and rate over the retained steps.
struct InvariantEstimate {
  Histogram1D size_at_birth;
  Histogram1D rate;
};
InvariantEstimate invariant_measure_estimate(
    const std::vector<TransitionObservation>& steps, double size_lo,
    double size_hi, int n_size_bins, double e_min, double e_max,
    int n_rate_bins);

// Exact one-step pushforward of the empirical measure given by `steps`
// (child states), binned on `edges`: each retained state contributes its
// analytic child-size law.
Histogram1D pushforward_one_step(const ModelParams& p,
                                 const std::vector<TransitionObservation>& steps,
                                 const Eigen::ArrayXd& edges);

struct ReconstructionPoint {
  double y;
  double b_hat;
  bool flagged;  // empty denominator: no estimate at this point
};

// Division-rate reconstruction from stationary pairs in the symmetric case,
//   B(y) = (y/2) nu(y/2) / E[ (1/tau_mother) 1{xi_mother <= y, xi_child >= y/2} ],
// with nu estimated by the size-at-birth histogram. Requires theta0 = 1/2.
std::vector<ReconstructionPoint> reconstruct_division_rate(
    const ModelParams& p, const std::vector<TransitionObservation>& pairs,
    const Histogram1D& size_hist, const std::vector<double>& y_grid);

std::string observations_csv(const std::vector<TransitionObservation>& obs);
std::string histogram_csv(const Histogram1D& h);

}  // namespace polegrowth
