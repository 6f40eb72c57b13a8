#include "polegrowth/transition.hpp"

#include <cmath>
#include <cstdio>

#include "polegrowth/genealogy.hpp"

namespace polegrowth {

double transition_density(const ModelParams& p, double x, int i, double v,
                          double xp, int ip) {
  if (!(x > 0.0) || !(xp > 0.0) || !(v > 0.0))
    throw ValidationError("transition_density: need positive sizes and rate");
  if ((i != 0 && i != 1) || (ip != 0 && ip != 1))
    throw ValidationError("transition_density: types must be 0 or 1");
  (void)i;  // mother type does not enter: B and the split are type-free
  const double th = p.theta(ip);
  if (xp < x * th) return 0.0;
  // xp/th can round one ulp below x when xp sits on the support edge
  const double division_size = std::max(xp / th, x);
  const double hazard = p.B.hazard_between(x, division_size) / v;
  return th * p.B(division_size) / (v * xp) * std::exp(-hazard);
}

double transition_density_joint(const ModelParams& p, double x, int i,
                                double v, double xp, int ip, double vp) {
  return transition_density(p, x, i, v, xp, ip) *
         rate_kernel_density(p, ip, v, vp);
}

double child_size_cdf(const ModelParams& p, double x, double v, double xp,
                      int ip) {
  const double th = p.theta(ip);
  if (xp <= x * th) return 0.0;
  const double division_size = std::max(xp / th, x);
  return th * (1.0 - std::exp(-p.B.hazard_between(x, division_size) / v));
}

TransitionObservation sample_transition(const ModelParams& p, double x, int i,
                                        double v, RngStream& rng) {
  const double zeta = sample_lifetime(p.B, x, v, rng);
  const double division_size = x * std::exp(v * zeta);
  const int type = rng.bernoulli(p.theta1);
  TransitionObservation obs;
  obs.mother_xi = x;
  obs.mother_tau = v;
  obs.mother_type = i;
  obs.child_type = type;
  obs.child_xi = p.theta(type) * division_size;
  obs.child_tau = sample_rate(p, type, v, rng);
  return obs;
}

std::vector<TransitionObservation> run_chain(const ModelParams& p, double x0,
                                             double v0, int p0,
                                             std::int64_t n_steps,
                                             std::int64_t burn_in,
                                             std::uint64_t seed) {
  p.validate();
  if (burn_in < 0 || burn_in >= n_steps)
    throw ValidationError("run_chain: need 0 <= burn_in < n_steps");
  RngStream rng(derive_key(seed, 29));
  double x = x0, v = v0;
  int type = p0;
  std::vector<TransitionObservation> out;
  out.reserve(n_steps - burn_in);
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const TransitionObservation obs = sample_transition(p, x, type, v, rng);
    if (k >= burn_in) out.push_back(obs);
    x = obs.child_xi;
    v = obs.child_tau;
    type = obs.child_type;
  }
  return out;
}

Histogram1D Histogram1D::uniform(double lo, double hi, int n) {
  if (!(hi > lo) || n < 1)
    throw ValidationError("histogram: need hi > lo and n >= 1");
  Histogram1D h;
  h.edges = Eigen::ArrayXd::LinSpaced(n + 1, lo, hi);
  h.mass = Eigen::ArrayXd::Zero(n);
  return h;
}

void Histogram1D::add(double x, double w) {
  total += w;
  const double lo = edges(0), hi = edges(edges.size() - 1);
  if (x < lo || x >= hi) return;
  const auto n = mass.size();
  auto j = static_cast<Eigen::Index>((x - lo) / (hi - lo) * n);
  if (j < 0) j = 0;
  if (j >= n) j = n - 1;
  mass(j) += w;
}

double Histogram1D::density(double x) const {
  const double lo = edges(0), hi = edges(edges.size() - 1);
  if (total <= 0.0 || x < lo || x >= hi) return 0.0;
  const auto n = mass.size();
  auto j = static_cast<Eigen::Index>((x - lo) / (hi - lo) * n);
  if (j >= n) j = n - 1;
  return mass(j) / (total * width(static_cast<int>(j)));
}

double l1_distance(const Histogram1D& a, const Histogram1D& b) {
  if (a.mass.size() != b.mass.size())
    throw ValidationError("l1_distance: bin counts differ");
  return (a.probabilities() - b.probabilities()).abs().sum();
}

InvariantEstimate invariant_measure_estimate(
    const std::vector<TransitionObservation>& steps, double size_lo,
    double size_hi, int n_size_bins, double e_min, double e_max,
    int n_rate_bins) {
  if (steps.empty()) throw ValidationError("invariant estimate: empty sample");
  InvariantEstimate est;
  est.size_at_birth = Histogram1D::uniform(size_lo, size_hi, n_size_bins);
  // Rate support may be a single point; spread the degenerate window.
  const double pad = e_max > e_min ? 0.0 : 0.5 * std::max(e_min, 1e-6);
  est.rate = Histogram1D::uniform(e_min - pad, e_max + pad,
                                  e_max > e_min ? n_rate_bins : 1);
  for (const auto& s : steps) {
    est.size_at_birth.add(s.child_xi);
    est.rate.add(s.child_tau);
  }
  return est;
}

Histogram1D pushforward_one_step(const ModelParams& p,
                                 const std::vector<TransitionObservation>& steps,
                                 const Eigen::ArrayXd& edges) {
  Histogram1D out;
  out.edges = edges;
  out.mass = Eigen::ArrayXd::Zero(edges.size() - 1);
  const auto n_edges = edges.size();
  std::vector<double> cdf(n_edges);
  for (const auto& s : steps) {
    for (Eigen::Index e = 0; e < n_edges; ++e) {
      cdf[e] = child_size_cdf(p, s.child_xi, s.child_tau, edges(e), 0) +
               child_size_cdf(p, s.child_xi, s.child_tau, edges(e), 1);
    }
    for (Eigen::Index j = 0; j + 1 < n_edges; ++j)
      out.mass(j) += cdf[j + 1] - cdf[j];
    out.total += 1.0;
  }
  return out;
}

std::vector<ReconstructionPoint> reconstruct_division_rate(
    const ModelParams& p, const std::vector<TransitionObservation>& pairs,
    const Histogram1D& size_hist, const std::vector<double>& y_grid) {
  if (p.theta0 != 0.5)
    throw ValidationError(
        "reconstruction requires symmetric division (theta0 = 1/2)");
  if (pairs.empty()) throw ValidationError("reconstruction: empty sample");
  std::vector<ReconstructionPoint> out;
  out.reserve(y_grid.size());
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (double y : y_grid) {
    double denom = 0.0;
    for (const auto& o : pairs)
      if (o.mother_xi <= y && o.child_xi >= 0.5 * y) denom += 1.0 / o.mother_tau;
    denom *= inv_n;
    if (denom <= 0.0) {
      out.push_back({y, 0.0, true});
      continue;
    }
    out.push_back({y, 0.5 * y * size_hist.density(0.5 * y) / denom, false});
  }
  return out;
}

std::string observations_csv(const std::vector<TransitionObservation>& obs) {
  std::string out =
      "xi_parent,tau_parent,type_parent,xi_child,tau_child,type_child\n";
  char buf[200];
  for (const auto& o : obs) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g,%.17g,%d\n",
                  o.mother_xi, o.mother_tau, o.mother_type, o.child_xi,
                  o.child_tau, o.child_type);
    out += buf;
  }
  return out;
}

std::string histogram_csv(const Histogram1D& h) {
  std::string out = "bin_lo,bin_hi,mass\n";
  char buf[120];
  for (Eigen::Index j = 0; j < h.mass.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", h.edges(j),
                  h.edges(j + 1), h.mass(j));
    out += buf;
  }
  return out;
}

}  // namespace polegrowth
