#pragma once

#include <functional>
#include <string>
#include <vector>

#include "polegrowth/genealogy.hpp"
#include "polegrowth/model.hpp"

namespace polegrowth {

// One division along the tagged lineage: at `time` the followed child has
// the given pole type, starts at size_after with rate_after. Running totals
// let chi/vbar/counts be evaluated at any time by binary search.
struct TaggedEvent {
  double time;
  double size_after;
  double rate_after;
  double vbar_at;  // accumulated integral of the rate up to `time`
  std::int32_t n_old;  // divisions into an old-pole child so far (C^o)
  std::int32_t n_new;  // divisions into a new-pole child so far (C^n)
  std::int8_t type;
};

// The theta-weighted tagged lineage: at each division the old-pole child is
// followed with probability theta0, the new-pole child with theta1.
class TaggedPath {
 public:
  TaggedPath(double x0, double v0, int p0, double t_max)
      : x0_(x0), v0_(v0), p0_(p0), t_max_(t_max) {}

  void add_event(TaggedEvent ev) { events_.push_back(ev); }

  double x0() const { return x0_; }
  double t_max() const { return t_max_; }
  const std::vector<TaggedEvent>& events() const { return events_; }

  // State at time t in [0, t_max]: size chi(t), rate V(t), accumulated rate
  // Vbar(t), type Q(t), division counts (C_t, C_t^o, C_t^n).
  double chi(double t) const;
  double rate(double t) const;
  double vbar(double t) const;
  int type(double t) const;
  std::int32_t divisions(double t) const;   // C_t
  std::int32_t old_count(double t) const;   // C_t^o
  std::int32_t new_count(double t) const;   // C_t^n

 private:
  const TaggedEvent* last_before(double t) const;
  double x0_, v0_;
  int p0_;
  double t_max_;
  std::vector<TaggedEvent> events_;
};

TaggedPath sample_tagged_path(const ModelParams& params, double x0, double v0,
                              int p0, double t_max, std::uint64_t seed);

// Test function phi(size, rate, accumulated rate, type). Functions that
// ignore the type argument match the untyped statement of the identity.
struct PhiFunction {
  std::string id;
  std::function<double(double, double, double, int)> f;
};

// Shipped battery: constants, coordinate projections, a product, compactly
// supported bumps, and type-aware variants.
std::vector<PhiFunction> default_phi_battery();

struct ManyToOneRow {
  std::string phi_id;
  double t;
  double lhs, lhs_se;
  double rhs, rhs_se;
  double z;
};

// Monte Carlo check of the branching identity
//   E[phi(chi(t), V(t), Vbar(t), Q(t))]
//     = E[ sum_alive xi_t^u e^{-taubar_t^u} / x0 * phi(...u...) ],
// with the lhs from n_rep tagged lineages and the rhs from n_rep full trees.
// Truncation of any tree raises TruncationError.
std::vector<ManyToOneRow> many_to_one_check(
    const ModelParams& params, double x0, double v0, int p0, double t,
    const std::vector<PhiFunction>& battery, std::int64_t n_rep,
    std::uint64_t seed, std::int64_t n_cap, int n_threads);

struct CountingRow {
  double h;
  double p1;        // empirical P(exactly one division in (t, t+h])
  double p1_se;
  double p2;        // empirical P(two or more divisions in (t, t+h])
  double p2_se;
};

struct CountingReport {
  std::vector<CountingRow> rows;
  double mean_hazard;     // E[B(chi(t))]
  double mean_hazard_se;
};

// Division-count probabilities over (t, t+h] along tagged lineages for each
// h in h_grid (positive, decreasing), with the mean hazard at t alongside.
CountingReport division_counting_check(const ModelParams& params, double x0,
                                       double v0, int p0, double t,
                                       const std::vector<double>& h_grid,
                                       std::int64_t n_rep, std::uint64_t seed,
                                       int n_threads);

std::string many_to_one_csv(const std::vector<ManyToOneRow>& rows);

}  // namespace polegrowth
