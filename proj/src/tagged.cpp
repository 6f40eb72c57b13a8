#include "polegrowth/tagged.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "polegrowth/parallel.hpp"

namespace polegrowth {

namespace {

constexpr std::uint64_t kTaggedSalt = 17;
constexpr std::uint64_t kTreeSalt = 19;

struct MeanSe {
  double mean, se;
};

// Mean and standard error of the per-replicate values in `v`.
MeanSe mean_se(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

const TaggedEvent* TaggedPath::last_before(double t) const {
  // Last event with time <= t, or nullptr if none.
  auto it = std::upper_bound(
      events_.begin(), events_.end(), t,
      [](double tt, const TaggedEvent& e) { return tt < e.time; });
  return it == events_.begin() ? nullptr : &*(it - 1);
}

double TaggedPath::chi(double t) const {
  const TaggedEvent* e = last_before(t);
  if (e == nullptr) return x0_ * std::exp(v0_ * t);
  return e->size_after * std::exp(e->rate_after * (t - e->time));
}

double TaggedPath::rate(double t) const {
  const TaggedEvent* e = last_before(t);
  return e == nullptr ? v0_ : e->rate_after;
}

double TaggedPath::vbar(double t) const {
  const TaggedEvent* e = last_before(t);
  if (e == nullptr) return v0_ * t;
  return e->vbar_at + e->rate_after * (t - e->time);
}

int TaggedPath::type(double t) const {
  const TaggedEvent* e = last_before(t);
  return e == nullptr ? p0_ : e->type;
}

std::int32_t TaggedPath::divisions(double t) const {
  const TaggedEvent* e = last_before(t);
  return e == nullptr ? 0 : e->n_old + e->n_new;
}

std::int32_t TaggedPath::old_count(double t) const {
  const TaggedEvent* e = last_before(t);
  return e == nullptr ? 0 : e->n_old;
}

std::int32_t TaggedPath::new_count(double t) const {
  const TaggedEvent* e = last_before(t);
  return e == nullptr ? 0 : e->n_new;
}

TaggedPath sample_tagged_path(const ModelParams& params, double x0, double v0,
                              int p0, double t_max, std::uint64_t seed) {
  params.validate();
  if (!(x0 > 0.0)) throw ValidationError("tagged path: root size must be > 0");
  if (v0 < params.e_min || v0 > params.e_max)
    throw ValidationError("tagged path: root rate outside [e_min, e_max]");
  TaggedPath path(x0, v0, p0, t_max);
  RngStream rng(derive_key(seed, kTaggedSalt));

  double t = 0.0, x = x0, v = v0, vbar = 0.0;
  std::int32_t n_old = 0, n_new = 0;
  for (;;) {
    const double zeta = sample_lifetime(params.B, x, v, rng);
    if (t + zeta > t_max) break;
    t += zeta;
    vbar += v * zeta;
    const double division_size = x * std::exp(v * zeta);
    const int type = rng.bernoulli(params.theta1);
    (type == 0 ? n_old : n_new) += 1;
    x = params.theta(type) * division_size;
    v = sample_rate(params, type, v, rng);
    path.add_event({t, x, v, vbar, n_old, n_new, static_cast<std::int8_t>(type)});
  }
  return path;
}

std::vector<PhiFunction> default_phi_battery() {
  auto bump = [](double s, double center, double width) {
    const double z = (s - center) / width;
    const double q = 1.0 - z * z;
    return q > 0.0 ? q * q * q : 0.0;
  };
  return {
      {"one", [](double, double, double, int) { return 1.0; }},
      {"size", [](double s, double, double, int) { return s; }},
      {"rate", [](double, double v, double, int) { return v; }},
      {"acc_growth", [](double, double, double a, int) { return a; }},
      {"size_times_rate", [](double s, double v, double, int) { return s * v; }},
      {"bump_low", [bump](double s, double, double, int) {
         return bump(s, 0.8, 0.5);
       }},
      {"bump_high", [bump](double s, double, double, int) {
         return bump(s, 2.0, 1.0);
       }},
      {"old_pole_indicator",
       [](double, double, double, int q) { return q == 0 ? 1.0 : 0.0; }},
      {"size_if_new_pole",
       [](double s, double, double, int q) { return q == 1 ? s : 0.0; }},
  };
}

std::vector<ManyToOneRow> many_to_one_check(
    const ModelParams& params, double x0, double v0, int p0, double t,
    const std::vector<PhiFunction>& battery, std::int64_t n_rep,
    std::uint64_t seed, std::int64_t n_cap, int n_threads) {
  const auto n_phi = battery.size();
  std::vector<std::vector<double>> lhs(n_phi), rhs(n_phi);
  for (auto& v : lhs) v.resize(n_rep);
  for (auto& v : rhs) v.resize(n_rep);

  const std::uint64_t tagged_domain = derive_key(seed, kTaggedSalt);
  const std::uint64_t tree_domain = derive_key(seed, kTreeSalt);
  parallel_for(n_rep, n_threads, [&](std::int64_t r) {
    const TaggedPath path =
        sample_tagged_path(params, x0, v0, p0, t, derive_key(tagged_domain, r));
    const double s = path.chi(t), v = path.rate(t), a = path.vbar(t);
    const int q = path.type(t);
    for (std::size_t k = 0; k < n_phi; ++k) lhs[k][r] = battery[k].f(s, v, a, q);

    const Genealogy g = simulate_tree(params, x0, v0, p0, t, n_cap,
                                      derive_key(tree_domain, r));
    for (std::size_t k = 0; k < n_phi; ++k) rhs[k][r] = 0.0;
    for (std::int32_t i : alive_cells(g, t)) {
      const auto& c = g.cells[i];
      const double size_t_u = c.size_at(t);
      const double taubar = c.acc + c.tau * (t - c.b);
      const double weight = size_t_u * std::exp(-taubar) / x0;
      for (std::size_t k = 0; k < n_phi; ++k)
        rhs[k][r] += weight * battery[k].f(size_t_u, c.tau, taubar, c.pole);
    }
  });

  std::vector<ManyToOneRow> out;
  out.reserve(n_phi);
  for (std::size_t k = 0; k < n_phi; ++k) {
    const MeanSe l = mean_se(lhs[k]);
    const MeanSe r = mean_se(rhs[k]);
    const double comb = std::sqrt(l.se * l.se + r.se * r.se);
    // Floor guards phi for which both estimators are exact (e.g. phi == 1),
    // where the combined SE is pure roundoff.
    const double z = (l.mean - r.mean) / std::max(comb, 1e-12);
    out.push_back({battery[k].id, t, l.mean, l.se, r.mean, r.se, z});
  }
  return out;
}

CountingReport division_counting_check(const ModelParams& params, double x0,
                                       double v0, int p0, double t,
                                       const std::vector<double>& h_grid,
                                       std::int64_t n_rep, std::uint64_t seed,
                                       int n_threads) {
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid[i] > 0.0) || (i > 0 && h_grid[i] >= h_grid[i - 1]))
      throw ValidationError("counting check: h grid must be positive, decreasing");
  }
  const double h_max = h_grid.front();
  const auto n_h = h_grid.size();

  std::vector<std::vector<double>> one(n_h), two(n_h);
  for (auto& v : one) v.resize(n_rep);
  for (auto& v : two) v.resize(n_rep);
  std::vector<double> hazard(n_rep);

  const std::uint64_t domain = derive_key(seed, 23);
  parallel_for(n_rep, n_threads, [&](std::int64_t r) {
    const TaggedPath path = sample_tagged_path(params, x0, v0, p0, t + h_max,
                                               derive_key(domain, r));
    hazard[r] = params.B(path.chi(t));
    const std::int32_t base = path.divisions(t);
    for (std::size_t k = 0; k < n_h; ++k) {
      const std::int32_t d = path.divisions(t + h_grid[k]) - base;
      one[k][r] = d == 1 ? 1.0 : 0.0;
      two[k][r] = d >= 2 ? 1.0 : 0.0;
    }
  });

  CountingReport rep;
  for (std::size_t k = 0; k < n_h; ++k) {
    const MeanSe p1 = mean_se(one[k]);
    const MeanSe p2 = mean_se(two[k]);
    rep.rows.push_back({h_grid[k], p1.mean, p1.se, p2.mean, p2.se});
  }
  const MeanSe hz = mean_se(hazard);
  rep.mean_hazard = hz.mean;
  rep.mean_hazard_se = hz.se;
  return rep;
}

std::string many_to_one_csv(const std::vector<ManyToOneRow>& rows) {
  std::string out = "phi_id,t,lhs,lhs_se,rhs,rhs_se,z_score\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.phi_id.c_str(), r.t, r.lhs, r.lhs_se, r.rhs, r.rhs_se,
                  r.z);
    out += buf;
  }
  return out;
}

}  // namespace polegrowth
