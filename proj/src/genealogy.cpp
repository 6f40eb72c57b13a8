#include "polegrowth/genealogy.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <queue>

namespace polegrowth {

namespace {

// Salts for the per-cell stream tree: children split off their parent's key,
// the lifetime draw and the rate draw use distinct sub-streams.
constexpr std::uint64_t kChildSalt[2] = {2, 3};
constexpr std::uint64_t kLifetimeSalt = 11;
constexpr std::uint64_t kRateSalt = 13;
constexpr std::uint64_t kRootSalt = 1;

struct DivisionEvent {
  double time;
  std::int32_t cell;
  bool operator>(const DivisionEvent& o) const {
    return time != o.time ? time > o.time : cell > o.cell;
  }
};

}  // namespace

double sample_lifetime(const DivisionRate& B, double x, double v,
                       RngStream& rng) {
  return invert_hazard(B, x, v, rng.exponential());
}

std::string Genealogy::label(std::int32_t idx) const {
  std::string s;
  while (idx > 0) {
    const auto& c = cells[idx];
    s.push_back(c.pole == 0 ? '0' : '1');
    idx = c.parent;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::int64_t Genealogy::division_count() const {
  std::int64_t n = 0;
  for (const auto& c : cells) n += c.divided() ? 1 : 0;
  return n;
}

Genealogy simulate_tree(const ModelParams& params, double x0, double v0,
                        int p0, double t_max, std::int64_t n_cap,
                        std::uint64_t seed) {
  params.validate();
  if (!(x0 > 0.0)) throw ValidationError("simulate_tree: root size must be > 0");
  if (v0 < params.e_min || v0 > params.e_max)
    throw ValidationError("simulate_tree: root rate outside [e_min, e_max]");
  if (p0 != 0 && p0 != 1)
    throw ValidationError("simulate_tree: root type must be 0 or 1");
  if (!(t_max > 0.0)) throw ValidationError("simulate_tree: t_max must be > 0");
  if (n_cap < 1) throw ValidationError("simulate_tree: n_cap must be >= 1");

  Genealogy g;
  g.t_max = t_max;
  g.n_cap = n_cap;
  g.seed = seed;

  CellRecord root;
  root.xi = x0;
  root.tau = v0;
  root.pole = static_cast<std::int8_t>(p0);
  root.theta = params.theta(p0);
  root.key = derive_key(seed, kRootSalt);
  g.cells.push_back(root);

  std::priority_queue<DivisionEvent, std::vector<DivisionEvent>,
                      std::greater<DivisionEvent>>
      pending;

  auto resolve = [&](std::int32_t idx) {
    CellRecord& c = g.cells[idx];
    RngStream life(derive_key(c.key, kLifetimeSalt));
    const double zeta = sample_lifetime(params.B, c.xi, c.tau, life);
    if (c.b + zeta <= t_max) {
      c.zeta = zeta;
      pending.push({c.b + zeta, idx});
    }
    // else: censored, zeta stays NaN
  };

  resolve(0);
  std::int64_t alive = 1;

  while (!pending.empty()) {
    if (alive >= n_cap) {
      g.truncated = true;
      g.frontier_time = pending.top().time;
      break;
    }
    const DivisionEvent ev = pending.top();
    pending.pop();
    // Mother divides: one old-pole and one new-pole child, sizes summing to
    // the mother's division size, rates drawn from the type kernels.
    const std::int32_t m = ev.cell;
    const double division_size =
        g.cells[m].xi * std::exp(g.cells[m].tau * g.cells[m].zeta);
    const double acc_child = g.cells[m].acc + g.cells[m].tau * g.cells[m].zeta;
    for (int type = 0; type < 2; ++type) {
      CellRecord child;
      child.parent = m;
      child.depth = g.cells[m].depth + 1;
      child.key = derive_key(g.cells[m].key, kChildSalt[type]);
      child.xi = params.theta(type) * division_size;
      child.b = ev.time;
      child.pole = static_cast<std::int8_t>(type);
      child.theta = params.theta(type);
      child.acc = acc_child;
      RngStream rate_rng(derive_key(child.key, kRateSalt));
      child.tau = sample_rate(params, type, g.cells[m].tau, rate_rng);
      const auto idx = static_cast<std::int32_t>(g.cells.size());
      g.cells.push_back(child);
      g.cells[m].child[type] = idx;
      resolve(idx);
    }
    alive += 1;  // two born, one gone
  }
  return g;
}

std::vector<std::int32_t> alive_cells(const Genealogy& g, double t) {
  if (t < 0.0 || t > g.t_max)
    throw ValidationError("snapshot: time outside [0, t_max]");
  if (g.truncated && t >= g.frontier_time)
    throw TruncationError(
        "snapshot: tree truncated before the requested time; rerun with a "
        "larger cell cap");
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    const auto& c = g.cells[i];
    if (c.b <= t && (c.censored() || t < c.death()))
      out.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

PopulationSnapshot take_snapshot(const Genealogy& g, double t) {
  PopulationSnapshot s;
  s.t = t;
  for (std::int32_t i : alive_cells(g, t)) {
    const auto& c = g.cells[i];
    s.cells.push_back({c.size_at(t), c.tau, c.pole});
  }
  return s;
}

std::string genealogy_csv(const Genealogy& g) {
  std::string out = "label,parent,xi,b,zeta,tau,p,theta\n";
  char buf[256];
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    const auto& c = g.cells[i];
    const std::string lbl = g.label(static_cast<std::int32_t>(i));
    const std::string par =
        c.parent < 0 ? std::string() : g.label(c.parent);
    char zeta[40] = "";
    if (!c.censored()) std::snprintf(zeta, sizeof zeta, "%.17g", c.zeta);
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%s,%.17g,%d,%.17g\n",
                  lbl.c_str(), par.c_str(), c.xi, c.b, zeta, c.tau,
                  int(c.pole), c.theta);
    out += buf;
  }
  return out;
}

std::string snapshot_csv(const PopulationSnapshot& s) {
  std::string out = "t,size,rate,type\n";
  char buf[160];
  for (const auto& e : s.cells) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", s.t, e.size,
                  e.rate, e.type);
    out += buf;
  }
  return out;
}

}  // namespace polegrowth
