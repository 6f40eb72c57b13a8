#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "polegrowth/model.hpp"
#include "polegrowth/rng.hpp"

namespace polegrowth {

// Thrown when a query would read past the truncation frontier of a capped
// simulation; the CLI maps it to exit code 3.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One node of the binary genealogical tree. Child 0 keeps the old pole and
// inherits fraction theta0 of the mother's division size; child 1 is the new
// pole with fraction theta1.
struct CellRecord {
  std::int32_t parent = -1;
  std::int32_t child[2] = {-1, -1};
  std::int32_t depth = 0;
  double xi = 0.0;    // size at birth
  double b = 0.0;     // birth time
  double zeta = std::numeric_limits<double>::quiet_NaN();  // NaN: censored
  double tau = 0.0;   // growth rate, constant over the lifetime
  double acc = 0.0;   // sum of tau*zeta over strict ancestors
  double theta = 0.0; // inherited fraction theta_{pole}
  std::int8_t pole = 0;
  std::uint64_t key = 0;  // RNG stream key of this cell

  bool divided() const { return child[0] >= 0; }
  bool censored() const { return std::isnan(zeta); }
  double death() const { return b + zeta; }  // NaN when censored
  double size_at(double t) const { return xi * std::exp(tau * (t - b)); }
};

struct Genealogy {
  std::vector<CellRecord> cells;  // cells[0] is the root
  double t_max = 0.0;
  std::int64_t n_cap = 0;
  bool truncated = false;
  // Earliest division event left unexpanded when the cap was hit; snapshots
  // at or beyond this time would be incomplete.
  double frontier_time = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  std::string label(std::int32_t idx) const;  // binary string, root -> ""
  std::int64_t division_count() const;
};

struct SnapshotEntry {
  double size;
  double rate;
  int type;
};
struct PopulationSnapshot {
  double t = 0.0;
  std::vector<SnapshotEntry> cells;
};

// Lifetime with survival P(zeta >= t) = exp(-Lambda(t)), by inverting the
// cumulative hazard at a unit exponential draw. Always finite.
double sample_lifetime(const DivisionRate& B, double x, double v,
                       RngStream& rng);

// Expands the tree chronologically until t_max, stopping early (with the
// truncated flag) once the alive-cell count reaches n_cap. Each cell's draws
// come from a stream keyed by (seed, label), so the result is a pure function
// of (params, root, t_max, n_cap, seed).
Genealogy simulate_tree(const ModelParams& params, double x0, double v0,
                        int p0, double t_max, std::int64_t n_cap,
                        std::uint64_t seed);

// Cells alive at time t with their current sizes. Throws TruncationError if
// the tree is truncated at or before t.
PopulationSnapshot take_snapshot(const Genealogy& g, double t);

// Indices of cells alive at t (internal building block of take_snapshot).
std::vector<std::int32_t> alive_cells(const Genealogy& g, double t);

std::string genealogy_csv(const Genealogy& g);
std::string snapshot_csv(const PopulationSnapshot& s);

}  // namespace polegrowth
