#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "polegrowth/model.hpp"
#include "polegrowth/rng.hpp"

namespace polegrowth {

// Uniform grid in log-size: exponential growth moves mass at constant speed
// across it.
struct LogSizeGrid {
  double x_lo = 0.0, x_hi = 0.0;
  int n = 0;
  double u_lo = 0.0, du = 0.0;

  static LogSizeGrid make(double x_lo, double x_hi, int n);
  double center_log(int j) const { return u_lo + (j + 0.5) * du; }
  double center(int j) const { return std::exp(center_log(j)); }
  double edge_log(int j) const { return u_lo + j * du; }
  // Cell index of size x, or -1 when outside the grid.
  int index(double x) const;
};

// Finite node set carrying the rate variable. Point-mass and grid kernels
// are exact on it; continuous kernels are projected by mass lumping.
struct RateNodeSet {
  std::vector<double> v;
  int nearest(double value) const;
};

// Node set adapted to the model's kernels: the atoms for atomic kernels
// (plus the initial rate), a uniform grid of n_v nodes otherwise.
RateNodeSet make_rate_nodes(const ModelParams& p, int n_v, double v0);

// Nonnegative masses on (type, rate node, log-size cell).
struct GridMeasure {
  LogSizeGrid grid;
  RateNodeSet nodes;
  double time = 0.0;
  double outside = 0.0;  // mass that fell off the size grid when binning
  std::array<Eigen::ArrayXXd, 2> mass;  // each n_v x n_x

  static GridMeasure zero(const LogSizeGrid& g, const RateNodeSet& nodes);
  void deposit(int type, int node, double size, double w);
  double total() const { return mass[0].sum() + mass[1].sum(); }
  // sum of mass * f(cell-center size, node rate, type)
  double integrate(const std::function<double(double, double, int)>& f) const;
};

double l1_distance(const GridMeasure& a, const GridMeasure& b);

std::string grid_measure_csv(const GridMeasure& m);

// Initial law of the root cell: either a fixed state or a draw from a
// piecewise-constant-in-log-size profile.
class RootLaw {
 public:
  static RootLaw fixed(double x0, double v0, int p0);
  static RootLaw from_profile(GridMeasure profile);

  struct State {
    double x0, v0;
    int p0;
  };
  State sample(RngStream& rng) const;
  bool is_fixed() const { return fixed_; }
  const State& fixed_state() const { return state_; }

  // The law as a grid measure (the profile itself, or the fixed state's
  // mass placed in its containing cell).
  GridMeasure as_grid_measure(const LogSizeGrid& g,
                              const RateNodeSet& nodes) const;

 private:
  bool fixed_ = true;
  State state_{1.0, 1.0, 0};
  GridMeasure profile_;
  std::vector<double> cumulative_;  // over flattened (type, node, cell)
};

}  // namespace polegrowth
