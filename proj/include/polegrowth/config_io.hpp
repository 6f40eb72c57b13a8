#pragma once

#include <map>
#include <string>

#include "polegrowth/estimator.hpp"
#include "polegrowth/model.hpp"

namespace polegrowth {

// INI-style config: [section] headers, key = value lines, '#'/';' comments.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);  // throws std::ios failure

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  std::int64_t get_int_or(const std::string& section, const std::string& key,
                          std::int64_t fallback) const;
  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> value
  std::string text_;
};

struct GridConfig {
  double x_lo = 0.05, x_hi = 20.0;
  int n_x = 256;
  int n_v = 1;
  double dt = 0.0;
  double t_max = 1.0;
};

struct RunSection {
  double t_max = 1.0;
  double t = -1.0;  // query time; defaults to t_max when negative
  std::int64_t n_rep = 1000;
  std::int64_t n_cap = 1000000;
  std::int64_t n_steps = 100000;
  std::int64_t burn_in = 1000;
  std::uint64_t seed = 1;
  double x0 = 1.0, v0 = 1.0;
  int p0 = 0;
  double l1_tol = 0.05;
};

struct EstimatorSection {
  double y_lo = 1.0, y_hi = 2.2;
  int n_y = 121;
  double s = 2.0;
  double c0 = 0.6;
  double h = 0.0;
  double varpi = 0.0;
  KernelShape shape = KernelShape::kEpanechnikov;
  int order = 1;
};

struct RunConfig {
  ModelParams model;
  GridConfig grid;
  RunSection run;
  EstimatorSection estimator;
  std::string out_dir = ".";

  EstimationConfig estimation_config() const;
};

ModelParams model_from_config(const ConfigFile& cfg);
RunConfig run_config_from_file(const ConfigFile& cfg);
std::string model_to_config(const ModelParams& p);

}  // namespace polegrowth
