#include "polegrowth/config_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace polegrowth {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: expected key = value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError("config: empty key");
    cfg.values_[section + "." + key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return values_.count(section + "." + key) > 0;
}

std::string ConfigFile::get(const std::string& section,
                            const std::string& key) const {
  const auto it = values_.find(section + "." + key);
  if (it == values_.end())
    throw ValidationError("config: missing key [" + section + "] " + key);
  return it->second;
}

std::string ConfigFile::get_or(const std::string& section,
                               const std::string& key,
                               const std::string& fallback) const {
  const auto it = values_.find(section + "." + key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key) const {
  const std::string v = get(section, key);
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError("config: [" + section + "] " + key +
                          " is not a number: " + v);
  }
}

double ConfigFile::get_double_or(const std::string& section,
                                 const std::string& key,
                                 double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ConfigFile::get_int_or(const std::string& section,
                                    const std::string& key,
                                    std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  return static_cast<std::int64_t>(get_double(section, key));
}

ModelParams model_from_config(const ConfigFile& cfg) {
  ModelParams p;
  const std::string family = cfg.get_or("model", "b.family", "power");
  if (family == "power") {
    p.B = DivisionRate::power(cfg.get_double_or("model", "b.c", 1.0),
                              cfg.get_double_or("model", "b.gamma", 1.0));
  } else if (family == "table") {
    std::vector<std::pair<double, double>> knots;
    std::istringstream in(cfg.get("model", "b.knots"));
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw ValidationError("config: b.knots entries must be x:B pairs");
      knots.emplace_back(std::stod(item.substr(0, colon)),
                         std::stod(item.substr(colon + 1)));
    }
    p.B = DivisionRate::table(std::move(knots));
  } else {
    throw ValidationError("config: unknown b.family: " + family);
  }
  p.set_theta0(cfg.get_double_or("model", "theta0", 0.5));
  p.e_min = cfg.get_double_or("model", "e_min", 1.0);
  p.e_max = cfg.get_double_or("model", "e_max", 1.0);

  auto kernel_from = [&](const std::string& prefix) -> RateKernel {
    const std::string kf = cfg.get_or("model", prefix + ".family", "point");
    if (kf == "point")
      return PointMassKernel{
          cfg.get_double_or("model", prefix + ".value", p.e_min)};
    if (kf == "gauss")
      return TruncGaussKernel{cfg.get_double_or("model", prefix + ".sigma", 0.1)};
    if (kf == "grid")
      return make_gaussian_grid_kernel(
          static_cast<int>(cfg.get_int_or("model", prefix + ".n", 16)),
          cfg.get_double_or("model", prefix + ".sigma", 0.1), p.e_min, p.e_max);
    throw ValidationError("config: unknown kernel family: " + kf);
  };
  // `kernel.*` configures both pole types; `kernel0.*` / `kernel1.*`
  // override one side.
  p.rho[0] = kernel_from(cfg.has("model", "kernel0.family") ? "kernel0" : "kernel");
  p.rho[1] = kernel_from(cfg.has("model", "kernel1.family") ? "kernel1" : "kernel");
  p.validate();
  return p;
}

RunConfig run_config_from_file(const ConfigFile& cfg) {
  RunConfig rc;
  rc.model = model_from_config(cfg);
  rc.grid.x_lo = cfg.get_double_or("grid", "x_lo", rc.grid.x_lo);
  rc.grid.x_hi = cfg.get_double_or("grid", "x_hi", rc.grid.x_hi);
  rc.grid.n_x = static_cast<int>(cfg.get_int_or("grid", "n_x", rc.grid.n_x));
  rc.grid.n_v = static_cast<int>(cfg.get_int_or("grid", "n_v", rc.grid.n_v));
  rc.grid.dt = cfg.get_double_or("grid", "dt", rc.grid.dt);
  rc.grid.t_max = cfg.get_double_or("grid", "t_max", rc.grid.t_max);

  rc.run.t_max = cfg.get_double_or("run", "t_max", rc.run.t_max);
  rc.run.t = cfg.get_double_or("run", "t", -1.0);
  if (rc.run.t < 0.0) rc.run.t = rc.run.t_max;
  rc.run.n_rep = cfg.get_int_or("run", "n_rep", rc.run.n_rep);
  rc.run.n_cap = cfg.get_int_or("run", "n_cap", rc.run.n_cap);
  rc.run.n_steps = cfg.get_int_or("run", "n_steps", rc.run.n_steps);
  rc.run.burn_in = cfg.get_int_or("run", "burn_in", rc.run.burn_in);
  rc.run.seed = static_cast<std::uint64_t>(cfg.get_int_or("run", "seed", 1));
  rc.run.x0 = cfg.get_double_or("run", "x0", 1.0);
  rc.run.v0 = cfg.get_double_or("run", "v0",
                                0.5 * (rc.model.e_min + rc.model.e_max));
  rc.run.p0 = static_cast<int>(cfg.get_int_or("run", "p0", 0));
  rc.run.l1_tol = cfg.get_double_or("run", "l1_tol", 0.05);

  rc.estimator.y_lo = cfg.get_double_or("estimator", "y_lo", rc.estimator.y_lo);
  rc.estimator.y_hi = cfg.get_double_or("estimator", "y_hi", rc.estimator.y_hi);
  rc.estimator.n_y =
      static_cast<int>(cfg.get_int_or("estimator", "n_y", rc.estimator.n_y));
  rc.estimator.s = cfg.get_double_or("estimator", "s", rc.estimator.s);
  rc.estimator.c0 = cfg.get_double_or("estimator", "c0", rc.estimator.c0);
  rc.estimator.h = cfg.get_double_or("estimator", "h", 0.0);
  rc.estimator.varpi = cfg.get_double_or("estimator", "varpi", 0.0);
  const std::string shape =
      cfg.get_or("estimator", "kernel.shape", "epanechnikov");
  if (shape == "rectangular")
    rc.estimator.shape = KernelShape::kRectangular;
  else if (shape == "triangular")
    rc.estimator.shape = KernelShape::kTriangular;
  else if (shape == "epanechnikov")
    rc.estimator.shape = KernelShape::kEpanechnikov;
  else
    throw ValidationError("config: unknown kernel shape: " + shape);
  rc.estimator.order =
      static_cast<int>(cfg.get_int_or("estimator", "kernel.order", 1));
  rc.out_dir = cfg.get_or("output", "dir", ".");
  return rc;
}

EstimationConfig RunConfig::estimation_config() const {
  EstimationConfig ec;
  if (!(estimator.y_hi > estimator.y_lo) || estimator.n_y < 2)
    throw ValidationError("estimator: need y_hi > y_lo and n_y >= 2");
  for (int i = 0; i < estimator.n_y; ++i)
    ec.y_grid.push_back(estimator.y_lo + (estimator.y_hi - estimator.y_lo) *
                                             i / (estimator.n_y - 1.0));
  ec.h = estimator.h;
  ec.varpi = estimator.varpi;
  ec.c0 = estimator.c0;
  ec.s = estimator.s;
  return ec;
}

std::string model_to_config(const ModelParams& p) {
  char buf[256];
  std::string out = "[model]\n";
  if (p.B.is_power()) {
    std::snprintf(buf, sizeof buf,
                  "b.family = power\nb.c = %.17g\nb.gamma = %.17g\n",
                  p.B.power_coeff(), p.B.power_exponent());
    out += buf;
  } else {
    out += "b.family = table\nb.knots = ";
    for (std::size_t i = 0; i < p.B.knots().size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.17g:%.17g", i ? "," : "",
                    p.B.knots()[i].first, p.B.knots()[i].second);
      out += buf;
    }
    out += "\n";
  }
  std::snprintf(buf, sizeof buf, "theta0 = %.17g\ne_min = %.17g\ne_max = %.17g\n",
                p.theta0, p.e_min, p.e_max);
  out += buf;
  for (int i = 0; i < 2; ++i) {
    const std::string prefix = i == 0 ? "kernel0" : "kernel1";
    if (const auto* pm = std::get_if<PointMassKernel>(&p.rho[i])) {
      std::snprintf(buf, sizeof buf, "%s.family = point\n%s.value = %.17g\n",
                    prefix.c_str(), prefix.c_str(), pm->value);
    } else if (const auto* gk = std::get_if<GridKernel>(&p.rho[i])) {
      std::snprintf(buf, sizeof buf, "%s.family = grid\n%s.n = %d\n",
                    prefix.c_str(), prefix.c_str(),
                    static_cast<int>(gk->nodes.size()));
    } else {
      const auto& tg = std::get<TruncGaussKernel>(p.rho[i]);
      std::snprintf(buf, sizeof buf, "%s.family = gauss\n%s.sigma = %.17g\n",
                    prefix.c_str(), prefix.c_str(), tg.sigma);
    }
    out += buf;
  }
  return out;
}

}  // namespace polegrowth
