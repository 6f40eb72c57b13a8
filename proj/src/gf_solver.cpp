#include "polegrowth/gf_solver.hpp"

#include <cmath>

#include "polegrowth/genealogy.hpp"
#include "polegrowth/parallel.hpp"

namespace polegrowth {

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; the rule
// is symmetric). Plenty for smooth kernel densities.
constexpr double kGlNode[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr double kGlWeight[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

}  // namespace

double kernel_expectation(const ModelParams& params, int child_type, double v,
                          const std::function<double(double)>& g) {
  const RateKernel& k = params.rho[child_type];
  if (const auto* pm = std::get_if<PointMassKernel>(&k)) return g(pm->value);
  if (const auto* gk = std::get_if<GridKernel>(&k)) {
    const int row = nearest_grid_node(gk->nodes, v);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < gk->nodes.size(); ++j)
      acc += gk->rows(row, j) * g(gk->nodes(j));
    return acc;
  }
  const double mid = 0.5 * (params.e_min + params.e_max);
  const double half = 0.5 * (params.e_max - params.e_min);
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) {
    for (double s : {-1.0, 1.0}) {
      const double vp = mid + s * half * kGlNode[i];
      acc += kGlWeight[i] * g(vp) * rate_kernel_density(params, child_type, v, vp);
    }
  }
  return acc * half;
}

Timeline solve_gf_equation(const ModelParams& params, const GridMeasure& init,
                           double t_end, const SolverOptions& opt) {
  params.validate();
  if (!(t_end > 0.0)) throw ValidationError("solver: t_end must be > 0");
  const LogSizeGrid& g = init.grid;
  const auto n_v = static_cast<int>(init.nodes.v.size());
  const double v_max = *std::max_element(init.nodes.v.begin(), init.nodes.v.end());
  const double dt_bound = opt.safety * g.du / v_max;

  double dt = opt.dt;
  if (dt <= 0.0) {
    const auto n_steps = static_cast<long>(std::ceil(t_end / dt_bound - 1e-12));
    dt = t_end / static_cast<double>(n_steps);
  } else if (dt > dt_bound * (1.0 + 1e-12)) {
    throw ValidationError("solver: dt violates the advection stability bound");
  }
  const auto n_steps = static_cast<long>(std::llround(t_end / dt));

  // Division remap: a child of type i' born from cell-center size x lands at
  // theta_{i'} x, a constant shift of log(theta_{i'})/du cells; split the
  // mass linearly between the two covering cells. Rate mixing rows are fixed
  // per (child type, mother node).
  struct Shift {
    long j0;      // lower target cell offset
    double w_hi;  // weight of the upper cell
  };
  Shift shift[2];
  for (int type = 0; type < 2; ++type) {
    const double off = std::log(params.theta(type)) / g.du;
    const double fl = std::floor(off);
    shift[type].j0 = static_cast<long>(fl);
    shift[type].w_hi = off - fl;
  }
  std::array<std::vector<Eigen::VectorXd>, 2> mix;
  for (int type = 0; type < 2; ++type)
    for (int k = 0; k < n_v; ++k)
      mix[type].push_back(
          lump_rate_kernel(params, type, init.nodes.v[k], init.nodes.v));

  Eigen::ArrayXd hazard_step(g.n);  // fraction of a cell divided per step
  for (int j = 0; j < g.n; ++j)
    hazard_step(j) = -std::expm1(-params.B(g.center(j)) * dt);

  Timeline tl;
  tl.dt = dt;
  tl.frame_dt = dt * opt.save_every;
  GridMeasure state = init;
  state.time = 0.0;
  tl.frames.push_back(state);

  Eigen::ArrayXd divided(g.n);
  for (long step = 1; step <= n_steps; ++step) {
    GridMeasure next = state;
    // upwind advection, one speed per rate node
    for (int type = 0; type < 2; ++type) {
      for (int k = 0; k < n_v; ++k) {
        const double cfl = init.nodes.v[k] * dt / g.du;
        auto row = state.mass[type].row(k);
        auto out = next.mass[type].row(k);
        tl.lost_above += cfl * row(g.n - 1);
        for (int j = g.n - 1; j >= 1; --j)
          out(j) = row(j) - cfl * (row(j) - row(j - 1));
        out(0) = row(0) - cfl * row(0);
      }
    }
    // division: exponential in-cell loss computed from the advected state
    // for every row first, so newborn mass is not re-divided this step
    std::array<Eigen::ArrayXXd, 2> div_mass;
    for (int type = 0; type < 2; ++type) {
      div_mass[type] = next.mass[type];
      for (int k = 0; k < n_v; ++k)
        div_mass[type].row(k) *= hazard_step.transpose();
      next.mass[type] -= div_mass[type];
    }
    for (int type = 0; type < 2; ++type) {
      for (int k = 0; k < n_v; ++k) {
        divided = div_mass[type].row(k).transpose();
        for (int child = 0; child < 2; ++child) {
          const Eigen::VectorXd& w = mix[child][k];
          for (int j = 0; j < g.n; ++j) {
            if (divided(j) == 0.0) continue;
            const long lo = j + shift[child].j0;
            const double m_hi = divided(j) * shift[child].w_hi;
            const double m_lo = divided(j) - m_hi;
            for (int kp = 0; kp < n_v; ++kp) {
              if (w(kp) == 0.0) continue;
              if (lo >= 0)
                next.mass[child](kp, lo) += w(kp) * m_lo;
              else
                tl.lost_below += w(kp) * m_lo;
              if (lo + 1 >= 0 && lo + 1 < g.n)
                next.mass[child](kp, lo + 1) += w(kp) * m_hi;
              else
                tl.lost_below += w(kp) * m_hi;  // lo+1 == n cannot occur: theta < 1
            }
          }
        }
      }
    }
    next.time = dt * static_cast<double>(step);
    state = std::move(next);
    if (tl.lost_above > opt.overflow_tol * (state.total() + tl.lost_above))
      throw TruncationError(
          "solver: more than the tolerated mass fraction left the grid above "
          "x_hi; enlarge the size grid");
    if (step % opt.save_every == 0 || step == n_steps) tl.frames.push_back(state);
  }
  return tl;
}

GridMeasure empirical_mean_measure(const ModelParams& params,
                                   const RootLaw& root_law, double t,
                                   std::int64_t n_rep, const LogSizeGrid& grid,
                                   const RateNodeSet& nodes, std::uint64_t seed,
                                   std::int64_t n_cap, int n_threads,
                                   GridMeasure* se_out) {
  if (n_rep < 1) throw ValidationError("empirical measure: n_rep must be >= 1");
  struct Entry {
    std::int32_t flat;
    double w;
  };
  std::vector<std::vector<Entry>> sparse(n_rep);
  std::vector<double> outside(n_rep, 0.0);
  const auto n_v = static_cast<int>(nodes.v.size());
  const int n_x = grid.n;
  const std::uint64_t root_domain = derive_key(seed, 31);
  const std::uint64_t tree_domain = derive_key(seed, 37);

  parallel_for(n_rep, n_threads, [&](std::int64_t r) {
    RngStream root_rng(derive_key(root_domain, r));
    const RootLaw::State root = root_law.sample(root_rng);
    const Genealogy g = simulate_tree(params, root.x0, root.v0, root.p0, t,
                                      n_cap, derive_key(tree_domain, r));
    auto& slots = sparse[r];
    for (std::int32_t i : alive_cells(g, t)) {
      const auto& c = g.cells[i];
      const int j = grid.index(c.size_at(t));
      if (j < 0) {
        outside[r] += 1.0;
        continue;
      }
      const int k = nodes.nearest(c.tau);
      const std::int32_t flat = (c.pole * n_v + k) * n_x + j;
      bool found = false;
      for (auto& e : slots)
        if (e.flat == flat) {
          e.w += 1.0;
          found = true;
          break;
        }
      if (!found) slots.push_back({flat, 1.0});
    }
  });

  // fixed-order fold so results do not depend on the thread count
  GridMeasure mean = GridMeasure::zero(grid, nodes);
  mean.time = t;
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(2 * n_v * n_x);
  Eigen::ArrayXd sumsq = Eigen::ArrayXd::Zero(2 * n_v * n_x);
  double outside_sum = 0.0;
  for (std::int64_t r = 0; r < n_rep; ++r) {
    for (const auto& e : sparse[r]) {
      sum(e.flat) += e.w;
      sumsq(e.flat) += e.w * e.w;
    }
    outside_sum += outside[r];
  }
  const double inv_n = 1.0 / static_cast<double>(n_rep);
  for (int type = 0; type < 2; ++type)
    for (int k = 0; k < n_v; ++k)
      for (int j = 0; j < n_x; ++j)
        mean.mass[type](k, j) = sum((type * n_v + k) * n_x + j) * inv_n;
  mean.outside = outside_sum * inv_n;
  if (se_out != nullptr) {
    *se_out = GridMeasure::zero(grid, nodes);
    se_out->time = t;
    if (n_rep > 1) {
      for (int type = 0; type < 2; ++type)
        for (int k = 0; k < n_v; ++k)
          for (int j = 0; j < n_x; ++j) {
            const auto flat = (type * n_v + k) * n_x + j;
            const double m = sum(flat) * inv_n;
            const double var =
                (sumsq(flat) * inv_n - m * m) / static_cast<double>(n_rep - 1);
            se_out->mass[type](k, j) = std::sqrt(std::max(var, 0.0));
          }
    }
  }
  return mean;
}

std::vector<TestFunction> default_test_battery() {
  // C^2 bumps in log-size; dfdx via the chain rule d/dx = (1/x) d/du.
  auto make_bump = [](std::string id, double u0, double w, int only_type,
                      bool rate_weighted) {
    auto val = [u0, w, only_type, rate_weighted](double x, double v, int q) {
      if (only_type >= 0 && q != only_type) return 0.0;
      const double z = (std::log(x) - u0) / w;
      const double s = 1.0 - z * z;
      if (s <= 0.0) return 0.0;
      return (rate_weighted ? v : 1.0) * s * s * s;
    };
    auto der = [u0, w, only_type, rate_weighted](double x, double v, int q) {
      if (only_type >= 0 && q != only_type) return 0.0;
      const double z = (std::log(x) - u0) / w;
      const double s = 1.0 - z * z;
      if (s <= 0.0) return 0.0;
      return (rate_weighted ? v : 1.0) * 3.0 * s * s * (-2.0 * z) / (w * x);
    };
    return TestFunction{std::move(id), val, der};
  };
  std::vector<TestFunction> battery;
  battery.push_back(make_bump("bump_center", 0.0, 1.2, -1, false));
  battery.push_back(make_bump("bump_upper", 1.0, 0.8, -1, false));
  battery.push_back(make_bump("bump_lower", -0.9, 0.8, -1, false));
  battery.push_back(make_bump("bump_old_pole", 0.2, 1.0, 0, false));
  battery.push_back(make_bump("bump_new_pole", 0.2, 1.0, 1, false));
  battery.push_back(make_bump("bump_rate_weighted", 0.0, 1.2, -1, true));
  battery.push_back({"count",
                     [](double, double, int) { return 1.0; },
                     [](double, double, int) { return 0.0; }});
  battery.push_back({"biomass", [](double x, double, int) { return x; },
                     [](double, double, int) { return 1.0; }});
  return battery;
}

namespace {

// <n, B phi> and the redistribution term of the weak form, on the node set.
double generator_term(const ModelParams& params, const GridMeasure& m,
                      const TestFunction& phi) {
  double acc = 0.0;
  for (int type = 0; type < 2; ++type)
    for (Eigen::Index k = 0; k < m.mass[type].rows(); ++k) {
      const double v = m.nodes.v[static_cast<std::size_t>(k)];
      for (int j = 0; j < m.grid.n; ++j) {
        const double w = m.mass[type](k, j);
        if (w == 0.0) continue;
        const double x = m.grid.center(j);
        double jump = -phi.f(x, v, type);
        for (int child = 0; child < 2; ++child) {
          const double cx = params.theta(child) * x;
          jump += kernel_expectation(
              params, child, v, [&](double vp) { return phi.f(cx, vp, child); });
        }
        acc += w * (x * v * phi.dfdx(x, v, type) + params.B(x) * jump);
      }
    }
  return acc;
}

}  // namespace

double weak_residual(const ModelParams& params, const Timeline& timeline,
                     const std::vector<TestFunction>& battery) {
  if (timeline.frames.size() < 2)
    throw ValidationError("weak residual: need at least two frames");
  double worst = 0.0;
  for (const auto& phi : battery) {
    double scale = 1.0;
    for (const auto& fr : timeline.frames)
      scale = std::max(scale, std::abs(fr.integrate([&](double x, double v,
                                                        int q) {
        return phi.f(x, v, q);
      })));
    for (std::size_t k = 0; k + 1 < timeline.frames.size(); ++k) {
      const auto& a = timeline.frames[k];
      const auto& b = timeline.frames[k + 1];
      const double lhs =
          (b.integrate(phi.f) - a.integrate(phi.f)) / (b.time - a.time);
      const double rhs = generator_term(params, a, phi);
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
  }
  return worst;
}

std::vector<EmpiricalResidualRow> weak_residual_empirical(
    const ModelParams& params, const RootLaw& root_law,
    const std::vector<double>& t_list, double h,
    const std::vector<TestFunction>& battery, std::int64_t n_rep,
    std::uint64_t seed, std::int64_t n_cap, int n_threads) {
  if (!(h > 0.0)) throw ValidationError("weak residual: h must be > 0");
  double t_end = 0.0;
  for (double t : t_list) {
    if (t - h < 0.0) throw ValidationError("weak residual: t - h < 0");
    t_end = std::max(t_end, t + h);
  }
  const auto n_phi = battery.size();
  const auto n_t = t_list.size();
  std::vector<std::vector<double>> res(n_phi * n_t);
  for (auto& v : res) v.resize(n_rep);

  const std::uint64_t root_domain = derive_key(seed, 41);
  const std::uint64_t tree_domain = derive_key(seed, 43);
  parallel_for(n_rep, n_threads, [&](std::int64_t r) {
    RngStream root_rng(derive_key(root_domain, r));
    const RootLaw::State root_state = root_law.sample(root_rng);
    const Genealogy g =
        simulate_tree(params, root_state.x0, root_state.v0, root_state.p0,
                      t_end, n_cap, derive_key(tree_domain, r));
    for (std::size_t ti = 0; ti < n_t; ++ti) {
      const double t = t_list[ti];
      std::vector<double> low(n_phi, 0.0), high(n_phi, 0.0), gen(n_phi, 0.0);
      for (std::int32_t i : alive_cells(g, t - h)) {
        const auto& c = g.cells[i];
        const double x = c.size_at(t - h);
        for (std::size_t p = 0; p < n_phi; ++p)
          low[p] += battery[p].f(x, c.tau, c.pole);
      }
      for (std::int32_t i : alive_cells(g, t + h)) {
        const auto& c = g.cells[i];
        const double x = c.size_at(t + h);
        for (std::size_t p = 0; p < n_phi; ++p)
          high[p] += battery[p].f(x, c.tau, c.pole);
      }
      for (std::int32_t i : alive_cells(g, t)) {
        const auto& c = g.cells[i];
        const double x = c.size_at(t);
        for (std::size_t p = 0; p < n_phi; ++p) {
          double jump = -battery[p].f(x, c.tau, c.pole);
          for (int child = 0; child < 2; ++child) {
            const double cx = params.theta(child) * x;
            jump += kernel_expectation(params, child, c.tau, [&](double vp) {
              return battery[p].f(cx, vp, child);
            });
          }
          gen[p] += x * c.tau * battery[p].dfdx(x, c.tau, c.pole) +
                    params.B(x) * jump;
        }
      }
      for (std::size_t p = 0; p < n_phi; ++p)
        res[p * n_t + ti][r] = (high[p] - low[p]) / (2.0 * h) - gen[p];
    }
  });

  std::vector<EmpiricalResidualRow> rows;
  for (std::size_t p = 0; p < n_phi; ++p)
    for (std::size_t ti = 0; ti < n_t; ++ti) {
      const auto& v = res[p * n_t + ti];
      double sum = 0.0;
      for (double x : v) sum += x;
      const double mean = sum / static_cast<double>(n_rep);
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double se =
          std::sqrt(ss / static_cast<double>(n_rep - 1) / static_cast<double>(n_rep));
      rows.push_back({battery[p].id, t_list[ti], mean, se,
                      mean / std::max(se, 1e-12)});
    }
  return rows;
}

}  // namespace polegrowth
