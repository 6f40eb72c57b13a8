#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polegrowth/genealogy.hpp"
#include "test_util.hpp"

using namespace polegrowth;

namespace {

ModelParams constant_rate_model(double gamma = 1.0, double theta0 = 0.5) {
  ModelParams p;
  p.B = DivisionRate::power(1.0, gamma);
  p.set_theta0(theta0);
  p.e_min = 1.0;
  p.e_max = 1.0;
  p.rho[0] = PointMassKernel{1.0};
  p.rho[1] = PointMassKernel{1.0};
  return p;
}

}  // namespace

TEST_CASE("lifetime draws reproduce the analytic survival curve") {
  // B(x) = x, x = 1, v = 1: P(zeta >= t) = exp(-(e^t - 1))
  const auto b = DivisionRate::power(1.0, 1.0);
  RngStream rng(5);
  const int n = 1000000;
  std::vector<double> zetas(n);
  for (auto& z : zetas) {
    z = sample_lifetime(b, 1.0, 1.0, rng);
    REQUIRE(z > 0.0);
  }
  for (double t : {0.1, 0.5, 1.0}) {
    std::vector<double> alive(n);
    for (int i = 0; i < n; ++i) alive[i] = zetas[i] >= t ? 1.0 : 0.0;
    const auto ms = testutil::mean_se(alive);
    const double truth = std::exp(-std::expm1(t));
    CHECK(std::abs(ms.mean - truth) <= 3.0 * ms.se);
  }
}

TEST_CASE("horizon before the first division leaves a single censored cell") {
  const auto p = constant_rate_model();
  // With B(x)=x and x0 = 0.01 the first lifetime is >> 0.001 with
  // overwhelming probability under any seed that we then fix.
  const Genealogy g = simulate_tree(p, 0.01, 1.0, 0, 0.001, 1000, 99);
  REQUIRE(g.cells.size() == 1);
  CHECK(g.cells[0].censored());
  CHECK(!g.truncated);
  CHECK(g.division_count() == 0);
}

TEST_CASE("split conservation and structure on a sizeable tree") {
  auto p = constant_rate_model(1.0, 0.4);
  const Genealogy g = simulate_tree(p, 1.0, 1.0, 0, 3.0, 100000, 12345);
  REQUIRE(g.division_count() > 10);
  int roots = 0;
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    const auto& c = g.cells[i];
    if (c.parent < 0) ++roots;
    CHECK(c.tau >= p.e_min);
    CHECK(c.tau <= p.e_max);
    CHECK(c.xi > 0.0);
    if (c.divided()) {
      REQUIRE(!c.censored());
      const double division_size = c.xi * std::exp(c.tau * c.zeta);
      const double sum =
          g.cells[c.child[0]].xi + g.cells[c.child[1]].xi;
      CHECK(std::abs(sum - division_size) <= 1e-12 * division_size);
      // children keep the (old, new) ordering and the right fractions
      CHECK(g.cells[c.child[0]].pole == 0);
      CHECK(g.cells[c.child[1]].pole == 1);
      CHECK(std::abs(g.cells[c.child[0]].xi - p.theta0 * division_size) <=
            1e-12 * division_size);
      // birth bookkeeping
      CHECK(g.cells[c.child[0]].b == c.death());
      CHECK(std::abs(g.cells[c.child[0]].acc - (c.acc + c.tau * c.zeta)) <=
            1e-12 * (1.0 + std::abs(c.acc)));
    } else {
      CHECK(c.censored());  // untruncated run: leaves are horizon-censored
    }
  }
  CHECK(roots == 1);
}

TEST_CASE("count identity: alive equals divisions plus one") {
  const auto p = constant_rate_model(2.0);
  const Genealogy g = simulate_tree(p, 1.0, 1.0, 0, 2.5, 100000, 777);
  for (double t : {0.0, 0.3, 0.9, 1.7, 2.5}) {
    std::int64_t divisions_before = 0;
    for (const auto& c : g.cells)
      if (c.divided() && c.death() <= t) ++divisions_before;
    const auto alive = alive_cells(g, t);
    CHECK(static_cast<std::int64_t>(alive.size()) == divisions_before + 1);
  }
}

TEST_CASE("identical inputs give bit-identical genealogies") {
  auto p = constant_rate_model(1.0, 0.3);
  p.e_min = 0.8;
  p.e_max = 1.2;
  p.rho[0] = TruncGaussKernel{0.1};
  p.rho[1] = TruncGaussKernel{0.1};
  const Genealogy a = simulate_tree(p, 1.0, 1.0, 0, 2.0, 100000, 2024);
  const Genealogy b = simulate_tree(p, 1.0, 1.0, 0, 2.0, 100000, 2024);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].xi == b.cells[i].xi);
    CHECK(a.cells[i].b == b.cells[i].b);
    CHECK((a.cells[i].censored()
               ? b.cells[i].censored()
               : a.cells[i].zeta == b.cells[i].zeta));
    CHECK(a.cells[i].tau == b.cells[i].tau);
    CHECK(a.cells[i].pole == b.cells[i].pole);
  }
  const Genealogy c = simulate_tree(p, 1.0, 1.0, 0, 2.0, 100000, 2025);
  CHECK(a.cells.size() != c.cells.size());  // different seed, different tree
}

TEST_CASE("snapshots track the root, then the first division") {
  const auto p = constant_rate_model();
  const Genealogy g = simulate_tree(p, 1.0, 1.0, 0, 4.0, 100000, 31);
  const auto s0 = take_snapshot(g, 0.0);
  REQUIRE(s0.cells.size() == 1);
  CHECK(s0.cells[0].size == 1.0);
  CHECK(s0.cells[0].rate == 1.0);
  CHECK(s0.cells[0].type == 0);

  REQUIRE(!g.cells[0].censored());
  const double d0 = g.cells[0].death();
  const auto before = take_snapshot(g, d0 * (1.0 - 1e-9));
  REQUIRE(before.cells.size() == 1);
  CHECK(before.cells[0].size ==
        doctest::Approx(std::exp(d0 * (1.0 - 1e-9))).epsilon(1e-9));

  const auto after = take_snapshot(g, d0 + 1e-9);
  REQUIRE(after.cells.size() == 2);
  // sizes in ratio theta0 : theta1 (here both 1/2)
  CHECK(after.cells[0].size ==
        doctest::Approx(after.cells[1].size).epsilon(1e-9));
}

TEST_CASE("snapshot at a division instant excludes the mother") {
  const auto p = constant_rate_model();
  const Genealogy g = simulate_tree(p, 1.0, 1.0, 0, 4.0, 100000, 53);
  const double d0 = g.cells[0].death();
  const auto at = take_snapshot(g, d0);
  CHECK(at.cells.size() == 2);  // [b, b+zeta) is half-open
}

TEST_CASE("cell cap truncates loudly") {
  const auto p = constant_rate_model(2.0);
  const Genealogy g = simulate_tree(p, 1.0, 1.0, 0, 6.0, 8, 4242);
  REQUIRE(g.truncated);
  CHECK(g.frontier_time < 6.0);
  CHECK_NOTHROW(take_snapshot(g, 0.5 * g.frontier_time));
  CHECK_THROWS_AS(take_snapshot(g, g.frontier_time), TruncationError);
  CHECK_THROWS_AS(take_snapshot(g, 6.0), TruncationError);
}

TEST_CASE("simulate_tree validates the root") {
  const auto p = constant_rate_model();
  CHECK_THROWS_AS(simulate_tree(p, -1.0, 1.0, 0, 1.0, 10, 1), ValidationError);
  CHECK_THROWS_AS(simulate_tree(p, 1.0, 2.0, 0, 1.0, 10, 1), ValidationError);
  CHECK_THROWS_AS(simulate_tree(p, 1.0, 1.0, 7, 1.0, 10, 1), ValidationError);
  CHECK_THROWS_AS(simulate_tree(p, 1.0, 1.0, 0, -1.0, 10, 1), ValidationError);
  CHECK_THROWS_AS(simulate_tree(p, 1.0, 1.0, 0, 1.0, 0, 1), ValidationError);
}

TEST_CASE("genealogy and snapshot CSV have the documented layout") {
  const auto p = constant_rate_model();
  const Genealogy g = simulate_tree(p, 1.0, 1.0, 0, 2.0, 100000, 6);
  const std::string csv = genealogy_csv(g);
  CHECK(csv.rfind("label,parent,xi,b,zeta,tau,p,theta\n", 0) == 0);
  const auto rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == static_cast<long>(g.cells.size()) + 1);

  const auto snap = take_snapshot(g, 1.0);
  const std::string scsv = snapshot_csv(snap);
  CHECK(scsv.rfind("t,size,rate,type\n", 0) == 0);
  CHECK(std::count(scsv.begin(), scsv.end(), '\n') ==
        static_cast<long>(snap.cells.size()) + 1);
}

TEST_CASE("labels follow the Ulam-Harris convention") {
  const auto p = constant_rate_model();
  const Genealogy g = simulate_tree(p, 1.0, 1.0, 0, 3.0, 100000, 8);
  CHECK(g.label(0) == "");
  const auto& root = g.cells[0];
  REQUIRE(root.divided());
  CHECK(g.label(root.child[0]) == "0");
  CHECK(g.label(root.child[1]) == "1");
  const auto& c1 = g.cells[root.child[1]];
  if (c1.divided()) {
    CHECK(g.label(c1.child[0]) == "10");
    CHECK(g.label(c1.child[1]) == "11");
  }
}
