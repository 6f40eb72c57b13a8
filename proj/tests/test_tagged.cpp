#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polegrowth/tagged.hpp"
#include "test_util.hpp"

using namespace polegrowth;

namespace {

ModelParams gauss_model(double theta0) {
  ModelParams p;
  p.B = DivisionRate::power(1.0, 1.0);
  p.set_theta0(theta0);
  p.e_min = 0.8;
  p.e_max = 1.2;
  p.rho[0] = TruncGaussKernel{0.1};
  p.rho[1] = TruncGaussKernel{0.1};
  return p;
}

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

TEST_CASE("size representation holds at every event time") {
  // chi(t) = x0 e^{Vbar(t)} theta0^{C^o} theta1^{C^n}, checked after each
  // division of paths with inherited Gaussian rates and asymmetric split.
  const auto p = gauss_model(0.35);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const TaggedPath path = sample_tagged_path(p, 1.3, 1.0, 0, 6.0, seed);
    REQUIRE(path.events().size() > 2);
    for (const auto& ev : path.events()) {
      const double closed = 1.3 * std::exp(ev.vbar_at) *
                            std::pow(p.theta0, ev.n_old) *
                            std::pow(p.theta1, ev.n_new);
      CHECK(std::abs(ev.size_after - closed) <= 1e-12 * closed);
      // the accessors agree with the event record just after the division
      CHECK(path.chi(ev.time) == ev.size_after);
      CHECK(path.vbar(ev.time) == ev.vbar_at);
      CHECK(path.divisions(ev.time) == ev.n_old + ev.n_new);
    }
  }
}

TEST_CASE("accumulated growth is bounded by the rate support") {
  const auto p = gauss_model(0.5);
  const TaggedPath path = sample_tagged_path(p, 1.0, 1.0, 0, 8.0, 17);
  for (double t : {0.5, 1.0, 2.5, 5.0, 8.0}) {
    CHECK(path.vbar(t) >= p.e_min * t - 1e-12);
    CHECK(path.vbar(t) <= p.e_max * t + 1e-12);
  }
}

TEST_CASE("point-mass kernel makes the accumulated growth exactly linear") {
  const auto p = constant_rate_model();
  const TaggedPath path = sample_tagged_path(p, 1.0, 1.0, 0, 6.0, 9);
  REQUIRE(path.events().size() > 3);
  for (double t : {0.3, 1.7, 4.2, 6.0}) {
    CHECK(path.vbar(t) == doctest::Approx(t).epsilon(1e-13));
    CHECK(path.rate(t) == 1.0);
  }
}

TEST_CASE("near-degenerate selection follows the old pole only") {
  auto p = constant_rate_model();
  p.set_theta0(1.0 - 0x1.0p-52);  // theta1 below any uniform draw in practice
  const TaggedPath path = sample_tagged_path(p, 1.0, 1.0, 0, 8.0, 21);
  REQUIRE(path.events().size() > 5);
  CHECK(path.new_count(8.0) == 0);
  CHECK(path.old_count(8.0) == path.divisions(8.0));
}

TEST_CASE("first division picks the new pole with probability theta1") {
  const auto p = constant_rate_model();
  const std::uint64_t domain = derive_key(99, 1);
  const int n = 200000;
  std::vector<double> picked;
  picked.reserve(n);
  for (int r = 0; r < n; ++r) {
    const TaggedPath path =
        sample_tagged_path(p, 1.0, 1.0, 0, 3.0, derive_key(domain, r));
    if (!path.events().empty())
      picked.push_back(path.events().front().type == 1 ? 1.0 : 0.0);
  }
  REQUIRE(picked.size() > 100000);
  const auto ms = testutil::mean_se(picked);
  CHECK(std::abs(ms.mean - 0.5) <= 3.0 * ms.se);
}

TEST_CASE("generation-two labels follow the theta-weighted law") {
  const auto p = constant_rate_model(1.0, 0.3);
  const std::uint64_t domain = derive_key(4242, 7);
  const int n = 100000;
  int counts[4] = {0, 0, 0, 0};
  int used = 0;
  for (int r = 0; r < n; ++r) {
    const TaggedPath path =
        sample_tagged_path(p, 1.0, 1.0, 0, 6.0, derive_key(domain, r));
    if (path.events().size() < 2) continue;
    const int a = path.events()[0].type, b = path.events()[1].type;
    counts[2 * a + b] += 1;
    ++used;
  }
  REQUIRE(used > 90000);
  const double probs[4] = {0.3 * 0.3, 0.3 * 0.7, 0.7 * 0.3, 0.7 * 0.7};
  double chi2 = 0.0;
  for (int leaf = 0; leaf < 4; ++leaf) {
    const double phat = static_cast<double>(counts[leaf]) / used;
    const double se = std::sqrt(probs[leaf] * (1.0 - probs[leaf]) / used);
    CHECK(std::abs(phat - probs[leaf]) <= 3.0 * se);
    const double expected = probs[leaf] * used;
    chi2 += (counts[leaf] - expected) * (counts[leaf] - expected) / expected;
  }
  CHECK(chi2 <= 16.27);  // 0.999 quantile at 3 degrees of freedom
}

TEST_CASE("many-to-one at t = 0 is exact on both sides") {
  const auto p = gauss_model(0.4);
  const auto battery = default_phi_battery();
  const auto rows = many_to_one_check(p, 1.5, 1.0, 0, 1e-12, battery, 200, 5,
                                      100000, 1);
  for (const auto& r : rows) {
    CHECK(r.lhs == doctest::Approx(r.rhs).epsilon(1e-9));
    CHECK(std::abs(r.z) <= 3.0);
  }
}

TEST_CASE("many-to-one: population sum against the tagged lineage") {
  const auto p = gauss_model(0.4);
  const auto battery = default_phi_battery();
  const auto rows =
      many_to_one_check(p, 1.0, 1.0, 0, 1.0, battery, 20000, 11, 100000, 1);
  REQUIRE(rows.size() == battery.size());
  for (const auto& r : rows) {
    INFO(r.phi_id);
    CHECK(std::abs(r.lhs - r.rhs) <=
          3.0 * std::sqrt(r.lhs_se * r.lhs_se + r.rhs_se * r.rhs_se) + 1e-12);
  }
  // phi == 1: the weights have unit conditional sum, so the rhs is exact
  CHECK(rows[0].phi_id == "one");
  CHECK(rows[0].lhs == 1.0);
  CHECK(std::abs(rows[0].rhs - 1.0) <= 3.0 * rows[0].rhs_se + 1e-12);
  CHECK(rows[0].rhs_se <= 1e-12);
}

TEST_CASE("many-to-one results do not depend on the thread count") {
  const auto p = gauss_model(0.45);
  const auto battery = default_phi_battery();
  const auto a =
      many_to_one_check(p, 1.0, 1.0, 0, 0.8, battery, 2000, 3, 100000, 1);
  const auto b =
      many_to_one_check(p, 1.0, 1.0, 0, 0.8, battery, 2000, 3, 100000, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lhs == b[i].lhs);
    CHECK(a[i].rhs == b[i].rhs);
    CHECK(a[i].lhs_se == b[i].lhs_se);
    CHECK(a[i].rhs_se == b[i].rhs_se);
  }
}

TEST_CASE("truncation during the population side is an error") {
  const auto p = constant_rate_model(2.0);
  const auto battery = default_phi_battery();
  CHECK_THROWS_AS(
      many_to_one_check(p, 1.0, 1.0, 0, 2.5, battery, 50, 13, 4, 1),
      TruncationError);
}

TEST_CASE("division counting rates near the root hazard") {
  const auto p = constant_rate_model();
  const std::vector<double> h_grid = {0.2, 0.1, 0.05};
  const auto rep =
      division_counting_check(p, 1.0, 1.0, 0, 0.0, h_grid, 200000, 29, 1);
  // B(chi(0)) = B(1) = 1 exactly: the path starts at x0 deterministically
  CHECK(rep.mean_hazard == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& row : rep.rows) {
    // within 3 SE plus a first-order-in-h envelope around B(x0) = 1
    CHECK(std::abs(row.p1 / row.h - 1.0) <=
          3.0 * row.p1_se / row.h + 1.5 * row.h);
    // two or more divisions in a window of length h is an O(h^2) event
    CHECK(row.p2 / (row.h * row.h) <= 2.0);
  }
}

TEST_CASE("counting check validates the h grid") {
  const auto p = constant_rate_model();
  CHECK_THROWS_AS(
      division_counting_check(p, 1.0, 1.0, 0, 0.0, {0.1, 0.2}, 10, 1, 1),
      ValidationError);
  CHECK_THROWS_AS(
      division_counting_check(p, 1.0, 1.0, 0, 0.0, {0.1, -0.2}, 10, 1, 1),
      ValidationError);
}

TEST_CASE("report CSV layout") {
  const auto p = constant_rate_model();
  const auto rows = many_to_one_check(p, 1.0, 1.0, 0, 0.5,
                                      default_phi_battery(), 100, 2, 1000, 1);
  const std::string csv = many_to_one_csv(rows);
  CHECK(csv.rfind("phi_id,t,lhs,lhs_se,rhs,rhs_se,z_score\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') ==
        static_cast<long>(rows.size()) + 1);
}
