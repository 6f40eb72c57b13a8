#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polegrowth/model.hpp"
#include "polegrowth/rng.hpp"
#include "test_util.hpp"

using namespace polegrowth;

TEST_CASE("power division rate evaluates c x^gamma") {
  const auto b1 = DivisionRate::power(1.0, 1.0);
  CHECK(b1(0.0) == 0.0);
  const auto b2 = DivisionRate::power(2.0, 3.0);
  CHECK(b2(1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(b2(2.0) == doctest::Approx(16.0).epsilon(1e-14));
}

TEST_CASE("table division rate interpolates and extrapolates linearly") {
  const auto b = DivisionRate::table({{0.0, 0.0}, {1.0, 1.0}, {2.0, 4.0}});
  CHECK(b(0.0) == 0.0);
  CHECK(b(1.5) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(b(3.0) == doctest::Approx(7.0).epsilon(1e-14));  // slope 3 past x=2
  CHECK(b(0.25) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("division rate construction rejects bad parameters") {
  CHECK_THROWS_AS(DivisionRate::power(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(DivisionRate::power(1.0, -2.0), ValidationError);
  CHECK_THROWS_AS(DivisionRate::table({{0.0, 0.0}}), ValidationError);
  CHECK_THROWS_AS(DivisionRate::table({{0.5, 0.1}, {1.0, 1.0}}),
                  ValidationError);
  CHECK_THROWS_AS(DivisionRate::table({{0.0, 0.0}, {2.0, 1.0}, {1.0, 2.0}}),
                  ValidationError);
  CHECK_THROWS_AS(DivisionRate::table({{0.0, 0.0}, {1.0, -1.0}, {2.0, 1.0}}),
                  ValidationError);
  // flat tail: the hazard integral would not diverge
  CHECK_THROWS_AS(DivisionRate::table({{0.0, 0.0}, {1.0, 1.0}, {2.0, 1.0}}),
                  ValidationError);
}

TEST_CASE("cumulative hazard: closed form against time-domain Romberg") {
  CHECK(cumulative_hazard(DivisionRate::power(1.0, 1.0), 1.3, 0.7, 0.0) == 0.0);

  // B(x) = x, x = 1, v = 1: Lambda(t) = e^t - 1, so Lambda(ln 2) = 1
  const auto b1 = DivisionRate::power(1.0, 1.0);
  CHECK(cumulative_hazard(b1, 1.0, 1.0, std::log(2.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // B(x) = x^2, x = 2, v = 0.5, t = 1: c x^g (e^{g v t} - 1)/(g v) = 4(e - 1)
  const auto b2 = DivisionRate::power(1.0, 2.0);
  const double expected = 4.0 * (std::exp(1.0) - 1.0);
  CHECK(cumulative_hazard(b2, 2.0, 0.5, 1.0) ==
        doctest::Approx(expected).epsilon(1e-12));
  const double oracle = testutil::romberg(
      [&](double s) { return b2(2.0 * std::exp(0.5 * s)); }, 0.0, 1.0);
  CHECK(cumulative_hazard(b2, 2.0, 0.5, 1.0) ==
        doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("closed-form hazard matches quadrature over a random sweep") {
  RngStream rng(42);
  for (int it = 0; it < 50; ++it) {
    const double c = 0.2 + 3.0 * rng.uniform01();
    const double g = 0.3 + 2.5 * rng.uniform01();
    const double x = 0.2 + 2.0 * rng.uniform01();
    const double v = 0.5 + rng.uniform01();
    const double t = 0.05 + 1.5 * rng.uniform01();
    const auto b = DivisionRate::power(c, g);
    const double closed = cumulative_hazard(b, x, v, t);
    const double quad = testutil::romberg(
        [&](double s) { return b(x * std::exp(v * s)); }, 0.0, t);
    CHECK(std::abs(closed - quad) <= 1e-8 * std::abs(closed));
  }
}

TEST_CASE("table hazard agrees with the piecewise closed form") {
  // For B linear on a segment, int B(y)/y dy = a ln y + b y per segment.
  const auto b = DivisionRate::table({{0.0, 0.0}, {1.0, 0.5}, {3.0, 2.5}});
  auto segment_integral = [&](double y0, double y1) {
    auto anti = [&](double y, double a, double slope) {
      return a * std::log(y) + slope * y;
    };
    double acc = 0.0;
    const std::vector<std::array<double, 3>> segs = {
        {0.0, 1.0, 0.5},   // [0,1]: B = 0.5 y        -> a=0,   slope=0.5
        {1.0, 3.0, 1.0},   // [1,3]: B = 0.5 + 1(y-1) -> a=-0.5, slope=1
        {3.0, 1e30, 1.0},  // tail: same slope, a = 2.5 - 3 = -0.5
    };
    const double a_of_seg[3] = {0.0, -0.5, -0.5};
    for (int i = 0; i < 3; ++i) {
      const double lo = std::max(y0, segs[i][0]);
      const double hi = std::min(y1, segs[i][1]);
      if (hi > lo)
        acc += anti(hi, a_of_seg[i], segs[i][2]) -
               anti(lo, a_of_seg[i], segs[i][2]);
    }
    return acc;
  };
  for (const auto& [y0, y1] : std::vector<std::pair<double, double>>{
           {0.5, 2.0}, {0.2, 0.9}, {1.5, 6.0}, {0.7, 4.2}}) {
    CHECK(b.hazard_between(y0, y1) ==
          doctest::Approx(segment_integral(y0, y1)).epsilon(1e-9));
  }
}

TEST_CASE("hazard accumulation is monotone in t") {
  const auto b = DivisionRate::table({{0.0, 0.0}, {1.0, 2.0}, {2.0, 3.0}});
  RngStream rng(7);
  for (int it = 0; it < 20; ++it) {
    const double x = 0.1 + rng.uniform01();
    const double v = 0.5 + rng.uniform01();
    const double t1 = 2.0 * rng.uniform01();
    const double t2 = t1 + rng.uniform01();
    CHECK(cumulative_hazard(b, x, v, t1) <= cumulative_hazard(b, x, v, t2));
  }
}

TEST_CASE("hazard inversion: closed form against test-side bisection") {
  const auto b = DivisionRate::power(1.0, 1.0);
  // Lambda(t) = e^t - 1 = ln 2  =>  t = ln(1 + ln 2)
  const double t = invert_hazard(b, 1.0, 1.0, std::log(2.0));
  CHECK(t == doctest::Approx(std::log(1.0 + std::log(2.0))).epsilon(1e-12));
  const double t_oracle = testutil::bisect(
      [&](double s) { return std::exp(s) - 1.0; }, 0.0, 10.0, std::log(2.0));
  CHECK(t == doctest::Approx(t_oracle).epsilon(1e-10));

  const auto tab = DivisionRate::table({{0.0, 0.0}, {1.0, 1.0}, {2.0, 4.0}});
  for (double target : {0.1, 0.7, 2.3}) {
    const double tt = invert_hazard(tab, 0.8, 1.1, target);
    CHECK(cumulative_hazard(tab, 0.8, 1.1, tt) ==
          doctest::Approx(target).epsilon(1e-9));
  }
}

TEST_CASE("point-mass and identity grid kernels are degenerate") {
  ModelParams p;
  p.e_min = 0.5;
  p.e_max = 1.5;
  p.rho[0] = PointMassKernel{1.0};
  p.rho[1] = PointMassKernel{1.0};
  RngStream rng(3);
  CHECK(sample_rate(p, 0, 0.7, rng) == 1.0);
  CHECK(sample_rate(p, 1, 1.2, rng) == 1.0);

  GridKernel id;
  id.nodes = Eigen::VectorXd::LinSpaced(5, 0.5, 1.5);
  id.rows = Eigen::MatrixXd::Identity(5, 5);
  p.rho[0] = id;
  CHECK(sample_rate(p, 0, id.nodes(2), rng) == id.nodes(2));
  CHECK(sample_rate(p, 0, id.nodes(4), rng) == id.nodes(4));
}

TEST_CASE("grid kernel rows must sum to one") {
  ModelParams p;
  p.e_min = 0.5;
  p.e_max = 1.5;
  const auto gk = make_gaussian_grid_kernel(16, 0.2, p.e_min, p.e_max);
  for (Eigen::Index i = 0; i < gk.rows.rows(); ++i)
    CHECK(std::abs(gk.rows.row(i).sum() - 1.0) <= 1e-12);
  p.rho[0] = gk;
  p.rho[1] = gk;
  CHECK_NOTHROW(p.validate());

  GridKernel bad = gk;
  bad.rows(0, 0) += 0.1;
  p.rho[0] = bad;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("kernel draws never leave the rate support") {
  ModelParams p;
  p.e_min = 0.8;
  p.e_max = 1.2;
  p.rho[0] = TruncGaussKernel{0.1};
  p.rho[1] = make_gaussian_grid_kernel(12, 0.15, p.e_min, p.e_max);
  RngStream rng(11);
  double v = 1.0;
  for (int i = 0; i < 100000; ++i) {
    const int type = i & 1;
    v = sample_rate(p, type, v, rng);
    CHECK(v >= p.e_min);
    CHECK(v <= p.e_max);
  }
}

TEST_CASE("truncated Gaussian around an interior mean is unbiased") {
  // window symmetric around v = 1.0: truncation preserves the mean
  ModelParams p;
  p.e_min = 0.8;
  p.e_max = 1.2;
  p.rho[0] = TruncGaussKernel{0.1};
  p.rho[1] = TruncGaussKernel{0.1};
  RngStream rng(23);
  const int n = 1000000;
  std::vector<double> draws;
  draws.reserve(n);
  for (int i = 0; i < n; ++i) draws.push_back(sample_rate(p, 0, 1.0, rng));
  const auto ms = testutil::mean_se(draws);
  CHECK(std::abs(ms.mean - 1.0) <= 3.0 * ms.se);
}

TEST_CASE("sample_rate rejects a parent rate outside the support") {
  ModelParams p;
  p.e_min = 0.8;
  p.e_max = 1.2;
  RngStream rng(1);
  CHECK_THROWS_AS(sample_rate(p, 0, 0.5, rng), ValidationError);
}

TEST_CASE("model parameter validation") {
  ModelParams p;
  p.set_theta0(0.4);
  p.e_min = 0.8;
  p.e_max = 1.2;
  p.rho[0] = PointMassKernel{1.0};
  p.rho[1] = PointMassKernel{1.0};
  CHECK_NOTHROW(p.validate());
  CHECK(p.theta(0) == doctest::Approx(0.4));
  CHECK(p.theta(1) == doctest::Approx(0.6));

  ModelParams bad = p;
  bad.theta0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.theta1 = 0.55;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.e_min = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.rho[0] = PointMassKernel{2.0};  // outside [e_min, e_max]
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
