#include "polegrowth/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace polegrowth {

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double fa, double fm, double fb, double whole, double eps,
             int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, double abs_floor) {
  if (a == b) return 0.0;
  if (b < a) return -integrate_adaptive(f, b, a, rel_tol, abs_floor);
  const double fa = f(a), fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double rough = simpson(fa, fm, fb, b - a);
  const double eps = std::max(rel_tol * std::abs(rough), abs_floor);
  return adapt(f, a, b, fa, fm, fb, rough, eps, 48);
}

double bisect_nondecreasing(const std::function<double(double)>& f, double lo,
                            double hi, double target, double tol_abs) {
  if (!(lo <= hi)) throw std::invalid_argument("bisect: empty bracket");
  while (hi - lo > tol_abs) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket narrower than one ulp
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace polegrowth
