#pragma once

#include <functional>

namespace polegrowth {

// Adaptive Simpson integration of f over [a, b] to the given relative
// tolerance (absolute floor guards integrals that are exactly zero).
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, double abs_floor = 1e-14);

// Smallest t in [lo, hi] with f(t) >= target, for nondecreasing continuous f
// with f(lo) <= target <= f(hi). Bisection to absolute tolerance tol_abs.
double bisect_nondecreasing(const std::function<double(double)>& f, double lo,
                            double hi, double target, double tol_abs);

}  // namespace polegrowth
