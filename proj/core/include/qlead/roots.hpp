#ifndef QLEAD_ROOTS_HPP
#define QLEAD_ROOTS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

namespace qlead {

/// Bisection for a monotone nonincreasing f with f(lo) >= 0 >= f(hi).
/// Values of -inf are handled (they count as negative). Converges to
/// absolute tolerance `tol` on the argument, capped at `max_iter`.
double bisect_decreasing(const std::function<double(double)>& f, double lo, double hi,
                         double tol, int max_iter = 200);

/// Bisection for a monotone nondecreasing f with f(lo) <= 0 <= f(hi).
double bisect_increasing(const std::function<double(double)>& f, double lo, double hi,
                         double tol, int max_iter = 200);

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
/// Returns the abscissa; |interval| shrinks below tol.
double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol, int max_iter = 200);

} // namespace qlead

#endif
