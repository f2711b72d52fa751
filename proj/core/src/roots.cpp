#include "qlead/roots.hpp"

namespace qlead {

namespace {

// -inf values count as negative; +inf/NaN are rejected.
double checked(double v) {
    if (std::isnan(v) || (std::isinf(v) && v > 0))
        throw std::runtime_error("root search: function value is not comparable");
    return v;
}

} // namespace

double bisect_decreasing(const std::function<double(double)>& f, double lo, double hi,
                         double tol, int max_iter) {
    if (!(lo <= hi))
        throw std::invalid_argument("bisect: empty bracket");
    // Monotone functions allow a graceful answer when the root sits on (or
    // just outside) an endpoint.
    if (checked(f(lo)) < 0.0)
        return lo;
    if (checked(f(hi)) > 0.0)
        return hi;
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (checked(f(mid)) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double bisect_increasing(const std::function<double(double)>& f, double lo, double hi,
                         double tol, int max_iter) {
    if (!(lo <= hi))
        throw std::invalid_argument("bisect: empty bracket");
    if (checked(f(lo)) > 0.0)
        return lo;
    if (checked(f(hi)) < 0.0)
        return hi;
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (checked(f(mid)) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol, int max_iter) {
    if (!(lo <= hi))
        throw std::invalid_argument("golden_section_max: empty bracket");
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < max_iter && b - a > tol; ++i) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace qlead
