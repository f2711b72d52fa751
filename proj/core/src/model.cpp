#include "qlead/model.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qlead {

namespace {

// Removable-singularity switch for (e^{g d} - 1) / g in the closed form.
constexpr double kSingularRel = 1e-9;

// Custom-model divergence sentinel: the expectation is declared -inf once
// the partial integral falls below this.
constexpr double kDivergenceSentinel = -1e12;

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

double integrate_panel(const std::function<double(double)>& f, double a, double b) {
    if (b <= a)
        return 0.0;
    double err = 0.0;
    const double v = GK::integrate(f, a, b, 12, 1e-13, &err);
    if (!std::isfinite(v))
        throw QuadratureError("quadrature produced a non-finite panel value");
    return v;
}

// Exact tail of E[U(alpha - beta X) 1{X > T}] for the built-in models;
// beta >= 0 and, for CARA, nu > r beta (checked by the caller).
double cara_tail(double r, double nu, double alpha, double beta, double T) {
    if (beta == 0.0)
        return -std::expm1(-r * alpha) / r * std::exp(-nu * T);
    return std::exp(-nu * T) / r -
           std::exp(-r * alpha) * nu / (r * (nu - r * beta)) * std::exp((r * beta - nu) * T);
}

double linear_tail(double nu, double alpha, double beta, double T) {
    return std::exp(-nu * T) * (alpha - beta * T - beta / nu);
}

// Envelope bound on |integral over (T, inf)| for a custom model:
// |U(z)| <= scale (1 + |z| + e^{-rate z}).
// Returns +inf when the envelope itself diverges (nu <= rate * beta).
double custom_tail_bound(const TailEnvelope& env, double nu, double alpha, double beta,
                         double T) {
    const double base = std::exp(-nu * T);
    double bound = env.scale * base * (1.0 + std::abs(alpha) + beta * (T + 1.0 / nu));
    if (env.rate > 0.0) {
        if (beta > 0.0 && nu <= env.rate * beta)
            return std::numeric_limits<double>::infinity();
        bound += env.scale * nu * std::exp(-env.rate * alpha) *
                 std::exp((env.rate * beta - nu) * T) / (nu - env.rate * std::max(beta, 0.0));
    }
    return bound;
}

struct AffineTail {
    double alpha; // net benefit intercept past the kink
    double beta;  // net benefit slope magnitude past the kink
};

AffineTail tail_coefficients(const Policy& policy, const MarketParams& params) {
    if (policy.no_comp())
        return {params.R - policy.p(), params.c};
    return {params.R - policy.p() - policy.l() * policy.d(), params.c - policy.l()};
}

} // namespace

double MarketParams::max_rate() const { return std::min(Lambda, mu * (1.0 - kStabilityMargin)); }

void MarketParams::validate() const {
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("MarketParams: mu must be positive");
    if (!(Lambda > 0.0) || !std::isfinite(Lambda))
        throw std::invalid_argument("MarketParams: Lambda must be positive");
    if (!(R > 0.0) || !std::isfinite(R))
        throw std::invalid_argument("MarketParams: R must be positive");
    if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("MarketParams: c must be positive");
}

double Policy::d() const {
    if (!d_)
        throw std::logic_error("Policy::d on the no-compensation state");
    return *d_;
}

void Policy::validate(const MarketParams& params) const {
    if (!(p_ <= params.R) || !std::isfinite(p_))
        throw std::invalid_argument("Policy: entrance fee must satisfy p <= R");
    if (d_) {
        if (!(*d_ >= 0.0) || !std::isfinite(*d_))
            throw std::invalid_argument("Policy: lead-time must be finite and nonnegative");
        if (!(l_ >= 0.0) || !(l_ <= params.c))
            throw std::invalid_argument("Policy: compensation must satisfy 0 <= l <= c");
    }
}

double sojourn_rate(double lambda, const MarketParams& params) {
    if (!(lambda >= 0.0))
        throw std::invalid_argument("sojourn_rate: negative input rate");
    if (lambda > params.mu * (1.0 - kStabilityMargin))
        throw InstabilityError(lambda, params.mu);
    return params.mu - lambda;
}

double expected_lateness(double lambda, double d, const MarketParams& params) {
    if (!(d >= 0.0))
        throw std::invalid_argument("expected_lateness: negative lead-time");
    const double nu = sojourn_rate(lambda, params);
    return std::exp(-nu * d) / nu;
}

double expected_lateness(double lambda, const Policy& policy, const MarketParams& params) {
    if (policy.no_comp())
        return 0.0;
    return expected_lateness(lambda, policy.d(), params);
}

double net_benefit(double x, const Policy& policy, const MarketParams& params) {
    const double base = params.R - policy.p() - params.c * x;
    if (policy.no_comp())
        return base;
    return base + policy.l() * std::max(x - policy.d(), 0.0);
}

ExtValue k_cara(double lambda, const Policy& policy, const MarketParams& params, double r) {
    if (!(r > 0.0))
        throw std::invalid_argument("k_cara: risk aversion must be positive");
    policy.validate(params);
    const double nu = sojourn_rate(lambda, params);
    const double l = policy.effective_l();
    const double m = r * (params.c - l);

    // Divergence: the integrand tail grows like e^{(r(c-l) - nu) x}; the
    // boundary nu = r(c-l) is included (the integral still diverges there).
    if (l < params.c && nu <= m)
        return ExtValue::neg_inf();

    double A;
    if (policy.no_comp()) {
        A = nu / (nu - m); // m = r c here
    } else {
        const double d = policy.d();
        const double g = r * params.c - nu;
        const double egd = std::exp(g * d);
        double front;
        if (std::abs(g) < kSingularRel * r * params.c)
            front = nu * d;
        else
            front = nu * std::expm1(g * d) / g;
        A = front + nu * egd / (nu - m);
    }

    const double k = -std::expm1(-r * (params.R - policy.p()) + std::log(A)) / r;
    // The log/expm1 form keeps precision when e^{-r(R-p)} A is close to 1
    // (K near its root). A > 0 always holds in the convergent regime.
    if (std::isnan(k))
        throw QuadratureError("k_cara: non-finite intermediate value");
    if (std::isinf(k))
        return k < 0 ? ExtValue::neg_inf()
                     : throw QuadratureError("k_cara: positive overflow");
    return k;
}

double k_linear(double lambda, const Policy& policy, const MarketParams& params) {
    policy.validate(params);
    const double nu = sojourn_rate(lambda, params);
    return params.R - policy.p() - params.c / nu +
           policy.effective_l() * expected_lateness(lambda, policy, params);
}

ExtValue k_quadrature(double lambda, const Policy& policy, const MarketParams& params,
                      const UtilityModel& u, double tol) {
    if (!(tol > 0.0))
        throw std::invalid_argument("k_quadrature: tol must be positive");
    policy.validate(params);
    const double nu = sojourn_rate(lambda, params);
    const auto [alpha, beta] = tail_coefficients(policy, params);

    if (u.is_cara()) {
        const double r = u.cara_r();
        if (beta > 0.0 && nu <= r * beta)
            return ExtValue::neg_inf();
    }

    const auto integrand = [&](double x) {
        return u(net_benefit(x, policy, params)) * nu * std::exp(-nu * x);
    };

    const double kink = policy.no_comp() ? 0.0 : policy.d();
    double T = kink + 50.0 / nu;

    // Body: split at the kink (the only nonsmooth point of the integrand).
    double body = 0.0;
    body += integrate_panel(integrand, 0.0, std::min(kink, T));
    body += integrate_panel(integrand, std::min(kink, T), T);

    double result;
    switch (u.kind()) {
    case UtilityKind::Cara:
        result = body + cara_tail(u.cara_r(), nu, alpha, beta, T);
        break;
    case UtilityKind::Linear:
        result = body + linear_tail(nu, alpha, beta, T);
        break;
    case UtilityKind::Custom: {
        // Extend until the envelope bound on the remainder drops below tol
        // or the partial integral reveals divergence.
        int extensions = 0;
        for (;;) {
            if (body < kDivergenceSentinel)
                return ExtValue::neg_inf();
            const double bound = custom_tail_bound(u.envelope(), nu, alpha, beta, T);
            if (bound < tol)
                break;
            if (++extensions > 48)
                throw QuadratureError("k_quadrature: tail bound did not converge; "
                                      "supply a tighter envelope for the custom model");
            body += integrate_panel(integrand, T, 2.0 * T);
            T *= 2.0;
        }
        result = body;
        break;
    }
    default:
        throw std::logic_error("k_quadrature: unknown model kind");
    }

    const double k = result - u(0.0);
    if (!std::isfinite(k)) {
        if (k < 0)
            return ExtValue::neg_inf();
        throw QuadratureError("k_quadrature: non-finite result");
    }
    return k;
}

ExtValue k_value(double lambda, const Policy& policy, const MarketParams& params,
                 const UtilityModel& u, double tol) {
    switch (u.kind()) {
    case UtilityKind::Cara:
        return k_cara(lambda, policy, params, u.cara_r());
    case UtilityKind::Linear:
        return k_linear(lambda, policy, params);
    default:
        return k_quadrature(lambda, policy, params, u, tol);
    }
}

ExtValue k_limit_at_mu(const Policy& policy, const MarketParams& params, const UtilityModel& u) {
    policy.validate(params);
    if (policy.no_comp() || policy.effective_l() < params.c)
        return ExtValue::neg_inf();
    // Full compensation beyond d: the customer pays for at most d units of
    // delay, so the benefit stays bounded as the system saturates.
    return u(params.R - policy.p() - params.c * policy.d()) - u(0.0);
}

ExtValue k_cf(double lambda, double p, double cost_rate, const MarketParams& params,
              const UtilityModel& u, double tol) {
    if (!(cost_rate >= 0.0))
        throw std::invalid_argument("k_cf: negative cost rate");
    if (cost_rate == 0.0) {
        // No waiting cost: the benefit is the certain surplus R - p.
        sojourn_rate(lambda, params);
        return u(params.R - p) - u(0.0);
    }
    MarketParams cf = params;
    cf.c = cost_rate;
    return k_value(lambda, Policy::no_compensation(p), cf, u, tol);
}

} // namespace qlead
