#ifndef QLEAD_MODEL_HPP
#define QLEAD_MODEL_HPP

#include <stdexcept>

#include "qlead/extvalue.hpp"
#include "qlead/market.hpp"
#include "qlead/utility.hpp"

namespace qlead {

/// Adaptive quadrature failed to converge. Distinct from a divergent
/// (-inf) benefit value, which is a regular model outcome.
class QuadratureError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Rate of the steady-state sojourn distribution Exp(mu - lambda).
/// Throws InstabilityError for lambda at or beyond the stability margin.
double sojourn_rate(double lambda, const MarketParams& params);

/// Expected excess sojourn beyond the quoted lead-time,
/// L(lambda, d) = exp(-(mu - lambda) d) / (mu - lambda).
double expected_lateness(double lambda, double d, const MarketParams& params);

/// Lateness under a policy: 0 for the no-compensation state (l = 0 makes
/// it irrelevant), L(lambda, d) otherwise.
double expected_lateness(double lambda, const Policy& policy, const MarketParams& params);

/// Argument of the utility for a customer with sojourn time x:
/// R - p - c x + l (x - d)^+.
double net_benefit(double x, const Policy& policy, const MarketParams& params);

/// Expected utility gain of joining at input rate lambda:
///   K(lambda, d, p, l) = E[ U(R - p - c X + l (X - d)^+) ] - U(0),
/// X ~ Exp(mu - lambda), computed by adaptive quadrature split at the kink
/// x = d with an analytic tail beyond d + 50 / (mu - lambda).
///
/// Returns ExtValue::neg_inf() when the expectation diverges (for CARA,
/// exactly when mu - lambda <= r (c - l) with l < c; for custom models,
/// when the partial integral falls below -1e12). Throws QuadratureError
/// when refinement fails to converge.
ExtValue k_quadrature(double lambda, const Policy& policy, const MarketParams& params,
                      const UtilityModel& u, double tol = 1e-10);

/// Closed-form K for CARA utility with risk aversion r. With nu = mu -
/// lambda and m = r (c - l), finite iff nu > m (or l = c):
///   K = (1 - exp(-r (R - p)) A) / r,
///   A = nu (e^{(rc - nu) d} - 1) / (rc - nu) + nu e^{(rc - nu) d} / (nu - m),
/// the removable singularity rc = nu replaced by its limit nu d. Agrees
/// with k_quadrature to 1e-8 relative.
ExtValue k_cara(double lambda, const Policy& policy, const MarketParams& params, double r);

/// Risk-neutral K: R - p - c / (mu - lambda) + l L(lambda, d), exact.
double k_linear(double lambda, const Policy& policy, const MarketParams& params);

/// K through the cheapest exact route for the model kind: closed form for
/// CARA, the analytic expectation for the linear reference, quadrature
/// otherwise.
ExtValue k_value(double lambda, const Policy& policy, const MarketParams& params,
                 const UtilityModel& u, double tol = 1e-10);

/// Limit of K as the input rate approaches the service rate from below:
/// -inf when l < c or under no compensation, else U(R - p - c d) - U(0).
ExtValue k_limit_at_mu(const Policy& policy, const MarketParams& params, const UtilityModel& u);

/// Compensation-free benchmark K_CF(lambda, p, cost) =
/// E[U(R - p - cost X)] - U(0); the model with l = 0 (or d -> infinity)
/// and waiting cost rate `cost`.
ExtValue k_cf(double lambda, double p, double cost_rate, const MarketParams& params,
              const UtilityModel& u, double tol = 1e-10);

} // namespace qlead

#endif
