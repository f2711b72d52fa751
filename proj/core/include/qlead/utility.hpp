#ifndef QLEAD_UTILITY_HPP
#define QLEAD_UTILITY_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qlead {

enum class UtilityKind { Cara, Linear, Custom };

/// Growth bound used to truncate expectation integrals:
///   |U(z)| <= scale * (1 + |z| + exp(-rate * z))   for all z.
/// CARA fits with (rate=r, scale=1/r), the linear reference with
/// (rate=0, scale=1).
struct TailEnvelope {
    double rate = 0.0;
    double scale = 1.0;
};

/// Concave customer utility of the net benefit. Evaluation is pure and
/// thread-safe; models are cheap to copy.
class UtilityModel {
  public:
    /// CARA utility U(z) = (1 - exp(-r z)) / r, r > 0.
    static UtilityModel cara(double r);

    /// Risk-neutral reference U(z) = z. Only strictly concave in the weak
    /// sense (U'' = 0); used for benchmark curves, not equilibrium theory.
    static UtilityModel linear();

    /// User-supplied evaluator. The envelope bounds |U| for integral
    /// truncation; supply a tight one for utilities with exponential decay.
    static UtilityModel custom(std::string label, std::function<double(double)> f,
                               TailEnvelope envelope);

    /// Custom model with an envelope calibrated on [-50, 50] assuming at
    /// most linear growth. Utilities that decay faster than linearly must
    /// use the explicit-envelope overload.
    static UtilityModel custom(std::string label, std::function<double(double)> f);

    double operator()(double z) const;

    UtilityKind kind() const { return kind_; }
    bool is_cara() const { return kind_ == UtilityKind::Cara; }
    bool is_linear() const { return kind_ == UtilityKind::Linear; }
    double cara_r() const;
    const std::string& label() const { return label_; }
    const TailEnvelope& envelope() const { return envelope_; }

  private:
    UtilityModel() = default;

    UtilityKind kind_ = UtilityKind::Linear;
    double r_ = 0.0;
    std::function<double(double)> fn_;
    std::string label_;
    TailEnvelope envelope_;
};

/// Outcome of the monotonicity/concavity screen.
struct Assumption1Report {
    bool passed = false;
    /// Strict-concavity clause waived (risk-neutral reference model).
    bool risk_neutral_flag = false;
    std::string message;
};

/// Checks a utility model on a grid: first differences strictly positive,
/// second differences <= tol, and strict concavity (second difference
/// < -tol) somewhere in the lower half of the grid. The linear reference is
/// exempt from the strict clause and reported with a flag.
///
/// Throws std::invalid_argument for grids with fewer than 3 points or
/// unsorted grids.
Assumption1Report validate_assumption1(const UtilityModel& u, std::span<const double> grid,
                                       double tol);

/// Same check on the default grid: 401 points on [-50, 50], tol 1e-9.
Assumption1Report validate_assumption1(const UtilityModel& u);

/// The default validation grid (401 points on [-50, 50]).
std::vector<double> default_validation_grid();

} // namespace qlead

#endif
