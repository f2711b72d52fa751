#include "qlead/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace qlead {

namespace {

// Two-term series for |r z| below this threshold; avoids cancellation in
// (1 - e^{-rz}) / r and makes the r -> 0 limit exact to float precision.
constexpr double kCaraSeriesThreshold = 1e-8;

double cara_eval(double r, double z) {
    const double rz = r * z;
    if (std::abs(rz) < kCaraSeriesThreshold)
        return z * (1.0 - 0.5 * rz);
    return -std::expm1(-rz) / r;
}

} // namespace

UtilityModel UtilityModel::cara(double r) {
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::invalid_argument("UtilityModel::cara: risk aversion must be positive");
    UtilityModel m;
    m.kind_ = UtilityKind::Cara;
    m.r_ = r;
    m.label_ = "cara(r=" + std::to_string(r) + ")";
    m.envelope_ = TailEnvelope{r, 1.0 / r};
    return m;
}

UtilityModel UtilityModel::linear() {
    UtilityModel m;
    m.kind_ = UtilityKind::Linear;
    m.label_ = "linear";
    m.envelope_ = TailEnvelope{0.0, 1.0};
    return m;
}

UtilityModel UtilityModel::custom(std::string label, std::function<double(double)> f,
                                  TailEnvelope envelope) {
    if (!f)
        throw std::invalid_argument("UtilityModel::custom: empty evaluator");
    if (envelope.rate < 0.0 || envelope.scale <= 0.0)
        throw std::invalid_argument("UtilityModel::custom: invalid envelope");
    UtilityModel m;
    m.kind_ = UtilityKind::Custom;
    m.fn_ = std::move(f);
    m.label_ = std::move(label);
    m.envelope_ = envelope;
    return m;
}

UtilityModel UtilityModel::custom(std::string label, std::function<double(double)> f) {
    if (!f)
        throw std::invalid_argument("UtilityModel::custom: empty evaluator");
    // Calibrate a linear-growth envelope on [-50, 50]. Utilities that decay
    // faster than linearly need the explicit-envelope overload.
    double scale = 1.0;
    for (int i = 0; i <= 100; ++i) {
        const double z = -50.0 + i;
        scale = std::max(scale, std::abs(f(z)) / (1.0 + std::abs(z)));
    }
    return custom(std::move(label), std::move(f), TailEnvelope{0.0, 2.0 * scale});
}

double UtilityModel::operator()(double z) const {
    switch (kind_) {
    case UtilityKind::Cara:
        return cara_eval(r_, z);
    case UtilityKind::Linear:
        return z;
    case UtilityKind::Custom:
        return fn_(z);
    }
    return z;
}

double UtilityModel::cara_r() const {
    if (kind_ != UtilityKind::Cara)
        throw std::logic_error("UtilityModel::cara_r on a non-CARA model");
    return r_;
}

std::vector<double> default_validation_grid() {
    std::vector<double> grid(401);
    for (int i = 0; i < 401; ++i)
        grid[i] = -50.0 + 0.25 * i;
    return grid;
}

Assumption1Report validate_assumption1(const UtilityModel& u, std::span<const double> grid,
                                       double tol) {
    if (grid.size() < 3)
        throw std::invalid_argument("validate_assumption1: grid needs at least 3 points");
    if (!(tol > 0.0))
        throw std::invalid_argument("validate_assumption1: tol must be positive");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1]))
            throw std::invalid_argument("validate_assumption1: grid must be strictly increasing");

    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = u(grid[i]);
        if (!std::isfinite(values[i])) {
            return {false, false,
                    "evaluation not finite at z=" + std::to_string(grid[i])};
        }
    }

    // Strict increase, with zero differences tolerated where the floating
    // representation saturates (e.g. CARA with large r flattens at 1/r for
    // large z even though the function is strictly increasing).
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (values[i + 1] < values[i]) {
            return {false, false,
                    "not strictly increasing near z=" + std::to_string(grid[i])};
        }
    }
    if (!(values.back() > values.front()))
        return {false, false, "constant over the whole grid"};

    // Second differences on the (possibly nonuniform) grid, scaled to
    // curvature estimates.
    bool strictly_concave_left = false;
    const std::size_t mid = grid.size() / 2;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double h1 = grid[i] - grid[i - 1];
        const double h2 = grid[i + 1] - grid[i];
        const double slope_left = (values[i] - values[i - 1]) / h1;
        const double slope_right = (values[i + 1] - values[i]) / h2;
        const double curv = 2.0 * (slope_right - slope_left) / (h1 + h2);
        if (curv > tol) {
            return {false, false, "convex segment near z=" + std::to_string(grid[i])};
        }
        if (i < mid && curv < -tol)
            strictly_concave_left = true;
    }

    if (u.is_linear()) {
        return {true, true, "risk-neutral reference, strict-concavity clause violated"};
    }
    if (!strictly_concave_left) {
        return {false, false, "no strict concavity detected in the left tail of the grid"};
    }
    return {true, false, "ok"};
}

Assumption1Report validate_assumption1(const UtilityModel& u) {
    const auto grid = default_validation_grid();
    return validate_assumption1(u, grid, 1e-9);
}

} // namespace qlead
