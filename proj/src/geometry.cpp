#include "blowuplab/geometry.hpp"

#include <cmath>

#include <fmt/core.h>

namespace blowuplab::geometry {

namespace {

double offset(const CharPointModel& m, double x) {
    const double r = std::abs(x - m.x0);
    if (!(r > 0.0)) throw ConfigError("blow-up curve: x must differ from x0");
    if (!(r < 0.5)) throw ConfigError(fmt::format("blow-up curve: need |x - x0| < 1/2, got {}", r));
    return r;
}

}  // namespace

void CharPointModel::validate() const {
    if (k < 2) throw ConfigError(fmt::format("model.k must be at least 2, got {}", k));
    if (!(gamma_const > 0.0)) throw ConfigError(fmt::format("model.gamma must be positive, got {}", gamma_const));
    if (!(p > 1.0)) throw ConfigError(fmt::format("model.p must exceed 1, got {}", p));
}

double CharPointModel::log_power() const { return (k - 1) * (p - 1.0) / 2.0; }

double correction(const CharPointModel& m, double x) {
    m.validate();
    const double r = offset(m, x);
    const double theta = x > m.x0 ? 1.0 : -1.0;
    return m.gamma_const * std::exp(-2.0 * theta * m.zeta0) * r / std::pow(std::abs(std::log(r)), m.log_power());
}

double predicted_Tprime(const CharPointModel& m, double x) {
    const double r = offset(m, x);
    const double theta = x > m.x0 ? 1.0 : -1.0;
    return -theta * (1.0 - correction(m, x) / r);
}

double predicted_T(const CharPointModel& m, double x) {
    return m.T0 - offset(m, x) + correction(m, x);
}

Envelope envelope(const CharPointModel& m, double x) {
    const double r = offset(m, x);
    const double L = std::pow(std::abs(std::log(r)), m.log_power());
    const double a = std::abs(m.zeta0);
    const double C0 = 2.0 * std::max(m.gamma_const * std::exp(2.0 * a), 1.0 / (m.gamma_const * std::exp(-2.0 * a)));
    return {r / (C0 * L), predicted_T(m, x) - m.T0 + r, C0 * r / L};
}

std::vector<PlanEntry> multi_point_plan(const std::vector<PlanPoint>& points, double p, double gamma_const) {
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& a = points[i - 1];
        const auto& b = points[i];
        if (!(b.x > a.x)) throw ConfigError(fmt::format("plan: points {} and {} are not sorted by x", i - 1, i));
        if (!(a.x + a.T < b.x - b.T))
            throw ConfigError(fmt::format("plan: cones of points {} (x = {}, T = {}) and {} (x = {}, T = {}) overlap: "
                                          "{} >= {}",
                                          i - 1, a.x, a.T, i, b.x, b.T, a.x + a.T, b.x - b.T));
    }
    std::vector<PlanEntry> out;
    for (const auto& pt : points) {
        if (!(pt.T > 0.0)) throw ConfigError(fmt::format("plan: T must be positive at x = {}", pt.x));
        PlanEntry e;
        e.model = {pt.k, pt.zeta0, p, gamma_const, pt.T, pt.x};
        e.model.validate();
        e.shooting.params.p = p;
        e.shooting.params.k = pt.k;
        e.shooting.search = pt.k == 2 ? shooting::SearchMode::nested_bisection : shooting::SearchMode::grid_refine;
        out.push_back(e);
    }
    return out;
}

}  // namespace blowuplab::geometry
