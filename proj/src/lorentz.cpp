#include "blowuplab/lorentz.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "blowuplab/numerics.hpp"

namespace blowuplab::lorentz {

namespace {

void check_d(double d, const char* where) {
    if (!(std::abs(d) < 1.0)) throw DomainError(fmt::format("{}: need |d| < 1, got {}", where, d));
}

double prefactor(double p, double d, double y) {
    return std::pow(1.0 - d * d, 1.0 / (p - 1.0)) / std::pow(1.0 + d * y, 2.0 / (p - 1.0));
}

}  // namespace

double LorentzParam::rapidity() const { return std::atanh(d); }

double d_compose(double d1, double d2) {
    check_d(d1, "d_compose");
    check_d(d2, "d_compose");
    return (d1 + d2) / (1.0 + d1 * d2);
}

Boosted lorentz_static(const PhaseProfile& src, double d) {
    check_d(d, "lorentz_static");
    const auto& sp = *src.space;
    const auto& g = sp.grid();
    if (d == 0.0) return {src, 0};
    const double r = std::atanh(d);
    Boosted out{PhaseProfile::zero(src.space), 0};
    for (int j = 0; j < sp.n(); ++j) {
        const double chi = g.chi(j) + r;
        int outside = 0;
        const double f = prefactor(sp.p(), d, sp.y()[j]);
        out.profile.w1[j] = f * numerics::interp_cubic(-g.chi_max, g.h, src.w1, chi, &outside);
        out.profile.w2[j] = f * numerics::interp_cubic(-g.chi_max, g.h, src.w2, chi, nullptr);
        out.extrapolated += outside;
    }
    return out;
}

double slab_margin(double d) {
    check_d(d, "slab_margin");
    return 0.5 * std::log((1.0 + std::abs(d)) / (1.0 - std::abs(d)));
}

Boosted lorentz_slab(const std::vector<Slice>& history, double d, double s_eval) {
    check_d(d, "lorentz_slab");
    if (history.empty()) throw ConfigError("lorentz_slab: empty history");
    for (std::size_t i = 1; i < history.size(); ++i)
        if (!(history[i].s > history[i - 1].s)) throw ConfigError("lorentz_slab: history times must increase");
    const double m = slab_margin(d);
    const double sa = history.front().s, sb = history.back().s;
    const double eps = 1e-12 * (1.0 + std::abs(s_eval));
    if (s_eval - m < sa - eps || s_eval + m > sb + eps)
        throw ConfigError(fmt::format("lorentz_slab: history [{}, {}] must cover [{}, {}] (margin {} around s = {})",
                                      sa, sb, s_eval - m, s_eval + m, m, s_eval));
    const auto sp = history.front().q.space;
    if (d == 0.0) {
        // Identity boost: the slice at s_eval, linear in s between stored slices.
        auto it = std::lower_bound(history.begin(), history.end(), s_eval,
                                   [](const Slice& sl, double v) { return sl.s < v; });
        if (it == history.end()) --it;
        if (it->s == s_eval || it == history.begin()) return {it->q, 0};
        const auto& lo = *(it - 1);
        const double t = (s_eval - lo.s) / (it->s - lo.s);
        return {(1.0 - t) * lo.q + t * it->q, 0};
    }
    const auto& g = sp->grid();
    const double r = std::atanh(d);
    Boosted out{PhaseProfile::zero(sp), 0};
    for (int j = 0; j < sp->n(); ++j) {
        const double y = sp->y()[j];
        const double ss = std::clamp(s_eval + std::log(std::sqrt(1.0 - d * d) / (1.0 + d * y)), sa, sb);
        auto it = std::upper_bound(history.begin(), history.end(), ss,
                                   [](double v, const Slice& sl) { return v < sl.s; });
        std::size_t hi = static_cast<std::size_t>(it - history.begin());
        if (hi >= history.size()) hi = history.size() - 1;
        if (hi == 0) hi = std::min<std::size_t>(1, history.size() - 1);
        const std::size_t lo = hi == 0 ? 0 : hi - 1;
        const double t = hi == lo ? 0.0 : (ss - history[lo].s) / (history[hi].s - history[lo].s);
        const double chi = g.chi(j) + r;
        int outside = 0;
        const double a1 = numerics::interp_cubic(-g.chi_max, g.h, history[lo].q.w1, chi, &outside);
        const double b1 = numerics::interp_cubic(-g.chi_max, g.h, history[hi].q.w1, chi, nullptr);
        const double a2 = numerics::interp_cubic(-g.chi_max, g.h, history[lo].q.w2, chi, nullptr);
        const double b2 = numerics::interp_cubic(-g.chi_max, g.h, history[hi].q.w2, chi, nullptr);
        const double f = prefactor(sp->p(), d, y);
        out.profile.w1[j] = f * ((1.0 - t) * a1 + t * b1);
        out.profile.w2[j] = f * ((1.0 - t) * a2 + t * b2);
        out.extrapolated += outside;
    }
    return out;
}

double prescribe_boost(double zeta0_sharp, double zeta0_target) { return std::tanh(zeta0_sharp - zeta0_target); }

}  // namespace blowuplab::lorentz
