#include "blowuplab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace blowuplab::profiles {

namespace {

void check_same(const PhaseProfile& a, const PhaseProfile& b) {
    if (!a.space || !b.space || !a.space->grid().same_as(b.space->grid()) || a.space->p() != b.space->p())
        throw ConfigError("profile arithmetic: grid or exponent mismatch");
}

double sech(double x) { return 1.0 / std::cosh(x); }

}  // namespace

std::shared_ptr<const Space> Space::make(double p, const HypGrid& grid) {
    auto sp = std::make_shared<Space>();
    sp->p_ = p;
    sp->grid_ = grid;
    sp->a_ = 4.0 / (p - 1.0);
    sp->c_ = 2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0));
    sp->kappa0_ = profiles::kappa0(p);
    sp->W_ = numerics::gauss_weights(grid, p);  // validates p and n
    // Quadrature weight at the cut must be negligible; see the truncation note in the README.
    const double tail = std::pow(sech(grid.chi_max), sp->a_ + 2.0);
    if (!(tail < 1e-12))
        throw ConfigError(fmt::format("grid truncation too coarse: sech^{:.3g}({}) = {:.3e} >= 1e-12", sp->a_ + 2.0,
                                      grid.chi_max, tail));
    const int n = grid.n;
    const double h = grid.h;
    sp->y_.resize(n);
    for (int j = 0; j < n; ++j) sp->y_[j] = grid.y(j);
    sp->wd_.resize(n - 1);
    for (int j = 0; j + 1 < n; ++j) sp->wd_[j] = std::pow(sech(0.5 * (grid.chi(j) + grid.chi(j + 1))), sp->a_);
    sp->Ll_.assign(n, 0.0);
    sp->Ld_.assign(n, 0.0);
    sp->Lu_.assign(n, 0.0);
    for (int j = 0; j + 1 < n; ++j) {
        const double f = sp->wd_[j] / h;
        sp->Lu_[j] = f / sp->W_[j];
        sp->Ld_[j] -= f / sp->W_[j];
        sp->Ll_[j + 1] = f / sp->W_[j + 1];
        sp->Ld_[j + 1] -= f / sp->W_[j + 1];
    }
    return sp;
}

std::shared_ptr<const Space> Space::make(double p, double chi_max, int n) {
    return make(p, HypGrid::make(chi_max, n));
}

Vec Space::apply_L(const Vec& w) const {
    const int n = grid_.n;
    if (static_cast<int>(w.size()) != n) throw ConfigError("apply_L: size mismatch");
    // Differences of fluxes, so that constants are annihilated exactly.
    Vec r(n);
    double left = 0.0;
    for (int j = 0; j < n; ++j) {
        const double right = j + 1 < n ? wd_[j] * (w[j + 1] - w[j]) : 0.0;
        r[j] = (right - left) / (grid_.h * W_[j]);
        left = right;
    }
    return r;
}

double Space::dot(const Vec& f, const Vec& g) const {
    double s = 0.0;
    for (std::size_t j = 0; j < W_.size(); ++j) s += W_[j] * f[j] * g[j];
    return s;
}

double Space::grad_dot(const Vec& f, const Vec& g) const {
    double s = 0.0;
    for (std::size_t j = 0; j < wd_.size(); ++j) s += wd_[j] * (f[j + 1] - f[j]) * (g[j + 1] - g[j]);
    return s / grid_.h;
}

PhaseProfile PhaseProfile::zero(const SpacePtr& sp) {
    return {sp, Vec(sp->n(), 0.0), Vec(sp->n(), 0.0)};
}

PhaseProfile& PhaseProfile::operator+=(const PhaseProfile& o) {
    check_same(*this, o);
    for (std::size_t j = 0; j < w1.size(); ++j) {
        w1[j] += o.w1[j];
        w2[j] += o.w2[j];
    }
    return *this;
}

PhaseProfile& PhaseProfile::operator-=(const PhaseProfile& o) {
    check_same(*this, o);
    for (std::size_t j = 0; j < w1.size(); ++j) {
        w1[j] -= o.w1[j];
        w2[j] -= o.w2[j];
    }
    return *this;
}

PhaseProfile& PhaseProfile::operator*=(double a) {
    for (auto& v : w1) v *= a;
    for (auto& v : w2) v *= a;
    return *this;
}

bool PhaseProfile::finite() const {
    for (double v : w1)
        if (!std::isfinite(v)) return false;
    for (double v : w2)
        if (!std::isfinite(v)) return false;
    return true;
}

PhaseProfile operator+(PhaseProfile a, const PhaseProfile& b) { return a += b; }
PhaseProfile operator-(PhaseProfile a, const PhaseProfile& b) { return a -= b; }
PhaseProfile operator*(double a, PhaseProfile b) { return b *= a; }

SolitonParam SolitonParam::from_zeta(double zeta, double nu) { return {-std::tanh(zeta), nu}; }
double SolitonParam::zeta() const { return -std::atanh(d); }
double SolitonParam::d_star() const { return d / (1.0 + nu); }
double SolitonParam::zeta_star() const { return -std::atanh(d_star()); }
bool SolitonParam::valid() const { return std::abs(d) < 1.0 && nu > -1.0 + std::abs(d); }

double kappa0(double p) {
    if (!(p > 1.0)) throw ConfigError(fmt::format("kappa0: p must exceed 1, got {}", p));
    return std::pow(2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0)), 1.0 / (p - 1.0));
}

PhaseProfile kappa(const SpacePtr& sp, double d) {
    if (!(std::abs(d) < 1.0)) throw DomainError(fmt::format("kappa: need |d| < 1, got {}", d));
    return kappa_star(sp, d, 0.0);
}

PhaseProfile kappa_star(const SpacePtr& sp, double d, double nu) {
    if (!(std::abs(d) < 1.0)) throw DomainError(fmt::format("kappa_star: need |d| < 1, got {}", d));
    const double p = sp->p();
    const double amp = sp->kappa0() * std::pow(1.0 - d * d, 1.0 / (p - 1.0));
    const double e1 = -2.0 / (p - 1.0);
    const double e2 = -(p + 1.0) / (p - 1.0);
    PhaseProfile out = PhaseProfile::zero(sp);
    const Vec& y = sp->y();
    for (int j = 0; j < sp->n(); ++j) {
        const double den = 1.0 + d * y[j] + nu;
        if (!(den > 0.0))
            throw DomainError(fmt::format("kappa_star: 1 + d y + nu = {:.3e} <= 0 at y = {} (d = {}, nu = {})", den,
                                          y[j], d, nu));
        out.w1[j] = amp * std::pow(den, e1);
        out.w2[j] = nu == 0.0 ? 0.0 : 2.0 / (1.0 - p) * nu * amp * std::pow(den, e2);
    }
    return out;
}

PhaseProfile kappa_star(const SpacePtr& sp, const SolitonParam& prm) { return kappa_star(sp, prm.d, prm.nu); }

PhaseProfile kappa_star_dnu(const SpacePtr& sp, double d, double nu) {
    if (!(std::abs(d) < 1.0)) throw DomainError(fmt::format("kappa_star_dnu: need |d| < 1, got {}", d));
    const double p = sp->p();
    const double amp = sp->kappa0() * std::pow(1.0 - d * d, 1.0 / (p - 1.0));
    const double g = -2.0 / (p - 1.0);
    const double e2 = -(p + 1.0) / (p - 1.0);
    PhaseProfile out = PhaseProfile::zero(sp);
    const Vec& y = sp->y();
    for (int j = 0; j < sp->n(); ++j) {
        const double den = 1.0 + d * y[j] + nu;
        if (!(den > 0.0)) throw DomainError("kappa_star_dnu: denominator not positive");
        const double dk1 = g * amp * std::pow(den, e2);
        out.w1[j] = dk1;
        out.w2[j] = dk1 + nu * g * amp * e2 * std::pow(den, e2 - 1.0);
    }
    return out;
}

PhaseProfile soliton_sum(const SpacePtr& sp, const std::vector<SolitonParam>& params) {
    PhaseProfile sum = PhaseProfile::zero(sp);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const PhaseProfile k = kappa_star(sp, params[i]);
        if ((i + 1) % 2 == 0)
            sum += k;
        else
            sum -= k;
    }
    return sum;
}

double h_norm(const PhaseProfile& q) {
    const Space& sp = *q.space;
    return std::sqrt(sp.dot(q.w1, q.w1) + sp.dot(q.w2, q.w2) + sp.grad_dot(q.w1, q.w1));
}

double h0_norm(const SpacePtr& sp, const Vec& w1) { return std::sqrt(sp->dot(w1, w1) + sp->grad_dot(w1, w1)); }

double energy(const PhaseProfile& q) {
    const Space& sp = *q.space;
    const double p = sp.p();
    const Vec& W = sp.weights();
    double e = 0.0;
    for (int j = 0; j < sp.n(); ++j) {
        const double a = std::abs(q.w1[j]);
        e += W[j] * (0.5 * q.w2[j] * q.w2[j] + 0.5 * sp.c() * a * a - std::pow(a, p + 1.0) / (p + 1.0));
    }
    return e + 0.5 * sp.grad_dot(q.w1, q.w1);
}

double hardy_sobolev_sup(const SpacePtr& sp, const Vec& h) {
    const double e = 2.0 / (sp->p() - 1.0);
    double m = 0.0;
    for (int j = 0; j < sp->n(); ++j) m = std::max(m, std::abs(h[j]) * std::pow(sech(sp->grid().chi(j)), e));
    return m;
}

double soliton_distance(const SolitonParam& a, const SolitonParam& b) {
    return std::abs(a.nu / (1.0 - std::abs(a.d)) - b.nu / (1.0 - std::abs(b.d))) +
           std::abs(std::atanh(a.d) - std::atanh(b.d));
}

ContinuityReport kappa_star_continuity_check(const SpacePtr& sp,
                                             const std::vector<std::pair<SolitonParam, SolitonParam>>& pairs,
                                             double A) {
    if (!(A > 1.0)) throw ConfigError(fmt::format("continuity check: A must exceed 1, got {}", A));
    auto check = [A](const SolitonParam& s) {
        if (!(std::abs(s.d) < 1.0)) throw DomainError(fmt::format("continuity check: |d| = {} >= 1", std::abs(s.d)));
        const double r = s.nu / (1.0 - std::abs(s.d));
        if (r < -1.0 + 1.0 / A || r > A)
            throw DomainError(fmt::format("continuity check: nu/(1-|d|) = {} outside [{}, {}]", r, -1.0 + 1.0 / A, A));
    };
    ContinuityReport rep;
    for (const auto& [a, b] : pairs) {
        check(a);
        check(b);
        const double dist = soliton_distance(a, b);
        if (dist == 0.0) {
            rep.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
            ++rep.skipped;
            continue;
        }
        const double r = h_norm(kappa_star(sp, a) - kappa_star(sp, b)) / dist;
        rep.ratios.push_back(r);
        rep.max_ratio = std::max(rep.max_ratio, r);
    }
    return rep;
}

}  // namespace blowuplab::profiles
