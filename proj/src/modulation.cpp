#include "blowuplab/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "blowuplab/numerics.hpp"

namespace blowuplab::modulation {

namespace {

bool same_space(const PhaseProfile& a, const PhaseProfile& b) {
    return a.space && b.space && a.space->grid().same_as(b.space->grid()) && a.space->p() == b.space->p();
}

}  // namespace

PhaseProfile F_direction(const SpacePtr& sp, int l, double d) {
    const double p = sp->p(), e = 2.0 / (p - 1.0) + 1.0;
    PhaseProfile F = PhaseProfile::zero(sp);
    for (int j = 0; j < sp->n(); ++j) {
        const double y = sp->y()[j];
        const double den = std::pow(1.0 + d * y, -e);
        if (l == 1) {
            F.w1[j] = F.w2[j] = std::pow(1.0 - d * d, p / (p - 1.0)) * den;
        } else {
            F.w1[j] = std::pow(1.0 - d * d, 1.0 / (p - 1.0)) * (y + d) * den;
        }
    }
    return F;
}

ProjectionKit build_projection_kit(const SpacePtr& sp, double d) {
    if (!(std::abs(d) < 1.0)) throw DomainError(fmt::format("projection kit: need |d| < 1, got {}", d));
    const int n = sp->n();
    const double p = sp->p(), e = 2.0 / (p - 1.0) + 1.0;
    const double amp = std::pow(1.0 - d * d, 1.0 / (p - 1.0));
    ProjectionKit kit;
    kit.d = d;
    kit.space = sp;
    // (I - L) scaled by the weights: symmetric, with entries of moderate size at the ends.
    const Vec& Wt = sp->weights();
    const Vec& wd = sp->dweights();
    numerics::BandMatrix A(n, 1, 1);
    for (int j = 0; j < n; ++j) {
        double diag = Wt[j];
        if (j > 0) {
            diag += wd[j - 1] / sp->h();
            A(j, j - 1) = -wd[j - 1] / sp->h();
        }
        if (j + 1 < n) {
            diag += wd[j] / sp->h();
            A(j, j + 1) = -wd[j] / sp->h();
        }
        A(j, j) = diag;
    }
    const numerics::BandLU lu(A);
    for (int l = 0; l < 2; ++l) {
        PhaseProfile Wl = PhaseProfile::zero(sp);
        Vec rhs(n);
        for (int j = 0; j < n; ++j) {
            const double y = sp->y()[j];
            const double c2 = std::pow(std::cosh(sp->grid().chi(j)), 2);  // 1/(1-y^2)
            const double g = 1.0 + d * y;
            double w2, dw2, over;
            if (l == 1) {
                w2 = amp * (1.0 - y * y) * std::pow(g, -e);
                dw2 = amp * (-2.0 * y * std::pow(g, -e) - e * d * (1.0 - y * y) * std::pow(g, -e - 1.0));
                over = amp * std::pow(g, -e);
            } else {
                w2 = amp * (y + d) * std::pow(g, -e);
                dw2 = amp * (std::pow(g, -e) - e * d * (y + d) * std::pow(g, -e - 1.0));
                over = w2 * c2;
            }
            Wl.w2[j] = w2;
            rhs[j] = (l - (p + 3.0) / (p - 1.0)) * w2 - 2.0 * y * dw2 + 8.0 / (p - 1.0) * over;
        }
        Vec scaled(n);
        for (int j = 0; j < n; ++j) scaled[j] = Wt[j] * rhs[j];
        Wl.w1 = lu.solve(scaled);
        // I - L is the Riesz map of H0, so the H0 size of the residual is the H0 norm of its
        // representer, one more solve with the weighted residual A x - W rhs.
        Vec res(n);
        for (int j = 0; j < n; ++j) {
            double v = A(j, j) * Wl.w1[j] - scaled[j];
            if (j > 0) v += A(j, j - 1) * Wl.w1[j - 1];
            if (j + 1 < n) v += A(j, j + 1) * Wl.w1[j + 1];
            res[j] = v;
        }
        kit.residual[l] = profiles::h0_norm(sp, lu.solve(res));
        kit.W[l] = std::move(Wl);
        kit.rhs[l] = std::move(rhs);
    }
    for (int l = 0; l < 2; ++l) {
        const double raw = kit.project(l, F_direction(sp, l, d));
        if (!(std::abs(raw) > 0.0) || !std::isfinite(raw))
            throw NumericalError(fmt::format("projection kit: degenerate normalization for l = {}, d = {}", l, d));
        kit.cbar[l] = 1.0 / raw;
        kit.W[l] *= kit.cbar[l];
        for (double& v : kit.rhs[l]) v *= kit.cbar[l];
    }
    for (int l = 0; l < 2; ++l) kit.cross[l] = kit.project(l, F_direction(sp, 1 - l, d));
    return kit;
}

double ProjectionKit::project(int l, const PhaseProfile& r) const {
    const Vec& W = space->weights();
    double acc = 0.0;
    for (std::size_t j = 0; j < W.size(); ++j) acc += W[j] * (r.w1[j] * rhs[l][j] + r.w2[j] * this->W[l].w2[j]);
    return acc;
}

double ProjectionKit::project_phi(int l, const PhaseProfile& r) const { return phi_bilinear(W[l], r); }

double phi_bilinear(const PhaseProfile& q, const PhaseProfile& r) {
    if (!same_space(q, r)) throw ConfigError("phi_bilinear: grid mismatch");
    const auto& sp = *q.space;
    return sp.dot(q.w1, r.w1) + sp.grad_dot(q.w1, r.w1) + sp.dot(q.w2, r.w2);
}

double phi_by_parts(const PhaseProfile& q, const PhaseProfile& r) {
    if (!same_space(q, r)) throw ConfigError("phi_by_parts: grid mismatch");
    const auto& sp = *q.space;
    Vec m = sp.apply_L(r.w1);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] = r.w1[j] - m[j];
    return sp.dot(q.w1, m) + sp.dot(q.w2, r.w2);
}

Vec orthogonality_defects(const PhaseProfile& v, const std::vector<SolitonParam>& params) {
    const PhaseProfile q = v - profiles::soliton_sum(v.space, params);
    Vec out;
    for (const auto& prm : params) {
        const ProjectionKit kit = build_projection_kit(v.space, prm.d_star());
        out.push_back(kit.project(0, q));
        out.push_back(kit.project(1, q));
    }
    return out;
}

ModulationState modulate(const PhaseProfile& v, const std::vector<SolitonParam>& guess, const ModulationOptions& opts) {
    const std::size_t k = guess.size();
    if (k == 0) throw ConfigError("modulate: empty guess");
    for (const auto& g : guess)
        if (!g.valid()) throw DomainError(fmt::format("modulate: invalid guess d = {}, nu = {}", g.d, g.nu));
    auto unpack = [k](const Vec& x) {
        std::vector<SolitonParam> prm(k);
        for (std::size_t i = 0; i < k; ++i) prm[i] = SolitonParam::from_zeta(x[2 * i], x[2 * i + 1]);
        return prm;
    };
    const double inf = std::numeric_limits<double>::infinity();
    auto F = [&](const Vec& x) -> Vec {
        for (std::size_t i = 0; i < k; ++i) {
            if (!std::isfinite(x[2 * i]) || !std::isfinite(x[2 * i + 1])) return Vec(2 * k, inf);
            if (i > 0 && x[2 * i] - x[2 * i - 2] < opts.min_separation) return Vec(2 * k, inf);
        }
        const auto prm = unpack(x);
        for (const auto& s : prm)
            if (!s.valid()) return Vec(2 * k, inf);
        try {
            return orthogonality_defects(v, prm);
        } catch (const DomainError&) {
            return Vec(2 * k, inf);
        }
    };
    Vec x0(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        x0[2 * i] = guess[i].zeta();
        x0[2 * i + 1] = guess[i].nu;
    }
    numerics::NewtonOptions no;
    no.tol = opts.tol;
    no.max_iter = opts.max_iter;
    no.fd_steps.resize(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        no.fd_steps[2 * i] = 1e-7;
        no.fd_steps[2 * i + 1] = 1e-9;
    }
    const auto res = numerics::newton(F, {}, x0, no);
    if (!res.converged()) throw ModulationError("modulation failed: " + res.message(), res.residual);
    ModulationState st;
    st.params = unpack(res.x);
    st.q = v - profiles::soliton_sum(v.space, st.params);
    st.q_norm = profiles::h_norm(st.q);
    st.residual = res.residual;
    st.iterations = res.iterations;
    return st;
}

Gaps gaps(const std::vector<SolitonParam>& params, double s, const centers::CenterSystem& sys,
          const spectral::SpectralData& spec) {
    const int k = sys.k();
    if (static_cast<int>(params.size()) != k) throw ConfigError("gaps: parameter count differs from k");
    const double p = sys.params.p, pbar = sys.params.pbar();
    Gaps g;
    Vec zeta(k);
    for (int i = 0; i < k; ++i) {
        zeta[i] = params[i].zeta();
        g.Jbar += std::abs(params[i].nu) / (1.0 - params[i].d * params[i].d);
    }
    for (int i = 1; i < k; ++i) {
        const double gap = zeta[i] - zeta[i - 1];
        g.J += std::exp(-2.0 / (p - 1.0) * gap);
        g.Jhat += std::exp(-pbar / (p - 1.0) * gap);
    }
    g.xi = centers::xi_from_zeta(sys, zeta, s);
    g.phi = spectral::to_phi(spec, g.xi);
    for (int j = 1; j < k; ++j) g.Jtilde += g.phi[j] * g.phi[j];
    return g;
}

double NormComponents::non_nu() const {
    double m = q;
    for (double v : phi) m = std::max(m, v);
    return m;
}

NormComponents shrink_components(const NormSample& x, double s0, const Vec& gamma, double eta) {
    NormComponents c;
    c.q = std::pow(x.s, 0.5 + eta) * x.q_norm;
    c.N = c.q;
    c.arg = "q";
    for (std::size_t i = 0; i < x.nu.size(); ++i) {
        const double v = std::pow(x.s, 0.5 + std::abs(gamma[i])) * std::abs(x.nu[i]);
        c.nu.push_back(v);
        if (v > c.N) {
            c.N = v;
            c.arg = fmt::format("nu_{}", i + 1);
        }
    }
    for (std::size_t i = 0; i < x.phi.size(); ++i) {
        const double v = (i == 0 ? std::pow(s0, eta) : std::pow(x.s, eta)) * std::abs(x.phi[i]);
        c.phi.push_back(v);
        if (v > c.N) {
            c.N = v;
            c.arg = fmt::format("phi_{}", i + 1);
        }
    }
    return c;
}

ShrinkSeries shrink_norm(const std::vector<NormSample>& run, double s0, const Vec& gamma, double eta) {
    ShrinkSeries out;
    for (std::size_t t = 0; t < run.size(); ++t) {
        out.comps.push_back(shrink_components(run[t], s0, gamma, eta));
        const bool in = out.comps.back().N <= 1.0;
        out.inside.push_back(in);
        if (!in && out.first_exit < 0) out.first_exit = static_cast<int>(t);
    }
    return out;
}

C1Fit fit_c1(const Vec& s, const std::vector<Vec>& zeta, double p) {
    const std::size_t m = s.size();
    if (m < 3 || zeta.size() != m) throw ConfigError("fit_c1: need at least three aligned samples");
    const std::size_t k = zeta[0].size();
    if (k < 2) throw ConfigError("fit_c1: need at least two centers");
    const double a = 2.0 / (p - 1.0);
    Vec sxy(k, 0.0), sxx(k, 0.0), syy(k, 0.0);
    for (std::size_t t = 1; t + 1 < m; ++t) {
        for (std::size_t i = 0; i < k; ++i) {
            // Nonuniform central difference.
            const double h0 = s[t] - s[t - 1], h1 = s[t + 1] - s[t];
            const double zd = (h0 * h0 * (zeta[t + 1][i] - zeta[t][i]) + h1 * h1 * (zeta[t][i] - zeta[t - 1][i])) /
                              (h0 * h1 * (h0 + h1));
            double X = 0.0;
            if (i > 0) X += std::exp(-a * (zeta[t][i] - zeta[t][i - 1]));
            if (i + 1 < k) X -= std::exp(-a * (zeta[t][i + 1] - zeta[t][i]));
            sxy[i] += X * zd;
            sxx[i] += X * X;
            syy[i] += zd * zd;
        }
    }
    C1Fit fit;
    double txy = 0.0, txx = 0.0, tyy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        txy += sxy[i];
        txx += sxx[i];
        tyy += syy[i];
    }
    const double count = static_cast<double>((m - 2) * k);
    if (!(txx > 1e-300) || !(tyy > 1e-24 * count)) {
        fit.degenerate = true;
        return fit;
    }
    fit.c1 = txy / txx;
    fit.residual = std::sqrt(std::max(0.0, tyy - 2.0 * fit.c1 * txy + fit.c1 * fit.c1 * txx) / tyy);
    for (std::size_t i = 0; i < k; ++i) {
        const double ci = sxx[i] > 0.0 ? sxy[i] / sxx[i] : std::numeric_limits<double>::quiet_NaN();
        fit.per_i.push_back(ci);
        if (std::isfinite(ci) && fit.c1 != 0.0) fit.spread = std::max(fit.spread, std::abs(ci - fit.c1) / std::abs(fit.c1));
    }
    // Forcing that does not explain the motion leaves no usable signal.
    if (!(fit.c1 > 0.0) || fit.residual > 0.5) fit.degenerate = true;
    return fit;
}

}  // namespace blowuplab::modulation
