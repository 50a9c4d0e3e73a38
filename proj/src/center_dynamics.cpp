#include "blowuplab/center_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/core.h>

namespace blowuplab::centers {

using numerics::Trajectory;

void ModelParams::validate() const {
    if (!(p > 1.0)) throw ConfigError(fmt::format("params.p: must exceed 1, got {}", p));
    if (k < 2) throw ConfigError(fmt::format("params.k: must be at least 2, got {}", k));
    if (!(c1 > 0.0)) throw ConfigError(fmt::format("params.c1: must be positive, got {}", c1));
    if (!(eta_rest > 0.0)) throw ConfigError(fmt::format("params.eta_rest: must be positive, got {}", eta_rest));
    if (!(delta > 0.0)) throw ConfigError(fmt::format("params.delta: must be positive, got {}", delta));
}

double ModelParams::pbar() const {
    if (p < 2.0) return p;
    if (p == 2.0) return 2.0 - 1.0 / 100.0;
    return 2.0;
}

double ModelParams::eta_shrink() const {
    return 0.25 * std::min({1.0, delta, pbar() / 2.0 - 0.5});
}

CenterSystem CenterSystem::make(const ModelParams& params) {
    params.validate();
    CenterSystem sys;
    sys.params = params;
    const int k = params.k;
    sys.gamma.resize(k);
    for (int i = 1; i <= k; ++i) sys.gamma[i - 1] = (params.p - 1.0) * (-i + (k + 1) / 2.0);
    sys.sigma.resize(k + 1);
    for (int i = 0; i <= k; ++i) sys.sigma[i] = i * (k - i) / 2.0;
    sys.bar_alpha = centers::bar_alpha(params);
    return sys;
}

Vec bar_alpha(const ModelParams& params) {
    params.validate();
    const int k = params.k;
    const double p = params.p;
    // alpha_i - alpha_{i-1} = -((p-1)/2) log((p-1)(i-1)(k+1-i)/(4 c1))
    Vec a(k, 0.0);
    for (int i = 2; i <= k; ++i)
        a[i - 1] = a[i - 2] - 0.5 * (p - 1.0) * std::log((p - 1.0) * (i - 1) * (k + 1 - i) / (4.0 * params.c1));
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= k;
    for (double& v : a) v -= mean;
    // The recurrence is symmetric under i -> k+1-i; enforce the antisymmetry exactly.
    for (int i = 0; i < k / 2; ++i) {
        const double m = 0.5 * (a[i] - a[k - 1 - i]);
        a[i] = m;
        a[k - 1 - i] = -m;
    }
    if (k % 2 == 1) a[k / 2] = 0.0;
    return a;
}

Vec bar_zeta(const CenterSystem& sys, double s) {
    if (!(s > 0.0)) throw ConfigError(fmt::format("bar_zeta: s must be positive, got {}", s));
    Vec z(sys.k());
    const double ls = std::log(s);
    for (int i = 0; i < sys.k(); ++i) z[i] = -0.5 * sys.gamma[i] * ls + sys.bar_alpha[i];
    return z;
}

Vec bar_zeta_dot(const CenterSystem& sys, double s) {
    if (!(s > 0.0)) throw ConfigError(fmt::format("bar_zeta_dot: s must be positive, got {}", s));
    Vec z(sys.k());
    for (int i = 0; i < sys.k(); ++i) z[i] = -sys.gamma[i] / (2.0 * s);
    return z;
}

Vec rhs_tl(const CenterSystem& sys, const Vec& zeta) {
    const int k = sys.k();
    const double e = 2.0 / (sys.params.p - 1.0);
    Vec f(k, 0.0);
    for (int i = 0; i + 1 < k; ++i) {
        const double term = sys.params.c1 * std::exp(-e * (zeta[i + 1] - zeta[i]));
        f[i] -= term;
        f[i + 1] += term;
    }
    return f;
}

Vec b_from_xi(const CenterSystem& sys, const Vec& xi) {
    const int k = sys.k();
    Vec b(k - 1);
    for (int i = 2; i <= k; ++i) b[i - 2] = sys.sigma[i - 1] * std::expm1(-(xi[i - 1] - xi[i - 2]));
    return b;
}

Vec rhs_ptl(const CenterSystem& sys, const Vec& xi) {
    const int k = sys.k();
    const Vec b = b_from_xi(sys, xi);
    auto bi = [&](int i) { return (i <= 1 || i > k) ? 0.0 : b[i - 2]; };
    Vec f(k);
    for (int i = 1; i <= k; ++i) f[i - 1] = bi(i) - bi(i + 1);
    return f;
}

namespace {

Vec rhs_b_unchecked(const CenterSystem& sys, const Vec& b) {
    const int k = sys.k();
    auto bi = [&](int i) { return (i <= 1 || i > k) ? 0.0 : b[i - 2]; };
    Vec f(k - 1);
    for (int i = 2; i <= k; ++i) f[i - 2] = (bi(i) + sys.sigma[i - 1]) * (bi(i - 1) - 2.0 * bi(i) + bi(i + 1));
    return f;
}

double euclid(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

Vec rhs_b(const CenterSystem& sys, const Vec& b) {
    const int k = sys.k();
    if (static_cast<int>(b.size()) != k - 1)
        throw ConfigError(fmt::format("rhs_b: expected {} components, got {}", k - 1, b.size()));
    for (int i = 2; i <= k; ++i)
        if (!(b[i - 2] > -sys.sigma[i - 1]))
            throw NumericalError(fmt::format("rhs_b: b_{} = {} leaves the domain b_i > -sigma_(i-1) = {}", i,
                                             b[i - 2], -sys.sigma[i - 1]));
    return rhs_b_unchecked(sys, b);
}

LyapState lyapunov_bB(const CenterSystem& sys, const Vec& xi) {
    LyapState st;
    st.b_seq = b_from_xi(sys, xi);
    st.b_min = 0.0;
    st.b_max = 0.0;
    for (double v : st.b_seq) {
        st.b_min = std::min(st.b_min, v);
        st.b_max = std::max(st.b_max, v);
    }
    return st;
}

Vec xi_from_zeta(const CenterSystem& sys, const Vec& zeta, double s) {
    const Vec zb = bar_zeta(sys, s);
    Vec xi(sys.k());
    for (int i = 0; i < sys.k(); ++i) xi[i] = 2.0 / (sys.params.p - 1.0) * (zeta[i] - zb[i]);
    return xi;
}

Vec zeta_from_xi(const CenterSystem& sys, const Vec& xi, double s) {
    const Vec zb = bar_zeta(sys, s);
    Vec z(sys.k());
    for (int i = 0; i < sys.k(); ++i) z[i] = zb[i] + 0.5 * (sys.params.p - 1.0) * xi[i];
    return z;
}

bool is_ordered(const Vec& zeta) {
    for (std::size_t i = 1; i < zeta.size(); ++i)
        if (!(zeta[i] > zeta[i - 1])) return false;
    return true;
}

Vec random_zero_sum(int k, double amp, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amp, amp);
    Vec x(k);
    double mean = 0.0;
    for (double& v : x) {
        v = u(rng);
        mean += v;
    }
    mean /= k;
    for (double& v : x) v -= mean;
    return x;
}

Trajectory integrate_ptl(const CenterSystem& sys, const Vec& xi0, double tau_span, double dtau, double tol) {
    numerics::RkOptions opts;
    const int m = static_cast<int>(std::ceil(tau_span / dtau - 1e-9));
    for (int j = 0; j <= m; ++j) opts.samples.push_back(std::min(j * dtau, tau_span));
    opts.samples.erase(std::unique(opts.samples.begin(), opts.samples.end()), opts.samples.end());
    return numerics::integrate_rk([&](double, const Vec& x, Vec& dx) { dx = rhs_ptl(sys, x); }, xi0, 0.0,
                                  tau_span, tol, opts);
}

bool MonotoneReport::ok(double slack, double min_rate) const {
    return max_violation_B <= slack && max_violation_negb <= slack &&
           (strict_windows == 0 || min_decrease_rate >= min_rate);
}

MonotoneReport check_monotone_lyapunov(const CenterSystem& sys, const Vec& xi0, double tau_span, double tol,
                                       double norm_floor) {
    const double dtau = 0.01;
    const Trajectory tr = integrate_ptl(sys, xi0, tau_span, dtau, tol);
    MonotoneReport rep;
    const std::size_t n = tr.size();
    Vec B(n), b(n), nrm(n);
    for (std::size_t j = 0; j < n; ++j) {
        const LyapState st = lyapunov_bB(sys, tr.states[j]);
        B[j] = st.b_max;
        b[j] = st.b_min;
        nrm[j] = euclid(tr.states[j]);
        double sum = 0.0;
        for (double v : tr.states[j]) sum += v;
        rep.max_sum_drift = std::max(rep.max_sum_drift, std::abs(sum));
    }
    for (std::size_t j = 1; j < n; ++j) {
        rep.max_violation_B = std::max(rep.max_violation_B, B[j] - B[j - 1]);
        rep.max_violation_negb = std::max(rep.max_violation_negb, b[j - 1] - b[j]);
    }
    rep.initial_gap = B.front() - b.front();
    rep.final_gap = B.back() - b.back();
    rep.min_decrease_rate = std::numeric_limits<double>::infinity();
    const std::size_t w = static_cast<std::size_t>(std::lround(0.5 / dtau));
    for (std::size_t j = 0; j + w < n; j += w) {
        if (nrm[j + w] < norm_floor) break;
        const double rate = ((B[j] - b[j]) - (B[j + w] - b[j + w])) / (tr.times[j + w] - tr.times[j]);
        rep.min_decrease_rate = std::min(rep.min_decrease_rate, rate);
        ++rep.strict_windows;
    }
    if (rep.strict_windows == 0) rep.min_decrease_rate = 0.0;
    return rep;
}

CompactReport check_compact_stability(const CenterSystem& sys, double eta, double A, int n_samples, double horizon,
                                      std::uint64_t seed, double slack) {
    if (!(eta > 0.0 && eta <= 0.2)) throw ConfigError(fmt::format("compact: eta must lie in (0, 1/5], got {}", eta));
    if (!(A >= 0.0)) throw ConfigError(fmt::format("compact: A must be nonnegative, got {}", A));
    const int k = sys.k();
    const int m = k - 1;
    Vec lo(m), hi(m, A);
    for (int i = 2; i <= k; ++i) lo[i - 2] = -sys.sigma[i - 1] + eta;
    CompactReport rep;
    rep.n_samples = n_samples;
    std::vector<Vec> starts(n_samples);
    std::vector<int> lower_face(n_samples, -1);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < n_samples; ++s) {
        Vec b(m);
        for (int j = 0; j < m; ++j) b[j] = lo[j] + u(rng) * (hi[j] - lo[j]);
        if (s % 2 == 1) {
            const int j = static_cast<int>(u(rng) * m) % m;
            const bool low = u(rng) < 0.5;
            b[j] = low ? lo[j] : hi[j];
            if (low) lower_face[s] = j;
        }
        starts[s] = b;
    }
    std::vector<std::vector<Escape>> found(n_samples);
    Vec final_norm(n_samples, 0.0);
    std::vector<int> inward_bad(n_samples, 0);
    numerics::parallel_for(n_samples, [&](int s) {
        const Vec& b0 = starts[s];
        if (lower_face[s] >= 0) {
            const Vec f = rhs_b_unchecked(sys, b0);
            if (!(f[lower_face[s]] > 0.0)) inward_bad[s] = 1;
        }
        numerics::RkOptions opts;
        opts.stop = [&](double t, const Vec& b) {
            for (int j = 0; j < m; ++j) {
                if (b[j] < lo[j] - slack) {
                    found[s].push_back({s, t, -(j + 1)});
                    return true;
                }
                if (b[j] > hi[j] + slack) {
                    found[s].push_back({s, t, j + 1});
                    return true;
                }
            }
            return false;
        };
        const Trajectory tr = numerics::integrate_rk(
            [&](double, const Vec& x, Vec& dx) { dx = rhs_b_unchecked(sys, x); }, b0, 0.0, horizon, 1e-12, opts);
        final_norm[s] = euclid(tr.back());
    });
    for (int s = 0; s < n_samples; ++s) {
        for (const auto& e : found[s]) rep.escapes.push_back(e);
        rep.inward_failures += inward_bad[s];
        rep.max_final_norm = std::max(rep.max_final_norm, final_norm[s]);
    }
    return rep;
}

RateFit convergence_rate(const Trajectory& traj, double lo, double hi) {
    RateFit fit;
    Vec t, l;
    double peak = 0.0;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const double r = euclid(traj.states[j]);
        peak = std::max(peak, r);
        if (r >= lo && r <= hi) {
            t.push_back(traj.times[j]);
            l.push_back(std::log(r));
        }
    }
    fit.points = static_cast<int>(t.size());
    if (peak == 0.0) {
        fit.diagnostic = "trajectory identically zero";
        return fit;
    }
    if (t.size() < 10 || t.back() - t.front() < 1.0) {
        fit.diagnostic = fmt::format("trajectory not in the linear regime: {} samples with |xi| in [{}, {}]",
                                     t.size(), lo, hi);
        return fit;
    }
    const auto lf = numerics::linear_fit(t, l);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.accepted = true;
    fit.diagnostic = fmt::format("fit over tau in [{:.3f}, {:.3f}], rms {:.2e}", t.front(), t.back(), lf.rms);
    return fit;
}

PerturbedResult integrate_perturbed(const CenterSystem& sys, const Vec& zeta0, double s0, double s1,
                                    const RestFunction& rest, double eta, int n_samples, double tol) {
    if (!(s1 > s0 && s0 > 0.0)) throw ConfigError(fmt::format("perturbed: need s1 > s0 > 0, got [{}, {}]", s0, s1));
    const int k = sys.k();
    numerics::RkOptions opts;
    const double l0 = std::log(s0), l1 = std::log(s1);
    for (int j = 0; j <= n_samples; ++j) opts.samples.push_back(j == n_samples ? s1 : std::exp(l0 + (l1 - l0) * j / n_samples));
    opts.samples.front() = s0;
    PerturbedResult res;
    res.traj = numerics::integrate_rk(
        [&](double s, const Vec& z, Vec& dz) {
            dz = rhs_tl(sys, z);
            if (rest)
                for (int i = 0; i < k; ++i) dz[i] += rest(i, s);
        },
        zeta0, s0, s1, tol, opts);
    const std::size_t n = res.traj.size();
    Vec com(n);
    for (std::size_t j = 0; j < n; ++j) {
        double m = 0.0;
        for (double v : res.traj.states[j]) m += v;
        com[j] = m / k;
    }
    const std::size_t tail0 = n / 2;
    if (eta > 0.0) {
        Vec x, y;
        for (std::size_t j = tail0; j < n; ++j) {
            x.push_back(std::pow(res.traj.times[j], -eta));
            y.push_back(com[j]);
        }
        res.zeta0 = numerics::linear_fit(x, y).intercept;
    } else {
        res.zeta0 = com.back();
    }
    res.deviation.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Vec zb = bar_zeta(sys, res.traj.times[j]);
        double d = 0.0;
        for (int i = 0; i < k; ++i) d = std::max(d, std::abs(res.traj.states[j][i] - zb[i] - res.zeta0));
        res.deviation[j] = d;
    }
    Vec ls, ld;
    const double e = eta > 0.0 ? eta : 1.0;
    for (std::size_t j = tail0; j < n; ++j) {
        res.C = std::max(res.C, res.deviation[j] * std::pow(res.traj.times[j], e));
        if (res.deviation[j] > 0.0) {
            ls.push_back(std::log(res.traj.times[j]));
            ld.push_back(std::log(res.deviation[j]));
        }
    }
    if (ls.size() >= 2) res.tail = numerics::linear_fit(ls, ld);
    return res;
}

bool Box::contains(const Vec& x, double slack) const {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    return true;
}

std::string AttractorVerdict::summary() const {
    int inv = 0, mono = 0, strict = 0, conv = 0;
    for (const auto& s : samples) {
        inv += s.invariant;
        mono += s.monotone;
        strict += s.strict;
        conv += s.converged;
    }
    return fmt::format("{}: {} samples, invariant {}, monotone {}, strict {}, converged {}",
                       attractor ? "attractor" : "not an attractor", samples.size(), inv, mono, strict, conv);
}

AttractorVerdict lyapunov_attractor_check(const numerics::VectorField& flow, const Box& box,
                                          const std::function<double(const Vec&)>& L, const Vec& x0, double horizon,
                                          int n_samples, std::uint64_t seed, double dist_tol, double tol) {
    const std::size_t d = x0.size();
    AttractorVerdict v;
    v.samples.resize(n_samples);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < n_samples; ++s) {
        Vec x(d);
        for (std::size_t i = 0; i < d; ++i) x[i] = box.lo[i] + u(rng) * (box.hi[i] - box.lo[i]);
        v.samples[s].start = x;
    }
    const double dtau = 0.01;
    numerics::parallel_for(n_samples, [&](int s) {
        AttractorSample& out = v.samples[s];
        numerics::RkOptions opts;
        const int m = static_cast<int>(std::ceil(horizon / dtau - 1e-9));
        for (int j = 0; j <= m; ++j) opts.samples.push_back(std::min(j * dtau, horizon));
        const Trajectory tr = numerics::integrate_rk(flow, out.start, 0.0, horizon, tol, opts);
        Vec Lv(tr.size()), dist(tr.size());
        for (std::size_t j = 0; j < tr.size(); ++j) {
            if (!box.contains(tr.states[j], 1e-8)) out.invariant = false;
            Lv[j] = L(tr.states[j]);
            Vec diff = tr.states[j];
            for (std::size_t i = 0; i < d; ++i) diff[i] -= x0[i];
            dist[j] = euclid(diff);
        }
        for (std::size_t j = 1; j < tr.size(); ++j)
            if (Lv[j] > Lv[j - 1] + 1e-9) out.monotone = false;
        const std::size_t w = static_cast<std::size_t>(std::lround(0.5 / dtau));
        for (std::size_t j = 0; j + w < tr.size(); j += w) {
            if (dist[j + w] < 1e-3) break;
            if (!(Lv[j] - Lv[j + w] > 1e-10)) out.strict = false;
        }
        out.final_distance = dist.back();
        out.converged = out.final_distance <= dist_tol;
    });
    v.attractor = true;
    for (const auto& s : v.samples)
        if (!(s.invariant && s.monotone && s.strict && s.converged)) v.attractor = false;
    return v;
}

}  // namespace blowuplab::centers
