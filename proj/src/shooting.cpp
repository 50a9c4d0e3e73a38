#include "blowuplab/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "blowuplab/numerics.hpp"

namespace blowuplab::shooting {

namespace {

std::vector<std::pair<std::string, double>> named(const modulation::NormComponents& c) {
    std::vector<std::pair<std::string, double>> out{{"q", c.q}};
    for (std::size_t i = 0; i < c.nu.size(); ++i) out.emplace_back(fmt::format("nu_{}", i + 1), c.nu[i]);
    for (std::size_t i = 0; i < c.phi.size(); ++i) out.emplace_back(fmt::format("phi_{}", i + 1), c.phi[i]);
    return out;
}

double component(const modulation::NormComponents& c, const std::string& name) {
    for (const auto& [n, v] : named(c))
        if (n == name) return v;
    return std::numeric_limits<double>::quiet_NaN();
}

ExitKind kind_of(const std::string& arg) {
    if (arg == "q") return ExitKind::q;
    if (arg.rfind("nu_", 0) == 0) return ExitKind::nu;
    return ExitKind::phi;
}

}  // namespace

SearchMode parse_search_mode(const std::string& name) {
    if (name == "nested-bisection") return SearchMode::nested_bisection;
    if (name == "grid-refine") return SearchMode::grid_refine;
    throw ConfigError(fmt::format("unknown search mode '{}' (expected nested-bisection or grid-refine)", name));
}

std::string search_mode_name(SearchMode m) {
    return m == SearchMode::nested_bisection ? "nested-bisection" : "grid-refine";
}

std::string exit_kind_name(ExitKind k) {
    switch (k) {
        case ExitKind::survived: return "survived";
        case ExitKind::nu: return "nu";
        case ExitKind::q: return "q";
        case ExitKind::phi: return "phi";
        case ExitKind::structural: return "structural";
        case ExitKind::blowup: return "blowup";
    }
    return "unknown";
}

void ShootingConfig::validate() const {
    params.validate();
    evolve.validate();
    if (!(s0 > 1.0)) throw ConfigError(fmt::format("shoot.s0 must exceed 1, got {}", s0));
    if (!(s_target > s0)) throw ConfigError(fmt::format("shoot.target must exceed s0 = {}, got {}", s0, s_target));
    if (!(cadence >= evolve.ds)) throw ConfigError("shoot.cadence must be at least one time step");
    if (n < 3) throw ConfigError("grid.n must be at least 3");
    for (double w : box_widths(s0))
        if (!(w > 0.0)) throw ConfigError("box widths must be positive");
}

Vec ShootingConfig::box_widths(double s) const {
    const auto sys = centers::CenterSystem::make(params);
    return rescale(sys.gamma, s, Vec(params.k, 1.0));
}

Vec rescale(const Vec& gamma, double s, const Vec& u) {
    Vec out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::pow(s, -0.5 - std::abs(gamma[i])) * u[i];
    return out;
}

Vec rescale_inverse(const Vec& gamma, double s, const Vec& nu) {
    Vec out(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) out[i] = nu[i] / std::pow(s, -0.5 - std::abs(gamma[i]));
    return out;
}

InitialData initial_data(const ShootingConfig& cfg, const Vec& nu_unit) {
    const int k = cfg.params.k;
    if (static_cast<int>(nu_unit.size()) != k) throw ConfigError("initial_data: nu_unit has wrong dimension");
    for (double u : nu_unit)
        if (!(std::abs(u) <= 1.0)) throw ConfigError(fmt::format("initial_data: unit parameter {} outside [-1, 1]", u));
    const auto sys = centers::CenterSystem::make(cfg.params);
    const Vec zb = centers::bar_zeta(sys, cfg.s0);
    const Vec nu = rescale(sys.gamma, cfg.s0, nu_unit);
    InitialData out;
    for (int i = 0; i < k; ++i) {
        SolitonParam prm = SolitonParam::from_zeta(zb[i], nu[i]);
        if (!prm.valid()) throw DomainError(fmt::format("initial_data: soliton {} outside the admissible domain", i + 1));
        out.params.push_back(prm);
    }
    const auto sp = profiles::Space::make(cfg.params.p, cfg.chi_max, cfg.n);
    out.w = profiles::soliton_sum(sp, out.params);
    return out;
}

int ShootingRecord::sign(int i) const {
    if (i < 0 || i >= static_cast<int>(nu_last.size())) return 0;
    return nu_last[i] > 0.0 ? 1 : (nu_last[i] < 0.0 ? -1 : 0);
}

ShootingRecord run_until_exit(const ShootingConfig& cfg, const Vec& nu_unit, const RunOptions& opts) {
    cfg.validate();
    const auto sys = centers::CenterSystem::make(cfg.params);
    const auto spec = spectral::exact_spectrum(cfg.params.k);
    const double eta = cfg.params.eta_shrink();
    ShootingRecord rec;
    rec.nu_unit = nu_unit;
    rec.nu_last = rescale(sys.gamma, cfg.s0, nu_unit);
    InitialData init;
    try {
        init = initial_data(cfg, nu_unit);
    } catch (const DomainError& e) {
        // The box corner lies beyond the generalized-soliton domain when 1 - |d_i| < s0^{-1/2-|gamma_i|}.
        rec.exit = ExitKind::structural;
        rec.exit_constraint = "structural";
        rec.s_exit = rec.s_detect = cfg.s0;
        rec.N_at_exit = std::numeric_limits<double>::quiet_NaN();
        rec.note = e.what();
        return rec;
    }
    const auto sp = init.w.space;
    const long every = std::max(1L, std::lround(cfg.cadence / cfg.evolve.ds));
    similarity::Stepper stepper(sp, cfg.evolve.ds, cfg.evolve.scheme);
    PhaseProfile w = init.w;
    std::vector<SolitonParam> guess = init.params;
    double s = cfg.s0;
    long steps = 0;
    const double eps = 1e-9;
    for (;;) {
        modulation::ModulationState st;
        try {
            st = modulation::modulate(w, guess);
        } catch (const NumericalError& e) {
            rec.exit = ExitKind::structural;
            rec.exit_constraint = "structural";
            rec.s_exit = rec.s_detect = s;
            rec.N_at_exit = std::numeric_limits<double>::quiet_NaN();
            rec.note = e.what();
            return rec;
        } catch (const DomainError& e) {
            rec.exit = ExitKind::structural;
            rec.exit_constraint = "structural";
            rec.s_exit = rec.s_detect = s;
            rec.N_at_exit = std::numeric_limits<double>::quiet_NaN();
            rec.note = e.what();
            return rec;
        }
        guess = st.params;
        TrackSample ts;
        ts.s = s;
        ts.q_norm = st.q_norm;
        for (const auto& prm : st.params) {
            ts.zeta.push_back(prm.zeta());
            ts.nu.push_back(prm.nu);
        }
        ts.gaps = modulation::gaps(st.params, s, sys, spec);
        ts.phi = ts.gaps.phi;
        ts.comps = modulation::shrink_components({s, ts.q_norm, ts.nu, ts.phi}, cfg.s0, sys.gamma, eta);
        rec.nu_last = ts.nu;
        if (s > cfg.s0 + eps) rec.max_non_nu = std::max(rec.max_non_nu, ts.comps.non_nu());
        rec.track.push_back(ts);

        const bool at_start = rec.track.size() == 1;
        const bool out = at_start ? ts.comps.N >= 1.0 - 1e-9 : ts.comps.N > 1.0;
        if (out && (opts.stop_on_exit || at_start) && rec.exit == ExitKind::survived) {
            rec.exit = kind_of(ts.comps.arg);
            rec.exit_constraint = ts.comps.arg;
            rec.s_detect = s;
            rec.N_at_exit = ts.comps.N;
            rec.s_exit = s;
            if (!at_start) {
                const auto& prev = rec.track[rec.track.size() - 2];
                const double c0 = component(prev.comps, ts.comps.arg), c1 = ts.comps.N;
                if (c1 > c0) rec.s_exit = prev.s + (1.0 - c0) / (c1 - c0) * (s - prev.s);
                if (rec.exit == ExitKind::nu) rec.outgoing_rate = (c1 - c0) / (s - prev.s);
            }
            if (opts.stop_on_exit || at_start) return rec;
        }
        if (s >= cfg.s_target - eps) {
            rec.s_exit = rec.s_detect = s;
            rec.N_at_exit = ts.comps.N;
            return rec;
        }
        try {
            for (long i = 0; i < every; ++i) {
                w = stepper.step(w, s);
                ++steps;
                s = cfg.s0 + static_cast<double>(steps) * cfg.evolve.ds;
            }
        } catch (const NumericalError& e) {
            rec.exit = ExitKind::blowup;
            rec.exit_constraint = "blowup";
            rec.s_exit = rec.s_detect = s;
            rec.N_at_exit = std::numeric_limits<double>::quiet_NaN();
            rec.note = e.what();
            return rec;
        }
    }
}

namespace {

struct Search {
    const Runner& run;
    const SearchOptions& opts;
    double s_target;
    SearchResult res;

    bool budget_left() const { return res.runs < opts.max_runs; }

    ShootingRecord eval(const Vec& u) {
        ShootingRecord r = run(u);
        ++res.runs;
        if (opts.on_record) opts.on_record(r);
        if (res.best.nu_unit.empty() || r.s_exit > res.best.s_exit) {
            res.best = r;
            res.nu_star = u;
        }
        if (r.survived() && r.s_exit >= s_target - 1e-9) res.success = true;
        return r;
    }

    static bool sign_defined(const ShootingRecord& r) {
        return r.exit == ExitKind::nu || r.exit == ExitKind::structural || r.exit == ExitKind::blowup ||
               r.exit == ExitKind::survived;
    }
};

}  // namespace

SearchResult search_nu(const Runner& run, int k, double s_target, SearchMode mode, const SearchOptions& opts) {
    Search S{run, opts, s_target, {}};
    S.res.mode = mode;
    bool fallback = false;
    if (mode == SearchMode::nested_bisection) {
        if (k != 2) throw ConfigError(fmt::format("nested bisection needs k = 2, got k = {}", k));
        double lo1 = -1.0, hi1 = 1.0;
        for (int it = 0; it < opts.outer_iters && !S.res.success && S.budget_left(); ++it) {
            const double u1 = 0.5 * (lo1 + hi1);
            double lo2 = -1.0, hi2 = 1.0;
            ShootingRecord inner_best;
            bool have = false;
            for (int jt = 0; jt < opts.inner_iters && !S.res.success && S.budget_left(); ++jt) {
                const double u2 = 0.5 * (lo2 + hi2);
                const ShootingRecord r = S.eval({u1, u2});
                if (!have || r.s_exit > inner_best.s_exit) {
                    inner_best = r;
                    have = true;
                }
                if (S.res.success) break;
                if (!Search::sign_defined(r) || r.sign(1) == 0) {
                    fallback = true;
                    S.res.diagnostic = fmt::format("inner exit sign undefined at u = ({}, {}) via {}", u1, u2,
                                                   r.exit_constraint);
                    break;
                }
                (r.sign(1) > 0 ? hi2 : lo2) = u2;
            }
            if (fallback || S.res.success || !have) break;
            if (!Search::sign_defined(inner_best) || inner_best.sign(0) == 0) {
                fallback = true;
                S.res.diagnostic = fmt::format("outer exit sign undefined at u1 = {} via {}", u1,
                                               inner_best.exit_constraint);
                break;
            }
            (inner_best.sign(0) > 0 ? hi1 : lo1) = u1;
            S.res.outer_widths.push_back(hi1 - lo1);
        }
        if (!fallback) {
            if (!S.res.success && S.res.diagnostic.empty())
                S.res.diagnostic = S.budget_left() ? "iteration limit reached" : "run budget exhausted";
            return S.res;
        }
        S.res.fell_back = true;
        S.res.mode = SearchMode::grid_refine;
    }
    // Grid refinement around the cell with the latest exit.
    Vec centre = S.res.nu_star.empty() ? Vec(k, 0.0) : S.res.nu_star;
    double half = 1.0;
    const int G = std::max(2, opts.grid_points);
    for (int level = 0; level < opts.refine_levels && !S.res.success && S.budget_left(); ++level) {
        long total = 1;
        for (int i = 0; i < k; ++i) total *= G;
        std::vector<Vec> pts;
        for (long idx = 0; idx < total; ++idx) {
            Vec u(k);
            long r = idx;
            for (int i = 0; i < k; ++i) {
                const int t = static_cast<int>(r % G);
                r /= G;
                u[i] = std::clamp(centre[i] + half * (-1.0 + 2.0 * t / (G - 1)), -1.0, 1.0);
            }
            pts.push_back(u);
        }
        const int m = static_cast<int>(std::min<long>(total, opts.max_runs - S.res.runs));
        std::vector<ShootingRecord> recs(m);
        numerics::parallel_for(m, [&](int i) { recs[i] = run(pts[i]); });
        for (int i = 0; i < m; ++i) {
            ++S.res.runs;
            if (opts.on_record) opts.on_record(recs[i]);
            if (S.res.best.nu_unit.empty() || recs[i].s_exit > S.res.best.s_exit) {
                S.res.best = recs[i];
                S.res.nu_star = pts[i];
            }
            if (recs[i].survived() && recs[i].s_exit >= s_target - 1e-9) S.res.success = true;
        }
        centre = S.res.nu_star;
        half *= 2.0 / (G - 1);
    }
    if (!S.res.success && S.res.diagnostic.empty())
        S.res.diagnostic = S.budget_left() ? "refinement limit reached" : "run budget exhausted";
    return S.res;
}

SearchResult search_nu(const ShootingConfig& cfg, const SearchOptions& opts) {
    cfg.validate();
    const Runner run = [&cfg](const Vec& u) { return run_until_exit(cfg, u); };
    return search_nu(run, cfg.params.k, cfg.s_target, cfg.search, opts);
}

TrackingReport soliton_tracking_report(const std::vector<TrackSample>& track, const centers::CenterSystem& sys) {
    const int k = sys.k();
    if (track.size() < 4) throw ConfigError("tracking report: need at least four samples");
    TrackingReport rep;
    rep.target_slope = (sys.params.p - 1.0) / 2.0;
    std::vector<Vec> gaps(k - 1);
    Vec logs;
    for (const auto& t : track) {
        rep.s.push_back(t.s);
        logs.push_back(std::log(t.s));
        const Vec zb = centers::bar_zeta(sys, t.s);
        Vec dev(k);
        double cm = 0.0;
        for (int i = 0; i < k; ++i) {
            dev[i] = t.zeta[i] - zb[i];
            cm += dev[i] / k;
        }
        rep.deviation.push_back(dev);
        rep.center_of_mass.push_back(cm);
        for (int i = 0; i + 1 < k; ++i) gaps[i].push_back(t.zeta[i + 1] - t.zeta[i]);
        rep.phi1.push_back(t.phi.empty() ? 0.0 : t.phi[0]);
        if (t.s > track.front().s) rep.max_non_nu = std::max(rep.max_non_nu, t.comps.non_nu());
    }
    for (int i = 0; i + 1 < k; ++i) {
        const double slope = numerics::linear_fit(logs, gaps[i]).slope;
        rep.gap_slopes.push_back(slope);
        rep.max_slope_error = std::max(rep.max_slope_error, std::abs(slope - rep.target_slope) / rep.target_slope);
    }
    const std::size_t m = track.size();
    const std::size_t q3 = m - std::max<std::size_t>(1, m / 4);
    double acc = 0.0;
    for (std::size_t t = q3; t < m; ++t) acc += rep.center_of_mass[t];
    rep.zeta0 = acc / static_cast<double>(m - q3);
    const std::size_t half = m / 2;
    const auto [mn, mx] = std::minmax_element(rep.phi1.begin() + static_cast<long>(half), rep.phi1.end());
    rep.phi1_tail_variation = *mx - *mn;
    return rep;
}

C1Calibration calibrate_c1(ShootingConfig cfg, double horizon, double rel_tol, int max_iter) {
    C1Calibration cal;
    cal.c1 = cfg.params.c1;
    cfg.s_target = cfg.s0 + horizon;
    cfg.validate();
    const double skip = std::min(0.25, 0.25 * horizon);
    for (int it = 0; it < max_iter; ++it) {
        cal.c1_history.push_back(cal.c1);
        cfg.params.c1 = cal.c1;
        const ShootingRecord rec = run_until_exit(cfg, Vec(cfg.params.k, 0.0), RunOptions{false});
        Vec s;
        std::vector<Vec> zeta;
        for (const auto& t : rec.track)
            if (t.s >= cfg.s0 + skip) {
                s.push_back(t.s);
                zeta.push_back(t.zeta);
            }
        if (s.size() < 3) throw NumericalError(fmt::format("c1 calibration: run ended at s = {} ({})", rec.s_exit,
                                                           rec.exit_constraint));
        const auto fit = modulation::fit_c1(s, zeta, cfg.params.p);
        cal.fits.push_back(fit);
        if (fit.degenerate) throw NumericalError("c1 calibration: degenerate regression");
        const double change = std::abs(fit.c1 - cal.c1) / fit.c1;
        cal.c1 = fit.c1;
        if (change < rel_tol) {
            cal.converged = true;
            break;
        }
    }
    cal.c1_history.push_back(cal.c1);
    return cal;
}

}  // namespace blowuplab::shooting
