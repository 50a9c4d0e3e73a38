#include <doctest.h>

#include <cmath>

#include "blowuplab/shooting.hpp"

using namespace blowuplab;
using namespace blowuplab::shooting;

namespace {

// Surrogate flow nu_i' = nu_i + eps_i in the unit box, started at nu(0) = u: the exit time of
// component i is log((1 + sign(a_i) eps_i) / |a_i|) with a_i = u_i + eps_i; the bounded solution
// starts at u = -eps.
Runner surrogate(const Vec& eps, double horizon) {
    return [eps, horizon](const Vec& u) {
        const int k = static_cast<int>(u.size());
        double t_exit = horizon;
        int arg = -1;
        for (int i = 0; i < k; ++i) {
            const double a = u[i] + eps[i];
            if (a == 0.0) continue;
            const double t = std::max(0.0, std::log((1.0 + (a > 0 ? eps[i] : -eps[i])) / std::abs(a)));
            if (t < t_exit) {
                t_exit = t;
                arg = i;
            }
        }
        ShootingRecord r;
        r.nu_unit = u;
        r.s_exit = r.s_detect = t_exit;
        r.nu_last.resize(k);
        for (int i = 0; i < k; ++i) r.nu_last[i] = std::exp(t_exit) * (u[i] + eps[i]) - eps[i];
        if (arg >= 0) {
            r.exit = ExitKind::nu;
            r.exit_constraint = "nu_" + std::to_string(arg + 1);
        }
        return r;
    };
}

ShootingConfig small_config() {
    ShootingConfig cfg;
    cfg.params.p = 3.0;
    cfg.params.k = 2;
    cfg.s0 = 30.0;
    cfg.s_target = 32.0;
    return cfg;
}

}  // namespace

TEST_CASE("rescaling") {
    const Vec gamma{1.0, -1.0, 0.5};
    const Vec u{0.3, -1.0, 0.7};
    const Vec nu = rescale(gamma, 30.0, u);
    CHECK(nu[0] == doctest::Approx(0.3 * std::pow(30.0, -1.5)));
    CHECK(nu[2] == doctest::Approx(0.7 * std::pow(30.0, -1.0)));
    const Vec back = rescale_inverse(gamma, 30.0, nu);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(back[i] - u[i]) <= 1e-15);
    const auto cfg = small_config();
    for (double w : cfg.box_widths(30.0)) CHECK(w == doctest::Approx(std::pow(30.0, -1.5)));
}

TEST_CASE("configuration") {
    CHECK(parse_search_mode("nested-bisection") == SearchMode::nested_bisection);
    CHECK(parse_search_mode("grid-refine") == SearchMode::grid_refine);
    CHECK(search_mode_name(SearchMode::grid_refine) == "grid-refine");
    CHECK_THROWS_AS(parse_search_mode("newton"), ConfigError);
    CHECK(exit_kind_name(ExitKind::nu) == "nu");
    CHECK(exit_kind_name(ExitKind::structural) == "structural");
    auto cfg = small_config();
    cfg.s_target = 20.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    CHECK_THROWS_AS(initial_data(cfg, {0.0, 1.5}), ConfigError);
    CHECK_THROWS_AS(initial_data(cfg, {0.0}), ConfigError);
}

TEST_CASE("initial data") {
    const auto cfg = small_config();
    const auto init = initial_data(cfg, {0.0, 0.0});
    const auto sys = centers::CenterSystem::make(cfg.params);
    const Vec zb = centers::bar_zeta(sys, cfg.s0);
    for (int i = 0; i < 2; ++i) {
        CHECK(init.params[i].nu == 0.0);
        CHECK(init.params[i].zeta() == doctest::Approx(zb[i]).epsilon(1e-14));
        CHECK(init.params[i].d == doctest::Approx(-std::tanh(zb[i])).epsilon(1e-14));
    }
    const auto st = modulation::modulate(init.w, init.params);
    CHECK(st.q_norm <= 1e-10);
    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(st.params[i].zeta() - zb[i]) <= 1e-10);
        CHECK(std::abs(st.params[i].nu) <= 1e-10);
    }
    const auto edge = initial_data(cfg, {1.0, -0.5});
    CHECK(edge.params[0].nu == doctest::Approx(std::pow(30.0, -1.5)));
    CHECK(edge.params[1].nu == doctest::Approx(-0.5 * std::pow(30.0, -1.5)));
}

TEST_CASE("starts on the unit sphere exit immediately") {
    const auto cfg = small_config();
    for (const Vec& u : {Vec{1.0, 0.2}, Vec{0.0, -1.0}}) {
        const auto rec = run_until_exit(cfg, u);
        CHECK(rec.exit == ExitKind::nu);
        CHECK(rec.s_exit == cfg.s0);
        CHECK(rec.exit_constraint == (std::abs(u[0]) == 1.0 ? "nu_1" : "nu_2"));
        CHECK(rec.N_at_exit == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(rec.track.size() == 1);
    }
}

TEST_CASE("short run from the seed keeps the non-nu components small") {
    // The interaction constant of the center model is calibrated against the PDE first.
    auto cfg = small_config();
    const auto cal = calibrate_c1(cfg, 2.0);
    CHECK(cal.converged);
    CHECK(cal.c1 > 0.0);
    cfg.params.c1 = cal.c1;
    const auto rec = run_until_exit(cfg, {0.0, 0.0});
    CHECK(rec.exit != ExitKind::structural);
    CHECK(rec.exit != ExitKind::blowup);
    CHECK((rec.survived() || rec.exit == ExitKind::nu));
    CHECK(rec.max_non_nu <= 0.5);
    CHECK(rec.s_exit >= cfg.s0);
    if (rec.exit == ExitKind::nu) CHECK(rec.outgoing_rate >= 0.0);
}

TEST_CASE("search on a surrogate flow") {
    const Vec eps{0.3, -0.2};
    SUBCASE("nested bisection") {
        SearchOptions opts;
        opts.outer_iters = 30;
        opts.inner_iters = 30;
        opts.max_runs = 2000;
        const auto res = search_nu(surrogate(eps, 12.0), 2, 12.0, SearchMode::nested_bisection, opts);
        CHECK(res.success);
        CHECK_FALSE(res.fell_back);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(res.nu_star[i] + eps[i]) <= 2.0 * std::exp(-12.0));
        for (std::size_t i = 1; i < res.outer_widths.size(); ++i)
            CHECK(res.outer_widths[i] == doctest::Approx(0.5 * res.outer_widths[i - 1]));
    }
    SUBCASE("grid refinement") {
        SearchOptions opts;
        opts.refine_levels = 20;
        opts.max_runs = 4000;
        const auto res = search_nu(surrogate(eps, 6.0), 2, 6.0, SearchMode::grid_refine, opts);
        CHECK(res.success);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(res.nu_star[i] + eps[i]) <= 2.0 * std::exp(-6.0));
        const Vec e3{0.1, -0.25, 0.05};
        const auto r3 = search_nu(surrogate(e3, 5.0), 3, 5.0, SearchMode::grid_refine, opts);
        CHECK(r3.success);
    }
    SUBCASE("budget exhaustion is reported") {
        SearchOptions opts;
        opts.max_runs = 5;
        const auto res = search_nu(surrogate(eps, 12.0), 2, 12.0, SearchMode::nested_bisection, opts);
        CHECK_FALSE(res.success);
        CHECK(res.runs == 5);
        CHECK(res.diagnostic == "run budget exhausted");
    }
    SUBCASE("nested bisection needs k = 2") {
        CHECK_THROWS_AS(search_nu(surrogate({0.1, 0.1, 0.1}, 3.0), 3, 3.0, SearchMode::nested_bisection),
                        ConfigError);
    }
    SUBCASE("searching the sphere only finds immediate exits") {
        const auto run = surrogate(eps, 12.0);
        for (double th = 0.0; th < 6.28; th += 0.3) {
            Vec u{std::cos(th), std::sin(th)};
            const double m = std::max(std::abs(u[0]), std::abs(u[1]));
            u[0] /= m;
            u[1] /= m;
            const auto r = run(u);
            CHECK(r.s_exit <= 0.5);
        }
    }
}

TEST_CASE("tracking report on the explicit solution") {
    for (double p : {3.0, 2.0}) {
        centers::ModelParams mp;
        mp.p = p;
        mp.k = 3;
        const auto sys = centers::CenterSystem::make(mp);
        const auto spec = spectral::exact_spectrum(3);
        std::vector<TrackSample> track;
        for (int i = 0; i <= 40; ++i) {
            TrackSample t;
            t.s = 30.0 + 0.2 * i;
            t.zeta = centers::bar_zeta(sys, t.s);
            for (double& z : t.zeta) z += 0.25;
            std::vector<profiles::SolitonParam> prm;
            for (double z : t.zeta) prm.push_back(profiles::SolitonParam::from_zeta(z, 0.0));
            t.gaps = modulation::gaps(prm, t.s, sys, spec);
            t.phi = t.gaps.phi;
            t.nu.assign(3, 0.0);
            track.push_back(t);
        }
        const auto rep = soliton_tracking_report(track, sys);
        CHECK(rep.target_slope == (p - 1.0) / 2.0);
        CHECK(rep.max_slope_error <= 1e-3);
        CHECK(rep.zeta0 == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(rep.phi1_tail_variation <= 1e-12);
    }
}
