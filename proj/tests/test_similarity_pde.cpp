#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "blowuplab/io.hpp"
#include "blowuplab/profiles.hpp"
#include "blowuplab/similarity_pde.hpp"

using namespace blowuplab;
using namespace blowuplab::profiles;
using namespace blowuplab::similarity;

namespace {

// Pointwise |L kappa(d) - c kappa(d) + kappa(d)^p| over |chi| <= chi_in.
double stationary_residual(const SpacePtr& sp, double d, double chi_in) {
    const auto k = kappa(sp, d);
    const Vec Lk = sp->apply_L(k.w1);
    double r = 0.0;
    for (int j = 0; j < sp->n(); ++j) {
        if (std::abs(sp->grid().chi(j)) > chi_in) continue;
        r = std::max(r, std::abs(Lk[j] - sp->c() * k.w1[j] + std::pow(k.w1[j], sp->p())));
    }
    return r;
}

double h_dist(const PhaseProfile& a, const PhaseProfile& b) { return h_norm(a - b); }

}  // namespace

TEST_CASE("discrete L") {
    const auto sp = Space::make(3.0);
    const Vec one(sp->n(), 1.0);
    for (double v : sp->apply_L(one)) CHECK(std::abs(v) < 1e-12);

    // Self-adjoint in the weighted product, with -<Lf, f> equal to the gradient form.
    Vec f(sp->n()), g(sp->n());
    for (int j = 0; j < sp->n(); ++j) {
        const double y = sp->y()[j];
        f[j] = std::sin(3 * y) + y * y;
        g[j] = std::cos(2 * y) - y;
    }
    const double fg = sp->dot(sp->apply_L(f), g), gf = sp->dot(f, sp->apply_L(g));
    CHECK(std::abs(fg - gf) < 1e-12 * std::abs(fg));
    CHECK(std::abs(-sp->dot(sp->apply_L(f), f) - sp->grad_dot(f, f)) < 1e-12 * sp->grad_dot(f, f));

    // Flux form against the centered form on a smooth profile.
    const Vec a = sp->apply_L(f), b = apply_L_centered(*sp, f);
    for (int j = 0; j < sp->n(); ++j)
        if (std::abs(sp->grid().chi(j)) < 4.0) CHECK(std::abs(a[j] - b[j]) < 1e-3 * (1 + std::abs(b[j])));
}

TEST_CASE("stationarity of the solitons under L") {
    // d = 0: exact on any grid.
    CHECK(stationary_residual(Space::make(3.0), 0.0, 10.0) <= 1e-12);
    // d = 0.3: the interior residual is second order in h and reaches 1e-5 on a refined grid.
    const double r1 = stationary_residual(Space::make(3.0, 10.0, 2001), 0.3, 5.0);
    const double r2 = stationary_residual(Space::make(3.0, 10.0, 4001), 0.3, 5.0);
    const double r3 = stationary_residual(Space::make(3.0, 10.0, 16001), 0.3, 5.0);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(r3 <= 1e-5);
    // The stationary field (0, L k - c k + k^p) measured in the phase-space norm: weighted L2 of the
    // second component. Exact at d = 0; second order for d != 0.
    auto field_norm = [](const SpacePtr& sp, double d) {
        const auto k = kappa(sp, d);
        const Vec Lk = sp->apply_L(k.w1);
        Vec r(sp->n());
        for (int j = 0; j < sp->n(); ++j) r[j] = Lk[j] - sp->c() * k.w1[j] + std::pow(k.w1[j], 3.0);
        return std::sqrt(sp->dot(r, r));
    };
    CHECK(field_norm(Space::make(3.0), 0.0) <= 1e-6);
    const double f1 = field_norm(Space::make(3.0, 10.0, 2001), 0.3);
    const double f2 = field_norm(Space::make(3.0, 10.0, 4001), 0.3);
    CHECK(f1 / f2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(field_norm(Space::make(3.0, 10.0, 16001), 0.3) <= 1e-6);
}

TEST_CASE("damping operator") {
    const auto sp = Space::make(3.0);
    const auto B = DampingOperator::make(*sp);
    Vec w(sp->n());
    for (int j = 0; j < sp->n(); ++j) w[j] = std::cos(sp->y()[j]);
    const Vec Bw = B.apply(w);
    for (int j = 0; j < sp->n(); ++j) {
        const double y = sp->y()[j];
        if (std::abs(sp->grid().chi(j)) > 4.0) continue;
        const double ref = -3.0 * std::cos(y) + 2.0 * y * std::sin(y);
        CHECK(std::abs(Bw[j] - ref) < 1e-4 * std::pow(std::cosh(sp->grid().chi(j)), 2));
    }
    // Dissipative: <B w, w> <= 0 in the weighted product.
    CHECK(sp->dot(Bw, w) < 0.0);
}

TEST_CASE("steps preserve the solitons") {
    for (double ds : {1e-3, 2e-3, 1e-2}) {
        const auto sp = Space::make(3.0);
        const auto k = kappa(sp, 0.0);
        EvolveConfig cfg;
        cfg.ds = ds;
        CHECK(h_dist(step(k, cfg), k) <= 1e-8);
        cfg.scheme = Scheme::imex_be;
        CHECK(h_dist(step(k, cfg), k) <= 1e-8);
    }
    // Boosted soliton: the per-step drift is set by the spatial truncation error.
    const auto fine = Space::make(3.0, 10.0, 8001);
    const auto k3 = kappa(fine, 0.3);
    EvolveConfig cfg;
    CHECK(h_dist(step(k3, cfg), k3) <= 1e-8);
    const auto z = PhaseProfile::zero(Space::make(3.0));
    CHECK(h_norm(step(z, cfg)) == 0.0);
}

TEST_CASE("generalized soliton is an exact solution") {
    const double mu = 0.01, s0 = 0.5;
    for (double d : {0.0, 0.3}) {
        const auto sp = Space::make(3.0, 10.0, d == 0.0 ? 2001 : 8001);
        const auto q0 = kappa_star(sp, d, mu * std::exp(s0));
        EvolveConfig cfg;
        const auto q1 = step(q0, cfg, s0);
        const auto ex = kappa_star(sp, d, mu * std::exp(s0 + cfg.ds));
        CHECK(h_dist(q1, ex) / h_norm(ex) <= 1e-6);
    }
    // Three consecutive exact slices: small discrete residual.
    const auto sp = Space::make(3.0);
    const double ds = 1e-3;
    const auto a = kappa_star(sp, 0.0, mu * std::exp(s0 - ds)), b = kappa_star(sp, 0.0, mu * std::exp(s0)),
               c = kappa_star(sp, 0.0, mu * std::exp(s0 + ds));
    CHECK(pde_residual(a, b, c, ds) < 1e-6);
}

TEST_CASE("evolution") {
    const auto sp = Space::make(3.0);
    SUBCASE("constant soliton over a long window") {
        const auto k = kappa(sp, 0.0);
        const auto res = evolve(k, 0.0, 5.0, {});
        CHECK(h_dist(res.final_state, k) <= 1e-3);
        CHECK(res.s_end == doctest::Approx(5.0));
        CHECK(max_energy_increase_rate(res.energy_s, res.energy) <= 1e-4);
        for (double e : res.energy) CHECK(std::abs(e - res.energy.front()) < 1e-10);
    }
    SUBCASE("heteroclinic decay for positive mu") {
        const auto res = evolve(kappa_star(sp, 0.0, 1.0), 0.0, 2.0, {});
        const double n0 = h_norm(kappa_star(sp, 0.0, 1.0));
        const double n1 = h_norm(res.final_state);
        CHECK(n1 < n0);
        CHECK(std::abs(n1 - h_norm(kappa_star(sp, 0.0, std::exp(2.0)))) < 1e-3 * n0);
        CHECK(max_energy_increase_rate(res.energy_s, res.energy) <= 1e-4);
    }
    SUBCASE("blow-up for negative mu") {
        const auto dir = std::filesystem::temp_directory_path() / "blowuplab_test_blowup";
        std::filesystem::remove_all(dir);
        EvolveCallbacks cb;
        cb.checkpoint_path = (dir / "last.csv").string();
        double s_fail = 0.0;
        try {
            evolve(kappa_star(sp, 0.0, -0.1), 0.0, 4.0, {}, cb);
        } catch (const NumericalError&) {
            s_fail = read_checkpoint(cb.checkpoint_path, sp).s;
        }
        CHECK(s_fail > 2.0);
        CHECK(s_fail < std::log(10.0) + 0.05);
        std::filesystem::remove_all(dir);
    }
    SUBCASE("early stop and kept slices") {
        EvolveCallbacks cb;
        cb.cadence = 0.1;
        cb.keep_every = 2;
        cb.on_sample = [](double s, const PhaseProfile&) { return s < 0.55; };
        const auto res = evolve(kappa(sp, 0.0), 0.0, 1.0, {}, cb);
        CHECK(res.stopped_early);
        CHECK(res.s_end < 1.0);
        CHECK(res.slices.size() == res.s.size());
        const Vec e = energy_series(res.slices);
        CHECK(e.size() == res.slices.size());
    }
}

TEST_CASE("decoupled two-soliton energy and dissipation") {
    const auto sp = Space::make(3.0);
    const std::vector<SolitonParam> prm{SolitonParam::from_zeta(-4.0, 0.0), SolitonParam::from_zeta(4.0, 0.0)};
    const auto q = soliton_sum(sp, prm);
    CHECK(std::abs(energy(q) - 2.0 * 4.0 / 3.0) <= 0.02 * 2.0 * 4.0 / 3.0);
    const auto res = evolve(q, 0.0, 2.0, {});
    CHECK(max_energy_increase_rate(res.energy_s, res.energy) <= 1e-4);
}

TEST_CASE("configuration and checkpoints") {
    CHECK(parse_scheme("cn") == Scheme::imex_cn);
    CHECK(parse_scheme("imex-be") == Scheme::imex_be);
    CHECK(scheme_name(Scheme::imex_cn) == "imex-cn");
    CHECK_THROWS_AS(parse_scheme("rk4"), ConfigError);
    EvolveConfig bad;
    bad.ds = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    const auto sp = Space::make(3.0);
    const auto dir = std::filesystem::temp_directory_path() / "blowuplab_test_ckpt";
    std::filesystem::remove_all(dir);
    const auto q = kappa_star(sp, 0.2, 0.03);
    write_checkpoint((dir / "c.csv").string(), q, 1.25, 2e-3, "abc");
    const auto c = read_checkpoint((dir / "c.csv").string(), sp);
    CHECK(c.s == 1.25);
    CHECK(c.ds == 2e-3);
    CHECK(c.hash == "abc");
    CHECK(c.state.w1 == q.w1);
    CHECK(c.state.w2 == q.w2);
    CHECK_THROWS_AS(read_checkpoint((dir / "c.csv").string(), Space::make(3.0, 10.0, 1001)), ConfigError);
    std::filesystem::remove_all(dir);
}
