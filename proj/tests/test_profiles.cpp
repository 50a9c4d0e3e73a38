#include <doctest.h>

#include <cmath>

#include "blowuplab/profiles.hpp"

using namespace blowuplab;
using namespace blowuplab::profiles;

TEST_CASE("constant soliton") {
    CHECK(kappa0(3.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(kappa0(2.0) == doctest::Approx(6.0).epsilon(1e-15));
    for (double p : {1.5, 2.0, 3.0, 5.0, 7.0}) {
        const double k = kappa0(p);
        CHECK(std::abs(std::pow(k, p - 1.0) - 2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0))) < 1e-14 * k);
    }
    CHECK_THROWS_AS(kappa0(1.0), ConfigError);
}

TEST_CASE("space construction") {
    const auto sp = Space::make(3.0);
    CHECK(sp->n() == 2001);
    CHECK(sp->a() == 2.0);
    CHECK(sp->c() == 2.0);
    double sum = 0.0;
    for (double w : sp->weights()) sum += w;
    CHECK(std::abs(sum - 4.0 / 3.0) < 1e-6);
    // A short truncation leaves a non-negligible weight at the cut.
    CHECK_THROWS_AS(Space::make(3.0, 4.0, 401), ConfigError);
}

TEST_CASE("solitons") {
    const auto sp = Space::make(3.0);
    const auto k0 = kappa(sp, 0.0);
    for (int j = 0; j < sp->n(); ++j) {
        CHECK(k0.w1[j] == sp->kappa0());
        CHECK(k0.w2[j] == 0.0);
    }
    // d = 0.5, y = -0.5: kappa0 (0.75)^{1/2} / 0.75.
    const auto sp2 = Space::make(3.0, std::atanh(0.5) * 20.0, 41);
    const auto kd = kappa(sp2, 0.5);
    int j = -1;
    for (int i = 0; i < sp2->n(); ++i)
        if (std::abs(sp2->y()[i] + 0.5) < 1e-14) j = i;
    REQUIRE(j >= 0);
    CHECK(kd.w1[j] == doctest::Approx(sp2->kappa0() / std::sqrt(0.75)).epsilon(1e-14));

    CHECK_THROWS_AS(kappa(sp, 1.0), DomainError);
}

TEST_CASE("generalized solitons") {
    const auto sp = Space::make(3.0);
    const auto a = kappa_star(sp, 0.3, 0.0), b = kappa(sp, 0.3);
    CHECK(a.w1 == b.w1);
    CHECK(a.w2 == b.w2);
    const auto s = kappa_star(sp, 0.0, 1.0);
    for (int j = 0; j < sp->n(); j += 100) {
        CHECK(s.w1[j] == doctest::Approx(sp->kappa0() / 2.0).epsilon(1e-14));
        CHECK(s.w2[j] == doctest::Approx(-sp->kappa0() / 4.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(kappa_star(sp, 0.5, -0.5 - 1e-3), DomainError);

    // Analytic nu-derivative against centered differences.
    for (double d : {0.0, -0.4, 0.6})
        for (double nu : {0.0, 0.2, -0.1}) {
            const auto an = kappa_star_dnu(sp, d, nu);
            const double e = 1e-6;
            const auto fd = (1.0 / (2 * e)) * (kappa_star(sp, d, nu + e) - kappa_star(sp, d, nu - e));
            for (int j = 0; j < sp->n(); j += 50) {
                CHECK(std::abs(an.w1[j] - fd.w1[j]) < 1e-7 * (1 + std::abs(an.w1[j])));
                CHECK(std::abs(an.w2[j] - fd.w2[j]) < 1e-7 * (1 + std::abs(an.w2[j])));
            }
        }
}

TEST_CASE("soliton sums alternate in sign starting negative") {
    const auto sp = Space::make(3.0);
    const std::vector<SolitonParam> prm{SolitonParam::from_zeta(-2.0, 0.0), SolitonParam::from_zeta(2.0, 0.01)};
    const auto sum = soliton_sum(sp, prm);
    const auto ref = kappa_star(sp, prm[1]) - kappa_star(sp, prm[0]);
    for (int j = 0; j < sp->n(); ++j) CHECK(sum.w1[j] == doctest::Approx(ref.w1[j]));
    CHECK(prm[0].zeta() == doctest::Approx(-2.0));
    CHECK(prm[1].d_star() == doctest::Approx(prm[1].d / 1.01));
    CHECK(prm[1].valid());
    CHECK_FALSE(SolitonParam{0.5, -0.6}.valid());
}

TEST_CASE("norms") {
    const auto sp = Space::make(3.0);
    const auto z = PhaseProfile::zero(sp);
    CHECK(h_norm(z) == 0.0);
    CHECK(energy(z) == 0.0);
    CHECK(hardy_sobolev_sup(sp, z.w1) == 0.0);
    PhaseProfile one = PhaseProfile::zero(sp);
    one.w1.assign(sp->n(), 1.0);
    CHECK(std::abs(h_norm(one) * h_norm(one) - 4.0 / 3.0) < 1e-6);
    CHECK(std::abs(h0_norm(sp, one.w1) * h0_norm(sp, one.w1) - 4.0 / 3.0) < 1e-6);

    // Energy of the constant soliton: kappa0^2 / (p-1) * 4/3 = 4/3 at p = 3.
    CHECK(std::abs(energy(kappa(sp, 0.0)) - 4.0 / 3.0) < 1e-5);
    for (double d : {0.3, -0.3, 0.6, -0.6}) CHECK(std::abs(energy(kappa(sp, d)) - 4.0 / 3.0) < 1e-4);

    CHECK(hardy_sobolev_sup(sp, kappa(sp, 0.0).w1) == doctest::Approx(sp->kappa0()));
    double prev = 0.0;
    for (double d : {0.0, 0.5, 0.9, 0.99}) {
        const auto k = kappa(sp, d);
        const double r = hardy_sobolev_sup(sp, k.w1) / h0_norm(sp, k.w1);
        CHECK(r < 3.0);
        prev = r;
    }
    CHECK(prev > 0.0);
}

TEST_CASE("Lipschitz bound in the rapidity") {
    const auto sp = Space::make(3.0);
    double cmax = 0.0;
    for (double a : {-1.0, -0.3, 0.0, 0.4, 1.2})
        for (double b : {-0.8, 0.1, 0.9}) {
            const Vec d = kappa(sp, std::tanh(a)).w1;
            const Vec e = kappa(sp, std::tanh(b)).w1;
            Vec diff(d.size());
            for (std::size_t j = 0; j < d.size(); ++j) diff[j] = d[j] - e[j];
            cmax = std::max(cmax, h0_norm(sp, diff) / std::abs(a - b));
        }
    CHECK(cmax < 5.0);
}

TEST_CASE("continuity of the generalized soliton") {
    const auto sp = Space::make(3.0);
    const SolitonParam a{0.2, 0.05};
    const auto same = kappa_star_continuity_check(sp, {{a, a}}, 2.0);
    CHECK(same.skipped == 1);
    CHECK(std::isnan(same.ratios[0]));

    // Small nu-increment: the ratio approaches |d kappa*/d nu|_H (1 - |d|).
    const SolitonParam b{0.2, 0.05 + 1e-6};
    const auto r = kappa_star_continuity_check(sp, {{a, b}}, 2.0);
    const double ref = h_norm(kappa_star_dnu(sp, 0.2, 0.05)) * (1.0 - 0.2);
    CHECK(r.ratios[0] == doctest::Approx(ref).epsilon(1e-4));

    const auto base = kappa_star_continuity_check(sp, {{{0.0, 0.0}, {0.0, 0.01}}, {{0.0, 0.0}, {0.01, 0.0}}}, 2.0);
    std::vector<std::pair<SolitonParam, SolitonParam>> pairs;
    for (double d : {0.0, 0.5, -0.5})
        for (double nu : {0.0, 0.1}) pairs.push_back({{d, nu}, {d * 0.98 + 0.01, nu + 0.01}});
    const auto grid = kappa_star_continuity_check(sp, pairs, 2.0);
    CHECK(grid.max_ratio <= 10.0 * base.max_ratio);

    CHECK_THROWS_AS(kappa_star_continuity_check(sp, {{{0.5, -0.45}, a}}, 2.0), DomainError);
}
