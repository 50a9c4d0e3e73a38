#include <doctest.h>

#include <cmath>

#include "blowuplab/center_dynamics.hpp"
#include "blowuplab/modulation.hpp"
#include "blowuplab/spectral.hpp"

using namespace blowuplab;
using namespace blowuplab::modulation;
using profiles::PhaseProfile;
using profiles::SolitonParam;
using profiles::Space;

namespace {

PhaseProfile smooth_profile(const profiles::SpacePtr& sp, double a, double b) {
    PhaseProfile q = PhaseProfile::zero(sp);
    for (int j = 0; j < sp->n(); ++j) {
        const double y = sp->y()[j];
        q.w1[j] = std::exp(-a * y * y) * (1 + b * y);
        q.w2[j] = std::cos(a * y) + b * y * y * y;
    }
    return q;
}

}  // namespace

TEST_CASE("projection kit") {
    const auto sp = Space::make(3.0);
    for (double d : {0.0, 0.4, -0.7}) {
        const auto kit = build_projection_kit(sp, d);
        CHECK(kit.residual[0] <= 1e-8);
        CHECK(kit.residual[1] <= 1e-8);
        for (int l = 0; l < 2; ++l) {
            const auto F = F_direction(sp, l, d);
            CHECK(kit.project(l, F) == doctest::Approx(1.0).epsilon(1e-12));
            const auto r = smooth_profile(sp, 1.3, 0.4);
            CHECK(std::abs(kit.project(l, r) - kit.project_phi(l, r)) <= 1e-6 * (1 + std::abs(kit.project(l, r))));
        }
    }
    // d = 0: W_0 is odd and W_1 even, so each annihilates the opposite parity.
    const auto kit = build_projection_kit(sp, 0.0);
    const auto even = smooth_profile(sp, 0.8, 0.0);
    PhaseProfile odd = PhaseProfile::zero(sp);
    for (int j = 0; j < sp->n(); ++j) {
        const double y = sp->y()[j];
        odd.w1[j] = y * std::exp(-y * y);
        odd.w2[j] = std::sin(2 * y);
    }
    CHECK(std::abs(kit.project(0, even)) <= 1e-10);
    CHECK(std::abs(kit.project(1, odd)) <= 1e-10);
    CHECK(std::abs(kit.project(0, odd)) > 1e-3);
    CHECK(std::abs(kit.project(1, even)) > 1e-3);
}

TEST_CASE("energy bilinear form") {
    const auto sp = Space::make(3.0);
    const auto q = smooth_profile(sp, 1.0, 0.5), r = smooth_profile(sp, 2.0, -0.3);
    CHECK(std::abs(phi_bilinear(q, q) - std::pow(profiles::h_norm(q), 2)) <= 1e-12 * phi_bilinear(q, q));
    CHECK(std::abs(phi_bilinear(q, r) - phi_bilinear(r, q)) <= 1e-12 * std::abs(phi_bilinear(q, r)));
    CHECK(std::abs(phi_bilinear(q, r) - phi_by_parts(q, r)) <= 1e-6);
}

TEST_CASE("modulation of synthetic soliton sums") {
    const auto sp = Space::make(3.0);
    const std::vector<SolitonParam> truth{SolitonParam::from_zeta(-2.0, 3e-4), SolitonParam::from_zeta(1.5, -2e-4),
                                          SolitonParam::from_zeta(4.5, 1e-4)};
    const auto v = profiles::soliton_sum(sp, truth);

    SUBCASE("exact guess is a fixed point") {
        const auto st = modulate(v, truth);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            CHECK(std::abs(st.params[i].zeta() - truth[i].zeta()) <= 1e-10);
            CHECK(std::abs(st.params[i].nu - truth[i].nu) <= 1e-10);
        }
        CHECK(st.q_norm <= 1e-10);
    }
    SUBCASE("perturbed guess recovers the parameters") {
        std::vector<SolitonParam> guess;
        for (std::size_t i = 0; i < truth.size(); ++i)
            guess.push_back(SolitonParam::from_zeta(truth[i].zeta() + (i % 2 ? -1e-3 : 1e-3), truth[i].nu + 1e-3));
        const auto st = modulate(v, guess);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            CHECK(std::abs(st.params[i].zeta() - truth[i].zeta()) <= 1e-8);
            CHECK(std::abs(st.params[i].nu - truth[i].nu) <= 1e-8);
        }
        for (double e : orthogonality_defects(v, st.params)) CHECK(std::abs(e) <= 1e-8);
        CHECK(st.residual <= 1e-8);
    }
    SUBCASE("added bump") {
        const double eps = 1e-3;
        const auto bump = smooth_profile(sp, 1.0, 0.2);
        const auto st = modulate(v + eps * bump, truth);
        CHECK(st.q_norm <= 2.0 * eps * profiles::h_norm(bump));
        CHECK(st.q_norm > 0.0);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            CHECK(std::abs(st.params[i].zeta() - truth[i].zeta()) <= 50 * eps);
            CHECK(std::abs(st.params[i].nu - truth[i].nu) <= 50 * eps);
        }
        for (double e : orthogonality_defects(v + eps * bump, st.params)) CHECK(std::abs(e) <= 1e-8);
    }
    SUBCASE("failure is reported") {
        std::vector<SolitonParam> bad{SolitonParam::from_zeta(0.0, 0.0), SolitonParam::from_zeta(0.1, 0.0),
                                      SolitonParam::from_zeta(4.5, 0.0)};
        CHECK_THROWS_AS(modulate(v, bad), ModulationError);
    }
}

TEST_CASE("gap functionals") {
    const auto sys = centers::CenterSystem::make({3.0, 3, 1.0});
    const auto spec = spectral::exact_spectrum(3);
    const double g = 2.0;
    const std::vector<SolitonParam> eq{SolitonParam::from_zeta(-g, 0.0), SolitonParam::from_zeta(0.0, 0.0),
                                       SolitonParam::from_zeta(g, 0.0)};
    const auto G = gaps(eq, 10.0, sys, spec);
    CHECK(G.J == doctest::Approx(2.0 * std::exp(-g)).epsilon(1e-12));
    CHECK(G.Jbar == 0.0);

    const double s = 40.0;
    Vec z = centers::bar_zeta(sys, s);
    std::vector<SolitonParam> shifted;
    for (double v : z) shifted.push_back(SolitonParam::from_zeta(v + 0.3, 0.0));
    const auto H = gaps(shifted, s, sys, spec);
    CHECK(H.Jtilde <= 1e-20);
    CHECK(H.phi[0] == doctest::Approx(0.3));

    const auto sys2 = centers::CenterSystem::make({2.0, 3, 1.0});
    const auto P = gaps(eq, 10.0, sys2, spec);
    CHECK(P.Jhat == doctest::Approx(2.0 * std::exp(-1.99 * g)).epsilon(1e-12));
}

TEST_CASE("shrinking-set norm") {
    const Vec gamma{1.0, -1.0};
    const double s0 = 30.0, eta = 0.125;
    const auto zero = shrink_components({35.0, 0.0, {0.0, 0.0}, {0.0, 0.0}}, s0, gamma, eta);
    CHECK(zero.N == 0.0);
    const double s = 33.0;
    const auto edge = shrink_components({s, 0.0, {std::pow(s, -1.5), 0.0}, {0.0, 0.0}}, s0, gamma, eta);
    CHECK(edge.N == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(edge.arg == "nu_1");

    std::vector<NormSample> run;
    for (int i = 0; i <= 40; ++i) {
        const double t = s0 + 0.1 * i;
        run.push_back({t, 0.01 * std::pow(t, -0.5 - eta), {0.2 * std::exp(t - s0) * std::pow(t, -1.5), 0.0}, {0.0, 1e-3}});
    }
    const auto ser = shrink_norm(run, s0, gamma, eta);
    int first = -1;
    for (std::size_t i = 0; i < run.size() && first < 0; ++i) {
        const auto& c = ser.comps[i];
        double m = c.q;
        for (double v : c.nu) m = std::max(m, v);
        for (double v : c.phi) m = std::max(m, v);
        if (m > 1.0) first = static_cast<int>(i);
    }
    CHECK(first > 0);
    CHECK(ser.first_exit == first);
    CHECK(ser.inside[first - 1]);
    CHECK_FALSE(ser.inside[first]);
}

TEST_CASE("interaction constant fit") {
    const double c1 = 0.7;
    const auto sys = centers::CenterSystem::make({3.0, 3, c1});
    Vec z0 = centers::bar_zeta(sys, 5.0);
    z0[0] -= 0.4;
    z0[2] += 0.2;
    const auto res = centers::integrate_perturbed(sys, z0, 5.0, 60.0, nullptr, 0.0, 2000);
    const auto fit = fit_c1(res.traj.times, res.traj.states, 3.0);
    CHECK(fit.c1 == doctest::Approx(c1).epsilon(1e-3 / c1));
    CHECK(fit.consistent());

    Vec s;
    std::vector<Vec> still;
    for (int i = 0; i < 20; ++i) {
        s.push_back(10.0 + i);
        still.push_back({-1.0, 0.0, 1.0});
    }
    CHECK(fit_c1(s, still, 3.0).degenerate);
}
