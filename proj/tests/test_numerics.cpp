#include <doctest.h>

#include <atomic>
#include <cmath>

#include <Eigen/Dense>

#include "blowuplab/numerics.hpp"

using namespace blowuplab;
using namespace blowuplab::numerics;

TEST_CASE("weights integrate (1-y^2) to 4/3 at p = 3") {
    const auto g = HypGrid::make(10.0, 4001);
    const Vec W = gauss_weights(g, 3.0);
    double sum = 0.0;
    for (double w : W) sum += w;
    CHECK(std::abs(sum - 4.0 / 3.0) < 1e-6);
    Vec zero(g.n, 0.0);
    double z = 0.0;
    for (int j = 0; j < g.n; ++j) z += W[j] * zero[j];
    CHECK(z == 0.0);
}

TEST_CASE("weights integrate y^2 (1-y^2) to 4/15") {
    const auto g = HypGrid::make(10.0, 2001);
    const Vec W = gauss_weights(g, 3.0);
    double s = 0.0;
    for (int j = 0; j < g.n; ++j) s += W[j] * g.y(j) * g.y(j);
    CHECK(std::abs(s - 4.0 / 15.0) < 1e-5);
}

TEST_CASE("band solver") {
    SUBCASE("identity") {
        BandMatrix m(4, 1, 1);
        for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
        const Vec r{1.0, -2.0, 3.0, 0.5};
        const Vec x = solve_banded(m, r);
        for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(r[i]));
    }
    SUBCASE("Toeplitz (-2, 1) against a dense solve") {
        const int n = 5;
        BandMatrix m(n, 1, 1);
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            m(i, i) = -2.0;
            dense(i, i) = -2.0;
            if (i > 0) m(i, i - 1) = dense(i, i - 1) = 1.0;
            if (i + 1 < n) m(i, i + 1) = dense(i, i + 1) = 1.0;
        }
        Vec e1(n, 0.0);
        e1[0] = 1.0;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        rhs[0] = 1.0;
        const Eigen::VectorXd ref = dense.partialPivLu().solve(rhs);
        const Vec x = solve_banded(m, e1);
        for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - ref[i]) < 1e-13);
    }
    SUBCASE("pivoting on a zero diagonal") {
        BandMatrix m(3, 1, 1);
        m(0, 0) = 0.0;
        m(0, 1) = 1.0;
        m(1, 0) = 1.0;
        m(1, 1) = 0.0;
        m(1, 2) = 1.0;
        m(2, 1) = 1.0;
        m(2, 2) = 1.0;
        const Vec x = solve_banded(m, {2.0, 4.0, 5.0});
        const Vec back = m.multiply(x);
        CHECK(back[0] == doctest::Approx(2.0));
        CHECK(back[1] == doctest::Approx(4.0));
        CHECK(back[2] == doctest::Approx(5.0));
    }
    SUBCASE("singular matrix") {
        BandMatrix m(3, 1, 1);
        m(0, 0) = 1.0;
        m(2, 2) = 1.0;
        CHECK_THROWS_AS(BandLU{m}, NumericalError);
    }
}

TEST_CASE("Dormand-Prince integrator") {
    SUBCASE("exponential decay") {
        const auto tr = integrate_rk([](double, const Vec& y, Vec& f) { f[0] = -y[0]; }, {1.0}, 0.0, 1.0, 1e-12);
        CHECK(std::abs(tr.back()[0] - std::exp(-1.0)) < 1e-10);
    }
    SUBCASE("zero field") {
        RkOptions o;
        o.samples = {0.0, 0.5, 1.0};
        const auto tr = integrate_rk([](double, const Vec&, Vec& f) { f[0] = 0.0; }, {2.5}, 0.0, 1.0, 1e-10, o);
        REQUIRE(tr.size() == 3);
        for (const auto& s : tr.states) CHECK(s[0] == 2.5);
    }
    SUBCASE("dense output at sample times") {
        RkOptions o;
        for (int i = 0; i <= 10; ++i) o.samples.push_back(0.3 * i);
        const auto tr = integrate_rk([](double, const Vec& y, Vec& f) { f[0] = y[1]; f[1] = -y[0]; }, {0.0, 1.0},
                                     0.0, 3.0, 1e-12, o);
        for (std::size_t i = 0; i < tr.size(); ++i) CHECK(std::abs(tr.states[i][0] - std::sin(tr.times[i])) < 1e-9);
    }
    SUBCASE("finite-time blow-up is reported") {
        CHECK_THROWS_AS(integrate_rk([](double, const Vec& y, Vec& f) { f[0] = y[0] * y[0]; }, {1.0}, 0.0, 2.0, 1e-10),
                        NumericalError);
    }
}

TEST_CASE("Newton iteration") {
    SUBCASE("square root of 4") {
        const auto r = newton([](const Vec& x) { return Vec{x[0] * x[0] - 4.0}; }, {}, {3.0});
        CHECK(r.converged());
        CHECK(std::abs(r.x[0] - 2.0) < 1e-10);
    }
    SUBCASE("already a root") {
        const auto r = newton([](const Vec& x) { return Vec{x[0]}; }, {}, {0.0});
        CHECK(r.converged());
        CHECK(r.iterations == 0);
    }
    SUBCASE("no real root") {
        NewtonOptions o;
        o.max_iter = 40;
        const auto r = newton([](const Vec& x) { return Vec{x[0] * x[0] + 1.0}; }, {}, {1.0}, o);
        CHECK_FALSE(r.converged());
        CHECK_FALSE(r.message().empty());
    }
    SUBCASE("two dimensional with analytic Jacobian") {
        const auto F = [](const Vec& x) { return Vec{x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]}; };
        const auto J = [](const Vec& x) { return std::vector<Vec>{{2 * x[0], 2 * x[1]}, {1.0, -1.0}}; };
        const auto r = newton(F, J, {1.0, 0.2});
        CHECK(r.converged());
        CHECK(std::abs(r.x[0] - std::sqrt(0.5)) < 1e-10);
    }
}

TEST_CASE("bisection, fit and interpolation") {
    CHECK(std::abs(bisect([](double x) { return std::cos(x); }, 0.0, 3.0, 1e-13) - M_PI / 2) < 1e-12);
    CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-10), NumericalError);

    const auto f = linear_fit({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.rms < 1e-12);

    // Cubic interpolation is exact on cubics.
    Vec v;
    for (int j = 0; j < 20; ++j) {
        const double x = -1.0 + 0.1 * j;
        v.push_back(x * x * x - 2 * x + 0.5);
    }
    int outside = 0;
    for (double x : {-0.95, -0.33, 0.0, 0.41, 0.87}) {
        const double exact = x * x * x - 2 * x + 0.5;
        CHECK(std::abs(interp_cubic(-1.0, 0.1, v, x, &outside) - exact) < 1e-12);
    }
    CHECK(outside == 0);
    interp_cubic(-1.0, 0.1, v, 5.0, &outside);
    CHECK(outside == 1);
    CHECK(sup_norm({1.0, -3.0, 2.0}) == 3.0);
}

TEST_CASE("parallel_for visits each index once") {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(97, [&](int i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK(worker_count() >= 1);
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(HypGrid::make(10.0, 1), ConfigError);
    CHECK_THROWS_AS(HypGrid::make(-1.0, 11), ConfigError);
    const auto g = HypGrid::make(10.0, 2001);
    CHECK(g.h == doctest::Approx(0.01));
    CHECK(g.y(1000) == 0.0);
}
