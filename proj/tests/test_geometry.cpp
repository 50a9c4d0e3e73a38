#include <doctest.h>

#include <cmath>

#include "blowuplab/geometry.hpp"

using namespace blowuplab;
using namespace blowuplab::geometry;

namespace {

CharPointModel model(int k, double zeta0, double p = 3.0) {
    CharPointModel m;
    m.k = k;
    m.zeta0 = zeta0;
    m.p = p;
    m.T0 = 1.0;
    m.x0 = 0.2;
    return m;
}

}  // namespace

TEST_CASE("derivative consistency of the blow-up curve") {
    for (int k : {2, 3})
        for (double z : {0.0, 0.7, -0.4})
            for (double r = 1e-8; r <= 1e-3; r *= 10.0)
                for (double side : {-1.0, 1.0}) {
                    const auto m = model(k, z);
                    const double x = m.x0 + side * r, h = 1e-3 * r;
                    const double fd = (predicted_T(m, x + h) - predicted_T(m, x - h)) / (2.0 * h);
                    const double an = predicted_Tprime(m, x);
                    CHECK(std::abs(fd - an) / std::abs(an) <= 2.0 / std::abs(std::log(r)));
                }
}

TEST_CASE("asymmetry of the corner") {
    for (double z : {0.7, -0.3, 1.5}) {
        const auto m = model(2, z);
        for (double r : {1e-8, 1e-5, 1e-3}) {
            const double right = 1.0 + predicted_Tprime(m, m.x0 + r);
            const double left = 1.0 - predicted_Tprime(m, m.x0 - r);
            CHECK(std::abs(right / left - std::exp(-4.0 * z)) <= 1e-10 * std::exp(-4.0 * z));
            CHECK(predicted_T(m, m.x0 + r) != doctest::Approx(predicted_T(m, m.x0 - r)).epsilon(1e-14));
        }
    }
    const auto sym = model(3, 0.0);
    for (double r : {1e-8, 1e-5, 1e-3}) {
        CHECK(predicted_T(sym, sym.x0 + r) == predicted_T(sym, sym.x0 - r));
        CHECK(predicted_Tprime(sym, sym.x0 + r) == -predicted_Tprime(sym, sym.x0 - r));
    }
}

TEST_CASE("limits at the characteristic point") {
    const auto m = model(2, 0.5);
    // The approach is logarithmic: |T' -/+ 1| = gamma e^{-/+2 zeta0} / |log r|^{(k-1)(p-1)/2}.
    for (double side : {-1.0, 1.0}) {
        const double x = m.x0 + side * 1e-12, r = std::abs(x - m.x0);
        const double bound = std::exp(2.0 * 0.5) / std::pow(std::abs(std::log(r)), m.log_power());
        CHECK(std::abs(predicted_Tprime(m, x) + side) <= (1.0 + 1e-12) * bound);
    }
    CHECK(std::abs(predicted_T(m, m.x0 + 1e-12) - m.T0) <= 1e-11);
    double prev = 1.0;
    for (double r = 1e-3; r >= 1e-12; r /= 10.0) {
        const double dev = std::abs(1.0 + predicted_Tprime(m, m.x0 + r));
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(model(3, 0.0).log_power() == 2.0);
    CHECK(model(2, 0.0, 2.0).log_power() == 0.5);
}

TEST_CASE("envelope containment") {
    for (int k : {2, 4})
        for (double z : {0.0, 0.9, -1.2})
            for (double g : {0.3, 1.0, 4.0})
                for (double r = 1e-10; r <= 1e-2; r *= 10.0)
                    for (double side : {-1.0, 1.0}) {
                        auto m = model(k, z);
                        m.gamma_const = g;
                        const auto e = envelope(m, m.x0 + side * r);
                        CHECK(e.contains());
                        CHECK(e.lower > 0.0);
                    }
}

TEST_CASE("domain and validation") {
    const auto m = model(2, 0.0);
    CHECK_THROWS_AS(predicted_T(m, m.x0), ConfigError);
    CHECK_THROWS_AS(predicted_Tprime(m, m.x0 + 0.6), ConfigError);
    auto bad = m;
    bad.k = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = m;
    bad.gamma_const = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("multi-point plans") {
    const auto ok = multi_point_plan({{0.0, 1.0, 2, 0.0}, {3.0, 1.0, 2, 0.0}});
    REQUIRE(ok.size() == 2);
    CHECK(ok[1].model.x0 == 3.0);
    CHECK(ok[0].shooting.params.k == 2);
    CHECK(ok[0].shooting.search == shooting::SearchMode::nested_bisection);

    try {
        multi_point_plan({{0.0, 1.0, 2, 0.0}, {1.5, 1.0, 2, 0.0}});
        FAIL("overlap accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("points 0") != std::string::npos);
    }
    CHECK(multi_point_plan({{0.0, 1.0, 3, 0.4}}).size() == 1);
    CHECK(multi_point_plan({{0.0, 1.0, 3, 0.4}})[0].shooting.search == shooting::SearchMode::grid_refine);
    CHECK_THROWS_AS(multi_point_plan({{0.0, 1.0, 1, 0.0}}), ConfigError);
    CHECK_THROWS_AS(multi_point_plan({{2.0, 0.1, 2, 0.0}, {0.0, 0.1, 2, 0.0}}), ConfigError);
}
