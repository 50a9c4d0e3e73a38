#pragma once

#include <string>
#include <vector>

#include "blowuplab/shooting.hpp"

namespace blowuplab::geometry {

struct CharPointModel {
    int k = 2;
    double zeta0 = 0.0;
    double p = 3.0;
    double gamma_const = 1.0;
    double T0 = 1.0;
    double x0 = 0.0;

    void validate() const;
    /// (k-1)(p-1)/2.
    double log_power() const;
};

/// Leading-order slope of the blow-up curve; requires 0 < |x - x0| < 1/2.
double predicted_Tprime(const CharPointModel& m, double x);
/// Leading-order blow-up time.
double predicted_T(const CharPointModel& m, double x);
/// Correction term gamma e^{-2 theta zeta0} |x-x0| / |log|x-x0||^{(k-1)(p-1)/2}.
double correction(const CharPointModel& m, double x);

struct Envelope {
    double lower = 0.0, value = 0.0, upper = 0.0;
    bool contains() const { return lower <= value && value <= upper; }
};

/// T - T0 + |x - x0| against the two-sided corner bounds with C0 = 2 max(gamma e^{2|zeta0|}, 1/(gamma e^{-2|zeta0|})).
Envelope envelope(const CharPointModel& m, double x);

struct PlanPoint {
    double x = 0.0, T = 1.0;
    int k = 2;
    double zeta0 = 0.0;
};

struct PlanEntry {
    CharPointModel model;
    shooting::ShootingConfig shooting;
};

/// Validates x_n + T_n < x_{n+1} - T_{n+1}; throws ConfigError naming the first violating pair.
std::vector<PlanEntry> multi_point_plan(const std::vector<PlanPoint>& points, double p = 3.0,
                                        double gamma_const = 1.0);

}  // namespace blowuplab::geometry
