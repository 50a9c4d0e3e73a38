#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "blowuplab/numerics.hpp"

namespace blowuplab::centers {

struct ModelParams {
    double p = 3.0;
    int k = 2;
    double c1 = 1.0;        // interaction constant of the center ODE
    double eta_rest = 0.3;  // decay exponent of the perturbation R_i = O(s^{-1-eta_rest})
    double delta = 1.0;     // dynamics exponent entering eta_shrink

    void validate() const;
    /// p-bar: p below 2, 2 - 1/100 at p = 2, 2 above.
    double pbar() const;
    /// (1/4) min{1, delta, pbar/2 - 1/2}.
    double eta_shrink() const;
};

struct CenterSystem {
    ModelParams params;
    Vec gamma;      // gamma_i, i = 1..k (index 0 is gamma_1)
    Vec sigma;      // sigma_i, i = 0..k
    Vec bar_alpha;  // i = 1..k

    static CenterSystem make(const ModelParams& params);
    int k() const { return params.k; }
};

struct LyapState {
    Vec b_seq;  // b_2..b_k
    double b_min = 0.0;
    double b_max = 0.0;
};

Vec bar_alpha(const ModelParams& params);
Vec bar_zeta(const CenterSystem& sys, double s);
/// d/ds of bar_zeta, equal to -gamma_i / (2 s).
Vec bar_zeta_dot(const CenterSystem& sys, double s);

/// Center ODE including the factor c1; the outer exponentials are absent at i = 1 and i = k.
Vec rhs_tl(const CenterSystem& sys, const Vec& zeta);
/// Deviation system in tau = log s; components sum to zero.
Vec rhs_ptl(const CenterSystem& sys, const Vec& xi);
/// Lyapunov variables b_i = sigma_{i-1}(exp(-(xi_i - xi_{i-1})) - 1), i = 2..k.
Vec b_from_xi(const CenterSystem& sys, const Vec& xi);
/// Field on (b_2, ..., b_k); throws if some b_i <= -sigma_{i-1}.
Vec rhs_b(const CenterSystem& sys, const Vec& b);
LyapState lyapunov_bB(const CenterSystem& sys, const Vec& xi);

/// xi = (2/(p-1))(zeta - bar_zeta(s)) and its inverse.
Vec xi_from_zeta(const CenterSystem& sys, const Vec& zeta, double s);
Vec zeta_from_xi(const CenterSystem& sys, const Vec& xi, double s);

/// True when zeta is strictly increasing (well-separated ordering).
bool is_ordered(const Vec& zeta);

/// Uniform sample in [-amp, amp]^k with the mean removed.
Vec random_zero_sum(int k, double amp, std::uint64_t seed);

struct MonotoneReport {
    double max_violation_B = 0.0;     // largest increase of B between samples
    double max_violation_negb = 0.0;  // largest increase of -b between samples
    double min_decrease_rate = 0.0;   // min over 0.5-windows (while |xi| >= floor) of the decrease of B-b per unit tau
    int strict_windows = 0;           // windows that entered the strict-decrease test
    double max_sum_drift = 0.0;       // max |sum xi|
    double initial_gap = 0.0;         // (B-b)(0)
    double final_gap = 0.0;           // (B-b)(tau_span)
    bool ok(double slack, double min_rate) const;
};

MonotoneReport check_monotone_lyapunov(const CenterSystem& sys, const Vec& xi0, double tau_span,
                                       double tol = 1e-12, double norm_floor = 1e-3);

struct Escape {
    int sample = 0;
    double tau = 0.0;
    int face = 0;  // signed 1-based index of b_{face+1}; negative for the lower face
};

struct CompactReport {
    int n_samples = 0;
    std::vector<Escape> escapes;
    int inward_failures = 0;  // lower-face starts with nonpositive normal derivative
    double max_final_norm = 0.0;
};

CompactReport check_compact_stability(const CenterSystem& sys, double eta, double A, int n_samples,
                                      double horizon, std::uint64_t seed = 1, double slack = 1e-8);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
    bool accepted = false;
    std::string diagnostic;
};

/// Least-squares slope of log|xi(tau)| over the samples with lo <= |xi| <= hi.
RateFit convergence_rate(const numerics::Trajectory& traj, double lo = 1e-8, double hi = 0.1);

/// Integrates the deviation system with samples every dtau.
numerics::Trajectory integrate_ptl(const CenterSystem& sys, const Vec& xi0, double tau_span, double dtau = 0.01,
                                   double tol = 1e-12);

using RestFunction = std::function<double(int i, double s)>;

struct PerturbedResult {
    numerics::Trajectory traj;  // zeta(s)
    double zeta0 = 0.0;         // extrapolated limit of the center of mass
    Vec deviation;              // sup_i |zeta_i - bar_zeta_i - zeta0| at each sample
    double C = 0.0;             // max over the tail window of deviation * s^eta
    numerics::LinearFit tail;   // log deviation against log s over the tail window
};

/// zeta' = rhs_tl(zeta) + R(s). The center of mass is extrapolated linearly in s^{-eta}
/// (eta <= 0 means a conserved mean, taken at the final time).
PerturbedResult integrate_perturbed(const CenterSystem& sys, const Vec& zeta0, double s0, double s1,
                                    const RestFunction& rest, double eta, int n_samples = 400,
                                    double tol = 1e-12);

struct Box {
    Vec lo, hi;
    bool contains(const Vec& x, double slack) const;
};

struct AttractorSample {
    Vec start;
    bool invariant = true;
    bool monotone = true;
    bool strict = true;
    bool converged = false;
    double final_distance = 0.0;
};

struct AttractorVerdict {
    bool attractor = false;
    std::vector<AttractorSample> samples;
    std::string summary() const;
};

AttractorVerdict lyapunov_attractor_check(const numerics::VectorField& flow, const Box& box,
                                          const std::function<double(const Vec&)>& L, const Vec& x0,
                                          double horizon, int n_samples, std::uint64_t seed = 7,
                                          double dist_tol = 1e-4, double tol = 1e-12);

}  // namespace blowuplab::centers
