#pragma once

#include <string>
#include <vector>

#include "blowuplab/center_dynamics.hpp"
#include "blowuplab/profiles.hpp"
#include "blowuplab/spectral.hpp"

namespace blowuplab::modulation {

using profiles::PhaseProfile;
using profiles::SolitonParam;
using profiles::SpacePtr;

/// Modulation solve failure (Newton breakdown, domain exit or separation collapse).
class ModulationError : public NumericalError {
public:
    ModulationError(const std::string& what, double residual) : NumericalError(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Dual directions W_0(d), W_1(d) with Pi_l(F_l) = 1.
struct ProjectionKit {
    double d = 0.0;
    SpacePtr space;
    PhaseProfile W[2];  // scaled by cbar
    Vec rhs[2];         // (I - L) W_{l,1}, scaled by cbar
    double cbar[2] = {1.0, 1.0};
    double cross[2] = {0.0, 0.0};     // Pi_l(F_{1-l})
    double residual[2] = {0.0, 0.0};  // H0 (dual) norm of the W_{l,1} solve residual, unscaled

    /// Pi_l(r) through the integrated-by-parts form.
    double project(int l, const PhaseProfile& r) const;
    /// Pi_l(r) through phi(W_l, r) directly.
    double project_phi(int l, const PhaseProfile& r) const;
};

ProjectionKit build_projection_kit(const SpacePtr& sp, double d);

/// F_0(d) and F_1(d).
PhaseProfile F_direction(const SpacePtr& sp, int l, double d);

/// phi(q, r) = int (q1 r1 + q1' r1' (1-y^2) + q2 r2) rho dy.
double phi_bilinear(const PhaseProfile& q, const PhaseProfile& r);
/// int (q1 (-L r1 + r1) + q2 r2) rho dy with the discrete L.
double phi_by_parts(const PhaseProfile& q, const PhaseProfile& r);

struct ModulationOptions {
    double tol = 1e-12;
    int max_iter = 30;
    double min_separation = 0.5;  // smallest admissible zeta gap during the solve
};

struct ModulationState {
    double s = 0.0;
    std::vector<SolitonParam> params;
    PhaseProfile q;
    double q_norm = 0.0;
    double residual = 0.0;  // sup over (l, i) of |Pi_l^{d_i*}(q)|
    int iterations = 0;
};

/// Projections Pi_l^{d_i*}(v - sum) for the given parameters, ordered (i, l).
Vec orthogonality_defects(const PhaseProfile& v, const std::vector<SolitonParam>& params);

/// Newton solve for (zeta_i, nu_i); throws ModulationError on failure.
ModulationState modulate(const PhaseProfile& v, const std::vector<SolitonParam>& guess,
                         const ModulationOptions& opts = {});

struct Gaps {
    double J = 0.0, Jbar = 0.0, Jhat = 0.0, Jtilde = 0.0;
    Vec xi, phi;
};

Gaps gaps(const std::vector<SolitonParam>& params, double s, const centers::CenterSystem& sys,
          const spectral::SpectralData& spec);

struct NormSample {
    double s = 0.0;
    double q_norm = 0.0;
    Vec nu;
    Vec phi;
};

struct NormComponents {
    double q = 0.0;
    Vec nu;         // s^{1/2+|gamma_i|} |nu_i|
    Vec phi;        // s^eta |phi_i| for i >= 2, s0^eta |phi_1| for i = 1
    double N = 0.0;
    std::string arg;  // component attaining the max: "q", "nu_i", "phi_i"
    /// Largest component other than the nu ones.
    double non_nu() const;
};

NormComponents shrink_components(const NormSample& x, double s0, const Vec& gamma, double eta);

struct ShrinkSeries {
    std::vector<NormComponents> comps;
    std::vector<bool> inside;  // N <= 1
    int first_exit = -1;       // first index with N > 1
};

ShrinkSeries shrink_norm(const std::vector<NormSample>& run, double s0, const Vec& gamma, double eta);

struct C1Fit {
    double c1 = 0.0;
    double residual = 0.0;  // rms misfit relative to rms of zeta-dot
    Vec per_i;              // separate fit for each i
    double spread = 0.0;    // max |per_i - c1| / c1
    bool degenerate = false;
    bool consistent() const { return !degenerate && c1 > 0.0 && spread <= 0.2; }
};

/// Least squares for zeta_i-dot = c1 (exp(-2/(p-1)(zeta_i - zeta_{i-1})) - exp(-2/(p-1)(zeta_{i+1} - zeta_i)))
/// with central differences for zeta-dot.
C1Fit fit_c1(const Vec& s, const std::vector<Vec>& zeta, double p);

}  // namespace blowuplab::modulation
