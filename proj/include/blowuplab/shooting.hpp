#pragma once

#include <functional>
#include <string>
#include <vector>

#include "blowuplab/center_dynamics.hpp"
#include "blowuplab/modulation.hpp"
#include "blowuplab/profiles.hpp"
#include "blowuplab/similarity_pde.hpp"
#include "blowuplab/spectral.hpp"

namespace blowuplab::shooting {

using profiles::PhaseProfile;
using profiles::SolitonParam;

enum class SearchMode { nested_bisection, grid_refine };

SearchMode parse_search_mode(const std::string& name);
std::string search_mode_name(SearchMode m);

struct ShootingConfig {
    centers::ModelParams params;
    double s0 = 30.0;
    double s_target = 38.0;
    double chi_max = 10.0;
    int n = 2001;
    similarity::EvolveConfig evolve;
    SearchMode search = SearchMode::nested_bisection;
    double cadence = 0.05;

    void validate() const;
    /// s^{-1/2-|gamma_i|}.
    Vec box_widths(double s) const;
};

/// Gamma_s(u)_i = s^{-1/2-|gamma_i|} u_i and its inverse.
Vec rescale(const Vec& gamma, double s, const Vec& u);
Vec rescale_inverse(const Vec& gamma, double s, const Vec& nu);

struct InitialData {
    PhaseProfile w;
    std::vector<SolitonParam> params;
};

InitialData initial_data(const ShootingConfig& cfg, const Vec& nu_unit);

struct TrackSample {
    double s = 0.0;
    Vec zeta, nu, phi;
    double q_norm = 0.0;
    modulation::Gaps gaps;
    modulation::NormComponents comps;
};

enum class ExitKind { survived, nu, q, phi, structural, blowup };

std::string exit_kind_name(ExitKind k);

struct ShootingRecord {
    Vec nu_unit;
    double s_exit = 0.0;    // crossing time (interpolated between samples)
    double s_detect = 0.0;  // sample at which the exit was seen
    ExitKind exit = ExitKind::survived;
    std::string exit_constraint = "none";
    double N_at_exit = 0.0;
    Vec nu_last;          // nu at the last valid sample
    double outgoing_rate = 0.0;  // d/ds [s^{1/2+|gamma_i|} nu_i] sign(nu_i) at a nu-exit
    double max_non_nu = 0.0;     // max over samples (after s0) of the non-nu components of N
    std::string note;
    std::vector<TrackSample> track;

    bool survived() const { return exit == ExitKind::survived; }
    /// Sign of nu_i used by the bisection (last valid sample).
    int sign(int i) const;
};

struct RunOptions {
    /// Keep running after N exceeds 1 (used for calibration runs).
    bool stop_on_exit = true;
};

ShootingRecord run_until_exit(const ShootingConfig& cfg, const Vec& nu_unit, const RunOptions& opts = {});

using Runner = std::function<ShootingRecord(const Vec& nu_unit)>;

struct SearchOptions {
    int outer_iters = 24;
    int inner_iters = 24;
    int max_runs = 800;
    int grid_points = 5;
    int refine_levels = 12;
    std::function<void(const ShootingRecord&)> on_record;
};

struct SearchResult {
    Vec nu_star;
    ShootingRecord best;
    bool success = false;
    SearchMode mode = SearchMode::nested_bisection;
    bool fell_back = false;
    int runs = 0;
    Vec outer_widths;  // bracket width after each outer iteration
    std::string diagnostic;
};

SearchResult search_nu(const Runner& run, int k, double s_target, SearchMode mode, const SearchOptions& opts = {});
SearchResult search_nu(const ShootingConfig& cfg, const SearchOptions& opts = {});

struct TrackingReport {
    Vec s;
    std::vector<Vec> deviation;  // zeta_i - bar_zeta_i per sample
    Vec center_of_mass;
    double zeta0 = 0.0;
    Vec gap_slopes;  // slope of zeta_{i+1} - zeta_i against log s
    double target_slope = 0.0;
    double max_slope_error = 0.0;  // relative
    Vec phi1;
    double phi1_tail_variation = 0.0;
    double max_non_nu = 0.0;
};

TrackingReport soliton_tracking_report(const std::vector<TrackSample>& track, const centers::CenterSystem& sys);

struct C1Calibration {
    double c1 = 1.0;
    std::vector<modulation::C1Fit> fits;
    Vec c1_history;
    bool converged = false;
};

/// Fixed-point iteration c1 <- fit_c1(run with bar_zeta(c1)) on the nu = 0 start.
C1Calibration calibrate_c1(ShootingConfig cfg, double horizon = 2.0, double rel_tol = 0.02, int max_iter = 8);

}  // namespace blowuplab::shooting
