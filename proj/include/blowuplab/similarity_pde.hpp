#pragma once

#include <functional>
#include <string>
#include <vector>

#include "blowuplab/numerics.hpp"
#include "blowuplab/profiles.hpp"

namespace blowuplab::similarity {

using profiles::PhaseProfile;
using profiles::SpacePtr;

enum class Scheme { imex_cn, imex_be };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

struct EvolveConfig {
    double ds = 2e-3;
    Scheme scheme = Scheme::imex_cn;
    bool monitor_energy = true;
    bool monitor_norms = false;
    void validate() const;
};

/// Damping block -((p+3)/(p-1)) w2 - 2 y dy w2 in flux form, with outflow closure at both ends.
struct DampingOperator {
    Vec sub, diag, sup;
    static DampingOperator make(const profiles::Space& sp);
    Vec apply(const Vec& w) const;
};

/// cosh^2 chi [w'' - (4/(p-1)) tanh chi w'] by plain centered differences (interior nodes only;
/// the end values are copied from the neighbours). Used as a cross-check of the flux form.
Vec apply_L_centered(const profiles::Space& sp, const Vec& w);

/// |w|^{p-1} w.
Vec nonlinearity(const profiles::Space& sp, const Vec& w);

/// IMEX step for the first-order system: stiff linear part implicit (one tridiagonal solve),
/// power nonlinearity explicit (second-order extrapolation for Crank-Nicolson).
class Stepper {
public:
    Stepper(SpacePtr sp, double ds, Scheme scheme);
    /// Advances one step from s; throws NumericalError naming s on non-finite output.
    PhaseProfile step(const PhaseProfile& q, double s);
    void reset() { have_prev_ = false; }
    double ds() const { return ds_; }

private:
    SpacePtr sp_;
    double ds_;
    Scheme scheme_;
    DampingOperator B_;
    numerics::BandLU lu_;
    Vec n_prev_;
    bool have_prev_ = false;
};

/// Single step with no history.
PhaseProfile step(const PhaseProfile& q, const EvolveConfig& cfg, double s = 0.0);

struct EvolveCallbacks {
    /// Sampling interval in s; the sample hook and energy monitor run at this cadence.
    double cadence = 0.05;
    /// Returning false stops the evolution early.
    std::function<bool(double s, const PhaseProfile& q)> on_sample;
    /// Keep every m-th sample in the returned slices (0 keeps none).
    int keep_every = 1;
    /// On a numerical failure the last finite state is written here (CSV plus JSON sidecar).
    std::string checkpoint_path;
    std::string config_hash = "none";
};

struct EvolveResult {
    Vec s;                            // kept sample times
    std::vector<PhaseProfile> slices;  // kept samples
    Vec energy_s, energy;             // energy monitor series
    Vec norm_s, norm;                 // H-norm monitor series
    PhaseProfile final_state;
    double s_end = 0.0;
    bool stopped_early = false;
};

EvolveResult evolve(const PhaseProfile& q0, double s0, double s1, const EvolveConfig& cfg,
                    const EvolveCallbacks& cb = {});

Vec energy_series(const std::vector<PhaseProfile>& slices);

/// Largest per-unit-s increase of an energy series (0 when nonincreasing).
double max_energy_increase_rate(const Vec& s, const Vec& e);

/// Weighted L2 norm of the discrete equation residual at the middle of three slices spaced by ds.
double pde_residual(const PhaseProfile& prev, const PhaseProfile& cur, const PhaseProfile& next, double ds);

struct Checkpoint {
    PhaseProfile state;
    double s = 0.0;
    double ds = 0.0;
    std::string hash;
};

void write_checkpoint(const std::string& path, const PhaseProfile& q, double s, double ds, const std::string& hash);
/// Reads path (CSV) and path + ".json".
Checkpoint read_checkpoint(const std::string& path, const SpacePtr& sp);

}  // namespace blowuplab::similarity
