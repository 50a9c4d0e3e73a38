#pragma once

#include <vector>

#include "blowuplab/profiles.hpp"

namespace blowuplab::lorentz {

using profiles::PhaseProfile;

struct LorentzParam {
    double d = 0.0;
    double rapidity() const;  // artanh d
};

/// (d1 + d2) / (1 + d1 d2).
double d_compose(double d1, double d2);

struct Boosted {
    PhaseProfile profile;
    int extrapolated = 0;  // nodes whose source point fell outside the resolved grid
};

/// T_d of an s-independent profile: prefactor (1-d^2)^{1/(p-1)} / (1+dy)^{2/(p-1)} times the
/// source at y# = (y+d)/(1+dy), i.e. chi# = chi + artanh d (cubic interpolation in chi).
Boosted lorentz_static(const PhaseProfile& src, double d);

struct Slice {
    double s = 0.0;
    PhaseProfile q;
};

/// Required half-width of the s-window around s_eval: (1/2) log((1+|d|)/(1-|d|)).
double slab_margin(double d);

/// T_d of a time-dependent history at s_eval, with s# = s + log(sqrt(1-d^2)/(1+dy));
/// cubic in chi, linear in s. Throws ConfigError when the history does not cover the window.
Boosted lorentz_slab(const std::vector<Slice>& history, double d, double s_eval);

/// tanh(zeta0_sharp - zeta0_target).
double prescribe_boost(double zeta0_sharp, double zeta0_target);

}  // namespace blowuplab::lorentz
