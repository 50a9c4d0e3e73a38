#pragma once

#include <memory>
#include <vector>

#include "blowuplab/numerics.hpp"

namespace blowuplab::profiles {

using numerics::HypGrid;

/// Grid plus the p-dependent weights shared by every profile on it.
///
/// Node weights W_j integrate f(y)(1-y^2)^{2/(p-1)} dy; the derivative weights at the
/// half points carry (1-y^2)^{2/(p-1)+1}(dchi/dy)^2 dy/dchi = sech^a chi, a = 4/(p-1).
class Space {
public:
    static std::shared_ptr<const Space> make(double p, const HypGrid& grid);
    static std::shared_ptr<const Space> make(double p, double chi_max = 10.0, int n = 2001);

    double p() const { return p_; }
    const HypGrid& grid() const { return grid_; }
    int n() const { return grid_.n; }
    double h() const { return grid_.h; }
    double a() const { return a_; }
    /// 2(p+1)/(p-1)^2.
    double c() const { return c_; }
    double kappa0() const { return kappa0_; }

    const Vec& y() const { return y_; }
    const Vec& weights() const { return W_; }
    const Vec& dweights() const { return wd_; }  // n-1 half points

    /// Flux-form discrete L: (1/W_j)[wd_{j+1/2}(w_{j+1}-w_j) - wd_{j-1/2}(w_j-w_{j-1})]/h,
    /// self-adjoint in the W inner product with zero flux at both ends.
    Vec apply_L(const Vec& w) const;
    /// Tridiagonal coefficients of apply_L: sub, diag, super (length n each).
    const Vec& L_sub() const { return Ll_; }
    const Vec& L_diag() const { return Ld_; }
    const Vec& L_sup() const { return Lu_; }

    /// Sum_j W_j f_j g_j.
    double dot(const Vec& f, const Vec& g) const;
    /// Sum_j h wd_{j+1/2} (f_{j+1}-f_j)(g_{j+1}-g_j)/h^2.
    double grad_dot(const Vec& f, const Vec& g) const;

private:
    double p_ = 3.0, a_ = 2.0, c_ = 2.0, kappa0_ = 0.0;
    HypGrid grid_;
    Vec y_, W_, wd_, Ll_, Ld_, Lu_;
};

using SpacePtr = std::shared_ptr<const Space>;

struct PhaseProfile {
    SpacePtr space;
    Vec w1;  // w
    Vec w2;  // ds w

    static PhaseProfile zero(const SpacePtr& sp);
    PhaseProfile& operator+=(const PhaseProfile& o);
    PhaseProfile& operator-=(const PhaseProfile& o);
    PhaseProfile& operator*=(double a);
    bool finite() const;
};

PhaseProfile operator+(PhaseProfile a, const PhaseProfile& b);
PhaseProfile operator-(PhaseProfile a, const PhaseProfile& b);
PhaseProfile operator*(double a, PhaseProfile b);

struct SolitonParam {
    double d = 0.0;
    double nu = 0.0;

    static SolitonParam from_zeta(double zeta, double nu);
    double zeta() const;       // -artanh d
    double d_star() const;     // d / (1 + nu)
    double zeta_star() const;  // -artanh d_star
    bool valid() const;        // |d| < 1 and nu > -1 + |d|
};

double kappa0(double p);
PhaseProfile kappa(const SpacePtr& sp, double d);
PhaseProfile kappa_star(const SpacePtr& sp, double d, double nu);
PhaseProfile kappa_star(const SpacePtr& sp, const SolitonParam& prm);
/// Analytic d/dnu of both components of kappa_star.
PhaseProfile kappa_star_dnu(const SpacePtr& sp, double d, double nu);

/// Sum_i (-1)^i kappa*(d_i, nu_i), i = 1..k.
PhaseProfile soliton_sum(const SpacePtr& sp, const std::vector<SolitonParam>& params);

double h_norm(const PhaseProfile& q);
double h0_norm(const SpacePtr& sp, const Vec& w1);
double energy(const PhaseProfile& q);

/// max_j |h_j| (1-y_j^2)^{1/(p-1)}.
double hardy_sobolev_sup(const SpacePtr& sp, const Vec& h);

struct ContinuityReport {
    Vec ratios;  // |kappa*(1) - kappa*(2)|_H / distance, per pair (NaN for skipped pairs)
    double max_ratio = 0.0;
    int skipped = 0;
};

/// Parameter distance |nu1/(1-|d1|) - nu2/(1-|d2|)| + |artanh d1 - artanh d2|.
double soliton_distance(const SolitonParam& a, const SolitonParam& b);

ContinuityReport kappa_star_continuity_check(const SpacePtr& sp,
                                             const std::vector<std::pair<SolitonParam, SolitonParam>>& pairs,
                                             double A);

}  // namespace blowuplab::profiles
