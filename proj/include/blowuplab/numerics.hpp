#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "blowuplab/errors.hpp"

namespace blowuplab {

using Vec = std::vector<double>;

namespace numerics {

/// Uniform grid in the hyperbolic coordinate chi = artanh(y) on [-chi_max, chi_max].
struct HypGrid {
    double chi_max = 10.0;
    int n = 2001;
    double h = 0.0;
    Vec nodes;

    static HypGrid make(double chi_max, int n);
    double chi(int j) const { return nodes[static_cast<std::size_t>(j)]; }
    double y(int j) const;
    bool same_as(const HypGrid& o) const { return n == o.n && chi_max == o.chi_max; }
};

/// Trapezoid weights in chi for the integral of f(y) (1-y^2)^{2/(p-1)} dy.
Vec gauss_weights(const HypGrid& grid, double p);

/// Square band matrix with kl sub- and ku super-diagonals, stored by rows.
class BandMatrix {
public:
    BandMatrix() = default;
    BandMatrix(int n, int kl, int ku);

    int size() const { return n_; }
    int lower() const { return kl_; }
    int upper() const { return ku_; }
    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_; }
    double& operator()(int i, int j);
    double operator()(int i, int j) const;
    Vec multiply(const Vec& x) const;

private:
    int n_ = 0, kl_ = 0, ku_ = 0;
    Vec a_;
};

/// LU factorization with partial pivoting of a band matrix (bandwidth <= 2).
class BandLU {
public:
    BandLU() = default;
    explicit BandLU(const BandMatrix& m);
    Vec solve(const Vec& rhs) const;
    int size() const { return n_; }

private:
    int n_ = 0, kl_ = 0, w_ = 0;
    Vec lu_;                 // n rows of width w_ = 2 kl + ku + 1
    std::vector<int> piv_;
};

Vec solve_banded(const BandMatrix& m, const Vec& rhs);

struct Trajectory {
    Vec times;
    std::vector<Vec> states;
    std::map<std::string, double> meta;

    std::size_t size() const { return times.size(); }
    const Vec& back() const { return states.back(); }
};

using VectorField = std::function<void(double t, const Vec& y, Vec& dydt)>;

struct RkOptions {
    /// Output times; empty means every accepted step is recorded.
    Vec samples;
    double h0 = 0.0;
    long max_steps = 10000000;
    /// Optional early stop, checked after each accepted step.
    std::function<bool(double, const Vec&)> stop;
};

/// Dormand-Prince 5(4) with step control on the mixed error tol*(1+|y|)
/// and fourth-order dense output at the requested sample times.
Trajectory integrate_rk(const VectorField& f, const Vec& y0, double t0, double t1, double tol,
                        const RkOptions& opts = {});

using VectorMap = std::function<Vec(const Vec&)>;
using JacobianMap = std::function<std::vector<Vec>(const Vec&)>;  // rows

enum class NewtonStatus { converged, singular_jacobian, iteration_cap, non_finite };

struct NewtonResult {
    Vec x;
    double residual = 0.0;
    int iterations = 0;
    NewtonStatus status = NewtonStatus::iteration_cap;
    bool converged() const { return status == NewtonStatus::converged; }
    std::string message() const;
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
    /// Forward-difference steps per component; empty means 1e-7 (1 + |x_j|).
    Vec fd_steps;
    /// Halve the step while the sup-norm residual does not decrease.
    bool line_search = true;
};

/// Newton iteration; J may be empty, in which case forward differences are used.
NewtonResult newton(const VectorMap& F, const JacobianMap& J, const Vec& x0,
                    const NewtonOptions& opts = {});

/// Bisection for a sign change of f on [a, b].
double bisect(const std::function<double(double)>& f, double a, double b, double tol,
              int max_iter = 200);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

LinearFit linear_fit(const Vec& x, const Vec& y);

/// Four-point Lagrange interpolation on a uniform grid x0 + j h. Points outside
/// [x0, x0 + (n-1) h] are clamped to the end values and counted in *outside.
double interp_cubic(double x0, double h, const Vec& f, double x, int* outside = nullptr);

double sup_norm(const Vec& v);

/// Worker count from BLOWUPLAB_THREADS (default: hardware concurrency).
int worker_count();

/// Run body(i) for i in [0, n) on up to worker_count() threads.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace numerics
}  // namespace blowuplab
