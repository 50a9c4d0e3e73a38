#include "blowuplab/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include <Eigen/Dense>
#include <fmt/core.h>

namespace blowuplab::numerics {

HypGrid HypGrid::make(double chi_max, int n) {
    if (!(chi_max > 0.0) || !std::isfinite(chi_max))
        throw ConfigError(fmt::format("grid: chi_max must be positive and finite, got {}", chi_max));
    if (n < 3) throw ConfigError(fmt::format("grid: n must be at least 3, got {}", n));
    HypGrid g;
    g.chi_max = chi_max;
    g.n = n;
    g.h = 2.0 * chi_max / (n - 1);
    g.nodes.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) g.nodes[j] = -chi_max + j * g.h;
    g.nodes[n - 1] = chi_max;
    if (std::abs(std::tanh(chi_max)) >= 1.0)
        throw ConfigError(fmt::format("grid: chi_max = {} saturates tanh in double precision", chi_max));
    return g;
}

double HypGrid::y(int j) const { return std::tanh(chi(j)); }

Vec gauss_weights(const HypGrid& grid, double p) {
    if (!(p > 1.0)) throw ConfigError(fmt::format("gauss_weights: p must exceed 1, got {}", p));
    if (grid.n < 3) throw ConfigError("gauss_weights: need at least 3 nodes");
    // dy = sech^2 chi dchi and (1-y^2)^{2/(p-1)} = sech^{4/(p-1)} chi.
    const double e = 4.0 / (p - 1.0) + 2.0;
    Vec w(static_cast<std::size_t>(grid.n));
    for (int j = 0; j < grid.n; ++j) w[j] = grid.h * std::pow(1.0 / std::cosh(grid.chi(j)), e);
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

// ---------------------------------------------------------------- band solver

BandMatrix::BandMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku) {
    if (n < 1 || kl < 0 || ku < 0 || kl > 2 || ku > 2)
        throw ConfigError(fmt::format("band matrix: unsupported shape n={} kl={} ku={}", n, kl, ku));
    a_.assign(static_cast<std::size_t>(n) * (kl + ku + 1), 0.0);
}

double& BandMatrix::operator()(int i, int j) {
    if (!in_band(i, j)) throw NumericalError(fmt::format("band matrix: ({}, {}) outside band", i, j));
    return a_[static_cast<std::size_t>(i) * (kl_ + ku_ + 1) + (j - i + kl_)];
}

double BandMatrix::operator()(int i, int j) const {
    if (!in_band(i, j)) return 0.0;
    return a_[static_cast<std::size_t>(i) * (kl_ + ku_ + 1) + (j - i + kl_)];
}

Vec BandMatrix::multiply(const Vec& x) const {
    Vec r(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) s += (*this)(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

BandLU::BandLU(const BandMatrix& m) : n_(m.size()), kl_(m.lower()), w_(2 * m.lower() + m.upper() + 1) {
    const int ku = m.upper();
    lu_.assign(static_cast<std::size_t>(n_) * w_, 0.0);
    piv_.assign(static_cast<std::size_t>(n_), 0);
    auto at = [&](int i, int j) -> double& { return lu_[static_cast<std::size_t>(i) * w_ + (j - i + kl_)]; };
    double scale = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku); ++j) {
            at(i, j) = m(i, j);
            scale = std::max(scale, std::abs(m(i, j)));
        }
    const double tiny = std::max(scale, 1e-300) * 1e-14;
    for (int k = 0; k < n_; ++k) {
        const int last_row = std::min(n_ - 1, k + kl_);
        const int last_col = std::min(n_ - 1, k + kl_ + ku);
        int p = k;
        for (int r = k + 1; r <= last_row; ++r)
            if (std::abs(at(r, k)) > std::abs(at(p, k))) p = r;
        piv_[k] = p;
        if (!(std::abs(at(p, k)) > tiny))
            throw NumericalError(fmt::format("banded solve: singular pivot at row {}", k));
        if (p != k)
            for (int j = k; j <= last_col; ++j) std::swap(at(k, j), at(p, j));
        const double d = at(k, k);
        for (int r = k + 1; r <= last_row; ++r) {
            const double l = at(r, k) / d;
            at(r, k) = l;
            if (l == 0.0) continue;
            for (int j = k + 1; j <= last_col; ++j) at(r, j) -= l * at(k, j);
        }
    }
}

Vec BandLU::solve(const Vec& rhs) const {
    if (static_cast<int>(rhs.size()) != n_) throw NumericalError("banded solve: rhs size mismatch");
    auto at = [&](int i, int j) { return lu_[static_cast<std::size_t>(i) * w_ + (j - i + kl_)]; };
    const int reach = w_ - kl_ - 1;
    Vec b = rhs;
    for (int k = 0; k < n_; ++k) {
        if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
        for (int r = k + 1; r <= std::min(n_ - 1, k + kl_); ++r) b[r] -= at(r, k) * b[k];
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j <= std::min(n_ - 1, i + reach); ++j) s -= at(i, j) * b[j];
        b[i] = s / at(i, i);
    }
    return b;
}

Vec solve_banded(const BandMatrix& m, const Vec& rhs) { return BandLU(m).solve(rhs); }

// ---------------------------------------------------------------- Dormand-Prince

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Trajectory integrate_rk(const VectorField& f, const Vec& y0, double t0, double t1, double tol,
                        const RkOptions& opts) {
    if (!(t1 > t0)) throw ConfigError(fmt::format("integrate_rk: need t1 > t0, got [{}, {}]", t0, t1));
    if (!(tol > 0.0)) throw ConfigError("integrate_rk: tol must be positive");
    const std::size_t m = y0.size();
    Trajectory tr;
    Vec samples = opts.samples;
    std::sort(samples.begin(), samples.end());
    std::size_t next = 0;
    while (next < samples.size() && samples[next] < t0) ++next;
    const bool every_step = samples.empty();
    auto record = [&](double t, const Vec& y) {
        tr.times.push_back(t);
        tr.states.push_back(y);
    };
    if (every_step || (next < samples.size() && samples[next] == t0)) {
        record(t0, y0);
        if (!every_step) ++next;
    }

    Vec y = y0, k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), yt(m), yn(m), err(m);
    f(t0, y, k1);
    double t = t0;
    double h = opts.h0 > 0.0 ? opts.h0 : std::min(t1 - t0, 1e-3 * std::max(1.0, std::abs(t1 - t0)));
    long accepted = 0, rejected = 0;
    bool stopped = false;
    while (t < t1) {
        if (accepted + rejected >= opts.max_steps)
            throw BudgetError(fmt::format("integrate_rk: step budget exhausted at t = {}", t));
        const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (h < hmin) throw NumericalError(fmt::format("integrate_rk: step size underflow at t = {:.17g}", t));
        const bool last = t + h >= t1;
        if (last) h = t1 - t;
        for (std::size_t i = 0; i < m; ++i) yt[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, yt, k2);
        for (std::size_t i = 0; i < m; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, yt, k3);
        for (std::size_t i = 0; i < m; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, yt, k4);
        for (std::size_t i = 0; i < m; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, yt, k5);
        for (std::size_t i = 0; i < m; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + h, yt, k6);
        for (std::size_t i = 0; i < m; ++i)
            yn[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(t + h, yn, k7);
        double e2 = 0.0;
        bool finite = all_finite(yn) && all_finite(k7);
        if (finite) {
            for (std::size_t i = 0; i < m; ++i) {
                err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc = tol * (1.0 + std::max(std::abs(y[i]), std::abs(yn[i])));
                e2 = std::max(e2, std::abs(err[i]) / sc);
            }
            finite = std::isfinite(e2);
        }
        if (!finite) {
            ++rejected;
            h *= 0.2;
            continue;
        }
        if (e2 > 1.0) {
            ++rejected;
            h *= std::max(0.2, 0.9 * std::pow(e2, -0.2));
            continue;
        }
        const double tn = last ? t1 : t + h;
        // dense output between t and tn
        while (!every_step && next < samples.size() && samples[next] <= tn) {
            const double th = (samples[next] - t) / h;
            Vec ys(m);
            for (std::size_t i = 0; i < m; ++i) {
                const double r1 = y[i], r2 = yn[i] - y[i], r3 = h * k1[i] - r2, r4 = r2 - h * k7[i] - r3;
                const double r5 =
                    h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                ys[i] = r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)));
            }
            record(samples[next], ys);
            ++next;
        }
        t = tn;
        y.swap(yn);
        k1.swap(k7);
        ++accepted;
        if (every_step) record(t, y);
        if (opts.stop && opts.stop(t, y)) {
            stopped = true;
            if (!every_step) record(t, y);
            break;
        }
        h *= std::min(5.0, 0.9 * std::pow(std::max(e2, 1e-10), -0.2));
    }
    tr.meta["accepted_steps"] = static_cast<double>(accepted);
    tr.meta["rejected_steps"] = static_cast<double>(rejected);
    tr.meta["tol"] = tol;
    tr.meta["t_end"] = t;
    tr.meta["stopped"] = stopped ? 1.0 : 0.0;
    return tr;
}

// ---------------------------------------------------------------- Newton

std::string NewtonResult::message() const {
    switch (status) {
        case NewtonStatus::converged: return fmt::format("converged in {} iterations", iterations);
        case NewtonStatus::singular_jacobian:
            return fmt::format("singular Jacobian after {} iterations, residual {:.3e}", iterations, residual);
        case NewtonStatus::iteration_cap:
            return fmt::format("no convergence in {} iterations, residual {:.3e}", iterations, residual);
        case NewtonStatus::non_finite:
            return fmt::format("non-finite residual after {} iterations", iterations);
    }
    return "unknown";
}

double sup_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

NewtonResult newton(const VectorMap& F, const JacobianMap& J, const Vec& x0, const NewtonOptions& opts) {
    NewtonResult res;
    res.x = x0;
    Vec fx = F(res.x);
    const std::size_t m = fx.size(), nx = x0.size();
    res.residual = sup_norm(fx);
    for (res.iterations = 0;; ++res.iterations) {
        if (!std::isfinite(res.residual)) {
            res.status = NewtonStatus::non_finite;
            return res;
        }
        if (res.residual <= opts.tol) {
            res.status = NewtonStatus::converged;
            return res;
        }
        if (res.iterations >= opts.max_iter) {
            res.status = NewtonStatus::iteration_cap;
            return res;
        }
        Eigen::MatrixXd jac(m, nx);
        if (J) {
            const auto rows = J(res.x);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < nx; ++j) jac(i, j) = rows[i][j];
        } else {
            for (std::size_t j = 0; j < nx; ++j) {
                const double hj = opts.fd_steps.empty() ? 1e-7 * (1.0 + std::abs(res.x[j])) : opts.fd_steps[j];
                Vec xp = res.x;
                xp[j] += hj;
                const Vec fp = F(xp);
                for (std::size_t i = 0; i < m; ++i) jac(i, j) = (fp[i] - fx[i]) / hj;
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        lu.setThreshold(1e-13);
        if (m != nx || !lu.isInvertible()) {
            res.status = NewtonStatus::singular_jacobian;
            return res;
        }
        Eigen::VectorXd rhs(m);
        for (std::size_t i = 0; i < m; ++i) rhs(i) = -fx[i];
        const Eigen::VectorXd dx = lu.solve(rhs);
        double lambda = 1.0;
        Vec xn(nx), fn;
        double rn = 0.0;
        for (;;) {
            for (std::size_t j = 0; j < nx; ++j) xn[j] = res.x[j] + lambda * dx(j);
            fn = F(xn);
            rn = sup_norm(fn);
            if (!opts.line_search || rn < res.residual || lambda < 1.0 / 64) break;
            lambda *= 0.5;
        }
        res.x = xn;
        fx = fn;
        res.residual = rn;
    }
}

double bisect(const std::function<double(double)>& f, double a, double b, double tol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw NumericalError(fmt::format("bisect: no sign change on [{}, {}]", a, b));
    for (int it = 0; it < max_iter && std::abs(b - a) > tol; ++it) {
        const double c = 0.5 * (a + b), fc = f(c);
        if (fc == 0.0) return c;
        if ((fc > 0) == (fa > 0)) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    return 0.5 * (a + b);
}

LinearFit linear_fit(const Vec& x, const Vec& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw NumericalError("linear_fit: need at least two paired samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw NumericalError("linear_fit: degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / n);
    return fit;
}

double interp_cubic(double x0, double h, const Vec& f, double x, int* outside) {
    const int n = static_cast<int>(f.size());
    const double u = (x - x0) / h;
    if (u <= 0.0 || u >= n - 1) {
        if ((u < 0.0 || u > n - 1) && outside) ++*outside;
        return u <= 0.0 ? f.front() : f.back();
    }
    int j = static_cast<int>(std::floor(u)) - 1;
    j = std::clamp(j, 0, n - 4);
    const double t = u - j;  // nodes at t = 0, 1, 2, 3
    const double l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    const double l1 = t * (t - 2) * (t - 3) / 2.0;
    const double l2 = -t * (t - 1) * (t - 3) / 2.0;
    const double l3 = t * (t - 1) * (t - 2) / 6.0;
    return l0 * f[j] + l1 * f[j + 1] + l2 * f[j + 2] + l3 * f[j + 3];
}

int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("BLOWUPLAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) return std::min(cap, hw);
    }
    return hw;
}

void parallel_for(int n, const std::function<void(int)>& body) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n && !failed; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace blowuplab::numerics
