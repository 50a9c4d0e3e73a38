#include "blowuplab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <fmt/core.h>

namespace blowuplab::spectral {

namespace {

double sigma(int k, int i) { return i * (k - i) / 2.0; }

}  // namespace

Eigen::MatrixXd build_M(int k) {
    if (k < 2) throw ConfigError(fmt::format("build_M: k must be at least 2, got {}", k));
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i <= k; ++i) {
        M(i - 1, i - 1) = -(sigma(k, i - 1) + sigma(k, i));
        if (i > 1) M(i - 1, i - 2) = sigma(k, i - 1);
        if (i < k) M(i - 1, i) = sigma(k, i);
    }
    return M;
}

Eigen::MatrixXd chain_matrix(int k, int j) {
    if (j < 1 || j > k) throw ConfigError(fmt::format("chain_matrix: need 1 <= j <= k, got j={} k={}", j, k));
    const int n = k - j + 1;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r + 1 < n; ++r) {
        C(r, r + 1) = sigma(k, r + 1);
        C(r + 1, r) = sigma(k, j + r);
    }
    for (int c = 0; c < n; ++c) C(c, c) = -C.col(c).sum();
    return C;
}

SpectralData exact_spectrum(int k) {
    SpectralData out;
    out.k = k;
    out.M = build_M(k);
    // Walk the chain from j = k down to 1. The spectrum of M_k^j is {0} united with
    // {-j + lambda : lambda in spec(M_k^{j+1})}; values are kept as exact half-integers.
    std::vector<long> twice = {0};  // 2 * eigenvalue, for j = k
    for (int j = k - 1; j >= 1; --j) {
        const int n = k - j + 1;
        const Eigen::MatrixXd Mj = chain_matrix(k, j);
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c <= r; ++c) A(r, c) = 1.0;
        Eigen::MatrixXd Ainv = Eigen::MatrixXd::Identity(n, n);
        for (int r = 1; r < n; ++r) Ainv(r, r - 1) = -1.0;
        const Eigen::MatrixXd C = A * Mj * Ainv + j * Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd next = chain_matrix(k, j + 1);
        double defect = (C.topLeftCorner(n - 1, n - 1) - next).cwiseAbs().maxCoeff();
        for (int c = 0; c + 1 < n; ++c) defect = std::max(defect, std::abs(C(n - 1, c)));
        defect = std::max(defect, std::abs(C(n - 1, n - 1) - j));
        if (defect > 1e-9 * (1.0 + Mj.cwiseAbs().maxCoeff()))
            throw NumericalError(fmt::format("exact_spectrum: conjugation defect {:.3e} at j = {}", defect, j));
        std::vector<long> nt = {0};
        for (long v : twice) nt.push_back(v - 2L * j);
        twice = nt;
    }
    std::sort(twice.begin(), twice.end(), std::greater<>());
    if (static_cast<int>(twice.size()) != k)
        throw NumericalError(fmt::format("exact_spectrum: expected {} eigenvalues, got {}", k, twice.size()));
    for (long v : twice) out.eigenvalues.push_back(v / 2.0);

    out.basis = Eigen::MatrixXd::Zero(k, k);
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> g;
    for (int i = 0; i < k; ++i) {
        const double lam = out.eigenvalues[i];
        Eigen::VectorXd x(k);
        if (i == 0) {
            x.setOnes();
        } else {
            const double shift = lam + 1e-7 * (1.0 + std::abs(lam));
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(out.M - shift * Eigen::MatrixXd::Identity(k, k));
            for (int r = 0; r < k; ++r) x(r) = g(rng);
            for (int it = 0; it < 8; ++it) {
                for (int q = 0; q < i; ++q) {
                    const Eigen::VectorXd e = out.basis.col(q);
                    x -= (e.dot(x) / e.dot(e)) * e;
                }
                x = lu.solve(x);
                x /= x.cwiseAbs().maxCoeff();
            }
        }
        x /= x.cwiseAbs().maxCoeff();
        for (int r = 0; r < k; ++r)
            if (std::abs(x(r)) > 1e-12) {
                if (x(r) < 0) x = -x;
                break;
            }
        out.basis.col(i) = x;
        out.max_residual = std::max(out.max_residual, (out.M * x - lam * x).cwiseAbs().maxCoeff());
    }
    if (out.max_residual > 1e-10)
        throw NumericalError(fmt::format("exact_spectrum: eigen-residual {:.3e} for k = {}", out.max_residual, k));
    out.basis_inv = out.basis.inverse();
    return out;
}

double quadratic_form(int k, const Vec& xi) {
    const Eigen::MatrixXd M = build_M(k);
    const Eigen::Map<const Eigen::VectorXd> x(xi.data(), k);
    return x.dot(M * x);
}

Vec to_phi(const SpectralData& spec, const Vec& xi) {
    if (static_cast<int>(xi.size()) != spec.k) throw ConfigError("to_phi: dimension mismatch");
    const Eigen::Map<const Eigen::VectorXd> x(xi.data(), spec.k);
    const Eigen::VectorXd phi = spec.basis_inv * x;
    return Vec(phi.data(), phi.data() + spec.k);
}

Vec from_phi(const SpectralData& spec, const Vec& phi) {
    if (static_cast<int>(phi.size()) != spec.k) throw ConfigError("from_phi: dimension mismatch");
    const Eigen::Map<const Eigen::VectorXd> f(phi.data(), spec.k);
    const Eigen::VectorXd xi = spec.basis * f;
    return Vec(xi.data(), xi.data() + spec.k);
}

}  // namespace blowuplab::spectral
