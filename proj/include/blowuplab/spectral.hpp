#pragma once

#include <Eigen/Dense>

#include "blowuplab/numerics.hpp"

namespace blowuplab::spectral {

struct SpectralData {
    int k = 0;
    Eigen::MatrixXd M;
    Vec eigenvalues;            // -m_i, i = 1..k, m_i = i(i-1)/2
    Eigen::MatrixXd basis;      // column i-1 is e_i, sup-norm 1, first nonzero entry positive
    Eigen::MatrixXd basis_inv;
    double max_residual = 0.0;  // max_i |M e_i - lambda_i e_i|_inf
};

/// Symmetric tridiagonal matrix with m_{i,i-1} = sigma_{i-1}, m_{i,i} = -(sigma_{i-1}+sigma_i), m_{i,i+1} = sigma_i.
Eigen::MatrixXd build_M(int k);

/// Tridiagonal chain matrix of size k-j+1 with zero column sums; j = 1 gives M.
Eigen::MatrixXd chain_matrix(int k, int j);

/// Eigenvalues from the conjugation chain (each step verified numerically), eigenvectors by
/// shifted inverse iteration with deflation.
SpectralData exact_spectrum(int k);

/// (M xi, xi).
double quadratic_form(int k, const Vec& xi);

Vec to_phi(const SpectralData& spec, const Vec& xi);
Vec from_phi(const SpectralData& spec, const Vec& phi);

}  // namespace blowuplab::spectral
