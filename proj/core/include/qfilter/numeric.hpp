#pragma once

// Small dense complex linear-algebra helpers shared across the library.

#include <Eigen/Dense>
#include <complex>

namespace qfilter {

using Complex = std::complex<double>;

/// max_jk |A(j,k) - conj(A(k,j))|
double hermiticity_error(const Eigen::MatrixXcd& a);

/// max_jk |Im A(j,k)|
double max_imag(const Eigen::MatrixXcd& a);

/// max_jk |A(j,k) - A(k,j)|
double symmetry_error(const Eigen::MatrixXcd& a);

/// Smallest eigenvalue of a Hermitian matrix (input hermitized first).
double min_eigenvalue(const Eigen::MatrixXcd& a);

/// Hermitian PSD square root. Eigenvalues in [-clamp_tol, 0) are clamped to
/// zero; anything below -clamp_tol throws ValidationError(stage).
/// Exactly-diagonal inputs take an exact entrywise path so that e.g.
/// sqrt(0) = 0 and sqrt(I) = I hold bit-for-bit.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& a, double clamp_tol,
                          const char* stage);

/// Numerical rank with threshold rel_tol * sigma_max.
int matrix_rank(const Eigen::MatrixXcd& a, double rel_tol = 1e-12);

bool all_finite(const Eigen::MatrixXcd& a);

}  // namespace qfilter
