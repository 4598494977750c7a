#include "qfilter/numeric.hpp"

#include <cmath>

#include "qfilter/errors.hpp"

namespace qfilter {

double hermiticity_error(const Eigen::MatrixXcd& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double max_imag(const Eigen::MatrixXcd& a) {
  return a.imag().cwiseAbs().maxCoeff();
}

double symmetry_error(const Eigen::MatrixXcd& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Eigen::MatrixXcd& a) {
  Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

bool exactly_diagonal(const Eigen::MatrixXcd& a) {
  for (Eigen::Index j = 0; j < a.rows(); ++j)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      if (j != k && a(j, k) != Complex(0.0, 0.0)) return false;
  return true;
}

}  // namespace

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& a, double clamp_tol,
                          const char* stage) {
  const Eigen::Index n = a.rows();

  if (exactly_diagonal(a)) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double v = a(j, j).real();
      if (std::abs(a(j, j).imag()) > clamp_tol || v < -clamp_tol)
        throw ValidationError(stage, "matrix is not positive semidefinite "
                                     "(diagonal entry " + std::to_string(v) + ")");
      r(j, j) = v > 0.0 ? std::sqrt(v) : 0.0;
    }
    return r;
  }

  Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (ev(j) < -clamp_tol)
      throw ValidationError(stage, "matrix is not positive semidefinite "
                                   "(min eigenvalue " + std::to_string(ev(j)) + ")");
    ev(j) = ev(j) > 0.0 ? std::sqrt(ev(j)) : 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

int matrix_rank(const Eigen::MatrixXcd& a, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = rel_tol * sv(0);
  int r = 0;
  for (Eigen::Index j = 0; j < sv.size(); ++j)
    if (sv(j) > cut) ++r;
  return r;
}

bool all_finite(const Eigen::MatrixXcd& a) {
  return a.allFinite();
}

}  // namespace qfilter
