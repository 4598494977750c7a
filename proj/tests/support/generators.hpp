#pragma once

// Randomized inputs for property tests. Gaussian field specs are generated
// from their physical normal form: per-channel squeezed thermal states mixed
// by a random passive (unitary) network,
//
//   N = U^# N0 U^T,  M = U M0 U^T,
//   N0 = diag(nbar cosh(2r) + sinh^2 r),
//   M0 = diag(e^{i phi} (nbar + 1/2) sinh(2r)),
//
// which satisfies F >= 0 by construction (exactly, up to roundoff) and
// covers singular N when channels are left in vacuum.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "qfilter/gaussian_field.hpp"
#include "qfilter/measurement.hpp"

namespace qfilter::testing {

inline Eigen::MatrixXcd random_ginibre(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd a(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a(r, c) = Complex(normal(rng), normal(rng));
  return a;
}

inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_ginibre(n, n, rng));
  Eigen::MatrixXcd q = qr.householderQ();
  // Fix the phase convention so Q is unique-ish; not load-bearing.
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline Eigen::MatrixXcd random_hermitian(int d, std::mt19937_64& rng) {
  Eigen::MatrixXcd a = random_ginibre(d, d, rng);
  return 0.5 * (a + a.adjoint());
}

inline Eigen::MatrixXcd random_density(int d, std::mt19937_64& rng) {
  Eigen::MatrixXcd a = random_ginibre(d, d, rng);
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace();
}

struct FieldParams {
  Eigen::MatrixXcd N;
  Eigen::MatrixXcd M;
};

/// allow_vacuum_channels leaves ~1/3 of the channels in vacuum, which makes
/// N singular and exercises the pseudo-inverse path of the factorization.
inline FieldParams random_field_params(int n, std::mt19937_64& rng,
                                       bool allow_vacuum_channels = true) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXd nbar(n), r(n), phi(n);
  for (int k = 0; k < n; ++k) {
    const bool vacuum = allow_vacuum_channels && uni(rng) < 1.0 / 3.0;
    nbar(k) = vacuum ? 0.0 : 1.5 * uni(rng);
    // keep squeezing either exactly zero or well away from the pseudo-inverse
    // cutoff so the support of M stays numerically inside the range of N
    r(k) = vacuum ? 0.0 : 0.1 + uni(rng);
    phi(k) = 2.0 * M_PI * uni(rng);
  }
  Eigen::MatrixXcd n0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd m0 = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    n0(k, k) = nbar(k) * std::cosh(2.0 * r(k)) + std::sinh(r(k)) * std::sinh(r(k));
    m0(k, k) = std::polar(1.0, phi(k)) * (nbar(k) + 0.5) * std::sinh(2.0 * r(k));
  }
  const Eigen::MatrixXcd u = random_unitary(n, rng);
  FieldParams out;
  out.N = u.conjugate() * n0 * u.transpose();
  out.N = 0.5 * (out.N + out.N.adjoint()).eval();  // kill roundoff skew
  out.M = u * m0 * u.transpose();
  out.M = 0.5 * (out.M + out.M.transpose()).eval();
  return out;
}

/// Random admissible measurement matrix: m random quadrature rows projected
/// to mutual symplectic orthogonality, converted back to complex form.
/// Retries until both rank conditions hold.
inline Eigen::MatrixXcd random_valid_G(int m, int nch, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<Eigen::VectorXd> rows;
    std::vector<Eigen::VectorXd> constraints;  // orthonormal
    auto project = [&constraints](Eigen::VectorXd v) {
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& c : constraints) v -= c.dot(v) * c;
      return v;
    };
    bool ok = true;
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd v(2 * nch);
      for (int j = 0; j < 2 * nch; ++j) v(j) = normal(rng);
      v = project(v);
      if (v.norm() < 1e-8) {
        ok = false;
        break;
      }
      v.normalize();
      rows.push_back(v);
      Eigen::VectorXd vj(2 * nch);  // v * J = (-p, q)
      vj.head(nch) = -v.tail(nch);
      vj.tail(nch) = v.head(nch);
      for (Eigen::VectorXd c : {v, vj}) {
        c = project(c);
        if (c.norm() > 1e-10) constraints.push_back(c.normalized());
      }
    }
    if (!ok) continue;
    Eigen::MatrixXcd g(m, nch);
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < nch; ++j) g(k, j) = Complex(rows[k](j), rows[k](nch + j));
    try {
      validate_measurement(g, nch);
      return g;
    } catch (...) {
      continue;
    }
  }
  throw std::runtime_error("random_valid_G failed to generate an admissible matrix");
}

}  // namespace qfilter::testing
