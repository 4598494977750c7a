#pragma once

// Zero-mean Gaussian field states of n boson channels, described by the pair
// (N, M): N = photon-number correlations (Hermitian), M = pair correlations
// (symmetric). Physical states have
//
//     F = [[I + N^T, M], [M^*, N]]  >=  0.
//
// A valid state factors into coefficients (C1, C2, C3) of a doubled-vacuum
// representation b = C1 a1 + C2 a2 + C3 a2^dag with
//
//     C1 C1^* + C2 C2^* - C3 C3^* = I      (commutation)
//     C3 C3^*                     = N^T    (number correlation)
//     C2 C3^T                     = M      (pair correlation)
//
// Everything downstream (Ito table, lifted couplings and measurements) is
// determined by any triple satisfying these equations.

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <vector>

#include "qfilter/hilbert.hpp"

namespace qfilter {

inline constexpr double kGaussianFieldTol = 1e-12;   // N/M structure checks
inline constexpr double kPsdTol = 1e-10;             // F positivity slack
inline constexpr double kFactorTol = 1e-10;          // default factorization tol

struct ArakiWoodsCoefficients {
  Eigen::MatrixXcd c1, c2, c3;

  // Residuals of the three defining equations, filled by factorize().
  double residual_commutation = 0.0;
  double residual_number = 0.0;
  double residual_pair = 0.0;
};

/// Coefficients of the forward-increment products dB_j dB_k^*, dB_j dB_k,
/// dB_j^* dB_k^*, dB_j^* dB_k (each entry times dt).
struct ItoTable {
  Eigen::MatrixXcd db_dbdag;    // I + N^T
  Eigen::MatrixXcd db_db;      // M
  Eigen::MatrixXcd dbdag_dbdag;  // entry (j,k) = conj(M(k,j))
  Eigen::MatrixXcd dbdag_db;   // N
};

struct GaussianFieldSpec {
  int n = 0;
  Eigen::MatrixXcd N;
  Eigen::MatrixXcd M;
  Eigen::MatrixXcd F;     // cached 2n x 2n correlation matrix
  bool is_vacuum = false;  // N and M exactly zero

  // Factorization cache; shared across copies of the spec.
  struct Cache;
  std::shared_ptr<Cache> cache;
};

struct GaussianFieldSpec::Cache {
  std::once_flag once;
  ArakiWoodsCoefficients value;
};

/// Checks N Hermitian, M symmetric and F >= 0; returns the validated spec
/// with F cached. Throws ValidationError naming the violated condition.
GaussianFieldSpec validate_gaussian(const Eigen::MatrixXcd& N, const Eigen::MatrixXcd& M);

/// Convenience: the n-channel vacuum (N = M = 0).
GaussianFieldSpec vacuum_field(int n);

/// Square-root / pseudo-inverse construction of (C1, C2, C3):
///   R  = psd_sqrt(N),  C3 = conj(R),
///   C2 = M R^+          (N-eigenvalues below tol * lambda_max count as zero),
///   C1 = psd_sqrt(I + N^T - C2 C2^*)   (eigenvalues in [-tol, 0) clamped).
/// The three defining equations are verified to residual <= tol before
/// returning. Results at the default tolerance are cached inside the spec.
ArakiWoodsCoefficients factorize(const GaussianFieldSpec& spec, double tol = kFactorTol);

ItoTable ito_table(const GaussianFieldSpec& spec);

/// Effective coupling vector in the doubled-vacuum picture:
///   first n entries  C1^* L,  last n entries  C2^* L - C3^T L^#.
std::vector<Operator> lift_coupling(const std::vector<Operator>& L,
                                    const ArakiWoodsCoefficients& c);

/// Measurement matrix in the doubled-vacuum picture:
///   Gtilde = [G C1^#, G^# C3 + G C2^#]   (m x 2n).
/// Verifies Gtilde^# Gtilde^T against the covariance implied by the Ito
/// table; residual > 1e-10 signals an inconsistent coefficient triple.
Eigen::MatrixXcd lift_measurement(const Eigen::MatrixXcd& G, const ArakiWoodsCoefficients& c);

}  // namespace qfilter
