#pragma once

// Linear measurement geometry. A measurement Y = G^# A_out + G A_out^# of m
// output quadratures is admissible when its components self-commute,
//
//     [G^# G] K_n [G^*; G^T] = 0,   K_n = [[0, I], [-I, 0]],
//
// (equivalently G G^* is entrywise real) and both G and [G^# G] have full
// row rank. An admissible G with m < nch is completed to an invertible
// nch x nch matrix W whose rows keep the commutation property; the
// conditioning gain K and noise covariance Sigma then follow from the
// joint Gaussian statistics of Z_W and Z.

#include <Eigen/Dense>
#include <utility>

namespace qfilter {

inline constexpr double kCommutationTol = 1e-12;
inline constexpr double kGainRealTol = 1e-10;
inline constexpr double kConditionWarn = 1e8;
inline constexpr double kConditionError = 1e12;

struct MeasurementSpec {
  int m = 0;    // measurement count
  int nch = 0;  // underlying channel count (n, or 2n for lifted measurements)
  Eigen::MatrixXcd G;
  double commutation_residual = 0.0;
};

struct CompletedMeasurement {
  Eigen::MatrixXcd W;      // nch x nch invertible, first m rows = G
  Eigen::MatrixXcd Hrows;  // (nch - m) x nch completion rows
  Eigen::MatrixXd K;       // nch x m real conditioning gain, top block = I
  Eigen::MatrixXd Sigma;   // m x m real symmetric positive definite
  double condition_number = 0.0;  // of W; > 1e8 deserves a warning
};

/// Validates the commutation and rank conditions; throws ValidationError
/// naming the violated condition otherwise.
MeasurementSpec validate_measurement(const Eigen::MatrixXcd& G, int nch);

/// Real m x 2nch quadrature picture [G + G^#, -iG + iG^#] = [2 Re G, 2 Im G].
/// G is recovered as half the first block plus i/2 times the second.
Eigen::MatrixXd to_quadrature(const Eigen::MatrixXcd& G);

/// Extends G to an invertible W by greedy selection of quadrature rows that
/// are orthogonal both to the span of the rows chosen so far and to its
/// symplectic image. Completion rows are unit-normalized; candidates are
/// scanned lowest-index-first so ties break deterministically.
/// m == nch returns W = G unchanged.
Eigen::MatrixXcd complete_measurement(const MeasurementSpec& spec);

/// K = (W^# G^T)(G^# G^T)^{-1}, Sigma = G^# G^T. K is checked to be real
/// (within kGainRealTol) with unit top block before the imaginary part is
/// discarded.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> conditioning_gain(const Eigen::MatrixXcd& W,
                                                              const Eigen::MatrixXcd& G);

/// complete_measurement + conditioning_gain in one call.
CompletedMeasurement complete_and_gain(const MeasurementSpec& spec);

}  // namespace qfilter
