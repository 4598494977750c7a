#include "qfilter/measurement.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "qfilter/errors.hpp"
#include "qfilter/numeric.hpp"

namespace qfilter {

namespace {

// row * J with J = [[0, I], [-I, 0]]: (q, p) -> (-p, q).
Eigen::VectorXd symplectic_image(const Eigen::VectorXd& row) {
  const Eigen::Index h = row.size() / 2;
  Eigen::VectorXd out(row.size());
  out.head(h) = -row.tail(h);
  out.tail(h) = row.head(h);
  return out;
}

// Orthonormal set spanning the completion constraints.
class ConstraintBasis {
 public:
  explicit ConstraintBasis(Eigen::Index dim) : dim_(dim) {}

  void add(const Eigen::VectorXd& v) {
    Eigen::VectorXd r = project_out(v);
    if (r.norm() > 1e-12 * std::max(1.0, v.norm())) basis_.push_back(r.normalized());
  }

  Eigen::VectorXd project_out(const Eigen::VectorXd& v) const {
    Eigen::VectorXd r = v;
    for (int pass = 0; pass < 2; ++pass)  // re-orthogonalize for stability
      for (const auto& b : basis_) r -= b.dot(r) * b;
    return r;
  }

  Eigen::Index size() const { return Eigen::Index(basis_.size()); }
  Eigen::Index dim() const { return dim_; }

  // Orthonormal basis of the orthogonal complement.
  Eigen::MatrixXd complement() const {
    Eigen::MatrixXd c(basis_.size(), dim_);
    for (size_t j = 0; j < basis_.size(); ++j) c.row(Eigen::Index(j)) = basis_[j];
    if (basis_.empty()) return Eigen::MatrixXd::Identity(dim_, dim_);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
    const Eigen::Index rank = svd.rank();
    return svd.matrixV().rightCols(dim_ - rank).transpose();
  }

 private:
  Eigen::Index dim_;
  std::vector<Eigen::VectorXd> basis_;
};

}  // namespace

MeasurementSpec validate_measurement(const Eigen::MatrixXcd& G, int nch) {
  const int m = int(G.rows());
  if (m < 1 || G.cols() != nch)
    throw ValidationError("measurement", "G must be m x nch with m >= 1 (got " +
                                             std::to_string(m) + " x " + std::to_string(G.cols()) +
                                             ", nch = " + std::to_string(nch) + ")");
  if (m > nch)
    throw ValidationError("measurement", "too many measurements: m = " + std::to_string(m) +
                                             " > nch = " + std::to_string(nch));
  if (!all_finite(G)) throw ValidationError("measurement", "G has non-finite entries");

  // [G^# G] K_n [G^*; G^T] evaluated literally.
  Eigen::MatrixXcd gg(m, 2 * nch);
  gg << G.conjugate(), G;
  Eigen::MatrixXcd kn = Eigen::MatrixXcd::Zero(2 * nch, 2 * nch);
  kn.topRightCorner(nch, nch) = Eigen::MatrixXcd::Identity(nch, nch);
  kn.bottomLeftCorner(nch, nch) = -Eigen::MatrixXcd::Identity(nch, nch);
  Eigen::MatrixXcd ggt(2 * nch, m);
  ggt << G.adjoint(), G.transpose();

  MeasurementSpec spec;
  spec.commutation_residual = (gg * kn * ggt).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
  if (spec.commutation_residual > kCommutationTol * scale * scale)
    throw ValidationError("measurement",
                          "self-commutation condition violated (residual " +
                              std::to_string(spec.commutation_residual) +
                              "); G G^* must be entrywise real");

  if (matrix_rank(gg) < m)
    throw ValidationError("measurement", "[G^# G] is rank deficient (rank " +
                                             std::to_string(matrix_rank(gg)) + " < m = " +
                                             std::to_string(m) + ")");
  if (matrix_rank(G) < m)
    throw ValidationError("measurement", "G is rank deficient (rank " +
                                             std::to_string(matrix_rank(G)) + " < m = " +
                                             std::to_string(m) + ")");

  spec.m = m;
  spec.nch = nch;
  spec.G = G;
  return spec;
}

Eigen::MatrixXd to_quadrature(const Eigen::MatrixXcd& G) {
  Eigen::MatrixXd t(G.rows(), 2 * G.cols());
  t << 2.0 * G.real(), 2.0 * G.imag();
  return t;
}

Eigen::MatrixXcd complete_measurement(const MeasurementSpec& spec) {
  const int m = spec.m;
  const int nch = spec.nch;
  if (m == nch) return spec.G;

  const Eigen::Index dim = 2 * nch;
  ConstraintBasis constraints(dim);
  Eigen::MatrixXd t = to_quadrature(spec.G);
  for (int j = 0; j < m; ++j) {
    constraints.add(t.row(j));
    constraints.add(symplectic_image(t.row(j)));
  }

  Eigen::MatrixXcd hrows(nch - m, nch);
  for (int picked = 0; picked < nch - m; ++picked) {
    Eigen::VectorXd best;
    double best_score = -1.0;

    // Standard basis candidates first, then an orthonormal basis of the
    // admissible complement; the first strictly-largest residual wins.
    for (Eigen::Index j = 0; j < dim; ++j) {
      Eigen::VectorXd r = constraints.project_out(Eigen::VectorXd::Unit(dim, j));
      const double score = r.norm();
      if (score > best_score) {
        best_score = score;
        best = r;
      }
    }
    const Eigen::MatrixXd comp = constraints.complement();
    for (Eigen::Index j = 0; j < comp.rows(); ++j) {
      Eigen::VectorXd r = constraints.project_out(Eigen::VectorXd(comp.row(j)));
      const double score = r.norm();
      if (score > best_score) {
        best_score = score;
        best = r;
      }
    }
    if (best_score < 1e-10)
      throw ValidationError("completion",
                            "no admissible completion direction found (should be impossible "
                            "for a validated measurement)");

    const Eigen::VectorXd u = best.normalized();
    constraints.add(u);
    constraints.add(symplectic_image(u));

    // Quadrature row (q, p) -> unit-norm complex row q + i p.
    for (int k = 0; k < nch; ++k) hrows(picked, k) = Complex(u(k), u(nch + k));
  }

  Eigen::MatrixXcd w(nch, nch);
  w << spec.G, hrows;

  const double realness = max_imag(w * w.adjoint());
  if (realness > kGainRealTol)
    throw ValidationError("completion", "completed W fails W W^* realness (residual " +
                                            std::to_string(realness) + ")");

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(w);
  const double smin = svd.singularValues().minCoeff();
  const double cond = smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                                 : std::numeric_limits<double>::infinity();
  if (cond > kConditionError)
    throw ValidationError("completion",
                          "completed W is numerically singular (condition number " +
                              std::to_string(cond) + ")");
  return w;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> conditioning_gain(const Eigen::MatrixXcd& W,
                                                              const Eigen::MatrixXcd& G) {
  const Eigen::Index m = G.rows();
  const Eigen::Index nch = G.cols();
  if (W.rows() != nch || W.cols() != nch)
    throw ValidationError("conditioning-gain", "W must be nch x nch");
  if ((W.topRows(m) - G).cwiseAbs().maxCoeff() != 0.0)
    throw ValidationError("conditioning-gain", "W does not extend G (top rows differ)");

  const Eigen::MatrixXcd sigma_c = G.conjugate() * G.transpose();
  const double sig_imag = max_imag(sigma_c);
  if (sig_imag > kGainRealTol)
    throw ValidationError("conditioning-gain",
                          "noise covariance G^# G^T is not real (max imaginary part " +
                              std::to_string(sig_imag) + ")");
  Eigen::MatrixXd sigma = sigma_c.real();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();

  Eigen::JacobiSVD<Eigen::MatrixXd> ssvd(sigma);
  const double smax = ssvd.singularValues().maxCoeff();
  const double smin = ssvd.singularValues().minCoeff();
  if (smax <= 0.0 || smin < 1e-12 * smax)
    throw ValidationError("conditioning-gain",
                          "noise covariance Sigma is singular; the full-rank measurement "
                          "assumption is violated");

  const Eigen::MatrixXcd k_c =
      (W.conjugate() * G.transpose()) * sigma_c.inverse();
  const double k_imag = max_imag(k_c);
  if (k_imag > kGainRealTol)
    throw ValidationError("conditioning-gain",
                          "conditioning gain has imaginary part " + std::to_string(k_imag) +
                              "; W/G pair is internally inconsistent");
  Eigen::MatrixXd k = k_c.real();

  const double top_dev =
      (k.topRows(m) - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (top_dev > kGainRealTol)
    throw ValidationError("conditioning-gain",
                          "top block of the conditioning gain deviates from identity by " +
                              std::to_string(top_dev));
  return {k, sigma};
}

CompletedMeasurement complete_and_gain(const MeasurementSpec& spec) {
  CompletedMeasurement out;
  out.W = complete_measurement(spec);
  out.Hrows = out.W.bottomRows(spec.nch - spec.m);
  std::tie(out.K, out.Sigma) = conditioning_gain(out.W, spec.G);

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(out.W);
  const double smin = svd.singularValues().minCoeff();
  out.condition_number = smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                                    : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace qfilter
