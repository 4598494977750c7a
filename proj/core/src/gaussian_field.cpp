#include "qfilter/gaussian_field.hpp"

#include <cmath>
#include <sstream>

#include "qfilter/errors.hpp"

namespace qfilter {

namespace {

double max_abs(const Eigen::MatrixXcd& a) {
  return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
}

bool exactly_diagonal(const Eigen::MatrixXcd& a) {
  for (Eigen::Index j = 0; j < a.rows(); ++j)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      if (j != k && a(j, k) != Complex(0.0, 0.0)) return false;
  return true;
}

ArakiWoodsCoefficients factorize_impl(const GaussianFieldSpec& spec, double tol) {
  const int n = spec.n;
  const Eigen::MatrixXcd nt = spec.N.transpose();

  // R = sqrt(N) and its pseudo-inverse, computed in one eigenbasis so the
  // dropped directions agree exactly. Eigenvalues of N below tol * lambda_max
  // count as zero; F >= 0 confines M to the remaining range, so C2 R = M
  // stays solvable. An exactly diagonal N (vacuum, thermal) takes an exact
  // entrywise path.
  Eigen::MatrixXcd r, r_pinv;
  if (exactly_diagonal(spec.N)) {
    r = Eigen::MatrixXcd::Zero(n, n);
    r_pinv = Eigen::MatrixXcd::Zero(n, n);
    double lam_max = 0.0;
    for (int j = 0; j < n; ++j) lam_max = std::max(lam_max, spec.N(j, j).real());
    for (int j = 0; j < n; ++j) {
      const double lam = spec.N(j, j).real();
      if (lam < -tol)
        throw ValidationError("factorize", "N has negative eigenvalue " + std::to_string(lam));
      if (lam > tol * std::max(1.0, lam_max)) {
        r(j, j) = std::sqrt(lam);
        r_pinv(j, j) = 1.0 / std::sqrt(lam);
      }
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (spec.N + spec.N.adjoint()));
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lam_max = std::max(0.0, ev.maxCoeff());
    if (ev.minCoeff() < -tol)
      throw ValidationError("factorize", "N has negative eigenvalue " +
                                             std::to_string(ev.minCoeff()));
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(n), isq = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (ev(j) > tol * std::max(1.0, lam_max)) {
        sq(j) = std::sqrt(ev(j));
        isq(j) = 1.0 / sq(j);
      }
    }
    r = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().adjoint();
    r_pinv = es.eigenvectors() * isq.asDiagonal() * es.eigenvectors().adjoint();
  }

  ArakiWoodsCoefficients c;
  c.c3 = r.conjugate();
  c.c2 = spec.M * r_pinv;

  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(n, n) + nt - c.c2 * c.c2.adjoint();
  c.c1 = psd_sqrt(p, tol, "factorize");

  c.residual_commutation = max_abs(c.c1 * c.c1.adjoint() + c.c2 * c.c2.adjoint() -
                                   c.c3 * c.c3.adjoint() -
                                   Eigen::MatrixXcd::Identity(n, n));
  c.residual_number = max_abs(c.c3 * c.c3.adjoint() - nt);
  c.residual_pair = max_abs(c.c2 * c.c3.transpose() - spec.M);

  if (c.residual_commutation > tol || c.residual_number > tol || c.residual_pair > tol) {
    std::ostringstream os;
    os << "factorization residuals exceed " << tol
       << " (commutation " << c.residual_commutation
       << ", number " << c.residual_number
       << ", pair " << c.residual_pair
       << "); M is not supported on the range of N";
    throw ValidationError("factorize", os.str());
  }
  return c;
}

}  // namespace

GaussianFieldSpec validate_gaussian(const Eigen::MatrixXcd& N, const Eigen::MatrixXcd& M) {
  if (N.rows() != N.cols() || M.rows() != M.cols() || N.rows() != M.rows() || N.rows() < 1)
    throw ValidationError("gaussian-spec", "N and M must be square matrices of equal size");
  if (!all_finite(N) || !all_finite(M))
    throw ValidationError("gaussian-spec", "N or M has non-finite entries");

  const double herr = hermiticity_error(N);
  if (herr > kGaussianFieldTol)
    throw ValidationError("gaussian-spec",
                          "N is not Hermitian (max deviation " + std::to_string(herr) + ")");
  const double serr = symmetry_error(M);
  if (serr > kGaussianFieldTol)
    throw ValidationError("gaussian-spec",
                          "M is not symmetric (max deviation " + std::to_string(serr) + ")");

  GaussianFieldSpec spec;
  spec.n = int(N.rows());
  spec.N = N;
  spec.M = M;
  spec.F.resize(2 * spec.n, 2 * spec.n);
  spec.F << Eigen::MatrixXcd::Identity(spec.n, spec.n) + N.transpose(), M,
      M.adjoint(), N;

  const double min_ev = min_eigenvalue(spec.F);
  if (min_ev < -kPsdTol) {
    std::ostringstream os;
    os << "F = [[I+N^T, M], [M^*, N]] is not positive semidefinite (min eigenvalue "
       << min_ev << ")";
    if (spec.n == 1)
      os << "; |M|^2 = " << std::norm(M(0, 0)) << " > N(N+1) = "
         << (N(0, 0).real() * (N(0, 0).real() + 1.0));
    throw ValidationError("gaussian-spec", os.str());
  }

  spec.is_vacuum = N.isZero(0.0) && M.isZero(0.0);
  spec.cache = std::make_shared<GaussianFieldSpec::Cache>();
  return spec;
}

GaussianFieldSpec vacuum_field(int n) {
  return validate_gaussian(Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n));
}

ArakiWoodsCoefficients factorize(const GaussianFieldSpec& spec, double tol) {
  if (spec.n < 1) throw ValidationError("factorize", "spec not validated");
  if (tol == kFactorTol && spec.cache) {
    std::call_once(spec.cache->once, [&] { spec.cache->value = factorize_impl(spec, tol); });
    return spec.cache->value;
  }
  return factorize_impl(spec, tol);
}

ItoTable ito_table(const GaussianFieldSpec& spec) {
  if (spec.n < 1) throw ValidationError("ito-table", "spec not validated");
  ItoTable t;
  t.db_dbdag = Eigen::MatrixXcd::Identity(spec.n, spec.n) + spec.N.transpose();
  t.db_db = spec.M;
  t.dbdag_dbdag = spec.M.adjoint();  // entry (j,k) = conj(M(k,j))
  t.dbdag_db = spec.N;
  return t;
}

std::vector<Operator> lift_coupling(const std::vector<Operator>& L,
                                    const ArakiWoodsCoefficients& c) {
  const int n = int(c.c1.rows());
  if (int(L.size()) != n)
    throw ValidationError("lift-coupling", "coupling vector length " + std::to_string(L.size()) +
                                               " does not match channel count " + std::to_string(n));
  for (const auto& lk : L)
    if (lk.rows() != L[0].rows() || lk.cols() != lk.rows())
      throw ValidationError("lift-coupling", "coupling operators must be square and equal-sized");

  const Eigen::Index d = L[0].rows();
  const Eigen::MatrixXcd c1a = c.c1.adjoint();
  const Eigen::MatrixXcd c2a = c.c2.adjoint();
  const Eigen::MatrixXcd c3t = c.c3.transpose();

  std::vector<Operator> lifted(2 * n, Operator::Zero(d, d));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      lifted[j] += c1a(j, k) * L[k];
      lifted[n + j] += c2a(j, k) * L[k] - c3t(j, k) * L[k].adjoint();
    }
  }
  return lifted;
}

Eigen::MatrixXcd lift_measurement(const Eigen::MatrixXcd& G, const ArakiWoodsCoefficients& c) {
  const int n = int(c.c1.rows());
  if (G.cols() != n)
    throw ValidationError("lift-measurement", "G has " + std::to_string(G.cols()) +
                                                  " columns, expected " + std::to_string(n));
  const Eigen::Index m = G.rows();
  Eigen::MatrixXcd gt(m, 2 * n);
  gt << G * c.c1.conjugate(), G.conjugate() * c.c3 + G * c.c2.conjugate();

  // Covariance consistency: dZ dZ^T computed in the doubled-vacuum picture
  // must match the value implied by the Ito table of (N, M), both expressed
  // through the coefficient triple.
  const Eigen::MatrixXcd bb_dag = c.c1 * c.c1.adjoint() + c.c2 * c.c2.adjoint();
  const Eigen::MatrixXcd bb = c.c2 * c.c3.transpose();
  const Eigen::MatrixXcd bdag_bdag = c.c3.conjugate() * c.c2.adjoint();
  const Eigen::MatrixXcd bdag_b = c.c3.conjugate() * c.c3.transpose();

  const Eigen::MatrixXcd lhs = gt.conjugate() * gt.transpose();
  const Eigen::MatrixXcd rhs = G.conjugate() * bb_dag * G.transpose() +
                               G * bdag_b * G.adjoint() +
                               G.conjugate() * bb * G.adjoint() +
                               G * bdag_bdag * G.transpose();
  const double resid = max_abs(lhs - rhs);
  if (resid > 1e-10)
    throw ValidationError("lift-measurement",
                          "measurement covariance inconsistency (residual " +
                              std::to_string(resid) + "); coefficient triple is invalid");
  return gt;
}

}  // namespace qfilter
