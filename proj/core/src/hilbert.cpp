#include "qfilter/hilbert.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "qfilter/errors.hpp"

namespace qfilter {

namespace {

void require_square_same_dim(const Operator& a, const Operator& b, const char* stage) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw ValidationError(stage, "operator dimension mismatch: " +
                                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                     " vs " + std::to_string(b.rows()) + "x" +
                                     std::to_string(b.cols()));
}

void require_channels(const Operator& ref, const std::vector<Operator>& L, const char* stage) {
  for (const auto& lk : L) require_square_same_dim(ref, lk, stage);
}

}  // namespace

Operator annihilation_op(int d) {
  if (d < 2) throw ValidationError("hilbert", "annihilation operator needs dimension >= 2");
  Operator a = Operator::Zero(d, d);
  for (int j = 0; j + 1 < d; ++j) a(j, j + 1) = std::sqrt(double(j + 1));
  return a;
}

Operator pauli(const std::string& name) {
  Operator m = Operator::Zero(2, 2);
  if (name == "x") {
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
  } else if (name == "y") {
    m(0, 1) = Complex(0, -1);
    m(1, 0) = Complex(0, 1);
  } else if (name == "z") {
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
  } else if (name == "plus") {
    m(0, 1) = 1.0;  // |e><g|
  } else if (name == "minus") {
    m(1, 0) = 1.0;  // |g><e|
  } else {
    throw ValidationError("hilbert", "unknown Pauli name '" + name + "'");
  }
  return m;
}

Operator identity_op(int d) {
  if (d < 1) throw ValidationError("hilbert", "identity needs dimension >= 1");
  return Operator::Identity(d, d);
}

Operator number_op(int d) {
  if (d < 1) throw ValidationError("hilbert", "number operator needs dimension >= 1");
  Operator n = Operator::Zero(d, d);
  for (int j = 0; j < d; ++j) n(j, j) = double(j);
  return n;
}

Operator lindblad_heisenberg(const Operator& H, const std::vector<Operator>& L,
                             const Operator& X) {
  require_square_same_dim(X, H, "hilbert");
  require_channels(X, L, "hilbert");
  const double herr = hermiticity_error(H);
  if (herr > kHermitianInputTol)
    throw ValidationError("hilbert", "Hamiltonian not Hermitian (max deviation " +
                                         std::to_string(herr) + ")");

  const Complex im(0, 1);
  Operator out = -im * (X * H - H * X);
  for (const auto& lk : L) {
    Operator lkd = lk.adjoint();
    Operator aa = lkd * lk;
    out += lkd * X * lk - 0.5 * (aa * X + X * aa);
  }
  return out;
}

Operator liouvillian_apply(const Operator& H, const std::vector<Operator>& L,
                           const Operator& rho) {
  require_square_same_dim(rho, H, "hilbert");
  require_channels(rho, L, "hilbert");

  const Complex im(0, 1);
  Operator out = im * (rho * H - H * rho);
  for (const auto& lk : L) {
    Operator lkd = lk.adjoint();
    Operator aa = lkd * lk;
    out += lk * rho * lkd - 0.5 * (aa * rho + rho * aa);
  }
  return out;
}

SuperoperatorMatrix liouvillian_matrix(const Operator& H, const std::vector<Operator>& L) {
  require_square_same_dim(H, H, "hilbert");
  require_channels(H, L, "hilbert");
  const Eigen::Index d = H.rows();
  const Operator id = Operator::Identity(d, d);
  const Complex im(0, 1);

  // vec(A X B) = (B^T kron A) vec(X), column-major stacking.
  SuperoperatorMatrix sup =
      im * (Eigen::kroneckerProduct(H.transpose(), id) - Eigen::kroneckerProduct(id, H));
  for (const auto& lk : L) {
    Operator lkd = lk.adjoint();
    Operator aa = lkd * lk;
    sup += Eigen::kroneckerProduct(lk.conjugate(), lk).eval();
    sup -= 0.5 * Eigen::kroneckerProduct(id, aa).eval();
    sup -= 0.5 * Eigen::kroneckerProduct(aa.transpose(), id).eval();
  }
  return sup;
}

Operator steady_state(const Operator& H, const std::vector<Operator>& L) {
  const Eigen::Index d = H.rows();
  SuperoperatorMatrix sup = liouvillian_matrix(H, L);

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sup, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = sv.size() ? sv(0) : 0.0;
  const double cut = std::max(1e-10, 1e-12 * scale);

  int nullity = 0;
  for (Eigen::Index j = 0; j < sv.size(); ++j)
    if (sv(j) < cut) ++nullity;
  if (nullity == 0)
    throw ValidationError("steady-state", "no numerical null vector (smallest singular value " +
                                              std::to_string(sv(sv.size() - 1)) + ")");
  if (nullity > 1)
    throw ValidationError("steady-state", "degenerate null space (dimension " +
                                              std::to_string(nullity) + ")");

  Eigen::VectorXcd v = svd.matrixV().col(sv.size() - 1);
  Operator rho = Eigen::Map<const Operator>(v.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  Complex tr = rho.trace();
  if (std::abs(tr) < 1e-12)
    throw ValidationError("steady-state", "null vector has vanishing trace");
  rho /= tr;

  // Clamp roundoff-negative eigenvalues, then verify the residual.
  Eigen::SelfAdjointEigenSolver<Operator> es(rho);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10)
    throw ValidationError("steady-state", "null vector is not positive semidefinite "
                                          "(min eigenvalue " + std::to_string(ev.minCoeff()) + ")");
  ev = ev.cwiseMax(0.0);
  rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  rho /= rho.trace();

  const double resid = liouvillian_apply(H, L, rho).norm();
  if (resid > 1e-10)
    throw ValidationError("steady-state", "residual ||L*(rho_ss)|| = " + std::to_string(resid) +
                                              " exceeds 1e-10");
  return rho;
}

}  // namespace qfilter
