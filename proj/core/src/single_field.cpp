#include "qfilter/single_field.hpp"

#include <cmath>

#include "qfilter/engine.hpp"
#include "qfilter/errors.hpp"
#include "qfilter/numeric.hpp"

namespace qfilter {

SingleFieldFilter::SingleFieldFilter(Operator H, Operator L, Complex g)
    : h_(std::move(H)), l_(std::move(L)), g_(g), sigma_(std::norm(g)) {
  if (g_ == Complex(0.0, 0.0))
    throw ValidationError("single-field", "measurement coefficient g must be nonzero");
  if (h_.rows() != h_.cols() || l_.rows() != l_.cols() || h_.rows() != l_.rows())
    throw ValidationError("single-field", "H and L must be square and equal-sized");
  if (hermiticity_error(h_) > kHermitianInputTol)
    throw ValidationError("single-field", "Hamiltonian not Hermitian");
  ldag_l_ = l_.adjoint() * l_;
}

double SingleFieldFilter::innovation_drift(const Operator& rho) const {
  return (rho * (std::conj(g_) * l_ + g_ * l_.adjoint())).trace().real();
}

Operator SingleFieldFilter::step(const Operator& rho, double dnu, double dt) const {
  const Complex im(0, 1);
  Operator out = rho + dt * (im * (rho * h_ - h_ * rho) + l_ * rho * l_.adjoint() -
                             0.5 * (ldag_l_ * rho + rho * ldag_l_));

  Operator gain = std::conj(g_) * (l_ * rho) + g_ * (rho * l_.adjoint());
  const double expect = gain.trace().real();
  gain -= expect * rho;
  out += (dnu / sigma_) * gain;

  if (!out.allFinite())
    throw IntegrationError("single-field state became non-finite", -1);
  const double tr = out.trace().real();
  if (tr <= 0.0) throw IntegrationError("single-field trace collapsed", -1);
  out /= tr;
  out = 0.5 * (out + out.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<Operator> es(out);
  if (es.eigenvalues().minCoeff() < kEigenvalueFloor) {
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    ev /= ev.sum();
    out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  }
  return out;
}

}  // namespace qfilter
