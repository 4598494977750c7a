#pragma once

// Direct implementation of the scalar (n = m = 1) vacuum filter
//
//   drho = L*(rho) dt
//        + |g|^{-2} (g^* L rho + g rho L^* - Tr(rho(g^* L + g L^*)) rho) dnu,
//
// written out in scalar form and kept independent of the MIMO completion
// machinery so the two paths can be cross-checked against each other.
// Repair policy per step (renormalize, re-hermitize, PSD-project below
// -1e-8) matches the MIMO integrator.

#include <Eigen/Dense>

#include "qfilter/hilbert.hpp"

namespace qfilter {

class SingleFieldFilter {
 public:
  /// Measurement Y = g^* A_out + g A_out^*; g must be nonzero.
  SingleFieldFilter(Operator H, Operator L, Complex g);

  /// Euler-Maruyama step driven by the scalar innovation increment dnu.
  Operator step(const Operator& rho, double dnu, double dt) const;

  /// Record drift Tr(rho (g^* L + g L^*)); dY = drift * dt + dnu.
  double innovation_drift(const Operator& rho) const;

  /// Noise covariance of the record, |g|^2; independent of the phase of g.
  double sigma() const { return sigma_; }

 private:
  Operator h_;
  Operator l_;
  Operator ldag_l_;
  Complex g_;
  double sigma_;
};

}  // namespace qfilter
