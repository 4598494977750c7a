#pragma once

// Finite-dimensional operator and superoperator algebra: standard operator
// constructors, the Lindblad generator and its Schroedinger-picture adjoint
// (the Liouvillian), and steady-state computation.
//
// Two-level convention throughout: basis index 0 = excited, 1 = ground, so
// sigma_z = diag(1,-1) and sigma_minus = |g><e| = [[0,0],[1,0]].

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qfilter/numeric.hpp"

namespace qfilter {

using Operator = Eigen::MatrixXcd;

/// d^2 x d^2 matrix acting on column-stacked d x d density matrices.
using SuperoperatorMatrix = Eigen::MatrixXcd;

/// Hermiticity tolerance for Hamiltonian inputs. Catches construction bugs
/// without rejecting roundoff.
inline constexpr double kHermitianInputTol = 1e-10;

/// Truncated bosonic lowering operator: a(j, j+1) = sqrt(j+1). Requires d >= 2.
Operator annihilation_op(int d);

/// One of "x", "y", "z", "plus", "minus".
Operator pauli(const std::string& name);

Operator identity_op(int d);

/// Number operator diag(0, 1, ..., d-1).
Operator number_op(int d);

/// Heisenberg-picture Lindblad generator
///   L_{H,L}(X) = -i[X,H] + sum_k (Lk* X Lk - 1/2 (Lk* Lk X + X Lk* Lk)).
/// H must be Hermitian within kHermitianInputTol.
Operator lindblad_heisenberg(const Operator& H, const std::vector<Operator>& L,
                             const Operator& X);

/// Schroedinger-picture adjoint (Liouvillian)
///   L*_{H,L}(rho) = i[rho,H] + sum_k (Lk rho Lk* - 1/2 (Lk* Lk rho + rho Lk* Lk)).
Operator liouvillian_apply(const Operator& H, const std::vector<Operator>& L,
                           const Operator& rho);

/// d^2 x d^2 matrix form of liouvillian_apply under column-stacking vec().
SuperoperatorMatrix liouvillian_matrix(const Operator& H, const std::vector<Operator>& L);

/// Unique trace-1 PSD null vector of the Liouvillian. Throws ValidationError
/// if the numerical null space is empty or has dimension > 1.
Operator steady_state(const Operator& H, const std::vector<Operator>& L);

}  // namespace qfilter
