#pragma once

// Minimal operator-expression grammar used by model files:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary ('*' unary)*
//   unary   := ('-' | '+')* postfix
//   postfix := primary ("'")*                  adjoint (conjugate for scalars)
//   primary := NUMBER | NUMBER 'i' | 'i'
//            | IDENT ('[' INT ']')?            subsystem-addressed primitive
//            | '(' expr ')'
//
// Primitives: identity, annihilator, creator, number, sigma_x, sigma_y,
// sigma_z, sigma_plus, sigma_minus. With several subsystems a primitive must
// carry a subsystem index and is embedded by tensoring identities around it;
// sigma_* require the addressed subsystem to be two-level. A scalar combined
// with an operator is promoted to scalar * identity.

#include <string>
#include <vector>

#include "qfilter/hilbert.hpp"

namespace qfilter {

/// Evaluates an expression over the given subsystem dimensions; the result
/// acts on the full tensor-product space. Throws ParseError with position
/// information on malformed input, unknown primitives or bad indices.
Operator parse_operator_expr(const std::string& text, const std::vector<int>& dims);

}  // namespace qfilter
