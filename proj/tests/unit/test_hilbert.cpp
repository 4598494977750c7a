#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "generators.hpp"
#include "qfilter/errors.hpp"
#include "qfilter/hilbert.hpp"

using namespace qfilter;
using qfilter::testing::random_density;
using qfilter::testing::random_hermitian;

namespace {

// Independent index-loop implementation of the Liouvillian for duality and
// consistency oracles; no shared code with liouvillian_apply.
Operator naive_liouvillian(const Operator& h, const std::vector<Operator>& ls,
                           const Operator& rho) {
  const Eigen::Index d = rho.rows();
  auto mul = [d](const Operator& a, const Operator& b) {
    Operator c = Operator::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < d; ++k) c(i, j) += a(i, k) * b(k, j);
    return c;
  };
  const Complex im(0, 1);
  Operator out = im * (mul(rho, h) - mul(h, rho));
  for (const auto& l : ls) {
    Operator ld = l.adjoint();
    Operator aa = mul(ld, l);
    out += mul(mul(l, rho), ld) - 0.5 * (mul(aa, rho) + mul(rho, aa));
  }
  return out;
}

Eigen::VectorXcd vec_of(const Operator& a) {
  return Eigen::Map<const Eigen::VectorXcd>(a.data(), a.size());
}

}  // namespace

TEST_SUITE_BEGIN("hilbert");

TEST_CASE("annihilation operator entries and truncation") {
  Operator a2 = annihilation_op(2);
  CHECK(a2(0, 1) == Complex(1, 0));
  CHECK(a2(0, 0) == Complex(0, 0));
  CHECK(a2(1, 0) == Complex(0, 0));
  // ladder in the number basis (index = occupation); same matrix as the
  // spin raising operator because the spin basis puts the excited state first
  CHECK(a2 == pauli("minus").adjoint());

  Operator a3 = annihilation_op(3);
  CHECK(a3(0, 1) == Complex(1, 0));
  CHECK(a3(1, 2).real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(a3.cwiseAbs().sum() == doctest::Approx(1.0 + std::sqrt(2.0)));

  // truncation artifact confined to the last diagonal entry of [a, a^dag]
  Operator a4 = annihilation_op(4);
  Operator comm = a4 * a4.adjoint() - a4.adjoint() * a4;
  Eigen::VectorXcd expected(4);
  expected << 1, 1, 1, -3;
  CHECK((comm - Eigen::MatrixXcd(expected.asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(annihilation_op(1), ValidationError);
}

TEST_CASE("pauli matrices and basis convention (index 0 = excited)") {
  CHECK(pauli("z")(0, 0) == Complex(1, 0));
  CHECK(pauli("z")(1, 1) == Complex(-1, 0));
  CHECK(pauli("minus")(1, 0) == Complex(1, 0));  // |g><e|
  CHECK(pauli("minus")(0, 1) == Complex(0, 0));
  CHECK(pauli("plus") == pauli("minus").adjoint());
  CHECK((pauli("x") * pauli("x") - identity_op(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((pauli("y") * pauli("y") - identity_op(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(pauli("w"), ValidationError);
}

TEST_CASE("lindblad generator on hand-computed cases") {
  const Operator sm = pauli("minus");
  const Operator id = identity_op(2);
  const Operator zero = Operator::Zero(2, 2);

  // identity is fixed by any Lindbladian
  CHECK(lindblad_heisenberg(zero, {sm}, id).cwiseAbs().maxCoeff() < 1e-15);

  // L(sigma_z) = diag(-2, 0) for decay channel sigma_minus
  Operator lz = lindblad_heisenberg(zero, {sm}, pauli("z"));
  CHECK(lz(0, 0).real() == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(std::abs(lz(1, 1)) < 1e-15);
  CHECK(std::abs(lz(0, 1)) < 1e-15);

  // closed-system limit: -i[X, H]
  std::mt19937_64 rng(7);
  Operator h = random_hermitian(3, rng);
  Operator x = testing::random_ginibre(3, 3, rng);
  Operator expected = Complex(0, -1) * (x * h - h * x);
  CHECK((lindblad_heisenberg(h, {}, x) - expected).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(lindblad_heisenberg(x, {sm}, x), ValidationError);  // non-Hermitian H
  CHECK_THROWS_AS(lindblad_heisenberg(h, {sm}, x), ValidationError);  // dim mismatch
}

TEST_CASE("liouvillian: dark state, decay, trace preservation") {
  const Operator sm = pauli("minus");
  const Operator zero = Operator::Zero(2, 2);

  Operator ground = Operator::Zero(2, 2);
  ground(1, 1) = 1.0;
  CHECK(liouvillian_apply(zero, {sm}, ground).cwiseAbs().maxCoeff() < 1e-15);

  Operator excited = Operator::Zero(2, 2);
  excited(0, 0) = 1.0;
  Operator out = liouvillian_apply(zero, {sm}, excited);
  CHECK(out(0, 0).real() == doctest::Approx(-1.0));
  CHECK(out(1, 1).real() == doctest::Approx(1.0));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Operator rho = random_density(4, rng);
    Operator h = random_hermitian(4, rng);
    std::vector<Operator> ls = {testing::random_ginibre(4, 4, rng),
                                testing::random_ginibre(4, 4, rng)};
    Operator lrho = liouvillian_apply(h, ls, rho);
    const double scale = 1.0 + lrho.cwiseAbs().maxCoeff();
    CHECK(std::abs(lrho.trace()) < 1e-12 * scale);
    CHECK(hermiticity_error(lrho) < 1e-12 * scale);
  }
}

TEST_CASE("trace duality of the two generator pictures") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    Operator h = random_hermitian(3, rng);
    std::vector<Operator> ls = {testing::random_ginibre(3, 3, rng)};
    Operator x = testing::random_ginibre(3, 3, rng);
    Operator rho = random_density(3, rng);
    const Complex lhs = (lindblad_heisenberg(h, ls, x) * rho).trace();
    const Complex rhs = (x * naive_liouvillian(h, ls, rho)).trace();
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("liouvillian matrix agrees with direct application") {
  std::mt19937_64 rng(17);
  Operator h = random_hermitian(3, rng);
  std::vector<Operator> ls = {testing::random_ginibre(3, 3, rng)};
  SuperoperatorMatrix sup = liouvillian_matrix(h, ls);
  for (int trial = 0; trial < 20; ++trial) {
    Operator rho = random_hermitian(3, rng);
    Eigen::VectorXcd direct = vec_of(naive_liouvillian(h, ls, rho));
    CHECK((sup * vec_of(rho) - direct).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("liouvillian matrix spectrum for the decay channel") {
  SuperoperatorMatrix sup = liouvillian_matrix(Operator::Zero(2, 2), {pauli("minus")});
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(sup);
  Eigen::VectorXd re = es.eigenvalues().real();
  std::sort(re.data(), re.data() + re.size());
  CHECK(re(0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(re(1) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(re(2) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::abs(re(3)) < 1e-12);
  CHECK(es.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("closed-system superoperator spectrum is purely imaginary") {
  std::mt19937_64 rng(19);
  Operator h = random_hermitian(3, rng);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(liouvillian_matrix(h, {}));
  CHECK(es.eigenvalues().real().cwiseAbs().maxCoeff() < 1e-10);
  // trace-preservation null direction always present
  CHECK(es.eigenvalues().cwiseAbs().minCoeff() < 1e-10);
}

TEST_CASE("steady state: dark state, thermal balance, degenerate rejection") {
  const Operator sm = pauli("minus");
  const Operator sp = pauli("plus");
  const Operator zero = Operator::Zero(2, 2);

  Operator rho = steady_state(zero, {sm});
  CHECK(rho(1, 1).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(rho(0, 0)) < 1e-12);

  // detailed balance: p_e = N/(1+2N) = 1/6 at N = 0.25
  const double n = 0.25;
  Operator rho_th = steady_state(zero, {std::sqrt(1.0 + n) * sm, std::sqrt(n) * sp});
  CHECK(rho_th(0, 0).real() == doctest::Approx(n / (1.0 + 2.0 * n)).epsilon(1e-10));

  CHECK_THROWS_AS(steady_state(zero, {}), ValidationError);
}

TEST_SUITE_END();
