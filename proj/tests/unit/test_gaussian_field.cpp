#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "qfilter/errors.hpp"
#include "qfilter/gaussian_field.hpp"

using namespace qfilter;
using qfilter::testing::random_field_params;
using qfilter::testing::random_valid_G;

namespace {

double max_abs(const Eigen::MatrixXcd& a) { return a.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd scalar1(Complex z) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = z;
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("gaussian-field");

TEST_CASE("vacuum and thermal specs validate; F has the stated block form") {
  for (int n : {1, 2, 3}) {
    GaussianFieldSpec vac = vacuum_field(n);
    CHECK(vac.is_vacuum);
    CHECK(max_abs(vac.F.topLeftCorner(n, n) - Eigen::MatrixXcd::Identity(n, n)) == 0.0);
    CHECK(max_abs(vac.F.bottomRightCorner(n, n)) == 0.0);
    CHECK(max_abs(vac.F.topRightCorner(n, n)) == 0.0);
  }

  GaussianFieldSpec th = validate_gaussian(scalar1(0.25), scalar1(0.0));
  CHECK(th.F(0, 0).real() == doctest::Approx(1.25));
  CHECK(th.F(1, 1).real() == doctest::Approx(0.25));
  CHECK(!th.is_vacuum);
}

TEST_CASE("pair correlation beyond N(N+1) is rejected with the F diagnosis") {
  // |M|^2 = 0.36 > N(N+1) = 0.3125
  CHECK_THROWS_WITH_AS(validate_gaussian(scalar1(0.25), scalar1(0.6)),
                       doctest::Contains("positive semidefinite"), ValidationError);
}

TEST_CASE("structure violations are rejected by name") {
  Eigen::MatrixXcd n(2, 2), m(2, 2);
  n << 0.5, Complex(0, 1), Complex(0, 1), 0.5;  // not Hermitian
  m.setZero();
  CHECK_THROWS_WITH_AS(validate_gaussian(n, m), doctest::Contains("Hermitian"),
                       ValidationError);

  n << 0.5, 0, 0, 0.5;
  m << 0, 0.1, -0.1, 0;  // antisymmetric
  CHECK_THROWS_WITH_AS(validate_gaussian(n, m), doctest::Contains("symmetric"),
                       ValidationError);

  CHECK_THROWS_AS(validate_gaussian(Eigen::MatrixXcd::Zero(2, 2), Eigen::MatrixXcd::Zero(3, 3)),
                  ValidationError);
}

TEST_CASE("factorization of vacuum is the exact identity triple") {
  GaussianFieldSpec vac = vacuum_field(2);
  ArakiWoodsCoefficients c = factorize(vac);
  CHECK(max_abs(c.c1 - Eigen::MatrixXcd::Identity(2, 2)) == 0.0);
  CHECK(max_abs(c.c2) == 0.0);
  CHECK(max_abs(c.c3) == 0.0);
}

TEST_CASE("factorization of the scalar thermal state") {
  GaussianFieldSpec th = validate_gaussian(scalar1(0.25), scalar1(0.0));
  ArakiWoodsCoefficients c = factorize(th);
  CHECK(c.c3(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(c.c2(0, 0)) < 1e-14);
  CHECK(c.c1(0, 0).real() == doctest::Approx(std::sqrt(1.25)).epsilon(1e-14));
  CHECK(c.residual_commutation < 1e-14);
}

TEST_CASE("factorization of squeezed vacuum r = 0.5 hits the Bogoliubov pair") {
  const double r = 0.5;
  const double sh = std::sinh(r), ch = std::cosh(r);
  GaussianFieldSpec sq = validate_gaussian(scalar1(sh * sh), scalar1(sh * ch));
  ArakiWoodsCoefficients c = factorize(sq);
  CHECK(c.c3(0, 0).real() == doctest::Approx(sh).epsilon(1e-12));
  CHECK(c.c2(0, 0).real() == doctest::Approx(ch).epsilon(1e-12));
  CHECK(std::abs(c.c1(0, 0)) < 1e-7);  // P = 1 + sinh^2 - cosh^2 = 0 up to roundoff
}

TEST_CASE("factorization invariants hold over random valid specs") {
  std::mt19937_64 rng(101);
  for (int n : {1, 2, 3}) {
    for (int trial = 0; trial < 12; ++trial) {
      auto [N, M] = random_field_params(n, rng);
      GaussianFieldSpec spec = validate_gaussian(N, M);
      ArakiWoodsCoefficients c = factorize(spec);
      CHECK(c.residual_commutation <= 1e-10);
      CHECK(c.residual_number <= 1e-10);
      CHECK(c.residual_pair <= 1e-10);
    }
  }
}

TEST_CASE("factorization cache returns identical matrices") {
  std::mt19937_64 rng(103);
  auto [N, M] = random_field_params(2, rng);
  GaussianFieldSpec spec = validate_gaussian(N, M);
  ArakiWoodsCoefficients a = factorize(spec);
  ArakiWoodsCoefficients b = factorize(spec);
  CHECK(max_abs(a.c1 - b.c1) == 0.0);
  CHECK(max_abs(a.c2 - b.c2) == 0.0);
  CHECK(max_abs(a.c3 - b.c3) == 0.0);
}

TEST_CASE("ito table blocks") {
  GaussianFieldSpec vac = vacuum_field(2);
  ItoTable tv = ito_table(vac);
  CHECK(max_abs(tv.db_dbdag - Eigen::MatrixXcd::Identity(2, 2)) == 0.0);
  CHECK(max_abs(tv.db_db) == 0.0);
  CHECK(max_abs(tv.dbdag_dbdag) == 0.0);
  CHECK(max_abs(tv.dbdag_db) == 0.0);

  GaussianFieldSpec th = validate_gaussian(scalar1(0.25), scalar1(0.0));
  ItoTable tt = ito_table(th);
  CHECK(tt.db_dbdag(0, 0).real() == doctest::Approx(1.25));
  CHECK(std::abs(tt.db_db(0, 0)) == 0.0);
  CHECK(std::abs(tt.dbdag_dbdag(0, 0)) == 0.0);
  CHECK(tt.dbdag_db(0, 0).real() == doctest::Approx(0.25));
}

TEST_CASE("ito table is reproduced by the factorization products") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 10; ++trial) {
    auto [N, M] = random_field_params(2, rng);
    GaussianFieldSpec spec = validate_gaussian(N, M);
    ArakiWoodsCoefficients c = factorize(spec);
    ItoTable t = ito_table(spec);
    CHECK(max_abs(c.c1 * c.c1.adjoint() + c.c2 * c.c2.adjoint() - t.db_dbdag) <= 1e-10);
    CHECK(max_abs(c.c2 * c.c3.transpose() - t.db_db) <= 1e-10);
    CHECK(max_abs(c.c3.conjugate() * c.c3.transpose() - t.dbdag_db) <= 1e-10);
    // entry (j,k) = conj(M(k,j))
    CHECK(max_abs(c.c3.conjugate() * c.c2.adjoint() - t.dbdag_dbdag) <= 1e-10);
  }
}

TEST_CASE("coupling lift: vacuum, thermal and squeezed qubits") {
  const Operator sm = pauli("minus");
  const Operator sp = pauli("plus");

  GaussianFieldSpec vac = vacuum_field(1);
  auto lifted = lift_coupling({sm}, factorize(vac));
  REQUIRE(lifted.size() == 2);
  CHECK(max_abs(lifted[0] - sm) == 0.0);
  CHECK(max_abs(lifted[1]) == 0.0);

  GaussianFieldSpec th = validate_gaussian(scalar1(0.25), scalar1(0.0));
  lifted = lift_coupling({sm}, factorize(th));
  CHECK(max_abs(lifted[0] - std::sqrt(1.25) * sm) < 1e-14);
  CHECK(max_abs(lifted[1] + 0.5 * sp) < 1e-14);

  const double r = 0.5;
  GaussianFieldSpec sq = validate_gaussian(scalar1(std::sinh(r) * std::sinh(r)),
                                           scalar1(std::sinh(r) * std::cosh(r)));
  lifted = lift_coupling({sm}, factorize(sq));
  CHECK(max_abs(lifted[0]) < 1e-7);
  CHECK(max_abs(lifted[1] - (std::cosh(r) * sm - std::sinh(r) * sp)) < 1e-12);
}

TEST_CASE("measurement lift: vacuum padding, thermal and squeezed scalars") {
  GaussianFieldSpec vac = vacuum_field(2);
  Eigen::MatrixXcd g(1, 2);
  g << Complex(1, 0), Complex(0, 1);
  Eigen::MatrixXcd gt = lift_measurement(g, factorize(vac));
  REQUIRE(gt.cols() == 4);
  CHECK(max_abs(gt.leftCols(2) - g) == 0.0);
  CHECK(max_abs(gt.rightCols(2)) == 0.0);

  GaussianFieldSpec th = validate_gaussian(scalar1(0.25), scalar1(0.0));
  gt = lift_measurement(Eigen::MatrixXcd::Ones(1, 1), factorize(th));
  CHECK(gt(0, 0).real() == doctest::Approx(std::sqrt(1.25)).epsilon(1e-14));
  CHECK(gt(0, 1).real() == doctest::Approx(0.5).epsilon(1e-14));

  const double r = 0.5;
  GaussianFieldSpec sq = validate_gaussian(scalar1(std::sinh(r) * std::sinh(r)),
                                           scalar1(std::sinh(r) * std::cosh(r)));
  gt = lift_measurement(Eigen::MatrixXcd::Ones(1, 1), factorize(sq));
  CHECK(std::abs(gt(0, 0)) < 1e-7);
  CHECK(gt(0, 1).real() == doctest::Approx(std::exp(r)).epsilon(1e-12));
}

TEST_CASE("lifted measurement covariance matches the Ito-table value") {
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2;
    auto [N, M] = random_field_params(n, rng);
    GaussianFieldSpec spec = validate_gaussian(N, M);
    ArakiWoodsCoefficients c = factorize(spec);
    Eigen::MatrixXcd g = random_valid_G(1 + int(trial % 2), n, rng);

    Eigen::MatrixXcd gt = lift_measurement(g, c);
    Eigen::MatrixXcd lhs = gt.conjugate() * gt.transpose();
    Eigen::MatrixXcd rhs =
        g.conjugate() * (Eigen::MatrixXcd::Identity(n, n) + N.transpose()) * g.transpose() +
        g * N * g.adjoint() + g.conjugate() * M * g.adjoint() +
        g * M.conjugate() * g.transpose();
    CHECK(max_abs(lhs - rhs) <= 1e-10);
  }
}

TEST_SUITE_END();
