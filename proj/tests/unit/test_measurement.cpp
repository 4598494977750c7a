#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "qfilter/errors.hpp"
#include "qfilter/measurement.hpp"
#include "qfilter/numeric.hpp"

using namespace qfilter;
using qfilter::testing::random_ginibre;
using qfilter::testing::random_valid_G;

namespace {

Eigen::MatrixXcd row1(std::initializer_list<Complex> vals) {
  Eigen::MatrixXcd g(1, Eigen::Index(vals.size()));
  Eigen::Index j = 0;
  for (Complex v : vals) g(0, j++) = v;
  return g;
}

}  // namespace

TEST_SUITE_BEGIN("measurement");

TEST_CASE("identity and scalar measurements validate") {
  for (int n : {1, 2, 3}) {
    MeasurementSpec spec = validate_measurement(Eigen::MatrixXcd::Identity(n, n), n);
    CHECK(spec.m == n);
    CHECK(spec.commutation_residual < 1e-14);
  }
  // any nonzero single row is admissible
  CHECK_NOTHROW(validate_measurement(row1({Complex(0.3, -0.7), Complex(0, 2)}), 2));
  CHECK_THROWS_AS(validate_measurement(row1({Complex(0, 0), Complex(0, 0)}), 2),
                  ValidationError);
}

TEST_CASE("measuring both quadratures of one channel is rejected") {
  Eigen::MatrixXcd g(2, 2);
  g << Complex(1, 0), Complex(0, 0), Complex(0, 1), Complex(0, 0);
  // (G G^*)_{12} = -i is not real; commutation residual 2
  CHECK_THROWS_WITH_AS(validate_measurement(g, 2), doctest::Contains("self-commutation"),
                       ValidationError);
}

TEST_CASE("rank-deficient measurements are rejected") {
  Eigen::MatrixXcd g(2, 2);
  g << 1, 0, 2, 0;  // [G^# G] rank 1
  CHECK_THROWS_WITH_AS(validate_measurement(g, 2), doctest::Contains("rank"), ValidationError);
  CHECK_THROWS_WITH_AS(validate_measurement(Eigen::MatrixXcd::Identity(3, 2), 2),
                       doctest::Contains("too many"), ValidationError);
}

TEST_CASE("acceptance is equivalent to G G^* being entrywise real") {
  std::mt19937_64 rng(211);
  int accepted = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Eigen::MatrixXcd g = trial % 3 == 0 ? random_valid_G(2, 3, rng)
                                        : Eigen::MatrixXcd(random_ginibre(2, 3, rng));
    const bool gg_real = max_imag(g * g.adjoint()) <= 1e-12;
    const bool full_rank = matrix_rank(g) == 2;
    bool ok;
    try {
      validate_measurement(g, 3);
      ok = true;
    } catch (const ValidationError&) {
      ok = false;
    }
    // [G^# G] rank never binds here: it is at least rank(G).
    CHECK(ok == (gg_real && full_rank));
    accepted += ok;
  }
  CHECK(accepted >= 20);  // every generator-provided G must land in the accept branch
}

TEST_CASE("quadrature picture on hand cases and recomposition") {
  Eigen::MatrixXd t = to_quadrature(row1({Complex(1, 0)}));
  CHECK(t(0, 0) == 2.0);
  CHECK(t(0, 1) == 0.0);

  t = to_quadrature(row1({Complex(0, 1)}));
  CHECK(t(0, 0) == 0.0);
  CHECK(t(0, 1) == 2.0);

  const double s = 1.0 / std::sqrt(2.0);
  t = to_quadrature(row1({Complex(s, s)}));
  CHECK(t(0, 0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(t(0, 1) == doctest::Approx(std::sqrt(2.0)));

  std::mt19937_64 rng(223);
  Eigen::MatrixXcd g = random_ginibre(2, 3, rng);
  Eigen::MatrixXd q = to_quadrature(g);
  Eigen::MatrixXcd back = 0.5 * q.leftCols(3) + Complex(0, 0.5) * q.rightCols(3);
  CHECK((back - g).cwiseAbs().maxCoeff() == 0.0);  // exact: halves of doubles
}

TEST_CASE("completion of [1, 0] in two channels is the identity") {
  MeasurementSpec spec = validate_measurement(row1({Complex(1, 0), Complex(0, 0)}), 2);
  Eigen::MatrixXcd w = complete_measurement(spec);
  CHECK((w - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("completion of the circular row (1, i)/sqrt(2)") {
  const double s = 1.0 / std::sqrt(2.0);
  MeasurementSpec spec = validate_measurement(row1({Complex(s, 0), Complex(0, s)}), 2);
  Eigen::MatrixXcd w = complete_measurement(spec);
  CHECK(max_imag(w * w.adjoint()) < 1e-12);
  CHECK(std::abs(w.determinant()) > 0.1);
  CHECK((w.row(0) - spec.G.row(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w.row(1).norm() == doctest::Approx(1.0));  // completion rows are unit norm
}

TEST_CASE("m = nch returns W = G without completion rows") {
  std::mt19937_64 rng(227);
  Eigen::MatrixXcd g = random_valid_G(3, 3, rng);
  MeasurementSpec spec = validate_measurement(g, 3);
  CHECK((complete_measurement(spec) - g).cwiseAbs().maxCoeff() == 0.0);
  CompletedMeasurement cm = complete_and_gain(spec);
  CHECK((cm.K - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gain on the standard two-channel example") {
  MeasurementSpec spec = validate_measurement(row1({Complex(1, 0), Complex(0, 0)}), 2);
  CompletedMeasurement cm = complete_and_gain(spec);
  CHECK(cm.K.rows() == 2);
  CHECK(cm.K(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(cm.K(1, 0)) < 1e-14);
  CHECK(cm.Sigma(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("random completions satisfy all invariants") {
  std::mt19937_64 rng(229);
  for (int trial = 0; trial < 40; ++trial) {
    const int nch = 2 + trial % 3;
    const int m = 1 + int(rng() % std::uint64_t(nch));
    Eigen::MatrixXcd g = random_valid_G(m, nch, rng);
    MeasurementSpec spec = validate_measurement(g, nch);
    CompletedMeasurement cm = complete_and_gain(spec);

    CHECK(max_imag(cm.W * cm.W.adjoint()) <= 1e-10);
    CHECK(cm.condition_number < 1e8);
    CHECK((cm.W.topRows(m) - g).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cm.K.topRows(m) - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-10);

    // Sigma = G^# G^T = G G^* (real symmetric PSD)
    CHECK((cm.Sigma - (g * g.adjoint()).real()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((cm.Sigma - cm.Sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cm.Sigma);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("Monte Carlo regression of Z_W on Z recovers the gain") {
  std::mt19937_64 rng(233);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 3; ++rep) {
    const int nch = 2 + rep;
    const int m = 1 + rep % 2;
    Eigen::MatrixXcd g = random_valid_G(m, nch, rng);
    CompletedMeasurement cm = complete_and_gain(validate_measurement(g, nch));

    const Eigen::MatrixXd tw = to_quadrature(cm.W);
    const Eigen::MatrixXd tg = to_quadrature(g);
    const int samples = 20000;
    Eigen::MatrixXd zw(samples, nch), z(samples, m);
    Eigen::VectorXd xi(2 * nch);
    for (int s = 0; s < samples; ++s) {
      for (int j = 0; j < 2 * nch; ++j) xi(j) = normal(rng);
      zw.row(s) = (0.5 * tw * xi).transpose();
      z.row(s) = (0.5 * tg * xi).transpose();
    }
    const Eigen::MatrixXd xtx = z.transpose() * z;
    const Eigen::MatrixXd xtx_inv = xtx.inverse();
    const Eigen::MatrixXd k_hat = (xtx_inv * (z.transpose() * zw)).transpose();

    for (int i = 0; i < nch; ++i) {
      const Eigen::VectorXd resid = zw.col(i) - z * k_hat.row(i).transpose();
      const double s2 = resid.squaredNorm() / double(samples - m);
      for (int j = 0; j < m; ++j) {
        const double se = std::sqrt(s2 * xtx_inv(j, j));
        CHECK(std::abs(k_hat(i, j) - cm.K(i, j)) <= 3.0 * se + 1e-12);
      }
    }
  }
}

TEST_SUITE_END();
