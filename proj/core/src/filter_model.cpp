#include "qfilter/filter_model.hpp"

#include <Eigen/Cholesky>
#include <string>

#include "qfilter/errors.hpp"
#include "qfilter/numeric.hpp"

namespace qfilter {

namespace {

void validate_system(const SystemModel& s, int n) {
  if (s.dim < 2) throw ValidationError("system", "Hilbert-space dimension must be >= 2");
  if (s.H.rows() != s.dim || s.H.cols() != s.dim)
    throw ValidationError("system", "Hamiltonian is not dim x dim");
  const double herr = hermiticity_error(s.H);
  if (herr > kHermitianInputTol)
    throw ValidationError("system", "Hamiltonian not Hermitian (max deviation " +
                                        std::to_string(herr) + ")");
  if (int(s.couplings.size()) != n)
    throw ValidationError("system", "coupling vector has length " +
                                        std::to_string(s.couplings.size()) +
                                        " but the field has " + std::to_string(n) + " channels");
  for (const auto& l : s.couplings)
    if (l.rows() != s.dim || l.cols() != s.dim)
      throw ValidationError("system", "coupling operator is not dim x dim");

  if (s.rho0.rows() != s.dim || s.rho0.cols() != s.dim)
    throw ValidationError("system", "initial state is not dim x dim");
  if (hermiticity_error(s.rho0) > 1e-10)
    throw ValidationError("system", "initial state is not Hermitian");
  if (std::abs(s.rho0.trace().real() - 1.0) > 1e-9 || std::abs(s.rho0.trace().imag()) > 1e-9)
    throw ValidationError("system", "initial state does not have unit trace");
  if (min_eigenvalue(s.rho0) < -1e-8)
    throw ValidationError("system", "initial state is not positive semidefinite");
}

}  // namespace

void assemble_gains(FilterModel& model, const Eigen::MatrixXcd& W) {
  const int nch = model.meas.nch;
  const int m = model.meas.m;
  const int d = model.system.dim;

  // L_W = W^{-T} L_eff
  Eigen::MatrixXcd winv_t = W.transpose().partialPivLu().solve(
      Eigen::MatrixXcd::Identity(nch, nch));
  model.lw.assign(nch, Operator::Zero(d, d));
  for (int k = 0; k < nch; ++k)
    for (int l = 0; l < nch; ++l) model.lw[k] += winv_t(k, l) * model.channels[l];

  const Eigen::MatrixXd& K = model.completion.K;
  model.gain_ops.assign(m, Operator::Zero(d, d));
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < nch; ++k)
      if (K(k, j) != 0.0) model.gain_ops[j] += K(k, j) * model.lw[k];

  const Eigen::MatrixXd a = model.completion.Sigma * K.transpose();  // m x nch
  model.drift_ops.assign(m, Operator::Zero(d, d));
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < nch; ++l)
      if (a(j, l) != 0.0) model.drift_ops[j] += a(j, l) * (model.lw[l] + model.lw[l].adjoint());

  Eigen::LLT<Eigen::MatrixXd> llt(model.completion.Sigma);
  if (llt.info() != Eigen::Success)
    throw ValidationError("conditioning-gain",
                          "noise covariance Sigma is not positive definite");
  model.sigma_chol = llt.matrixL();
}

FilterModel build_filter_model(const SystemModel& system, const GaussianFieldSpec& field,
                               const Eigen::MatrixXcd& G, FieldMode mode) {
  if (field.n < 1) throw ValidationError("gaussian-spec", "field spec not validated");
  validate_system(system, field.n);
  if (G.cols() != field.n)
    throw ValidationError("measurement", "G has " + std::to_string(G.cols()) +
                                             " columns but the field has " +
                                             std::to_string(field.n) + " channels");

  FilterModel model;
  model.system = system;
  model.field = field;
  model.mode = mode;
  model.G = G;
  model.m = int(G.rows());

  if (mode == FieldMode::ExplicitVacuum) {
    if (!field.is_vacuum)
      throw ValidationError("gaussian-spec",
                            "explicit-vacuum mode requires N = 0 and M = 0 exactly");
    model.aw.c1 = Eigen::MatrixXcd::Identity(field.n, field.n);
    model.aw.c2 = Eigen::MatrixXcd::Zero(field.n, field.n);
    model.aw.c3 = Eigen::MatrixXcd::Zero(field.n, field.n);
    model.channels = system.couplings;
    model.g_eff = G;
  } else {
    model.aw = factorize(field);
    model.channels = lift_coupling(system.couplings, model.aw);
    model.g_eff = lift_measurement(G, model.aw);
  }

  model.channel_sq.reserve(model.channels.size());
  for (const auto& l : model.channels) model.channel_sq.push_back(l.adjoint() * l);

  model.meas = validate_measurement(model.g_eff, int(model.g_eff.cols()));
  model.completion = complete_and_gain(model.meas);
  assemble_gains(model, model.completion.W);
  return model;
}

}  // namespace qfilter
