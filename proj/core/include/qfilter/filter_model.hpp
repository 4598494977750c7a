#pragma once

// Assembly of the complete filter model. The pipeline is
//
//   factorize -> lift_coupling -> lift_measurement -> validate_measurement
//   -> complete_measurement -> conditioning_gain -> L_W = W^{-T} L_eff,
//
// run either on the raw (G, L) pair for explicit vacuum fields or on the
// lifted (Gtilde, L_{N,M}) pair for general Gaussian fields. Everything the
// integrator touches per step is precomputed here:
//
//   gain_ops[j]  = sum_k K(k,j) L_W[k]                      (filter gain)
//   drift_ops[j] = sum_l (Sigma K^T)(j,l) (L_W[l] + L_W[l]^*)  (record drift)
//
// Both contractions are completion-invariant: any admissible W yields the
// same operators.

#include <Eigen/Dense>
#include <vector>

#include "qfilter/gaussian_field.hpp"
#include "qfilter/hilbert.hpp"
#include "qfilter/measurement.hpp"

namespace qfilter {

struct SystemModel {
  int dim = 0;
  Operator H;
  std::vector<Operator> couplings;  // length n
  Operator rho0;
};

enum class FieldMode {
  ExplicitVacuum,  // requires N = M = 0; filter built on n channels
  Gaussian,        // doubled-vacuum representation; filter built on 2n channels
};

struct FilterModel {
  SystemModel system;
  GaussianFieldSpec field;
  ArakiWoodsCoefficients aw;  // identity triple in explicit-vacuum mode
  FieldMode mode = FieldMode::ExplicitVacuum;
  Eigen::MatrixXcd G;  // original m x n measurement

  int m = 0;                            // measurement count
  std::vector<Operator> channels;       // L_eff driving the Liouvillian
  std::vector<Operator> channel_sq;     // L^* L per channel
  Eigen::MatrixXcd g_eff;               // G or Gtilde
  MeasurementSpec meas;                 // validated spec of g_eff
  CompletedMeasurement completion;      // W, K, Sigma
  std::vector<Operator> lw;             // L_W
  std::vector<Operator> gain_ops;       // m entries
  std::vector<Operator> drift_ops;      // m entries, Hermitian
  Eigen::MatrixXd sigma_chol;           // lower Cholesky factor of Sigma
};

/// Runs the full pipeline. Component failures propagate as ValidationError
/// with the stage name of the pipeline step that rejected the input.
FilterModel build_filter_model(const SystemModel& system, const GaussianFieldSpec& field,
                               const Eigen::MatrixXcd& G,
                               FieldMode mode = FieldMode::Gaussian);

/// Rebuilds L_W and the gain/drift contractions of `model` from an explicit
/// completion W of model.g_eff. Used to check completion independence.
void assemble_gains(FilterModel& model, const Eigen::MatrixXcd& W);

}  // namespace qfilter
