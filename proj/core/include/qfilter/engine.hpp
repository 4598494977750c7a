#pragma once

// Numerical integration of the filtering equations.
//
//   master:  rho' = L*(rho),                    classical RK4
//   SME:     drho = L*(rho)dt + sum_j gain_j(rho) dnu_j,   Euler-Maruyama
//   Zakai:   dsig = L*(sig)dt + sum_j (sig O_j^* + O_j sig) dY_j   (linear)
//
// with gain_j(rho) = rho O_j^* + O_j rho - Tr(rho(O_j^* + O_j)) rho and
// O_j the precomputed gain operators of the FilterModel. The innovation
// increments carry covariance Sigma dt; the simulated record is
// dY = drift(rho) dt + dnu with drift_j = Tr(rho D_j).
//
// Each SME step renormalizes the trace (the increment is traceless in exact
// arithmetic) and projects onto the PSD cone when the smallest eigenvalue
// falls below -1e-8.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qfilter/filter_model.hpp"

namespace qfilter {

inline constexpr double kEigenvalueFloor = -1e-8;

struct StepDiagnostics {
  double trace_drift = 0.0;  // |Tr(rho') - 1| before renormalization
  double herm_error = 0.0;   // Hermiticity deviation before repair
  double min_eig = 0.0;      // smallest eigenvalue before projection
  double purity = 0.0;       // Tr(rho^2) after repair
  bool projected = false;
};

struct TrajectoryDiagnostics {
  double max_trace_drift = 0.0;
  double max_herm_error = 0.0;
  double min_eig_seen = 0.0;      // before projection
  double min_eig_post = 0.0;      // after projection
  double max_purity = 0.0;
  long projections = 0;

  void absorb(const StepDiagnostics& s);
  void absorb(const TrajectoryDiagnostics& other);
};

/// Conditional state plus accumulated record, advanced step by step.
struct FilterState {
  double t = 0.0;
  Operator rho_hat;
  Eigen::VectorXd y_cum;
  Eigen::VectorXd nu_cum;
};

struct SimOptions {
  double tmax = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, Operator>> observables;
  std::vector<double> snapshot_times;
  bool record_increments = true;  // keep per-step dY and cumulative nu series
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  double dt = 0.0;
  double tmax = 0.0;
  long steps = 0;
  bool stochastic = true;  // false for deterministic master solves
  std::vector<double> times;                        // steps + 1 grid points
  std::vector<std::string> observable_names;
  std::vector<std::vector<Complex>> observables;    // [time][obs]
  std::vector<Eigen::VectorXd> dY;                  // [time], row 0 = 0
  std::vector<Eigen::VectorXd> nu;                  // cumulative innovations
  Eigen::VectorXd nu_final;                         // nu at tmax
  Eigen::MatrixXd quadratic_variation;              // sum of dnu dnu^T
  std::vector<std::pair<double, Operator>> snapshots;
  TrajectoryDiagnostics diag;
};

struct EnsembleOptions {
  SimOptions sim;
  int count = 2;
  int threads = 0;  // 0 = QFILTER_THREADS env or hardware concurrency
};

struct EnsembleResult {
  int count = 0;
  double dt = 0.0;
  double tmax = 0.0;
  std::vector<double> times;
  std::vector<std::string> observable_names;
  std::vector<std::vector<Complex>> obs_mean;  // [time][obs]
  std::vector<std::vector<double>> obs_se;     // [time][obs]

  std::vector<double> snapshot_times;
  std::vector<Operator> rho_mean;           // per snapshot
  std::vector<Eigen::MatrixXd> rho_se;      // entrywise standard error

  Eigen::VectorXd nu_final_mean;
  Eigen::VectorXd nu_final_se;
  Eigen::MatrixXd qv_mean;   // ensemble mean of sum dnu dnu^T
  Eigen::MatrixXd sigma_T;   // Sigma * tmax reference

  TrajectoryDiagnostics diag;  // worst case across trajectories

  // Filled by compare_with_master().
  bool has_master = false;
  std::vector<double> master_dev_max;    // per snapshot, max entry |rho_mean - rho_master|
  std::vector<double> master_ratio_max;  // per snapshot, max entry deviation / SE
};

/// One classical RK4 step of the master equation.
Operator master_step(const FilterModel& model, const Operator& rho, double dt);

/// One Euler-Maruyama step of the stochastic master equation driven by the
/// innovation increment dnu. Throws IntegrationError when the state cannot
/// be repaired.
Operator sme_step(const FilterModel& model, const Operator& rho_hat,
                  const Eigen::VectorXd& dnu, double dt, StepDiagnostics* diag = nullptr,
                  long step = -1);

/// One Euler step of the linear (unnormalized) Zakai equation driven by the
/// raw measurement increment dY.
Operator zakai_step(const FilterModel& model, const Operator& sigma_un,
                    const Eigen::VectorXd& dY, double dt, long step = -1);

/// drift_j = Tr(rho D_j) = (Sigma K^T Tr(rho (L_W^# + L_W)))_j, all real.
Eigen::VectorXd measurement_drift(const FilterModel& model, const Operator& rho);

/// Simulates one measurement record and the conditional state along it.
/// Deterministic function of the seed.
TrajectoryRecord simulate_trajectory(const FilterModel& model, const SimOptions& opts);

/// Deterministic master-equation solve on the same grid/recording schema
/// (no dY/nu columns).
TrajectoryRecord master_solve(const FilterModel& model, const SimOptions& opts);

/// Runs `count` trajectories with seeds base_seed + index and reduces them
/// in index order, so results do not depend on the thread count.
EnsembleResult ensemble_average(const FilterModel& model, const EnsembleOptions& opts);

/// Solves the master equation on the ensemble grid and fills the per-snapshot
/// deviation statistics of `result`.
void compare_with_master(EnsembleResult& result, const FilterModel& model);

}  // namespace qfilter
