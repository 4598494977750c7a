#include "qfilter/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "qfilter/errors.hpp"
#include "qfilter/numeric.hpp"

namespace qfilter {

void TrajectoryDiagnostics::absorb(const StepDiagnostics& s) {
  max_trace_drift = std::max(max_trace_drift, s.trace_drift);
  max_herm_error = std::max(max_herm_error, s.herm_error);
  min_eig_seen = std::min(min_eig_seen, s.min_eig);
  min_eig_post = std::min(min_eig_post, s.projected ? 0.0 : s.min_eig);
  max_purity = std::max(max_purity, s.purity);
  if (s.projected) ++projections;
}

void TrajectoryDiagnostics::absorb(const TrajectoryDiagnostics& o) {
  max_trace_drift = std::max(max_trace_drift, o.max_trace_drift);
  max_herm_error = std::max(max_herm_error, o.max_herm_error);
  min_eig_seen = std::min(min_eig_seen, o.min_eig_seen);
  min_eig_post = std::min(min_eig_post, o.min_eig_post);
  max_purity = std::max(max_purity, o.max_purity);
  projections += o.projections;
}

namespace {

Operator apply_liouvillian(const FilterModel& model, const Operator& rho) {
  const Complex im(0, 1);
  Operator out = im * (rho * model.system.H - model.system.H * rho);
  for (size_t k = 0; k < model.channels.size(); ++k) {
    const Operator& l = model.channels[k];
    const Operator& aa = model.channel_sq[k];
    out += l * rho * l.adjoint() - 0.5 * (aa * rho + rho * aa);
  }
  return out;
}

long resolve_steps(double tmax, double dt) {
  if (!(tmax > 0.0) || !(dt > 0.0) || dt > tmax)
    throw ValidationError("simulation", "need 0 < dt <= tmax");
  const long steps = std::lround(tmax / dt);
  if (steps < 1 || std::abs(double(steps) * dt - tmax) > 1e-9 * std::max(1.0, tmax))
    throw ValidationError("simulation", "tmax must be an integer multiple of dt");
  return steps;
}

std::vector<long> snapshot_indices(const std::vector<double>& wanted, double dt, long steps) {
  std::vector<long> idx;
  for (double t : wanted) {
    long k = std::lround(t / dt);
    k = std::clamp(k, 0L, steps);
    if (std::find(idx.begin(), idx.end(), k) == idx.end()) idx.push_back(k);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QFILTER_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? int(hc) : 1;
}

}  // namespace

Operator master_step(const FilterModel& model, const Operator& rho, double dt) {
  const Operator k1 = apply_liouvillian(model, rho);
  const Operator k2 = apply_liouvillian(model, rho + 0.5 * dt * k1);
  const Operator k3 = apply_liouvillian(model, rho + 0.5 * dt * k2);
  const Operator k4 = apply_liouvillian(model, rho + dt * k3);
  return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::VectorXd measurement_drift(const FilterModel& model, const Operator& rho) {
  Eigen::VectorXd drift(model.m);
  for (int j = 0; j < model.m; ++j)
    drift(j) = (rho * model.drift_ops[j]).trace().real();
  return drift;
}

Operator sme_step(const FilterModel& model, const Operator& rho_hat,
                  const Eigen::VectorXd& dnu, double dt, StepDiagnostics* diag, long step) {
  if (dnu.size() != model.m || !dnu.allFinite())
    throw IntegrationError("innovation increment is non-finite or mis-sized", step);

  Operator rho = rho_hat + dt * apply_liouvillian(model, rho_hat);
  for (int j = 0; j < model.m; ++j) {
    if (dnu(j) == 0.0) continue;
    const Operator& o = model.gain_ops[j];
    Operator g = rho_hat * o.adjoint() + o * rho_hat;
    // Tr(rho(O^* + O)) is real for Hermitian rho; drop the roundoff imag part.
    const double expect = g.trace().real();
    g -= expect * rho_hat;
    rho += dnu(j) * g;
  }

  if (!rho.allFinite())
    throw IntegrationError("state became non-finite", step);

  StepDiagnostics sd;
  const Complex tr = rho.trace();
  sd.trace_drift = std::abs(tr - Complex(1.0, 0.0));
  if (tr.real() <= 0.0)
    throw IntegrationError("state trace collapsed to " + std::to_string(tr.real()), step);
  rho /= tr.real();

  sd.herm_error = hermiticity_error(rho);
  rho = 0.5 * (rho + rho.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<Operator> es(rho);
  sd.min_eig = es.eigenvalues().minCoeff();
  if (sd.min_eig < kEigenvalueFloor) {
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const double total = ev.sum();
    if (total <= 0.0)
      throw IntegrationError("state has no positive eigenvalues after projection", step);
    ev /= total;
    rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    sd.projected = true;
  }

  sd.purity = rho.squaredNorm();  // Tr(rho^2) for Hermitian rho
  if (diag) *diag = sd;
  return rho;
}

Operator zakai_step(const FilterModel& model, const Operator& sigma_un,
                    const Eigen::VectorXd& dY, double dt, long step) {
  if (dY.size() != model.m || !dY.allFinite())
    throw IntegrationError("measurement increment is non-finite or mis-sized", step);

  Operator out = sigma_un + dt * apply_liouvillian(model, sigma_un);
  for (int j = 0; j < model.m; ++j) {
    if (dY(j) == 0.0) continue;
    const Operator& o = model.gain_ops[j];
    out += dY(j) * (sigma_un * o.adjoint() + o * sigma_un);
  }
  if (!out.allFinite()) throw IntegrationError("unnormalized state became non-finite", step);
  if (out.trace().real() <= 0.0)
    throw IntegrationError("normalization breakdown: Tr(sigma) = " +
                               std::to_string(out.trace().real()), step);
  return out;
}

namespace {

TrajectoryRecord init_record(const FilterModel& model, const SimOptions& opts, long steps,
                             bool stochastic) {
  TrajectoryRecord rec;
  rec.seed = opts.seed;
  rec.dt = opts.dt;
  rec.tmax = opts.tmax;
  rec.steps = steps;
  rec.stochastic = stochastic;
  rec.times.resize(steps + 1);
  for (long k = 0; k <= steps; ++k) rec.times[k] = double(k) * opts.dt;
  rec.observable_names.reserve(opts.observables.size());
  for (const auto& [name, op] : opts.observables) {
    if (op.rows() != model.system.dim || op.cols() != model.system.dim)
      throw ValidationError("simulation", "observable '" + name + "' is not dim x dim");
    rec.observable_names.push_back(name);
  }
  rec.observables.assign(steps + 1, std::vector<Complex>(opts.observables.size()));
  rec.nu_final = Eigen::VectorXd::Zero(model.m);
  rec.quadratic_variation = Eigen::MatrixXd::Zero(model.m, model.m);
  return rec;
}

void record_observables(const FilterModel&, const SimOptions& opts, const Operator& rho,
                        std::vector<Complex>& row) {
  for (size_t j = 0; j < opts.observables.size(); ++j)
    row[j] = (rho * opts.observables[j].second).trace();
}

}  // namespace

TrajectoryRecord simulate_trajectory(const FilterModel& model, const SimOptions& opts) {
  const long steps = resolve_steps(opts.tmax, opts.dt);
  TrajectoryRecord rec = init_record(model, opts, steps, true);
  const std::vector<long> snap_idx = snapshot_indices(opts.snapshot_times, opts.dt, steps);

  std::seed_seq seq{std::uint32_t(opts.seed), std::uint32_t(opts.seed >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_dt = std::sqrt(opts.dt);

  FilterState state;
  state.rho_hat = model.system.rho0;
  state.y_cum = Eigen::VectorXd::Zero(model.m);
  state.nu_cum = Eigen::VectorXd::Zero(model.m);

  if (opts.record_increments) {
    rec.dY.assign(steps + 1, Eigen::VectorXd::Zero(model.m));
    rec.nu.assign(steps + 1, Eigen::VectorXd::Zero(model.m));
  }
  record_observables(model, opts, state.rho_hat, rec.observables[0]);
  auto snap_it = snap_idx.begin();
  if (snap_it != snap_idx.end() && *snap_it == 0) {
    rec.snapshots.emplace_back(0.0, state.rho_hat);
    ++snap_it;
  }

  Eigen::VectorXd xi(model.m);
  for (long k = 1; k <= steps; ++k) {
    for (int j = 0; j < model.m; ++j) xi(j) = normal(rng);
    const Eigen::VectorXd dnu = sqrt_dt * (model.sigma_chol * xi);
    const Eigen::VectorXd dY = measurement_drift(model, state.rho_hat) * opts.dt + dnu;

    StepDiagnostics sd;
    state.rho_hat = sme_step(model, state.rho_hat, dnu, opts.dt, &sd, k);
    state.t = rec.times[k];
    state.y_cum += dY;
    state.nu_cum += dnu;
    rec.diag.absorb(sd);
    rec.quadratic_variation += dnu * dnu.transpose();

    record_observables(model, opts, state.rho_hat, rec.observables[k]);
    if (opts.record_increments) {
      rec.dY[k] = dY;
      rec.nu[k] = state.nu_cum;
    }
    if (snap_it != snap_idx.end() && *snap_it == k) {
      rec.snapshots.emplace_back(rec.times[k], state.rho_hat);
      ++snap_it;
    }
  }
  rec.nu_final = state.nu_cum;
  return rec;
}

TrajectoryRecord master_solve(const FilterModel& model, const SimOptions& opts) {
  const long steps = resolve_steps(opts.tmax, opts.dt);
  TrajectoryRecord rec = init_record(model, opts, steps, false);
  const std::vector<long> snap_idx = snapshot_indices(opts.snapshot_times, opts.dt, steps);

  Operator rho = model.system.rho0;
  record_observables(model, opts, rho, rec.observables[0]);
  auto snap_it = snap_idx.begin();
  if (snap_it != snap_idx.end() && *snap_it == 0) {
    rec.snapshots.emplace_back(0.0, rho);
    ++snap_it;
  }
  for (long k = 1; k <= steps; ++k) {
    rho = master_step(model, rho, opts.dt);
    record_observables(model, opts, rho, rec.observables[k]);
    if (snap_it != snap_idx.end() && *snap_it == k) {
      rec.snapshots.emplace_back(rec.times[k], rho);
      ++snap_it;
    }
  }
  return rec;
}

EnsembleResult ensemble_average(const FilterModel& model, const EnsembleOptions& opts) {
  if (opts.count < 2)
    throw ValidationError("ensemble", "trajectory count must be >= 2");
  const long steps = resolve_steps(opts.sim.tmax, opts.sim.dt);
  const int threads = resolve_threads(opts.threads);

  SimOptions sim = opts.sim;
  sim.record_increments = false;

  const size_t nobs = sim.observables.size();
  const std::vector<long> snap_idx = snapshot_indices(sim.snapshot_times, sim.dt, steps);
  const size_t nsnap = snap_idx.size();
  const int d = model.system.dim;

  // Ordered accumulators (reduction happens strictly in seed order).
  std::vector<std::vector<Complex>> obs_sum(steps + 1, std::vector<Complex>(nobs, 0.0));
  std::vector<std::vector<double>> obs_sq(steps + 1, std::vector<double>(nobs, 0.0));
  std::vector<Operator> rho_sum(nsnap, Operator::Zero(d, d));
  std::vector<Eigen::MatrixXd> rho_sq(nsnap, Eigen::MatrixXd::Zero(d, d));
  Eigen::VectorXd nu_sum = Eigen::VectorXd::Zero(model.m);
  Eigen::VectorXd nu_sq = Eigen::VectorXd::Zero(model.m);
  Eigen::MatrixXd qv_sum = Eigen::MatrixXd::Zero(model.m, model.m);
  TrajectoryDiagnostics diag;

  auto reduce_one = [&](const TrajectoryRecord& r) {
    for (long k = 0; k <= steps; ++k)
      for (size_t j = 0; j < nobs; ++j) {
        obs_sum[k][j] += r.observables[k][j];
        obs_sq[k][j] += std::norm(r.observables[k][j]);
      }
    for (size_t s = 0; s < nsnap; ++s) {
      rho_sum[s] += r.snapshots[s].second;
      rho_sq[s] += r.snapshots[s].second.cwiseAbs2();
    }
    nu_sum += r.nu_final;
    nu_sq += r.nu_final.cwiseAbs2();
    qv_sum += r.quadratic_variation;
    diag.absorb(r.diag);
  };

  // Snapshot times must be grid-resolved identically for every trajectory.
  SimOptions worker_sim = sim;
  worker_sim.snapshot_times.clear();
  for (long k : snap_idx) worker_sim.snapshot_times.push_back(double(k) * sim.dt);

  if (threads <= 1) {
    for (int i = 0; i < opts.count; ++i) {
      SimOptions s = worker_sim;
      s.seed = sim.seed + std::uint64_t(i);
      reduce_one(simulate_trajectory(model, s));
    }
  } else {
    for (int base = 0; base < opts.count; base += threads) {
      const int chunk = std::min(threads, opts.count - base);
      std::vector<TrajectoryRecord> slot(chunk);
      std::vector<std::exception_ptr> err(chunk);
      std::vector<std::thread> pool;
      pool.reserve(chunk);
      for (int w = 0; w < chunk; ++w) {
        pool.emplace_back([&, w] {
          try {
            SimOptions s = worker_sim;
            s.seed = sim.seed + std::uint64_t(base + w);
            slot[w] = simulate_trajectory(model, s);
          } catch (...) {
            err[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (int w = 0; w < chunk; ++w) {
        if (err[w]) std::rethrow_exception(err[w]);
        reduce_one(slot[w]);
      }
    }
  }

  const double n = double(opts.count);
  EnsembleResult res;
  res.count = opts.count;
  res.dt = sim.dt;
  res.tmax = sim.tmax;
  res.times.resize(steps + 1);
  for (long k = 0; k <= steps; ++k) res.times[k] = double(k) * sim.dt;
  for (const auto& [name, op] : sim.observables) res.observable_names.push_back(name);

  res.obs_mean.assign(steps + 1, std::vector<Complex>(nobs, 0.0));
  res.obs_se.assign(steps + 1, std::vector<double>(nobs, 0.0));
  for (long k = 0; k <= steps; ++k)
    for (size_t j = 0; j < nobs; ++j) {
      const Complex mean = obs_sum[k][j] / n;
      res.obs_mean[k][j] = mean;
      const double var = std::max(0.0, (obs_sq[k][j] - n * std::norm(mean)) / (n - 1.0));
      res.obs_se[k][j] = std::sqrt(var / n);
    }

  for (size_t s = 0; s < nsnap; ++s) {
    res.snapshot_times.push_back(double(snap_idx[s]) * sim.dt);
    res.rho_mean.push_back(rho_sum[s] / n);
    Eigen::MatrixXd var =
        ((rho_sq[s] - n * res.rho_mean.back().cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
    res.rho_se.push_back((var / n).cwiseSqrt());
  }

  res.nu_final_mean = nu_sum / n;
  Eigen::VectorXd nu_var =
      ((nu_sq - n * res.nu_final_mean.cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
  res.nu_final_se = (nu_var / n).cwiseSqrt();
  res.qv_mean = qv_sum / n;
  res.sigma_T = model.completion.Sigma * sim.tmax;
  res.diag = diag;
  return res;
}

void compare_with_master(EnsembleResult& result, const FilterModel& model) {
  if (result.snapshot_times.empty()) {
    result.has_master = true;
    return;
  }
  SimOptions opts;
  opts.tmax = result.tmax;
  opts.dt = result.dt;
  opts.snapshot_times = result.snapshot_times;
  TrajectoryRecord master = master_solve(model, opts);

  result.master_dev_max.clear();
  result.master_ratio_max.clear();
  for (size_t s = 0; s < result.snapshot_times.size(); ++s) {
    const Eigen::MatrixXd dev =
        (result.rho_mean[s] - master.snapshots[s].second).cwiseAbs();
    double dev_max = 0.0, ratio_max = 0.0;
    for (Eigen::Index r = 0; r < dev.rows(); ++r)
      for (Eigen::Index c = 0; c < dev.cols(); ++c) {
        dev_max = std::max(dev_max, dev(r, c));
        if (dev(r, c) > 0.0)
          ratio_max = std::max(ratio_max, dev(r, c) / std::max(result.rho_se[s](r, c), 1e-14));
      }
    result.master_dev_max.push_back(dev_max);
    result.master_ratio_max.push_back(ratio_max);
  }
  result.has_master = true;
}

}  // namespace qfilter
