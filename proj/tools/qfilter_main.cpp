// qfilter: validate, simulate, and average quantum filtering models.
//
// Exit codes: 0 success, 1 internal error, 2 parse/usage failure,
// 3 validation failure, 4 integration failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "qfilter/engine.hpp"
#include "qfilter/errors.hpp"
#include "qfilter/model_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitIntegration = 4;

struct CliConfig {
  std::string model_path;
  std::optional<double> dt;
  std::optional<double> tmax;
  std::optional<int> trajectories;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format = "csv";
  std::string snapshots;
  bool quiet = false;
};

std::vector<double> parse_snapshot_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size()) throw qfilter::ParseError("bad snapshot time '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qfilter::ParseError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& bytes, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << bytes;
    return;
  }
  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + output_path + "'");
  out << bytes;
}

// Model-file simulation block overridden by explicit flags.
qfilter::SimOptions resolve_sim(const qfilter::ModelBundle& bundle, const CliConfig& cfg) {
  qfilter::SimOptions sim;
  sim.tmax = cfg.tmax.value_or(bundle.tmax);
  sim.dt = cfg.dt.value_or(bundle.dt);
  sim.seed = cfg.seed.value_or(bundle.seed);
  sim.observables = bundle.observables;
  sim.snapshot_times = cfg.snapshots.empty() ? bundle.snapshots : parse_snapshot_list(cfg.snapshots);
  if (!(sim.dt > 0.0) || !(sim.tmax > 0.0) || sim.dt > sim.tmax)
    throw CLI::ValidationError("--dt/--tmax", "need 0 < dt <= tmax");
  return sim;
}

qfilter::FieldMode auto_mode(const qfilter::GaussianFieldSpec& field) {
  return field.is_vacuum ? qfilter::FieldMode::ExplicitVacuum : qfilter::FieldMode::Gaussian;
}

int cmd_validate(const CliConfig& cfg) {
  using namespace qfilter;
  const ModelBundle bundle = parse_model(read_file(cfg.model_path));
  std::ostringstream report;
  int exit_code = kExitOk;

  try {
    const GaussianFieldSpec field = validate_gaussian(bundle.N, bundle.M);
    report << "gaussian-spec:      PASS  (n=" << field.n
           << ", F min eigenvalue " << min_eigenvalue(field.F) << ")\n";

    const ArakiWoodsCoefficients aw = factorize(field);
    report << "factorization:      PASS  (residuals " << aw.residual_commutation << ", "
           << aw.residual_number << ", " << aw.residual_pair << ")\n";

    const FilterModel model =
        build_filter_model(bundle.system, field, bundle.G, auto_mode(field));
    report << "measurement:        PASS  (" << model.meas.m << "x" << model.meas.nch
           << (model.mode == FieldMode::Gaussian ? " lifted" : "")
           << ", commutation residual " << model.meas.commutation_residual << ")\n";
    report << "completion:         PASS  (condition number " << model.completion.condition_number;
    if (model.completion.condition_number > kConditionWarn) report << " WARNING: ill-conditioned";
    report << ")\n";

    const Eigen::MatrixXd top = model.completion.K.topRows(model.m);
    const double top_dev =
        (top - Eigen::MatrixXd::Identity(model.m, model.m)).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.completion.Sigma);
    report << "conditioning-gain:  PASS  (K top-block deviation " << top_dev
           << ", Sigma eigenvalues [" << es.eigenvalues().transpose() << "])\n";
  } catch (const ValidationError& e) {
    report << e.stage() << ": FAIL  " << e.what() << "\n";
    exit_code = kExitValidation;
  }

  if (!cfg.quiet) {
    if (cfg.output.empty())
      std::cout << report.str();
    else
      emit(report.str(), cfg.output);
  }
  return exit_code;
}

int cmd_simulate(const CliConfig& cfg) {
  using namespace qfilter;
  const ModelBundle bundle = parse_model(read_file(cfg.model_path));
  const SimOptions sim = resolve_sim(bundle, cfg);
  const GaussianFieldSpec field = validate_gaussian(bundle.N, bundle.M);
  const FilterModel model = build_filter_model(bundle.system, field, bundle.G, auto_mode(field));
  const TrajectoryRecord rec = simulate_trajectory(model, sim);
  emit(write_records(rec, parse_record_format(cfg.format)), cfg.output);
  return kExitOk;
}

int cmd_master(const CliConfig& cfg) {
  using namespace qfilter;
  const ModelBundle bundle = parse_model(read_file(cfg.model_path));
  const SimOptions sim = resolve_sim(bundle, cfg);
  const GaussianFieldSpec field = validate_gaussian(bundle.N, bundle.M);
  const FilterModel model = build_filter_model(bundle.system, field, bundle.G, auto_mode(field));
  const TrajectoryRecord rec = master_solve(model, sim);
  emit(write_records(rec, parse_record_format(cfg.format)), cfg.output);
  return kExitOk;
}

int cmd_ensemble(const CliConfig& cfg) {
  using namespace qfilter;
  const ModelBundle bundle = parse_model(read_file(cfg.model_path));
  EnsembleOptions opts;
  opts.sim = resolve_sim(bundle, cfg);
  opts.count = cfg.trajectories.value_or(bundle.trajectories);
  if (opts.count < 2)
    throw CLI::ValidationError("--trajectories", "an ensemble needs at least 2 trajectories");
  const GaussianFieldSpec field = validate_gaussian(bundle.N, bundle.M);
  const FilterModel model = build_filter_model(bundle.system, field, bundle.G, auto_mode(field));
  EnsembleResult res = ensemble_average(model, opts);
  compare_with_master(res, model);
  emit(write_records(res, parse_record_format(cfg.format)), cfg.output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum filtering simulator for MIMO Gaussian input fields"};
  app.require_subcommand(1);

  CliConfig cfg;
  const auto add_common = [&](CLI::App* sub, bool with_sim_flags) {
    sub->add_option("--model", cfg.model_path, "model file (JSON)")->required();
    sub->add_flag("--quiet", cfg.quiet, "suppress informational output");
    if (with_sim_flags) {
      sub->add_option("--dt", [&cfg](const CLI::results_t& vals) {
        try { cfg.dt = std::stod(vals.at(0)); } catch (...) { return false; }
        return true;
      }, "time step (overrides the model file)");
      sub->add_option("--tmax", [&cfg](const CLI::results_t& vals) {
        try { cfg.tmax = std::stod(vals.at(0)); } catch (...) { return false; }
        return true;
      }, "final time (overrides the model file)");
      sub->add_option("--seed", [&cfg](const CLI::results_t& vals) {
        try { cfg.seed = std::stoull(vals.at(0)); } catch (...) { return false; }
        return true;
      }, "random seed (overrides the model file)");
      sub->add_option("--output", cfg.output, "write records here instead of stdout");
      sub->add_option("--format", cfg.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
      sub->add_option("--snapshots", cfg.snapshots, "comma-separated state snapshot times");
    } else {
      sub->add_option("--output", cfg.output, "write the report here instead of stdout");
    }
  };

  CLI::App* validate = app.add_subcommand("validate", "check a model file stage by stage");
  add_common(validate, false);
  CLI::App* simulate = app.add_subcommand("simulate", "simulate one measurement trajectory");
  add_common(simulate, true);
  CLI::App* ensemble = app.add_subcommand("ensemble", "average many trajectories");
  add_common(ensemble, true);
  ensemble->add_option("--trajectories", [&cfg](const CLI::results_t& vals) {
    try { cfg.trajectories = std::stoi(vals.at(0)); } catch (...) { return false; }
    return true;
  }, "trajectory count (overrides the model file)");
  CLI::App* master = app.add_subcommand("master", "deterministic master-equation solve");
  add_common(master, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitParse;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(cfg);
    if (app.got_subcommand(simulate)) return cmd_simulate(cfg);
    if (app.got_subcommand(ensemble)) return cmd_ensemble(cfg);
    if (app.got_subcommand(master)) return cmd_master(cfg);
    std::cerr << "error: no subcommand\n";
    return kExitParse;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitParse;
  } catch (const qfilter::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const qfilter::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const qfilter::IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << "\n";
    return kExitIntegration;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
