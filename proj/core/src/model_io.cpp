#include "qfilter/model_io.hpp"

#include <cctype>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>

#include "qfilter/errors.hpp"
#include "qfilter/expression.hpp"
#include "qfilter/numeric.hpp"

namespace qfilter {

using ojson = nlohmann::ordered_json;

namespace {

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

[[noreturn]] void fail_path(const std::string& path, const std::string& msg) {
  throw ParseError(path + ": " + msg);
}

std::pair<int, int> line_col(const std::string& text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void check_keys(const ojson& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      fail_path(path, "unknown key '" + item.key() + "'");
}

Complex json_to_complex(const ojson& v, const std::string& path) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array()) {
    if (v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail_path(path, "complex pair must be [re, im]");
    return Complex(v[0].get<double>(), v[1].get<double>());
  }
  if (v.is_string()) {
    try {
      return parse_complex_value(v.get<std::string>());
    } catch (const ParseError& e) {
      fail_path(path, e.what());
    }
  }
  fail_path(path, "expected a number, [re, im] pair, or \"a+bi\" string");
}

Eigen::MatrixXcd json_to_matrix(const ojson& v, const std::string& path) {
  if (!v.is_array() || v.empty() || !v[0].is_array())
    fail_path(path, "expected a matrix (array of rows)");
  const size_t rows = v.size();
  const size_t cols = v[0].size();
  if (cols == 0) fail_path(path, "matrix rows must be non-empty");
  Eigen::MatrixXcd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!v[r].is_array() || v[r].size() != cols)
      fail_path(path, "matrix rows must all have length " + std::to_string(cols));
    for (size_t c = 0; c < cols; ++c)
      m(r, c) = json_to_complex(v[r][c], path + "[" + std::to_string(r) + "][" +
                                    std::to_string(c) + "]");
  }
  return m;
}

ojson complex_to_json(const Complex& z) {
  return ojson::array({z.real(), z.imag()});
}

ojson matrix_to_json(const Eigen::MatrixXcd& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

ojson real_matrix_to_json(const Eigen::MatrixXd& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

bool valid_name(const std::string& s) {
  if (s.empty() || (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_'))
    return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

Operator elaborate(const std::string& expr, const std::vector<int>& dims,
                   const std::string& path) {
  try {
    return parse_operator_expr(expr, dims);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

Complex parse_complex_value(const std::string& text) {
  // Accepted: "a", "bi", "a+bi", "a-bi", "i", "-i", with decimal/exponent
  // notation for a and b.
  size_t pos = 0;
  const auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  const auto read_signed_part = [&](bool sign_required) -> std::pair<double, bool> {
    skip_ws();
    double sign = 1.0;
    bool have_sign = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      sign = text[pos] == '-' ? -1.0 : 1.0;
      ++pos;
      have_sign = true;
      skip_ws();
    }
    if (sign_required && !have_sign)
      throw ParseError("expected '+' or '-' between real and imaginary parts", 1, int(pos) + 1);
    // bare "i"
    if (pos < text.size() && text[pos] == 'i') {
      ++pos;
      return {sign, true};
    }
    size_t start = pos;
    while (pos < text.size() && (std::isdigit(static_cast<unsigned char>(text[pos])) ||
                                 text[pos] == '.'))
      ++pos;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      size_t mark = pos;
      ++pos;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      } else {
        pos = mark;
      }
    }
    if (pos == start) throw ParseError("malformed complex literal '" + text + "'");
    double mag = 0.0;
    try {
      mag = std::stod(text.substr(start, pos - start));
    } catch (...) {
      throw ParseError("malformed complex literal '" + text + "'");
    }
    bool imag = false;
    if (pos < text.size() && text[pos] == 'i') {
      ++pos;
      imag = true;
    }
    return {sign * mag, imag};
  };

  auto [first, first_imag] = read_signed_part(false);
  skip_ws();
  Complex out = first_imag ? Complex(0.0, first) : Complex(first, 0.0);
  if (pos < text.size()) {
    auto [second, second_imag] = read_signed_part(true);
    if (!second_imag || first_imag)
      throw ParseError("complex literal '" + text + "' must be real part first, "
                       "imaginary part second");
    out += Complex(0.0, second);
    skip_ws();
    if (pos != text.size())
      throw ParseError("trailing characters in complex literal '" + text + "'");
  }
  return out;
}

ModelBundle parse_model(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("JSON syntax error: ") + e.what(), line, col);
  }
  if (!doc.is_object()) throw ParseError("model document must be a JSON object");
  check_keys(doc, "model",
             {"schema_version", "system", "field", "measurement", "observables", "simulation"});

  ModelBundle b;
  if (doc.contains("schema_version")) {
    if (!doc["schema_version"].is_number_integer() ||
        doc["schema_version"].get<int>() != kSchemaVersion)
      fail_path("schema_version", "unsupported schema version");
  }
  for (const char* required : {"system", "field", "measurement"})
    if (!doc.contains(required))
      throw ParseError(std::string("missing required block '") + required + "'");

  // --- system ---
  const ojson& sys = doc["system"];
  if (!sys.is_object()) fail_path("system", "must be an object");
  check_keys(sys, "system",
             {"dims", "hamiltonian", "couplings", "initial_state", "scattering"});
  for (const char* required : {"dims", "hamiltonian", "couplings", "initial_state"})
    if (!sys.contains(required))
      fail_path("system", std::string("missing key '") + required + "'");

  if (sys["dims"].is_number_integer()) {
    b.dims = {sys["dims"].get<int>()};
  } else if (sys["dims"].is_array()) {
    for (const auto& d : sys["dims"]) {
      if (!d.is_number_integer()) fail_path("system.dims", "dimensions must be integers");
      b.dims.push_back(d.get<int>());
    }
  } else {
    fail_path("system.dims", "must be an integer or an array of integers");
  }
  if (b.dims.empty()) fail_path("system.dims", "needs at least one subsystem");
  b.dim = 1;
  for (int d : b.dims) {
    if (d < 1 || b.dim > 4096) fail_path("system.dims", "dimensions must be >= 1 (and modest)");
    b.dim *= d;
  }

  if (!sys["hamiltonian"].is_string()) fail_path("system.hamiltonian", "must be a string");
  b.h_expr = sys["hamiltonian"].get<std::string>();
  if (!sys["couplings"].is_array()) fail_path("system.couplings", "must be an array");
  for (const auto& c : sys["couplings"]) {
    if (!c.is_string()) fail_path("system.couplings", "entries must be expression strings");
    b.coupling_exprs.push_back(c.get<std::string>());
  }
  if (!sys["initial_state"].is_string()) fail_path("system.initial_state", "must be a string");
  b.rho0_expr = sys["initial_state"].get<std::string>();

  // --- field ---
  const ojson& field = doc["field"];
  if (!field.is_object()) fail_path("field", "must be an object");
  check_keys(field, "field", {"n", "N", "M"});
  for (const char* required : {"n", "N", "M"})
    if (!field.contains(required)) fail_path("field", std::string("missing key '") + required + "'");
  if (!field["n"].is_number_integer() || field["n"].get<int>() < 1)
    fail_path("field.n", "must be a positive integer");
  b.n = field["n"].get<int>();
  b.N = json_to_matrix(field["N"], "field.N");
  b.M = json_to_matrix(field["M"], "field.M");
  if (b.N.rows() != b.n || b.N.cols() != b.n)
    fail_path("field.N", "must be n x n = " + std::to_string(b.n) + " x " + std::to_string(b.n));
  if (b.M.rows() != b.n || b.M.cols() != b.n)
    fail_path("field.M", "must be n x n = " + std::to_string(b.n) + " x " + std::to_string(b.n));
  if (int(b.coupling_exprs.size()) != b.n)
    fail_path("system.couplings", "expected " + std::to_string(b.n) +
                                      " coupling expressions for an n = " + std::to_string(b.n) +
                                      " channel field, got " +
                                      std::to_string(b.coupling_exprs.size()));

  // --- measurement ---
  const ojson& meas = doc["measurement"];
  if (!meas.is_object()) fail_path("measurement", "must be an object");
  check_keys(meas, "measurement", {"G"});
  if (!meas.contains("G")) fail_path("measurement", "missing key 'G'");
  b.G = json_to_matrix(meas["G"], "measurement.G");
  if (b.G.cols() != b.n)
    fail_path("measurement.G", "must have n = " + std::to_string(b.n) + " columns");

  // --- scattering (defaults to identity; anything else is unsupported) ---
  if (sys.contains("scattering")) {
    Eigen::MatrixXcd s = json_to_matrix(sys["scattering"], "system.scattering");
    if (s.rows() != b.n || s.cols() != b.n)
      fail_path("system.scattering", "must be n x n");
    if ((s - Eigen::MatrixXcd::Identity(b.n, b.n)).cwiseAbs().maxCoeff() > 1e-12)
      fail_path("system.scattering",
                "only the identity scattering matrix is supported; the filtering "
                "equations carry no gauge terms");
  }

  // --- observables ---
  if (doc.contains("observables")) {
    const ojson& obs = doc["observables"];
    if (!obs.is_object()) fail_path("observables", "must be an object of name -> expression");
    for (const auto& item : obs.items()) {
      if (!valid_name(item.key()))
        fail_path("observables", "invalid observable name '" + item.key() + "'");
      if (!item.value().is_string())
        fail_path("observables." + item.key(), "must be an expression string");
      b.observable_exprs.emplace_back(item.key(), item.value().get<std::string>());
    }
  }

  // --- simulation ---
  if (doc.contains("simulation")) {
    const ojson& sim = doc["simulation"];
    if (!sim.is_object()) fail_path("simulation", "must be an object");
    check_keys(sim, "simulation", {"tmax", "dt", "trajectories", "seed", "snapshots"});
    if (sim.contains("tmax")) {
      if (!sim["tmax"].is_number()) fail_path("simulation.tmax", "must be a number");
      b.tmax = sim["tmax"].get<double>();
    }
    if (sim.contains("dt")) {
      if (!sim["dt"].is_number()) fail_path("simulation.dt", "must be a number");
      b.dt = sim["dt"].get<double>();
    }
    if (sim.contains("trajectories")) {
      if (!sim["trajectories"].is_number_integer() || sim["trajectories"].get<int>() < 1)
        fail_path("simulation.trajectories", "must be a positive integer");
      b.trajectories = sim["trajectories"].get<int>();
    }
    if (sim.contains("seed")) {
      if (!sim["seed"].is_number_unsigned() && !sim["seed"].is_number_integer())
        fail_path("simulation.seed", "must be a non-negative integer");
      if (sim["seed"].is_number_integer() && sim["seed"].get<long long>() < 0)
        fail_path("simulation.seed", "must be a non-negative integer");
      b.seed = sim["seed"].get<std::uint64_t>();
    }
    if (sim.contains("snapshots")) {
      if (!sim["snapshots"].is_array()) fail_path("simulation.snapshots", "must be an array");
      for (const auto& t : sim["snapshots"]) {
        if (!t.is_number()) fail_path("simulation.snapshots", "entries must be numbers");
        b.snapshots.push_back(t.get<double>());
      }
    }
  }

  // --- elaboration ---
  b.system.dim = b.dim;
  b.system.H = elaborate(b.h_expr, b.dims, "system.hamiltonian");
  for (size_t k = 0; k < b.coupling_exprs.size(); ++k)
    b.system.couplings.push_back(
        elaborate(b.coupling_exprs[k], b.dims, "system.couplings[" + std::to_string(k) + "]"));
  b.system.rho0 = elaborate(b.rho0_expr, b.dims, "system.initial_state");
  for (const auto& [name, expr] : b.observable_exprs)
    b.observables.emplace_back(name, elaborate(expr, b.dims, "observables." + name));
  return b;
}

std::string serialize_model(const ModelBundle& b) {
  ojson doc;
  doc["schema_version"] = kSchemaVersion;
  ojson sys;
  sys["dims"] = b.dims.size() == 1 ? ojson(b.dims[0]) : ojson(b.dims);
  sys["hamiltonian"] = b.h_expr;
  sys["couplings"] = b.coupling_exprs;
  sys["initial_state"] = b.rho0_expr;
  doc["system"] = sys;
  ojson field;
  field["n"] = b.n;
  field["N"] = matrix_to_json(b.N);
  field["M"] = matrix_to_json(b.M);
  doc["field"] = field;
  doc["measurement"] = ojson{{"G", matrix_to_json(b.G)}};
  ojson obs = ojson::object();
  for (const auto& [name, expr] : b.observable_exprs) obs[name] = expr;
  doc["observables"] = obs;
  ojson sim;
  sim["tmax"] = b.tmax;
  sim["dt"] = b.dt;
  sim["trajectories"] = b.trajectories;
  sim["seed"] = b.seed;
  sim["snapshots"] = b.snapshots;
  doc["simulation"] = sim;
  return doc.dump(2) + "\n";
}

RecordFormat parse_record_format(const std::string& name) {
  if (name == "csv") return RecordFormat::Csv;
  if (name == "json") return RecordFormat::Json;
  throw ValidationError("write-records", "unsupported format '" + name + "'");
}

namespace {

ojson diagnostics_to_json(const TrajectoryDiagnostics& d) {
  ojson j;
  j["max_trace_drift"] = d.max_trace_drift;
  j["max_herm_error"] = d.max_herm_error;
  j["min_eig_seen"] = d.min_eig_seen;
  j["min_eig_post"] = d.min_eig_post;
  j["max_purity"] = d.max_purity;
  j["projections"] = d.projections;
  return j;
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
  std::string out;
  out.reserve((rec.steps + 2) * 64);
  out += "t";
  for (const auto& name : rec.observable_names) out += "," + name + "_re," + name + "_im";
  const bool noise = !rec.dY.empty();
  const int m = noise ? int(rec.dY[0].size()) : 0;
  for (int j = 1; j <= m; ++j) out += ",dY_" + std::to_string(j);
  for (int j = 1; j <= m; ++j) out += ",nu_" + std::to_string(j);
  out += "\n";

  for (size_t k = 0; k < rec.times.size(); ++k) {
    out += num17(rec.times[k]);
    for (size_t o = 0; o < rec.observable_names.size(); ++o) {
      out += "," + num17(rec.observables[k][o].real());
      out += "," + num17(rec.observables[k][o].imag());
    }
    if (noise) {
      for (int j = 0; j < m; ++j) out += "," + num17(rec.dY[k](j));
      for (int j = 0; j < m; ++j) out += "," + num17(rec.nu[k](j));
    }
    out += "\n";
  }
  return out;
}

ojson trajectory_json(const TrajectoryRecord& rec) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = rec.stochastic ? "trajectory" : "master";
  j["seed"] = rec.seed;
  j["dt"] = rec.dt;
  j["tmax"] = rec.tmax;
  j["steps"] = rec.steps;
  j["times"] = rec.times;
  ojson obs = ojson::object();
  for (size_t o = 0; o < rec.observable_names.size(); ++o) {
    std::vector<double> re(rec.times.size()), im(rec.times.size());
    for (size_t k = 0; k < rec.times.size(); ++k) {
      re[k] = rec.observables[k][o].real();
      im[k] = rec.observables[k][o].imag();
    }
    obs[rec.observable_names[o]] = ojson{{"re", re}, {"im", im}};
  }
  j["observables"] = obs;
  if (!rec.dY.empty()) {
    ojson dy = ojson::array(), nu = ojson::array();
    for (size_t k = 0; k < rec.dY.size(); ++k) {
      dy.push_back(std::vector<double>(rec.dY[k].data(), rec.dY[k].data() + rec.dY[k].size()));
      nu.push_back(std::vector<double>(rec.nu[k].data(), rec.nu[k].data() + rec.nu[k].size()));
    }
    j["dY"] = dy;
    j["nu"] = nu;
  }
  if (!rec.snapshots.empty()) {
    ojson snaps = ojson::array();
    for (const auto& [t, rho] : rec.snapshots) {
      ojson s;
      s["t"] = t;
      s["rho_re"] = real_matrix_to_json(rho.real());
      s["rho_im"] = real_matrix_to_json(rho.imag());
      snaps.push_back(s);
    }
    j["snapshots"] = snaps;
  }
  if (rec.stochastic) j["diagnostics"] = diagnostics_to_json(rec.diag);
  return j;
}

std::string ensemble_csv(const EnsembleResult& res) {
  std::string out;
  out += "t";
  for (const auto& name : res.observable_names)
    out += "," + name + "_mean_re," + name + "_mean_im," + name + "_se";
  out += "\n";
  for (size_t k = 0; k < res.times.size(); ++k) {
    out += num17(res.times[k]);
    for (size_t o = 0; o < res.observable_names.size(); ++o) {
      out += "," + num17(res.obs_mean[k][o].real());
      out += "," + num17(res.obs_mean[k][o].imag());
      out += "," + num17(res.obs_se[k][o]);
    }
    out += "\n";
  }
  return out;
}

ojson ensemble_json(const EnsembleResult& res) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "ensemble";
  j["trajectories"] = res.count;
  j["dt"] = res.dt;
  j["tmax"] = res.tmax;
  j["times"] = res.times;
  ojson obs = ojson::object();
  for (size_t o = 0; o < res.observable_names.size(); ++o) {
    std::vector<double> re(res.times.size()), im(res.times.size()), se(res.times.size());
    for (size_t k = 0; k < res.times.size(); ++k) {
      re[k] = res.obs_mean[k][o].real();
      im[k] = res.obs_mean[k][o].imag();
      se[k] = res.obs_se[k][o];
    }
    obs[res.observable_names[o]] = ojson{{"mean_re", re}, {"mean_im", im}, {"std_error", se}};
  }
  j["observables"] = obs;

  ojson snaps = ojson::array();
  for (size_t s = 0; s < res.snapshot_times.size(); ++s) {
    ojson snap;
    snap["t"] = res.snapshot_times[s];
    snap["rho_mean_re"] = real_matrix_to_json(res.rho_mean[s].real());
    snap["rho_mean_im"] = real_matrix_to_json(res.rho_mean[s].imag());
    snap["rho_std_error"] = real_matrix_to_json(res.rho_se[s]);
    if (res.has_master && s < res.master_dev_max.size()) {
      snap["master_dev_max"] = res.master_dev_max[s];
      snap["master_dev_ratio_max"] = res.master_ratio_max[s];
    }
    snaps.push_back(snap);
  }
  j["snapshots"] = snaps;

  ojson innov;
  innov["final_mean"] =
      std::vector<double>(res.nu_final_mean.data(), res.nu_final_mean.data() + res.nu_final_mean.size());
  innov["final_std_error"] =
      std::vector<double>(res.nu_final_se.data(), res.nu_final_se.data() + res.nu_final_se.size());
  innov["quadratic_variation"] = real_matrix_to_json(res.qv_mean);
  innov["sigma_times_tmax"] = real_matrix_to_json(res.sigma_T);
  j["innovations"] = innov;
  j["diagnostics"] = diagnostics_to_json(res.diag);
  return j;
}

}  // namespace

std::string write_records(const TrajectoryRecord& rec, RecordFormat format) {
  if (format == RecordFormat::Csv) return trajectory_csv(rec);
  return trajectory_json(rec).dump(2) + "\n";
}

std::string write_records(const EnsembleResult& res, RecordFormat format) {
  if (format == RecordFormat::Csv) return ensemble_csv(res);
  return ensemble_json(res).dump(2) + "\n";
}

TrajectoryRecord read_trajectory_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("JSON syntax error: ") + e.what(), line, col);
  }
  TrajectoryRecord rec;
  rec.stochastic = j.value("kind", "trajectory") == std::string("trajectory");
  rec.seed = j.value("seed", std::uint64_t(0));
  rec.dt = j.value("dt", 0.0);
  rec.tmax = j.value("tmax", 0.0);
  rec.steps = j.value("steps", 0L);
  rec.times = j.value("times", std::vector<double>{});
  if (j.contains("observables")) {
    for (const auto& item : j["observables"].items()) {
      rec.observable_names.push_back(item.key());
    }
    rec.observables.assign(rec.times.size(), std::vector<Complex>(rec.observable_names.size()));
    size_t o = 0;
    for (const auto& item : j["observables"].items()) {
      const auto re = item.value()["re"].get<std::vector<double>>();
      const auto im = item.value()["im"].get<std::vector<double>>();
      for (size_t k = 0; k < rec.times.size(); ++k) rec.observables[k][o] = Complex(re[k], im[k]);
      ++o;
    }
  }
  if (j.contains("dY")) {
    for (const auto& row : j["dY"]) {
      const auto v = row.get<std::vector<double>>();
      rec.dY.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    }
    for (const auto& row : j["nu"]) {
      const auto v = row.get<std::vector<double>>();
      rec.nu.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    }
    if (!rec.nu.empty()) rec.nu_final = rec.nu.back();
  }
  if (j.contains("snapshots")) {
    for (const auto& s : j["snapshots"]) {
      const ojson& re = s["rho_re"];
      const size_t d = re.size();
      Operator rho(d, d);
      for (size_t r = 0; r < d; ++r)
        for (size_t c = 0; c < d; ++c)
          rho(r, c) = Complex(s["rho_re"][r][c].get<double>(), s["rho_im"][r][c].get<double>());
      rec.snapshots.emplace_back(s["t"].get<double>(), rho);
    }
  }
  if (j.contains("diagnostics")) {
    const ojson& d = j["diagnostics"];
    rec.diag.max_trace_drift = d.value("max_trace_drift", 0.0);
    rec.diag.max_herm_error = d.value("max_herm_error", 0.0);
    rec.diag.min_eig_seen = d.value("min_eig_seen", 0.0);
    rec.diag.min_eig_post = d.value("min_eig_post", 0.0);
    rec.diag.max_purity = d.value("max_purity", 0.0);
    rec.diag.projections = d.value("projections", 0L);
  }
  if (rec.quadratic_variation.size() == 0 && !rec.dY.empty()) {
    const int m = int(rec.dY[0].size());
    rec.quadratic_variation = Eigen::MatrixXd::Zero(m, m);
  }
  return rec;
}

}  // namespace qfilter
