#pragma once

// Model-file parsing and record serialization. Model files are JSON with
// operator expressions as strings and complex entries written as plain
// numbers, [re, im] pairs, or "a+bi" strings; the full grammar and the
// CSV/JSON record schemas are documented in docs/model_format.md.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qfilter/engine.hpp"
#include "qfilter/filter_model.hpp"

namespace qfilter {

inline constexpr int kSchemaVersion = 1;

struct ModelBundle {
  // system block
  std::vector<int> dims;  // subsystem dimensions; dim is their product
  int dim = 0;
  std::string h_expr;
  std::vector<std::string> coupling_exprs;
  std::string rho0_expr;

  // field block
  int n = 0;
  Eigen::MatrixXcd N;
  Eigen::MatrixXcd M;

  // measurement block
  Eigen::MatrixXcd G;

  // observables block (order preserved from the document)
  std::vector<std::pair<std::string, std::string>> observable_exprs;

  // simulation block
  double tmax = 1.0;
  double dt = 1e-3;
  int trajectories = 1;
  std::uint64_t seed = 0;
  std::vector<double> snapshots;

  // elaborated objects
  SystemModel system;
  std::vector<std::pair<std::string, Operator>> observables;
};

/// Parses and elaborates a model document. Diagnostics carry line/column for
/// syntax errors and the offending field path for semantic ones. The
/// scattering matrix, when present, must equal the identity.
ModelBundle parse_model(const std::string& text);

/// Canonical JSON form of the bundle; parse(serialize(parse(doc))) elaborates
/// to the same bundle.
std::string serialize_model(const ModelBundle& bundle);

/// Parse a single complex scalar in any of the accepted forms.
Complex parse_complex_value(const std::string& text);

enum class RecordFormat { Csv, Json };

RecordFormat parse_record_format(const std::string& name);  // "csv" | "json"

/// Tabular serialization. CSV columns for a trajectory: t, one Re/Im pair
/// per observable, then dY components, then cumulative nu components;
/// deterministic-master records omit the noise columns. Numbers carry full
/// round-trip precision (17 significant digits in CSV).
std::string write_records(const TrajectoryRecord& rec, RecordFormat format);
std::string write_records(const EnsembleResult& res, RecordFormat format);

/// Inverse of write_records(..., Json) for trajectories; used to check the
/// round-trip contract.
TrajectoryRecord read_trajectory_json(const std::string& text);

}  // namespace qfilter
