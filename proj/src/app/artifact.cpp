#include "csid/app/artifact.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "csid/errors.hpp"

namespace csid::app {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormatName = "csid-model";

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols) throw DataError("ragged matrix in model file");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
  }
  return m;
}

// JSON has no NaN; a diverged restart is written as null.
Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
double number_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json feature_to_json(const FeatureRecord& f) {
  Json j;
  j["name"] = f.name;
  j["kind"] = std::string(to_string(f.kind));
  j["alphabet_size"] = f.alphabet_size;
  if (f.kind == FeatureKind::categorical) {
    j["labels"] = f.labels;
  } else {
    j["levels"] = f.quantizer->levels();
    j["boundaries"] = f.quantizer->boundaries();
  }
  return j;
}

FeatureRecord feature_from_json(const Json& j) {
  FeatureRecord f;
  f.name = j.at("name").get<std::string>();
  const auto kind = parse_feature_kind(j.at("kind").get<std::string>());
  if (!kind) throw DataError("unknown feature kind in model file");
  f.kind = *kind;
  f.alphabet_size = j.at("alphabet_size").get<std::size_t>();
  if (f.kind == FeatureKind::categorical) {
    f.labels = j.at("labels").get<std::vector<std::string>>();
    if (f.labels.size() != f.alphabet_size)
      throw DataError("feature '" + f.name + "' label count disagrees with its alphabet");
  } else {
    f.quantizer = Quantizer(j.at("levels").get<std::vector<double>>(),
                            j.at("boundaries").get<std::vector<double>>());
    if (f.quantizer->alphabet_size() != f.alphabet_size)
      throw DataError("feature '" + f.name + "' level count disagrees with its alphabet");
  }
  return f;
}

Json config_to_json(const SolverConfig& c) {
  Json j;
  j["rank"] = c.rank;
  j["ridge"] = c.ridge;
  j["smoothness"] = c.smoothness;
  j["output_smoothness"] = c.output_smoothness;
  j["difference"] = c.difference == DifferenceKind::first ? "first" : "second";
  j["max_sweeps"] = c.max_sweeps;
  j["rel_tol"] = c.rel_tol;
  j["restarts"] = c.restarts;
  j["init_scale"] = c.init_scale;
  j["seed"] = c.seed;
  j["normalize_by_samples"] = c.normalize_by_samples;
  return j;
}

SolverConfig config_from_json(const Json& j) {
  SolverConfig c;
  c.rank = j.at("rank").get<std::size_t>();
  c.ridge = j.at("ridge").get<double>();
  c.smoothness = j.at("smoothness").get<std::vector<double>>();
  c.output_smoothness = j.at("output_smoothness").get<double>();
  const auto diff = j.at("difference").get<std::string>();
  if (diff != "first" && diff != "second") throw DataError("unknown difference operator");
  c.difference = diff == "first" ? DifferenceKind::first : DifferenceKind::second;
  c.max_sweeps = j.at("max_sweeps").get<std::size_t>();
  c.rel_tol = j.at("rel_tol").get<double>();
  c.restarts = j.at("restarts").get<std::size_t>();
  c.init_scale = j.at("init_scale").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.normalize_by_samples = j.at("normalize_by_samples").get<bool>();
  return c;
}

Json report_to_json(const FitReport& r) {
  Json j;
  Json trace = Json::array();
  for (double v : r.objective_trace) trace.push_back(number_or_null(v));
  j["objective_trace"] = std::move(trace);
  j["sweeps"] = r.sweeps;
  j["converged"] = r.converged;
  j["best_restart"] = r.best_restart;
  Json restarts = Json::array();
  for (double v : r.restart_objectives) restarts.push_back(number_or_null(v));
  j["restart_objectives"] = std::move(restarts);
  j["min_norm_fallbacks"] = r.min_norm_fallbacks;
  return j;
}

FitReport report_from_json(const Json& j) {
  FitReport r;
  for (const auto& v : j.at("objective_trace")) r.objective_trace.push_back(number_from(v));
  r.sweeps = j.at("sweeps").get<std::size_t>();
  r.converged = j.at("converged").get<bool>();
  r.best_restart = j.at("best_restart").get<std::size_t>();
  for (const auto& v : j.at("restart_objectives")) r.restart_objectives.push_back(number_from(v));
  r.min_norm_fallbacks = j.at("min_norm_fallbacks").get<std::size_t>();
  return r;
}

ModelArtifact from_json(const Json& j) {
  if (j.at("format").get<std::string>() != kFormatName)
    throw DataError("not a model file");
  const int version = j.at("format_version").get<int>();
  if (version > kFormatVersion || version < 1)
    throw DataError("unsupported model format version " + std::to_string(version) +
                    " (this build reads up to " + std::to_string(kFormatVersion) + ")");

  FeatureSchema schema;
  for (const auto& f : j.at("schema").at("features")) schema.features.push_back(feature_from_json(f));
  schema.responses = j.at("schema").at("responses").get<std::vector<std::string>>();

  const auto rank = j.at("rank").get<std::size_t>();
  std::vector<Matrix> factors;
  for (const auto& a : j.at("factors")) factors.push_back(matrix_from_json(a, rank));
  std::optional<Matrix> v;
  if (!j.at("output_factor").is_null()) v = matrix_from_json(j.at("output_factor"), rank);
  FactorModel model(std::move(factors), std::move(v));
  if (model.shape() != schema.shape())
    throw DataError("factor sizes disagree with the schema alphabets");
  if (model.outputs() != schema.responses.size())
    throw DataError("output count disagrees with the declared responses");

  std::vector<Vector> pmfs;
  for (const auto& p : j.at("marginals")) {
    const auto values = p.get<std::vector<double>>();
    pmfs.push_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  MarginalSet marginals(std::move(pmfs));
  if (marginals.size() != model.order())
    throw DataError("marginal count disagrees with the number of predictors");
  for (std::size_t n = 0; n < model.order(); ++n)
    if (static_cast<std::size_t>(marginals[n].size()) != model.extent(n))
      throw DataError("marginal " + std::to_string(n) + " has the wrong length");

  return {std::move(schema), std::move(model), std::move(marginals),
          config_from_json(j.at("config")), report_from_json(j.at("fit_report"))};
}

}  // namespace

std::string serialize(const ModelArtifact& a) {
  Json j;
  j["format"] = kFormatName;
  j["format_version"] = kFormatVersion;
  Json features = Json::array();
  for (const auto& f : a.schema.features) features.push_back(feature_to_json(f));
  j["schema"] = {{"features", std::move(features)}, {"responses", a.schema.responses}};
  j["rank"] = a.model.rank();
  Json factors = Json::array();
  for (const Matrix& m : a.model.factors()) factors.push_back(matrix_to_json(m));
  j["factors"] = std::move(factors);
  j["output_factor"] =
      a.model.has_output_factor() ? matrix_to_json(a.model.output_factor()) : Json(nullptr);
  Json marginals = Json::array();
  for (const Vector& p : a.marginals.pmfs())
    marginals.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  j["marginals"] = std::move(marginals);
  j["config"] = config_to_json(a.config);
  j["fit_report"] = report_to_json(a.report);
  return j.dump(2) + "\n";
}

ModelArtifact deserialize(const std::string& text) {
  try {
    return from_json(Json::parse(text));
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact) {
  const std::string text = serialize(artifact);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing model file '" + path.string() + "'");
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize(buf.str());
  } catch (const Error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace csid::app
