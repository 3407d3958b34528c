#include "csid/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include "csid/errors.hpp"

namespace csid {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::categorical: return "categorical";
    case FeatureKind::ordinal: return "ordinal";
    case FeatureKind::continuous: return "continuous";
  }
  return "continuous";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view text) {
  if (text == "categorical") return FeatureKind::categorical;
  if (text == "ordinal") return FeatureKind::ordinal;
  if (text == "continuous") return FeatureKind::continuous;
  return std::nullopt;
}

SchemaDeclaration parse_schema(std::istream& in) {
  SchemaDeclaration decl;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "schema line " + std::to_string(line_no) + ": ";
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw DataError(where + "expected 'name = role'");
    const std::string name(trim(text.substr(0, eq)));
    if (name.empty()) throw DataError(where + "empty column name");
    if (!seen.insert(name).second)
      throw DataError(where + "column '" + name + "' declared twice");

    std::istringstream value{std::string(trim(text.substr(eq + 1)))};
    std::string role;
    value >> role;
    if (role == "response") {
      decl.responses.push_back(name);
    } else if (role == "ignore") {
      decl.ignored.push_back(name);
    } else if (auto kind = parse_feature_kind(role)) {
      SchemaDeclaration::Predictor p{name, *kind, std::nullopt};
      std::string extra;
      if (value >> extra) {
        const auto n = parse_number(extra);
        if (*kind != FeatureKind::continuous || !n || *n < 1.0 ||
            *n != std::floor(*n))
          throw DataError(where + "unexpected '" + extra + "' after " + role);
        p.alphabet = static_cast<std::size_t>(*n);
      }
      decl.predictors.push_back(std::move(p));
    } else {
      throw DataError(where + "unknown role '" + role + "' for column '" + name + "'");
    }
    std::string trailing;
    if (value >> trailing) throw DataError(where + "trailing text '" + trailing + "'");
  }
  if (decl.predictors.empty()) throw DataError("schema declares no predictors");
  if (decl.responses.empty()) throw DataError("schema declares no response column");
  return decl;
}

SchemaDeclaration read_schema_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file '" + path.string() + "'");
  try {
    return parse_schema(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::optional<CellIndex::value_type> FeatureRecord::encode(std::string_view raw) const {
  if (is_missing(raw)) return std::nullopt;
  if (kind == FeatureKind::categorical) {
    const std::string_view label = trim(raw);
    const auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label) return std::nullopt;
    return static_cast<CellIndex::value_type>(it - labels.begin());
  }
  const auto value = parse_number(raw);
  if (!value)
    throw DataError("column '" + name + "': '" + std::string(trim(raw)) +
                    "' is not a number");
  return quantizer->encode(*value);
}

std::vector<std::size_t> FeatureSchema::shape() const {
  std::vector<std::size_t> s;
  s.reserve(features.size());
  for (const auto& f : features) s.push_back(f.alphabet_size);
  return s;
}

std::vector<bool> FeatureSchema::eligibility() const {
  std::vector<bool> e;
  e.reserve(features.size());
  for (const auto& f : features) e.push_back(f.smoothness_eligible());
  return e;
}

FeatureSchema fit_schema(const Table& train, const SchemaDeclaration& decl,
                         std::size_t default_alphabet) {
  for (const auto& column : train.header) {
    const bool declared =
        std::any_of(decl.predictors.begin(), decl.predictors.end(),
                    [&](const auto& p) { return p.name == column; }) ||
        std::find(decl.responses.begin(), decl.responses.end(), column) !=
            decl.responses.end() ||
        std::find(decl.ignored.begin(), decl.ignored.end(), column) !=
            decl.ignored.end();
    if (!declared) throw DataError("CSV column '" + column + "' is not declared in the schema");
  }

  FeatureSchema schema;
  schema.responses = decl.responses;
  for (const auto& r : decl.responses) train.column(r);

  for (const auto& p : decl.predictors) {
    const std::size_t col = train.column(p.name);
    FeatureRecord rec;
    rec.name = p.name;
    rec.kind = p.kind;
    if (p.kind == FeatureKind::categorical) {
      std::set<std::string> labels;
      for (const auto& row : train.rows)
        if (!is_missing(row[col])) labels.insert(std::string(trim(row[col])));
      rec.labels.assign(labels.begin(), labels.end());
      rec.alphabet_size = rec.labels.size();
    } else {
      std::vector<double> values;
      for (std::size_t r = 0; r < train.rows.size(); ++r) {
        const std::string& field = train.rows[r][col];
        if (is_missing(field)) continue;
        const auto v = parse_number(field);
        if (!v)
          throw DataError("row " + std::to_string(r + 1) + ", column '" + p.name +
                          "': '" + field + "' is not a number");
        values.push_back(*v);
      }
      if (values.empty())
        throw DataError("column '" + p.name + "' has no observed training values");
      Quantizer exact = exact_codebook(values);
      const std::size_t wanted = p.alphabet.value_or(default_alphabet);
      if (p.kind == FeatureKind::continuous && exact.alphabet_size() > wanted)
        rec.quantizer = lloyd_max_fit(values, wanted).quantizer;
      else
        rec.quantizer = std::move(exact);
      rec.alphabet_size = rec.quantizer->alphabet_size();
    }
    if (rec.alphabet_size == 0)
      throw DataError("column '" + p.name + "' has no observed training values");
    schema.features.push_back(std::move(rec));
  }
  return schema;
}

EncodedRows encode_rows(const Table& table, const FeatureSchema& schema,
                        bool require_responses) {
  std::vector<std::size_t> predictor_cols;
  for (const auto& f : schema.features) predictor_cols.push_back(table.column(f.name));
  std::vector<std::optional<std::size_t>> response_cols;
  for (const auto& r : schema.responses) {
    auto c = table.find_column(r);
    if (!c && require_responses)
      throw DataError("response column '" + r + "' not found in CSV header");
    response_cols.push_back(c);
  }

  EncodedRows out;
  out.inputs.reserve(table.size());
  out.responses = Matrix::Constant(static_cast<Eigen::Index>(table.size()),
                                   static_cast<Eigen::Index>(schema.responses.size()),
                                   std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& row = table.rows[r];
    std::vector<PartialIndex::Entry> entries;
    entries.reserve(predictor_cols.size());
    for (std::size_t n = 0; n < predictor_cols.size(); ++n) {
      try {
        entries.push_back(schema.features[n].encode(row[predictor_cols[n]]));
      } catch (const DataError& e) {
        throw DataError("row " + std::to_string(r + 1) + ": " + e.what());
      }
    }
    out.inputs.emplace_back(std::move(entries));
    for (std::size_t j = 0; j < response_cols.size(); ++j) {
      if (!response_cols[j]) continue;
      const std::string& field = row[*response_cols[j]];
      if (is_missing(field)) continue;
      const auto v = parse_number(field);
      if (!v)
        throw DataError("row " + std::to_string(r + 1) + ", column '" +
                        schema.responses[j] + "': '" + field + "' is not a number");
      out.responses(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = *v;
    }
  }
  return out;
}

std::vector<Sample> complete_samples(const EncodedRows& rows) {
  std::vector<Sample> samples;
  for (std::size_t r = 0; r < rows.inputs.size(); ++r) {
    if (!rows.inputs[r].complete()) continue;
    const auto y = rows.responses.row(static_cast<Eigen::Index>(r));
    if (!y.allFinite()) continue;
    samples.emplace_back(rows.inputs[r].to_cell(),
                         std::vector<double>(y.data(), y.data() + y.size()));
  }
  return samples;
}

}  // namespace csid
