#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csid/observations.hpp"
#include "csid/partial_index.hpp"
#include "csid/quantizer.hpp"
#include "csid/table.hpp"

namespace csid {

enum class FeatureKind { categorical, ordinal, continuous };

std::string_view to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view text);

/// Column roles as declared in a schema file.
///
/// One `name = role` entry per line, `#` starts a comment. Roles are
/// `categorical`, `ordinal`, `continuous`, `response` and `ignore`; a
/// continuous column may carry an alphabet size (`x1 = continuous 25`).
/// Predictor order follows declaration order.
struct SchemaDeclaration {
  struct Predictor {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    std::optional<std::size_t> alphabet;
  };
  std::vector<Predictor> predictors;
  std::vector<std::string> responses;
  std::vector<std::string> ignored;
};

SchemaDeclaration parse_schema(std::istream& in);
SchemaDeclaration read_schema_file(const std::filesystem::path& path);

/// One fitted predictor: its alphabet and the map from raw values to cells.
struct FeatureRecord {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  std::size_t alphabet_size = 0;
  /// Categorical only: label of each cell, sorted.
  std::vector<std::string> labels;
  /// Ordinal and continuous only.
  std::optional<Quantizer> quantizer;

  bool smoothness_eligible() const noexcept { return kind != FeatureKind::categorical; }

  /// 0-based cell of a raw field; nullopt for a missing marker or an unseen
  /// category. Throws DataError for unparsable numbers.
  std::optional<CellIndex::value_type> encode(std::string_view raw) const;
};

struct FeatureSchema {
  std::vector<FeatureRecord> features;
  std::vector<std::string> responses;

  std::size_t order() const noexcept { return features.size(); }
  std::vector<std::size_t> shape() const;
  /// Per-mode smoothness eligibility, in a form the solver accepts.
  std::vector<bool> eligibility() const;
};

/// Fits label maps and quantizers on training rows only. Continuous columns
/// use Lloyd-Max with the declared alphabet (default `default_alphabet`),
/// reduced to the number of distinct values when the sample has fewer;
/// ordinal columns keep one level per distinct value.
FeatureSchema fit_schema(const Table& train, const SchemaDeclaration& decl,
                         std::size_t default_alphabet = 25);

/// Inputs and responses of every row of a table under a fitted schema.
struct EncodedRows {
  std::vector<PartialIndex> inputs;
  /// rows x K; NaN where the response is missing or absent.
  Matrix responses;
};

/// With `require_responses`, a table lacking a response column is an error;
/// otherwise response columns are optional.
EncodedRows encode_rows(const Table& table, const FeatureSchema& schema,
                        bool require_responses);

/// Rows with every predictor and response present, as training samples.
std::vector<Sample> complete_samples(const EncodedRows& rows);

}  // namespace csid
