#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace screening {

enum class Category { Demographics, Lifestyle, BCT, MP, History, Label };

std::string_view to_string(Category c);
Category category_from_string(std::string_view s);

// nominal: one column per declared value (one-hot).
// flag:    two declared values [negative, positive], a single 0/1 column.
// numeric: one column per bin (one-hot by bin).
enum class FieldKind { Nominal, Flag, Numeric };

enum class Label : std::uint8_t { Normal = 0, Abnormal = 1 };

std::string_view to_string(Label l);

struct ImputeRule {
  enum class Kind { Conditional, Mean, Mode, Reject };

  Kind kind = Kind::Mode;

  // Conditional only: when `when_field` is present (and equals `when_equals`
  // if set) the missing value becomes `value`; otherwise `fallback` applies.
  std::string when_field;
  std::optional<std::string> when_equals;
  std::string value;
  Kind fallback = Kind::Reject;
};

struct FieldSpec {
  std::string name;
  Category category = Category::Demographics;
  FieldKind kind = FieldKind::Nominal;
  std::vector<std::string> values;

  // Numeric fields. Resolved bins are k+1 strictly increasing edges giving k
  // bins [e_i, e_{i+1}), the last one closed. An unresolved field carries
  // `quantiles` > 0 and a value range; its cut points come from the data.
  std::vector<double> bin_edges;
  int quantiles = 0;
  std::pair<double, double> range{0.0, 0.0};

  ImputeRule impute;

  std::size_t column_count() const;
  bool resolved() const { return kind != FieldKind::Numeric || !bin_edges.empty(); }
};

struct Column {
  std::string name;
  Category category;
  std::string field;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::vector<FieldSpec> fields, std::string label_field);

  static FeatureSchema from_json(const nlohmann::json& j);
  static FeatureSchema parse(std::string_view text);
  nlohmann::json to_json() const;

  const std::vector<FieldSpec>& fields() const { return fields_; }
  const FieldSpec& label_field() const { return fields_[label_index_]; }
  const FieldSpec* find(std::string_view name) const;

  // Binary columns emitted for every non-label field.
  std::size_t column_count() const;
  bool resolved() const;

  // Column layout in field declaration order. Requires resolved().
  std::vector<Column> columns() const;

  // Replaces quantile bins with concrete edges computed from the values.
  FeatureSchema with_resolved_bins(const std::map<std::string, std::vector<double>>& numeric_values) const;

 private:
  void validate() const;

  std::vector<FieldSpec> fields_;
  std::size_t label_index_ = 0;
};

FeatureSchema load_schema(const std::string& path);

// Bundled 56-field schema (81 binary columns plus label).
FeatureSchema default_schema();

// Raw merged patient record. A key that is absent or maps to "" is missing.
struct PatientRecord {
  std::map<std::string, std::string> values;

  std::optional<std::string_view> get(const std::string& field) const;
  bool operator==(const PatientRecord&) const = default;
};

struct CohortStats {
  std::map<std::string, double> mean;
  std::map<std::string, std::string> mode;
};

CohortStats compute_stats(const FeatureSchema& schema, std::span<const PatientRecord> records);

nlohmann::json to_json(const CohortStats& stats);
CohortStats cohort_stats_from_json(const nlohmann::json& j);

// Fills every missing value according to the field's rule. Throws
// RecordRejected when a reject rule fires.
PatientRecord impute(const PatientRecord& record, const FeatureSchema& schema, const CohortStats& stats);

struct EncodedRecord {
  std::vector<std::uint8_t> x;
  Label label;
};

// One-hot encoding of a fully imputed record. Throws RecordRejected for values
// outside a field's declared value set or bins.
EncodedRecord binarize(const PatientRecord& record, const FeatureSchema& schema);

// Features only; the label field may be absent. Used at prediction time.
std::vector<std::uint8_t> binarize_features(const PatientRecord& record, const FeatureSchema& schema);

struct EncodedRow {
  std::vector<std::uint8_t> x;
  Label label = Label::Normal;
  std::size_t origin = 0;  // index of the source record; shared by supersampled copies
};

class EncodedCohort {
 public:
  EncodedCohort() = default;
  EncodedCohort(std::vector<Column> columns, std::vector<EncodedRow> rows);

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<EncodedRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t dim() const { return columns_.size(); }
  std::size_t n_normal() const { return n_normal_; }
  std::size_t n_abnormal() const { return n_abnormal_; }

  std::optional<std::size_t> column_index(std::string_view name) const;

  // Keeps the given columns in the given order.
  EncodedCohort select_columns(std::span<const std::size_t> keep) const;
  EncodedCohort drop_columns(std::span<const std::string> names) const;
  EncodedCohort drop_categories(std::span<const Category> categories) const;

 private:
  std::vector<Column> columns_;
  std::vector<EncodedRow> rows_;
  std::size_t n_normal_ = 0;
  std::size_t n_abnormal_ = 0;
};

struct Rejection {
  std::size_t record_index;
  std::string reason;
};

struct IngestResult {
  FeatureSchema schema;  // bins resolved
  CohortStats stats;
  EncodedCohort cohort;
  std::vector<Rejection> rejected;
};

// impute -> resolve bins -> binarize for every record. Records that fail are
// skipped and listed in `rejected`; rows keep input order.
IngestResult ingest(const FeatureSchema& schema, std::span<const PatientRecord> records);

std::vector<PatientRecord> read_records_csv(std::istream& in, const FeatureSchema& schema);
std::vector<PatientRecord> read_records_csv(const std::string& path, const FeatureSchema& schema);
void write_records_csv(std::ostream& out, const FeatureSchema& schema, std::span<const PatientRecord> records);

// 0/1 feature columns followed by the label column.
void write_encoded_csv(std::ostream& out, const EncodedCohort& cohort, std::string_view label_name);

struct SplitResult {
  EncodedCohort train;
  EncodedCohort test;
  std::uint64_t seed = 0;
};

// Seeded uniform shuffle, then the first floor(fraction * N) rows train.
SplitResult split(const EncodedCohort& cohort, double fraction, std::uint64_t seed);

// Appends `factor` extra copies of every abnormal row.
EncodedCohort supersample(const EncodedCohort& cohort, int factor);

}  // namespace screening
