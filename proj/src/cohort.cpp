#include "screening/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "screening/bundled_data.hpp"
#include "screening/csv.hpp"
#include "screening/error.hpp"
#include "screening/rng.hpp"

namespace screening {

namespace {

using nlohmann::json;

constexpr std::pair<Category, std::string_view> kCategoryNames[] = {
    {Category::Demographics, "Demographics"}, {Category::Lifestyle, "Lifestyle"},
    {Category::BCT, "BCT"},                   {Category::MP, "MP"},
    {Category::History, "History"},           {Category::Label, "Label"},
};

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

ImputeRule::Kind impute_kind_from_string(const std::string& s) {
  if (s == "conditional") return ImputeRule::Kind::Conditional;
  if (s == "mean") return ImputeRule::Kind::Mean;
  if (s == "mode") return ImputeRule::Kind::Mode;
  if (s == "reject") return ImputeRule::Kind::Reject;
  throw SchemaError("unknown impute rule '" + s + "'");
}

std::string_view to_string(ImputeRule::Kind k) {
  switch (k) {
    case ImputeRule::Kind::Conditional: return "conditional";
    case ImputeRule::Kind::Mean: return "mean";
    case ImputeRule::Kind::Mode: return "mode";
    case ImputeRule::Kind::Reject: return "reject";
  }
  return "reject";
}

std::string_view to_string(FieldKind k) {
  switch (k) {
    case FieldKind::Nominal: return "nominal";
    case FieldKind::Flag: return "flag";
    case FieldKind::Numeric: return "numeric";
  }
  return "nominal";
}

FieldSpec field_from_json(const json& j) {
  FieldSpec f;
  f.name = j.at("name").get<std::string>();
  f.category = category_from_string(j.at("category").get<std::string>());
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "nominal") {
    f.kind = FieldKind::Nominal;
  } else if (kind == "flag") {
    f.kind = FieldKind::Flag;
  } else if (kind == "numeric") {
    f.kind = FieldKind::Numeric;
  } else {
    throw SchemaError("field '" + f.name + "': unknown kind '" + kind + "'");
  }
  if (j.contains("values")) f.values = j.at("values").get<std::vector<std::string>>();
  if (j.contains("bins")) f.bin_edges = j.at("bins").get<std::vector<double>>();
  if (j.contains("quantiles")) f.quantiles = j.at("quantiles").get<int>();
  if (j.contains("range")) {
    auto r = j.at("range").get<std::vector<double>>();
    if (r.size() != 2) throw SchemaError("field '" + f.name + "': range needs two values");
    f.range = {r[0], r[1]};
  }
  if (j.contains("impute")) {
    const json& imp = j.at("impute");
    f.impute.kind = impute_kind_from_string(imp.at("rule").get<std::string>());
    if (f.impute.kind == ImputeRule::Kind::Conditional) {
      const json& when = imp.at("when");
      f.impute.when_field = when.at("field").get<std::string>();
      if (when.contains("equals")) f.impute.when_equals = when.at("equals").get<std::string>();
      f.impute.value = imp.at("value").get<std::string>();
      if (imp.contains("fallback")) f.impute.fallback = impute_kind_from_string(imp.at("fallback").get<std::string>());
      if (f.impute.fallback == ImputeRule::Kind::Conditional)
        throw SchemaError("field '" + f.name + "': conditional fallback cannot be conditional");
    }
  } else {
    f.impute.kind = f.category == Category::Label ? ImputeRule::Kind::Reject : ImputeRule::Kind::Mode;
  }
  return f;
}

json field_to_json(const FieldSpec& f) {
  json j{{"name", f.name}, {"category", to_string(f.category)}, {"kind", to_string(f.kind)}};
  if (f.kind != FieldKind::Numeric) j["values"] = f.values;
  if (f.kind == FieldKind::Numeric) {
    if (!f.bin_edges.empty()) {
      j["bins"] = f.bin_edges;
    } else {
      j["quantiles"] = f.quantiles;
      j["range"] = {f.range.first, f.range.second};
    }
  }
  json imp{{"rule", to_string(f.impute.kind)}};
  if (f.impute.kind == ImputeRule::Kind::Conditional) {
    json when{{"field", f.impute.when_field}};
    if (f.impute.when_equals) when["equals"] = *f.impute.when_equals;
    imp["when"] = when;
    imp["value"] = f.impute.value;
    imp["fallback"] = to_string(f.impute.fallback);
  }
  j["impute"] = imp;
  return j;
}

bool is_missing(const std::optional<std::string_view>& v) { return !v.has_value(); }

// Linear interpolation between order statistics.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::size_t bin_of(const FieldSpec& f, double v) {
  const auto& e = f.bin_edges;
  if (v < e.front() || v > e.back()) {
    throw RecordRejected("field '" + f.name + "': value " + format_number(v) + " outside all bins");
  }
  const auto it = std::upper_bound(e.begin(), e.end(), v);
  const auto bin = static_cast<std::size_t>(it - e.begin()) - 1;
  return std::min(bin, e.size() - 2);
}

void encode_field(const FieldSpec& f, std::string_view raw, std::vector<std::uint8_t>& out) {
  switch (f.kind) {
    case FieldKind::Nominal: {
      const auto it = std::find(f.values.begin(), f.values.end(), raw);
      if (it == f.values.end())
        throw RecordRejected("field '" + f.name + "': unknown value '" + std::string(raw) + "'");
      const auto hit = static_cast<std::size_t>(it - f.values.begin());
      for (std::size_t i = 0; i < f.values.size(); ++i) out.push_back(i == hit ? 1 : 0);
      return;
    }
    case FieldKind::Flag: {
      if (raw == f.values[1]) {
        out.push_back(1);
      } else if (raw == f.values[0]) {
        out.push_back(0);
      } else {
        throw RecordRejected("field '" + f.name + "': unknown value '" + std::string(raw) + "'");
      }
      return;
    }
    case FieldKind::Numeric: {
      const auto v = parse_number(raw);
      if (!v) throw RecordRejected("field '" + f.name + "': not a number '" + std::string(raw) + "'");
      const auto hit = bin_of(f, *v);
      for (std::size_t i = 0; i + 1 < f.bin_edges.size(); ++i) out.push_back(i == hit ? 1 : 0);
      return;
    }
  }
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& [cat, name] : kCategoryNames)
    if (cat == c) return name;
  return "Demographics";
}

Category category_from_string(std::string_view s) {
  for (const auto& [cat, name] : kCategoryNames)
    if (name == s) return cat;
  throw SchemaError("unknown category '" + std::string(s) + "'");
}

std::string_view to_string(Label l) { return l == Label::Abnormal ? "abnormal" : "normal"; }

std::size_t FieldSpec::column_count() const {
  switch (kind) {
    case FieldKind::Nominal: return values.size();
    case FieldKind::Flag: return 1;
    case FieldKind::Numeric:
      return bin_edges.empty() ? static_cast<std::size_t>(quantiles) : bin_edges.size() - 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// FeatureSchema

FeatureSchema::FeatureSchema(std::vector<FieldSpec> fields, std::string label_field)
    : fields_(std::move(fields)) {
  std::size_t label_count = 0;
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].category == Category::Label) {
      ++label_count;
      label_index_ = i;
    }
  }
  if (label_count == 0) throw SchemaError("missing label field");
  if (label_count > 1) throw SchemaError("ambiguous label: more than one Label-category field");
  if (!label_field.empty() && fields_[label_index_].name != label_field)
    throw SchemaError("label field '" + label_field + "' is not the Label-category field");
  validate();
}

void FeatureSchema::validate() const {
  std::set<std::string> names;
  for (const auto& f : fields_) {
    if (f.name.empty()) throw SchemaError("field with empty name");
    if (!names.insert(f.name).second) throw SchemaError("duplicate field name '" + f.name + "'");
  }
  for (const auto& f : fields_) {
    const std::set<std::string> distinct(f.values.begin(), f.values.end());
    switch (f.kind) {
      case FieldKind::Nominal:
        if (distinct.size() < 2 || distinct.size() != f.values.size())
          throw SchemaError("field '" + f.name + "': nominal fields need at least two distinct values");
        break;
      case FieldKind::Flag:
        if (f.values.size() != 2 || distinct.size() != 2)
          throw SchemaError("field '" + f.name + "': flag fields need exactly two distinct values");
        break;
      case FieldKind::Numeric:
        if (!f.bin_edges.empty()) {
          if (f.bin_edges.size() < 2 || !std::is_sorted(f.bin_edges.begin(), f.bin_edges.end(), std::less_equal<>{}))
            throw SchemaError("field '" + f.name + "': bins need at least two strictly increasing edges");
        } else if (f.quantiles < 1 || !(f.range.first < f.range.second)) {
          throw SchemaError("field '" + f.name + "': numeric fields need bins or quantiles with a range");
        }
        break;
    }
    if (f.category == Category::Label) {
      if (f.kind != FieldKind::Nominal || f.values.size() != 2)
        throw SchemaError("label field '" + f.name + "' must be nominal with exactly two values (normal, abnormal)");
    }
    const auto check_kind = [&](ImputeRule::Kind k) {
      if (k == ImputeRule::Kind::Mean && f.kind != FieldKind::Numeric)
        throw SchemaError("field '" + f.name + "': mean imputation needs a numeric field");
    };
    check_kind(f.impute.kind);
    if (f.impute.kind == ImputeRule::Kind::Conditional) {
      check_kind(f.impute.fallback);
      const FieldSpec* pred = find(f.impute.when_field);
      if (pred == nullptr)
        throw SchemaError("field '" + f.name + "': conditional rule references unknown field '" +
                          f.impute.when_field + "'");
      if (pred == &f) throw SchemaError("field '" + f.name + "': conditional rule references itself");
      if (f.kind != FieldKind::Numeric &&
          std::find(f.values.begin(), f.values.end(), f.impute.value) == f.values.end())
        throw SchemaError("field '" + f.name + "': conditional value '" + f.impute.value + "' not in value set");
    }
  }
}

FeatureSchema FeatureSchema::from_json(const json& j) {
  try {
    std::vector<FieldSpec> fields;
    for (const auto& fj : j.at("fields")) fields.push_back(field_from_json(fj));
    const std::string label = j.value("label_field", std::string{});
    return FeatureSchema(std::move(fields), label);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema: ") + e.what());
  }
}

FeatureSchema FeatureSchema::parse(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema parse failure: ") + e.what());
  }
  return from_json(j);
}

json FeatureSchema::to_json() const {
  json fields = json::array();
  for (const auto& f : fields_) fields.push_back(field_to_json(f));
  return json{{"label_field", label_field().name}, {"fields", fields}};
}

const FieldSpec* FeatureSchema::find(std::string_view name) const {
  for (const auto& f : fields_)
    if (f.name == name) return &f;
  return nullptr;
}

std::size_t FeatureSchema::column_count() const {
  std::size_t n = 0;
  for (const auto& f : fields_)
    if (f.category != Category::Label) n += f.column_count();
  return n;
}

bool FeatureSchema::resolved() const {
  return std::all_of(fields_.begin(), fields_.end(), [](const FieldSpec& f) { return f.resolved(); });
}

std::vector<Column> FeatureSchema::columns() const {
  if (!resolved()) throw UsageError("schema has unresolved quantile bins");
  std::vector<Column> cols;
  for (const auto& f : fields_) {
    if (f.category == Category::Label) continue;
    switch (f.kind) {
      case FieldKind::Nominal:
        for (const auto& v : f.values) cols.push_back({f.name + "-" + v, f.category, f.name});
        break;
      case FieldKind::Flag:
        cols.push_back({f.name, f.category, f.name});
        break;
      case FieldKind::Numeric:
        for (std::size_t i = 0; i + 1 < f.bin_edges.size(); ++i) {
          const bool last = i + 2 == f.bin_edges.size();
          cols.push_back({f.name + "[" + format_number(f.bin_edges[i]) + "," + format_number(f.bin_edges[i + 1]) +
                              (last ? "]" : ")"),
                          f.category, f.name});
        }
        break;
    }
  }
  return cols;
}

FeatureSchema FeatureSchema::with_resolved_bins(const std::map<std::string, std::vector<double>>& numeric_values) const {
  FeatureSchema out = *this;
  for (auto& f : out.fields_) {
    if (f.resolved()) continue;
    auto it = numeric_values.find(f.name);
    if (it == numeric_values.end() || it->second.empty())
      throw DataError("field '" + f.name + "': no values to compute quantile bins");
    std::vector<double> sorted = it->second;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges{f.range.first};
    for (int q = 1; q < f.quantiles; ++q) edges.push_back(quantile_sorted(sorted, static_cast<double>(q) / f.quantiles));
    edges.push_back(f.range.second);
    if (!std::is_sorted(edges.begin(), edges.end(), std::less_equal<>{}))
      throw DataError("field '" + f.name + "': degenerate quantile bins");
    f.bin_edges = std::move(edges);
  }
  return out;
}

FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("schema not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FeatureSchema::parse(ss.str());
}

FeatureSchema default_schema() { return FeatureSchema::parse(bundled_schema_json()); }

// ---------------------------------------------------------------------------
// Records, statistics, imputation, encoding

std::optional<std::string_view> PatientRecord::get(const std::string& field) const {
  auto it = values.find(field);
  if (it == values.end() || it->second.empty()) return std::nullopt;
  return std::string_view(it->second);
}

CohortStats compute_stats(const FeatureSchema& schema, std::span<const PatientRecord> records) {
  CohortStats stats;
  for (const auto& f : schema.fields()) {
    if (f.category == Category::Label) continue;
    if (f.kind == FieldKind::Numeric) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : records) {
        if (auto v = r.get(f.name)) {
          if (auto x = parse_number(*v)) {
            sum += *x;
            ++n;
          }
        }
      }
      if (n > 0) stats.mean[f.name] = sum / static_cast<double>(n);
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& r : records)
      if (auto v = r.get(f.name)) ++counts[std::string(*v)];
    if (counts.empty()) continue;
    // Ties resolve to the earliest declared value, then lexicographically.
    std::string best;
    std::size_t best_count = 0;
    std::size_t best_rank = SIZE_MAX;
    for (const auto& [value, count] : counts) {
      const auto pos = std::find(f.values.begin(), f.values.end(), value);
      const auto rank = static_cast<std::size_t>(pos - f.values.begin());
      if (count > best_count || (count == best_count && rank < best_rank)) {
        best = value;
        best_count = count;
        best_rank = rank;
      }
    }
    stats.mode[f.name] = best;
  }
  return stats;
}

nlohmann::json to_json(const CohortStats& stats) { return json{{"mean", stats.mean}, {"mode", stats.mode}}; }

CohortStats cohort_stats_from_json(const nlohmann::json& j) {
  CohortStats s;
  s.mean = j.at("mean").get<std::map<std::string, double>>();
  s.mode = j.at("mode").get<std::map<std::string, std::string>>();
  return s;
}

PatientRecord impute(const PatientRecord& record, const FeatureSchema& schema, const CohortStats& stats) {
  for (const auto& [key, value] : record.values)
    if (schema.find(key) == nullptr) throw RecordRejected("unknown field '" + key + "'");

  PatientRecord out = record;
  const auto fill = [&](const FieldSpec& f, ImputeRule::Kind kind) {
    switch (kind) {
      case ImputeRule::Kind::Mean: {
        auto it = stats.mean.find(f.name);
        if (it == stats.mean.end()) throw UsageError("no cohort mean for field '" + f.name + "'");
        out.values[f.name] = format_number(it->second);
        return;
      }
      case ImputeRule::Kind::Mode: {
        auto it = stats.mode.find(f.name);
        if (it == stats.mode.end()) throw UsageError("no cohort mode for field '" + f.name + "'");
        out.values[f.name] = it->second;
        return;
      }
      case ImputeRule::Kind::Reject:
      case ImputeRule::Kind::Conditional:
        throw RecordRejected("missing value for field '" + f.name + "'");
    }
  };

  for (const auto& f : schema.fields()) {
    if (!is_missing(record.get(f.name))) continue;
    if (f.impute.kind != ImputeRule::Kind::Conditional) {
      fill(f, f.impute.kind);
      continue;
    }
    // Predicates look at the input record so the result does not depend on
    // field order.
    const auto pred = record.get(f.impute.when_field);
    const bool holds = pred.has_value() && (!f.impute.when_equals || *pred == *f.impute.when_equals);
    if (holds) {
      out.values[f.name] = f.impute.value;
    } else {
      fill(f, f.impute.fallback);
    }
  }
  return out;
}

EncodedRecord binarize(const PatientRecord& record, const FeatureSchema& schema) {
  EncodedRecord enc;
  enc.x = binarize_features(record, schema);
  const FieldSpec& lf = schema.label_field();
  const auto raw = record.get(lf.name);
  if (!raw) throw RecordRejected("missing label");
  if (*raw == lf.values[0]) {
    enc.label = Label::Normal;
  } else if (*raw == lf.values[1]) {
    enc.label = Label::Abnormal;
  } else {
    throw RecordRejected("label field '" + lf.name + "': unknown value '" + std::string(*raw) + "'");
  }
  return enc;
}

std::vector<std::uint8_t> binarize_features(const PatientRecord& record, const FeatureSchema& schema) {
  if (!schema.resolved()) throw UsageError("schema has unresolved quantile bins");
  std::vector<std::uint8_t> x;
  x.reserve(schema.column_count());
  for (const auto& f : schema.fields()) {
    if (f.category == Category::Label) continue;
    const auto raw = record.get(f.name);
    if (!raw) throw RecordRejected("field '" + f.name + "': missing value (record not imputed)");
    encode_field(f, *raw, x);
  }
  return x;
}

// ---------------------------------------------------------------------------
// EncodedCohort

EncodedCohort::EncodedCohort(std::vector<Column> columns, std::vector<EncodedRow> rows)
    : columns_(std::move(columns)), rows_(std::move(rows)) {
  for (const auto& r : rows_) {
    if (r.x.size() != columns_.size()) throw DataError("encoded row length does not match column count");
    for (auto v : r.x)
      if (v > 1) throw DataError("encoded row has a non-binary entry");
    (r.label == Label::Abnormal ? n_abnormal_ : n_normal_)++;
  }
}

std::optional<std::size_t> EncodedCohort::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

EncodedCohort EncodedCohort::select_columns(std::span<const std::size_t> keep) const {
  std::vector<Column> cols;
  cols.reserve(keep.size());
  for (auto k : keep) {
    if (k >= columns_.size()) throw UsageError("column index out of range");
    cols.push_back(columns_[k]);
  }
  std::vector<EncodedRow> rows;
  rows.reserve(rows_.size());
  for (const auto& r : rows_) {
    EncodedRow nr{{}, r.label, r.origin};
    nr.x.reserve(keep.size());
    for (auto k : keep) nr.x.push_back(r.x[k]);
    rows.push_back(std::move(nr));
  }
  return EncodedCohort(std::move(cols), std::move(rows));
}

EncodedCohort EncodedCohort::drop_columns(std::span<const std::string> names) const {
  for (const auto& n : names)
    if (!column_index(n)) throw UsageError("unknown column '" + n + "'");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (std::find(names.begin(), names.end(), columns_[i].name) == names.end()) keep.push_back(i);
  return select_columns(keep);
}

EncodedCohort EncodedCohort::drop_categories(std::span<const Category> categories) const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (std::find(categories.begin(), categories.end(), columns_[i].category) == categories.end()) keep.push_back(i);
  return select_columns(keep);
}

// ---------------------------------------------------------------------------
// Ingestion

IngestResult ingest(const FeatureSchema& schema, std::span<const PatientRecord> records) {
  IngestResult result;
  result.stats = compute_stats(schema, records);

  std::vector<std::optional<PatientRecord>> imputed(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      imputed[i] = impute(records[i], schema, result.stats);
    } catch (const RecordRejected& e) {
      result.rejected.push_back({i, e.what()});
    }
  }

  std::map<std::string, std::vector<double>> numeric;
  for (const auto& f : schema.fields()) {
    if (f.kind != FieldKind::Numeric || f.resolved()) continue;
    auto& vals = numeric[f.name];
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!imputed[i]) continue;
      if (auto raw = records[i].get(f.name))
        if (auto v = parse_number(*raw)) vals.push_back(*v);
    }
  }
  result.schema = schema.with_resolved_bins(numeric);

  std::vector<EncodedRow> rows;
  rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!imputed[i]) continue;
    try {
      auto enc = binarize(*imputed[i], result.schema);
      rows.push_back({std::move(enc.x), enc.label, i});
    } catch (const RecordRejected& e) {
      result.rejected.push_back({i, e.what()});
    }
  }
  std::sort(result.rejected.begin(), result.rejected.end(),
            [](const Rejection& a, const Rejection& b) { return a.record_index < b.record_index; });
  result.cohort = EncodedCohort(result.schema.columns(), std::move(rows));
  return result;
}

std::vector<PatientRecord> read_records_csv(std::istream& in, const FeatureSchema& schema) {
  auto rows = csv::read(in);
  if (rows.empty()) throw DataError("cohort csv: missing header row");
  const auto& header = rows.front();
  for (const auto& name : header)
    if (schema.find(name) == nullptr) throw DataError("cohort csv: column '" + name + "' is not a schema field");
  std::vector<PatientRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw DataError("cohort csv: row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                      " cells, header has " + std::to_string(header.size()));
    PatientRecord rec;
    for (std::size_t c = 0; c < header.size(); ++c)
      if (!rows[r][c].empty()) rec.values[header[c]] = rows[r][c];
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<PatientRecord> read_records_csv(const std::string& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cohort not found: " + path);
  return read_records_csv(in, schema);
}

void write_records_csv(std::ostream& out, const FeatureSchema& schema, std::span<const PatientRecord> records) {
  csv::Row header;
  for (const auto& f : schema.fields()) header.push_back(f.name);
  csv::write_row(out, header);
  for (const auto& r : records) {
    csv::Row row;
    for (const auto& f : schema.fields()) row.emplace_back(r.get(f.name).value_or(""));
    csv::write_row(out, row);
  }
}

void write_encoded_csv(std::ostream& out, const EncodedCohort& cohort, std::string_view label_name) {
  csv::Row header;
  for (const auto& c : cohort.columns()) header.push_back(c.name);
  header.emplace_back(label_name);
  csv::write_row(out, header);
  for (const auto& r : cohort.rows()) {
    for (auto v : r.x) out << static_cast<int>(v) << ',';
    out << to_string(r.label) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Split and supersample

SplitResult split(const EncodedCohort& cohort, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("split fraction must be in (0, 1)");
  if (cohort.size() == 0) throw DataError("cannot split an empty cohort");

  std::vector<std::size_t> order(cohort.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(cohort.size())));
  std::vector<EncodedRow> train, test;
  train.reserve(n_train);
  test.reserve(cohort.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? train : test).push_back(cohort.rows()[order[i]]);
  return {EncodedCohort(cohort.columns(), std::move(train)), EncodedCohort(cohort.columns(), std::move(test)), seed};
}

EncodedCohort supersample(const EncodedCohort& cohort, int factor) {
  if (factor < 0) throw UsageError("supersample factor must be >= 0");
  std::vector<EncodedRow> rows = cohort.rows();
  rows.reserve(cohort.size() + cohort.n_abnormal() * static_cast<std::size_t>(factor));
  for (int k = 0; k < factor; ++k)
    for (const auto& r : cohort.rows())
      if (r.label == Label::Abnormal) rows.push_back(r);
  return EncodedCohort(cohort.columns(), std::move(rows));
}

}  // namespace screening
