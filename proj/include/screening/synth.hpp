#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "screening/cohort.hpp"

namespace screening {

// A deterministic label rule over flag fields. A conjunction fires when every
// field is positive, a parity rule when an odd number are. A firing rule
// implies its class; `noise` is the probability that the implied label is
// flipped.
struct PlantedRule {
  enum class Kind { Conjunction, Parity };

  std::vector<std::string> fields;
  Kind kind = Kind::Conjunction;
  Label implies = Label::Abnormal;
  double noise = 0.0;
};

// Field whose non-baseline value depends on the class (the MP-like block).
struct LinkedField {
  double p_abnormal = 0.85;
  double p_normal = 0.05;
};

struct SynthConfig {
  std::size_t n_total = 3689;
  std::size_t n_abnormal = 92;
  std::vector<PlantedRule> planted_rules;
  std::map<std::string, double> base_rates;  // P(positive) for flag fields
  double default_rate = 0.25;
  std::map<std::string, LinkedField> label_linked;
  double missing_rate = 0.0;  // only fields outside rules and links go missing
  std::uint64_t seed = 7;
};

// 3689 records, 92 abnormal, three planted rules on the bundled schema:
// Weight Loss => abnormal; parity(Tobacco Chewing, Neck Nodes,
// Family Cancer Last 5 Years) => abnormal; Tuberculosis AND Cigarette Smoking
// => abnormal. Every MP field is label-linked.
SynthConfig default_synth_config();

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

// Throws UsageError on broken invariants, DataError on rules that imply both
// classes for the same feature pattern.
void validate(const SynthConfig& cfg, const FeatureSchema& schema);

// Raw records (the cohort CSV format) with exact class counts.
std::vector<PatientRecord> synthesize_records(const FeatureSchema& schema, const SynthConfig& cfg);

// Synthesize then ingest.
IngestResult generate_synthetic_ingested(const SynthConfig& cfg, const FeatureSchema& schema);
EncodedCohort generate_synthetic(const SynthConfig& cfg, const FeatureSchema& schema);
EncodedCohort generate_synthetic(const SynthConfig& cfg);

}  // namespace screening
