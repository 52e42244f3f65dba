#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "screening/cohort.hpp"
#include "screening/pipeline.hpp"
#include "screening/rng.hpp"

namespace fixture {

using screening::Category;
using screening::Column;
using screening::EncodedCohort;
using screening::EncodedRow;
using screening::Label;

inline nlohmann::json label_field_json() {
  return {{"name", "Outcome"},
          {"category", "Label"},
          {"kind", "nominal"},
          {"values", {"normal", "abnormal"}},
          {"impute", {{"rule", "reject"}}}};
}

inline nlohmann::json flag_json(const std::string& name, const std::string& category) {
  return {{"name", name}, {"category", category}, {"kind", "flag"}, {"values", {"no", "yes"}}};
}

// Columns: BCT Signal, Noise, Extra; Lifestyle L1, L2, L3. A row is abnormal
// iff Signal and L1 are both set, so Noise and Extra carry no information.
inline EncodedCohort signal_noise_cohort(std::size_t n, std::uint64_t seed) {
  std::vector<Column> cols{{"Signal", Category::BCT, "Signal"}, {"Noise", Category::BCT, "Noise"},
                           {"Extra", Category::BCT, "Extra"},   {"L1", Category::Lifestyle, "L1"},
                           {"L2", Category::Lifestyle, "L2"},   {"L3", Category::Lifestyle, "L3"}};
  screening::Rng rng(seed);
  std::vector<EncodedRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    EncodedRow r;
    for (std::size_t j = 0; j < cols.size(); ++j) r.x.push_back(rng.bernoulli(0.5) ? 1 : 0);
    r.label = r.x[0] && r.x[3] ? Label::Abnormal : Label::Normal;
    r.origin = i;
    rows.push_back(std::move(r));
  }
  return EncodedCohort(cols, rows);
}

// Small synthetic cohort on the bundled schema, fast enough for unit tests.
inline screening::PipelineConfig quick_config() {
  screening::PipelineConfig cfg;
  cfg.synth.n_total = 500;
  cfg.synth.n_abnormal = 25;
  cfg.degree = 2;
  cfg.mode = screening::ExpansionMode::Dedup;
  cfg.max_epochs = 300;
  cfg.tol = 1e-6;
  cfg.seed = 11;
  return cfg;
}

}  // namespace fixture
