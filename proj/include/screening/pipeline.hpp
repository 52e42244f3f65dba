#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "screening/calibrator.hpp"
#include "screening/cohort.hpp"
#include "screening/learner.hpp"
#include "screening/poly_expand.hpp"
#include "screening/synth.hpp"

namespace screening {

// paper:   supersample -> split -> train -> calibrate on the test part.
//          Duplicated abnormal rows can land on both sides of the split, and
//          the threshold is fitted on the rows it is reported on.
// holdout: split into train / calibration / test, supersample train only,
//          calibrate on the calibration part, report the test part.
enum class Protocol { Paper, Holdout };

std::string_view to_string(Protocol p);
Protocol protocol_from_string(std::string_view s);

enum class ModelKind { LogisticRegression, NaiveBayes };

struct PipelineConfig {
  std::string schema_path;  // empty: bundled schema
  std::string cohort_path;  // empty: synthetic cohort from `synth`
  std::string tests_path;   // empty: bundled test attribute table
  SynthConfig synth = default_synth_config();

  int degree = 3;
  ExpansionMode mode = ExpansionMode::Multiset;
  ModelKind model = ModelKind::LogisticRegression;
  Penalty penalty = Penalty::l2(1e-8);
  double tol = 1e-8;
  int max_epochs = 1000;
  double nb_alpha = 1.0;

  Protocol protocol = Protocol::Paper;
  int supersample = 10;
  double train_fraction = 2.0 / 3.0;
  double calibration_fraction = 0.5;  // holdout: share of the non-train rows
  std::vector<Category> exclude_categories{Category::MP};

  // Single source of randomness: drives the synthetic cohort and every split.
  std::uint64_t seed = 42;

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::string& path);

// Ingested cohort with excluded categories removed.
struct PreparedCohort {
  FeatureSchema schema;  // bins resolved
  CohortStats stats;
  EncodedCohort full;  // every schema column
  EncodedCohort base;  // columns used by the model
  std::vector<Rejection> rejected;
};

PreparedCohort prepare_cohort(const PipelineConfig& cfg);

struct PipelineResult {
  std::vector<std::string> columns;  // base columns the model saw
  std::size_t train_size = 0;
  ConfusionMatrix train_cm;        // training rows at threshold 0.5
  ConfusionMatrix calibration_init;  // calibration rows at 0.5
  ThresholdResult calibrated;      // calibration rows at the fitted threshold
  std::optional<ConfusionMatrix> test_post;  // holdout only
  bool converged = true;
  int epochs = 0;
  std::string warning;

  ModelWeights weights;  // logistic regression
  std::optional<NbModel> nb;

  std::size_t calibration_size() const { return calibrated.cm.total(); }
};

// Runs the configured pipeline on `cohort` (already restricted to the
// model's columns). Deterministic for a fixed config.
PipelineResult run_pipeline(const EncodedCohort& cohort, const PipelineConfig& cfg);

// Metrics only (no weights), the form stored in run records.
nlohmann::json metrics_json(const PipelineResult& r);

// Everything needed to score a raw record later.
struct TrainedModel {
  FeatureSchema schema;
  CohortStats stats;
  std::vector<std::string> columns;
  PipelineConfig config;
  double threshold = 0.5;
  ModelWeights weights;
  std::optional<NbModel> nb;
};

TrainedModel make_trained_model(const PreparedCohort& prepared, const PipelineConfig& cfg, const PipelineResult& r);

nlohmann::json to_json(const TrainedModel& m);
TrainedModel trained_model_from_json(const nlohmann::json& j);

struct Prediction {
  double p_abnormal = 0.0;
  double z_normal = 1.0;
  Label decision = Label::Normal;
};

// impute -> encode -> expand -> score; decision at the stored threshold.
Prediction predict_record(const TrainedModel& model, const PatientRecord& record);

}  // namespace screening
