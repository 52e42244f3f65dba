#include "screening/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "screening/error.hpp"

namespace screening {

namespace {

using nlohmann::json;

json nb_to_json(const NbModel& m) {
  return {{"prior_abnormal", m.prior_abnormal},
          {"prior_normal", m.prior_normal},
          {"p1_abnormal", m.p1_abnormal},
          {"p1_normal", m.p1_normal},
          {"alpha", m.alpha}};
}

NbModel nb_from_json(const json& j) {
  NbModel m;
  m.prior_abnormal = j.at("prior_abnormal").get<double>();
  m.prior_normal = j.at("prior_normal").get<double>();
  m.p1_abnormal = j.at("p1_abnormal").get<std::vector<double>>();
  m.p1_normal = j.at("p1_normal").get<std::vector<double>>();
  m.alpha = j.at("alpha").get<double>();
  return m;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(); }

json cm_summary(const ConfusionMatrix& cm) {
  return {{"confusion", to_json(cm)},
          {"accuracy", cm.total() ? json(accuracy(cm)) : json()},
          {"sensitivity", optional_number(sensitivity(cm))}};
}

// Scores rows of `cohort` as P(normal).
std::vector<ScoredInstance> score(const EncodedCohort& cohort, const PipelineResult& r, const MonomialIndex* index) {
  std::vector<ScoredInstance> out;
  out.reserve(cohort.size());
  for (const auto& row : cohort.rows()) {
    const double p = r.nb ? predict_nb(*r.nb, row.x) : predict_proba(r.weights, index->expand(row.x));
    out.push_back({to_normal_prob(p), row.label, row.origin});
  }
  return out;
}

}  // namespace

std::string_view to_string(Protocol p) { return p == Protocol::Holdout ? "holdout" : "paper"; }

Protocol protocol_from_string(std::string_view s) {
  if (s == "paper") return Protocol::Paper;
  if (s == "holdout") return Protocol::Holdout;
  throw UsageError("unknown protocol '" + std::string(s) + "'");
}

void PipelineConfig::validate() const {
  if (degree < 1) throw UsageError("degree must be >= 1");
  if (supersample < 0) throw UsageError("supersample factor must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw UsageError("train_fraction must be in (0, 1)");
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0))
    throw UsageError("calibration_fraction must be in (0, 1)");
  if (!(tol > 0.0)) throw UsageError("tol must be > 0");
  if (max_epochs < 1) throw UsageError("max_epochs must be >= 1");
  if (!(nb_alpha >= 0.0)) throw UsageError("nb_alpha must be >= 0");
  for (auto c : exclude_categories)
    if (c == Category::Label) throw UsageError("the label cannot be excluded");
}

json to_json(const PipelineConfig& cfg) {
  json excluded = json::array();
  for (auto c : cfg.exclude_categories) excluded.push_back(to_string(c));
  return {{"schema", cfg.schema_path},
          {"cohort", cfg.cohort_path},
          {"tests", cfg.tests_path},
          {"synthetic", to_json(cfg.synth)},
          {"degree", cfg.degree},
          {"expansion", to_string(cfg.mode)},
          {"model", cfg.model == ModelKind::NaiveBayes ? "nb" : "lr"},
          {"penalty", to_json(cfg.penalty)},
          {"tol", cfg.tol},
          {"max_epochs", cfg.max_epochs},
          {"nb_alpha", cfg.nb_alpha},
          {"protocol", to_string(cfg.protocol)},
          {"supersample", cfg.supersample},
          {"train_fraction", cfg.train_fraction},
          {"calibration_fraction", cfg.calibration_fraction},
          {"exclude_categories", excluded},
          {"seed", cfg.seed}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig cfg;
  try {
    cfg.schema_path = j.value("schema", cfg.schema_path);
    cfg.cohort_path = j.value("cohort", cfg.cohort_path);
    cfg.tests_path = j.value("tests", cfg.tests_path);
    if (j.contains("synthetic")) cfg.synth = synth_config_from_json(j.at("synthetic"));
    cfg.degree = j.value("degree", cfg.degree);
    if (j.contains("expansion")) cfg.mode = expansion_mode_from_string(j.at("expansion").get<std::string>());
    if (j.contains("model")) {
      const auto m = j.at("model").get<std::string>();
      if (m == "lr") {
        cfg.model = ModelKind::LogisticRegression;
      } else if (m == "nb") {
        cfg.model = ModelKind::NaiveBayes;
      } else {
        throw UsageError("unknown model '" + m + "'");
      }
    }
    if (j.contains("penalty")) cfg.penalty = penalty_from_json(j.at("penalty"));
    cfg.tol = j.value("tol", cfg.tol);
    cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
    cfg.nb_alpha = j.value("nb_alpha", cfg.nb_alpha);
    if (j.contains("protocol")) cfg.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    cfg.supersample = j.value("supersample", cfg.supersample);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.calibration_fraction = j.value("calibration_fraction", cfg.calibration_fraction);
    if (j.contains("exclude_categories")) {
      cfg.exclude_categories.clear();
      for (const auto& c : j.at("exclude_categories")) cfg.exclude_categories.push_back(category_from_string(c.get<std::string>()));
    }
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw UsageError(std::string("pipeline config: ") + e.what());
  } catch (const SchemaError& e) {
    throw UsageError(std::string("pipeline config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return pipeline_config_from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config parse failure: ") + e.what());
  }
}

PreparedCohort prepare_cohort(const PipelineConfig& cfg) {
  cfg.validate();
  const FeatureSchema schema = cfg.schema_path.empty() ? default_schema() : load_schema(cfg.schema_path);
  IngestResult ingested;
  if (cfg.cohort_path.empty()) {
    SynthConfig synth = cfg.synth;
    synth.seed = cfg.seed;
    ingested = generate_synthetic_ingested(synth, schema);
  } else {
    const auto records = read_records_csv(cfg.cohort_path, schema);
    ingested = ingest(schema, records);
  }
  PreparedCohort p;
  p.schema = std::move(ingested.schema);
  p.stats = std::move(ingested.stats);
  p.base = ingested.cohort.drop_categories(cfg.exclude_categories);
  p.full = std::move(ingested.cohort);
  p.rejected = std::move(ingested.rejected);
  if (p.base.dim() == 0) throw DataError("no feature columns left after exclusions");
  return p;
}

PipelineResult run_pipeline(const EncodedCohort& cohort, const PipelineConfig& cfg) {
  cfg.validate();
  if (cohort.dim() == 0) throw DataError("cohort has no feature columns");

  EncodedCohort train, calibration;
  std::optional<EncodedCohort> test;
  if (cfg.protocol == Protocol::Paper) {
    auto parts = split(supersample(cohort, cfg.supersample), cfg.train_fraction, cfg.seed);
    train = std::move(parts.train);
    calibration = std::move(parts.test);
  } else {
    auto outer = split(cohort, cfg.train_fraction, cfg.seed);
    auto inner = split(outer.test, cfg.calibration_fraction, cfg.seed + 1);
    train = supersample(outer.train, cfg.supersample);
    calibration = std::move(inner.train);
    test = std::move(inner.test);
  }
  if (calibration.size() == 0) throw DataError("calibration set is empty");

  PipelineResult r;
  for (const auto& c : cohort.columns()) r.columns.push_back(c.name);
  r.train_size = train.size();

  std::optional<MonomialIndex> index;
  if (cfg.model == ModelKind::NaiveBayes) {
    r.nb = train_nb(train, cfg.nb_alpha);
  } else {
    index.emplace(cohort.dim(), cfg.degree, cfg.mode);
    const SparseDataset data = expand_cohort(train, *index);
    TrainConfig tc;
    tc.penalty = cfg.penalty;
    tc.tol = cfg.tol;
    tc.max_epochs = cfg.max_epochs;
    tc.seed = cfg.seed;
    TrainResult tr = train_lr(data, tc);
    r.converged = tr.converged;
    r.epochs = tr.epochs;
    r.warning = tr.warning;
    r.weights = std::move(tr.model);
  }
  const MonomialIndex* idx = index ? &*index : nullptr;

  const auto train_scores = score(train, r, idx);
  r.train_cm = confusion(train_scores, 0.5);
  const auto calib_scores = score(calibration, r, idx);
  r.calibration_init = confusion(calib_scores, 0.5);
  r.calibrated = calibrate(calib_scores);
  if (test && test->size() > 0) r.test_post = confusion(score(*test, r, idx), r.calibrated.threshold);
  return r;
}

json metrics_json(const PipelineResult& r) {
  json j{{"n_features", r.columns.size()},
         {"train_size", r.train_size},
         {"train_at_0_5", cm_summary(r.train_cm)},
         {"calibration_size", r.calibration_size()},
         {"calibration_at_0_5", cm_summary(r.calibration_init)},
         {"threshold", r.calibrated.threshold},
         {"calibration_post", cm_summary(r.calibrated.cm)},
         {"fa", r.calibrated.fa},
         {"fa_rate", r.calibration_size() ? json(static_cast<double>(r.calibrated.fa) / r.calibration_size()) : json()},
         {"converged", r.converged},
         {"epochs", r.epochs}};
  if (r.test_post) j["test_post"] = cm_summary(*r.test_post);
  if (!r.warning.empty()) j["warning"] = r.warning;
  return j;
}

TrainedModel make_trained_model(const PreparedCohort& prepared, const PipelineConfig& cfg, const PipelineResult& r) {
  TrainedModel m;
  m.schema = prepared.schema;
  m.stats = prepared.stats;
  m.columns = r.columns;
  m.config = cfg;
  m.threshold = r.calibrated.threshold;
  m.weights = r.weights;
  m.nb = r.nb;
  return m;
}

json to_json(const TrainedModel& m) {
  json j{{"format", "screening-model"},
         {"version", 1},
         {"schema", m.schema.to_json()},
         {"stats", to_json(m.stats)},
         {"columns", m.columns},
         {"config", to_json(m.config)},
         {"threshold", m.threshold}};
  if (m.nb) {
    j["nb"] = nb_to_json(*m.nb);
  } else {
    LrModelFile lr;
    lr.mode = m.config.mode;
    lr.degree = m.config.degree;
    lr.base_dim = m.columns.size();
    lr.penalty = m.config.penalty;
    lr.weights = m.weights;
    j["lr"] = to_json(lr);
  }
  return j;
}

TrainedModel trained_model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "screening-model") throw DataError("not a screening model file");
    TrainedModel m;
    m.schema = FeatureSchema::from_json(j.at("schema"));
    m.stats = cohort_stats_from_json(j.at("stats"));
    m.columns = j.at("columns").get<std::vector<std::string>>();
    m.config = pipeline_config_from_json(j.at("config"));
    m.threshold = j.at("threshold").get<double>();
    if (j.contains("nb")) {
      m.nb = nb_from_json(j.at("nb"));
    } else {
      m.weights = lr_model_from_json(j.at("lr")).weights;
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

Prediction predict_record(const TrainedModel& model, const PatientRecord& record) {
  PatientRecord rec = record;
  const FieldSpec& label = model.schema.label_field();
  rec.values.erase(label.name);
  rec.values[label.name] = label.values[0];  // placeholder; features only are used
  const PatientRecord imputed = impute(rec, model.schema, model.stats);
  const auto full = binarize_features(imputed, model.schema);
  const auto all_columns = model.schema.columns();

  std::vector<std::uint8_t> x;
  x.reserve(model.columns.size());
  for (const auto& name : model.columns) {
    std::size_t k = 0;
    while (k < all_columns.size() && all_columns[k].name != name) ++k;
    if (k == all_columns.size()) throw DataError("model column '" + name + "' missing from schema");
    x.push_back(full[k]);
  }

  Prediction p;
  if (model.nb) {
    p.p_abnormal = predict_nb(*model.nb, x);
  } else {
    const MonomialIndex index(x.size(), model.config.degree, model.config.mode);
    p.p_abnormal = predict_proba(model.weights, index.expand(x));
  }
  p.z_normal = to_normal_prob(p.p_abnormal);
  p.decision = p.z_normal > model.threshold ? Label::Normal : Label::Abnormal;
  return p;
}

}  // namespace screening
