#include "screening/commands.hpp"

#include <filesystem>
#include <ostream>

#include "screening/csv.hpp"
#include "screening/error.hpp"

namespace screening {

namespace {

using nlohmann::json;

std::string join(const json& names, char sep) {
  std::string s;
  for (const auto& n : names) {
    if (!s.empty()) s += sep;
    s += n.get<std::string>();
  }
  return s;
}

std::string number(const json& v) {
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

json train_snapshot(const PipelineConfig& cfg) { return {{"command", "train"}, {"pipeline", to_json(cfg)}}; }

json sweep_snapshot(const PipelineConfig& cfg, const std::vector<std::string>& order) {
  return {{"command", "sweep"}, {"pipeline", to_json(cfg)}, {"order", order}};
}

json select_snapshot(const PipelineConfig& cfg, const BudgetQuery& query, const std::vector<TestAttr>& tests) {
  return {{"command", "select"}, {"pipeline", to_json(cfg)}, {"query", to_json(query)}, {"tests", tests_to_json(tests)}};
}

std::vector<TestAttr> tests_for(const PipelineConfig& cfg) {
  return cfg.tests_path.empty() ? default_tests() : load_tests(cfg.tests_path);
}

Execution execute(const json& snapshot, unsigned workers, const PreparedCohort* prepared) {
  const std::string command = snapshot.at("command").get<std::string>();
  const PipelineConfig cfg = pipeline_config_from_json(snapshot.at("pipeline"));
  std::optional<PreparedCohort> own;
  if (prepared == nullptr) {
    own = prepare_cohort(cfg);
    prepared = &*own;
  }

  Execution exec;
  if (command == "train") {
    const PipelineResult r = run_pipeline(prepared->base, cfg);
    exec.results = {{"metrics", metrics_json(r)},
                    {"calibration", calibration_report(r.calibrated, to_string(cfg.protocol))},
                    {"rejected_records", prepared->rejected.size()}};
    if (!r.converged) exec.warnings.push_back(r.warning);
    exec.model = make_trained_model(*prepared, cfg, r);
  } else if (command == "sweep") {
    auto order = snapshot.at("order").get<std::vector<std::string>>();
    if (order.empty()) order = default_removal_order(prepared->base);
    const auto points = ablation_sweep(prepared->base, order, cfg, workers);
    json pts = json::array();
    for (const auto& p : points) pts.push_back(to_json(p));
    exec.results = {{"order", order}, {"points", pts}};
  } else if (command == "select") {
    const BudgetQuery query = budget_query_from_json(snapshot.at("query"));
    const auto tests = tests_from_json(snapshot.at("tests"));
    const auto ranked = select_best(query, tests, prepared->base, cfg, workers);
    json opts = json::array();
    for (const auto& o : ranked) {
      opts.push_back(to_json(o));
      if (o.result && !o.result->converged) exec.warnings.push_back("option " + std::to_string(o.id) + ": " + o.result->warning);
    }
    exec.results = {{"query", to_json(query)}, {"option_count", ranked.size()}, {"best", ranked.front().id},
                    {"options", opts}};
  } else {
    throw UsageError("unknown command '" + command + "'");
  }
  return exec;
}

json input_digests(const PipelineConfig& cfg) {
  json d = json::object();
  d["schema"] = cfg.schema_path.empty() ? "bundled" : file_digest(cfg.schema_path);
  d["cohort"] = cfg.cohort_path.empty() ? "synthetic" : file_digest(cfg.cohort_path);
  d["tests"] = cfg.tests_path.empty() ? "bundled" : file_digest(cfg.tests_path);
  return d;
}

RunRecord record_run(RunStore& store, const json& snapshot, const Execution& exec) {
  RunRecord rec;
  rec.config = snapshot;
  rec.inputs = input_digests(pipeline_config_from_json(snapshot.at("pipeline")));
  rec.results = exec.results;
  rec = store.append(std::move(rec));
  if (exec.model) store.save_model(rec.run_id, to_json(*exec.model));
  return rec;
}

GenerateSummary cmd_generate(const PipelineConfig& cfg, std::ostream& out, bool encoded) {
  const FeatureSchema schema = cfg.schema_path.empty() ? default_schema() : load_schema(cfg.schema_path);
  SynthConfig synth = cfg.synth;
  synth.seed = cfg.seed;
  GenerateSummary s;
  if (encoded) {
    const auto ingested = generate_synthetic_ingested(synth, schema);
    write_encoded_csv(out, ingested.cohort, schema.label_field().name);
    s.records = ingested.cohort.size();
    s.abnormal = ingested.cohort.n_abnormal();
    s.columns = ingested.cohort.dim();
  } else {
    const auto records = synthesize_records(schema, synth);
    write_records_csv(out, schema, records);
    s.records = records.size();
    s.abnormal = synth.n_abnormal;
    s.columns = schema.fields().size();
  }
  return s;
}

void write_sweep_csv(std::ostream& out, const json& sweep_results) {
  csv::write_row(out, {"removed", "n_features", "accuracy_init", "accuracy_post", "fa_init", "fa_post", "fn_post",
                       "threshold", "population"});
  for (const auto& p : sweep_results.at("points")) {
    csv::write_row(out, {number(p["removed"]), number(p["n_features"]), number(p["accuracy_init"]),
                         number(p["accuracy_post"]), number(p["fa_init"]), number(p["fa_post"]), number(p["fn_post"]),
                         number(p["threshold"]), number(p["population"])});
  }
}

void write_option_report_csv(std::ostream& out, const json& select_results) {
  csv::write_row(out, {"rank", "option_id", "kept_tests", "removed_tests", "total_cost", "total_discomfort", "fa",
                       "fa_rate", "threshold", "accuracy"});
  std::size_t rank = 0;
  for (const auto& o : select_results.at("options")) {
    csv::write_row(out, {std::to_string(++rank), number(o["id"]), join(o["kept"], ';'), join(o["removed"], ';'),
                         number(o["total_cost"]), number(o["total_discomfort"]), number(o["fa"]),
                         number(o["fa_rate"]), number(o["threshold"]), number(o["accuracy"])});
  }
}

ReplayReport replay(const RunRecord& record, unsigned workers) {
  ReplayReport rep;
  rep.replayed = execute(record.config, workers).results;
  rep.identical = rep.replayed == record.results;
  return rep;
}

}  // namespace screening
