#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "screening/pipeline.hpp"
#include "screening/run_store.hpp"
#include "screening/selector.hpp"

namespace screening {

// Command snapshots are complete descriptions of a run ({"command", "pipeline",
// ...}); executing one twice yields identical results. The CLI and the HTTP
// service both go through execute(), so their outputs match.
nlohmann::json train_snapshot(const PipelineConfig& cfg);
nlohmann::json sweep_snapshot(const PipelineConfig& cfg, const std::vector<std::string>& order);
nlohmann::json select_snapshot(const PipelineConfig& cfg, const BudgetQuery& query, const std::vector<TestAttr>& tests);

struct Execution {
  nlohmann::json results;
  std::optional<TrainedModel> model;  // train only
  std::vector<std::string> warnings;  // convergence warnings
};

// `prepared` may carry an already ingested cohort for the same pipeline config.
Execution execute(const nlohmann::json& snapshot, unsigned workers = 0, const PreparedCohort* prepared = nullptr);

// Digests of the schema / cohort / tests files a config reads.
nlohmann::json input_digests(const PipelineConfig& cfg);

// Appends a run record (and registers the model, if any).
RunRecord record_run(RunStore& store, const nlohmann::json& snapshot, const Execution& exec);

// Tests table for a config: the file it names or the bundled table.
std::vector<TestAttr> tests_for(const PipelineConfig& cfg);

struct GenerateSummary {
  std::size_t records = 0;
  std::size_t abnormal = 0;
  std::size_t columns = 0;
};

// Writes the synthetic cohort as raw records (cohort CSV) or, with `encoded`,
// as the 0/1 export.
GenerateSummary cmd_generate(const PipelineConfig& cfg, std::ostream& out, bool encoded);

void write_sweep_csv(std::ostream& out, const nlohmann::json& sweep_results);
void write_option_report_csv(std::ostream& out, const nlohmann::json& select_results);

struct ReplayReport {
  bool identical = false;
  nlohmann::json replayed;
};

ReplayReport replay(const RunRecord& record, unsigned workers = 0);

}  // namespace screening
