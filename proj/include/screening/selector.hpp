#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "screening/cohort.hpp"
#include "screening/pipeline.hpp"

namespace screening {

struct TestAttr {
  std::string name;
  double cost = 0.0;        // currency units, INR in the bundled table
  double discomfort = 0.0;  // index in [0, 10]
  std::vector<std::string> feature_columns;
};

std::vector<TestAttr> tests_from_json(const nlohmann::json& j);
nlohmann::json tests_to_json(const std::vector<TestAttr>& tests);
std::vector<TestAttr> load_tests(const std::string& path);
std::vector<TestAttr> default_tests();

// Every test's columns must exist in the cohort and belong to BCT.
void check_tests_against(const std::vector<TestAttr>& tests, const EncodedCohort& cohort);

// cost:       keep tests with total cost <= budget
// discomfort: remove tests with total discomfort <= budget
// endured:    keep tests with total discomfort <= budget
enum class BudgetMode { CostSelect, DiscomfortRemove, DiscomfortEndured };

std::string_view to_string(BudgetMode m);
BudgetMode budget_mode_from_string(std::string_view s);

struct BudgetQuery {
  BudgetMode mode = BudgetMode::CostSelect;
  double budget = 0.0;
  Protocol protocol = Protocol::Paper;
};

nlohmann::json to_json(const BudgetQuery& q);
BudgetQuery budget_query_from_json(const nlohmann::json& j);

struct OptionResult {
  std::size_t fa = 0;
  std::size_t population = 0;  // calibration rows FA is counted over
  double fa_rate = 0.0;
  double threshold = 0.5;
  double accuracy = 0.0;
  std::optional<double> sensitivity;
  std::size_t fn = 0;
  bool converged = true;
  std::string warning;
};

struct TestOption {
  std::size_t id = 0;  // 1-based position in enumeration order
  std::vector<std::string> kept;
  std::vector<std::string> removed;
  double total_cost = 0.0;        // of kept tests
  double total_discomfort = 0.0;  // of kept tests
  double budget_used = 0.0;       // constrained quantity of the chosen set
  std::vector<std::size_t> chosen;  // test indices the budget applies to
  std::optional<OptionResult> result;
};

nlohmann::json to_json(const TestOption& o);

// Every chosen set within budget that no further test can join. Sorted by
// budget_used descending, then lexicographically by chosen indices.
std::vector<TestOption> enumerate_maximal(const std::vector<TestAttr>& tests, const BudgetQuery& query);

// Drops the removed tests' columns, retrains and recalibrates.
TestOption evaluate_option(const TestOption& option, const std::vector<TestAttr>& tests, const EncodedCohort& cohort,
                           const PipelineConfig& cfg);

// Best first: FA ascending; ties by lower kept cost (cost mode), higher
// removed discomfort (discomfort mode) or lower endured discomfort, then by
// chosen indices.
void rank_options(std::vector<TestOption>& options, BudgetMode mode);

// enumerate -> evaluate (worker pool) -> rank. `workers` = 0 picks the
// hardware concurrency.
std::vector<TestOption> select_best(const BudgetQuery& query, const std::vector<TestAttr>& tests,
                                    const EncodedCohort& cohort, const PipelineConfig& cfg, unsigned workers = 0);

struct AblationPoint {
  std::size_t removed = 0;
  std::size_t n_features = 0;
  double accuracy_init = 0.0;
  double accuracy_post = 0.0;
  std::size_t fa_init = 0;
  std::size_t fa_post = 0;
  std::size_t fn_init = 0;
  std::size_t fn_post = 0;
  double threshold = 0.5;
  std::size_t population = 0;
};

nlohmann::json to_json(const AblationPoint& p);

// BCT columns in declaration order.
std::vector<std::string> default_removal_order(const EncodedCohort& cohort);

// Point k drops the first k columns of `removal_order`, k = 0..size.
std::vector<AblationPoint> ablation_sweep(const EncodedCohort& cohort, const std::vector<std::string>& removal_order,
                                          const PipelineConfig& cfg, unsigned workers = 0);

}  // namespace screening
