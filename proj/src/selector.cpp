#include "screening/selector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "screening/bundled_data.hpp"
#include "screening/error.hpp"

namespace screening {

namespace {

using nlohmann::json;

// Runs fn(i) for i in [0, n) on a bounded pool. Each index writes its own
// slot, so results do not depend on scheduling. The first exception wins.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double weight_of(const TestAttr& t, BudgetMode mode) { return mode == BudgetMode::CostSelect ? t.cost : t.discomfort; }

bool within(double sum, double budget) { return sum <= budget + 1e-9 * std::max(1.0, std::abs(budget)); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(); }

}  // namespace

std::vector<TestAttr> tests_from_json(const json& j) {
  std::vector<TestAttr> tests;
  try {
    const json& arr = j.is_array() ? j : j.at("tests");
    for (const auto& tj : arr) {
      TestAttr t;
      t.name = tj.at("name").get<std::string>();
      t.cost = tj.at("cost").get<double>();
      t.discomfort = tj.at("discomfort").get<double>();
      t.feature_columns = tj.contains("columns") ? tj.at("columns").get<std::vector<std::string>>()
                                                 : std::vector<std::string>{t.name};
      tests.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("test attributes: ") + e.what());
  }
  std::set<std::string> names;
  for (const auto& t : tests) {
    if (!names.insert(t.name).second) throw DataError("duplicate test '" + t.name + "'");
    if (!(t.cost >= 0.0) || !std::isfinite(t.cost)) throw DataError("test '" + t.name + "': cost must be >= 0");
    if (!(t.discomfort >= 0.0) || !std::isfinite(t.discomfort))
      throw DataError("test '" + t.name + "': discomfort must be >= 0");
    if (t.feature_columns.empty()) throw DataError("test '" + t.name + "': no feature columns");
  }
  if (tests.size() > 30) throw DataError("too many tests for exhaustive enumeration");
  return tests;
}

json tests_to_json(const std::vector<TestAttr>& tests) {
  json arr = json::array();
  for (const auto& t : tests)
    arr.push_back({{"name", t.name}, {"cost", t.cost}, {"discomfort", t.discomfort}, {"columns", t.feature_columns}});
  return json{{"tests", arr}};
}

std::vector<TestAttr> load_tests(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("test attribute file not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return tests_from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw DataError(std::string("test attributes: ") + e.what());
  }
}

std::vector<TestAttr> default_tests() { return tests_from_json(json::parse(bundled_tests_json())); }

void check_tests_against(const std::vector<TestAttr>& tests, const EncodedCohort& cohort) {
  for (const auto& t : tests) {
    for (const auto& c : t.feature_columns) {
      const auto k = cohort.column_index(c);
      if (!k) throw DataError("test '" + t.name + "': column '" + c + "' not in cohort");
      if (cohort.columns()[*k].category != Category::BCT)
        throw DataError("test '" + t.name + "': column '" + c + "' is not a BCT feature");
    }
  }
}

std::string_view to_string(BudgetMode m) {
  switch (m) {
    case BudgetMode::CostSelect: return "cost";
    case BudgetMode::DiscomfortRemove: return "discomfort";
    case BudgetMode::DiscomfortEndured: return "endured";
  }
  return "cost";
}

BudgetMode budget_mode_from_string(std::string_view s) {
  if (s == "cost" || s == "cost_select") return BudgetMode::CostSelect;
  if (s == "discomfort" || s == "discomfort_remove") return BudgetMode::DiscomfortRemove;
  if (s == "endured") return BudgetMode::DiscomfortEndured;
  throw UsageError("unknown budget mode '" + std::string(s) + "'");
}

json to_json(const BudgetQuery& q) {
  return {{"mode", to_string(q.mode)}, {"budget", q.budget}, {"protocol", to_string(q.protocol)}};
}

BudgetQuery budget_query_from_json(const json& j) {
  BudgetQuery q;
  try {
    q.mode = budget_mode_from_string(j.at("mode").get<std::string>());
    q.budget = j.at("budget").get<double>();
    if (j.contains("protocol")) q.protocol = protocol_from_string(j.at("protocol").get<std::string>());
  } catch (const json::exception& e) {
    throw UsageError(std::string("budget query: ") + e.what());
  }
  if (!(q.budget >= 0.0) || !std::isfinite(q.budget)) throw UsageError("budget must be >= 0");
  return q;
}

json to_json(const TestOption& o) {
  json j{{"id", o.id},
         {"kept", o.kept},
         {"removed", o.removed},
         {"total_cost", o.total_cost},
         {"total_discomfort", o.total_discomfort},
         {"budget_used", o.budget_used}};
  if (o.result) {
    const auto& r = *o.result;
    j["fa"] = r.fa;
    j["population"] = r.population;
    j["fa_rate"] = r.fa_rate;
    j["threshold"] = r.threshold;
    j["accuracy"] = r.accuracy;
    j["sensitivity"] = optional_number(r.sensitivity);
    j["fn"] = r.fn;
    j["converged"] = r.converged;
    if (!r.warning.empty()) j["warning"] = r.warning;
  }
  return j;
}

std::vector<TestOption> enumerate_maximal(const std::vector<TestAttr>& tests, const BudgetQuery& query) {
  if (!(query.budget >= 0.0)) throw UsageError("budget must be >= 0");
  const std::size_t n = tests.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = weight_of(tests[i], query.mode);

  // Depth-first over include/exclude decisions, pruning over-budget branches.
  std::vector<std::vector<std::size_t>> feasible;
  std::vector<std::size_t> chosen;
  const auto dfs = [&](auto&& self, std::size_t i, double sum) -> void {
    if (i == n) {
      feasible.push_back(chosen);
      return;
    }
    if (within(sum + w[i], query.budget)) {
      chosen.push_back(i);
      self(self, i + 1, sum + w[i]);
      chosen.pop_back();
    }
    self(self, i + 1, sum);
  };
  dfs(dfs, 0, 0.0);

  std::vector<TestOption> options;
  for (const auto& set : feasible) {
    double used = 0.0;
    for (auto i : set) used += w[i];
    bool maximal = true;
    for (std::size_t i = 0; i < n && maximal; ++i)
      if (std::find(set.begin(), set.end(), i) == set.end() && within(used + w[i], query.budget)) maximal = false;
    if (!maximal) continue;

    TestOption o;
    o.chosen = set;
    o.budget_used = used;
    const bool chosen_are_removed = query.mode == BudgetMode::DiscomfortRemove;
    for (std::size_t i = 0; i < n; ++i) {
      const bool in_set = std::find(set.begin(), set.end(), i) != set.end();
      const bool kept = in_set != chosen_are_removed;
      (kept ? o.kept : o.removed).push_back(tests[i].name);
      if (kept) {
        o.total_cost += tests[i].cost;
        o.total_discomfort += tests[i].discomfort;
      }
    }
    options.push_back(std::move(o));
  }
  std::sort(options.begin(), options.end(), [](const TestOption& a, const TestOption& b) {
    if (a.budget_used != b.budget_used) return a.budget_used > b.budget_used;
    return a.chosen < b.chosen;
  });
  for (std::size_t i = 0; i < options.size(); ++i) options[i].id = i + 1;
  return options;
}

TestOption evaluate_option(const TestOption& option, const std::vector<TestAttr>& tests, const EncodedCohort& cohort,
                           const PipelineConfig& cfg) {
  check_tests_against(tests, cohort);
  std::vector<std::string> drop;
  for (const auto& name : option.removed) {
    auto it = std::find_if(tests.begin(), tests.end(), [&](const TestAttr& t) { return t.name == name; });
    if (it == tests.end()) throw UsageError("option removes unknown test '" + name + "'");
    drop.insert(drop.end(), it->feature_columns.begin(), it->feature_columns.end());
  }
  const EncodedCohort reduced = cohort.drop_columns(drop);
  const PipelineResult r = run_pipeline(reduced, cfg);

  TestOption out = option;
  OptionResult res;
  res.fa = r.calibrated.fa;
  res.population = r.calibration_size();
  res.fa_rate = res.population ? static_cast<double>(res.fa) / static_cast<double>(res.population) : 0.0;
  res.threshold = r.calibrated.threshold;
  res.accuracy = accuracy(r.calibrated.cm);
  res.sensitivity = sensitivity(r.calibrated.cm);
  res.fn = r.calibrated.cm.fn;
  res.converged = r.converged;
  res.warning = r.warning;
  out.result = res;
  return out;
}

void rank_options(std::vector<TestOption>& options, BudgetMode mode) {
  std::stable_sort(options.begin(), options.end(), [mode](const TestOption& a, const TestOption& b) {
    const std::size_t fa_a = a.result ? a.result->fa : SIZE_MAX;
    const std::size_t fa_b = b.result ? b.result->fa : SIZE_MAX;
    if (fa_a != fa_b) return fa_a < fa_b;
    switch (mode) {
      case BudgetMode::CostSelect:
        if (a.total_cost != b.total_cost) return a.total_cost < b.total_cost;
        break;
      case BudgetMode::DiscomfortRemove:
        if (a.budget_used != b.budget_used) return a.budget_used > b.budget_used;
        break;
      case BudgetMode::DiscomfortEndured:
        if (a.total_discomfort != b.total_discomfort) return a.total_discomfort < b.total_discomfort;
        break;
    }
    return a.chosen < b.chosen;
  });
}

std::vector<TestOption> select_best(const BudgetQuery& query, const std::vector<TestAttr>& tests,
                                    const EncodedCohort& cohort, const PipelineConfig& cfg, unsigned workers) {
  check_tests_against(tests, cohort);
  auto options = enumerate_maximal(tests, query);
  if (options.empty()) throw DataError("no option satisfies the budget");
  PipelineConfig run_cfg = cfg;
  run_cfg.protocol = query.protocol;
  parallel_for(options.size(), workers,
               [&](std::size_t i) { options[i] = evaluate_option(options[i], tests, cohort, run_cfg); });
  rank_options(options, query.mode);
  return options;
}

json to_json(const AblationPoint& p) {
  return {{"removed", p.removed},           {"n_features", p.n_features}, {"accuracy_init", p.accuracy_init},
          {"accuracy_post", p.accuracy_post}, {"fa_init", p.fa_init},     {"fa_post", p.fa_post},
          {"fn_init", p.fn_init},           {"fn_post", p.fn_post},       {"threshold", p.threshold},
          {"population", p.population}};
}

std::vector<std::string> default_removal_order(const EncodedCohort& cohort) {
  std::vector<std::string> order;
  for (const auto& c : cohort.columns())
    if (c.category == Category::BCT) order.push_back(c.name);
  return order;
}

std::vector<AblationPoint> ablation_sweep(const EncodedCohort& cohort, const std::vector<std::string>& removal_order,
                                          const PipelineConfig& cfg, unsigned workers) {
  std::set<std::string> seen;
  for (const auto& name : removal_order) {
    const auto k = cohort.column_index(name);
    if (!k) throw UsageError("removal order names unknown column '" + name + "'");
    if (cohort.columns()[*k].category != Category::BCT)
      throw UsageError("removal order column '" + name + "' is not a BCT feature");
    if (!seen.insert(name).second) throw UsageError("removal order repeats '" + name + "'");
  }
  if (removal_order.size() >= cohort.dim()) throw UsageError("removal order would leave no features");

  std::vector<AblationPoint> points(removal_order.size() + 1);
  parallel_for(points.size(), workers, [&](std::size_t k) {
    const std::vector<std::string> drop(removal_order.begin(), removal_order.begin() + static_cast<std::ptrdiff_t>(k));
    const EncodedCohort reduced = cohort.drop_columns(drop);
    const PipelineResult r = run_pipeline(reduced, cfg);
    AblationPoint& p = points[k];
    p.removed = k;
    p.n_features = reduced.dim();
    p.accuracy_init = accuracy(r.calibration_init);
    p.accuracy_post = accuracy(r.calibrated.cm);
    p.fa_init = r.calibration_init.fa;
    p.fa_post = r.calibrated.cm.fa;
    p.fn_init = r.calibration_init.fn;
    p.fn_post = r.calibrated.cm.fn;
    p.threshold = r.calibrated.threshold;
    p.population = r.calibration_size();
  });
  return points;
}

}  // namespace screening
