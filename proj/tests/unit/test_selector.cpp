#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "screening/error.hpp"
#include "screening/selector.hpp"

using namespace screening;

namespace {

std::vector<double> weights(const std::vector<TestAttr>& tests, BudgetMode mode) {
  std::vector<double> w;
  for (const auto& t : tests) w.push_back(mode == BudgetMode::CostSelect ? t.cost : t.discomfort);
  return w;
}

std::set<std::vector<std::size_t>> chosen_sets(const std::vector<TestOption>& options) {
  std::set<std::vector<std::size_t>> out;
  for (const auto& o : options) out.insert(o.chosen);
  return out;
}

std::vector<TestAttr> fixture_tests() {
  return {{"SignalTest", 100, 3, {"Signal"}}, {"NoiseTest", 100, 3, {"Noise"}}, {"ExtraTest", 100, 3, {"Extra"}}};
}

PipelineConfig fixture_config() {
  PipelineConfig cfg;
  cfg.degree = 2;
  cfg.mode = ExpansionMode::Dedup;
  cfg.max_epochs = 500;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_SUITE("selector") {
  TEST_CASE("bundled test table") {
    const auto tests = default_tests();
    CHECK(tests.size() == 15);
    CHECK(std::accumulate(tests.begin(), tests.end(), 0.0, [](double s, const TestAttr& t) { return s + t.cost; }) ==
          6250.0);
    CHECK(tests_from_json(tests_to_json(tests)).size() == 15);
    check_tests_against(tests, generate_synthetic(default_synth_config()));
  }

  TEST_CASE("tests must reference BCT columns of the cohort") {
    const auto cohort = fixture::signal_noise_cohort(20, 1);
    CHECK_THROWS_AS(check_tests_against({{"Bad", 1, 1, {"L1"}}}, cohort), DataError);
    CHECK_THROWS_AS(check_tests_against({{"Missing", 1, 1, {"Nope"}}}, cohort), DataError);
    CHECK_THROWS_AS(tests_from_json(nlohmann::json::parse(R"({"tests":[{"name":"x","cost":-1,"discomfort":0,"columns":["a"]}]})")),
                    DataError);
  }

  TEST_CASE("paper case studies match the brute-force oracle") {
    const auto tests = default_tests();
    const auto cost = enumerate_maximal(tests, {BudgetMode::CostSelect, 2000});
    CHECK(cost.size() == 12);
    CHECK(chosen_sets(cost) == oracle::maximal_subsets(weights(tests, BudgetMode::CostSelect), 2000));
    const auto disc = enumerate_maximal(tests, {BudgetMode::DiscomfortRemove, 10});
    CHECK(disc.size() == 15);
    CHECK(chosen_sets(disc) == oracle::maximal_subsets(weights(tests, BudgetMode::DiscomfortRemove), 10));
  }

  TEST_CASE("enumeration equals the oracle across budgets") {
    const auto tests = default_tests();
    for (auto mode : {BudgetMode::CostSelect, BudgetMode::DiscomfortRemove, BudgetMode::DiscomfortEndured}) {
      const auto w = weights(tests, mode);
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      for (double frac : {0.0, 0.05, 0.1, 0.25, 0.32, 0.5, 0.77, 1.0, 1.5}) {
        const double budget = std::round(total * frac);
        const auto options = enumerate_maximal(tests, {mode, budget});
        const auto expected = oracle::maximal_subsets(w, budget);
        REQUIRE(options.size() == expected.size());
        CHECK(chosen_sets(options) == expected);
        for (std::size_t i = 0; i < options.size(); ++i) {
          const auto& o = options[i];
          CHECK(o.id == i + 1);
          CHECK(o.budget_used <= budget);
          CHECK(o.kept.size() + o.removed.size() == tests.size());
          std::set<std::string> all(o.kept.begin(), o.kept.end());
          all.insert(o.removed.begin(), o.removed.end());
          CHECK(all.size() == tests.size());
          if (i > 0) CHECK(options[i - 1].budget_used >= o.budget_used);
        }
      }
    }
  }

  TEST_CASE("budget extremes") {
    const auto tests = default_tests();
    const auto all = enumerate_maximal(tests, {BudgetMode::CostSelect, 6250});
    REQUIRE(all.size() == 1);
    CHECK(all[0].kept.size() == 15);
    CHECK(enumerate_maximal(tests, {BudgetMode::CostSelect, 1e6}).size() == 1);

    const auto none = enumerate_maximal(tests, {BudgetMode::CostSelect, 0});
    REQUIRE(none.size() == 1);
    std::vector<std::string> free;
    for (const auto& t : tests)
      if (t.cost == 0) free.push_back(t.name);
    CHECK(none[0].kept == free);
    CHECK(enumerate_maximal(tests, {BudgetMode::DiscomfortRemove, 0}).size() == 1);
    CHECK_THROWS_AS(enumerate_maximal(tests, {BudgetMode::CostSelect, -1}), UsageError);
  }

  TEST_CASE("ranking: FA first, then the cheaper kept set") {
    auto make = [](std::size_t id, std::size_t fa, double cost) {
      TestOption o;
      o.id = id;
      o.chosen = {id};
      o.total_cost = cost;
      OptionResult r;
      r.fa = fa;
      o.result = r;
      return o;
    };
    std::vector<TestOption> opts{make(1, 3, 2000), make(2, 3, 1950), make(3, 1, 2500), make(4, 7, 100)};
    rank_options(opts, BudgetMode::CostSelect);
    CHECK(opts[0].id == 3);
    CHECK(opts[1].id == 2);
    CHECK(opts[2].id == 1);
    CHECK(opts[3].id == 4);
  }

  TEST_CASE("query JSON and budget mode names") {
    const BudgetQuery q{BudgetMode::DiscomfortRemove, 10, Protocol::Holdout};
    const auto back = budget_query_from_json(to_json(q));
    CHECK(back.mode == q.mode);
    CHECK(back.budget == q.budget);
    CHECK(back.protocol == q.protocol);
    CHECK(budget_mode_from_string("cost") == BudgetMode::CostSelect);
    CHECK(budget_mode_from_string("discomfort") == BudgetMode::DiscomfortRemove);
    CHECK_THROWS_AS(budget_mode_from_string("cheap"), UsageError);
    CHECK_THROWS_AS(budget_query_from_json({{"mode", "cost"}, {"budget", -5}}), UsageError);
  }

  TEST_CASE("signal feature decides the ranking, noise removal is free") {
    const auto cohort = fixture::signal_noise_cohort(400, 5);
    const auto tests = fixture_tests();
    const auto cfg = fixture_config();

    const auto full = select_best({BudgetMode::CostSelect, 300}, tests, cohort, cfg, 1);
    REQUIRE(full.size() == 1);
    REQUIRE(full[0].removed.empty());
    const PipelineResult baseline = run_pipeline(cohort, cfg);
    CHECK(full[0].result->fa == baseline.calibrated.fa);

    const auto ranked = select_best({BudgetMode::CostSelect, 200}, tests, cohort, cfg, 1);
    REQUIRE(ranked.size() == 3);
    for (const auto& o : ranked) {
      CHECK(o.result->fn == 0);
      CHECK(o.result->fa >= ranked.front().result->fa);
    }
    const auto keeps_signal = [](const TestOption& o) {
      return std::find(o.kept.begin(), o.kept.end(), "SignalTest") != o.kept.end();
    };
    CHECK(keeps_signal(ranked[0]));
    CHECK(keeps_signal(ranked[1]));
    CHECK_FALSE(keeps_signal(ranked[2]));
    CHECK(ranked[2].result->fa > ranked[1].result->fa);
    for (const auto& o : ranked)
      if (o.removed == std::vector<std::string>{"NoiseTest"}) CHECK(o.result->fa == baseline.calibrated.fa);

    // Worker count does not change the outcome.
    const auto again = select_best({BudgetMode::CostSelect, 200}, tests, cohort, cfg, 3);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      CHECK(again[i].id == ranked[i].id);
      CHECK(to_json(again[i]) == to_json(ranked[i]));
    }
  }

  TEST_CASE("single option at budget zero is returned as best") {
    const auto cohort = fixture::signal_noise_cohort(200, 6);
    const auto ranked = select_best({BudgetMode::CostSelect, 0}, fixture_tests(), cohort, fixture_config(), 1);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].kept.empty());
    CHECK(ranked[0].result->fn == 0);
  }

  TEST_CASE("ablation sweep properties") {
    const auto cohort = fixture::signal_noise_cohort(400, 7);
    const auto cfg = fixture_config();
    const std::vector<std::string> order{"Signal", "Noise", "Extra"};
    const auto points = ablation_sweep(cohort, order, cfg, 1);
    REQUIRE(points.size() == 4);
    const PipelineResult baseline = run_pipeline(cohort, cfg);
    CHECK(points[0].fa_post == baseline.calibrated.fa);
    CHECK(points[0].n_features == 6);
    for (std::size_t k = 0; k < points.size(); ++k) {
      CHECK(points[k].removed == k);
      CHECK(points[k].fn_post == 0);
      CHECK(points[k].threshold >= 0.5);
    }
    CHECK(points.back().fa_post >= points.front().fa_post);
    CHECK(points.back().n_features == 3);
    CHECK(default_removal_order(cohort) == std::vector<std::string>{"Signal", "Noise", "Extra"});
    CHECK_THROWS_AS(ablation_sweep(cohort, {"L1"}, cfg, 1), UsageError);
  }
}
