// One line per acceptance criterion: PASS/FAIL, name, elapsed time, detail.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "screening/calibrator.hpp"
#include "screening/commands.hpp"
#include "screening/learner.hpp"
#include "screening/pipeline.hpp"
#include "screening/poly_expand.hpp"
#include "screening/rng.hpp"
#include "screening/selector.hpp"

using namespace screening;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail.clear();
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (s > budget_s) {
    std::ostringstream msg;
    msg << "runtime " << s << "s over budget " << budget_s << "s";
    o.require(false, msg.str());
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), s, o.detail.c_str());
  std::fflush(stdout);
}

std::string str(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

SparseDataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  SparseDataset data(d);
  for (std::size_t i = 0; i < n; ++i) {
    SparseVector x{{0}, d};
    for (std::uint32_t j = 1; j < d; ++j)
      if (rng.bernoulli(0.4)) x.indices.push_back(j);
    const double score = (x.indices.size() > 3 ? 1.0 : -1.0) + (rng.uniform() - 0.5) * 3.0;
    data.add(x, i < 2 ? static_cast<Label>(i) : (score > 0 ? Label::Abnormal : Label::Normal));
  }
  return data;
}

}  // namespace

int main() {
  criterion("expansion-count", 1.0, [](Outcome& o) {
    const auto multiset = expanded_dimension(63, 3, ExpansionMode::Multiset);
    const auto dedup = expanded_dimension(63, 3, ExpansionMode::Dedup);
    o.require(multiset == 45760, "multiset " + std::to_string(multiset));
    o.require(dedup == 41728, "dedup " + std::to_string(dedup));
    for (std::uint32_t d = 1; d <= 6; ++d)
      for (int deg = 1; deg <= 3; ++deg) {
        o.require(expanded_dimension(d, deg, ExpansionMode::Multiset) == oracle::monomials(d, deg, true).size(),
                  "multiset enumeration d=" + std::to_string(d));
        o.require(expanded_dimension(d, deg, ExpansionMode::Dedup) == oracle::monomials(d, deg, false).size(),
                  "dedup enumeration d=" + std::to_string(d));
      }
    o.detail = "multiset " + std::to_string(multiset) + ", dedup " + std::to_string(dedup);
  });

  criterion("unskew-arithmetic", 1.0, [](Outcome& o) {
    std::vector<Column> cols{{"a", Category::BCT, "a"}};
    std::vector<EncodedRow> rows;
    for (std::size_t i = 0; i < 3689; ++i) rows.push_back({{0}, i < 3597 ? Label::Normal : Label::Abnormal, i});
    const auto s = supersample(EncodedCohort(cols, rows), 10);
    const double ratio = static_cast<double>(s.n_abnormal()) / static_cast<double>(s.n_normal());
    o.require(s.size() == 4609, "rows " + std::to_string(s.size()));
    o.require(std::abs(ratio - 0.2813) <= 1e-4, "ratio " + str(ratio));
    o.detail = std::to_string(s.size()) + " rows, ratio " + str(ratio);
  });

  criterion("enumeration-counts", 1.0, [](Outcome& o) {
    const auto tests = default_tests();
    std::vector<double> cost, disc;
    for (const auto& t : tests) {
      cost.push_back(t.cost);
      disc.push_back(t.discomfort);
    }
    const auto by_cost = enumerate_maximal(tests, {BudgetMode::CostSelect, 2000});
    const auto by_disc = enumerate_maximal(tests, {BudgetMode::DiscomfortRemove, 10});
    const auto oracle_cost = oracle::maximal_subsets(cost, 2000);
    const auto oracle_disc = oracle::maximal_subsets(disc, 10);
    std::set<std::vector<std::size_t>> got_cost, got_disc;
    for (const auto& op : by_cost) got_cost.insert(op.chosen);
    for (const auto& op : by_disc) got_disc.insert(op.chosen);
    o.require(got_cost == oracle_cost, "cost options differ from oracle");
    o.require(got_disc == oracle_disc, "discomfort options differ from oracle");
    o.require(oracle_cost.size() == 12, "oracle cost count " + std::to_string(oracle_cost.size()) + " (expected 12)");
    o.require(oracle_disc.size() == 15, "oracle discomfort count " + std::to_string(oracle_disc.size()) + " (expected 15)");
    o.detail = "cost B=2000: " + std::to_string(by_cost.size()) + ", discomfort B=10: " + std::to_string(by_disc.size());
  });

  criterion("total-cost", 1.0, [](Outcome& o) {
    const auto tests = default_tests();
    const double total = std::accumulate(tests.begin(), tests.end(), 0.0,
                                         [](double s, const TestAttr& t) { return s + t.cost; });
    o.require(total == 6250.0, "total " + str(total));
    o.detail = "INR " + str(total) + " over " + std::to_string(tests.size()) + " tests";
  });

  criterion("zero-miss-property", 10.0, [](Outcome& o) {
    Rng rng(2024);
    std::size_t checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + rng.below(500);
      const double p_abnormal = rng.uniform();
      std::vector<ScoredInstance> s;
      for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.bernoulli(0.3) ? static_cast<double>(rng.below(11)) / 10.0 : rng.uniform();
        s.push_back({z, rng.bernoulli(p_abnormal) ? Label::Abnormal : Label::Normal, i});
      }
      const auto r = calibrate(s);
      const auto best = oracle::min_fa_over_grid(s);
      const bool ok = r.cm.fn == 0 && r.threshold >= 0.5 && r.fa == best.fa;
      o.require(ok, "trial " + std::to_string(trial));
      checked += ok;
      if (!ok) break;
    }
    if (o.pass) o.detail = std::to_string(checked) + " random sets: FN = 0, threshold >= 0.5, FA = oracle minimum";
  });

  criterion("solver-correctness", 30.0, [](Outcome& o) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto data = random_dataset(20, 10, seed);
      Rng rng(seed + 7);
      std::vector<double> w(10);
      for (auto& v : w) v = rng.uniform() * 2.0 - 1.0;
      const Penalty pen = seed % 2 ? Penalty::l2(0.5) : Penalty::l1_penalty(2.0, 0.3);
      const auto g = smooth_gradient(data, w, pen);
      double diff = 0, ref = 0;
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double fd = oracle::fd_gradient(data, w, j, pen, 1e-5);
        diff += (g[j] - fd) * (g[j] - fd);
        ref += g[j] * g[j];
      }
      worst = std::max(worst, std::sqrt(diff / ref));
    }
    o.require(worst <= 1e-5, "gradient rel err " + str(worst));

    const auto data = random_dataset(200, 30, 99);
    std::vector<std::size_t> nnz;
    for (double l1 : {0.05, 2.0, 10.0}) {
      TrainConfig cfg;
      cfg.penalty = Penalty::l1_penalty(1.0, l1);
      cfg.max_epochs = 3000;
      const auto r = train_lr(data, cfg);
      for (std::size_t e = 1; e < r.objective_trace.size(); ++e)
        if (r.objective_trace[e] > r.objective_trace[e - 1]) {
          o.require(false, "objective rose at epoch " + std::to_string(e));
          break;
        }
      std::size_t k = 0;
      for (double v : r.model.w) k += v != 0.0;
      nnz.push_back(k);
    }
    TrainConfig l2;
    l2.penalty = Penalty::l2(1e-3);
    const auto r2 = train_lr(data, l2);
    for (std::size_t e = 1; e < r2.objective_trace.size(); ++e)
      if (r2.objective_trace[e] > r2.objective_trace[e - 1]) {
        o.require(false, "L2 objective rose at epoch " + std::to_string(e));
        break;
      }
    o.require(nnz[0] >= nnz[1] && nnz[1] >= nnz[2] && nnz[0] > nnz[2], "nnz not monotone");
    if (o.pass)
      o.detail = "max gradient rel err " + str(worst) + ", nnz " + std::to_string(nnz[0]) + " >= " +
                 std::to_string(nnz[1]) + " >= " + std::to_string(nnz[2]);
  });

  criterion("end-to-end-reproduction", 300.0, [](Outcome& o) {
    PipelineConfig cfg;  // default synthetic cohort, degree 3, paper protocol
    const auto prepared = prepare_cohort(cfg);
    o.require(prepared.full.n_abnormal() == 92 && prepared.full.n_normal() == 3597, "cohort counts");
    const auto cubic = run_pipeline(prepared.base, cfg);
    const auto post_sens = sensitivity(cubic.calibrated.cm);
    const double train_acc = accuracy(cubic.train_cm);
    o.require(post_sens && *post_sens == 1.0, "calibrated sensitivity below 100%");
    o.require(train_acc >= 0.99, "degree-3 training accuracy " + str(train_acc));

    PipelineConfig linear = cfg;
    linear.degree = 1;
    const auto lin = run_pipeline(prepared.base, linear);
    const auto lin_sens = sensitivity(lin.train_cm);
    o.require(lin_sens && *lin_sens < 1.0, "linear training sensitivity reached 100%");
    o.detail = "degree 3: train acc " + str(train_acc) + ", calibrated sens " + str(post_sens.value_or(-1)) +
               ", FA " + std::to_string(cubic.calibrated.fa) + "/" + std::to_string(cubic.calibration_size()) +
               "; degree 1: train sens at 0.5 " + str(lin_sens.value_or(-1));
  });

  criterion("ablation-sweep", 600.0, [](Outcome& o) {
    PipelineConfig cfg;
    const auto prepared = prepare_cohort(cfg);
    const auto order = default_removal_order(prepared.base);
    const auto points = ablation_sweep(prepared.base, order, cfg);
    for (const auto& p : points) o.require(p.fn_post == 0, "FN > 0 at k = " + std::to_string(p.removed));
    o.require(points.size() == order.size() + 1, "point count");
    o.require(points.back().fa_post >= points.front().fa_post, "fa_post fell from k=0 to full removal");
    o.detail = std::to_string(points.size()) + " points, fa_post " + std::to_string(points.front().fa_post) + " -> " +
               std::to_string(points.back().fa_post) + " of " + std::to_string(points.back().population);
  });

  criterion("metric-formulas", 1.0, [](Outcome& o) {
    const auto s1 = sensitivity({45, 0, 1, 0});
    const auto s2 = sensitivity({15, 0, 1, 0});
    o.require(s1 && std::round(*s1 * 10000) / 100 == 97.83, "45/46 -> " + str(s1.value_or(-1)));
    o.require(s2 && std::round(*s2 * 10000) / 100 == 93.75, "15/16 -> " + str(s2.value_or(-1)));
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      const ConfusionMatrix cm{rng.below(100), rng.below(100), rng.below(100), rng.below(100) + 1};
      const double acc = static_cast<double>(cm.ta + cm.tn) / static_cast<double>(cm.ta + cm.fa + cm.fn + cm.tn);
      o.require(accuracy(cm) == acc, "accuracy mismatch");
      if (cm.ta + cm.fn > 0)
        o.require(*sensitivity(cm) == static_cast<double>(cm.ta) / static_cast<double>(cm.ta + cm.fn),
                  "sensitivity mismatch");
      else
        o.require(!sensitivity(cm), "undefined sensitivity reported as a number");
    }
    o.detail = "45/46 = " + str(*s1 * 100) + "%, 15/16 = " + str(*s2 * 100) + "%, 100 random matrices";
  });

  criterion("replay", 300.0, [](Outcome& o) {
    const auto dir = std::filesystem::temp_directory_path() / "screening_acceptance_replay";
    std::filesystem::remove_all(dir);
    RunStore store(dir);
    PipelineConfig cfg;
    const auto prepared = prepare_cohort(cfg);
    PipelineConfig holdout = cfg;
    holdout.protocol = Protocol::Holdout;
    const std::vector<nlohmann::json> snapshots{
        train_snapshot(cfg), train_snapshot(holdout), sweep_snapshot(cfg, {"Systolic", "Weight Loss"}),
        select_snapshot(cfg, {BudgetMode::CostSelect, 6250, Protocol::Holdout}, default_tests()),
        select_snapshot(cfg, {BudgetMode::DiscomfortRemove, 2, Protocol::Paper}, default_tests())};
    for (const auto& snap : snapshots) record_run(store, snap, execute(snap, 0, &prepared));
    std::size_t identical = 0;
    const auto records = RunStore(dir).list();
    for (const auto& r : records) {
      const bool same = replay(r).identical;
      o.require(same, r.run_id + " differs on replay");
      identical += same;
    }
    o.detail = std::to_string(identical) + "/" + std::to_string(records.size()) + " run records reproduced exactly";
    std::filesystem::remove_all(dir);
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
