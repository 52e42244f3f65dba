#include "screening/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "screening/commands.hpp"
#include "screening/error.hpp"
#include "screening/service.hpp"

namespace screening {

namespace {

using nlohmann::json;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string store = "runs";
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_store = true) {
  cmd->add_option("--config", c.config, "pipeline config (JSON)");
  cmd->add_option("--seed", c.seed, "overrides the config seed");
  cmd->add_option("--out", c.out, "output file");
  if (with_store) {
    cmd->add_option("--store", c.store, "run store directory")->capture_default_str();
    cmd->add_flag("--strict", c.strict, "exit 3 on convergence warnings");
  }
}

PipelineConfig load_config(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_pipeline_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  return f;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-miss screening: training, ablation, test selection and the advisor service", "screen"};
  app.require_subcommand(1);

  Common gen_c, train_c, sweep_c, select_c, serve_c, replay_c;
  bool encoded = false;
  std::vector<std::string> order;
  std::string mode = "cost", protocol = "paper", tests_path;
  double budget = 0.0;
  std::string host = "127.0.0.1", static_dir, run_id;
  int port = 8080;
  unsigned workers = 0;

  auto* gen = app.add_subcommand("generate", "write the synthetic cohort");
  add_common(gen, gen_c, false);
  gen->add_flag("--encoded", encoded, "write the 0/1 encoded matrix instead of raw records");

  auto* train = app.add_subcommand("train", "train, calibrate and record a model");
  add_common(train, train_c);

  auto* sweep = app.add_subcommand("sweep", "BCT feature ablation curve");
  add_common(sweep, sweep_c);
  sweep->add_option("--order", order, "comma-separated BCT columns; default declaration order")->delimiter(',');
  sweep->add_option("--workers", workers);

  auto* select = app.add_subcommand("select", "rank budget-feasible test subsets by false abnormals");
  add_common(select, select_c);
  select->add_option("--mode", mode)->check(CLI::IsMember({"cost", "discomfort", "endured"}))->capture_default_str();
  select->add_option("--budget", budget)->required()->check(CLI::NonNegativeNumber);
  select->add_option("--protocol", protocol)->check(CLI::IsMember({"paper", "holdout"}))->capture_default_str();
  select->add_option("--tests", tests_path, "test attribute file");
  select->add_option("--workers", workers);

  auto* serve = app.add_subcommand("serve", "HTTP API for the advisor UI");
  add_common(serve, serve_c);
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--static", static_dir, "directory served at /");
  serve->add_option("--workers", workers);

  auto* rep = app.add_subcommand("replay", "re-execute a recorded run and compare its results");
  rep->add_option("run_id", run_id)->required();
  rep->add_option("--store", replay_c.store)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  // Prints the run record and maps convergence warnings onto the exit code.
  auto finish = [&](const RunRecord& rec, const Execution& exec, bool strict) {
    out << json{{"run_id", rec.run_id}, {"results", rec.results}}.dump(2) << "\n";
    for (const auto& w : exec.warnings) err << "warning: " << w << "\n";
    return strict && !exec.warnings.empty() ? kExitConvergence : kExitOk;
  };

  try {
    if (gen->parsed()) {
      const PipelineConfig cfg = load_config(gen_c);
      GenerateSummary s;
      if (gen_c.out.empty()) {
        s = cmd_generate(cfg, out, encoded);
      } else {
        auto f = open_out(gen_c.out);
        s = cmd_generate(cfg, f, encoded);
      }
      err << "generated " << s.records << " records (" << s.abnormal << " abnormal)\n";
      return kExitOk;
    }
    if (train->parsed()) {
      const PipelineConfig cfg = load_config(train_c);
      RunStore store(train_c.store);
      const json snap = train_snapshot(cfg);
      const Execution exec = execute(snap);
      const RunRecord rec = record_run(store, snap, exec);
      if (!train_c.out.empty()) open_out(train_c.out) << exec.results.at("calibration").dump(2) << "\n";
      return finish(rec, exec, train_c.strict);
    }
    if (sweep->parsed()) {
      const PipelineConfig cfg = load_config(sweep_c);
      RunStore store(sweep_c.store);
      const json snap = sweep_snapshot(cfg, order);
      const Execution exec = execute(snap, workers);
      const RunRecord rec = record_run(store, snap, exec);
      if (!sweep_c.out.empty()) {
        auto f = open_out(sweep_c.out);
        write_sweep_csv(f, exec.results);
      }
      return finish(rec, exec, sweep_c.strict);
    }
    if (select->parsed()) {
      PipelineConfig cfg = load_config(select_c);
      if (!tests_path.empty()) cfg.tests_path = tests_path;
      BudgetQuery query;
      query.mode = budget_mode_from_string(mode);
      query.budget = budget;
      query.protocol = protocol_from_string(protocol);
      RunStore store(select_c.store);
      const json snap = select_snapshot(cfg, query, tests_for(cfg));
      const Execution exec = execute(snap, workers);
      const RunRecord rec = record_run(store, snap, exec);
      if (!select_c.out.empty()) {
        auto f = open_out(select_c.out);
        write_option_report_csv(f, exec.results);
      }
      return finish(rec, exec, select_c.strict);
    }
    if (serve->parsed()) {
      ServiceConfig sc;
      sc.pipeline = load_config(serve_c);
      sc.store_dir = serve_c.store;
      sc.static_dir = static_dir;
      sc.workers = workers;
      Service service(sc);
      err << "serving on http://" << host << ":" << port << "\n";
      service.run(host, port);
      return kExitOk;
    }
    if (rep->parsed()) {
      RunStore store(replay_c.store);
      const auto rec = store.get(run_id);
      if (!rec) throw UsageError("no such run: " + run_id);
      const ReplayReport r = replay(*rec);
      out << json{{"run_id", run_id}, {"identical", r.identical}}.dump() << "\n";
      if (!r.identical) {
        err << "error: replayed results differ from the record\n";
        return kExitData;
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace screening
