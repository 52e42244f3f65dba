#include "screening/service.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "screening/commands.hpp"
#include "screening/error.hpp"
#include "screening/run_store.hpp"

namespace screening {

namespace {

using nlohmann::json;

enum class JobStatus { Queued, Running, Done, Failed };

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Queued: return "queued";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "failed";
}

struct Job {
  std::string id;
  std::string kind;
  json snapshot;
  JobStatus status = JobStatus::Queued;
  json result;
  std::string run_id;
  std::string error;
};

json job_json(const Job& j) {
  json out{{"job_id", j.id}, {"kind", j.kind}, {"status", to_string(j.status)}};
  if (j.status == JobStatus::Done) {
    out["result"] = j.result;
    out["run_id"] = j.run_id;
  }
  if (j.status == JobStatus::Failed) out["error"] = j.error;
  return out;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& msg) { reply(res, status, {{"error", msg}}); }

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

struct Service::Impl {
  ServiceConfig cfg;
  RunStore store;
  PreparedCohort prepared;
  httplib::Server server;

  std::mutex tests_mutex;
  std::vector<TestAttr> tests;

  std::mutex jobs_mutex;
  std::condition_variable jobs_cv;
  std::map<std::string, Job> jobs;
  std::deque<std::string> queue;
  std::size_t next_job = 0;
  bool stopping = false;
  std::thread worker;
  std::thread listener;

  std::mutex models_mutex;
  std::map<std::string, std::shared_ptr<const TrainedModel>> models;

  explicit Impl(ServiceConfig c)
      : cfg(std::move(c)), store(cfg.store_dir), prepared(prepare_cohort(cfg.pipeline)), tests(tests_for(cfg.pipeline)) {
    check_tests_against(tests, prepared.base);
    routes();
    worker = std::thread([this] { work(); });
  }

  ~Impl() {
    server.stop();
    if (listener.joinable()) listener.join();
    {
      std::lock_guard lock(jobs_mutex);
      stopping = true;
    }
    jobs_cv.notify_all();
    if (worker.joinable()) worker.join();
  }

  std::string submit(std::string kind, json snapshot) {
    std::lock_guard lock(jobs_mutex);
    char id[32];
    std::snprintf(id, sizeof id, "job-%06zu", ++next_job);
    Job job;
    job.id = id;
    job.kind = std::move(kind);
    job.snapshot = std::move(snapshot);
    jobs.emplace(id, std::move(job));
    queue.push_back(id);
    jobs_cv.notify_one();
    return id;
  }

  void work() {
    for (;;) {
      json snapshot;
      std::string id;
      {
        std::unique_lock lock(jobs_mutex);
        jobs_cv.wait(lock, [this] { return stopping || !queue.empty(); });
        if (stopping) return;
        id = queue.front();
        queue.pop_front();
        auto& job = jobs.at(id);
        job.status = JobStatus::Running;
        snapshot = job.snapshot;
      }
      try {
        const Execution exec = execute(snapshot, cfg.workers, &prepared);
        const RunRecord rec = record_run(store, snapshot, exec);
        std::lock_guard lock(jobs_mutex);
        auto& job = jobs.at(id);
        job.result = exec.results;
        job.run_id = rec.run_id;
        job.status = JobStatus::Done;
      } catch (const std::exception& e) {
        std::lock_guard lock(jobs_mutex);
        auto& job = jobs.at(id);
        job.error = e.what();
        job.status = JobStatus::Failed;
      }
    }
  }

  std::shared_ptr<const TrainedModel> model(const std::string& run_id) {
    std::lock_guard lock(models_mutex);
    if (auto it = models.find(run_id); it != models.end()) return it->second;
    const auto j = store.load_model(run_id);
    if (!j) return nullptr;
    auto m = std::make_shared<const TrainedModel>(trained_model_from_json(*j));
    models.emplace(run_id, m);
    return m;
  }

  // Runs a handler, mapping exceptions to status codes.
  static void guarded(httplib::Response& res, const std::function<void()>& body) {
    try {
      body();
    } catch (const UsageError& e) {
      reply_error(res, 400, e.what());
    } catch (const DataError& e) {
      reply_error(res, 422, e.what());
    } catch (const json::exception& e) {
      reply_error(res, 400, e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  }

  void routes() {
    server.Get("/tests", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(tests_mutex);
      reply(res, 200, tests_to_json(tests));
    });

    server.Put("/tests", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        if (!body.contains("tests") || !body["tests"].is_array()) throw UsageError("body needs a \"tests\" array");
        std::lock_guard lock(tests_mutex);
        auto updated = tests;
        for (const auto& e : body["tests"]) {
          const auto name = e.at("name").get<std::string>();
          auto it = std::find_if(updated.begin(), updated.end(), [&](const TestAttr& t) { return t.name == name; });
          if (it == updated.end()) throw UsageError("unknown test '" + name + "'");
          if (e.contains("cost")) it->cost = e["cost"].get<double>();
          if (e.contains("discomfort")) it->discomfort = e["discomfort"].get<double>();
          if (!(it->cost >= 0.0) || !(it->discomfort >= 0.0))
            throw UsageError("test '" + name + "': cost and discomfort must be >= 0");
        }
        // Round trip through the table format to reuse its validation.
        updated = tests_from_json(tests_to_json(updated));
        check_tests_against(updated, prepared.base);
        tests = std::move(updated);
        reply(res, 200, tests_to_json(tests));
      });
    });

    server.Post("/select", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        json body = parse_body(req);
        if (!body.contains("protocol")) body["protocol"] = "holdout";
        const BudgetQuery query = budget_query_from_json(body);
        std::vector<TestAttr> snapshot_tests;
        {
          std::lock_guard lock(tests_mutex);
          snapshot_tests = tests;
        }
        reply(res, 202, {{"job_id", submit("select", select_snapshot(cfg.pipeline, query, snapshot_tests))}});
      });
    });

    server.Post("/train", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        (void)parse_body(req);
        reply(res, 202, {{"job_id", submit("train", train_snapshot(cfg.pipeline))}});
      });
    });

    server.Get(R"(/jobs/([A-Za-z0-9\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(jobs_mutex);
      const auto it = jobs.find(req.matches[1]);
      if (it == jobs.end()) return reply_error(res, 404, "no such job");
      reply(res, 200, job_json(it->second));
    });

    server.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        json out = json::array();
        for (const auto& r : store.list()) out.push_back(to_json(r));
        reply(res, 200, out);
      });
    });

    server.Get(R"(/runs/([A-Za-z0-9\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto r = store.get(req.matches[1]);
        if (!r) return reply_error(res, 404, "no such run");
        reply(res, 200, to_json(*r));
      });
    });

    server.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        if (!body.contains("record") || !body["record"].is_object()) throw UsageError("body needs a \"record\" object");
        std::optional<std::string> run_id;
        if (body.contains("run_id")) run_id = body["run_id"].get<std::string>();
        else run_id = store.latest_model_id();
        if (!run_id) return reply_error(res, 409, "no trained model; POST /train first");
        const auto m = model(*run_id);
        if (!m) return reply_error(res, 404, "no model for run '" + *run_id + "'");

        PatientRecord record;
        for (const auto& [k, v] : body["record"].items()) {
          if (v.is_null()) continue;
          record.values[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        const Prediction p = predict_record(*m, record);
        reply(res, 200,
              {{"p_abnormal", p.p_abnormal},
               {"z_normal", p.z_normal},
               {"decision", p.decision == Label::Abnormal ? "abnormal" : "normal"},
               {"threshold", m->threshold},
               {"run_id", *run_id}});
      });
    });

    if (!cfg.static_dir.empty() && !server.set_mount_point("/", cfg.static_dir))
      throw UsageError("static directory not found: " + cfg.static_dir);
  }

  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot listen on " + host + ":" + std::to_string(port) + " (address in use?)");
    return bound;
  }
};

Service::Service(ServiceConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}

Service::~Service() = default;

int Service::start(const std::string& host, int port) {
  const int bound = impl_->bind(host, port);
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Service::run(const std::string& host, int port) {
  impl_->bind(host, port);
  impl_->server.listen_after_bind();
}

void Service::stop() { impl_->server.stop(); }

}  // namespace screening
