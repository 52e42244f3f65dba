#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "screening/pipeline.hpp"

namespace screening {

struct ServiceConfig {
  PipelineConfig pipeline;
  std::filesystem::path store_dir = "runs";
  std::string static_dir;  // served at / when set
  unsigned workers = 0;    // option evaluation pool; 0 = hardware concurrency
};

// JSON API:
//   GET  /tests              attribute table
//   PUT  /tests              {"tests": [{name, cost?, discomfort?}]} updates by name
//   POST /select             {mode, budget, protocol?} -> {job_id}
//   POST /train              {} -> {job_id}
//   GET  /jobs/{id}          {job_id, kind, status, result?, run_id?, error?}
//   GET  /runs, /runs/{id}   run records
//   POST /predict            {record, run_id?} -> {p_abnormal, decision, threshold, run_id}
// Jobs run one at a time on a background worker.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port; throws Error when the address is unavailable.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace screening
