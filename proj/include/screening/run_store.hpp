#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace screening {

struct RunRecord {
  std::string run_id;
  std::string timestamp;  // UTC, ISO 8601
  nlohmann::json config;  // complete snapshot; replaying it reproduces `results`
  nlohmann::json inputs;  // digests of the files the run read
  nlohmann::json results;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

// Append-only run log (runs.jsonl, one record per line) plus a models/
// directory keyed by run id. Writes are serialized.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);

  // Assigns run_id and timestamp, then appends.
  RunRecord append(RunRecord record);

  std::vector<RunRecord> list() const;  // insertion order
  std::optional<RunRecord> get(const std::string& run_id) const;

  void save_model(const std::string& run_id, const nlohmann::json& model);
  std::optional<nlohmann::json> load_model(const std::string& run_id) const;
  // Most recent run that registered a model.
  std::optional<std::string> latest_model_id() const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path log_path() const { return dir_ / "runs.jsonl"; }
  std::filesystem::path model_path(const std::string& run_id) const { return dir_ / "models" / (run_id + ".json"); }

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

// FNV-1a 64 of a file's bytes, hex encoded.
std::string file_digest(const std::filesystem::path& path);
std::string text_digest(std::string_view text);

}  // namespace screening
