#include "screening/run_store.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include "screening/error.hpp"

namespace screening {

namespace {

using nlohmann::json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

json to_json(const RunRecord& r) {
  return {{"run_id", r.run_id}, {"timestamp", r.timestamp}, {"config", r.config}, {"inputs", r.inputs},
          {"results", r.results}};
}

RunRecord run_record_from_json(const json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.config = j.at("config");
  r.inputs = j.value("inputs", json::object());
  r.results = j.at("results");
  return r;
}

RunStore::RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_ / "models", ec);
  if (ec) throw DataError("cannot create run store at " + dir_.string() + ": " + ec.message());
}

RunRecord RunStore::append(RunRecord record) {
  std::lock_guard lock(mutex_);
  std::size_t count = 0;
  {
    std::ifstream in(log_path());
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++count;
  }
  char id[32];
  std::snprintf(id, sizeof id, "run-%06zu", count + 1);
  record.run_id = id;
  record.timestamp = utc_now();
  std::ofstream out(log_path(), std::ios::app);
  if (!out) throw DataError("cannot append to " + log_path().string());
  out << to_json(record).dump() << '\n';
  out.flush();
  if (!out) throw DataError("write failed: " + log_path().string());
  return record;
}

std::vector<RunRecord> RunStore::list() const {
  std::lock_guard lock(mutex_);
  std::vector<RunRecord> records;
  std::ifstream in(log_path());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(run_record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(std::string("corrupt run log: ") + e.what());
    }
  }
  return records;
}

std::optional<RunRecord> RunStore::get(const std::string& run_id) const {
  for (auto& r : list())
    if (r.run_id == run_id) return r;
  return std::nullopt;
}

void RunStore::save_model(const std::string& run_id, const json& model) {
  std::lock_guard lock(mutex_);
  const auto path = model_path(run_id);
  if (std::filesystem::exists(path)) throw DataError("model for " + run_id + " already registered");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << model.dump() << '\n';
}

std::optional<json> RunStore::load_model(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  std::ifstream in(model_path(run_id));
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return json::parse(ss.str());
}

std::optional<std::string> RunStore::latest_model_id() const {
  const auto records = list();
  for (auto it = records.rbegin(); it != records.rend(); ++it)
    if (std::filesystem::exists(model_path(it->run_id))) return it->run_id;
  return std::nullopt;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a(bytes));
}

std::string text_digest(std::string_view text) { return hex64(fnv1a(text)); }

}  // namespace screening
