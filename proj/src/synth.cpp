#include "screening/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "screening/error.hpp"
#include "screening/rng.hpp"

namespace screening {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxRuleFields = 20;

bool fires(const PlantedRule& rule, const std::map<std::string, bool>& positive) {
  std::size_t on = 0;
  for (const auto& f : rule.fields) on += positive.at(f) ? 1 : 0;
  return rule.kind == PlantedRule::Kind::Conjunction ? on == rule.fields.size() : (on % 2) == 1;
}

void check_pair(const PlantedRule& a, const PlantedRule& b) {
  std::vector<std::string> vars(a.fields.begin(), a.fields.end());
  vars.insert(vars.end(), b.fields.begin(), b.fields.end());
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  if (vars.size() > kMaxRuleFields) throw UsageError("planted rules span too many fields to check consistency");
  std::map<std::string, bool> assign;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << vars.size()); ++m) {
    for (std::size_t i = 0; i < vars.size(); ++i) assign[vars[i]] = (m >> i) & 1U;
    if (fires(a, assign) && fires(b, assign))
      throw DataError("inconsistent rules: a feature pattern implies both classes");
  }
}

std::pair<double, double> numeric_range(const FieldSpec& f) {
  if (!f.bin_edges.empty()) return {f.bin_edges.front(), f.bin_edges.back()};
  return f.range;
}

std::string rule_kind_name(PlantedRule::Kind k) { return k == PlantedRule::Kind::Parity ? "parity" : "conjunction"; }

}  // namespace

SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.planted_rules = {
      {{"Weight Loss"}, PlantedRule::Kind::Conjunction, Label::Abnormal, 0.0},
      {{"Tobacco Chewing", "Neck Nodes", "Family Cancer Last 5 Years"}, PlantedRule::Kind::Parity, Label::Abnormal, 0.0},
      {{"Tuberculosis", "Cigarette Smoking"}, PlantedRule::Kind::Conjunction, Label::Abnormal, 0.0},
  };
  cfg.base_rates = {{"Weight Loss", 0.03}, {"Tuberculosis", 0.08}, {"Asthma", 0.06}, {"Cardiac Disease", 0.05}};
  for (const char* mp : {"Erythroplakia", "Erythroleukoplakia", "Oral Ulcer", "Oral Growth", "Palpable Mass",
                         "Restricted Mouth Opening", "Submucous Fibrosis", "Double Count Barium Swallow"})
    cfg.label_linked[mp] = LinkedField{};
  return cfg;
}

json to_json(const SynthConfig& cfg) {
  json rules = json::array();
  for (const auto& r : cfg.planted_rules)
    rules.push_back({{"fields", r.fields},
                     {"kind", rule_kind_name(r.kind)},
                     {"implies", to_string(r.implies)},
                     {"noise", r.noise}});
  json linked = json::object();
  for (const auto& [name, l] : cfg.label_linked) linked[name] = {{"p_abnormal", l.p_abnormal}, {"p_normal", l.p_normal}};
  return json{{"n_total", cfg.n_total},         {"n_abnormal", cfg.n_abnormal},     {"planted_rules", rules},
              {"base_rates", cfg.base_rates},   {"default_rate", cfg.default_rate}, {"label_linked", linked},
              {"missing_rate", cfg.missing_rate}, {"seed", cfg.seed}};
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig cfg = default_synth_config();
  try {
    cfg.n_total = j.value("n_total", cfg.n_total);
    cfg.n_abnormal = j.value("n_abnormal", cfg.n_abnormal);
    if (j.contains("planted_rules")) {
      cfg.planted_rules.clear();
      for (const auto& rj : j.at("planted_rules")) {
        PlantedRule r;
        r.fields = rj.at("fields").get<std::vector<std::string>>();
        const auto kind = rj.value("kind", std::string("conjunction"));
        if (kind == "parity") {
          r.kind = PlantedRule::Kind::Parity;
        } else if (kind == "conjunction") {
          r.kind = PlantedRule::Kind::Conjunction;
        } else {
          throw UsageError("unknown rule kind '" + kind + "'");
        }
        r.implies = rj.value("implies", std::string("abnormal")) == "normal" ? Label::Normal : Label::Abnormal;
        r.noise = rj.value("noise", 0.0);
        cfg.planted_rules.push_back(std::move(r));
      }
    }
    if (j.contains("base_rates")) cfg.base_rates = j.at("base_rates").get<std::map<std::string, double>>();
    cfg.default_rate = j.value("default_rate", cfg.default_rate);
    if (j.contains("label_linked")) {
      cfg.label_linked.clear();
      for (const auto& [name, lj] : j.at("label_linked").items())
        cfg.label_linked[name] = LinkedField{lj.value("p_abnormal", 0.85), lj.value("p_normal", 0.05)};
    }
    cfg.missing_rate = j.value("missing_rate", cfg.missing_rate);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw UsageError(std::string("synthetic config: ") + e.what());
  }
  return cfg;
}

void validate(const SynthConfig& cfg, const FeatureSchema& schema) {
  if (!(cfg.n_abnormal > 0 && cfg.n_abnormal < cfg.n_total))
    throw UsageError("synthetic config needs 0 < n_abnormal < n_total");
  const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(cfg.default_rate) || !in_unit(cfg.missing_rate)) throw UsageError("rates must lie in [0, 1]");
  for (const auto& [name, p] : cfg.base_rates) {
    const FieldSpec* f = schema.find(name);
    if (f == nullptr || f->kind != FieldKind::Flag) throw UsageError("base rate for non-flag field '" + name + "'");
    if (!in_unit(p)) throw UsageError("base rate for '" + name + "' outside [0, 1]");
  }
  for (const auto& [name, l] : cfg.label_linked) {
    const FieldSpec* f = schema.find(name);
    if (f == nullptr || f->kind == FieldKind::Numeric || f->category == Category::Label)
      throw UsageError("label-linked field '" + name + "' must be a nominal or flag feature");
    if (!in_unit(l.p_abnormal) || !in_unit(l.p_normal)) throw UsageError("label-linked rates outside [0, 1]");
  }
  for (const auto& r : cfg.planted_rules) {
    if (r.fields.empty()) throw UsageError("planted rule without fields");
    if (!in_unit(r.noise)) throw UsageError("noise rate outside [0, 1]");
    for (const auto& name : r.fields) {
      const FieldSpec* f = schema.find(name);
      if (f == nullptr || f->kind != FieldKind::Flag)
        throw UsageError("planted rule field '" + name + "' must be a flag field");
      if (cfg.label_linked.count(name)) throw UsageError("field '" + name + "' is both planted and label-linked");
    }
  }
  for (std::size_t i = 0; i < cfg.planted_rules.size(); ++i)
    for (std::size_t k = i + 1; k < cfg.planted_rules.size(); ++k)
      if (cfg.planted_rules[i].implies != cfg.planted_rules[k].implies)
        check_pair(cfg.planted_rules[i], cfg.planted_rules[k]);
}

std::vector<PatientRecord> synthesize_records(const FeatureSchema& schema, const SynthConfig& cfg) {
  validate(cfg, schema);
  Rng rng(cfg.seed);

  std::set<std::string> protected_fields;
  for (const auto& r : cfg.planted_rules) protected_fields.insert(r.fields.begin(), r.fields.end());
  for (const auto& [name, l] : cfg.label_linked) protected_fields.insert(name);
  for (const auto& f : schema.fields())
    if (f.impute.kind == ImputeRule::Kind::Conditional) protected_fields.insert(f.impute.when_field);

  const std::size_t n_normal_target = cfg.n_total - cfg.n_abnormal;
  std::size_t n_normal = 0, n_abnormal = 0;
  std::vector<PatientRecord> out;
  out.reserve(cfg.n_total);
  const std::size_t max_attempts = 1000 * cfg.n_total;

  for (std::size_t attempt = 0; out.size() < cfg.n_total; ++attempt) {
    if (attempt >= max_attempts) throw DataError("synthetic generator cannot reach the requested class counts");
    PatientRecord rec;
    std::map<std::string, bool> positive;
    for (const auto& f : schema.fields()) {
      if (f.category == Category::Label || cfg.label_linked.count(f.name)) continue;
      switch (f.kind) {
        case FieldKind::Flag: {
          auto it = cfg.base_rates.find(f.name);
          const bool on = rng.bernoulli(it == cfg.base_rates.end() ? cfg.default_rate : it->second);
          positive[f.name] = on;
          rec.values[f.name] = f.values[on ? 1 : 0];
          break;
        }
        case FieldKind::Nominal:
          rec.values[f.name] = f.values[rng.below(f.values.size())];
          break;
        case FieldKind::Numeric: {
          const auto [lo, hi] = numeric_range(f);
          rec.values[f.name] = std::to_string(static_cast<long>(std::floor(lo + rng.uniform() * (hi - lo))));
          break;
        }
      }
    }
    // Keep generated data consistent with conditional imputation rules.
    for (const auto& f : schema.fields()) {
      if (f.impute.kind != ImputeRule::Kind::Conditional) continue;
      const auto pred = rec.get(f.impute.when_field);
      if (pred && (!f.impute.when_equals || *pred == *f.impute.when_equals)) {
        rec.values[f.name] = f.impute.value;
        if (f.kind == FieldKind::Flag) positive[f.name] = f.impute.value == f.values[1];
      }
    }

    Label label = Label::Normal;
    for (const auto& r : cfg.planted_rules) {
      if (!fires(r, positive)) continue;
      label = r.implies;
      if (r.noise > 0.0 && rng.bernoulli(r.noise))
        label = label == Label::Abnormal ? Label::Normal : Label::Abnormal;
      break;
    }
    if (label == Label::Abnormal ? n_abnormal >= cfg.n_abnormal : n_normal >= n_normal_target) continue;
    (label == Label::Abnormal ? n_abnormal : n_normal)++;

    for (const auto& f : schema.fields()) {
      auto it = cfg.label_linked.find(f.name);
      if (it == cfg.label_linked.end()) continue;
      const double p = label == Label::Abnormal ? it->second.p_abnormal : it->second.p_normal;
      if (rng.bernoulli(p)) {
        rec.values[f.name] = f.values[1 + rng.below(f.values.size() - 1)];
      } else {
        rec.values[f.name] = f.values[0];
      }
    }
    rec.values[schema.label_field().name] = schema.label_field().values[label == Label::Abnormal ? 1 : 0];

    if (cfg.missing_rate > 0.0) {
      for (const auto& f : schema.fields()) {
        if (f.category == Category::Label || protected_fields.count(f.name)) continue;
        if (f.impute.kind == ImputeRule::Kind::Reject) continue;
        if (rng.bernoulli(cfg.missing_rate)) rec.values.erase(f.name);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

IngestResult generate_synthetic_ingested(const SynthConfig& cfg, const FeatureSchema& schema) {
  const auto records = synthesize_records(schema, cfg);
  auto result = ingest(schema, records);
  if (!result.rejected.empty())
    throw DataError("synthetic record rejected during ingestion: " + result.rejected.front().reason);
  return result;
}

EncodedCohort generate_synthetic(const SynthConfig& cfg, const FeatureSchema& schema) {
  return generate_synthetic_ingested(cfg, schema).cohort;
}

EncodedCohort generate_synthetic(const SynthConfig& cfg) { return generate_synthetic(cfg, default_schema()); }

}  // namespace screening
