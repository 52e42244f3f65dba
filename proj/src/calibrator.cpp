#include "screening/calibrator.hpp"

#include <algorithm>
#include <cmath>

#include "screening/error.hpp"

namespace screening {

namespace {

void check_score(double z) {
  if (!std::isfinite(z) || z < 0.0 || z > 1.0) throw UsageError("score outside [0, 1]");
}

}  // namespace

double to_normal_prob(double p_abnormal) {
  check_score(p_abnormal);
  return 1.0 - p_abnormal;
}

ConfusionMatrix confusion(std::span<const ScoredInstance> scored, double threshold) {
  ConfusionMatrix cm;
  for (const auto& s : scored) {
    check_score(s.z);
    const bool predicted_normal = s.z > threshold;
    if (s.label == Label::Abnormal) {
      (predicted_normal ? cm.fn : cm.ta)++;
    } else {
      (predicted_normal ? cm.tn : cm.fa)++;
    }
  }
  return cm;
}

ThresholdResult calibrate(std::span<const ScoredInstance> scored) {
  if (scored.empty()) throw UsageError("cannot calibrate on an empty score set");
  ThresholdResult r;
  r.threshold = 0.5;
  for (const auto& s : scored) {
    check_score(s.z);
    if (s.label == Label::Abnormal && s.z > r.threshold) r.threshold = s.z;
  }
  r.cm = confusion(scored, r.threshold);
  r.fa = r.cm.fa;
  return r;
}

std::optional<double> sensitivity(const ConfusionMatrix& cm) {
  if (cm.ta + cm.fn == 0) return std::nullopt;
  return static_cast<double>(cm.ta) / static_cast<double>(cm.ta + cm.fn);
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw UsageError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.ta + cm.tn) / static_cast<double>(cm.total());
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
  return {{"TA", cm.ta}, {"FA", cm.fa}, {"FN", cm.fn}, {"TN", cm.tn}};
}

ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
  return {j.at("TA").get<std::size_t>(), j.at("FA").get<std::size_t>(), j.at("FN").get<std::size_t>(),
          j.at("TN").get<std::size_t>()};
}

nlohmann::json calibration_report(const ThresholdResult& result, std::string_view protocol) {
  nlohmann::json j{{"threshold", result.threshold},
                   {"confusion", to_json(result.cm)},
                   {"accuracy", result.cm.total() ? nlohmann::json(accuracy(result.cm)) : nlohmann::json()},
                   {"protocol", protocol}};
  const auto sens = sensitivity(result.cm);
  j["sensitivity"] = sens ? nlohmann::json(*sens) : nlohmann::json();
  return j;
}

}  // namespace screening
