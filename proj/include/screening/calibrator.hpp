#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "json.hpp"
#include "screening/cohort.hpp"

namespace screening {

// z is the probability of the *normal* class.
struct ScoredInstance {
  double z = 0.5;
  Label label = Label::Normal;
  std::size_t origin = 0;
};

// Abnormal is the positive class: TA = true abnormal, FA = false abnormal
// (healthy flagged), FN = false normal (diseased cleared), TN = true normal.
struct ConfusionMatrix {
  std::size_t ta = 0;
  std::size_t fa = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return ta + fa + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ThresholdResult {
  double threshold = 0.5;
  ConfusionMatrix cm;
  std::size_t fa = 0;
};

// z = 1 - p_abnormal. Throws UsageError outside [0, 1].
double to_normal_prob(double p_abnormal);

// Rule: predict normal iff z > threshold; ties go to abnormal.
ConfusionMatrix confusion(std::span<const ScoredInstance> scored, double threshold);

// Starts at 0.5 and raises the threshold to the largest abnormal z, so no
// abnormal instance is predicted normal. The result is the smallest threshold
// >= 0.5 with FN = 0 and therefore has the fewest false abnormals among them.
ThresholdResult calibrate(std::span<const ScoredInstance> scored);

// TA / (TA + FN); nullopt when there are no abnormal instances.
std::optional<double> sensitivity(const ConfusionMatrix& cm);
// (TA + TN) / total. Throws UsageError on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

nlohmann::json to_json(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_json(const nlohmann::json& j);

// threshold, confusion counts, sensitivity (null when undefined), accuracy,
// protocol tag.
nlohmann::json calibration_report(const ThresholdResult& result, std::string_view protocol);

}  // namespace screening
