#include <cmath>

#include "screening/error.hpp"
#include "screening/learner.hpp"

namespace screening {

NbModel train_nb(const EncodedCohort& data, double alpha) {
  if (!(alpha >= 0.0)) throw UsageError("naive Bayes smoothing alpha must be >= 0");
  if (data.n_abnormal() == 0 || data.n_normal() == 0) throw UsageError("single-class training data");

  const std::size_t dim = data.dim();
  std::vector<double> ones_abnormal(dim, 0.0), ones_normal(dim, 0.0);
  for (const auto& r : data.rows()) {
    auto& ones = r.label == Label::Abnormal ? ones_abnormal : ones_normal;
    for (std::size_t j = 0; j < dim; ++j) ones[j] += r.x[j];
  }

  NbModel m;
  m.alpha = alpha;
  const auto n_a = static_cast<double>(data.n_abnormal());
  const auto n_n = static_cast<double>(data.n_normal());
  m.prior_abnormal = n_a / (n_a + n_n);
  m.prior_normal = n_n / (n_a + n_n);
  m.p1_abnormal.resize(dim);
  m.p1_normal.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    m.p1_abnormal[j] = (ones_abnormal[j] + alpha) / (n_a + 2.0 * alpha);
    m.p1_normal[j] = (ones_normal[j] + alpha) / (n_n + 2.0 * alpha);
  }
  return m;
}

double predict_nb(const NbModel& model, std::span<const std::uint8_t> x) {
  if (x.size() != model.p1_abnormal.size()) throw UsageError("dimension mismatch between model and input");
  // Log joint per class; the evidence P(x) cancels in the normalization.
  double log_a = std::log(model.prior_abnormal);
  double log_n = std::log(model.prior_normal);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double pa = x[j] ? model.p1_abnormal[j] : 1.0 - model.p1_abnormal[j];
    const double pn = x[j] ? model.p1_normal[j] : 1.0 - model.p1_normal[j];
    if (pa <= 0.0 || pn <= 0.0)
      throw DataError("zero-probability likelihood for feature " + std::to_string(j) + " (use alpha > 0)");
    log_a += std::log(pa);
    log_n += std::log(pn);
  }
  const double hi = std::max(log_a, log_n);
  const double ea = std::exp(log_a - hi);
  const double en = std::exp(log_n - hi);
  return ea / (ea + en);
}

}  // namespace screening
