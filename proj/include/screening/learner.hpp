#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "screening/cohort.hpp"
#include "screening/poly_expand.hpp"

namespace screening {

// Expanded rows in compressed sparse row form. Every stored value is 1.
class SparseDataset {
 public:
  explicit SparseDataset(std::size_t dim = 0) : dim_(dim) { row_start_.push_back(0); }

  void add(const SparseVector& x, Label y);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t nnz() const { return cols_.size(); }
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {cols_.data() + row_start_[i], row_start_[i + 1] - row_start_[i]};
  }
  Label label(std::size_t i) const { return labels_[i]; }
  std::size_t count(Label l) const;

 private:
  std::size_t dim_;
  std::vector<std::size_t> row_start_;
  std::vector<std::uint32_t> cols_;
  std::vector<Label> labels_;
};

// Expands every cohort row; rows keep cohort order.
SparseDataset expand_cohort(const EncodedCohort& cohort, const MonomialIndex& index);

// Objective: loss_scale * NLL(w) + ridge * ||w||_2^2 + l1 * ||w||_1.
//   L2: loss_scale = 1, ridge = lambda, l1 = 0 (binomial log-likelihood + ridge)
//   L1: loss_scale = C, ridge = 0, l1 = lambda_1 (liblinear-style)
// The bias column is penalized like any other weight.
struct Penalty {
  enum class Kind { L2, L1 };

  Kind kind = Kind::L2;
  double ridge = 1e-8;
  double c = 1.0;
  double l1 = 1.0;

  double loss_scale() const { return kind == Kind::L1 ? c : 1.0; }
  double ridge_weight() const { return kind == Kind::L2 ? ridge : 0.0; }
  double l1_weight() const { return kind == Kind::L1 ? l1 : 0.0; }

  static Penalty l2(double ridge) { return {Kind::L2, ridge, 1.0, 0.0}; }
  static Penalty l1_penalty(double c, double l1) { return {Kind::L1, 0.0, c, l1}; }
};

nlohmann::json to_json(const Penalty& p);
Penalty penalty_from_json(const nlohmann::json& j);

struct TrainConfig {
  Penalty penalty;
  double tol = 1e-8;  // relative objective change
  int max_epochs = 1000;
  // The solver is deterministic; the seed is kept for provenance only.
  std::uint64_t seed = 0;
};

struct ModelWeights {
  std::vector<double> w;
  std::vector<std::string> column_names;  // optional

  std::size_t dim() const { return w.size(); }
};

struct TrainResult {
  ModelWeights model;
  bool converged = false;
  int epochs = 0;
  std::vector<double> objective_trace;  // objective after each epoch, index 0 = start
  std::string warning;
};

double sigmoid(double t);

double smooth_objective(const SparseDataset& data, std::span<const double> w, const Penalty& penalty);
double objective(const SparseDataset& data, std::span<const double> w, const Penalty& penalty);
std::vector<double> smooth_gradient(const SparseDataset& data, std::span<const double> w, const Penalty& penalty);

// Monotone accelerated proximal gradient (FISTA with a descent safeguard and
// backtracking). Throws UsageError for single-class data or bad config.
TrainResult train_lr(const SparseDataset& data, const TrainConfig& cfg);

// P(abnormal | x) = sigmoid(w . x).
double predict_proba(const ModelWeights& model, const SparseVector& x);
double predict_proba(const ModelWeights& model, std::span<const std::uint32_t> active);

// Versioned on-disk form of a trained expanded-LR model.
struct LrModelFile {
  ExpansionMode mode = ExpansionMode::Multiset;
  int degree = 3;
  std::size_t base_dim = 0;
  Penalty penalty;
  ModelWeights weights;
};

nlohmann::json to_json(const LrModelFile& m);
LrModelFile lr_model_from_json(const nlohmann::json& j);
void save_lr_model(const std::string& path, const LrModelFile& m);
LrModelFile load_lr_model(const std::string& path);

// "column,weight" rows, columns named by monomial.
void write_weights_csv(std::ostream& out, const ModelWeights& model, const MonomialIndex& index);

// Bernoulli naive Bayes over 0/1 features with additive smoothing alpha:
// P(x_j = 1 | c) = (count_jc + alpha) / (n_c + 2 alpha).
struct NbModel {
  double prior_abnormal = 0.5;
  double prior_normal = 0.5;
  std::vector<double> p1_abnormal;
  std::vector<double> p1_normal;
  double alpha = 1.0;
};

NbModel train_nb(const EncodedCohort& data, double alpha = 1.0);

// Posterior P(abnormal | x). Throws DataError when x hits a zero-probability
// likelihood (possible only with alpha = 0).
double predict_nb(const NbModel& model, std::span<const std::uint8_t> x);

}  // namespace screening
