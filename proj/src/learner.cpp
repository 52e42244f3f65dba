#include "screening/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "screening/error.hpp"

namespace screening {

namespace {

using nlohmann::json;

constexpr int kModelFormatVersion = 1;

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double label_value(Label l) { return l == Label::Abnormal ? 1.0 : 0.0; }

void margins(const SparseDataset& data, std::span<const double> w, std::vector<double>& out) {
  out.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    double s = 0.0;
    for (auto c : data.row(i)) s += w[c];
    out[i] = s;
  }
}

double nll_from_margins(const SparseDataset& data, const std::vector<double>& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) s += softplus(m[i]) - label_value(data.label(i)) * m[i];
  return s;
}

double squared_norm(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

double l1_norm(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

double smooth_from_margins(const SparseDataset& data, const std::vector<double>& m, std::span<const double> w,
                           const Penalty& p) {
  return p.loss_scale() * nll_from_margins(data, m) + p.ridge_weight() * squared_norm(w);
}

void gradient_from_margins(const SparseDataset& data, const std::vector<double>& m, std::span<const double> w,
                           const Penalty& p, std::vector<double>& g) {
  g.assign(data.dim(), 0.0);
  const double scale = p.loss_scale();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = scale * (sigmoid(m[i]) - label_value(data.label(i)));
    for (auto c : data.row(i)) g[c] += r;
  }
  const double two_ridge = 2.0 * p.ridge_weight();
  if (two_ridge != 0.0)
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += two_ridge * w[j];
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

void validate(const TrainConfig& cfg) {
  const auto& p = cfg.penalty;
  if (!(cfg.tol > 0.0)) throw UsageError("tol must be > 0");
  if (cfg.max_epochs < 1) throw UsageError("max_epochs must be >= 1");
  if (p.kind == Penalty::Kind::L2 && !(p.ridge >= 0.0)) throw UsageError("ridge must be >= 0");
  if (p.kind == Penalty::Kind::L1 && !(p.c > 0.0)) throw UsageError("C must be > 0");
  if (p.kind == Penalty::Kind::L1 && !(p.l1 >= 0.0)) throw UsageError("L1 coefficient must be >= 0");
}

}  // namespace

void SparseDataset::add(const SparseVector& x, Label y) {
  if (x.dim != dim_) throw UsageError("sparse row dimension mismatch");
  cols_.insert(cols_.end(), x.indices.begin(), x.indices.end());
  row_start_.push_back(cols_.size());
  labels_.push_back(y);
}

std::size_t SparseDataset::count(Label l) const { return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), l)); }

SparseDataset expand_cohort(const EncodedCohort& cohort, const MonomialIndex& index) {
  if (cohort.dim() != index.base_dim()) throw UsageError("cohort width does not match the monomial index");
  SparseDataset data(index.total());
  for (const auto& r : cohort.rows()) data.add(index.expand(r.x), r.label);
  return data;
}

json to_json(const Penalty& p) {
  if (p.kind == Penalty::Kind::L1) return json{{"type", "l1"}, {"c", p.c}, {"l1", p.l1}};
  return json{{"type", "l2"}, {"ridge", p.ridge}};
}

Penalty penalty_from_json(const json& j) {
  const auto type = j.value("type", std::string("l2"));
  if (type == "l2") return Penalty::l2(j.value("ridge", 1e-8));
  if (type == "l1") return Penalty::l1_penalty(j.value("c", 1.0), j.value("l1", 1.0));
  throw UsageError("unknown penalty type '" + type + "'");
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double smooth_objective(const SparseDataset& data, std::span<const double> w, const Penalty& penalty) {
  std::vector<double> m;
  margins(data, w, m);
  return smooth_from_margins(data, m, w, penalty);
}

double objective(const SparseDataset& data, std::span<const double> w, const Penalty& penalty) {
  return smooth_objective(data, w, penalty) + penalty.l1_weight() * l1_norm(w);
}

std::vector<double> smooth_gradient(const SparseDataset& data, std::span<const double> w, const Penalty& penalty) {
  std::vector<double> m, g;
  margins(data, w, m);
  gradient_from_margins(data, m, w, penalty, g);
  return g;
}

TrainResult train_lr(const SparseDataset& data, const TrainConfig& cfg) {
  validate(cfg);
  if (data.size() == 0) throw UsageError("empty training set");
  if (data.count(Label::Abnormal) == 0 || data.count(Label::Normal) == 0)
    throw UsageError("single-class training data");

  const Penalty& pen = cfg.penalty;
  const double l1 = pen.l1_weight();
  const std::size_t dim = data.dim();

  std::vector<double> x(dim, 0.0), y(dim, 0.0), z(dim), grad;
  std::vector<double> m_x(data.size(), 0.0), m_y(data.size(), 0.0), m_z;

  double big_f = smooth_from_margins(data, m_x, x, pen) + l1 * l1_norm(x);
  TrainResult result;
  result.objective_trace.push_back(big_f);

  double theta = 1.0;
  double step = 1.0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    result.epochs = epoch;
    gradient_from_margins(data, m_y, y, pen, grad);
    const double f_y = smooth_from_margins(data, m_y, y, pen);

    double f_z = 0.0;
    bool descent = false;
    for (int tries = 0; tries < 200; ++tries) {
      for (std::size_t j = 0; j < dim; ++j) z[j] = soft_threshold(y[j] - step * grad[j], step * l1);
      margins(data, z, m_z);
      f_z = smooth_from_margins(data, m_z, z, pen);
      double lin = 0.0, quad = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = z[j] - y[j];
        lin += grad[j] * d;
        quad += d * d;
      }
      if (f_z <= f_y + lin + quad / (2.0 * step) + 1e-12 * (1.0 + std::abs(f_y))) {
        descent = true;
        break;
      }
      step *= 0.5;
    }
    if (!descent) {
      result.warning = "line search failed to find a descent step";
      break;
    }

    const double big_f_z = f_z + l1 * l1_norm(z);
    if (big_f_z <= big_f) {
      const double rel = (big_f - big_f_z) / std::max(std::abs(big_f_z), 1e-300);
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      const double beta = (theta - 1.0) / theta_next;
      for (std::size_t j = 0; j < dim; ++j) y[j] = z[j] + beta * (z[j] - x[j]);
      for (std::size_t i = 0; i < m_y.size(); ++i) m_y[i] = m_z[i] + beta * (m_z[i] - m_x[i]);
      x.swap(z);
      m_x.swap(m_z);
      big_f = big_f_z;
      theta = theta_next;
      result.objective_trace.push_back(big_f);
      if (rel <= cfg.tol) {
        result.converged = true;
        break;
      }
      step *= 1.25;
    } else {
      // Momentum overshot: restart from the current iterate, where the
      // backtracked proximal step is guaranteed not to increase the objective.
      y = x;
      m_y = m_x;
      theta = 1.0;
      result.objective_trace.push_back(big_f);
    }
  }

  for (double v : x)
    if (!std::isfinite(v)) throw DataError("training produced non-finite weights");
  if (!result.converged && result.warning.empty())
    result.warning = "did not converge within " + std::to_string(cfg.max_epochs) + " epochs";
  result.model.w = std::move(x);
  return result;
}

double predict_proba(const ModelWeights& model, std::span<const std::uint32_t> active) {
  double t = 0.0;
  for (auto c : active) {
    if (c >= model.w.size()) throw UsageError("feature index outside model dimension");
    t += model.w[c];
  }
  return sigmoid(t);
}

double predict_proba(const ModelWeights& model, const SparseVector& x) {
  if (x.dim != model.dim()) throw UsageError("dimension mismatch between model and input");
  return predict_proba(model, std::span<const std::uint32_t>(x.indices));
}

json to_json(const LrModelFile& m) {
  for (double v : m.weights.w)
    if (!std::isfinite(v)) throw DataError("model has non-finite weights");
  return json{{"format", "screening-lr"},
              {"version", kModelFormatVersion},
              {"mode", to_string(m.mode)},
              {"degree", m.degree},
              {"base_dim", m.base_dim},
              {"penalty", to_json(m.penalty)},
              {"weights", m.weights.w}};
}

LrModelFile lr_model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "screening-lr") throw DataError("not an LR model file");
    if (j.at("version").get<int>() != kModelFormatVersion) throw DataError("unsupported model file version");
    LrModelFile m;
    m.mode = expansion_mode_from_string(j.at("mode").get<std::string>());
    m.degree = j.at("degree").get<int>();
    m.base_dim = j.at("base_dim").get<std::size_t>();
    m.penalty = penalty_from_json(j.at("penalty"));
    m.weights.w = j.at("weights").get<std::vector<double>>();
    if (m.weights.w.size() != expanded_dimension(m.base_dim, m.degree, m.mode))
      throw DataError("model weight count does not match its expansion");
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void save_lr_model(const std::string& path, const LrModelFile& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << to_json(m).dump() << '\n';
}

LrModelFile load_lr_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("model not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return lr_model_from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void write_weights_csv(std::ostream& out, const ModelWeights& model, const MonomialIndex& index) {
  if (model.dim() != index.total()) throw UsageError("model dimension does not match the monomial index");
  out << "column,weight\n";
  std::ostringstream line;
  line.precision(17);
  for (std::size_t i = 0; i < model.dim(); ++i) {
    line.str("");
    line << index.column_name(i) << ',' << model.w[i] << '\n';
    out << line.str();
  }
}

}  // namespace screening
