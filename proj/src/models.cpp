// Copyright 2026 The flsim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flsim/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flsim/error.hpp"
#include "flsim/random.hpp"

namespace flsim {
namespace {

// Forward-mode dual number; differentiating the analytic gradient along a
// unit direction yields one Hessian column.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit on purpose
  Dual(double value, double deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
inline Dual exp(Dual a) {
  const double e = std::exp(a.v);
  return {e, a.d * e};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual tanh(Dual a) {
  const double t = std::tanh(a.v);
  return {t, a.d * (1.0 - t * t)};
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

struct Layout {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
};

Layout layout_of(const ModelSpec& spec) {
  Layout l;
  const std::size_t bias = spec.bias ? 1 : 0;
  if (spec.kind == ModelKind::kMlp) {
    l.w1 = 0;
    l.b1 = spec.hidden_dim * spec.input_dim;
    l.w2 = l.b1 + bias * spec.hidden_dim;
    l.b2 = l.w2 + spec.output_dim * spec.hidden_dim;
    l.total = l.b2 + bias * spec.output_dim;
  } else {
    l.w1 = 0;
    l.b1 = spec.output_dim * spec.input_dim;
    l.total = l.b1 + bias * spec.output_dim;
  }
  return l;
}

// Accumulates the loss of one sample given its outputs and writes dLoss/dOut.
template <typename T>
T output_loss(const ModelSpec& spec, const Batch& batch, std::size_t row, const std::vector<T>& out,
              std::vector<T>& delta) {
  const std::size_t k = spec.output_dim;
  if (spec.loss == LossKind::kMse) {
    T sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      delta[j] = out[j] - batch.targets[row * k + j];
      sum += delta[j] * delta[j];
    }
    return 0.5 * sum;
  }
  using std::exp;
  using std::log;
  double shift = value_of(out[0]);
  for (std::size_t j = 1; j < k; ++j) shift = std::max(shift, value_of(out[j]));
  T denom = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    delta[j] = exp(out[j] - shift);
    denom += delta[j];
  }
  const std::uint32_t label = batch.labels[row];
  for (std::size_t j = 0; j < k; ++j) delta[j] = delta[j] / denom;
  const T result = log(denom) - (out[label] - shift);
  delta[label] = delta[label] - 1.0;
  return result;
}

// Mean loss and (optionally) its gradient for any scalar type T.
template <typename T>
T evaluate(const ModelSpec& spec, const std::vector<T>& w, const Batch& batch, std::vector<T>* grad) {
  using std::tanh;
  const Layout l = layout_of(spec);
  const std::size_t in = spec.input_dim;
  const std::size_t out_dim = spec.output_dim;
  const std::size_t hid = spec.hidden_dim;
  const bool mlp = spec.kind == ModelKind::kMlp;

  if (grad) grad->assign(l.total, T(0.0));
  std::vector<T> hidden(mlp ? hid : 0);
  std::vector<T> out(out_dim);
  std::vector<T> delta(out_dim);
  std::vector<T> delta_hidden(mlp ? hid : 0);
  T total = 0.0;

  for (std::size_t r = 0; r < batch.rows; ++r) {
    const double* x = &batch.inputs[r * in];
    if (mlp) {
      for (std::size_t h = 0; h < hid; ++h) {
        T acc = spec.bias ? w[l.b1 + h] : T(0.0);
        for (std::size_t i = 0; i < in; ++i) acc += w[l.w1 + h * in + i] * x[i];
        hidden[h] = tanh(acc);
      }
      for (std::size_t j = 0; j < out_dim; ++j) {
        T acc = spec.bias ? w[l.b2 + j] : T(0.0);
        for (std::size_t h = 0; h < hid; ++h) acc += w[l.w2 + j * hid + h] * hidden[h];
        out[j] = acc;
      }
    } else {
      for (std::size_t j = 0; j < out_dim; ++j) {
        T acc = spec.bias ? w[l.b1 + j] : T(0.0);
        for (std::size_t i = 0; i < in; ++i) acc += w[l.w1 + j * in + i] * x[i];
        out[j] = acc;
      }
    }

    total += output_loss(spec, batch, r, out, delta);
    if (!grad) continue;
    auto& g = *grad;

    if (mlp) {
      for (std::size_t h = 0; h < hid; ++h) delta_hidden[h] = 0.0;
      for (std::size_t j = 0; j < out_dim; ++j) {
        for (std::size_t h = 0; h < hid; ++h) {
          g[l.w2 + j * hid + h] += delta[j] * hidden[h];
          delta_hidden[h] += w[l.w2 + j * hid + h] * delta[j];
        }
        if (spec.bias) g[l.b2 + j] += delta[j];
      }
      for (std::size_t h = 0; h < hid; ++h) {
        const T dh = delta_hidden[h] * (1.0 - hidden[h] * hidden[h]);
        for (std::size_t i = 0; i < in; ++i) g[l.w1 + h * in + i] += dh * x[i];
        if (spec.bias) g[l.b1 + h] += dh;
      }
    } else {
      for (std::size_t j = 0; j < out_dim; ++j) {
        for (std::size_t i = 0; i < in; ++i) g[l.w1 + j * in + i] += delta[j] * x[i];
        if (spec.bias) g[l.b1 + j] += delta[j];
      }
    }
  }

  const double inv_rows = 1.0 / static_cast<double>(batch.rows);
  if (grad) {
    for (auto& gi : *grad) gi = gi * inv_rows;
  }
  return total * inv_rows;
}

void check_params(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  validate(spec, batch);
  if (w.size() != param_count(spec)) {
    throw validation_error("parameter length " + std::to_string(w.size()) +
                           " does not match model param_count " +
                           std::to_string(param_count(spec)));
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinearRegression:
      return "linear-regression";
    case ModelKind::kLogisticRegression:
      return "logistic-regression";
    case ModelKind::kMlp:
      return "mlp-1hidden";
  }
  return "?";
}

std::string_view to_string(LossKind loss) {
  return loss == LossKind::kMse ? "mse" : "cross-entropy";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "linear-regression") return ModelKind::kLinearRegression;
  if (text == "logistic-regression") return ModelKind::kLogisticRegression;
  if (text == "mlp-1hidden" || text == "mlp") return ModelKind::kMlp;
  throw validation_error("unknown model kind '" + std::string(text) + "'");
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "mse") return LossKind::kMse;
  if (text == "cross-entropy") return LossKind::kCrossEntropy;
  throw validation_error("unknown loss '" + std::string(text) + "'");
}

ModelSpec make_model_spec(ModelKind kind, std::size_t input_dim, std::size_t output_dim,
                          std::size_t hidden_dim) {
  ModelSpec spec;
  spec.kind = kind;
  spec.input_dim = input_dim;
  spec.output_dim = output_dim;
  spec.hidden_dim = hidden_dim;
  spec.loss = kind == ModelKind::kLinearRegression ? LossKind::kMse : LossKind::kCrossEntropy;
  validate(spec);
  return spec;
}

void validate(const ModelSpec& spec) {
  if (spec.input_dim == 0 || spec.output_dim == 0) {
    throw validation_error("model input_dim and output_dim must be positive");
  }
  switch (spec.kind) {
    case ModelKind::kLinearRegression:
      if (spec.loss != LossKind::kMse) throw validation_error("linear-regression requires mse loss");
      break;
    case ModelKind::kLogisticRegression:
      if (spec.loss != LossKind::kCrossEntropy) {
        throw validation_error("logistic-regression requires cross-entropy loss");
      }
      break;
    case ModelKind::kMlp:
      if (spec.hidden_dim == 0) throw validation_error("mlp-1hidden requires hidden_dim > 0");
      break;
  }
  if (spec.kind != ModelKind::kMlp && spec.hidden_dim != 0) {
    throw validation_error("hidden_dim is only meaningful for mlp-1hidden");
  }
  if (spec.loss == LossKind::kCrossEntropy && spec.output_dim < 2) {
    throw validation_error("cross-entropy needs output_dim >= 2");
  }
}

std::size_t param_count(const ModelSpec& spec) { return layout_of(spec).total; }

void validate(const ModelSpec& spec, const Batch& batch) {
  validate(spec);
  if (batch.rows == 0) throw validation_error("batch has no rows");
  if (batch.cols != spec.input_dim || batch.inputs.size() != batch.rows * batch.cols) {
    throw validation_error("batch input shape does not match model input_dim");
  }
  if (spec.loss == LossKind::kCrossEntropy) {
    if (batch.labels.size() != batch.rows) throw validation_error("batch label count mismatch");
    for (auto label : batch.labels) {
      if (label >= spec.output_dim) throw validation_error("class index out of range");
    }
  } else if (batch.targets.size() != batch.rows * spec.output_dim) {
    throw validation_error("batch target shape does not match model output_dim");
  }
}

double loss(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  check_params(spec, w, batch);
  const double value = evaluate<double>(spec, w.values(), batch, nullptr);
  if (!std::isfinite(value)) throw runtime_error("loss: non-finite value");
  return value;
}

ParamVector gradient(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  check_params(spec, w, batch);
  std::vector<double> grad;
  evaluate<double>(spec, w.values(), batch, &grad);
  return ParamVector(std::move(grad));
}

ParamVector finite_diff_gradient(const ModelSpec& spec, const ParamVector& w, const Batch& batch,
                                 double step_scale) {
  if (!(step_scale > 0.0) || !std::isfinite(step_scale)) {
    throw validation_error("finite_diff_gradient: step must be positive");
  }
  check_params(spec, w, batch);
  std::vector<double> probe = w.values();
  std::vector<double> grad(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double h = step_scale * (1.0 + std::fabs(w[i]));
    probe[i] = w[i] + h;
    const double up = evaluate<double>(spec, probe, batch, nullptr);
    probe[i] = w[i] - h;
    const double down = evaluate<double>(spec, probe, batch, nullptr);
    probe[i] = w[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return ParamVector(std::move(grad));
}

Matrix exact_hessian(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  check_params(spec, w, batch);
  const std::size_t n = w.size();
  if (n > kMaxHessianParams) {
    throw validation_error("exact_hessian: param_count " + std::to_string(n) + " exceeds " +
                           std::to_string(kMaxHessianParams));
  }
  Matrix h{n, n, std::vector<double>(n * n)};
  std::vector<Dual> point(n);
  std::vector<Dual> grad;
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) point[i] = Dual(w[i], i == c ? 1.0 : 0.0);
    evaluate<Dual>(spec, point, batch, &grad);
    for (std::size_t r = 0; r < n; ++r) h(r, c) = grad[r].d;
  }
  return h;
}

ParamVector local_sgd_step(const ModelSpec& spec, const ParamVector& w, const Batch& batch,
                           double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw validation_error("learning rate must be >= 0");
  return axpy(w, -eta, gradient(spec, w, batch));
}

double accuracy(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  validate(spec);
  if (w.size() != param_count(spec)) throw validation_error("accuracy: parameter length mismatch");
  if (batch.labels.size() != batch.rows || batch.rows == 0) {
    throw validation_error("accuracy needs one label per row");
  }
  const Layout l = layout_of(spec);
  const std::size_t in = spec.input_dim;
  const std::size_t hid = spec.hidden_dim;
  std::vector<double> hidden(hid);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < batch.rows; ++r) {
    const double* x = &batch.inputs[r * in];
    if (spec.kind == ModelKind::kMlp) {
      for (std::size_t h = 0; h < hid; ++h) {
        double acc = spec.bias ? w[l.b1 + h] : 0.0;
        for (std::size_t i = 0; i < in; ++i) acc += w[l.w1 + h * in + i] * x[i];
        hidden[h] = std::tanh(acc);
      }
    }
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t j = 0; j < spec.output_dim; ++j) {
      double acc;
      if (spec.kind == ModelKind::kMlp) {
        acc = spec.bias ? w[l.b2 + j] : 0.0;
        for (std::size_t h = 0; h < hid; ++h) acc += w[l.w2 + j * hid + h] * hidden[h];
      } else {
        acc = spec.bias ? w[l.b1 + j] : 0.0;
        for (std::size_t i = 0; i < in; ++i) acc += w[l.w1 + j * in + i] * x[i];
      }
      if (j == 0 || acc > best_value) {
        best = j;
        best_value = acc;
      }
    }
    if (best == batch.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.rows);
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  validate(spec);
  const Layout l = layout_of(spec);
  std::vector<double> w(l.total, 0.0);
  Rng rng(seed);
  auto fill = [&](std::size_t offset, std::size_t fan_out, std::size_t fan_in) {
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_out * fan_in; ++i) w[offset + i] = uniform(rng, -r, r);
  };
  if (spec.kind == ModelKind::kMlp) {
    fill(l.w1, spec.hidden_dim, spec.input_dim);
    fill(l.w2, spec.output_dim, spec.hidden_dim);
  } else {
    fill(l.w1, spec.output_dim, spec.input_dim);
  }
  return ParamVector(std::move(w));
}

double largest_eigenvalue(const Matrix& m, int iterations) {
  if (m.rows != m.cols || m.rows == 0) throw validation_error("largest_eigenvalue: need a square matrix");
  const std::size_t n = m.rows;
  std::vector<double> v(n), next(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += m(r, c) * v[c];
      next[r] = acc;
      norm += acc * acc;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    double rayleigh = 0.0;
    for (std::size_t i = 0; i < n; ++i) rayleigh += v[i] * next[i];
    double vv = 0.0;
    for (double x : v) vv += x * x;
    lambda = rayleigh / vv;
    for (std::size_t i = 0; i < n; ++i) v[i] = next[i] / norm;
  }
  return lambda;
}

}  // namespace flsim
