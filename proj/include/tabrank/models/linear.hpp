#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "../rng.hpp"
#include "../table.hpp"
#include "params.hpp"

namespace tabrank {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Linear scorer w.x + b.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  double score(std::span<const double> x) const {
    double s = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * x[j];
    return s;
  }
};

// Mean logistic loss plus (l2 / 2) * |w|^2 (bias unpenalized). Parameters are
// laid out as [w_0 .. w_{d-1}, b]. Writes the gradient when `grad` is nonempty.
inline double logistic_objective(std::span<const double> params, const EncodedMatrix& x,
                                 std::span<const std::uint8_t> y, double l2, std::span<double> grad = {}) {
  const std::size_t d = x.cols;
  const double n = static_cast<double>(x.rows);
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    auto row = x.row(i);
    double z = params[d];
    for (std::size_t j = 0; j < d; ++j) z += params[j] * row[j];
    loss += softplus(z) - (y[i] ? z : 0.0);
    if (!grad.empty()) {
      const double r = (sigmoid(z) - (y[i] ? 1.0 : 0.0)) / n;
      for (std::size_t j = 0; j < d; ++j) grad[j] += r * row[j];
      grad[d] += r;
    }
  }
  loss /= n;
  double reg = 0.0;
  for (std::size_t j = 0; j < d; ++j) reg += params[j] * params[j];
  loss += 0.5 * l2 * reg;
  if (!grad.empty())
    for (std::size_t j = 0; j < d; ++j) grad[j] += l2 * params[j];
  return loss;
}

struct FitStatus {
  bool converged = true;
  int iterations = 0;
};

// Full-batch gradient descent with Armijo backtracking.
inline LinearModel fit_logistic_regression(const EncodedMatrix& x, std::span<const std::uint8_t> y,
                                           const LogRegParams& p, FitStatus* status = nullptr) {
  const std::size_t d = x.cols;
  std::vector<double> params(d + 1, 0.0), grad(d + 1), trial(d + 1);
  double loss = logistic_objective(params, x, y, p.l2, grad);
  double step = 1.0;
  FitStatus st;
  st.converged = false;
  for (int epoch = 0; epoch < p.max_epochs; ++epoch) {
    st.iterations = epoch + 1;
    double g2 = 0.0;
    for (double g : grad) g2 += g * g;
    if (g2 == 0.0) {
      st.converged = true;
      break;
    }
    step *= 2.0;
    double next = 0.0;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t j = 0; j <= d; ++j) trial[j] = params[j] - step * grad[j];
      next = logistic_objective(trial, x, y, p.l2);
      if (next <= loss - 0.5 * step * g2) break;
      step *= 0.5;
    }
    params.swap(trial);
    const double delta = loss - next;
    loss = logistic_objective(params, x, y, p.l2, grad);
    if (std::abs(delta) < p.tol) {
      st.converged = true;
      break;
    }
  }
  if (status) *status = st;
  LinearModel m;
  m.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(d));
  m.bias = params[d];
  return m;
}

// Single-row loss used by the SGD model: logistic loss on row `x` plus
// (l2 / 2) * |w|^2, parameters laid out as [w..., b].
inline double sgd_sample_loss(std::span<const double> params, std::span<const double> x, bool y, double l2) {
  const std::size_t d = x.size();
  double z = params[d], reg = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    z += params[j] * x[j];
    reg += params[j] * params[j];
  }
  return softplus(z) - (y ? z : 0.0) + 0.5 * l2 * reg;
}

// Gradient of sgd_sample_loss, written into `grad`.
inline void sgd_sample_gradient(std::span<const double> params, std::span<const double> x, bool y, double l2,
                                std::span<double> grad) {
  const std::size_t d = x.size();
  double z = params[d];
  for (std::size_t j = 0; j < d; ++j) z += params[j] * x[j];
  const double r = sigmoid(z) - (y ? 1.0 : 0.0);
  for (std::size_t j = 0; j < d; ++j) grad[j] = r * x[j] + l2 * params[j];
  grad[d] = r;
}

// Per-sample stochastic gradient descent on the same regularized logistic
// loss; the step size decays as eta0 / (1 + t / n) over update count t.
inline LinearModel fit_sgd_logistic(const EncodedMatrix& x, std::span<const std::uint8_t> y, const SgdParams& p,
                                    std::uint64_t seed) {
  const std::size_t d = x.cols;
  const double n = static_cast<double>(x.rows);
  std::vector<double> params(d + 1, 0.0), grad(d + 1);
  Rng rng(seed);
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double t = 0.0;
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(order);
    for (auto i : order) {
      const double eta = p.learning_rate / (1.0 + t / n);
      sgd_sample_gradient(params, x.row(i), y[i] != 0, p.l2, grad);
      for (std::size_t j = 0; j <= d; ++j) params[j] -= eta * grad[j];
      t += 1.0;
    }
  }
  LinearModel m;
  m.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(d));
  m.bias = params[d];
  return m;
}

// Pegasos sub-gradient training of a hinge-loss linear SVM with the bias
// handled as an extra constant input.
inline LinearModel fit_pegasos_svm(const EncodedMatrix& x, std::span<const std::uint8_t> y, const SvmParams& p,
                                   std::uint64_t seed) {
  const std::size_t d = x.cols;
  std::vector<double> w(d + 1, 0.0);
  Rng rng(seed);
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double radius = 1.0 / std::sqrt(p.l2);
  double t = 0.0;
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(order);
    for (auto i : order) {
      t += 1.0;
      const double eta = 1.0 / (p.l2 * t);
      auto row = x.row(i);
      const double label = y[i] ? 1.0 : -1.0;
      double s = w[d];
      for (std::size_t j = 0; j < d; ++j) s += w[j] * row[j];
      const double shrink = 1.0 - eta * p.l2;
      for (auto& v : w) v *= shrink;
      if (label * s < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * label * row[j];
        w[d] += eta * label;
      }
      double norm2 = 0.0;
      for (double v : w) norm2 += v * v;
      if (norm2 > radius * radius) {
        const double f = radius / std::sqrt(norm2);
        for (auto& v : w) v *= f;
      }
    }
  }
  LinearModel m;
  m.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d));
  m.bias = w[d];
  return m;
}

// Platt scaling: P(positive | s) = 1 / (1 + exp(a * s + b)), fitted by Newton
// iterations with backtracking on smoothed targets.
struct PlattScaling {
  double a = 0.0;
  double b = 0.0;

  double probability(double s) const { return sigmoid(-(a * s + b)); }

  static PlattScaling fit(std::span<const double> scores, std::span<const std::uint8_t> y) {
    double n_pos = 0, n_neg = 0;
    for (auto v : y) (v ? n_pos : n_neg) += 1;
    const double hi = (n_pos + 1.0) / (n_pos + 2.0), lo = 1.0 / (n_neg + 2.0);
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] ? hi : lo;
    double a = 0.0, b = std::log((n_neg + 1.0) / (n_pos + 1.0));
    auto objective = [&](double aa, double bb) {
      double f = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double z = aa * scores[i] + bb;
        // -[t log p + (1 - t) log(1 - p)] with p = sigmoid(-z)
        f += t[i] * softplus(z) + (1.0 - t[i]) * softplus(-z);
      }
      return f;
    };
    double f = objective(a, b);
    for (int it = 0; it < 100; ++it) {
      double g1 = 0, g2 = 0, h11 = 1e-12, h22 = 1e-12, h21 = 0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double z = a * scores[i] + b;
        const double p = sigmoid(-z);
        const double q = 1.0 - p;
        const double d2 = p * q;
        h11 += scores[i] * scores[i] * d2;
        h22 += d2;
        h21 += scores[i] * d2;
        const double d1 = t[i] - p;
        g1 += scores[i] * d1;
        g2 += d1;
      }
      if (std::abs(g1) < 1e-9 && std::abs(g2) < 1e-9) break;
      const double det = h11 * h22 - h21 * h21;
      if (det <= 0) break;
      const double da = -(h22 * g1 - h21 * g2) / det;
      const double db = -(-h21 * g1 + h11 * g2) / det;
      const double gd = g1 * da + g2 * db;
      double step = 1.0;
      bool moved = false;
      while (step >= 1e-10) {
        const double na = a + step * da, nb = b + step * db;
        const double nf = objective(na, nb);
        if (nf < f + 1e-4 * step * gd) {
          a = na;
          b = nb;
          f = nf;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    return {a, b};
  }
};

inline nlohmann::json linear_to_json(const LinearModel& m) { return {{"weights", m.weights}, {"bias", m.bias}}; }
inline LinearModel linear_from_json(const nlohmann::json& j) {
  return {j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()};
}

}  // namespace tabrank
