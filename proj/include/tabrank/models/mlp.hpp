#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "../rng.hpp"
#include "../table.hpp"
#include "linear.hpp"
#include "params.hpp"

namespace tabrank {

// Fully connected ReLU network with one sigmoid output unit. All weights and
// biases live in one flat parameter vector: per layer, the row-major
// (inputs x outputs) weight block followed by the output biases.
class Mlp {
 public:
  struct Workspace {
    std::vector<std::vector<double>> pre;  // pre-activations per layer (index 0 = input)
    std::vector<std::vector<double>> act;  // activations per layer
    std::vector<double> delta, prev_delta;
  };

  Mlp() = default;
  Mlp(std::size_t inputs, const std::vector<int>& hidden) {
    sizes_.push_back(inputs);
    for (int h : hidden) sizes_.push_back(static_cast<std::size_t>(h));
    sizes_.push_back(1);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      weight_offset_.push_back(off);
      off += sizes_[l] * sizes_[l + 1];
      bias_offset_.push_back(off);
      off += sizes_[l + 1];
    }
    params_.assign(off, 0.0);
  }

  std::size_t layers() const noexcept { return weight_offset_.size(); }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::vector<double>& parameters() noexcept { return params_; }
  const std::vector<double>& parameters() const noexcept { return params_; }

  // He-normal weights, zero biases.
  void initialize(Rng& rng) {
    std::fill(params_.begin(), params_.end(), 0.0);
    for (std::size_t l = 0; l < layers(); ++l) {
      const double sd = std::sqrt(2.0 / static_cast<double>(sizes_[l]));
      for (std::size_t k = 0; k < sizes_[l] * sizes_[l + 1]; ++k) params_[weight_offset_[l] + k] = sd * rng.normal();
    }
  }

  // Output logit for one input row under parameters `p`.
  double logit(std::span<const double> p, std::span<const double> x, Workspace* ws = nullptr) const;

  double probability(std::span<const double> x) const { return sigmoid(logit(params_, x)); }

  struct Objective {
    double loss = 0.0;
    // Hash of the ReLU on/off pattern over all rows; changes when a
    // perturbation crosses a kink.
    std::uint64_t pattern = 0;
  };

  // Mean binary cross-entropy over `rows` of `x` under parameters `p`; adds
  // the gradient into `grad` when it is nonempty (caller zeroes it).
  Objective objective(std::span<const double> p, const EncodedMatrix& x, std::span<const std::uint8_t> y,
                      std::span<const std::size_t> rows, std::span<double> grad = {}) const {
    Objective out;
    const double scale = 1.0 / static_cast<double>(rows.size());
    prepare(ws_);
    std::uint64_t h = 0x84222325CBF29CE4ULL;
    for (auto r : rows) {
      const double z = forward(p, x.row(r), ws_);
      const double t = y[r] ? 1.0 : 0.0;
      out.loss += (softplus(z) - t * z) * scale;
      for (std::size_t l = 1; l + 1 < sizes_.size(); ++l)
        for (std::size_t k = 0; k < sizes_[l]; ++k) h = (h ^ (ws_.pre[l][k] > 0.0 ? 1u : 0u)) * 0x100000001B3ULL;
      if (!grad.empty()) backward(p, (sigmoid(z) - t) * scale, grad, ws_);
    }
    out.pattern = h;
    return out;
  }

  nlohmann::json to_json() const { return {{"sizes", sizes_}, {"parameters", params_}}; }
  static Mlp from_json(const nlohmann::json& j) {
    const auto sizes = j.at("sizes").get<std::vector<std::size_t>>();
    std::vector<int> hidden;
    for (std::size_t l = 1; l + 1 < sizes.size(); ++l) hidden.push_back(static_cast<int>(sizes[l]));
    Mlp m(sizes.front(), hidden);
    m.params_ = j.at("parameters").get<std::vector<double>>();
    if (m.params_.size() != m.parameter_count()) throw ValidationError("network parameter count mismatch");
    return m;
  }

 private:
  void prepare(Workspace& ws) const {
    if (ws.act.size() == sizes_.size()) return;
    ws.pre.assign(sizes_.size(), {});
    ws.act.assign(sizes_.size(), {});
    for (std::size_t l = 0; l < sizes_.size(); ++l) {
      ws.pre[l].assign(sizes_[l], 0.0);
      ws.act[l].assign(sizes_[l], 0.0);
    }
  }

  double forward(std::span<const double> p, std::span<const double> x, Workspace& ws) const {
    std::copy(x.begin(), x.end(), ws.act[0].begin());
    for (std::size_t l = 0; l < layers(); ++l) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      auto& z = ws.pre[l + 1];
      const double* b = p.data() + bias_offset_[l];
      std::copy(b, b + out, z.begin());
      const double* w = p.data() + weight_offset_[l];
      const auto& a = ws.act[l];
      for (std::size_t i = 0; i < in; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        const double* wr = w + i * out;
        for (std::size_t o = 0; o < out; ++o) z[o] += ai * wr[o];
      }
      auto& act = ws.act[l + 1];
      if (l + 1 == layers()) {
        act[0] = z[0];
      } else {
        for (std::size_t o = 0; o < out; ++o) act[o] = z[o] > 0.0 ? z[o] : 0.0;
      }
    }
    return ws.pre.back()[0];
  }

  void backward(std::span<const double> p, double dlogit, std::span<double> grad, Workspace& ws) const {
    ws.delta.assign(1, dlogit);
    for (std::size_t l = layers(); l-- > 0;) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const auto& a = ws.act[l];
      double* gw = grad.data() + weight_offset_[l];
      double* gb = grad.data() + bias_offset_[l];
      for (std::size_t o = 0; o < out; ++o) gb[o] += ws.delta[o];
      for (std::size_t i = 0; i < in; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        double* g = gw + i * out;
        for (std::size_t o = 0; o < out; ++o) g[o] += ai * ws.delta[o];
      }
      if (l == 0) break;
      const double* w = p.data() + weight_offset_[l];
      ws.prev_delta.assign(in, 0.0);
      const auto& zprev = ws.pre[l];
      for (std::size_t i = 0; i < in; ++i) {
        if (!(zprev[i] > 0.0)) continue;
        const double* wr = w + i * out;
        double s = 0.0;
        for (std::size_t o = 0; o < out; ++o) s += wr[o] * ws.delta[o];
        ws.prev_delta[i] = s;
      }
      ws.delta.swap(ws.prev_delta);
    }
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> weight_offset_, bias_offset_;
  std::vector<double> params_;
  mutable Workspace ws_;
};

inline double Mlp::logit(std::span<const double> p, std::span<const double> x, Workspace* ws) const {
  Workspace local;
  Workspace& w = ws ? *ws : local;
  prepare(w);
  return forward(p, x, w);
}

// Mini-batch Adam on mean binary cross-entropy.
inline Mlp fit_mlp(const EncodedMatrix& x, std::span<const std::uint8_t> y, const MlpParams& p, std::uint64_t seed) {
  Mlp net(x.cols, p.hidden);
  Rng rng(seed);
  net.initialize(rng);
  auto& theta = net.parameters();
  const std::size_t np = theta.size();
  std::vector<double> m(np, 0.0), v(np, 0.0), g(np);
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(p.batch_size);
  double b1t = 1.0, b2t = 1.0;
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::fill(g.begin(), g.end(), 0.0);
      net.objective(theta, x, y, std::span<const std::size_t>(order.data() + start, end - start), g);
      b1t *= p.beta1;
      b2t *= p.beta2;
      const double lr = p.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
      for (std::size_t k = 0; k < np; ++k) {
        m[k] = p.beta1 * m[k] + (1.0 - p.beta1) * g[k];
        v[k] = p.beta2 * v[k] + (1.0 - p.beta2) * g[k] * g[k];
        theta[k] -= lr * m[k] / (std::sqrt(v[k]) + p.epsilon);
      }
    }
  }
  return net;
}

}  // namespace tabrank
