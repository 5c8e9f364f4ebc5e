#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "../errors.hpp"
#include "../rng.hpp"
#include "../table.hpp"
#include "linear.hpp"
#include "mlp.hpp"
#include "params.hpp"

namespace tabrank {

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t points = 0;
  // NeuralNet only: random points rejected because a perturbation flipped a
  // ReLU unit.
  std::size_t rejected_points = 0;
};

struct GradientCheckConfig {
  std::size_t points = 20;
  double step = 1e-5;
  // Denominator floor so near-zero components are compared absolutely.
  double floor = 1e-6;
  std::uint64_t seed = 7;
  std::vector<int> hidden{64, 32, 16};
  double l2 = 1e-4;
};

inline double relative_gradient_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Compares the analytic gradient of a family's training loss with central
// finite differences at random parameter points. LogisticRegression checks
// the full-batch objective, SGDLinear the single-row objective (one random
// row per point) and NeuralNet the mean cross-entropy of the network.
inline GradientCheckResult numeric_gradient_check(Family family, const EncodedMatrix& x,
                                                   std::span<const std::uint8_t> y, const GradientCheckConfig& cfg = {}) {
  if (x.rows == 0 || x.rows > 64) throw PreconditionError("gradient check needs between 1 and 64 rows");
  GradientCheckResult res;
  Rng rng(cfg.seed);
  const double h = cfg.step;
  auto record = [&](double a, double n) {
    res.max_relative_error = std::max(res.max_relative_error, relative_gradient_error(a, n, cfg.floor));
  };

  switch (family) {
    case Family::LogisticRegression: {
      const std::size_t np = x.cols + 1;
      std::vector<double> theta(np), grad(np);
      for (std::size_t pt = 0; pt < cfg.points; ++pt) {
        for (auto& v : theta) v = rng.normal();
        logistic_objective(theta, x, y, cfg.l2, grad);
        for (std::size_t k = 0; k < np; ++k) {
          const double keep = theta[k];
          theta[k] = keep + h;
          const double up = logistic_objective(theta, x, y, cfg.l2);
          theta[k] = keep - h;
          const double down = logistic_objective(theta, x, y, cfg.l2);
          theta[k] = keep;
          record(grad[k], (up - down) / (2 * h));
        }
        ++res.points;
      }
      break;
    }
    case Family::SGDLinear: {
      const std::size_t np = x.cols + 1;
      std::vector<double> theta(np), grad(np);
      for (std::size_t pt = 0; pt < cfg.points; ++pt) {
        for (auto& v : theta) v = rng.normal();
        const std::size_t r = rng.index(x.rows);
        const auto row = x.row(r);
        sgd_sample_gradient(theta, row, y[r] != 0, cfg.l2, grad);
        for (std::size_t k = 0; k < np; ++k) {
          const double keep = theta[k];
          theta[k] = keep + h;
          const double up = sgd_sample_loss(theta, row, y[r] != 0, cfg.l2);
          theta[k] = keep - h;
          const double down = sgd_sample_loss(theta, row, y[r] != 0, cfg.l2);
          theta[k] = keep;
          record(grad[k], (up - down) / (2 * h));
        }
        ++res.points;
      }
      break;
    }
    case Family::NeuralNet: {
      Mlp net(x.cols, cfg.hidden);
      std::vector<std::size_t> rows(x.rows);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      const std::size_t np = net.parameter_count();
      std::vector<double> grad(np), numeric(np);
      while (res.points < cfg.points) {
        if (res.rejected_points > 100 * cfg.points) throw FitError("gradient check could not avoid ReLU kinks");
        net.initialize(rng);
        auto theta = net.parameters();
        // Random biases so the check exercises them too.
        for (auto& v : theta)
          if (v == 0.0) v = 0.1 * rng.normal();
        std::fill(grad.begin(), grad.end(), 0.0);
        const auto base = net.objective(theta, x, y, rows, grad);
        bool kink = false;
        for (std::size_t k = 0; k < np && !kink; ++k) {
          const double keep = theta[k];
          theta[k] = keep + h;
          const auto up = net.objective(theta, x, y, rows);
          theta[k] = keep - h;
          const auto down = net.objective(theta, x, y, rows);
          theta[k] = keep;
          kink = up.pattern != base.pattern || down.pattern != base.pattern;
          numeric[k] = (up.loss - down.loss) / (2 * h);
        }
        if (kink) {
          ++res.rejected_points;
          continue;
        }
        for (std::size_t k = 0; k < np; ++k) record(grad[k], numeric[k]);
        ++res.points;
      }
      break;
    }
    default: throw UnsupportedError(std::string("no gradient check for ") + family_id(family));
  }
  return res;
}

}  // namespace tabrank
