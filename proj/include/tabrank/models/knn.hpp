#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "../table.hpp"
#include "params.hpp"

namespace tabrank {

// Brute-force k nearest neighbors under squared Euclidean distance.
// Probability is the positive vote fraction among the k nearest training
// rows; equal distances go to the lower training row index.
struct KnnModel {
  std::size_t k = 5;
  EncodedMatrix train;
  std::vector<std::uint8_t> labels;

  double probability(std::span<const double> x, std::vector<std::pair<double, std::size_t>>& scratch) const {
    scratch.clear();
    for (std::size_t i = 0; i < train.rows; ++i) {
      auto r = train.row(i);
      double d = 0.0;
      for (std::size_t j = 0; j < train.cols; ++j) d += (r[j] - x[j]) * (r[j] - x[j]);
      scratch.emplace_back(d, i);
    }
    const std::size_t kk = std::min(k, scratch.size());
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(kk), scratch.end());
    std::size_t pos = 0;
    for (std::size_t j = 0; j < kk; ++j) pos += labels[scratch[j].second];
    return static_cast<double>(pos) / static_cast<double>(kk);
  }

  nlohmann::json to_json() const {
    return {{"k", k}, {"rows", train.rows}, {"cols", train.cols}, {"data", train.data}, {"labels", labels}};
  }
  static KnnModel from_json(const nlohmann::json& j) {
    KnnModel m;
    m.k = j.at("k").get<std::size_t>();
    m.train.rows = j.at("rows").get<std::size_t>();
    m.train.cols = j.at("cols").get<std::size_t>();
    m.train.data = j.at("data").get<std::vector<double>>();
    m.labels = j.at("labels").get<std::vector<std::uint8_t>>();
    if (m.train.data.size() != m.train.rows * m.train.cols || m.labels.size() != m.train.rows)
      throw ValidationError("knn state has inconsistent sizes");
    return m;
  }
};

inline KnnModel fit_knn(const EncodedMatrix& x, std::span<const std::uint8_t> y, const KnnParams& p) {
  KnnModel m;
  m.k = static_cast<std::size_t>(p.k);
  m.train = x;
  m.labels.assign(y.begin(), y.end());
  return m;
}

}  // namespace tabrank
