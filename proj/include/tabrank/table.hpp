#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace tabrank {

enum class ColumnKind { Numeric, Categorical };

inline const char* to_string(ColumnKind k) {
  return k == ColumnKind::Numeric ? "numeric" : "categorical";
}

// A named, typed column with an explicit missingness mask. Categorical cells
// are stored as codes into a per-column dictionary; missing numeric cells hold
// NaN and missing categorical cells hold code -1.
class Column {
 public:
  static constexpr std::int32_t kMissingCode = -1;

  Column() = default;

  static Column numeric(std::string name, std::vector<double> values,
                        std::vector<std::uint8_t> missing = {}) {
    Column c;
    c.name_ = std::move(name);
    c.kind_ = ColumnKind::Numeric;
    if (missing.empty()) missing.assign(values.size(), 0);
    if (missing.size() != values.size())
      throw ValidationError("column '" + c.name_ + "': mask length differs from values");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (missing[i]) {
        values[i] = std::numeric_limits<double>::quiet_NaN();
      } else if (!std::isfinite(values[i])) {
        throw ValidationError("column '" + c.name_ + "': non-finite value at row " +
                              std::to_string(i));
      }
    }
    c.numbers_ = std::move(values);
    c.missing_ = std::move(missing);
    return c;
  }

  // Builds a categorical column from raw strings. The dictionary is the sorted
  // set of observed values unless `categories` is given, in which case every
  // non-missing cell must be one of them.
  static Column categorical(std::string name, const std::vector<std::string>& cells,
                            std::vector<std::uint8_t> missing = {},
                            std::optional<std::vector<std::string>> categories = std::nullopt) {
    if (missing.empty()) missing.assign(cells.size(), 0);
    if (missing.size() != cells.size())
      throw ValidationError("column '" + name + "': mask length differs from values");
    std::vector<std::string> dict;
    if (categories) {
      dict = *categories;
    } else {
      std::set<std::string> seen;
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (!missing[i]) seen.insert(cells[i]);
      dict.assign(seen.begin(), seen.end());
    }
    std::unordered_map<std::string, std::int32_t> lookup;
    for (std::size_t i = 0; i < dict.size(); ++i) {
      if (!lookup.emplace(dict[i], static_cast<std::int32_t>(i)).second)
        throw ValidationError("column '" + name + "': duplicate category '" + dict[i] + "'");
    }
    std::vector<std::int32_t> codes(cells.size(), kMissingCode);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (missing[i]) continue;
      auto it = lookup.find(cells[i]);
      if (it == lookup.end())
        throw ValidationError("column '" + name + "': undeclared category '" + cells[i] +
                              "' at row " + std::to_string(i));
      codes[i] = it->second;
    }
    return from_codes(std::move(name), std::move(dict), std::move(codes));
  }

  // Codes of kMissingCode mark missing cells.
  static Column from_codes(std::string name, std::vector<std::string> categories,
                           std::vector<std::int32_t> codes) {
    Column c;
    c.name_ = std::move(name);
    c.kind_ = ColumnKind::Categorical;
    c.missing_.resize(codes.size());
    const auto ncat = static_cast<std::int32_t>(categories.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (codes[i] == kMissingCode) {
        c.missing_[i] = 1;
      } else if (codes[i] < 0 || codes[i] >= ncat) {
        throw ValidationError("column '" + c.name_ + "': category code out of range");
      }
    }
    c.categories_ = std::move(categories);
    c.codes_ = std::move(codes);
    return c;
  }

  const std::string& name() const noexcept { return name_; }
  ColumnKind kind() const noexcept { return kind_; }
  bool is_numeric() const noexcept { return kind_ == ColumnKind::Numeric; }
  bool is_categorical() const noexcept { return kind_ == ColumnKind::Categorical; }
  std::size_t size() const noexcept { return missing_.size(); }

  bool is_missing(std::size_t i) const { return missing_[i] != 0; }
  std::span<const std::uint8_t> missing_mask() const noexcept { return missing_; }
  std::size_t missing_count() const {
    return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), 1));
  }
  bool has_missing() const { return std::find(missing_.begin(), missing_.end(), 1) != missing_.end(); }

  // Numeric access.
  double number(std::size_t i) const { return numbers_[i]; }
  std::span<const double> numbers() const noexcept { return numbers_; }

  // Categorical access.
  std::int32_t code(std::size_t i) const { return codes_[i]; }
  std::span<const std::int32_t> codes() const noexcept { return codes_; }
  const std::vector<std::string>& categories() const noexcept { return categories_; }
  const std::string& category(std::size_t i) const { return categories_[static_cast<std::size_t>(codes_[i])]; }
  std::optional<std::int32_t> code_of(const std::string& category) const {
    auto it = std::find(categories_.begin(), categories_.end(), category);
    if (it == categories_.end()) return std::nullopt;
    return static_cast<std::int32_t>(it - categories_.begin());
  }

  // Cell rendered as text; missing cells render as the empty string.
  std::string text(std::size_t i) const;

  Column take(std::span<const std::size_t> rows) const {
    Column c;
    c.name_ = name_;
    c.kind_ = kind_;
    c.categories_ = categories_;
    c.missing_.reserve(rows.size());
    for (auto r : rows) c.missing_.push_back(missing_[r]);
    if (is_numeric()) {
      c.numbers_.reserve(rows.size());
      for (auto r : rows) c.numbers_.push_back(numbers_[r]);
    } else {
      c.codes_.reserve(rows.size());
      for (auto r : rows) c.codes_.push_back(codes_[r]);
    }
    return c;
  }

  Column renamed(std::string name) const {
    Column c = *this;
    c.name_ = std::move(name);
    return c;
  }

  friend bool operator==(const Column& a, const Column& b) {
    if (a.name_ != b.name_ || a.kind_ != b.kind_ || a.missing_ != b.missing_) return false;
    if (a.is_categorical()) return a.categories_ == b.categories_ && a.codes_ == b.codes_;
    for (std::size_t i = 0; i < a.numbers_.size(); ++i) {
      if (a.missing_[i]) continue;
      if (a.numbers_[i] != b.numbers_[i]) return false;
    }
    return true;
  }

 private:
  std::string name_;
  ColumnKind kind_ = ColumnKind::Numeric;
  std::vector<double> numbers_;
  std::vector<std::int32_t> codes_;
  std::vector<std::string> categories_;
  std::vector<std::uint8_t> missing_;
};

// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string Column::text(std::size_t i) const {
  if (missing_[i]) return {};
  return is_numeric() ? format_number(numbers_[i]) : category(i);
}

// Ordered set of columns sharing a row count, with an optional binary target.
// Rows carry provenance ids: the row index in the source file, or -1 for
// synthesized rows.
class DataTable {
 public:
  DataTable() = default;

  DataTable(std::vector<Column> columns, std::string target, std::string positive_label,
            std::vector<std::int64_t> row_ids = {})
      : columns_(std::move(columns)),
        target_(std::move(target)),
        positive_label_(std::move(positive_label)),
        row_ids_(std::move(row_ids)) {
    rows_ = columns_.empty() ? row_ids_.size() : columns_.front().size();
    std::set<std::string> names;
    for (const auto& c : columns_) {
      if (c.size() != rows_)
        throw ValidationError("column '" + c.name() + "' has " + std::to_string(c.size()) +
                              " rows, expected " + std::to_string(rows_));
      if (!names.insert(c.name()).second)
        throw ValidationError("duplicate column name '" + c.name() + "'");
    }
    if (row_ids_.empty()) {
      row_ids_.resize(rows_);
      for (std::size_t i = 0; i < rows_; ++i) row_ids_[i] = static_cast<std::int64_t>(i);
    } else if (row_ids_.size() != rows_) {
      throw ValidationError("row id count differs from row count");
    }
    if (!target_.empty()) {
      auto idx = index_of(target_);
      if (!idx) throw SchemaError("target column '" + target_ + "' not present");
      const Column& t = columns_[*idx];
      if (!t.is_categorical()) throw KindError("target column '" + target_ + "' must be categorical");
      if (t.categories().size() != 2)
        throw UnsupportedError("target column '" + target_ + "' must have exactly 2 labels, has " +
                               std::to_string(t.categories().size()));
      if (!t.code_of(positive_label_))
        throw SchemaError("positive label '" + positive_label_ + "' is not a label of '" + target_ + "'");
      target_index_ = *idx;
    }
  }

  std::size_t row_count() const noexcept { return rows_; }
  std::size_t column_count() const noexcept { return columns_.size(); }
  const std::vector<Column>& columns() const noexcept { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const Column& column(const std::string& name) const {
    auto idx = index_of(name);
    if (!idx) throw SchemaError("no column named '" + name + "'");
    return columns_[*idx];
  }
  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].name() == name) return i;
    return std::nullopt;
  }

  bool has_target() const noexcept { return !target_.empty(); }
  const std::string& target_name() const noexcept { return target_; }
  const std::string& positive_label() const noexcept { return positive_label_; }
  const Column& target() const {
    if (!has_target()) throw SchemaError("table has no target column");
    return columns_[target_index_];
  }
  std::string negative_label() const {
    const auto& cats = target().categories();
    return cats[0] == positive_label_ ? cats[1] : cats[0];
  }

  // Per-row label: 1 for the positive class, 0 otherwise. Requires no missing
  // target cells.
  std::vector<std::uint8_t> labels() const {
    const Column& t = target();
    const auto pos = *t.code_of(positive_label_);
    std::vector<std::uint8_t> y(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (t.is_missing(i)) throw PreconditionError("target has a missing cell at row " + std::to_string(i));
      y[i] = t.code(i) == pos ? 1 : 0;
    }
    return y;
  }

  // Non-target column indices in table order.
  std::vector<std::size_t> feature_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (!has_target() || i != target_index_) out.push_back(i);
    return out;
  }
  std::vector<std::string> feature_names() const {
    std::vector<std::string> out;
    for (auto i : feature_indices()) out.push_back(columns_[i].name());
    return out;
  }

  std::span<const std::int64_t> row_ids() const noexcept { return row_ids_; }

  bool has_missing_features() const {
    for (auto i : feature_indices())
      if (columns_[i].has_missing()) return true;
    return false;
  }

  DataTable take_rows(std::span<const std::size_t> rows) const {
    std::vector<Column> cols;
    cols.reserve(columns_.size());
    for (const auto& c : columns_) cols.push_back(c.take(rows));
    std::vector<std::int64_t> ids;
    ids.reserve(rows.size());
    for (auto r : rows) ids.push_back(row_ids_.at(r));
    return DataTable(std::move(cols), target_, positive_label_, std::move(ids));
  }

  // Same rows, different columns (must keep the target if this table has one).
  DataTable with_columns(std::vector<Column> cols) const {
    return DataTable(std::move(cols), target_, positive_label_, row_ids_);
  }

  friend bool operator==(const DataTable& a, const DataTable& b) {
    return a.columns_ == b.columns_ && a.target_ == b.target_ &&
           a.positive_label_ == b.positive_label_ && a.row_ids_ == b.row_ids_;
  }

 private:
  std::vector<Column> columns_;
  std::string target_;
  std::string positive_label_;
  std::vector<std::int64_t> row_ids_;
  std::size_t rows_ = 0;
  std::size_t target_index_ = 0;
};

// Counts of each category over the non-missing cells.
inline std::map<std::string, std::size_t> value_counts(const Column& column) {
  if (!column.is_categorical())
    throw KindError("value_counts: column '" + column.name() + "' is numeric; discretize it first");
  std::vector<std::size_t> counts(column.categories().size(), 0);
  for (std::size_t i = 0; i < column.size(); ++i)
    if (!column.is_missing(i)) ++counts[static_cast<std::size_t>(column.code(i))];
  std::map<std::string, std::size_t> out;
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] > 0) out.emplace(column.categories()[c], counts[c]);
  return out;
}

// The first `r` features of `order` plus the target, in that column order.
inline DataTable select_top_features(const DataTable& table, std::span<const std::string> order,
                                     std::size_t r) {
  const auto features = table.feature_names();
  if (order.size() != features.size() ||
      std::set<std::string>(order.begin(), order.end()) !=
          std::set<std::string>(features.begin(), features.end()))
    throw ValidationError("feature order is not a permutation of the table's features");
  if (r < 1 || r > features.size())
    throw BoundsError("subset size " + std::to_string(r) + " outside [1, " +
                      std::to_string(features.size()) + "]");
  std::vector<Column> cols;
  for (std::size_t i = 0; i < r; ++i) cols.push_back(table.column(order[i]));
  if (table.has_target()) cols.push_back(table.target());
  return table.with_columns(std::move(cols));
}

// Source of one encoded column: a numeric source column, or one category of a
// categorical source column.
struct EncodedFeature {
  std::size_t source = 0;
  std::string source_name;
  std::optional<std::string> category;

  friend bool operator==(const EncodedFeature&, const EncodedFeature&) = default;
};

// Dense row-major real matrix produced from a table.
struct EncodedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<EncodedFeature> feature_origin;

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// How one source column is encoded: numeric columns map to (x - center) * scale;
// categorical columns map to one indicator per listed category.
struct ColumnEncoding {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  double center = 0.0;
  double scale = 1.0;
  std::vector<std::string> categories;

  friend bool operator==(const ColumnEncoding&, const ColumnEncoding&) = default;
};

// Encoding statistics learned from one table and replayable on another, so
// that test rows are encoded with training statistics.
class EncodingRecipe {
 public:
  EncodingRecipe() = default;
  explicit EncodingRecipe(std::vector<ColumnEncoding> columns) : columns_(std::move(columns)) {}

  static EncodingRecipe fit(const DataTable& table, bool standardize) {
    std::vector<ColumnEncoding> cols;
    for (auto idx : table.feature_indices()) {
      const Column& c = table.column(idx);
      ColumnEncoding e;
      e.name = c.name();
      e.kind = c.kind();
      if (c.is_categorical()) {
        e.categories = c.categories();
      } else if (standardize) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < c.size(); ++i)
          if (!c.is_missing(i)) sum += c.number(i), ++n;
        const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
        double ss = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i)
          if (!c.is_missing(i)) ss += (c.number(i) - mean) * (c.number(i) - mean);
        const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
        e.center = mean;
        e.scale = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
      }
      cols.push_back(std::move(e));
    }
    return EncodingRecipe(std::move(cols));
  }

  const std::vector<ColumnEncoding>& columns() const noexcept { return columns_; }

  std::size_t encoded_width() const {
    std::size_t w = 0;
    for (const auto& c : columns_) w += c.kind == ColumnKind::Numeric ? 1 : c.categories.size();
    return w;
  }

  // Encodes `table`, matching columns by name. Categories unseen at fit time
  // encode as an all-zero indicator group.
  EncodedMatrix apply(const DataTable& table) const {
    EncodedMatrix m;
    m.rows = table.row_count();
    m.cols = encoded_width();
    m.data.assign(m.rows * m.cols, 0.0);
    std::size_t offset = 0;
    for (std::size_t s = 0; s < columns_.size(); ++s) {
      const ColumnEncoding& e = columns_[s];
      auto idx = table.index_of(e.name);
      if (!idx) throw SchemaError("input is missing column '" + e.name + "'");
      const Column& c = table.column(*idx);
      if (c.kind() != e.kind)
        throw SchemaError("column '" + e.name + "' is " + to_string(c.kind()) + ", expected " +
                          to_string(e.kind));
      if (c.has_missing()) throw PreconditionError("column '" + e.name + "' has missing cells; impute first");
      if (e.kind == ColumnKind::Numeric) {
        m.feature_origin.push_back({s, e.name, std::nullopt});
        for (std::size_t i = 0; i < m.rows; ++i)
          m.data[i * m.cols + offset] = (c.number(i) - e.center) * e.scale;
        ++offset;
      } else {
        // Map the table's dictionary onto the recipe's category positions.
        std::vector<std::int64_t> remap(c.categories().size(), -1);
        for (std::size_t k = 0; k < c.categories().size(); ++k) {
          auto it = std::find(e.categories.begin(), e.categories.end(), c.categories()[k]);
          if (it != e.categories.end()) remap[k] = it - e.categories.begin();
        }
        for (const auto& cat : e.categories) m.feature_origin.push_back({s, e.name, cat});
        for (std::size_t i = 0; i < m.rows; ++i) {
          auto pos = remap[static_cast<std::size_t>(c.code(i))];
          if (pos >= 0) m.data[i * m.cols + offset + static_cast<std::size_t>(pos)] = 1.0;
        }
        offset += e.categories.size();
      }
    }
    return m;
  }

  friend bool operator==(const EncodingRecipe&, const EncodingRecipe&) = default;

 private:
  std::vector<ColumnEncoding> columns_;
};

// One-hot encodes categorical features and (optionally) standardizes numeric
// ones using this table's own statistics. The target is excluded.
inline EncodedMatrix encode_for_model(const DataTable& table, bool standardize) {
  if (table.has_missing_features()) throw PreconditionError("encode_for_model: table has missing cells; impute first");
  return EncodingRecipe::fit(table, standardize).apply(table);
}

}  // namespace tabrank
