#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "table.hpp"

namespace tabrank {

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
};

// Declarative description of an input file: typed columns, the binary target
// and its labels, and the strings that denote a missing cell.
struct Schema {
  std::vector<ColumnSpec> columns;
  std::string target;
  std::vector<std::string> target_labels;
  std::string positive_label;
  std::vector<std::string> missing_tokens{"", "NA"};

  void validate() const {
    std::set<std::string> names;
    for (const auto& c : columns)
      if (!names.insert(c.name).second) throw SchemaError("schema lists column '" + c.name + "' twice");
    auto it = std::find_if(columns.begin(), columns.end(), [&](const ColumnSpec& c) { return c.name == target; });
    if (it == columns.end()) throw SchemaError("target '" + target + "' is not among the schema columns");
    if (it->kind != ColumnKind::Categorical) throw SchemaError("target '" + target + "' must be categorical");
    if (target_labels.size() != 2 || target_labels[0] == target_labels[1])
      throw SchemaError("target '" + target + "' must declare exactly 2 distinct labels");
    if (std::find(target_labels.begin(), target_labels.end(), positive_label) == target_labels.end())
      throw SchemaError("positive label '" + positive_label + "' is not a declared label of '" + target + "'");
    if (columns.size() < 2) throw SchemaError("schema needs at least one feature besides the target");
  }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns)
      if (c.name != target) out.push_back(c.name);
    return out;
  }
};

inline void to_json(nlohmann::json& j, const Schema& s) {
  j = nlohmann::json{{"target", {{"name", s.target}, {"labels", s.target_labels}, {"positive", s.positive_label}}},
                     {"missing_tokens", s.missing_tokens},
                     {"columns", nlohmann::json::array()}};
  for (const auto& c : s.columns) j["columns"].push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
}

inline ColumnKind parse_kind(const std::string& s) {
  if (s == "numeric") return ColumnKind::Numeric;
  if (s == "categorical") return ColumnKind::Categorical;
  throw SchemaError("unknown column kind '" + s + "' (expected numeric|categorical)");
}

inline Schema schema_from_json(const nlohmann::json& j) {
  try {
    Schema s;
    const auto& t = j.at("target");
    s.target = t.at("name").get<std::string>();
    s.target_labels = t.at("labels").get<std::vector<std::string>>();
    s.positive_label = t.at("positive").get<std::string>();
    if (j.contains("missing_tokens")) s.missing_tokens = j["missing_tokens"].get<std::vector<std::string>>();
    for (const auto& c : j.at("columns")) s.columns.push_back({c.at("name").get<std::string>(), parse_kind(c.at("kind").get<std::string>())});
    // The target may be left out of the column list; it is always categorical.
    if (std::none_of(s.columns.begin(), s.columns.end(), [&](const ColumnSpec& c) { return c.name == s.target; }))
      s.columns.push_back({s.target, ColumnKind::Categorical});
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
}

inline Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema file '" + path + "' is not valid JSON: " + e.what());
  }
  return schema_from_json(j);
}

// Built-in schema for the 2018 dental provider utilization file: 20 features
// plus the provider-type target.
inline Schema dental2018_schema() {
  Schema s;
  const auto N = ColumnKind::Numeric;
  const auto C = ColumnKind::Categorical;
  s.columns = {
      {"RENDERING_NPI", N},        {"CALENDAR_YEAR", N},
      {"DELIVERY_SYSTEM", C},      {"AGE_GROUP", C},
      {"ADV_USER_CNT", N},         {"ADV_USER_ANNOTATION_CODE", C},
      {"ADV_SVC_CNT", N},          {"ADV_SVC_ANNOTATION_CODE", C},
      {"PREV_USER_CNT", N},        {"PREV_USER_ANNOTATION_CODE", C},
      {"PREV_SVC_CNT", N},         {"PREV_SVC_ANNOTATION_CODE", C},
      {"TXMT_USER_CNT", N},        {"TXMT_USER_ANNOTATION_CODE", C},
      {"TXMT_SVC_CNT", N},         {"TXMT_SVC_ANNOTATION_CODE", C},
      {"EXAM_USER_CNT", N},        {"EXAM_USER_ANNOTATION_CODE", C},
      {"EXAM_SVC_CNT", N},         {"EXAM_SVC_ANNOTATION_CODE", C},
      {"PROVIDER_TYPE", C},
  };
  s.target = "PROVIDER_TYPE";
  s.target_labels = {"Rendering", "Rendering SNC"};
  s.positive_label = "Rendering SNC";
  return s;
}

// Row order of the published ranking figure for the dental preset.
inline std::vector<std::string> dental2018_published_order() {
  return {"TXMT_USER_CNT",   "TXMT_USER_ANNOTATION_CODE", "TXMT_SVC_CNT",     "TXMT_SVC_ANNOTATION_CODE",
          "RENDERING_NPI",   "PREV_USER_CNT",             "PREV_USER_ANNOTATION_CODE", "PREV_SVC_CNT",
          "PREV_SVC_ANNOTATION_CODE", "EXAM_USER_CNT",    "EXAM_USER_ANNOTATION_CODE", "EXAM_SVC_CNT",
          "EXAM_SVC_ANNOTATION_CODE", "DELIVERY_SYSTEM",  "CALENDAR_YEAR",    "AGE_GROUP",
          "ADV_USER_CNT",    "ADV_USER_ANNOTATION_CODE",  "ADV_SVC_CNT",      "ADV_SVC_ANNOTATION_CODE"};
}

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t dropped_missing_target = 0;
  std::size_t feature_cells = 0;
  std::size_t missing_feature_cells = 0;

  double missing_fraction() const {
    return feature_cells == 0 ? 0.0 : static_cast<double>(missing_feature_cells) / static_cast<double>(feature_cells);
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

// Reads CSV text against `schema`. Columns in the file that the schema does
// not list are ignored. When `require_target` is false the target column may
// be absent (unlabeled rows for prediction).
inline DataTable parse_table(std::istream& in, const Schema& schema, LoadReport* report = nullptr,
                             bool require_target = true) {
  schema.validate();
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw ParseError("input is empty; expected a header row", 1);
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) position.emplace(std::string(detail::trim(header[i])), i);

  std::vector<ColumnSpec> present;
  std::vector<std::size_t> source;
  bool have_target = false;
  for (const auto& spec : schema.columns) {
    auto it = position.find(spec.name);
    if (it == position.end()) {
      if (spec.name == schema.target && !require_target) continue;
      throw SchemaError("header is missing schema column '" + spec.name + "'");
    }
    if (spec.name == schema.target) have_target = true;
    present.push_back(spec);
    source.push_back(it->second);
  }
  std::set<std::string> tokens(schema.missing_tokens.begin(), schema.missing_tokens.end());
  auto is_missing_token = [&](const std::string& cell) {
    return tokens.count(cell) > 0 || tokens.count(std::string(detail::trim(cell))) > 0;
  };

  const std::size_t ncols = present.size();
  std::vector<std::vector<double>> numbers(ncols);
  std::vector<std::vector<std::string>> strings(ncols);
  std::vector<std::vector<std::uint8_t>> missing(ncols);
  std::vector<std::int64_t> row_ids;
  LoadReport rep;

  std::vector<std::string> fields;
  std::int64_t data_row = -1;
  std::size_t target_slot = ncols;
  for (std::size_t c = 0; c < ncols; ++c)
    if (present[c].name == schema.target) target_slot = c;

  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    ++data_row;
    ++rep.rows_read;
    if (fields.size() != header.size())
      throw ParseError("row " + std::to_string(reader.record()) + " has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(header.size()),
                       reader.record());
    if (have_target && is_missing_token(fields[source[target_slot]])) {
      ++rep.dropped_missing_target;
      continue;
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      const std::string& cell = fields[source[c]];
      const bool miss = is_missing_token(cell);
      missing[c].push_back(miss ? 1 : 0);
      if (c != target_slot) {
        ++rep.feature_cells;
        if (miss) ++rep.missing_feature_cells;
      }
      if (present[c].kind == ColumnKind::Numeric) {
        double v = 0.0;
        if (!miss && !detail::parse_real(cell, v))
          throw ParseError("row " + std::to_string(reader.record()) + ", column '" + present[c].name +
                               "': cannot parse '" + cell + "' as a number",
                           reader.record());
        numbers[c].push_back(v);
      } else {
        strings[c].push_back(miss ? std::string() : std::string(detail::trim(cell)));
      }
    }
    row_ids.push_back(data_row);
  }

  std::vector<Column> cols;
  for (std::size_t c = 0; c < ncols; ++c) {
    if (present[c].kind == ColumnKind::Numeric) {
      cols.push_back(Column::numeric(present[c].name, std::move(numbers[c]), std::move(missing[c])));
    } else if (c == target_slot) {
      for (std::size_t i = 0; i < strings[c].size(); ++i) {
        if (std::find(schema.target_labels.begin(), schema.target_labels.end(), strings[c][i]) ==
            schema.target_labels.end())
          throw ParseError("data row " + std::to_string(row_ids[i] + 1) + ": target value '" + strings[c][i] +
                               "' is not a declared label",
                           static_cast<std::size_t>(row_ids[i] + 2));
      }
      cols.push_back(Column::categorical(present[c].name, strings[c], std::move(missing[c]), schema.target_labels));
    } else {
      cols.push_back(Column::categorical(present[c].name, strings[c], std::move(missing[c])));
    }
  }
  if (report) *report = rep;
  return DataTable(std::move(cols), have_target ? schema.target : std::string(), schema.positive_label,
                   std::move(row_ids));
}

inline DataTable load_table(const std::string& path, const Schema& schema, LoadReport* report = nullptr,
                            bool require_target = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file '" + path + "'");
  return parse_table(in, schema, report, require_target);
}

// Writes a table as CSV (header then rows); missing cells are empty fields.
inline void write_table(std::ostream& out, const DataTable& table) {
  std::vector<std::string> fields;
  for (const auto& c : table.columns()) fields.push_back(c.name());
  csv::write_row(out, fields);
  for (std::size_t i = 0; i < table.row_count(); ++i) {
    fields.clear();
    for (const auto& c : table.columns()) fields.push_back(c.text(i));
    csv::write_row(out, fields);
  }
}

// Per-column fill values learned from a training table: the median of each
// numeric column and the mode of each categorical column.
class Imputer {
 public:
  using Fill = std::variant<double, std::string>;

  Imputer() = default;
  explicit Imputer(std::map<std::string, Fill> fills) : fills_(std::move(fills)) {}

  const std::map<std::string, Fill>& fills() const noexcept { return fills_; }

  friend bool operator==(const Imputer&, const Imputer&) = default;

 private:
  std::map<std::string, Fill> fills_;
};

// Median of the non-missing values; the mean of the two middle values for an
// even count.
inline double median_of(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of an empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lo + (hi - lo) / 2.0;
}

inline Imputer fit_imputer(const DataTable& train) {
  std::map<std::string, Imputer::Fill> fills;
  for (auto idx : train.feature_indices()) {
    const Column& c = train.column(idx);
    if (c.missing_count() == c.size())
      throw FitError("cannot impute column '" + c.name() + "': every training cell is missing");
    if (c.is_numeric()) {
      std::vector<double> vals;
      vals.reserve(c.size());
      for (std::size_t i = 0; i < c.size(); ++i)
        if (!c.is_missing(i)) vals.push_back(c.number(i));
      fills.emplace(c.name(), median_of(std::move(vals)));
    } else {
      auto counts = value_counts(c);
      // std::map iterates lexicographically, so strict > keeps the smallest on ties.
      auto best = counts.begin();
      for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
      fills.emplace(c.name(), best->first);
    }
  }
  return Imputer(std::move(fills));
}

inline DataTable apply_imputer(const Imputer& imputer, const DataTable& table) {
  std::vector<Column> cols;
  for (std::size_t idx = 0; idx < table.column_count(); ++idx) {
    const Column& c = table.column(idx);
    if (table.has_target() && c.name() == table.target_name()) {
      cols.push_back(c);
      continue;
    }
    auto it = imputer.fills().find(c.name());
    if (it == imputer.fills().end()) throw SchemaError("imputer has no fill value for column '" + c.name() + "'");
    const bool numeric_fill = std::holds_alternative<double>(it->second);
    if (numeric_fill != c.is_numeric())
      throw SchemaError("column '" + c.name() + "' kind differs from the imputer's (" + to_string(c.kind()) + ")");
    if (!c.has_missing()) {
      cols.push_back(c);
      continue;
    }
    if (c.is_numeric()) {
      std::vector<double> v(c.numbers().begin(), c.numbers().end());
      const double fill = std::get<double>(it->second);
      for (std::size_t i = 0; i < v.size(); ++i)
        if (c.is_missing(i)) v[i] = fill;
      cols.push_back(Column::numeric(c.name(), std::move(v)));
    } else {
      const std::string& fill = std::get<std::string>(it->second);
      std::vector<std::string> cats = c.categories();
      auto code = c.code_of(fill);
      if (!code) {
        cats.push_back(fill);
        code = static_cast<std::int32_t>(cats.size() - 1);
      }
      std::vector<std::int32_t> codes(c.codes().begin(), c.codes().end());
      for (auto& k : codes)
        if (k == Column::kMissingCode) k = *code;
      cols.push_back(Column::from_codes(c.name(), std::move(cats), std::move(codes)));
    }
  }
  return table.with_columns(std::move(cols));
}

inline void to_json(nlohmann::json& j, const Imputer& imp) {
  j = nlohmann::json::object();
  for (const auto& [name, fill] : imp.fills()) {
    if (std::holds_alternative<double>(fill))
      j[name] = {{"kind", "numeric"}, {"median", std::get<double>(fill)}};
    else
      j[name] = {{"kind", "categorical"}, {"mode", std::get<std::string>(fill)}};
  }
}

inline Imputer imputer_from_json(const nlohmann::json& j) {
  std::map<std::string, Imputer::Fill> fills;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().at("kind") == "numeric")
      fills.emplace(it.key(), it.value().at("median").get<double>());
    else
      fills.emplace(it.key(), it.value().at("mode").get<std::string>());
  }
  return Imputer(std::move(fills));
}

}  // namespace tabrank
