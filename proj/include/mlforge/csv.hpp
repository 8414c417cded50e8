#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "arff.hpp"
#include "data.hpp"
#include "error.hpp"
#include "text.hpp"

namespace mlforge {

namespace csv_detail {

inline bool is_missing(const std::string& cell) { return cell.empty() || cell == "?" || cell == "NA"; }

}  // namespace csv_detail

/// Comma-separated table with a header row. Columns whose cells all parse as
/// numbers are numeric; any other non-target column is nominal, with levels
/// in sorted order. Empty, "?" and "NA" cells are rejected.
inline Table parse_csv(std::istream& in, const std::string& source = "<csv>") {
  std::string raw;
  std::size_t line = 0;
  std::vector<std::string> header;
  while (std::getline(in, raw)) {
    ++line;
    if (!text::trim(raw).empty()) break;
  }
  if (text::trim(raw).empty()) throw ParseError("missing header row", source, line);
  header = arff_detail::tokenize(text::trim(raw), ',', source, line);
  for (const auto& h : header)
    if (h.empty()) throw ParseError("empty column name in header", source, line);
  {
    std::set<std::string> seen;
    for (const auto& h : header)
      if (!seen.insert(h).second) throw ParseError("duplicate column name '" + h + "'", source, line);
  }

  std::vector<std::vector<std::string>> cells(header.size());
  while (std::getline(in, raw)) {
    ++line;
    const auto s = text::trim(raw);
    if (s.empty()) continue;
    auto row = arff_detail::tokenize(s, ',', source, line);
    if (row.size() != header.size())
      throw ParseError("row has " + std::to_string(row.size()) + " cells, expected " + std::to_string(header.size()),
                       source, line);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (csv_detail::is_missing(row[j]))
        throw ParseError("missing cell in column '" + header[j] + "'", source, line);
      cells[j].push_back(std::move(row[j]));
    }
  }

  Table t;
  for (std::size_t j = 0; j < header.size(); ++j) {
    Column c{header[j], {}, {}};
    bool numeric = true;
    for (const auto& v : cells[j]) {
      const auto x = text::parse_real(v);
      if (!x || std::isnan(*x)) {
        numeric = false;
        break;
      }
      c.values.push_back(*x);
    }
    if (!numeric) {
      std::set<std::string> levels(cells[j].begin(), cells[j].end());
      c.levels.assign(levels.begin(), levels.end());
      c.values.clear();
      for (const auto& v : cells[j])
        c.values.push_back(static_cast<double>(std::lower_bound(c.levels.begin(), c.levels.end(), v) - c.levels.begin()));
    }
    t.columns.push_back(std::move(c));
  }
  return t;
}

inline MultilabelDataset read_csv(const std::string& path, const LabelSpec& labels, const ReadOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path);
  const auto table = parse_csv(in, path);
  std::vector<std::string> names;
  for (const auto& c : table.columns) names.push_back(c.name);
  try {
    if (table.n_rows() == 0) throw InvalidArgument("dataset has no data rows");
    auto task = make_multilabel_task(table, labels.resolve(names), "csv",
                                     TaskOptions{options.drop_constant_features, options.notices});
    return std::move(task.dataset);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), path);
  }
}

inline MultilabelDataset read_csv(const std::string& path, const std::vector<std::string>& target_names,
                                  const ReadOptions& options = {}) {
  return read_csv(path, LabelSpec::by_names(target_names), options);
}

/// Dispatches on the file extension (.arff or .csv).
inline MultilabelDataset read_dataset(const std::string& path, const LabelSpec& labels,
                                      const ReadOptions& options = {}) {
  const auto dot = path.rfind('.');
  const auto ext = dot == std::string::npos ? std::string() : detail::lower(path.substr(dot + 1));
  if (ext == "arff") return read_arff(path, labels, options);
  if (ext == "csv") return read_csv(path, labels, options);
  throw ParseError("unsupported dataset extension (expected .arff or .csv)", path);
}

/// Raw table of an .arff or .csv file, before any label handling.
inline Table read_table(const std::string& path) {
  const auto dot = path.rfind('.');
  const auto ext = dot == std::string::npos ? std::string() : detail::lower(path.substr(dot + 1));
  std::ifstream in(path);
  if (ext != "arff" && ext != "csv") throw ParseError("unsupported dataset extension (expected .arff or .csv)", path);
  if (!in) throw ParseError("cannot open file", path);
  if (ext == "arff") return to_table(parse_arff(in, path));
  return parse_csv(in, path);
}

}  // namespace mlforge
