#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "metrics.hpp"
#include "resample.hpp"
#include "text.hpp"

namespace mlforge {

/// One measure of a benchmark laid out as rows = tasks, columns = learners.
struct ResultTable {
  Measure measure = Measure::hamming;
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> values;  // [row][col]
  std::vector<std::vector<bool>> failed;                   // cell ran into an error
  std::vector<std::vector<bool>> best;                     // ties: every tied cell is flagged
};

inline ResultTable make_table(const BenchmarkResult& bench, Measure measure) {
  ResultTable t;
  t.measure = measure;
  t.rows = bench.task_ids;
  t.columns = bench.learner_names;
  const std::size_t R = t.rows.size(), C = t.columns.size();
  t.values.assign(R, std::vector<std::optional<double>>(C));
  t.failed.assign(R, std::vector<bool>(C, false));
  t.best.assign(R, std::vector<bool>(C, false));
  for (std::size_t r = 0; r < R; ++r) {
    std::optional<double> best;
    for (std::size_t c = 0; c < C; ++c) {
      const auto& cell = bench.cell(r, c);
      if (!cell.ok()) {
        t.failed[r][c] = true;
        continue;
      }
      t.values[r][c] = cell.result->mean(measure);
      const auto& v = t.values[r][c];
      if (v && (!best || (is_loss(measure) ? *v < *best : *v > *best))) best = v;
    }
    for (std::size_t c = 0; c < C; ++c) t.best[r][c] = best && t.values[r][c] && *t.values[r][c] == *best;
  }
  return t;
}

/// Machine-readable table: full-precision values, "NA" for undefined,
/// "ERROR" for failed cells, and a trailing column naming the best learner(s).
inline std::string to_delimited(const ResultTable& t, char sep = '\t') {
  std::ostringstream os;
  os << "task";
  for (const auto& c : t.columns) os << sep << c;
  os << sep << "best\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << t.rows[r];
    std::vector<std::string> best;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      os << sep;
      if (t.failed[r][c]) os << "ERROR";
      else if (!t.values[r][c]) os << "NA";
      else os << text::format_real(*t.values[r][c]);
      if (t.best[r][c]) best.push_back(t.columns[c]);
    }
    os << sep << text::join(best, ";") << '\n';
  }
  return os.str();
}

/// Human-readable table rounded to 4 decimals; best cells carry a '*'.
inline std::string to_aligned(const ResultTable& t) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({std::string(to_string(t.measure))});
  for (const auto& c : t.columns) grid.back().push_back(c);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<std::string> line{t.rows[r]};
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      std::string s = t.failed[r][c] ? "ERROR" : text::format_fixed(t.values[r][c].value_or(std::nan("")));
      line.push_back(s + (t.best[r][c] ? "*" : " "));
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& line : grid)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  std::ostringstream os;
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c == 0) os << line[c] << std::string(width[c] - line[c].size(), ' ');
      else os << "  " << std::string(width[c] - line[c].size(), ' ') << line[c];
    }
    os << '\n';
  }
  return os.str();
}

/// Long format, one row per (task, learner, measure, statistic). Statistics
/// are fold1..foldk, mean and sd. Wall times are not written.
inline std::string to_long_format(const BenchmarkResult& bench) {
  std::ostringstream os;
  os << "task\tlearner\tmeasure\tstatistic\tvalue\n";
  const auto fmt = [](const std::optional<double>& v) { return v ? text::format_real(*v) : std::string("NA"); };
  for (const auto& cell : bench.cells) {
    if (!cell.ok()) {
      std::string msg = cell.error;
      std::replace(msg.begin(), msg.end(), '\t', ' ');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << cell.task_id << '\t' << cell.learner << "\t-\terror\t" << msg << '\n';
      continue;
    }
    const auto& r = *cell.result;
    for (std::size_t j = 0; j < r.measures.size(); ++j) {
      const char* name = to_string(r.measures[j]);
      for (std::size_t f = 0; f < r.per_fold_values.size(); ++f)
        os << cell.task_id << '\t' << cell.learner << '\t' << name << "\tfold" << (f + 1) << '\t'
           << fmt(r.per_fold_values[f][j].value) << '\n';
      os << cell.task_id << '\t' << cell.learner << '\t' << name << "\tmean\t" << fmt(r.aggregate_mean[j]) << '\n';
      os << cell.task_id << '\t' << cell.learner << '\t' << name << "\tsd\t" << fmt(r.aggregate_sd[j]) << '\n';
    }
  }
  return os.str();
}

/// Per-fold resample report: one row per fold, then mean and sd rows.
/// Undefined values print as NA; chain orders are shown for CC and NST.
/// Wall time is left out so equal seeds give equal bytes.
inline std::string format_resample(const ResampleResult& r) {
  const auto fmt = [](const std::optional<double>& v) { return v ? text::format_real(*v) : std::string("NA"); };
  std::ostringstream os;
  os << "fold\tn_test";
  for (auto m : r.measures) os << '\t' << to_string(m);
  os << "\tchain_order\n";
  for (std::size_t f = 0; f < r.per_fold_values.size(); ++f) {
    os << (f + 1) << '\t' << r.folds.test_indices(f).size();
    for (const auto& v : r.per_fold_values[f]) os << '\t' << fmt(v.value);
    os << '\t' << (r.chain_orders_used[f] ? r.chain_orders_used[f]->to_string() : "-") << '\n';
  }
  os << "mean\t-";
  for (const auto& v : r.aggregate_mean) os << '\t' << fmt(v);
  os << "\t-\nsd\t-";
  for (const auto& v : r.aggregate_sd) os << '\t' << fmt(v);
  os << "\t-\n";
  return os.str();
}

}  // namespace mlforge
