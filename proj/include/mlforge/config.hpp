#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "arff.hpp"
#include "error.hpp"
#include "learners.hpp"
#include "metrics.hpp"
#include "resample.hpp"
#include "text.hpp"

namespace mlforge {

// Benchmark configuration. Grammar (see docs/config.md):
//
//   file    := { line }
//   line    := blank | comment | header | pair
//   comment := ('#' | ';') any
//   header  := '[' word [ ' ' name ] ']'
//   pair    := key '=' value
//
// Sections: [bench] (at most once), [dataset NAME] and [learner NAME]
// (repeatable, names unique per kind). Unknown sections and keys are errors.

struct DatasetConfig {
  std::string name;
  std::string path;
  LabelSpec labels;
  std::optional<double> min_prevalence;
};

struct BenchConfig {
  std::uint64_t seed = 1;
  std::size_t iters = 10;
  std::vector<Measure> measures = all_measures();
  std::size_t workers = 1;
  std::string output = "bench-out";
  UndefinedPolicy policy = UndefinedPolicy::strict;
  std::vector<DatasetConfig> datasets;
  std::vector<LearnerConfig> learners;
};

namespace config_detail {

inline std::string label_spec_text(const LabelSpec& s) {
  return s.names.empty() ? "trailing:" + std::to_string(s.trailing) : text::join(s.names, ",");
}

inline LabelSpec parse_label_spec(const std::string& value) {
  const auto v = std::string(text::trim(value));
  if (v.rfind("trailing:", 0) == 0) {
    const auto count = text::parse_int<std::size_t>(std::string(text::trim(v.substr(9))));
    if (!count || *count == 0) throw InvalidArgument("trailing label count must be a positive integer");
    return LabelSpec::last(*count);
  }
  std::vector<std::string> names;
  for (const auto& n : text::split(v, ',')) {
    const auto t = std::string(text::trim(n));
    if (t.empty()) throw InvalidArgument("empty label name in '" + v + "'");
    names.push_back(t);
  }
  if (names.empty()) throw InvalidArgument("labels must list at least one name");
  return LabelSpec::by_names(std::move(names));
}

inline std::vector<Measure> parse_measures(const std::string& value) {
  std::vector<Measure> out;
  for (const auto& item : text::split(value, ',')) {
    const auto t = std::string(text::trim(item));
    if (t.empty()) continue;
    out.push_back(parse_measure(t));
  }
  if (out.empty()) throw InvalidArgument("measures list is empty");
  return out;
}

inline UndefinedPolicy parse_policy(const std::string& s) {
  if (s == "strict") return UndefinedPolicy::strict;
  if (s == "skip_undefined" || s == "skip") return UndefinedPolicy::skip_undefined;
  throw InvalidArgument("unknown undefined-value policy '" + s + "' (expected strict or skip_undefined)");
}

inline const char* to_string(UndefinedPolicy p) { return p == UndefinedPolicy::strict ? "strict" : "skip_undefined"; }

template <typename Int>
Int count(const std::string& key, const std::string& value) {
  const auto v = text::parse_int<Int>(value);
  if (!v) throw InvalidArgument(key + " must be a non-negative integer, got '" + value + "'");
  return *v;
}

inline double real(const std::string& key, const std::string& value) {
  const auto v = text::parse_real(value);
  if (!v || !std::isfinite(*v)) throw InvalidArgument(key + " must be a number, got '" + value + "'");
  return *v;
}

struct LearnerDraft {
  std::string name;
  std::optional<Method> method;
  std::string base = "featureless";
  BaseLearnerSpec::Params base_params;
  MethodSpec spec;
};

inline LearnerConfig finish(const LearnerDraft& d) {
  if (!d.method) throw InvalidArgument("learner '" + d.name + "' has no method");
  LearnerConfig out{d.name, d.spec, BaseLearnerSpec(parse_learner_kind(d.base), d.base_params)};
  out.method.method = *d.method;
  check_threshold(out.method.threshold);
  if (uses_internal_cv(*d.method) && out.method.internal_folds < 2)
    throw InvalidArgument("learner '" + d.name + "': internal_folds must be at least 2");
  return out;
}

}  // namespace config_detail

/// Parses a bench config. Relative dataset paths resolve against `base_dir`.
inline BenchConfig parse_bench_config(std::istream& in, const std::string& source = "<config>",
                                      const std::filesystem::path& base_dir = {}) {
  BenchConfig cfg;
  enum class Section { none, bench, dataset, learner } section = Section::none;
  bool seen_bench = false;
  std::vector<config_detail::LearnerDraft> drafts;
  std::map<std::string, std::size_t> dataset_index, learner_index;
  std::vector<bool> dataset_has_labels;

  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = std::string(text::trim(raw));
    if (s.empty() || s.front() == '#' || s.front() == ';') continue;
    try {
      if (s.front() == '[') {
        if (s.back() != ']') throw InvalidArgument("unterminated section header");
        const auto inner = std::string(text::trim(std::string_view(s).substr(1, s.size() - 2)));
        const auto space = inner.find(' ');
        const auto kind = inner.substr(0, space);
        const auto name = space == std::string::npos ? std::string() : std::string(text::trim(inner.substr(space + 1)));
        if (kind == "bench") {
          if (!name.empty()) throw InvalidArgument("[bench] takes no name");
          if (seen_bench) throw InvalidArgument("duplicate [bench] section");
          seen_bench = true;
          section = Section::bench;
        } else if (kind == "dataset" || kind == "learner") {
          if (name.empty()) throw InvalidArgument("[" + kind + "] needs a name");
          auto& index = kind == "dataset" ? dataset_index : learner_index;
          if (index.count(name)) throw InvalidArgument("duplicate " + kind + " '" + name + "'");
          if (kind == "dataset") {
            index[name] = cfg.datasets.size();
            cfg.datasets.push_back({name, "", {}, std::nullopt});
            dataset_has_labels.push_back(false);
            section = Section::dataset;
          } else {
            index[name] = drafts.size();
            drafts.push_back({name, std::nullopt, "featureless", {}, {}});
            section = Section::learner;
          }
        } else {
          throw InvalidArgument("unknown section '[" + kind + "]'");
        }
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw InvalidArgument("expected key = value");
      const auto key = std::string(text::trim(std::string_view(s).substr(0, eq)));
      const auto value = std::string(text::trim(std::string_view(s).substr(eq + 1)));
      if (key.empty()) throw InvalidArgument("empty key");
      auto unknown = [&](const char* where) { throw InvalidArgument("unknown key '" + key + "' in " + where); };

      switch (section) {
        case Section::none: throw InvalidArgument("key '" + key + "' appears before any section");
        case Section::bench:
          if (key == "seed") cfg.seed = config_detail::count<std::uint64_t>(key, value);
          else if (key == "iters") cfg.iters = config_detail::count<std::size_t>(key, value);
          else if (key == "measures") cfg.measures = config_detail::parse_measures(value);
          else if (key == "workers") cfg.workers = config_detail::count<std::size_t>(key, value);
          else if (key == "output") cfg.output = value;
          else if (key == "policy") cfg.policy = config_detail::parse_policy(value);
          else unknown("[bench]");
          break;
        case Section::dataset: {
          auto& d = cfg.datasets.back();
          if (key == "path") {
            std::filesystem::path p(value);
            d.path = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
          } else if (key == "labels") {
            d.labels = config_detail::parse_label_spec(value);
            dataset_has_labels.back() = true;
          } else if (key == "min_prevalence") {
            d.min_prevalence = config_detail::real(key, value);
          } else {
            unknown("[dataset]");
          }
          break;
        }
        case Section::learner: {
          auto& d = drafts.back();
          if (key == "method") d.method = parse_method(value);
          else if (key == "base") d.base = value;
          else if (key.rfind("base.", 0) == 0) d.base_params[key.substr(5)] = config_detail::real(key, value);
          else if (key == "internal_folds") d.spec.internal_folds = config_detail::count<std::size_t>(key, value);
          else if (key == "chain_order") d.spec.chain_policy = parse_chain_order_policy(value);
          else if (key == "threshold") d.spec.threshold = config_detail::real(key, value);
          else if (key == "first_level") d.spec.first_level = BaseLearnerSpec::parse(value);
          else unknown("[learner]");
          break;
        }
      }
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), source, line);
    }
  }
  try {
    if (cfg.iters < 2) throw InvalidArgument("iters must be at least 2");
    if (cfg.workers < 1) throw InvalidArgument("workers must be at least 1");
    if (cfg.datasets.empty()) throw InvalidArgument("config declares no [dataset] section");
    if (drafts.empty()) throw InvalidArgument("config declares no [learner] section");
    for (std::size_t i = 0; i < cfg.datasets.size(); ++i) {
      if (cfg.datasets[i].path.empty()) throw InvalidArgument("dataset '" + cfg.datasets[i].name + "' has no path");
      if (!dataset_has_labels[i]) throw InvalidArgument("dataset '" + cfg.datasets[i].name + "' has no labels");
    }
    for (const auto& d : drafts) cfg.learners.push_back(config_detail::finish(d));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), source);
  }
  return cfg;
}

inline BenchConfig read_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path);
  return parse_bench_config(in, path, std::filesystem::path(path).parent_path());
}

/// Fully resolved config in the same grammar, defaults filled in.
inline std::string format_bench_config(const BenchConfig& cfg) {
  std::ostringstream os;
  os << "[bench]\n"
     << "seed = " << cfg.seed << "\n"
     << "iters = " << cfg.iters << "\n";
  std::vector<std::string> ms;
  for (auto m : cfg.measures) ms.push_back(to_string(m));
  os << "measures = " << text::join(ms, ",") << "\n"
     << "workers = " << cfg.workers << "\n"
     << "output = " << cfg.output << "\n"
     << "policy = " << config_detail::to_string(cfg.policy) << "\n";
  for (const auto& d : cfg.datasets) {
    os << "\n[dataset " << d.name << "]\n"
       << "path = " << d.path << "\n"
       << "labels = " << config_detail::label_spec_text(d.labels) << "\n";
    if (d.min_prevalence) os << "min_prevalence = " << text::format_real(*d.min_prevalence) << "\n";
  }
  for (const auto& l : cfg.learners) {
    os << "\n[learner " << l.name << "]\n"
       << "method = " << to_string(l.method.method) << "\n"
       << "base = " << to_string(l.base.kind()) << "\n";
    for (const auto& [k, v] : l.base.params()) os << "base." << k << " = " << text::format_real(v) << "\n";
    os << "internal_folds = " << l.method.internal_folds << "\n"
       << "chain_order = " << to_string(l.method.chain_policy) << "\n"
       << "threshold = " << text::format_real(l.method.threshold) << "\n";
    if (l.method.first_level) os << "first_level = " << l.method.first_level->to_string() << "\n";
  }
  return os.str();
}

}  // namespace mlforge
