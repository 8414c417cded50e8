// mlforge command-line front end.
//
// Exit codes: 0 success, 2 usage, 3 ingestion (unreadable or malformed
// input files), 4 runtime failure, 5 benchmark finished with failed cells.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mlforge/mlforge.hpp"

namespace fs = std::filesystem;
using namespace mlforge;

namespace {

enum Exit { ok = 0, usage = 2, ingestion = 3, runtime = 4, partial = 5 };

// Resolved configuration, echoed at the top of every run.
class Echo {
 public:
  explicit Echo(std::string command) : command_(std::move(command)) {}

  template <class T>
  Echo& add(const std::string& key, const T& value) {
    std::ostringstream os;
    if constexpr (std::is_floating_point_v<T>) os << text::format_real(value);
    else os << value;
    items_.emplace_back(key, os.str());
    return *this;
  }

  void print(std::ostream& os) const {
    os << "[" << command_ << "]\n";
    for (const auto& [k, v] : items_) os << k << " = " << v << "\n";
    os << "\n";
  }

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> items_;
};

struct DataOpts {
  std::string path;
  std::string labels;
  std::optional<double> min_prevalence;
  bool keep_constant = false;

  void add_to(CLI::App* cmd, bool labels_required = true) {
    cmd->add_option("data", path, "dataset file (.arff or .csv)")->required();
    auto* l = cmd->add_option("--labels,-l", labels, "label columns: trailing:N or comma-separated names");
    if (labels_required) l->required();
    cmd->add_flag("--keep-constant", keep_constant, "keep constant feature columns");
  }

  void echo(Echo& e) const {
    e.add("data", path).add("labels", labels).add("keep_constant", keep_constant ? "true" : "false");
  }

  Task load() const {
    const auto ds = read_dataset(path, config_detail::parse_label_spec(labels), {!keep_constant, &std::cerr});
    return Task(fs::path(path).stem().string(), ds);
  }
};

struct LearnerOpts {
  std::string method = "BR";
  std::string base = "featureless";
  double threshold = 0.5;
  std::size_t internal_folds = 2;
  std::string chain_order = "identity";
  std::string first_level;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--method,-m", method, "BR, CC, NST, DBR or STA")->capture_default_str();
    cmd->add_option("--base,-b", base, "base learner, e.g. logistic:iterations=500")->capture_default_str();
    cmd->add_option("--threshold", threshold, "hard-label threshold")->capture_default_str();
    cmd->add_option("--internal-folds", internal_folds, "inner folds for NST and STA")->capture_default_str();
    cmd->add_option("--chain-order", chain_order, "identity, random, or a label list for train")
        ->capture_default_str();
    cmd->add_option("--first-level", first_level, "first-level learner for DBR and STA (default: base)");
  }

  BaseLearnerSpec base_spec() const { return BaseLearnerSpec::parse(base); }

  bool explicit_order() const {
    return chain_order != "identity" && chain_order != "id" && chain_order != "random" &&
           chain_order != "random_per_iteration";
  }

  MethodSpec spec() const {
    MethodSpec s;
    s.method = parse_method(method);
    s.threshold = threshold;
    s.internal_folds = internal_folds;
    if (!explicit_order()) s.chain_policy = parse_chain_order_policy(chain_order);
    if (!first_level.empty()) s.first_level = BaseLearnerSpec::parse(first_level);
    return s;
  }

  void echo(Echo& e) const {
    e.add("method", to_string(parse_method(method)))
        .add("base", base_spec().to_string())
        .add("threshold", threshold)
        .add("internal_folds", internal_folds)
        .add("chain_order", chain_order)
        .add("first_level", first_level.empty() ? base_spec().to_string() : BaseLearnerSpec::parse(first_level).to_string());
  }
};

std::string measure_list(const std::vector<Measure>& ms) {
  std::vector<std::string> names;
  for (auto m : ms) names.push_back(to_string(m));
  return text::join(names, ",");
}

// Like format_real, but whole numbers keep a trailing ".0".
std::string decimal_text(double v) {
  auto s = text::format_real(v);
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return s;
}

std::string value_text(const std::optional<double>& v) { return v ? text::format_real(*v) : "NA"; }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw Error("cannot write " + path.string());
}

Task apply_min_prevalence(Task task, const std::optional<double>& min_prevalence) {
  if (!min_prevalence) return task;
  auto [kept, removed] = filter_sparse_labels(task, *min_prevalence);
  for (const auto& name : removed) std::cerr << "notice: removed sparse label '" << name << "'\n";
  return kept;
}

// ---------------------------------------------------------------------------

int cmd_stats(const DataOpts& data) {
  Echo e("stats");
  data.echo(e);
  e.add("min_prevalence", data.min_prevalence ? text::format_real(*data.min_prevalence) : "none");
  const auto task = data.load();
  e.print(std::cout);
  const auto s = dataset_stats(task);
  std::cout << "n = " << s.n_instances << "\n"
            << "p = " << s.n_predictors << "\n"
            << "m = " << s.n_labels << "\n"
            << "cardinality = " << decimal_text(s.cardinality) << "\n";
  if (!task.dataset.dropped_features().empty())
    std::cout << "dropped_constant = " << text::join(task.dataset.dropped_features(), ",") << "\n";
  std::cout << "\nlabel\tprevalence\n";
  for (std::size_t k = 0; k < s.n_labels; ++k)
    std::cout << task.dataset.label_names()[k] << '\t' << text::format_real(s.per_label_prevalence[k]) << '\n';
  if (data.min_prevalence) std::cout << "\nremoved = " << text::join(sparse_labels(task, *data.min_prevalence), ",") << "\n";
  return ok;
}

int cmd_train(const DataOpts& data, const LearnerOpts& learner, std::uint64_t seed, std::size_t workers,
              const std::string& model_path) {
  auto task = apply_min_prevalence(data.load(), data.min_prevalence);
  const auto spec = learner.spec();
  FitOptions fit;
  fit.threshold = spec.threshold;
  fit.internal_folds = spec.internal_folds;
  fit.seed = seed;
  fit.first_level = spec.first_level;
  fit.workers = workers;
  if (spec.chain_policy == ChainOrderPolicy::random_per_iteration) {
    fit.order = ChainOrder::random(task.m(), derive_seed(seed, seed_stream::chain_order, 0));
  } else if (learner.explicit_order()) {
    std::vector<std::size_t> order;
    const auto& names = task.dataset.label_names();
    for (const auto& tok : text::split(learner.chain_order, ',')) {
      const auto name = std::string(text::trim(tok));
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw InvalidArgument("chain order names unknown label '" + name + "'");
      order.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    if (order.size() != task.m()) throw InvalidArgument("chain order must list every label once");
    fit.order = ChainOrder(std::move(order));
  }

  Echo e("train");
  data.echo(e);
  e.add("min_prevalence", data.min_prevalence ? text::format_real(*data.min_prevalence) : "none");
  learner.echo(e);
  e.add("seed", seed).add("workers", workers).add("model", model_path);
  e.print(std::cout);

  const auto model = fit_multilabel(spec.method, task, learner.base_spec(), fit);
  save_model(model, model_path);
  std::cout << "n = " << task.n() << "\np = " << task.p() << "\nm = " << task.m() << "\n"
            << "chain_order = " << model.chain_order.to_string() << "\n"
            << "model written to " << model_path << "\n";
  return ok;
}

int cmd_predict(const std::string& model_path, const std::string& data_path, const std::string& out_path) {
  Echo e("predict");
  e.add("model", model_path).add("data", data_path).add("out", out_path);
  e.print(std::cout);

  const auto model = load_model(model_path);
  const auto table = read_table(data_path);
  std::vector<std::string> present;
  for (const auto& name : model.label_names)
    if (table.find(name)) present.push_back(name);
  if (!present.empty() && present.size() != model.label_names.size())
    throw InvalidArgument("data holds only " + std::to_string(present.size()) + " of the model's " +
                          std::to_string(model.n_labels()) + " label columns");

  std::optional<BinaryMatrix> truth;
  if (!present.empty()) {
    try {
      truth = make_multilabel_task(table, model.label_names, "data").dataset.labels();
    } catch (const InvalidArgument& err) {
      throw ParseError(err.what(), data_path);
    }
  }
  const auto enc = encode_features(table, std::set<std::string>(present.begin(), present.end()));
  const auto x = align_features(model, enc.values, enc.names);
  const auto pred = predict_multilabel(model, x, truth);
  write_predictions(pred, out_path);
  std::cout << "n = " << pred.n() << "\nm = " << pred.m() << "\ntruth = " << (truth ? "yes" : "no") << "\n"
            << "predictions written to " << out_path << "\n";
  return ok;
}

int cmd_eval(const std::string& pred_path, const DataOpts& truth_data, const std::vector<Measure>& measures,
             UndefinedPolicy policy, const std::vector<BinaryMeasure>& binary) {
  Echo e("eval");
  e.add("predictions", pred_path)
      .add("truth", truth_data.path.empty() ? "from predictions" : truth_data.path)
      .add("measures", measure_list(measures))
      .add("policy", config_detail::to_string(policy));
  std::vector<std::string> bnames;
  for (auto b : binary) bnames.push_back(to_string(b));
  e.add("binary", bnames.empty() ? "none" : text::join(bnames, ","));
  e.print(std::cout);

  auto pred = read_predictions(pred_path);
  if (!truth_data.path.empty()) {
    DataOpts d = truth_data;
    if (d.labels.empty()) d.labels = text::join(pred.label_names, ",");
    const auto task = d.load();
    if (task.dataset.label_names() != pred.label_names)
      throw InvalidArgument("truth labels (" + text::join(task.dataset.label_names(), ",") +
                            ") do not match prediction labels (" + text::join(pred.label_names, ",") + ")");
    if (task.n() != pred.n())
      throw InvalidArgument("truth has " + std::to_string(task.n()) + " rows, predictions have " +
                            std::to_string(pred.n()));
    pred.truth = task.dataset.labels();
  }
  if (!pred.truth) throw InvalidArgument("predictions carry no truth; pass --truth DATA");

  std::cout << "measure\tvalue\tundefined\n";
  for (auto m : measures) {
    const auto v = evaluate(pred, m, policy);
    std::cout << to_string(m) << '\t' << value_text(v.value) << '\t' << v.n_undefined_instances << '\n';
  }
  if (!binary.empty()) {
    std::cout << "\nlabel";
    for (const auto& b : bnames) std::cout << '\t' << b;
    std::cout << '\n';
    for (const auto& row : binary_label_performance(pred, binary)) {
      std::cout << row.label;
      for (auto b : binary) {
        const auto& v = b == BinaryMeasure::acc ? row.acc : b == BinaryMeasure::mmce ? row.mmce : row.auc;
        std::cout << '\t' << value_text(v);
      }
      std::cout << '\n';
    }
  }
  return ok;
}

int cmd_resample(const DataOpts& data, const LearnerOpts& learner, std::size_t iters, std::uint64_t seed,
                 const std::vector<Measure>& measures, UndefinedPolicy policy, std::size_t workers,
                 const std::string& out_path) {
  Echo e("resample");
  data.echo(e);
  e.add("min_prevalence", data.min_prevalence ? text::format_real(*data.min_prevalence) : "none");
  learner.echo(e);
  e.add("iters", iters)
      .add("seed", seed)
      .add("measures", measure_list(measures))
      .add("policy", config_detail::to_string(policy))
      .add("workers", workers)
      .add("out", out_path.empty() ? "none" : out_path);
  const auto task = apply_min_prevalence(data.load(), data.min_prevalence);
  const auto spec = learner.spec();
  if (learner.explicit_order()) throw InvalidArgument("resample takes --chain-order identity or random");
  e.print(std::cout);

  ResampleOptions opt;
  opt.workers = workers;
  opt.undefined = policy;
  const auto result = resample(spec, learner.base_spec(), task, ResampleDesc{iters, false, seed}, measures, opt);
  const auto report = format_resample(result);
  std::cout << report << "\nwall_time = " << text::format_fixed(result.wall_time, 3) << " s\n";
  if (!out_path.empty()) write_file(out_path, report);
  return ok;
}

int cmd_bench(const std::string& config_path, std::optional<std::size_t> workers, const std::string& output) {
  auto cfg = read_bench_config(config_path);
  if (workers) cfg.workers = *workers;
  if (!output.empty()) cfg.output = output;
  const auto resolved = format_bench_config(cfg);
  std::cout << "# resolved from " << config_path << "\n" << resolved << "\n";

  std::vector<BenchmarkTask> tasks;
  for (const auto& d : cfg.datasets) {
    tasks.push_back({d.name, [d] {
                       Task t(d.name, read_dataset(d.path, d.labels, {true, nullptr}));
                       if (d.min_prevalence) t = filter_sparse_labels(t, *d.min_prevalence).first;
                       return t;
                     }});
  }
  ResampleOptions opt;
  opt.workers = cfg.workers;
  opt.undefined = cfg.policy;
  const auto bench = benchmark(cfg.learners, tasks, ResampleDesc{cfg.iters, false, cfg.seed}, cfg.measures, opt);

  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  write_file(dir / "config.resolved", resolved);
  for (auto m : cfg.measures) {
    const auto table = make_table(bench, m);
    write_file(dir / ("table-" + std::string(to_string(m)) + ".tsv"), to_delimited(table));
    std::cout << to_aligned(table) << "\n";
  }
  write_file(dir / "long-format.tsv", to_long_format(bench));
  for (const auto& cell : bench.cells)
    if (!cell.ok()) std::cerr << "error: " << cell.task_id << " / " << cell.learner << ": " << cell.error << "\n";
  std::cout << "tables written to " << dir.string() << "\n";
  return bench.n_failed() == 0 ? ok : partial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlforge: multilabel classification by problem transformation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mlforge 0.1.0");

  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::size_t iters = 10;
  std::string measures_text = measure_list(all_measures());
  std::string policy_text = "strict";
  std::string out_path, model_path, pred_path, config_path, binary_text;
  DataOpts data;
  LearnerOpts learner;

  auto add_workers = [&](CLI::App* cmd) {
    return cmd->add_option("--workers,-j", workers, "worker threads")
        ->envname("MLFORGE_WORKERS")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };
  auto add_min_prevalence = [&](CLI::App* cmd, const char* help) {
    cmd->add_option_function<double>(
        "--min-prevalence", [&](const double& v) { data.min_prevalence = v; }, help);
  };

  auto* stats = app.add_subcommand("stats", "dataset summary: n, p, m, cardinality, label prevalences");
  data.add_to(stats);
  add_min_prevalence(stats, "list labels that fall below this prevalence");

  auto* train = app.add_subcommand("train", "fit a multilabel model and save it");
  data.add_to(train);
  learner.add_to(train);
  add_min_prevalence(train, "drop labels below this prevalence first");
  train->add_option("--seed", seed, "seed for internal folds and random chain orders")->capture_default_str();
  add_workers(train);
  train->add_option("--model,-o", model_path, "model output file")->required();

  auto* predict = app.add_subcommand("predict", "apply a saved model to a dataset");
  predict->add_option("model", model_path, "model file")->required();
  predict->add_option("data", data.path, "dataset file (.arff or .csv)")->required();
  predict->add_option("--out,-o", out_path, "prediction output file")->required();

  auto* eval = app.add_subcommand("eval", "score a prediction file");
  eval->add_option("predictions", pred_path, "prediction file")->required();
  eval->add_option("--truth", data.path, "dataset holding the true labels");
  eval->add_option("--labels,-l", data.labels, "label columns of --truth (default: the prediction's label names)");
  eval->add_option("--measures", measures_text, "comma-separated measures")->capture_default_str();
  eval->add_option("--policy", policy_text, "strict or skip_undefined")->capture_default_str();
  eval->add_option("--binary", binary_text, "per-label measures: acc,mmce,auc");

  auto* rs = app.add_subcommand("resample", "k-fold cross-validation of one learner");
  data.add_to(rs);
  learner.add_to(rs);
  add_min_prevalence(rs, "drop labels below this prevalence first");
  rs->add_option("--iters,-k", iters, "number of folds")->capture_default_str();
  rs->add_option("--seed", seed, "fold and fit seed")->capture_default_str();
  rs->add_option("--measures", measures_text, "comma-separated measures")->capture_default_str();
  rs->add_option("--policy", policy_text, "strict or skip_undefined")->capture_default_str();
  add_workers(rs);
  rs->add_option("--out,-o", out_path, "write the per-fold report to this file");

  auto* bench = app.add_subcommand("bench", "run a benchmark grid from a config file");
  bench->add_option("config", config_path, "benchmark config file")->required();
  auto* bench_workers = add_workers(bench);
  bench->add_option("--output,-o", out_path, "output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    std::vector<Measure> measures;
    UndefinedPolicy policy = UndefinedPolicy::strict;
    std::vector<BinaryMeasure> binary;
    try {
      measures = config_detail::parse_measures(measures_text);
      policy = config_detail::parse_policy(policy_text);
      for (const auto& tok : text::split(binary_text, ','))
        if (!text::trim(tok).empty()) binary.push_back(parse_binary_measure(std::string(text::trim(tok))));
      if (train->parsed() || rs->parsed()) {
        learner.spec();
        learner.base_spec();
      }
    } catch (const InvalidArgument& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return usage;
    }

    if (stats->parsed()) return cmd_stats(data);
    if (train->parsed()) return cmd_train(data, learner, seed, workers, model_path);
    if (predict->parsed()) return cmd_predict(model_path, data.path, out_path);
    if (eval->parsed()) return cmd_eval(pred_path, data, measures, policy, binary);
    if (rs->parsed()) return cmd_resample(data, learner, iters, seed, measures, policy, workers, out_path);
    if (bench->parsed())
      return cmd_bench(config_path, bench_workers->count() ? std::optional<std::size_t>(workers) : std::nullopt,
                       out_path);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return ingestion;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return runtime;
  }
  return usage;
}
