#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "learners.hpp"
#include "predictions_io.hpp"
#include "text.hpp"
#include "transform.hpp"

namespace mlforge {

// Model file layout (UTF-8, LF):
//
//   mlforge-model version=1 method=CC m=3 p=4 order=0,1,2 threshold=0.5 internal_folds=0 seed=7
//   base<TAB><learner spec>
//   labels<TAB>...            features<TAB>...            dropped<TAB>...
//   block <per_label|level1> <label index> lines=<L>
//   ... L body lines describing one BinaryModel ...
//   end
//   (repeated per model)
//   end-model
//
// Reals use the shortest round-trip decimal form, so a loaded model predicts
// bit-identically to the saved one.

inline constexpr int model_format_version = 1;

namespace model_detail {

inline std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += ' ' + text::format_real(x);
  return s;
}

inline std::vector<std::string> body_lines(const BinaryModel& model) {
  std::vector<std::string> out;
  out.push_back("spec " + model.spec.to_string());
  out.push_back("input_dimension " + std::to_string(model.input_dimension));
  out.push_back("train_positive_rate " + text::format_real(model.train_positive_rate));
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantState>) {
          out.push_back("state constant " + text::format_real(s.probability));
        } else if constexpr (std::is_same_v<S, LogisticState>) {
          out.push_back("state logistic " + text::format_real(s.bias));
          out.push_back("mean" + join_reals(s.mean));
          out.push_back("scale" + join_reals(s.scale));
          out.push_back("weights" + join_reals(s.weights));
        } else if constexpr (std::is_same_v<S, TreeState>) {
          out.push_back("state tree " + std::to_string(s.nodes.size()));
          for (const auto& n : s.nodes)
            out.push_back("node " + std::to_string(n.feature) + ' ' + text::format_real(n.threshold) + ' ' +
                          std::to_string(n.left) + ' ' + std::to_string(n.right) + ' ' +
                          text::format_real(n.probability));
        } else if constexpr (std::is_same_v<S, MemorizerState>) {
          out.push_back("state memorizer " + std::to_string(s.rows.rows()) + ' ' + std::to_string(s.rows.cols()));
          for (std::size_t r = 0; r < s.rows.rows(); ++r) {
            std::vector<double> row(s.rows.row(r).begin(), s.rows.row(r).end());
            out.push_back("row " + text::format_real(s.probability[r]) + join_reals(row));
          }
        } else {
          out.push_back("state passthrough " + std::to_string(s.column));
        }
      },
      model.state);
  return out;
}

class BodyReader {
 public:
  BodyReader(std::vector<std::string> lines, std::string source) : lines_(std::move(lines)), source_(std::move(source)) {}

  // Next line, which must start with `tag`; returns the remainder tokens.
  std::vector<std::string> expect(const std::string& tag) {
    if (pos_ >= lines_.size()) corrupted("block ends early, expected '" + tag + "'");
    std::istringstream in(lines_[pos_++]);
    std::string word;
    in >> word;
    if (word != tag) corrupted("expected '" + tag + "', got '" + word + "'");
    std::vector<std::string> rest;
    while (in >> word) rest.push_back(word);
    return rest;
  }

  double real(const std::string& tok) {
    const auto v = text::parse_real(tok);
    if (!v) corrupted("malformed number '" + tok + "'");
    return *v;
  }

  template <typename Int>
  Int integer(const std::string& tok) {
    const auto v = text::parse_int<Int>(tok);
    if (!v) corrupted("malformed integer '" + tok + "'");
    return *v;
  }

  std::vector<double> reals(const std::vector<std::string>& toks, std::size_t expected) {
    if (toks.size() != expected) corrupted("expected " + std::to_string(expected) + " values");
    std::vector<double> out;
    for (const auto& t : toks) out.push_back(real(t));
    return out;
  }

  void one(const std::vector<std::string>& toks) {
    if (toks.size() != 1) corrupted("expected exactly one value");
  }

  bool done() const { return pos_ == lines_.size(); }

  [[noreturn]] void corrupted(const std::string& what) const { throw ParseError("corrupted block: " + what, source_); }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
  std::string source_;
};

inline BinaryModel parse_body(std::vector<std::string> lines, const std::string& source) {
  BodyReader r(std::move(lines), source);
  BinaryModel model;
  auto spec = r.expect("spec");
  r.one(spec);
  try {
    model.spec = BaseLearnerSpec::parse(spec[0]);
  } catch (const InvalidArgument& e) {
    r.corrupted(e.what());
  }
  auto dim = r.expect("input_dimension");
  r.one(dim);
  model.input_dimension = r.integer<std::size_t>(dim[0]);
  auto rate = r.expect("train_positive_rate");
  r.one(rate);
  model.train_positive_rate = r.real(rate[0]);
  auto state = r.expect("state");
  if (state.empty()) r.corrupted("state without type");
  const auto& type = state[0];
  const std::size_t p = model.input_dimension;
  if (type == "constant" && state.size() == 2) {
    model.state = ConstantState{r.real(state[1])};
  } else if (type == "logistic" && state.size() == 2) {
    LogisticState s;
    s.bias = r.real(state[1]);
    s.mean = r.reals(r.expect("mean"), p);
    s.scale = r.reals(r.expect("scale"), p);
    s.weights = r.reals(r.expect("weights"), p);
    model.state = std::move(s);
  } else if (type == "tree" && state.size() == 2) {
    TreeState s;
    const auto count = r.integer<std::size_t>(state[1]);
    for (std::size_t i = 0; i < count; ++i) {
      const auto t = r.expect("node");
      if (t.size() != 5) r.corrupted("tree node needs 5 fields");
      TreeNode node{r.integer<int>(t[0]), r.real(t[1]), r.integer<int>(t[2]), r.integer<int>(t[3]), r.real(t[4])};
      const auto valid_child = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(count); };
      if (node.feature >= static_cast<int>(p) || (node.feature >= 0 && !(valid_child(node.left) && valid_child(node.right))))
        r.corrupted("tree node references are out of range");
      s.nodes.push_back(node);
    }
    if (s.nodes.empty()) r.corrupted("tree without nodes");
    model.state = std::move(s);
  } else if (type == "memorizer" && state.size() == 3) {
    MemorizerState s;
    const auto rows = r.integer<std::size_t>(state[1]), cols = r.integer<std::size_t>(state[2]);
    if (cols != p) r.corrupted("memorizer width does not match input dimension");
    std::vector<double> flat;
    for (std::size_t i = 0; i < rows; ++i) {
      auto vals = r.reals(r.expect("row"), cols + 1);
      s.probability.push_back(vals.front());
      flat.insert(flat.end(), vals.begin() + 1, vals.end());
    }
    s.rows = RealMatrix::from_rows(rows, cols, std::move(flat));
    model.state = std::move(s);
  } else if (type == "passthrough" && state.size() == 2) {
    const auto c = r.integer<std::size_t>(state[1]);
    if (c >= p) r.corrupted("passthrough column out of range");
    model.state = PassthroughState{c};
  } else {
    r.corrupted("unknown state '" + type + "'");
  }
  if (!r.done()) r.corrupted("trailing lines in block");
  return model;
}

}  // namespace model_detail

inline std::string format_model(const MultilabelModel& model) {
  model.validate();
  std::ostringstream os;
  os << "mlforge-model version=" << model_format_version << " method=" << to_string(model.method)
     << " m=" << model.n_labels() << " p=" << model.n_features() << " order=" << model.chain_order.to_string()
     << " threshold=" << text::format_real(model.threshold) << " internal_folds=" << model.internal_folds
     << " seed=" << model.seed << '\n';
  os << "base\t" << model.base_spec.to_string() << '\n';
  os << io_detail::names_line("labels", model.label_names) << '\n';
  os << io_detail::names_line("features", model.feature_names) << '\n';
  os << io_detail::names_line("dropped", model.dropped_features) << '\n';
  auto block = [&](const char* role, std::size_t k, const BinaryModel& bm) {
    const auto lines = model_detail::body_lines(bm);
    os << "block " << role << ' ' << k << " lines=" << lines.size() << '\n';
    for (const auto& l : lines) os << l << '\n';
    os << "end\n";
  };
  for (std::size_t k = 0; k < model.per_label_models.size(); ++k) block("per_label", k, model.per_label_models[k]);
  for (std::size_t k = 0; k < model.level1_models.size(); ++k) block("level1", k, model.level1_models[k]);
  os << "end-model\n";
  return os.str();
}

inline MultilabelModel parse_model(std::istream& in, const std::string& source = "<model>") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty model file", source);
  const auto kv = io_detail::parse_header(line, "mlforge-model", source);
  const auto version = text::parse_int<int>(io_detail::field(kv, "version", source));
  if (!version) throw ParseError("malformed format version", source, 1);
  if (*version != model_format_version)
    throw ParseError("unsupported model format version " + std::to_string(*version) + " (this build reads version " +
                         std::to_string(model_format_version) + ")",
                     source, 1);

  MultilabelModel model;
  try {
    model.method = parse_method(io_detail::field(kv, "method", source));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), source, 1);
  }
  const std::size_t m = io_detail::count_field(kv, "m", source), p = io_detail::count_field(kv, "p", source);
  const auto threshold = text::parse_real(io_detail::field(kv, "threshold", source));
  if (!threshold) throw ParseError("malformed threshold", source, 1);
  model.threshold = *threshold;
  model.internal_folds = io_detail::count_field(kv, "internal_folds", source);
  const auto seed = text::parse_int<std::uint64_t>(io_detail::field(kv, "seed", source));
  if (!seed) throw ParseError("malformed seed", source, 1);
  model.seed = *seed;
  std::vector<std::size_t> order;
  for (const auto& tok : text::split(io_detail::field(kv, "order", source), ',')) {
    const auto v = text::parse_int<std::size_t>(tok);
    if (!v) throw ParseError("malformed chain order", source, 1);
    order.push_back(*v);
  }
  try {
    model.chain_order = ChainOrder(std::move(order));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), source, 1);
  }

  std::size_t lineno = 1;
  auto next = [&](const char* what) -> std::string {
    if (!std::getline(in, line)) throw ParseError(std::string("corrupted block: file ends before ") + what, source);
    ++lineno;
    return line;
  };
  {
    const auto base = text::split(next("base line"), '\t');
    if (base.size() != 2 || base[0] != "base") throw ParseError("expected base line", source, lineno);
    try {
      model.base_spec = BaseLearnerSpec::parse(base[1]);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), source, lineno);
    }
  }
  model.label_names = io_detail::parse_names_line(next("label line"), "labels", source, lineno);
  model.feature_names = io_detail::parse_names_line(next("feature line"), "features", source, lineno);
  model.dropped_features = io_detail::parse_names_line(next("dropped line"), "dropped", source, lineno);
  if (model.label_names.size() != m || model.feature_names.size() != p)
    throw ParseError("name lines disagree with header m/p", source, lineno);

  const bool two_level = model.method == Method::DBR || model.method == Method::STA;
  const std::size_t blocks = two_level ? 2 * m : m;
  model.per_label_models.resize(m);
  if (two_level) model.level1_models.resize(m);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::istringstream head(next("all model blocks"));
    std::string tag, role, count;
    std::size_t index = 0;
    head >> tag >> role >> index >> count;
    const std::string expected_role = b < m ? "per_label" : "level1";
    if (tag != "block" || role != expected_role || index != b % m || count.rfind("lines=", 0) != 0)
      throw ParseError("corrupted block: bad block header", source, lineno);
    const auto n_lines = text::parse_int<std::size_t>(count.substr(6));
    if (!n_lines) throw ParseError("corrupted block: bad line count", source, lineno);
    std::vector<std::string> body;
    for (std::size_t l = 0; l < *n_lines; ++l) body.push_back(next("end of block"));
    if (next("block terminator") != "end") throw ParseError("corrupted block: missing 'end'", source, lineno);
    auto bm = model_detail::parse_body(std::move(body), source);
    (b < m ? model.per_label_models : model.level1_models)[b % m] = std::move(bm);
  }
  if (next("end-model marker") != "end-model") throw ParseError("corrupted block: missing end-model", source, lineno);
  try {
    model.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("corrupted block: ") + e.what(), source);
  }
  return model;
}

inline void save_model(const MultilabelModel& model, const std::string& path) {
  const auto content = format_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

inline MultilabelModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", path);
  return parse_model(in, path);
}

}  // namespace mlforge
