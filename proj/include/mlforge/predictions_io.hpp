#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "prediction.hpp"
#include "text.hpp"

namespace mlforge {

// Prediction file layout (UTF-8, LF):
//
//   mlforge-predictions version=1 n=<rows> m=<labels> threshold=<t> truth=<yes|no>
//   labels<TAB>name_1<TAB>...<TAB>name_m
//   <truth bits> | <hard bits> | <p_1> ... <p_m>      (truth=yes)
//   <hard bits> | <p_1> ... <p_m>                     (truth=no)
//
// Bits are written as one character per label ("101"); probabilities use the
// shortest decimal form that round-trips exactly.

inline constexpr int prediction_format_version = 1;

namespace io_detail {

inline std::map<std::string, std::string> parse_header(const std::string& line, const std::string& magic,
                                                       const std::string& source) {
  std::istringstream in(line);
  std::string word;
  in >> word;
  if (word != magic) throw ParseError("not a " + magic + " file", source, 1);
  std::map<std::string, std::string> kv;
  while (in >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header field '" + word + "'", source, 1);
    kv[word.substr(0, eq)] = word.substr(eq + 1);
  }
  return kv;
}

inline const std::string& field(const std::map<std::string, std::string>& kv, const std::string& key,
                                const std::string& source) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ParseError("header is missing '" + key + "'", source, 1);
  return it->second;
}

inline std::size_t count_field(const std::map<std::string, std::string>& kv, const std::string& key,
                               const std::string& source) {
  const auto v = text::parse_int<std::size_t>(field(kv, key, source));
  if (!v) throw ParseError("header field '" + key + "' is not a count", source, 1);
  return *v;
}

inline void check_name(const std::string& name) {
  if (name.empty() || name.find_first_of("\t\n\r") != std::string::npos)
    throw InvalidArgument("name '" + name + "' cannot be written (empty or contains tab/newline)");
}

inline std::string names_line(const std::string& tag, const std::vector<std::string>& names) {
  std::string s = tag;
  for (const auto& n : names) {
    check_name(n);
    s += '\t' + n;
  }
  return s;
}

inline std::vector<std::string> parse_names_line(const std::string& line, const std::string& tag,
                                                 const std::string& source, std::size_t lineno) {
  auto parts = text::split(line, '\t');
  if (parts.front() != tag) throw ParseError("expected '" + tag + "' line", source, lineno);
  parts.erase(parts.begin());
  return parts;
}

inline std::vector<std::uint8_t> parse_bits(std::string_view s, std::size_t m, const std::string& source,
                                            std::size_t line) {
  s = text::trim(s);
  if (s.size() != m) throw ParseError("expected " + std::to_string(m) + " label bits", source, line);
  std::vector<std::uint8_t> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (s[k] != '0' && s[k] != '1') throw ParseError("label bits must be 0 or 1", source, line);
    out[k] = static_cast<std::uint8_t>(s[k] - '0');
  }
  return out;
}

}  // namespace io_detail

inline std::string format_predictions(const PredictionSet& pred) {
  pred.validate();
  std::ostringstream os;
  os << "mlforge-predictions version=" << prediction_format_version << " n=" << pred.n() << " m=" << pred.m()
     << " threshold=" << text::format_real(pred.threshold) << " truth=" << (pred.truth ? "yes" : "no") << '\n';
  os << io_detail::names_line("labels", pred.label_names) << '\n';
  for (std::size_t i = 0; i < pred.n(); ++i) {
    if (pred.truth) {
      for (std::size_t k = 0; k < pred.m(); ++k) os << char('0' + (*pred.truth)(i, k));
      os << " | ";
    }
    for (std::size_t k = 0; k < pred.m(); ++k) os << char('0' + pred.predicted(i, k));
    os << " |";
    for (std::size_t k = 0; k < pred.m(); ++k) os << ' ' << text::format_real(pred.probs(i, k));
    os << '\n';
  }
  return os.str();
}

inline PredictionSet parse_predictions(std::istream& in, const std::string& source = "<predictions>") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty prediction file", source);
  const auto kv = io_detail::parse_header(line, "mlforge-predictions", source);
  const auto version = text::parse_int<int>(io_detail::field(kv, "version", source));
  if (!version) throw ParseError("malformed format version", source, 1);
  if (*version != prediction_format_version)
    throw ParseError("unsupported prediction format version " + std::to_string(*version), source, 1);
  const std::size_t n = io_detail::count_field(kv, "n", source), m = io_detail::count_field(kv, "m", source);
  const auto threshold = text::parse_real(io_detail::field(kv, "threshold", source));
  if (!threshold) throw ParseError("malformed threshold", source, 1);
  const auto& truth_flag = io_detail::field(kv, "truth", source);
  if (truth_flag != "yes" && truth_flag != "no") throw ParseError("truth must be yes or no", source, 1);
  const bool has_truth = truth_flag == "yes";

  if (!std::getline(in, line)) throw ParseError("missing label line", source, 2);
  auto names = io_detail::parse_names_line(line, "labels", source, 2);
  if (names.size() != m) throw ParseError("label line does not list m names", source, 2);

  BinaryMatrix truth(n, m), hard(n, m);
  RealMatrix probs(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lineno = i + 3;
    if (!std::getline(in, line)) throw ParseError("file ends before all " + std::to_string(n) + " rows", source, lineno);
    const auto blocks = text::split(line, '|');
    if (blocks.size() != (has_truth ? 3u : 2u)) throw ParseError("wrong number of '|' blocks", source, lineno);
    std::size_t b = 0;
    if (has_truth) {
      const auto bits = io_detail::parse_bits(blocks[b++], m, source, lineno);
      for (std::size_t k = 0; k < m; ++k) truth(i, k) = bits[k];
    }
    const auto bits = io_detail::parse_bits(blocks[b++], m, source, lineno);
    for (std::size_t k = 0; k < m; ++k) hard(i, k) = bits[k];
    std::istringstream ps(blocks[b]);
    std::string tok;
    std::size_t k = 0;
    while (ps >> tok) {
      const auto v = text::parse_real(tok);
      if (!v || k >= m) throw ParseError("malformed probability block", source, lineno);
      probs(i, k++) = *v;
    }
    if (k != m) throw ParseError("probability block must hold " + std::to_string(m) + " values", source, lineno);
  }
  while (std::getline(in, line))
    if (!text::trim(line).empty()) throw ParseError("unexpected content after the last row", source);

  PredictionSet pred;
  pred.truth = has_truth ? std::optional<BinaryMatrix>(std::move(truth)) : std::nullopt;
  pred.probs = std::move(probs);
  pred.predicted = std::move(hard);
  pred.label_names = std::move(names);
  pred.threshold = *threshold;
  try {
    check_threshold(pred.threshold);
    pred.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), source);
  }
  return pred;
}

inline void write_predictions(const PredictionSet& pred, const std::string& path) {
  const auto content = format_predictions(pred);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

inline PredictionSet read_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", path);
  return parse_predictions(in, path);
}

}  // namespace mlforge
