#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "text.hpp"

namespace mlforge {

// Dense ARFF, numeric and nominal attributes only. Keywords are
// case-insensitive, '%' starts a comment line, names and values may be quoted
// with ' or ". Sparse rows, string/date attributes and the '?' missing-value
// token are rejected.

struct ArffAttribute {
  std::string name;
  bool nominal = false;
  std::string numeric_type = "numeric";  // as declared: numeric, real or integer
  std::vector<std::string> values;       // nominal levels in declaration order

  friend bool operator==(const ArffAttribute&, const ArffAttribute&) = default;
};

struct ArffDocument {
  std::string relation;
  std::vector<ArffAttribute> attributes;
  std::vector<std::vector<std::string>> rows;  // unquoted cell tokens

  friend bool operator==(const ArffDocument&, const ArffDocument&) = default;
};

/// Which attributes are labels: explicit names, or the last `trailing` ones.
struct LabelSpec {
  std::vector<std::string> names;
  std::size_t trailing = 0;

  static LabelSpec by_names(std::vector<std::string> names) { return {std::move(names), 0}; }
  static LabelSpec last(std::size_t count) { return {{}, count}; }

  std::vector<std::string> resolve(const std::vector<std::string>& columns) const {
    if (!names.empty()) return names;
    if (trailing == 0) throw InvalidArgument("label specification is empty");
    if (trailing > columns.size())
      throw InvalidArgument("label count " + std::to_string(trailing) + " exceeds column count " +
                            std::to_string(columns.size()));
    return {columns.end() - static_cast<std::ptrdiff_t>(trailing), columns.end()};
  }
};

namespace arff_detail {

// Splits on `sep` outside quotes; strips quotes and backslash escapes.
inline std::vector<std::string> tokenize(std::string_view s, char sep, const std::string& source, std::size_t line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted_token = false;
  std::size_t i = 0;
  auto flush = [&] {
    std::string tok = quoted_token ? cur : std::string(text::trim(cur));
    out.push_back(std::move(tok));
    cur.clear();
    quoted_token = false;
  };
  while (i < s.size()) {
    const char c = s[i];
    if ((c == '\'' || c == '"') && text::trim(cur).empty()) {
      const char q = c;
      cur.clear();
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          cur += s[i + 1];
          i += 2;
          continue;
        }
        if (s[i] == q) {
          closed = true;
          ++i;
          break;
        }
        cur += s[i++];
      }
      if (!closed) throw ParseError("unterminated quoted value", source, line);
      quoted_token = true;
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] != sep) throw ParseError("unexpected text after quoted value", source, line);
      continue;
    }
    if (c == sep) {
      flush();
      ++i;
      continue;
    }
    cur += c;
    ++i;
  }
  flush();
  return out;
}

// Reads one (possibly quoted) word from the front of `s`.
inline std::string take_word(std::string_view& s, const std::string& source, std::size_t line) {
  s = text::trim(s);
  if (s.empty()) throw ParseError("missing name in declaration", source, line);
  std::string word;
  if (s.front() == '\'' || s.front() == '"') {
    const char q = s.front();
    std::size_t i = 1;
    bool closed = false;
    while (i < s.size()) {
      if (s[i] == '\\' && i + 1 < s.size()) {
        word += s[i + 1];
        i += 2;
        continue;
      }
      if (s[i] == q) {
        closed = true;
        ++i;
        break;
      }
      word += s[i++];
    }
    if (!closed) throw ParseError("unterminated quoted name", source, line);
    s.remove_prefix(i);
  } else {
    std::size_t i = 0;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '{') ++i;
    word = std::string(s.substr(0, i));
    s.remove_prefix(i);
  }
  return word;
}

inline bool needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '\'' || c == '"' || c == '{' || c == '}' ||
        c == '%' || c == '\\')
      return true;
  return s == "?";
}

inline std::string quote(const std::string& s) {
  if (!needs_quotes(s)) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  return out + "'";
}

}  // namespace arff_detail

inline ArffDocument parse_arff(std::istream& in, const std::string& source = "<arff>") {
  ArffDocument doc;
  std::string raw;
  std::size_t line = 0;
  bool in_data = false, have_relation = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = text::trim(raw);
    if (s.empty() || s.front() == '%') continue;
    if (!in_data) {
      if (s.front() != '@') throw ParseError("expected a header declaration", source, line);
      std::string_view rest = s.substr(1);
      std::size_t kw_end = 0;
      while (kw_end < rest.size() && !std::isspace(static_cast<unsigned char>(rest[kw_end]))) ++kw_end;
      const auto keyword = rest.substr(0, kw_end);
      rest.remove_prefix(kw_end);
      if (text::iequals(keyword, "relation")) {
        doc.relation = arff_detail::take_word(rest, source, line);
        have_relation = true;
      } else if (text::iequals(keyword, "attribute")) {
        ArffAttribute attr;
        attr.name = arff_detail::take_word(rest, source, line);
        rest = text::trim(rest);
        if (!rest.empty() && rest.front() == '{') {
          const auto close = rest.rfind('}');
          if (close == std::string_view::npos) throw ParseError("unterminated nominal value set", source, line);
          attr.nominal = true;
          attr.values = arff_detail::tokenize(rest.substr(1, close - 1), ',', source, line);
          for (const auto& v : attr.values)
            if (v.empty()) throw ParseError("empty nominal value in '" + attr.name + "'", source, line);
          detail::require_unique(attr.values, "nominal value");
        } else {
          const auto type = text::trim(rest);
          if (text::iequals(type, "numeric") || text::iequals(type, "real") || text::iequals(type, "integer")) {
            attr.numeric_type = detail::lower(std::string(type));
          } else {
            throw ParseError("unsupported attribute type '" + std::string(type) + "' for '" + attr.name + "'",
                             source, line);
          }
        }
        doc.attributes.push_back(std::move(attr));
      } else if (text::iequals(keyword, "data")) {
        if (!have_relation) throw ParseError("missing @relation", source, line);
        if (doc.attributes.empty()) throw ParseError("no attributes declared", source, line);
        in_data = true;
      } else {
        throw ParseError("unknown declaration '@" + std::string(keyword) + "'", source, line);
      }
      continue;
    }
    if (s.front() == '{') throw ParseError("sparse ARFF rows are not supported", source, line);
    auto cells = arff_detail::tokenize(s, ',', source, line);
    if (cells.size() != doc.attributes.size())
      throw ParseError("row has " + std::to_string(cells.size()) + " values, expected " +
                           std::to_string(doc.attributes.size()),
                       source, line);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto& attr = doc.attributes[j];
      if (cells[j] == "?") throw ParseError("missing value '?' in attribute '" + attr.name + "'", source, line);
      if (attr.nominal) {
        if (std::find(attr.values.begin(), attr.values.end(), cells[j]) == attr.values.end())
          throw ParseError("value '" + cells[j] + "' is not declared for '" + attr.name + "'", source, line);
      } else if (!text::parse_real(cells[j]) || std::isnan(*text::parse_real(cells[j]))) {
        throw ParseError("non-numeric value '" + cells[j] + "' for '" + attr.name + "'", source, line);
      }
    }
    doc.rows.push_back(std::move(cells));
  }
  if (!in_data) throw ParseError("missing @data section", source, line);
  return doc;
}

inline ArffDocument parse_arff_string(const std::string& content, const std::string& source = "<arff>") {
  std::istringstream in(content);
  return parse_arff(in, source);
}

/// Canonical writer: lower-case keywords, one attribute per line, values
/// quoted only when needed.
inline std::string write_arff(const ArffDocument& doc) {
  std::ostringstream os;
  os << "@relation " << arff_detail::quote(doc.relation) << "\n\n";
  for (const auto& a : doc.attributes) {
    os << "@attribute " << arff_detail::quote(a.name) << ' ';
    if (a.nominal) {
      os << '{';
      for (std::size_t v = 0; v < a.values.size(); ++v) os << (v ? "," : "") << arff_detail::quote(a.values[v]);
      os << '}';
    } else {
      os << a.numeric_type;
    }
    os << '\n';
  }
  os << "\n@data\n";
  for (const auto& row : doc.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << arff_detail::quote(row[j]);
    os << '\n';
  }
  return os.str();
}

inline Table to_table(const ArffDocument& doc) {
  Table t;
  for (std::size_t j = 0; j < doc.attributes.size(); ++j) {
    const auto& a = doc.attributes[j];
    Column c{a.name, {}, a.nominal ? a.values : std::vector<std::string>{}};
    c.values.reserve(doc.rows.size());
    for (const auto& row : doc.rows) {
      if (a.nominal) {
        const auto it = std::find(a.values.begin(), a.values.end(), row[j]);
        c.values.push_back(static_cast<double>(it - a.values.begin()));
      } else {
        c.values.push_back(*text::parse_real(row[j]));
      }
    }
    t.columns.push_back(std::move(c));
  }
  return t;
}

struct ReadOptions {
  bool drop_constant_features = true;
  std::ostream* notices = nullptr;
};

inline MultilabelDataset arff_to_dataset(const ArffDocument& doc, const LabelSpec& labels,
                                         const ReadOptions& options = {}, const std::string& source = "<arff>") {
  std::vector<std::string> names;
  for (const auto& a : doc.attributes) names.push_back(a.name);
  try {
    if (doc.rows.empty()) throw InvalidArgument("dataset has no data rows");
    auto task = make_multilabel_task(to_table(doc), labels.resolve(names), doc.relation.empty() ? "arff" : doc.relation,
                                     TaskOptions{options.drop_constant_features, options.notices});
    return std::move(task.dataset);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), source);
  }
}

inline MultilabelDataset read_arff(const std::string& path, const LabelSpec& labels, const ReadOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path);
  return arff_to_dataset(parse_arff(in, path), labels, options, path);
}

}  // namespace mlforge
