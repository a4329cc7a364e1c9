#include "egvi/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace egvi {

const ConfigValue* ConfigSection::find(std::string_view key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ConfigDocument run() {
    ConfigDocument doc;
    std::set<std::string> section_names;
    std::set<std::string> keys;
    while (!at_end()) {
      skip_blank();
      if (at_end()) break;
      if (peek() == '[') {
        ++pos_;
        skip_spaces();
        std::string name = bare_key();
        skip_spaces();
        expect(']');
        end_of_line();
        if (!section_names.insert(name).second) fail("duplicate section [" + name + "]");
        doc.sections.push_back({std::move(name), {}});
        keys.clear();
        continue;
      }
      if (doc.sections.empty()) fail("key outside of any [section]");
      std::string key = bare_key();
      skip_spaces();
      expect('=');
      skip_spaces();
      ConfigValue value = this->value();
      end_of_line();
      if (!keys.insert(key).second) fail("duplicate key '" + key + "'");
      doc.sections.back().entries.emplace_back(std::move(key), std::move(value));
    }
    return doc;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line()) + ": " + msg);
  }

  std::size_t line() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) n += text_[i] == '\n';
    return n;
  }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_blank() {
    for (;;) {
      skip_spaces();
      if (peek() == '#') {
        while (!at_end() && peek() != '\n') ++pos_;
      }
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_spaces();
    if (peek() == '#')
      while (!at_end() && peek() != '\n') ++pos_;
    if (peek() == '\r') ++pos_;
    if (!at_end() && peek() != '\n') fail("unexpected text after value");
    if (!at_end()) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                         peek() == '-' || peek() == '.'))
      ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  ConfigValue value() {
    if (peek() == '[') {
      ++pos_;
      std::vector<ConfigValue::Scalar> items;
      skip_array_space();
      if (peek() == ']') {
        ++pos_;
        return {items};
      }
      for (;;) {
        skip_array_space();
        items.push_back(scalar());
        skip_array_space();
        if (peek() == ',') {
          ++pos_;
          skip_array_space();
          if (peek() == ']') {
            ++pos_;
            break;
          }
          continue;
        }
        expect(']');
        break;
      }
      return {items};
    }
    return {scalar()};
  }

  void skip_array_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) ++pos_;
  }

  ConfigValue::Scalar scalar() {
    if (peek() == '"') return string_value();
    const std::size_t start = pos_;
    while (!at_end() && peek() != ',' && peek() != ']' && peek() != '#' && peek() != '\n' &&
           peek() != '\r' && peek() != ' ' && peek() != '\t')
      ++pos_;
    const std::string_view tok = text_.substr(start, pos_ - start);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string clean;
    for (char c : tok)
      if (c != '_') clean.push_back(c);
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    const char* first = clean.data();
    const char* last = clean.data() + clean.size();
    if (!clean.empty() && *first == '+') ++first;
    if (!is_float) {
      std::int64_t v = 0;
      const auto r = std::from_chars(first, last, v);
      if (r.ec == std::errc() && r.ptr == last) return v;
      fail("invalid integer '" + std::string(tok) + "'");
    }
    double v = 0.0;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || !std::isfinite(v))
      fail("invalid number '" + std::string(tok) + "'");
    return v;
  }

  ConfigValue::Scalar string_value() {
    expect('"');
    std::string out;
    for (;;) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) fail("unterminated escape");
      const char e = text_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string format_scalar(const ConfigValue::Scalar& s) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          std::string t = format_double(v);
          if (t.find_first_of(".e") == std::string::npos) t += ".0";
          return t;
        } else {
          std::string out = "\"";
          for (char c : v) {
            switch (c) {
              case '"': out += "\\\""; break;
              case '\\': out += "\\\\"; break;
              case '\n': out += "\\n"; break;
              case '\t': out += "\\t"; break;
              default: out.push_back(c);
            }
          }
          return out + "\"";
        }
      },
      s);
}

}  // namespace

ConfigDocument parse_config(std::string_view text) { return Parser(text).run(); }

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ConfigDocument& doc) {
  std::string out;
  for (std::size_t i = 0; i < doc.sections.size(); ++i) {
    if (i > 0) out += "\n";
    out += "[" + doc.sections[i].name + "]\n";
    for (const auto& [key, value] : doc.sections[i].entries) {
      out += key + " = ";
      if (const auto* s = std::get_if<ConfigValue::Scalar>(&value.data)) {
        out += format_scalar(*s);
      } else {
        const auto& items = std::get<std::vector<ConfigValue::Scalar>>(value.data);
        out += "[";
        for (std::size_t j = 0; j < items.size(); ++j) {
          if (j > 0) out += ", ";
          out += format_scalar(items[j]);
        }
        out += "]";
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace egvi
