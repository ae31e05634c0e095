#pragma once

// Line-oriented scenario files.
//
//   # comment (anywhere on a line)
//   [section]
//   key = value
//   field field field      <- table row, whitespace separated
//
// Every parsed item remembers its line so later validation can point at it.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rtsnoc/error.hpp"

namespace rtsnoc {

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigRow {
  std::vector<std::string> fields;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  int line = 0;
  std::vector<ConfigEntry> entries;
  std::vector<ConfigRow> rows;

  const ConfigEntry* find(std::string_view key) const {
    for (const auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }
};

struct ConfigFile {
  std::string source;
  std::vector<ConfigSection> sections;

  const ConfigSection* section(std::string_view name) const {
    for (const auto& s : sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }

  [[noreturn]] void fail(ErrorKind kind, int line, const std::string& what) const {
    throw Error(kind, source + ":" + std::to_string(line) + ": " + what);
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

inline ConfigFile parse_config(std::istream& in, const std::string& source) {
  ConfigFile file;
  file.source = source;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = raw;
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;

    if (text.front() == '[') {
      if (text.back() != ']') file.fail(ErrorKind::Parse, line, "unterminated section header");
      const std::string name(detail::trim(text.substr(1, text.size() - 2)));
      if (name.empty()) file.fail(ErrorKind::Parse, line, "empty section name");
      if (file.section(name)) file.fail(ErrorKind::Parse, line, "section [" + name + "] appears twice");
      file.sections.push_back({name, line, {}, {}});
      continue;
    }
    if (file.sections.empty()) file.fail(ErrorKind::Parse, line, "content before the first section header");
    auto& sec = file.sections.back();

    if (auto eq = text.find('='); eq != std::string_view::npos) {
      const std::string key(detail::trim(text.substr(0, eq)));
      const std::string value(detail::trim(text.substr(eq + 1)));
      if (key.empty() || key.find_first_of(" \t") != std::string::npos) {
        file.fail(ErrorKind::Parse, line, "malformed key");
      }
      if (sec.find(key)) file.fail(ErrorKind::Parse, line, "key '" + key + "' repeated in [" + sec.name + "]");
      sec.entries.push_back({key, value, line});
    } else {
      sec.rows.push_back({detail::split_ws(text), line});
    }
  }
  return file;
}

// Value readers. Each one reports the offending line on failure.

inline std::int64_t parse_int(const ConfigFile& file, int line, std::string_view text) {
  std::int64_t value = 0;
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    text.remove_prefix(2);
  }
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value, base);
  if (ec != std::errc() || ptr != end || text.empty()) {
    file.fail(ErrorKind::Parse, line, "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

inline double parse_double(const ConfigFile& file, int line, std::string_view text) {
  try {
    std::size_t used = 0;
    const std::string s(text);
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    file.fail(ErrorKind::Parse, line, "expected a number, got '" + std::string(text) + "'");
  }
}

/// "a..b" or a single value "a" (meaning a..a).
inline std::pair<std::int64_t, std::int64_t> parse_int_range(const ConfigFile& file, int line,
                                                             std::string_view text) {
  if (auto dots = text.find(".."); dots != std::string_view::npos) {
    const auto lo = parse_int(file, line, text.substr(0, dots));
    const auto hi = parse_int(file, line, text.substr(dots + 2));
    if (hi < lo) file.fail(ErrorKind::Validation, line, "range upper bound below lower bound");
    return {lo, hi};
  }
  const auto v = parse_int(file, line, text);
  return {v, v};
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    auto item = detail::trim(text.substr(start, comma - start));
    if (!item.empty()) out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

/// Comma list of numbers, or "start:stop:step" (stop included when hit).
inline std::vector<double> parse_number_list(const ConfigFile& file, int line, std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      auto colon = text.find(':', start);
      parts.emplace_back(detail::trim(text.substr(start, colon - start)));
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3) file.fail(ErrorKind::Parse, line, "range must be start:stop:step");
    const double a = parse_double(file, line, parts[0]);
    const double b = parse_double(file, line, parts[1]);
    const double step = parse_double(file, line, parts[2]);
    if (step <= 0 || b < a) file.fail(ErrorKind::Validation, line, "range needs start <= stop and step > 0");
    const auto count = static_cast<std::int64_t>((b - a) / step + 1e-9) + 1;
    for (std::int64_t i = 0; i < count; ++i) {
      // round away accumulated binary noise so CSV output stays stable
      out.push_back(std::round((a + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
    return out;
  }
  for (const auto& item : split_list(text)) out.push_back(parse_double(file, line, item));
  if (out.empty()) file.fail(ErrorKind::Parse, line, "empty number list");
  return out;
}

}  // namespace rtsnoc
