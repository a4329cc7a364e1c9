#pragma once

#include "egvi/core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace egvi {

// Flat-section key/value files in TOML syntax: [section] headers, scalar
// values (string, bool, integer, float) and single-level arrays of scalars.
struct ConfigValue {
  using Scalar = std::variant<bool, std::int64_t, double, std::string>;
  std::variant<Scalar, std::vector<Scalar>> data;

  bool is_array() const { return data.index() == 1; }
  bool operator==(const ConfigValue&) const = default;
};

struct ConfigSection {
  std::string name;
  std::vector<std::pair<std::string, ConfigValue>> entries;

  const ConfigValue* find(std::string_view key) const;
  bool operator==(const ConfigSection&) const = default;
};

struct ConfigDocument {
  std::vector<ConfigSection> sections;
  bool operator==(const ConfigDocument&) const = default;
};

ConfigDocument parse_config(std::string_view text);
ConfigDocument load_config(const std::filesystem::path& path);
std::string serialize_config(const ConfigDocument& doc);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace egvi
