#pragma once

#include "mldl/common.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mldl {

/// Ordered `[section] / key = value` text, used to echo every run's full
/// configuration next to its outputs.
class ConfigText {
 public:
  void set(const std::string& section, const std::string& key, const std::string& value);
  void set(const std::string& section, const std::string& key, double value);
  void set(const std::string& section, const std::string& key, long value);

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string require(const std::string& section, const std::string& key) const;
  double require_double(const std::string& section, const std::string& key) const;
  long require_long(const std::string& section, const std::string& key) const;

  std::string to_string() const;
  void save(const std::filesystem::path& path) const;
  static ConfigText parse(const std::string& text);
  static ConfigText load(const std::filesystem::path& path);

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };
  Section& section(const std::string& name);
  std::vector<Section> sections_;
};

}  // namespace mldl
