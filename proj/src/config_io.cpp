#include "mldl/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mldl {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

ConfigText::Section& ConfigText::section(const std::string& name) {
  for (auto& s : sections_) {
    if (s.name == name) return s;
  }
  sections_.push_back({name, {}});
  return sections_.back();
}

void ConfigText::set(const std::string& sec, const std::string& key, const std::string& value) {
  auto& s = section(sec);
  for (auto& [k, v] : s.entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  s.entries.emplace_back(key, value);
}

void ConfigText::set(const std::string& sec, const std::string& key, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  set(sec, key, std::string(buf));
}

void ConfigText::set(const std::string& sec, const std::string& key, long value) {
  set(sec, key, std::to_string(value));
}

std::optional<std::string> ConfigText::get(const std::string& sec, const std::string& key) const {
  for (const auto& s : sections_) {
    if (s.name != sec) continue;
    for (const auto& [k, v] : s.entries) {
      if (k == key) return v;
    }
  }
  return std::nullopt;
}

std::string ConfigText::require(const std::string& sec, const std::string& key) const {
  auto v = get(sec, key);
  if (!v) throw std::invalid_argument("config: missing [" + sec + "] " + key);
  return *v;
}

double ConfigText::require_double(const std::string& sec, const std::string& key) const {
  return std::stod(require(sec, key));
}

long ConfigText::require_long(const std::string& sec, const std::string& key) const {
  return std::stol(require(sec, key));
}

std::string ConfigText::to_string() const {
  std::ostringstream os;
  for (const auto& s : sections_) {
    os << '[' << s.name << "]\n";
    for (const auto& [k, v] : s.entries) os << k << " = " << v << '\n';
    os << '\n';
  }
  return os.str();
}

void ConfigText::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << to_string();
  if (!out) throw IoError("write failed: " + path.string());
}

ConfigText ConfigText::parse(const std::string& text) {
  ConfigText cfg;
  std::istringstream in(text);
  std::string line, current = "global";
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      current = trim(line.substr(1, line.size() - 2));
      cfg.section(current);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("config: bad line: " + line);
    cfg.set(current, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ConfigText ConfigText::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace mldl
