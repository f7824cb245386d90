#include "vxf/config.hpp"

#include <fstream>
#include <sstream>

namespace vxf {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_string(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key=value, got \"" +
                        line + "\"");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (cfg.values_.count(key))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key " + key);
    cfg.values_[key] = Entry{value, line_no, false};
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_string(text.str(), path);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = Entry{value, 0, false};
}

const KeyValueConfig::Entry* KeyValueConfig::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

KeyValueConfig::Entry* KeyValueConfig::find(const std::string& key) {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string KeyValueConfig::take_string(const std::string& key, const std::string& fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  return e->value;
}

double KeyValueConfig::take_double(const std::string& key, double fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  try {
    std::size_t used = 0;
    const double v = std::stod(e->value, &used);
    if (used != e->value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": key " + key +
                      " needs a number, got \"" + e->value + "\"");
  }
}

std::int64_t KeyValueConfig::take_int(const std::string& key, std::int64_t fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(e->value, &used);
    if (used != e->value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": key " + key +
                      " needs an integer, got \"" + e->value + "\"");
  }
}

std::uint64_t KeyValueConfig::take_seed(const std::string& key, std::uint64_t fallback) {
  Entry* e = find(key);
  if (!e) return fallback;
  e->consumed = true;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(e->value, &used);
    if (used != e->value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": key " + key +
                      " needs an unsigned integer, got \"" + e->value + "\"");
  }
}

std::string KeyValueConfig::require_string(const std::string& key) {
  Entry* e = find(key);
  if (!e) throw ConfigError(origin_ + ": missing required key " + key);
  e->consumed = true;
  return e->value;
}

void KeyValueConfig::finish() const {
  for (const auto& [key, entry] : values_)
    if (!entry.consumed)
      throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key " + key);
}

}  // namespace vxf
