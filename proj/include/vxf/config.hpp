#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vxf/types.hpp"

namespace vxf {

// Plain key=value run configuration. '#' starts a comment; blank lines are
// ignored. Typed getters mark keys consumed; finish() rejects anything left
// over, naming the key and its line.
class KeyValueConfig {
 public:
  static KeyValueConfig load(const std::string& path);
  static KeyValueConfig from_string(const std::string& text, const std::string& origin = "<inline>");

  void set(const std::string& key, const std::string& value);  // flag overrides
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string take_string(const std::string& key, const std::string& fallback);
  double take_double(const std::string& key, double fallback);
  std::int64_t take_int(const std::string& key, std::int64_t fallback);
  std::uint64_t take_seed(const std::string& key, std::uint64_t fallback);

  // Required variants: missing key is a config error.
  std::string require_string(const std::string& key);

  void finish() const;  // throws ConfigError on unconsumed keys

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool consumed = false;
  };
  const Entry* find(const std::string& key) const;
  Entry* find(const std::string& key);

  std::string origin_ = "<empty>";
  std::map<std::string, Entry> values_;
};

}  // namespace vxf
