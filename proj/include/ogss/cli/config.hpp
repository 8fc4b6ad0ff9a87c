#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ogss/util/error.hpp"

namespace ogss::cli {

inline constexpr int kConfigFormatVersion = 1;

enum class ValueKind { Bool, Int, Double, String, Path, DoubleList, IntList, Choice };

struct KeySpec {
  std::string name;
  ValueKind kind;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // ValueKind::Choice
  // Left out of fingerprints and manifests (where and how fast, not what).
  bool runtime_only = false;
};

// Every recognized key, in documentation order.
const std::vector<KeySpec>& config_schema();
const KeySpec* find_key(const std::string& name);

// Flat key=value settings. Values are checked against the schema when set
// and stored in canonical text form.
class RunConfig {
 public:
  RunConfig();

  // Throws ConfigError for unknown keys and malformed values.
  void set(const std::string& key, const std::string& value);

  // "# comment" lines and blank lines are ignored; other lines are
  // "key = value". The file must declare format_version, and it must match.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text, const std::string& source);

  const std::string& raw(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::string get_string(const std::string& key) const { return raw(key); }
  std::filesystem::path get_path(const std::string& key) const { return raw(key); }
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<long> get_ints(const std::string& key) const;

  // Schema-ordered "key = value" lines, loadable with load_text.
  std::string dump() const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // Hex SHA-256 prefix over the output-relevant keys plus `extra`.
  std::string fingerprint(const std::string& extra = {}) const;

 private:
  std::map<std::string, std::string> values_;
};

// Canonical value text, or ConfigError naming the key.
std::string canonical_value(const KeySpec& spec, const std::string& value);

// Hex SHA-256 of a byte string and of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace ogss::cli
