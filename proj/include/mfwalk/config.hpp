#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfwalk/model.hpp"

namespace mfw {

/// Flat `key = value` text configuration. `#` starts a comment; keys are
/// case-sensitive; a repeated key keeps the last value.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

  /// Comma list `a,b,c` or inclusive range `start:stop:step`.
  std::vector<double> get_grid(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

double parse_double(const std::string& text);
std::int64_t parse_int(const std::string& text);
/// Comma list or inclusive `start:stop:step` range.
std::vector<double> parse_grid(const std::string& text);
std::vector<std::int64_t> parse_int_list(const std::string& text);

/// Model from keys `n`, `delta`, `lambda`, `kernel` (small_jump,
/// jump_to_lower, tabulated:<path>). Relative table paths resolve
/// against `base_dir` when given.
ModelSpec model_from_config(const KeyValueConfig& cfg, const std::string& base_dir = "");

/// Parses `x1,x2,...`; the result has exactly `n` coordinates.
ParticleState parse_state(const std::string& text, std::int64_t n);

}  // namespace mfw
