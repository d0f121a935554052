#include "mfwalk/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfwalk/errors.hpp"

namespace mfw {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

}  // namespace

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidInput("not a number: '" + text + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& text) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidInput("not an integer: '" + text + "'");
  }
  return v;
}

std::vector<double> parse_grid(const std::string& text) {
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw InvalidInput("range must be start:stop:step, got '" + text + "'");
    const double start = parse_double(parts[0]);
    const double stop = parse_double(parts[1]);
    const double step = parse_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw InvalidInput("range needs step > 0 and stop >= start");
    const auto count = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 1'000'000) throw InvalidInput("range has too many points");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(t, ',')) {
    if (!p.empty()) out.push_back(parse_double(p));
  }
  if (out.empty()) throw InvalidInput("empty grid '" + text + "'");
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  for (double v : parse_grid(text)) {
    if (v != std::floor(v)) throw InvalidInput("expected integers in '" + text + "'");
    out.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidInput(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const std::string& KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput(origin_ + ": missing key '" + key + "'");
  return it->second;
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const { return parse_double(get(key)); }

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key) const { return parse_int(get(key)); }

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> KeyValueConfig::get_grid(const std::string& key) const {
  return parse_grid(get(key));
}

ModelSpec model_from_config(const KeyValueConfig& cfg, const std::string& base_dir) {
  ModelSpec m;
  m.n_particles = cfg.get_int("n");
  m.delta = cfg.get_double("delta");
  m.lambda = cfg.get_double("lambda");
  const std::string kernel = cfg.find("kernel").value_or("small_jump");
  if (kernel == "small_jump") {
    m.kernel = Kernel::small_jump();
  } else if (kernel == "jump_to_lower") {
    m.kernel = Kernel::jump_to_lower();
  } else if (kernel.rfind("tabulated:", 0) == 0) {
    std::filesystem::path p = trim(kernel.substr(10));
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    m.kernel = Kernel::from_csv(p.string());
  } else {
    throw InvalidInput("unknown kernel '" + kernel + "'");
  }
  m.validate();
  return m;
}

ParticleState parse_state(const std::string& text, std::int64_t n) {
  ParticleState s;
  for (const auto& p : split(trim(text), ',')) {
    if (!p.empty()) s.positions.push_back(parse_int(p));
  }
  if (static_cast<std::int64_t>(s.size()) != n) {
    throw InvalidInput("initial state has " + std::to_string(s.size()) + " coordinates, expected " +
                       std::to_string(n));
  }
  for (Position x : s.positions) {
    if (x < 0) throw InvalidInput("initial positions must be nonnegative");
  }
  return s;
}

}  // namespace mfw
