#pragma once

// Flat `key = value` configuration text and its application to RunConfig.
// Keys mirror the command-line flags (with or without leading dashes; '-' and
// '_' are interchangeable). '#' starts a comment.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bayesid/errors.hpp"
#include "bayesid/pipeline.hpp"

namespace bayesid {

using Settings = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string normalize_key(std::string_view key) {
  std::string k = trim(key);
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  for (char& ch : k)
    if (ch == '-') ch = '_';
  return k;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (trim(std::string_view(v).substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("config: '" + key + "' expects a number, got '" + v + "'");
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto t = trim(v);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidArgument("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto t = trim(v);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidArgument("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

}  // namespace detail

inline Settings parse_settings(std::istream& in, const std::string& source = "config") {
  Settings s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const auto key = detail::normalize_key(std::string_view(line).substr(0, eq));
    if (key.empty()) throw InvalidArgument(source + ":" + std::to_string(lineno) + ": empty key");
    s[key] = detail::trim(std::string_view(line).substr(eq + 1));
  }
  return s;
}

inline Settings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  return parse_settings(in, path.string());
}

/// "start:stop:count", log-spaced from start to stop inclusive.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(detail::trim(item));
  if (parts.size() != 3) throw InvalidArgument("grid: expected start:stop:count, got '" + text + "'");
  const double a = detail::parse_double("grid", parts[0]);
  const double b = detail::parse_double("grid", parts[1]);
  const long long n = detail::parse_integer("grid", parts[2]);
  if (n < 1 || n > 100000) throw InvalidArgument("grid: count must be in 1..100000");
  if (!(a > b) && n > 1) throw InvalidArgument("grid: start must exceed stop (descending grid)");
  return log_grid(a, b, static_cast<int>(n));
}

/// Applies settings onto `cfg`. `system` is applied first so explicit
/// `params` / `x0` override its defaults. Unknown keys are rejected; `out`
/// and `config` are left for the caller.
inline void apply_settings(RunConfig& cfg, const Settings& s) {
  using namespace detail;
  if (auto it = s.find("system"); it != s.end()) cfg.set_system(parse_system(it->second));
  for (const auto& [key, v] : s) {
    if (key == "system" || key == "out" || key == "config") continue;
    if (key == "T") cfg.T = parse_double(key, v);
    else if (key == "dt") cfg.dt = parse_double(key, v);
    else if (key == "eps") cfg.noise.scale = parse_double(key, v);
    else if (key == "noise") cfg.noise.family = parse_noise(v);
    else if (key == "seed") cfg.noise.seed = parse_unsigned(key, v);
    else if (key == "alphabet") cfg.library = parse_alphabet(v);
    else if (key == "algo") cfg.algo = parse_algorithm(v);
    else if (key == "grid") cfg.grid = parse_grid(v);
    else if (key == "eval_point") cfg.eval = parse_eval_point(v);
    else if (key == "rtol") cfg.integrator.rtol = parse_double(key, v);
    else if (key == "atol") cfg.integrator.atol = parse_double(key, v);
    else if (key == "alpha_eps") cfg.alpha_eps = parse_double(key, v);
    else if (key == "alpha_xi") cfg.alpha_xi = parse_double(key, v);
    else if (key == "e_xi") cfg.e_xi = parse_double(key, v);
    else if (key == "inner_tol") cfg.fit.tol = parse_double(key, v);
    else if (key == "inner_max_iter") cfg.fit.max_iter = static_cast<int>(parse_integer(key, v));
    else if (key == "lasso_tol") cfg.lasso_tol = parse_double(key, v);
    else if (key == "lasso_max_iter") cfg.lasso_max_iter = static_cast<int>(parse_integer(key, v));
    else if (key == "stlsq_max_iter") cfg.stlsq_max_iter = static_cast<int>(parse_integer(key, v));
    else if (key == "select_index") cfg.select_index = static_cast<std::size_t>(parse_unsigned(key, v));
    else if (key == "x0") {
      const auto x = parse_list(key, v);
      if (x.size() != 3) throw InvalidArgument("config: x0 needs 3 comma-separated values");
      cfg.x0 = Eigen::Map<const Vector>(x.data(), 3);
    } else if (key == "params") {
      const auto p = parse_list(key, v);
      cfg.params = params_from_vector(cfg.system, p);
    } else {
      throw InvalidArgument("config: unknown key '" + key + "'");
    }
  }
}

}  // namespace bayesid
