#pragma once

// Flat key-value parameter files.
//
//   # comment
//   omega_m_hz = 2e9
//   nbar_th    = 0.25
//
// Frequencies are ordinary (Hz) in files and angular (rad/s) in SystemParams;
// the conversion happens only here.

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "qnd/constants.hpp"
#include "qnd/errors.hpp"
#include "qnd/system.hpp"

namespace qnd {

using ConfigMap = std::map<std::string, double>;

inline constexpr std::array<std::string_view, 13> kConfigKeys = {
    "omega_m_hz", "gamma_m_hz", "kappa_hz",    "kappa_e_hz", "delta_hz",   "g1_hz",  "g2_hz",
    "temperature_k", "nbar_th", "nbar_photon", "power_w",    "omega_d_hz", "mass_kg"};

inline bool is_config_key(std::string_view key) {
  return std::find(kConfigKeys.begin(), kConfigKeys.end(), key) != kConfigKeys.end();
}

inline std::string valid_config_keys() {
  std::string out;
  for (auto k : kConfigKeys) {
    if (!out.empty()) out += ", ";
    out += k;
  }
  return out;
}

namespace detail {
inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}
}  // namespace detail

inline ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = detail::trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key{detail::trim(sv.substr(0, eq))};
    const auto value = detail::trim(sv.substr(eq + 1));
    if (!is_config_key(key)) throw ConfigError(key, "unknown key (valid keys: " + valid_config_keys() + ")");
    if (out.count(key)) throw ConfigError(key, "duplicate key");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v))
      throw ConfigError(key, "not a finite number: '" + std::string(value) + "'");
    out.emplace(key, v);
  }
  return out;
}

inline ConfigMap load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", "cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

/// Builds validated SystemParams. kappa_e defaults to kappa/2 (critical
/// coupling) when absent.
inline SystemParams resolve_config(const ConfigMap& cfg) {
  auto require = [&](const char* key) {
    auto it = cfg.find(key);
    if (it == cfg.end()) throw ConfigError(key, "missing required key");
    return it->second;
  };
  auto optional = [&](const char* key) -> std::optional<double> {
    auto it = cfg.find(key);
    if (it == cfg.end()) return std::nullopt;
    return it->second;
  };
  auto wrap = [](const char* key, auto&& fn) {
    try {
      return fn();
    } catch (const DomainError& e) {
      throw ConfigError(key, e.what());
    }
  };

  SystemParams p;
  p.omega_m = hz_to_rad(require("omega_m_hz"));
  p.gamma_m = hz_to_rad(require("gamma_m_hz"));
  p.kappa = hz_to_rad(require("kappa_hz"));
  p.kappa_e = optional("kappa_e_hz") ? hz_to_rad(*optional("kappa_e_hz")) : 0.5 * p.kappa;
  p.delta = hz_to_rad(require("delta_hz"));
  p.g1 = hz_to_rad(require("g1_hz"));
  p.g2 = hz_to_rad(require("g2_hz"));
  if (p.g1 < 0.0) throw ConfigError("g1_hz", "must be >= 0 (rates depend on g1^2 only)");
  if (p.g2 < 0.0) throw ConfigError("g2_hz", "must be >= 0 (rates depend on g2^2 only)");
  if (!(p.omega_m > 0.0)) throw ConfigError("omega_m_hz", "must be > 0");

  const auto t = optional("temperature_k");
  const auto n = optional("nbar_th");
  if (t.has_value() == n.has_value()) throw ConfigError("nbar_th", "give exactly one of temperature_k, nbar_th");
  p.bath = t ? wrap("temperature_k", [&] { return Bath::from_temperature(*t, p.omega_m); })
             : wrap("nbar_th", [&] { return Bath::from_occupancy(*n, p.omega_m); });

  const auto photons = optional("nbar_photon");
  const auto power = optional("power_w");
  const auto omega_d = optional("omega_d_hz");
  if (photons) {
    if (power || omega_d) throw ConfigError("nbar_photon", "give either nbar_photon or power_w + omega_d_hz, not both");
    p.drive = wrap("nbar_photon", [&] { return Drive::photons(*photons); });
  } else {
    if (!power) throw ConfigError("power_w", "missing drive: give nbar_photon or power_w + omega_d_hz");
    if (!omega_d) throw ConfigError("omega_d_hz", "required with power_w");
    p.drive = wrap("power_w", [&] { return Drive::power(*power, hz_to_rad(*omega_d)); });
  }
  p.mass_kg = optional("mass_kg");

  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError("", e.what());
  }
  return p;
}

}  // namespace qnd
