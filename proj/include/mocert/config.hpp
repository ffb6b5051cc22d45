#pragma once

#include <string>

#include "json.hpp"
#include "mocert/moduli.hpp"

namespace mocert {

/// Declarative modulus + scaling specification, the on-disk form of the
/// construction inputs. Field names are part of the file contract.
struct ModulusConfig {
  std::string kind = "thm2";  // thm2 | thm3 | thm4
  double delta = std::numeric_limits<double>::quiet_NaN();
  double r = std::numeric_limits<double>::quiet_NaN();
  double alpha = 1.0;
  double beta = 0.5;
  double lambda0 = std::exp(1.0);
  double C0 = 1.0;
  double B = 1.0;
  std::string regime = "critical";  // thm4: critical | supercritical
  // drift envelope
  std::string g_kind = "constant";  // constant | affine
  double g0 = 1.0;
  double g_slope = 0.0;

  DriftEnvelope drift() const;
  TimeDependentModulus build() const;

  nlohmann::json to_json() const;
  static ModulusConfig from_json(const nlohmann::json& j);
};

/// Nested key/value run configuration (JSON on disk); command-line flags
/// override file values.
struct RunConfig {
  nlohmann::json data = nlohmann::json::object();

  static RunConfig load(const std::string& path);
  static RunConfig parse(const std::string& text);
  std::string serialize() const;

  bool has(const std::string& section, const std::string& key) const;
  double num(const std::string& section, const std::string& key, double fallback) const;
  std::string str(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
};

}  // namespace mocert
