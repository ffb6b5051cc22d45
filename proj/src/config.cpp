#include "mocert/config.hpp"

#include <fstream>
#include <sstream>

namespace mocert {

DriftEnvelope ModulusConfig::drift() const {
  if (g_kind == "constant") return DriftEnvelope::constant(g0, beta);
  if (g_kind == "affine") return DriftEnvelope::affine(g0, g_slope, beta);
  throw ConfigError("unknown drift kind '" + g_kind + "'");
}

TimeDependentModulus ModulusConfig::build() const {
  if (kind == "thm2") return build_thm2_modulus(delta, std::nan(""), lambda0, C0);
  if (kind == "thm3") {
    Thm3Options opts;
    opts.delta = delta;
    opts.r = r;
    return build_thm3_modulus(alpha, beta, B, drift(), opts);
  }
  if (kind == "thm4") {
    Thm4Options opts;
    opts.delta = delta;
    opts.r = r;
    opts.C = C0;
    return build_thm4_modulus(alpha, beta, B, drift(),
                              regime == "supercritical" ? Thm4Regime::Supercritical
                                                        : Thm4Regime::Critical,
                              opts);
  }
  throw ConfigError("unknown modulus kind '" + kind + "'");
}

nlohmann::json ModulusConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  if (!std::isnan(delta)) j["delta"] = delta;
  if (!std::isnan(r)) j["r"] = r;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["lambda0"] = lambda0;
  j["C0"] = C0;
  j["B"] = B;
  j["regime"] = regime;
  j["g"] = {{"kind", g_kind}, {"g0", g0}, {"slope", g_slope}};
  return j;
}

ModulusConfig ModulusConfig::from_json(const nlohmann::json& j) {
  ModulusConfig c;
  c.kind = j.value("kind", c.kind);
  c.delta = j.value("delta", c.delta);
  c.r = j.value("r", c.r);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.lambda0 = j.value("lambda0", c.lambda0);
  c.C0 = j.value("C0", c.C0);
  c.B = j.value("B", c.B);
  c.regime = j.value("regime", c.regime);
  if (j.contains("g")) {
    c.g_kind = j["g"].value("kind", c.g_kind);
    c.g0 = j["g"].value("g0", c.g0);
    c.g_slope = j["g"].value("slope", c.g_slope);
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  c.data = nlohmann::json::parse(text);
  if (!c.data.is_object()) throw ConfigError("config root must be an object");
  return c;
}

std::string RunConfig::serialize() const { return data.dump(2); }

bool RunConfig::has(const std::string& section, const std::string& key) const {
  return data.contains(section) && data[section].contains(key);
}

double RunConfig::num(const std::string& section, const std::string& key,
                      double fallback) const {
  if (!has(section, key)) return fallback;
  return data[section][key].get<double>();
}

std::string RunConfig::str(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  return data[section][key].get<std::string>();
}

}  // namespace mocert
