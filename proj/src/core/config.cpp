#include "cfmimo/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace cfmimo {

Rng make_stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

namespace {

struct FieldAccess {
  std::function<void(SystemConfig&, const nlohmann::json&)> set;
  std::function<nlohmann::json(const SystemConfig&)> get;
};

template <typename T>
FieldAccess access(T SystemConfig::*member) {
  return {[member](SystemConfig& c, const nlohmann::json& j) { c.*member = j.get<T>(); },
          [member](const SystemConfig& c) { return nlohmann::json(c.*member); }};
}

const std::vector<std::pair<std::string, FieldAccess>>& field_table() {
  static const std::vector<std::pair<std::string, FieldAccess>> table = {
      {"num_aps", access(&SystemConfig::num_aps)},
      {"antennas_per_ap", access(&SystemConfig::antennas_per_ap)},
      {"num_dl", access(&SystemConfig::num_dl)},
      {"num_ul", access(&SystemConfig::num_ul)},
      {"pilot_len", access(&SystemConfig::pilot_len)},
      {"radius", access(&SystemConfig::radius)},
      {"bandwidth", access(&SystemConfig::bandwidth)},
      {"noise_power", access(&SystemConfig::noise_power)},
      {"rsi", access(&SystemConfig::rsi)},
      {"rician_factor_db", access(&SystemConfig::rician_factor_db)},
      {"shadow_std_db", access(&SystemConfig::shadow_std_db)},
      {"total_ap_power", access(&SystemConfig::total_ap_power)},
      {"ul_power_max", access(&SystemConfig::ul_power_max)},
      {"train_power", access(&SystemConfig::train_power)},
      {"rate_floor_dl", access(&SystemConfig::rate_floor_dl)},
      {"rate_floor_ul", access(&SystemConfig::rate_floor_ul)},
      {"coherence", access(&SystemConfig::coherence)},
      {"training", access(&SystemConfig::training)},
      {"assoc_threshold", access(&SystemConfig::assoc_threshold)},
      {"rng_seed", access(&SystemConfig::rng_seed)},
      {"sca_tol", access(&SystemConfig::sca_tol)},
      {"solver_tol", access(&SystemConfig::solver_tol)},
      {"sca_max_iter", access(&SystemConfig::sca_max_iter)},
      {"carrier_mhz", access(&SystemConfig::carrier_mhz)},
      {"ap_height", access(&SystemConfig::ap_height)},
      {"ue_height", access(&SystemConfig::ue_height)},
      {"pl_d0", access(&SystemConfig::pl_d0)},
      {"pl_d1", access(&SystemConfig::pl_d1)},
      {"min_distance", access(&SystemConfig::min_distance)},
      {"si_gain", access(&SystemConfig::si_gain)},
  };
  return table;
}

const FieldAccess& find_field(const std::string& name) {
  for (const auto& [key, acc] : field_table()) {
    if (key == name) return acc;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown config field '" + name + "'");
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "invalid config: " + msg);
}

}  // namespace

void SystemConfig::validate() const {
  require(num_aps >= 1, "num_aps must be >= 1");
  require(antennas_per_ap >= 1, "antennas_per_ap must be >= 1");
  require(num_dl >= 0 && num_ul >= 0, "UE counts must be >= 0");
  require(pilot_len >= 1, "pilot_len must be >= 1");
  require(radius >= 0.0, "radius must be >= 0");
  require(noise_power > 0.0, "noise_power must be > 0");
  require(rsi >= 0.0 && rsi < 1.0, "rsi must lie in [0, 1)");
  require(total_ap_power > 0.0 && ul_power_max > 0.0 && train_power > 0.0,
          "all powers must be > 0");
  require(rate_floor_dl >= 0.0 && rate_floor_ul >= 0.0, "rate floors must be >= 0");
  require(coherence > 0 && training >= 0 && training < coherence,
          "training must satisfy 0 <= training < coherence");
  require(sca_tol > 0.0 && solver_tol > 0.0, "tolerances must be > 0");
  require(sca_max_iter >= 1, "sca_max_iter must be >= 1");
  require(pl_d0 > 0.0 && pl_d1 > pl_d0, "path-loss breakpoints need 0 < d0 < d1");
  require(min_distance > 0.0, "min_distance must be > 0");
  require(si_gain >= 0.0, "si_gain must be >= 0");
}

void SystemConfig::validate_strict() const {
  validate();
  require(pilot_len < std::min(num_dl, num_ul), "pilot_len must be < min(num_dl, num_ul)");
}

const std::vector<std::string>& config_field_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [key, acc] : field_table()) out.push_back(key);
    return out;
  }();
  return names;
}

void set_config_field(SystemConfig& cfg, const std::string& name,
                      const std::string& value) {
  const auto& acc = find_field(name);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot parse value '" + value + "' for field '" + name + "'");
  }
  try {
    acc.set(cfg, parsed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad value for field '" + name + "': " + e.what());
  }
}

std::string get_config_field(const SystemConfig& cfg, const std::string& name) {
  return find_field(name).get(cfg).dump();
}

SystemConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  SystemConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    const auto& acc = find_field(key);
    try {
      acc.set(cfg, value);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, "bad value for field '" + key + "': " + e.what());
    }
  }
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const SystemConfig& cfg) {
  nlohmann::ordered_json out;
  for (const auto& [key, acc] : field_table()) out[key] = acc.get(cfg);
  return out.dump(2);
}

std::uint64_t config_hash(const SystemConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump_config(cfg)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace cfmimo
