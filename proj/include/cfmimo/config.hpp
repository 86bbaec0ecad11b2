#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfmimo/types.hpp"

namespace cfmimo {

/// Every scenario, power, noise, pilot and optimizer parameter.
///
/// Powers are linear watts, rate floors are bits/s/Hz, distances meters.
/// Defaults reproduce the reference simulation setup: 64 two-antenna APs in a
/// 1 km disc, 43 dBm total AP budget, 23 dBm UL budget, -104 dBm noise,
/// -110 dB residual SI, 5 dB Rician SI loop, 8 dB shadowing, 0.5 bits/s/Hz
/// floors and a 200-symbol coherence block.
struct SystemConfig {
  int num_aps = 64;
  int antennas_per_ap = 2;
  int num_dl = 10;
  int num_ul = 10;
  int pilot_len = 8;
  double radius = 1000.0;
  double bandwidth = 10e6;
  double noise_power = dbm_to_watts(-104.0);
  double rsi = db_to_linear(-110.0);
  double rician_factor_db = 5.0;
  double shadow_std_db = 8.0;
  double total_ap_power = dbm_to_watts(43.0);
  double ul_power_max = dbm_to_watts(23.0);
  double train_power = dbm_to_watts(23.0);
  double rate_floor_dl = 0.5;
  double rate_floor_ul = 0.5;
  int coherence = 200;
  int training = 16;
  // Non-positive means "derive as 1e-3 / num_aps".
  double assoc_threshold = 0.0;
  std::uint64_t rng_seed = 1;
  double sca_tol = 1e-3;
  double solver_tol = 1e-8;
  int sca_max_iter = 200;

  // Three-slope path loss (COST231-Hata offset) and geometry constants.
  double carrier_mhz = 1900.0;
  double ap_height = 15.0;
  double ue_height = 1.65;
  double pl_d0 = 10.0;
  double pl_d1 = 50.0;
  double min_distance = 1.0;
  // Average power gain of the SI loop before the residual-suppression factor.
  double si_gain = 1.0;

  int total_antennas() const { return num_aps * antennas_per_ap; }
  double ap_power_max() const { return total_ap_power / num_aps; }
  double threshold() const {
    return assoc_threshold > 0.0 ? assoc_threshold : 1e-3 / num_aps;
  }

  /// Throws Error(kInvalidArgument) naming the first violated invariant.
  /// The pilot-length bound against min{K, L} is not enforced here because
  /// sweeps deliberately cross it; see validate_strict.
  void validate() const;
  void validate_strict() const;
};

/// Names of all overridable fields, in declaration order.
const std::vector<std::string>& config_field_names();

/// Parses `value` into field `name`. Unknown names raise kInvalidArgument.
void set_config_field(SystemConfig& cfg, const std::string& name,
                      const std::string& value);
std::string get_config_field(const SystemConfig& cfg, const std::string& name);

/// Structured text (JSON object of field -> value); missing fields keep defaults.
SystemConfig load_config(const std::string& path);
SystemConfig parse_config(const std::string& text);
std::string dump_config(const SystemConfig& cfg);

/// FNV-1a over the canonical dump; used to stamp CSV headers.
std::uint64_t config_hash(const SystemConfig& cfg);

}  // namespace cfmimo
