#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cfmimo/config.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/optimizer.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

enum class PilotStrategy { kHeapFd, kHeapHd, kRandFd, kRandHd };
enum class Transmission { kZfRd, kZfNrd, kMrtMrcRd, kPerfectCsiZf };
enum class Duplex { kFull, kHalf };

/// Pilot strategy, transmission scheme and duplex mode, written as
/// "heap_fd+zf_rd" with an optional "+fd"/"+hd" suffix. The duplex defaults to
/// the one implied by the pilot strategy; the transmission defaults to zf_rd.
struct Scheme {
  PilotStrategy pilots = PilotStrategy::kHeapFd;
  Transmission tx = Transmission::kZfRd;
  Duplex duplex = Duplex::kFull;

  std::string name() const;
  /// Training symbols: 2 tau in FD (two phases), tau in HD.
  int training_length(int tau) const { return duplex == Duplex::kFull ? 2 * tau : tau; }
};

Scheme parse_scheme(const std::string& text);
/// Comma-separated list of schemes.
std::vector<Scheme> parse_schemes(const std::string& text);

/// Random streams of one trial; every scheme draws the same topology,
/// fading, channels and training noise for a given (seed, trial).
enum Stream : std::uint64_t {
  kStreamTopology = 0,
  kStreamLargeScale = 1,
  kStreamChannels = 2,
  kStreamPilots = 3,
  kStreamTraining = 4,
};

struct TrialRecord {
  std::string scheme;
  int num_dl = 0;
  int num_ul = 0;
  int tau = 0;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> nmse_dl_db;
  std::vector<double> nmse_ul_db;
  double nmse_linear = 0.0;  // mean over UEs
  double nmse_db = 0.0;
  double nmse_max_db = 0.0;
  double f_se_bits = 0.0;
  double effective_se = 0.0;
  double true_f_se_bits = 0.0;
  double first_pass_se_bits = 0.0;
  double overhead = 1.0;
  bool feasible = false;    // the design problem had a solution
  bool floors_met = false;  // evaluated rates reach the floors
  bool converged = false;
  bool refined = false;
  bool forced = false;
  int sca_iterations = 0;
  int assoc_rounds = 0;
  std::vector<double> ap_power;  // watts
  double assoc_density = 0.0;
  std::string message;
};

/// Everything a single run produces, for exports beyond the record.
struct TrialDetail {
  TrialRecord record;
  Topology topo;
  LargeScale ls;
  TrainingPlan plan;
  EstimateSet es;
  OptimizeResult run;
  BeamformerSet beams;
  AssocMatrix alpha;
};

/// Full pipeline for one (config, scheme, trial). Infeasibility and ZF rank
/// failures are recorded, not thrown. With estimate_only the transmission
/// stage is skipped.
TrialDetail run_trial_detailed(const SystemConfig& cfg, const Scheme& scheme,
                               std::uint64_t trial, bool estimate_only = false);
TrialRecord run_trial(const SystemConfig& cfg, const Scheme& scheme, std::uint64_t trial,
                      bool estimate_only = false);

struct SweepSpec {
  std::vector<int> ue_counts;  // K = L per point
  std::vector<int> taus;
  std::vector<Scheme> schemes;
  int trials = 1;
  int threads = 0;  // 0 = hardware concurrency
};

/// Records in grid order (ue_count, tau, scheme, trial) regardless of the
/// number of threads.
std::vector<TrialRecord> run_grid(const SystemConfig& cfg, const SweepSpec& spec,
                                  bool estimate_only);

std::string csv_header_comment(const SystemConfig& cfg, const std::string& kind);

/// scheme,K,L,tau,trial,seed,nmse_db,nmse_max_db,nmse_linear
void write_nmse_csv(std::ostream& out, const SystemConfig& cfg,
                    const std::vector<TrialRecord>& records);
/// One row per trial.
void write_se_csv(std::ostream& out, const SystemConfig& cfg,
                  const std::vector<TrialRecord>& records);
/// Per grid point: feasible count, infeasible fraction, means over feasible
/// trials and a 95% half-width.
void write_se_summary_csv(std::ostream& out, const SystemConfig& cfg,
                          const std::vector<TrialRecord>& records);
/// record,ap_index,ue_index,x,y,served_count,r_sp,alpha with "ap", "ue" and
/// "link" rows.
void write_service_map_csv(std::ostream& out, const SystemConfig& cfg,
                           const TrialDetail& detail);

std::vector<TrialRecord> nmse_sweep(const SystemConfig& cfg, const SweepSpec& spec,
                                    std::ostream& out);
std::vector<TrialRecord> se_sweep(const SystemConfig& cfg, const SweepSpec& spec,
                                  std::ostream& out, std::ostream* summary);
TrialDetail service_map(const SystemConfig& cfg, const Scheme& scheme, std::uint64_t trial,
                        std::ostream& out);

}  // namespace cfmimo
