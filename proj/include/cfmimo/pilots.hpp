#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "cfmimo/config.hpp"
#include "cfmimo/scenario.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

enum class UeSet { kDownlink, kUplink, kJoint };

/// Per-UE training weights beta~_j = sum_m N_m tau p_tr beta_mj.
/// kJoint lists the K DL UEs first, then the L UL UEs.
struct WeightVector {
  std::vector<double> beta_tilde;
  std::size_t size() const { return beta_tilde.size(); }
};

/// Pilot index per UE plus the accumulated weight on every pilot.
struct PilotAssignment {
  int tau = 0;
  std::vector<int> pilot_of;   // -1 while unassigned
  std::vector<double> loads;   // sum of beta~ over the UEs on each pilot
  std::size_t heap_work = 0;   // sift steps spent by the heap algorithm

  std::size_t num_ues() const { return pilot_of.size(); }
  bool complete() const;
  /// tau x U binary matrix with a single 1 per assigned column.
  RMatrix upsilon() const;
  /// True when UEs i and j hold the same pilot.
  bool shares(std::size_t i, std::size_t j) const {
    return pilot_of[i] >= 0 && pilot_of[i] == pilot_of[j];
  }
};

WeightVector effective_weights(const LargeScale& ls, const SystemConfig& cfg, UeSet set);

/// Heap-based assignment.
///
/// UEs leave a max-heap in non-increasing beta~ order (ties: lower index
/// first). The first tau of them receive the distinct pilots
/// `initial_pilots[0..tau)`; every later UE takes the pilot at the root of a
/// min-heap of pilot loads (ties: lower pilot index) and the root is replaced
/// by its increased load. With U < tau every UE gets a distinct pilot.
PilotAssignment assign_pilots_heap(const WeightVector& w, int tau,
                                   std::span<const int> initial_pilots);
/// Same, with a seeded uniform permutation for the initial pilots.
PilotAssignment assign_pilots_heap(const WeightVector& w, int tau, Rng& rng);

/// Each UE independently uniform over the tau pilots.
PilotAssignment assign_pilots_random(std::size_t num_ues, int tau, Rng& rng,
                                     const WeightVector* w = nullptr);

/// max over UEs of the total weight sharing that UE's pilot.
double assignment_cost(const PilotAssignment& a, const WeightVector& w);

struct OptimalAssignment {
  double cost = 0.0;
  PilotAssignment assignment;
};

/// Exhaustive minimiser of assignment_cost; requires tau^U <= 1e7.
OptimalAssignment brute_force_optimal(const WeightVector& w, int tau);

/// Assignments for both UE populations. In HD training all K + L UEs share a
/// single phase, so DL and UL UEs on the same pilot contaminate each other.
struct TrainingPlan {
  PilotAssignment dl;
  PilotAssignment ul;
  bool shared_phase = false;
};

/// Two independent heap runs: U = L for the UL phase, U = K for the DL phase.
TrainingPlan heap_fd_strategy(const LargeScale& ls, const SystemConfig& cfg, Rng& rng);
/// One heap run over the K + L UEs.
TrainingPlan heap_hd_strategy(const LargeScale& ls, const SystemConfig& cfg, Rng& rng);
TrainingPlan random_fd_strategy(const LargeScale& ls, const SystemConfig& cfg, Rng& rng);
TrainingPlan random_hd_strategy(const LargeScale& ls, const SystemConfig& cfg, Rng& rng);

/// Columns: ue_index, pilot_index, beta_tilde, final_load.
void write_assignment_csv(std::ostream& out, const PilotAssignment& a, const WeightVector& w);

}  // namespace cfmimo
