#pragma once

#include <vector>

#include "cfmimo/config.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/scenario.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

/// Orthonormal pilot columns; the identity is used since only the 0/1 inner
/// products between assigned pilots enter the estimator.
struct PilotBook {
  CMatrix xi;
  explicit PilotBook(int tau) : xi(CMatrix::Identity(tau, tau)) {}
};

/// Received pilot observations.
///
/// `ap_ul_phase` / `ap_dl_phase` are tau x N (column block m is Y_m for AP m)
/// for the phase in which UL / DL UEs transmit; they coincide in shared-phase
/// (HD) training. Column k of `dl_cci` is y_k, the UL pilots overheard by DL
/// UE k; it is empty in shared-phase training.
struct TrainingSignals {
  CMatrix ap_ul_phase;
  CMatrix ap_dl_phase;
  CMatrix dl_cci;
  bool shared_phase = false;
};

/// LMMSE estimates and per-link error variances (linear).
struct EstimateSet {
  CMatrix h_dl_hat;   // K x N
  CMatrix h_ul_hat;   // N x L
  CMatrix g_cci_hat;  // K x L
  RMatrix eps_dl;     // K x M
  RMatrix eps_ul;     // M x L
  RMatrix eps_cci;    // K x L
};

TrainingSignals received_training(const ChannelSet& ch, const TrainingPlan& plan,
                                  const SystemConfig& cfg, Rng& rng);

/// Applies the LMMSE coefficient sqrt(tau p) beta / (sum of co-pilot
/// tau p beta' + sigma^2) to the pilot-matched observation. Fills only the
/// estimate fields of the returned set.
EstimateSet lmmse_estimate(const TrainingSignals& y, const TrainingPlan& plan,
                           const LargeScale& ls, const SystemConfig& cfg);

/// Closed-form error variances eps = beta (1 - tau p beta / denominator).
/// Fills only the eps fields of the returned set.
EstimateSet error_variance(const LargeScale& ls, const TrainingPlan& plan,
                           const SystemConfig& cfg);

/// Training, estimation and error variances in one call.
EstimateSet estimate_channels(const ChannelSet& ch, const LargeScale& ls,
                              const TrainingPlan& plan, const SystemConfig& cfg, Rng& rng);

struct NmseReport {
  std::vector<double> dl;  // linear, per DL UE
  std::vector<double> ul;  // linear, per UL UE
  double mean_linear = 0.0;
  double max_linear = 0.0;
  double mean_db() const { return linear_to_db(mean_linear); }
  double max_db() const { return linear_to_db(max_linear); }
};

/// Per-UE NMSE_j = sum_m N_m eps_mj / sum_m N_m beta_mj over the main DL and
/// UL links; mean and max are taken over all K + L UEs.
NmseReport nmse(const EstimateSet& es, const LargeScale& ls, const SystemConfig& cfg);

}  // namespace cfmimo
