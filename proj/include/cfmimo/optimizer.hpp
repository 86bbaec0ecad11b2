#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cfmimo/config.hpp"
#include "cfmimo/convex.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/scenario.hpp"
#include "cfmimo/types.hpp"
#include "cfmimo/zf.hpp"

namespace cfmimo {

/// Affine minorant of x^2 / y touching at (x0, y0): (2 x0/y0) x - (x0/y0)^2 y.
/// Throws kDomain when y0 <= 0.
double surrogate_fr(double x, double y, double x0, double y0);
/// Affine minorant of x^2 touching at x0: 2 x0 x - x0^2.
double surrogate_qu(double x, double x0);

/// Rate floor in bits/s/Hz expressed as an SINR floor, 2^R - 1.
double sinr_floor(double rate_bits);

/// ZF model rescaled for the inner approximation.
///
/// With s = sqrt(omega / sigma^2) and q = sqrt(p / P^max) the SINRs read
///
///   dl_k = a_k s_k^2 / (sum_k' e_dl(k,k') s_k'^2 + sum_l f_dl(k,l) q_l^2 + 1)
///   ul_l = b_l q_l^2 / (sum_l' g_ul(l,l') q_l'^2 + sum_k s_ul(l,k) s_k^2 + 1)
///
/// (the UL rows are divided by sigma^2 ||a_l||^2), the per-AP constraint is
/// sum_k q_ap(m,k) s_k^2 <= ap_budget and the UL box is q_l^2 <= 1.
struct ScaModel {
  RVector a_dl;
  RMatrix e_dl;
  RMatrix f_dl;
  RVector b_ul;
  RMatrix g_ul;
  RMatrix s_ul;
  RMatrix q_ap;
  double ap_budget = 0.0;
  double noise = 0.0;
  double ul_power_max = 0.0;
  double lambda_min_dl = 0.0;
  double lambda_min_ul = 0.0;

  int num_dl() const { return static_cast<int>(a_dl.size()); }
  int num_ul() const { return static_cast<int>(b_ul.size()); }
  int num_aps() const { return static_cast<int>(q_ap.rows()); }

  RVector dl_den(const RVector& s, const RVector& q) const;
  RVector ul_den(const RVector& s, const RVector& q) const;
  RVector dl_sinr(const RVector& s, const RVector& q) const;
  RVector ul_sinr(const RVector& s, const RVector& q) const;
};

/// In half-duplex mode the DL and UL run in separate halves of the block, so
/// the SI/IAI and CCI couplings are dropped.
ScaModel make_sca_model(const ZfModel& zf, const SystemConfig& cfg, bool half_duplex = false);

struct TraceRow {
  int iteration = 0;
  double objective_nats = 0.0;
  double max_residual = 0.0;
  int newton_steps = 0;
};

/// Optimizer iterate. omega and p are in watts; psi are the normalised
/// denominator proxies of ScaModel.
struct SolveState {
  RVector omega;
  RVector p;
  RVector lambda_dl;
  RVector lambda_ul;
  RVector psi_dl;
  RVector psi_ul;
  int iteration = 0;
  bool converged = false;
  std::vector<TraceRow> trace;
  std::string message;

  double objective() const;  // sum ln(1 + lambda), nats
};

/// Position of every optimisation variable: [s | q | lambda_dl | lambda_ul |
/// psi_dl | psi_ul].
struct VarLayout {
  int k = 0;
  int l = 0;
  int s(int i) const { return i; }
  int q(int i) const { return k + i; }
  int lambda_dl(int i) const { return k + l + i; }
  int lambda_ul(int i) const { return 2 * k + l + i; }
  int psi_dl(int i) const { return 2 * k + 2 * l + i; }
  int psi_ul(int i) const { return 3 * k + 2 * l + i; }
  int size() const { return 3 * (k + l); }
};

RVector pack_state(const SolveState& st, const ScaModel& model);
SolveState unpack_state(const RVector& x, const ScaModel& model);

/// Convexified subproblem around `st`: linear SINR minorants, convex
/// denominator bounds, per-AP and UL power limits, rate floors and sign
/// constraints. Throws kInfeasible when `st` has a non-positive psi.
ConvexProgram build_subproblem(const SolveState& st, const ScaModel& model);

struct SubproblemResult {
  SolveResult solver;
  SolveState state;
};

SubproblemResult solve_subproblem(const ConvexProgram& prog, const SolveState& start,
                                  const ScaModel& model, const SystemConfig& cfg);

/// Largest violation over the original constraints: lambda above the exact
/// SINR, rate floors, per-AP power (relative to the budget) and UL box.
double max_residual(const SolveState& st, const ScaModel& model);

struct InitResult {
  bool feasible = false;
  SolveState state;
  int attempts = 0;
  double dl_scale = 1.0;
  double ul_scale = 1.0;
  std::vector<int> dl_short;  // UEs below their floor at the unscaled point
  std::vector<int> ul_short;
  std::string message;
};

/// Uniform omega at half of the tightest per-AP budget and p = P^max / 2,
/// scaled down on a geometric grid until every floor holds strictly. Falls
/// back to the analytic center of the floor constraints, which are linear in
/// (omega, p) under ZF, before giving up.
InitResult initialize_feasible(const ScaModel& model);

/// Inner-approximation loop. Stops when the objective gain drops below
/// cfg.sca_tol or after cfg.sca_max_iter subproblems.
SolveState run_sca(const SolveState& init, const ScaModel& model, const SystemConfig& cfg);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

struct Association {
  AssocMatrix alpha;
  RMatrix r_sp;
};

/// r_sp(k, m) = |h^_km w_km|^2 / (|h^_k w_k|^2 + 1e-6) with the powers in
/// units of the noise power, and alpha = r_sp > threshold.
Association associate(const CMatrix& w, const EstimateSet& es, const SystemConfig& cfg);

struct OptimizeOptions {
  bool half_duplex = false;
  int max_assoc_rounds = 5;
  bool refine = true;
};

struct OptimizeResult {
  bool feasible = false;
  bool converged = false;
  bool refined = false;
  bool forced = false;  // some pruned pairs were restored to keep ZF solvable
  int assoc_rounds = 0;
  SolveState state;
  SolveState first_pass;
  ZfOperators zf;
  Association assoc;
  AssocMatrix forced_pairs;
  BeamformerSet beams;
  std::string message;
};

/// One SCA pass with full association followed by refinement.
OptimizeResult optimize_zf(const EstimateSet& design, const ChannelSet& ch,
                           const SystemConfig& cfg, const OptimizeOptions& opts = {});

/// Repeats the SCA with DL ZF restricted to the association until associate
/// reproduces it (or the round cap is hit). Used by optimize_zf.
void refine_with_association(OptimizeResult& run, const EstimateSet& design,
                             const ChannelSet& ch, const SystemConfig& cfg,
                             const OptimizeOptions& opts);

struct SeReport {
  double nats = 0.0;
  double bits = 0.0;
  RVector dl_sinr;
  RVector ul_sinr;
  RVector dl_rate_bits;
  RVector ul_rate_bits;
};

/// Sum of ln(1 + SINR) over the general robust SINRs. In half-duplex mode
/// the couplings are dropped and the sum is halved.
SeReport spectral_efficiency(const BeamformerSet& beams, const AssocMatrix& alpha,
                             const EstimateSet& es, const ChannelSet& ch,
                             const SystemConfig& cfg, bool half_duplex = false);
/// Same on the true channels.
SeReport spectral_efficiency_true(const BeamformerSet& beams, const AssocMatrix& alpha,
                                  const ChannelSet& ch, const SystemConfig& cfg,
                                  bool half_duplex = false);

/// (tau_c - tau_t) / tau_c times f_se. Throws kDomain unless 0 <= tau_t < tau_c.
double effective_se(double f_se, int coherence, int training);
double effective_se(double f_se, const SystemConfig& cfg);

}  // namespace cfmimo
