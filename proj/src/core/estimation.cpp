#include "cfmimo/estimation.hpp"

#include <algorithm>
#include <cmath>

namespace cfmimo {

namespace {

// One transmitting UE inside a training phase.
struct Member {
  bool dl;
  Eigen::Index idx;
  int pilot;
};

std::vector<Member> phase_members(const TrainingPlan& plan, bool dl_phase) {
  std::vector<Member> out;
  auto add = [&](const PilotAssignment& a, bool dl) {
    for (std::size_t j = 0; j < a.num_ues(); ++j) {
      out.push_back({dl, static_cast<Eigen::Index>(j), a.pilot_of[j]});
    }
  };
  if (plan.shared_phase || dl_phase) add(plan.dl, true);
  if (plan.shared_phase || !dl_phase) add(plan.ul, false);
  return out;
}

double beta_of(const LargeScale& ls, const Member& u, Eigen::Index m) {
  return u.dl ? ls.beta_dl(u.idx, m) : ls.beta_ul(m, u.idx);
}

void require_complete(const TrainingPlan& plan) {
  if (!plan.dl.complete() || !plan.ul.complete()) {
    throw Error(ErrorCode::kInvalidArgument, "estimation: pilot assignment is incomplete");
  }
}

// Row-form channel of a member over all N antennas.
CRowVector channel_row(const ChannelSet& ch, const Member& u) {
  return u.dl ? CRowVector(ch.h_dl.row(u.idx)) : CRowVector(ch.h_ul.col(u.idx).adjoint());
}

CMatrix phase_signal(const ChannelSet& ch, const std::vector<Member>& members,
                     const SystemConfig& cfg, Eigen::Index n, Rng& rng) {
  const double amp = std::sqrt(cfg.pilot_len * cfg.train_power);
  const double noise_amp = std::sqrt(cfg.noise_power);
  CMatrix y(cfg.pilot_len, n);
  for (Eigen::Index r = 0; r < y.rows(); ++r)
    for (Eigen::Index c = 0; c < n; ++c) y(r, c) = noise_amp * complex_normal(rng);
  for (const auto& u : members) y.row(u.pilot) += amp * channel_row(ch, u);
  return y;
}

// Co-pilot denominator sum_{j'} tau p beta_mj' |phi_j^H phi_j'|^2 + sigma^2.
double denominator(const LargeScale& ls, const std::vector<Member>& members, const Member& u,
                   Eigen::Index m, const SystemConfig& cfg) {
  const double tp = cfg.pilot_len * cfg.train_power;
  double d = cfg.noise_power;
  for (const auto& v : members) {
    if (v.pilot == u.pilot) d += tp * beta_of(ls, v, m);
  }
  return d;
}

double cci_denominator(const LargeScale& ls, const PilotAssignment& ul, Eigen::Index k,
                       Eigen::Index l, const SystemConfig& cfg) {
  const double tp = cfg.pilot_len * cfg.train_power;
  double d = cfg.noise_power;
  for (std::size_t lp = 0; lp < ul.num_ues(); ++lp) {
    if (ul.pilot_of[lp] == ul.pilot_of[static_cast<std::size_t>(l)])
      d += tp * ls.beta_cci(k, static_cast<Eigen::Index>(lp));
  }
  return d;
}

}  // namespace

TrainingSignals received_training(const ChannelSet& ch, const TrainingPlan& plan,
                                  const SystemConfig& cfg, Rng& rng) {
  require_complete(plan);
  const Eigen::Index n = ch.h_dl.cols() > 0 ? ch.h_dl.cols() : ch.h_ul.rows();
  TrainingSignals y;
  y.shared_phase = plan.shared_phase;
  if (plan.shared_phase) {
    y.ap_ul_phase = phase_signal(ch, phase_members(plan, true), cfg, n, rng);
    y.ap_dl_phase = y.ap_ul_phase;
    return y;
  }
  // Phase 1: UL UEs transmit; APs and DL UEs listen.
  y.ap_ul_phase = phase_signal(ch, phase_members(plan, false), cfg, n, rng);
  const double amp = std::sqrt(cfg.pilot_len * cfg.train_power);
  const double noise_amp = std::sqrt(cfg.noise_power);
  const Eigen::Index k_count = ch.g_cci.rows();
  y.dl_cci.resize(cfg.pilot_len, k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (Eigen::Index r = 0; r < cfg.pilot_len; ++r) y.dl_cci(r, k) = noise_amp * complex_normal(rng);
    for (std::size_t l = 0; l < plan.ul.num_ues(); ++l) {
      y.dl_cci(plan.ul.pilot_of[l], k) += amp * ch.g_cci(k, static_cast<Eigen::Index>(l));
    }
  }
  // Phase 2: DL UEs transmit.
  y.ap_dl_phase = phase_signal(ch, phase_members(plan, true), cfg, n, rng);
  return y;
}

EstimateSet lmmse_estimate(const TrainingSignals& y, const TrainingPlan& plan,
                           const LargeScale& ls, const SystemConfig& cfg) {
  require_complete(plan);
  const Eigen::Index nm = cfg.antennas_per_ap;
  const Eigen::Index m_count = ls.beta_aa.rows();
  const Eigen::Index n = nm * m_count;
  const Eigen::Index k_count = ls.beta_dl.rows();
  const Eigen::Index l_count = ls.beta_ul.cols();
  const double sqrt_tp = std::sqrt(cfg.pilot_len * cfg.train_power);

  EstimateSet es;
  es.h_dl_hat = CMatrix::Zero(k_count, n);
  es.h_ul_hat = CMatrix::Zero(n, l_count);
  es.g_cci_hat = CMatrix::Zero(k_count, l_count);

  for (bool dl_phase : {true, false}) {
    const auto members = phase_members(plan, dl_phase);
    const CMatrix& obs = dl_phase ? y.ap_dl_phase : y.ap_ul_phase;
    for (const auto& u : members) {
      if (u.dl != dl_phase) continue;
      for (Eigen::Index m = 0; m < m_count; ++m) {
        const double coef = sqrt_tp * beta_of(ls, u, m) / denominator(ls, members, u, m, cfg);
        // Pilots are identity columns, so phi^H Y selects one row.
        const CRowVector proj = obs.row(u.pilot).segment(m * nm, nm);
        if (u.dl) {
          es.h_dl_hat.row(u.idx).segment(m * nm, nm) = coef * proj;
        } else {
          es.h_ul_hat.col(u.idx).segment(m * nm, nm) = (coef * proj).adjoint();
        }
      }
    }
  }

  if (!plan.shared_phase) {
    for (Eigen::Index k = 0; k < k_count; ++k) {
      for (Eigen::Index l = 0; l < l_count; ++l) {
        const int pilot = plan.ul.pilot_of[static_cast<std::size_t>(l)];
        const double coef = sqrt_tp * ls.beta_cci(k, l) / cci_denominator(ls, plan.ul, k, l, cfg);
        es.g_cci_hat(k, l) = coef * y.dl_cci(pilot, k);
      }
    }
  }
  return es;
}

EstimateSet error_variance(const LargeScale& ls, const TrainingPlan& plan,
                           const SystemConfig& cfg) {
  require_complete(plan);
  const Eigen::Index m_count = ls.beta_aa.rows();
  const Eigen::Index k_count = ls.beta_dl.rows();
  const Eigen::Index l_count = ls.beta_ul.cols();
  const double tp = cfg.pilot_len * cfg.train_power;

  EstimateSet es;
  es.eps_dl.resize(k_count, m_count);
  es.eps_ul.resize(m_count, l_count);
  es.eps_cci = RMatrix::Zero(k_count, l_count);

  for (bool dl_phase : {true, false}) {
    const auto members = phase_members(plan, dl_phase);
    for (const auto& u : members) {
      if (u.dl != dl_phase) continue;
      for (Eigen::Index m = 0; m < m_count; ++m) {
        const double b = beta_of(ls, u, m);
        const double eps = std::max(0.0, b * (1.0 - tp * b / denominator(ls, members, u, m, cfg)));
        if (u.dl) {
          es.eps_dl(u.idx, m) = eps;
        } else {
          es.eps_ul(m, u.idx) = eps;
        }
      }
    }
  }
  if (!plan.shared_phase) {
    for (Eigen::Index k = 0; k < k_count; ++k) {
      for (Eigen::Index l = 0; l < l_count; ++l) {
        const double b = ls.beta_cci(k, l);
        es.eps_cci(k, l) = std::max(0.0, b * (1.0 - tp * b / cci_denominator(ls, plan.ul, k, l, cfg)));
      }
    }
  }
  return es;
}

EstimateSet estimate_channels(const ChannelSet& ch, const LargeScale& ls,
                              const TrainingPlan& plan, const SystemConfig& cfg, Rng& rng) {
  const auto y = received_training(ch, plan, cfg, rng);
  EstimateSet es = lmmse_estimate(y, plan, ls, cfg);
  EstimateSet var = error_variance(ls, plan, cfg);
  es.eps_dl = std::move(var.eps_dl);
  es.eps_ul = std::move(var.eps_ul);
  es.eps_cci = std::move(var.eps_cci);
  return es;
}

NmseReport nmse(const EstimateSet& es, const LargeScale& ls, const SystemConfig& cfg) {
  NmseReport r;
  // N_m is uniform, so it cancels from the ratio; kept for clarity.
  const double nm = cfg.antennas_per_ap;
  for (Eigen::Index k = 0; k < ls.beta_dl.rows(); ++k)
    r.dl.push_back(nm * es.eps_dl.row(k).sum() / (nm * ls.beta_dl.row(k).sum()));
  for (Eigen::Index l = 0; l < ls.beta_ul.cols(); ++l)
    r.ul.push_back(nm * es.eps_ul.col(l).sum() / (nm * ls.beta_ul.col(l).sum()));
  double total = 0.0;
  for (double v : r.dl) {
    total += v;
    r.max_linear = std::max(r.max_linear, v);
  }
  for (double v : r.ul) {
    total += v;
    r.max_linear = std::max(r.max_linear, v);
  }
  const auto count = r.dl.size() + r.ul.size();
  r.mean_linear = count > 0 ? total / static_cast<double>(count) : 0.0;
  return r;
}

}  // namespace cfmimo
