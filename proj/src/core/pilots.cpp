#include "cfmimo/pilots.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>

#include "cfmimo/heap.hpp"

namespace cfmimo {

bool PilotAssignment::complete() const {
  return std::all_of(pilot_of.begin(), pilot_of.end(),
                     [this](int p) { return p >= 0 && p < tau; });
}

RMatrix PilotAssignment::upsilon() const {
  RMatrix u = RMatrix::Zero(tau, static_cast<Eigen::Index>(pilot_of.size()));
  for (std::size_t j = 0; j < pilot_of.size(); ++j) {
    if (pilot_of[j] >= 0) u(pilot_of[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return u;
}

WeightVector effective_weights(const LargeScale& ls, const SystemConfig& cfg, UeSet set) {
  const double scale = cfg.antennas_per_ap * cfg.pilot_len * cfg.train_power;
  WeightVector w;
  if (set == UeSet::kDownlink || set == UeSet::kJoint) {
    for (Eigen::Index k = 0; k < ls.beta_dl.rows(); ++k)
      w.beta_tilde.push_back(scale * ls.beta_dl.row(k).sum());
  }
  if (set == UeSet::kUplink || set == UeSet::kJoint) {
    for (Eigen::Index l = 0; l < ls.beta_ul.cols(); ++l)
      w.beta_tilde.push_back(scale * ls.beta_ul.col(l).sum());
  }
  if (w.beta_tilde.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "effective_weights: empty UE set");
  }
  return w;
}

namespace {

void check_tau(int tau) {
  if (tau < 1) throw Error(ErrorCode::kInvalidArgument, "pilot length must be >= 1");
}

void recompute_loads(PilotAssignment& a, const WeightVector& w) {
  a.loads.assign(static_cast<std::size_t>(a.tau), 0.0);
  for (std::size_t j = 0; j < a.pilot_of.size(); ++j) {
    if (a.pilot_of[j] >= 0) a.loads[static_cast<std::size_t>(a.pilot_of[j])] += w.beta_tilde[j];
  }
}

}  // namespace

PilotAssignment assign_pilots_heap(const WeightVector& w, int tau,
                                   std::span<const int> initial_pilots) {
  check_tau(tau);
  for (double b : w.beta_tilde) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw Error(ErrorCode::kDomain, "assign_pilots_heap: weights must be finite and non-negative");
    }
  }
  const std::size_t u = w.size();
  const std::size_t seeded = std::min<std::size_t>(u, static_cast<std::size_t>(tau));
  if (initial_pilots.size() < seeded) {
    throw Error(ErrorCode::kInvalidArgument, "assign_pilots_heap: too few initial pilots");
  }
  std::vector<bool> seen(static_cast<std::size_t>(tau), false);
  for (std::size_t i = 0; i < seeded; ++i) {
    const int p = initial_pilots[i];
    if (p < 0 || p >= tau || seen[static_cast<std::size_t>(p)]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "assign_pilots_heap: initial pilots must be distinct indices in [0, tau)");
    }
    seen[static_cast<std::size_t>(p)] = true;
  }

  PilotAssignment a;
  a.tau = tau;
  a.pilot_of.assign(u, -1);

  std::vector<std::size_t> ue_ids(u);
  std::iota(ue_ids.begin(), ue_ids.end(), std::size_t{0});
  BinaryHeap<std::size_t> pending(HeapKind::kMax, w.beta_tilde, ue_ids);

  std::vector<double> pilot_keys;
  std::vector<int> pilot_ids;
  for (std::size_t i = 0; i < seeded; ++i) {
    const auto node = pending.extract();
    a.pilot_of[node.payload] = initial_pilots[i];
    pilot_keys.push_back(node.key);
    pilot_ids.push_back(initial_pilots[i]);
  }
  // Pilots never seeded (only when U < tau) stay empty and are not offered.
  BinaryHeap<int> pilots(HeapKind::kMin, pilot_keys, pilot_ids);

  while (!pending.empty()) {
    const auto ue = pending.extract();
    const auto& lightest = pilots.peek();
    a.pilot_of[ue.payload] = lightest.payload;
    pilots.replace_top(lightest.key + ue.key, lightest.payload);
  }
  a.heap_work = pending.sift_steps() + pilots.sift_steps();
  recompute_loads(a, w);
  return a;
}

PilotAssignment assign_pilots_heap(const WeightVector& w, int tau, Rng& rng) {
  check_tau(tau);
  std::vector<int> perm(static_cast<std::size_t>(tau));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return assign_pilots_heap(w, tau, perm);
}

PilotAssignment assign_pilots_random(std::size_t num_ues, int tau, Rng& rng,
                                     const WeightVector* w) {
  check_tau(tau);
  std::uniform_int_distribution<int> pick(0, tau - 1);
  PilotAssignment a;
  a.tau = tau;
  a.pilot_of.resize(num_ues);
  for (auto& p : a.pilot_of) p = pick(rng);
  if (w != nullptr) {
    recompute_loads(a, *w);
  } else {
    a.loads.assign(static_cast<std::size_t>(tau), 0.0);
  }
  return a;
}

double assignment_cost(const PilotAssignment& a, const WeightVector& w) {
  if (!a.complete() || a.num_ues() != w.size()) {
    throw Error(ErrorCode::kInvalidArgument, "assignment_cost: incomplete assignment");
  }
  PilotAssignment tmp = a;
  recompute_loads(tmp, w);
  double worst = 0.0;
  for (std::size_t j = 0; j < a.num_ues(); ++j) {
    worst = std::max(worst, tmp.loads[static_cast<std::size_t>(a.pilot_of[j])]);
  }
  return worst;
}

OptimalAssignment brute_force_optimal(const WeightVector& w, int tau) {
  check_tau(tau);
  const std::size_t u = w.size();
  const double space = std::pow(static_cast<double>(tau), static_cast<double>(u));
  if (space > 1e7) {
    throw Error(ErrorCode::kInvalidArgument, "brute_force_optimal: tau^U exceeds 1e7");
  }
  OptimalAssignment best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<int> digits(u, 0);
  std::vector<double> loads(static_cast<std::size_t>(tau));
  for (;;) {
    std::fill(loads.begin(), loads.end(), 0.0);
    for (std::size_t j = 0; j < u; ++j) loads[static_cast<std::size_t>(digits[j])] += w.beta_tilde[j];
    double cost = 0.0;
    for (std::size_t j = 0; j < u; ++j) cost = std::max(cost, loads[static_cast<std::size_t>(digits[j])]);
    if (cost < best.cost) {
      best.cost = cost;
      best.assignment.tau = tau;
      best.assignment.pilot_of = digits;
      best.assignment.loads = loads;
    }
    std::size_t pos = 0;
    while (pos < u && ++digits[pos] == tau) digits[pos++] = 0;
    if (pos == u) break;
  }
  return best;
}

namespace {

PilotAssignment slice(const PilotAssignment& joint, std::size_t begin, std::size_t count,
                      const WeightVector& w) {
  PilotAssignment a;
  a.tau = joint.tau;
  a.pilot_of.assign(joint.pilot_of.begin() + static_cast<std::ptrdiff_t>(begin),
                    joint.pilot_of.begin() + static_cast<std::ptrdiff_t>(begin + count));
  WeightVector part;
  part.beta_tilde.assign(w.beta_tilde.begin() + static_cast<std::ptrdiff_t>(begin),
                         w.beta_tilde.begin() + static_cast<std::ptrdiff_t>(begin + count));
  recompute_loads(a, part);
  a.heap_work = joint.heap_work;
  return a;
}

TrainingPlan split_joint(const PilotAssignment& joint, const LargeScale& ls,
                         const SystemConfig& cfg) {
  const auto w = effective_weights(ls, cfg, UeSet::kJoint);
  const auto k = static_cast<std::size_t>(ls.beta_dl.rows());
  const auto l = static_cast<std::size_t>(ls.beta_ul.cols());
  TrainingPlan plan;
  plan.shared_phase = true;
  plan.dl = slice(joint, 0, k, w);
  plan.ul = slice(joint, k, l, w);
  return plan;
}

PilotAssignment empty_assignment(int tau) {
  PilotAssignment a;
  a.tau = tau;
  a.loads.assign(static_cast<std::size_t>(tau), 0.0);
  return a;
}

bool has_dl(const LargeScale& ls) { return ls.beta_dl.rows() > 0; }
bool has_ul(const LargeScale& ls) { return ls.beta_ul.cols() > 0; }

}  // namespace

TrainingPlan heap_fd_strategy(const LargeScale& ls, const SystemConfig& cfg, Rng& rng) {
  TrainingPlan plan;
  plan.ul = has_ul(ls) ? assign_pilots_heap(effective_weights(ls, cfg, UeSet::kUplink), cfg.pilot_len, rng)
                       : empty_assignment(cfg.pilot_len);
  plan.dl = has_dl(ls) ? assign_pilots_heap(effective_weights(ls, cfg, UeSet::kDownlink), cfg.pilot_len, rng)
                       : empty_assignment(cfg.pilot_len);
  return plan;
}

TrainingPlan heap_hd_strategy(const LargeScale& ls, const SystemConfig& cfg, Rng& rng) {
  if (!has_dl(ls) && !has_ul(ls)) {
    TrainingPlan plan;
    plan.shared_phase = true;
    plan.dl = plan.ul = empty_assignment(cfg.pilot_len);
    return plan;
  }
  const auto joint = assign_pilots_heap(effective_weights(ls, cfg, UeSet::kJoint), cfg.pilot_len, rng);
  return split_joint(joint, ls, cfg);
}

TrainingPlan random_fd_strategy(const LargeScale& ls, const SystemConfig& cfg, Rng& rng) {
  TrainingPlan plan;
  if (has_ul(ls)) {
    const auto w = effective_weights(ls, cfg, UeSet::kUplink);
    plan.ul = assign_pilots_random(w.size(), cfg.pilot_len, rng, &w);
  } else {
    plan.ul = empty_assignment(cfg.pilot_len);
  }
  if (has_dl(ls)) {
    const auto w = effective_weights(ls, cfg, UeSet::kDownlink);
    plan.dl = assign_pilots_random(w.size(), cfg.pilot_len, rng, &w);
  } else {
    plan.dl = empty_assignment(cfg.pilot_len);
  }
  return plan;
}

TrainingPlan random_hd_strategy(const LargeScale& ls, const SystemConfig& cfg, Rng& rng) {
  if (!has_dl(ls) && !has_ul(ls)) return heap_hd_strategy(ls, cfg, rng);
  const auto w = effective_weights(ls, cfg, UeSet::kJoint);
  const auto joint = assign_pilots_random(w.size(), cfg.pilot_len, rng, &w);
  return split_joint(joint, ls, cfg);
}

void write_assignment_csv(std::ostream& out, const PilotAssignment& a, const WeightVector& w) {
  out << "ue_index,pilot_index,beta_tilde,final_load\n" << std::setprecision(12);
  for (std::size_t j = 0; j < a.num_ues(); ++j) {
    const int p = a.pilot_of[j];
    out << j << ',' << p << ',' << w.beta_tilde[j] << ','
        << (p >= 0 ? a.loads[static_cast<std::size_t>(p)] : 0.0) << '\n';
  }
}

}  // namespace cfmimo
