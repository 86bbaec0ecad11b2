#include "cfmimo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace cfmimo {

namespace {

const char* pilot_name(PilotStrategy p) {
  switch (p) {
    case PilotStrategy::kHeapFd: return "heap_fd";
    case PilotStrategy::kHeapHd: return "heap_hd";
    case PilotStrategy::kRandFd: return "rand_fd";
    case PilotStrategy::kRandHd: return "rand_hd";
  }
  return "?";
}

const char* tx_name(Transmission t) {
  switch (t) {
    case Transmission::kZfRd: return "zf_rd";
    case Transmission::kZfNrd: return "zf_nrd";
    case Transmission::kMrtMrcRd: return "mrt_mrc_rd";
    case Transmission::kPerfectCsiZf: return "perfect_csi_zf";
  }
  return "?";
}

bool shared_phase(PilotStrategy p) {
  return p == PilotStrategy::kHeapHd || p == PilotStrategy::kRandHd;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

TrainingPlan make_plan(PilotStrategy p, const LargeScale& ls, const SystemConfig& cfg, Rng& rng) {
  switch (p) {
    case PilotStrategy::kHeapFd: return heap_fd_strategy(ls, cfg, rng);
    case PilotStrategy::kHeapHd: return heap_hd_strategy(ls, cfg, rng);
    case PilotStrategy::kRandFd: return random_fd_strategy(ls, cfg, rng);
    case PilotStrategy::kRandHd: return random_hd_strategy(ls, cfg, rng);
  }
  throw Error(ErrorCode::kInternal, "unknown pilot strategy");
}

EstimateSet without_errors(const EstimateSet& es) {
  EstimateSet out = es;
  out.eps_dl.setZero();
  out.eps_ul.setZero();
  out.eps_cci.setZero();
  return out;
}

EstimateSet perfect_csi(const ChannelSet& ch, const EstimateSet& es) {
  EstimateSet out = without_errors(es);
  out.h_dl_hat = ch.h_dl;
  out.h_ul_hat = ch.h_ul;
  out.g_cci_hat = ch.g_cci;
  return out;
}

std::vector<double> to_db(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(linear_to_db(x));
  return out;
}

bool floors_hold(const SeReport& se, const SystemConfig& cfg) {
  constexpr double kTol = 1e-6;
  for (Eigen::Index i = 0; i < se.dl_rate_bits.size(); ++i)
    if (se.dl_rate_bits(i) < cfg.rate_floor_dl - kTol) return false;
  for (Eigen::Index i = 0; i < se.ul_rate_bits.size(); ++i)
    if (se.ul_rate_bits(i) < cfg.rate_floor_ul - kTol) return false;
  return true;
}

std::vector<double> ap_powers(const CMatrix& w, const AssocMatrix& alpha, const SystemConfig& cfg) {
  const int nm = cfg.antennas_per_ap;
  std::vector<double> out(static_cast<std::size_t>(cfg.num_aps), 0.0);
  for (Eigen::Index k = 0; k < w.cols(); ++k)
    for (int m = 0; m < cfg.num_aps; ++m)
      if (alpha(k, m))
        out[static_cast<std::size_t>(m)] +=
            w.col(k).segment(static_cast<Eigen::Index>(m) * nm, nm).squaredNorm();
  return out;
}

// Double formatting that round-trips and never prints "nan" silently.
std::string num(double x) {
  if (std::isnan(x)) throw Error(ErrorCode::kNumeric, "NaN in CSV output");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

std::string Scheme::name() const {
  std::string s = std::string(pilot_name(pilots)) + "+" + tx_name(tx);
  if ((duplex == Duplex::kHalf) != shared_phase(pilots)) s += duplex == Duplex::kHalf ? "+hd" : "+fd";
  return s;
}

Scheme parse_scheme(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, '+');) parts.push_back(trim(tok));
  if (parts.empty() || parts.size() > 3 || parts[0].empty()) {
    throw Error(ErrorCode::kInvalidArgument, "malformed scheme '" + text + "'");
  }
  Scheme s;
  static const std::map<std::string, PilotStrategy> pilots = {
      {"heap_fd", PilotStrategy::kHeapFd}, {"heap_hd", PilotStrategy::kHeapHd},
      {"rand_fd", PilotStrategy::kRandFd}, {"rand_hd", PilotStrategy::kRandHd}};
  static const std::map<std::string, Transmission> txs = {
      {"zf_rd", Transmission::kZfRd}, {"zf_nrd", Transmission::kZfNrd},
      {"mrt_mrc_rd", Transmission::kMrtMrcRd}, {"perfect_csi_zf", Transmission::kPerfectCsiZf}};
  const auto p = pilots.find(parts[0]);
  if (p == pilots.end()) throw Error(ErrorCode::kInvalidArgument, "unknown pilot strategy '" + parts[0] + "'");
  s.pilots = p->second;
  s.duplex = shared_phase(s.pilots) ? Duplex::kHalf : Duplex::kFull;
  if (parts.size() > 1) {
    const auto t = txs.find(parts[1]);
    if (t == txs.end()) throw Error(ErrorCode::kInvalidArgument, "unknown transmission '" + parts[1] + "'");
    s.tx = t->second;
  }
  if (parts.size() > 2) {
    if (parts[2] == "fd") s.duplex = Duplex::kFull;
    else if (parts[2] == "hd") s.duplex = Duplex::kHalf;
    else throw Error(ErrorCode::kInvalidArgument, "unknown duplex '" + parts[2] + "'");
  }
  return s;
}

std::vector<Scheme> parse_schemes(const std::string& text) {
  std::vector<Scheme> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(parse_scheme(tok));
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "no schemes given");
  return out;
}

TrialDetail run_trial_detailed(const SystemConfig& cfg, const Scheme& scheme,
                               std::uint64_t trial, bool estimate_only) {
  cfg.validate();
  TrialDetail d;
  TrialRecord& r = d.record;
  r.scheme = scheme.name();
  r.num_dl = cfg.num_dl;
  r.num_ul = cfg.num_ul;
  r.tau = cfg.pilot_len;
  r.trial = trial;
  r.seed = cfg.rng_seed;

  Rng topo_rng = make_stream(cfg.rng_seed, trial, kStreamTopology);
  Rng ls_rng = make_stream(cfg.rng_seed, trial, kStreamLargeScale);
  Rng ch_rng = make_stream(cfg.rng_seed, trial, kStreamChannels);
  Rng pilot_rng = make_stream(cfg.rng_seed, trial, kStreamPilots);
  Rng train_rng = make_stream(cfg.rng_seed, trial, kStreamTraining);

  d.topo = sample_topology(cfg, topo_rng);
  d.ls = large_scale(d.topo, cfg, ls_rng);
  const ChannelSet ch = sample_channels(d.ls, cfg, ch_rng);
  if (cfg.num_dl + cfg.num_ul > 0) {
    d.plan = make_plan(scheme.pilots, d.ls, cfg, pilot_rng);
    d.es = estimate_channels(ch, d.ls, d.plan, cfg, train_rng);
    const NmseReport rep = nmse(d.es, d.ls, cfg);
    r.nmse_dl_db = to_db(rep.dl);
    r.nmse_ul_db = to_db(rep.ul);
    r.nmse_linear = rep.mean_linear;
    r.nmse_db = rep.mean_db();
    r.nmse_max_db = rep.max_db();
  }
  if (estimate_only) {
    r.feasible = true;
    return d;
  }

  const bool hd = scheme.duplex == Duplex::kHalf;
  const int training = scheme.training_length(cfg.pilot_len);
  r.overhead = effective_se(1.0, cfg.coherence, training);
  if (cfg.num_dl + cfg.num_ul == 0) {
    r.feasible = r.floors_met = r.converged = true;
    r.ap_power.assign(static_cast<std::size_t>(cfg.num_aps), 0.0);
    return d;
  }

  const EstimateSet perfect = perfect_csi(ch, d.es);
  const EstimateSet& eval = scheme.tx == Transmission::kPerfectCsiZf ? perfect : d.es;
  if (scheme.tx == Transmission::kMrtMrcRd) {
    d.beams = mrt_mrc_beams(d.es, cfg);
    d.alpha = full_association(cfg.num_dl, cfg.num_aps);
    r.feasible = r.converged = true;
  } else {
    const EstimateSet design = scheme.tx == Transmission::kZfNrd ? without_errors(d.es)
                               : scheme.tx == Transmission::kPerfectCsiZf ? perfect
                                                                           : d.es;
    OptimizeOptions opts;
    opts.half_duplex = hd;
    try {
      d.run = optimize_zf(design, ch, cfg, opts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumeric && e.code() != ErrorCode::kInvalidArgument) throw;
      r.message = e.what();
      return d;
    }
    r.message = d.run.message;
    r.converged = d.run.converged;
    r.refined = d.run.refined;
    r.forced = d.run.forced;
    r.assoc_rounds = d.run.assoc_rounds;
    r.sca_iterations = d.run.state.iteration;
    if (!d.run.feasible) return d;
    r.feasible = true;
    d.beams = d.run.beams;
    d.alpha = d.run.assoc.alpha;
    const BeamformerSet first = zf_beams(zf_operators(design, cfg), d.run.first_pass.omega,
                                         d.run.first_pass.p);
    r.first_pass_se_bits =
        spectral_efficiency(first, full_association(cfg.num_dl, cfg.num_aps), eval, ch, cfg, hd).bits;
  }

  const SeReport se = spectral_efficiency(d.beams, d.alpha, eval, ch, cfg, hd);
  r.f_se_bits = se.bits;
  r.floors_met = floors_hold(se, cfg);
  r.effective_se = effective_se(se.bits, cfg.coherence, training);
  r.true_f_se_bits = spectral_efficiency_true(d.beams, d.alpha, ch, cfg, hd).bits;
  r.ap_power = ap_powers(d.beams.w, d.alpha, cfg);
  r.assoc_density = d.alpha.size() > 0 ? d.alpha.cast<double>().mean() : 0.0;
  return d;
}

TrialRecord run_trial(const SystemConfig& cfg, const Scheme& scheme, std::uint64_t trial,
                      bool estimate_only) {
  return run_trial_detailed(cfg, scheme, trial, estimate_only).record;
}

std::vector<TrialRecord> run_grid(const SystemConfig& cfg, const SweepSpec& spec,
                                  bool estimate_only) {
  if (spec.trials < 0) throw Error(ErrorCode::kInvalidArgument, "negative trial count");
  struct Task {
    SystemConfig cfg;
    Scheme scheme;
    std::uint64_t trial;
  };
  std::vector<Task> tasks;
  const std::vector<int> ues = spec.ue_counts.empty() ? std::vector<int>{cfg.num_dl} : spec.ue_counts;
  const std::vector<int> taus = spec.taus.empty() ? std::vector<int>{cfg.pilot_len} : spec.taus;
  for (int u : ues) {
    for (int tau : taus) {
      SystemConfig c = cfg;
      c.num_dl = c.num_ul = u;
      c.pilot_len = tau;
      c.validate();
      for (const auto& s : spec.schemes)
        for (int t = 0; t < spec.trials; ++t) tasks.push_back({c, s, static_cast<std::uint64_t>(t)});
    }
  }

  std::vector<TrialRecord> out(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = run_trial(tasks[i].cfg, tasks[i].scheme, tasks[i].trial, estimate_only);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks.size(), 1)));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string csv_header_comment(const SystemConfig& cfg, const std::string& kind) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# cfmimo %s config_hash=%016llx seed=%llu", kind.c_str(),
                static_cast<unsigned long long>(config_hash(cfg)),
                static_cast<unsigned long long>(cfg.rng_seed));
  return buf;
}

void write_nmse_csv(std::ostream& out, const SystemConfig& cfg,
                    const std::vector<TrialRecord>& records) {
  out << csv_header_comment(cfg, "nmse-sweep")
      << " nmse_db=10log10(mean over UEs of sum_m eps/sum_m beta)\n";
  out << "scheme,K,L,tau,trial,seed,nmse_db,nmse_max_db,nmse_linear\n";
  for (const auto& r : records)
    out << r.scheme << ',' << r.num_dl << ',' << r.num_ul << ',' << r.tau << ',' << r.trial << ','
        << r.seed << ',' << num(r.nmse_db) << ',' << num(r.nmse_max_db) << ','
        << num(r.nmse_linear) << '\n';
}

void write_se_csv(std::ostream& out, const SystemConfig& cfg,
                  const std::vector<TrialRecord>& records) {
  out << csv_header_comment(cfg, "se-sweep")
      << " se in bits/s/Hz; hd=(dl+ul)/2 without SI/IAI/CCI; effective_se=overhead*f_se_bits"
         " with tau_t=2tau (fd) or tau (hd)\n";
  out << "scheme,K,L,tau,trial,seed,feasible,floors_met,converged,refined,forced,f_se_bits,"
         "effective_se,true_f_se_bits,first_pass_se_bits,overhead,assoc_density,"
         "sca_iterations,assoc_rounds,max_ap_power_w,nmse_db\n";
  for (const auto& r : records) {
    const double pmax = r.ap_power.empty() ? 0.0 : *std::max_element(r.ap_power.begin(), r.ap_power.end());
    out << r.scheme << ',' << r.num_dl << ',' << r.num_ul << ',' << r.tau << ',' << r.trial << ','
        << r.seed << ',' << r.feasible << ',' << r.floors_met << ',' << r.converged << ','
        << r.refined << ',' << r.forced << ',' << num(r.f_se_bits) << ','
        << num(r.effective_se) << ',' << num(r.true_f_se_bits) << ','
        << num(r.first_pass_se_bits) << ',' << num(r.overhead) << ',' << num(r.assoc_density)
        << ',' << r.sca_iterations << ',' << r.assoc_rounds << ',' << num(pmax) << ','
        << num(r.nmse_db) << '\n';
  }
}

void write_se_summary_csv(std::ostream& out, const SystemConfig& cfg,
                          const std::vector<TrialRecord>& records) {
  struct Acc {
    int trials = 0;
    std::vector<double> eff;
    std::vector<double> fse;
  };
  std::vector<std::tuple<std::string, int, int, int>> order;
  std::map<std::tuple<std::string, int, int, int>, Acc> groups;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.scheme, r.num_dl, r.num_ul, r.tau);
    if (!groups.count(key)) order.push_back(key);
    auto& a = groups[key];
    ++a.trials;
    if (r.feasible) {
      a.eff.push_back(r.effective_se);
      a.fse.push_back(r.f_se_bits);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  auto half_width = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return 1.96 * std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  out << csv_header_comment(cfg, "se-summary") << " means over feasible trials\n";
  out << "scheme,K,L,tau,trials,feasible,infeasible_fraction,mean_f_se_bits,mean_effective_se,"
         "ci95_effective_se\n";
  for (const auto& key : order) {
    const auto& a = groups[key];
    const auto feasible = static_cast<int>(a.eff.size());
    out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
        << std::get<3>(key) << ',' << a.trials << ',' << feasible << ','
        << num(a.trials > 0 ? 1.0 - static_cast<double>(feasible) / a.trials : 0.0) << ','
        << num(mean(a.fse)) << ',' << num(mean(a.eff)) << ',' << num(half_width(a.eff)) << '\n';
  }
}

void write_service_map_csv(std::ostream& out, const SystemConfig& cfg, const TrialDetail& d) {
  out << csv_header_comment(cfg, "service-map") << " scheme=" << d.record.scheme
      << " trial=" << d.record.trial << " threshold=" << num(cfg.threshold()) << '\n';
  out << "record,ap_index,ue_index,x,y,served_count,r_sp,alpha\n";
  const Eigen::Index k_count = d.alpha.rows();
  const bool have_rsp = d.run.assoc.r_sp.rows() == k_count && d.run.assoc.r_sp.cols() == cfg.num_aps;
  for (int m = 0; m < cfg.num_aps; ++m) {
    int served = 0;
    for (Eigen::Index k = 0; k < k_count; ++k) served += d.alpha(k, m);
    const Point& p = d.topo.ap_pos[static_cast<std::size_t>(m)];
    out << "ap," << m << ",," << num(p.x) << ',' << num(p.y) << ',' << served << ",,\n";
  }
  for (std::size_t k = 0; k < d.topo.dl_pos.size(); ++k) {
    const Point& p = d.topo.dl_pos[k];
    out << "ue,," << k << ',' << num(p.x) << ',' << num(p.y) << ",,,\n";
  }
  for (Eigen::Index k = 0; k < k_count; ++k)
    for (int m = 0; m < cfg.num_aps; ++m)
      out << "link," << m << ',' << k << ",,,," << num(have_rsp ? d.run.assoc.r_sp(k, m) : 0.0)
          << ',' << int(d.alpha(k, m)) << '\n';
}

std::vector<TrialRecord> nmse_sweep(const SystemConfig& cfg, const SweepSpec& spec,
                                    std::ostream& out) {
  auto records = run_grid(cfg, spec, true);
  write_nmse_csv(out, cfg, records);
  return records;
}

std::vector<TrialRecord> se_sweep(const SystemConfig& cfg, const SweepSpec& spec,
                                  std::ostream& out, std::ostream* summary) {
  auto records = run_grid(cfg, spec, false);
  write_se_csv(out, cfg, records);
  if (summary) write_se_summary_csv(*summary, cfg, records);
  return records;
}

TrialDetail service_map(const SystemConfig& cfg, const Scheme& scheme, std::uint64_t trial,
                        std::ostream& out) {
  TrialDetail d = run_trial_detailed(cfg, scheme, trial);
  if (!d.record.feasible) {
    throw Error(ErrorCode::kInfeasible, "service map: run infeasible: " + d.record.message);
  }
  write_service_map_csv(out, cfg, d);
  return d;
}

}  // namespace cfmimo
