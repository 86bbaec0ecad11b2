#include "cfmimo/cfmimo.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "cfmimo/config.hpp"
#include "cfmimo/harness.hpp"
#include "cfmimo/pilots.hpp"

struct cfm_config {
  cfmimo::SystemConfig cfg;
};

struct cfm_trial {
  cfmimo::SystemConfig cfg;
  cfmimo::TrialDetail detail;
};

namespace {

thread_local std::string g_last_error;

cfm_status to_status(cfmimo::ErrorCode c) {
  switch (c) {
    case cfmimo::ErrorCode::kInvalidArgument: return CFM_INVALID_ARGUMENT;
    case cfmimo::ErrorCode::kDomain: return CFM_DOMAIN;
    case cfmimo::ErrorCode::kInfeasible: return CFM_INFEASIBLE;
    case cfmimo::ErrorCode::kNumeric: return CFM_NUMERIC;
    case cfmimo::ErrorCode::kIo: return CFM_IO;
    case cfmimo::ErrorCode::kInternal: return CFM_INTERNAL;
  }
  return CFM_INTERNAL;
}

cfm_status fail(cfm_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs f, translating exceptions into status codes.
template <typename F>
cfm_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return CFM_OK;
  } catch (const cfmimo::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CFM_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CFM_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw cfmimo::Error(cfmimo::ErrorCode::kInvalidArgument, what);
}

std::ofstream open_out(const char* path) {
  require(path != nullptr, "output path is NULL");
  std::ofstream out(path);
  if (!out) throw cfmimo::Error(cfmimo::ErrorCode::kIo, std::string("cannot open ") + path);
  return out;
}

void close_out(std::ofstream& out, const char* path) {
  out.close();
  if (!out) throw cfmimo::Error(cfmimo::ErrorCode::kIo, std::string("failed writing ") + path);
}

void copy_string(const std::string& s, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf == nullptr) return;
  if (len < s.size() + 1) {
    throw cfmimo::Error(cfmimo::ErrorCode::kInvalidArgument, "buffer too small");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

std::vector<int> to_vector(const int* p, size_t n) {
  require(n == 0 || p != nullptr, "NULL list with non-zero length");
  return std::vector<int>(p, p + n);
}

}  // namespace

extern "C" {

const char* cfm_last_error(void) { return g_last_error.c_str(); }

const char* cfm_status_string(cfm_status status) {
  switch (status) {
    case CFM_OK: return "ok";
    case CFM_INVALID_ARGUMENT: return "invalid argument";
    case CFM_DOMAIN: return "domain error";
    case CFM_INFEASIBLE: return "infeasible";
    case CFM_NUMERIC: return "numerical failure";
    case CFM_IO: return "i/o error";
    case CFM_INTERNAL: return "internal error";
  }
  return "unknown status";
}

cfm_status cfm_config_create(cfm_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = new cfm_config{};
  });
}

cfm_status cfm_config_load(const char* path, cfm_config** out) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "NULL argument");
    *out = new cfm_config{cfmimo::load_config(path)};
  });
}

cfm_status cfm_config_clone(const cfm_config* cfg, cfm_config** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "NULL argument");
    *out = new cfm_config{cfg->cfg};
  });
}

void cfm_config_destroy(cfm_config* cfg) { delete cfg; }

cfm_status cfm_config_set(cfm_config* cfg, const char* name, const char* value) {
  return guarded([&] {
    require(cfg != nullptr && name != nullptr && value != nullptr, "NULL argument");
    cfmimo::set_config_field(cfg->cfg, name, value);
  });
}

cfm_status cfm_config_get(const cfm_config* cfg, const char* name, char* buf, size_t len,
                          size_t* needed) {
  return guarded([&] {
    require(cfg != nullptr && name != nullptr, "NULL argument");
    copy_string(cfmimo::get_config_field(cfg->cfg, name), buf, len, needed);
  });
}

cfm_status cfm_config_dump(const cfm_config* cfg, char* buf, size_t len, size_t* needed) {
  return guarded([&] {
    require(cfg != nullptr, "NULL config");
    copy_string(cfmimo::dump_config(cfg->cfg), buf, len, needed);
  });
}

size_t cfm_config_field_count(void) { return cfmimo::config_field_names().size(); }

const char* cfm_config_field_name(size_t index) {
  const auto& names = cfmimo::config_field_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

cfm_status cfm_config_validate(const cfm_config* cfg) {
  return guarded([&] {
    require(cfg != nullptr, "NULL config");
    cfg->cfg.validate();
  });
}

cfm_status cfm_config_hash(const cfm_config* cfg, uint64_t* out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "NULL argument");
    *out = cfmimo::config_hash(cfg->cfg);
  });
}

cfm_status cfm_nmse_sweep(const cfm_config* cfg, const int* ue_counts, size_t n_counts,
                          const int* taus, size_t n_taus, const char* schemes, int trials,
                          int threads, const char* out_path) {
  return guarded([&] {
    require(cfg != nullptr && schemes != nullptr, "NULL argument");
    cfmimo::SweepSpec spec;
    spec.ue_counts = to_vector(ue_counts, n_counts);
    spec.taus = to_vector(taus, n_taus);
    spec.schemes = cfmimo::parse_schemes(schemes);
    spec.trials = trials;
    spec.threads = threads;
    auto out = open_out(out_path);
    cfmimo::nmse_sweep(cfg->cfg, spec, out);
    close_out(out, out_path);
  });
}

cfm_status cfm_se_sweep(const cfm_config* cfg, const int* ue_counts, size_t n_counts,
                        const char* schemes, int trials, int threads, const char* out_path,
                        const char* summary_path) {
  return guarded([&] {
    require(cfg != nullptr && schemes != nullptr, "NULL argument");
    cfmimo::SweepSpec spec;
    spec.ue_counts = to_vector(ue_counts, n_counts);
    spec.schemes = cfmimo::parse_schemes(schemes);
    spec.trials = trials;
    spec.threads = threads;
    auto out = open_out(out_path);
    if (summary_path != nullptr) {
      auto summary = open_out(summary_path);
      cfmimo::se_sweep(cfg->cfg, spec, out, &summary);
      close_out(summary, summary_path);
    } else {
      cfmimo::se_sweep(cfg->cfg, spec, out, nullptr);
    }
    close_out(out, out_path);
  });
}

cfm_status cfm_service_map(const cfm_config* cfg, const char* scheme, uint64_t trial,
                           const char* out_path) {
  return guarded([&] {
    require(cfg != nullptr && scheme != nullptr, "NULL argument");
    // Run before opening the file so an infeasible draw leaves nothing behind.
    std::ostringstream buf;
    cfmimo::service_map(cfg->cfg, cfmimo::parse_scheme(scheme), trial, buf);
    auto out = open_out(out_path);
    out << buf.str();
    close_out(out, out_path);
  });
}

cfm_status cfm_single_run(const cfm_config* cfg, const char* scheme, uint64_t trial,
                          cfm_trial** out) {
  return guarded([&] {
    require(cfg != nullptr && scheme != nullptr && out != nullptr, "NULL argument");
    auto t = std::make_unique<cfm_trial>();
    t->cfg = cfg->cfg;
    t->detail = cfmimo::run_trial_detailed(cfg->cfg, cfmimo::parse_scheme(scheme), trial);
    *out = t.release();
  });
}

void cfm_trial_destroy(cfm_trial* trial) { delete trial; }

int cfm_trial_feasible(const cfm_trial* t) { return t && t->detail.record.feasible ? 1 : 0; }
int cfm_trial_converged(const cfm_trial* t) { return t && t->detail.record.converged ? 1 : 0; }
double cfm_trial_f_se_bits(const cfm_trial* t) { return t ? t->detail.record.f_se_bits : 0.0; }
double cfm_trial_effective_se(const cfm_trial* t) { return t ? t->detail.record.effective_se : 0.0; }
double cfm_trial_nmse_db(const cfm_trial* t) { return t ? t->detail.record.nmse_db : 0.0; }
int cfm_trial_sca_iterations(const cfm_trial* t) { return t ? t->detail.record.sca_iterations : 0; }
const char* cfm_trial_message(const cfm_trial* t) {
  return t ? t->detail.record.message.c_str() : "";
}

cfm_status cfm_trial_write_summary(const cfm_trial* t, const char* path) {
  return guarded([&] {
    require(t != nullptr, "NULL trial");
    auto out = open_out(path);
    cfmimo::write_se_csv(out, t->cfg, {t->detail.record});
    close_out(out, path);
  });
}

cfm_status cfm_trial_write_trace(const cfm_trial* t, const char* path) {
  return guarded([&] {
    require(t != nullptr, "NULL trial");
    auto out = open_out(path);
    out << cfmimo::csv_header_comment(t->cfg, "sca-trace") << '\n';
    cfmimo::write_trace_csv(out, t->detail.run.state.trace);
    close_out(out, path);
  });
}

cfm_status cfm_trial_write_links(const cfm_trial* t, const char* path) {
  return guarded([&] {
    require(t != nullptr, "NULL trial");
    auto out = open_out(path);
    cfmimo::write_links_csv(out, t->detail.topo, t->detail.ls, t->cfg);
    close_out(out, path);
  });
}

cfm_status cfm_trial_write_assignment(const cfm_trial* t, const char* path) {
  return guarded([&] {
    require(t != nullptr, "NULL trial");
    const auto& d = t->detail;
    auto out = open_out(path);
    out << cfmimo::csv_header_comment(t->cfg, "assignment")
        << (d.plan.shared_phase ? " shared training phase" : " separate DL/UL phases") << '\n';
    out << "phase,ue_index,pilot_index,beta_tilde,final_load\n";
    auto emit = [&](const char* phase, const cfmimo::PilotAssignment& a, cfmimo::UeSet set) {
      if (a.num_ues() == 0) return;
      std::ostringstream body;
      cfmimo::write_assignment_csv(body, a, cfmimo::effective_weights(d.ls, t->cfg, set));
      std::istringstream lines(body.str());
      std::string line;
      std::getline(lines, line);  // column header
      while (std::getline(lines, line)) out << phase << ',' << line << '\n';
    };
    if (d.plan.shared_phase) {
      // Both populations share one phase, so the pilot loads are joint.
      std::vector<double> loads(static_cast<size_t>(d.plan.dl.tau), 0.0);
      for (auto set : {cfmimo::UeSet::kDownlink, cfmimo::UeSet::kUplink}) {
        const auto& a = set == cfmimo::UeSet::kDownlink ? d.plan.dl : d.plan.ul;
        if (a.num_ues() == 0) continue;
        const auto w = cfmimo::effective_weights(d.ls, t->cfg, set);
        for (size_t j = 0; j < a.num_ues(); ++j) {
          loads[static_cast<size_t>(a.pilot_of[j])] += w.beta_tilde[j];
        }
      }
      auto dl = d.plan.dl;
      auto ul = d.plan.ul;
      dl.loads = ul.loads = loads;
      emit("dl", dl, cfmimo::UeSet::kDownlink);
      emit("ul", ul, cfmimo::UeSet::kUplink);
    } else {
      emit("dl", d.plan.dl, cfmimo::UeSet::kDownlink);
      emit("ul", d.plan.ul, cfmimo::UeSet::kUplink);
    }
    close_out(out, path);
  });
}

cfm_status cfm_trial_write_service_map(const cfm_trial* t, const char* path) {
  return guarded([&] {
    require(t != nullptr, "NULL trial");
    if (!t->detail.record.feasible) {
      throw cfmimo::Error(cfmimo::ErrorCode::kInfeasible, "trial is infeasible");
    }
    auto out = open_out(path);
    cfmimo::write_service_map_csv(out, t->cfg, t->detail);
    close_out(out, path);
  });
}

cfm_status cfm_assign_pilots_heap(const double* weights, size_t n, int tau,
                                  const int* initial_pilots, uint64_t seed, int* pilot_of,
                                  double* loads) {
  return guarded([&] {
    require(n == 0 || (weights != nullptr && pilot_of != nullptr), "NULL argument");
    require(tau >= 1, "tau must be >= 1");
    cfmimo::WeightVector w;
    w.beta_tilde.assign(weights, weights + n);
    cfmimo::PilotAssignment a;
    if (initial_pilots != nullptr) {
      const size_t count = std::min(n, static_cast<size_t>(tau));
      a = cfmimo::assign_pilots_heap(w, tau, std::span<const int>(initial_pilots, count));
    } else {
      cfmimo::Rng rng = cfmimo::make_stream(seed, 0, cfmimo::kStreamPilots);
      a = cfmimo::assign_pilots_heap(w, tau, rng);
    }
    std::copy(a.pilot_of.begin(), a.pilot_of.end(), pilot_of);
    if (loads != nullptr) std::copy(a.loads.begin(), a.loads.end(), loads);
  });
}

}  // extern "C"
