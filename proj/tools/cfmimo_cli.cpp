// Command-line front end. Talks to the simulator only through the C API.
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfmimo/cfmimo.h"

namespace {

struct ConfigDeleter {
  void operator()(cfm_config* c) const { cfm_config_destroy(c); }
};
struct TrialDeleter {
  void operator()(cfm_trial* t) const { cfm_trial_destroy(t); }
};
using ConfigPtr = std::unique_ptr<cfm_config, ConfigDeleter>;
using TrialPtr = std::unique_ptr<cfm_trial, TrialDeleter>;

class Failure : public std::runtime_error {
 public:
  Failure(cfm_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  cfm_status status;
};

void check(cfm_status s, const std::string& context) {
  if (s != CFM_OK) {
    throw Failure(s, context + ": " + cfm_status_string(s) + ": " + cfm_last_error());
  }
}

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::int64_t seed = -1;
  int trials = -1;
  std::string out;
  std::string scheme;
  int threads = 0;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* app, Common& c, bool multi_scheme) {
  app->add_option("--config", c.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Base RNG seed (overrides rng_seed)");
  app->add_option("--trials", c.trials, "Number of Monte Carlo trials");
  app->add_option("--out", c.out, "Output CSV path")->required();
  app->add_option("--scheme", c.scheme,
                  multi_scheme ? "Comma-separated schemes, e.g. heap_fd+zf_rd,rand_fd+zf_rd"
                               : "Scheme, e.g. heap_fd+zf_rd");
  app->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  for (size_t i = 0; i < cfm_config_field_count(); ++i) {
    const std::string name = cfm_config_field_name(i);
    std::string flag = "--" + name;
    for (char& ch : flag) {
      if (ch == '_') ch = '-';
    }
    app->add_option_function<std::string>(
           flag, [&c, name](const std::string& v) { c.overrides[name] = v; },
           "Override config field " + name)
        ->type_name("VALUE");
  }
}

ConfigPtr make_config(const Common& c) {
  cfm_config* raw = nullptr;
  if (c.config_path.empty()) {
    check(cfm_config_create(&raw), "create config");
  } else {
    check(cfm_config_load(c.config_path.c_str(), &raw), "load " + c.config_path);
  }
  ConfigPtr cfg(raw);
  for (const auto& [name, value] : c.overrides) {
    check(cfm_config_set(cfg.get(), name.c_str(), value.c_str()), "--" + name);
  }
  if (c.seed >= 0) {
    check(cfm_config_set(cfg.get(), "rng_seed", std::to_string(c.seed).c_str()), "--seed");
  }
  check(cfm_config_validate(cfg.get()), "config");
  return cfg;
}

int trials_or(const Common& c, int fallback) { return c.trials > 0 ? c.trials : fallback; }

std::string scheme_or(const Common& c, const std::string& fallback) {
  return c.scheme.empty() ? fallback : c.scheme;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free massive MIMO full-duplex simulator"};
  app.require_subcommand(1);

  Common nmse;
  std::vector<int> nmse_ues{4, 6, 8, 10, 12};
  std::vector<int> nmse_taus{2, 8};
  auto* nmse_cmd = app.add_subcommand("nmse-sweep", "Channel estimation NMSE versus number of UEs");
  add_common(nmse_cmd, nmse, true);
  nmse_cmd->add_option("--ue-counts", nmse_ues, "K = L values")->delimiter(',');
  nmse_cmd->add_option("--taus", nmse_taus, "Pilot lengths")->delimiter(',');

  Common se;
  std::vector<int> se_ues{4, 6, 8, 10};
  std::string se_summary;
  auto* se_cmd = app.add_subcommand("se-sweep", "Effective spectral efficiency versus number of UEs");
  add_common(se_cmd, se, true);
  se_cmd->add_option("--ue-counts", se_ues, "K = L values")->delimiter(',');
  se_cmd->add_option("--summary", se_summary, "Per-point summary CSV");

  Common map;
  std::uint64_t map_trial = 0;
  auto* map_cmd = app.add_subcommand("service-map", "DL service map of one optimized draw");
  add_common(map_cmd, map, false);
  map_cmd->add_option("--trial", map_trial, "Trial index");

  Common single;
  std::uint64_t single_trial = 0;
  std::string links_path, assignment_path, summary_path;
  auto* single_cmd =
      app.add_subcommand("single-run", "One pipeline run; --out receives the SCA trace");
  add_common(single_cmd, single, false);
  single_cmd->add_option("--trial", single_trial, "Trial index");
  single_cmd->add_option("--links", links_path, "Topology and large-scale fading CSV");
  single_cmd->add_option("--assignment", assignment_path, "Pilot assignment CSV");
  single_cmd->add_option("--summary", summary_path, "One-row result CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*nmse_cmd) {
      auto cfg = make_config(nmse);
      const std::string schemes = scheme_or(nmse, "heap_fd,heap_hd,rand_fd,rand_hd");
      check(cfm_nmse_sweep(cfg.get(), nmse_ues.data(), nmse_ues.size(), nmse_taus.data(),
                           nmse_taus.size(), schemes.c_str(), trials_or(nmse, 200),
                           nmse.threads, nmse.out.c_str()),
            "nmse-sweep");
    } else if (*se_cmd) {
      auto cfg = make_config(se);
      const std::string schemes =
          scheme_or(se, "heap_fd+zf_rd,heap_fd+zf_nrd,rand_fd+zf_rd,heap_hd+zf_rd");
      check(cfm_se_sweep(cfg.get(), se_ues.data(), se_ues.size(), schemes.c_str(),
                         trials_or(se, 50), se.threads, se.out.c_str(),
                         se_summary.empty() ? nullptr : se_summary.c_str()),
            "se-sweep");
    } else if (*map_cmd) {
      auto cfg = make_config(map);
      const std::string scheme = scheme_or(map, "heap_fd+zf_rd");
      check(cfm_service_map(cfg.get(), scheme.c_str(), map_trial, map.out.c_str()),
            "service-map");
    } else if (*single_cmd) {
      auto cfg = make_config(single);
      const std::string scheme = scheme_or(single, "heap_fd+zf_rd");
      cfm_trial* raw = nullptr;
      check(cfm_single_run(cfg.get(), scheme.c_str(), single_trial, &raw), "single-run");
      TrialPtr trial(raw);
      check(cfm_trial_write_trace(trial.get(), single.out.c_str()), single.out);
      if (!links_path.empty()) check(cfm_trial_write_links(trial.get(), links_path.c_str()), links_path);
      if (!assignment_path.empty()) {
        check(cfm_trial_write_assignment(trial.get(), assignment_path.c_str()), assignment_path);
      }
      if (!summary_path.empty()) {
        check(cfm_trial_write_summary(trial.get(), summary_path.c_str()), summary_path);
      }
      std::printf("scheme=%s trial=%llu feasible=%d converged=%d iterations=%d "
                  "f_se_bits=%.6f effective_se=%.6f nmse_db=%.4f%s%s\n",
                  scheme.c_str(), static_cast<unsigned long long>(single_trial),
                  cfm_trial_feasible(trial.get()), cfm_trial_converged(trial.get()),
                  cfm_trial_sca_iterations(trial.get()), cfm_trial_f_se_bits(trial.get()),
                  cfm_trial_effective_se(trial.get()), cfm_trial_nmse_db(trial.get()),
                  *cfm_trial_message(trial.get()) ? " message=" : "",
                  cfm_trial_message(trial.get()));
    }
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1 + static_cast<int>(e.status);
  }
  return 0;
}
