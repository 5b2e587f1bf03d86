// bankdensity command line front end. Talks to the library exclusively
// through the C API in bankdensity/bankdensity.h.

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "bankdensity/bankdensity.h"

namespace {

struct ConfigDeleter {
  void operator()(bd_config* c) const { bd_config_destroy(c); }
};
struct LandscapeDeleter {
  void operator()(bd_landscape* l) const { bd_landscape_destroy(l); }
};

using ConfigPtr = std::unique_ptr<bd_config, ConfigDeleter>;
using LandscapePtr = std::unique_ptr<bd_landscape, LandscapeDeleter>;

// Machine-parseable single line on stderr.
int report(bd_status status) {
  if (status == BD_OK) return 0;
  std::string msg = bd_last_error();
  for (auto& c : msg)
    if (c == '\n' || c == '"') c = '\'';
  std::fprintf(stderr, "bankdensity: error status=%s code=%d message=\"%s\"\n",
               bd_status_name(status), static_cast<int>(status), msg.c_str());
  return static_cast<int>(status);
}

struct CommonOptions {
  std::string banks;
  std::string tracts;
  std::string config;
  std::string out = ".";
  std::string radii;
  std::string desert_fraction;
  std::string threads;
  std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool analysis_flags) {
  cmd->add_option("--banks", o.banks, "Bank branch CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--tracts", o.tracts, "Tract CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", o.config, "Key-value config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--radii", o.radii, "Radius schedule: comma list or start:stop:step (miles)");
  cmd->add_option("--threads", o.threads, "Worker threads for counting (0 = all cores)");
  if (analysis_flags)
    cmd->add_option("--desert-fraction", o.desert_fraction, "Share of each decile labelled desert");
  cmd->add_option("--set", o.settings, "Override any config key: KEY=VALUE (repeatable)");
}

bd_status build_config(const CommonOptions& o, ConfigPtr& out) {
  bd_config* raw = nullptr;
  if (auto s = bd_config_create(&raw); s != BD_OK) return s;
  out.reset(raw);
  if (!o.config.empty())
    if (auto s = bd_config_load_file(raw, o.config.c_str()); s != BD_OK) return s;
  auto set = [&](const char* key, const std::string& value) {
    return value.empty() ? BD_OK : bd_config_set(raw, key, value.c_str());
  };
  for (const auto& kv : o.settings) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) return bd_config_set(raw, kv.c_str(), "");
    if (auto s = bd_config_set(raw, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        s != BD_OK)
      return s;
  }
  if (auto s = set("radius_schedule", o.radii); s != BD_OK) return s;
  if (auto s = set("desert_fraction", o.desert_fraction); s != BD_OK) return s;
  if (auto s = set("threads", o.threads); s != BD_OK) return s;
  return BD_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial bank densities, banking-desert thresholds and deprivation comparisons"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bd_version()));

  CommonOptions run_opts;
  std::string run_subset;
  auto* run_cmd = app.add_subcommand("run", "Full pipeline: every table, curves, GeoJSON, report");
  add_common(run_cmd, run_opts, true);
  run_cmd->add_option("--subset", run_subset, "Geoid list (one per line) for subset.csv")
      ->check(CLI::ExistingFile);

  CommonOptions q_opts;
  auto* q_cmd = app.add_subcommand("quantiles", "Density quantiles over the full radius schedule");
  add_common(q_cmd, q_opts, false);

  CommonOptions s_opts;
  std::string subset_path;
  auto* s_cmd = app.add_subcommand("subset", "Lower quantiles over a geoid subset");
  add_common(s_cmd, s_opts, false);
  s_cmd->add_option("--subset", subset_path, "Geoid list, one per line")
      ->required()
      ->check(CLI::ExistingFile);

  std::string synth_out = ".";
  std::string seed;
  std::vector<std::string> synth_settings;
  auto* g_cmd = app.add_subcommand("synth", "Generate a seeded synthetic landscape");
  g_cmd->add_option("--out", synth_out, "Output directory for banks.csv and tracts.csv");
  g_cmd->add_option("--seed", seed, "PRNG seed");
  g_cmd->add_option("--set", synth_settings, "Landscape parameter KEY=VALUE (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& c : msg)
      if (c == '\n' || c == '"') c = '\'';
    std::fprintf(stderr, "bankdensity: error status=input code=2 message=\"%s\"\n", msg.c_str());
    return 2;
  }

  ConfigPtr config;
  if (*run_cmd) {
    if (auto s = build_config(run_opts, config); s != BD_OK) return report(s);
    return report(bd_run(config.get(), run_opts.banks.c_str(), run_opts.tracts.c_str(),
                         run_subset.empty() ? nullptr : run_subset.c_str(),
                         run_opts.out.c_str()));
  }
  if (*q_cmd) {
    if (auto s = build_config(q_opts, config); s != BD_OK) return report(s);
    return report(bd_run_quantiles(config.get(), q_opts.banks.c_str(), q_opts.tracts.c_str(),
                                   q_opts.out.c_str()));
  }
  if (*s_cmd) {
    if (auto s = build_config(s_opts, config); s != BD_OK) return report(s);
    return report(bd_run_subset(config.get(), s_opts.banks.c_str(), s_opts.tracts.c_str(),
                                subset_path.c_str(), s_opts.out.c_str()));
  }

  bd_landscape* raw = nullptr;
  if (auto s = bd_landscape_create(&raw); s != BD_OK) return report(s);
  LandscapePtr landscape(raw);
  for (const auto& kv : synth_settings) {
    auto eq = kv.find('=');
    const auto key = kv.substr(0, eq);
    const auto value = eq == std::string::npos ? std::string() : kv.substr(eq + 1);
    if (auto s = bd_landscape_set(raw, key.c_str(), value.c_str()); s != BD_OK) return report(s);
  }
  if (!seed.empty())
    if (auto s = bd_landscape_set(raw, "seed", seed.c_str()); s != BD_OK) return report(s);
  return report(bd_landscape_write(raw, synth_out.c_str()));
}
