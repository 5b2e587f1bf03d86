#include "bankdensity/bankdensity.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <new>
#include <string>

#include "bankdensity/errors.hpp"
#include "bankdensity/ingest.hpp"
#include "bankdensity/pipeline.hpp"
#include "bankdensity/report.hpp"
#include "bankdensity/spatial.hpp"
#include "bankdensity/synth.hpp"

using namespace bankdensity;

struct bd_config {
  RunConfig config = default_config();
};

struct bd_landscape {
  synth::LandscapeSpec spec;
};

struct bd_analysis {
  Analysis analysis;
  RunInputs inputs;
};

namespace {

thread_local std::string g_last_error;

bd_status fail(bd_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
bd_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return BD_OK;
  } catch (const InputError& e) {
    return fail(BD_ERR_INPUT, e.what());
  } catch (const NumericalError& e) {
    return fail(BD_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BD_ERR_INTERNAL, "unknown error");
  }
}

bool missing(const void* p, const char* what, bd_status& status) {
  if (p) return false;
  status = fail(BD_ERR_ARGUMENT, std::string(what) + " is null");
  return true;
}

const AdjustedDensity* headline(const bd_analysis* a, double radius, std::size_t* pos) {
  const auto& radii = a->analysis.config.headline_radii;
  auto it = std::find(radii.begin(), radii.end(), radius);
  if (it == radii.end()) return nullptr;
  *pos = static_cast<std::size_t>(it - radii.begin());
  return &a->analysis.adjusted[*pos];
}

RunInputs make_inputs(const char* banks, const char* tracts, const char* subset) {
  RunInputs in{banks, tracts, std::nullopt};
  if (subset) in.subset = subset;
  return in;
}

}  // namespace

extern "C" {

const char* bd_version(void) { return "1.0.0"; }

const char* bd_last_error(void) { return g_last_error.c_str(); }

const char* bd_status_name(bd_status status) {
  switch (status) {
    case BD_OK: return "ok";
    case BD_ERR_ARGUMENT: return "argument";
    case BD_ERR_INPUT: return "input";
    case BD_ERR_NUMERIC: return "numeric";
    case BD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

double bd_haversine_miles(double lat1, double lon1, double lat2, double lon2) {
  return haversine_miles({lat1, lon1}, {lat2, lon2});
}

bd_status bd_config_create(bd_config** out) {
  bd_status s;
  if (missing(out, "out", s)) return s;
  return guarded([&] { *out = new bd_config(); });
}

void bd_config_destroy(bd_config* config) { delete config; }

bd_status bd_config_load_file(bd_config* config, const char* path) {
  bd_status s;
  if (missing(config, "config", s) || missing(path, "path", s)) return s;
  return guarded([&] {
    RunConfig next = config->config;
    load_config_file(path, next);
    config->config = std::move(next);
  });
}

bd_status bd_config_set(bd_config* config, const char* key, const char* value) {
  bd_status s;
  if (missing(config, "config", s) || missing(key, "key", s) || missing(value, "value", s))
    return s;
  return guarded([&] { apply_setting(config->config, key, value); });
}

bd_status bd_config_canonical(const bd_config* config, char* buf, size_t* len) {
  bd_status s;
  if (missing(config, "config", s) || missing(len, "len", s)) return s;
  std::string text;
  s = guarded([&] { text = canonical_config(config->config); });
  if (s != BD_OK) return s;
  const size_t capacity = *len;
  *len = text.size() + 1;
  if (!buf) return BD_OK;
  if (capacity < text.size() + 1) return fail(BD_ERR_ARGUMENT, "buffer too small for canonical config");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return BD_OK;
}

bd_status bd_run(const bd_config* config, const char* banks_path, const char* tracts_path,
                 const char* subset_path, const char* out_dir) {
  bd_status s;
  if (missing(config, "config", s) || missing(banks_path, "banks_path", s) ||
      missing(tracts_path, "tracts_path", s) || missing(out_dir, "out_dir", s))
    return s;
  return guarded(
      [&] { run(config->config, make_inputs(banks_path, tracts_path, subset_path), out_dir); });
}

bd_status bd_run_quantiles(const bd_config* config, const char* banks_path,
                           const char* tracts_path, const char* out_dir) {
  bd_status s;
  if (missing(config, "config", s) || missing(banks_path, "banks_path", s) ||
      missing(tracts_path, "tracts_path", s) || missing(out_dir, "out_dir", s))
    return s;
  return guarded([&] {
    run_quantiles(config->config, make_inputs(banks_path, tracts_path, nullptr), out_dir);
  });
}

bd_status bd_run_subset(const bd_config* config, const char* banks_path, const char* tracts_path,
                        const char* subset_path, const char* out_dir) {
  bd_status s;
  if (missing(config, "config", s) || missing(banks_path, "banks_path", s) ||
      missing(tracts_path, "tracts_path", s) || missing(subset_path, "subset_path", s) ||
      missing(out_dir, "out_dir", s))
    return s;
  return guarded([&] {
    run_subset(config->config, make_inputs(banks_path, tracts_path, subset_path), out_dir);
  });
}

bd_status bd_landscape_create(bd_landscape** out) {
  bd_status s;
  if (missing(out, "out", s)) return s;
  return guarded([&] { *out = new bd_landscape(); });
}

void bd_landscape_destroy(bd_landscape* landscape) { delete landscape; }

bd_status bd_landscape_set(bd_landscape* landscape, const char* key, const char* value) {
  bd_status s;
  if (missing(landscape, "landscape", s) || missing(key, "key", s) || missing(value, "value", s))
    return s;
  return guarded([&] { synth::apply_setting(landscape->spec, key, value); });
}

bd_status bd_landscape_write(const bd_landscape* landscape, const char* out_dir) {
  bd_status s;
  if (missing(landscape, "landscape", s) || missing(out_dir, "out_dir", s)) return s;
  return guarded([&] { synth::write_landscape(synth::generate(landscape->spec), out_dir); });
}

bd_status bd_analysis_run(const bd_config* config, const char* banks_path,
                          const char* tracts_path, bd_analysis** out) {
  bd_status s;
  if (missing(config, "config", s) || missing(banks_path, "banks_path", s) ||
      missing(tracts_path, "tracts_path", s) || missing(out, "out", s))
    return s;
  return guarded([&] {
    auto inputs = make_inputs(banks_path, tracts_path, nullptr);
    auto analysis = analyze(config->config, load_dataset(config->config, inputs));
    *out = new bd_analysis{std::move(analysis), std::move(inputs)};
  });
}

void bd_analysis_destroy(bd_analysis* analysis) { delete analysis; }

bd_status bd_analysis_write(const bd_analysis* a, const char* out_dir) {
  bd_status s;
  if (missing(a, "analysis", s) || missing(out_dir, "out_dir", s)) return s;
  return guarded([&] {
    const auto fp = input_fingerprint(a->analysis.config, a->inputs);
    write_bundle(build_bundle(a->analysis, fp), out_dir);
  });
}

size_t bd_analysis_tract_count(const bd_analysis* a) {
  return a ? a->analysis.data.tracts.size() : 0;
}

size_t bd_analysis_bank_count(const bd_analysis* a) {
  return a ? a->analysis.data.banks.size() : 0;
}

size_t bd_analysis_radius_count(const bd_analysis* a) {
  return a ? a->analysis.profiles.schedule.size() : 0;
}

bd_status bd_analysis_radius(const bd_analysis* a, size_t ri, double* out) {
  bd_status s;
  if (missing(a, "analysis", s) || missing(out, "out", s)) return s;
  if (ri >= a->analysis.profiles.schedule.size())
    return fail(BD_ERR_ARGUMENT, "radius index out of range");
  *out = a->analysis.profiles.schedule[ri];
  return BD_OK;
}

bd_status bd_analysis_count(const bd_analysis* a, size_t ti, size_t ri, uint32_t* out) {
  bd_status s;
  if (missing(a, "analysis", s) || missing(out, "out", s)) return s;
  const auto& p = a->analysis.profiles;
  if (ti >= p.counts.size() || ri >= p.schedule.size())
    return fail(BD_ERR_ARGUMENT, "tract or radius index out of range");
  *out = p.counts[ti].counts[ri];
  return BD_OK;
}

bd_status bd_analysis_density(const bd_analysis* a, size_t ti, size_t ri, double* out) {
  bd_status s;
  if (missing(a, "analysis", s) || missing(out, "out", s)) return s;
  const auto& p = a->analysis.profiles;
  if (ti >= p.rows.size() || ri >= p.schedule.size())
    return fail(BD_ERR_ARGUMENT, "tract or radius index out of range");
  *out = p.rows[ti].densities[ri];
  return BD_OK;
}

bd_status bd_analysis_decile(const bd_analysis* a, size_t ti, int* out) {
  bd_status s;
  if (missing(a, "analysis", s) || missing(out, "out", s)) return s;
  const auto& assignment = a->analysis.segmentation.assignment;
  if (ti >= assignment.size()) return fail(BD_ERR_ARGUMENT, "tract index out of range");
  *out = assignment[ti];
  return BD_OK;
}

bd_status bd_analysis_cut_points(const bd_analysis* a, double* out, size_t* len) {
  bd_status s;
  if (missing(a, "analysis", s) || missing(len, "len", s)) return s;
  const auto& cuts = a->analysis.segmentation.cut_points;
  const size_t capacity = *len;
  *len = cuts.size();
  if (!out) return BD_OK;
  if (capacity < cuts.size()) return fail(BD_ERR_ARGUMENT, "buffer too small for cut points");
  std::copy(cuts.begin(), cuts.end(), out);
  return BD_OK;
}

bd_status bd_analysis_adjusted(const bd_analysis* a, size_t ti, double radius, double* out) {
  bd_status s;
  if (missing(a, "analysis", s) || missing(out, "out", s)) return s;
  std::size_t pos = 0;
  const auto* adj = headline(a, radius, &pos);
  if (!adj) return fail(BD_ERR_ARGUMENT, "not a headline radius");
  if (ti >= adj->values.size()) return fail(BD_ERR_ARGUMENT, "tract index out of range");
  *out = adj->values[ti];
  return BD_OK;
}

bd_status bd_analysis_is_desert(const bd_analysis* a, size_t ti, double radius, int* out) {
  bd_status s;
  if (missing(a, "analysis", s) || missing(out, "out", s)) return s;
  std::size_t pos = 0;
  if (!headline(a, radius, &pos)) return fail(BD_ERR_ARGUMENT, "not a headline radius");
  const auto& flags = a->analysis.labels[pos].is_desert;
  if (ti >= flags.size()) return fail(BD_ERR_ARGUMENT, "tract index out of range");
  *out = flags[ti] ? 1 : 0;
  return BD_OK;
}

size_t bd_analysis_comparison_count(const bd_analysis* a) {
  return a ? a->analysis.comparison.size() : 0;
}

bd_status bd_analysis_comparison(const bd_analysis* a, size_t row, bd_comparison* out) {
  bd_status s;
  if (missing(a, "analysis", s) || missing(out, "out", s)) return s;
  if (row >= a->analysis.comparison.size())
    return fail(BD_ERR_ARGUMENT, "comparison row out of range");
  const auto& r = a->analysis.comparison[row];
  out->decile = r.decile;
  out->radius = r.radius;
  out->n = r.n;
  out->n_desert = r.n_desert;
  out->status = static_cast<int>(r.status);
  out->spearman_rho = r.spearman_rho;
  out->t = r.welch.t;
  out->df = r.welch.df;
  out->p_two_sided = r.welch.p_two_sided;
  out->mean_desert = r.welch.mean_a;
  out->mean_rest = r.welch.mean_b;
  out->significant = r.significant ? 1 : 0;
  return BD_OK;
}

}  // extern "C"
