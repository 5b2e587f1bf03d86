/*
 * bankdensity C API.
 *
 * Radial bank-branch densities around census tract centroids, population
 * density segmentation, lower-tail "banking desert" thresholds and
 * desert-vs-rest deprivation comparisons.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return a bd_status; on failure a one-line description is
 * available from bd_last_error() on the calling thread until the next API
 * call on that thread. Handles are not internally synchronised: a single
 * handle must not be mutated from two threads at once, but distinct handles
 * are independent and const queries on an analysis may run concurrently.
 */
#ifndef BANKDENSITY_H
#define BANKDENSITY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BD_BUILDING_LIBRARY)
#    define BD_API __declspec(dllexport)
#  else
#    define BD_API __declspec(dllimport)
#  endif
#else
#  define BD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum bd_status {
  BD_OK = 0,
  BD_ERR_ARGUMENT = 1,  /* null pointer, index out of range, buffer too small */
  BD_ERR_INPUT = 2,     /* unreadable file, validation or schema failure */
  BD_ERR_NUMERIC = 3,   /* undefined statistical quantity */
  BD_ERR_INTERNAL = 4
} bd_status;

typedef struct bd_config bd_config;
typedef struct bd_landscape bd_landscape;
typedef struct bd_analysis bd_analysis;

BD_API const char* bd_version(void);
BD_API const char* bd_last_error(void);
BD_API const char* bd_status_name(bd_status status);

/* Great-circle distance in statute miles (sphere radius 3958.7613). */
BD_API double bd_haversine_miles(double lat1, double lon1, double lat2, double lon2);

/* ---- run configuration ------------------------------------------------ */

BD_API bd_status bd_config_create(bd_config** out);
BD_API void bd_config_destroy(bd_config* config);
/* Flat `key = value` file; later calls override earlier values. */
BD_API bd_status bd_config_load_file(bd_config* config, const char* path);
BD_API bd_status bd_config_set(bd_config* config, const char* key, const char* value);
/* Canonical text of the configuration; `*len` receives the length needed
   including the terminator. Pass buf = NULL to query the size. */
BD_API bd_status bd_config_canonical(const bd_config* config, char* buf, size_t* len);

/* ---- end-to-end commands ---------------------------------------------- */

/* Full pipeline. `subset_path` may be NULL. Writes summary.csv, segments.csv,
   thresholds.csv, comparison.csv, type_summary.csv, curves.csv,
   group_means.csv, deserts.geojson, report.md (and subset.csv) into out_dir. */
BD_API bd_status bd_run(const bd_config* config, const char* banks_path, const char* tracts_path,
                        const char* subset_path, const char* out_dir);

/* curves.csv only. */
BD_API bd_status bd_run_quantiles(const bd_config* config, const char* banks_path,
                                  const char* tracts_path, const char* out_dir);

/* subset.csv only. */
BD_API bd_status bd_run_subset(const bd_config* config, const char* banks_path,
                               const char* tracts_path, const char* subset_path,
                               const char* out_dir);

/* ---- synthetic landscapes --------------------------------------------- */

BD_API bd_status bd_landscape_create(bd_landscape** out);
BD_API void bd_landscape_destroy(bd_landscape* landscape);
BD_API bd_status bd_landscape_set(bd_landscape* landscape, const char* key, const char* value);
/* Generates and writes banks.csv and tracts.csv in the ingest schema. */
BD_API bd_status bd_landscape_write(const bd_landscape* landscape, const char* out_dir);

/* ---- in-memory analysis ----------------------------------------------- */

BD_API bd_status bd_analysis_run(const bd_config* config, const char* banks_path,
                                 const char* tracts_path, bd_analysis** out);
BD_API void bd_analysis_destroy(bd_analysis* analysis);
BD_API bd_status bd_analysis_write(const bd_analysis* analysis, const char* out_dir);

BD_API size_t bd_analysis_tract_count(const bd_analysis* analysis);
BD_API size_t bd_analysis_bank_count(const bd_analysis* analysis);
BD_API size_t bd_analysis_radius_count(const bd_analysis* analysis);
BD_API bd_status bd_analysis_radius(const bd_analysis* analysis, size_t radius_index,
                                    double* out);
BD_API bd_status bd_analysis_count(const bd_analysis* analysis, size_t tract_index,
                                   size_t radius_index, uint32_t* out);
BD_API bd_status bd_analysis_density(const bd_analysis* analysis, size_t tract_index,
                                     size_t radius_index, double* out);
/* Decile 1..segment_count of a tract. */
BD_API bd_status bd_analysis_decile(const bd_analysis* analysis, size_t tract_index, int* out);
BD_API bd_status bd_analysis_cut_points(const bd_analysis* analysis, double* out, size_t* len);
/* Adjusted density (residual) and desert flag at a headline radius; the
   adjusted value is NaN when the tract's decile regression was skipped. */
BD_API bd_status bd_analysis_adjusted(const bd_analysis* analysis, size_t tract_index,
                                      double headline_radius, double* out);
BD_API bd_status bd_analysis_is_desert(const bd_analysis* analysis, size_t tract_index,
                                       double headline_radius, int* out);

typedef struct bd_comparison {
  int decile; /* 0 = all tracts */
  double radius;
  size_t n;
  size_t n_desert;
  int status; /* 0 ok, 1 insufficient, 2 skipped */
  double spearman_rho;
  double t;
  double df;
  double p_two_sided;
  double mean_desert;
  double mean_rest;
  int significant;
} bd_comparison;

BD_API size_t bd_analysis_comparison_count(const bd_analysis* analysis);
BD_API bd_status bd_analysis_comparison(const bd_analysis* analysis, size_t row,
                                        bd_comparison* out);

#ifdef __cplusplus
}
#endif

#endif /* BANKDENSITY_H */
