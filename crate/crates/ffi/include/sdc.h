#ifndef SDC_H
#define SDC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 `destination` codes for [`sdc_forecast`].
 */
#define SDC_DESTINATION_LEO 0

#define SDC_DESTINATION_GEO 1

#define SDC_DESTINATION_LUNAR_SURFACE 2

typedef enum SdcStatus {
  SDC_STATUS_OK = 0,
  SDC_STATUS_NULL_POINTER = 1,
  SDC_STATUS_INVALID_UTF8 = 2,
  SDC_STATUS_PARSE_ERROR = 3,
  SDC_STATUS_INVALID_INPUT = 4,
  SDC_STATUS_OUT_OF_RANGE = 5,
  SDC_STATUS_RUNTIME_ERROR = 6,
  SDC_STATUS_PANIC = 7,
} SdcStatus;

/*
 Results of one scenario run.
 */
typedef struct SdcReport SdcReport;

/*
 A resolved scenario.
 */
typedef struct SdcScenario SdcScenario;

/*
 Figures of merit of one design. Undefined ratios are NaN.
 */
typedef struct SdcFiguresOfMerit {
  double available_compute_tflops;
  double raw_compute_tflops;
  double satellite_mass_kg;
  double compute_efficiency_w_per_tflops;
  double cost_of_power_eur_per_w;
  double cost_of_compute_eur_per_tflops;
  double total_cost_eur;
} SdcFiguresOfMerit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, static storage.
 */
const char *sdc_version(void);

/*
 Message of the last failure on this thread, or NULL. Free with
 [`sdc_string_free`].
 */
char *sdc_last_error_message(void);

/*
 Release a string returned by this library. NULL is ignored.

 # Safety
 `s` must be NULL or a pointer obtained from this library, freed once.
 */
void sdc_string_free(char *s);

/*
 Parse and resolve a scenario from JSON text.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SdcStatus sdc_scenario_from_json(const char *json, struct SdcScenario **out);

/*
 Load a named preset (`uc1`, `uc2`, `uc3`).

 # Safety
 `name` must be a NUL-terminated string; `out` must be writable.
 */
enum SdcStatus sdc_scenario_from_preset(const char *name, struct SdcScenario **out);

/*
 # Safety
 `scenario` must be NULL or a live handle, freed once.
 */
void sdc_scenario_free(struct SdcScenario *scenario);

/*
 Resolved scenario as JSON.

 # Safety
 `scenario` must be a live handle; `out` must be writable.
 */
enum SdcStatus sdc_scenario_to_json(const struct SdcScenario *scenario, char **out);

/*
 Run every analysis the scenario requests.

 # Safety
 `scenario` must be a live handle; `out` must be writable.
 */
enum SdcStatus sdc_scenario_run(const struct SdcScenario *scenario, struct SdcReport **out);

/*
 # Safety
 `report` must be NULL or a live handle, freed once.
 */
void sdc_report_free(struct SdcReport *report);

/*
 Full report as pretty JSON, identical to the CLI output.

 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum SdcStatus sdc_report_to_json(const struct SdcReport *report, char **out);

/*
 Hex SHA-256 content hash of the report.

 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum SdcStatus sdc_report_content_hash(const struct SdcReport *report, char **out);

/*
 Size a GPU-equivalent design with the shipped parameters.
 `destination` is one of the `SDC_DESTINATION_*` codes.

 # Safety
 `out` must be writable.
 */
enum SdcStatus sdc_forecast(int32_t year,
                            double total_power_w,
                            int32_t destination,
                            double compute_power_fraction,
                            struct SdcFiguresOfMerit *out);

/*
 Minimum SDC compute (TFLOPS) of a workload preset.

 # Safety
 `preset` must be a NUL-terminated string; `out_tflops` must be writable.
 */
enum SdcStatus sdc_workload_required_compute(const char *preset, double *out_tflops);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDC_H */
