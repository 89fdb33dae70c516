#ifndef KINSYNC_H
#define KINSYNC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum KsStatus {
  KS_STATUS_OK = 0,
  KS_STATUS_NULL_POINTER = 1,
  KS_STATUS_INVALID_ARGUMENT = 2,
  KS_STATUS_IO = 3,
  KS_STATUS_PARSE = 4,
  KS_STATUS_DIMENSION_MISMATCH = 5,
  KS_STATUS_RANK_DEFICIENT = 6,
  KS_STATUS_OUT_OF_RANGE = 7,
  KS_STATUS_INTERNAL = 99,
} KsStatus;

/*
 DBA average of a set plus one dilation map per member.
 */
typedef struct KsNlts KsNlts;

/*
 An optimal warping path with its cost.
 */
typedef struct KsPath KsPath;

/*
 A frame schedule for one trial.
 */
typedef struct KsSchedule KsSchedule;

/*
 A multivariate time series: `len` samples of `dim` channels.
 */
typedef struct KsSeries KsSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the last failed call on this thread, or null if the
 last call succeeded. Valid until the next call on this thread.
 */
const char *ks_last_error_message(void);

/*
 Release a string returned by this library.

 # Safety
 `s` must be null or a string returned by this library and not yet freed.
 */
void ks_string_free(char *s);

/*
 Build a series from `len * dim` row-major values.

 # Safety
 `data` must point to `len * dim` readable doubles; `out_series` must be writable.
 */
enum KsStatus ks_series_new(const double *data,
                            size_t len,
                            size_t dim,
                            double sample_rate_hz,
                            struct KsSeries **out_series);

/*
 Load the given 0-based columns of a whitespace-separated kinematics file.
 With `columns` null and `column_count` 0, the default slave-arm Cartesian
 columns are used.

 # Safety
 `path` must be a NUL-terminated string; `columns` must hold `column_count` values.
 */
enum KsStatus ks_series_load_kinematics(const char *path,
                                        const size_t *columns,
                                        size_t column_count,
                                        double sample_rate_hz,
                                        struct KsSeries **out_series);

/*
 # Safety
 `series` must be null or a live handle.
 */
void ks_series_free(struct KsSeries *series);

/*
 Number of samples, or 0 for a null handle.

 # Safety
 `series` must be null or a live handle.
 */
size_t ks_series_len(const struct KsSeries *series);

/*
 Number of channels, or 0 for a null handle.

 # Safety
 `series` must be null or a live handle.
 */
size_t ks_series_dim(const struct KsSeries *series);

/*
 Copy the row-major values into `dst`, which must hold `len * dim` doubles.

 # Safety
 `series` must be a live handle; `dst` must have room for `capacity` doubles.
 */
enum KsStatus ks_series_copy(const struct KsSeries *series, double *dst, size_t capacity);

/*
 Cumulative DTW cost between two series. A negative `window` means no band.

 # Safety
 `a` and `b` must be live handles; `out_cost` must be writable.
 */
enum KsStatus ks_dtw_cost(const struct KsSeries *a,
                          const struct KsSeries *b,
                          int64_t window,
                          double *out_cost);

/*
 Optimal warping path between two series. A negative `window` means no band.

 # Safety
 `a` and `b` must be live handles; `out_path` must be writable.
 */
enum KsStatus ks_dtw(const struct KsSeries *a,
                     const struct KsSeries *b,
                     int64_t window,
                     struct KsPath **out_path);

/*
 # Safety
 `path` must be null or a live handle.
 */
void ks_path_free(struct KsPath *path);

/*
 Number of steps, or 0 for a null handle.

 # Safety
 `path` must be null or a live handle.
 */
size_t ks_path_len(const struct KsPath *path);

/*
 Path cost, or NaN for a null handle.

 # Safety
 `path` must be null or a live handle.
 */
double ks_path_cost(const struct KsPath *path);

/*
 Index pair of step `k`.

 # Safety
 `path` must be a live handle; `out_i` and `out_j` must be writable.
 */
enum KsStatus ks_path_step(const struct KsPath *path, size_t k, size_t *out_i, size_t *out_j);

/*
 Average `count` series with DBA and dilate each to the average's length.

 # Safety
 `set` must hold `count` live series handles; `out_result` must be writable.
 */
enum KsStatus ks_nlts(const struct KsSeries *const *set,
                      size_t count,
                      size_t max_iterations,
                      double rel_tolerance,
                      struct KsNlts **out_result);

/*
 # Safety
 `result` must be null or a live handle.
 */
void ks_nlts_free(struct KsNlts *result);

/*
 Length of the average and of every dilation map, or 0 for a null handle.

 # Safety
 `result` must be null or a live handle.
 */
size_t ks_nlts_len(const struct KsNlts *result);

/*
 Sum of DTW costs from every member to the final average, or NaN for a null handle.

 # Safety
 `result` must be null or a live handle.
 */
double ks_nlts_total_cost(const struct KsNlts *result);

/*
 New series handle holding a copy of the average.

 # Safety
 `result` must be a live handle; `out_series` must be writable.
 */
enum KsStatus ks_nlts_average(const struct KsNlts *result, struct KsSeries **out_series);

/*
 Copy member `member`'s dilation map: source indices into `out_source` and
 duplicate flags (0 or 1) into `out_duplicate`. Either output may be null.
 Both must hold at least `ks_nlts_len` entries.

 # Safety
 `result` must be a live handle; non-null outputs must have room for `capacity` entries.
 */
enum KsStatus ks_nlts_map(const struct KsNlts *result,
                          size_t member,
                          size_t *out_source,
                          uint8_t *out_duplicate,
                          size_t capacity);

/*
 Schedule from a monotone list of source frames starting at 0.

 # Safety
 `trial_id` must be a NUL-terminated string; `sources` must hold `len` values.
 */
enum KsStatus ks_schedule_from_sources(const char *trial_id,
                                       double fps,
                                       const size_t *sources,
                                       size_t len,
                                       struct KsSchedule **out_schedule);

/*
 Align two trials with DTW and produce one schedule per trial.

 # Safety
 Ids must be NUL-terminated strings; series must be live handles; outputs must be writable.
 */
enum KsStatus ks_pairwise_schedules(const char *id_a,
                                    const struct KsSeries *a,
                                    const char *id_b,
                                    const struct KsSeries *b,
                                    int64_t window,
                                    struct KsSchedule **out_a,
                                    struct KsSchedule **out_b);

/*
 Align `count` trials to their DBA average. `out_schedules` receives
 `count` handles, in input order, each to be freed by the caller.

 # Safety
 `ids` and `set` must each hold `count` valid entries; `out_schedules` must have room for `count` handles.
 */
enum KsStatus ks_multi_schedules(const char *const *ids,
                                 const struct KsSeries *const *set,
                                 size_t count,
                                 size_t max_iterations,
                                 double rel_tolerance,
                                 struct KsSchedule **out_schedules);

/*
 Read a schedule file.

 # Safety
 `path` must be a NUL-terminated string; `out_schedule` must be writable.
 */
enum KsStatus ks_schedule_read(const char *path, struct KsSchedule **out_schedule);

/*
 Write a schedule file.

 # Safety
 `schedule` must be a live handle; `path` must be a NUL-terminated string.
 */
enum KsStatus ks_schedule_write(const struct KsSchedule *schedule, const char *path);

/*
 Schedule in its file format. Free the result with [`ks_string_free`].

 # Safety
 `schedule` must be a live handle; `out_text` must be writable.
 */
enum KsStatus ks_schedule_to_text(const struct KsSchedule *schedule, char **out_text);

/*
 # Safety
 `schedule` must be null or a live handle.
 */
void ks_schedule_free(struct KsSchedule *schedule);

/*
 Number of output frames, or 0 for a null handle.

 # Safety
 `schedule` must be null or a live handle.
 */
size_t ks_schedule_len(const struct KsSchedule *schedule);

/*
 Output frame rate, or NaN for a null handle.

 # Safety
 `schedule` must be null or a live handle.
 */
double ks_schedule_fps(const struct KsSchedule *schedule);

/*
 Source frame of output frame `k` and whether it repeats the previous one.

 # Safety
 `schedule` must be a live handle; `out_source` and `out_duplicate` must be writable.
 */
enum KsStatus ks_schedule_entry(const struct KsSchedule *schedule,
                                size_t k,
                                size_t *out_source,
                                uint8_t *out_duplicate);

/*
 Least-squares cubic through `n` points. `out_coefficients` receives
 c0..c3 of `c0 + c1 x + c2 x^2 + c3 x^3`; `out_rss` may be null.

 # Safety
 `xs` and `ys` must hold `n` values; `out_coefficients` must have room for 4.
 */
enum KsStatus ks_polyfit3(const double *xs,
                          const double *ys,
                          size_t n,
                          double *out_coefficients,
                          double *out_rss);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KINSYNC_H */
