#ifndef GFL_H
#define GFL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GflScheduleMode {
  GFL_SCHEDULE_MODE_STATIC = 0,
  GFL_SCHEDULE_MODE_DYNAMIC = 1,
} GflScheduleMode;

typedef enum GflStaticRule {
  // Stage change when `epoch % stages == 0`.
  GFL_STATIC_RULE_LITERAL = 0,
  // Stage change every `max(1, epochs / stages)` epochs.
  GFL_STATIC_RULE_STAGE_INTERVAL = 1,
} GflStaticRule;

typedef enum GflStatus {
  GFL_STATUS_OK = 0,
  GFL_STATUS_NULL_POINTER = 1,
  GFL_STATUS_INVALID_ARGUMENT = 2,
  GFL_STATUS_INVALID_CONFIG = 3,
  GFL_STATUS_FILE_NOT_FOUND = 4,
  GFL_STATUS_UNSUPPORTED_FORMAT = 5,
  GFL_STATUS_CORRUPT_DATA = 6,
  GFL_STATUS_IO = 7,
  GFL_STATUS_INVALID_IMAGE = 8,
  GFL_STATUS_DIMENSION_MISMATCH = 9,
  GFL_STATUS_BUFFER_TOO_SMALL = 10,
  GFL_STATUS_NON_FINITE = 11,
  GFL_STATUS_PANIC = 99,
} GflStatus;

// Opaque image handle.
typedef struct GflImage GflImage;

// Opaque band-allocation scheduler handle.
typedef struct GflSchedule GflSchedule;

typedef struct GflLossBreakdown {
  double ch_c;
  double pi_c;
  double theta_c;
  double total;
} GflLossBreakdown;

// Plain-data schedule description. `has_loss_threshold` selects whether
// `loss_threshold` is used (dynamic mode only).
typedef struct GflScheduleConfig {
  double omega0;
  double omega_final;
  size_t epochs;
  size_t stages;
  enum GflScheduleMode mode;
  enum GflStaticRule static_rule;
  bool has_loss_threshold;
  double loss_threshold;
} GflScheduleConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or null if
// none. The pointer stays valid until the next failing call on the thread.
const char *gfl_last_error_message(void);

// Creates an image from `height*width*channels` planar samples.
//
// # Safety
// `data` must point to that many readable `f64`s; `out` must be writable.
enum GflStatus gfl_image_new(size_t height,
                             size_t width,
                             size_t channels,
                             const double *data,
                             struct GflImage **out);

// Loads an 8-bit PNG, PGM or PPM file.
//
// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum GflStatus gfl_image_load(const char *path, struct GflImage **out);

// Saves an image; the format follows the extension (`.pgm`/`.ppm`/`.pnm`
// for netpbm, PNG otherwise).
//
// # Safety
// `image` must be a live handle and `path` a nul-terminated string.
enum GflStatus gfl_image_save(const struct GflImage *image, const char *path);

// Writes the image shape. Any of the output pointers may be null.
//
// # Safety
// `image` must be a live handle; non-null outputs must be writable.
enum GflStatus gfl_image_dims(const struct GflImage *image,
                              size_t *height,
                              size_t *width,
                              size_t *channels);

// Copies the planar samples into `out`, which holds `capacity` values.
//
// # Safety
// `image` must be a live handle and `out` must have room for `capacity`
// `f64`s.
enum GflStatus gfl_image_copy_data(const struct GflImage *image, double *out, size_t capacity);

// Releases an image. Null is ignored.
//
// # Safety
// `image` must be null or a handle not yet freed.
void gfl_image_free(struct GflImage *image);

// Evaluates the guided frequency loss of `restored` against `target`.
// A negative `mask_omega` disables the high-frequency term.
//
// # Safety
// Both images must be live handles and `out` writable.
enum GflStatus gfl_loss(const struct GflImage *restored,
                        const struct GflImage *target,
                        double epsilon,
                        double mask_omega,
                        struct GflLossBreakdown *out);

// Gradient of the loss with respect to `restored`, written as planar
// samples into `out` (`capacity` values).
//
// # Safety
// Both images must be live handles and `out` must have room for
// `capacity` `f64`s.
enum GflStatus gfl_loss_gradient(const struct GflImage *restored,
                                 const struct GflImage *target,
                                 double epsilon,
                                 double mask_omega,
                                 double *out,
                                 size_t capacity);

// PSNR in dB with peak 1 (capped at 120 for identical images).
//
// # Safety
// Both images must be live handles and `out` writable.
enum GflStatus gfl_psnr(const struct GflImage *a, const struct GflImage *b, double *out);

// Mean SSIM over channels (11×11 Gaussian window).
//
// # Safety
// Both images must be live handles and `out` writable.
enum GflStatus gfl_ssim(const struct GflImage *a, const struct GflImage *b, double *out);

// Creates a scheduler in its initial state (threshold `omega0`).
//
// # Safety
// `config` must be readable and `out` writable.
enum GflStatus gfl_schedule_new(const struct GflScheduleConfig *config, struct GflSchedule **out);

// Advances to `epoch` (1-based, strictly consecutive) and writes the
// threshold used for that epoch. `has_last_loss` says whether
// `last_epoch_loss` holds the previous epoch's mean loss.
//
// # Safety
// `schedule` must be a live handle and `omega_out` writable.
enum GflStatus gfl_schedule_on_epoch(struct GflSchedule *schedule,
                                     size_t epoch,
                                     bool has_last_loss,
                                     double last_epoch_loss,
                                     double *omega_out);

// Whether the schedule has reached its final threshold.
//
// # Safety
// `schedule` must be a live handle and `out` writable.
enum GflStatus gfl_schedule_is_frozen(const struct GflSchedule *schedule, bool *out);

// Releases a scheduler. Null is ignored.
//
// # Safety
// `schedule` must be null or a handle not yet freed.
void gfl_schedule_free(struct GflSchedule *schedule);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GFL_H */
