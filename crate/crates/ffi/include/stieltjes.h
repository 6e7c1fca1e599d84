#ifndef STIELTJES_H
#define STIELTJES_H

/* Generated by cbindgen; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum StjRole {
  STJ_ROLE_PUT = 0,
  STJ_ROLE_CALL = 1,
} StjRole;

typedef enum StjStatus {
  STJ_STATUS_OK = 0,
  STJ_STATUS_NULL_POINTER = 1,
  STJ_STATUS_INVALID_UTF8 = 2,
  STJ_STATUS_PARSE = 3,
  STJ_STATUS_INVALID_INPUT = 4,
  STJ_STATUS_VALIDATION = 5,
  STJ_STATUS_NUMERICAL = 6,
  STJ_STATUS_OUT_OF_SPAN = 7,
  STJ_STATUS_BUFFER_TOO_SMALL = 8,
  STJ_STATUS_PANIC = 9,
} StjStatus;

// Put or call curve handle.
typedef struct StjCurve StjCurve;

// Pricing measure handle.
typedef struct StjMeasure StjMeasure;

// Piecewise difference-of-convex payoff handle.
typedef struct StjPayoff StjPayoff;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *stj_last_error_message(void);

// Parses a measure from its JSON spec.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum StjStatus stj_measure_from_json(const char *json, struct StjMeasure **out);

// # Safety
// `m` must be null or a handle from [`stj_measure_from_json`] not yet freed.
void stj_measure_free(struct StjMeasure *m);

// F(x), right-continuous.
//
// # Safety
// `m` must be a live measure handle and `out` writable.
enum StjStatus stj_measure_cdf(const struct StjMeasure *m, double x, double *out);

// F(x−), left limit.
//
// # Safety
// `m` must be a live measure handle and `out` writable.
enum StjStatus stj_measure_cdf_left(const struct StjMeasure *m, double x, double *out);

// F(∞)
//
// # Safety
// `m` must be a live measure handle and `out` writable.
enum StjStatus stj_measure_total_mass(const struct StjMeasure *m, double *out);

// ∫ x dF
//
// # Safety
// `m` must be a live measure handle and `out` writable.
enum StjStatus stj_measure_mean(const struct StjMeasure *m, double *out);

// Put or call curve of a measure on `n` strikes.
//
// # Safety
// `m` must be a live measure handle, `strikes` must point to `n` doubles
// and `out` must be writable.
enum StjStatus stj_curve_from_measure(const struct StjMeasure *m,
                                      enum StjRole role,
                                      const double *strikes,
                                      uintptr_t n,
                                      struct StjCurve **out);

// Curve from quoted prices. Pass NaN for unknown `f_infinity` or `mean`.
//
// # Safety
// `strikes` and `values` must point to `n` doubles each and `out` must be
// writable.
enum StjStatus stj_curve_from_grid(enum StjRole role,
                                   const double *strikes,
                                   const double *values,
                                   uintptr_t n,
                                   double f_infinity,
                                   double mean,
                                   struct StjCurve **out);

// # Safety
// `c` must be null or a curve handle not yet freed.
void stj_curve_free(struct StjCurve *c);

// Price at strike `k`.
//
// # Safety
// `c` must be a live curve handle and `out` writable.
enum StjStatus stj_curve_eval(const struct StjCurve *c, double k, double *out);

// Right-difference CDF estimate from a put curve. Writes up to `cap`
// entries into each of `strikes`, `f_hat` and `bound` and the required
// length into `len`; returns `BUFFER_TOO_SMALL` when `cap < *len`.
//
// # Safety
// `c` must be a live curve handle, the three buffers must hold `cap`
// doubles each (or be null when `cap` is 0) and `len` must be writable.
enum StjStatus stj_cdf_from_puts(const struct StjCurve *c,
                                 double *strikes,
                                 double *f_hat,
                                 double *bound,
                                 uintptr_t cap,
                                 uintptr_t *len);

// Parses a piecewise difference-of-convex payoff from its JSON spec.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum StjStatus stj_payoff_from_json(const char *json, struct StjPayoff **out);

// # Safety
// `p` must be null or a payoff handle not yet freed.
void stj_payoff_free(struct StjPayoff *p);

// g(x)
//
// # Safety
// `p` must be a live payoff handle and `out` writable.
enum StjStatus stj_payoff_eval(const struct StjPayoff *p, double x, double *out);

// Price of a payoff from a call curve carrying F(∞) and mean metadata.
//
// # Safety
// `call` and `payoff` must be live handles and `out` writable.
enum StjStatus stj_price_payoff(const struct StjCurve *call,
                                const struct StjPayoff *payoff,
                                double *out);

// Zero-rate Black–Scholes put.
double stj_bs_put(double s0, double k, double t, double sigma);

// Implied volatility of a zero-rate put price.
//
// # Safety
// `out` must be writable.
enum StjStatus stj_implied_vol(double price, double s0, double k, double t, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STIELTJES_H */
