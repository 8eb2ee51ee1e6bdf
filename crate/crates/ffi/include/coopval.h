#ifndef COOPVAL_H
#define COOPVAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum CoopStatus {
  COOP_STATUS_OK = 0,
  COOP_STATUS_NULL_POINTER = 1,
  COOP_STATUS_INVALID_UTF8 = 2,
  // Malformed JSON input.
  COOP_STATUS_PARSE_ERROR = 3,
  COOP_STATUS_DOMAIN_ERROR = 4,
  COOP_STATUS_VALIDATION_ERROR = 5,
  COOP_STATUS_INFEASIBLE_TRAJECTORY = 6,
  // Member or denomination errors from the ledger.
  COOP_STATUS_LEDGER_ERROR = 7,
  // An internal panic was caught at the boundary.
  COOP_STATUS_PANIC = 8,
} CoopStatus;

// Opaque handle to a member-account book.
typedef struct CoopBook CoopBook;

// Opaque handle to a built firm trajectory.
typedef struct CoopTrajectory CoopTrajectory;

typedef struct CoopAssetSpec {
  double cost;
  double capital_services;
  double rental_rate;
  double salvage;
  uint32_t lifetime;
  double price;
  double output;
  double variable_cost;
  double wage_rate;
  double labor;
} CoopAssetSpec;

typedef struct CoopAssetValuation {
  double passive_value;
  double active_value;
  double pure_profit_per_year;
  double goodwill_simple;
  double arbitrage_gap;
} CoopAssetValuation;

typedef struct CoopEquivalence {
  double dividend_stream;
  double discounted_cashflow;
  double earnings_recursion;
  double nav_plus_goodwill;
  double backward_recursion;
  double max_rel_deviation;
  bool passed;
} CoopEquivalence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the calling thread's most recent failure, or null if none.
const char *coop_last_error_message(void);

// Library version as a static string.
const char *coop_version(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void coop_string_free(char *s);

// `(1+r)^-k`.
//
// # Safety
// `out` must be valid for writes.
enum CoopStatus coop_discount_factor(double r, uint32_t k, double *out);

// Present value of 1 a period for `n` periods.
//
// # Safety
// `out` must be valid for writes.
enum CoopStatus coop_annuity_pv(uint32_t n, double r, double *out);

// Present value of `len` end-of-period flows.
//
// # Safety
// `flows` must point to `len` doubles (or be null with `len == 0`); `out`
// must be valid for writes.
enum CoopStatus coop_present_value(const double *flows, size_t len, double r, double *out);

// `1 - sum_{k=1..K} r/(1+r)^k`, evaluated exactly then rounded.
//
// # Safety
// `out` must be valid for writes.
enum CoopStatus coop_perpetuity_identity_residual(double r, uint32_t periods, double *out);

// Passive and active value of one asset and the goodwill between them.
//
// # Safety
// `spec` must be readable and `out` writable.
enum CoopStatus coop_asset_decompose(const struct CoopAssetSpec *spec,
                                     double r,
                                     struct CoopAssetValuation *out);

// Build a trajectory from firm primitives given as JSON, e.g.
// `{"rate":0.1,"nav0":1000,"shares0":100,"profit":[150,150],"investment":[0,0]}`.
// `terminal_json` may be null for zero horizon goodwill, or e.g.
// `{"type":"explicit_value","value":1200}`.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be writable.
enum CoopStatus coop_trajectory_build(const char *primitives_json,
                                      const char *terminal_json,
                                      struct CoopTrajectory **out);

// Release a trajectory. Null is ignored.
//
// # Safety
// `traj` must come from [`coop_trajectory_build`] and not be used again.
void coop_trajectory_free(struct CoopTrajectory *traj);

// Number of periods `T`.
//
// # Safety
// `traj` must be a live handle and `out` writable.
enum CoopStatus coop_trajectory_horizon(const struct CoopTrajectory *traj, size_t *out);

// Firm value `V[t]` from the backward recursion.
//
// # Safety
// `traj` must be a live handle and `out` writable.
enum CoopStatus coop_trajectory_value(const struct CoopTrajectory *traj, size_t t, double *out);

// Net asset value `NAV[t]`.
//
// # Safety
// `traj` must be a live handle and `out` writable.
enum CoopStatus coop_trajectory_nav(const struct CoopTrajectory *traj, size_t t, double *out);

// Goodwill `GW[t]`: discounted pure profit plus horizon goodwill.
//
// # Safety
// `traj` must be a live handle and `out` writable.
enum CoopStatus coop_trajectory_goodwill(const struct CoopTrajectory *traj, size_t t, double *out);

// All five valuations at `t` and whether they agree within `tol`.
//
// # Safety
// `traj` must be a live handle and `out` writable.
enum CoopStatus coop_trajectory_check_equivalence(const struct CoopTrajectory *traj,
                                                  size_t t,
                                                  double tol,
                                                  struct CoopEquivalence *out);

// Empty value-denominated book (internal capital accounts).
//
// # Safety
// `out` must be writable.
enum CoopStatus coop_book_new_value(double ica_interest_rate, struct CoopBook **out);

// Empty share-denominated book at an internal price given in cents.
//
// # Safety
// `out` must be writable.
enum CoopStatus coop_book_new_shares(int64_t share_price_cents,
                                     double ica_interest_rate,
                                     struct CoopBook **out);

// Release a book. Null is ignored.
//
// # Safety
// `book` must come from a `coop_book_new_*` call and not be used again.
void coop_book_free(struct CoopBook *book);

// Apply one event given as JSON, e.g.
// `{"kind":"Contribution","payload":{"member":"a","amount":"100.00"}}`.
// On failure the book is unchanged. If `outcome_json` is not null it
// receives the payout, revaluation and flags as JSON.
//
// # Safety
// `book` must be a live handle; `event_json` NUL-terminated;
// `outcome_json` null or writable.
enum CoopStatus coop_book_apply_event(struct CoopBook *book,
                                      const char *event_json,
                                      char **outcome_json);

// Canonical JSON snapshot of the book.
//
// # Safety
// `book` must be a live handle and `out` writable.
enum CoopStatus coop_book_to_json(const struct CoopBook *book, char **out);

// Company NAV in cents.
//
// # Safety
// `book` must be a live handle and `out` writable.
enum CoopStatus coop_book_company_nav_cents(const struct CoopBook *book, int64_t *out);

// Per-member market-rule versus NAV-rule payouts at `market_value_cents`,
// as JSON.
//
// # Safety
// `book` must be a live handle and `out` writable.
enum CoopStatus coop_book_sellout_incentive(const struct CoopBook *book,
                                            int64_t market_value_cents,
                                            char **out);

// Verify the book's conservation invariants.
//
// # Safety
// `book` must be a live handle.
enum CoopStatus coop_book_check_invariants(const struct CoopBook *book);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COOPVAL_H */
