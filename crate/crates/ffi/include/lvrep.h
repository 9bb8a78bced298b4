#ifndef LVREP_H
#define LVREP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum LvrepStatus {
  LVREP_STATUS_OK = 0,
  LVREP_STATUS_NULL_POINTER = 1,
  LVREP_STATUS_INVALID_PARAM = 2,
  LVREP_STATUS_NUMERIC = 3,
  LVREP_STATUS_EMPTY_DATASET = 4,
  LVREP_STATUS_IO = 5,
  LVREP_STATUS_JSON = 6,
  LVREP_STATUS_UTF8 = 7,
  LVREP_STATUS_BUFFER_TOO_SMALL = 8,
  LVREP_STATUS_PANIC = 9,
} LvrepStatus;

/*
 Bonus shape for `lvrep_bonus_table`.
 */
typedef enum LvrepBonusMode {
  LVREP_BONUS_MODE_NORM_CLIPPED = 0,
  LVREP_BONUS_MODE_QUADRATIC = 1,
} LvrepBonusMode;

/*
 Tabular MDP handle.
 */
typedef struct LvrepMdp LvrepMdp;

/*
 Learned latent factor model handle.
 */
typedef struct LvrepModel LvrepModel;

/*
 Stochastic policy handle.
 */
typedef struct LvrepPolicy LvrepPolicy;

/*
 Agent settings exposed over the ABI. Start from
 `lvrep_agent_config_default` and override fields.
 */
typedef struct LvrepAgentConfig {
  size_t n_episodes;
  size_t n_latent;
  size_t fit_restarts;
  size_t fit_max_iters;
  /*
   Multiplier on the confidence width; 0 disables the bonus or penalty.
   */
  double bonus_scale;
  uint64_t seed;
} LvrepAgentConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL if none. The
 pointer stays valid until the next failing call on this thread.
 */
const char *lvrep_last_error_message(void);

/*
 Static description of a status code.
 */
const char *lvrep_status_name(enum LvrepStatus status);

/*
 # Safety
 `s` must be NULL or a string returned by this library and not yet freed.
 */
void lvrep_string_free(char *s);

/*
 Chain MDP with `n_states >= 3`; see the core crate for dynamics.

 # Safety
 `out` must be a valid pointer to writable storage for a handle.
 */
enum LvrepStatus lvrep_mdp_chain(size_t n_states, double slip, double gamma, struct LvrepMdp **out);

/*
 Random block MDP together with its ground-truth factorization.
 `out_model` may be NULL when the factorization is not wanted.

 # Safety
 `out_mdp` must be valid; `out_model` must be NULL or valid.
 */
enum LvrepStatus lvrep_mdp_block(size_t n_states,
                                 size_t n_actions,
                                 size_t n_latent,
                                 double concentration,
                                 uint64_t seed,
                                 struct LvrepMdp **out_mdp,
                                 struct LvrepModel **out_model);

/*
 # Safety
 `json` must be a NUL-terminated string; `out` must be valid.
 */
enum LvrepStatus lvrep_mdp_from_json(const char *json, struct LvrepMdp **out);

/*
 Serialize to JSON; free the result with `lvrep_string_free`.

 # Safety
 `mdp` must be a live handle; `out` must be valid.
 */
enum LvrepStatus lvrep_mdp_to_json(const struct LvrepMdp *mdp, char **out);

/*
 Number of states, or 0 for a NULL handle.

 # Safety
 `mdp` must be NULL or a live handle.
 */
size_t lvrep_mdp_n_states(const struct LvrepMdp *mdp);

/*
 Number of actions, or 0 for a NULL handle.

 # Safety
 `mdp` must be NULL or a live handle.
 */
size_t lvrep_mdp_n_actions(const struct LvrepMdp *mdp);

/*
 # Safety
 `mdp` must be NULL or a handle not yet freed.
 */
void lvrep_mdp_free(struct LvrepMdp *mdp);

/*
 Optimal state values into `out_v` (length >= n_states) and, if `out_policy`
 is not NULL, the greedy policy.

 # Safety
 `mdp` must be a live handle; `out_v` must hold `v_len` doubles;
 `out_policy` must be NULL or valid.
 */
enum LvrepStatus lvrep_value_iteration(const struct LvrepMdp *mdp,
                                       double tol,
                                       double *out_v,
                                       size_t v_len,
                                       struct LvrepPolicy **out_policy);

/*
 Expected discounted return of `policy` from the initial distribution.

 # Safety
 Handles must be live; `out_value` must be valid.
 */
enum LvrepStatus lvrep_policy_value(const struct LvrepMdp *mdp,
                                    const struct LvrepPolicy *policy,
                                    double *out_value);

/*
 Policy from a row-stochastic `n_states * n_actions` table.

 # Safety
 `probs` must hold `n_states * n_actions` doubles; `out` must be valid.
 */
enum LvrepStatus lvrep_policy_new(size_t n_states,
                                  size_t n_actions,
                                  const double *probs,
                                  struct LvrepPolicy **out);

/*
 Copy the policy table into `out_probs` (length >= n_states * n_actions).

 # Safety
 `policy` must be a live handle; `out_probs` must hold `len` doubles.
 */
enum LvrepStatus lvrep_policy_probs(const struct LvrepPolicy *policy,
                                    double *out_probs,
                                    size_t len);

/*
 Number of states, or 0 for a NULL handle.

 # Safety
 `policy` must be NULL or a live handle.
 */
size_t lvrep_policy_n_states(const struct LvrepPolicy *policy);

/*
 Number of actions, or 0 for a NULL handle.

 # Safety
 `policy` must be NULL or a live handle.
 */
size_t lvrep_policy_n_actions(const struct LvrepPolicy *policy);

/*
 # Safety
 `policy` must be NULL or a handle not yet freed.
 */
void lvrep_policy_free(struct LvrepPolicy *policy);

/*
 Fit a latent factor model to `len` transitions `(s[i], a[i], s_next[i])`.

 # Safety
 `s`, `a`, `s_next` must each hold `len` entries; `out` must be valid.
 */
enum LvrepStatus lvrep_model_fit(size_t n_states,
                                 size_t n_actions,
                                 const size_t *s,
                                 const size_t *a,
                                 const size_t *s_next,
                                 size_t len,
                                 size_t n_latent,
                                 size_t restarts,
                                 size_t max_iters,
                                 uint64_t seed,
                                 struct LvrepModel **out);

/*
 # Safety
 `json` must be a NUL-terminated string; `out` must be valid.
 */
enum LvrepStatus lvrep_model_from_json(const char *json, struct LvrepModel **out);

/*
 Serialize to JSON; free the result with `lvrep_string_free`.

 # Safety
 `model` must be a live handle; `out` must be valid.
 */
enum LvrepStatus lvrep_model_to_json(const struct LvrepModel *model, char **out);

/*
 Write `n_states`, `n_actions` and `n_latent`; any pointer may be NULL.

 # Safety
 `model` must be a live handle; non-NULL outputs must be valid.
 */
enum LvrepStatus lvrep_model_dims(const struct LvrepModel *model,
                                  size_t *n_states,
                                  size_t *n_actions,
                                  size_t *n_latent);

/*
 Composed transition table `sum_z phi(z|s,a) mu(s'|z)`, length
 `n_states * n_actions * n_states`.

 # Safety
 `model` must be a live handle; `out` must hold `len` doubles.
 */
enum LvrepStatus lvrep_model_transition(const struct LvrepModel *model, double *out, size_t len);

/*
 Mean log-likelihood per transition of `len` triples under the model.

 # Safety
 As for `lvrep_model_fit`; `out_value` must be valid.
 */
enum LvrepStatus lvrep_model_log_likelihood(const struct LvrepModel *model,
                                            const size_t *s,
                                            const size_t *a,
                                            const size_t *s_next,
                                            size_t len,
                                            double *out_value);

/*
 # Safety
 `model` must be NULL or a handle not yet freed.
 */
void lvrep_model_free(struct LvrepModel *model);

/*
 Elliptical bonus at every `(s, a)` under the model's features, with the
 covariance `lambda I + sum_{s,a} counts[s,a] phi phi^T`.

 # Safety
 `model` must be a live handle; `pair_counts` must hold
 `n_states * n_actions` entries; `out` must hold `len` doubles.
 */
enum LvrepStatus lvrep_bonus_table(const struct LvrepModel *model,
                                   const size_t *pair_counts,
                                   double alpha,
                                   double lambda,
                                   double clip,
                                   enum LvrepBonusMode mode,
                                   double *out,
                                   size_t len);

struct LvrepAgentConfig lvrep_agent_config_default(void);

/*
 Online optimistic exploration. Writes the true value of the final policy
 and its cumulative regret; `out_policy` may be NULL.

 # Safety
 `mdp` and `cfg` must be valid; non-NULL outputs must be valid.
 */
enum LvrepStatus lvrep_run_online(const struct LvrepMdp *mdp,
                                  const struct LvrepAgentConfig *cfg,
                                  double *out_value,
                                  double *out_regret,
                                  struct LvrepPolicy **out_policy);

/*
 Offline pessimistic planning from `n_samples` transitions drawn under
 `behavior`. Writes the true value of the returned policy; `out_policy`
 may be NULL.

 # Safety
 Handles and `cfg` must be valid; non-NULL outputs must be valid.
 */
enum LvrepStatus lvrep_run_offline(const struct LvrepMdp *mdp,
                                   const struct LvrepPolicy *behavior,
                                   size_t n_samples,
                                   const struct LvrepAgentConfig *cfg,
                                   double *out_value,
                                   struct LvrepPolicy **out_policy);

/*
 Expected discounted return of `policy` weighted by the MDP's initial
 distribution, computed from precomputed state values. Convenience for
 callers that keep values from `lvrep_value_iteration`.

 # Safety
 `mdp` must be a live handle; `v` must hold `len` doubles.
 */
enum LvrepStatus lvrep_initial_value(const struct LvrepMdp *mdp,
                                     const double *v,
                                     size_t len,
                                     double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LVREP_H */
