//! C ABI over `lvrep`.
//!
//! Objects cross the boundary as opaque handles (`LvrepMdp`, `LvrepModel`,
//! `LvrepPolicy`) that the caller owns and releases with the matching
//! `*_free`. Every fallible call returns an `LvrepStatus`; on failure the
//! message is available from `lvrep_last_error_message` on the same thread.
//! Strings returned by the library are released with `lvrep_string_free`.
//!
//! Array layouts follow the core crate: `(s, a)` pairs are flattened as
//! `s * n_actions + a` and transitions as `(s * n_actions + a) * n_states + s'`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lvrep::agent::{self, AgentConfig};
use lvrep::env::{self, BlockMdpSpec, Policy, TabularMdp};
use lvrep::explore::{self, BonusMode, BonusParams, CovarianceState};
use lvrep::features::{lvrep_feature, FeatureVector};
use lvrep::latent_model::{self, FitConfig, LatentFactorModel, TransitionDataset};
use lvrep::util::{self, seeded};
use lvrep::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvrepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParam = 2,
    Numeric = 3,
    EmptyDataset = 4,
    Io = 5,
    Json = 6,
    Utf8 = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Tabular MDP handle.
pub struct LvrepMdp(TabularMdp);

/// Learned latent factor model handle.
pub struct LvrepModel(LatentFactorModel);

/// Stochastic policy handle.
pub struct LvrepPolicy(Policy);

/// Bonus shape for `lvrep_bonus_table`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvrepBonusMode {
    NormClipped = 0,
    Quadratic = 1,
}

/// Agent settings exposed over the ABI. Start from
/// `lvrep_agent_config_default` and override fields.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LvrepAgentConfig {
    pub n_episodes: usize,
    pub n_latent: usize,
    pub fit_restarts: usize,
    pub fit_max_iters: usize,
    /// Multiplier on the confidence width; 0 disables the bonus or penalty.
    pub bonus_scale: f64,
    pub seed: u64,
}

impl LvrepAgentConfig {
    fn to_core(self) -> AgentConfig {
        let mut cfg = AgentConfig {
            n_episodes: self.n_episodes,
            n_latent: self.n_latent,
            seed: self.seed,
            ..AgentConfig::default()
        };
        cfg.fit.restarts = self.fit_restarts;
        cfg.fit.max_iters = self.fit_max_iters;
        cfg.bonus.scale = self.bonus_scale;
        cfg
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(LvrepStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::EmptyDataset => LvrepStatus::EmptyDataset,
            Error::Io(_) | Error::Read { .. } => LvrepStatus::Io,
            Error::Json(_) => LvrepStatus::Json,
            e if e.is_numeric() => LvrepStatus::Numeric,
            _ => LvrepStatus::InvalidParam,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: LvrepStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Run `body`, converting errors and panics into a status and recording the
/// message for `lvrep_last_error_message`.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> LvrepStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LvrepStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(&format!("panic: {msg}"));
            LvrepStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(LvrepStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(LvrepStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(LvrepStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len < needed {
        return Err(fail(
            LvrepStatus::BufferTooSmall,
            format!("{what} holds {len} values, {needed} needed"),
        ));
    }
    if p.is_null() {
        return Err(fail(LvrepStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(LvrepStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(LvrepStatus::Utf8, format!("{what}: {e}")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| fail(LvrepStatus::Json, e.to_string()))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

// ---------------------------------------------------------------------------
// Errors and strings

/// Message of the last failed call on this thread, or NULL if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn lvrep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn lvrep_status_name(status: LvrepStatus) -> *const c_char {
    let s: &'static CStr = match status {
        LvrepStatus::Ok => c"ok",
        LvrepStatus::NullPointer => c"null pointer",
        LvrepStatus::InvalidParam => c"invalid parameter",
        LvrepStatus::Numeric => c"numeric failure",
        LvrepStatus::EmptyDataset => c"empty dataset",
        LvrepStatus::Io => c"io error",
        LvrepStatus::Json => c"json error",
        LvrepStatus::Utf8 => c"invalid utf-8",
        LvrepStatus::BufferTooSmall => c"buffer too small",
        LvrepStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lvrep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// MDPs

/// Chain MDP with `n_states >= 3`; see the core crate for dynamics.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn lvrep_mdp_chain(n_states: usize, slip: f64, gamma: f64, out: *mut *mut LvrepMdp) -> LvrepStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(LvrepMdp(env::build_chain_mdp(n_states, slip, gamma)?));
        Ok(())
    })
}

/// Random block MDP together with its ground-truth factorization.
/// `out_model` may be NULL when the factorization is not wanted.
///
/// # Safety
/// `out_mdp` must be valid; `out_model` must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_mdp_block(
    n_states: usize,
    n_actions: usize,
    n_latent: usize,
    concentration: f64,
    seed: u64,
    out_mdp: *mut *mut LvrepMdp,
    out_model: *mut *mut LvrepModel,
) -> LvrepStatus {
    guard(|| {
        let out_mdp = out_ref(out_mdp, "out_mdp")?;
        let spec = BlockMdpSpec::new(n_states, n_actions, n_latent, concentration, seed);
        let (mdp, model) = env::build_random_block_mdp(&spec)?;
        if let Some(slot) = out_model.as_mut() {
            *slot = boxed(LvrepModel(model));
        }
        *out_mdp = boxed(LvrepMdp(mdp));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_mdp_from_json(json: *const c_char, out: *mut *mut LvrepMdp) -> LvrepStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let out = out_ref(out, "out")?;
        *out = boxed(LvrepMdp(TabularMdp::from_json(text)?));
        Ok(())
    })
}

/// Serialize to JSON; free the result with `lvrep_string_free`.
///
/// # Safety
/// `mdp` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_mdp_to_json(mdp: *const LvrepMdp, out: *mut *mut c_char) -> LvrepStatus {
    guard(|| {
        let mdp = deref(mdp, "mdp")?;
        let out = out_ref(out, "out")?;
        *out = into_c_string(mdp.0.to_json())?;
        Ok(())
    })
}

/// Number of states, or 0 for a NULL handle.
///
/// # Safety
/// `mdp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lvrep_mdp_n_states(mdp: *const LvrepMdp) -> usize {
    mdp.as_ref().map_or(0, |m| m.0.n_states())
}

/// Number of actions, or 0 for a NULL handle.
///
/// # Safety
/// `mdp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lvrep_mdp_n_actions(mdp: *const LvrepMdp) -> usize {
    mdp.as_ref().map_or(0, |m| m.0.n_actions())
}

/// # Safety
/// `mdp` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lvrep_mdp_free(mdp: *mut LvrepMdp) {
    if !mdp.is_null() {
        drop(Box::from_raw(mdp));
    }
}

/// Optimal state values into `out_v` (length >= n_states) and, if `out_policy`
/// is not NULL, the greedy policy.
///
/// # Safety
/// `mdp` must be a live handle; `out_v` must hold `v_len` doubles;
/// `out_policy` must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_value_iteration(
    mdp: *const LvrepMdp,
    tol: f64,
    out_v: *mut f64,
    v_len: usize,
    out_policy: *mut *mut LvrepPolicy,
) -> LvrepStatus {
    guard(|| {
        let mdp = &deref(mdp, "mdp")?.0;
        let out_v = out_slice(out_v, v_len, mdp.n_states(), "out_v")?;
        let sol = env::exact_value_iteration(mdp, None, tol)?;
        out_v.copy_from_slice(&sol.v);
        if let Some(slot) = out_policy.as_mut() {
            *slot = boxed(LvrepPolicy(sol.greedy));
        }
        Ok(())
    })
}

/// Expected discounted return of `policy` from the initial distribution.
///
/// # Safety
/// Handles must be live; `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_policy_value(
    mdp: *const LvrepMdp,
    policy: *const LvrepPolicy,
    out_value: *mut f64,
) -> LvrepStatus {
    guard(|| {
        let mdp = &deref(mdp, "mdp")?.0;
        let policy = &deref(policy, "policy")?.0;
        let out_value = out_ref(out_value, "out_value")?;
        if policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions() {
            return Err(fail(LvrepStatus::InvalidParam, "policy shape does not match the MDP"));
        }
        *out_value = env::evaluate_policy(mdp, policy, None)?.expected(mdp.init_dist());
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Policies

/// Policy from a row-stochastic `n_states * n_actions` table.
///
/// # Safety
/// `probs` must hold `n_states * n_actions` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_policy_new(
    n_states: usize,
    n_actions: usize,
    probs: *const f64,
    out: *mut *mut LvrepPolicy,
) -> LvrepStatus {
    guard(|| {
        let len = n_states
            .checked_mul(n_actions)
            .ok_or_else(|| fail(LvrepStatus::InvalidParam, "policy size overflows"))?;
        let probs = slice(probs, len, "probs")?;
        let out = out_ref(out, "out")?;
        *out = boxed(LvrepPolicy(Policy::new(n_states, n_actions, probs.to_vec())?));
        Ok(())
    })
}

/// Copy the policy table into `out_probs` (length >= n_states * n_actions).
///
/// # Safety
/// `policy` must be a live handle; `out_probs` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lvrep_policy_probs(policy: *const LvrepPolicy, out_probs: *mut f64, len: usize) -> LvrepStatus {
    guard(|| {
        let policy = &deref(policy, "policy")?.0;
        let out = out_slice(out_probs, len, policy.probs().len(), "out_probs")?;
        out.copy_from_slice(policy.probs());
        Ok(())
    })
}

/// Number of states, or 0 for a NULL handle.
///
/// # Safety
/// `policy` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lvrep_policy_n_states(policy: *const LvrepPolicy) -> usize {
    policy.as_ref().map_or(0, |p| p.0.n_states())
}

/// Number of actions, or 0 for a NULL handle.
///
/// # Safety
/// `policy` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lvrep_policy_n_actions(policy: *const LvrepPolicy) -> usize {
    policy.as_ref().map_or(0, |p| p.0.n_actions())
}

/// # Safety
/// `policy` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lvrep_policy_free(policy: *mut LvrepPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

// ---------------------------------------------------------------------------
// Latent factor models

/// Fit a latent factor model to `len` transitions `(s[i], a[i], s_next[i])`.
///
/// # Safety
/// `s`, `a`, `s_next` must each hold `len` entries; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_model_fit(
    n_states: usize,
    n_actions: usize,
    s: *const usize,
    a: *const usize,
    s_next: *const usize,
    len: usize,
    n_latent: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
    out: *mut *mut LvrepModel,
) -> LvrepStatus {
    guard(|| {
        let (s, a, s2) = (slice(s, len, "s")?, slice(a, len, "a")?, slice(s_next, len, "s_next")?);
        let out = out_ref(out, "out")?;
        let mut data = TransitionDataset::new(n_states, n_actions);
        for i in 0..len {
            data.push(s[i], a[i], s2[i])?;
        }
        let cfg = FitConfig {
            restarts,
            max_iters,
            ..FitConfig::default()
        };
        let model = latent_model::fit(&data, n_latent, &cfg, &mut seeded(seed))?;
        *out = boxed(LvrepModel(model));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_model_from_json(json: *const c_char, out: *mut *mut LvrepModel) -> LvrepStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let out = out_ref(out, "out")?;
        *out = boxed(LvrepModel(LatentFactorModel::from_json(text)?));
        Ok(())
    })
}

/// Serialize to JSON; free the result with `lvrep_string_free`.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_model_to_json(model: *const LvrepModel, out: *mut *mut c_char) -> LvrepStatus {
    guard(|| {
        let model = deref(model, "model")?;
        let out = out_ref(out, "out")?;
        *out = into_c_string(model.0.to_json())?;
        Ok(())
    })
}

/// Write `n_states`, `n_actions` and `n_latent`; any pointer may be NULL.
///
/// # Safety
/// `model` must be a live handle; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_model_dims(
    model: *const LvrepModel,
    n_states: *mut usize,
    n_actions: *mut usize,
    n_latent: *mut usize,
) -> LvrepStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        for (p, v) in [(n_states, m.n_states()), (n_actions, m.n_actions()), (n_latent, m.n_latent())] {
            if let Some(slot) = p.as_mut() {
                *slot = v;
            }
        }
        Ok(())
    })
}

/// Composed transition table `sum_z phi(z|s,a) mu(s'|z)`, length
/// `n_states * n_actions * n_states`.
///
/// # Safety
/// `model` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lvrep_model_transition(model: *const LvrepModel, out: *mut f64, len: usize) -> LvrepStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let t = model.compose_transition();
        out_slice(out, len, t.len(), "out")?.copy_from_slice(&t);
        Ok(())
    })
}

/// Mean log-likelihood per transition of `len` triples under the model.
///
/// # Safety
/// As for `lvrep_model_fit`; `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_model_log_likelihood(
    model: *const LvrepModel,
    s: *const usize,
    a: *const usize,
    s_next: *const usize,
    len: usize,
    out_value: *mut f64,
) -> LvrepStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let (s, a, s2) = (slice(s, len, "s")?, slice(a, len, "a")?, slice(s_next, len, "s_next")?);
        let out_value = out_ref(out_value, "out_value")?;
        let mut data = TransitionDataset::new(model.n_states(), model.n_actions());
        for i in 0..len {
            data.push(s[i], a[i], s2[i])?;
        }
        if data.is_empty() {
            return Err(Error::EmptyDataset.into());
        }
        *out_value = latent_model::log_likelihood(model, &data)? / len as f64;
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lvrep_model_free(model: *mut LvrepModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Elliptical bonus at every `(s, a)` under the model's features, with the
/// covariance `lambda I + sum_{s,a} counts[s,a] phi phi^T`.
///
/// # Safety
/// `model` must be a live handle; `pair_counts` must hold
/// `n_states * n_actions` entries; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lvrep_bonus_table(
    model: *const LvrepModel,
    pair_counts: *const usize,
    alpha: f64,
    lambda: f64,
    clip: f64,
    mode: LvrepBonusMode,
    out: *mut f64,
    len: usize,
) -> LvrepStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let na = model.n_actions();
        let n_pairs = model.n_states() * na;
        let counts = slice(pair_counts, n_pairs, "pair_counts")?;
        let out = out_slice(out, len, n_pairs, "out")?;
        let feats: Vec<FeatureVector> = (0..n_pairs)
            .map(|sa| lvrep_feature(model, sa / na, sa % na))
            .collect::<lvrep::Result<_>>()?;
        let cov = CovarianceState::rebuild_weighted(
            feats.iter().zip(counts).filter(|(_, &c)| c > 0).map(|(f, &c)| (f, c as f64)),
            model.n_latent(),
            lambda,
        )?;
        let params = BonusParams {
            alpha,
            lambda,
            clip,
            mode: match mode {
                LvrepBonusMode::NormClipped => BonusMode::NormClipped,
                LvrepBonusMode::Quadratic => BonusMode::Quadratic,
            },
        };
        for (slot, f) in out.iter_mut().zip(&feats) {
            *slot = explore::bonus(&cov, f, &params)?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Agents

#[no_mangle]
pub extern "C" fn lvrep_agent_config_default() -> LvrepAgentConfig {
    let d = AgentConfig::default();
    LvrepAgentConfig {
        n_episodes: d.n_episodes,
        n_latent: d.n_latent,
        fit_restarts: d.fit.restarts,
        fit_max_iters: d.fit.max_iters,
        bonus_scale: d.bonus.scale,
        seed: d.seed,
    }
}

/// Online optimistic exploration. Writes the true value of the final policy
/// and its cumulative regret; `out_policy` may be NULL.
///
/// # Safety
/// `mdp` and `cfg` must be valid; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_run_online(
    mdp: *const LvrepMdp,
    cfg: *const LvrepAgentConfig,
    out_value: *mut f64,
    out_regret: *mut f64,
    out_policy: *mut *mut LvrepPolicy,
) -> LvrepStatus {
    guard(|| {
        let mdp = &deref(mdp, "mdp")?.0;
        let cfg = deref(cfg, "cfg")?.to_core();
        let run = agent::run_online(mdp, &cfg, &mut seeded(cfg.seed))?;
        let policy = run.policies.last().expect("pi_0 is always present");
        if let Some(v) = out_value.as_mut() {
            *v = env::evaluate_policy(mdp, policy, None)?.expected(mdp.init_dist());
        }
        if let Some(r) = out_regret.as_mut() {
            *r = run.log.last().map_or(0.0, |rec| rec.regret);
        }
        if let Some(slot) = out_policy.as_mut() {
            *slot = boxed(LvrepPolicy(policy.clone()));
        }
        Ok(())
    })
}

/// Offline pessimistic planning from `n_samples` transitions drawn under
/// `behavior`. Writes the true value of the returned policy; `out_policy`
/// may be NULL.
///
/// # Safety
/// Handles and `cfg` must be valid; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn lvrep_run_offline(
    mdp: *const LvrepMdp,
    behavior: *const LvrepPolicy,
    n_samples: usize,
    cfg: *const LvrepAgentConfig,
    out_value: *mut f64,
    out_policy: *mut *mut LvrepPolicy,
) -> LvrepStatus {
    guard(|| {
        let mdp = &deref(mdp, "mdp")?.0;
        let behavior = &deref(behavior, "behavior")?.0;
        let cfg = deref(cfg, "cfg")?.to_core();
        let run = agent::run_offline(mdp, behavior, n_samples, &cfg, &mut seeded(cfg.seed))?;
        if let Some(v) = out_value.as_mut() {
            *v = run.diagnostics.value;
        }
        if let Some(slot) = out_policy.as_mut() {
            *slot = boxed(LvrepPolicy(run.policy));
        }
        Ok(())
    })
}

/// Expected discounted return of `policy` weighted by the MDP's initial
/// distribution, computed from precomputed state values. Convenience for
/// callers that keep values from `lvrep_value_iteration`.
///
/// # Safety
/// `mdp` must be a live handle; `v` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lvrep_initial_value(mdp: *const LvrepMdp, v: *const f64, len: usize, out_value: *mut f64) -> LvrepStatus {
    guard(|| {
        let mdp = &deref(mdp, "mdp")?.0;
        if len != mdp.n_states() {
            return Err(fail(LvrepStatus::InvalidParam, format!("expected {} values, got {len}", mdp.n_states())));
        }
        let v = slice(v, len, "v")?;
        *out_ref(out_value, "out_value")? = util::dot(mdp.init_dist(), v);
        Ok(())
    })
}
