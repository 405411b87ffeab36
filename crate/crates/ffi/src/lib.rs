//! C ABI for the singulation simulator.
//!
//! Objects cross the boundary as opaque handles created and destroyed by
//! this library. Every fallible call returns an [`SgStatus`]; on failure a
//! description is available from [`sg_last_error_message`] on the same
//! thread. Panics never unwind into the caller.

use std::ffi::c_char;
use singulate::mdp::{shaping_error, Env, MdpConfig, Outcome, RewardScheme};
use singulate::percept::{render_visual_state, GRID_SIDE};
use singulate::policy::{es_decide, les_decide, PolicyLimits, PushCommand};
use singulate::scene::{generate_scene, is_singulated, scene_from_json, scene_to_json, Scene, SceneGenConfig};
use singulate::Error;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Side of the rendered visual grid in pixels.
pub const SG_GRID_SIDE: usize = 128;
const _: () = assert!(SG_GRID_SIDE == GRID_SIDE);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Config = 3,
    Malformed = 4,
    NoTarget = 5,
    NoFreePatch = 6,
    EpisodeDone = 7,
    BufferTooSmall = 8,
    Panic = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgRewardScheme {
    Sparse = 0,
    EsShaped = 1,
    LesShaped = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgOutcome {
    Running = 0,
    Singulated = 1,
    FellOff = 2,
    Timeout = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgPushCommand {
    pub theta: f64,
    pub d: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgStepResult {
    pub reward: f64,
    pub done: bool,
    pub outcome: SgOutcome,
    pub e_es: f64,
    pub e_les: f64,
    /// False when no free start patch existed and the push was skipped.
    pub pushed: bool,
}

/// Opaque scene handle.
pub struct SgScene {
    inner: Scene,
}

/// Opaque episode handle.
pub struct SgEnv {
    inner: Env,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> SgStatus {
    match e {
        Error::Config(_) | Error::GenerationFailed { .. } => SgStatus::Config,
        Error::MalformedScene(_) | Error::MalformedFile { .. } | Error::Json(_) | Error::TooManyObstacles(_) => {
            SgStatus::Malformed
        }
        Error::NoTarget => SgStatus::NoTarget,
        Error::NoFreePatch => SgStatus::NoFreePatch,
        _ => SgStatus::Internal,
    }
}

/// Runs `f`, recording errors and converting panics into `SgStatus::Panic`.
fn guard(f: impl FnOnce() -> Result<(), (SgStatus, String)>) -> SgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SgStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_arg(name: &str) -> (SgStatus, String) {
    (SgStatus::NullArgument, format!("{name} is null"))
}

/// # Safety
/// `p` is null or points to a live value of type `T`.
unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (SgStatus, String)> {
    p.as_ref().ok_or_else(|| null_arg(name))
}

/// # Safety
/// `p` is null or points to writable memory for a `T`.
unsafe fn write_out<T>(p: *mut T, value: T, name: &str) -> Result<(), (SgStatus, String)> {
    if p.is_null() {
        return Err(null_arg(name));
    }
    p.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message describing the last failed call on this thread, or null. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn sg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Generates a random cluttered scene. Pass `n_min = n_max = 0` for the
/// default 8 to 13 obstacles.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_generate(seed: u64, n_min: u32, n_max: u32, out: *mut *mut SgScene) -> SgStatus {
    guard(|| {
        let mut cfg = SceneGenConfig::default();
        if n_min != 0 || n_max != 0 {
            cfg.n_obstacles_range = [n_min as usize, n_max as usize];
        }
        let sc = generate_scene(&cfg, seed).map_err(lib_err)?;
        write_out(out, boxed(SgScene { inner: sc }), "out")
    })
}

/// Parses a scene from its JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_from_json(json: *const c_char, out: *mut *mut SgScene) -> SgStatus {
    guard(|| {
        if json.is_null() {
            return Err(null_arg("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (SgStatus::InvalidArgument, "json is not UTF-8".to_owned()))?;
        let sc = scene_from_json(text).map_err(lib_err)?;
        write_out(out, boxed(SgScene { inner: sc }), "out")
    })
}

/// Serializes a scene. The returned string must be released with
/// [`sg_string_free`].
///
/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_to_json(scene: *const SgScene, out: *mut *mut c_char) -> SgStatus {
    guard(|| {
        let sc = as_ref(scene, "scene")?;
        let s = CString::new(scene_to_json(&sc.inner)).map_err(|e| (SgStatus::Internal, e.to_string()))?;
        write_out(out, s.into_raw(), "out")
    })
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `scene` is null or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_free(scene: *mut SgScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_obstacle_count(scene: *const SgScene, out: *mut u32) -> SgStatus {
    guard(|| {
        let sc = as_ref(scene, "scene")?;
        write_out(out, sc.inner.obstacle_count() as u32, "out")
    })
}

/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_scene_is_singulated(scene: *const SgScene, out: *mut bool) -> SgStatus {
    guard(|| {
        let sc = as_ref(scene, "scene")?;
        if sc.inner.try_target().is_none() {
            return Err((SgStatus::NoTarget, "scene has no target".into()));
        }
        write_out(out, is_singulated(&sc.inner), "out")
    })
}

unsafe fn decide(
    scene: *const SgScene,
    out: *mut SgPushCommand,
    rule: fn(&singulate::percept::VisualGrid, &PolicyLimits) -> singulate::Result<PushCommand>,
) -> SgStatus {
    guard(|| {
        let sc = as_ref(scene, "scene")?;
        let cmd = rule(&render_visual_state(&sc.inner), &PolicyLimits::default()).map_err(lib_err)?;
        write_out(
            out,
            SgPushCommand {
                theta: cmd.theta,
                d: cmd.d,
            },
            "out",
        )
    })
}

/// Global empty-space heuristic decision for `scene`.
///
/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_es_decide(scene: *const SgScene, out: *mut SgPushCommand) -> SgStatus {
    decide(scene, out, es_decide)
}

/// Local empty-space heuristic decision for `scene`.
///
/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_les_decide(scene: *const SgScene, out: *mut SgPushCommand) -> SgStatus {
    decide(scene, out, les_decide)
}

/// Starts an episode from a copy of `scene`.
///
/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_env_new(
    scene: *const SgScene,
    t_max: u32,
    scheme: SgRewardScheme,
    out: *mut *mut SgEnv,
) -> SgStatus {
    guard(|| {
        let sc = as_ref(scene, "scene")?;
        let cfg = MdpConfig {
            t_max: t_max as usize,
            reward_scheme: match scheme {
                SgRewardScheme::Sparse => RewardScheme::Sparse,
                SgRewardScheme::EsShaped => RewardScheme::EsShaped,
                SgRewardScheme::LesShaped => RewardScheme::LesShaped,
            },
            ..MdpConfig::default()
        };
        cfg.validate().map_err(lib_err)?;
        write_out(
            out,
            boxed(SgEnv {
                inner: Env::new(sc.inner.clone(), cfg),
            }),
            "out",
        )
    })
}

/// # Safety
/// `env` is null or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sg_env_free(env: *mut SgEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Executes one push.
///
/// # Safety
/// `env` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_env_step(env: *mut SgEnv, cmd: SgPushCommand, out: *mut SgStepResult) -> SgStatus {
    guard(|| {
        let env = env.as_mut().ok_or_else(|| null_arg("env"))?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        if env.inner.is_done() {
            return Err((SgStatus::EpisodeDone, "episode already finished".into()));
        }
        let lim = &env.inner.cfg.policy_limits;
        let command = PushCommand {
            theta: cmd.theta,
            d: cmd.d,
        };
        if !lim.contains(&command) {
            return Err((
                SgStatus::InvalidArgument,
                format!("command {cmd:?} outside theta in [-pi, pi), d in (0, {}]", lim.d_max),
            ));
        }
        let r = env.inner.step(&command);
        write_out(
            out,
            SgStepResult {
                reward: r.reward,
                done: r.done,
                outcome: match r.outcome {
                    Outcome::Running => SgOutcome::Running,
                    Outcome::Singulated => SgOutcome::Singulated,
                    Outcome::FellOff => SgOutcome::FellOff,
                    Outcome::Timeout => SgOutcome::Timeout,
                },
                e_es: r.e_es,
                e_les: r.e_les,
                pushed: r.segment.is_some(),
            },
            "out",
        )
    })
}

/// Copies the current scene of an episode into a new handle.
///
/// # Safety
/// `env` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_env_scene(env: *const SgEnv, out: *mut *mut SgScene) -> SgStatus {
    guard(|| {
        let env = as_ref(env, "env")?;
        write_out(
            out,
            boxed(SgScene {
                inner: env.inner.scene().clone(),
            }),
            "out",
        )
    })
}

/// Copies the current visual state, row-major, into `buf`, which must hold
/// `SG_GRID_SIDE * SG_GRID_SIDE` values (0 table, 0.5 target, 1 obstacle).
///
/// # Safety
/// `env` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_env_render(env: *const SgEnv, buf: *mut f64, len: usize) -> SgStatus {
    guard(|| {
        let env = as_ref(env, "env")?;
        if buf.is_null() {
            return Err(null_arg("buf"));
        }
        let values = env.inner.visual().values.as_slice();
        if len < values.len() {
            return Err((
                SgStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", values.len()),
            ));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Pushes taken so far in the episode, or -1 for a null handle.
///
/// # Safety
/// `env` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_env_steps_taken(env: *const SgEnv) -> i64 {
    env.as_ref().map_or(-1, |e| e.inner.t() as i64)
}

/// Direction disagreement `(1 - cos|a - b|) / 2`.
#[no_mangle]
pub extern "C" fn sg_shaping_error(theta_p: f64, theta_h: f64) -> f64 {
    shaping_error(theta_p, theta_h)
}
