//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field is already in the {0} representation")]
    RepresentationMismatch(&'static str),

    #[error("fields live on different lattices ({0} vs {1} points per axis)")]
    LatticeMismatch(usize, usize),

    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("config validation failed: {0}")]
    ConfigValidation(String),

    #[error(
        "schedule horizon {requested} exceeds the no-wrap bound {bound} \
         (box {box_length}, data support {support}, fastest speed {speed}); \
         set time.allow_wrap = true to override"
    )]
    HorizonExceeded {
        requested: f64,
        bound: f64,
        box_length: f64,
        support: f64,
        speed: f64,
    },

    #[error("solution blew up at t = {t}: max |u| = {max_abs} exceeds guard {guard}")]
    BlowUp { t: f64, max_abs: f64, guard: f64 },

    #[error(
        "trajectory horizon insufficient for moments: fitted \u{2016}F\u{2016}\u{2081} slope \
         {slope} is above the integrability margin -1.5"
    )]
    InsufficientHorizon { slope: f64 },

    #[error("moments required but not provided")]
    MomentsMissing,

    #[error("rate fit needs at least {needed} positive samples in the window, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("rate fit requires strictly positive values (found {0})")]
    NonPositiveSample(f64),

    #[error("Lp norm requires p >= 1 (got {0})")]
    InvalidLp(f64),

    #[error("claim {claim} does not cover p = {p}, alpha = {alpha}")]
    ClaimOutOfRange { claim: String, p: String, alpha: u32 },

    #[error("unknown claim id: {0}")]
    UnknownClaim(String),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
