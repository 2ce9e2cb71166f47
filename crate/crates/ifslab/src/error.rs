use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum IfsError {
    #[error("space mismatch: {0} vs {1}")]
    SpaceMismatch(String, String),

    #[error("empty point set is not a valid compact set")]
    EmptySet,

    #[error("resolution must be positive, got {0}")]
    BadResolution(f64),

    #[error("invalid interval: need a < b, got a={0}, b={1}")]
    BadInterval(f64, f64),

    #[error("angle {0} outside [0, 2*pi)")]
    BadAngle(f64),

    #[error("empty region")]
    EmptyRegion,

    #[error("unsupported region for this operation: {0}")]
    UnsupportedRegion(String),

    #[error("tail window {window} not in [2, orbit length {len}]")]
    BadWindow { window: usize, len: usize },

    #[error("point {0} lies outside the hull")]
    OutsideHull(String),

    #[error("overlap point {point} is moved by piece `{label}` (displacement {moved:.3e})")]
    OverlapNotFixed {
        point: String,
        label: String,
        moved: f64,
    },

    #[error("pieces do not cover the space: sample {0} lies in no region")]
    CoverageGap(String),

    #[error("h_inv(h(x)) != x at sample {point} (error {err:.3e})")]
    RoundTrip { point: String, err: f64 },

    #[error("y not attained on branch")]
    NotAttained,

    #[error("map lacks monotone branches")]
    NoBranches,

    #[error("x0 is fixed by the map; witnessing sequences must start off Fix")]
    FixedStart,

    #[error("preimage failed at step {step}: {source}")]
    WitnessStalled {
        step: usize,
        #[source]
        source: Box<IfsError>,
    },

    #[error("witness tail leaves the neighborhood of the target at index {0}: choose larger n0")]
    TailOutside(usize),

    #[error("witness is shorter than the requested tail start")]
    WitnessTooShort,

    #[error("witness map does not match any system map (best max deviation {0:.3e})")]
    WitnessMapUnknown(f64),

    #[error("{0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IfsError {
    /// Invalid input (config/usage) as opposed to a runtime failure.
    /// Drives the CLI exit-code split between 64 and 70.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            IfsError::Parse(_)
                | IfsError::BadResolution(_)
                | IfsError::BadInterval(_, _)
                | IfsError::BadAngle(_)
                | IfsError::BadWindow { .. }
                | IfsError::UnsupportedRegion(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, IfsError>;
