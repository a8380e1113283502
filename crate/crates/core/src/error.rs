use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A model, law or curve violates its parameter constraints.
    InvalidModel(String),
    /// An argument is outside the operation's domain.
    InvalidArgument(String),
    /// No contact was found before the lookahead horizon.
    HorizonExhausted { horizon: f64 },
    /// The operation does not apply to this model variant.
    InvalidVariant(String),
    /// The model has no closed-form transition-time law.
    NoClosedForm(String),
    /// The model is not stationary under real shifts.
    NonStationary(String),
    /// A density expected to be non-increasing is not.
    DensityNotMonotone { at: f64 },
    /// A bounded density was required.
    UnboundedDensity,
    /// The curve carries an atom the construction cannot represent.
    UnsupportedAtom(String),
    /// Transition-time laws with an atom at zero are disabled by default.
    ZeroAtomNotAllowed { atom: f64 },
    /// Two shapes were sampled on different angular grids.
    GridMismatch,
    /// The reachable set is too small to extract a boundary.
    InsufficientGrowth { vertices: usize, required: usize },
    /// Too many replicas touched the simulation box.
    TooManyTruncated { excluded: usize, total: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModel(m) => write!(f, "invalid model: {m}"),
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::HorizonExhausted { horizon } => {
                write!(f, "no contact before lookahead horizon {horizon}")
            }
            Error::InvalidVariant(m) => write!(f, "invalid variant: {m}"),
            Error::NoClosedForm(m) => write!(f, "no closed form: {m}"),
            Error::NonStationary(m) => write!(f, "model is not stationary: {m}"),
            Error::DensityNotMonotone { at } => write!(f, "density increases near s = {at}"),
            Error::UnboundedDensity => write!(f, "density is unbounded at 0"),
            Error::UnsupportedAtom(m) => write!(f, "unsupported atom: {m}"),
            Error::ZeroAtomNotAllowed { atom } => write!(
                f,
                "transition law has an atom {atom} at zero; enable zero atoms explicitly"
            ),
            Error::GridMismatch => write!(f, "shapes use different angular grids"),
            Error::InsufficientGrowth { vertices, required } => write!(
                f,
                "reachable set has {vertices} vertices, at least {required} needed"
            ),
            Error::TooManyTruncated { excluded, total } => write!(
                f,
                "{excluded} of {total} replicas hit the box boundary; enlarge the box"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
