use thiserror::Error;

/// A single per-feature problem found while validating input geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureError {
    pub index: usize,
    pub message: String,
}

impl std::fmt::Display for FeatureError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "feature {}: {}", self.index, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("street network has no segments")]
    EmptyGraph,
    #[error("invalid street network: {0}")]
    InvalidNetwork(String),
    #[error("invalid block {id}: {reason}")]
    InvalidBlock { id: String, reason: String },
    #[error("no tiers given")]
    EmptyTiers,
    #[error("tier radii must be strictly decreasing coarse to fine, got {0:?}")]
    RadiiNotDecreasing(Vec<f64>),
    #[error("unknown tier name `{0}`")]
    UnknownTier(String),
    #[error("parameter `{name}` out of range: {value}")]
    OutOfRange { name: String, value: f64 },
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch { what: &'static str, expected: usize, actual: usize },
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("total lot area is zero")]
    ZeroArea,
    #[error("total built floor area is zero")]
    ZeroBuiltArea,
    #[error("housing (residential) area is zero")]
    ZeroHousing,
    #[error("footprint ratio must be in (0, 1], got {0}")]
    BadFootprint(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("coordinates look geographic (lon/lat); reproject to a metric CRS first")]
    GeographicCrs,
    #[error("{} invalid feature(s): {}", .0.len(), join_errors(.0))]
    Features(Vec<FeatureError>),
    #[error("empty feature collection")]
    EmptyCollection,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    GeoJson(#[from] Box<geojson::Error>),
}

fn join_errors(errs: &[FeatureError]) -> String {
    errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

impl From<geojson::Error> for Error {
    fn from(e: geojson::Error) -> Self {
        Error::GeoJson(Box::new(e))
    }
}

impl Error {
    /// Validation errors come from bad or missing inputs (exit code 1); I/O
    /// failures on existing paths are runtime errors (exit code 2).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io(e) => matches!(e.kind(), std::io::ErrorKind::NotFound | std::io::ErrorKind::InvalidData),
            Error::Csv(e) => !e.is_io_error(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
