/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by dataset generation, fitting, thermodynamics, and
/// sampling. Invalid-input variants carry enough context to point at the
/// offending argument.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid fit request: {0}")]
    InvalidFit(String),

    #[error("least-squares solver failed: {0}")]
    Solver(String),

    #[error("fit failed at family index {index}: {source}")]
    AtIndex {
        index: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid model point: {0}")]
    InvalidPoint(String),

    #[error("model space must be nonempty with strictly increasing complexities: {0}")]
    InvalidSpace(String),

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("invalid action parameters: {0}")]
    InvalidParams(String),

    #[error("lambda grid must be strictly increasing and nonnegative: {0}")]
    InvalidGrid(String),

    #[error("envelope inversion requires a zero-temperature curve, got T={0}")]
    PositiveTemperatureCurve(f64),

    #[error("resonance analysis requires distinct complexities, both are {0}")]
    EqualComplexities(u32),

    #[error("degenerate-system expansion needs at least two states, got {0}")]
    TooFewStates(usize),

    #[error("invalid sampler input: {0}")]
    InvalidSampler(String),

    #[error("space has {size} states, exceeding the materialization limit {limit}")]
    SpaceTooLarge { size: usize, limit: usize },

    #[error("invalid annealing config: {0}")]
    InvalidAnnealing(String),

    #[error("csv format error in {path}: {message}")]
    CsvFormat { path: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
