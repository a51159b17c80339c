//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-facing configuration (counts, material ranges, schema).
    #[error("configuration error: {0}")]
    Config(String),

    /// Geometry that cannot be meshed (degenerate cells, zero-area faces).
    #[error("mesh error: {0}")]
    Mesh(String),

    /// Particle centers collapsed onto each other during a run.
    #[error("singular configuration on link ({i}, {j}): center distance {d:.3e}")]
    SingularConfiguration { i: usize, j: usize, d: f64 },

    /// The rotation solve failed for one particle.
    #[error("step failure at step {step}, particle {particle}: {reason} (convergence margin {margin:.3})")]
    StepFailure {
        step: usize,
        particle: usize,
        margin: f64,
        reason: String,
    },

    /// A diagnostic could not be measured (e.g. no threshold crossing).
    #[error("measurement error: {0}")]
    Measurement(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
