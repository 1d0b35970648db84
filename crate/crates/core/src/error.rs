//! Run-level error type shared by every solver driver.

use thiserror::Error;

use crate::acvi::SubproblemError;
use crate::baselines::ProjectionError;
use crate::config::ConfigError;
use crate::linops::LinopsError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Linops(#[from] LinopsError),
    #[error("x-subproblem failed at outer {outer}, inner {inner}: {source}")]
    XSubproblem {
        outer: usize,
        inner: usize,
        #[source]
        source: SubproblemError,
    },
    #[error("y-subproblem failed at outer {outer}, inner {inner}: {source}")]
    YSubproblem {
        outer: usize,
        inner: usize,
        #[source]
        source: SubproblemError,
    },
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("method requires a linear minimization oracle")]
    MissingLmo,
}
