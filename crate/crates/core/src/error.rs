//! Pipeline-level error with process exit codes.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::annotations::AnnotationError;
use crate::density::DensityError;
use crate::formats::ParseError;
use crate::geometry::GeometryError;
use crate::maskgen::MaskError;
use crate::metrics::MetricsError;
use crate::postprocess::PostprocessError;
use crate::simulate::SimError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug)]
pub enum Error {
    /// Malformed input file.
    Parse { file: PathBuf, source: ParseError },
    /// Invalid camera or projection failure.
    Geometry { context: String, source: GeometryError },
    /// Well-formed input that violates a documented constraint.
    Constraint { context: String, message: String },
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub const EXIT_IO: i32 = 1;
    pub const EXIT_PARSE: i32 = 2;
    pub const EXIT_GEOMETRY: i32 = 3;
    pub const EXIT_CONSTRAINT: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => Self::EXIT_IO,
            Error::Parse { .. } => Self::EXIT_PARSE,
            Error::Geometry { .. } => Self::EXIT_GEOMETRY,
            Error::Constraint { .. } => Self::EXIT_CONSTRAINT,
        }
    }

    pub fn parse(file: impl AsRef<Path>, source: ParseError) -> Self {
        Error::Parse {
            file: file.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn constraint(context: impl Into<String>, message: impl fmt::Display) -> Self {
        Error::Constraint {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub fn geometry(context: impl Into<String>, source: GeometryError) -> Self {
        Error::Geometry {
            context: context.into(),
            source,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { file, source } => write!(f, "{}: {source}", file.display()),
            Error::Geometry { context, source } => write!(f, "{context}: {source}"),
            Error::Constraint { context, message } => write!(f, "{context}: {message}"),
            Error::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Parse { source, .. } => Some(source),
            Error::Geometry { source, .. } => Some(source),
            Error::Io { source, .. } => Some(source),
            Error::Constraint { .. } => None,
        }
    }
}

/// Attaches a context string to module errors, routing embedded geometry
/// failures to [`Error::Geometry`].
pub trait Context<T> {
    fn context(self, context: impl Into<String>) -> Result<T>;
}

macro_rules! constraint_context {
    ($($ty:ty),*) => {$(
        impl<T> Context<T> for std::result::Result<T, $ty> {
            fn context(self, context: impl Into<String>) -> Result<T> {
                self.map_err(|e| Error::constraint(context, e))
            }
        }
    )*};
}

constraint_context!(DensityError, MaskError, MetricsError, PostprocessError);

impl<T> Context<T> for std::result::Result<T, GeometryError> {
    fn context(self, context: impl Into<String>) -> Result<T> {
        self.map_err(|e| Error::geometry(context, e))
    }
}

impl<T> Context<T> for std::result::Result<T, AnnotationError> {
    fn context(self, context: impl Into<String>) -> Result<T> {
        self.map_err(|e| match e {
            AnnotationError::Geometry(g) => Error::geometry(context, g),
            other => Error::constraint(context, other),
        })
    }
}

impl<T> Context<T> for std::result::Result<T, SimError> {
    fn context(self, context: impl Into<String>) -> Result<T> {
        self.map_err(|e| match e {
            SimError::Geometry(g) => Error::geometry(context, g),
            other => Error::constraint(context, other),
        })
    }
}
