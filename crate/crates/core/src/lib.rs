pub mod elastic;
pub mod factorization;
pub mod error;
pub mod ffop;
pub mod field;
pub mod forward;
pub mod green;
pub mod harness;
pub mod quadrature;
pub mod reflection;
pub mod special_fn;
pub mod taylor;

pub use elastic::{Channel, ElasticMedium, FarFieldPattern, PlaneWave};
pub use error::{Error, Result};
pub use field::{CVec2, DerivMode, Jet, Point, VectorField};
