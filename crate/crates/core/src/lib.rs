//! Numerical toolkit for boundary point derivations of Lipschitz functions
//! on Swiss-cheese domains.

pub mod cli;
pub mod content;
pub mod contour;
pub mod criterion;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod lipschitz;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{AnnulusIndex, BasePointKind, ConeSpec, Disk, Point, Ray, Region, SwissCheeseDomain};
pub use lipschitz::GalleryFunction;
