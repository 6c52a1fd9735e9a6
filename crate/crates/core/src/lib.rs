pub mod alpha;
pub mod bigutil;
pub mod circle;
pub mod condition;
pub mod discrepancy;
pub mod dioph;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod moments;
pub mod rng;
pub mod special;
pub mod walk;

pub use alpha::{make_alpha, Alpha, CertifiedReal, Convergent, DiophantineProfile, PartialQuotientSource};
pub use circle::Circle256;
pub use error::{Error, Result};
