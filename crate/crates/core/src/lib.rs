//! Exact computational algebra for the affine Weyl group of type C~, its
//! Iwahori-Hecke algebra, the affine q-Schur algebra S^c_{n,d}, and the
//! stabilization algebra K^c_n, over Z[v, v^-1].

pub mod error;
pub mod laurent;
pub mod weyl;
pub mod ximat;
pub mod hecke;
pub mod mult;
pub mod schur;
pub mod stab;

pub use error::{Error, Result};
pub use laurent::Laurent;
pub use weyl::{AffinePermC, Composition};
