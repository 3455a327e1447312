//! Exact arithmetic for counting rational points of projective space by the
//! pullback of the Weil height along a morphism `f : P^m -> P^M` over `Q`.
//!
//! The leading constant of the counting function
//! `#{P in P^m(Q) : H(f(P)) <= X} ~ c(f) X^((m+1)/d)` splits into
//!
//! * a prefactor `1 / (2 zeta(m+1))`,
//! * the volume of the real fundamental domain `{z : |F(z)| <= |F|}`,
//! * a finite product of exact local factors at the primes of bad reduction,
//! * and a power of the height of `f` itself.
//!
//! Each piece has its own module:
//!
//! * [`rational`]: valuations, factorization, Jordan totients, `#P^m(Z/q)`.
//! * [`morphism`]: homogeneous lifts, composition, normalization, builders.
//! * [`resultant`]: Sylvester matrices, Smith normal form, `v_p(Res f)`.
//! * [`padic`]: excess valuations, local densities and local factors.
//! * [`arch`]: fundamental-domain volumes, Green's functions.
//! * [`constants`]: zeta values, the assembled constant, canonical heights.
//! * [`counting`]: brute-force point counts against the predictions.
//!
//! ```
//! use pullback_heights::morphism::HomogeneousLift;
//! use pullback_heights::constants::{assemble_constant, ConstantConfig};
//!
//! let f = HomogeneousLift::parse_builder("rat:z^2+1|1").unwrap().normalize().unwrap();
//! let report = assemble_constant(&f, &ConstantConfig::default()).unwrap();
//! assert!((report.c_value - 3.0 / std::f64::consts::PI).abs() < 1e-6);
//! ```

pub mod arch;
pub mod constants;
pub mod counting;
mod error;
pub mod morphism;
pub mod padic;
pub mod radical;
pub mod rational;
pub mod resultant;

pub use error::{Error, Result};
