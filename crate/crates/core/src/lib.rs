#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Optical tomograms of q-deformed bosonic states and retrieval of
//! normally ordered moments `<A†^α A^β>` from them.
//!
//! The deformed algebra is `A A† - q² A† A = 1` with `0 < q < 1`. Modules,
//! bottom-up:
//!
//! - [`qmath`]: q-integers, q-factorials, q-binomials, infinite q-products.
//! - [`fock`]: truncated Fock space, ladder operators, direct moments,
//!   normal-ordered coefficients and density reconstruction from moments.
//! - [`states`]: coherent, cat, two-photon-annihilation eigenstates
//!   (squeezed vacuum / squeezed first excited) and number states.
//! - [`quadrature`]: quadrature polynomials `J_n`, the vacuum density, Gauss
//!   rules from the Jacobi matrix.
//! - [`tomography`]: tomograms of states, density matrices and moment
//!   tables; sampled grids.
//! - [`moments`]: moment retrieval from tomograms.
//! - [`config`] and [`io`]: run configuration and grid/moment file formats.

pub mod config;
pub mod error;
pub mod fock;
pub mod io;
pub mod moments;
pub mod qmath;
pub mod quadrature;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{density_from_moments, DensityMatrix, DirectMoments, FockState, MomentTable};
pub use qmath::DeformationParam;
pub use quadrature::{gauss_rule, QuadratureRule};
pub use states::{Parity, SqueezedKind, StateKind, StateSpec};
pub use tomography::{make_grid, TomogramGrid, XLayout};
