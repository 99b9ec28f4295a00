//! Geometry and linear perturbation theory of relativistic worldsheets that
//! terminate on dynamical edges.
//!
//! The crate builds first and second fundamental forms of embedded timelike
//! worldsheets, composes edge worldsheets with their adapted frames, evaluates
//! the closed-form first-order deformation responses of the edge data, and
//! checks every such formula against a finite-difference oracle that deforms
//! the embeddings directly.  A worked rotating-string background with massive
//! endpoints exercises the whole stack: background solve, endpoint mode
//! quartic, and the bulk Sturm-Liouville spectra in conformal coordinates.
//!
//! Conventions used throughout: mostly-plus signature (-, +, ..., +);
//! extrinsic curvature K^i_ab = -g(n^i, D_a e_b) and its edge analogue
//! L^I_AB = -g(m^I, D_A f_B); edge conormal eta oriented out of the declared
//! bulk domain; one-dimensional edges are handled in proper time with
//! h_tautau = -1.

pub mod deformation;
pub mod edge;
pub mod eom;
pub mod error;
pub mod families;
pub mod helicoid;
pub mod numdiff;
pub mod spacetime;
pub mod tensor;
pub mod verify;
pub mod worldsheet;

pub use error::{GeomError, Result};
