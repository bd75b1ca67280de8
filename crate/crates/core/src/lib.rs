//! Numerical semidecision of expansivity and separation properties for
//! continuous flows and homeomorphisms on compact metric spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`]: points, metrics, grids, the isolated-point test;
//! * [`systems`]: the catalog of flows and homeomorphisms, inverse flows and
//!   time changes;
//! * [`suspension`]: suspension flows under a roof function;
//! * [`reparam`]: piecewise-linear reparametrizations and sampled families;
//! * [`checker`]: property descriptors, budgets and the verdict engine;
//! * [`witness`]: witness files and their replay;
//! * [`cli`]: configuration, reports and the command implementations used by
//!   the `flowsep` binary.
//!
//! ```
//! use flowsep::systems::lookup_flow;
//! use flowsep::space::Point;
//!
//! let psi = lookup_flow("annulus-psi").unwrap();
//! let y = psi.evolve(std::f64::consts::PI, &Point::annulus(2.0, 0.0)).unwrap();
//! let d = psi.space().distance(&y, &Point::annulus(-2.0, 0.0)).unwrap();
//! assert!(d < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checker;
pub mod cli;
pub mod error;
pub mod reparam;
pub mod space;
pub mod suspension;
pub mod systems;
pub mod witness;

pub use error::{Error, Result};
