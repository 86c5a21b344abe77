//! Mixed-integer linear models with a built-in solver.
//!
//! Models are plain data ([`Model`]); solving goes through a
//! [`SolverBackend`]. The [`NativeBackend`] is a dense bounded simplex with
//! best-bound branch-and-bound and diving, adequate for the small and medium
//! time-expanded models this workspace builds. [`ScipyBackend`] hands the same
//! model to HiGHS through `scipy.optimize.milp` when python3 is available.

mod backend;
mod branch;
mod lp_format;
mod model;
mod scipy;
mod simplex;

pub use backend::{backend_by_name, backend_from_env, NativeBackend, SolveParams, SolverBackend, SolverError, BACKEND_ENV};
pub use lp_format::write_lp;
pub use model::{relative_gap, Model, Row, RowId, Sense, Solution, Status, Var, VarId, VarKind};
pub use scipy::{ScipyBackend, PYTHON_ENV};
