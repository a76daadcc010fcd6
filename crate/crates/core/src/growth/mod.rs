//! Growth processes: extended-source IDLA, the divisible sandpile and the
//! smash sum.

mod idla;
mod jump;
mod sandpile;
mod smash;
mod topple;

pub use idla::{run_idla, GrowthHistory, IdlaOptions, Stepping};
pub use jump::side_exit_law;
pub use sandpile::{run_by_toppling, run_sandpile, SandpileHistory, FULL_TOL, SUPPORT_TOL};
pub use smash::smash_sum;
pub use topple::{stabilize, topple, ToppleOrder, EXCESS_TOL};
