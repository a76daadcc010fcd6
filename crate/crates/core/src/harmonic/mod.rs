//! Harmonic solvers: grid Dirichlet problems, the Fourier disk solver, the
//! disk Poisson kernel and quadrature.

mod banded;
mod fourier;
mod grid;
mod poisson;
mod quadrature;

pub use banded::BandedCholesky;
pub use fourier::{sample_circle, solve_disk_dirichlet, FourierHarmonic};
pub use grid::{solve_grid_dirichlet, solve_grid_dirichlet_direct, solve_region_dirichlet, GridFunction};
pub use poisson::{poisson_kernel_disk, PoissonKernelDisk};
pub use quadrature::{integrate_weighted, GaussLegendre, QuadResult, QuadratureSpec};
