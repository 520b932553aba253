//! Near-optimizers: certification, scale scans, Fermat certificates,
//! implicit functions and Lagrange multipliers.

pub mod implicit;
pub mod lagrange;
pub mod near;
pub mod scales;
pub mod scan;

pub use implicit::{implicit_jet, implicit_solve, ImplicitResult};
pub use lagrange::{lagrange_solve, LagrangeResult};
pub use near::{
    check_near_optimum, fermat_certificate, fermat_two_variable, monotonicity_shrink, verdict_near_optimum,
    FermatCertificate, FermatVerdict, OptimalityQuery, Sense,
};
pub use scales::Verdict;
pub use scan::{find_near_optimizers, ScanReport};
