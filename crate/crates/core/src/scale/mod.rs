pub mod asym;
pub mod external;
pub mod neutrix;
pub mod text;

pub use asym::{AsymptoticReal, Term};
pub use external::{DistributivityCheck, ExternalNumber, OrderPattern};
pub use neutrix::{eps_power, exp, exp_frac, Exp, Idem, Inclusion, Neutrix};
