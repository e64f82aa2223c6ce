pub mod curves;
pub mod dvr;
pub mod ga;
pub mod problem;
pub mod propagator;
pub mod pulse;
pub mod reference;
pub mod units;
