//! Synthetic instances, the centralized reference solver and the
//! benchmarking drivers.

mod experiments;
mod instance;
mod oracle;

pub use experiments::{
    connected_network, fit_power_law, rho_sweep, scale_experiment, type_one_rho, ScaleConfig,
    ScaleRow, ScaleTable, SweepResult, TYPE_TWO_GRID,
};
pub use instance::{gen_instance, InstanceSpec, ProblemInstance};
pub use oracle::{
    check_certificate, solve_bp_centralized, solve_regularized_centralized, Certificate,
    CertificateCheck,
};
