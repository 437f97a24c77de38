//! Growth exponents of two-patch populations with switched growth rates and
//! dispersal: closed forms, period-map spectra, exact switched flows,
//! piecewise deterministic Markov simulation and two applied models.

pub mod analytic;
pub mod applications;
pub mod error;
pub mod matrix;
pub mod model;
pub mod ode;
pub mod pdmp;
pub mod quadrature;
pub mod roots;
pub mod stats;
pub mod switched;

pub use analytic::{delta_closed, p_plus, threshold_m_star, threshold_t_star, v_star};
pub use error::{Error, Result};
pub use matrix::{expm2, period_map, Mat2, PeriodMap};
pub use model::{
    realize_environment, Coords, EnvironmentKind, EnvironmentSignal, GrowthReport, Method, ModelParams, Sign,
    SojournDistribution, Trajectory,
};
pub use pdmp::{delta_pdmp_quadrature, simulate_pdmp, simulate_sape, InvariantDensity};
pub use switched::{delta_quadrature, flow_exact, periodic_orbit};
