//! Parameter sweeps and the quantities read off them: susceptibility,
//! threshold, curvature at resonance and the critical exponent.

pub mod curvature;
pub mod exponent;
pub mod grid;
pub mod susceptibility;
pub mod sweep;

pub use curvature::{curvature_scan, CurvaturePoint, CurvatureScan};
pub use exponent::{fit_exponent, fit_line, fit_power_law, LineFit, PowerLawFit, Sensitivity};
pub use grid::{axis, log_axis};
pub use susceptibility::{
    find_threshold, normalize_rows, susceptibility, RidgePoint, SusceptibilityMap, Threshold,
};
pub use sweep::{solve_point, sweep, Backend, PointResult, SweepGrid, SweepOptions};
