mod objective;
mod povm;
mod search;

pub use objective::PovmObjective;
pub use povm::{random_povm, random_unitary, Povm};
pub use search::{
    accessible_info, c1_curve, check_pure_additivity, check_separable_additivity, d1_infty,
    measured_information, projective_scan, real_projective, C1Curve, MeasuredAdditivity,
    MeasurementConfig, MeasurementReport, MEASURE_MAX_DIM,
};
