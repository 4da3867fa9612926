//! Common-randomness distillation from classical-quantum correlations.
//!
//! Given an ensemble `{ρ_x, p(x)}` shared between a classical sender and a
//! quantum receiver, the crate computes how much common randomness `D(R)`
//! beyond the invested one-way communication `R` can be distilled, together
//! with the measured variant for general bipartite states and a small
//! laboratory of typical-sequence constructions.
//!
//! ```
//! use crdistill::{holevo_chi, named_ensemble};
//!
//! let e = named_ensemble("two_state", &[]).unwrap();
//! assert!((holevo_chi(&e) - 0.600876).abs() < 1e-6);
//! ```

pub mod cli;
pub mod ensembles;
pub mod error;
pub mod info;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod optim;
pub mod tradeoff;
pub mod typicality;

pub use ensembles::{
    cq_state, ehs_embed, extend_with_channel, measure_ensemble, named_ensemble, orthogonal_pair,
    swapped_embedding, trivial_ensemble, AuxChannel, BipartiteState, CQEnsemble, EhsState,
    NamedEnsemble, ProbVector,
};
pub use error::{Error, Result};
pub use info::{
    binary_entropy, cond_mutual_info, conditional_entropy_xq, entanglement_entropy, holevo_chi,
    mutual_info_uq, mutual_info_ux, shannon_entropy, sw_point, Partition, Register, SwPoint,
};
pub use linalg::{
    eig_hermitian, mat_sqrt_psd, partial_trace, tensor, vn_entropy, ComplexMatrix, DensityMatrix,
    Keep, Spectrum,
};
pub use measurement::{
    accessible_info, c1_curve, check_pure_additivity, check_separable_additivity, d1_infty,
    random_povm, MeasurementConfig, MeasurementReport, Povm,
};
pub use tradeoff::{
    brute_dstar, check_additivity, check_duality, eval_pair, qstar_curve, solve_dstar, trace_curve,
    uniform_curve_closed_form, CurvePoint, RGrid, SolverConfig, TradeoffCurve,
};
pub use typicality::{
    build_g, cond_typical_projector, conditionally_typical_membership, lemma3_check,
    typical_membership, typical_projector, typical_set_size, verify_trace_bounds, ProjectorHandle,
    TypicalSetSpec,
};
