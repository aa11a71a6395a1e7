//! Quantitative symmetry: the sets `Σ_δ` and `X(δ)`, the inclusion test, the
//! parameter choices, the approximate center, the exponent formulas and the
//! sweep harness that fits an empirical exponent.

mod center;
mod formulas;
mod pipeline;
mod sets;

pub use center::{
    approximate_center, center_bound, reflection_defect, reflection_defect_two_sided, CenterReport,
};
pub use formulas::{bnst_crossover, choose_parameters, condition_ksigma, tau_theory, tau_torsion, Parameters};
pub use pipeline::{
    fit_exponent, run_family, run_member, summary_text, write_plot_data, write_sweep_csv, DirectionRecord, Family,
    FamilyResult, Fit, KsigmaProbe, Member, PipelineConfig, Source, StabilityRecord, FLAG_GAP_NOISE, FLAG_LOW_UNU,
    FLAG_SEMINORM_NOISE,
};
pub use sets::{
    build_x, inclusion_check, sigma_delta, sup_w_bound_check, tol_w, InclusionReport, SigmaComponent, SupWCheck,
    SymmetricSet, SEMINORM_FLOOR,
};
