//! Energies, exact energy rates, regime classification and closed-form
//! reference solutions.

mod closed_form;
mod energy;
mod regime;

pub use closed_form::{example_solution, ExampleKind, ExampleSolution, SelfSimilar, SelfSimilarShape};
pub use energy::{
    boundary_velocity_e1, energy_e1, energy_e1_with, energy_e2, energy_e2_with, energy_rate_e1, energy_rate_e2,
    history_energy, EnergyMethod, EnergyTrace, RegimeAnnotation,
};
pub use regime::{
    classify_delay_regime, classify_neumann_regime, energy_exponent, first_order_decay_bounds, rate_coefficient,
    thresholds, DelayRegime, DelayRegimeKind, NeumannRegime, NeumannRegimeKind, TauWindow, Thresholds,
};
