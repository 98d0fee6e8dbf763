//! Simulated experiments on the realized gates: process tomography with
//! finite shots, reference and interleaved randomized benchmarking, and
//! Rabi-error robustness sweeps.

mod clifford;
mod fit;
mod rb;
mod sampling;
mod sweep;
mod tomography;

pub use clifford::{clifford_group, same_up_to_phase, Clifford, CliffordGroup};
pub use fit::{fit_decay, FitResult, FIT_START};
pub use rb::{
    generate_sequence, ideal_impl, rb_fidelities, rb_run, RbConfig, RbCurve, RbReport, Sequence,
    Step, DEFAULT_SEQUENCES,
};
pub use sampling::{
    plus_probability, sample_counts, sample_measurement, sample_population_trace, unit_rng, Axis,
    AxisCounts, Readout, ShotConfig, DEFAULT_SHOTS,
};
pub use sweep::{default_epsilons, robustness_sweep, sweep_csv, SweepConfig, SweepRow};
pub use tomography::{
    basis_states, linear_inversion, qpt, state_mle, ProcessMatrix, QptResult, StateCounts,
    MLE_GAIN_TOL, MLE_MAX_ITER,
};
