//! Numerical constants that the scaling arguments leave unspecified.
//! Values marked "calibrated" are pinned by the test suite.

/// Admissible ratio `r < c H` for the nested Tartar laminate.
pub const TARTAR_C: f64 = 0.5;

/// `k = round(TARTAR_C1 · sqrt(log L))` laminate order for Tartar sweeps.
pub const TARTAR_C1: f64 = 1.0;

/// Refined radius factor `μ̃ = M μ μ''` in the commutator probe.
pub const COMMUTATOR_M: f64 = 8.0;

/// Default exponent in `ψ_γ(z) = max(z, z^{1-γ})`.
pub const COMMUTATOR_GAMMA: f64 = 0.5;

/// Length fraction kept by each branching generation.
pub const BRANCH_THETA: f64 = 1.0 / 3.0;

/// Inner slab height `κ w^{2/3}` for the doubly branched construction.
pub const DOUBLE_BRANCH_KAPPA: f64 = 1.0;

/// Calibrated: exact block energy ≤ `C_BLOCK (h³/ℓ + ℓ)`.
pub const C_BLOCK: f64 = 20.0;

/// Calibrated: exact Tartar energy ≤ `C_T ×` nested-laminate bound form.
pub const C_T: f64 = 16.0;

/// Per-step constant `C₀` of the iterated commutator bound for the Tartar square.
pub const TARTAR_C0: f64 = 2.0;
