//! Correlators of expanded local operators and CHSH maximization.
//!
//! Local observables are written as A_m = Σ_i c_i^(m) O_i over a family of
//! trace-orthogonal operators. The correlator of A_m and B_n on the range of
//! a projector Π is Tr(Π A_m ⊗ B_n) = Σ_ij c_i^(m) c_j^(n) Tr(Π O_i ⊗ O_j).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::numerics::{c, tensor, ComplexMatrix, Ket, ZERO};
use crate::optimize::{grid_max_2d, multi_start_maximize, NelderMead};
use crate::schmidt::SubspaceProjector;

/// Tolerance for expansion invariants and the imaginary part of correlators.
pub const EXPANSION_TOL: f64 = 1e-10;

/// Points per axis of the dense grid in the closed-form maximizations.
pub const CASE_GRID_POINTS: usize = 1024;

/// Seed for the multi-start search in [`chsh_quantum_max`].
pub const QUANTUM_SEARCH_SEED: u64 = 0x7512_e150;

/// Previously reported maximum for the first two-component case, 1 + √2.
pub const REFERENCE_CASE_ONE_MAX: f64 = 1.0 + SQRT_2;

pub const TSIRELSON: f64 = 2.0 * SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

/// A_m = Σ_i c_i O_i on one side, with that side's reference label.
#[derive(Debug, Clone)]
pub struct CorrelatorExpansion {
    coeffs: Vec<Complex64>,
    basis_ops: Vec<ComplexMatrix>,
    side: Side,
    reference: String,
}

impl CorrelatorExpansion {
    /// Checks Σ|c_i|² = 1 and Tr(O_i† O_j) = 0 for i ≠ j.
    pub fn new(
        coeffs: Vec<Complex64>,
        basis_ops: Vec<ComplexMatrix>,
        side: Side,
        reference: impl Into<String>,
    ) -> Result<Self> {
        if coeffs.len() != basis_ops.len() || coeffs.is_empty() {
            return Err(Error::InvalidExpansion(format!(
                "{} coefficients for {} operators",
                coeffs.len(),
                basis_ops.len()
            )));
        }
        let dim = basis_ops[0].rows();
        if basis_ops.iter().any(|o| o.rows() != dim || o.cols() != dim) {
            return Err(Error::InvalidExpansion("operators must share one square shape".into()));
        }
        let norm: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > EXPANSION_TOL {
            return Err(Error::InvalidExpansion(format!("sum |c_i|^2 = {norm}, expected 1")));
        }
        for i in 0..basis_ops.len() {
            for j in i + 1..basis_ops.len() {
                let overlap = (&basis_ops[i].dagger() * &basis_ops[j]).trace();
                if overlap.norm() > EXPANSION_TOL {
                    return Err(Error::InvalidExpansion(format!(
                        "Tr(O_{i}^dag O_{j}) = {overlap}, operators are not orthogonal"
                    )));
                }
            }
        }
        Ok(Self {
            coeffs,
            basis_ops,
            side,
            reference: reference.into(),
        })
    }

    /// Real coefficients over `ops`.
    pub fn real(coeffs: &[f64], ops: &[ComplexMatrix], side: Side) -> Result<Self> {
        let reference = match side {
            Side::A => "r_A",
            Side::B => "r_B",
        };
        Self::new(coeffs.iter().map(|&x| c(x, 0.0)).collect(), ops.to_vec(), side, reference)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn basis_ops(&self) -> &[ComplexMatrix] {
        &self.basis_ops
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn reference(&self) -> &str {
        &self.reference
    }

    pub fn local_dim(&self) -> usize {
        self.basis_ops[0].rows()
    }

    /// Σ_i c_i O_i.
    pub fn operator(&self) -> ComplexMatrix {
        let dim = self.local_dim();
        self.coeffs
            .iter()
            .zip(&self.basis_ops)
            .fold(ComplexMatrix::zeros(dim, dim), |acc, (ci, o)| &acc + &o.scale(*ci))
    }
}

fn check_dims(pi: &SubspaceProjector, a: &CorrelatorExpansion, b: &CorrelatorExpansion) -> Result<()> {
    let want = a.local_dim() * b.local_dim();
    if pi.dim() != want {
        return Err(Error::Shape(format!(
            "projector of dim {} on a {}x{} product space",
            pi.dim(),
            a.local_dim(),
            b.local_dim()
        )));
    }
    Ok(())
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > EXPANSION_TOL {
        return Err(Error::ComplexCorrelator(z.im));
    }
    Ok(z.re)
}

/// ⟨A B⟩ = Σ_ij c_i^A c_j^B Tr(Π O_i ⊗ O_j).
pub fn correlator(pi: &SubspaceProjector, a: &CorrelatorExpansion, b: &CorrelatorExpansion) -> Result<f64> {
    check_dims(pi, a, b)?;
    let mut total = ZERO;
    for (ca, oa) in a.coeffs.iter().zip(&a.basis_ops) {
        for (cb, ob) in b.coeffs.iter().zip(&b.basis_ops) {
            total += ca * cb * (pi.matrix() * &tensor(oa, ob)).trace();
        }
    }
    real_part(total)
}

/// Only the matched terms Σ_k c_k^A c_k^B Tr(Π O_k ⊗ O_k); equals
/// [`correlator`] whenever the cross traces vanish. Both sides must use the
/// same operator family.
pub fn correlator_diagonal(
    pi: &SubspaceProjector,
    a: &CorrelatorExpansion,
    b: &CorrelatorExpansion,
) -> Result<f64> {
    check_dims(pi, a, b)?;
    if a.basis_ops.len() != b.basis_ops.len() {
        return Err(Error::InvalidExpansion("expansions over different families".into()));
    }
    let total: Complex64 = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .zip(a.basis_ops.iter().zip(&b.basis_ops))
        .map(|((ca, cb), (oa, ob))| ca * cb * (pi.matrix() * &tensor(oa, ob)).trace())
        .sum();
    real_part(total)
}

/// ⟨A₁B₁⟩ + ⟨A₁B₂⟩ + ⟨A₂B₁⟩ − ⟨A₂B₂⟩ from the four correlators in that order.
pub fn chsh_combination(e: [f64; 4]) -> f64 {
    e[0] + e[1] + e[2] - e[3]
}

#[derive(Debug, Clone)]
pub struct ChshSetting {
    pub a1: CorrelatorExpansion,
    pub a2: CorrelatorExpansion,
    pub b1: CorrelatorExpansion,
    pub b2: CorrelatorExpansion,
    pub target: SubspaceProjector,
}

impl ChshSetting {
    /// Requires all four expansions to share one operator family.
    pub fn new(
        a1: CorrelatorExpansion,
        a2: CorrelatorExpansion,
        b1: CorrelatorExpansion,
        b2: CorrelatorExpansion,
        target: SubspaceProjector,
    ) -> Result<Self> {
        let family = a1.basis_ops();
        for e in [&a2, &b1, &b2] {
            let same = e.basis_ops().len() == family.len()
                && e.basis_ops().iter().zip(family).all(|(x, y)| x.max_abs_diff(y) < 1e-12);
            if !same {
                return Err(Error::InvalidExpansion("expansions must share one operator family".into()));
            }
        }
        Ok(Self { a1, a2, b1, b2, target })
    }

    pub fn correlators(&self) -> Result<[f64; 4]> {
        Ok([
            correlator(&self.target, &self.a1, &self.b1)?,
            correlator(&self.target, &self.a1, &self.b2)?,
            correlator(&self.target, &self.a2, &self.b1)?,
            correlator(&self.target, &self.a2, &self.b2)?,
        ])
    }
}

pub fn chsh_value(s: &ChshSetting) -> Result<f64> {
    Ok(chsh_combination(s.correlators()?))
}

/// S₂ = 1 + sin x + sin y − sin x sin y ± cos x cos y, for
/// A₁ = B₁ = O₁, A₂ = sin x O₁ + cos x O₂, B₂ = sin y O₁ + cos y O₂.
pub fn case_one_value(x: f64, y: f64, sign: f64) -> f64 {
    let (sx, cx) = x.sin_cos();
    let (sy, cy) = y.sin_cos();
    1.0 + sx + sy - sx * sy + sign * cx * cy
}

/// S₂ = sin x + sin y + cos x − cos y, for A₁ = O₁, A₂ = O₂,
/// B₁ = sin x O₁ + cos x O₂, B₂ = sin y O₁ + cos y O₂.
pub fn case_two_value(x: f64, y: f64) -> f64 {
    let (sx, cx) = x.sin_cos();
    let (sy, cy) = y.sin_cos();
    sx + sy + cx - cy
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseMaximum {
    pub max: f64,
    pub x: f64,
    pub y: f64,
    /// ±1 branch of the O₂⊗O₂ term; absent for case two.
    pub sign: Option<i8>,
    /// Best value on the dense grid before refinement.
    pub grid_best: f64,
    pub grid_points: usize,
}

/// Dense grid over [−π, π]² followed by Nelder-Mead from the best point;
/// angles are wrapped back into [−π, π).
fn grid_then_refine<F: Fn(f64, f64) -> f64>(f: &F) -> (f64, f64, f64, f64) {
    let (gx, gy, gbest) = grid_max_2d(f, -PI, PI, CASE_GRID_POINTS);
    let nm = NelderMead {
        initial_step: 2.0 * PI / CASE_GRID_POINTS as f64,
        ..NelderMead::default()
    };
    let g = |v: &[f64]| f(v[0], v[1]);
    let opt = nm.maximize(&g, &[gx, gy]);
    let (x, y, max) = if opt.value >= gbest {
        (opt.x[0], opt.x[1], opt.value)
    } else {
        (gx, gy, gbest)
    };
    (wrap(x), wrap(y), max, gbest)
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Maximum of the first two-component case over both signs.
pub fn maximize_case_one() -> CaseOneReport {
    let mut best: Option<CaseMaximum> = None;
    for sign in [1i8, -1] {
        let f = |x: f64, y: f64| case_one_value(x, y, sign as f64);
        let (x, y, max, grid_best) = grid_then_refine(&f);
        let cand = CaseMaximum {
            max,
            x,
            y,
            sign: Some(sign),
            grid_best,
            grid_points: CASE_GRID_POINTS,
        };
        if best.as_ref().is_none_or(|b| cand.max > b.max) {
            best = Some(cand);
        }
    }
    let best = best.expect("two branches");
    CaseOneReport::new(best)
}

/// The case-one maximum next to the previously reported 1 + √2.
#[derive(Debug, Clone, Serialize)]
pub struct CaseOneReport {
    pub maximum: CaseMaximum,
    pub reference_value: f64,
    pub discrepancy: f64,
    pub agrees_with_reference: bool,
}

impl CaseOneReport {
    fn new(maximum: CaseMaximum) -> Self {
        let discrepancy = maximum.max - REFERENCE_CASE_ONE_MAX;
        Self {
            agrees_with_reference: discrepancy.abs() < 1e-6,
            reference_value: REFERENCE_CASE_ONE_MAX,
            discrepancy,
            maximum,
        }
    }
}

/// Maximum of the second two-component case.
pub fn maximize_case_two() -> CaseMaximum {
    let (x, y, max, grid_best) = grid_then_refine(&case_two_value);
    CaseMaximum {
        max,
        x,
        y,
        sign: None,
        grid_best,
        grid_points: CASE_GRID_POINTS,
    }
}

/// ±1-valued observable n̂·σ⃗ for the Bloch direction (θ, φ).
pub fn spin_observable(theta: f64, phi: f64) -> ComplexMatrix {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    ComplexMatrix::new(
        2,
        2,
        vec![c(ct, 0.0), c(st * cp, -st * sp), c(st * cp, st * sp), c(-ct, 0.0)],
    )
    .expect("2x2")
}

fn bloch(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// T_ij = ⟨ψ|σ_i ⊗ σ_j|ψ⟩ for a normalized two-qubit state.
pub fn correlation_tensor(state: &Ket) -> Result<[[f64; 3]; 3]> {
    if state.dim() != 4 {
        return Err(Error::Shape(format!("expected a two-qubit ket, got dim {}", state.dim())));
    }
    let paulis = [ComplexMatrix::pauli_x(), ComplexMatrix::pauli_y(), ComplexMatrix::pauli_z()];
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let op = tensor(&paulis[i], &paulis[j]);
            t[i][j] = state.inner(&op.apply(state)?).re;
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantumChshMax {
    pub max: f64,
    /// (θ, φ) for A₁, A₂, B₁, B₂.
    pub measurement_angles: [[f64; 2]; 4],
}

/// CHSH value of a state for four Bloch directions [A₁, A₂, B₁, B₂].
pub fn chsh_for_angles(t: &[[f64; 3]; 3], angles: &[f64]) -> f64 {
    let dirs: Vec<[f64; 3]> = angles.chunks(2).map(|p| bloch(p[0], p[1])).collect();
    let e = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
        (0..3).map(|i| (0..3).map(|j| a[i] * t[i][j] * b[j]).sum::<f64>()).sum()
    };
    chsh_combination([
        e(&dirs[0], &dirs[2]),
        e(&dirs[0], &dirs[3]),
        e(&dirs[1], &dirs[2]),
        e(&dirs[1], &dirs[3]),
    ])
}

/// Maximum CHSH value over projective ±1 measurements on a two-qubit state.
pub fn chsh_quantum_max(state: &Ket) -> Result<QuantumChshMax> {
    chsh_quantum_max_seeded(state, QUANTUM_SEARCH_SEED, 24)
}

pub fn chsh_quantum_max_seeded(state: &Ket, seed: u64, starts: usize) -> Result<QuantumChshMax> {
    let state = state.normalize()?;
    let t = correlation_tensor(&state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..starts.max(1))
        .map(|_| {
            (0..4)
                .flat_map(|_| [rng.gen_range(0.0..PI), rng.gen_range(-PI..PI)])
                .collect()
        })
        .collect();
    let f = |v: &[f64]| chsh_for_angles(&t, v);
    let opt = multi_start_maximize(&NelderMead::default(), &f, &starts);
    let mut angles = [[0.0; 2]; 4];
    for (k, a) in angles.iter_mut().enumerate() {
        *a = [opt.x[2 * k], wrap(opt.x[2 * k + 1])];
    }
    Ok(QuantumChshMax {
        max: opt.value,
        measurement_angles: angles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{random_ket, ONE};
    use crate::schmidt::indist_projector;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn bell_projector() -> SubspaceProjector {
        let phi_plus = Ket::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        SubspaceProjector::onto(&[phi_plus]).unwrap()
    }

    fn zx() -> Vec<ComplexMatrix> {
        vec![ComplexMatrix::pauli_z(), ComplexMatrix::pauli_x()]
    }

    fn zy() -> Vec<ComplexMatrix> {
        vec![ComplexMatrix::pauli_z(), ComplexMatrix::pauli_y()]
    }

    #[test]
    fn expansion_validation() {
        assert!(CorrelatorExpansion::real(&[1.0, 1.0], &zx(), Side::A).is_err());
        assert!(CorrelatorExpansion::real(&[1.0], &zx(), Side::A).is_err());
        let with_zero = vec![ComplexMatrix::pauli_z(), ComplexMatrix::zeros(2, 2)];
        assert!(CorrelatorExpansion::real(&[1.0, 0.0], &with_zero, Side::A).is_ok());
        let overlapping = vec![ComplexMatrix::pauli_z(), &ComplexMatrix::pauli_z() + &ComplexMatrix::pauli_x()];
        assert!(CorrelatorExpansion::real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], &overlapping, Side::B).is_err());
        let e = CorrelatorExpansion::real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], &zx(), Side::B).unwrap();
        assert_eq!(e.reference(), "r_B");
        assert!(e.operator().max_abs_diff(&(&ComplexMatrix::pauli_z() + &ComplexMatrix::pauli_x()).scale(c(FRAC_1_SQRT_2, 0.0))) < 1e-15);
    }

    #[test]
    fn correlator_examples() {
        let pi = indist_projector(&[0]).unwrap();
        let a = CorrelatorExpansion::real(&[1.0], &zx()[..1], Side::A).unwrap();
        let b = CorrelatorExpansion::real(&[1.0], &zx()[..1], Side::B).unwrap();
        assert!((correlator(&pi, &a, &b).unwrap() - 1.0).abs() < 1e-15);

        let a = CorrelatorExpansion::real(&[1.0, 0.0], &zx(), Side::A).unwrap();
        let b = CorrelatorExpansion::real(&[0.0, 1.0], &zx(), Side::B).unwrap();
        assert_eq!(correlator(&pi, &a, &b).unwrap(), 0.0);

        let b = CorrelatorExpansion::real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], &zx(), Side::B).unwrap();
        let v = correlator(&bell_projector(), &a, &b).unwrap();
        assert!((v - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn correlator_rejects_dimension_mismatch() {
        let pi = crate::schmidt::indist_projector_in(8, &[0]).unwrap();
        let a = CorrelatorExpansion::real(&[1.0], &zx()[..1], Side::A).unwrap();
        assert!(matches!(correlator(&pi, &a, &a), Err(Error::Shape(_))));
    }

    #[test]
    fn cross_terms_vanish_for_orthogonal_traces() {
        let pi = bell_projector();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x: f64 = rng.gen_range(-PI..PI);
            let y: f64 = rng.gen_range(-PI..PI);
            let a = CorrelatorExpansion::real(&[x.sin(), x.cos()], &zx(), Side::A).unwrap();
            let b = CorrelatorExpansion::real(&[y.sin(), y.cos()], &zx(), Side::B).unwrap();
            let full = correlator(&pi, &a, &b).unwrap();
            let diag = correlator_diagonal(&pi, &a, &b).unwrap();
            assert!((full - diag).abs() < 1e-14);
            assert!(full.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn complex_residue_is_rejected() {
        // Tr(Π Z⊗Y) vanishes but i·Tr(Π Z⊗Z) does not stay real.
        let pi = bell_projector();
        let a = CorrelatorExpansion::new(vec![c(0.0, 1.0)], vec![ComplexMatrix::pauli_z()], Side::A, "r").unwrap();
        let b = CorrelatorExpansion::new(vec![ONE], vec![ComplexMatrix::pauli_z()], Side::B, "r'").unwrap();
        assert!(matches!(correlator(&pi, &a, &b), Err(Error::ComplexCorrelator(_))));
    }

    #[test]
    fn chsh_value_examples() {
        assert_eq!(chsh_combination([1.0, 1.0, 1.0, 1.0]), 2.0);
        let s = FRAC_1_SQRT_2;
        assert!((chsh_combination([s, s, s, -s]) - TSIRELSON).abs() < 1e-15);
        assert_eq!(chsh_combination([1.0, 1.0, 1.0, 0.0]), 3.0);
    }

    #[test]
    fn chsh_setting_reaches_tsirelson() {
        let s = FRAC_1_SQRT_2;
        let setting = ChshSetting::new(
            CorrelatorExpansion::real(&[1.0, 0.0], &zx(), Side::A).unwrap(),
            CorrelatorExpansion::real(&[0.0, 1.0], &zx(), Side::A).unwrap(),
            CorrelatorExpansion::real(&[s, s], &zx(), Side::B).unwrap(),
            CorrelatorExpansion::real(&[s, -s], &zx(), Side::B).unwrap(),
            bell_projector(),
        )
        .unwrap();
        assert!((chsh_value(&setting).unwrap() - TSIRELSON).abs() < 1e-14);
    }

    #[test]
    fn chsh_setting_requires_shared_family() {
        let r = ChshSetting::new(
            CorrelatorExpansion::real(&[1.0, 0.0], &zx(), Side::A).unwrap(),
            CorrelatorExpansion::real(&[1.0, 0.0], &zy(), Side::A).unwrap(),
            CorrelatorExpansion::real(&[1.0, 0.0], &zx(), Side::B).unwrap(),
            CorrelatorExpansion::real(&[1.0, 0.0], &zx(), Side::B).unwrap(),
            bell_projector(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn case_formulas_follow_from_trace_realization() {
        // O₂ = X gives Tr(Π X⊗X) = +1 on Φ+, the minus branch; O₂ = Y gives
        // Tr(Π Y⊗Y) = −1, the plus branch.
        let pi = bell_projector();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let (x, y): (f64, f64) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            for (ops, sign) in [(zx(), -1.0), (zy(), 1.0)] {
                let setting = ChshSetting::new(
                    CorrelatorExpansion::real(&[1.0, 0.0], &ops, Side::A).unwrap(),
                    CorrelatorExpansion::real(&[x.sin(), x.cos()], &ops, Side::A).unwrap(),
                    CorrelatorExpansion::real(&[1.0, 0.0], &ops, Side::B).unwrap(),
                    CorrelatorExpansion::real(&[y.sin(), y.cos()], &ops, Side::B).unwrap(),
                    pi.clone(),
                )
                .unwrap();
                let v = chsh_value(&setting).unwrap();
                assert!((v - case_one_value(x, y, sign)).abs() < 1e-13);
            }
            let setting = ChshSetting::new(
                CorrelatorExpansion::real(&[1.0, 0.0], &zx(), Side::A).unwrap(),
                CorrelatorExpansion::real(&[0.0, 1.0], &zx(), Side::A).unwrap(),
                CorrelatorExpansion::real(&[x.sin(), x.cos()], &zx(), Side::B).unwrap(),
                CorrelatorExpansion::real(&[y.sin(), y.cos()], &zx(), Side::B).unwrap(),
                pi.clone(),
            )
            .unwrap();
            assert!((chsh_value(&setting).unwrap() - case_two_value(x, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn case_one_point_values() {
        assert!((case_one_value(FRAC_PI_2, FRAC_PI_2, 1.0) - 2.0).abs() < 1e-15);
        assert!((case_one_value(FRAC_PI_2, FRAC_PI_2, -1.0) - 2.0).abs() < 1e-15);
        assert_eq!(case_one_value(0.0, 0.0, 1.0), 2.0);
    }

    #[test]
    fn case_two_point_values() {
        assert!((case_two_value(FRAC_PI_4, 3.0 * FRAC_PI_4) - TSIRELSON).abs() < 1e-15);
        assert!((case_two_value(FRAC_PI_4, FRAC_PI_4) - SQRT_2).abs() < 1e-15);
        assert_eq!(case_two_value(0.0, 0.0), 0.0);
        assert!(case_two_value(FRAC_PI_2, 0.0).abs() < 1e-15);
    }

    #[test]
    fn case_two_maximum_is_tsirelson() {
        let m = maximize_case_two();
        assert!((m.max - TSIRELSON).abs() < 1e-8);
        assert!((m.x - FRAC_PI_4).abs() < 1e-4 && (m.y - 3.0 * FRAC_PI_4).abs() < 1e-4, "{m:?}");
        assert!(m.max >= m.grid_best);
    }

    #[test]
    fn case_one_refinement_is_consistent_with_grid() {
        let r = maximize_case_one();
        let m = &r.maximum;
        assert!(m.max >= m.grid_best);
        // |∇S| ≤ 3 on the torus; half a cell diagonal bounds the grid gap.
        let h = 2.0 * PI / (CASE_GRID_POINTS - 1) as f64;
        assert!(m.max - m.grid_best < 3.0 * h);
        assert!(m.max <= TSIRELSON + 1e-9);
        assert!((case_one_value(m.x, m.y, m.sign.unwrap() as f64) - m.max).abs() < 1e-12);
        assert_eq!(r.agrees_with_reference, (m.max - REFERENCE_CASE_ONE_MAX).abs() < 1e-6);
    }

    #[test]
    fn spin_observables_are_pm_one() {
        let o = spin_observable(0.7, -1.9);
        let eig = crate::numerics::hermitian_eig(&o).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14 && (eig.values[1] + 1.0).abs() < 1e-14);
        assert!(spin_observable(0.0, 0.3).max_abs_diff(&ComplexMatrix::pauli_z()) < 1e-15);
        assert!(spin_observable(FRAC_PI_2, 0.0).max_abs_diff(&ComplexMatrix::pauli_x()) < 1e-15);
    }

    #[test]
    fn quantum_max_examples() {
        let bell = Ket::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        let m = chsh_quantum_max(&bell).unwrap();
        assert!((m.max - TSIRELSON).abs() < 1e-5, "{m:?}");
        let m = chsh_quantum_max(&Ket::basis(4, 0)).unwrap();
        assert!((m.max - 2.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn quantum_max_matches_correlation_tensor_bound() {
        // Largest two singular values t₁, t₂ of T give 2√(t₁² + t₂²).
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let st = random_ket(4, &mut rng);
            let t = correlation_tensor(&st).unwrap();
            let tm = ComplexMatrix::from_fn(3, 3, |i, j| c(t[i][j], 0.0));
            let sv = crate::numerics::singular_values(&tm);
            let bound = 2.0 * (sv[0] * sv[0] + sv[1] * sv[1]).sqrt();
            let m = chsh_quantum_max(&st).unwrap();
            assert!((m.max - bound).abs() < 1e-6, "{} vs {}", m.max, bound);
        }
    }
}
