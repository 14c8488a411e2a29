//! Schmidt decomposition of indistinguishable qubit pairs.
//!
//! The reduced one-qubit density is built with the symmetric partial inner
//! product ⟨ξ|ψ,φ⟩ = ⟨ξ|ψ⟩|φ⟩ + η⟨ξ|φ⟩|ψ⟩ instead of the ordinary partial
//! trace. Its eigenvectors give the Schmidt basis, used on both sides by
//! default, and its eigenvalues the Schmidt weights.
//!
//! The module also carries the projector machinery: projectors onto
//! indistinguishable computational subspaces, projectors onto Schmidt
//! product bases, and the equal-rank check for projectors closer than one in
//! operator norm.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{self, c, hermitian_eig, spectral_norm, ComplexMatrix, Ket, ONE, ZERO};
use crate::symstate::{check_eta, make_superposition, SuperpositionParams};

/// Default cutoff on eigenvalues when counting the Schmidt rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Tolerance for density-matrix and projector invariants.
pub const DENSITY_TOL: f64 = 1e-10;

/// ‖P − Q‖ must be below 1 − this margin for the equal-rank lemma to
/// apply; projectors of different rank sit at distance exactly 1, which
/// rounding can push a few ulps under.
pub const LEMMA_MARGIN: f64 = 1e-9;

/// Eigenvalue gap below which the spectrum is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Scalars a, b, c, N of the |0,s⟩ family, ρ = (1/2N)[[a, c], [c*, b]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyScalars {
    pub a: f64,
    pub b: f64,
    pub c: Complex64,
    pub n: f64,
}

impl FamilyScalars {
    pub fn of(p: SuperpositionParams) -> Self {
        let (sh, ch) = (p.theta / 2.0).sin_cos();
        Self {
            a: 4.0 * ch * ch + sh * sh,
            b: sh * sh,
            c: Complex64::from_polar(p.theta.sin(), p.phi),
            n: 1.0 + ch * ch,
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let k = 1.0 / (2.0 * self.n);
        ComplexMatrix::new(
            2,
            2,
            vec![c(k * self.a, 0.0), self.c * k, self.c.conj() * k, c(k * self.b, 0.0)],
        )
        .expect("2x2")
    }
}

/// One-qubit reduced density matrix.
#[derive(Debug, Clone)]
pub struct ReducedDensity {
    matrix: ComplexMatrix,
    params: Option<FamilyScalars>,
}

impl ReducedDensity {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::checked(matrix, None)
    }

    fn checked(matrix: ComplexMatrix, params: Option<FamilyScalars>) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::Shape("reduced density must be 2x2".into()));
        }
        let eig = hermitian_eig(&matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::OutOfRange(format!("trace {tr} is not 1")));
        }
        if eig.values.iter().any(|&l| l < -DENSITY_TOL) {
            return Err(Error::OutOfRange("reduced density is not positive".into()));
        }
        Ok(Self { matrix, params })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn params(&self) -> Option<FamilyScalars> {
        self.params
    }
}

/// ⟨ξ|ψ⟩|φ⟩ + η⟨ξ|φ⟩|ψ⟩, unnormalized.
pub fn sym_partial_inner(xi: &Ket, psi_phi: (&Ket, &Ket), eta: Complex64) -> Result<Ket> {
    let (psi, phi) = psi_phi;
    if xi.dim() != psi.dim() || psi.dim() != phi.dim() {
        return Err(Error::Shape("symmetric inner product needs equal dimensions".into()));
    }
    check_eta(eta)?;
    Ok(phi.scale(xi.inner(psi)).add(&psi.scale(eta * xi.inner(phi))))
}

/// How the one-qubit reduction of a two-qubit state is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartialTrace {
    /// Symmetric partial inner product with the given η.
    Symmetric(Complex64),
    /// Ordinary partial trace over the second qubit.
    Distinguishable,
}

impl Default for PartialTrace {
    fn default() -> Self {
        PartialTrace::Symmetric(ONE)
    }
}

/// 2x2 coefficient matrix C with |Ψ⟩ = Σ C_ij |i⟩|j⟩.
fn coefficients(state: &Ket) -> Result<ComplexMatrix> {
    if state.dim() != 4 {
        return Err(Error::Shape(format!("expected a two-qubit ket, got dim {}", state.dim())));
    }
    ComplexMatrix::new(2, 2, state.amplitudes().to_vec())
}

/// Matrix whose rows are the reduced single-qubit vectors of `state`.
fn reduction_rows(state: &Ket, mode: PartialTrace) -> Result<ComplexMatrix> {
    let cm = coefficients(state)?;
    match mode {
        PartialTrace::Distinguishable => Ok(cm),
        PartialTrace::Symmetric(eta) => {
            check_eta(eta)?;
            Ok(&cm + &cm.transpose().scale(eta))
        }
    }
}

/// Σ_ξ |v_ξ⟩⟨v_ξ| over the rows v_ξ of `rows`, scaled to unit trace.
fn density_from_rows(rows: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rho = &rows.transpose() * &rows.conj();
    let tr = rho.trace().re;
    if !(tr > 1e-24) || !tr.is_finite() {
        return Err(Error::NotNormalizable { norm: tr.max(0.0).sqrt() });
    }
    Ok(rho.scale(c(1.0 / tr, 0.0)))
}

/// Reduced density of a two-qubit state.
pub fn reduced_density(state: &Ket, mode: PartialTrace) -> Result<ReducedDensity> {
    ReducedDensity::new(density_from_rows(&reduction_rows(state, mode)?)?)
}

/// Reduced density of the labelled product |ψ⟩|φ⟩ under the symmetric
/// inner product. For |0⟩|s⟩ this is the complex conjugate of
/// [`reduced_density_from_family`] (the off-diagonal carries e^{-iφ}).
pub fn sym_partial_trace(psi: &Ket, phi: &Ket, eta: Complex64) -> Result<ReducedDensity> {
    if psi.dim() != 2 || phi.dim() != 2 {
        return Err(Error::Shape("expected two qubit kets".into()));
    }
    let rows: Vec<Ket> = (0..2)
        .map(|k| sym_partial_inner(&Ket::basis(2, k), (psi, phi), eta))
        .collect::<Result<_>>()?;
    let m = ComplexMatrix::from_columns(&rows)?.transpose();
    ReducedDensity::new(density_from_rows(&m)?)
}

/// ρ = (1/2N)[[a, c], [c*, b]] for |0,s(θ,φ)⟩.
///
/// With η = +1 the closed form is composed directly from a, b, c, N. Other
/// unit η go through the symmetric partial trace (conjugated to the same
/// convention) and carry no scalars.
pub fn reduced_density_from_family(p: SuperpositionParams, eta: Complex64) -> Result<ReducedDensity> {
    let p = SuperpositionParams::new(p.theta, p.phi)?;
    check_eta(eta)?;
    if (eta - ONE).norm() <= crate::symstate::ETA_TOL {
        let scalars = FamilyScalars::of(p);
        return ReducedDensity::checked(scalars.matrix(), Some(scalars));
    }
    let s = make_superposition(p)?;
    let traced = sym_partial_trace(&Ket::basis(2, 0), &s, eta)?;
    ReducedDensity::new(traced.matrix.conj())
}

/// λ₀ = (2/N)cos⁴(θ/4), λ₁ = (2/N)sin⁴(θ/4).
pub fn family_lambdas_closed_form(theta: f64) -> (f64, f64) {
    let n = 1.0 + (theta / 2.0).cos().powi(2);
    let (s, co) = (theta / 4.0).sin_cos();
    (2.0 / n * co.powi(4), 2.0 / n * s.powi(4))
}

/// |0̃⟩ = cos(θ/4)|0⟩ + sin(θ/4)|1⟩, |1̃⟩ = −sin(θ/4)|0⟩ + cos(θ/4)|1⟩.
pub fn family_basis_closed_form(theta: f64) -> (Ket, Ket) {
    let (s, co) = (theta / 4.0).sin_cos();
    (Ket::from_real(&[co, s]), Ket::from_real(&[-s, co]))
}

/// How the second-party Schmidt vector is paired with the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// |k̃, k̃⟩
    #[default]
    Same,
    /// |k̃, k̃⊥⟩
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtOptions {
    pub trace: PartialTrace,
    pub pairing: Pairing,
    pub rank_tolerance: f64,
}

impl Default for SchmidtOptions {
    fn default() -> Self {
        Self {
            trace: PartialTrace::default(),
            pairing: Pairing::Same,
            rank_tolerance: DEFAULT_RANK_TOL,
        }
    }
}

impl SchmidtOptions {
    pub fn with_eta(eta: Complex64) -> Self {
        Self {
            trace: PartialTrace::Symmetric(eta),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Eigenvalues of the reduced density, descending.
    pub lambdas: Vec<f64>,
    /// (|λ_k^A⟩, |λ_k^B⟩) per eigenvalue.
    pub bases: Vec<(Ket, Ket)>,
    pub rank_tolerance: f64,
}

impl SchmidtDecomposition {
    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    pub fn rank(&self) -> usize {
        schmidt_rank(self)
    }
}

/// Decomposes a normalized two-qubit state.
pub fn schmidt_decompose(state: &Ket, opts: SchmidtOptions) -> Result<SchmidtDecomposition> {
    if state.dim() != 4 {
        return Err(Error::Shape(format!("expected a two-qubit ket, got dim {}", state.dim())));
    }
    let norm = state.norm();
    if !(norm > 1e-12) || !norm.is_finite() {
        return Err(Error::NotNormalizable { norm });
    }
    let state = state.normalize()?;
    let rows = reduction_rows(&state, opts.trace)?;
    let rho = ReducedDensity::new(density_from_rows(&rows)?)?;
    // The rows of C + ηCᵀ are the transposed coefficient matrix of the
    // symmetrized state; transpose back for the degenerate-basis choice.
    decompose_density(&rho, Some(&rows.transpose()), opts)
}

/// Decomposes the |0,s(θ,φ)⟩ family through its closed-form reduced density.
pub fn schmidt_decompose_family(p: SuperpositionParams, eta: Complex64) -> Result<SchmidtDecomposition> {
    let rho = reduced_density_from_family(p, eta)?;
    let s = make_superposition(p)?;
    let zero = Ket::basis(2, 0);
    // Coefficients of |0⟩|s⟩ + η|s⟩|0⟩, conjugated to the closed-form convention.
    let sym = zero.kron(&s).add(&s.kron(&zero).scale(eta));
    let coeff = coefficients(&sym)?.conj();
    decompose_density(&rho, Some(&coeff), SchmidtOptions::with_eta(eta))
}

/// Eigendecomposes `rho` into Schmidt weights and bases. When the spectrum
/// is degenerate and a symmetric coefficient matrix is available, the basis
/// is fixed to the one that writes that state as Σ d_k |k̃⟩|k̃⟩.
pub fn decompose_density(
    rho: &ReducedDensity,
    coeff: Option<&ComplexMatrix>,
    opts: SchmidtOptions,
) -> Result<SchmidtDecomposition> {
    let eig = hermitian_eig(rho.matrix())?;
    let lambdas: Vec<f64> = eig.values.iter().map(|&l| l.clamp(0.0, 1.0)).collect();
    let mut side_a: Vec<Ket> = (0..lambdas.len()).map(|k| eig.vector(k)).collect();

    if lambdas.len() == 2 && (lambdas[0] - lambdas[1]).abs() < DEGENERACY_TOL {
        if let Some(basis) = coeff.and_then(takagi_basis_degenerate) {
            side_a = basis;
        }
    }

    let bases = match opts.pairing {
        Pairing::Same => side_a.iter().map(|v| (v.clone(), v.clone())).collect(),
        Pairing::Orthogonal => side_a
            .iter()
            .enumerate()
            .map(|(k, v)| (v.clone(), side_a[side_a.len() - 1 - k].clone()))
            .collect(),
    };
    Ok(SchmidtDecomposition {
        lambdas,
        bases,
        rank_tolerance: opts.rank_tolerance,
    })
}

/// For a symmetric 2x2 W proportional to a unitary, returns a real
/// orthonormal basis {u_k} with W = Σ d_k u_k u_kᵀ. Re W and Im W are real
/// symmetric and commute, so one of their combinations diagonalizes both.
fn takagi_basis_degenerate(w: &ComplexMatrix) -> Option<Vec<Ket>> {
    let scale = w.frobenius_norm();
    if scale == 0.0 || w.max_abs_diff(&w.transpose()) > 1e-10 * scale {
        return None;
    }
    let re = ComplexMatrix::from_fn(2, 2, |i, j| c(w[(i, j)].re, 0.0));
    let im = ComplexMatrix::from_fn(2, 2, |i, j| c(w[(i, j)].im, 0.0));
    let mut best: Option<(f64, numerics::HermitianEigen)> = None;
    for k in 0..4 {
        let (s, co) = (k as f64 * std::f64::consts::FRAC_PI_4).sin_cos();
        let h = &re.scale(c(co, 0.0)) + &im.scale(c(s, 0.0));
        let eig = hermitian_eig(&h).ok()?;
        let gap = eig.values[0] - eig.values[1];
        if best.as_ref().is_none_or(|(g, _)| gap > *g + 1e-12) {
            best = Some((gap, eig));
        }
    }
    let (gap, eig) = best?;
    if gap < 1e-9 * scale {
        // W is a multiple of the identity: any real basis works.
        return None;
    }
    Some((0..2).map(|k| eig.vector(k)).collect())
}

/// −Σ λ log₂ λ, with 0·log 0 = 0.
pub fn von_neumann_entropy(d: &SchmidtDecomposition) -> f64 {
    let h: f64 = d
        .lambdas
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum();
    h.max(0.0)
}

pub fn schmidt_rank(d: &SchmidtDecomposition) -> usize {
    d.lambdas.iter().filter(|&&l| l > d.rank_tolerance).count()
}

/// Hermitian idempotent matrix, optionally tagged with the computational
/// basis states it projects onto.
#[derive(Debug, Clone)]
pub struct SubspaceProjector {
    matrix: ComplexMatrix,
    basis_labels: Option<Vec<usize>>,
}

impl SubspaceProjector {
    /// Accepts `m` if it is Hermitian, idempotent and has integral trace.
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotProjector(format!("{}x{} is not square", m.rows(), m.cols())));
        }
        let herm = m.hermitian_deviation();
        if herm > DENSITY_TOL {
            return Err(Error::NotProjector(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let idem = (&m * &m).max_abs_diff(&m);
        if idem > DENSITY_TOL {
            return Err(Error::NotProjector(format!("P^2 != P (deviation {idem:.3e})")));
        }
        let tr = m.trace().re;
        if (tr - tr.round()).abs() >= 0.5 - 1e-6 {
            return Err(Error::NotProjector(format!("trace {tr} is not integral")));
        }
        Ok(Self {
            matrix: m,
            basis_labels: None,
        })
    }

    /// Projector onto the span of orthonormal kets.
    pub fn onto(kets: &[Ket]) -> Result<Self> {
        let dim = kets
            .first()
            .map(Ket::dim)
            .ok_or_else(|| Error::Shape("empty ket list; use indist_projector for the zero projector".into()))?;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for k in kets {
            if k.dim() != dim {
                return Err(Error::Shape("kets of unequal dimension".into()));
            }
            m = &m + &k.projector();
        }
        Self::from_matrix(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn basis_labels(&self) -> Option<&[usize]> {
        self.basis_labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Rank, read off the (integral) trace.
    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }
}

/// Π = Σ |ij⟩⟨ij| over the listed two-qubit basis indices (00=0 … 11=3).
pub fn indist_projector(basis_indices: &[usize]) -> Result<SubspaceProjector> {
    indist_projector_in(4, basis_indices)
}

pub fn indist_projector_in(dim: usize, basis_indices: &[usize]) -> Result<SubspaceProjector> {
    let mut seen = vec![false; dim];
    for &i in basis_indices {
        if i >= dim {
            return Err(Error::OutOfRange(format!("basis index {i} outside dimension {dim}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::OutOfRange(format!("duplicate basis index {i}")));
        }
    }
    let diag: Vec<Complex64> = seen.iter().map(|&s| if s { ONE } else { ZERO }).collect();
    let mut labels = basis_indices.to_vec();
    labels.sort_unstable();
    Ok(SubspaceProjector {
        matrix: ComplexMatrix::diag(&diag),
        basis_labels: Some(labels),
    })
}

/// S = Σ_k |k̃ k̃'⟩⟨k̃ k̃'| over the retained Schmidt weights.
pub fn schmidt_projector(d: &SchmidtDecomposition) -> Result<SubspaceProjector> {
    let kets: Vec<Ket> = d
        .lambdas
        .iter()
        .zip(&d.bases)
        .filter(|(&l, _)| l > d.rank_tolerance)
        .map(|(_, (a, b))| a.kron(b))
        .collect();
    if kets.is_empty() {
        return Err(Error::OutOfRange("Schmidt rank is zero".into()));
    }
    SubspaceProjector::onto(&kets)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankLemmaReport {
    pub norm: f64,
    pub rank_p: usize,
    pub rank_q: usize,
    pub lemma_applicable: bool,
    pub consistent: bool,
}

/// ‖P − Q‖ < 1 (spectral norm) must imply rank P = rank Q.
pub fn rank_lemma_check(p: &SubspaceProjector, q: &SubspaceProjector) -> Result<RankLemmaReport> {
    if p.dim() != q.dim() {
        return Err(Error::Shape(format!("projector dimensions {} and {}", p.dim(), q.dim())));
    }
    let norm = spectral_norm(&(p.matrix() - q.matrix()));
    let (rank_p, rank_q) = (p.rank(), q.rank());
    let lemma_applicable = norm < 1.0 - LEMMA_MARGIN;
    Ok(RankLemmaReport {
        norm,
        rank_p,
        rank_q,
        lemma_applicable,
        consistent: !lemma_applicable || rank_p == rank_q,
    })
}

/// Same as [`rank_lemma_check`] on raw matrices, rejecting non-projectors.
pub fn rank_lemma_check_matrices(p: &ComplexMatrix, q: &ComplexMatrix) -> Result<RankLemmaReport> {
    rank_lemma_check(
        &SubspaceProjector::from_matrix(p.clone())?,
        &SubspaceProjector::from_matrix(q.clone())?,
    )
}

/// Random rank-`rank` projector on C^dim.
pub fn random_projector<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> SubspaceProjector {
    let u = numerics::random_unitary(dim, rng);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for k in 0..rank.min(dim) {
        m = &m + &u.column(k).projector();
    }
    SubspaceProjector::from_matrix(m).expect("columns of a unitary span a projector")
}

/// Draws a projector pair on C^dim. Most pairs are a projector and a
/// rotation of it by exp(iεH) with random ε, so ‖P − Q‖ lands on both sides
/// of 1; the rest pair independent projectors of possibly different rank.
pub fn sample_projector_pair<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> (SubspaceProjector, SubspaceProjector) {
    let rank = rng.gen_range(0..=dim);
    let p = random_projector(dim, rank, rng);
    if rng.gen_bool(0.8) {
        let eps = rng.gen_range(0.0..0.6);
        let h = numerics::random_hermitian(dim, rng).scale(c(eps, 0.0));
        let u = numerics::unitary_from_hermitian(&h).expect("hermitian");
        let q = &(&u * p.matrix()) * &u.dagger();
        // Clean rounding so the idempotency check is not the thing under test.
        let q = SubspaceProjector::from_matrix(q.clone()).unwrap_or_else(|_| p.clone());
        (p, q)
    } else {
        let other = rng.gen_range(0..=dim);
        (p, random_projector(dim, other, rng))
    }
}

/// ‖P_U − P_V‖ for the spans of two orthonormal ket lists.
pub fn subspace_distance(u: &[Ket], v: &[Ket]) -> Result<f64> {
    let pu = SubspaceProjector::onto(u)?;
    let pv = SubspaceProjector::onto(v)?;
    Ok(spectral_norm(&(pu.matrix() - pv.matrix())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn params(theta: f64, phi: f64) -> SuperpositionParams {
        SuperpositionParams::new(theta, phi).unwrap()
    }

    fn close_kets(a: &Ket, b: &Ket) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn decomposition(lambdas: &[f64], tol: f64) -> SchmidtDecomposition {
        SchmidtDecomposition {
            lambdas: lambdas.to_vec(),
            bases: (0..lambdas.len()).map(|k| (Ket::basis(2, k), Ket::basis(2, k))).collect(),
            rank_tolerance: tol,
        }
    }

    #[test]
    fn sym_partial_inner_examples() {
        let (zero, one) = (Ket::basis(2, 0), Ket::basis(2, 1));
        let v = sym_partial_inner(&zero, (&zero, &one), ONE).unwrap();
        assert!(close_kets(&v, &one) < 1e-15);
        let v = sym_partial_inner(&zero, (&zero, &zero), ONE).unwrap();
        assert!(close_kets(&v, &zero.scale(c(2.0, 0.0))) < 1e-15);
        let v = sym_partial_inner(&zero, (&zero, &one), -ONE).unwrap();
        assert!(close_kets(&v, &one) < 1e-15);
        assert!(sym_partial_inner(&zero, (&zero, &one), c(0.0, 2.0)).is_err());
    }

    #[test]
    fn family_density_examples() {
        let rho = reduced_density_from_family(params(0.0, 0.3), ONE).unwrap();
        let want = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(rho.matrix().max_abs_diff(&want) < 1e-15);
        let sc = rho.params().unwrap();
        assert_eq!((sc.a, sc.b, sc.n), (4.0, 0.0, 2.0));

        let rho = reduced_density_from_family(params(PI / 2.0, 0.0), ONE).unwrap();
        let want = ComplexMatrix::from_real(2, 2, &[2.5 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.5 / 3.0]).unwrap();
        assert!(rho.matrix().max_abs_diff(&want) < 1e-15);

        let rho = reduced_density_from_family(params(PI, 0.0), ONE).unwrap();
        let want = ComplexMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(rho.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn symmetric_trace_is_conjugate_of_closed_form() {
        for &(theta, phi) in &[(0.4, 1.3), (PI / 2.0, -2.0), (2.9, 0.0)] {
            let p = params(theta, phi);
            let s = make_superposition(p).unwrap();
            let traced = sym_partial_trace(&Ket::basis(2, 0), &s, ONE).unwrap();
            let closed = reduced_density_from_family(p, ONE).unwrap();
            assert!(traced.matrix().max_abs_diff(&closed.matrix().conj()) < 1e-14);
        }
    }

    #[test]
    fn non_bosonic_eta_family_is_a_valid_density() {
        let rho = reduced_density_from_family(params(1.0, 0.5), c(0.0, 1.0)).unwrap();
        assert!(rho.params().is_none());
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn family_lambda_examples() {
        let d = schmidt_decompose_family(params(PI, 0.0), ONE).unwrap();
        assert!((d.lambdas[0] - 0.5).abs() < 1e-12 && (d.lambdas[1] - 0.5).abs() < 1e-12);
        let d = schmidt_decompose_family(params(0.0, 0.0), ONE).unwrap();
        assert!((d.lambdas[0] - 1.0).abs() < 1e-12 && d.lambdas[1].abs() < 1e-12);
        let d = schmidt_decompose_family(params(PI / 2.0, 0.0), ONE).unwrap();
        assert!((d.lambdas[0] - 0.971405).abs() < 1e-6);
        assert!((d.lambdas[1] - 0.028595).abs() < 1e-6);
    }

    #[test]
    fn closed_form_weights_sum_to_one() {
        for i in 0..=1000 {
            let theta = PI * i as f64 / 1000.0;
            let (l0, l1) = family_lambdas_closed_form(theta);
            assert!((l0 + l1 - 1.0).abs() < 1e-14, "theta={theta}");
        }
    }

    #[test]
    fn numeric_weights_match_closed_form_on_grid() {
        for i in 0..256 {
            let theta = PI * i as f64 / 255.0;
            for j in 0..8 {
                let phi = -PI + 2.0 * PI * j as f64 / 8.0;
                let d = schmidt_decompose_family(params(theta, phi), ONE).unwrap();
                let (l0, l1) = family_lambdas_closed_form(theta);
                assert!((d.lambdas[0] - l0).abs() < 1e-9, "theta={theta}");
                assert!((d.lambdas[1] - l1).abs() < 1e-9, "theta={theta}");
            }
        }
    }

    #[test]
    fn bases_match_closed_form() {
        for theta in [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 0.1, 3.0] {
            let d = schmidt_decompose_family(params(theta, 0.0), ONE).unwrap();
            let (b0, b1) = family_basis_closed_form(theta);
            assert!(d.bases[0].0.distance_up_to_phase(&b0) < 1e-9, "theta={theta}");
            assert!(d.bases[1].0.distance_up_to_phase(&b1) < 1e-9, "theta={theta}");
        }
    }

    #[test]
    fn theta_pi_bases_span_plus_plus_minus_minus() {
        let d = schmidt_decompose_family(params(PI, 0.0), ONE).unwrap();
        let plus = Ket::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let minus = Ket::from_real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
        let got: Vec<Ket> = d.bases.iter().map(|(a, b)| a.kron(b)).collect();
        let want = vec![plus.kron(&plus), minus.kron(&minus)];
        assert!(subspace_distance(&got, &want).unwrap() < 1e-9);
        // Also the closed-form bases at θ = π.
        let (b0, b1) = family_basis_closed_form(PI);
        assert!(b0.distance_up_to_phase(&plus) < 1e-12);
        assert!(b1.distance_up_to_phase(&minus) < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(von_neumann_entropy(&decomposition(&[1.0, 0.0], 1e-10)), 0.0);
        assert!((von_neumann_entropy(&decomposition(&[0.5, 0.5], 1e-10)) - 1.0).abs() < 1e-15);
        let h = von_neumann_entropy(&decomposition(&[0.971405, 0.028595], 1e-10));
        let want = -(0.971405f64 * 0.971405f64.log2() + 0.028595 * 0.028595f64.log2());
        assert!((h - want).abs() < 1e-15);
        assert!((h - 0.187296).abs() < 1e-6);
    }

    #[test]
    fn entropy_extremes_on_family() {
        let at = |t: f64| schmidt_decompose_family(params(t, 0.0), ONE).unwrap().entropy();
        assert!((at(PI) - 1.0).abs() < 1e-9);
        assert!(at(0.0).abs() < 1e-12);
        let grid: Vec<f64> = (0..=200).map(|i| at(PI * i as f64 / 200.0)).collect();
        let (argmax, _) = grid
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(argmax, 200);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(schmidt_rank(&decomposition(&[1.0, 0.0], 1e-10)), 1);
        assert_eq!(schmidt_rank(&decomposition(&[0.5, 0.5], 1e-10)), 2);
        assert_eq!(schmidt_rank(&decomposition(&[1.0 - 1e-14, 1e-14], 1e-10)), 1);
    }

    #[test]
    fn decompose_rejects_bad_input() {
        assert!(matches!(
            schmidt_decompose(&Ket::unnormalized(vec![ZERO; 4]), SchmidtOptions::default()),
            Err(Error::NotNormalizable { .. })
        ));
        // Antisymmetric singlet vanishes under bosonic symmetrization.
        let singlet = Ket::from_real(&[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]);
        assert!(matches!(
            schmidt_decompose(&singlet, SchmidtOptions::default()),
            Err(Error::NotNormalizable { .. })
        ));
        let d = schmidt_decompose(&singlet, SchmidtOptions::with_eta(-ONE)).unwrap();
        assert_eq!(d.rank(), 2);
        assert!(schmidt_decompose(&Ket::basis(2, 0), SchmidtOptions::default()).is_err());
    }

    #[test]
    fn distinguishable_mode_matches_ordinary_schmidt() {
        let opts = SchmidtOptions {
            trace: PartialTrace::Distinguishable,
            ..SchmidtOptions::default()
        };
        let d = schmidt_decompose(&Ket::basis(4, 1), opts).unwrap();
        assert_eq!(d.rank(), 1);
        let bell = Ket::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        let d = schmidt_decompose(&bell, opts).unwrap();
        assert_eq!(d.rank(), 2);
        assert!((d.entropy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn states_inside_odd_sector_have_rank_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pi = indist_projector(&[1, 2]).unwrap();
        for _ in 0..200 {
            let v = numerics::random_ket(2, &mut rng);
            let state = Ket::new(vec![ZERO, v[0], v[1], ZERO]).unwrap();
            for trace in [PartialTrace::Symmetric(ONE), PartialTrace::Distinguishable] {
                let opts = SchmidtOptions { trace, ..SchmidtOptions::default() };
                let d = schmidt_decompose(&state, opts).unwrap();
                assert_eq!(d.rank(), 2);
                let s = schmidt_projector(&d).unwrap();
                let report = rank_lemma_check(&s, &pi).unwrap();
                assert!(report.consistent);
            }
        }
    }

    #[test]
    fn indist_projector_examples() {
        let p = indist_projector(&[1, 2]).unwrap();
        let want = ComplexMatrix::from_real(4, 4, &[
            0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ])
        .unwrap();
        assert_eq!(p.matrix(), &want);
        assert_eq!(p.basis_labels(), Some(&[1, 2][..]));
        assert_eq!(p.rank(), 2);
        assert_eq!(indist_projector(&[]).unwrap().matrix(), &ComplexMatrix::zeros(4, 4));
        assert_eq!(indist_projector(&[3, 0, 2, 1]).unwrap().matrix(), &ComplexMatrix::identity(4));
        assert!(indist_projector(&[1, 1]).is_err());
        assert!(indist_projector(&[4]).is_err());
    }

    #[test]
    fn schmidt_projector_examples() {
        let d = schmidt_decompose(&Ket::basis(4, 0), SchmidtOptions::default()).unwrap();
        let s = schmidt_projector(&d).unwrap();
        assert!(s.matrix().max_abs_diff(&indist_projector(&[0]).unwrap().matrix().clone()) < 1e-12);

        let d = schmidt_decompose_family(params(PI, 0.0), ONE).unwrap();
        let s = schmidt_projector(&d).unwrap();
        assert_eq!(s.rank(), 2);
        assert!((s.matrix().trace().re - 2.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let st = numerics::random_ket(4, &mut rng);
            for pairing in [Pairing::Same, Pairing::Orthogonal] {
                let opts = SchmidtOptions { pairing, ..SchmidtOptions::default() };
                let s = schmidt_projector(&schmidt_decompose(&st, opts).unwrap()).unwrap();
                let m = s.matrix();
                assert!((m * m).max_abs_diff(m) < 1e-10);
            }
        }
    }

    #[test]
    fn orthogonal_pairing_pairs_orthogonal_vectors() {
        let opts = SchmidtOptions { pairing: Pairing::Orthogonal, ..SchmidtOptions::default() };
        let rho = reduced_density_from_family(params(1.0, 0.0), ONE).unwrap();
        let d = decompose_density(&rho, None, opts).unwrap();
        for (a, b) in &d.bases {
            assert!(a.inner(b).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_lemma_examples() {
        let p = indist_projector(&[0]).unwrap();
        let r = rank_lemma_check(&p, &p).unwrap();
        assert_eq!(r.norm, 0.0);
        assert!(r.lemma_applicable && r.consistent && r.rank_p == r.rank_q);

        let q = indist_projector(&[1]).unwrap();
        let r = rank_lemma_check(&p, &q).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-14);
        assert!(!r.lemma_applicable && r.consistent);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_projector(4, 2, &mut rng);
        let h = numerics::random_hermitian(4, &mut rng).scale(c(0.05, 0.0));
        let u = numerics::unitary_from_hermitian(&h).unwrap();
        let q = SubspaceProjector::from_matrix(&(&u * p.matrix()) * &u.dagger()).unwrap();
        let r = rank_lemma_check(&p, &q).unwrap();
        assert!(r.lemma_applicable);
        assert_eq!((r.rank_p, r.rank_q), (2, 2));
    }

    #[test]
    fn rank_lemma_rejects_non_projectors() {
        let bad = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        let ok = ComplexMatrix::identity(2);
        assert!(matches!(rank_lemma_check_matrices(&bad, &ok), Err(Error::NotProjector(_))));
        let half = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(rank_lemma_check_matrices(&half, &ok).is_err());
        let p3 = indist_projector_in(3, &[0]).unwrap();
        assert!(rank_lemma_check(&p3, &indist_projector(&[0]).unwrap()).is_err());
    }

    #[test]
    fn lemma_holds_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut applicable = 0;
        for i in 0..1000 {
            let dim = 2 + i % 5;
            let (p, q) = sample_projector_pair(dim, &mut rng);
            let r = rank_lemma_check(&p, &q).unwrap();
            assert!(r.consistent, "counterexample {r:?}");
            applicable += r.lemma_applicable as usize;
        }
        assert!(applicable > 300, "only {applicable} pairs closer than 1");
    }
}
