//! n-party, two-setting, binary-outcome behaviors p(b|x).
//!
//! Setting and outcome strings are written with party 1 as the leftmost
//! character; as integers, party 1 is the most significant bit. Outcomes map
//! to ±1 through (−1)^b.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::numerics::{c, ComplexMatrix, Ket, ONE, ZERO};
use crate::optimize::{multi_start_maximize, NelderMead};

/// Normalization tolerance for each conditional distribution.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Most negative probability accepted as round-off.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// Tolerance for detecting perfect correlations.
pub const TRANSITIVITY_TOL: f64 = 1e-9;

/// Largest party count for the deterministic enumeration.
pub const MAX_ENUMERATION_PARTIES: usize = 6;

/// Largest party count accepted by [`Behavior`].
pub const MAX_PARTIES: usize = 12;

/// Seed for the GHZ angle search.
pub const GHZ_SEARCH_SEED: u64 = 0x6e2_0003;

/// `n`-character bit string of `v`, party 1 first.
pub fn bits_to_string(v: usize, n: usize) -> String {
    (0..n).map(|k| if (v >> (n - 1 - k)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`bits_to_string`].
pub fn parse_bits(s: &str, n: usize) -> Result<usize> {
    if s.len() != n {
        return Err(Error::Parse(format!("'{s}' is not a {n}-bit string")));
    }
    s.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::Parse(format!("'{s}' contains a non-bit character"))),
    })
}

/// Bit of party `k` (0-based) in an `n`-party index.
pub fn party_bit(v: usize, k: usize, n: usize) -> usize {
    (v >> (n - 1 - k)) & 1
}

fn parity(v: usize) -> usize {
    (v.count_ones() & 1) as usize
}

/// A conditional probability table over n parties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BehaviorJson", into = "BehaviorJson")]
pub struct Behavior {
    n: usize,
    /// `probs[x][b]`.
    probs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct BehaviorJson {
    n: usize,
    table: BTreeMap<String, BTreeMap<String, f64>>,
}

impl TryFrom<BehaviorJson> for Behavior {
    type Error = Error;

    fn try_from(j: BehaviorJson) -> Result<Self> {
        if j.n == 0 || j.n > MAX_PARTIES {
            return Err(Error::InvalidBehavior(format!("party count {} unsupported", j.n)));
        }
        let size = 1usize << j.n;
        if j.table.len() != size {
            return Err(Error::InvalidBehavior(format!("expected {size} settings, found {}", j.table.len())));
        }
        let mut probs = vec![vec![0.0; size]; size];
        for (xs, row) in &j.table {
            let x = parse_bits(xs, j.n)?;
            for (bs, &p) in row {
                probs[x][parse_bits(bs, j.n)?] = p;
            }
        }
        Behavior::new(j.n, probs)
    }
}

impl From<Behavior> for BehaviorJson {
    fn from(b: Behavior) -> Self {
        let table = b
            .probs
            .iter()
            .enumerate()
            .map(|(x, row)| {
                let row = row
                    .iter()
                    .enumerate()
                    .map(|(o, &p)| (bits_to_string(o, b.n), p))
                    .collect();
                (bits_to_string(x, b.n), row)
            })
            .collect();
        BehaviorJson { n: b.n, table }
    }
}

impl Behavior {
    pub fn new(n: usize, probs: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || n > MAX_PARTIES {
            return Err(Error::InvalidBehavior(format!("party count {n} unsupported")));
        }
        let size = 1usize << n;
        if probs.len() != size || probs.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidBehavior(format!("table must be {size}x{size}")));
        }
        for (x, row) in probs.iter().enumerate() {
            if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < -NEGATIVITY_TOL) {
                return Err(Error::InvalidBehavior(format!(
                    "p(.|{}) contains {p}",
                    bits_to_string(x, n)
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidBehavior(format!(
                    "p(.|{}) sums to {total}",
                    bits_to_string(x, n)
                )));
            }
        }
        Ok(Self { n, probs })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let size = 1usize << n.min(MAX_PARTIES + 1);
        let probs = (0..size).map(|x| (0..size).map(|b| f(x, b)).collect()).collect();
        Self::new(n, probs)
    }

    /// p(b|x) = (1 + (−1)^{parity b} E(x)) / 2ⁿ: uniform marginals and the
    /// given full correlators.
    pub fn from_correlators(n: usize, e: &[f64]) -> Result<Self> {
        if e.len() != 1usize << n {
            return Err(Error::InvalidBehavior(format!("need {} correlators", 1usize << n)));
        }
        let scale = 1.0 / (1usize << n) as f64;
        Self::from_fn(n, |x, b| {
            let sign = if parity(b) == 0 { 1.0 } else { -1.0 };
            (1.0 + sign * e[x]) * scale
        })
    }

    /// Deterministic local behavior. `strategy[k]` encodes party k's outcome
    /// for setting 0 in bit 0 and for setting 1 in bit 1.
    pub fn deterministic(strategy: &[u8]) -> Result<Self> {
        let n = strategy.len();
        if strategy.iter().any(|&s| s > 3) {
            return Err(Error::OutOfRange("strategy codes are 0..=3".into()));
        }
        let outcome = |x: usize| -> usize {
            (0..n).fold(0, |acc, k| (acc << 1) | ((strategy[k] >> party_bit(x, k, n)) & 1) as usize)
        };
        Self::from_fn(n, |x, b| if b == outcome(x) { 1.0 } else { 0.0 })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        let p = 1.0 / (1usize << n.min(MAX_PARTIES + 1)) as f64;
        Self::from_fn(n, |_, _| p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contexts(&self) -> usize {
        self.probs.len()
    }

    pub fn p(&self, x: usize, b: usize) -> f64 {
        self.probs[x][b]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x]
    }

    /// E(x) = Σ_b (−1)^{parity b} p(b|x).
    pub fn correlator(&self, x: usize) -> f64 {
        self.probs[x]
            .iter()
            .enumerate()
            .map(|(b, p)| if parity(b) == 0 { *p } else { -*p })
            .sum()
    }

    pub fn correlators(&self) -> Vec<f64> {
        (0..self.contexts()).map(|x| self.correlator(x)).collect()
    }
}

/// Random normalized table (not necessarily no-signaling).
pub fn random_behavior<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Behavior> {
    let size = 1usize << n.min(MAX_PARTIES + 1);
    let probs = (0..size)
        .map(|_| {
            let w: Vec<f64> = (0..size).map(|_| -rng.gen_range(f64::MIN_POSITIVE..1.0).ln()).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|v| v / total).collect()
        })
        .collect();
    Behavior::new(n, probs)
}

/// True iff summing out any one party's outcome gives a distribution that
/// does not depend on that party's setting. This implies every smaller
/// marginal is setting-independent as well.
pub fn is_no_signaling(b: &Behavior, tol: f64) -> bool {
    let n = b.n;
    let size = b.contexts();
    for k in 0..n {
        let mask = 1usize << (n - 1 - k);
        for x in (0..size).filter(|x| x & mask == 0) {
            let flipped = x | mask;
            for rest in (0..size).filter(|o| o & mask == 0) {
                let here = b.p(x, rest) + b.p(x, rest | mask);
                let there = b.p(flipped, rest) + b.p(flipped, rest | mask);
                if (here - there).abs() > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// ±1 sign for each setting string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern {
    n: usize,
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sign(&self, x: usize) -> i8 {
        self.signs[x]
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    fn check(&self, b: &Behavior) -> Result<()> {
        if b.n != self.n {
            return Err(Error::Shape(format!("{}-party pattern on a {}-party behavior", self.n, b.n)));
        }
        Ok(())
    }
}

/// Signs of S_n: for n = 2 the CHSH pattern (+,+,+,−) on (00,01,10,11);
/// for larger n, the new last party with setting 1 keeps s_{n−1}(x′) and
/// with setting 0 takes s_{n−1} on the inverted settings x̄′.
pub fn svetlichny_signs(n: usize) -> Result<SignPattern> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("sign pattern needs n >= 2, got {n}")));
    }
    if n > MAX_PARTIES {
        return Err(Error::OutOfRange(format!("sign pattern needs n <= {MAX_PARTIES}, got {n}")));
    }
    let mut signs: Vec<i8> = vec![1, 1, 1, -1];
    for m in 3..=n {
        let prev_mask = (1usize << (m - 1)) - 1;
        signs = (0..1usize << m)
            .map(|x| {
                let head = x >> 1;
                if x & 1 == 1 {
                    signs[head]
                } else {
                    signs[!head & prev_mask]
                }
            })
            .collect();
    }
    Ok(SignPattern { n, signs })
}

/// S_n = Σ_x sign(x) E(x).
pub fn s_n(b: &Behavior, p: &SignPattern) -> Result<f64> {
    p.check(b)?;
    Ok((0..b.contexts()).map(|x| p.sign(x) as f64 * b.correlator(x)).sum())
}

/// Σ_n: total probability of parity-0 outcomes on + contexts and parity-1
/// outcomes on − contexts.
pub fn sigma_n(b: &Behavior, p: &SignPattern) -> Result<f64> {
    p.check(b)?;
    let mut total = 0.0;
    for x in 0..b.contexts() {
        let want = if p.sign(x) > 0 { 0 } else { 1 };
        total += (0..b.contexts()).filter(|o| parity(*o) == want).map(|o| b.p(x, o)).sum::<f64>();
    }
    Ok(total)
}

/// Maximum of S_n over the 4ⁿ deterministic local strategies.
pub fn local_deterministic_max(n: usize, p: &SignPattern) -> Result<f64> {
    if n > MAX_ENUMERATION_PARTIES {
        return Err(Error::OutOfRange(format!(
            "enumeration limited to n <= {MAX_ENUMERATION_PARTIES}, got {n}"
        )));
    }
    if p.n != n {
        return Err(Error::Shape(format!("{}-party pattern for n = {n}", p.n)));
    }
    let size = 1usize << n;
    let mut best = f64::NEG_INFINITY;
    // Strategy bits: party k's outcome for setting s sits at bit 2k + s.
    for strategy in 0..1usize << (2 * n) {
        let mut total = 0i64;
        for x in 0..size {
            let mut par = 0;
            for k in 0..n {
                par ^= (strategy >> (2 * k + party_bit(x, k, n))) & 1;
            }
            let e = if par == 0 { 1 } else { -1 };
            total += p.sign(x) as i64 * e;
        }
        best = best.max(total as f64);
    }
    Ok(best)
}

fn check_observable(o: &ComplexMatrix) -> Result<()> {
    if o.rows() != 2 || o.cols() != 2 {
        return Err(Error::Shape(format!("observables must be 2x2, got {}x{}", o.rows(), o.cols())));
    }
    if !o.is_hermitian(1e-10) {
        return Err(Error::NotHermitian {
            deviation: o.hermitian_deviation(),
        });
    }
    let sq = o * o;
    if sq.max_abs_diff(&ComplexMatrix::identity(2)) > 1e-10 {
        return Err(Error::OutOfRange("observable must square to the identity".into()));
    }
    Ok(())
}

/// Applies a 2x2 operator to qubit `k` (party k + 1) of an n-qubit vector.
fn apply_local(amps: &mut [num_complex::Complex64], op: &ComplexMatrix, k: usize, n: usize) {
    let stride = 1usize << (n - 1 - k);
    for i in 0..amps.len() {
        if i & stride == 0 {
            let (a0, a1) = (amps[i], amps[i | stride]);
            amps[i] = op[(0, 0)] * a0 + op[(0, 1)] * a1;
            amps[i | stride] = op[(1, 0)] * a0 + op[(1, 1)] * a1;
        }
    }
}

fn check_measurements(state: &Ket, measurements: &[[ComplexMatrix; 2]]) -> Result<usize> {
    let n = measurements.len();
    if n == 0 || n > MAX_PARTIES || state.dim() != 1usize << n {
        return Err(Error::Shape(format!(
            "state of dim {} with {n} parties' measurements",
            state.dim()
        )));
    }
    for pair in measurements {
        for o in pair {
            check_observable(o)?;
        }
    }
    Ok(n)
}

/// Born-rule behavior: party k measures `measurements[k][x_k]` and the
/// outcome bit b selects the projector (I + (−1)^b O)/2.
pub fn quantum_behavior(state: &Ket, measurements: &[[ComplexMatrix; 2]]) -> Result<Behavior> {
    let n = check_measurements(state, measurements)?;
    let state = state.normalize()?;
    let id = ComplexMatrix::identity(2);
    let half = c(0.5, 0.0);
    let projectors: Vec<[[ComplexMatrix; 2]; 2]> = measurements
        .iter()
        .map(|pair| {
            let proj = |o: &ComplexMatrix| [(&id + o).scale(half), (&id - o).scale(half)];
            [proj(&pair[0]), proj(&pair[1])]
        })
        .collect();
    let size = 1usize << n;
    let mut probs = vec![vec![0.0; size]; size];
    for (x, row) in probs.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            let mut v = state.amplitudes().to_vec();
            for k in 0..n {
                apply_local(&mut v, &projectors[k][party_bit(x, k, n)][party_bit(b, k, n)], k, n);
            }
            let p: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            *slot = p;
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
    }
    Behavior::new(n, probs)
}

/// E(x) = ⟨ψ| ⊗_k O_k^{x_k} |ψ⟩ for every setting string, by the Born rule.
pub fn quantum_correlators(state: &Ket, measurements: &[[ComplexMatrix; 2]]) -> Result<Vec<f64>> {
    let n = check_measurements(state, measurements)?;
    let state = state.normalize()?;
    Ok((0..1usize << n)
        .map(|x| {
            let mut v = state.amplitudes().to_vec();
            for (k, pair) in measurements.iter().enumerate() {
                apply_local(&mut v, &pair[party_bit(x, k, n)], k, n);
            }
            state.amplitudes().iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<num_complex::Complex64>().re
        })
        .collect())
}

/// (|0…0⟩ + |1…1⟩)/√2.
pub fn ghz_state(n: usize) -> Ket {
    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    amps[0] = ONE;
    amps[dim - 1] = ONE;
    Ket::unnormalized(amps).normalize().expect("nonzero")
}

/// cos φ X + sin φ Y.
pub fn xy_observable(phi: f64) -> ComplexMatrix {
    crate::correlations::spin_observable(PI / 2.0, phi)
}

#[derive(Debug, Clone, Serialize)]
pub struct GhzOptimum {
    pub n: usize,
    pub s_n: f64,
    /// (φ for setting 0, φ for setting 1) per party.
    pub angles: Vec<[f64; 2]>,
    pub behavior: Behavior,
}

/// Maximizes S_n on the GHZ state over x-y plane measurements, then
/// rebuilds the optimal behavior from the Born rule.
pub fn optimize_ghz_svetlichny(n: usize, seed: u64, starts: usize) -> Result<GhzOptimum> {
    let pattern = svetlichny_signs(n)?;
    let state = ghz_state(n);
    let measurements = |v: &[f64]| -> Vec<[ComplexMatrix; 2]> {
        v.chunks(2).map(|a| [xy_observable(a[0]), xy_observable(a[1])]).collect()
    };
    let f = |v: &[f64]| -> f64 {
        quantum_correlators(&state, &measurements(v))
            .map(|e| e.iter().enumerate().map(|(x, e)| pattern.sign(x) as f64 * e).sum())
            .unwrap_or(f64::NEG_INFINITY)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..starts.max(1))
        .map(|_| (0..2 * n).map(|_| rng.gen_range(-PI..PI)).collect())
        .collect();
    let opt = multi_start_maximize(&NelderMead::default(), &f, &starts);
    let behavior = quantum_behavior(&state, &measurements(&opt.x))?;
    Ok(GhzOptimum {
        n,
        s_n: s_n(&behavior, &pattern)?,
        angles: opt.x.chunks(2).map(|a| [a[0], a[1]]).collect(),
        behavior,
    })
}

/// 2^{n−1}√2.
pub fn quantum_bound(n: usize) -> f64 {
    (1u64 << (n - 1)) as f64 * SQRT_2
}

/// p(00|x) = p(11|x) = 1/2 on x ∈ {00, 01, 10}, uniform on x = 11.
pub fn pr_like_box() -> Behavior {
    Behavior::from_correlators(2, &[1.0, 1.0, 1.0, 0.0]).expect("valid box")
}

/// The standard PR box with E = (1, 1, 1, −1).
pub fn pr_box() -> Behavior {
    Behavior::from_correlators(2, &[1.0, 1.0, 1.0, -1.0]).expect("valid box")
}

/// Uniform-marginal box with E = (1/√2, 1/√2, 1/√2, −1/√2).
pub fn tsirelson_behavior() -> Behavior {
    let s = 1.0 / SQRT_2;
    Behavior::from_correlators(2, &[s, s, s, -s]).expect("valid box")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitivityViolation {
    /// The three perfectly correlated contexts.
    pub perfect: [String; 3],
    pub target: String,
    pub implied: f64,
    pub actual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitivityReport {
    pub violations: Vec<TransitivityViolation>,
}

/// Product-rule check for two parties: whenever three correlators are
/// perfect (|E| ≥ 1 − tol) the fourth must equal their product. With all
/// four perfect the contradiction is reported once, against context 11.
pub fn transitivity_check(b: &Behavior, tol: f64) -> Result<TransitivityReport> {
    if b.n != 2 {
        return Err(Error::Shape(format!("transitivity check needs n = 2, got {}", b.n)));
    }
    let e = b.correlators();
    let perfect: Vec<usize> = (0..4).filter(|&x| e[x].abs() >= 1.0 - tol).collect();
    let target = match perfect.len() {
        3 => (0..4).find(|x| !perfect.contains(x)).expect("one missing"),
        4 => 3,
        _ => return Ok(TransitivityReport { violations: vec![] }),
    };
    let others: Vec<usize> = (0..4).filter(|&x| x != target).collect();
    let implied: f64 = others.iter().map(|&x| e[x].signum()).product();
    let mut violations = vec![];
    if (e[target] - implied).abs() > tol {
        violations.push(TransitivityViolation {
            perfect: [0, 1, 2].map(|k| bits_to_string(others[k], 2)),
            target: bits_to_string(target, 2),
            implied,
            actual: e[target],
        });
    }
    Ok(TransitivityReport { violations })
}
