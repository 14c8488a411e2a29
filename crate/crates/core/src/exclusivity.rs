//! Measurement events, the exclusivity relation, two-copy products and the
//! E-inequality Σ_n² + (2ⁿ − Σ_n)² + 4^{n−1} ≤ 4ⁿ.
//!
//! Two events are exclusive when some party (copy-indexed for two-copy
//! events) has the same setting in both but different outcomes. Coarse
//! events, such as the A_ij parity outcomes, are sets of fine outcomes on one
//! context; two coarse events are exclusive when every pair of their fine
//! events is.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::f64::consts::SQRT_2;

use crate::behaviors::{bits_to_string, parse_bits, party_bit, sigma_n, Behavior, SignPattern};
use crate::error::{Error, Result};

/// Slack on the E-inequality comparison.
pub const E_INEQUALITY_SLACK: f64 = 1e-9;

/// (b|x): outcome string `b` for setting string `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub x: String,
    pub b: String,
}

impl Event {
    pub fn new(x: impl Into<String>, b: impl Into<String>) -> Result<Self> {
        let e = Self { x: x.into(), b: b.into() };
        e.validate()?;
        Ok(e)
    }

    fn from_indices(x: usize, b: usize, len: usize) -> Self {
        Self {
            x: bits_to_string(x, len),
            b: bits_to_string(b, len),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.x.len() != self.b.len() || self.x.is_empty() {
            return Err(Error::Shape(format!(
                "settings '{}' and outcomes '{}' differ in length",
                self.x, self.b
            )));
        }
        parse_bits(&self.x, self.x.len())?;
        parse_bits(&self.b, self.b.len())?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// True iff some position has equal settings and different outcomes.
pub fn exclusive(e1: &Event, e2: &Event) -> Result<bool> {
    e1.validate()?;
    e2.validate()?;
    if e1.len() != e2.len() {
        return Err(Error::Shape(format!("events of length {} and {}", e1.len(), e2.len())));
    }
    Ok(e1
        .x
        .bytes()
        .zip(e2.x.bytes())
        .zip(e1.b.bytes().zip(e2.b.bytes()))
        .any(|((x1, x2), (b1, b2))| x1 == x2 && b1 != b2))
}

pub fn pairwise_exclusive_check(events: &[Event]) -> Result<bool> {
    for i in 0..events.len() {
        for j in i + 1..events.len() {
            if !exclusive(&events[i], &events[j])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusivityGraph {
    pub events: Vec<Event>,
    /// Index pairs (i, j), i < j, of exclusive events.
    pub edges: Vec<(usize, usize)>,
}

impl ExclusivityGraph {
    pub fn new(events: Vec<Event>) -> Result<Self> {
        let mut edges = vec![];
        for i in 0..events.len() {
            for j in i + 1..events.len() {
                if exclusive(&events[i], &events[j])? {
                    edges.push((i, j));
                }
            }
        }
        Ok(Self { events, edges })
    }

    pub fn is_clique(&self) -> bool {
        let n = self.events.len();
        self.edges.len() == n * n.saturating_sub(1) / 2
    }
}

/// A set of fine outcomes on one context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoarseEvent {
    pub x: String,
    pub outcomes: BTreeSet<String>,
}

impl CoarseEvent {
    pub fn fine_events(&self) -> impl Iterator<Item = Event> + '_ {
        self.outcomes.iter().map(|b| Event {
            x: self.x.clone(),
            b: b.clone(),
        })
    }

    pub fn probability(&self, b: &Behavior) -> Result<f64> {
        let n = b.n();
        let x = parse_bits(&self.x, n)?;
        self.outcomes
            .iter()
            .map(|o| parse_bits(o, n).map(|o| b.p(x, o)))
            .sum()
    }
}

pub fn exclusive_coarse(e1: &CoarseEvent, e2: &CoarseEvent) -> Result<bool> {
    for f1 in e1.fine_events() {
        for f2 in e2.fine_events() {
            if !exclusive(&f1, &f2)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Single-copy events counted by Σ_n.
pub fn sigma_event_set(n: usize, p: &SignPattern) -> Result<Vec<Event>> {
    if n < 2 || p.n() != n {
        return Err(Error::OutOfRange(format!("need n >= 2 matching the pattern, got {n}")));
    }
    let size = 1usize << n;
    let mut events = Vec::with_capacity(size * size / 2);
    for x in 0..size {
        let want = if p.sign(x) > 0 { 0 } else { 1 };
        for b in (0..size).filter(|b| (b.count_ones() & 1) as i8 == want) {
            events.push(Event::from_indices(x, b, n));
        }
    }
    Ok(events)
}

/// Joint behavior of two independent copies. Parties 1..n are the first
/// copy and n+1..2n the second.
pub fn two_copy_product(b: &Behavior, b2: &Behavior) -> Result<Behavior> {
    if b.n() != b2.n() {
        return Err(Error::Shape(format!("copies with {} and {} parties", b.n(), b2.n())));
    }
    let n = b.n();
    let mask = (1usize << n) - 1;
    Behavior::from_fn(2 * n, |x, o| b.p(x >> n, o >> n) * b2.p(x & mask, o & mask))
}

/// A_ij outcome: 0 when the two copies agree.
pub fn a_ij_outcome(b_a: u8, b_a_prime: u8) -> u8 {
    (b_a ^ b_a_prime) & 1
}

fn joint_parties(joint: &Behavior) -> Result<usize> {
    let m = joint.n();
    if !m.is_multiple_of(2) || m < 4 {
        return Err(Error::Shape(format!("two-copy behavior needs an even party count >= 4, got {m}")));
    }
    Ok(m / 2)
}

/// Joint setting index with party 1 of the copies at (i, j), party 2 at
/// (ī, j̄) and the remaining parties from `rest` (first copy then second,
/// n − 2 bits each).
fn a_ij_context(n: usize, i: u8, j: u8, rest: usize) -> usize {
    let rest_a = rest >> (n - 2);
    let rest_b = rest & ((1usize << (n - 2)) - 1);
    let copy = |first: u8, tail: usize| -> usize {
        let head = ((first as usize & 1) << 1) | (1 - (first as usize & 1));
        (head << (n - 2)) | tail
    };
    (copy(i, rest_a) << n) | copy(j, rest_b)
}

/// Coarse event "A_ij yields p and A_īj̄ yields q" on one joint context.
/// A_ij reads party 1 of both copies, A_īj̄ party 2 of both copies.
pub fn a_ij_coarse_event(n: usize, i: u8, j: u8, pq: (u8, u8), rest: usize) -> Result<CoarseEvent> {
    if n < 2 || i > 1 || j > 1 || pq.0 > 1 || pq.1 > 1 || rest >= 1usize << (2 * (n - 2)) {
        return Err(Error::OutOfRange("invalid A_ij event specification".into()));
    }
    let m = 2 * n;
    let x = a_ij_context(n, i, j, rest);
    let outcomes = (0..1usize << m)
        .filter(|&o| {
            let pa = a_ij_outcome(party_bit(o, 0, m) as u8, party_bit(o, n, m) as u8);
            let qa = a_ij_outcome(party_bit(o, 1, m) as u8, party_bit(o, n + 1, m) as u8);
            (pa, qa) == pq
        })
        .map(|o| bits_to_string(o, m))
        .collect();
    Ok(CoarseEvent {
        x: bits_to_string(x, m),
        outcomes,
    })
}

/// Probability of (p, q | A_ij, A_īj̄) on one explicit joint context.
pub fn a_ij_event_probability_in_context(joint: &Behavior, i: u8, j: u8, pq: (u8, u8), rest: usize) -> Result<f64> {
    let n = joint_parties(joint)?;
    a_ij_coarse_event(n, i, j, pq, rest)?.probability(joint)
}

/// Probability of (p, q | A_ij, A_īj̄), averaged uniformly over the
/// 4^{n−2} settings of the parties not involved.
pub fn a_ij_event_probability(joint: &Behavior, i: u8, j: u8, pq: (u8, u8)) -> Result<f64> {
    let n = joint_parties(joint)?;
    let groups = 1usize << (2 * (n - 2));
    let mut total = 0.0;
    for rest in 0..groups {
        total += a_ij_event_probability_in_context(joint, i, j, pq, rest)?;
    }
    Ok(total / groups as f64)
}

/// Larger root of x² + (2ⁿ − x)² + 4^{n−1} = 4ⁿ, solved numerically.
pub fn e_inequality_bound(n: usize) -> Result<f64> {
    if !(2..=30).contains(&n) {
        return Err(Error::OutOfRange(format!("need 2 <= n <= 30, got {n}")));
    }
    let two_n = (1u64 << n) as f64;
    // 2x² − 2·2ⁿ x + (4ⁿ + 4^{n−1} − 4ⁿ) = 0
    let (a, b, c) = (2.0, -2.0 * two_n, two_n * two_n / 4.0);
    let disc = b * b - 4.0 * a * c;
    let q = -0.5 * (b - disc.sqrt());
    Ok(q / a)
}

/// 2^{n−2}(2 + √2).
pub fn e_inequality_bound_closed_form(n: usize) -> f64 {
    2f64.powi(n as i32 - 2) * (2.0 + SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EInequalityReport {
    pub sigma: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

pub fn verify_e_inequality(b: &Behavior, p: &SignPattern) -> Result<EInequalityReport> {
    let n = b.n();
    let sigma = sigma_n(b, p)?;
    let two_n = (1u64 << n) as f64;
    let lhs = sigma * sigma + (two_n - sigma).powi(2) + two_n * two_n / 4.0;
    let rhs = two_n * two_n;
    Ok(EInequalityReport {
        sigma,
        lhs,
        rhs,
        satisfied: lhs <= rhs + E_INEQUALITY_SLACK,
    })
}

/// Two-copy events whose copies are both inside Σ_n or both outside it;
/// 4ⁿ·4ⁿ/2 events in total.
pub fn two_copy_sigma_events(n: usize, p: &SignPattern) -> Result<Vec<Event>> {
    let inside: HashSet<Event> = sigma_event_set(n, p)?.into_iter().collect();
    let size = 1usize << n;
    let mut events = vec![];
    for xa in 0..size {
        for xb in 0..size {
            for ba in 0..size {
                for bb in 0..size {
                    let ea = Event::from_indices(xa, ba, n);
                    let eb = Event::from_indices(xb, bb, n);
                    if inside.contains(&ea) == inside.contains(&eb) {
                        events.push(Event {
                            x: ea.x + &eb.x,
                            b: ea.b + &eb.b,
                        });
                    }
                }
            }
        }
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub set_count: usize,
    pub expected_set_count: usize,
    pub expected_set_size: usize,
    pub sizes_ok: bool,
    pub disjoint: bool,
    pub covers_universe: bool,
    pub pairwise_exclusive: bool,
    pub valid: bool,
}

/// Checks a candidate partition of [`two_copy_sigma_events`] into 4ⁿ sets
/// of 4ⁿ/2 pairwise exclusive events.
pub fn verify_partition(n: usize, p: &SignPattern, sets: &[Vec<Event>]) -> Result<PartitionReport> {
    let universe: HashSet<Event> = two_copy_sigma_events(n, p)?.into_iter().collect();
    let expected_set_count = 1usize << (2 * n);
    let expected_set_size = expected_set_count / 2;
    let sizes_ok = sets.len() == expected_set_count && sets.iter().all(|s| s.len() == expected_set_size);
    let mut seen = HashSet::new();
    let mut disjoint = true;
    for e in sets.iter().flatten() {
        disjoint &= seen.insert(e.clone());
    }
    let covers_universe = seen == universe;
    let mut pairwise_exclusive = true;
    for s in sets {
        pairwise_exclusive &= pairwise_exclusive_check(s)?;
    }
    Ok(PartitionReport {
        set_count: sets.len(),
        expected_set_count,
        expected_set_size,
        sizes_ok,
        disjoint,
        covers_universe,
        pairwise_exclusive,
        valid: sizes_ok && disjoint && covers_universe && pairwise_exclusive,
    })
}

/// Backtracking search for a partition at n = 2. Events are placed in
/// generation order; a new set is opened only when no open set accepts the
/// event, which removes set-permutation symmetry.
pub fn search_partition_n2(p: &SignPattern) -> Result<Option<Vec<Vec<Event>>>> {
    if p.n() != 2 {
        return Err(Error::OutOfRange("partition search is limited to n = 2".into()));
    }
    let events = two_copy_sigma_events(2, p)?;
    let m = events.len();
    let mut excl = vec![vec![false; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let e = exclusive(&events[i], &events[j])?;
            excl[i][j] = e;
            excl[j][i] = e;
        }
    }
    let (count, size) = (16usize, 8usize);
    let mut sets: Vec<Vec<usize>> = vec![];

    fn place(k: usize, events: usize, excl: &[Vec<bool>], sets: &mut Vec<Vec<usize>>, count: usize, size: usize) -> bool {
        if k == events {
            return sets.len() == count && sets.iter().all(|s| s.len() == size);
        }
        for s in 0..sets.len() {
            if sets[s].len() < size && sets[s].iter().all(|&o| excl[o][k]) {
                sets[s].push(k);
                if place(k + 1, events, excl, sets, count, size) {
                    return true;
                }
                sets[s].pop();
            }
        }
        if sets.len() < count {
            sets.push(vec![k]);
            if place(k + 1, events, excl, sets, count, size) {
                return true;
            }
            sets.pop();
        }
        false
    }

    if !place(0, m, &excl, &mut sets, count, size) {
        return Ok(None);
    }
    Ok(Some(
        sets.into_iter()
            .map(|s| s.into_iter().map(|k| events[k].clone()).collect())
            .collect(),
    ))
}
