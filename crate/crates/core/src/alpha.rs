//! Exact moments of x under the α-law, where the α_n are independent with
//! density ∝ (1−|α_n|²)^{nβ−1}.
//!
//! E(x^p (x^q)^*) expands over labelled families of gap sequences: one
//! sequence (i, j) per part of p and one (k, l) per part of q. A family
//! contributes only when, at every index N, the unconjugated factors
//! (the i's and l's) and the conjugated ones (the j's and k's) occur equally
//! often, m(N) times; it then contributes ∏_N m(N)!/((Nβ+1)⋯(Nβ+m(N))).

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::{gap_sequences, GapSequence, MultiIndex, MultiplicityVector};
use crate::exact::{BetaPoly, Rat, RatFuncBeta};
use crate::gaussian::{gaussian_x_moment, variance_pmf};

/// Upper bound on the candidate product explored by [`tuple_families`].
pub const FAMILY_GUARD: u128 = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlphaError {
    #[error("beta must be positive, got {0}")]
    BetaNotPositive(Rat),
    #[error("brute-force enumeration would visit {0} candidate families")]
    TooManyFamilies(u128),
}

/// A labelled family of gap sequences: `p_side[r]` has degree equal to the
/// r-th part of p (in [`MultiIndex::parts`] order), likewise for q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TupleFamily {
    pub p_side: Vec<GapSequence>,
    pub q_side: Vec<GapSequence>,
}

impl TupleFamily {
    /// Σ δ_i (p side) + Σ δ_l (q side): the unconjugated indices.
    pub fn lhs(&self) -> MultiplicityVector {
        let mut counts = Vec::new();
        let mut bump = |t: u32| {
            if counts.len() <= t as usize {
                counts.resize(t as usize + 1, 0);
            }
            counts[t as usize] += 1;
        };
        for g in &self.p_side {
            g.pairs().iter().for_each(|&(i, _)| bump(i));
        }
        for g in &self.q_side {
            g.pairs().iter().for_each(|&(_, l)| bump(l));
        }
        MultiplicityVector::from_dense(counts)
    }

    /// Σ δ_j (p side) + Σ δ_k (q side): the conjugated indices.
    pub fn rhs(&self) -> MultiplicityVector {
        let flipped = TupleFamily {
            p_side: self.q_side.clone(),
            q_side: self.p_side.clone(),
        };
        flipped.lhs()
    }

    pub fn is_balanced(&self) -> bool {
        self.lhs() == self.rhs()
    }

    pub fn max_index(&self) -> u32 {
        self.p_side
            .iter()
            .chain(&self.q_side)
            .map(GapSequence::max_index)
            .max()
            .unwrap_or(0)
    }
}

/// A partial sum of the α-side series together with truncation diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedSumResult {
    pub value: Rat,
    pub max_index: u32,
    /// Contribution of families whose largest index equals `max_index`.
    pub last_shell: Rat,
    /// last_shell × max_index; a heuristic, not a proved bound.
    pub tail_estimate: Rat,
}

impl TruncatedSumResult {
    fn from_partials(partials: &[Rat]) -> Self {
        let n = partials.len() - 1;
        let value = partials[n].clone();
        let last_shell = match n {
            0 => value.clone(),
            n => &value - &partials[n - 1],
        };
        let tail_estimate = &last_shell * Rat::int(n as u64);
        TruncatedSumResult {
            value,
            max_index: n as u32,
            last_shell,
            tail_estimate,
        }
    }

    fn zero(max_index: u32) -> Self {
        TruncatedSumResult {
            value: Rat::zero(),
            max_index,
            last_shell: Rat::zero(),
            tail_estimate: Rat::zero(),
        }
    }
}

/// E(α^p (α^q)^*) = ∏_n p(n)!/((nβ+1)⋯(nβ+p(n))) when p = q, else 0.
pub fn alpha_joint_moment(p: &MultiIndex, q: &MultiIndex) -> RatFuncBeta {
    if p != q {
        return RatFuncBeta::zero();
    }
    p.iter().fold(RatFuncBeta::one(), |acc, (n, c)| {
        let den = (1..=c).fold(BetaPoly::one(), |d, k| {
            &d * &BetaPoly::linear(Rat::int(n), Rat::int(k))
        });
        let factor = RatFuncBeta::constant(Rat::int(crate::combinatorics::factorial(c)))
            .div(&RatFuncBeta::from_poly(den))
            .expect("nonzero denominator");
        &acc * &factor
    })
}

/// m!/((Nβ+1)⋯(Nβ+m)); the factor at N = 0 is 1 because α_0 = 1.
pub fn shell_weight(n: u32, m: u32, beta: &Rat) -> Rat {
    if n == 0 {
        return Rat::one();
    }
    let nb = beta * Rat::int(n);
    (1..=m).fold(Rat::one(), |acc, k| {
        let k = Rat::int(k);
        acc * &k / (&nb + &k)
    })
}

/// ∏_N shell_weight(N, m(N), β).
pub fn term_value(m: &MultiplicityVector, beta: &Rat) -> Rat {
    m.iter().map(|(n, c)| shell_weight(n, c, beta)).product()
}

/// Degrees of the labelled sequences: p's parts then q's parts.
fn strand_targets(p: &MultiIndex, q: &MultiIndex) -> (Vec<u32>, usize) {
    let mut targets = p.parts();
    let n_p = targets.len();
    targets.extend(q.parts());
    (targets, n_p)
}

/// Number of balanced labelled families with all indices ≤ `max_index` and
/// multiplicity vector exactly `m`, by backtracking over the indices in
/// the support of m.
pub fn count_tuples(p: &MultiIndex, q: &MultiIndex, m: &MultiplicityVector, max_index: u32) -> u64 {
    if p.deg() != q.deg() {
        return 0;
    }
    let Some(top) = m.max_support() else {
        return u64::from(p.is_empty() && q.is_empty());
    };
    if top > max_index {
        return 0;
    }
    let (targets, n_p) = strand_targets(p, q);
    if targets.is_empty() {
        return 0;
    }
    let allowed = |g: &GapSequence| g.flatten().iter().all(|&t| m.get(t) > 0);
    let mut candidates: HashMap<u32, Vec<GapSequence>> = HashMap::new();
    for &n in &targets {
        candidates
            .entry(n)
            .or_insert_with(|| gap_sequences(n, top).into_iter().filter(allowed).collect());
    }
    let mut lhs: Vec<u32> = (0..=top).map(|t| m.get(t)).collect();
    let mut rhs = lhs.clone();

    fn rec(
        k: usize,
        targets: &[u32],
        n_p: usize,
        candidates: &HashMap<u32, Vec<GapSequence>>,
        lhs: &mut [u32],
        rhs: &mut [u32],
    ) -> u64 {
        if k == targets.len() {
            return u64::from(lhs.iter().chain(rhs.iter()).all(|&c| c == 0));
        }
        let mut total = 0;
        for g in &candidates[&targets[k]] {
            // p side: i is unconjugated, j conjugated; q side: k conjugated, l not.
            let (up, down): (Vec<u32>, Vec<u32>) = if k < n_p {
                g.pairs().iter().copied().unzip()
            } else {
                let (hi, lo): (Vec<u32>, Vec<u32>) = g.pairs().iter().copied().unzip();
                (lo, hi)
            };
            if up.iter().any(|&t| lhs[t as usize] == 0)
                || down.iter().any(|&t| rhs[t as usize] == 0)
            {
                continue;
            }
            up.iter().for_each(|&t| lhs[t as usize] -= 1);
            down.iter().for_each(|&t| rhs[t as usize] -= 1);
            total += rec(k + 1, targets, n_p, candidates, lhs, rhs);
            up.iter().for_each(|&t| lhs[t as usize] += 1);
            down.iter().for_each(|&t| rhs[t as usize] += 1);
        }
        total
    }
    rec(0, &targets, n_p, &candidates, &mut lhs, &mut rhs)
}

/// Every balanced labelled family with indices ≤ `max_index`, by brute force.
/// Intended as an oracle for small cases.
pub fn tuple_families(
    p: &MultiIndex,
    q: &MultiIndex,
    max_index: u32,
) -> Result<Vec<TupleFamily>, AlphaError> {
    if p.deg() != q.deg() {
        return Ok(Vec::new());
    }
    let (targets, n_p) = strand_targets(p, q);
    let lists: Vec<Vec<GapSequence>> = targets
        .iter()
        .map(|&n| gap_sequences(n, max_index))
        .collect();
    let visits = lists
        .iter()
        .try_fold(1u128, |acc, l| acc.checked_mul(l.len() as u128))
        .unwrap_or(u128::MAX);
    if visits > FAMILY_GUARD {
        return Err(AlphaError::TooManyFamilies(visits));
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        lists: &[Vec<GapSequence>],
        n_p: usize,
        current: &mut Vec<GapSequence>,
        out: &mut Vec<TupleFamily>,
    ) {
        if current.len() == lists.len() {
            let family = TupleFamily {
                p_side: current[..n_p].to_vec(),
                q_side: current[n_p..].to_vec(),
            };
            if family.is_balanced() {
                out.push(family);
            }
            return;
        }
        for g in &lists[current.len()] {
            current.push(g.clone());
            rec(lists, n_p, current, out);
            current.pop();
        }
    }
    rec(&lists, n_p, &mut current, &mut out);
    Ok(out)
}

/// Per-sequence scan state: gap accumulated so far (including the running
/// gap of an open pair) and whether a pair is open.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Strand {
    gap: u8,
    open: bool,
}

/// Sums a product weight over all labelled families of gap sequences with
/// the given degrees, scanning indices t = 0, 1, ..., max_index.
///
/// Reading a sequence upward, each pair opens at its lower index and closes
/// at its upper one. At index t every sequence may open, close or idle;
/// `weight(t, up, down)` is the factor for `up` unconjugated and `down`
/// conjugated events at t, or `None` to forbid that combination. Strands
/// `[0, n_p)` close on unconjugated factors, the rest open on them.
///
/// Returns the partial sums over families with largest index ≤ t, for every t.
fn scan_families(
    targets: &[u32],
    n_p: usize,
    max_index: u32,
    mut weight: impl FnMut(u32, usize, usize) -> Option<Rat>,
) -> Vec<Rat> {
    let start = vec![
        Strand {
            gap: 0,
            open: false
        };
        targets.len()
    ];
    let done: Vec<Strand> = targets
        .iter()
        .map(|&n| Strand {
            gap: n as u8,
            open: false,
        })
        .collect();
    let mut states: HashMap<Vec<Strand>, Rat> = HashMap::from([(start, Rat::one())]);
    let mut partials = Vec::with_capacity(max_index as usize + 1);
    let mut weights: Vec<Option<Rat>> = Vec::new();
    for t in 0..=max_index {
        let k = targets.len();
        weights.clear();
        for up in 0..=k {
            for down in 0..=k {
                weights.push(weight(t, up, down));
            }
        }
        let mut next: HashMap<Vec<Strand>, Rat> = HashMap::with_capacity(states.len());
        for (state, value) in &states {
            let mut moved = state.clone();
            if t > 0 {
                let mut alive = true;
                for (s, &n) in moved.iter_mut().zip(targets) {
                    if s.open {
                        s.gap += 1;
                        alive &= u32::from(s.gap) <= n;
                    }
                }
                if !alive {
                    continue;
                }
            }
            branch(
                &moved,
                targets,
                n_p,
                0,
                0,
                0,
                &mut moved.clone(),
                &mut |new, up, down| {
                    if let Some(w) = &weights[up * (k + 1) + down] {
                        let contribution = if w.is_one() { value.clone() } else { value * w };
                        *next.entry(new.to_vec()).or_default() += contribution;
                    }
                },
            );
        }
        states = next;
        partials.push(states.get(&done).cloned().unwrap_or_default());
    }
    partials
}

#[allow(clippy::too_many_arguments)]
fn branch(
    base: &[Strand],
    targets: &[u32],
    n_p: usize,
    k: usize,
    up: usize,
    down: usize,
    current: &mut Vec<Strand>,
    emit: &mut impl FnMut(&[Strand], usize, usize),
) {
    if k == base.len() {
        emit(current, up, down);
        return;
    }
    let s = base[k];
    let closes_up = k < n_p;
    current[k] = s;
    branch(base, targets, n_p, k + 1, up, down, current, emit);
    if s.open {
        current[k] = Strand {
            gap: s.gap,
            open: false,
        };
        let (u, d) = if closes_up {
            (up + 1, down)
        } else {
            (up, down + 1)
        };
        branch(base, targets, n_p, k + 1, u, d, current, emit);
    } else if u32::from(s.gap) < targets[k] {
        current[k] = Strand {
            gap: s.gap,
            open: true,
        };
        let (u, d) = if closes_up {
            (up, down + 1)
        } else {
            (up + 1, down)
        };
        branch(base, targets, n_p, k + 1, u, d, current, emit);
    }
    current[k] = s;
}

fn check_beta(beta: &Rat) -> Result<(), AlphaError> {
    if beta.is_negative() || beta.is_zero() {
        return Err(AlphaError::BetaNotPositive(beta.clone()));
    }
    Ok(())
}

/// Partial sums of the α-side series for E(x^p (x^q)^*), one per largest
/// index 0..=max_index.
pub fn alpha_x_partial_sums(
    p: &MultiIndex,
    q: &MultiIndex,
    beta: &Rat,
    max_index: u32,
) -> Result<Vec<Rat>, AlphaError> {
    check_beta(beta)?;
    if p.deg() != q.deg() {
        return Ok(vec![Rat::zero(); max_index as usize + 1]);
    }
    let (targets, n_p) = strand_targets(p, q);
    assert!(
        targets.iter().all(|&n| n < u8::MAX as u32),
        "part too large"
    );
    Ok(scan_families(&targets, n_p, max_index, |t, up, down| {
        (up == down).then(|| shell_weight(t, up as u32, beta))
    }))
}

/// E(x^p (x^q)^*) under the α-law, summed exactly over all families with
/// indices ≤ `max_index`.
pub fn alpha_x_moment(
    p: &MultiIndex,
    q: &MultiIndex,
    beta: &Rat,
    max_index: u32,
) -> Result<TruncatedSumResult, AlphaError> {
    check_beta(beta)?;
    if p.deg() != q.deg() {
        return Ok(TruncatedSumResult::zero(max_index));
    }
    let partials = alpha_x_partial_sums(p, q, beta, max_index)?;
    Ok(TruncatedSumResult::from_partials(&partials))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NiceIdentity {
    pub lhs: Rat,
    pub rhs: Rat,
    pub tail: Rat,
    pub last_shell: Rat,
}

/// lhs = Σ over gap sequences of degree n with indices ≤ max_index of
/// ∏_u 1/((i(u)β+1)(j(u)β+1)); rhs = ∏_{k≤n} ((1/k)β^{-1} + (k−1)/k).
pub fn nice_identity_check(n: u32, beta: &Rat, max_index: u32) -> Result<NiceIdentity, AlphaError> {
    check_beta(beta)?;
    let partials = scan_families(&[n], 1, max_index, |t, up, down| {
        Some(match up + down {
            0 => Rat::one(),
            _ => (beta * Rat::int(t) + Rat::one()).recip().expect("positive"),
        })
    });
    let shell = TruncatedSumResult::from_partials(&partials);
    Ok(NiceIdentity {
        lhs: shell.value,
        rhs: variance_pmf(n).eval(beta),
        tail: shell.tail_estimate,
        last_shell: shell.last_shell,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CnRow {
    pub beta: Rat,
    pub gaussian: Rat,
    pub alpha: TruncatedSumResult,
    pub difference: Rat,
    pub tolerance: Rat,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CnReport {
    pub p: MultiIndex,
    pub q: MultiIndex,
    pub rows: Vec<CnRow>,
    pub pass: bool,
}

/// Compares the exact Gaussian moment with the truncated α-side sum at each
/// β; a row passes when the gap is at most 10 × the tail estimate.
pub fn verify_cn_identity(
    p: &MultiIndex,
    q: &MultiIndex,
    betas: &[Rat],
    max_index: u32,
) -> Result<CnReport, AlphaError> {
    let gaussian = gaussian_x_moment(p, q);
    let mut rows = Vec::with_capacity(betas.len());
    for beta in betas {
        let alpha = alpha_x_moment(p, q, beta, max_index)?;
        let exact = gaussian.eval(beta);
        let difference = &exact - &alpha.value;
        let tolerance = &alpha.tail_estimate * Rat::int(10);
        let pass = difference.abs() <= tolerance;
        rows.push(CnRow {
            beta: beta.clone(),
            gaussian: exact,
            alpha,
            difference,
            tolerance,
            pass,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(CnReport {
        p: p.clone(),
        q: q.clone(),
        rows,
        pass,
    })
}
