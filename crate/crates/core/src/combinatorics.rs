//! Multi-indices, partitions as densities, decompositions and gap sequences.
//!
//! A multi-index `p` is a finitely supported vector of nonnegative integers
//! indexed by the positive integers, written `"n:count,n:count"` with
//! strictly increasing `n`. A partition of `d` is identified with its density,
//! the multi-index `L` with `L(u)` = number of parts equal to `u`, so that
//! `deg(L) = d`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exact::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed multi-index token {0:?} (expected index:count)")]
    Token(String),
    #[error("multi-index indices must be strictly increasing at token {0:?}")]
    Order(String),
    #[error("index 0 is not allowed in a multi-index (token {0:?})")]
    ZeroIndex(String),
}

/// Finitely supported multi-index over the positive integers.
///
/// Stored densely: `counts[j - 1] = p(j)`, with trailing zeros trimmed so that
/// structural equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex {
    counts: Vec<u32>,
}

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex { counts: Vec::new() }
    }

    /// The density `δ_n` (a single `n` with count 1).
    pub fn delta(n: u32) -> Self {
        MultiIndex::from_pairs(&[(n, 1)])
    }

    /// Builds from `(index, count)` pairs; repeated indices accumulate.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut counts = Vec::new();
        for &(j, c) in pairs {
            assert!(j >= 1, "multi-index entries start at 1");
            let j = j as usize;
            if counts.len() < j {
                counts.resize(j, 0);
            }
            counts[j - 1] += c;
        }
        MultiIndex::from_dense(counts)
    }

    /// `dense[j - 1] = p(j)`.
    pub fn from_dense(mut counts: Vec<u32>) -> Self {
        while counts.last() == Some(&0) {
            counts.pop();
        }
        MultiIndex { counts }
    }

    pub fn get(&self, j: u32) -> u32 {
        if j == 0 {
            return 0;
        }
        self.counts.get(j as usize - 1).copied().unwrap_or(0)
    }

    /// Iterates the support as `(index, count)` in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i as u32 + 1, c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Σ_j j·p(j)
    pub fn deg(&self) -> u32 {
        self.iter().map(|(j, c)| j * c).sum()
    }

    /// |p| = Σ_j p(j)
    pub fn size(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Number of indices with nonzero count.
    pub fn length(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Largest index in the support, 0 when empty.
    pub fn max_support(&self) -> u32 {
        self.counts.len() as u32
    }

    /// p! = ∏_j p(j)!
    pub fn factorial(&self) -> BigInt {
        self.counts.iter().map(|&c| factorial(c)).product()
    }

    pub fn dense(&self) -> &[u32] {
        &self.counts
    }

    /// Entrywise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let n = self.counts.len().max(other.counts.len());
        MultiIndex::from_dense(
            (0..n)
                .map(|i| self.counts.get(i).unwrap_or(&0) + other.counts.get(i).unwrap_or(&0))
                .collect(),
        )
    }

    /// Parts in the labelled order (n, r): n increasing, r = 1..=p(n).
    pub fn parts(&self) -> Vec<u32> {
        self.iter()
            .flat_map(|(j, c)| std::iter::repeat_n(j, c as usize))
            .collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pairs(f, self.iter())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for MultiIndex {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let pairs = parse_pairs(s)?;
        if let Some((tok, _)) = pairs.iter().find(|(_, (j, _))| *j == 0) {
            return Err(ParseError::ZeroIndex(tok.clone()));
        }
        let pairs: Vec<(u32, u32)> = pairs.into_iter().map(|(_, p)| p).collect();
        Ok(MultiIndex::from_pairs(&pairs))
    }
}

/// Like [`MultiIndex`] but indexed from 0: `counts[i] = m(i)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiplicityVector {
    counts: Vec<u32>,
}

impl MultiplicityVector {
    pub fn empty() -> Self {
        MultiplicityVector { counts: Vec::new() }
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut counts = Vec::new();
        for &(i, c) in pairs {
            let i = i as usize;
            if counts.len() <= i {
                counts.resize(i + 1, 0);
            }
            counts[i] += c;
        }
        MultiplicityVector::from_dense(counts)
    }

    pub fn from_dense(mut counts: Vec<u32>) -> Self {
        while counts.last() == Some(&0) {
            counts.pop();
        }
        MultiplicityVector { counts }
    }

    pub fn get(&self, i: u32) -> u32 {
        self.counts.get(i as usize).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i as u32, c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn size(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn length(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Largest index with nonzero multiplicity, `None` when empty.
    pub fn max_support(&self) -> Option<u32> {
        self.counts.len().checked_sub(1).map(|i| i as u32)
    }

    pub fn dense(&self) -> &[u32] {
        &self.counts
    }
}

impl fmt::Display for MultiplicityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pairs(f, self.iter())
    }
}

impl fmt::Debug for MultiplicityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl Serialize for MultiplicityVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for MultiplicityVector {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let pairs: Vec<(u32, u32)> = parse_pairs(s)?.into_iter().map(|(_, p)| p).collect();
        Ok(MultiplicityVector::from_pairs(&pairs))
    }
}

fn write_pairs(f: &mut fmt::Formatter<'_>, pairs: impl Iterator<Item = (u32, u32)>) -> fmt::Result {
    for (k, (j, c)) in pairs.enumerate() {
        if k > 0 {
            write!(f, ",")?;
        }
        write!(f, "{j}:{c}")?;
    }
    Ok(())
}

fn parse_pairs(s: &str) -> Result<Vec<(String, (u32, u32))>, ParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut out: Vec<(String, (u32, u32))> = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        let bad = || ParseError::Token(tok.to_string());
        let (j, c) = tok.split_once(':').ok_or_else(bad)?;
        let j: u32 = j.trim().parse().map_err(|_| bad())?;
        let c: u32 = c.trim().parse().map_err(|_| bad())?;
        if c == 0 {
            return Err(bad());
        }
        if out.last().is_some_and(|(_, (prev, _))| *prev >= j) {
            return Err(ParseError::Order(tok.to_string()));
        }
        out.push((tok.to_string(), (j, c)));
    }
    Ok(out)
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All partitions of `d` as densities, each exactly once.
///
/// Order: ascending lexicographic on the sorted part lists, which is
/// descending lexicographic on the density vectors; e.g. for d = 3:
/// `1:3`, `1:1,2:1`, `3:1`.
pub fn partitions(d: u32) -> Vec<MultiIndex> {
    fn rec(rem: u32, min_part: u32, dense: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if rem == 0 {
            out.push(MultiIndex::from_dense(dense.clone()));
            return;
        }
        for part in min_part..=rem {
            dense[part as usize - 1] += 1;
            rec(rem - part, part, dense, out);
            dense[part as usize - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    let mut dense = vec![0u32; d as usize];
    rec(d, 1, &mut dense, &mut out);
    out
}

/// 1 / ∏_u L(u)!·u^{L(u)}: the probability of cycle type `L` under a
/// uniformly random permutation of deg(L) letters.
pub fn haar_weight(l: &MultiIndex) -> Rat {
    let stabilizer: BigInt = l
        .iter()
        .map(|(u, c)| factorial(c) * num_traits::pow(BigInt::from(u), c as usize))
        .product();
    Rat::new(1, stabilizer).expect("stabilizer order is positive")
}

/// A family `(J_{n,r})` with `deg J_{n,r} = n`, listed in the labelled part
/// order of [`MultiIndex::parts`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub parts: Vec<MultiIndex>,
}

impl Decomposition {
    pub fn total(&self) -> MultiIndex {
        self.parts
            .iter()
            .fold(MultiIndex::empty(), |acc, j| acc.add(j))
    }

    /// ∏_u L(u)! / ∏_{n,r} J_{n,r}(u)! for L = Σ J_{n,r}.
    pub fn multinomial(&self) -> BigInt {
        let total = self.total();
        let denom: BigInt = self.parts.iter().map(MultiIndex::factorial).product();
        total.factorial() / denom
    }
}

/// Every decomposition of `l` into labelled parts of the degrees listed by `p`.
pub fn decompositions(p: &MultiIndex, l: &MultiIndex) -> Vec<Decomposition> {
    fn rec(
        parts: &[u32],
        rem: &MultiIndex,
        current: &mut Vec<MultiIndex>,
        out: &mut Vec<Decomposition>,
    ) {
        let Some((&n, rest)) = parts.split_first() else {
            if rem.is_empty() {
                out.push(Decomposition {
                    parts: current.clone(),
                });
            }
            return;
        };
        for j in partitions(n) {
            if let Some(next) = subtract(rem, &j) {
                current.push(j);
                rec(rest, &next, current, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    if p.deg() == l.deg() {
        rec(&p.parts(), l, &mut Vec::new(), &mut out);
    }
    out
}

fn subtract(a: &MultiIndex, b: &MultiIndex) -> Option<MultiIndex> {
    if b.counts.len() > a.counts.len() {
        return None;
    }
    let mut out = a.counts.clone();
    for (i, &c) in b.counts.iter().enumerate() {
        out[i] = out[i].checked_sub(c)?;
    }
    Some(MultiIndex::from_dense(out))
}

/// f(p, L) = Σ over decompositions L = Σ J_{n,r} of the multinomial
/// ∏_u L(u)! / ∏_{n,r} J_{n,r}(u)!; zero when deg L ≠ deg p or no
/// decomposition exists.
pub fn f_weight(p: &MultiIndex, l: &MultiIndex) -> u128 {
    if p.deg() != l.deg() {
        return 0;
    }
    let parts = p.parts();
    let part_partitions: HashMap<u32, Vec<MultiIndex>> =
        parts.iter().map(|&n| (n, partitions(n))).collect();
    let mut memo: HashMap<(MultiIndex, usize), u128> = HashMap::new();
    f_weight_rec(&parts, 0, l, &part_partitions, &mut memo)
}

fn f_weight_rec(
    parts: &[u32],
    k: usize,
    rem: &MultiIndex,
    part_partitions: &HashMap<u32, Vec<MultiIndex>>,
    memo: &mut HashMap<(MultiIndex, usize), u128>,
) -> u128 {
    if k == parts.len() {
        return u128::from(rem.is_empty());
    }
    if let Some(&v) = memo.get(&(rem.clone(), k)) {
        return v;
    }
    let mut total = 0u128;
    for j in &part_partitions[&parts[k]] {
        let Some(next) = subtract(rem, j) else {
            continue;
        };
        // Choosing J(u) of the remaining rem(u) copies of u, one index at a time,
        // multiplies out to the multinomial L(u)! / ∏ J_{n,r}(u)!.
        let ways: u128 = j.iter().map(|(u, c)| binomial(rem.get(u), c)).product();
        total += ways * f_weight_rec(parts, k + 1, &next, part_partitions, memo);
    }
    memo.insert((rem.clone(), k), total);
    total
}

/// Interlaced index pairs i(1) > j(1) > i(2) > ... > i(L) > j(L) ≥ 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GapSequence {
    pairs: Vec<(u32, u32)>,
}

impl GapSequence {
    /// `None` unless the flattened list is strictly decreasing and nonempty.
    pub fn new(pairs: Vec<(u32, u32)>) -> Option<Self> {
        if pairs.is_empty() {
            return None;
        }
        let flat: Vec<u32> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
        if flat.windows(2).all(|w| w[0] > w[1]) {
            Some(GapSequence { pairs })
        } else {
            None
        }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// Σ_u (i(u) − j(u))
    pub fn degree(&self) -> u32 {
        self.pairs.iter().map(|&(i, j)| i - j).sum()
    }

    pub fn gaps(&self) -> impl Iterator<Item = u32> + '_ {
        self.pairs.iter().map(|&(i, j)| i - j)
    }

    pub fn max_index(&self) -> u32 {
        self.pairs[0].0
    }

    pub fn flatten(&self) -> Vec<u32> {
        self.pairs.iter().flat_map(|&(i, j)| [i, j]).collect()
    }

    /// All gaps equal to one (every pair is a 2-bit).
    pub fn is_bulk(&self) -> bool {
        self.gaps().all(|g| g == 1)
    }
}

impl fmt::Debug for GapSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.pairs)
    }
}

impl Serialize for GapSequence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.pairs.serialize(s)
    }
}

/// Every gap sequence of degree `n` with all indices ≤ `max_index`, in
/// ascending lexicographic order of the flattened index lists.
pub fn gap_sequences(n: u32, max_index: u32) -> Vec<GapSequence> {
    fn rec(limit: u32, rem: u32, current: &mut Vec<(u32, u32)>, out: &mut Vec<GapSequence>) {
        for i in 1..=limit {
            for j in i.saturating_sub(rem)..i {
                current.push((i, j));
                let left = rem - (i - j);
                if left == 0 {
                    out.push(GapSequence {
                        pairs: current.clone(),
                    });
                } else if j >= 1 {
                    rec(j - 1, left, current, out);
                }
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    if n >= 1 {
        rec(max_index, n, &mut Vec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    #[test]
    fn multi_index_statistics() {
        let p = mi("1:1,2:3,5:1");
        assert_eq!(p.deg(), 12);
        assert_eq!(p.size(), 5);
        assert_eq!(p.length(), 3);
        assert_eq!(p.max_support(), 5);
        assert_eq!(p.to_string(), "1:1,2:3,5:1");
        assert_eq!(p.parts(), vec![1, 2, 2, 2, 5]);
    }

    #[test]
    fn parse_errors_name_the_token() {
        assert_eq!(
            "1:1,x".parse::<MultiIndex>().unwrap_err(),
            ParseError::Token("x".into())
        );
        assert_eq!(
            "2:1,1:1".parse::<MultiIndex>().unwrap_err(),
            ParseError::Order("1:1".into())
        );
        assert!(matches!(
            "0:1".parse::<MultiIndex>(),
            Err(ParseError::ZeroIndex(_))
        ));
        assert!("1:0".parse::<MultiIndex>().is_err());
        let m: MultiplicityVector = "0:2,3:1".parse().unwrap();
        assert_eq!(m.get(0), 2);
        assert_eq!(m.size(), 3);
    }

    #[test]
    fn small_partitions() {
        assert_eq!(partitions(0), vec![MultiIndex::empty()]);
        assert_eq!(partitions(3), vec![mi("1:3"), mi("1:1,2:1"), mi("3:1")]);
        let counts: Vec<usize> = (0..=6).map(|d| partitions(d).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11]);
    }

    #[test]
    fn haar_weights() {
        assert_eq!(haar_weight(&mi("1:4")), Rat::frac(1, 24));
        assert_eq!(haar_weight(&mi("4:1")), Rat::frac(1, 4));
        let total: Rat = partitions(3).iter().map(haar_weight).sum();
        assert_eq!(total, Rat::one());
    }

    #[test]
    fn f_weight_examples() {
        for l in partitions(4) {
            assert_eq!(f_weight(&MultiIndex::delta(4), &l), 1);
        }
        assert_eq!(f_weight(&mi("1:1,2:1"), &mi("1:3")), 3);
        assert_eq!(f_weight(&mi("1:2"), &mi("2:1")), 0);
        assert_eq!(f_weight(&mi("1:2"), &mi("1:3")), 0);
    }

    #[test]
    fn f_weight_matches_explicit_decompositions() {
        for d in 1..=6 {
            for p in partitions(d) {
                for l in partitions(d) {
                    let explicit: BigInt = decompositions(&p, &l)
                        .iter()
                        .map(Decomposition::multinomial)
                        .sum();
                    assert_eq!(explicit, BigInt::from(f_weight(&p, &l)), "p={p} L={l}");
                }
            }
        }
    }

    #[test]
    fn gap_sequence_examples() {
        let flat = |n, m| -> Vec<Vec<u32>> {
            gap_sequences(n, m)
                .iter()
                .map(GapSequence::flatten)
                .collect()
        };
        assert_eq!(flat(1, 3), vec![vec![1, 0], vec![2, 1], vec![3, 2]]);
        assert_eq!(flat(2, 3), vec![vec![2, 0], vec![3, 1], vec![3, 2, 1, 0]]);
        assert!(gap_sequences(1, 0).is_empty());
    }

    #[test]
    fn gap_sequence_validation() {
        assert!(GapSequence::new(vec![(3, 2), (2, 0)]).is_none());
        assert!(GapSequence::new(vec![]).is_none());
        let g = GapSequence::new(vec![(5, 4), (2, 0)]).unwrap();
        assert_eq!(g.degree(), 3);
        assert!(!g.is_bulk());
    }
}
