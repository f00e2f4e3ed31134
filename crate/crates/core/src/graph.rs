//! Directed multigraphs on integer vertices in which every vertex i has
//! in-degree = out-degree = m(i), and their budgeted edge colorings.
//!
//! An edge i → j has weight |j − i|. Ascending edges (i < j) take colors
//! from the first budget list, descending edges from the second. A color
//! with budget u must receive edges of total weight exactly u, and edges of
//! one color must span pairwise disjoint closed intervals.

use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::{MultiIndex, MultiplicityVector};

/// Largest |m| accepted by [`enumerate_m_graphs`].
pub const GRAPH_GUARD: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("|m| = {size} exceeds the enumeration limit {max}")]
    TooLarge { size: u32, max: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MCondGraph {
    pub vertices: Vec<u32>,
    /// Sorted edge multiset; a repeated pair is a parallel edge.
    pub edges: Vec<(u32, u32)>,
}

impl MCondGraph {
    pub fn out_degree(&self, v: u32) -> usize {
        self.edges.iter().filter(|e| e.0 == v).count()
    }

    pub fn in_degree(&self, v: u32) -> usize {
        self.edges.iter().filter(|e| e.1 == v).count()
    }

    pub fn ascending(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied().filter(|e| e.0 < e.1)
    }

    pub fn descending(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied().filter(|e| e.0 > e.1)
    }
}

/// Every m-condition graph, as an integer matrix A with zero diagonal and
/// row and column sums m(v); A[v][w] is the multiplicity of v → w.
///
/// Each such matrix is the quotient of a cycle cover of the complete
/// multipartite digraph with m(v) copies of v, and conversely.
pub fn enumerate_m_graphs(m: &MultiplicityVector) -> Result<Vec<MCondGraph>, GraphError> {
    if m.size() > GRAPH_GUARD {
        return Err(GraphError::TooLarge {
            size: m.size(),
            max: GRAPH_GUARD,
        });
    }
    let vertices: Vec<u32> = m.iter().map(|(v, _)| v).collect();
    let degrees: Vec<u32> = m.iter().map(|(_, c)| c).collect();
    let k = vertices.len();
    let mut col_left = degrees.clone();
    let mut matrix = vec![vec![0u32; k]; k];
    let mut out = Vec::new();

    // Fill row by row, cell by cell.
    #[allow(clippy::too_many_arguments)]
    fn fill(
        row: usize,
        col: usize,
        row_left: u32,
        degrees: &[u32],
        col_left: &mut [u32],
        matrix: &mut [Vec<u32>],
        vertices: &[u32],
        out: &mut Vec<MCondGraph>,
    ) {
        let k = degrees.len();
        if row == k {
            let mut edges = Vec::new();
            for (a, r) in matrix.iter().enumerate() {
                for (b, &c) in r.iter().enumerate() {
                    edges.extend(std::iter::repeat_n((vertices[a], vertices[b]), c as usize));
                }
            }
            out.push(MCondGraph {
                vertices: vertices.to_vec(),
                edges,
            });
            return;
        }
        if col == k {
            if row_left == 0 {
                let next = degrees.get(row + 1).copied().unwrap_or(0);
                fill(row + 1, 0, next, degrees, col_left, matrix, vertices, out);
            }
            return;
        }
        if col == row {
            fill(
                row,
                col + 1,
                row_left,
                degrees,
                col_left,
                matrix,
                vertices,
                out,
            );
            return;
        }
        for c in (0..=row_left.min(col_left[col])).rev() {
            matrix[row][col] = c;
            col_left[col] -= c;
            fill(
                row,
                col + 1,
                row_left - c,
                degrees,
                col_left,
                matrix,
                vertices,
                out,
            );
            col_left[col] += c;
        }
        matrix[row][col] = 0;
    }
    if k > 0 {
        fill(
            0,
            0,
            degrees[0],
            &degrees,
            &mut col_left,
            &mut matrix,
            &vertices,
            &mut out,
        );
    }
    out.sort();
    Ok(out)
}

/// Ways to split a multiset of oriented edges (as intervals) among
/// labelled colors with the given budgets, each color's intervals
/// pairwise disjoint and of total weight equal to its budget.
fn count_chain_splits(edges: &[(u32, u32)], budgets: &[u32]) -> u64 {
    // Distinct intervals with multiplicities.
    let mut kinds: Vec<((u32, u32), u32)> = Vec::new();
    for &(a, b) in edges {
        let iv = (a.min(b), a.max(b));
        match kinds.iter_mut().find(|(k, _)| *k == iv) {
            Some((_, c)) => *c += 1,
            None => kinds.push((iv, 1)),
        }
    }
    kinds.sort();
    let mut avail: Vec<u32> = kinds.iter().map(|&(_, c)| c).collect();
    let intervals: Vec<(u32, u32)> = kinds.iter().map(|&(iv, _)| iv).collect();

    fn per_color(
        color: usize,
        budgets: &[u32],
        intervals: &[(u32, u32)],
        avail: &mut [u32],
    ) -> u64 {
        if color == budgets.len() {
            return u64::from(avail.iter().all(|&a| a == 0));
        }
        let mut total = 0;
        pick(
            0,
            None,
            budgets[color],
            color,
            budgets,
            intervals,
            avail,
            &mut total,
        );
        total
    }

    // Chooses intervals for one color in increasing order, each starting
    // strictly after the previous one ends.
    #[allow(clippy::too_many_arguments)]
    fn pick(
        from: usize,
        last_end: Option<u32>,
        left: u32,
        color: usize,
        budgets: &[u32],
        intervals: &[(u32, u32)],
        avail: &mut [u32],
        total: &mut u64,
    ) {
        if left == 0 {
            *total += per_color(color + 1, budgets, intervals, avail);
            return;
        }
        for idx in from..intervals.len() {
            let (lo, hi) = intervals[idx];
            if avail[idx] == 0 || hi - lo > left || last_end.is_some_and(|e| lo <= e) {
                continue;
            }
            avail[idx] -= 1;
            pick(
                idx + 1,
                Some(hi),
                left - (hi - lo),
                color,
                budgets,
                intervals,
                avail,
                total,
            );
            avail[idx] += 1;
        }
    }
    per_color(0, budgets, &intervals, &mut avail)
}

/// Colorings with ascending edges budgeted by p and descending ones by q;
/// colors are labelled, so equal budgets are distinguished.
pub fn count_colorings(g: &MCondGraph, p: &MultiIndex, q: &MultiIndex) -> u64 {
    let up: Vec<(u32, u32)> = g.ascending().collect();
    let down: Vec<(u32, u32)> = g.descending().collect();
    let weight = |es: &[(u32, u32)]| es.iter().map(|&(a, b)| a.abs_diff(b)).sum::<u32>();
    if weight(&up) != p.deg() || weight(&down) != q.deg() {
        return 0;
    }
    let up_count = count_chain_splits(&up, &p.parts());
    if up_count == 0 {
        return 0;
    }
    up_count * count_chain_splits(&down, &q.parts())
}

/// Σ over all m-condition graphs of their coloring counts.
pub fn c_via_graphs(
    p: &MultiIndex,
    q: &MultiIndex,
    m: &MultiplicityVector,
) -> Result<u64, GraphError> {
    Ok(enumerate_m_graphs(m)?
        .iter()
        .map(|g| count_colorings(g, p, q))
        .sum())
}
