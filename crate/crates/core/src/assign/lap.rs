//! Exact linear assignment: shortest augmenting paths with dual potentials,
//! followed by a pass that picks the lexicographically smallest optimum.

use nalgebra::DMatrix;
use std::collections::VecDeque;

/// Returns `perm` with `perm[row] = col` minimizing `Σ c[row, perm[row]]`.
/// Among optimal assignments the lexicographically smallest is returned.
/// `c` must be square with finite entries.
pub(crate) fn lexicographic_lap(c: &DMatrix<f64>) -> Vec<usize> {
    let n = c.nrows();
    if n == 0 {
        return Vec::new();
    }
    let (mut row_of_col, u, v) = hungarian(c);
    let scale = c.amax().max(1.0);
    let tol = 1e-12 * scale * n as f64;
    let tight = DMatrix::from_fn(n, n, |i, j| c[(i, j)] - u[i] - v[j] <= tol);
    let mut col_of_row = vec![0; n];
    for (j, &i) in row_of_col.iter().enumerate() {
        col_of_row[i] = j;
    }
    let mut fixed_col = vec![false; n];
    for i in 0..n {
        let current = col_of_row[i];
        let next = chains_to(&tight, &col_of_row, &fixed_col, i, current);
        // smallest tight free column whose holder can pass `current` along
        let better = (0..current).find(|&j| !fixed_col[j] && tight[(i, j)] && next[row_of_col[j]].is_some());
        if let Some(j) = better {
            // collect the chain against the current assignment, then apply it
            let mut moves = vec![(i, j)];
            let mut row = row_of_col[j];
            loop {
                let to = next[row].expect("holder lies on a chain");
                moves.push((row, to));
                if to == current {
                    break;
                }
                row = row_of_col[to];
            }
            for (r, c) in moves {
                col_of_row[r] = c;
                row_of_col[c] = r;
            }
        }
        fixed_col[col_of_row[i]] = true;
    }
    col_of_row
}

/// `next[r] = Some(c)` when row `r` can move to tight column `c` as the first
/// hop of a chain of moves that ends with some row taking `target`. Only rows
/// other than `skip_row` holding unfixed columns take part.
fn chains_to(
    tight: &DMatrix<bool>,
    col_of_row: &[usize],
    fixed_col: &[bool],
    skip_row: usize,
    target: usize,
) -> Vec<Option<usize>> {
    let n = col_of_row.len();
    let mut next: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    let eligible = |r: usize| r != skip_row && !fixed_col[col_of_row[r]];
    for r in 0..n {
        if eligible(r) && tight[(r, target)] && col_of_row[r] != target {
            next[r] = Some(target);
            queue.push_back(r);
        }
    }
    while let Some(r) = queue.pop_front() {
        // rows that can take r's column, freeing their own
        let c = col_of_row[r];
        for p in 0..n {
            if next[p].is_none() && eligible(p) && tight[(p, c)] && p != r {
                next[p] = Some(c);
                queue.push_back(p);
            }
        }
    }
    next
}

/// Dense Hungarian method, O(n³). Returns the row assigned to each column and
/// the row and column potentials.
fn hungarian(c: &DMatrix<f64>) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = c.nrows();
    // 1-based indices with a virtual column 0, as in the classic formulation
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = c[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let row_of_col = (1..=n).map(|j| p[j] - 1).collect();
    (row_of_col, u[1..].to_vec(), v[1..].to_vec())
}
