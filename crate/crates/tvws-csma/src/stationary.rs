//! Stationary distributions of finite Markov chains.
//!
//! Row-stochastic matrices in compressed sparse row form, with three
//! cooperating pieces: a strongly-connected-component scan that decides
//! whether the stationary distribution is unique, a dense LU route for
//! small chains, and a damped power iteration for everything else. The
//! chain-specific solver elsewhere in the crate produces candidate vectors
//! much faster; this module is the ground truth it is verified against.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Matrices this size or smaller are solved by dense LU; larger ones fall
/// back to iteration. Kept modest because the dense route is cubic.
const DENSE_LIMIT: usize = 600;

/// A row-stochastic transition matrix in CSR layout.
#[derive(Clone, Debug)]
pub struct StochasticMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl StochasticMatrix {
    /// Builds from per-row sparse entries, validating that each row is a
    /// probability distribution: entries in `[0, 1]`, indices in range,
    /// row sums within `1e-12` of one. Zero entries are dropped.
    pub fn from_rows(rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("transition matrix must be non-empty".into()));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.iter().enumerate() {
            let mut sum = 0.0;
            for &(j, v) in row {
                if j >= n {
                    return Err(Error::InvalidArgument(format!(
                        "row {i}: column {j} out of range for {n} states"
                    )));
                }
                if !(0.0..=1.0 + 1e-12).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "row {i}: entry ({j}, {v}) is not a probability"
                    )));
                }
                sum += v;
                if v > 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "row {i} sums to {sum}, expected 1 within 1e-12"
                )));
            }
            row_ptr.push(col_idx.len());
        }
        Ok(StochasticMatrix { n, row_ptr, col_idx, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row sums, exposed so structural checks can assert stochasticity at
    /// tolerances tighter than the construction gate.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// All stored `(row, column, probability)` entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    /// `out = x P` (distribution pushed forward one step).
    pub fn multiply_left(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for i in 0..self.n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.col_idx[k]] += xi * self.values[k];
            }
        }
    }

    /// `max_j |(pi P)_j - pi_j|`, the invariance defect of a candidate
    /// stationary vector.
    pub fn residual_inf(&self, pi: &[f64]) -> f64 {
        let mut pushed = vec![0.0; self.n];
        self.multiply_left(pi, &mut pushed);
        pushed
            .iter()
            .zip(pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Number of closed communicating classes (strongly connected
    /// components with no edge leaving them). The stationary distribution
    /// is unique exactly when this is one.
    pub fn closed_class_count(&self) -> usize {
        let scc = self.tarjan_scc();
        let class_count = 1 + *scc.iter().max().unwrap_or(&0);
        let mut open = vec![false; class_count];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if scc[i] != scc[self.col_idx[k]] {
                    open[scc[i]] = true;
                }
            }
        }
        open.iter().filter(|&&o| !o).count()
    }

    // Iterative Tarjan; returns the component index of each state.
    fn tarjan_scc(&self) -> Vec<usize> {
        const UNSET: usize = usize::MAX;
        let n = self.n;
        let mut index = vec![UNSET; n];
        let mut lowlink = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut comp = vec![UNSET; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut next_index = 0;
        let mut comp_count = 0;

        // frames hold (vertex, next edge offset to scan)
        let mut frames: Vec<(usize, usize)> = Vec::new();
        for root in 0..n {
            if index[root] != UNSET {
                continue;
            }
            frames.push((root, self.row_ptr[root]));
            index[root] = next_index;
            lowlink[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&mut (v, ref mut edge)) = frames.last_mut() {
                if *edge < self.row_ptr[v + 1] {
                    let w = self.col_idx[*edge];
                    *edge += 1;
                    if index[w] == UNSET {
                        index[w] = next_index;
                        lowlink[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        frames.push((w, self.row_ptr[w]));
                    } else if on_stack[w] {
                        lowlink[v] = lowlink[v].min(index[w]);
                    }
                } else {
                    frames.pop();
                    if let Some(&mut (parent, _)) = frames.last_mut() {
                        lowlink[parent] = lowlink[parent].min(lowlink[v]);
                    }
                    if lowlink[v] == index[v] {
                        while let Some(w) = stack.pop() {
                            on_stack[w] = false;
                            comp[w] = comp_count;
                            if w == v {
                                break;
                            }
                        }
                        comp_count += 1;
                    }
                }
            }
        }
        comp
    }

    /// Stationary vector by dense LU: solve `(P^T - I) pi = 0` with the
    /// last equation replaced by the normalization `sum pi = 1`.
    pub fn dense_direct(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                a[(self.col_idx[k], i)] += self.values[k];
            }
            a[(i, i)] -= 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(n);
        b[n - 1] = 1.0;
        let solution = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::NoConvergence("singular stationary system".into()))?;
        let mut pi: Vec<f64> = solution.iter().copied().collect();
        sanitize(&mut pi)?;
        Ok(pi)
    }

    /// Stationary vector by damped power iteration
    /// `x <- (x + x P) / 2`, which converges for periodic chains too and
    /// leaves stationary vectors fixed. Stops when successive iterates
    /// agree within `tol` in the max norm.
    pub fn power_iteration(&self, tol: f64, max_iters: u64) -> Result<Vec<f64>> {
        let n = self.n;
        let mut x = vec![1.0 / n as f64; n];
        let mut pushed = vec![0.0; n];
        for _ in 0..max_iters {
            self.multiply_left(&x, &mut pushed);
            let mut diff: f64 = 0.0;
            let mut sum = 0.0;
            for j in 0..n {
                let next = 0.5 * (x[j] + pushed[j]);
                diff = diff.max((next - x[j]).abs());
                x[j] = next;
                sum += next;
            }
            for v in &mut x {
                *v /= sum;
            }
            if diff < tol {
                sanitize(&mut x)?;
                return Ok(x);
            }
        }
        Err(Error::NoConvergence(format!(
            "power iteration did not reach tol {tol:e} in {max_iters} steps"
        )))
    }

    /// Full solve: uniqueness check, then the size-appropriate method,
    /// with the iterative route as fallback if LU misbehaves.
    pub fn solve(&self) -> Result<Vec<f64>> {
        match self.closed_class_count() {
            1 => {}
            k => {
                return Err(Error::NonErgodic(format!(
                    "chain has {k} closed classes; stationary distribution is not unique"
                )))
            }
        }
        if self.n <= DENSE_LIMIT {
            if let Ok(pi) = self.dense_direct() {
                if self.residual_inf(&pi) <= 1e-10 {
                    return Ok(pi);
                }
            }
        }
        let pi = self.power_iteration(1e-13, 1_000_000)?;
        if self.residual_inf(&pi) <= 1e-10 {
            Ok(pi)
        } else {
            Err(Error::NoConvergence("stationary vector failed the invariance check".into()))
        }
    }
}

// Clamps rounding-level negatives to zero and renormalizes; larger
// negatives mean the linear algebra went wrong.
fn sanitize(pi: &mut [f64]) -> Result<()> {
    let mut sum = 0.0;
    for v in pi.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-9 {
                return Err(Error::NoConvergence(format!(
                    "stationary solve produced probability {v}"
                )));
            }
            *v = 0.0;
        }
        sum += *v;
    }
    if !(sum.is_finite() && sum > 0.0) {
        return Err(Error::NoConvergence("stationary solve lost normalization".into()));
    }
    for v in pi.iter_mut() {
        *v /= sum;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (i, (g, w)) in got.iter().zip(want).enumerate() {
            assert!((g - w).abs() < tol, "component {i}: {g} vs {w}");
        }
    }

    #[test]
    fn two_state_chain_closed_form() {
        // stationary of [[0.8, 0.2], [0.3, 0.7]] is (0.6, 0.4)
        let p = StochasticMatrix::from_rows(&[
            vec![(0, 0.8), (1, 0.2)],
            vec![(0, 0.3), (1, 0.7)],
        ])
        .unwrap();
        assert_close(&p.solve().unwrap(), &[0.6, 0.4], 1e-14);
        assert_close(&p.dense_direct().unwrap(), &[0.6, 0.4], 1e-14);
        assert_close(&p.power_iteration(1e-14, 10_000).unwrap(), &[0.6, 0.4], 1e-12);
    }

    #[test]
    fn birth_death_chain_is_binomial() {
        // occupancy of 3 channels flipping with rate 1/2 settles to
        // Binomial(3, 1/2) = (1/8, 3/8, 3/8, 1/8)
        let c = 3.0;
        let q = 0.5;
        let rows: Vec<Vec<(usize, f64)>> = (0..4)
            .map(|s| {
                let sf = s as f64;
                let up = (c - sf) / c * q;
                let down = sf / c * (1.0 - q);
                let mut row = vec![];
                if down > 0.0 {
                    row.push((s - 1, down));
                }
                row.push((s, 1.0 - up - down));
                if up > 0.0 {
                    row.push((s + 1, up));
                }
                row
            })
            .collect();
        let p = StochasticMatrix::from_rows(&rows).unwrap();
        let want = [0.125, 0.375, 0.375, 0.125];
        assert_close(&p.solve().unwrap(), &want, 1e-13);
        assert_close(&p.power_iteration(1e-14, 100_000).unwrap(), &want, 1e-12);
        assert!(p.residual_inf(&want) < 1e-15);
    }

    #[test]
    fn absorbing_state_still_unique() {
        // state 1 absorbs everything: unique stationary (0, 1)
        let p = StochasticMatrix::from_rows(&[
            vec![(0, 0.5), (1, 0.5)],
            vec![(1, 1.0)],
        ])
        .unwrap();
        assert_eq!(p.closed_class_count(), 1);
        assert_close(&p.solve().unwrap(), &[0.0, 1.0], 1e-14);
    }

    #[test]
    fn period_two_chain_converges_under_damping() {
        let p = StochasticMatrix::from_rows(&[vec![(1, 1.0)], vec![(0, 1.0)]]).unwrap();
        assert_close(&p.solve().unwrap(), &[0.5, 0.5], 1e-13);
        assert_close(&p.power_iteration(1e-14, 10_000).unwrap(), &[0.5, 0.5], 1e-13);
    }

    #[test]
    fn disconnected_chains_are_rejected() {
        let identity =
            StochasticMatrix::from_rows(&[vec![(0, 1.0)], vec![(1, 1.0)]]).unwrap();
        assert_eq!(identity.closed_class_count(), 2);
        assert!(matches!(identity.solve(), Err(Error::NonErgodic(_))));

        // two 2-cycles side by side
        let p = StochasticMatrix::from_rows(&[
            vec![(1, 1.0)],
            vec![(0, 1.0)],
            vec![(3, 1.0)],
            vec![(2, 1.0)],
        ])
        .unwrap();
        assert!(matches!(p.solve(), Err(Error::NonErgodic(_))));

        // bridging one pair into the other restores uniqueness
        let bridged = StochasticMatrix::from_rows(&[
            vec![(1, 1.0)],
            vec![(0, 1.0)],
            vec![(3, 0.5), (0, 0.5)],
            vec![(2, 1.0)],
        ])
        .unwrap();
        assert_eq!(bridged.closed_class_count(), 1);
        let pi = bridged.solve().unwrap();
        assert_close(&pi, &[0.5, 0.5, 0.0, 0.0], 1e-13);
    }

    #[test]
    fn construction_rejects_malformed_rows() {
        assert!(StochasticMatrix::from_rows(&[]).is_err());
        assert!(StochasticMatrix::from_rows(&[vec![(0, 0.9)]]).is_err());
        assert!(StochasticMatrix::from_rows(&[vec![(0, 1.5), (0, -0.5)]]).is_err());
        assert!(StochasticMatrix::from_rows(&[vec![(7, 1.0)]]).is_err());
        // duplicate column indices are accumulated, not rejected
        let dup = StochasticMatrix::from_rows(&[vec![(0, 0.5), (0, 0.5)]]).unwrap();
        assert_close(&dup.solve().unwrap(), &[1.0], 1e-15);
    }

    #[test]
    fn dense_and_iterative_agree_on_a_dense_random_walk() {
        // deterministic "random" 8-state matrix built from a simple
        // congruential sequence, then row-normalized
        let n = 8;
        let mut seed = 88172645463325252u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..n).map(|_| next() + 0.05).collect();
                let sum: f64 = raw.iter().sum();
                // make the row sum exactly 1.0 by assigning the remainder
                let mut row: Vec<(usize, f64)> = raw[..n - 1]
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (j, v / sum))
                    .collect();
                let partial: f64 = row.iter().map(|(_, v)| v).sum();
                row.push((n - 1, 1.0 - partial));
                row
            })
            .collect();
        let p = StochasticMatrix::from_rows(&rows).unwrap();
        let dense = p.dense_direct().unwrap();
        let iterative = p.power_iteration(1e-14, 1_000_000).unwrap();
        assert_close(&dense, &iterative, 1e-12);
        assert!(p.residual_inf(&dense) < 1e-14);
    }
}
