//! The coupled backoff/sensing Markov chain.
//!
//! Each station is described by three coordinates tracked per slot: the
//! backoff stage `i`, the backoff counter `k`, and the number of channels
//! `s` the station currently perceives as busy. The MAC reacts to the
//! sensing outcome it is holding — all channels busy freezes the counter,
//! anything else lets it run — and the perceived occupancy then takes one
//! birth-death step (a single uniformly chosen channel is re-sensed per
//! slot). A transmission happens exactly when the counter is at zero while
//! some channel looks idle; it collides with probability `p`, the quantity
//! closed by the fixed point at the bottom of this module.
//!
//! The stationary distribution is solved structurally: counters only drain
//! downward within a stage, so every cell is a linear image of the small
//! set of transmit-level probabilities, and those satisfy a dense system
//! of size `(m + 1) * (C + 1)`. A sparse-matrix residual check guards the
//! result, with the generic solver as fallback.

use crate::error::{Error, Result};
use crate::stationary::StochasticMatrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Contention parameters of the secondary network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacParams {
    /// Number of contending stations.
    pub n: u32,
    /// Maximum backoff stage; the window stops doubling here.
    pub m: u32,
    /// Minimum contention window `W`, so stage `i` draws from `2^i * W`.
    pub w: u32,
}

impl MacParams {
    pub fn new(n: u32, m: u32, w: u32) -> Self {
        MacParams { n, m, w }
    }

    /// Contention window of a backoff stage.
    pub fn window(&self, stage: u32) -> u64 {
        (self.w as u64) << stage.min(self.m)
    }

    /// Total number of `(stage, counter)` pairs.
    pub fn mac_state_count(&self) -> u64 {
        (0..=self.m).map(|i| self.window(i)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("need at least one station".into()));
        }
        if self.w == 0 {
            return Err(Error::InvalidArgument("contention window must be at least 1".into()));
        }
        if self.m > 24 {
            return Err(Error::InvalidArgument(format!(
                "backoff stage cap {} is unreasonably deep",
                self.m
            )));
        }
        if self.mac_state_count() > 2_000_000 {
            return Err(Error::InvalidArgument(format!(
                "state space too large: {} backoff states",
                self.mac_state_count()
            )));
        }
        Ok(())
    }
}

/// Sensing-side parameters seen by every station.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    /// Number of licensed channels in the pool.
    pub c: u32,
    /// Probability that a given channel is truly occupied by its primary
    /// user in a slot.
    pub alpha: f64,
    /// Detection probability of the energy detector.
    pub p_d: f64,
    /// False-alarm probability of the energy detector.
    pub p_f: f64,
}

impl SpectrumParams {
    pub fn new(c: u32, alpha: f64, p_d: f64, p_f: f64) -> Self {
        SpectrumParams { c, alpha, p_d, p_f }
    }

    /// Sensing that never errs: busy exactly when the primary user is on.
    pub fn with_perfect_sensing(c: u32, alpha: f64) -> Self {
        SpectrumParams { c, alpha, p_d: 1.0, p_f: 0.0 }
    }

    /// Probability `q` that one sensing of one channel comes back busy:
    /// a true positive on an occupied channel or a false alarm on an idle
    /// one.
    pub fn perceived_busy_prob(&self) -> f64 {
        self.alpha * self.p_d + (1.0 - self.alpha) * self.p_f
    }

    pub fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(Error::InvalidArgument("need at least one channel".into()));
        }
        for (value, name) in [(self.alpha, "alpha"), (self.p_d, "p_d"), (self.p_f, "p_f")] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in [0, 1], got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// One step of the perceived-occupancy birth-death process: of `c`
/// channels with `s` currently perceived busy, one uniformly chosen channel
/// is re-sensed, coming back busy with probability `q`.
///
/// Returns the sparse transition row from `s`, entries ascending by target.
pub fn channel_subchain_row(c: u32, q: f64, s: u32) -> Vec<(u32, f64)> {
    debug_assert!(s <= c);
    let cf = c as f64;
    let sf = s as f64;
    let up = (cf - sf) / cf * q;
    let down = sf / cf * (1.0 - q);
    let stay = 1.0 - up - down;
    let mut row = Vec::with_capacity(3);
    if down > 0.0 {
        row.push((s - 1, down));
    }
    if stay > 0.0 {
        row.push((s, stay));
    }
    if up > 0.0 {
        row.push((s + 1, up));
    }
    row
}

/// One state of the full chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainState {
    pub stage: u32,
    pub counter: u64,
    pub busy: u32,
}

/// Dense enumeration of `(stage, counter, busy)` triples: stages outermost,
/// counters within a stage, perceived-busy count innermost.
#[derive(Clone, Debug)]
pub struct StateSpace {
    m: u32,
    c: u32,
    offsets: Vec<u64>,
    len: usize,
}

impl StateSpace {
    pub fn new(mac: &MacParams, c: u32) -> Result<Self> {
        mac.validate()?;
        if c == 0 {
            return Err(Error::InvalidArgument("need at least one channel".into()));
        }
        let mut offsets = Vec::with_capacity(mac.m as usize + 2);
        let mut acc = 0u64;
        for i in 0..=mac.m {
            offsets.push(acc);
            acc += mac.window(i);
        }
        offsets.push(acc);
        let len = acc
            .checked_mul(c as u64 + 1)
            .filter(|&t| t <= 4_000_000)
            .ok_or_else(|| Error::InvalidArgument("state space too large".into()))?;
        Ok(StateSpace { m: mac.m, c, offsets, len: len as usize })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn channels(&self) -> u32 {
        self.c
    }

    pub fn max_stage(&self) -> u32 {
        self.m
    }

    /// Contention window (number of counter values) of a stage.
    pub fn stage_window(&self, stage: u32) -> u64 {
        self.window(stage)
    }

    pub fn index(&self, stage: u32, counter: u64, busy: u32) -> usize {
        debug_assert!(stage <= self.m);
        debug_assert!(counter < self.offsets[stage as usize + 1] - self.offsets[stage as usize]);
        debug_assert!(busy <= self.c);
        ((self.offsets[stage as usize] + counter) * (self.c as u64 + 1) + busy as u64) as usize
    }

    pub fn state(&self, index: usize) -> ChainState {
        let per = self.c as u64 + 1;
        let mac = index as u64 / per;
        let busy = (index as u64 % per) as u32;
        let stage = match self.offsets.binary_search(&mac) {
            Ok(pos) => (pos as u32).min(self.m),
            Err(pos) => pos as u32 - 1,
        };
        ChainState { stage, counter: mac - self.offsets[stage as usize], busy }
    }

    fn window(&self, stage: u32) -> u64 {
        self.offsets[stage as usize + 1] - self.offsets[stage as usize]
    }
}

/// Assembles the full one-slot transition matrix for a tagged station whose
/// transmissions collide with probability `p`.
///
/// The kernel factorizes: the MAC coordinate moves according to the held
/// sensing outcome (freeze on all-busy, count down, or transmit and re-draw
/// a window), and independently the perceived occupancy takes one
/// birth-death step from that same outcome.
pub fn build_chain(mac: &MacParams, spectrum: &SpectrumParams, p: f64) -> Result<StochasticMatrix> {
    mac.validate()?;
    spectrum.validate()?;
    check_collision_prob(p)?;
    let space = StateSpace::new(mac, spectrum.c)?;
    let q = spectrum.perceived_busy_prob();
    let c = spectrum.c;

    let channel_rows: Vec<Vec<(u32, f64)>> =
        (0..=c).map(|s| channel_subchain_row(c, q, s)).collect();

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(space.len());
    for idx in 0..space.len() {
        let state = space.state(idx);
        // (stage, counter, probability) targets of the MAC coordinate
        let mut mac_targets: Vec<(u32, u64, f64)> = Vec::new();
        if state.busy == c {
            mac_targets.push((state.stage, state.counter, 1.0));
        } else if state.counter > 0 {
            mac_targets.push((state.stage, state.counter - 1, 1.0));
        } else {
            if p < 1.0 {
                let w = space.window(0);
                let share = (1.0 - p) / w as f64;
                for l in 0..w {
                    mac_targets.push((0, l, share));
                }
            }
            if p > 0.0 {
                let next = (state.stage + 1).min(space.m);
                let w = space.window(next);
                let share = p / w as f64;
                for l in 0..w {
                    mac_targets.push((next, l, share));
                }
            }
        }
        let mut row = Vec::with_capacity(mac_targets.len() * 3);
        for &(stage, counter, mac_prob) in &mac_targets {
            for &(u, chan_prob) in &channel_rows[state.busy as usize] {
                row.push((space.index(stage, counter, u), mac_prob * chan_prob));
            }
        }
        rows.push(row);
    }
    StochasticMatrix::from_rows(&rows)
}

/// A solved chain: the stationary law over `(stage, counter, busy)` plus
/// the parameters it was computed for.
#[derive(Clone, Debug)]
pub struct ChainSolution {
    pub mac: MacParams,
    pub spectrum: SpectrumParams,
    /// Conditional collision probability the chain was closed with.
    pub p: f64,
    /// Per-sensing perceived-busy probability.
    pub q: f64,
    space: StateSpace,
    pi: Vec<f64>,
}

impl ChainSolution {
    /// Probability that the station transmits in a random slot: counter at
    /// zero with at least one channel perceived idle.
    pub fn transmit_probability(&self) -> f64 {
        let mut tau = 0.0;
        for i in 0..=self.mac.m {
            for s in 0..self.spectrum.c {
                tau += self.pi[self.space.index(i, 0, s)];
            }
        }
        tau
    }

    /// The same quantity under the approximation that the backoff and
    /// sensing coordinates are independent: marginal probability of a
    /// zero counter times marginal probability of some idle channel.
    pub fn transmit_probability_factored(&self) -> f64 {
        let mut at_zero = 0.0;
        for i in 0..=self.mac.m {
            for s in 0..=self.spectrum.c {
                at_zero += self.pi[self.space.index(i, 0, s)];
            }
        }
        let all_busy: f64 = self.busy_marginal()[self.spectrum.c as usize];
        at_zero * (1.0 - all_busy)
    }

    /// Marginal law of the perceived-busy count.
    pub fn busy_marginal(&self) -> Vec<f64> {
        let mut marginal = vec![0.0; self.spectrum.c as usize + 1];
        for (idx, &mass) in self.pi.iter().enumerate() {
            marginal[self.space.state(idx).busy as usize] += mass;
        }
        marginal
    }

    /// Marginal law over `(stage, counter)` pairs, indexed stage-major.
    pub fn mac_marginal(&self) -> Vec<f64> {
        let per = self.spectrum.c as usize + 1;
        let mut marginal = vec![0.0; self.pi.len() / per];
        for (idx, &mass) in self.pi.iter().enumerate() {
            marginal[idx / per] += mass;
        }
        marginal
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.space
    }
}

// Transmit-level inflow rows: coefficients of T_j(s), the probability mass
// entering stage j while the channel view is s, over the interface vector
// v(i, s) = pi(i, 0, s). Row-major over the R = (m + 1)(C + 1) unknowns.
fn transmit_inflow_coeffs(m: u32, c: u32, p: f64) -> Vec<Vec<Vec<f64>>> {
    let per = c as usize + 1;
    let r = (m as usize + 1) * per;
    let mut t = vec![vec![vec![0.0; r]; c as usize]; m as usize + 1];
    for s in 0..c as usize {
        if m == 0 {
            // only one stage: success and failure both re-enter it
            t[0][s][s] = 1.0;
            continue;
        }
        for i in 0..=m as usize {
            t[0][s][i * per + s] = 1.0 - p;
        }
        for j in 1..=m as usize {
            t[j][s][(j - 1) * per + s] += p;
        }
        t[m as usize][s][m as usize * per + s] += p;
    }
    t
}

// Stationary law by structural elimination. Within a stage the counter only
// moves down, so sweeping counters from the top expresses every cell as a
// linear map of the interface vector v; closing the loop at counter zero
// gives a small eigenproblem v = G v solved by SVD, and a numeric sweep
// with the recovered v fills in the full vector.
fn structural_stationary(
    mac: &MacParams,
    spectrum: &SpectrumParams,
    p: f64,
    space: &StateSpace,
) -> Result<Vec<f64>> {
    let c = spectrum.c;
    let q = spectrum.perceived_busy_prob();
    if q >= 1.0 {
        return Err(Error::NonErgodic(
            "every channel is perceived busy forever; all frozen states absorb".into(),
        ));
    }
    let per = c as usize + 1;
    let r = (mac.m as usize + 1) * per;
    let channel_rows: Vec<Vec<(u32, f64)>> =
        (0..=c).map(|s| channel_subchain_row(c, q, s)).collect();
    let t_coeffs = transmit_inflow_coeffs(mac.m, c, p);
    let freeze_gain = (q / c as f64) / (1.0 - q);

    // One backward sweep through a stage. Cells are rows of `width`
    // numbers — coefficient vectors during the symbolic pass (width = R),
    // plain probabilities during the numeric pass (width = 1). Calls
    // `emit` on every produced level, bottom level last.
    let sweep = |stage: usize,
                 t_rows: &dyn Fn(usize) -> Vec<f64>,
                 width: usize,
                 emit: &mut dyn FnMut(u64, &[Vec<f64>])| {
        let w = space.window(stage as u32);
        let mut above: Option<Vec<Vec<f64>>> = None;
        for l in (0..w).rev() {
            let mut f: Vec<Vec<f64>> = Vec::with_capacity(c as usize);
            for s in 0..c as usize {
                let mut row = t_rows(s);
                for v in &mut row {
                    *v /= w as f64;
                }
                if let Some(above) = &above {
                    for (dst, src) in row.iter_mut().zip(&above[s]) {
                        *dst += src;
                    }
                }
                f.push(row);
            }
            let mut level = vec![vec![0.0; width]; per];
            for (dst, src) in level[c as usize].iter_mut().zip(&f[c as usize - 1]) {
                *dst = src * freeze_gain;
            }
            for s in 0..c as usize {
                for &(u, prob) in &channel_rows[s] {
                    if u < c {
                        for (dst, src) in level[u as usize].iter_mut().zip(&f[s]) {
                            *dst += src * prob;
                        }
                    }
                }
            }
            let unfreeze = 1.0 - q;
            for col in 0..width {
                level[c as usize - 1][col] += level[c as usize][col] * unfreeze;
            }
            emit(l, &level);
            above = Some(f_levels_for_next(&level, c));
        }
    };

    // Symbolic pass: collect G rows at counter zero.
    let mut g = DMatrix::<f64>::zeros(r, r);
    for stage in 0..=mac.m as usize {
        let t_rows = |s: usize| t_coeffs[stage][s].clone();
        sweep(stage, &t_rows, r, &mut |l, level| {
            if l == 0 {
                for u in 0..per {
                    for col in 0..r {
                        g[(stage * per + u, col)] = level[u][col];
                    }
                }
            }
        });
    }

    // Interface vector: null direction of (G - I).
    let mut a = g;
    for d in 0..r {
        a[(d, d)] -= 1.0;
    }
    let svd = a.svd(true, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::NoConvergence("interface system SVD failed".into()))?;
    let mut smallest = 0;
    for (k, sv) in svd.singular_values.iter().enumerate() {
        if *sv < svd.singular_values[smallest] {
            smallest = k;
        }
    }
    let mut v: Vec<f64> = (0..r).map(|col| v_t[(smallest, col)]).collect();
    let total_sign: f64 = v.iter().sum();
    if total_sign < 0.0 {
        for value in &mut v {
            *value = -*value;
        }
    }

    // Numeric pass: rebuild every cell from the recovered interface values.
    let mut pi = vec![0.0; space.len()];
    for stage in 0..=mac.m as usize {
        let t_rows = |s: usize| {
            let dot: f64 = t_coeffs[stage][s].iter().zip(&v).map(|(a, b)| a * b).sum();
            vec![dot]
        };
        sweep(stage, &t_rows, 1, &mut |l, level| {
            for (u, cell) in level.iter().enumerate() {
                pi[space.index(stage as u32, l, u as u32)] = cell[0];
            }
        });
    }

    let mut sum = 0.0;
    let mut most_negative = 0.0f64;
    for &mass in &pi {
        sum += mass;
        most_negative = most_negative.min(mass);
    }
    if !(sum.is_finite() && sum > 0.0) {
        return Err(Error::NoConvergence("structural solve lost normalization".into()));
    }
    if most_negative < -1e-9 * sum {
        return Err(Error::NoConvergence(format!(
            "structural solve produced probability {most_negative:e} after normalization"
        )));
    }
    for mass in &mut pi {
        *mass = (*mass / sum).max(0.0);
    }
    Ok(pi)
}

// The next (lower) level consumes the idle-view components of this one.
fn f_levels_for_next(level: &[Vec<f64>], c: u32) -> Vec<Vec<f64>> {
    level[..c as usize].to_vec()
}

/// Stationary distribution of the chain at a fixed conditional collision
/// probability, verified against the assembled transition matrix: the
/// structural solution must leave the one-step residual below `1e-10`, and
/// the generic sparse solver takes over if it does not.
pub fn stationary_distribution(
    mac: &MacParams,
    spectrum: &SpectrumParams,
    p: f64,
) -> Result<ChainSolution> {
    mac.validate()?;
    spectrum.validate()?;
    check_collision_prob(p)?;
    let space = StateSpace::new(mac, spectrum.c)?;
    let pi = structural_stationary(mac, spectrum, p, &space)?;
    let matrix = build_chain(mac, spectrum, p)?;
    let pi = if matrix.residual_inf(&pi) <= 1e-10 { pi } else { matrix.solve()? };
    Ok(ChainSolution {
        mac: *mac,
        spectrum: *spectrum,
        p,
        q: spectrum.perceived_busy_prob(),
        space,
        pi,
    })
}

// Fast path for the fixed-point loop: structural solve without assembling
// the sparse matrix. The converged answer is re-derived through the checked
// route before being returned to callers.
fn transmit_probability_fast(
    mac: &MacParams,
    spectrum: &SpectrumParams,
    p: f64,
    space: &StateSpace,
) -> Result<f64> {
    let pi = structural_stationary(mac, spectrum, p, space)?;
    let mut tau = 0.0;
    for i in 0..=mac.m {
        for s in 0..spectrum.c {
            tau += pi[space.index(i, 0, s)];
        }
    }
    Ok(tau)
}

/// Self-consistent operating point of a network of `n` identical stations.
#[derive(Clone, Debug)]
pub struct FixedPoint {
    /// Converged conditional collision probability.
    pub p: f64,
    /// Station transmit probability at the fixed point.
    pub tau: f64,
    /// Collision probability seen by a transmitting station,
    /// `1 - (1 - tau)^(n-1)`, evaluated at the converged `tau`.
    pub p_c: f64,
    /// The same expression evaluated one shot from a collision-free chain
    /// (`p = 0`), before any feedback is applied.
    pub p_c_one_shot: f64,
    /// Picard iterations used.
    pub iterations: u32,
    /// Full chain solution at the converged point.
    pub solution: ChainSolution,
}

/// Closes the loop `p = 1 - (1 - tau(p))^(n-1)` by damped Picard iteration
/// from `p = 0`, then re-solves the chain at the fixed point through the
/// checked path.
///
/// A network whose every sensing comes back busy (`q = 1`) never transmits;
/// that degenerate case short-circuits to `tau = 0` with the counter state
/// pinned to the all-busy view, since the frozen chain itself has no unique
/// stationary law.
pub fn solve_fixed_point(mac: &MacParams, spectrum: &SpectrumParams) -> Result<FixedPoint> {
    mac.validate()?;
    spectrum.validate()?;
    let q = spectrum.perceived_busy_prob();
    let space = StateSpace::new(mac, spectrum.c)?;
    if q >= 1.0 {
        let mac_states = mac.mac_state_count();
        let mut pi = vec![0.0; space.len()];
        for i in 0..=mac.m {
            for k in 0..mac.window(i) {
                pi[space.index(i, k, spectrum.c)] = 1.0 / mac_states as f64;
            }
        }
        let solution = ChainSolution {
            mac: *mac,
            spectrum: *spectrum,
            p: 0.0,
            q,
            space,
            pi,
        };
        return Ok(FixedPoint {
            p: 0.0,
            tau: 0.0,
            p_c: 0.0,
            p_c_one_shot: 0.0,
            iterations: 0,
            solution,
        });
    }

    let exponent = mac.n as f64 - 1.0;
    let collision_at = |tau: f64| 1.0 - (1.0 - tau).powf(exponent);
    let tau_zero = transmit_probability_fast(mac, spectrum, 0.0, &space)?;
    let p_c_one_shot = collision_at(tau_zero);

    let mut p_cur = 0.0;
    let mut tau = tau_zero;
    let mut iterations = 0;
    if mac.n > 1 {
        const DAMPING: f64 = 0.5;
        const TOL: f64 = 1e-9;
        const MAX_ITERS: u32 = 500;
        loop {
            iterations += 1;
            let target = collision_at(tau);
            let p_next = (1.0 - DAMPING) * p_cur + DAMPING * target;
            let step = (p_next - p_cur).abs();
            p_cur = p_next;
            if step < TOL {
                break;
            }
            if iterations >= MAX_ITERS {
                return Err(Error::NoConvergence(format!(
                    "collision fixed point still moving by {step:e} after {iterations} \
                     iterations (last p = {p_cur})"
                )));
            }
            tau = transmit_probability_fast(mac, spectrum, p_cur, &space)?;
        }
    }

    let solution = stationary_distribution(mac, spectrum, p_cur)?;
    let tau = solution.transmit_probability();
    Ok(FixedPoint {
        p: p_cur,
        tau,
        p_c: collision_at(tau),
        p_c_one_shot,
        iterations,
        solution,
    })
}

fn check_collision_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "conditional collision probability must lie in [0, 1], got {p}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u32, k: u32) -> f64 {
        let mut acc = 1.0;
        for i in 0..k {
            acc = acc * (n - i) as f64 / (i + 1) as f64;
        }
        acc
    }

    // Closed form for the transmit probability of the pure backoff chain
    // (no freezing), used as an independent oracle for the single-channel
    // product structure.
    fn backoff_tau(p: f64, m: u32, w: u32) -> f64 {
        let wf = w as f64;
        let mf = m as f64;
        if (1.0 - 2.0 * p).abs() < 1e-9 {
            return 2.0 / (wf + 1.0 + mf * wf / 2.0);
        }
        2.0 * (1.0 - 2.0 * p)
            / ((1.0 - 2.0 * p) * (wf + 1.0) + p * wf * (1.0 - (2.0 * p).powi(m as i32)))
    }

    #[test]
    fn subchain_row_frozen_values() {
        // three channels, one busy, coin-flip sensing: down 1/6, stay 1/2,
        // up 1/3
        let row = channel_subchain_row(3, 0.5, 1);
        assert_eq!(row.len(), 3);
        assert_eq!(row[0].0, 0);
        assert!((row[0].1 - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(row[1].0, 1);
        assert!((row[1].1 - 0.5).abs() < 1e-15);
        assert_eq!(row[2].0, 2);
        assert!((row[2].1 - 1.0 / 3.0).abs() < 1e-15);

        // boundary rows
        let bottom = channel_subchain_row(4, 0.25, 0);
        assert_eq!(bottom, vec![(0, 0.75), (1, 0.25)]);
        let top = channel_subchain_row(4, 0.25, 4);
        assert_eq!(top, vec![(3, 0.75), (4, 0.25)]);
    }

    #[test]
    fn state_indexing_round_trips() {
        let mac = MacParams::new(5, 3, 4);
        let space = StateSpace::new(&mac, 5).unwrap();
        assert_eq!(space.len(), (4 + 8 + 16 + 32) * 6);
        let mut seen = vec![false; space.len()];
        for i in 0..=3u32 {
            for k in 0..mac.window(i) {
                for s in 0..=5u32 {
                    let idx = space.index(i, k, s);
                    let back = space.state(idx);
                    assert_eq!(back, ChainState { stage: i, counter: k, busy: s });
                    assert!(!seen[idx]);
                    seen[idx] = true;
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn rows_are_stochastic_across_the_parameter_grid() {
        for m in [0u32, 1, 3, 5] {
            for w in [1u32, 2, 32] {
                for c in [1u32, 3, 6] {
                    for q_target in [0.0, 0.25, 1.0] {
                        for p in [0.0, 0.3, 1.0] {
                            let mac = MacParams::new(2, m, w);
                            // alpha = q_target with perfect detection gives
                            // exactly the wanted busy probability
                            let spectrum = SpectrumParams::new(c, q_target, 1.0, 0.0);
                            let matrix = build_chain(&mac, &spectrum, p).unwrap();
                            let worst = matrix
                                .row_sums()
                                .iter()
                                .map(|s| (s - 1.0).abs())
                                .fold(0.0, f64::max);
                            assert!(
                                worst <= 1e-12,
                                "m={m} w={w} c={c} q={q_target} p={p}: row sum off by {worst:e}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn busy_marginal_is_binomial() {
        for (c, alpha, p_d, p_f) in [(3u32, 0.4, 0.9, 0.1), (6, 0.7, 0.6, 0.3), (1, 0.5, 0.8, 0.2)]
        {
            let mac = MacParams::new(4, 2, 4);
            let spectrum = SpectrumParams::new(c, alpha, p_d, p_f);
            let q = spectrum.perceived_busy_prob();
            let solution = stationary_distribution(&mac, &spectrum, 0.3).unwrap();
            let marginal = solution.busy_marginal();
            for s in 0..=c {
                let want = binom(c, s) * q.powi(s as i32) * (1.0 - q).powi((c - s) as i32);
                assert!(
                    (marginal[s as usize] - want).abs() < 1e-9,
                    "c={c} s={s}: {} vs binomial {want}",
                    marginal[s as usize]
                );
            }
        }
    }

    #[test]
    fn structural_solution_matches_dense_solver() {
        // small enough for the generic dense route, rich enough to hit
        // freezing, window growth, and multi-channel occupancy
        let cases = [
            (3u32, 2u32, 1u32, 0.37, 0.4, 0.9, 0.1),
            (0, 1, 2, 0.5, 0.3, 0.7, 0.2),
            (1, 3, 3, 0.2, 0.6, 0.5, 0.5),
            (2, 2, 2, 0.0, 0.25, 1.0, 0.0),
            (2, 2, 2, 1.0, 0.25, 0.8, 0.3),
        ];
        for (m, w, c, p, alpha, p_d, p_f) in cases {
            let mac = MacParams::new(3, m, w);
            let spectrum = SpectrumParams::new(c, alpha, p_d, p_f);
            let space = StateSpace::new(&mac, c).unwrap();
            let structural = structural_stationary(&mac, &spectrum, p, &space).unwrap();
            let dense = build_chain(&mac, &spectrum, p).unwrap().dense_direct().unwrap();
            for (idx, (a, b)) in structural.iter().zip(&dense).enumerate() {
                assert!(
                    (a - b).abs() < 1e-10,
                    "m={m} w={w} c={c} p={p}: state {idx} differs: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn trivial_mac_reduces_to_channel_view() {
        // one stage, window one: the station transmits whenever any channel
        // looks idle, so tau is exactly the idle-view probability
        let mac = MacParams::new(2, 0, 1);
        for q in [0.0, 0.3, 0.8] {
            let spectrum = SpectrumParams::new(1, q, 1.0, 0.0);
            let solution = stationary_distribution(&mac, &spectrum, 0.6).unwrap();
            assert!((solution.transmit_probability() - (1.0 - q)).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_matches_product_form_oracle() {
        // the frozen MAC kernel is the identity and the running one does
        // not depend on the channel view, so the stationary law factorizes
        // exactly for every channel count:
        // tau = (1 - q^C) * tau_backoff(p)
        for (m, w) in [(0u32, 1u32), (1, 2), (3, 32), (5, 16)] {
            for c in [1u32, 3, 6] {
                for q in [0.0, 0.4, 0.9] {
                    for p in [0.0, 0.2, 0.3, 0.7, 0.9] {
                        let mac = MacParams::new(5, m, w);
                        let spectrum = SpectrumParams::new(c, q, 1.0, 0.0);
                        let solution = stationary_distribution(&mac, &spectrum, p).unwrap();
                        let want = (1.0 - q.powi(c as i32)) * backoff_tau(p, m, w);
                        let got = solution.transmit_probability();
                        assert!(
                            (got - want).abs() < 1e-12,
                            "m={m} w={w} c={c} q={q} p={p}: tau {got} vs product form {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn joint_and_factored_tau_agree() {
        // the factored expression is computed through marginals, the joint
        // one by direct summation; the product structure makes them equal
        // far below the 1e-9 contract
        for (m, w, c, alpha, p_d, p_f, p) in [
            (3u32, 32u32, 1u32, 0.5, 0.9, 0.1, 0.2),
            (3, 32, 3, 0.5, 0.5, 0.1, 0.2),
            (1, 2, 6, 0.8, 0.9, 0.3, 0.3),
            (5, 16, 6, 0.7, 0.9, 0.4, 0.3),
        ] {
            let mac = MacParams::new(5, m, w);
            let spectrum = SpectrumParams::new(c, alpha, p_d, p_f);
            let solution = stationary_distribution(&mac, &spectrum, p).unwrap();
            let exact = solution.transmit_probability();
            let factored = solution.transmit_probability_factored();
            assert!(
                (exact - factored).abs() < 1e-9,
                "m={m} w={w} c={c}: joint {exact} vs factored {factored}"
            );
        }
    }

    #[test]
    fn all_busy_sensing_is_rejected_as_non_ergodic() {
        let mac = MacParams::new(2, 1, 2);
        let spectrum = SpectrumParams::new(2, 1.0, 1.0, 1.0);
        assert!(matches!(
            stationary_distribution(&mac, &spectrum, 0.2),
            Err(Error::NonErgodic(_))
        ));
    }

    #[test]
    fn fixed_point_with_always_busy_sensing_never_transmits() {
        let mac = MacParams::new(5, 2, 8);
        let spectrum = SpectrumParams::new(2, 1.0, 1.0, 0.5);
        let fp = solve_fixed_point(&mac, &spectrum).unwrap();
        assert_eq!(fp.tau, 0.0);
        assert_eq!(fp.p_c, 0.0);
        assert_eq!(fp.p_c_one_shot, 0.0);
        let marginal = fp.solution.busy_marginal();
        assert!((marginal[2] - 1.0).abs() < 1e-12);
        let total: f64 = fp.solution.stationary().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_station_never_collides() {
        let mac = MacParams::new(1, 3, 32);
        let spectrum = SpectrumParams::new(1, 0.3, 0.9, 0.1);
        let fp = solve_fixed_point(&mac, &spectrum).unwrap();
        assert_eq!(fp.p, 0.0);
        assert_eq!(fp.p_c, 0.0);
    }

    #[test]
    fn fixed_point_matches_scalar_bisection() {
        // with one channel the chain is a known product, so the network
        // fixed point reduces to a scalar equation solvable independently
        for (n, m, w, q) in [(10u32, 3u32, 32u32, 0.0), (5, 3, 32, 0.4), (20, 5, 16, 0.2)] {
            let mac = MacParams::new(n, m, w);
            let spectrum = SpectrumParams::new(1, q, 1.0, 0.0);
            let fp = solve_fixed_point(&mac, &spectrum).unwrap();

            let h = |p: f64| {
                let tau = (1.0 - q) * backoff_tau(p, m, w);
                p - (1.0 - (1.0 - tau).powi(n as i32 - 1))
            };
            let (mut lo, mut hi) = (0.0, 0.999);
            assert!(h(lo) < 0.0 && h(hi) > 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if h(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let p_ref = 0.5 * (lo + hi);
            assert!(
                (fp.p - p_ref).abs() < 1e-7,
                "n={n} m={m} w={w} q={q}: fixed point {} vs bisection {p_ref}",
                fp.p
            );
            assert!((fp.tau - (1.0 - q) * backoff_tau(p_ref, m, w)).abs() < 1e-7);
            assert!((fp.p_c - fp.p).abs() < 1e-7);
        }
    }

    #[test]
    fn one_shot_collision_exceeds_converged_value() {
        // feedback lowers the transmit probability, so the first-shot
        // estimate is an upper bound in saturated networks
        let mac = MacParams::new(10, 3, 32);
        let spectrum = SpectrumParams::new(1, 0.3, 0.9, 0.1);
        let fp = solve_fixed_point(&mac, &spectrum).unwrap();
        assert!(fp.p_c_one_shot > fp.p_c);
        assert!(fp.p_c > 0.0 && fp.p_c < 1.0);
        assert!(fp.iterations > 0);
    }

    #[test]
    fn validation_rejects_nonsense() {
        assert!(MacParams::new(0, 3, 32).validate().is_err());
        assert!(MacParams::new(2, 3, 0).validate().is_err());
        assert!(MacParams::new(2, 30, 2).validate().is_err());
        assert!(SpectrumParams::new(0, 0.5, 0.9, 0.1).validate().is_err());
        assert!(SpectrumParams::new(2, 1.5, 0.9, 0.1).validate().is_err());
        assert!(SpectrumParams::new(2, 0.5, -0.1, 0.1).validate().is_err());
        let mac = MacParams::new(2, 1, 2);
        let spectrum = SpectrumParams::new(1, 0.5, 0.9, 0.1);
        assert!(build_chain(&mac, &spectrum, 1.5).is_err());
        assert!(build_chain(&mac, &spectrum, -0.1).is_err());
    }

    #[test]
    fn perfect_sensing_tracks_primary_activity() {
        let spectrum = SpectrumParams::with_perfect_sensing(3, 0.35);
        assert_eq!(spectrum.perceived_busy_prob(), 0.35);
        assert_eq!(spectrum.p_d, 1.0);
        assert_eq!(spectrum.p_f, 0.0);
    }
}
