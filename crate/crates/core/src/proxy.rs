//! The cost-indexed homogeneous recursion.
//!
//! Instead of `2^n` amplitudes, the proxy tracks one value `Q(c')` per cost.
//! One layer with angles `(γ, β)` is
//!
//! ```text
//! Q'(c') = Σ_d M_d(β) · Σ_c N(c'; d, c) · e^{-iγc} · Q(c)
//! M_d(β) = cos^{n-d}(β) · (-i sin β)^d
//! ```
//!
//! and the cost estimate is `Σ_c' 2^n P(c') |Q(c')|² c'`. The phase acts on the
//! source cost `c`. The update is not unitary; the pseudo-norm
//! `Σ_c' 2^n P(c') |Q(c')|²` drifts and is only divided out on request.
//!
//! A layer splits into a contraction over `c` (depends on `γ` only) and a
//! combination over `d` (depends on `β` only), see [`Contraction`]. Grid scans
//! over `β` at fixed `γ` reuse the contraction.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::pow_ln;
use crate::distributions::DistributionTable;
use crate::error::{Error, Result};
use crate::problem_classes::ProblemInstance;

/// Depth-`p` angle schedule. Layer `ℓ` applies `γ_ℓ` then `β_ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl Schedule {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        let s = Self { gammas, betas };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.len() != self.betas.len() {
            return Err(Error::InvalidSchedule(format!(
                "{} gammas but {} betas",
                self.gammas.len(),
                self.betas.len()
            )));
        }
        if self.gammas.is_empty() {
            return Err(Error::InvalidSchedule("depth must be at least 1".into()));
        }
        if self
            .gammas
            .iter()
            .chain(&self.betas)
            .any(|a| !a.is_finite())
        {
            return Err(Error::InvalidSchedule("angles must be finite".into()));
        }
        Ok(())
    }

    /// `p` layers of the same angles.
    pub fn constant(p: usize, gamma: f64, beta: f64) -> Result<Self> {
        Self::new(vec![gamma; p], vec![beta; p])
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn layers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gammas.iter().copied().zip(self.betas.iter().copied())
    }
}

/// Four-parameter ramp `γ_1 → γ_f`, `β_1 → β_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearRamp {
    pub gamma_start: f64,
    pub gamma_end: f64,
    pub beta_start: f64,
    pub beta_end: f64,
}

impl LinearRamp {
    pub fn new(gamma_start: f64, gamma_end: f64, beta_start: f64, beta_end: f64) -> Self {
        Self {
            gamma_start,
            gamma_end,
            beta_start,
            beta_end,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn to_array(&self) -> [f64; 4] {
        [
            self.gamma_start,
            self.gamma_end,
            self.beta_start,
            self.beta_end,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    /// `γ_ℓ = γ_1 + (γ_f - γ_1) ℓ/p` for `ℓ = 1..=p`, likewise `β`.
    /// The first layer sits at `ℓ/p = 1/p`, not at the start value.
    pub fn expand(&self, p: usize) -> Result<Schedule> {
        if p == 0 {
            return Err(Error::InvalidSchedule("depth must be at least 1".into()));
        }
        let at = |start: f64, end: f64, l: usize| {
            let t = l as f64 / p as f64;
            start * (1.0 - t) + end * t
        };
        Schedule::new(
            (1..=p)
                .map(|l| at(self.gamma_start, self.gamma_end, l))
                .collect(),
            (1..=p)
                .map(|l| at(self.beta_start, self.beta_end, l))
                .collect(),
        )
    }
}

/// `⟨x| e^{-iβB} |y⟩ = cos^{n-d}(β) (-i sin β)^d` for `d = d(x, y)`.
///
/// Magnitude is assembled in log space; the phase is tracked exactly from the
/// signs of `cos β`, `sin β` and the power of `-i`.
pub fn mixer_element(n: usize, d: usize, beta: f64) -> Complex64 {
    let mag = mixer_amplitude(n, d, beta);
    match d % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, -mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, mag),
    }
}

/// The real factor `cos^{n-d}(β) sin^d(β)` of [`mixer_element`].
fn mixer_amplitude(n: usize, d: usize, beta: f64) -> f64 {
    assert!(d <= n, "distance {d} exceeds n = {n}");
    let (s, c) = beta.sin_cos();
    let stay = n - d;
    let ln_mag = pow_ln(c.abs(), stay) + pow_ln(s.abs(), d);
    if ln_mag == f64::NEG_INFINITY {
        return 0.0;
    }
    let negative = (c < 0.0 && stay % 2 == 1) ^ (s < 0.0 && d % 2 == 1);
    if negative {
        -ln_mag.exp()
    } else {
        ln_mag.exp()
    }
}

/// All `M_d(β)` for `d = 0..=n`.
pub fn mixer_row(n: usize, beta: f64) -> Vec<Complex64> {
    (0..=n).map(|d| mixer_element(n, d, beta)).collect()
}

/// Cost-indexed analogue of the QAOA state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogState {
    pub q: Vec<Complex64>,
    pub layer: usize,
    pub table_id: u64,
}

impl HomogState {
    /// `Q_0(c') = 2^{-n/2}` on reachable costs, zero elsewhere.
    pub fn initial(table: &DistributionTable) -> Self {
        let amp = 2f64.powf(-(table.n() as f64) / 2.0);
        let q = (0..table.len())
            .map(|c| {
                if table.is_reachable(c) {
                    Complex64::new(amp, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self {
            q,
            layer: 0,
            table_id: table.id(),
        }
    }

    fn check(&self, table: &DistributionTable) -> Result<()> {
        if self.table_id != table.id() || self.q.len() != table.len() {
            return Err(Error::TableMismatch);
        }
        Ok(())
    }

    /// `Σ_c' 2^n P(c') |Q(c')|²`.
    pub fn pseudo_norm(&self, table: &DistributionTable) -> f64 {
        let two_n = 2f64.powi(table.n() as i32);
        self.q
            .iter()
            .zip(&table.p_of_c)
            .map(|(q, p)| two_n * p * q.norm_sqr())
            .sum()
    }

    /// Rows `c', Re Q, Im Q, P(c')` as tab-separated text.
    pub fn dump(&self, table: &DistributionTable) -> String {
        let mut out = String::from("cost\tre\tim\tprobability\n");
        for (c, (q, p)) in self.q.iter().zip(&table.p_of_c).enumerate() {
            out.push_str(&format!("{c}\t{:e}\t{:e}\t{:e}\n", q.re, q.im, p));
        }
        out
    }
}

/// `W(c', d) = Σ_c N(c'; d, c) e^{-iγc} Q(c)` for one layer.
///
/// Stored `d`-major with split real and imaginary parts so that finishing the
/// layer streams over `c'`. Unreachable `c'` have zero rows in the table and
/// therefore zero `W`.
#[derive(Debug, Clone)]
pub struct Contraction {
    n: usize,
    width: usize,
    layer: usize,
    table_id: u64,
    /// Reachable costs lie in `span`; everything outside is zero.
    span: std::ops::Range<usize>,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// `(Σ w·a, Σ w·b)` with independent partial sums.
fn dot2(w: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    const LANES: usize = 4;
    let (mut sa, mut sb) = ([0.0; LANES], [0.0; LANES]);
    let mut wc = w.chunks_exact(LANES);
    let mut ac = a.chunks_exact(LANES);
    let mut bc = b.chunks_exact(LANES);
    for ((w, a), b) in (&mut wc).zip(&mut ac).zip(&mut bc) {
        for k in 0..LANES {
            sa[k] += w[k] * a[k];
            sb[k] += w[k] * b[k];
        }
    }
    let (mut ta, mut tb) = (sa.iter().sum::<f64>(), sb.iter().sum::<f64>());
    for ((w, a), b) in wc
        .remainder()
        .iter()
        .zip(ac.remainder())
        .zip(bc.remainder())
    {
        ta += w * a;
        tb += w * b;
    }
    (ta, tb)
}

impl Contraction {
    pub fn new(state: &HomogState, table: &DistributionTable, gamma: f64) -> Result<Self> {
        state.check(table)?;
        let n = table.n();
        let width = table.len();
        let (phased_re, phased_im): (Vec<f64>, Vec<f64>) = state
            .q
            .iter()
            .enumerate()
            .map(|(c, q)| {
                let v = q * Complex64::from_polar(1.0, -gamma * c as f64);
                (v.re, v.im)
            })
            .unzip();
        let flat = table
            .n_table
            .as_slice()
            .expect("distribution tables are stored contiguously");
        let lo = (0..width).find(|&c| table.is_reachable(c)).unwrap_or(0);
        let hi = (0..width)
            .rfind(|&c| table.is_reachable(c))
            .map_or(lo, |c| c + 1);
        let (pr, pi) = (&phased_re[lo..hi], &phased_im[lo..hi]);
        let mut re = vec![0.0; width * (n + 1)];
        let mut im = vec![0.0; width * (n + 1)];
        for cp in (lo..hi).filter(|&c| table.is_reachable(c)) {
            for d in 0..=n {
                let row = &flat[(cp * (n + 1) + d) * width..][lo..hi];
                let (r, i) = dot2(row, pr, pi);
                re[d * width + cp] = r;
                im[d * width + cp] = i;
            }
        }
        Ok(Self {
            n,
            width,
            layer: state.layer,
            table_id: state.table_id,
            span: lo..hi,
            re,
            im,
        })
    }

    /// `Σ_d W(c', d) M_d` into `out_re`, `out_im`.
    fn combine(&self, mixer: &[Complex64], out_re: &mut [f64], out_im: &mut [f64]) {
        assert_eq!(mixer.len(), self.n + 1, "mixer row length");
        out_re.fill(0.0);
        out_im.fill(0.0);
        let w = self.width;
        for (d, m) in mixer.iter().enumerate() {
            let (vr, vi) = (&self.re[d * w..][..w], &self.im[d * w..][..w]);
            for (((qr, qi), &a), &b) in out_re.iter_mut().zip(out_im.iter_mut()).zip(vr).zip(vi) {
                *qr += a * m.re - b * m.im;
                *qi += a * m.im + b * m.re;
            }
        }
    }

    /// Gram matrices of the layer in the real mixer factors `r_d`.
    ///
    /// With `T(c', d) = W(c', d) (-i)^d` the finished layer is
    /// `Q'(c') = Σ_d T(c', d) r_d`, so `Σ_c' w(c') c' |Q'(c')|² = rᵀ G r` and
    /// `Σ_c' w(c') |Q'(c')|² = rᵀ H r`. Returned row-major, `(n+1)²` each.
    fn gram(&self, weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (w, k) = (self.width, self.n + 1);
        let span = self.span.clone();
        let weights = &weights[span.clone()];
        let costs: Vec<f64> = span.clone().map(|c| c as f64).collect();
        let re = |d: usize| &self.re[d * w..][span.clone()];
        let im = |d: usize| &self.im[d * w..][span.clone()];
        let mut g = vec![0.0; k * k];
        let mut h = vec![0.0; k * k];
        for d in 0..k {
            let (ad, bd) = (re(d), im(d));
            for e in d..k {
                let (ae, be) = (re(e), im(e));
                // Re(T_d conj T_e) = Re(W_d conj W_e (-i)^(d-e))
                let (mut gr, mut gi, mut hr, mut hi) = (0.0, 0.0, 0.0, 0.0);
                for i in 0..weights.len() {
                    let x = weights[i] * (ad[i] * ae[i] + bd[i] * be[i]);
                    let y = weights[i] * (bd[i] * ae[i] - ad[i] * be[i]);
                    gr += x * costs[i];
                    gi += y * costs[i];
                    hr += x;
                    hi += y;
                }
                let (sg, sh) = match (e - d) % 4 {
                    0 => (gr, hr),
                    1 => (-gi, -hi),
                    2 => (-gr, -hr),
                    _ => (gi, hi),
                };
                g[d * k + e] = sg;
                g[e * k + d] = sg;
                h[d * k + e] = sh;
                h[e * k + d] = sh;
            }
        }
        (g, h)
    }

    /// Finish the layer with mixer angle `β`.
    pub fn mix(&self, beta: f64) -> HomogState {
        self.mix_with(&mixer_row(self.n, beta))
    }

    /// Finish the layer with a precomputed [`mixer_row`].
    pub fn mix_with(&self, mixer: &[Complex64]) -> HomogState {
        let mut re = vec![0.0; self.width];
        let mut im = vec![0.0; self.width];
        self.combine(mixer, &mut re, &mut im);
        HomogState {
            q: re
                .into_iter()
                .zip(im)
                .map(|(r, i)| Complex64::new(r, i))
                .collect(),
            layer: self.layer + 1,
            table_id: self.table_id,
        }
    }
}

/// One proxy layer.
pub fn evolve_step(
    state: &HomogState,
    table: &DistributionTable,
    gamma: f64,
    beta: f64,
) -> Result<HomogState> {
    Ok(Contraction::new(state, table, gamma)?.mix(beta))
}

/// All `p` layers from the uniform start.
pub fn evolve(table: &DistributionTable, schedule: &Schedule) -> Result<HomogState> {
    schedule.validate()?;
    let mut state = HomogState::initial(table);
    for (gamma, beta) in schedule.layers() {
        state = evolve_step(&state, table, gamma, beta)?;
    }
    Ok(state)
}

/// States after layers `0..=p`.
pub fn evolve_trajectory(
    table: &DistributionTable,
    schedule: &Schedule,
) -> Result<Vec<HomogState>> {
    schedule.validate()?;
    let mut states = vec![HomogState::initial(table)];
    for (gamma, beta) in schedule.layers() {
        let next = evolve_step(states.last().unwrap(), table, gamma, beta)?;
        states.push(next);
    }
    Ok(states)
}

/// `Σ_c' 2^n P(c') |Q(c')|² c'`, optionally divided by the pseudo-norm.
pub fn expected_cost(
    state: &HomogState,
    table: &DistributionTable,
    normalize: bool,
) -> Result<f64> {
    state.check(table)?;
    let two_n = 2f64.powi(table.n() as i32);
    let mut weighted = 0.0;
    let mut norm = 0.0;
    for (c, (q, p)) in state.q.iter().zip(&table.p_of_c).enumerate() {
        let w = two_n * p * q.norm_sqr();
        weighted += w * c as f64;
        norm += w;
    }
    if !normalize {
        return Ok(weighted);
    }
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(weighted / norm)
}

/// Proxy objective of one extra layer on top of `prefix`, over a grid.
///
/// Entry `[i, j]` is the cost estimate after appending `(gammas[i], betas[j])`.
pub fn proxy_landscape(
    table: &DistributionTable,
    prefix: &HomogState,
    gammas: &[f64],
    betas: &[f64],
    normalize: bool,
) -> Result<Array2<f64>> {
    prefix.check(table)?;
    let n = table.n();
    let two_n = 2f64.powi(n as i32);
    let weights: Vec<f64> = table.p_of_c.iter().map(|p| two_n * p).collect();
    let factors: Vec<Vec<f64>> = betas
        .iter()
        .map(|&b| (0..=n).map(|d| mixer_amplitude(n, d, b)).collect())
        .collect();
    let quadratic = |m: &[f64], r: &[f64]| -> f64 {
        m.chunks_exact(r.len())
            .zip(r)
            .map(|(row, ri)| ri * row.iter().zip(r).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    };
    let rows: Vec<Vec<f64>> = gammas
        .par_iter()
        .map(|&gamma| {
            let (g, h) = Contraction::new(prefix, table, gamma)?.gram(&weights);
            factors
                .iter()
                .map(|r| {
                    let weighted = quadratic(&g, r);
                    if !normalize {
                        return Ok(weighted);
                    }
                    let norm = quadratic(&h, r);
                    if norm == 0.0 {
                        return Err(Error::ZeroNorm);
                    }
                    Ok(weighted / norm)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(Array2::from_shape_fn(
        (gammas.len(), betas.len()),
        |(i, j)| rows[i][j],
    ))
}

fn scatter(costs: &[u32], state: &HomogState) -> Vec<Complex64> {
    costs.iter().map(|&c| state.q[c as usize]).collect()
}

fn instance_costs(instance: &ProblemInstance, table: &DistributionTable) -> Result<Vec<u32>> {
    let costs = instance.cost_table()?;
    let max = table.cost_set.max;
    if let Some(&c) = costs.iter().find(|&&c| c as usize > max) {
        return Err(Error::CostOutOfRange {
            cost: c as usize,
            max,
        });
    }
    Ok(costs)
}

/// All `2^n` proxy amplitudes: bitstring `x` carries `Q(c(x))`.
///
/// Feeding `N(c(x); d, c)` for every `n(x; d, c)` in the per-bitstring
/// recursion keeps every amplitude a function of cost, so this equals
/// scattering [`evolve`]'s output by instance cost. Not unit norm in general.
pub fn proxy_pseudostate(
    instance: &ProblemInstance,
    table: &DistributionTable,
    schedule: &Schedule,
) -> Result<Vec<Complex64>> {
    let costs = instance_costs(instance, table)?;
    Ok(scatter(&costs, &evolve(table, schedule)?))
}

/// Pseudostates after layers `0..=p`.
pub fn pseudostate_trajectory(
    instance: &ProblemInstance,
    table: &DistributionTable,
    schedule: &Schedule,
) -> Result<Vec<Vec<Complex64>>> {
    let costs = instance_costs(instance, table)?;
    Ok(evolve_trajectory(table, schedule)?
        .iter()
        .map(|s| scatter(&costs, s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::precompute_all;
    use crate::problem_classes::ClassSpec;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn mixer_examples() {
        for n in 0..6 {
            assert_eq!(mixer_element(n, 0, 0.0), Complex64::new(1.0, 0.0));
        }
        assert!(close(
            mixer_element(1, 1, FRAC_PI_2),
            Complex64::new(0.0, -1.0),
            1e-15
        ));
        let h = 0.5f64.sqrt();
        assert!(close(
            mixer_element(1, 0, FRAC_PI_4),
            Complex64::new(h, 0.0),
            1e-15
        ));
        assert!(close(
            mixer_element(1, 1, FRAC_PI_4),
            Complex64::new(0.0, -h),
            1e-15
        ));
    }

    #[test]
    fn mixer_matches_direct_powers() {
        for &beta in &[0.3, 1.9, -0.7, 2.8, PI] {
            for n in 0..8 {
                for d in 0..=n {
                    let direct = Complex64::new(beta.cos(), 0.0).powu((n - d) as u32)
                        * Complex64::new(0.0, -beta.sin()).powu(d as u32);
                    assert!(
                        close(mixer_element(n, d, beta), direct, 1e-14),
                        "n={n} d={d} b={beta}"
                    );
                }
            }
        }
    }

    #[test]
    fn mixer_does_not_underflow_to_nan_at_large_n() {
        let v = mixer_element(2000, 1000, 0.7);
        assert!(v.re.is_finite() && v.im.is_finite());
    }

    #[test]
    fn ramp_expansion() {
        let ramp = LinearRamp::new(0.0, 1.0, 1.0, 0.0);
        let s = ramp.expand(4).unwrap();
        assert_eq!(s.gammas, vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(s.betas, vec![0.75, 0.5, 0.25, 0.0]);
        let s = LinearRamp::new(0.2, 0.9, 0.4, 0.1).expand(1).unwrap();
        assert_eq!((s.gammas, s.betas), (vec![0.9], vec![0.1]));
        let s = LinearRamp::new(0.3, 0.3, 0.5, 0.5).expand(5).unwrap();
        assert!(s.gammas.iter().all(|&g| (g - 0.3).abs() < 1e-15));
        assert!(LinearRamp::new(0.0, 1.0, 0.0, 1.0).expand(0).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(vec![0.1], vec![]).is_err());
        assert!(Schedule::new(vec![], vec![]).is_err());
        assert!(Schedule::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn identity_angles_leave_state_unchanged() {
        let table = precompute_all(&ClassSpec::max_cut_er(6, 0.5).unwrap()).unwrap();
        let s0 = HomogState::initial(&table);
        let s1 = evolve_step(&s0, &table, 0.0, 0.0).unwrap();
        for (a, b) in s0.q.iter().zip(&s1.q) {
            assert!(close(*a, *b, 1e-14));
        }
        assert_eq!(s1.layer, 1);
    }

    #[test]
    fn zero_gamma_is_a_global_phase() {
        let table = precompute_all(&ClassSpec::rand_ksat(7, 9, 3).unwrap()).unwrap();
        let n = table.n() as f64;
        let s0 = HomogState::initial(&table);
        for &beta in &[0.3, 1.1, 2.5] {
            let s1 = evolve_step(&s0, &table, 0.0, beta).unwrap();
            let phase = Complex64::from_polar(1.0, -n * beta);
            for (a, b) in s0.q.iter().zip(&s1.q) {
                assert!(close(a * phase, *b, 1e-12));
            }
        }
    }

    #[test]
    fn layer_zero_expectation_is_binomial_mean() {
        let table = precompute_all(&ClassSpec::max_cut_er(10, 1.0 / 3.0).unwrap()).unwrap();
        let s0 = HomogState::initial(&table);
        assert_eq!(s0.q.len(), 16);
        assert!((expected_cost(&s0, &table, false).unwrap() - 7.5).abs() < 1e-12);
        assert!((s0.pseudo_norm(&table) - 1.0).abs() < 1e-12);

        let deep = Schedule::new(vec![0.0; 6], vec![0.4, 0.1, 2.0, 0.3, 0.9, 1.4]).unwrap();
        let s = evolve(&table, &deep).unwrap();
        assert!((expected_cost(&s, &table, false).unwrap() - 7.5).abs() < 1e-10);
    }

    #[test]
    fn normalized_cost_of_a_point_mass() {
        let table = precompute_all(&ClassSpec::max_cut_er(6, 0.5).unwrap()).unwrap();
        let mut s = HomogState::initial(&table);
        for (c, q) in s.q.iter_mut().enumerate() {
            if c != 4 {
                *q = Complex64::new(0.0, 0.0);
            }
        }
        assert!((expected_cost(&s, &table, true).unwrap() - 4.0).abs() < 1e-12);
        s.q.iter_mut().for_each(|q| *q = Complex64::new(0.0, 0.0));
        assert!(matches!(
            expected_cost(&s, &table, true),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn state_from_another_table_is_rejected() {
        let a = precompute_all(&ClassSpec::max_cut_er(6, 0.5).unwrap()).unwrap();
        let b = precompute_all(&ClassSpec::max_kxor(6, 8, 3).unwrap()).unwrap();
        let s = HomogState::initial(&a);
        assert!(matches!(
            evolve_step(&s, &b, 0.1, 0.1),
            Err(Error::TableMismatch)
        ));
    }

    #[test]
    fn contraction_reuse_matches_fresh_steps() {
        let table = precompute_all(&ClassSpec::max_e3lin2(8, 12).unwrap()).unwrap();
        let s0 = HomogState::initial(&table);
        let s1 = evolve_step(&s0, &table, 0.4, 0.3).unwrap();
        let k = Contraction::new(&s1, &table, 0.7).unwrap();
        for &beta in &[0.0, 0.2, 1.3] {
            let reused = k.mix(beta);
            let fresh = evolve_step(&s1, &table, 0.7, beta).unwrap();
            assert_eq!(reused, fresh);
        }
    }

    #[test]
    fn landscape_matches_full_evolution() {
        let table = precompute_all(&ClassSpec::max_cut_er(6, 0.5).unwrap()).unwrap();
        let prefix = evolve_step(&HomogState::initial(&table), &table, 0.3, 0.4).unwrap();
        let gammas = [0.0, 0.2, 1.1];
        let betas = [0.1, 0.7];
        for normalize in [false, true] {
            let grid = proxy_landscape(&table, &prefix, &gammas, &betas, normalize).unwrap();
            for (i, &g) in gammas.iter().enumerate() {
                for (j, &b) in betas.iter().enumerate() {
                    let state = evolve_step(&prefix, &table, g, b).unwrap();
                    let want = expected_cost(&state, &table, normalize).unwrap();
                    assert!((grid[[i, j]] - want).abs() < 1e-12 * want.abs().max(1.0));
                }
            }
        }
    }
}
