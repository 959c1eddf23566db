//! Full counting statistics of observables that are quadratic in the
//! Jordan-Wigner fermions and block diagonal in momentum.
//!
//! Such an observable acts on each paired mode `k` as a 2×2 real symmetric
//! matrix `w1(k)` on the even slots `|00>, |11>` and a matrix with
//! eigenvalues `(μ_k, λ_k)` on the odd slots, and on the unpaired `0` and `π`
//! modes as a diagonal pair `(vacuum, occupied)`. The characteristic function
//! `P̃(θ) = tr[ρ e^{iθW}]` is then a parity-restricted product of per-mode
//! traces, evaluated here with each factor divided by its `θ = 0` value so
//! that every intermediate stays of order one.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{momentum_grids, ChainParams, ModeData, Thermal};
use crate::partition::z_exact;

/// Imaginary parts up to this size are treated as round-off after inversion.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;
/// Negative probabilities down to `-NEGATIVE_CLAMP_TOL` are clamped to zero.
pub const NEGATIVE_CLAMP_TOL: f64 = 1e-12;
pub const DEFAULT_CUMULANT_ORDER: usize = 4;
pub const MAX_CUMULANT_ORDER: usize = 6;

pub type BlockFn = Arc<dyn Fn(f64) -> [[f64; 2]; 2] + Send + Sync>;
pub type PairFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservableKind {
    Kinks,
    Magnetization,
    Custom,
}

/// A class-W observable `W = offset + Σ_k w_k + w_0 + w_π`.
#[derive(Clone)]
pub struct QuadraticObservable {
    pub name: String,
    pub kind: ObservableKind,
    /// Block on the even slots of mode `k`; must be symmetric.
    pub block_w1: BlockFn,
    /// Eigenvalues of the block on the odd slots of mode `k`.
    pub w2_eigs: PairFn,
    /// `(vacuum, occupied)` eigenvalues on the `k = 0` mode.
    pub zero_mode: (f64, f64),
    /// `(vacuum, occupied)` eigenvalues on the `k = π` mode.
    pub pi_mode: (f64, f64),
    pub offset: f64,
    pub support_step: i64,
    pub support_min: i64,
    pub support_max: i64,
}

impl fmt::Debug for QuadraticObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadraticObservable")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("zero_mode", &self.zero_mode)
            .field("pi_mode", &self.pi_mode)
            .field("offset", &self.offset)
            .field("support", &(self.support_min, self.support_max, self.support_step))
            .finish_non_exhaustive()
    }
}

impl QuadraticObservable {
    /// Number of lattice points `N = (max - min)/step + 1`.
    pub fn support_len(&self) -> usize {
        ((self.support_max - self.support_min) / self.support_step) as usize + 1
    }

    pub fn support(&self) -> Vec<i64> {
        (0..self.support_len() as i64)
            .map(|r| self.support_min + r * self.support_step)
            .collect()
    }
}

/// Kink number `N = ½ Σ_n (1 - X_n X_{n+1})`, spectrum `{0, 1, …, L}`.
pub fn kink_observable(params: &ChainParams) -> QuadraticObservable {
    let l = params.length();
    QuadraticObservable {
        name: "kinks".into(),
        kind: ObservableKind::Kinks,
        block_w1: Arc::new(|k: f64| [[k.cos(), k.sin()], [k.sin(), -k.cos()]]),
        w2_eigs: Arc::new(|_| (0.0, 0.0)),
        zero_mode: (0.5, -0.5),
        pi_mode: (-0.5, 0.5),
        offset: l as f64 / 2.0,
        support_step: 1,
        support_min: 0,
        support_max: l as i64,
    }
}

/// Transverse magnetization `M = Σ_n Z_n`, spectrum `{-L, -L+2, …, L}`.
pub fn magnetization_observable(params: &ChainParams) -> QuadraticObservable {
    let l = params.length() as i64;
    QuadraticObservable {
        name: "magnetization".into(),
        kind: ObservableKind::Magnetization,
        block_w1: Arc::new(|_| [[2.0, 0.0], [0.0, -2.0]]),
        w2_eigs: Arc::new(|_| (0.0, 0.0)),
        zero_mode: (1.0, -1.0),
        pi_mode: (1.0, -1.0),
        offset: 0.0,
        support_step: 2,
        support_min: -l,
        support_max: l,
    }
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// `e^{iθ w}` for a real symmetric 2×2 `w`.
fn exp_i_sym(w: [[f64; 2]; 2], theta: f64) -> [[Complex64; 2]; 2] {
    let a = 0.5 * (w[0][0] + w[1][1]);
    let d = 0.5 * (w[0][0] - w[1][1]);
    let r = d.hypot(w[0][1]);
    let phase = cis(theta * a);
    let c = Complex64::new((theta * r).cos(), 0.0);
    if r == 0.0 {
        return [[phase, Complex64::ZERO], [Complex64::ZERO, phase]];
    }
    let is = Complex64::new(0.0, (theta * r).sin() / r);
    [
        [phase * (c + is * d), phase * is * w[0][1]],
        [phase * is * w[1][0], phase * (c - is * d)],
    ]
}

/// Diagonal entries of `σ_k = S_k e^{iθ w1(k)} S_k` with
/// `S_k = [[cos(ϑ/2), sin(ϑ/2)], [sin(ϑ/2), -cos(ϑ/2)]]`.
pub fn sigma_entries(
    obs: &QuadraticObservable,
    k: f64,
    params: &ChainParams,
    theta: f64,
) -> (Complex64, Complex64) {
    sigma_from_angle(obs, k, ModeData::new(k, params).theta, theta)
}

fn sigma_from_angle(
    obs: &QuadraticObservable,
    k: f64,
    bogoliubov: f64,
    theta: f64,
) -> (Complex64, Complex64) {
    let e = exp_i_sym((obs.block_w1)(k), theta);
    let (c, s) = ((bogoliubov / 2.0).cos(), (bogoliubov / 2.0).sin());
    let s11 = c * c * e[0][0] + c * s * (e[0][1] + e[1][0]) + s * s * e[1][1];
    let s22 = s * s * e[0][0] - c * s * (e[0][1] + e[1][0]) + c * c * e[1][1];
    (s11, s22)
}

/// One paired mode with its Gibbs weights pre-divided by `4 cosh²(βε/2)`.
#[derive(Clone, Copy, Debug)]
struct PairedFactor {
    k: f64,
    bogoliubov: f64,
    /// `e^{-βε} / F`, `e^{βε} / F`, `1 / F`.
    low: f64,
    high: f64,
    odd: f64,
    mu: f64,
    lambda: f64,
}

impl PairedFactor {
    fn new(obs: &QuadraticObservable, k: f64, params: &ChainParams, thermal: &Thermal) -> Self {
        let m = ModeData::new(k, params);
        let a = (-thermal.beta() * m.epsilon).exp();
        let norm = (1.0 + a) * (1.0 + a);
        let (mu, lambda) = (obs.w2_eigs)(k);
        Self {
            k,
            bogoliubov: m.theta,
            low: a * a / norm,
            high: 1.0 / norm,
            odd: a / norm,
            mu,
            lambda,
        }
    }

    /// Normalized `(tr full, tr even - tr odd)` at `θ`.
    fn eval(&self, obs: &QuadraticObservable, theta: f64) -> (Complex64, Complex64) {
        let (s11, s22) = sigma_from_angle(obs, self.k, self.bogoliubov, theta);
        let even = s11 * self.low + s22 * self.high;
        let odd = (cis(theta * self.mu) + cis(theta * self.lambda)) * self.odd;
        (even + odd, even - odd)
    }
}

/// Unpaired mode with weights `e^{±y}` divided by `2 cosh y`.
#[derive(Clone, Copy, Debug)]
struct UnpairedFactor {
    vacuum: f64,
    occupied: f64,
    w: (f64, f64),
}

impl UnpairedFactor {
    fn new(y: f64, w: (f64, f64)) -> Self {
        Self {
            vacuum: 1.0 / (1.0 + (-2.0 * y).exp()),
            occupied: 1.0 / (1.0 + (2.0 * y).exp()),
            w,
        }
    }

    fn eval(&self, theta: f64) -> (Complex64, Complex64) {
        let v = cis(theta * self.w.0) * self.vacuum;
        let o = cis(theta * self.w.1) * self.occupied;
        (v + o, v - o)
    }
}

/// Precomputed thermal characteristic function of one observable.
#[derive(Clone, Debug)]
pub struct ThermalCharFn {
    obs: QuadraticObservable,
    plus: Vec<PairedFactor>,
    minus: Vec<PairedFactor>,
    zero: UnpairedFactor,
    pi: UnpairedFactor,
    /// `Z_F± / max(Z_F+, Z_F-)`.
    w_plus: f64,
    w_minus: f64,
    /// `2 Z / max(Z_F+, Z_F-)`.
    denom: f64,
}

impl ThermalCharFn {
    pub fn new(obs: &QuadraticObservable, params: &ChainParams, thermal: &Thermal) -> Self {
        let grid = momentum_grids(params);
        let b = thermal.beta();
        let g = params.field();
        let z = z_exact(params, thermal);
        let (lf_p, lf_m) = (z.z_f_plus.ln_abs(), z.z_f_minus.ln_abs());
        let anchor = lf_p.max(lf_m);
        let factors = |ks: &[f64]| -> Vec<PairedFactor> {
            ks.iter()
                .map(|&k| PairedFactor::new(obs, k, params, thermal))
                .collect()
        };
        Self {
            obs: obs.clone(),
            plus: factors(&grid.k_plus),
            minus: factors(&grid.k_minus),
            zero: UnpairedFactor::new(b * (g - 1.0), obs.zero_mode),
            pi: UnpairedFactor::new(b * (g + 1.0), obs.pi_mode),
            w_plus: (lf_p - anchor).exp(),
            w_minus: (lf_m - anchor).exp(),
            denom: 2.0 * (z.ln_z() - anchor).exp(),
        }
    }

    fn products(&self, modes: &[PairedFactor], theta: f64) -> (Complex64, Complex64) {
        modes.iter().fold(
            (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
            |(f, b), m| {
                let (mf, mb) = m.eval(&self.obs, theta);
                (f * mf, b * mb)
            },
        )
    }

    /// Exact `P̃(θ)`.
    pub fn exact(&self, theta: f64) -> Complex64 {
        let (fp, bp) = self.products(&self.plus, theta);
        let (fm, bm) = self.products(&self.minus, theta);
        let (f0, b0) = self.zero.eval(theta);
        let (fpi, bpi) = self.pi.eval(theta);
        let num = self.w_plus * (fp + bp) + self.w_minus * (f0 * fpi * fm - b0 * bpi * bm);
        cis(theta * self.obs.offset) * num / self.denom
    }

    /// Positive-parity approximation, normalized to one at `θ = 0`.
    pub fn ppa(&self, theta: f64) -> Complex64 {
        let (fp, _) = self.products(&self.plus, theta);
        cis(theta * self.obs.offset) * fp
    }
}

pub fn char_fn_exact(
    obs: &QuadraticObservable,
    params: &ChainParams,
    thermal: &Thermal,
    theta: f64,
) -> Complex64 {
    ThermalCharFn::new(obs, params, thermal).exact(theta)
}

pub fn char_fn_ppa(
    obs: &QuadraticObservable,
    params: &ChainParams,
    thermal: &Thermal,
    theta: f64,
) -> Complex64 {
    ThermalCharFn::new(obs, params, thermal).ppa(theta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Limit {
    GroundState,
    InfiniteTemperature,
}

/// Closed-form zero- and infinite-temperature characteristic functions of
/// the built-in observables.
pub fn char_fn_limit(
    obs: &QuadraticObservable,
    params: &ChainParams,
    limit: Limit,
    theta: f64,
) -> Result<Complex64> {
    let l = params.length();
    let ks = momentum_grids(params).k_plus;
    let i = Complex64::i();
    match (obs.kind, limit) {
        (ObservableKind::Kinks, Limit::GroundState) => {
            let prod: Complex64 = ks
                .iter()
                .map(|&k| {
                    let t = ModeData::new(k, params).theta;
                    theta.cos() - i * theta.sin() * (k - t).cos()
                })
                .product();
            Ok(cis(l as f64 * theta / 2.0) * prod)
        }
        (ObservableKind::Kinks, Limit::InfiniteTemperature) => {
            let sign = if (l / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let h = theta / 2.0;
            let c = Complex64::new(h.cos().powi(l as i32) + sign * h.sin().powi(l as i32), 0.0);
            Ok(cis(l as f64 * theta / 2.0) * c)
        }
        (ObservableKind::Magnetization, Limit::GroundState) => Ok(ks
            .iter()
            .map(|&k| {
                let t = ModeData::new(k, params).theta;
                (2.0 * theta).cos() - i * (2.0 * theta).sin() * t.cos()
            })
            .product()),
        (ObservableKind::Magnetization, Limit::InfiniteTemperature) => {
            Ok(Complex64::new(theta.cos().powi(l as i32), 0.0))
        }
        (ObservableKind::Custom, _) => Err(Error::UnsupportedObservable(obs.name.clone())),
    }
}

/// Sampled characteristic function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicSamples {
    pub thetas: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// The exact inversion grid `θ_j = 2πj / (N·step)`, `j = 0 … N-1`.
pub fn theta_grid(obs: &QuadraticObservable) -> Vec<f64> {
    let n = obs.support_len();
    let span = (n as i64 * obs.support_step) as f64;
    (0..n)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / span)
        .collect()
}

/// Evaluates `f` on every angle in parallel, keeping the input order.
pub fn sample<F>(thetas: &[f64], f: F) -> CharacteristicSamples
where
    F: Fn(f64) -> Complex64 + Sync,
{
    CharacteristicSamples {
        thetas: thetas.to_vec(),
        values: thetas.par_iter().map(|&t| f(t)).collect(),
    }
}

/// Which characteristic function to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Exact,
    Ppa,
    CoarseGrainedPpa,
    GroundState,
    InfiniteTemperature,
}

/// Samples `variant` on the exact inversion grid of `obs`.
///
/// The coarse-grained variant samples the plain PPA; the coarse graining
/// acts on the inverted distribution.
pub fn sample_variant(
    obs: &QuadraticObservable,
    params: &ChainParams,
    thermal: &Thermal,
    variant: Variant,
) -> Result<CharacteristicSamples> {
    let thetas = theta_grid(obs);
    Ok(match variant {
        Variant::Exact | Variant::Ppa | Variant::CoarseGrainedPpa => {
            let cf = ThermalCharFn::new(obs, params, thermal);
            if variant == Variant::Exact {
                sample(&thetas, |t| cf.exact(t))
            } else {
                sample(&thetas, |t| cf.ppa(t))
            }
        }
        Variant::GroundState | Variant::InfiniteTemperature => {
            let limit = if variant == Variant::GroundState {
                Limit::GroundState
            } else {
                Limit::InfiniteTemperature
            };
            char_fn_limit(obs, params, limit, 0.0)?;
            sample(&thetas, |t| {
                char_fn_limit(obs, params, limit, t).expect("built-in observable")
            })
        }
    })
}

/// Probability distribution on an integer support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub support: Vec<i64>,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn new(support: Vec<i64>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support points but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "support must be strictly increasing".into(),
            ));
        }
        Ok(Self { support, probs })
    }

    pub fn delta(at: i64) -> Self {
        Self {
            support: vec![at],
            probs: vec![1.0],
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn prob_at(&self, n: i64) -> f64 {
        self.support
            .binary_search(&n)
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    /// `Σ_n P(n) e^{iθn}`.
    pub fn characteristic(&self, theta: f64) -> Complex64 {
        self.iter().map(|(n, p)| cis(theta * n as f64) * p).sum()
    }

    /// Largest pointwise difference over the union of both supports.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.iter()
            .map(|(n, p)| (p - other.prob_at(n)).abs())
            .chain(other.iter().map(|(n, p)| (p - self.prob_at(n)).abs()))
            .fold(0.0, f64::max)
    }
}

/// Inverts samples taken on [`theta_grid`] into a distribution over the
/// observable's lattice.
pub fn invert(obs: &QuadraticObservable, samples: &CharacteristicSamples) -> Result<Distribution> {
    let grid = theta_grid(obs);
    let n = grid.len();
    if samples.thetas.len() != n || samples.values.len() != n {
        return Err(Error::WrongThetaGrid(format!(
            "expected {n} samples, got {} angles and {} values",
            samples.thetas.len(),
            samples.values.len()
        )));
    }
    if let Some((j, t)) = samples
        .thetas
        .iter()
        .enumerate()
        .find(|(j, t)| (**t - grid[*j]).abs() > 1e-12)
    {
        return Err(Error::WrongThetaGrid(format!(
            "angle {j} is {t}, expected {}",
            grid[j]
        )));
    }
    let min = obs.support_min as f64;
    let mut buf: Vec<Complex64> = samples
        .thetas
        .iter()
        .zip(&samples.values)
        .map(|(&t, &v)| v * cis(-t * min) / n as f64)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let support = obs.support();
    let mut probs = Vec::with_capacity(n);
    for (&at, z) in support.iter().zip(&buf) {
        if z.im.abs() > IMAG_RESIDUE_TOL {
            return Err(Error::InvalidDistribution(format!(
                "imaginary residue {:e} at {at}",
                z.im
            )));
        }
        let p = z.re;
        if p < -NEGATIVE_CLAMP_TOL {
            return Err(Error::NegativeProbability { at, value: p });
        }
        probs.push(p.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Distribution::new(support, probs)
}

/// Samples and inverts in one step; applies the coarse graining for
/// [`Variant::CoarseGrainedPpa`].
pub fn distribution(
    obs: &QuadraticObservable,
    params: &ChainParams,
    thermal: &Thermal,
    variant: Variant,
) -> Result<Distribution> {
    let d = invert(obs, &sample_variant(obs, params, thermal, variant)?)?;
    if variant == Variant::CoarseGrainedPpa {
        coarse_grained_ppa(&d)
    } else {
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet {
    /// `kappa[m - 1]` is the cumulant of order `m`.
    pub kappa: Vec<f64>,
}

impl CumulantSet {
    pub fn order(&self, m: usize) -> f64 {
        self.kappa[m - 1]
    }
}

/// Cumulants `κ_1 … κ_{m_max}` from the moments of `dist`.
pub fn cumulants(dist: &Distribution, m_max: usize) -> Result<CumulantSet> {
    if !(1..=MAX_CUMULANT_ORDER).contains(&m_max) {
        return Err(Error::CumulantOrder(m_max));
    }
    let total = dist.total();
    let mean = dist.mean() / total;
    // central moments; the shift only changes κ_1
    let mu: Vec<f64> = (0..=m_max)
        .map(|m| {
            dist.iter()
                .map(|(n, p)| p * (n as f64 - mean).powi(m as i32))
                .sum::<f64>()
                / total
        })
        .collect();
    let mut kappa = vec![0.0; m_max + 1];
    for n in 2..=m_max {
        let mut k = mu[n];
        for m in 2..n {
            k -= binomial(n - 1, m - 1) * kappa[m] * mu[n - m];
        }
        kappa[n] = k;
    }
    kappa[1] = mean;
    Ok(CumulantSet {
        kappa: kappa[1..].to_vec(),
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Moves half of each odd-`n` probability onto its even neighbours, which
/// restores the pairwise creation of kinks that the PPA violates.
pub fn coarse_grained_ppa(ppa: &Distribution) -> Result<Distribution> {
    if ppa.support.windows(2).any(|w| w[1] - w[0] != 1) {
        return Err(Error::InvalidDistribution(
            "coarse graining needs a unit-step support".into(),
        ));
    }
    let mut probs: Vec<f64> = ppa
        .support
        .iter()
        .map(|&n| {
            if n.rem_euclid(2) == 1 {
                0.0
            } else {
                ppa.prob_at(n) + 0.5 * (ppa.prob_at(n - 1) + ppa.prob_at(n + 1))
            }
        })
        .collect();
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDistribution(
            "no weight left on even support points".into(),
        ));
    }
    for p in &mut probs {
        *p /= total;
    }
    Distribution::new(ppa.support.clone(), probs)
}
