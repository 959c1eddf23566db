//! Chain parameters, momentum grids and the single-mode quantities that every
//! other module builds on.
//!
//! Conventions: `J = 1`, even chain length, periodic boundary conditions.
//! Positive-parity momenta are `k+ = {π/L, 3π/L, …, (L-1)π/L}`; negative-parity
//! momenta are `k- = {2π/L, 4π/L, …, (L-2)π/L}` plus the unpaired modes `0`
//! and `π`. Each paired mode `k` lives on the four-dimensional space
//! `{|00>, |11>, |01>, |10>}` of `(k, -k)` occupations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logscale::{ln_2cosh, ln_abs_2sinh, LogScaledReal};

/// Below this quasiparticle energy the Bogoliubov angle is fixed to zero.
pub const GAPLESS_EPS: f64 = 1e-14;

/// Physical knobs of the XY chain `H = -Σ [(1+γ)/2 XX + (1-γ)/2 YY + g Z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    length: usize,
    field: f64,
    gamma: f64,
}

impl ChainParams {
    pub fn new(length: usize, field: f64, gamma: f64) -> Result<Self> {
        if length < 2 || length % 2 != 0 {
            return Err(Error::InvalidChainLength(length));
        }
        if !field.is_finite() || field < 0.0 {
            return Err(Error::InvalidField(field));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidAnisotropy(gamma));
        }
        Ok(Self {
            length,
            field,
            gamma,
        })
    }

    /// Transverse-field Ising chain (`γ = 1`).
    pub fn ising(length: usize, field: f64) -> Result<Self> {
        Self::new(length, field, 1.0)
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_ising(&self) -> bool {
        self.gamma == 1.0
    }

    pub(crate) fn require_ising(&self, what: &'static str) -> Result<()> {
        if self.is_ising() {
            Ok(())
        } else {
            Err(Error::RequiresIsing {
                what,
                gamma: self.gamma,
            })
        }
    }
}

/// Inverse temperature in units of `1/J`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thermal {
    beta: f64,
}

impl Thermal {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(Self { beta })
    }

    pub fn infinite_temperature() -> Self {
        Self { beta: 0.0 }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// The two unpaired momenta of the negative-parity sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialMode {
    Zero,
    Pi,
}

/// Positive half-grids of both parity sectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    /// `k+`, `L/2` entries.
    pub k_plus: Vec<f64>,
    /// `k-`, `L/2 - 1` entries; `0` and `π` are implicit members of this sector.
    pub k_minus: Vec<f64>,
}

impl MomentumGrid {
    /// Number of momenta in the full `K+` set (`±k` for every `k` in `k+`).
    pub fn full_plus_len(&self) -> usize {
        2 * self.k_plus.len()
    }

    /// Number of momenta in the full `K-` set, including `0` and `π`.
    pub fn full_minus_len(&self) -> usize {
        2 * self.k_minus.len() + 2
    }

    /// The negative-parity sector always carries the unpaired `0` and `π`.
    pub fn special_modes(&self) -> [SpecialMode; 2] {
        [SpecialMode::Zero, SpecialMode::Pi]
    }
}

pub fn momentum_grids(params: &ChainParams) -> MomentumGrid {
    let l = params.length();
    let lf = l as f64;
    let k_plus = (0..l / 2).map(|m| PI * (2 * m + 1) as f64 / lf).collect();
    let k_minus = (1..l / 2).map(|m| 2.0 * PI * m as f64 / lf).collect();
    MomentumGrid { k_plus, k_minus }
}

/// Quasiparticle energy `ε_k = 2 sqrt((g - cos k)^2 + γ^2 sin^2 k)`, always `>= 0`.
pub fn dispersion(k: f64, params: &ChainParams) -> f64 {
    2.0 * (params.field() - k.cos()).hypot(params.gamma() * k.sin())
}

/// Signed energy of an unpaired mode: `2(g - 1)` at `k = 0`, `2(g + 1)` at `k = π`.
///
/// `cosh` of half this value is insensitive to the sign; `sinh` is not, which
/// is what makes the boundary term of the negative sector change sign at `g = 1`.
pub fn special_mode_energy(mode: SpecialMode, params: &ChainParams) -> f64 {
    match mode {
        SpecialMode::Zero => 2.0 * (params.field() - 1.0),
        SpecialMode::Pi => 2.0 * (params.field() + 1.0),
    }
}

/// Bogoliubov angle with `cos ϑ = 2(cos k - g)/ε`, `sin ϑ = 2γ sin k/ε`.
pub fn bogoliubov_angle(k: f64, params: &ChainParams) -> f64 {
    if dispersion(k, params) < GAPLESS_EPS {
        return 0.0;
    }
    (2.0 * params.gamma() * k.sin()).atan2(2.0 * (k.cos() - params.field()))
}

/// Per-mode data for a paired momentum `0 < k < π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeData {
    pub k: f64,
    pub epsilon: f64,
    pub theta: f64,
}

impl ModeData {
    pub fn new(k: f64, params: &ChainParams) -> Self {
        Self {
            k,
            epsilon: dispersion(k, params),
            theta: bogoliubov_angle(k, params),
        }
    }

    pub fn u(&self) -> f64 {
        (self.theta / 2.0).cos()
    }

    pub fn v(&self) -> f64 {
        (self.theta / 2.0).sin()
    }
}

/// Traces of a paired mode's Gibbs block `exp(-β h_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeTraces {
    /// `tr ρ_k = 4 cosh^2(βε/2)`.
    pub full: LogScaledReal,
    /// `tr ρ_k^(p) - tr ρ_k^(n) = 4 sinh^2(βε/2)`.
    pub even_minus_odd: LogScaledReal,
}

pub fn mode_gibbs_traces(k: f64, params: &ChainParams, thermal: &Thermal) -> ModeTraces {
    let half = thermal.beta() * dispersion(k, params) / 2.0;
    ModeTraces {
        full: LogScaledReal::from_ln(2.0 * ln_2cosh(half)),
        even_minus_odd: LogScaledReal::from_ln(2.0 * ln_abs_2sinh(half)),
    }
}

/// Diagonal Gibbs weights of one unpaired mode, stored as logarithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialModeGibbs {
    /// `ln` of the weight on the empty (even) state.
    pub ln_vacuum: f64,
    /// `ln` of the weight on the occupied (odd) state.
    pub ln_occupied: f64,
}

impl SpecialModeGibbs {
    pub fn vacuum(&self) -> f64 {
        self.ln_vacuum.exp()
    }

    pub fn occupied(&self) -> f64 {
        self.ln_occupied.exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroPiGibbs {
    pub zero: SpecialModeGibbs,
    pub pi: SpecialModeGibbs,
}

/// Gibbs weights of the `0` and `π` modes.
///
/// The mode Hamiltonians are `(g ∓ 1)(2n - 1)`, so the vacuum carries
/// `exp(+β(g ∓ 1))` and the occupied state `exp(-β(g ∓ 1))`.
pub fn zero_pi_gibbs(params: &ChainParams, thermal: &Thermal) -> ZeroPiGibbs {
    let b = thermal.beta();
    let g = params.field();
    ZeroPiGibbs {
        zero: SpecialModeGibbs {
            ln_vacuum: b * (g - 1.0),
            ln_occupied: -b * (g - 1.0),
        },
        pi: SpecialModeGibbs {
            ln_vacuum: b * (g + 1.0),
            ln_occupied: -b * (g + 1.0),
        },
    }
}

/// Lowest energies within each parity sector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorGroundEnergies {
    pub plus: f64,
    pub minus: f64,
}

pub fn ground_energies(params: &ChainParams) -> SectorGroundEnergies {
    let grid = momentum_grids(params);
    let sum = |ks: &[f64]| -> f64 { ks.iter().map(|&k| dispersion(k, params)).sum() };
    SectorGroundEnergies {
        plus: -sum(&grid.k_plus),
        minus: -sum(&grid.k_minus) - 2.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaps {
    /// `E- - E+`, the splitting between the two sector ground states.
    pub delta: f64,
    /// Single-particle excitation energy `4 sqrt(g^2 - 2g cos(π/L) + 1)`.
    pub single_particle: f64,
}

/// Exact gaps of the transverse-field Ising chain.
pub fn gaps(params: &ChainParams) -> Result<Gaps> {
    params.require_ising("gaps")?;
    let e = ground_energies(params);
    let g = params.field();
    let c = (PI / params.length() as f64).cos();
    Ok(Gaps {
        delta: e.minus - e.plus,
        single_particle: 4.0 * (g * g - 2.0 * g * c + 1.0).sqrt(),
    })
}
