//! Exact, positive-parity and two-level partition functions.
//!
//! The exact partition function of the periodic chain is
//!
//! ```text
//! Z = ½ (Z_F+ + Z_B+ + Z_F- - Z_B-)
//! Z_F± = Π_{k ∈ K±} 2 cosh(β ε_k / 2),   Z_B± = Π_{k ∈ K±} 2 sinh(β ε_k / 2)
//! ```
//!
//! where `K-` includes the signed unpaired energies `ε_0 = 2(g-1)` and
//! `ε_π = 2(g+1)`. Each sector is evaluated as `½ Z_F (1 ± s T)` with
//! `T = Π |tanh(β ε_k / 2)|`, which keeps the difference `Z_F- - Z_B-`
//! accurate even when it is many orders of magnitude below either term.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logscale::{
    ln_2cosh, ln_abs_2sinh, ln_neg_ln_tanh, log_sum_exp, LogScaledReal,
};
use crate::model::{
    dispersion, ground_energies, momentum_grids, special_mode_energy, ChainParams, SpecialMode,
    Thermal,
};

/// Numerical-quality markers attached to every [`PartitionBreakdown`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityFlags {
    /// `Z_F- - Z_B-` could not be resolved and was returned as zero.
    pub cancellation: bool,
    /// A logarithm came out non-finite.
    pub overflow: bool,
}

impl QualityFlags {
    pub fn any(&self) -> bool {
        self.cancellation || self.overflow
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionBreakdown {
    pub z_f_plus: LogScaledReal,
    pub z_f_minus: LogScaledReal,
    pub z_b_plus: LogScaledReal,
    pub z_b_minus: LogScaledReal,
    /// `tr[Π+ e^{-βH}] = ½ (Z_F+ + Z_B+)`.
    pub z_plus: LogScaledReal,
    /// `tr[Π- e^{-βH}] = ½ (Z_F- - Z_B-)`.
    pub z_minus: LogScaledReal,
    pub z_exact: LogScaledReal,
    pub z_ppa: LogScaledReal,
    /// Only available for the Ising chain.
    pub z_two_level: Option<LogScaledReal>,
    pub flags: QualityFlags,
}

impl PartitionBreakdown {
    pub fn ln_z(&self) -> f64 {
        self.z_exact.ln_abs()
    }
}

/// Log-domain products of one parity sector.
struct SectorProducts {
    ln_f: f64,
    ln_b: f64,
    sign_b: i8,
    /// `ln(-ln T)`, with `T = |Z_B| / Z_F`.
    ln_neg_ln_t: f64,
}

impl SectorProducts {
    /// `factors` yields `(x, multiplicity)` with `x = β ε / 2`.
    fn new(factors: impl Iterator<Item = (f64, u32)>) -> Self {
        let mut ln_f = 0.0;
        let mut ln_b = 0.0;
        let mut sign_b: i8 = 1;
        let mut t_terms = Vec::new();
        for (x, mult) in factors {
            let m = f64::from(mult);
            ln_f += m * ln_2cosh(x);
            ln_b += m * ln_abs_2sinh(x);
            if x == 0.0 {
                sign_b = 0;
            } else if x < 0.0 && mult % 2 == 1 {
                sign_b = -sign_b;
            }
            t_terms.push(m.ln() + ln_neg_ln_tanh(x));
        }
        Self {
            ln_f,
            ln_b,
            sign_b,
            ln_neg_ln_t: log_sum_exp(t_terms),
        }
    }

    /// `ln(½ Z_F (1 + s T))` and whether the combination was unresolvable.
    fn ln_half_combination(&self, s: i8) -> (f64, bool) {
        let base = self.ln_f - std::f64::consts::LN_2;
        let y = self.ln_neg_ln_t.exp();
        let ln_factor = match s {
            0 => 0.0,
            1 => (-y).exp().ln_1p(),
            _ => {
                if self.ln_neg_ln_t < -20.0 {
                    // 1 - e^{-y} = y (1 - y/2 + ...)
                    self.ln_neg_ln_t + (-0.5 * y).ln_1p()
                } else {
                    (-(-y).exp_m1()).ln()
                }
            }
        };
        let unresolved = s < 0 && ln_factor == f64::NEG_INFINITY;
        (base + ln_factor, unresolved)
    }
}

fn positive_sector(params: &ChainParams, thermal: &Thermal) -> SectorProducts {
    let b = thermal.beta();
    let grid = momentum_grids(params);
    SectorProducts::new(
        grid.k_plus
            .into_iter()
            .map(|k| (b * dispersion(k, params) / 2.0, 2)),
    )
}

fn negative_sector(params: &ChainParams, thermal: &Thermal) -> SectorProducts {
    let b = thermal.beta();
    let grid = momentum_grids(params);
    let specials = [SpecialMode::Zero, SpecialMode::Pi]
        .into_iter()
        .map(|m| (b * special_mode_energy(m, params) / 2.0, 1));
    SectorProducts::new(
        grid.k_minus
            .into_iter()
            .map(|k| (b * dispersion(k, params) / 2.0, 2))
            .chain(specials),
    )
}

/// Full breakdown of the exact partition function.
pub fn z_exact(params: &ChainParams, thermal: &Thermal) -> PartitionBreakdown {
    let plus = positive_sector(params, thermal);
    let minus = negative_sector(params, thermal);

    let (ln_zp, _) = plus.ln_half_combination(plus.sign_b);
    let (ln_zm, cancellation) = minus.ln_half_combination(-minus.sign_b);
    let z_plus = LogScaledReal::from_ln(ln_zp);
    let z_minus = LogScaledReal::from_ln(ln_zm);
    let z_exact = z_plus + z_minus;

    let z_f_plus = LogScaledReal::from_ln(plus.ln_f);
    let two_level = z_two_level(params, thermal).ok();

    let logs = [plus.ln_f, minus.ln_f, ln_zp, z_exact.ln_abs()];
    let overflow = logs.iter().any(|x| !x.is_finite())
        || [plus.ln_b, minus.ln_b, ln_zm]
            .iter()
            .any(|x| x.is_nan() || *x == f64::INFINITY);

    PartitionBreakdown {
        z_f_plus,
        z_f_minus: LogScaledReal::from_ln(minus.ln_f),
        z_b_plus: LogScaledReal::from_parts(plus.sign_b, plus.ln_b),
        z_b_minus: LogScaledReal::from_parts(minus.sign_b, minus.ln_b),
        z_plus,
        z_minus,
        z_exact,
        z_ppa: z_f_plus,
        z_two_level: two_level,
        flags: QualityFlags {
            cancellation,
            overflow,
        },
    }
}

/// Positive-parity approximation `Π_{k ∈ K+} 2 cosh(β ε_k / 2)`.
pub fn z_ppa(params: &ChainParams, thermal: &Thermal) -> LogScaledReal {
    LogScaledReal::from_ln(positive_sector(params, thermal).ln_f)
}

/// `e^{-β E+} + e^{-β E-}` built from the two sector ground energies.
pub fn z_two_level(params: &ChainParams, thermal: &Thermal) -> Result<LogScaledReal> {
    params.require_ising("two-level approximation")?;
    let e = ground_energies(params);
    let b = thermal.beta();
    Ok(LogScaledReal::from_ln(log_sum_exp([-b * e.plus, -b * e.minus])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approximation {
    Ppa,
    TwoLevel,
}

/// `Z_approx / Z_exact` on a `β × g` grid (rows follow `betas`, columns `fields`).
///
/// Length and anisotropy are taken from `params`; its field is ignored.
pub fn ratio_map(
    params: &ChainParams,
    betas: &[f64],
    fields: &[f64],
    which: Approximation,
) -> Result<Vec<Vec<f64>>> {
    if betas.is_empty() || fields.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if which == Approximation::TwoLevel {
        params.require_ising("two-level approximation")?;
    }
    let cells: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| fields.iter().map(move |&g| (b, g)))
        .collect();
    let ratios = cells
        .par_iter()
        .map(|&(b, g)| {
            let p = ChainParams::new(params.length(), g, params.gamma())?;
            let th = Thermal::new(b)?;
            let exact = z_exact(&p, &th).z_exact;
            let approx = match which {
                Approximation::Ppa => z_ppa(&p, &th),
                Approximation::TwoLevel => z_two_level(&p, &th)?,
            };
            Ok(approx.ratio(exact))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ratios.chunks(fields.len()).map(<[f64]>::to_vec).collect())
}
