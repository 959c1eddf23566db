//! Oracle-versus-analytic comparison grid.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fcs::{distribution, kink_observable, magnetization_observable, ThermalCharFn, Variant};
use crate::model::{ChainParams, Thermal};
use crate::oracle::{
    build_hamiltonian, build_kink_operator, build_magnetization_operator, parity_spectrum,
    thermal_fcs,
};
use crate::partition::{z_exact, PartitionBreakdown};

pub const PARTITION_TOL: f64 = 1e-9;
pub const DISTRIBUTION_TOL: f64 = 1e-8;
pub const CHAR_FN_TOL: f64 = 1e-8;
pub const ODD_KINK_TOL: f64 = 1e-10;

/// Analytic partition function under test.
pub type PartitionFn = fn(&ChainParams, &Thermal) -> PartitionBreakdown;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub lengths: Vec<usize>,
    pub gammas: Vec<f64>,
    pub fields: Vec<f64>,
    pub betas: Vec<f64>,
    /// Random angles per point for the characteristic-function comparison.
    pub angles: usize,
    pub seed: u64,
}

impl CheckConfig {
    /// Even lengths `2..=l_max` on the default parameter grid.
    pub fn up_to(l_max: usize, seed: u64) -> Self {
        Self {
            lengths: (2..=l_max).step_by(2).collect(),
            gammas: vec![0.0, 0.5, 1.0],
            fields: vec![0.5, 1.0, 2.0],
            betas: vec![0.1, 1.0, 5.0],
            angles: 32,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckKind {
    Partition,
    PartitionPlus,
    PartitionMinus,
    KinkDistribution,
    MagnetizationDistribution,
    CharacteristicFunction,
    OddKinks,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Partition,
        CheckKind::PartitionPlus,
        CheckKind::PartitionMinus,
        CheckKind::KinkDistribution,
        CheckKind::MagnetizationDistribution,
        CheckKind::CharacteristicFunction,
        CheckKind::OddKinks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Partition => "partition",
            CheckKind::PartitionPlus => "partition_plus",
            CheckKind::PartitionMinus => "partition_minus",
            CheckKind::KinkDistribution => "kink_distribution",
            CheckKind::MagnetizationDistribution => "magnetization_distribution",
            CheckKind::CharacteristicFunction => "characteristic_function",
            CheckKind::OddKinks => "odd_kinks",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            CheckKind::Partition | CheckKind::PartitionPlus | CheckKind::PartitionMinus => {
                PARTITION_TOL
            }
            CheckKind::KinkDistribution | CheckKind::MagnetizationDistribution => {
                DISTRIBUTION_TOL
            }
            CheckKind::CharacteristicFunction => CHAR_FN_TOL,
            CheckKind::OddKinks => ODD_KINK_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckPoint {
    pub length: usize,
    pub field: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl fmt::Display for CheckPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "L={} g={} gamma={} beta={}",
            self.length, self.field, self.gamma, self.beta
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: CheckKind,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub worst: Option<CheckPoint>,
    pub samples: usize,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub records: Vec<CheckRecord>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(CheckRecord::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed())
    }

    pub fn record(&self, check: CheckKind) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.check == check)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            write!(
                f,
                "{:<28} max_dev={:.3e} tol={:.0e} n={:<5} {}",
                r.check.name(),
                r.max_deviation,
                r.tolerance,
                r.samples,
                if r.passed() { "ok" } else { "FAIL" }
            )?;
            if let Some(w) = r.worst {
                write!(f, " worst at {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want.abs()
    }
}

/// Relative error of two positive log-scaled values, robust to huge magnitudes.
fn rel_err_ln(got: f64, want: f64) -> f64 {
    if got == want {
        return 0.0;
    }
    (got - want).exp_m1().abs()
}

type Deviation = (CheckKind, f64, CheckPoint);

fn check_cell(
    cell_index: u64,
    l: usize,
    gamma: f64,
    g: f64,
    cfg: &CheckConfig,
    z_fn: PartitionFn,
) -> Result<Vec<Deviation>> {
    let params = ChainParams::new(l, g, gamma)?;
    let h = build_hamiltonian(&params)?;
    let spectrum = parity_spectrum(&h)?;
    let kinks_op = build_kink_operator(l)?;
    let mag_op = build_magnetization_operator(l)?;
    let kinks = kink_observable(&params);
    let mag = magnetization_observable(&params);
    let mut out = Vec::new();
    for (bi, &beta) in cfg.betas.iter().enumerate() {
        let th = Thermal::new(beta)?;
        let at = CheckPoint {
            length: l,
            field: g,
            gamma,
            beta,
        };
        let z = z_fn(&params, &th);
        let (zp, zm) = spectrum.sector_z(&th);
        out.push((CheckKind::Partition, rel_err_ln(z.ln_z(), (zp + zm).ln_abs()), at));
        out.push((CheckKind::PartitionPlus, rel_err_ln(z.z_plus.ln_abs(), zp.ln_abs()), at));
        out.push((CheckKind::PartitionMinus, rel_err(z.z_minus.ratio(zm), 1.0), at));

        let dk_oracle = thermal_fcs(&kinks_op, &h, &th)?;
        let dk = distribution(&kinks, &params, &th, Variant::Exact)?;
        out.push((CheckKind::KinkDistribution, dk.sup_distance(&dk_oracle), at));
        let odd = dk
            .iter()
            .filter(|(n, _)| n % 2 != 0)
            .map(|(_, p)| p)
            .fold(0.0, f64::max);
        out.push((CheckKind::OddKinks, odd, at));

        let dm_oracle = thermal_fcs(&mag_op, &h, &th)?;
        let dm = distribution(&mag, &params, &th, Variant::Exact)?;
        out.push((CheckKind::MagnetizationDistribution, dm.sup_distance(&dm_oracle), at));

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(cell_index * cfg.betas.len() as u64 + bi as u64);
        let ck = ThermalCharFn::new(&kinks, &params, &th);
        let cm = ThermalCharFn::new(&mag, &params, &th);
        let mut dev: f64 = 0.0;
        for _ in 0..cfg.angles {
            let t = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            dev = dev.max((ck.exact(t) - dk_oracle.characteristic(t)).norm());
            dev = dev.max((cm.exact(t) - dm_oracle.characteristic(t)).norm());
        }
        out.push((CheckKind::CharacteristicFunction, dev, at));
    }
    Ok(out)
}

/// Runs the comparison grid with the library's own partition function.
pub fn run_oracle_check(cfg: &CheckConfig) -> Result<CheckReport> {
    run_oracle_check_with(cfg, z_exact)
}

/// Runs the comparison grid against a caller-supplied partition function.
pub fn run_oracle_check_with(cfg: &CheckConfig, z_fn: PartitionFn) -> Result<CheckReport> {
    let cells: Vec<(usize, f64, f64)> = cfg
        .lengths
        .iter()
        .flat_map(|&l| {
            cfg.gammas
                .iter()
                .flat_map(move |&gm| cfg.fields.iter().map(move |&g| (l, gm, g)))
        })
        .collect();
    let results = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(l, gm, g))| check_cell(i as u64, l, gm, g, cfg, z_fn))
        .collect::<Result<Vec<_>>>()?;

    let records = CheckKind::ALL
        .iter()
        .map(|&kind| {
            let mut rec = CheckRecord {
                check: kind,
                max_deviation: 0.0,
                tolerance: kind.tolerance(),
                worst: None,
                samples: 0,
            };
            for &(k, dev, at) in results.iter().flatten() {
                if k != kind {
                    continue;
                }
                rec.samples += 1;
                let dev = if dev.is_nan() { f64::INFINITY } else { dev };
                if rec.worst.is_none() || dev > rec.max_deviation {
                    rec.max_deviation = dev;
                    rec.worst = Some(at);
                }
            }
            rec
        })
        .collect();
    Ok(CheckReport { records })
}

/// Deliberately broken partition functions for mutation testing.
pub mod faults {
    use super::*;

    /// Adds `Z_B-` instead of subtracting it.
    pub fn boundary_sign(params: &ChainParams, thermal: &Thermal) -> PartitionBreakdown {
        let mut z = z_exact(params, thermal);
        z.z_minus = (z.z_f_minus + z.z_b_minus).scale_pow2(-1);
        z.z_exact = z.z_plus + z.z_minus;
        z
    }
}
