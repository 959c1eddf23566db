//! Parity-restricted tensor products of per-mode operators.
//!
//! Every mode space splits into an even and an odd occupation sector. For a
//! list of parity-preserving mode operators `O_1 … O_n`, the restricted
//! products are defined recursively:
//!
//! ```text
//! P(O_1)         = O_1^(p)              N(O_1)         = O_1^(n)
//! P(O_1..O_{n+1}) = P(..) ⊗ O^(p) + N(..) ⊗ O^(n)
//! N(O_1..O_{n+1}) = N(..) ⊗ O^(p) + P(..) ⊗ O^(n)
//! ```
//!
//! `P` keeps the states with an even total number of excitations and `N` the
//! odd ones. Their traces only need the per-mode traces:
//!
//! ```text
//! tr P = ½ (Π tr O_i + Π (tr O_i^(p) - tr O_i^(n)))
//! tr N = ½ (Π tr O_i - Π (tr O_i^(p) - tr O_i^(n)))
//! ```
//!
//! [`dense_restricted`] builds the operators explicitly and serves as the
//! brute-force reference for the closed-form traces.
//!
//! Basis order inside each block is even slots first: `|00>, |11>, |01>, |10>`
//! for four-dimensional blocks and `|0>, |1>` for two-dimensional ones.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tensor-product dimension [`dense_restricted`] will build.
pub const MAX_DENSE_DIM: usize = 4096;

/// Magnitudes outside `[1e-150, 1e150]` switch trace products to log form.
const LOG_SWITCH: f64 = 1e150;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    /// Even total number of excitations.
    P,
    /// Odd total number of excitations.
    N,
}

impl Sector {
    fn sign(self) -> f64 {
        match self {
            Sector::P => 1.0,
            Sector::N => -1.0,
        }
    }
}

/// A parity-preserving operator on one mode, split into even and odd parts.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedBlock {
    even: CMatrix,
    odd: CMatrix,
}

fn even_slots(dim: usize) -> usize {
    dim / 2
}

impl GradedBlock {
    /// Validates that `even` vanishes outside the even slots and `odd`
    /// outside the odd slots.
    pub fn from_parts(even: CMatrix, odd: CMatrix) -> Result<Self> {
        let dim = even.nrows();
        if !(dim == 2 || dim == 4) {
            return Err(Error::InvalidBlockDim(dim));
        }
        if even.shape() != (dim, dim) || odd.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(even.nrows(), odd.nrows()));
        }
        let ne = even_slots(dim);
        for i in 0..dim {
            for j in 0..dim {
                let in_even = i < ne && j < ne;
                let in_odd = i >= ne && j >= ne;
                if (!in_even && even[(i, j)] != Complex64::ZERO)
                    || (!in_odd && odd[(i, j)] != Complex64::ZERO)
                {
                    return Err(Error::InvalidDistribution(format!(
                        "graded block has weight outside its sector at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { even, odd })
    }

    /// Splits a full matrix into its even and odd diagonal blocks, dropping
    /// any parity-mixing entries.
    pub fn from_full(full: &CMatrix) -> Result<Self> {
        let dim = full.nrows();
        if !(dim == 2 || dim == 4) || full.ncols() != dim {
            return Err(Error::InvalidBlockDim(dim));
        }
        let ne = even_slots(dim);
        let even = CMatrix::from_fn(dim, dim, |i, j| {
            if i < ne && j < ne {
                full[(i, j)]
            } else {
                Complex64::ZERO
            }
        });
        let odd = CMatrix::from_fn(dim, dim, |i, j| {
            if i >= ne && j >= ne {
                full[(i, j)]
            } else {
                Complex64::ZERO
            }
        });
        Ok(Self { even, odd })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_full(&CMatrix::identity(dim, dim))
    }

    /// Random complex graded block with entries uniform in the unit square.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let full = CMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        Self::from_full(&full)
    }

    pub fn dim(&self) -> usize {
        self.even.nrows()
    }

    pub fn even_part(&self) -> &CMatrix {
        &self.even
    }

    pub fn odd_part(&self) -> &CMatrix {
        &self.odd
    }

    pub fn full(&self) -> CMatrix {
        &self.even + &self.odd
    }

    pub fn traces(&self) -> GradedTraces {
        GradedTraces::new(self.even.trace(), self.odd.trace())
    }

    /// Product of two graded blocks; the result is again graded.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            even: &self.even * &rhs.even,
            odd: &self.odd * &rhs.odd,
        }
    }

    /// Matrix exponential of the full block, split back into its parts.
    pub fn exp(&self) -> Self {
        Self::from_full(&self.full().exp()).expect("exp preserves the block shape")
    }
}

/// Per-mode traces of the full operator and of its two parity parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedTraces {
    pub tr_full: Complex64,
    pub tr_even: Complex64,
    pub tr_odd: Complex64,
}

impl GradedTraces {
    pub fn new(tr_even: Complex64, tr_odd: Complex64) -> Self {
        Self {
            tr_full: tr_even + tr_odd,
            tr_even,
            tr_odd,
        }
    }

    pub fn even_minus_odd(&self) -> Complex64 {
        self.tr_even - self.tr_odd
    }
}

/// Complex product kept as `ln|z|` plus a unit phase.
#[derive(Clone, Copy, Debug)]
struct LogProduct {
    ln_abs: f64,
    phase: Complex64,
}

impl LogProduct {
    fn of<I: IntoIterator<Item = Complex64>>(factors: I) -> Self {
        let mut ln_abs = 0.0;
        let mut phase = Complex64::new(1.0, 0.0);
        for z in factors {
            let r = z.norm();
            if r == 0.0 {
                return Self {
                    ln_abs: f64::NEG_INFINITY,
                    phase: Complex64::ZERO,
                };
            }
            ln_abs += r.ln();
            phase *= z / r;
        }
        Self { ln_abs, phase }
    }
}

fn needs_log_path(traces: &[GradedTraces]) -> bool {
    traces.iter().any(|t| {
        [t.tr_full, t.even_minus_odd()].iter().any(|z| {
            let r = z.norm();
            r > LOG_SWITCH || (r != 0.0 && r < 1.0 / LOG_SWITCH)
        })
    })
}

/// `tr P(⊗ O_i)` or `tr N(⊗ O_i)` from per-mode traces.
pub fn restricted_trace(traces: &[GradedTraces], sector: Sector) -> Result<Complex64> {
    if traces.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    let s = sector.sign();
    if !needs_log_path(traces) {
        let full: Complex64 = traces.iter().map(|t| t.tr_full).product();
        let diff: Complex64 = traces.iter().map(|t| t.even_minus_odd()).product();
        return Ok(0.5 * (full + s * diff));
    }
    let full = LogProduct::of(traces.iter().map(|t| t.tr_full));
    let diff = LogProduct::of(traces.iter().map(|t| t.even_minus_odd()));
    let anchor = full.ln_abs.max(diff.ln_abs);
    if anchor == f64::NEG_INFINITY {
        return Ok(Complex64::ZERO);
    }
    let rel = |p: LogProduct| p.phase * (p.ln_abs - anchor).exp();
    let scaled = 0.5 * (rel(full) + s * rel(diff));
    Ok(scaled * anchor.exp())
}

pub fn restricted_trace_p(blocks: &[GradedBlock]) -> Result<Complex64> {
    let traces: Vec<_> = blocks.iter().map(GradedBlock::traces).collect();
    restricted_trace(&traces, Sector::P)
}

pub fn restricted_trace_n(blocks: &[GradedBlock]) -> Result<Complex64> {
    let traces: Vec<_> = blocks.iter().map(GradedBlock::traces).collect();
    restricted_trace(&traces, Sector::N)
}

fn check_dense_dim(dims: impl Iterator<Item = usize>) -> Result<usize> {
    let mut total = 1usize;
    for d in dims {
        total = total.saturating_mul(d);
        if total > MAX_DENSE_DIM {
            return Err(Error::DimensionTooLarge {
                dim: total,
                max: MAX_DENSE_DIM,
            });
        }
    }
    Ok(total)
}

/// Explicit dense `P(⊗ O_i)` or `N(⊗ O_i)` on the full tensor-product space.
pub fn dense_restricted(blocks: &[GradedBlock], sector: Sector) -> Result<CMatrix> {
    let (first, rest) = blocks.split_first().ok_or(Error::EmptyBlocks)?;
    check_dense_dim(blocks.iter().map(GradedBlock::dim))?;
    let mut p = first.even.clone();
    let mut n = first.odd.clone();
    for b in rest {
        let next_p = p.kronecker(&b.even) + n.kronecker(&b.odd);
        let next_n = n.kronecker(&b.even) + p.kronecker(&b.odd);
        p = next_p;
        n = next_n;
    }
    Ok(match sector {
        Sector::P => p,
        Sector::N => n,
    })
}

/// Restricted mode sum `Σ_i R(I ⊗ … ⊗ A_i ⊗ … ⊗ I)`, the generator whose
/// exponential is the restricted product of the block exponentials.
pub fn dense_mode_sum(blocks: &[GradedBlock], sector: Sector) -> Result<CMatrix> {
    let dim = check_dense_dim(blocks.iter().map(GradedBlock::dim))?;
    if blocks.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    let identities = blocks
        .iter()
        .map(|b| GradedBlock::identity(b.dim()))
        .collect::<Result<Vec<_>>>()?;
    let mut total = CMatrix::zeros(dim, dim);
    for (i, b) in blocks.iter().enumerate() {
        let mut ops = identities.clone();
        ops[i] = b.clone();
        total += dense_restricted(&ops, sector)?;
    }
    Ok(total)
}

/// Orthogonal projector onto a sector of the tensor product of blocks with
/// the given dimensions.
pub fn sector_projector(dims: &[usize], sector: Sector) -> Result<CMatrix> {
    let identities = dims
        .iter()
        .map(|&d| GradedBlock::identity(d))
        .collect::<Result<Vec<_>>>()?;
    dense_restricted(&identities, sector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn empty_list_is_rejected() {
        assert_eq!(restricted_trace_p(&[]), Err(Error::EmptyBlocks));
        assert_eq!(dense_restricted(&[], Sector::N).unwrap_err(), Error::EmptyBlocks);
    }

    #[test]
    fn single_block_base_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = GradedBlock::random(4, &mut rng).unwrap();
        let t = b.traces();
        assert!((restricted_trace_p(&[b.clone()]).unwrap() - t.tr_even).norm() < 1e-14);
        assert!((restricted_trace_n(&[b.clone()]).unwrap() - t.tr_odd).norm() < 1e-14);
        assert_eq!(dense_restricted(&[b.clone()], Sector::P).unwrap(), *b.even_part());
        assert_eq!(dense_restricted(&[b.clone()], Sector::N).unwrap(), *b.odd_part());
    }

    #[test]
    fn identity_blocks_count_sector_dimension() {
        for n in 1..=5 {
            let blocks = vec![GradedBlock::identity(4).unwrap(); n];
            let expect = c(2f64.powi(2 * n as i32 - 1));
            assert_eq!(restricted_trace_p(&blocks).unwrap(), expect);
            assert_eq!(restricted_trace_n(&blocks).unwrap(), expect);
        }
    }

    #[test]
    fn sectors_sum_to_full_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let blocks: Vec<_> = (0..5)
            .map(|i| GradedBlock::random(if i == 2 { 2 } else { 4 }, &mut rng).unwrap())
            .collect();
        let full: Complex64 = blocks.iter().map(|b| b.traces().tr_full).product();
        let sum = restricted_trace_p(&blocks).unwrap() + restricted_trace_n(&blocks).unwrap();
        assert!((sum - full).norm() < 1e-12 * full.norm());
    }

    #[test]
    fn zero_odd_parts_give_plain_tensor_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let blocks: Vec<_> = (0..3)
            .map(|_| {
                let b = GradedBlock::random(4, &mut rng).unwrap();
                GradedBlock::from_parts(b.even_part().clone(), CMatrix::zeros(4, 4)).unwrap()
            })
            .collect();
        let plain = blocks[0]
            .even_part()
            .kronecker(blocks[1].even_part())
            .kronecker(blocks[2].even_part());
        assert_eq!(dense_restricted(&blocks, Sector::P).unwrap(), plain);
    }

    #[test]
    fn dense_guard() {
        let blocks = vec![GradedBlock::identity(4).unwrap(); 7];
        assert!(matches!(
            dense_restricted(&blocks, Sector::P),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn from_parts_rejects_misplaced_weight() {
        let mut even = CMatrix::zeros(4, 4);
        even[(2, 2)] = c(1.0);
        assert!(GradedBlock::from_parts(even, CMatrix::zeros(4, 4)).is_err());
        assert!(GradedBlock::from_parts(CMatrix::zeros(3, 3), CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn log_path_matches_plain_path() {
        let big = GradedTraces::new(c(3e200), c(1e200));
        let small = GradedTraces::new(c(2e-200), c(-1e-200));
        let plain = GradedTraces::new(c(3.0), c(1.0));
        let got = restricted_trace(&[big, small, plain], Sector::P).unwrap();
        // full = 4e200 * 1e-200 * 4 = 16; diff = 2e200 * 3e-200 * 2 = 12
        assert!((got - c(14.0)).norm() < 1e-12);
        let got = restricted_trace(&[big, small, plain], Sector::N).unwrap();
        assert!((got - c(2.0)).norm() < 1e-12);
    }
}
