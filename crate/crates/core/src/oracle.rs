//! Dense exact diagonalization in the full `2^L` spin space.
//!
//! Basis states are bit strings with site 1 as the most significant bit;
//! bit value 0 is the `Z = +1` state. All operators built here are real
//! symmetric and commute with the parity `Π = Π_n Z_n`, which the spectral
//! routines exploit by diagonalizing the two parity blocks separately.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::fcs::Distribution;
use crate::logscale::{log_sum_exp, LogScaledReal};
use crate::model::{ChainParams, Thermal};

pub const MAX_ORACLE_DIM: usize = 4096;
pub const MAX_ORACLE_LENGTH: usize = 12;
const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues of a counting operator closer than this are one level.
pub const GROUPING_TOL: f64 = 1e-8;
const LATTICE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// A real multiple of a Pauli string, stored as flip and phase masks:
/// the operator maps `|s>` to `coeff · (-1)^{popcount(s & z_mask)} |s ^ x_mask>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub x_mask: u32,
    pub z_mask: u32,
    pub coeff: f64,
}

impl PauliTerm {
    /// `coeff · Π σ_site` with 1-based sites. `Y = iXZ`, so strings with an
    /// odd number of `Y` factors are imaginary and rejected.
    pub fn new(length: usize, factors: &[(usize, Pauli)], coeff: f64) -> Self {
        let mut x_mask = 0u32;
        let mut z_mask = 0u32;
        let mut ys = 0;
        for &(site, p) in factors {
            assert!((1..=length).contains(&site), "site {site} outside 1..={length}");
            let bit = 1u32 << (length - site);
            match p {
                Pauli::X => x_mask ^= bit,
                Pauli::Z => z_mask ^= bit,
                Pauli::Y => {
                    x_mask ^= bit;
                    z_mask ^= bit;
                    ys += 1;
                }
            }
        }
        assert!(ys % 2 == 0, "Pauli string with an odd number of Y is not real");
        let sign = if ys % 4 == 2 { -1.0 } else { 1.0 };
        Self {
            x_mask,
            z_mask,
            coeff: sign * coeff,
        }
    }

    pub fn identity(coeff: f64) -> Self {
        Self {
            x_mask: 0,
            z_mask: 0,
            coeff,
        }
    }
}

/// Real symmetric matrix on `2^L` states.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    length: usize,
    matrix: Mat<f64>,
}

fn check_length(length: usize) -> Result<usize> {
    let dim = 1usize.checked_shl(length as u32).unwrap_or(usize::MAX);
    if length > MAX_ORACLE_LENGTH || dim > MAX_ORACLE_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            max: MAX_ORACLE_DIM,
        });
    }
    Ok(dim)
}

impl DenseOperator {
    pub fn new(length: usize, matrix: Mat<f64>) -> Result<Self> {
        let dim = check_length(length)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(matrix.nrows(), dim));
        }
        let mut dev: f64 = 0.0;
        for j in 0..dim {
            for i in 0..j {
                dev = dev.max((matrix[(i, j)] - matrix[(j, i)]).abs());
            }
        }
        if dev > HERMITICITY_TOL {
            return Err(Error::NonHermitian(dev));
        }
        Ok(Self { length, matrix })
    }

    pub fn from_pauli_terms(length: usize, terms: &[PauliTerm]) -> Result<Self> {
        let dim = check_length(length)?;
        let mut m = Mat::<f64>::zeros(dim, dim);
        for s in 0..dim as u32 {
            for t in terms {
                let sign = if (s & t.z_mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                m[((s ^ t.x_mask) as usize, s as usize)] += sign * t.coeff;
            }
        }
        Self::new(length, m)
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Largest entry of `[self, other]`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        let mut m: f64 = 0.0;
        for j in 0..c.ncols() {
            for i in 0..c.nrows() {
                m = m.max(c[(i, j)].abs());
            }
        }
        Ok(m)
    }

    /// True when no entry couples states of different parity.
    pub fn preserves_parity(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| {
            (0..n).all(|i| {
                (i.count_ones() + j.count_ones()) % 2 == 0 || self.matrix[(i, j)] == 0.0
            })
        })
    }

    fn block(&self, idx: &[usize]) -> Mat<f64> {
        Mat::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])])
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut e = eigenvalues(&self.matrix)?;
        e.sort_by(f64::total_cmp);
        Ok(e)
    }
}

fn eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

fn eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..m.nrows()).map(|i| s[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Basis indices split by parity: `(even popcount, odd popcount)`.
fn parity_indices(dim: usize) -> (Vec<usize>, Vec<usize>) {
    (0..dim).partition(|i| i.count_ones() % 2 == 0)
}

fn periodic_bonds(length: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=length).map(move |n| (n, n % length + 1))
}

/// `H = -Σ_n [(1+γ)/2 X_n X_{n+1} + (1-γ)/2 Y_n Y_{n+1} + g Z_n]`, periodic.
pub fn build_hamiltonian(params: &ChainParams) -> Result<DenseOperator> {
    let l = params.length();
    check_length(l)?;
    let gamma = params.gamma();
    let mut terms = Vec::new();
    for (a, b) in periodic_bonds(l) {
        terms.push(PauliTerm::new(l, &[(a, Pauli::X), (b, Pauli::X)], -(1.0 + gamma) / 2.0));
        if gamma != 1.0 {
            terms.push(PauliTerm::new(l, &[(a, Pauli::Y), (b, Pauli::Y)], -(1.0 - gamma) / 2.0));
        }
    }
    for n in 1..=l {
        terms.push(PauliTerm::new(l, &[(n, Pauli::Z)], -params.field()));
    }
    DenseOperator::from_pauli_terms(l, &terms)
}

/// `N = ½ Σ_n (1 - X_n X_{n+1})`, periodic.
pub fn build_kink_operator(length: usize) -> Result<DenseOperator> {
    check_length(length)?;
    let mut terms = vec![PauliTerm::identity(length as f64 / 2.0)];
    for (a, b) in periodic_bonds(length) {
        terms.push(PauliTerm::new(length, &[(a, Pauli::X), (b, Pauli::X)], -0.5));
    }
    DenseOperator::from_pauli_terms(length, &terms)
}

/// `M = Σ_n Z_n`.
pub fn build_magnetization_operator(length: usize) -> Result<DenseOperator> {
    check_length(length)?;
    let terms: Vec<_> = (1..=length)
        .map(|n| PauliTerm::new(length, &[(n, Pauli::Z)], 1.0))
        .collect();
    DenseOperator::from_pauli_terms(length, &terms)
}

/// `Π = Π_n Z_n`.
pub fn build_parity_operator(length: usize) -> Result<DenseOperator> {
    check_length(length)?;
    let factors: Vec<_> = (1..=length).map(|n| (n, Pauli::Z)).collect();
    DenseOperator::from_pauli_terms(length, &[PauliTerm::new(length, &factors, 1.0)])
}

/// Eigenvalues of a parity-preserving operator, per parity sector.
#[derive(Clone, Debug, PartialEq)]
pub struct ParitySpectrum {
    /// `Π = +1`.
    pub even: Vec<f64>,
    /// `Π = -1`.
    pub odd: Vec<f64>,
}

impl ParitySpectrum {
    /// `(tr[Π+ e^{-βH}], tr[Π- e^{-βH}])`.
    pub fn sector_z(&self, thermal: &Thermal) -> (LogScaledReal, LogScaledReal) {
        let b = thermal.beta();
        let z = |e: &[f64]| LogScaledReal::from_ln(log_sum_exp(e.iter().map(|x| -b * x)));
        (z(&self.even), z(&self.odd))
    }

    pub fn z(&self, thermal: &Thermal) -> LogScaledReal {
        let (p, m) = self.sector_z(thermal);
        p + m
    }

    pub fn ground_energy(&self) -> f64 {
        self.even
            .iter()
            .chain(&self.odd)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn parity_spectrum(h: &DenseOperator) -> Result<ParitySpectrum> {
    if !h.preserves_parity() {
        return Err(Error::Eigen("operator mixes parity sectors".into()));
    }
    let (even, odd) = parity_indices(h.dim());
    Ok(ParitySpectrum {
        even: eigenvalues(&h.block(&even))?,
        odd: eigenvalues(&h.block(&odd))?,
    })
}

pub fn parity_resolved_z(
    h: &DenseOperator,
    thermal: &Thermal,
) -> Result<(LogScaledReal, LogScaledReal)> {
    Ok(parity_spectrum(h)?.sector_z(thermal))
}

pub fn thermal_z(h: &DenseOperator, thermal: &Thermal) -> Result<LogScaledReal> {
    Ok(parity_spectrum(h)?.z(thermal))
}

/// Spectral weights of `W` in `ρ = e^{-βH}/Z`, `P(ω) = tr[ρ Π_ω]`.
pub fn thermal_fcs(w: &DenseOperator, h: &DenseOperator, thermal: &Thermal) -> Result<Distribution> {
    if w.dim() != h.dim() {
        return Err(Error::DimensionMismatch(w.dim(), h.dim()));
    }
    let b = thermal.beta();
    let blocks: Vec<Vec<usize>> = if w.preserves_parity() && h.preserves_parity() {
        let (e, o) = parity_indices(h.dim());
        vec![e, o]
    } else {
        vec![(0..h.dim()).collect()]
    };

    // (eigenvalue of W, unnormalized weight ln-shifted later)
    let mut levels: Vec<(f64, f64)> = Vec::with_capacity(h.dim());
    let mut energies = Vec::new();
    let mut decomps = Vec::new();
    for idx in &blocks {
        let (d, v) = eigen(&h.block(idx))?;
        let (wv, u) = eigen(&w.block(idx))?;
        energies.extend_from_slice(&d);
        decomps.push((d, v, wv, u));
    }
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    for (d, v, wv, u) in decomps {
        let overlap = u.transpose() * &v;
        let boltz: Vec<f64> = d.iter().map(|e| (-b * (e - e0)).exp()).collect();
        for (i, &omega) in wv.iter().enumerate() {
            let weight: f64 = boltz
                .iter()
                .enumerate()
                .map(|(j, bj)| overlap[(i, j)] * overlap[(i, j)] * bj)
                .sum();
            levels.push((omega, weight));
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));

    let total: f64 = levels.iter().map(|l| l.1).sum();
    let mut support: Vec<i64> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (omega, weight) in levels {
        if omega - last > GROUPING_TOL {
            let n = omega.round();
            if (omega - n).abs() > LATTICE_TOL {
                return Err(Error::OffLattice(omega));
            }
            if support.last() == Some(&(n as i64)) {
                return Err(Error::OffLattice(omega));
            }
            support.push(n as i64);
            probs.push(0.0);
        }
        last = omega;
        *probs.last_mut().expect("pushed above") += weight / total;
    }
    Distribution::new(support, probs)
}

/// `tr[W e^{-βH}] / Z` computed without any eigendecomposition of `W`.
pub fn thermal_mean(w: &DenseOperator, h: &DenseOperator, thermal: &Thermal) -> Result<f64> {
    let (d, v) = eigen(h.matrix())?;
    let e0 = d.iter().copied().fold(f64::INFINITY, f64::min);
    let wv = w.matrix() * &v;
    let mut num = 0.0;
    let mut z = 0.0;
    for (j, e) in d.iter().enumerate() {
        let bj = (-thermal.beta() * (e - e0)).exp();
        let diag: f64 = (0..v.nrows()).map(|i| v[(i, j)] * wv[(i, j)]).sum();
        num += bj * diag;
        z += bj;
    }
    Ok(num / z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ground_energies;
    use nalgebra::DMatrix;

    fn pauli(p: Option<Pauli>) -> DMatrix<f64> {
        match p {
            None => DMatrix::identity(2, 2),
            Some(Pauli::X) => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            Some(Pauli::Z) => DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            Some(Pauli::Y) => unreachable!("complex"),
        }
    }

    /// `σ_a σ_b` on sites `a, b` (site 1 leftmost) by explicit Kronecker products.
    fn kron_string(length: usize, ops: &[(usize, Pauli)]) -> DMatrix<f64> {
        (1..=length).fold(DMatrix::identity(1, 1), |acc, site| {
            let p = ops.iter().find(|(s, _)| *s == site).map(|(_, p)| *p);
            acc.kronecker(&pauli(p))
        })
    }

    fn to_nalgebra(op: &DenseOperator) -> DMatrix<f64> {
        DMatrix::from_fn(op.dim(), op.dim(), |i, j| op.get(i, j))
    }

    fn p(l: usize, g: f64, gamma: f64) -> ChainParams {
        ChainParams::new(l, g, gamma).unwrap()
    }

    #[test]
    fn bitmask_builder_matches_kronecker_products() {
        for l in [2usize, 4, 6] {
            let params = p(l, 0.7, 1.0);
            let mut h = DMatrix::zeros(1 << l, 1 << l);
            for n in 1..=l {
                let m = n % l + 1;
                h -= kron_string(l, &[(n, Pauli::X), (m, Pauli::X)]);
                h -= 0.7 * kron_string(l, &[(n, Pauli::Z)]);
            }
            let dense = to_nalgebra(&build_hamiltonian(&params).unwrap());
            assert!((dense - h).amax() < 1e-15);
        }
        // Y Y = -(XZ)(XZ): check against the explicit product on L = 2.
        let yy = DenseOperator::from_pauli_terms(2, &[PauliTerm::new(2, &[(1, Pauli::Y), (2, Pauli::Y)], 1.0)])
            .unwrap();
        let want = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, -1.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            -1.0, 0.0, 0.0, 0.0,
        ]);
        assert!((to_nalgebra(&yy) - want).amax() < 1e-15);
    }

    #[test]
    fn two_site_ising_spectrum() {
        let h = build_hamiltonian(&p(2, 0.0, 1.0)).unwrap();
        let e = h.eigenvalues().unwrap();
        let want = [-2.0, -2.0, 2.0, 2.0];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn size_guard() {
        assert!(matches!(build_kink_operator(14), Err(Error::DimensionTooLarge { .. })));
        let bad = Mat::from_fn(4, 4, |i, j| if i < j { 1.0 } else { 0.0 });
        assert!(matches!(DenseOperator::new(2, bad), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn hamiltonian_commutes_with_parity_but_not_kinks() {
        let params = p(6, 0.8, 0.4);
        let h = build_hamiltonian(&params).unwrap();
        let parity = build_parity_operator(6).unwrap();
        let kinks = build_kink_operator(6).unwrap();
        assert!(h.commutator_norm(&parity).unwrap() < 1e-13);
        assert!(h.commutator_norm(&kinks).unwrap() > 0.1);
        assert!(h.preserves_parity() && kinks.preserves_parity());
    }

    #[test]
    fn counting_spectra() {
        let l = 6;
        let n = build_kink_operator(l).unwrap().eigenvalues().unwrap();
        assert!(n.iter().all(|x| (x - x.round()).abs() < 1e-10 && *x >= -1e-10 && *x <= l as f64 + 1e-10));
        let m = build_magnetization_operator(l).unwrap().eigenvalues().unwrap();
        let mut distinct: Vec<i64> = m.iter().map(|x| x.round() as i64).collect();
        distinct.dedup();
        assert_eq!(distinct, vec![-6, -4, -2, 0, 2, 4, 6]);
    }

    #[test]
    fn infinite_temperature_histograms() {
        let l = 8;
        let h = build_hamiltonian(&p(l, 1.2, 0.6)).unwrap();
        let beta0 = Thermal::infinite_temperature();
        let kinks = thermal_fcs(&build_kink_operator(l).unwrap(), &h, &beta0).unwrap();
        let mean_direct = thermal_mean(&build_kink_operator(l).unwrap(), &h, &beta0).unwrap();
        assert!((kinks.mean() - l as f64 / 2.0).abs() < 1e-10);
        assert!((kinks.mean() - mean_direct).abs() < 1e-10);
        let binom = |n: usize, k: usize| (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64);
        for (n, prob) in kinks.iter() {
            let want = if n % 2 == 0 { binom(l, n as usize) / 2f64.powi(l as i32 - 1) } else { 0.0 };
            assert!((prob - want).abs() < 1e-12);
        }
        let mag = thermal_fcs(&build_magnetization_operator(l).unwrap(), &h, &beta0).unwrap();
        for (m, prob) in mag.iter() {
            let want = binom(l, ((m + l as i64) / 2) as usize) / 2f64.powi(l as i32);
            assert!((prob - want).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_matches_direct_trace_at_finite_temperature() {
        let h = build_hamiltonian(&p(6, 0.9, 0.7)).unwrap();
        let th = Thermal::new(1.3).unwrap();
        for w in [build_kink_operator(6).unwrap(), build_magnetization_operator(6).unwrap()] {
            let d = thermal_fcs(&w, &h, &th).unwrap();
            assert!((d.mean() - thermal_mean(&w, &h, &th).unwrap()).abs() < 1e-10);
            assert!((d.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_sectors_at_infinite_temperature() {
        let h = build_hamiltonian(&p(6, 1.0, 1.0)).unwrap();
        let (zp, zm) = parity_resolved_z(&h, &Thermal::infinite_temperature()).unwrap();
        assert!((zp.to_f64() - 32.0).abs() < 1e-12);
        assert!((zm.to_f64() - 32.0).abs() < 1e-12);
    }

    #[test]
    fn ground_energies_match_sector_minima() {
        for &(g, gamma) in &[(0.3, 1.0), (1.0, 1.0), (1.8, 0.5), (0.6, 0.0)] {
            let params = p(8, g, gamma);
            let s = parity_spectrum(&build_hamiltonian(&params).unwrap()).unwrap();
            let e = ground_energies(&params);
            let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
            assert!((min(&s.even) - e.plus).abs() < 1e-10, "g={g} γ={gamma}");
            assert!((min(&s.odd) - e.minus).abs() < 1e-10, "g={g} γ={gamma}");
        }
    }
}
