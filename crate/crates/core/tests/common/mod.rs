#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use xychain::parity_algebra::{
    dense_mode_sum, dense_restricted, restricted_trace_n, restricted_trace_p, sector_projector,
    CMatrix, GradedBlock, Sector,
};

/// Largest deviation found for each identity on one random instance.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityDeviations {
    pub product: f64,
    pub exponential: f64,
    pub trace: f64,
    pub sector_sum: f64,
}

impl IdentityDeviations {
    pub fn max(self, other: Self) -> Self {
        Self {
            product: self.product.max(other.product),
            exponential: self.exponential.max(other.exponential),
            trace: self.trace.max(other.trace),
            sector_sum: self.sector_sum.max(other.sector_sum),
        }
    }
}

fn amax(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn random_blocks<R: Rng>(rng: &mut R, dims: &[usize], scale: f64) -> Vec<GradedBlock> {
    dims.iter()
        .map(|&d| {
            let b = GradedBlock::random(d, rng).unwrap();
            GradedBlock::from_full(&(b.full() * Complex64::new(scale, 0.0))).unwrap()
        })
        .collect()
}

pub fn random_dims<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| if rng.random_bool(0.75) { 4 } else { 2 }).collect()
}

/// Checks products, exponentials and traces of restricted tensor products
/// against the dense construction for one pair of block lists.
pub fn check_identities(a: &[GradedBlock], b: &[GradedBlock]) -> IdentityDeviations {
    let mut dev = IdentityDeviations::default();
    let dims: Vec<usize> = a.iter().map(GradedBlock::dim).collect();
    let plain = a
        .iter()
        .skip(1)
        .fold(a[0].full(), |acc, x| acc.kronecker(&x.full()));
    let ab: Vec<GradedBlock> = a.iter().zip(b).map(|(x, y)| x.mul(y)).collect();
    let exp_a: Vec<GradedBlock> = a.iter().map(GradedBlock::exp).collect();
    let mut sectors_sum = DMatrix::zeros(plain.nrows(), plain.ncols());
    for sector in [Sector::P, Sector::N] {
        let da = dense_restricted(a, sector).unwrap();
        let db = dense_restricted(b, sector).unwrap();
        let dab = dense_restricted(&ab, sector).unwrap();
        dev.product = dev.product.max(amax(&(&da * &db - dab)) / amax(&da).max(1.0) / amax(&db).max(1.0));

        let proj = sector_projector(&dims, sector).unwrap();
        let complement = CMatrix::identity(proj.nrows(), proj.ncols()) - proj;
        let generator = dense_mode_sum(a, sector).unwrap();
        let want = dense_restricted(&exp_a, sector).unwrap() + complement;
        let got = generator.exp();
        dev.exponential = dev.exponential.max(amax(&(got - &want)) / amax(&want).max(1.0));

        let tr_dense = da.trace();
        let tr_closed = match sector {
            Sector::P => restricted_trace_p(a).unwrap(),
            Sector::N => restricted_trace_n(a).unwrap(),
        };
        dev.trace = dev.trace.max((tr_dense - tr_closed).norm() / tr_dense.norm().max(1.0));
        sectors_sum += da;
    }
    dev.sector_sum = amax(&(sectors_sum - &plain)) / amax(&plain).max(1.0);
    dev
}
