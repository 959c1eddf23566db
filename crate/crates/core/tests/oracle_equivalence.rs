use xychain::fcs::{distribution, kink_observable, magnetization_observable, Variant};
use xychain::oracle::{
    build_hamiltonian, build_kink_operator, build_magnetization_operator, parity_resolved_z,
    parity_spectrum, thermal_fcs,
};
use xychain::partition::z_exact;
use xychain::{ChainParams, Thermal};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn sector_traces_at_the_critical_point() {
    let params = ChainParams::ising(4, 1.0).unwrap();
    let th = Thermal::new(1.0).unwrap();
    let h = build_hamiltonian(&params).unwrap();
    let (zp, zm) = parity_resolved_z(&h, &th).unwrap();
    let z = z_exact(&params, &th);
    assert!(rel(z.z_plus.to_f64(), zp.to_f64()) < 1e-9);
    assert!(rel(z.z_minus.to_f64(), zm.to_f64()) < 1e-9);
    assert!(rel(z.z_exact.to_f64(), (zp + zm).to_f64()) < 1e-10);
}

#[test]
fn partition_functions_match_dense_spectra() {
    for l in [2, 4, 6, 8] {
        for &gamma in &[0.0, 0.25, 1.0] {
            for &g in &[0.0, 0.3, 1.0, 2.5] {
                let params = ChainParams::new(l, g, gamma).unwrap();
                let s = parity_spectrum(&build_hamiltonian(&params).unwrap()).unwrap();
                for &b in &[0.0, 0.5, 2.0, 8.0] {
                    let th = Thermal::new(b).unwrap();
                    let (zp, zm) = s.sector_z(&th);
                    let z = z_exact(&params, &th);
                    let at = format!("L={l} γ={gamma} g={g} β={b}");
                    assert!(rel(z.z_plus.ratio(zp), 1.0) < 1e-9, "{at}");
                    assert!(rel(z.z_minus.ratio(zm), 1.0) < 1e-9, "{at}");
                }
            }
        }
    }
}

#[test]
fn distributions_match_dense_histograms_away_from_ising() {
    for l in [2, 4, 6, 8] {
        for &gamma in &[0.0, 0.6] {
            for &g in &[0.4, 1.0, 1.7] {
                let params = ChainParams::new(l, g, gamma).unwrap();
                let h = build_hamiltonian(&params).unwrap();
                let nk = build_kink_operator(l).unwrap();
                let nm = build_magnetization_operator(l).unwrap();
                for &b in &[0.3, 3.0] {
                    let th = Thermal::new(b).unwrap();
                    let at = format!("L={l} γ={gamma} g={g} β={b}");
                    let dk = distribution(&kink_observable(&params), &params, &th, Variant::Exact).unwrap();
                    let ok = thermal_fcs(&nk, &h, &th).unwrap();
                    assert!(dk.sup_distance(&ok) < 1e-8, "kinks {at}");
                    let dm = distribution(&magnetization_observable(&params), &params, &th, Variant::Exact)
                        .unwrap();
                    let om = thermal_fcs(&nm, &h, &th).unwrap();
                    assert!(dm.sup_distance(&om) < 1e-8, "magnetization {at}");
                    for (n, p) in ok.iter() {
                        assert!(n % 2 == 0 || p <= 1e-12, "odd kink weight {p} {at}");
                    }
                }
            }
        }
    }
}

#[test]
fn sector_ground_energies_without_case_split() {
    // The negative-sector ground energy carries no case split at g = 1.
    for &g in &[0.9, 1.0, 1.1] {
        let params = ChainParams::ising(10, g).unwrap();
        let s = parity_spectrum(&build_hamiltonian(&params).unwrap()).unwrap();
        let e = xychain::model::ground_energies(&params);
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min(&s.odd) - e.minus).abs() < 1e-10);
        assert!((min(&s.even) - e.plus).abs() < 1e-10);
        assert!(e.plus <= e.minus);
    }
}
