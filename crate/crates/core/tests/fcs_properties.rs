use xychain::fcs::{cumulants, distribution, kink_observable, magnetization_observable, Variant};
use xychain::{ChainParams, Thermal};

fn th(b: f64) -> Thermal {
    Thermal::new(b).unwrap()
}

#[test]
fn ppa_is_accurate_in_the_cold_paramagnet() {
    let params = ChainParams::ising(50, 2.0).unwrap();
    let obs = kink_observable(&params);
    let exact = distribution(&obs, &params, &th(5.0), Variant::Exact).unwrap();
    let ppa = distribution(&obs, &params, &th(5.0), Variant::Ppa).unwrap();
    let d = exact.sup_distance(&ppa);
    assert!(d <= 1e-3, "sup-norm {d}");
}

#[test]
fn coarse_grained_ppa_tracks_exact_distribution() {
    let params = ChainParams::ising(50, 1.5).unwrap();
    let obs = kink_observable(&params);
    let exact = distribution(&obs, &params, &th(1.0), Variant::Exact).unwrap();
    let cg = distribution(&obs, &params, &th(1.0), Variant::CoarseGrainedPpa).unwrap();
    let d = exact.sup_distance(&cg);
    assert!(d <= 5e-3, "sup-norm {d}");
    assert!(cg.iter().all(|(n, p)| n % 2 == 0 || p == 0.0));
}

#[test]
fn ppa_puts_weight_on_odd_kink_numbers() {
    let params = ChainParams::ising(12, 0.5).unwrap();
    let ppa = distribution(&kink_observable(&params), &params, &th(0.5), Variant::Ppa).unwrap();
    let odd = ppa.iter().filter(|(n, _)| n % 2 == 1).map(|(_, p)| p).fold(0.0, f64::max);
    assert!(odd > 1e-4);
}

#[test]
fn magnetization_is_super_poissonian_in_the_ferromagnet() {
    let params = ChainParams::ising(12, 0.5).unwrap();
    let obs = magnetization_observable(&params);
    for &b in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let c = cumulants(&distribution(&obs, &params, &th(b), Variant::Exact).unwrap(), 2).unwrap();
        assert!(c.order(2) > c.order(1), "β={b}: {:?}", c.kappa);
    }
}

#[test]
fn kink_statistics_cross_from_sub_to_super_poissonian() {
    let params = ChainParams::ising(12, 0.5).unwrap();
    let obs = kink_observable(&params);
    let signs: Vec<bool> = [0.1, 0.5, 1.0, 2.0, 4.0, 10.0]
        .iter()
        .map(|&b| {
            let c = cumulants(&distribution(&obs, &params, &th(b), Variant::Exact).unwrap(), 2).unwrap();
            c.order(2) > c.order(1)
        })
        .collect();
    assert!(!signs[0] && signs[signs.len() - 1], "{signs:?}");
}

#[test]
fn large_chains_stay_normalized() {
    let params = ChainParams::new(400, 0.9, 0.7).unwrap();
    for obs in [kink_observable(&params), magnetization_observable(&params)] {
        for &b in &[0.05, 2.0, 50.0] {
            let d = distribution(&obs, &params, &th(b), Variant::Exact).unwrap();
            assert!((d.total() - 1.0).abs() < 1e-10);
            assert!(d.probs.iter().all(|p| *p >= 0.0));
        }
    }
}
