use polybetti::exact::{self, Enumerator};
use polybetti::oracle::{oracle_anchored, oracle_brute_force};
use polybetti::stochastic::{tau, tau_tilde};
use polybetti::{Error, Kind, LengthVector};
use proptest::prelude::*;

fn lengths(max_n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(1i64..40, 3..=max_n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fast_profile_matches_oracle(v in lengths(12)) {
        let l = LengthVector::exact(v).unwrap();
        for anchor in 0..l.n() {
            prop_assert_eq!(Enumerator::default().anchored_counts(&l, anchor).unwrap(), oracle_anchored(&l, anchor).unwrap());
        }
    }

    #[test]
    fn float_profile_matches_oracle(v in prop::collection::vec(0.01f64..10.0, 3..=11)) {
        let l = LengthVector::float(v).unwrap();
        for kind in [Kind::Planar, Kind::Spatial] {
            match (exact::Enumerator::default().short_profile(&l, kind), oracle_brute_force(&l, kind)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }
    }

    #[test]
    fn scale_invariance(v in lengths(11), k in 2i64..1000) {
        let l = LengthVector::exact(v.clone()).unwrap();
        let scaled = LengthVector::exact(v.iter().map(|x| x * k).collect()).unwrap();
        prop_assert_eq!(exact::planar_betti(&l).unwrap(), exact::planar_betti(&scaled).unwrap());
        prop_assert_eq!(exact::short_profile_planar(&l).unwrap(), exact::short_profile_planar(&scaled).unwrap());
    }

    #[test]
    fn tilde_keeps_multiset_and_planar_topology(v in lengths(11)) {
        let l = LengthVector::exact(v.clone()).unwrap();
        let t = l.tilde_permute();
        let mut a = l.to_f64_vec();
        let mut b = t.to_f64_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
        prop_assert_eq!(t.get(t.n() - 1), v.iter().copied().max().unwrap() as f64);
        prop_assert_eq!(exact::planar_betti(&l).unwrap(), exact::planar_betti(&t).unwrap());
    }

    #[test]
    fn generic_betti_numbers_are_palindromic(v in lengths(12)) {
        let l = LengthVector::exact(v).unwrap();
        prop_assume!(l.is_generic().unwrap());
        let planar = exact::planar_betti(&l).unwrap();
        let spatial = exact::spatial_betti(&l).unwrap();
        prop_assert!(planar.is_palindromic());
        prop_assert!(spatial.is_palindromic());
        prop_assert_eq!(planar.values.len(), l.n() - 2);
        prop_assert_eq!(spatial.values.len(), l.n() - 2);
    }

    #[test]
    fn poincare_totals_agree_with_betti(v in lengths(12)) {
        let l = LengthVector::exact(v).unwrap();
        let planar = exact::planar_betti(&l).unwrap();
        prop_assert_eq!(exact::planar_poincare(&l).unwrap().at_one(), planar.total() as i64);
        if l.is_generic().unwrap() {
            let profile = exact::short_profile_spatial(&l).unwrap();
            let spatial = exact::spatial_betti(&l).unwrap();
            let poly = exact::spatial_poincare(&l).unwrap();
            prop_assert_eq!(poly.at_one(), spatial.total() as i64);
            prop_assert_eq!(exact::spatial_total_from_profile(&profile), spatial.total() as i64);
            for (i, b) in spatial.values.iter().enumerate() {
                prop_assert_eq!(poly.coeff(2 * i), *b as i64);
                prop_assert_eq!(poly.coeff(2 * i + 1), 0);
            }
        }
    }

    #[test]
    fn spatial_rejects_medians(v in lengths(10)) {
        let l = LengthVector::exact(v).unwrap();
        let generic = l.is_generic().unwrap();
        match exact::spatial_betti(&l) {
            Ok(_) => prop_assert!(generic),
            Err(Error::NonGeneric) => prop_assert!(!generic),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn tau_ranges(v in lengths(14)) {
        let l = LengthVector::exact(v).unwrap();
        let n = l.n();
        let id: Vec<usize> = (0..n - 1).collect();
        prop_assert!(tau(&l, &id).unwrap() < n);
        prop_assert!(tau_tilde(&l) <= n - 2);
        // τ̃ is the first prefix length at which prefix plus longest side stops being short
        let t = tau_tilde(&l);
        let lt = l.tilde_permute().to_f64_vec();
        let signed = |k: usize| lt[n - 1] + lt[..k].iter().sum::<f64>() - lt[k..n - 1].iter().sum::<f64>();
        prop_assert!(signed(t) >= 0.0);
        prop_assert!(t == 0 || signed(t - 1) < 0.0);
    }
}

#[test]
fn equilateral_spatial_profiles() {
    for n in (3..=13).step_by(2) {
        let l = LengthVector::equilateral(n).unwrap();
        let enumerated = exact::spatial_betti(&l).unwrap();
        assert_eq!(enumerated, exact::equilateral_spatial_betti(n).unwrap(), "n = {n}");
    }
    // the commonly quoted sum undercounts from n = 5 on
    assert_eq!(exact::equilateral_spatial_total(5).unwrap(), 6);
    assert_eq!(exact::spatial_betti(&LengthVector::equilateral(5).unwrap()).unwrap().total(), 7);
}

#[test]
fn empty_spaces() {
    // one side longer than the rest together
    let l = LengthVector::exact(vec![1, 1, 5]).unwrap();
    assert_eq!(exact::planar_betti(&l).unwrap().total(), 0);
    assert_eq!(exact::spatial_betti(&l).unwrap().total(), 0);
    let l = LengthVector::exact(vec![1, 2, 1, 9, 1]).unwrap();
    assert_eq!(exact::planar_betti(&l).unwrap().values, vec![0, 0, 0]);
    assert_eq!(exact::spatial_poincare(&l).unwrap().to_string(), "0");
}
