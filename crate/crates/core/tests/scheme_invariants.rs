use tsa_core::gf::{FieldElement, FieldSpec};
use tsa_core::scheme::{
    build_complete, build_prism, build_ring, from_kernel, literal_prism6_f5, search_modulation,
    verify, SchemeError, SearchStrategy,
};
use tsa_core::{Scheme, Topology};

fn fixtures() -> Vec<Scheme> {
    let mut out = vec![literal_prism6_f5()];
    out.extend([3, 4, 5, 6, 8].map(|k| build_ring(k).unwrap()));
    out.extend([3, 4, 5].map(|m| build_prism(m).unwrap()));
    out.extend((2..=8).map(|k| build_complete(k).unwrap()));
    out
}

#[test]
fn every_fixture_neutralizes_keys_row_by_row() {
    for s in fixtures() {
        let f = s.spec();
        let t = s.topology();
        for k in 0..s.users() {
            for j in 0..s.d() {
                let own = f.mul(s.alpha()[k], s.h().get(k, j));
                let rest = f.sum(t.neighbors(k).unwrap().iter().map(|&i| s.h().get(i, j)));
                assert!(f.add(own, rest).is_zero(), "user {k} column {j}");
                if s.alpha()[k].is_zero() {
                    assert!(rest.is_zero());
                }
            }
            if s.alpha()[k].is_zero() {
                let open = s.h().submatrix_rows(t.neighbors(k).unwrap()).unwrap();
                assert!(open.rank() < s.d());
            }
        }
    }
}

#[test]
fn every_fixture_has_full_key_rank_and_one_shot_rates() {
    for s in fixtures() {
        assert!(verify(&s).passed());
        assert_eq!(s.h().rank(), s.d());
        s.check_rates().unwrap();
        assert_eq!(Some(s.d()), s.topology().regular_degree());
    }
}

#[test]
fn exhaustive_search_dominates_uniform_search() {
    let cases = [
        (Topology::complete(3).unwrap(), FieldSpec::prime(2).unwrap()),
        (Topology::complete(4).unwrap(), FieldSpec::prime(3).unwrap()),
        (Topology::ring(4).unwrap(), FieldSpec::prime(5).unwrap()),
        (Topology::ring(5).unwrap(), FieldSpec::prime(3).unwrap()),
    ];
    for (t, f) in cases {
        let uniform = search_modulation(&t, f, &SearchStrategy::Uniform, 1 << 20).unwrap();
        let full = search_modulation(&t, f, &SearchStrategy::Exhaustive, 1 << 20).unwrap();
        assert!(full.kernel_dim >= uniform.kernel_dim);
        assert_eq!(full.best_alpha, full.maximizers[0]);
        assert!(full.maximizers.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn search_results_feed_the_kernel_construction() {
    let f = FieldSpec::prime(5).unwrap();
    let t = Topology::prism(3).unwrap();
    let found = search_modulation(&t, f, &SearchStrategy::Uniform, 100).unwrap();
    let s = from_kernel(&t, f, &found.best_alpha).unwrap();
    assert!(verify(&s).passed());
}

#[test]
fn zero_modulation_on_the_five_ring_is_rejected() {
    // Frozen regression: the adjacency of C_5 over F_11 is invertible.
    let f = FieldSpec::prime(11).unwrap();
    let t = Topology::ring(5).unwrap();
    assert_eq!(t.adjacency(f).rank(), 5);
    assert_eq!(
        from_kernel(&t, f, &[FieldElement::ZERO; 5]),
        Err(SchemeError::KernelTooSmall { dim: 0, d: 2 })
    );
}

#[test]
fn random_key_matrix_fails_recovery() {
    let s = literal_prism6_f5();
    let f = s.spec();
    let mut h = s.h().clone();
    h.set(0, 0, f.from_u64(4));
    let r = verify(&s.with_h(h).unwrap());
    assert!(!r.recovery_ok);
    assert!(!r.passed());
}
