use hilbw::fock::{self, FockVector};
use hilbw::operators::OperatorSum;
use hilbw::rational::{q, Q};
use hilbw::ring::{RingElem, SurfaceRing};
use hilbw::smeared::SmearedOp;
use hilbw::walgebra::{self, AbstractBracket};
use proptest::prelude::*;

fn k3() -> SurfaceRing {
    SurfaceRing::builtin("k3").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heisenberg_commutator(m in -4i64..=4, n in -4i64..=4, i in 0u16..24, j in 0u16..24) {
        prop_assume!(m != 0 && n != 0);
        let r = k3();
        let (a, b) = (RingElem::basis(i), RingElem::basis(j));
        let c = OperatorSum::heisenberg(&r, m, &a, 8).commutator(&r, &OperatorSum::heisenberg(&r, n, &b, 8)).unwrap();
        let want = if m == -n { -q(m) * r.integrate(&r.multiply(&a, &b)) } else { Q::from_integer(0.into()) };
        prop_assert!(c.iter().next().is_none());
        prop_assert_eq!(c.scalar(), &want);
    }

    #[test]
    fn omega_antisymmetric(p in 0i64..8, q_ in 0i64..8, m in -8i64..=8, n in -8i64..=8) {
        prop_assert_eq!(walgebra::omega(p, q_, m, n), -walgebra::omega(q_, p, n, m));
    }

    #[test]
    fn circle_bracket_matches_structure_constants(p in 0usize..6, q_ in 0usize..6, m in -6i64..=6, n in -6i64..=6) {
        prop_assert_eq!(
            walgebra::bracket_from_differential_operators(p, m, q_, n).unwrap(),
            walgebra::abstract_bracket(p, m, q_, n)
        );
    }

    #[test]
    fn w_bracket_at_sampled_classes(p in 0usize..3, q_ in 0usize..3, m in -2i64..=2, n in -2i64..=2, i in 0u16..24, j in 0u16..24) {
        let r = k3();
        let lhs = walgebra::jay(p, m, 6).commutator(&walgebra::jay(q_, n, 6)).unwrap();
        let rhs = walgebra::jay_bracket(p, q_, m, n, lhs.window());
        let diff = lhs.plus(&q(-1), &rhs);
        let ab = r.multiply(&RingElem::basis(i), &RingElem::basis(j));
        prop_assert!(diff.first_nonvanishing(&r, &ab).is_none());
    }

    #[test]
    fn pairing_symmetric_on_even_states(w in 1u32..=3, s in 0usize..64, t in 0usize..64) {
        let r = SurfaceRing::builtin("p1xp1").unwrap();
        let b = fock::basis(&r, w);
        let u = FockVector::from_state(b[s % b.len()].clone(), 4);
        let v = FockVector::from_state(b[t % b.len()].clone(), 4);
        prop_assert_eq!(fock::pairing(&r, &u, &v), fock::pairing(&r, &v, &u));
    }
}

#[test]
fn abstract_bracket_low_cases() {
    assert_eq!(walgebra::abstract_bracket(0, 2, 0, -2), AbstractBracket::Central { coefficient: 2 });
    assert_eq!(
        walgebra::abstract_bracket(1, 1, 1, -1),
        AbstractBracket::Term { p: 1, mode: 0, coefficient: 2 }
    );
    assert!(SmearedOp::zero(0, 4).is_zero());
}
