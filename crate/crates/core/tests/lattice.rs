use num_bigint::BigInt;
use proptest::prelude::*;
use spirality_core::lattice::{apply_gluing, compat_constants};
use spirality_core::oracle::{index_by_counting, lattice_membership_by_enumeration, same_span};
use spirality_core::{hnf, span2, Gluing, Lattice, LatticeError, ScaledSlope, Slope, Vector};

fn v(x: i64, y: i64) -> Vector {
    Vector::new(x, y)
}

fn members(l: &Lattice, bound: i64) -> std::collections::BTreeSet<(i64, i64)> {
    let mut out = std::collections::BTreeSet::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            if l.contains(&v(x, y)) {
                out.insert((x, y));
            }
        }
    }
    out
}

#[test]
fn hnf_examples() {
    let full = hnf(&[v(1, 0), v(0, 1)]).unwrap();
    assert_eq!(full, Lattice::full());
    assert_eq!(full.index(), BigInt::from(1));
    assert_eq!(hnf(&[v(2, 0), v(0, 3)]).unwrap().index(), BigInt::from(6));
    let l = hnf(&[v(4, 0), v(1, 1)]).unwrap();
    assert_eq!(l.index(), BigInt::from(4));
    assert_eq!(index_by_counting(&v(4, 0), &v(1, 1)), BigInt::from(4));
    assert_eq!(hnf(&[v(1, 2), v(2, 4)]), Err(LatticeError::RankDeficient));
}

#[test]
fn index_and_membership_examples() {
    let l = hnf(&[v(2, 1), v(1, 2)]).unwrap();
    assert_eq!(l.index(), BigInt::from(3));
    assert_eq!(index_by_counting(&v(2, 1), &v(1, 2)), BigInt::from(3));
    assert!(l.contains(&v(3, 3)));
    assert!(Lattice::full().contains(&v(7, -5)));
    assert!(!hnf(&[v(2, 0), v(0, 3)]).unwrap().contains(&v(1, 0)));
}

#[test]
fn enumeration_oracle_examples() {
    let pts = lattice_membership_by_enumeration(&[v(2, 0), v(0, 2)], 2);
    let want: std::collections::BTreeSet<(i64, i64)> =
        [-2, 0, 2].iter().flat_map(|&x| [-2, 0, 2].map(|y| (x, y))).collect();
    assert_eq!(pts, want);
    assert_eq!(lattice_membership_by_enumeration(&[v(1, 0), v(0, 1)], 1).len(), 9);
    let l = hnf(&[v(1, 1), v(0, 3)]).unwrap();
    assert_eq!(lattice_membership_by_enumeration(&[v(1, 1), v(0, 3)], 3), members(&l, 3));
}

#[test]
fn span2_examples() {
    let s = |p, q| Slope::new(p, q).unwrap();
    let full = span2(&ScaledSlope::unit(s(1, 0)), &ScaledSlope::unit(s(0, 1))).unwrap();
    assert_eq!(full, Lattice::full());
    let l = span2(&ScaledSlope::new(2, s(1, 0)).unwrap(), &ScaledSlope::new(3, s(0, 1)).unwrap()).unwrap();
    assert_eq!(l.index(), BigInt::from(6));
    assert_eq!(Slope::new(2, 0), Err(LatticeError::NotPrimitive(2, 0)));
    let scaled = ScaledSlope::of_vector(&v(2, 0)).unwrap();
    assert_eq!(scaled, ScaledSlope::new(2, s(1, 0)).unwrap());
    assert_eq!(
        span2(&ScaledSlope::unit(s(1, 1)), &ScaledSlope::new(3, s(-1, -1)).unwrap()),
        Err(LatticeError::ParallelSlopes)
    );
}

#[test]
fn compat_constants_examples() {
    let s = |p, q| Slope::new(p, q).unwrap();
    let c = ScaledSlope::new(2, s(1, 0)).unwrap();
    let (b, b2) = compat_constants(&c, &s(1, 3), &s(0, 1)).unwrap();
    assert_eq!((b.clone(), b2.clone()), (BigInt::from(2), BigInt::from(6)));
    for alpha in 1..=10i64 {
        let l1 = span2(&c, &ScaledSlope::new(alpha * &b, s(1, 3)).unwrap()).unwrap();
        let l2 = span2(&c, &ScaledSlope::new(alpha * &b2, s(0, 1)).unwrap()).unwrap();
        let want = hnf(&[v(2, 0), v(0, 6 * alpha)]).unwrap();
        assert_eq!(l1, want);
        assert_eq!(l2, want);
    }

    let c = ScaledSlope::unit(s(1, 1));
    let (b, b2) = compat_constants(&c, &s(0, 1), &s(1, 0)).unwrap();
    assert_eq!((b.clone(), b2.clone()), (BigInt::from(1), BigInt::from(1)));
    for alpha in 1..=10i64 {
        let l1 = lattice_membership_by_enumeration(&[v(1, 1), v(0, alpha)], 20);
        let l2 = lattice_membership_by_enumeration(&[v(1, 1), v(alpha, 0)], 20);
        assert_eq!(l1, l2);
    }

    let t = s(2, 5);
    let (b, b2) = compat_constants(&ScaledSlope::new(3, s(1, 2)).unwrap(), &t, &t).unwrap();
    assert_eq!(b, b2);
    assert_eq!(compat_constants(&c, &s(1, 1), &s(1, 0)), Err(LatticeError::ParallelSlopes));
}

#[test]
fn gluing_examples() {
    let l = hnf(&[v(2, 0), v(0, 3)]).unwrap();
    assert_eq!(apply_gluing(&Gluing::identity(), &l), l);
    let swap = Gluing::new([[0, 1], [1, 0]]).unwrap();
    assert_eq!(apply_gluing(&swap, &l), hnf(&[v(3, 0), v(0, 2)]).unwrap());
    let shear = Gluing::new([[1, 1], [0, 1]]).unwrap();
    let l = hnf(&[v(2, 0), v(0, 4)]).unwrap();
    assert_eq!(apply_gluing(&shear, &l), l);
    assert!(Gluing::new([[2, 0], [0, 1]]).is_err());
}

#[test]
fn complement_examples() {
    let s = |p, q| Slope::new(p, q).unwrap();
    assert_eq!(s(1, 0).complement(), s(0, 1));
    assert_eq!(s(2, 5).intersection(&s(2, 5).complement()), 1);
}

fn vec_strategy(r: i64) -> impl Strategy<Value = (i64, i64)> {
    (-r..=r, -r..=r)
}

fn primitive(r: i64) -> impl Strategy<Value = Slope> {
    vec_strategy(r).prop_filter_map("primitive", |(p, q)| Slope::new(p, q).ok())
}

proptest! {
    #[test]
    fn hnf_matches_enumeration(gens in prop::collection::vec(vec_strategy(9), 2..5)) {
        let gens: Vec<Vector> = gens.into_iter().map(|(x, y)| v(x, y)).collect();
        match hnf(&gens) {
            Ok(l) => {
                prop_assert_eq!(members(&l, 12), lattice_membership_by_enumeration(&gens, 12));
                let [g1, g2] = l.generators();
                if l.index() <= BigInt::from(400) {
                    prop_assert_eq!(index_by_counting(&g1, &g2), l.index());
                }
            }
            Err(_) => {
                let independent = gens.iter().any(|a| gens.iter().any(|b| !a.det(b).is_zero_ref()));
                prop_assert!(!independent);
            }
        }
    }

    #[test]
    fn span2_matches_oracle(a in primitive(9), b in primitive(9), ka in 1i64..5, kb in 1i64..5) {
        prop_assume!(!a.is_parallel(&b));
        let l = span2(&ScaledSlope::new(ka, a).unwrap(), &ScaledSlope::new(kb, b).unwrap()).unwrap();
        let [g1, g2] = l.generators();
        let (u, w) = (a.vector().scale(&ka.into()), b.vector().scale(&kb.into()));
        prop_assert!(same_span((&g1, &g2), (&u, &w)));
    }

    #[test]
    fn gluing_preserves_membership(
        gens in prop::collection::vec(vec_strategy(6), 2..4),
        m in prop::sample::select(vec![[[1, 1], [0, 1]], [[0, -1], [1, 0]], [[2, 1], [1, 1]], [[1, 0], [3, -1]]]),
        pts in prop::collection::vec(vec_strategy(15), 20),
    ) {
        let gens: Vec<Vector> = gens.into_iter().map(|(x, y)| v(x, y)).collect();
        let Ok(l) = hnf(&gens) else { return Ok(()) };
        let g = Gluing::new(m).unwrap();
        let image = apply_gluing(&g, &l);
        prop_assert_eq!(image.index(), l.index());
        for (x, y) in pts {
            let p = v(x, y);
            prop_assert_eq!(l.contains(&p), image.contains(&g.apply(&p)));
        }
    }

    #[test]
    fn complement_is_l1_minimal(s in primitive(30)) {
        let t = s.complement();
        prop_assert_eq!(s.intersection(&t), 1);
        let best = (-60i64..=60)
            .flat_map(|p| (-60i64..=60).map(move |q| (p, q)))
            .filter(|&(p, q)| (s.p() * q - s.q() * p).abs() == 1)
            .map(|(p, q)| p.abs() + q.abs())
            .min()
            .unwrap();
        prop_assert_eq!(t.p().abs() + t.q().abs(), best);
    }

    #[test]
    fn slope_order_matches_membership(gens in prop::collection::vec(vec_strategy(6), 2..4), s in primitive(5)) {
        let gens: Vec<Vector> = gens.into_iter().map(|(x, y)| v(x, y)).collect();
        let Ok(l) = hnf(&gens) else { return Ok(()) };
        let m = l.slope_order(&s);
        let first = (1i64..=400).find(|&k| l.contains(&s.vector().scale(&k.into()))).unwrap();
        prop_assert_eq!(m, BigInt::from(first));
    }
}

trait ZeroRef {
    fn is_zero_ref(&self) -> bool;
}

impl ZeroRef for BigInt {
    fn is_zero_ref(&self) -> bool {
        *self == BigInt::from(0)
    }
}
