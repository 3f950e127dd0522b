use proptest::prelude::*;

use hklat::factor::{reflection_matrix, Transvection};
use hklat::isometry::{characters, nu, nu_with_frame, Isometry};
use hklat::lattice::{Lattice, Preset};
use hklat::llv::{HilbertPair, LlvSpace};
use hklat::matrix::{vadd, vint, vscale, QMat, QVec};
use hklat::mukai::{self, MukaiVector};
use hklat::random::{random_reflection_word, rng};
use hklat::snrep::SnSpace;
use hklat::suite::split_lattice;
use hklat::Rat;

fn ivec(n: usize, bound: i64) -> impl Strategy<Value = QVec> {
    prop::collection::vec(-bound..=bound, n).prop_map(|v| vint(&v))
}

fn rat() -> impl Strategy<Value = Rat> {
    (-1000i64..=1000, 1i64..=60).prop_map(|(a, b)| Rat::new(a, b))
}

fn nonzero_rat() -> impl Strategy<Value = Rat> {
    rat().prop_filter("nonzero", |r| r.signum() != 0)
}

fn k3n2() -> Lattice {
    Lattice::preset(&Preset::K3n(2))
}

fn word(lat: &Lattice, seed: u64) -> Isometry {
    random_reflection_word(lat, &mut rng(seed), 3, 1)
}

proptest! {
    #[test]
    fn rat_field_and_json(a in rat(), b in nonzero_rat()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&(&a * &b) / &b, a.clone());
        let s = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rat>(&s).unwrap(), a);
    }

    #[test]
    fn pairing_is_symmetric_bilinear(x in ivec(23, 4), y in ivec(23, 4), z in ivec(23, 4), a in -5i64..=5, b in -5i64..=5) {
        let lat = k3n2();
        let comb = vadd(&vscale(&Rat::int(a), &x), &vscale(&Rat::int(b), &y));
        prop_assert_eq!(lat.pair(&comb, &z), Rat::int(a) * lat.pair(&x, &z) + Rat::int(b) * lat.pair(&y, &z));
        prop_assert_eq!(lat.pair(&x, &y), lat.pair(&y, &x));
    }

    #[test]
    fn reflections_are_involutions(u in ivec(23, 3)) {
        let lat = k3n2();
        prop_assume!(lat.norm(&u).signum() != 0);
        let r = reflection_matrix(&lat, &u);
        prop_assert!(r.mul(&r).is_identity());
        prop_assert_eq!(r.mul_vec(&u), vscale(&Rat::int(-1), &u));
        prop_assert_eq!(r.det(), Rat::int(-1));
    }

    #[test]
    fn transvections_add(a in ivec(22, 3), b in ivec(22, 3)) {
        let lat = Lattice::preset(&Preset::K3);
        // e = e1 of the first plane; a ⊥ e exactly when the e2-coordinate vanishes
        let e = vint(&[&[1i64][..], &[0; 21]].concat());
        let mut a = a;
        let mut b = b;
        a[1] = Rat::int(0);
        b[1] = Rat::int(0);
        let ea = Transvection::new(&lat, e.clone(), a.clone()).matrix();
        let eb = Transvection::new(&lat, e.clone(), b.clone()).matrix();
        let eab = Transvection::new(&lat, e, vadd(&a, &b)).matrix();
        prop_assert_eq!(ea.mul(&eb), eab.clone());
        prop_assert!(hklat::isometry::is_isometry(&lat, &eab));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn characters_are_multiplicative(s1 in any::<u64>(), s2 in any::<u64>()) {
        let lat = k3n2();
        let g = word(&lat, s1);
        let h = word(&lat, s2);
        let gh = g.compose(&h);
        prop_assert_eq!(nu(&lat, gh.matrix()), nu(&lat, g.matrix()) * nu(&lat, h.matrix()));
        let (cg, ch, cgh) = (characters(&lat, &g), characters(&lat, &h), characters(&lat, &gh));
        prop_assert_eq!(cgh.det, cg.det * ch.det);
        if let (Some(a), Some(b)) = (cg.disc.sign(), ch.disc.sign()) {
            prop_assert_eq!(cgh.disc.sign(), Some(a * b));
        }
    }

    #[test]
    fn nu_does_not_depend_on_the_frame(s in any::<u64>()) {
        let lat = k3n2();
        let g = word(&lat, s);
        // e1 − k·e2 in the three planes, then a non-orthogonal mix of them
        let frame: Vec<QVec> = [(0usize, 2i64), (1, 3), (2, 5)]
            .iter()
            .map(|&(i, k)| lat.plane_vector(i, &Rat::int(1), &Rat::int(-k)))
            .collect();
        let mixed = vec![vadd(&frame[0], &frame[1]), frame[1].clone(), vadd(&frame[2], &vscale(&Rat::int(2), &frame[0]))];
        let v = nu(&lat, g.matrix());
        prop_assert_eq!(nu_with_frame(&lat, &frame, g.matrix()), v);
        prop_assert_eq!(nu_with_frame(&lat, &mixed, g.matrix()), v);
    }

    #[test]
    fn b_fields_compose(l in ivec(23, 3), m in ivec(23, 3)) {
        let llv = LlvSpace::new(&k3n2());
        let bl = llv.b_field(&l).unwrap();
        let bm = llv.b_field(&m).unwrap();
        prop_assert_eq!(bl.mul(&bm), llv.b_field(&vadd(&l, &m)).unwrap());
        prop_assert!(llv.is_isometry(&bl));
    }

    #[test]
    fn e_lambda_is_skew(l in ivec(23, 3), x in ivec(25, 3), y in ivec(25, 3)) {
        let llv = LlvSpace::new(&k3n2());
        let e = llv.e_op(&l).unwrap();
        prop_assert_eq!(llv.pair(&e.mul_vec(&x), &y), -llv.pair(&x, &e.mul_vec(&y)));
        prop_assert!(llv.grading().commutator(&e) == e.scale(&Rat::int(2)));
    }

    #[test]
    fn fm_beta_image_is_isotropic(r in nonzero_rat(), l in ivec(23, 5)) {
        let llv = LlvSpace::new(&k3n2());
        let v = llv.fm_beta_image(&r, &l).unwrap();
        prop_assert_eq!(llv.pair(&v, &v), Rat::int(0));
    }

    #[test]
    fn mukai_pairing_invariances(a in ivec(24, 4), b in ivec(24, 4)) {
        let (a, b) = (MukaiVector::from_vec(&a).unwrap(), MukaiVector::from_vec(&b).unwrap());
        let p = mukai::mukai_pair(&a, &b).unwrap();
        let neg = |x: &MukaiVector| MukaiVector::from_vec(&vscale(&Rat::int(-1), &x.to_vec())).unwrap();
        prop_assert_eq!(mukai::mukai_pair(&neg(&a), &neg(&b)).unwrap(), p.clone());
        let (ra, rb) = (mukai::structure_sheaf_reflection(&a), mukai::structure_sheaf_reflection(&b));
        prop_assert_eq!(mukai::mukai_pair(&ra, &rb).unwrap(), p);
        prop_assert_eq!(mukai::k3_star(&a, &b).unwrap(), mukai::k3_star_by_conjugation(&a, &b).unwrap());
    }

    #[test]
    fn kappa_ignores_line_bundle_twists(r in nonzero_rat(), c1 in ivec(22, 3), ch2 in rat(), l in ivec(22, 3)) {
        // ch·exp(L): c1 ↦ c1 + rL, ch2 ↦ ch2 + (c1,L) + r(L,L)/2
        let k3 = Lattice::preset(&Preset::K3);
        let c1t = vadd(&c1, &vscale(&r, &l));
        let ch2t = &ch2 + &k3.pair(&c1, &l) + &r * &k3.norm(&l) / Rat::int(2);
        prop_assert_eq!(mukai::kappa(&r, &c1, &ch2).unwrap(), mukai::kappa(&r, &c1t, &ch2t).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn symmetric_powers_are_functorial(s1 in any::<u64>(), s2 in any::<u64>(), n in 2usize..=3) {
        let lat = split_lattice(5);
        let sp = SnSpace::new(&lat, n).unwrap();
        let f = word(&lat, s1).into_matrix();
        let g = word(&lat, s2).into_matrix();
        let sfg = sp.restrict_sym(&f.mul(&g)).unwrap();
        prop_assert_eq!(sfg, sp.restrict_sym(&f).unwrap().mul(&sp.restrict_sym(&g).unwrap()));
        prop_assert!(sp.restrict_sym(&QMat::identity(5)).unwrap().is_identity());
    }

    #[test]
    fn iota_tilde_is_a_homomorphism(s1 in any::<u64>(), s2 in any::<u64>(), t in nonzero_rat()) {
        let hp = HilbertPair::new(2).unwrap();
        let k3 = Lattice::preset(&Preset::K3);
        let g = hp.k3.extend(word(&k3, s1).matrix()).unwrap().mul(&hp.k3.mu(&t).unwrap());
        let h = hp.k3.tau().mul(&hp.k3.extend(word(&k3, s2).matrix()).unwrap());
        let lhs = hp.iota_tilde(&g.mul(&h)).unwrap();
        prop_assert_eq!(lhs, hp.iota_tilde(&g).unwrap().mul(&hp.iota_tilde(&h).unwrap()));
        prop_assert!(hp.k3n.is_isometry(&hp.iota_tilde(&g).unwrap()));
    }
}
