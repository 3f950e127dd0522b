use hklat::factor::{decompose, eichler_move, eichler_normal_form, verify_normal_form};
use hklat::isometry::{membership, Group};
use hklat::lattice::{Lattice, Preset};
use hklat::random;
use hklat::Rat;

#[test]
fn eichler_reaches_canonical_vectors() {
    let k3 = Lattice::preset(&Preset::K3);
    let mut rng = random::rng(7);
    for &n in &[2i64, 4, 6, 12, -2, 0] {
        for _ in 0..10 {
            let v0 = random::vector_of_norm(&k3, &mut rng, n, 2);
            let v = random::scramble(&k3, &mut rng, &v0, 4);
            let target = k3.canonical_vector(&Rat::int(n)).unwrap();
            let mv = eichler_move(&k3, &v, &target).unwrap();
            assert_eq!(mv.g.apply(&v), target);
            let (_, nf) = eichler_normal_form(&k3, &v).unwrap();
            assert_eq!(nf, target);
        }
    }
}

#[test]
fn decompose_random_words() {
    let lat = Lattice::preset(&Preset::K3n(2));
    let mut rng = random::rng(1);
    for _ in 0..10 {
        let phi = random::random_oplus_word(&lat, &mut rng, 6);
        let nf = decompose(&lat, &phi).unwrap();
        assert!(verify_normal_form(&lat, &nf, &phi).ok);
        for g in &nf.gammas {
            let iso = hklat::Isometry::new(&lat, g.clone()).unwrap();
            assert!(membership(&lat, &iso, Group::Gamma).unwrap().member);
        }
    }
}
