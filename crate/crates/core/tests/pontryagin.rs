use hklat::lattice::{Lattice, Preset};
use hklat::matrix::QMat;
use hklat::pontryagin::{GradingKind, ShModel};
use hklat::random::{random_reflection_word, rng};
use hklat::rat::Rat;

#[test]
fn k3n2_model_suite() {
    let base = Lattice::preset(&Preset::K3n(2));
    let m = ShModel::new(&base, 2).unwrap();
    assert_eq!(m.dim(), 324);
    let top = m.unit_star();
    assert_eq!(m.cohomological_degree(&top), Some(8));
    assert_eq!(m.cohomological_degree(&m.unit_cup()), Some(0));

    let mut r = rng(99);
    for _ in 0..10 {
        let x = m.random_element(&mut r, 2, 0.05);
        let y = m.random_element(&mut r, 2, 0.05);
        let z = m.random_element(&mut r, 2, 0.05);
        let xy = m.star(&x, &y).unwrap();
        assert_eq!(xy, m.star(&y, &x).unwrap());
        assert_eq!(m.star(&xy, &z).unwrap(), m.star(&x, &m.star(&y, &z).unwrap()).unwrap());
        assert_eq!(m.star(&x, &top).unwrap(), x);
        // ρ_τ is a ring isomorphism cup → ⋆
        assert_eq!(m.rho_tau(&m.cup(&x, &y).unwrap()), m.star(&m.rho_tau(&x), &m.rho_tau(&y)).unwrap());
    }
    // ⋆-grading: degree k × degree l → degree k + l − 4n
    for (a, b) in [(6, 6), (8, 4), (6, 8)] {
        let x = m.random_homogeneous(&mut r, a - 4, 2);
        let y = m.random_homogeneous(&mut r, b - 4, 2);
        let p = m.star(&x, &y).unwrap();
        assert_eq!(m.cohomological_degree(&p), Some(a + b - 8));
    }

    let llv = m.llv().clone();
    let h = random_reflection_word(&base, &mut r, 2, 1).into_matrix();
    let g = llv.mu(&Rat::int(2)).unwrap().mul(&llv.extend(&h).unwrap());
    let rep = m.conjugation_check(&g, &mut r, 3).unwrap();
    assert_eq!(rep.kind, GradingKind::Graded);
    assert!(rep.holds);
    let g2 = llv.tau().mul(&llv.mu(&Rat::new(1, 3)).unwrap()).mul(&llv.extend(&h).unwrap());
    let rep = m.conjugation_check(&g2, &mut r, 3).unwrap();
    assert_eq!(rep.kind, GradingKind::AntiGraded);
    assert!(rep.holds);
    assert!(m.star_independence(&g2, &mut r, 3).unwrap());
    let b = llv.b_field(&hklat::matrix::unit(23, 0)).unwrap();
    assert!(m.conjugation_check(&b, &mut r, 1).is_err());
    assert!(m.conjugation_check(&QMat::identity(25), &mut r, 1).unwrap().holds);
}
