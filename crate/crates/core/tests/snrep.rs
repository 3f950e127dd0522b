use hklat::lattice::{Lattice, Preset};
use hklat::llv::LlvSpace;
use hklat::matrix::{unit, vint, QMat};
use hklat::random::{random_reflection_word, rng};
use hklat::rat::Rat;
use hklat::snrep::{compose_rule_check, expected_dim, grading_correspondence, proportionality_check_degree2, recover, SnSpace};

fn split_lattice(d: usize) -> Lattice {
    let mut g = QMat::zeros(d, d);
    g[(0, 1)] = Rat::int(-1);
    g[(1, 0)] = Rat::int(-1);
    g[(2, 3)] = Rat::int(-1);
    g[(3, 2)] = Rat::int(-1);
    for i in 4..d {
        g[(i, i)] = Rat::int(if i % 2 == 0 { 2 } else { -4 });
    }
    Lattice::custom(None, g).unwrap()
}

fn round_trips(sp: &SnSpace, seed: u64, count: usize) {
    let mut r = rng(seed);
    let lat = sp.lattice().clone();
    let n = sp.n();
    for _ in 0..count {
        let f0 = random_reflection_word(&lat, &mut r, 3, 1).into_matrix();
        let phi = sp.restrict_sym(&f0).unwrap();
        let rec = recover(sp, sp, &phi).unwrap();
        let det = f0.det().signum();
        if n % 2 == 1 {
            assert_eq!(rec.f, f0);
        } else {
            let want = if det == 1 { f0.clone() } else { f0.neg() };
            assert_eq!(rec.f, want);
            assert_eq!(rec.eps, 1);
            let neg = recover(sp, sp, &phi.neg()).unwrap();
            assert_eq!(neg.f, rec.f.neg());
        }
    }
}

#[test]
fn small_round_trips() {
    for (d, n) in [(5, 2), (5, 3), (7, 2)] {
        let sp = SnSpace::new(&split_lattice(d), n).unwrap();
        assert_eq!(sp.dim() as u128, expected_dim(d, n));
        round_trips(&sp, 7 + d as u64 * 10 + n as u64, 10);
    }
}

#[test]
fn llv_k3n2_round_trip_and_psi() {
    let llv = LlvSpace::new(&Lattice::preset(&Preset::K3n(2)));
    let sp = SnSpace::over_llv(&llv, 2).unwrap();
    assert_eq!(sp.dim(), 324);
    round_trips(&sp, 11, 2);

    let a = vint(&[1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
    let b = vint(&[0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    let sym = sp.sym();
    let alpha = llv.alpha();
    let beta = llv.beta();
    // Ψ(1) = α²/2, Ψ(λ) = αλ, Ψ(λμ) = λμ + (λ,μ)αβ
    let half = Rat::new(1, 2);
    let want0: Vec<Rat> = sym.power(&alpha, 2).iter().map(|x| x * &half).collect();
    assert_eq!(sp.to_sym(&sp.psi(&[]).unwrap()), want0);
    let la = llv.embed(&a);
    let lb = llv.embed(&b);
    assert_eq!(sp.to_sym(&sp.psi(&[a.clone()]).unwrap()), sym.mul_linear(1, &alpha, &la));
    let ab = sym.mul_linear(1, &la, &lb);
    let ab_pair = llv.base().pair(&a, &b);
    let ab_ab: Vec<Rat> = sym.mul_linear(1, &alpha, &beta).iter().map(|x| x * &ab_pair).collect();
    let want2: Vec<Rat> = ab.iter().zip(&ab_ab).map(|(x, y)| x + y).collect();
    assert_eq!(sp.to_sym(&sp.psi(&[a.clone(), b.clone()]).unwrap()), want2);

    // b₂(α²/2, β²/2) = 1/2
    let beta_half = sp.coords(&sym.power(&beta, 2).iter().map(|x| x * &half).collect::<Vec<_>>()).unwrap();
    assert_eq!(sp.pair(&sp.psi(&[]).unwrap(), &beta_half), Rat::new(1, 2));
}

#[test]
fn compose_rule_small() {
    for (d, n) in [(5, 2), (5, 3)] {
        let lat = split_lattice(d);
        let sp = SnSpace::new(&lat, n).unwrap();
        let mut r = rng(3);
        for _ in 0..5 {
            let f = random_reflection_word(&lat, &mut r, 2, 1).into_matrix();
            let f1 = random_reflection_word(&lat, &mut r, 3, 1).into_matrix();
            let f2 = random_reflection_word(&lat, &mut r, 1, 1).into_matrix();
            let phi = sp.restrict_sym(&f).unwrap();
            assert!(compose_rule_check(&sp, &f1, &f2, &phi).unwrap());
        }
        if n == 2 {
            let phi = sp.restrict_sym(&QMat::identity(d)).unwrap();
            let m = QMat::identity(d).neg();
            assert!(compose_rule_check(&sp, &m, &QMat::identity(d), &phi).unwrap());
        }
    }
}

#[test]
fn grading_and_proportionality() {
    let llv = LlvSpace::new(&Lattice::preset(&Preset::Kummer(2)));
    for n in [2, 3] {
        let sp = SnSpace::over_llv(&llv, n).unwrap();
        let tau = llv.tau();
        let phi = sp.restrict_sym(&tau).unwrap();
        assert_eq!(grading_correspondence(&sp, &phi, &tau).unwrap(), 1);
        let id = QMat::identity(llv.dim());
        assert_eq!(grading_correspondence(&sp, &QMat::identity(sp.dim()), &id).unwrap(), 0);
        let lam = unit(llv.base().rank(), 0);
        let b = llv.b_field(&lam).unwrap();
        assert!(grading_correspondence(&sp, &sp.restrict_sym(&b).unwrap(), &b).is_err());

        let t = Rat::int(3);
        let g = llv.mu(&t).unwrap().mul(&tau);
        let p = proportionality_check_degree2(&sp, &g).unwrap();
        assert!(p.eta_tau_iso);
        assert!(!p.scalar.is_zero());
    }
}
