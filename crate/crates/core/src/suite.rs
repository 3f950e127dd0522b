//! The seeded verification suite behind `hklat verify all` and the acceptance tests.
//!
//! Each check is exact. Reports contain no timings, so equal seeds give
//! byte-identical output.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{decompose, eichler_normal_form, reflection_matrix, verify_normal_form, Transvection};
use crate::isometry::{characters, membership, Group, Isometry};
use crate::lattice::{DiscAction, Lattice, Preset};
use crate::llv::{HilbertPair, LlvSpace};
use crate::matrix::{is_zero_vec, unit, vadd, vscale, QMat, QVec};
use crate::mukai::{self, MukaiVector};
use crate::pontryagin::{GradingKind, ShModel};
use crate::random::{self, Rng64};
use crate::rat::Rat;
use crate::snrep::{compose_rule_check, expected_dim, recover, SnSpace};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub checked: usize,
    pub detail: String,
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "normal form round trip"),
    (2, "Eichler transitivity"),
    (3, "reflection constants"),
    (4, "symmetric power functor"),
    (5, "S_[n] dimensions"),
    (6, "dual Lefschetz operator"),
    (7, "Fourier-Mukai normalization"),
    (8, "Hilbert scheme lift"),
    (9, "Pontryagin product"),
    (10, "double orbits and cyclic certificates"),
];

/// Tallies checks and keeps the first failure.
struct Tally {
    checked: usize,
    failure: Option<String>,
}

impl Tally {
    fn new() -> Tally {
        Tally { checked: 0, failure: None }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    /// Counts as one check; an error is a failure.
    fn result<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => {
                self.checked += 1;
                Some(v)
            }
            Err(e) => {
                self.check(false, || format!("{}: {e}", what()));
                None
            }
        }
    }

    fn finish(self, id: u32, ok_detail: String) -> CriterionReport {
        let name = CRITERIA[id as usize - 1].1;
        match self.failure {
            None => CriterionReport { id, name, pass: true, checked: self.checked, detail: ok_detail },
            Some(f) => CriterionReport { id, name, pass: false, checked: self.checked, detail: f },
        }
    }
}

fn sub_rng(seed: u64, id: u32) -> Rng64 {
    random::rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(id as u64))
}

/// U^k ⊕ ⟨2⟩ ⊕ ⟨−4⟩ ⊕ … of rank d, with the hyperbolic planes first.
pub fn split_lattice(d: usize) -> Lattice {
    let mut g = QMat::zeros(d, d);
    let planes = if d >= 4 { 2 } else { 1 };
    for k in 0..planes.min(d / 2) {
        g[(2 * k, 2 * k + 1)] = Rat::int(-1);
        g[(2 * k + 1, 2 * k)] = Rat::int(-1);
    }
    for i in 2 * planes.min(d / 2)..d {
        g[(i, i)] = Rat::int(if i % 2 == 0 { 2 } else { -4 });
    }
    Lattice::custom(Some(format!("split{d}")), g).expect("nondegenerate")
}

pub fn run(id: u32, seed: u64) -> Result<CriterionReport> {
    let mut rng = sub_rng(seed, id);
    Ok(match id {
        1 => normal_form_round_trip(&mut rng, 100),
        2 => eichler_transitivity(&mut rng, 50),
        3 => reflection_constants(&mut rng),
        4 => functor_round_trips(&mut rng),
        5 => sn_dimensions(&mut rng),
        6 => dual_lefschetz(&mut rng, 25),
        7 => fm_normalization(&mut rng, 100),
        8 => hilbert_lift(&mut rng, 10),
        9 => pontryagin_suite(&mut rng)?,
        10 => double_orbits(&mut rng, 20),
        _ => return Err(Error::Precondition(format!("no criterion {id}"))),
    })
}

/// Runs every criterion, each on its own thread and its own seeded stream.
pub fn run_all(seed: u64) -> Result<Vec<CriterionReport>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = CRITERIA.iter().map(|&(id, _)| s.spawn(move || run(id, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    })
}

pub fn normal_form_round_trip(rng: &mut Rng64, count: usize) -> CriterionReport {
    let lat = Lattice::preset(&Preset::K3n(2));
    let mut t = Tally::new();
    let mut max_k = 0;
    for i in 0..count {
        let phi = random::random_oplus_word(&lat, rng, 6);
        let Some(nf) = t.result(decompose(&lat, &phi), || format!("word {i}: decompose")) else { continue };
        max_k = max_k.max(nf.k);
        let rep = verify_normal_form(&lat, &nf, &phi);
        t.check(rep.ok, || format!("word {i}: {:?}", rep.failures));
    }
    t.finish(1, format!("{count} words, max k = {max_k}"))
}

pub fn eichler_transitivity(rng: &mut Rng64, per_norm: usize) -> CriterionReport {
    let lat = Lattice::preset(&Preset::K3);
    let mut t = Tally::new();
    let mut steps = 0;
    for n in [2i64, 4, 6, 12] {
        let target = lat.canonical_vector(&Rat::int(n)).expect("K3 has planes");
        for i in 0..per_norm {
            let v0 = random::vector_of_norm(&lat, rng, n, 2);
            let v = random::scramble(&lat, rng, &v0, 4);
            let Some((word, nf)) = t.result(eichler_normal_form(&lat, &v), || format!("N={n} #{i}")) else { continue };
            t.check(nf == target, || format!("N={n} #{i}: normal form {nf:?}"));
            t.check(word.matrix(&lat).mul_vec(&v) == target, || format!("N={n} #{i}: word does not reach the target"));
            for (e, a) in &word.steps {
                let m = Transvection::new(&lat, e.clone(), a.clone()).matrix();
                let ok = match Isometry::new(&lat, m) {
                    Ok(iso) => {
                        let ch = characters(&lat, &iso);
                        iso.is_integral() && ch.nu == 1 && ch.det == 1 && ch.disc == DiscAction::Plus
                    }
                    Err(_) => false,
                };
                steps += 1;
                t.check(ok, || format!("N={n} #{i}: a transvection fails its characters"));
            }
        }
    }
    t.finish(2, format!("{} vectors, {steps} transvections", 4 * per_norm))
}

pub fn reflection_constants(rng: &mut Rng64) -> CriterionReport {
    let mut t = Tally::new();
    for d in 1..=5i64 {
        let lat = Lattice::preset(&Preset::K3n(d as u32 + 1));
        let l = lat.l_part().expect("delta");
        let delta = lat.delta_vector().expect("delta");
        let mut us = vec![l.canonical_vector(&Rat::int(2 * d + 2)).expect("planes")];
        for _ in 0..3 {
            let v = random::vector_of_norm(&l, rng, 2 * d + 2, 2);
            us.push(random::scramble(&l, rng, &v, 3));
        }
        for u in us {
            let u = lat.embed_l(&u);
            let w = vadd(&u, &delta);
            t.check(lat.norm(&w) == Rat::int(2), || format!("d={d}: (u+δ)² = {}", lat.norm(&w)));
            let img = reflection_matrix(&lat, &w).mul_vec(&delta);
            let want = vadd(&vscale(&Rat::int(2 * d), &u), &vscale(&Rat::int(1 + 2 * d), &delta));
            t.check(img == want, || format!("d={d}: ρ(δ) = {img:?}"));
        }
    }
    t.finish(3, "d = 1..5".into())
}

fn random_isometry(lat: &Lattice, rng: &mut Rng64) -> QMat {
    let len = rng.gen_range(1..=4);
    random::random_reflection_word(lat, rng, len, 1).into_matrix()
}

pub fn functor_round_trips(rng: &mut Rng64) -> CriterionReport {
    let mut t = Tally::new();
    let llv = LlvSpace::new(&Lattice::preset(&Preset::K3n(2)));
    let cases: Vec<(String, SnSpace, usize)> = vec![
        ("(5,2)".into(), SnSpace::new(&split_lattice(5), 2).expect("valid"), 30),
        ("(5,3)".into(), SnSpace::new(&split_lattice(5), 3).expect("valid"), 30),
        ("(7,2)".into(), SnSpace::new(&split_lattice(7), 2).expect("valid"), 30),
        ("(25,2)".into(), SnSpace::over_llv(&llv, 2).expect("valid"), 10),
    ];
    for (label, sp, trips) in &cases {
        let lat = sp.lattice().clone();
        let even = sp.n() % 2 == 0;
        for i in 0..*trips {
            let f0 = random_isometry(&lat, rng);
            let Some(phi) = t.result(sp.restrict_sym(&f0), || format!("{label} #{i}: restrict")) else { continue };
            let Some(rec) = t.result(recover(sp, sp, &phi), || format!("{label} #{i}: recover")) else { continue };
            let want = if even && f0.det().signum() == -1 { f0.neg() } else { f0.clone() };
            t.check(rec.f == want, || format!("{label} #{i}: recovered map differs"));
            t.check(!even || rec.eps == 1, || format!("{label} #{i}: det twist"));
            if let Some(neg) = t.result(recover(sp, sp, &phi.neg()), || format!("{label} #{i}: recover(−Φ)")) {
                t.check(neg.f == rec.f.neg(), || format!("{label} #{i}: H(−Φ) ≠ −H(Φ)"));
            }
        }
        for i in 0..25 {
            let f = random_isometry(&lat, rng);
            let f1 = random_isometry(&lat, rng);
            let f2 = random_isometry(&lat, rng);
            let Some(phi) = t.result(sp.restrict_sym(&f), || format!("{label} triple {i}")) else { continue };
            let ok = t.result(compose_rule_check(sp, &f1, &f2, &phi), || format!("{label} triple {i}"));
            t.check(ok == Some(true), || format!("{label} triple {i}: composition rule"));
        }
    }
    t.finish(4, "(5,2), (5,3), (7,2), (25,2)".into())
}

pub fn sn_dimensions(rng: &mut Rng64) -> CriterionReport {
    let mut t = Tally::new();
    let mut spaces: Vec<(String, SnSpace, bool)> = Vec::new();
    for d in 2..=7 {
        for n in 1..=3 {
            spaces.push((format!("({d},{n})"), SnSpace::new(&split_lattice(d), n).expect("valid"), true));
        }
    }
    let llv = LlvSpace::new(&Lattice::preset(&Preset::K3n(2)));
    spaces.push(("(25,2)".into(), SnSpace::over_llv(&llv, 2).expect("valid"), true));
    spaces.push(("(25,3)".into(), SnSpace::over_llv(&llv, 3).expect("valid"), false));
    let mut d25 = 0;
    for (label, sp, span) in &spaces {
        let want = expected_dim(sp.base_dim(), sp.n());
        t.check(sp.dim() as u128 == want, || format!("{label}: kernel rank {} vs {want}", sp.dim()));
        if sp.base_dim() == 25 && sp.n() == 2 {
            d25 = sp.dim();
        }
        if *span {
            let r = t.result(sp.isotropic_span_rank(rng, sp.dim() + 20), || format!("{label}: span"));
            t.check(r == Some(sp.dim()), || format!("{label}: span rank {r:?} vs {}", sp.dim()));
        }
    }
    t.check(d25 == 324, || format!("dim S_[2] at d=25 is {d25}"));
    t.finish(5, format!("{} spaces, dim S_[2](25) = {d25}", spaces.len()))
}

/// τ∘μ_s∘(ι of a random isometry of Λ), a degree-reversing isometry.
pub fn random_degree_reversing(llv: &LlvSpace, rng: &mut Rng64) -> QMat {
    let h = random_isometry(llv.base(), rng);
    let s = Rat::new(rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=4));
    llv.tau().mul(&llv.mu(&s).expect("s ≠ 0")).mul(&llv.extend(&h).expect("square"))
}

/// μ_s∘(ι of a random isometry of Λ), a graded isometry.
pub fn random_graded(llv: &LlvSpace, rng: &mut Rng64) -> QMat {
    let h = random_isometry(llv.base(), rng);
    let s = Rat::new(rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=4));
    llv.mu(&s).expect("s ≠ 0").mul(&llv.extend(&h).expect("square"))
}

fn random_anisotropic(lat: &Lattice, rng: &mut Rng64) -> QVec {
    loop {
        let v = random::random_vector(lat.rank(), rng, 2);
        if !lat.norm(&v).is_zero() {
            return v;
        }
    }
}

pub fn dual_lefschetz(rng: &mut Rng64, count: usize) -> CriterionReport {
    let llv = LlvSpace::new(&Lattice::preset(&Preset::K3n(2)));
    let mut t = Tally::new();
    for i in 0..count {
        let phi = random_degree_reversing(&llv, rng);
        let lam = random_anisotropic(llv.base(), rng);
        let Some(rep) = t.result(llv.dual_lefschetz(&phi, &lam), || format!("#{i}")) else { continue };
        t.check(rep.psi_relation, || format!("#{i}: [e, ψ] ≠ (t(λ,λ)/2) h"));
        t.check(rep.psi_degree, || format!("#{i}: [h, ψ] ≠ −2ψ"));
        t.check(rep.sl2.iter().all(|&b| b), || format!("#{i}: sl2 relations {:?}", rep.sl2));
        t.check(rep.kills_alpha, || format!("#{i}: dual does not kill α"));
        let s = Rat::int(rng.gen_range(2..=4));
        let scaled = llv.mu(&s).expect("s ≠ 0").mul(&phi);
        if let Some(rep2) = t.result(llv.dual_lefschetz(&scaled, &lam), || format!("#{i} scaled")) {
            t.check(rep2.dual == rep.dual, || format!("#{i}: dual depends on the scaling"));
        }
    }
    t.finish(6, format!("{count} isometries"))
}

pub fn fm_normalization(rng: &mut Rng64, count: usize) -> CriterionReport {
    let llv = LlvSpace::new(&Lattice::preset(&Preset::K3n(2)));
    let rank = llv.base().rank();
    let mut t = Tally::new();
    for i in 0..count {
        let r = Rat::int(rng.gen_range(1..=5) * if rng.gen_bool(0.3) { -1 } else { 1 });
        let lx = random::random_vector(rank, rng, 3);
        let ly = random::random_vector(rank, rng, 3);
        let Some(img) = t.result(llv.fm_beta_image(&r, &ly), || format!("#{i}")) else { continue };
        t.check(llv.pair(&img, &img).is_zero(), || format!("#{i}: FM line is not isotropic"));
        // Φ̃ = B_{λY/r} ∘ τ μ_r ι_h ∘ B_{λX/r} sends β to the FM line
        let h = random_isometry(llv.base(), rng);
        let core = llv.tau().mul(&llv.mu(&r).expect("r ≠ 0")).mul(&llv.extend(&h).expect("square"));
        let over = |v: &QVec| -> QVec { v.iter().map(|x| x / &r).collect() };
        let phi = llv.b_field(&over(&ly)).expect("dims").mul(&core).mul(&llv.b_field(&over(&lx)).expect("dims"));
        t.check(phi.mul_vec(&llv.beta()) == img, || format!("#{i}: synthetic kernel misses the FM line"));
        let Some((norm, rev)) = t.result(llv.normalize_fm(&phi, &r, &lx, &ly), || format!("#{i}: normalize")) else { continue };
        t.check(rev, || format!("#{i}: normalized map is not degree-reversing"));
        let nb = norm.mul_vec(&llv.beta());
        let on_alpha = nb.iter().enumerate().all(|(j, x)| j == 0 || x.is_zero()) && !nb[0].is_zero();
        t.check(on_alpha, || format!("#{i}: span β does not go to span α"));
        t.check(rev == (norm.mul(&llv.grading()) == llv.grading().mul(&norm).neg()), || format!("#{i}: flag"));
    }
    t.finish(7, format!("{count} kernels"))
}

pub fn hilbert_lift(rng: &mut Rng64, per_case: usize) -> CriterionReport {
    let mut t = Tally::new();
    let mut total = 0;
    for n in [2u32, 3] {
        let hp = HilbertPair::new(n).expect("n ≥ 2");
        let k3 = hp.k3.clone();
        for r in 1..=3i64 {
            for i in 0..per_case {
                let varphi = random_isometry(k3.space(), rng);
                let a1 = random::random_vector(22, rng, 2);
                let a2 = random::random_vector(22, rng, 2);
                let ok = t.result(hp.kernel_c1_identity(&varphi, r, &a1, &a2), || format!("n={n} r={r} #{i}"));
                t.check(ok == Some(true), || format!("n={n} r={r} #{i}: operator identity fails"));
                let lifted = hp.hilb_lift(&varphi, varphi.det().signum());
                let iso = lifted.map(|m| hp.k3n.is_isometry(&m)).unwrap_or(false);
                t.check(iso, || format!("n={n} r={r} #{i}: lift is not an isometry"));
                total += 1;
            }
        }
    }
    t.finish(8, format!("{total} isometries"))
}

pub fn pontryagin_suite(rng: &mut Rng64) -> Result<CriterionReport> {
    let mut t = Tally::new();
    // K3 model: λ⋆μ = (λ,μ), x⋆[pt] = x, and −ρ_{(1,0,1)} conjugates cup to ⋆
    let k3 = Lattice::preset(&Preset::K3);
    let m1 = ShModel::new(&k3, 1)?;
    let one = m1.unit_cup();
    let pt = m1.unit_star();
    t.check(pt == m1.llv().beta(), || "K3: unit is not [pt]".into());
    let u = vadd(&m1.llv().alpha(), &m1.llv().beta());
    let minus_rho = reflection_matrix(m1.llv().space(), &u).neg();
    t.check(&minus_rho == m1.rho_tau_matrix(), || "K3: −ρ_u differs from ρ_τ".into());
    for i in 0..22 {
        let x = m1.psi(&[unit(22, i)])?;
        t.check(m1.star(&x, &pt)? == x, || format!("K3: e{i} ⋆ [pt]"));
        for j in 0..22 {
            let y = m1.psi(&[unit(22, j)])?;
            let want: QVec = one.iter().map(|c| c * &k3.gram()[(i, j)]).collect();
            t.check(m1.star(&x, &y)? == want, || format!("K3: e{i} ⋆ e{j}"));
            let mx = MukaiVector::from_vec(&x)?;
            let my = MukaiVector::from_vec(&y)?;
            t.check(mukai::k3_star(&mx, &my)?.to_vec() == m1.star(&x, &y)?, || format!("K3: Mukai ⋆ e{i} e{j}"));
        }
    }

    let base = Lattice::preset(&Preset::K3n(2));
    let m = ShModel::new(&base, 2)?;
    let unit_star = m.unit_star();
    let four_n = 4 * m.n() as i64;
    for i in 0..100 {
        let x = m.random_element(rng, 3, 0.04);
        let y = m.random_element(rng, 3, 0.04);
        let z = m.random_element(rng, 3, 0.04);
        let xy = m.star(&x, &y)?;
        t.check(xy == m.star(&y, &x)?, || format!("triple {i}: ⋆ not commutative"));
        t.check(m.star(&xy, &z)? == m.star(&x, &m.star(&y, &z)?)?, || format!("triple {i}: ⋆ not associative"));
        t.check(m.star(&x, &unit_star)? == x, || format!("triple {i}: ⋆ unit"));
        let cxy = m.cup(&x, &y)?;
        t.check(cxy == m.cup(&y, &x)?, || format!("triple {i}: ∪ not commutative"));
        t.check(m.cup(&cxy, &z)? == m.cup(&x, &m.cup(&y, &z)?)?, || format!("triple {i}: ∪ not associative"));
        t.check(m.cup(&m.unit_cup(), &x)? == x, || format!("triple {i}: ∪ unit"));
        t.check(m.rho_tau(&cxy) == m.star(&m.rho_tau(&x), &m.rho_tau(&y))?, || format!("triple {i}: ρ_τ"));
        let (a, b) = (2 * rng.gen_range(0..=4i64), 2 * rng.gen_range(0..=4i64));
        let hx = m.random_homogeneous(rng, a - 2 * m.n() as i64, 2);
        let hy = m.random_homogeneous(rng, b - 2 * m.n() as i64, 2);
        let p = m.star(&hx, &hy)?;
        if !is_zero_vec(&p) {
            let deg = m.cohomological_degree(&p);
            t.check(deg == Some(a + b - four_n), || format!("triple {i}: ⋆ degree {deg:?} for {a}+{b}"));
        }
    }
    let llv = m.llv().clone();
    for i in 0..10 {
        let g = random_graded(&llv, rng);
        let rep = m.conjugation_check(&g, rng, 3)?;
        t.check(rep.kind == GradingKind::Graded && rep.holds, || format!("graded g {i}"));
        let g = random_degree_reversing(&llv, rng);
        let rep = m.conjugation_check(&g, rng, 3)?;
        t.check(rep.kind == GradingKind::AntiGraded && rep.holds, || format!("anti-graded g {i}"));
    }
    for i in 0..5 {
        let g = random_degree_reversing(&llv, rng);
        t.check(m.star_independence(&g, rng, 5)?, || format!("⋆ depends on g {i}"));
    }
    let b = llv.b_field(&unit(23, 0))?;
    t.check(matches!(m.conjugation_check(&b, rng, 1), Err(Error::NotGraded)), || "B-field accepted as graded".into());
    Ok(t.finish(9, format!("K3 table 22x22, K3n(2) model dim {}", m.dim())))
}

pub fn double_orbits(rng: &mut Rng64, count: usize) -> CriterionReport {
    let mut t = Tally::new();
    let k3 = Lattice::preset(&Preset::K3);
    for i in 0..count {
        let norm = 2 * rng.gen_range(1..=6i64);
        let v = random::vector_of_norm(&k3, rng, norm, 2);
        let u = random::scramble(&k3, rng, &v, 3);
        let v2 = random::vector_of_norm(&k3, rng, norm, 2);
        let u2 = random::scramble(&k3, rng, &v2, 3);
        t.result(mukai::double_orbit_connect(&k3, &u, &u2), || format!("pair {i} (norm {norm})"));
    }
    for (lat, label) in [(k3.clone(), "K3"), (Lattice::preset(&Preset::K3n(2)), "K3n(2)")] {
        for i in 0..count {
            let r = rng.gen_range(1..=6i64);
            let v = random::vector_of_norm(&lat, rng, 2 * r, 2);
            let u = random::scramble(&lat, rng, &v, 2);
            let g = if lat.delta().is_some() {
                random::random_gamma_element(&lat, rng)
            } else {
                random::random_transvection(&lat, rng, 2)
            };
            let Some(g) = t.result(Isometry::new(&lat, g), || format!("{label} #{i}")) else { continue };
            let Some(cert) = t.result(mukai::make_cyclic(&lat, &u, &g), || format!("{label} #{i}")) else { continue };
            t.check(cert.r == Rat::int(r), || format!("{label} #{i}: r = {}", cert.r));
            t.check(mukai::verify_cyclic(&lat, &cert.f, &cert), || format!("{label} #{i}: verify"));
            let group = if lat.delta().is_some() { Group::Gamma } else { Group::OPlus };
            let mem = membership(&lat, &cert.g, group).map(|m| m.member).unwrap_or(false);
            t.check(mem, || format!("{label} #{i}: g is not a monodromy operator"));
        }
    }
    let r3 = mukai::fm_kernel_rank(3, 2);
    t.check(r3 == Rat::int(48), || format!("rank n!r^n for n=3, r=2 is {r3}"));
    t.finish(10, format!("{count} pairs, {} certificates", 2 * count))
}
