//! Acceptance criteria, one PASS/FAIL line each. Runs without the test
//! harness so the lines always reach the output; exits non-zero on failure.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dirackit_core::calculus::dirac_field::sample_points;
use dirackit_core::calculus::fields::exterior_derivative;
use dirackit_core::calculus::numeric::derivative_discrepancy;
use dirackit_core::calculus::{Bivector, Chart, Form, LocalAlgebroid, Poly, Section, VectorField};
use dirackit_core::dirac::{self, Hypothesis, LinearDirac, Status};
use dirackit_core::limits::{block_symplectic_ascending, product_projective, with_level_replaced_by_e, with_level_rescaled};
use dirackit_core::mechanics::{
    build_system, default_initial_state, default_params, diagnostics, integrate, reference, IntegrateOptions,
};
use dirackit_core::{linalg, PontryaginSpace, Subspace, DEFAULT_TOL};

const SUITE_SIZE: usize = 500;
const SUBSPACE_TOL: f64 = 1e-9;
const ISOTROPY_TOL: f64 = 1e-10;
const ROUND_TRIP_TOL: f64 = 1e-9;
const POLY_TOL: f64 = 1e-10;
const MECH_TOL: f64 = 1e-8;
const TRAJECTORY_TOL: f64 = 1e-6;
const INVARIANT_TOL: f64 = 1e-10;
const COHERENCE_TOL: f64 = 1e-12;
const FD_TOL: f64 = 1e-6;

struct Verdicts {
    failed: usize,
}

impl Verdicts {
    fn record(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        println!("{} criterion {id}: {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

fn skew(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = uniform(rng, n, n);
    &a - a.transpose()
}

/// Full dual (identity or random invertible pairing) or a proper partial dual.
fn random_space(rng: &mut ChaCha8Rng, n: usize, full: bool) -> PontryaginSpace {
    let b = if full {
        if rng.gen_bool(0.5) {
            DMatrix::identity(n, n)
        } else {
            uniform(rng, n, n) + DMatrix::identity(n, n) * 2.0
        }
    } else {
        let m = rng.gen_range(0..n);
        uniform(rng, m, n)
    };
    PontryaginSpace::new(b, DEFAULT_TOL).expect("random pairing has full row rank")
}

/// `Q = A B` is skew for the pairing since `QᵀB = −Bᵀ A B`.
fn random_graph_flat(rng: &mut ChaCha8Rng, space: &PontryaginSpace) -> LinearDirac {
    let (n, m) = (space.dim_e(), space.dim_eflat());
    let q = if rng.gen_bool(0.8) {
        Some(skew(rng, m) * space.pairing())
    } else {
        None
    };
    let f = if rng.gen_bool(0.5) {
        let k = rng.gen_range(0..=n);
        let vs: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        Some(Subspace::span(&vs, n, DEFAULT_TOL).unwrap())
    } else {
        None
    };
    dirac::construct_graph_flat(q.as_ref(), f.as_ref(), space).unwrap()
}

/// `P = B⁺A + K C` with `A` skew and `K` spanning `ker B`, so `B P = A`.
fn random_graph_sharp(rng: &mut ChaCha8Rng, space: &PontryaginSpace) -> LinearDirac {
    let (n, m) = (space.dim_e(), space.dim_eflat());
    let b = space.pairing();
    let pinv = linalg::pseudo_inverse(b, DEFAULT_TOL, 0.0);
    let kernel = linalg::kernel(b, DEFAULT_TOL, 0.0);
    let mut p = pinv * skew(rng, m);
    if kernel.ncols() > 0 && rng.gen_bool(0.5) {
        p += &kernel * uniform(rng, kernel.ncols(), m);
    }
    assert_eq!(p.shape(), (n, m));
    dirac::construct_graph_sharp(&p, space).unwrap()
}

fn random_certified_piece(rng: &mut ChaCha8Rng, n: usize) -> LinearDirac {
    let full = rng.gen_bool(0.5);
    let space = random_space(rng, n, full);
    let d = if rng.gen_bool(0.5) {
        random_graph_flat(rng, &space)
    } else {
        random_graph_sharp(rng, &space)
    };
    if d.is_certified() {
        d
    } else {
        dirac::construct_graph_flat(None, None, &space).unwrap()
    }
}

struct Instance {
    kind: &'static str,
    full: bool,
    d: LinearDirac,
}

fn suite(seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..SUITE_SIZE)
        .map(|i| {
            let kind = ["graph_flat", "graph_sharp", "direct_sum", "explicit"][i % 4];
            let n = rng.gen_range(1..=8);
            let full = rng.gen_bool(0.5);
            let d = match kind {
                "graph_flat" => {
                    let space = random_space(&mut rng, n, full);
                    random_graph_flat(&mut rng, &space)
                }
                "graph_sharp" => {
                    let space = random_space(&mut rng, n, full);
                    random_graph_sharp(&mut rng, &space)
                }
                "direct_sum" => {
                    let n1 = rng.gen_range(1..=4);
                    let n2 = rng.gen_range(1..=4);
                    let a = random_certified_piece(&mut rng, n1);
                    let b = random_certified_piece(&mut rng, n2);
                    dirac::direct_sum(&a, &b).unwrap()
                }
                _ => {
                    let space = random_space(&mut rng, n, full);
                    if rng.gen_bool(0.8) {
                        let base = random_graph_flat(&mut rng, &space);
                        let k = base.dim();
                        let mix = uniform(&mut rng, k, k) + DMatrix::identity(k, k) * 3.0;
                        let cols = base.subspace().basis() * mix;
                        let mut vs: Vec<Vec<f64>> = cols.column_iter().map(|c| c.iter().copied().collect()).collect();
                        if k > 1 {
                            // A redundant spanning vector.
                            let extra: Vec<f64> = vs[0].iter().zip(&vs[1]).map(|(a, b)| a - 2.0 * b).collect();
                            vs.push(extra);
                        }
                        dirac::construct_explicit(&vs, &space).unwrap()
                    } else {
                        let k = rng.gen_range(0..=space.ambient_dim());
                        let vs: Vec<Vec<f64>> = (0..k)
                            .map(|_| (0..space.ambient_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect())
                            .collect();
                        dirac::construct_explicit(&vs, &space).unwrap()
                    }
                }
            };
            let full = d.space().is_full_dual();
            Instance { kind, full, d }
        })
        .collect()
}

/// Criterion 1 is recorded here; criterion 3 shares the suite and is returned
/// for recording after criterion 2.
fn criterion_1_and_3(v: &mut Verdicts) -> (bool, String) {
    let start = Instant::now();
    let instances = suite(2024);
    let mut certified = 0;
    let mut isotropic_only = 0;
    let mut worst_eq: f64 = 0.0;
    let mut worst_iso: f64 = 0.0;
    let mut worst_lemma: f64 = 0.0;
    let mut rank_nullity_failures = 0;
    let mut dimension_law_failures = 0;
    let mut maximality_failures = 0;
    let mut kinds = std::collections::BTreeMap::new();
    let mut worst_recovery: f64 = 0.0;
    let mut worst_inverse: f64 = 0.0;
    let mut contradictions = 0;
    let mut literal_contradictions = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut t3 = std::time::Duration::ZERO;
    for inst in &instances {
        match inst.d.status() {
            Status::Certified => {}
            Status::IsotropicOnly => {
                isotropic_only += 1;
                continue;
            }
            Status::Rejected => continue,
        }
        certified += 1;
        *kinds.entry(inst.kind).or_insert(0) += 1;
        let d = &inst.d;
        let sp = d.space();
        worst_eq = worst_eq.max(d.subspace().equality_residual(d.orthogonal()).unwrap());
        worst_iso = worst_iso.max(sp.isotropy_residual(d.subspace()).unwrap());
        let kr = d.kernel_report().unwrap();
        worst_lemma = worst_lemma
            .max(kr.annihilator_of_l_residual)
            .max(kr.annihilator_of_d_cap_e_residual);
        let k = d.dim();
        if k != kr.l.dim() + kr.d_cap_eflat.dim() || k != kr.lflat.dim() + kr.d_cap_e.dim() {
            rank_nullity_failures += 1;
        }
        if inst.full && k != sp.dim_e() {
            dimension_law_failures += 1;
        }
        for _ in 0..3 {
            let w = DVector::from_fn(sp.ambient_dim(), |_, _| rng.gen_range(-1.0..1.0));
            if d.subspace().residual(&w) > 1e-6 && d.extension_is_isotropic(w.as_slice()).unwrap() {
                maximality_failures += 1;
            }
        }
        let t0 = Instant::now();
        let t = d.induced_tensors().unwrap();
        worst_recovery = worst_recovery.max(t.graph_recovery_residual);
        worst_inverse = worst_inverse.max(t.quotient_inverse_residual);
        let c = d.classify().unwrap();
        contradictions += c.contradictions;
        literal_contradictions += c.literal_contradictions;
        t3 += t0.elapsed();
    }
    let elapsed = start.elapsed().as_secs_f64() - t3.as_secs_f64();
    let ok1 = certified > 0
        && worst_eq <= SUBSPACE_TOL
        && worst_iso <= ISOTROPY_TOL
        && worst_lemma <= SUBSPACE_TOL
        && rank_nullity_failures == 0
        && dimension_law_failures == 0
        && maximality_failures == 0
        && elapsed <= 10.0;
    v.record(
        1,
        "linear Dirac suite",
        ok1,
        format!(
            "{certified}/{SUITE_SIZE} certified ({kinds:?}), {isotropic_only} isotropic-only; \
             D=D⊥ residual {worst_eq:.2e} (≤{SUBSPACE_TOL:e}), isotropy {worst_iso:.2e} (≤{ISOTROPY_TOL:e}), \
             kernel lemmas {worst_lemma:.2e}, rank-nullity failures {rank_nullity_failures}, \
             full-dual dim failures {dimension_law_failures}, maximality failures {maximality_failures}, {elapsed:.2}s (≤10s)"
        ),
    );
    let ok3 = certified > 0 && worst_recovery <= ROUND_TRIP_TOL && worst_inverse <= ROUND_TRIP_TOL && contradictions == 0;
    (
        ok3,
        format!(
            "graph recovery {worst_recovery:.2e}, quotient inverse {worst_inverse:.2e} (≤{ROUND_TRIP_TOL:e}), \
             contradictions {contradictions}; literal (unseparated) reading contradictions {literal_contradictions}"
        ),
    )
}

fn criterion_2(v: &mut Verdicts) {
    let space = PontryaginSpace::coordinate_dual(2, &[1], DEFAULT_TOL).unwrap();
    let sep = dirac::construct_graph_sharp(&DMatrix::zeros(2, 1), &space).unwrap();
    let perp_expected = Subspace::span(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]], 3, DEFAULT_TOL).unwrap();
    let sep_ok = sep.status() == Status::IsotropicOnly
        && sep.diagnostics().failed_hypothesis == Some(Hypothesis::SeparationHypothesisFails)
        && sep.orthogonal().equals(&perp_expected).unwrap();
    let space3 = PontryaginSpace::coordinate_dual(3, &[0, 1], DEFAULT_TOL).unwrap();
    let f = Subspace::coordinate(3, &[0], DEFAULT_TOL);
    let bi = dirac::construct_graph_flat(None, Some(&f), &space3).unwrap();
    let bi_ok = bi.status() == Status::IsotropicOnly
        && bi.diagnostics().failed_hypothesis == Some(Hypothesis::BiannihilatorConditionFails);
    v.record(
        2,
        "counterexample fidelity",
        sep_ok && bi_ok,
        format!(
            "E=ℝ², E♭=span{{e₂*}}, Pmap=0 → {:?} / {:?}; F=span{{e₁}} → {:?} / {:?}",
            sep.status(),
            sep.diagnostics().failed_hypothesis.map(|h| h.to_string()),
            bi.status(),
            bi.diagnostics().failed_hypothesis.map(|h| h.to_string()),
        ),
    );
}

fn random_section(ch: &Chart, deg: u32, rng: &mut ChaCha8Rng) -> Section {
    let n = ch.dim();
    Section::new(
        (0..n).map(|_| ch.random_poly(deg, rng)).collect(),
        (0..n).map(|_| ch.random_poly(deg, rng)).collect(),
    )
}

fn random_two_form(ch: &Chart, deg: u32, rng: &mut ChaCha8Rng) -> Form {
    Form::from_components(ch.dim(), 2, (0..3).map(|_| ch.random_poly(deg, rng)).collect()).unwrap()
}

fn graph_section(x: &VectorField, omega: &Form) -> Section {
    Section::from_fields(x, &omega.interior(x).unwrap()).unwrap()
}

fn criterion_4(v: &mut Verdicts) {
    let start = Instant::now();
    let ch = Chart::euclidean(3);
    let alg = LocalAlgebroid::tangent(&ch);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cyclic: f64 = 0.0;
    let mut corrected: f64 = 0.0;
    let mut agree_isotropic: f64 = 0.0;
    let mut j2: f64 = 0.0;
    let mut general_gap: f64 = 0.0;
    for _ in 0..100 {
        let s: Vec<Section> = (0..3).map(|_| random_section(&ch, 2, &mut rng)).collect();
        let rep = alg.jacobiator_check([&s[0], &s[1], &s[2]], POLY_TOL).unwrap();
        cyclic = cyclic.max(rep.vector_residual).max(rep.form_residual);
        let c = alg.courant_report(&s[0], &s[1], POLY_TOL).unwrap();
        corrected = corrected.max(c.correction_residual);
        general_gap = general_gap.max(c.forms_residual);
        // Degree ≤ 2 sections of an isotropic graph: ω and X of degree ≤ 1.
        let omega = random_two_form(&ch, 1, &mut rng);
        let g: Vec<Section> = (0..3)
            .map(|_| graph_section(&VectorField::new((0..3).map(|_| ch.random_poly(1, &mut rng)).collect()), &omega))
            .collect();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let c = alg.courant_report(&g[a], &g[b], POLY_TOL).unwrap();
            agree_isotropic = agree_isotropic.max(c.forms_residual);
        }
        let rep = alg.jacobiator_check([&g[0], &g[1], &g[2]], POLY_TOL).unwrap();
        j2 = j2.max(rep.j2_residual.unwrap_or(f64::INFINITY));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = cyclic <= POLY_TOL && agree_isotropic <= POLY_TOL && corrected <= POLY_TOL && j2 <= POLY_TOL && elapsed <= 30.0;
    v.record(
        4,
        "Courant identities",
        ok,
        format!(
            "100 triples: cyclic identity {cyclic:.2e}, bracket forms on isotropic pairs {agree_isotropic:.2e}, \
             forms after ½d⟨⟨a,b⟩⟩ correction on general pairs {corrected:.2e} (raw gap {general_gap:.2e}), \
             J₂−½dT {j2:.2e} (all ≤{POLY_TOL:e}), {elapsed:.2}s (≤30s)"
        ),
    );
}

/// `{f, g} = Σ π^{ij} ∂_i f ∂_j g`, computed directly from the components.
fn poisson_oracle(pi: &Bivector, f: &Poly, g: &Poly) -> Poly {
    let n = pi.dim();
    let mut out = Poly::zero(f.nvars());
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out += &(&pi.component(i, j) * &(&f.deriv(i) * &g.deriv(j)));
            }
        }
    }
    out
}

fn cyclic_oracle(pi: &Bivector, x: &[Poly; 3]) -> Poly {
    let b = |f: &Poly, g: &Poly| poisson_oracle(pi, f, g);
    &(&b(&x[0], &b(&x[1], &x[2])) + &b(&x[1], &b(&x[2], &x[0]))) + &b(&x[2], &b(&x[0], &x[1]))
}

fn coordinate_sections(ch: &Chart, pi: &Bivector) -> Vec<Section> {
    (0..3)
        .map(|i| {
            let dx = Form::basis(ch, &[i], ch.constant(1.0)).unwrap();
            Section::from_fields(&pi.sharp(&dx).unwrap(), &dx).unwrap()
        })
        .collect()
}

fn criterion_5(v: &mut Verdicts) {
    let ch = Chart::euclidean(3);
    let alg = LocalAlgebroid::tangent(&ch);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let frame: Vec<VectorField> = (0..3).map(|i| VectorField::coordinate(&ch, i)).collect();
    let mut omega_gap: f64 = 0.0;
    for _ in 0..20 {
        let omega = random_two_form(&ch, 2, &mut rng);
        let dw = exterior_derivative(&ch, &omega).unwrap();
        let s: Vec<Section> = frame.iter().map(|x| graph_section(x, &omega)).collect();
        let t = alg.tensor(&s[0], &s[1], &s[2]).unwrap();
        omega_gap = omega_gap.max((&t - &dw.component(&[0, 1, 2])).max_abs_coeff());
        let xs: Vec<VectorField> = (0..3)
            .map(|_| VectorField::new((0..3).map(|_| ch.random_poly(1, &mut rng)).collect()))
            .collect();
        let s: Vec<Section> = xs.iter().map(|x| graph_section(x, &omega)).collect();
        let t = alg.tensor(&s[0], &s[1], &s[2]).unwrap();
        let want = dw.evaluate(&[&xs[0], &xs[1], &xs[2]]).unwrap();
        omega_gap = omega_gap.max((&t - &want).max_abs_coeff());
    }
    let coords = [Poly::var(3, 0), Poly::var(3, 1), Poly::var(3, 2)];
    let mut pi_gap: f64 = 0.0;
    for _ in 0..20 {
        let pi = Bivector::from_components(3, (0..3).map(|_| ch.random_poly(2, &mut rng)).collect()).unwrap();
        let s = coordinate_sections(&ch, &pi);
        let t = alg.tensor(&s[0], &s[1], &s[2]).unwrap();
        pi_gap = pi_gap.max((&t - &cyclic_oracle(&pi, &coords)).max_abs_coeff());
    }
    let x1 = Poly::var(3, 0);
    let omega = Form::basis(&ch, &[1, 2], x1.clone()).unwrap();
    let s: Vec<Section> = frame.iter().map(|x| graph_section(x, &omega)).collect();
    let t_omega = alg.tensor(&s[0], &s[1], &s[2]).unwrap();
    let pi = Bivector::zero(&ch)
        .with_term(0, 1, ch.constant(1.0))
        .unwrap()
        .with_term(0, 2, x1)
        .unwrap();
    let s = coordinate_sections(&ch, &pi);
    let t_pi = alg.tensor(&s[0], &s[1], &s[2]).unwrap();
    let oracle = cyclic_oracle(&pi, &coords);
    let one = ch.constant(1.0);
    let witnesses = t_omega == one && t_pi == one && oracle == one;
    let ok = omega_gap <= POLY_TOL && pi_gap <= POLY_TOL && witnesses;
    v.record(
        5,
        "graph-tensor identities",
        ok,
        format!(
            "T_Dω − dω(X₁,X₂,X₃) {omega_gap:.2e}, T_Dπ − cyclic Jacobiator {pi_gap:.2e} (≤{POLY_TOL:e}); \
             witnesses T_ω = {t_omega}, T_π = {t_pi}, bracket-table oracle = {oracle}"
        ),
    );
}

fn criterion_6(v: &mut Verdicts) {
    let start = Instant::now();
    let p = default_params("rolling-disk").unwrap();
    let sys = build_system("rolling-disk", &p).unwrap();
    let z0 = default_initial_state("rolling-disk", &p).unwrap();
    let t = integrate(&sys, &z0, 1e-3, 10.0, IntegrateOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let d = diagnostics(&t).unwrap();
    let (td0, pd0) = (t.qdot[0][2], t.qdot[0][3]);
    let mut rate: f64 = 0.0;
    let mut circle: f64 = 0.0;
    for i in 0..t.len() {
        rate = rate.max((t.qdot[i][2] - td0).abs()).max((t.qdot[i][3] - pd0).abs());
        let (x, y) = reference::rolling_disk_xy(t.times[i], 1.0, td0, pd0, 0.0);
        circle = circle.max((t.q[i][0] - x).abs()).max((t.q[i][1] - y).abs());
    }
    let ok = td0 == 1.0
        && pd0 == 0.5
        && rate <= MECH_TOL
        && d.max_energy_drift <= MECH_TOL
        && d.max_constraint_residual <= MECH_TOL
        && d.max_membership_residual <= MECH_TOL
        && circle <= TRAJECTORY_TOL
        && elapsed <= 5.0;
    v.record(
        6,
        "rolling disk regression",
        ok,
        format!(
            "θ̇,φ̇ drift {rate:.2e}, energy {:.2e}, constraint {:.2e}, membership {:.2e} (≤{MECH_TOL:e}); \
             circle radius 2 error {circle:.2e} (≤{TRAJECTORY_TOL:e}); {elapsed:.2}s (≤5s)",
            d.max_energy_drift, d.max_constraint_residual, d.max_membership_residual
        ),
    );
}

fn criterion_7(v: &mut Verdicts) {
    let p = default_params("lc-circuit").unwrap();
    let sys = build_system("lc-circuit", &p).unwrap();
    let z0 = default_initial_state("lc-circuit", &p).unwrap();
    let t = integrate(&sys, &z0, 1e-3, 10.0, IntegrateOptions::default()).unwrap();
    let d = diagnostics(&t).unwrap();
    let c1 = |q: &[f64]| q[0] - q[2];
    let c2 = |q: &[f64]| q[1] - q[2] + q[3];
    let mut inv: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    for i in 0..t.len() {
        inv = inv.max((c1(&t.q[i]) - c1(&t.q[0])).abs()).max((c2(&t.q[i]) - c2(&t.q[0])).abs());
        let exact = reference::lc_circuit_state(t.times[i], 1.0, [1.0; 3], &z0);
        for (a, b) in t.q[i].iter().chain(&t.p[i]).zip(&exact) {
            oracle = oracle.max((a - b).abs());
        }
    }
    let ok = d.max_energy_drift <= MECH_TOL && inv <= INVARIANT_TOL && oracle <= TRAJECTORY_TOL;
    v.record(
        7,
        "LC circuit regression",
        ok,
        format!(
            "energy drift {:.2e} (≤{MECH_TOL:e}), Kirchhoff invariants {inv:.2e} (≤{INVARIANT_TOL:e}), \
             reduced-oscillator error {oracle:.2e} (≤{TRAJECTORY_TOL:e})",
            d.max_energy_drift
        ),
    );
}

fn criterion_8(v: &mut Verdicts) {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, seq) in [
        ("block-symplectic ascending", block_symplectic_ascending(5, DEFAULT_TOL).unwrap()),
        ("product projective", product_projective(5, DEFAULT_TOL).unwrap()),
    ] {
        let val = seq.validate_any().unwrap();
        let coh = seq.coherence_report().unwrap();
        let base_ok = val.valid && coh.coherent && coh.max_omega_residual <= COHERENCE_TOL;
        let mut misplaced = Vec::new();
        for lvl in 1..=5 {
            let replaced = with_level_replaced_by_e(&seq, lvl).unwrap().validate_any().unwrap();
            if replaced.flagged_levels != vec![lvl] {
                misplaced.push(format!("E⊕0@{lvl}→{:?}", replaced.flagged_levels));
            }
            let rescaled = with_level_rescaled(&seq, lvl, 2.0).unwrap();
            let val = rescaled.validate_any().unwrap();
            let flagged = if val.valid {
                rescaled.coherence_report().unwrap().flagged_levels
            } else {
                val.flagged_levels
            };
            if flagged != vec![lvl] {
                misplaced.push(format!("2Ω@{lvl}→{flagged:?}"));
            }
        }
        ok &= base_ok && misplaced.is_empty();
        details.push(format!(
            "{name}: valid {}, Ω residual {:.2e} (≤{COHERENCE_TOL:e}), injected violations mislocated {misplaced:?}",
            val.valid, coh.max_omega_residual
        ));
    }
    v.record(8, "limit coherence", ok, details.join("; "));
}

fn criterion_9(v: &mut Verdicts) {
    let ch = Chart::euclidean(3);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let points = sample_points(&ch, 20, 9, 1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = VectorField::new((0..3).map(|_| ch.random_poly(3, &mut rng)).collect());
        for c in &x.comps {
            worst = worst.max(derivative_discrepancy(&ch, c, &points));
        }
    }
    v.record(
        9,
        "differentiation cross-check",
        worst <= FD_TOL,
        format!("20 degree-3 fields × 20 points: max |exact − central difference| {worst:.2e} (≤{FD_TOL:e})"),
    );
}

fn main() {
    // Under `cargo test -- --list` the harness expects no output.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut v = Verdicts { failed: 0 };
    let (ok3, detail3) = criterion_1_and_3(&mut v);
    criterion_2(&mut v);
    v.record(3, "theorem round-trip", ok3, detail3);
    criterion_4(&mut v);
    criterion_5(&mut v);
    criterion_6(&mut v);
    criterion_7(&mut v);
    criterion_8(&mut v);
    criterion_9(&mut v);
    println!("acceptance: {} of 9 criteria failed", v.failed);
    if v.failed > 0 {
        std::process::exit(1);
    }
}
