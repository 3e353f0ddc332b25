//! Acceptance criteria 1 to 10. Runs without the libtest harness so that
//! every criterion prints its PASS/FAIL line; exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use indefsl_core::assembly::{assemble_operator, build_grid, Variant};
use indefsl_core::budgets::CountVariant;
use indefsl_core::coeff::{check_comparison_conditions, CoefficientField, ComparisonMode, ScanPlan, Side};
use indefsl_core::eigen::{inertia_count, sym_tridiag_eigs, SymTridiag};
use indefsl_core::kneser::Verdict;
use indefsl_core::pipeline::{run_pipeline, AnalysisReport};
use indefsl_core::problem::{ProblemSpec, Sections};
use indefsl_core::spectra::{
    discrete_band_edge, fd_cell_eigenvalues, level_spectrum, period_cell, periodic_bands, AccVerdict, PStatus,
};
use indefsl_core::structure::{inertia_shift_check, resolvent_rank_check};

// Pinned tolerances.
const C1_PENCILS: usize = 20;
const C1_MAX_N: usize = 50;
const C1_EIG_TOL: f64 = 1e-10;
const C2_RATIO: f64 = 4.0;
const C2_RATIO_TOL: f64 = 0.2;
const C3_GAP_TOL: f64 = 1e-12;
const C4_BOX: f64 = 1.0;
const C8_EDGE_TOL: f64 = 1e-3;
const C8_CELL_NODES: usize = 400;
const C9_SV_TOL: f64 = 1e-8;
const C9_LEVEL: f64 = 5.0;

const SECOND: Duration = Duration::from_secs(1);

struct Outcome {
    checks: Vec<(String, bool)>,
    limit: Duration,
    elapsed: Duration,
}

impl Outcome {
    fn new(limit: Duration) -> Self {
        Outcome {
            checks: Vec::new(),
            limit,
            elapsed: Duration::ZERO,
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.checks.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1) && self.elapsed < self.limit
    }
}

fn fixture(name: &str) -> ProblemSpec {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ProblemSpec::from_json(&text).unwrap()
}

fn sections(names: &[&str]) -> Sections {
    let on = |s: &str| names.contains(&s);
    Sections {
        hypotheses: true,
        comparison: on("comparison"),
        spectrum: on("spectrum"),
        kneser: on("kneser"),
        budget: on("budget"),
        counts: on("counts"),
        structure: on("structure"),
    }
}

fn run(name: &str, names: &[&str]) -> AnalysisReport {
    let mut spec = fixture(name);
    spec.sections = sections(names);
    run_pipeline(&spec).unwrap()
}

fn random_pencil(rng: &mut ChaCha8Rng, n: usize, definite: bool) -> (SymTridiag, Vec<f64>) {
    let diag = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let off = (0..n - 1)
        .map(|_| {
            let e: f64 = rng.gen_range(0.1..2.0);
            if rng.gen_bool(0.5) {
                e
            } else {
                -e
            }
        })
        .collect();
    let r = (0..n)
        .map(|_| {
            let w: f64 = rng.gen_range(0.5..2.0);
            if definite || rng.gen_bool(0.5) {
                w
            } else {
                -w
            }
        })
        .collect();
    (SymTridiag::new(diag, off), r)
}

/// Eigenvalues of `R^{-1/2} T R^{-1/2}` for positive `R`, dense.
fn dense_pencil_eigs(t: &SymTridiag, r: &[f64]) -> Vec<f64> {
    let n = t.len();
    let m = DMatrix::from_fn(n, n, |i, j| t.to_dense()[(i, j)] / (r[i] * r[j]).sqrt());
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn c1_oracles() -> Outcome {
    let mut o = Outcome::new(10 * SECOND);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    let mut inertia_ok = true;
    for _ in 0..C1_PENCILS {
        let n = rng.gen_range(2..=C1_MAX_N);
        let (t, r) = random_pencil(&mut rng, n, true);
        let got = sym_tridiag_eigs(&t, &r, None).unwrap();
        let want = dense_pencil_eigs(&t, &r);
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
        inertia_ok &= got.len() == want.len();

        let (t, r) = random_pencil(&mut rng, n, false);
        let shift = rng.gen_range(-3.0..3.0);
        let inertia = inertia_count(&t, shift, &r).unwrap();
        let shifted = DMatrix::from_fn(n, n, |i, j| t.to_dense()[(i, j)] - if i == j { shift * r[i] } else { 0.0 });
        let ev = shifted.symmetric_eigenvalues();
        let neg = ev.iter().filter(|&&x| x < 0.0).count();
        let pos = ev.iter().filter(|&&x| x > 0.0).count();
        inertia_ok &= inertia.n_minus == neg && inertia.n_plus == pos && inertia.n_zero == n - neg - pos;
    }
    o.check(worst < C1_EIG_TOL, format!("bisection vs dense max dev {worst:.1e} (< {C1_EIG_TOL:.0e})"));
    o.check(inertia_ok, format!("inertia equals explicit sign count on {C1_PENCILS} indefinite pencils"));
    o
}

fn c2_convergence() -> Outcome {
    let mut o = Outcome::new(10 * SECOND);
    // Dirichlet -u'' on (-pi/2, pi/2), a translate of (0, pi): eigenvalues k^2.
    let field = CoefficientField::parse("1", "1", "0").unwrap().with_window(0.0, 0.0);
    let eigs = |cells: f64| -> Vec<f64> {
        let grid = build_grid(0.5 * PI, 0.5 * PI, cells / PI, 0.0, 0.0).unwrap();
        let op = assemble_operator(&field, &grid, Variant::KFull).unwrap();
        sym_tridiag_eigs(&op.t, &op.r, None).unwrap()
    };
    let coarse = eigs(40.0);
    let fine = eigs(80.0);
    let mut ratios = Vec::new();
    for k in 1..=5 {
        let exact = (k * k) as f64;
        ratios.push((coarse[k - 1] - exact) / (fine[k - 1] - exact));
    }
    let ok = ratios.iter().all(|r| (r - C2_RATIO).abs() <= C2_RATIO_TOL);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    o.check(ok, format!("error ratios k=1..5 [{}] within {C2_RATIO} +- {C2_RATIO_TOL}", shown.join(", ")));
    o
}

fn c3_essential() -> Outcome {
    let mut o = Outcome::new(180 * SECOND);
    let rep = run("gap_family.json", &["spectrum"]);
    let s = rep.spectrum.ok().expect("spectrum section");
    let gap = s.essential.main_gap();
    let gap_ok = gap.is_some_and(|g| (g.0 + 1.0).abs() < C3_GAP_TOL && (g.1 - 1.0).abs() < C3_GAP_TOL);
    o.check(gap_ok, format!("gap {gap:?}"));
    let inner: Vec<usize> = s.levels.iter().map(|l| l.real_in(-0.9, 0.9)).collect();
    let outer: Vec<usize> = s.levels.iter().map(|l| l.real_in(1.0, 2.0)).collect();
    let levels: Vec<f64> = s.levels.iter().map(|l| l.level).collect();
    let dims: Vec<usize> = s.levels.iter().map(|l| l.dim).collect();
    o.check(levels == [40.0, 80.0, 160.0], format!("X {levels:?}, N {dims:?}"));
    o.check(inner.windows(2).all(|w| w[0] == w[1]), format!("count in (-0.9, 0.9) {inner:?} stable"));
    o.check(outer.windows(2).all(|w| w[0] < w[1]), format!("count in (1, 2) {outer:?} strictly growing"));
    o
}

fn property_p_at_zero(rep: &AnalysisReport) -> Option<PStatus> {
    let s = rep.spectrum.ok()?;
    s.edges.iter().find(|e| e.point == 0.0).map(|e| e.property_p)
}

fn c4_coulomb() -> Outcome {
    let mut o = Outcome::new(300 * SECOND);
    let rep = run("coulomb.json", &["spectrum"]);
    let s = rep.spectrum.ok().expect("spectrum section");
    let pairs = s.pair_counts();
    o.check(
        pairs.windows(2).all(|w| w[0] <= w[1]) && pairs.last() >= pairs.first().map(|p| p + 1).as_ref(),
        format!("pairs {pairs:?} nondecreasing, +1 from X=40 to 160"),
    );
    let b = s.nonreal_box;
    o.check(b.re <= C4_BOX && b.im <= C4_BOX, format!("box |Re| <= {:.3}, |Im| <= {:.3}", b.re, b.im));
    let p = property_p_at_zero(&rep);
    o.check(p == Some(PStatus::Fails), format!("(P) at 0: {p:?}"));
    o
}

fn c5_sech2() -> Outcome {
    let mut o = Outcome::new(300 * SECOND);
    let rep = run("sech2.json", &["spectrum", "budget"]);
    let s = rep.spectrum.ok().expect("spectrum section");
    let pairs = s.pair_counts();
    o.check(pairs.windows(2).all(|w| w[0] == w[1]), format!("pairs {pairs:?} identical"));
    let pb = rep.budget.ok().and_then(|b| b.pair_bound.ok());
    o.check(
        pb.is_some_and(|c| c.pass && c.pairs.iter().all(|p| p.1 <= c.kappa0)),
        format!("pair bound kappa0 = {:?}", pb.map(|c| c.kappa0)),
    );
    let p = property_p_at_zero(&rep);
    o.check(p == Some(PStatus::Holds), format!("(P) at 0: {p:?}"));
    o
}

fn c6_kneser() -> Outcome {
    let mut o = Outcome::new(180 * SECOND);
    let cases = [
        ("cx2_m1.json", Verdict::Accumulate, Some(AccVerdict::Accumulating)),
        ("cx2_0.json", Verdict::NoAccumulate, Some(AccVerdict::Finite)),
        ("cx2_m0p25.json", Verdict::Inconclusive, None),
    ];
    for (name, want, sweep_want) in cases {
        let rep = run(name, &["kneser"]);
        let k = rep.kneser.ok().expect("kneser section");
        let verdicts: Vec<Verdict> = k.verdicts.iter().map(|v| v.verdict).collect();
        o.check(
            verdicts.len() == 2 && verdicts.iter().all(|&v| v == want),
            format!("{name}: verdicts {verdicts:?}"),
        );
        if let Some(sw) = sweep_want {
            let sweeps: Vec<Option<(AccVerdict, Vec<usize>)>> = k
                .cross_links
                .iter()
                .map(|c| c.sweep.ok().map(|e| (e.verdict, e.counts.clone())))
                .collect();
            o.check(
                sweeps.iter().all(|s| s.as_ref().is_some_and(|s| s.0 == sw)),
                format!("{name}: sweeps {sweeps:?}"),
            );
        }
    }
    o
}

fn c7_transfer() -> Outcome {
    let mut o = Outcome::new(60 * SECOND);
    let rep = run("gap_family.json", &["kneser"]);
    let k = rep.kneser.ok().expect("kneser section");
    let t = k.transfer.ok();
    o.check(
        t.is_some_and(|t| t.pass && t.order == 1),
        format!("transfer at n = 1 for q0 + exp(-x^2): {:?}", t.map(|t| t.pass)),
    );
    let pv = k.perturbed.ok();
    o.check(
        pv.is_some_and(|p| p.inherited && p.identical),
        format!("inherited and identical verdicts: {:?}", pv.map(|p| (p.inherited, p.identical))),
    );
    let c0 = CoefficientField::parse("sgn(x)", "1", "1").unwrap();
    let c1 = CoefficientField::parse("sgn(x)", "1", "1 + 1/(1+abs(x))").unwrap();
    let plan = ScanPlan::default();
    let lim = check_comparison_conditions(&c0, &c1, ComparisonMode::Limits, &plan).unwrap();
    let l1 = check_comparison_conditions(&c0, &c1, ComparisonMode::L1, &plan).unwrap();
    o.check(lim.pass, "q0 + 1/(1+|x|) passes limits mode");
    o.check(!l1.pass, format!("q0 + 1/(1+|x|) fails L1 mode ({})", l1.reason.as_deref().unwrap_or("")));
    o
}

/// Combined periodic and semiperiodic eigenvalues of one FD period cell,
/// ascending, in the spectral variable of `H_+` or `-H_-`.
fn cell_edges(field: &CoefficientField, side: Side) -> Vec<f64> {
    let (start, len) = period_cell(field, side).unwrap();
    let mut ev: Vec<f64> = [false, true]
        .iter()
        .flat_map(|&semi| fd_cell_eigenvalues(field, start, len, C8_CELL_NODES, semi).unwrap())
        .map(|v| side.sign() * v)
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn first_finite_gap(gaps: &[(f64, f64)]) -> Option<(f64, f64)> {
    gaps.iter().copied().find(|g| g.0.is_finite() && g.1.is_finite())
}

fn c8_periodic() -> Outcome {
    let mut o = Outcome::new(300 * SECOND);
    let free = fixture("periodic_cosine.json");
    let mut free_spec = free.clone();
    free_spec.coefficients.q = "0".into();
    let ff = free_spec.field().unwrap();
    let fb = periodic_bands(&ff, Side::Plus, free.numerics.k_max).unwrap();
    let single = fb.bands.len() == 1 && fb.bands.bands()[0].lo.abs() < 1e-9 && fb.bands.bands()[0].hi == f64::INFINITY;
    o.check(single, format!("q = 0: bands {:?}", fb.bands.bands()));

    let field = free.field().unwrap();
    let pert = free.perturbed_field().unwrap().unwrap();
    for side in [Side::Plus, Side::Minus] {
        let b = periodic_bands(&field, side, free.numerics.k_max).unwrap();
        let gap = match side {
            Side::Plus => first_finite_gap(&b.bands.gaps()),
            Side::Minus => b.bands.gaps().iter().rev().copied().find(|g| g.0.is_finite() && g.1.is_finite()),
        };
        let fd = cell_edges(&field, side);
        // Bands are [e0, e1], [e2, e3], ...; the first gap is (e1, e2), or
        // its mirror for -H_-.
        let n = fd.len();
        let fd_gap = match side {
            Side::Plus => (fd[1], fd[2]),
            Side::Minus => (fd[n - 3], fd[n - 2]),
        };
        let dev = gap.map_or(f64::INFINITY, |g| (g.0 - fd_gap.0).abs().max((g.1 - fd_gap.1).abs()));
        o.check(
            dev < C8_EDGE_TOL,
            format!("{side:?} first gap {gap:?} vs FD cell ({:.5}, {:.5}), dev {dev:.1e}", fd_gap.0, fd_gap.1),
        );
        let pb = periodic_bands(&pert, side, free.numerics.k_max).unwrap();
        let same = pb.bands.len() == b.bands.len()
            && pb.bands.bands().iter().zip(b.bands.bands()).all(|(x, y)| {
                let close = |u: f64, v: f64| u == v || (u - v).abs() < C8_EDGE_TOL;
                close(x.lo, y.lo) && close(x.hi, y.hi)
            });
        o.check(same, format!("{side:?} perturbed bands reproduce base bands"));
    }

    // Gap eigenvalues of the perturbed problem, counted between the band
    // edges of the discrete lattice at each truncation.
    let ps = fixture("perturbed_periodic.json");
    let pf = ps.field().unwrap();
    let opts = ps.numerics.eig_options();
    let plus = periodic_bands(&pf, Side::Plus, ps.numerics.k_max).unwrap();
    let g = first_finite_gap(&plus.bands.gaps()).unwrap();
    let mut counts = Vec::new();
    for &x in &ps.numerics.levels {
        let lo = discrete_band_edge(&pf, Side::Plus, g.0, x, ps.numerics.density).unwrap().unwrap();
        let hi = discrete_band_edge(&pf, Side::Plus, g.1, x, ps.numerics.density).unwrap().unwrap();
        let ml = discrete_band_edge(&pf, Side::Minus, -g.1, x, ps.numerics.density).unwrap().unwrap();
        let mh = discrete_band_edge(&pf, Side::Minus, -g.0, x, ps.numerics.density).unwrap().unwrap();
        let s = level_spectrum(&pf, x, ps.numerics.density, &opts).unwrap();
        counts.push((s.real_in(lo, hi), s.real_in(ml, mh)));
    }
    o.check(
        counts.windows(2).all(|w| w[0] == w[1]),
        format!("perturbed gap counts (plus, minus) {counts:?} stable"),
    );
    o
}

fn c9_structure() -> Outcome {
    let mut o = Outcome::new(60 * SECOND);
    let base = CoefficientField::parse("sgn(x)", "1", "1").unwrap();
    for (alpha, beta, bound) in [(0.0, 0.0, 2usize), (-1.0, 1.0, 4)] {
        let f = base.clone().with_window(alpha, beta);
        let rc = resolvent_rank_check(&f, C9_LEVEL, 10.0, Complex64::new(0.0, 1.0), C9_SV_TOL).unwrap();
        o.check(
            rc.bound == bound && rc.rank <= bound && rc.tail_ratio < C9_SV_TOL,
            format!("window ({alpha}, {beta}): rank {} <= {bound}, tail {:.1e}", rc.rank, rc.tail_ratio),
        );
        let is = inertia_shift_check(&f, 0.0, C9_LEVEL, 10.0).unwrap();
        let shift = is.n_minus_full.abs_diff(is.n_minus_block);
        o.check(shift <= is.rank, format!("window ({alpha}, {beta}): |dn_minus| {shift} <= rank {}", is.rank));
    }
    o
}

fn count_bound(n_h0: usize, kappa: usize, alpha_eq_beta: bool) -> usize {
    match (alpha_eq_beta, n_h0) {
        (false, 0) => 6 * kappa + 11,
        (false, n) => 4 * n + 6 * kappa + 11,
        (true, 0) => 2 * kappa + 3,
        (true, n) => 2 * n + 2 * kappa + 3,
    }
}

fn c10_counts() -> Outcome {
    let mut o = Outcome::new(300 * SECOND);
    for name in ["gap_family.json", "cx2_m1.json", "cx2_0.json", "cx2_m0p25.json"] {
        let rep = run(name, &["spectrum", "budget", "counts"]);
        let Some(counts) = rep.counts.ok() else {
            o.check(false, format!("{name}: counts section {:?}", rep.counts));
            continue;
        };
        let eq = rep.problem.window.map_or(true, |w| w.alpha == w.beta);
        let ok = !counts.is_empty()
            && counts.iter().all(|c| {
                c.variant == CountVariant::select(eq, c.n_h0)
                    && c.bound == count_bound(c.n_h0, c.kappa, eq)
                    && c.n_k0 <= c.bound
                    && c.pass
            });
        let worst = counts.iter().map(|c| format!("{}<={}", c.n_k0, c.bound)).collect::<Vec<_>>();
        o.check(ok, format!("{name}: {}", worst.join(" ")));
    }
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("eigen kernel oracles", c1_oracles),
        ("discretization convergence", c2_convergence),
        ("explicit essential spectrum", c3_essential),
        ("Coulomb fixture", c4_coulomb),
        ("sech^2 fixture", c5_sech2),
        ("Kneser trichotomy", c6_kneser),
        ("perturbation transfer", c7_transfer),
        ("periodic bands", c8_periodic),
        ("structural checks", c9_structure),
        ("counting bounds", c10_counts),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let mut out = f();
        out.elapsed = start.elapsed();
        let verdict = if out.passed() { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {verdict} {name} ({:.1} s, limit {} s)",
            out.elapsed.as_secs_f64(),
            out.limit.as_secs()
        );
        for (what, ok) in &out.checks {
            println!("    [{}] {what}", if *ok { "ok" } else { "FAIL" });
        }
        if !out.passed() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
