//! Runtime invariant suite covering every engine, used by `ghzlab self-test`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::format::render_table;
use crate::landscape::{analytic_correlation, max_violation, quantum_correlation, scan, AngleGrid};
use crate::lhv::{
    bell_system, derive_pair_product, enumerate_parity, ghz_system, hardy_lhv_feasible,
    parity_multiply_check, single_spin_constraint, solve_signs, system_slots, HardyLhvInstance,
    Particle,
};
use crate::linalg::{anticommutator, commutator, STATE_TOL, STRUCTURAL_TOL};
use crate::sgsim::{branch_probabilities, run_sequence};
use crate::stabilizer::{
    all_pass, hardy_table, uw_commutator_norm, verify_bell_relations, verify_ghz_relations,
    verify_sigma_xy_observable, HardyContext,
};
use crate::states::{identity2, pauli_string_operator, sigma_x, sigma_y, sigma_z, GoldsteinParams, HardyParticle};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfTestReport {
    pub checks: Vec<CheckResult>,
}

impl SelfTestReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| vec![c.name.to_string(), if c.pass { "PASS" } else { "FAIL" }.into(), c.detail.clone()])
            .collect();
        render_table(&["check", "result", "detail"], &rows)
    }
}

fn check(name: &'static str, pass: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult { name, pass, detail: detail.into() }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> CheckResult {
    check(name, false, format!("error: {err}"))
}

fn pauli_algebra() -> CheckResult {
    let (x, y, z, id) = (sigma_x(), sigma_y(), sigma_z(), identity2());
    let i = num_complex::Complex64::new(0.0, 1.0);
    let squares = [&x, &y, &z].iter().map(|s| (*s * *s).max_abs_diff(&id)).fold(0.0, f64::max);
    let cyclic = [
        (&x * &y).max_abs_diff(&z.scale(i)),
        (&y * &z).max_abs_diff(&x.scale(i)),
        (&z * &x).max_abs_diff(&y.scale(i)),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let worst = squares.max(cyclic);
    check("pauli algebra", worst <= STRUCTURAL_TOL, format!("max residual {worst:e}"))
}

fn pauli_anticommutation() -> CheckResult {
    match anticommutator(&sigma_x(), &sigma_y()) {
        Ok(a) => check("sx sy = -sy sx", a.max_abs() <= STRUCTURAL_TOL, format!("|{{sx,sy}}| = {:e}", a.max_abs())),
        Err(e) => failed("sx sy = -sy sx", e),
    }
}

fn ghz_operators_commute() -> CheckResult {
    let ops: Vec<_> = ["xyy", "yxy", "yyx", "xxx"]
        .iter()
        .map(|s| pauli_string_operator(&s.parse().expect("valid")))
        .collect();
    let mut worst = 0.0f64;
    for a in &ops {
        for b in &ops {
            worst = worst.max(commutator(a, b).map(|c| c.max_abs()).unwrap_or(f64::INFINITY));
        }
    }
    check("GHZ operators commute", worst <= STRUCTURAL_TOL, format!("max |[A,B]| = {worst:e}"))
}

fn ghz_lhv() -> CheckResult {
    let sys = ghz_system();
    let slots = system_slots(&sys);
    match enumerate_parity(&sys, &slots) {
        Ok(found) => {
            let certified = parity_multiply_check(&sys).contradiction;
            check(
                "GHZ LHV contradiction",
                found.is_empty() && certified,
                format!("{} / {} satisfy, certified={certified}", found.len(), 1 << slots.len()),
            )
        }
        Err(e) => failed("GHZ LHV contradiction", e),
    }
}

fn correlated_model() -> CheckResult {
    let run = || -> crate::Result<(usize, usize, usize)> {
        let ghz = solve_signs(&[derive_pair_product(&ghz_system())?], &[Particle::A, Particle::B, Particle::C])?;
        let bell = solve_signs(&[derive_pair_product(&bell_system())?], &[Particle::A, Particle::B])?;
        let single = solve_signs(&[single_spin_constraint()], &[Particle::A])?;
        Ok((ghz.len(), bell.len(), single.len()))
    };
    match run() {
        Ok(counts) => check("correlated sign solutions", counts == (8, 2, 2), format!("{counts:?}")),
        Err(e) => failed("correlated sign solutions", e),
    }
}

fn hardy_point() -> CheckResult {
    let t = 1.0 / 3f64.sqrt();
    let run = || -> crate::Result<(f64, f64, bool)> {
        let p = GoldsteinParams::real(t, t, t)?;
        let table = hardy_table(&p)?;
        let zeros = [
            table.prob(HardyContext::U1U2, 1, 1),
            table.prob(HardyContext::W1U2, 0, 0),
            table.prob(HardyContext::U1W2, 0, 0),
        ]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max);
        let witness = table.prob(HardyContext::W1W2, 0, 0);
        let feasible = hardy_lhv_feasible(&HardyLhvInstance::from_table(&table, STATE_TOL)).feasible;
        Ok((zeros, witness, feasible))
    };
    match run() {
        Ok((zeros, witness, feasible)) => check(
            "Hardy table at a=b=c",
            zeros <= STATE_TOL && (witness - 1.0 / 12.0).abs() <= STATE_TOL && !feasible,
            format!("zeros {zeros:e}, witness {witness:.12}, feasible={feasible}"),
        ),
        Err(e) => failed("Hardy table at a=b=c", e),
    }
}

fn hardy_grid() -> CheckResult {
    let n = 10;
    let step = 1.0 / (n - 1) as f64;
    let mut bad = 0;
    let mut points = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let Ok(p) = GoldsteinParams::real(i as f64 * step, j as f64 * step, k as f64 * step) else { continue };
                let Ok(table) = hardy_table(&p) else { continue };
                points += 1;
                let feasible = hardy_lhv_feasible(&HardyLhvInstance::from_table(&table, STATE_TOL)).feasible;
                let abc = p.abc().norm();
                if (abc > 1e-3 && feasible) || (abc == 0.0 && !feasible) {
                    bad += 1;
                }
            }
        }
    }
    check("Hardy grid feasibility", bad == 0, format!("{points} points, {bad} violations"))
}

fn uw_norm() -> CheckResult {
    let t = 1.0 / 3f64.sqrt();
    let run = || -> crate::Result<(f64, f64)> {
        let sym = uw_commutator_norm(&GoldsteinParams::real(t, t, t)?, HardyParticle::First)?;
        let zero = uw_commutator_norm(&GoldsteinParams::real(1.0, 0.0, 0.0)?, HardyParticle::First)?;
        Ok((sym, zero))
    };
    match run() {
        Ok((sym, zero)) => check(
            "[U,W] spectral norm",
            (sym - 0.5).abs() <= STATE_TOL && zero <= STATE_TOL,
            format!("a=b=c: {sym:.12}, b=0: {zero:e}"),
        ),
        Err(e) => failed("[U,W] spectral norm", e),
    }
}

fn landscape() -> CheckResult {
    let run = || -> crate::Result<(usize, f64, usize)> {
        let grid = AngleGrid::new(100)?;
        let l = scan(grid)?;
        let commuting_violations = l.violating_cells().filter(|c| c.comm_norm == 0.0).count();
        Ok((l.regions.len(), max_violation(grid)?.f, commuting_violations))
    };
    match run() {
        Ok((regions, f, bad)) => check(
            "Bell landscape",
            regions == 4 && (f - 1.5).abs() <= 1e-9 && bad == 0,
            format!("{regions} regions, max f {f:.12}, {bad} commuting violations"),
        ),
        Err(e) => failed("Bell landscape", e),
    }
}

fn correlation_oracle() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (t1, t2) = (rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
        let q = quantum_correlation(
            &crate::states::DirectionVector::in_yz_plane(t1),
            &crate::states::DirectionVector::in_yz_plane(t2),
        );
        worst = worst.max((q - analytic_correlation(t2 - t1)).abs());
    }
    check("coplanar cos law", worst <= STATE_TOL, format!("max deviation {worst:e}"))
}

fn stern_gerlach() -> CheckResult {
    let run = || -> crate::Result<(f64, f64, f64)> {
        let exact = branch_probabilities()?;
        let s = run_sequence(10_000, 1)?;
        let bound = 3.0 * 0.5 / (s.y_up as f64).sqrt();
        Ok(((s.freq_a() - 0.5).abs() / bound, exact.y_up, exact.window_a))
    };
    match run() {
        Ok((z, py, pa)) => check(
            "Stern-Gerlach sequence",
            z < 1.0 && (py - 0.5).abs() <= STATE_TOL && (pa - 0.25).abs() <= STATE_TOL,
            format!("|freq_a - 1/2| = {z:.3} x 3 sigma"),
        ),
        Err(e) => failed("Stern-Gerlach sequence", e),
    }
}

pub fn run_self_test() -> SelfTestReport {
    let ghz = verify_ghz_relations();
    let bell = verify_bell_relations();
    let sxy = verify_sigma_xy_observable();
    let checks = vec![
        pauli_algebra(),
        pauli_anticommutation(),
        check("GHZ eigenrelations", all_pass(&ghz), format!("{} relations", ghz.len())),
        ghz_operators_commute(),
        check("Phi- eigenrelations", all_pass(&bell), format!("{} relations", bell.len())),
        check("-i sx sy = diag(1,-1)", sxy.pass, format!("entry residual {:e}", sxy.entry_residual)),
        ghz_lhv(),
        correlated_model(),
        hardy_point(),
        hardy_grid(),
        uw_norm(),
        landscape(),
        correlation_oracle(),
        stern_gerlach(),
    ];
    SelfTestReport { checks }
}
