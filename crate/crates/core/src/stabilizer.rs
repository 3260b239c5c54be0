//! Quantum-side relations: GHZ and `|Phi->` stabilizers, the `-i sx sy`
//! observable, the Goldstein joint-probability table and the `[U_i, W_i]`
//! commutator norm.

use std::io::Write;

use num_complex::Complex64;

use crate::error::Result;
use crate::format::{csv_num, render_table, table_num};
use crate::linalg::{
    born_probabilities, commutator, rayleigh, DenseOperator, StateVector, I, STATE_TOL,
    STRUCTURAL_TOL,
};
use crate::states::{
    bell_phi_minus, ghz_state, goldstein_state, pauli_string_operator, sigma_x, sigma_y,
    uw_projectors, GoldsteinParams, HardyParticle, PauliString,
};

#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport {
    pub label: String,
    pub operator: String,
    pub expected: f64,
    pub measured: f64,
    pub residual: f64,
    pub pass: bool,
}

impl RelationReport {
    fn eigen(label: &str, spec: &str, state: &StateVector, expected: f64, tol: f64) -> Self {
        let spec: PauliString = spec.parse().expect("built-in Pauli string");
        let op = pauli_string_operator(&spec);
        let m = rayleigh(&op, state).expect("operator and state share a dimension");
        let pass = m.residual <= tol && (m.eigenvalue - Complex64::new(expected, 0.0)).norm() <= tol;
        Self {
            label: label.to_string(),
            operator: spec.to_string(),
            expected,
            measured: m.eigenvalue.re,
            residual: m.residual,
            pass,
        }
    }
}

pub fn all_pass(reports: &[RelationReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

pub fn relations_table(reports: &[RelationReport]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.operator.clone(),
                table_num(r.expected),
                table_num(r.measured),
                table_num(r.residual),
                if r.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    render_table(&["label", "operator", "expected", "measured", "residual", "pass"], &rows)
}

/// CSV with columns `label,expected,measured,residual,pass`.
pub fn write_relations_csv<W: Write>(reports: &[RelationReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "expected", "measured", "residual", "pass"])?;
    for r in reports {
        w.write_record([
            r.label.clone(),
            csv_num(r.expected),
            csv_num(r.measured),
            csv_num(r.residual),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn verify_ghz_relations() -> Vec<RelationReport> {
    verify_ghz_relations_with_tol(STATE_TOL)
}

pub fn verify_ghz_relations_with_tol(tol: f64) -> Vec<RelationReport> {
    let ghz = ghz_state();
    [("xyy", 1.0), ("yxy", 1.0), ("yyx", 1.0), ("xxx", -1.0)]
        .iter()
        .map(|&(spec, ev)| RelationReport::eigen(&format!("GHZ {spec}"), spec, &ghz, ev, tol))
        .collect()
}

pub fn verify_bell_relations() -> Vec<RelationReport> {
    verify_bell_relations_with_tol(STATE_TOL)
}

/// The two `|Phi->` eigenrelations plus a row asserting `[xx, yy] = 0`,
/// whose measured column is the spectral norm of the commutator.
pub fn verify_bell_relations_with_tol(tol: f64) -> Vec<RelationReport> {
    let phi = bell_phi_minus();
    let mut reports = vec![
        RelationReport::eigen("Phi- xx", "xx", &phi, -1.0, tol),
        RelationReport::eigen("Phi- yy", "yy", &phi, 1.0, tol),
    ];
    let xx = pauli_string_operator(&"xx".parse().expect("valid"));
    let yy = pauli_string_operator(&"yy".parse().expect("valid"));
    let norm = commutator(&xx, &yy).expect("same dimension").spectral_norm();
    reports.push(RelationReport {
        label: "[xx,yy] commute".into(),
        operator: "xx*yy-yy*xx".into(),
        expected: 0.0,
        measured: norm,
        residual: norm,
        pass: norm <= STRUCTURAL_TOL.max(tol),
    });
    reports
}

#[derive(Clone, Debug)]
pub struct SigmaXyReport {
    pub matrix: DenseOperator,
    /// Largest entrywise deviation from `diag(1, -1)`.
    pub entry_residual: f64,
    pub hermiticity_residual: f64,
    pub eigenvalues: Vec<f64>,
    pub pass: bool,
}

impl SigmaXyReport {
    pub fn to_relation(&self) -> RelationReport {
        RelationReport {
            label: "-i sx sy = diag(1,-1)".into(),
            operator: "-i*x*y".into(),
            expected: 1.0,
            measured: self.matrix.get(0, 0).re,
            residual: self.entry_residual.max(self.hermiticity_residual),
            pass: self.pass,
        }
    }
}

pub fn verify_sigma_xy_observable() -> SigmaXyReport {
    let matrix = (&sigma_x() * &sigma_y()).scale(-I);
    let target = crate::states::sigma_z();
    let entry_residual = matrix.max_abs_diff(&target);
    let hermiticity_residual = matrix.hermiticity_residual();
    let eigenvalues = matrix.hermitian_eigenvalues();
    let spectrum_ok = (eigenvalues[0] + 1.0).abs() <= STRUCTURAL_TOL
        && (eigenvalues[1] - 1.0).abs() <= STRUCTURAL_TOL;
    let pass = entry_residual <= STRUCTURAL_TOL
        && hermiticity_residual <= STRUCTURAL_TOL
        && spectrum_ok;
    SigmaXyReport { matrix, entry_residual, hermiticity_residual, eigenvalues, pass }
}

/// One of the four jointly measurable observable pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HardyContext {
    U1U2,
    W1U2,
    U1W2,
    W1W2,
}

impl HardyContext {
    pub const ALL: [HardyContext; 4] =
        [HardyContext::U1U2, HardyContext::W1U2, HardyContext::U1W2, HardyContext::W1W2];

    /// Observables measured on particle 1 and particle 2.
    pub fn observables(self) -> (HardyObservable, HardyObservable) {
        use HardyObservable::*;
        match self {
            HardyContext::U1U2 => (U1, U2),
            HardyContext::W1U2 => (W1, U2),
            HardyContext::U1W2 => (U1, W2),
            HardyContext::W1W2 => (W1, W2),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HardyContext::U1U2 => "U1,U2",
            HardyContext::W1U2 => "W1,U2",
            HardyContext::U1W2 => "U1,W2",
            HardyContext::W1W2 => "W1,W2",
        }
    }
}

/// The four two-valued observables; the discriminant is the position in a
/// deterministic `(U1, W1, U2, W2)` assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HardyObservable {
    U1 = 0,
    W1 = 1,
    U2 = 2,
    W2 = 3,
}

impl HardyObservable {
    pub fn label(self) -> &'static str {
        match self {
            HardyObservable::U1 => "U1",
            HardyObservable::W1 => "W1",
            HardyObservable::U2 => "U2",
            HardyObservable::W2 => "W2",
        }
    }
}

/// Outcome pairs in table order: `(1,1), (1,0), (0,1), (0,0)`.
pub const OUTCOME_PAIRS: [(u8, u8); 4] = [(1, 1), (1, 0), (0, 1), (0, 0)];

/// Joint outcome distributions for the four contexts. Outcome 1 means the
/// projector fires; 0 is its orthogonal complement.
#[derive(Clone, Debug, PartialEq)]
pub struct HardyTable {
    pub params: GoldsteinParams,
    /// Indexed by `HardyContext::ALL` then `OUTCOME_PAIRS`.
    pub probabilities: [[f64; 4]; 4],
}

impl HardyTable {
    pub fn prob(&self, context: HardyContext, first: u8, second: u8) -> f64 {
        let ci = HardyContext::ALL.iter().position(|&c| c == context).expect("known context");
        let oi = OUTCOME_PAIRS
            .iter()
            .position(|&o| o == (first, second))
            .expect("outcomes are 0 or 1");
        self.probabilities[ci][oi]
    }

    pub fn entries(&self) -> impl Iterator<Item = (HardyContext, (u8, u8), f64)> + '_ {
        HardyContext::ALL.iter().enumerate().flat_map(move |(ci, &ctx)| {
            OUTCOME_PAIRS
                .iter()
                .enumerate()
                .map(move |(oi, &o)| (ctx, o, self.probabilities[ci][oi]))
        })
    }

    pub fn render(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .entries()
            .map(|(ctx, (o1, o2), p)| {
                let (a, b) = ctx.observables();
                vec![ctx.label().into(), format!("{}={} {}={}", a.label(), o1, b.label(), o2), table_num(p)]
            })
            .collect();
        render_table(&["context", "outcome", "probability"], &rows)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["context", "first", "second", "probability"])?;
        for (ctx, (o1, o2), p) in self.entries() {
            w.write_record([ctx.label().to_string(), o1.to_string(), o2.to_string(), csv_num(p)])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn hardy_table(p: &GoldsteinParams) -> Result<HardyTable> {
    let psi = goldstein_state(p);
    let uw = uw_projectors(p)?;
    let id = DenseOperator::identity(4)?;
    let select = |obs: HardyObservable, outcome: u8| {
        let fires = match obs {
            HardyObservable::U1 => &uw.u1,
            HardyObservable::W1 => &uw.w1,
            HardyObservable::U2 => &uw.u2,
            HardyObservable::W2 => &uw.w2,
        };
        if outcome == 1 {
            fires.clone()
        } else {
            &id - fires
        }
    };
    let mut probabilities = [[0.0; 4]; 4];
    for (ci, ctx) in HardyContext::ALL.iter().enumerate() {
        let (a, b) = ctx.observables();
        let family: Vec<DenseOperator> = OUTCOME_PAIRS
            .iter()
            .map(|&(o1, o2)| &select(a, o1) * &select(b, o2))
            .collect();
        let probs = born_probabilities(&psi, &family)?;
        probabilities[ci].copy_from_slice(&probs);
    }
    Ok(HardyTable { params: *p, probabilities })
}

/// Spectral norm of `[U_i, W_i]`.
pub fn uw_commutator_norm(p: &GoldsteinParams, particle: HardyParticle) -> Result<f64> {
    let uw = uw_projectors(p)?;
    Ok(commutator(uw.u(particle), uw.w(particle))?.spectral_norm())
}
