//! The landscape `f(b,c) = |P(a,b) - P(a,c)| + P(b,c)` over the angles of
//! `b` and `c` measured from `a` within one plane.
//!
//! Correlations are taken on `|Phi->` with every direction in the y-z
//! plane, where `<(n.s)(m.s)> = cos` of the angle between `n` and `m`.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::csv_num;
use crate::linalg::{expectation, kron};
use crate::states::{bell_phi_minus, direction_operator, DirectionVector};

/// `f` must exceed `1 + VIOLATION_GUARD` to count as a violation.
pub const VIOLATION_GUARD: f64 = 1e-9;
pub const MIN_RESOLUTION: usize = 8;
/// Golden-section refinement stops once the bracket is this narrow.
pub const REFINE_TOL: f64 = 1e-9;

pub fn analytic_correlation(angle: f64) -> f64 {
    angle.cos()
}

/// `<Phi-| (n_b.s) (x) (n_c.s) |Phi->`.
pub fn quantum_correlation(n_b: &DirectionVector, n_c: &DirectionVector) -> f64 {
    let op = kron(&direction_operator(n_b), &direction_operator(n_c)).expect("4x4");
    expectation(&bell_phi_minus(), &op).expect("matching dimensions").re
}

/// `|cos a - cos b| + cos(b - a)`.
pub fn f_value(alpha: f64, beta: f64) -> f64 {
    (alpha.cos() - beta.cos()).abs() + (beta - alpha).cos()
}

/// Same landscape evaluated through the quantum expectations rather than
/// the closed form.
pub fn f_value_quantum(alpha: f64, beta: f64) -> f64 {
    let a = DirectionVector::in_yz_plane(0.0);
    let b = DirectionVector::in_yz_plane(alpha);
    let c = DirectionVector::in_yz_plane(beta);
    (quantum_correlation(&a, &b) - quantum_correlation(&a, &c)).abs() + quantum_correlation(&b, &c)
}

fn comm_norm(alpha: f64, beta: f64) -> f64 {
    2.0 * (beta - alpha).sin().abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridDomain {
    /// Full `[0, 2pi)^2` with periodic edges.
    Torus,
    /// Only the `beta = alpha` line.
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AngleGrid {
    resolution: usize,
    domain: GridDomain,
}

impl AngleGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        Self::with_domain(resolution, GridDomain::Torus)
    }

    pub fn diagonal(resolution: usize) -> Result<Self> {
        Self::with_domain(resolution, GridDomain::Diagonal)
    }

    pub fn with_domain(resolution: usize, domain: GridDomain) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::GridTooSmall { resolution, min: MIN_RESOLUTION });
        }
        Ok(Self { resolution, domain })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn domain(&self) -> GridDomain {
        self.domain
    }

    pub fn step(&self) -> f64 {
        TAU / self.resolution as f64
    }

    pub fn angle(&self, index: usize) -> f64 {
        TAU * index as f64 / self.resolution as f64
    }

    /// `(width, height)` of the cell array: alpha across, beta down.
    pub fn shape(&self) -> (usize, usize) {
        match self.domain {
            GridDomain::Torus => (self.resolution, self.resolution),
            GridDomain::Diagonal => (self.resolution, 1),
        }
    }

    pub fn len(&self) -> usize {
        let (w, h) = self.shape();
        w * h
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Angles of cell `index` in row-major (beta-major) order.
    pub fn angles(&self, index: usize) -> (f64, f64) {
        match self.domain {
            GridDomain::Torus => {
                let n = self.resolution;
                (self.angle(index % n), self.angle(index / n))
            }
            GridDomain::Diagonal => (self.angle(index), self.angle(index)),
        }
    }

    fn neighbors(&self, index: usize) -> Vec<usize> {
        let n = self.resolution;
        match self.domain {
            GridDomain::Torus => {
                let (i, j) = (index % n, index / n);
                vec![
                    j * n + (i + 1) % n,
                    j * n + (i + n - 1) % n,
                    ((j + 1) % n) * n + i,
                    ((j + n - 1) % n) * n + i,
                ]
            }
            GridDomain::Diagonal => vec![(index + 1) % n, (index + n - 1) % n],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandscapeCell {
    pub alpha: f64,
    pub beta: f64,
    pub f: f64,
    pub violation: bool,
    /// Spectral norm of `[n_b.s, n_c.s]`, `2|sin(beta - alpha)|`.
    pub comm_norm: f64,
}

impl LandscapeCell {
    pub fn evaluate(alpha: f64, beta: f64) -> Self {
        let f = f_value(alpha, beta);
        Self { alpha, beta, f, violation: f > 1.0 + VIOLATION_GUARD, comm_norm: comm_norm(alpha, beta) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub alpha: f64,
    pub beta: f64,
    pub f: f64,
}

/// A connected set of violating cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationRegion {
    /// Indices into the landscape's cell list, ascending.
    pub members: Vec<usize>,
    /// Best cell on the grid, `max f` over members.
    pub peak: Peak,
    /// `peak` polished by golden-section search off the grid.
    pub refined: Peak,
}

#[derive(Clone, Debug)]
pub struct Landscape {
    pub grid: AngleGrid,
    pub cells: Vec<LandscapeCell>,
    pub regions: Vec<ViolationRegion>,
}

impl Landscape {
    pub fn violating_cells(&self) -> impl Iterator<Item = &LandscapeCell> {
        self.cells.iter().filter(|c| c.violation)
    }

    pub fn min_max_f(&self) -> (f64, f64) {
        self.cells
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c.f), hi.max(c.f)))
    }
}

/// Evaluates every cell (in parallel) and labels violating cells into
/// 4-connected regions on the torus.
pub fn scan(grid: AngleGrid) -> Result<Landscape> {
    let cells: Vec<LandscapeCell> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (a, b) = grid.angles(k);
            LandscapeCell::evaluate(a, b)
        })
        .collect();
    let regions = label_regions(&grid, &cells);
    Ok(Landscape { grid, cells, regions })
}

fn label_regions(grid: &AngleGrid, cells: &[LandscapeCell]) -> Vec<ViolationRegion> {
    let mut seen = vec![false; cells.len()];
    let mut regions = Vec::new();
    for start in 0..cells.len() {
        if seen[start] || !cells[start].violation {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(k) = stack.pop() {
            members.push(k);
            for nb in grid.neighbors(k) {
                if !seen[nb] && cells[nb].violation {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        members.sort_unstable();
        let best = members
            .iter()
            .copied()
            .fold(members[0], |best, k| if cells[k].f > cells[best].f { k } else { best });
        let c = cells[best];
        let peak = Peak { alpha: c.alpha, beta: c.beta, f: c.f };
        regions.push(ViolationRegion { members, peak, refined: refine(grid, peak) });
    }
    regions
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Coordinate-wise golden-section ascent inside one grid cell of `start`.
fn refine(grid: &AngleGrid, start: Peak) -> Peak {
    let h = grid.step();
    let mut best = start;
    match grid.domain() {
        GridDomain::Diagonal => {
            let t = golden_section_max(|t| f_value(t, t), start.alpha - h, start.alpha + h, REFINE_TOL);
            let f = f_value(t, t);
            if f >= best.f {
                best = Peak { alpha: t, beta: t, f };
            }
        }
        GridDomain::Torus => {
            let (a0, b0) = (start.alpha, start.beta);
            let (mut a, mut b) = (a0, b0);
            for _ in 0..200 {
                let (pa, pb) = (a, b);
                a = golden_section_max(|x| f_value(x, b), a0 - h, a0 + h, REFINE_TOL);
                b = golden_section_max(|y| f_value(a, y), b0 - h, b0 + h, REFINE_TOL);
                if (a - pa).abs() < REFINE_TOL && (b - pb).abs() < REFINE_TOL {
                    break;
                }
            }
            let f = f_value(a, b);
            if f >= best.f {
                best = Peak { alpha: a.rem_euclid(TAU), beta: b.rem_euclid(TAU), f };
            }
        }
    }
    best
}

/// Best grid cell, refined off-grid by golden-section search.
pub fn max_violation(grid: AngleGrid) -> Result<Peak> {
    let (best, f) = (0..grid.len())
        .map(|k| {
            let (a, b) = grid.angles(k);
            (k, f_value(a, b))
        })
        .fold((0, f64::NEG_INFINITY), |acc, (k, f)| if f > acc.1 { (k, f) } else { acc });
    let (alpha, beta) = grid.angles(best);
    Ok(refine(&grid, Peak { alpha, beta, f }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Pgm,
}

/// Columns `alpha,beta,f,violation,comm_norm`; violation is `1`/`0`.
pub fn write_csv<W: Write>(cells: &[LandscapeCell], out: W) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::EmptyExport);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "beta", "f", "violation", "comm_norm"])?;
    for c in cells {
        w.write_record([
            csv_num(c.alpha),
            csv_num(c.beta),
            csv_num(c.f),
            u8::from(c.violation).to_string(),
            csv_num(c.comm_norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// ASCII `P2` graymap, one row per beta, `f` mapped linearly onto `0..=65535`.
pub fn write_pgm<W: Write>(landscape: &Landscape, mut out: W) -> Result<()> {
    if landscape.cells.is_empty() {
        return Err(Error::EmptyExport);
    }
    let (width, height) = landscape.grid.shape();
    let (lo, hi) = landscape.min_max_f();
    let span = hi - lo;
    writeln!(out, "P2")?;
    writeln!(out, "{width} {height}")?;
    writeln!(out, "65535")?;
    for row in landscape.cells.chunks(width) {
        let line: Vec<String> = row
            .iter()
            .map(|c| {
                let level = if span > 0.0 { ((c.f - lo) / span * 65535.0).round() } else { 0.0 };
                (level as u32).to_string()
            })
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

pub fn export(landscape: &Landscape, path: &Path, format: ExportFormat) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    match format {
        ExportFormat::Csv => write_csv(&landscape.cells, file),
        ExportFormat::Pgm => write_pgm(landscape, file),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn analytic_values() {
        assert_eq!(analytic_correlation(0.0), 1.0);
        assert!(analytic_correlation(FRAC_PI_2).abs() < 1e-16);
        assert!((analytic_correlation(FRAC_PI_3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantum_values() {
        let z = DirectionVector::new(0.0, 0.0, 1.0).unwrap();
        let x = DirectionVector::new(1.0, 0.0, 0.0).unwrap();
        assert!((quantum_correlation(&z, &z) - 1.0).abs() <= 1e-12);
        assert!((quantum_correlation(&x, &x) + 1.0).abs() <= 1e-12);
        let b = DirectionVector::in_yz_plane(30f64.to_radians());
        let c = DirectionVector::in_yz_plane(90f64.to_radians());
        assert!((quantum_correlation(&b, &c) - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn f_examples() {
        for t in [0.0, 0.4, 2.0, 5.5] {
            assert_eq!(f_value(t, t), 1.0);
            assert!(f_value(t, t + PI) <= 1.0 + 1e-15);
            assert!((f_value(t, t + PI) - (2.0 * t.cos().abs() - 1.0)).abs() < 1e-12);
        }
        assert!((f_value(FRAC_PI_3, 2.0 * FRAC_PI_3) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn dense_search_maximum() {
        // Oracle: exhaustive search on a fine grid, no refinement.
        let n = 1500;
        let mut best = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                best = best.max(f_value(TAU * i as f64 / n as f64, TAU * j as f64 / n as f64));
            }
        }
        assert!((best - 1.5).abs() < 1e-5);
        assert!(best <= 1.5 + 1e-15);
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(AngleGrid::new(7), Err(Error::GridTooSmall { resolution: 7, min: 8 })));
        let g = AngleGrid::new(8).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.angles(9), (TAU / 8.0, TAU / 8.0));
        assert_eq!(g.neighbors(0), vec![1, 7, 8, 56]);
    }

    #[test]
    fn scan_small_grid() {
        let l = scan(AngleGrid::new(8).unwrap()).unwrap();
        assert_eq!(l.cells.len(), 64);
        assert_eq!(l.regions.len(), 4);
        for c in &l.cells {
            if c.alpha == c.beta {
                assert_eq!(c.f, 1.0);
                assert!(!c.violation);
            }
            if c.violation {
                assert!(c.comm_norm > 0.0);
            }
        }
    }

    #[test]
    fn region_count_is_stable() {
        for n in [100, 200, 400] {
            let l = scan(AngleGrid::new(n).unwrap()).unwrap();
            assert_eq!(l.regions.len(), 4, "resolution {n}");
            for r in &l.regions {
                let member_max = r.members.iter().map(|&k| l.cells[k].f).fold(f64::MIN, f64::max);
                assert_eq!(r.peak.f, member_max);
                assert!((r.refined.f - 1.5).abs() <= 1e-9, "{:?}", r.refined);
            }
        }
    }

    #[test]
    fn refined_maximum() {
        let p = max_violation(AngleGrid::new(400).unwrap()).unwrap();
        assert!((p.f - 1.5).abs() <= 1e-9);
        let family = [(1.0, 2.0), (2.0, 1.0), (4.0, 5.0), (5.0, 4.0)];
        assert!(
            family.iter().any(|(a, b)| {
                (p.alpha - a * FRAC_PI_3).abs() < 1e-6 && (p.beta - b * FRAC_PI_3).abs() < 1e-6
            }),
            "{p:?}"
        );
        let d = max_violation(AngleGrid::diagonal(64).unwrap()).unwrap();
        assert_eq!(d.f, 1.0);
    }

    #[test]
    fn diagonal_scan_has_no_regions() {
        let l = scan(AngleGrid::diagonal(32).unwrap()).unwrap();
        assert!(l.regions.is_empty());
        assert_eq!(l.grid.shape(), (32, 1));
    }

    #[test]
    fn csv_export() {
        let l = scan(AngleGrid::new(8).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_csv(&l.cells, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert_eq!(text.lines().next(), Some("alpha,beta,f,violation,comm_norm"));
        assert!(matches!(write_csv(&[], Vec::new()), Err(Error::EmptyExport)));

        // A 6-point grid puts (pi/3, 2pi/3) exactly on a cell.
        let cell = LandscapeCell::evaluate(TAU / 6.0, 2.0 * TAU / 6.0);
        let mut buf = Vec::new();
        write_csv(&[cell], &mut buf).unwrap();
        let row = String::from_utf8(buf).unwrap().lines().nth(1).unwrap().to_string();
        assert_eq!(row.split(',').nth(2), Some("1.5"));
        assert_eq!(row.split(',').nth(3), Some("1"));
    }

    #[test]
    fn pgm_export() {
        let l = scan(AngleGrid::new(400).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_pgm(&l, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("400 400"));
        assert_eq!(lines.next(), Some("65535"));
        let rest: Vec<&str> = lines.collect();
        assert_eq!(rest.len(), 400);
        let levels: Vec<u32> = rest.iter().flat_map(|l| l.split(' ')).map(|v| v.parse().unwrap()).collect();
        assert_eq!(levels.len(), 160_000);
        assert_eq!(levels.iter().max(), Some(&65535));
        assert_eq!(levels.iter().min(), Some(&0));
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn quantum_matches_cos_law(t1 in 0.0f64..TAU, t2 in 0.0f64..TAU) {
            let q = quantum_correlation(&DirectionVector::in_yz_plane(t1), &DirectionVector::in_yz_plane(t2));
            prop_assert!((q - analytic_correlation(t2 - t1)).abs() <= 1e-12);
        }

        #[test]
        fn reflection_symmetry(a in 0.0f64..TAU, b in 0.0f64..TAU) {
            prop_assert!((f_value(a, b) - f_value(TAU - a, TAU - b)).abs() <= 1e-12);
        }

        #[test]
        fn quantum_and_closed_form_agree(a in 0.0f64..TAU, b in 0.0f64..TAU) {
            prop_assert!((f_value(a, b) - f_value_quantum(a, b)).abs() <= 1e-12);
        }

        #[test]
        fn violation_needs_noncommuting_directions(a in 0.0f64..TAU, b in 0.0f64..TAU) {
            let cell = LandscapeCell::evaluate(a, b);
            if cell.violation {
                prop_assert!(cell.comm_norm > 0.0);
            }
            prop_assert!(!LandscapeCell::evaluate(a, a).violation);
            prop_assert!(!LandscapeCell::evaluate(a, a + PI).violation);
            prop_assert!(!LandscapeCell::evaluate(a, a - PI).violation);
        }
    }
}
