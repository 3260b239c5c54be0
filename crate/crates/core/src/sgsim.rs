//! Sequential Stern-Gerlach Monte Carlo: x-polarized spins pass a y magnet,
//! the upper branch is kept and sent through an x magnet onto windows a
//! (`+x`) and b (`-x`).
//!
//! Shot `k` draws from ChaCha8 stream `k` of the run seed, so results do
//! not depend on how shots are split across workers.

use std::io::Write;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::format::csv_num;
use crate::linalg::{born_probabilities, collapse_measure, DenseOperator};
use crate::sign::Sign;
use crate::states::{plus_x, sigma_x, sigma_y, spin_projectors};

/// Identifies the pseudorandom stream layout in every emitted record.
pub const GENERATOR_ID: &str = "chacha8-seed_from_u64-stream_per_shot";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub index: u64,
    pub y: Sign,
    pub selected: bool,
    /// Present exactly when the shot was selected.
    pub x: Option<Sign>,
}

struct Magnets {
    y: [DenseOperator; 2],
    x: [DenseOperator; 2],
}

impl Magnets {
    fn new() -> Self {
        let (yp, ym) = spin_projectors(&sigma_y()).expect("sigma_y is an involution");
        let (xp, xm) = spin_projectors(&sigma_x()).expect("sigma_x is an involution");
        Self { y: [yp, ym], x: [xp, xm] }
    }
}

fn outcome_sign(index: usize) -> Sign {
    if index == 0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

fn shot(magnets: &Magnets, seed: u64, index: u64) -> Result<ShotRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let first = collapse_measure(&plus_x(), &magnets.y, rng.random::<f64>())?;
    let y = outcome_sign(first.outcome_index);
    if y == Sign::Minus {
        return Ok(ShotRecord { index, y, selected: false, x: None });
    }
    let second = collapse_measure(&first.post_state, &magnets.x, rng.random::<f64>())?;
    Ok(ShotRecord { index, y, selected: true, x: Some(outcome_sign(second.outcome_index)) })
}

/// Runs a single shot; mainly useful for inspecting individual branches.
pub fn simulate_shot(seed: u64, index: u64) -> Result<ShotRecord> {
    shot(&Magnets::new(), seed, index)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchStats {
    pub seed: u64,
    pub shots: u64,
    pub y_up: u64,
    pub window_a: u64,
    pub window_b: u64,
}

impl BranchStats {
    fn empty(seed: u64) -> Self {
        Self { seed, shots: 0, y_up: 0, window_a: 0, window_b: 0 }
    }

    fn record(&mut self, r: &ShotRecord) {
        self.shots += 1;
        if r.selected {
            self.y_up += 1;
            match r.x {
                Some(Sign::Plus) => self.window_a += 1,
                Some(Sign::Minus) => self.window_b += 1,
                None => unreachable!("selected shots always carry an x outcome"),
            }
        }
    }

    fn merge(&mut self, other: &BranchStats) {
        self.shots += other.shots;
        self.y_up += other.y_up;
        self.window_a += other.window_a;
        self.window_b += other.window_b;
    }

    pub fn generator(&self) -> &'static str {
        GENERATOR_ID
    }

    pub fn freq_y_up(&self) -> f64 {
        ratio(self.y_up, self.shots)
    }

    /// Window-a fraction of the selected shots.
    pub fn freq_a(&self) -> f64 {
        ratio(self.window_a, self.y_up)
    }

    pub fn freq_b(&self) -> f64 {
        ratio(self.window_b, self.y_up)
    }

    pub fn se_y_up(&self) -> f64 {
        binomial_se(self.freq_y_up(), self.shots)
    }

    pub fn se_a(&self) -> f64 {
        binomial_se(self.freq_a(), self.y_up)
    }

    pub fn to_key_value(&self) -> String {
        let fields = [
            ("generator", GENERATOR_ID.to_string()),
            ("seed", self.seed.to_string()),
            ("shots", self.shots.to_string()),
            ("y_up", self.y_up.to_string()),
            ("window_a", self.window_a.to_string()),
            ("window_b", self.window_b.to_string()),
            ("freq_y_up", csv_num(self.freq_y_up())),
            ("se_y_up", csv_num(self.se_y_up())),
            ("freq_a", csv_num(self.freq_a())),
            ("freq_b", csv_num(self.freq_b())),
            ("se_a", csv_num(self.se_a())),
        ];
        fields.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "generator", "seed", "shots", "y_up", "window_a", "window_b", "freq_y_up", "se_y_up",
            "freq_a", "freq_b", "se_a",
        ])?;
        w.write_record([
            GENERATOR_ID.to_string(),
            self.seed.to_string(),
            self.shots.to_string(),
            self.y_up.to_string(),
            self.window_a.to_string(),
            self.window_b.to_string(),
            csv_num(self.freq_y_up()),
            csv_num(self.se_y_up()),
            csv_num(self.freq_a()),
            csv_num(self.freq_b()),
            csv_num(self.se_a()),
        ])?;
        w.flush()?;
        Ok(())
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

pub fn run_sequence(shots: u64, seed: u64) -> Result<BranchStats> {
    run_sequence_sharded(shots, seed, 1)
}

/// Splits shots into contiguous index ranges, one per worker, and sums the
/// counts.
pub fn run_sequence_sharded(shots: u64, seed: u64, workers: usize) -> Result<BranchStats> {
    if shots == 0 {
        return Err(Error::NoShots);
    }
    let workers = (workers.max(1) as u64).min(shots);
    let magnets = Magnets::new();
    let chunk = shots.div_ceil(workers);
    let partials: Vec<Result<BranchStats>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let magnets = &magnets;
                let range = (w * chunk)..((w + 1) * chunk).min(shots);
                scope.spawn(move || -> Result<BranchStats> {
                    let mut stats = BranchStats::empty(seed);
                    for index in range {
                        stats.record(&shot(magnets, seed, index)?);
                    }
                    Ok(stats)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut total = BranchStats::empty(seed);
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

/// Exact Born-rule tree of the two-magnet sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchProbabilities {
    pub y_up: f64,
    pub x_up_given_y_up: f64,
    pub window_a: f64,
}

pub fn branch_probabilities() -> Result<BranchProbabilities> {
    let magnets = Magnets::new();
    let y_up = born_probabilities(&plus_x(), &magnets.y)?[0];
    let selected = crate::linalg::StateVector::normalized(magnets.y[0].apply(&plus_x())?)?;
    let x_up_given_y_up = born_probabilities(&selected, &magnets.x)?[0];
    Ok(BranchProbabilities { y_up, x_up_given_y_up, window_a: y_up * x_up_given_y_up })
}
