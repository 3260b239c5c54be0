//! Hidden-variable analysis by exhaustive enumeration.
//!
//! Three models are covered:
//!
//! * real `+-1` element assignments checked against parity constraints,
//! * the correlated model in which each particle carries only the pair
//!   value `m_x m_y = s i` with a persistent sign `s`,
//! * deterministic `{0,1}` assignments to `(U1, W1, U2, W2)` pruned by the
//!   zero-probability events of a Goldstein table.
//!
//! Hidden variables are never materialized; an assignment stands for the
//! values they would determine.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::format::{render_table, table_num};
use crate::linalg::{I, ONE, STATE_TOL};
use crate::sign::Sign;
use crate::stabilizer::{HardyContext, HardyObservable, HardyTable};

pub const MAX_SLOTS: usize = 20;
pub const MAX_SIGN_PARTICLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Particle(pub u8);

impl Particle {
    pub const A: Particle = Particle(0);
    pub const B: Particle = Particle(1);
    pub const C: Particle = Particle(2);
}

impl fmt::Display for Particle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", (b'A' + self.0) as char)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    X,
    Y,
}

/// One element of reality: the predetermined value of `sigma_axis` on a particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub particle: Particle,
    pub element: Element,
}

impl Slot {
    pub const fn new(particle: Particle, element: Element) -> Self {
        Self { particle, element }
    }

    pub const fn x(particle: Particle) -> Self {
        Self::new(particle, Element::X)
    }

    pub const fn y(particle: Particle) -> Self {
        Self::new(particle, Element::Y)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = match self.element {
            Element::X => 'x',
            Element::Y => 'y',
        };
        write!(f, "{e}{}", self.particle)
    }
}

/// `prod(slots) = required`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityConstraint {
    slots: Vec<Slot>,
    required: Sign,
}

impl ParityConstraint {
    pub fn new(slots: Vec<Slot>, required: Sign) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InvalidConstraint("no slots".into()));
        }
        let mut sorted = slots.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConstraint("duplicate slot".into()));
        }
        Ok(Self { slots, required })
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn required(&self) -> Sign {
        self.required
    }

    pub fn holds(&self, assignment: &ElementAssignment) -> Option<bool> {
        let product: Option<Sign> = self.slots.iter().map(|s| assignment.get(*s)).product();
        product.map(|p| p == self.required)
    }
}

impl fmt::Display for ParityConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<String> = self.slots.iter().map(|s| format!("m_{s}")).collect();
        write!(f, "{} = {}", lhs.join(" "), self.required)
    }
}

/// Real-valued readings of the four GHZ stabilizer relations.
pub fn ghz_system() -> Vec<ParityConstraint> {
    use Particle as P;
    vec![
        ParityConstraint::new(vec![Slot::x(P::A), Slot::y(P::B), Slot::y(P::C)], Sign::Plus).unwrap(),
        ParityConstraint::new(vec![Slot::y(P::A), Slot::x(P::B), Slot::y(P::C)], Sign::Plus).unwrap(),
        ParityConstraint::new(vec![Slot::y(P::A), Slot::y(P::B), Slot::x(P::C)], Sign::Plus).unwrap(),
        ParityConstraint::new(vec![Slot::x(P::A), Slot::x(P::B), Slot::x(P::C)], Sign::Minus).unwrap(),
    ]
}

/// `m_xA m_xB = -1`, `m_yA m_yB = +1`.
pub fn bell_system() -> Vec<ParityConstraint> {
    use Particle as P;
    vec![
        ParityConstraint::new(vec![Slot::x(P::A), Slot::x(P::B)], Sign::Minus).unwrap(),
        ParityConstraint::new(vec![Slot::y(P::A), Slot::y(P::B)], Sign::Plus).unwrap(),
    ]
}

/// Every slot referenced by `system`, in sorted order.
pub fn system_slots(system: &[ParityConstraint]) -> Vec<Slot> {
    let mut slots: Vec<Slot> = system.iter().flat_map(|c| c.slots().iter().copied()).collect();
    slots.sort();
    slots.dedup();
    slots
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ElementAssignment {
    values: BTreeMap<Slot, Sign>,
}

impl ElementAssignment {
    pub fn get(&self, slot: Slot) -> Option<Sign> {
        self.values.get(&slot).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Slot, Sign)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }
}

impl FromIterator<(Slot, Sign)> for ElementAssignment {
    fn from_iter<T: IntoIterator<Item = (Slot, Sign)>>(iter: T) -> Self {
        Self { values: iter.into_iter().collect() }
    }
}

/// Every `+-1` assignment to `slots` that satisfies all constraints, in
/// binary counting order (slot `k` is bit `n-1-k`, set bit = `-1`).
pub fn enumerate_parity(
    system: &[ParityConstraint],
    slots: &[Slot],
) -> Result<Vec<ElementAssignment>> {
    if slots.len() > MAX_SLOTS {
        return Err(Error::SlotCap { slots: slots.len(), max: MAX_SLOTS });
    }
    // Each constraint becomes a bit mask over slot positions.
    let n = slots.len();
    let mut masks = Vec::with_capacity(system.len());
    for c in system {
        let mut mask = 0u32;
        for s in c.slots() {
            let pos = slots
                .iter()
                .position(|t| t == s)
                .ok_or_else(|| Error::InvalidConstraint(format!("slot {s} is not in the slot list")))?;
            mask |= 1 << (n - 1 - pos);
        }
        masks.push((mask, c.required() == Sign::Minus));
    }
    let found = (0u32..(1u32 << n))
        .filter(|bits| masks.iter().all(|&(m, odd)| ((bits & m).count_ones() % 2 == 1) == odd))
        .map(|bits| {
            slots
                .iter()
                .enumerate()
                .map(|(k, &s)| (s, Sign::from_bit(bits >> (n - 1 - k) & 1 == 1)))
                .collect()
        })
        .collect();
    Ok(found)
}

/// Outcome of multiplying every constraint side by side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityProduct {
    pub rhs_product: Sign,
    pub multiplicities: BTreeMap<Slot, usize>,
    /// Every slot occurs an even number of times, so the left side is `+1`
    /// for any real assignment.
    pub all_even: bool,
    pub contradiction: bool,
}

pub fn parity_multiply_check(system: &[ParityConstraint]) -> ParityProduct {
    let rhs_product: Sign = system.iter().map(ParityConstraint::required).product();
    let mut multiplicities = BTreeMap::new();
    for s in system.iter().flat_map(|c| c.slots()) {
        *multiplicities.entry(*s).or_insert(0) += 1;
    }
    let all_even = multiplicities.values().all(|m| m % 2 == 0);
    ParityProduct {
        rhs_product,
        multiplicities,
        all_even,
        contradiction: all_even && rhs_product == Sign::Minus,
    }
}

/// `coefficient * prod_L (m_x^L m_y^L)^{k_L}` required to equal one of
/// `allowed`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairProductConstraint {
    pub label: String,
    pub coefficient: Complex64,
    pub exponents: BTreeMap<Particle, u32>,
    pub allowed: Vec<Complex64>,
}

impl PairProductConstraint {
    pub fn particles(&self) -> impl Iterator<Item = Particle> + '_ {
        self.exponents.keys().copied()
    }
}

impl fmt::Display for PairProductConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lhs = String::new();
        if self.coefficient != ONE {
            lhs.push_str(&fmt_complex(self.coefficient));
            lhs.push(' ');
        }
        let factors: Vec<String> = self
            .exponents
            .iter()
            .map(|(p, k)| if *k == 1 { format!("(m_x{p} m_y{p})") } else { format!("(m_x{p} m_y{p})^{k}") })
            .collect();
        lhs.push_str(&factors.join(" "));
        let rhs: Vec<String> = self.allowed.iter().map(|z| fmt_complex(*z)).collect();
        write!(f, "{lhs} in {{{}}}", rhs.join(", "))
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    let clean = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    let (re, im) = (clean(z.re), clean(z.im));
    match (re == 0.0, im == 0.0) {
        (_, true) => table_num(re),
        (true, false) if im == 1.0 => "i".into(),
        (true, false) if im == -1.0 => "-i".into(),
        (true, false) => format!("{}i", table_num(im)),
        (false, false) => format!("{}{:+}i", table_num(re), im),
    }
}

/// Multiplies the system side by side and regroups the left side into
/// per-particle pair products. Fails when some particle carries unequal
/// numbers of x and y elements.
pub fn derive_pair_product(system: &[ParityConstraint]) -> Result<PairProductConstraint> {
    let product = parity_multiply_check(system);
    let mut counts: BTreeMap<Particle, (u32, u32)> = BTreeMap::new();
    for (slot, m) in &product.multiplicities {
        let e = counts.entry(slot.particle).or_default();
        match slot.element {
            Element::X => e.0 += *m as u32,
            Element::Y => e.1 += *m as u32,
        }
    }
    let mut exponents = BTreeMap::new();
    for (p, (nx, ny)) in counts {
        if nx != ny {
            return Err(Error::NotPairProduct(format!(
                "particle {p} has {nx} x elements and {ny} y elements"
            )));
        }
        exponents.insert(p, nx);
    }
    let label = system.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" * ");
    Ok(PairProductConstraint {
        label: format!("product of [{label}]"),
        coefficient: ONE,
        exponents,
        allowed: vec![Complex64::new(product.rhs_product.as_f64(), 0.0)],
    })
}

/// `-i m_x m_y = +-1` for a single spin.
pub fn single_spin_constraint() -> PairProductConstraint {
    PairProductConstraint {
        label: "-i m_x m_y = +-1".into(),
        coefficient: -I,
        exponents: BTreeMap::from([(Particle::A, 1)]),
        allowed: vec![ONE, -ONE],
    }
}

/// Sign `s_L` per particle, meaning `m_x^L m_y^L = s_L i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CorrelatedModel {
    pub signs: BTreeMap<Particle, Sign>,
}

impl CorrelatedModel {
    pub fn new(signs: impl IntoIterator<Item = (Particle, Sign)>) -> Self {
        Self { signs: signs.into_iter().collect() }
    }

    /// Signs assigned in particle order starting at A.
    pub fn from_signs(signs: &[Sign]) -> Self {
        Self::new(signs.iter().enumerate().map(|(k, s)| (Particle(k as u8), *s)))
    }

    pub fn pair_value(&self, particle: Particle) -> Result<Complex64> {
        self.signs
            .get(&particle)
            .map(|s| I * s.as_f64())
            .ok_or_else(|| Error::MissingSign(particle.to_string()))
    }

    pub fn sign_string(&self) -> String {
        self.signs.values().map(|s| s.symbol()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairEvaluation {
    pub constraint: PairProductConstraint,
    pub value: Complex64,
    pub matches: bool,
}

pub fn evaluate_pair(constraint: &PairProductConstraint, model: &CorrelatedModel) -> Result<PairEvaluation> {
    let mut value = constraint.coefficient;
    for (p, k) in &constraint.exponents {
        value *= model.pair_value(*p)?.powu(*k);
    }
    let matches = constraint.allowed.iter().any(|z| (value - z).norm() <= STATE_TOL);
    Ok(PairEvaluation { constraint: constraint.clone(), value, matches })
}

/// Derives the pair-product identity of `system` and evaluates it under `model`.
pub fn evaluate_correlated(system: &[ParityConstraint], model: &CorrelatedModel) -> Result<PairEvaluation> {
    evaluate_pair(&derive_pair_product(system)?, model)
}

/// Every sign vector over `particles` satisfying all constraints, `+`
/// before `-` with the first particle most significant.
pub fn solve_signs(
    constraints: &[PairProductConstraint],
    particles: &[Particle],
) -> Result<Vec<CorrelatedModel>> {
    let n = particles.len();
    if n > MAX_SIGN_PARTICLES {
        return Err(Error::ParticleCap { particles: n, max: MAX_SIGN_PARTICLES });
    }
    for c in constraints {
        if let Some(p) = c.particles().find(|p| !particles.contains(p)) {
            return Err(Error::MissingSign(p.to_string()));
        }
    }
    let mut solutions = Vec::new();
    for bits in 0u32..(1 << n) {
        let model = CorrelatedModel::new(
            particles
                .iter()
                .enumerate()
                .map(|(k, &p)| (p, Sign::from_bit(bits >> (n - 1 - k) & 1 == 1))),
        );
        let mut ok = true;
        for c in constraints {
            if !evaluate_pair(c, &model)?.matches {
                ok = false;
                break;
            }
        }
        if ok {
            solutions.push(model);
        }
    }
    Ok(solutions)
}

/// Table with one column per slot and `1`/`-1` entries.
pub fn assignments_table(slots: &[Slot], assignments: &[ElementAssignment]) -> String {
    let header: Vec<String> = slots.iter().map(Slot::to_string).collect();
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = assignments
        .iter()
        .map(|a| slots.iter().map(|s| a.get(*s).map(|v| v.to_string()).unwrap_or_default()).collect())
        .collect();
    render_table(&header_ref, &rows)
}

pub fn write_assignments_csv<W: Write>(
    slots: &[Slot],
    assignments: &[ElementAssignment],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(slots.iter().map(Slot::to_string))?;
    for a in assignments {
        w.write_record(slots.iter().map(|s| a.get(*s).map(|v| v.to_string()).unwrap_or_default()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn signs_table(particles: &[Particle], models: &[CorrelatedModel]) -> String {
    let header: Vec<String> = particles.iter().map(|p| format!("s_{p}")).collect();
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = models
        .iter()
        .map(|m| particles.iter().map(|p| m.signs.get(p).map(|s| s.to_string()).unwrap_or_default()).collect())
        .collect();
    render_table(&header_ref, &rows)
}

pub fn write_signs_csv<W: Write>(particles: &[Particle], models: &[CorrelatedModel], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(particles.iter().map(|p| p.to_string()))?;
    for m in models {
        w.write_record(particles.iter().map(|p| m.signs.get(p).map(|s| s.to_string()).unwrap_or_default()))?;
    }
    w.flush()?;
    Ok(())
}

/// Joint outcome of two observables, e.g. `U1 = 1 and U2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutcomePattern {
    pub first: (HardyObservable, u8),
    pub second: (HardyObservable, u8),
}

impl OutcomePattern {
    pub fn matches(&self, assignment: &[u8; 4]) -> bool {
        assignment[self.first.0 as usize] == self.first.1
            && assignment[self.second.0 as usize] == self.second.1
    }
}

impl fmt::Display for OutcomePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}={} & {}={}",
            self.first.0.label(),
            self.first.1,
            self.second.0.label(),
            self.second.1
        )
    }
}

/// Events forbidden by the quantum table plus the positive-probability
/// candidates an LHV model would have to reproduce.
#[derive(Clone, Debug, PartialEq)]
pub struct HardyLhvInstance {
    pub zero_events: Vec<OutcomePattern>,
    /// Positive entries of the `(W1, W2)` context with their probabilities.
    pub witness_events: Vec<(OutcomePattern, f64)>,
}

impl HardyLhvInstance {
    /// Harvests every table entry below `zero_tol` as a zero event.
    pub fn from_table(table: &HardyTable, zero_tol: f64) -> Self {
        let mut zero_events = Vec::new();
        let mut witness_events = Vec::new();
        for (ctx, (o1, o2), p) in table.entries() {
            let (a, b) = ctx.observables();
            let pattern = OutcomePattern { first: (a, o1), second: (b, o2) };
            if p < zero_tol {
                zero_events.push(pattern);
            } else if ctx == HardyContext::W1W2 {
                witness_events.push((pattern, p));
            }
        }
        Self { zero_events, witness_events }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardyFeasibility {
    /// Deterministic `(U1, W1, U2, W2)` assignments avoiding every zero event.
    pub survivors: Vec<[u8; 4]>,
    /// First positive-probability event no survivor reproduces.
    pub uncovered_witness: Option<(OutcomePattern, f64)>,
    pub feasible: bool,
}

pub fn hardy_lhv_feasible(instance: &HardyLhvInstance) -> HardyFeasibility {
    let survivors: Vec<[u8; 4]> = (0u8..16)
        .map(|bits| [bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1])
        .filter(|a| !instance.zero_events.iter().any(|e| e.matches(a)))
        .collect();
    let uncovered_witness = instance
        .witness_events
        .iter()
        .find(|(w, _)| !survivors.iter().any(|a| w.matches(a)))
        .copied();
    HardyFeasibility { survivors, feasible: uncovered_witness.is_none(), uncovered_witness }
}
