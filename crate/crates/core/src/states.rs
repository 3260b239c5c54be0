//! Named states and observables: Pauli strings, the GHZ and `|Phi->` states,
//! the Goldstein two-particle state and its `U`/`W` projectors, and spin
//! operators along arbitrary directions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, DenseOperator, StateVector, I, ONE, STATE_TOL, ZERO};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn identity2() -> DenseOperator {
    DenseOperator::identity(2).expect("2 is a valid dimension")
}

pub fn sigma_x() -> DenseOperator {
    DenseOperator::from_rows([[ZERO, ONE], [ONE, ZERO]]).expect("valid 2x2")
}

pub fn sigma_y() -> DenseOperator {
    DenseOperator::from_rows([[ZERO, -I], [I, ZERO]]).expect("valid 2x2")
}

pub fn sigma_z() -> DenseOperator {
    DenseOperator::from_rows([[ONE, ZERO], [ZERO, -ONE]]).expect("valid 2x2")
}

fn qubit(up: Complex64, down: Complex64) -> StateVector {
    StateVector::new(vec![up, down]).expect("unit qubit")
}

pub fn up() -> StateVector {
    qubit(ONE, ZERO)
}

pub fn down() -> StateVector {
    qubit(ZERO, ONE)
}

pub fn plus_x() -> StateVector {
    qubit(Complex64::new(H, 0.0), Complex64::new(H, 0.0))
}

pub fn minus_x() -> StateVector {
    qubit(Complex64::new(H, 0.0), Complex64::new(-H, 0.0))
}

pub fn plus_y() -> StateVector {
    qubit(Complex64::new(H, 0.0), Complex64::new(0.0, H))
}

pub fn minus_y() -> StateVector {
    qubit(Complex64::new(H, 0.0), Complex64::new(0.0, -H))
}

/// Spectral projectors `((1 + A)/2, (1 - A)/2)` of a `+-1`-valued observable.
pub fn spin_projectors(observable: &DenseOperator) -> Result<(DenseOperator, DenseOperator)> {
    let id = DenseOperator::identity(observable.dim())?;
    let half = Complex64::new(0.5, 0.0);
    let plus = (&id + observable).scale(half);
    let minus = (&id - observable).scale(half);
    if !plus.is_projector(STATE_TOL) {
        return Err(Error::NotProjectorFamily(
            "observable is not a Hermitian involution".into(),
        ));
    }
    Ok((plus, minus))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Identity,
    X,
    Y,
    Z,
}

impl Axis {
    pub fn matrix(self) -> DenseOperator {
        match self {
            Axis::Identity => identity2(),
            Axis::X => sigma_x(),
            Axis::Y => sigma_y(),
            Axis::Z => sigma_z(),
        }
    }

    fn label(self) -> char {
        match self {
            Axis::Identity => 'i',
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

impl TryFrom<char> for Axis {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c.to_ascii_lowercase() {
            'x' => Ok(Axis::X),
            'y' => Ok(Axis::Y),
            'z' => Ok(Axis::Z),
            'i' | '1' => Ok(Axis::Identity),
            other => Err(Error::InvalidPauliString(format!("unknown axis label {other:?}"))),
        }
    }
}

/// One Pauli factor (or identity) per particle, in order A, B, C, D.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    axes: Vec<Axis>,
}

impl PauliString {
    pub const MAX_PARTICLES: usize = 4;

    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > Self::MAX_PARTICLES {
            return Err(Error::InvalidPauliString(format!(
                "{} particles, expected 1..={}",
                axes.len(),
                Self::MAX_PARTICLES
            )));
        }
        if axes.iter().all(|&a| a == Axis::Identity) {
            return Err(Error::InvalidPauliString("all factors are identity".into()));
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn particles(&self) -> usize {
        self.axes.len()
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s.chars().map(Axis::try_from).collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axes {
            write!(f, "{}", a.label())?;
        }
        Ok(())
    }
}

pub fn pauli_string_operator(spec: &PauliString) -> DenseOperator {
    let mut axes = spec.axes().iter();
    let first = axes.next().expect("non-empty by construction").matrix();
    axes.fold(first, |acc, a| {
        kron(&acc, &a.matrix()).expect("at most four particles")
    })
}

/// `(|up up up> - |down down down>)/sqrt 2`.
pub fn ghz_state() -> StateVector {
    let mut amps = vec![ZERO; 8];
    amps[0] = Complex64::new(H, 0.0);
    amps[7] = Complex64::new(-H, 0.0);
    StateVector::new(amps).expect("unit GHZ")
}

/// `(|up up> - |down down>)/sqrt 2`.
pub fn bell_phi_minus() -> StateVector {
    StateVector::new(vec![
        Complex64::new(H, 0.0),
        ZERO,
        ZERO,
        Complex64::new(-H, 0.0),
    ])
    .expect("unit Bell state")
}

/// Coefficients of `a|dd> + b|ud> + c|du>`, normalized on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoldsteinParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    /// Coefficients as supplied, before normalization.
    pub original: [Complex64; 3],
}

impl GoldsteinParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        if [a, b, c].iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = (a.norm_sqr() + b.norm_sqr() + c.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self { a: a / norm, b: b / norm, c: c / norm, original: [a, b, c] })
    }

    pub fn real(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0), Complex64::new(c, 0.0))
    }

    /// `abc` of the normalized coefficients.
    pub fn abc(&self) -> Complex64 {
        self.a * self.b * self.c
    }

    pub fn abc_nonzero(&self) -> bool {
        self.abc() != ZERO
    }

    /// Coefficient paired with `a` in `beta_i` (b for particle 1, c for 2).
    pub fn partner(&self, particle: HardyParticle) -> Complex64 {
        match particle {
            HardyParticle::First => self.b,
            HardyParticle::Second => self.c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HardyParticle {
    First,
    Second,
}

impl HardyParticle {
    pub fn number(self) -> u8 {
        match self {
            HardyParticle::First => 1,
            HardyParticle::Second => 2,
        }
    }
}

/// Basis order is `|uu>, |ud>, |du>, |dd>`, so the `|uu>` slot stays zero.
pub fn goldstein_state(p: &GoldsteinParams) -> StateVector {
    StateVector::new(vec![ZERO, p.b, p.c, p.a]).expect("normalized parameters")
}

/// `(a|down> + x|up>)/sqrt(|a|^2 + |x|^2)`.
pub fn beta_vector(a: Complex64, x: Complex64) -> Result<StateVector> {
    StateVector::normalized(vec![x, a])
}

/// Orthogonal complement of a qubit state, `(-conj(v1), conj(v0))` up to phase.
pub fn qubit_complement(v: &StateVector) -> StateVector {
    let a = v.amplitudes();
    qubit(a[1].conj(), -a[0].conj())
}

/// `U_i = |up_i><up_i|` and `W_i = |beta_i><beta_i|` lifted to the
/// two-particle space (identity on the other particle).
#[derive(Clone, Debug)]
pub struct UwProjectors {
    pub u1: DenseOperator,
    pub w1: DenseOperator,
    pub u2: DenseOperator,
    pub w2: DenseOperator,
}

impl UwProjectors {
    pub fn u(&self, particle: HardyParticle) -> &DenseOperator {
        match particle {
            HardyParticle::First => &self.u1,
            HardyParticle::Second => &self.u2,
        }
    }

    pub fn w(&self, particle: HardyParticle) -> &DenseOperator {
        match particle {
            HardyParticle::First => &self.w1,
            HardyParticle::Second => &self.w2,
        }
    }
}

pub fn uw_projectors(p: &GoldsteinParams) -> Result<UwProjectors> {
    let id = identity2();
    let pu = up().projector();
    let b1 = beta_vector(p.a, p.b)?.projector();
    let b2 = beta_vector(p.a, p.c)?.projector();
    Ok(UwProjectors {
        u1: kron(&pu, &id)?,
        w1: kron(&b1, &id)?,
        u2: kron(&id, &pu)?,
        w2: kron(&id, &b2)?,
    })
}

/// Unit vector in spin space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionVector([f64; 3]);

impl DirectionVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotUnitVector { norm });
        }
        Ok(Self([x, y, z]))
    }

    /// Direction at angle `theta` from the z axis within the y-z plane.
    pub fn in_yz_plane(theta: f64) -> Self {
        Self([0.0, theta.sin(), theta.cos()])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &DirectionVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Angle in `[0, pi]` between the two directions.
    pub fn angle_to(&self, other: &DirectionVector) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }
}

/// `n . sigma`.
pub fn direction_operator(n: &DirectionVector) -> DenseOperator {
    let [x, y, z] = n.components();
    let r = |v: f64| Complex64::new(v, 0.0);
    let sx = sigma_x().scale(r(x));
    let sy = sigma_y().scale(r(y));
    let sz = sigma_z().scale(r(z));
    &(&sx + &sy) + &sz
}
