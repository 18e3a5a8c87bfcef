//! Ground-truth random iterated function systems: built-in generator
//! families, driven simulation, and scalar observation functions.
//!
//! Built-ins: a 1D family of three logistic maps, a two-map Hénon family on
//! the plane, and a three-map Möbius family on the closed unit disk stored
//! as real pairs `(Re z, Im z)`. Custom polynomial families load from a
//! small text format via [`GeneratorSet::from_text`].

use crate::markov::SymbolSequence;
use thiserror::Error;

/// Points may exceed the declared domain by at most this much.
pub const DOMAIN_TOL: f64 = 1e-9;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Error)]
pub enum IfsError {
    #[error("symbol {0} outside 1..={1}")]
    SymbolOutOfRange(usize, usize),
    #[error("point has {got} coordinates, state space has {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("coordinate {coord} = {value} outside the domain {domain} (step {step})")]
    OutOfDomain {
        coord: usize,
        value: f64,
        domain: String,
        step: usize,
    },
    #[error("burn-in {burn_in} consumes the whole driving sequence of length {len}")]
    BurnInTooLong { burn_in: usize, len: usize },
    #[error("observable needs coordinate {idx}, state space has {dim}")]
    BadCoordinate { idx: usize, dim: usize },
    #[error("identity observable requires a 1-dimensional state space, got {0}")]
    IdentityNeedsScalar(usize),
    #[error("generator set parse error: {0}")]
    Parse(String),
}

/// Compact domain the generators act on.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Axis-aligned box; 1D boxes are intervals.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Closed unit disk `|z| <= 1` in the `(Re, Im)` plane.
    UnitDisk,
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::UnitDisk => 2,
        }
    }

    /// First offending coordinate (1-based) and its value, if any.
    fn violation(&self, x: &[f64]) -> Option<(usize, f64)> {
        match self {
            Domain::Box { lo, hi } => x.iter().enumerate().find_map(|(i, &v)| {
                (v < lo[i] - DOMAIN_TOL || v > hi[i] + DOMAIN_TOL).then_some((i + 1, v))
            }),
            Domain::UnitDisk => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                (r2 > (1.0 + DOMAIN_TOL) * (1.0 + DOMAIN_TOL)).then_some((1, x[0]))
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            Domain::Box { lo, hi } => format!("box {lo:?}..{hi:?}"),
            Domain::UnitDisk => "unit disk".into(),
        }
    }
}

/// One polynomial term: `coeff * prod_i x_i^exponents[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// One output coordinate as a sum of polynomial terms.
pub type PolyCoordinate = Vec<PolyTerm>;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorMap {
    /// One polynomial per output coordinate.
    Polynomial(Vec<PolyCoordinate>),
    /// `R^rot ∘ f` on the unit disk, with `f` the base Möbius map and `R`
    /// rotation by `2π/3`; stored over the reals.
    Mobius { rot: u8 },
}

impl GeneratorMap {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            GeneratorMap::Polynomial(coords) => coords
                .iter()
                .map(|terms| {
                    terms
                        .iter()
                        .map(|t| {
                            t.coeff
                                * t.exponents
                                    .iter()
                                    .zip(x)
                                    .map(|(&e, &v)| v.powi(e as i32))
                                    .product::<f64>()
                        })
                        .sum()
                })
                .collect(),
            GeneratorMap::Mobius { rot } => {
                // f(z) = ((√3-1)z + 1) / (-z + √3 + 1), then rotate by
                // e^{2πi/3} `rot` times; complex arithmetic inlined on (re, im)
                let (a, b) = (x[0], x[1]);
                let (nr, ni) = ((SQRT3 - 1.0) * a + 1.0, (SQRT3 - 1.0) * b);
                let (dr, di) = (SQRT3 + 1.0 - a, -b);
                let den = dr * dr + di * di;
                let mut wr = (nr * dr + ni * di) / den;
                let mut wi = (ni * dr - nr * di) / den;
                for _ in 0..*rot {
                    // multiply by e^{2πi/3} = (-1/2, √3/2)
                    let (r, i) = (wr, wi);
                    wr = -0.5 * r - 0.5 * SQRT3 * i;
                    wi = 0.5 * SQRT3 * r - 0.5 * i;
                }
                vec![wr, wi]
            }
        }
    }
}

/// A finite family of self-maps of a common compact domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    name: String,
    dim: usize,
    domain: Domain,
    maps: Vec<GeneratorMap>,
}

fn poly1(terms: &[(f64, u32)]) -> PolyCoordinate {
    terms
        .iter()
        .map(|&(coeff, e)| PolyTerm { coeff, exponents: vec![e] })
        .collect()
}

fn poly2(terms: &[(f64, u32, u32)]) -> PolyCoordinate {
    terms
        .iter()
        .map(|&(coeff, ex, ey)| PolyTerm { coeff, exponents: vec![ex, ey] })
        .collect()
}

impl GeneratorSet {
    /// Three logistic maps `r x (1-x)` with `r = 3, 3.5, 4` on `[0, 1]`.
    pub fn logistic3() -> Self {
        let map = |r: f64| GeneratorMap::Polynomial(vec![poly1(&[(r, 1), (-r, 2)])]);
        Self {
            name: "logistic3".into(),
            dim: 1,
            domain: Domain::Box { lo: vec![0.0], hi: vec![1.0] },
            maps: vec![map(3.0), map(3.5), map(4.0)],
        }
    }

    /// Two Hénon-type maps on the plane:
    /// `f1(x,y) = (y + 1 - 1.2 x^2, 0.3 x)` and
    /// `f2(x,y) = (y + 1 - 1.2 (x - 0.2)^2, -0.2 x)`.
    pub fn henon() -> Self {
        let f1 = GeneratorMap::Polynomial(vec![
            poly2(&[(1.0, 0, 1), (1.0, 0, 0), (-1.2, 2, 0)]),
            poly2(&[(0.3, 1, 0)]),
        ]);
        // 1 - 1.2(x-0.2)^2 = 0.952 + 0.48x - 1.2x^2
        let f2 = GeneratorMap::Polynomial(vec![
            poly2(&[(1.0, 0, 1), (0.952, 0, 0), (0.48, 1, 0), (-1.2, 2, 0)]),
            poly2(&[(-0.2, 1, 0)]),
        ]);
        Self {
            name: "henon".into(),
            dim: 2,
            domain: Domain::Box { lo: vec![-2.0, -2.0], hi: vec![2.0, 2.0] },
            maps: vec![f1, f2],
        }
    }

    /// Möbius family `{f, R∘f, R²∘f}` on the closed unit disk; its attractor
    /// is the curvilinear Sierpinski gasket.
    pub fn sierpinski() -> Self {
        Self {
            name: "sierpinski".into(),
            dim: 2,
            domain: Domain::UnitDisk,
            maps: (0..3).map(|rot| GeneratorMap::Mobius { rot }).collect(),
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "logistic3" => Some(Self::logistic3()),
            "henon" => Some(Self::henon()),
            "sierpinski" => Some(Self::sierpinski()),
            _ => None,
        }
    }

    /// Parse a custom polynomial family. Format, one item per line:
    ///
    /// ```text
    /// dim 2
    /// domain box -2 2 -2 2      # lo/hi per coordinate (or: domain disk)
    /// map                       # generator 1, dim lines follow
    /// 1:0,1 1:0,0 -1.2:2,0      #   output 1: terms coeff:e1,e2
    /// 0.3:1,0                   #   output 2
    /// map                       # generator 2 ...
    /// ```
    pub fn from_text(name: &str, text: &str) -> Result<Self, IfsError> {
        let mut dim = 0usize;
        let mut domain = None;
        let mut maps: Vec<Vec<PolyCoordinate>> = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next().unwrap() {
                "dim" => {
                    dim = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| IfsError::Parse("bad dim line".into()))?;
                }
                "domain" => match parts.next() {
                    Some("disk") => domain = Some(Domain::UnitDisk),
                    Some("box") => {
                        let vals: Result<Vec<f64>, _> = parts.map(str::parse).collect();
                        let vals =
                            vals.map_err(|e| IfsError::Parse(format!("bad domain: {e}")))?;
                        if vals.len() != 2 * dim || dim == 0 {
                            return Err(IfsError::Parse(
                                "domain box needs `lo hi` per coordinate after `dim`".into(),
                            ));
                        }
                        let (lo, hi): (Vec<f64>, Vec<f64>) =
                            vals.chunks(2).map(|c| (c[0], c[1])).unzip();
                        domain = Some(Domain::Box { lo, hi });
                    }
                    _ => return Err(IfsError::Parse("domain must be `box` or `disk`".into())),
                },
                "map" => maps.push(Vec::new()),
                first => {
                    let cur = maps
                        .last_mut()
                        .ok_or_else(|| IfsError::Parse("terms before any `map` line".into()))?;
                    let mut coord = Vec::new();
                    for tok in std::iter::once(first).chain(parts) {
                        let (c, es) = tok
                            .split_once(':')
                            .ok_or_else(|| IfsError::Parse(format!("bad term `{tok}`")))?;
                        let coeff: f64 = c
                            .parse()
                            .map_err(|e| IfsError::Parse(format!("bad coefficient: {e}")))?;
                        let exponents: Result<Vec<u32>, _> =
                            es.split(',').map(str::parse).collect();
                        let exponents =
                            exponents.map_err(|e| IfsError::Parse(format!("bad exponent: {e}")))?;
                        if exponents.len() != dim {
                            return Err(IfsError::Parse(format!(
                                "term `{tok}` has {} exponents, expected {dim}",
                                exponents.len()
                            )));
                        }
                        coord.push(PolyTerm { coeff, exponents });
                    }
                    cur.push(coord);
                }
            }
        }
        let domain = domain.ok_or_else(|| IfsError::Parse("missing domain".into()))?;
        if dim == 0 || domain.dim() != dim {
            return Err(IfsError::Parse("dim and domain disagree".into()));
        }
        if maps.is_empty() {
            return Err(IfsError::Parse("no generators".into()));
        }
        for (gi, m) in maps.iter().enumerate() {
            if m.len() != dim {
                return Err(IfsError::Parse(format!(
                    "generator {} has {} output coordinates, expected {dim}",
                    gi + 1,
                    m.len()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            domain,
            maps: maps.into_iter().map(GeneratorMap::Polynomial).collect(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.maps.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
}

/// Apply generator `i` (1-based) to a point of the domain.
pub fn evaluate_generator(gs: &GeneratorSet, i: usize, x: &[f64]) -> Result<Vec<f64>, IfsError> {
    if i < 1 || i > gs.k() {
        return Err(IfsError::SymbolOutOfRange(i, gs.k()));
    }
    if x.len() != gs.dim {
        return Err(IfsError::DimensionMismatch { got: x.len(), expected: gs.dim });
    }
    if let Some((coord, value)) = gs.domain.violation(x) {
        return Err(IfsError::OutOfDomain {
            coord,
            value,
            domain: gs.domain.describe(),
            step: 0,
        });
    }
    Ok(gs.maps[i - 1].eval(x))
}

/// Simulated orbit plus the driving symbols that produced it. The driving
/// labels are ground truth for evaluation only; the learning path never
/// reads them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<Vec<f64>>,
    driving: SymbolSequence,
}

impl Trajectory {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn driving(&self) -> &SymbolSequence {
        &self.driving
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// CSV with columns `n, x_1..x_dim[, omega]`. The omega column holds the
    /// symbol applied at step `n`; the final row has none.
    pub fn to_csv(&self, with_omega: bool) -> String {
        let dim = self.dim();
        let mut out = String::from("n");
        for j in 1..=dim {
            out.push_str(&format!(",x_{j}"));
        }
        if with_omega {
            out.push_str(",omega");
        }
        out.push('\n');
        for (n, p) in self.points.iter().enumerate() {
            out.push_str(&n.to_string());
            for v in p {
                out.push_str(&format!(",{v}"));
            }
            if with_omega {
                match self.driving.symbols().get(n) {
                    Some(s) => out.push_str(&format!(",{s}")),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Iterate `x_{n+1} = f_{ω_n}(x_n)`, discarding the first `burn_in` steps.
/// The returned trajectory pairs each kept point with the suffix of the
/// driving sequence that generated it.
pub fn simulate(
    gs: &GeneratorSet,
    driving: &SymbolSequence,
    x0: &[f64],
    burn_in: usize,
) -> Result<Trajectory, IfsError> {
    if driving.k() != gs.k() {
        return Err(IfsError::SymbolOutOfRange(driving.k(), gs.k()));
    }
    if burn_in >= driving.len() {
        return Err(IfsError::BurnInTooLong { burn_in, len: driving.len() });
    }
    let mut x = x0.to_vec();
    if x.len() != gs.dim {
        return Err(IfsError::DimensionMismatch { got: x.len(), expected: gs.dim });
    }
    let mut points = Vec::with_capacity(driving.len() - burn_in + 1);
    for (step, &sym) in driving.symbols().iter().enumerate() {
        if let Some((coord, value)) = gs.domain.violation(&x) {
            return Err(IfsError::OutOfDomain {
                coord,
                value,
                domain: gs.domain.describe(),
                step,
            });
        }
        if step >= burn_in {
            points.push(x.clone());
        }
        x = gs.maps[sym - 1].eval(&x);
    }
    points.push(x);
    let suffix = SymbolSequence::new(driving.symbols()[burn_in..].to_vec(), gs.k())
        .expect("suffix symbols already validated");
    Ok(Trajectory { points, driving: suffix })
}

/// Scalar observation function applied pointwise to a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// Project onto coordinate `j` (1-based).
    Coordinate(usize),
    /// Imaginary part of a disk-valued state, i.e. its second coordinate.
    Imag,
    /// Full observation of a scalar state.
    Identity,
}

impl Observable {
    pub fn id(&self) -> String {
        match self {
            Observable::Coordinate(j) => format!("coord:{j}"),
            Observable::Imag => "imag".into(),
            Observable::Identity => "identity".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "imag" => Some(Observable::Imag),
            "identity" => Some(Observable::Identity),
            _ => s
                .strip_prefix("coord:")
                .and_then(|j| j.parse().ok())
                .map(Observable::Coordinate),
        }
    }
}

/// Scalar time series `z_n = ψ(x_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    values: Vec<f64>,
    observable_id: String,
}

impl ObservationSeries {
    pub fn new(values: Vec<f64>, observable_id: impl Into<String>) -> Self {
        Self { values, observable_id: observable_id.into() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn observable_id(&self) -> &str {
        &self.observable_id
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x_1\n");
        for (n, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{n},{v}\n"));
        }
        out
    }

    /// Read back the single-column CSV written by [`Self::to_csv`].
    pub fn from_csv(text: &str, observable_id: &str) -> Result<Self, IfsError> {
        let mut values = Vec::new();
        for (ln, line) in text.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let _n = cols.next();
            let v = cols
                .next()
                .ok_or_else(|| IfsError::Parse(format!("line {}: missing value", ln + 1)))?;
            values.push(
                v.parse()
                    .map_err(|e| IfsError::Parse(format!("line {}: {e}", ln + 1)))?,
            );
        }
        Ok(Self::new(values, observable_id))
    }
}

pub fn observe(traj: &Trajectory, observable: Observable) -> Result<ObservationSeries, IfsError> {
    let dim = traj.dim();
    let idx = match observable {
        Observable::Coordinate(j) => {
            if j < 1 || j > dim {
                return Err(IfsError::BadCoordinate { idx: j, dim });
            }
            j - 1
        }
        Observable::Imag => {
            if dim != 2 {
                return Err(IfsError::BadCoordinate { idx: 2, dim });
            }
            1
        }
        Observable::Identity => {
            if dim != 1 {
                return Err(IfsError::IdentityNeedsScalar(dim));
            }
            0
        }
    };
    Ok(ObservationSeries::new(
        traj.points.iter().map(|p| p[idx]).collect(),
        observable.id(),
    ))
}
