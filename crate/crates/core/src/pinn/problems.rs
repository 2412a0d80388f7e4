use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::autodiff::{Deriv, HyperDual};
use crate::error::{Error, Result};

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Closed-form solution evaluated on hyper-dual inputs so its derivatives are exact.
pub type ExactSolution = Arc<dyn Fn(&[HyperDual]) -> HyperDual + Send + Sync>;

/// Axis-aligned box `prod_j [lower_j, upper_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let domain = Self { lower, upper };
        domain.validate()?;
        Ok(domain)
    }

    pub fn unit(dim: usize) -> Self {
        Self { lower: vec![0.0; dim], upper: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::invalid("box bounds must be nonempty and of equal length"));
        }
        for (j, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("degenerate extent [{lo}, {hi}] on coordinate {j}")));
            }
        }
        Ok(())
    }

    /// `(d-1)`-dimensional measure of a face; 1 for the endpoints of an interval.
    pub fn face_measure(&self, face: Face) -> f64 {
        (0..self.dim()).filter(|&j| j != face.coord).map(|j| self.upper[j] - self.lower[j]).product()
    }

    pub fn face_value(&self, face: Face) -> f64 {
        if face.upper {
            self.upper[face.coord]
        } else {
            self.lower[face.coord]
        }
    }

    pub fn contains_strictly(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| lo < v && v < hi)
    }
}

/// The face `x_coord = lower_coord` or `x_coord = upper_coord` of a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub coord: usize,
    pub upper: bool,
}

impl Face {
    pub const fn lower(coord: usize) -> Self {
        Self { coord, upper: false }
    }

    pub const fn upper(coord: usize) -> Self {
        Self { coord, upper: true }
    }
}

/// `coeff * D u` for one derivative channel `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub deriv: Deriv,
    pub coeff: f64,
}

impl Term {
    pub const fn new(deriv: Deriv, coeff: f64) -> Self {
        Self { deriv, coeff }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Interior,
    Boundary(Vec<Face>),
}

/// One condition `sum_c coeff_c D_c u(x) = target(x)` on `region`.
#[derive(Clone)]
pub struct Condition {
    pub name: String,
    pub terms: Vec<Term>,
    pub region: Region,
    pub target: ScalarField,
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Condition").field("name", &self.name).field("terms", &self.terms).field("region", &self.region).finish()
    }
}

impl Condition {
    pub fn is_interior(&self) -> bool {
        self.region == Region::Interior
    }

    pub fn max_order(&self) -> u8 {
        self.terms
            .iter()
            .map(|t| match t.deriv {
                Deriv::Value => 0,
                Deriv::First(_) => 1,
                Deriv::Second(..) => 2,
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone)]
pub struct PdeSpec {
    pub id: String,
    pub domain: BoxDomain,
    pub conditions: Vec<Condition>,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for PdeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeSpec")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("conditions", &self.conditions)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl PdeSpec {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn num_losses(&self) -> usize {
        self.conditions.len()
    }

    /// Union of the faces carrying boundary or initial conditions, sorted.
    pub fn boundary_faces(&self) -> Vec<Face> {
        let mut faces: Vec<Face> = self
            .conditions
            .iter()
            .filter_map(|c| match &c.region {
                Region::Boundary(f) => Some(f.iter().copied()),
                Region::Interior => None,
            })
            .flatten()
            .collect();
        faces.sort_unstable();
        faces.dedup();
        faces
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.conditions.is_empty() {
            return Err(Error::invalid(format!("problem {} has no conditions", self.id)));
        }
        let d = self.dim();
        for c in &self.conditions {
            if c.terms.is_empty() {
                return Err(Error::invalid(format!("condition {} has no terms", c.name)));
            }
            if let Region::Boundary(faces) = &c.region {
                if faces.is_empty() || faces.iter().any(|f| f.coord >= d) {
                    return Err(Error::invalid(format!("condition {} has invalid faces", c.name)));
                }
            }
            for t in &c.terms {
                let max_coord = match t.deriv {
                    Deriv::Value => 0,
                    Deriv::First(j) => j,
                    Deriv::Second(j, k) => j.max(k),
                };
                if max_coord >= d {
                    return Err(Error::DimensionMismatch { expected: d, got: max_coord + 1 });
                }
            }
        }
        Ok(())
    }

    pub fn exact_value(&self, x: &[f64]) -> Option<f64> {
        let exact = self.exact.as_ref()?;
        let point: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
        Some(exact(&point).re)
    }

    /// `sum_c coeff_c D_c u*(x) - target(x)` for the exact solution `u*`.
    pub fn exact_residual(&self, condition: usize, x: &[f64]) -> Option<f64> {
        let exact = self.exact.as_ref()?;
        let c = &self.conditions[condition];
        let lhs: f64 = c
            .terms
            .iter()
            .map(|t| {
                let v = match t.deriv {
                    Deriv::Value => exact(&HyperDual::seed(x, usize::MAX, usize::MAX)).re,
                    Deriv::First(j) => exact(&HyperDual::seed(x, j, usize::MAX)).e1,
                    Deriv::Second(j, k) => exact(&HyperDual::seed(x, j, k)).e12,
                };
                t.coeff * v
            })
            .sum();
        Some(lhs - (c.target)(x))
    }
}

fn zero() -> ScalarField {
    Arc::new(|_| 0.0)
}

fn sin_pi(x: HyperDual) -> HyperDual {
    (PI * x).sin()
}

fn poisson1d() -> PdeSpec {
    PdeSpec {
        id: "poisson1d".into(),
        domain: BoxDomain::unit(1),
        conditions: vec![
            Condition {
                name: "residual".into(),
                terms: vec![Term::new(Deriv::Second(0, 0), 1.0)],
                region: Region::Interior,
                target: Arc::new(|x| -PI * PI * (PI * x[0]).sin()),
            },
            Condition {
                name: "dirichlet".into(),
                terms: vec![Term::new(Deriv::Value, 1.0)],
                region: Region::Boundary(vec![Face::lower(0), Face::upper(0)]),
                target: zero(),
            },
        ],
        exact: Some(Arc::new(|x| sin_pi(x[0]))),
    }
}

fn poisson2d() -> PdeSpec {
    PdeSpec {
        id: "poisson2d".into(),
        domain: BoxDomain::unit(2),
        conditions: vec![
            Condition {
                name: "residual".into(),
                terms: vec![Term::new(Deriv::Second(0, 0), 1.0), Term::new(Deriv::Second(1, 1), 1.0)],
                region: Region::Interior,
                target: Arc::new(|x| -2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()),
            },
            Condition {
                name: "dirichlet".into(),
                terms: vec![Term::new(Deriv::Value, 1.0)],
                region: Region::Boundary(vec![Face::lower(0), Face::upper(0), Face::lower(1), Face::upper(1)]),
                target: zero(),
            },
        ],
        exact: Some(Arc::new(|x| sin_pi(x[0]) * sin_pi(x[1]))),
    }
}

/// Coordinates are `(x, t)`.
fn heat1d() -> PdeSpec {
    PdeSpec {
        id: "heat1d".into(),
        domain: BoxDomain::unit(2),
        conditions: vec![
            Condition {
                name: "residual".into(),
                terms: vec![Term::new(Deriv::First(1), 1.0), Term::new(Deriv::Second(0, 0), -1.0)],
                region: Region::Interior,
                target: zero(),
            },
            Condition {
                name: "dirichlet".into(),
                terms: vec![Term::new(Deriv::Value, 1.0)],
                region: Region::Boundary(vec![Face::lower(0), Face::upper(0)]),
                target: zero(),
            },
            Condition {
                name: "initial".into(),
                terms: vec![Term::new(Deriv::Value, 1.0)],
                region: Region::Boundary(vec![Face::lower(1)]),
                target: Arc::new(|x| (PI * x[0]).sin()),
            },
        ],
        exact: Some(Arc::new(|x| (-PI * PI * x[1]).exp() * sin_pi(x[0]))),
    }
}

/// Coordinates are `(x, t)`.
fn wave1d() -> PdeSpec {
    PdeSpec {
        id: "wave1d".into(),
        domain: BoxDomain::unit(2),
        conditions: vec![
            Condition {
                name: "residual".into(),
                terms: vec![Term::new(Deriv::Second(1, 1), 1.0), Term::new(Deriv::Second(0, 0), -1.0)],
                region: Region::Interior,
                target: zero(),
            },
            Condition {
                name: "dirichlet".into(),
                terms: vec![Term::new(Deriv::Value, 1.0)],
                region: Region::Boundary(vec![Face::lower(0), Face::upper(0)]),
                target: zero(),
            },
            Condition {
                name: "initial".into(),
                terms: vec![Term::new(Deriv::Value, 1.0)],
                region: Region::Boundary(vec![Face::lower(1)]),
                target: Arc::new(|x| (PI * x[0]).sin()),
            },
            Condition {
                name: "initial_velocity".into(),
                terms: vec![Term::new(Deriv::First(1), 1.0)],
                region: Region::Boundary(vec![Face::lower(1)]),
                target: zero(),
            },
        ],
        exact: Some(Arc::new(|x| sin_pi(x[0]) * (PI * x[1]).cos())),
    }
}

pub fn builtin_problems() -> Vec<PdeSpec> {
    vec![poisson1d(), poisson2d(), heat1d(), wave1d()]
}

pub fn builtin_problem(id: &str) -> Result<PdeSpec> {
    builtin_problems().into_iter().find(|p| p.id == id).ok_or_else(|| {
        Error::invalid(format!("unknown problem '{id}' (expected poisson1d, poisson2d, heat1d or wave1d)"))
    })
}
