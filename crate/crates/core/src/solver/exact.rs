//! Manufactured solutions of `(-Delta)^p1 u = f` on the unit square.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Result, VemError};
use crate::mesh::Point;
use crate::polycalc::{binomial, MultiIndex, PolyCoeffs, ScaledMonomialBasis};

/// Which built-in solution to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolutionKind {
    /// `[x(1-x)y(1-y)]^p1`.
    Bubble,
    /// `sin^p1(pi x) sin^p1(pi y)`.
    Sine,
    /// A fixed polynomial of degree `r` with non-zero boundary data.
    PolyPatch,
}

impl SolutionKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolutionKind::Bubble => "bubble",
            SolutionKind::Sine => "sin",
            SolutionKind::PolyPatch => "poly-patch",
        }
    }
}

impl FromStr for SolutionKind {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bubble" => Ok(SolutionKind::Bubble),
            "sin" | "sine" => Ok(SolutionKind::Sine),
            "poly-patch" | "patch" => Ok(SolutionKind::PolyPatch),
            other => Err(VemError::UnknownSolution(other.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    /// All partial derivatives up to `max_order`, indexed by position, and
    /// the right-hand side.
    Polynomial { derivatives: Vec<PolyCoeffs>, rhs: PolyCoeffs },
    Sine { p: usize },
}

/// An exact solution with its derivatives and right-hand side.
#[derive(Clone, Debug)]
pub struct ManufacturedSolution {
    pub kind: SolutionKind,
    pub p1: usize,
    repr: Repr,
}

/// Highest derivative order ever requested: vertex values need `p2 - 1`,
/// energy errors need `p1`.
const MAX_ORDER: usize = 8;

impl ManufacturedSolution {
    pub fn new(kind: SolutionKind, p1: usize, r: usize) -> Self {
        let repr = match kind {
            SolutionKind::Sine => Repr::Sine { p: p1 },
            SolutionKind::Bubble => {
                let g = ScaledMonomialBasis::global(2);
                let x = PolyCoeffs::monomial(g, MultiIndex::new(1, 0));
                let y = PolyCoeffs::monomial(g, MultiIndex::new(0, 1));
                let one = PolyCoeffs::constant(g, 1.0);
                let bx = x.multiply(&one.add(&x.scaled(-1.0)).expect("same frame")).expect("same frame");
                let by = y.multiply(&one.add(&y.scaled(-1.0)).expect("same frame")).expect("same frame");
                polynomial_repr(bx.multiply(&by).expect("same frame").pow(p1), p1)
            }
            SolutionKind::PolyPatch => {
                let g = ScaledMonomialBasis::global(r as i64);
                let coeffs = MultiIndex::up_to(r as i64)
                    .map(|nu| {
                        let sign = if nu.nu2 % 2 == 0 { 1.0 } else { -1.0 };
                        sign * (1.0 + nu.nu1 as f64) / (1.0 + nu.order() as f64 + 0.5 * nu.nu2 as f64)
                    })
                    .collect();
                polynomial_repr(PolyCoeffs::new(g, coeffs), p1)
            }
        };
        ManufacturedSolution { kind, p1, repr }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Whether `d_n^j u = 0` on the boundary for `j < p1`.
    pub fn is_clamped(&self) -> bool {
        self.kind != SolutionKind::PolyPatch
    }

    /// `D^nu u(x)`.
    pub fn derivative(&self, nu: MultiIndex, x: Point) -> f64 {
        match &self.repr {
            Repr::Polynomial { derivatives, .. } => {
                assert!(nu.order() <= MAX_ORDER, "derivative order {} not tabulated", nu.order());
                derivatives[nu.position()].eval(x)
            }
            Repr::Sine { p } => sin_power_derivative(*p, nu.nu1, x[0]) * sin_power_derivative(*p, nu.nu2, x[1]),
        }
    }

    pub fn value(&self, x: Point) -> f64 {
        self.derivative(MultiIndex::ZERO, x)
    }

    /// `f = (-Delta)^p1 u`.
    pub fn rhs(&self, x: Point) -> f64 {
        match &self.repr {
            Repr::Polynomial { rhs, .. } => rhs.eval(x),
            Repr::Sine { p } => {
                let sign = if self.p1.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * (0..=self.p1)
                    .map(|k| {
                        binomial(self.p1, k)
                            * sin_power_derivative(*p, 2 * k, x[0])
                            * sin_power_derivative(*p, 2 * (self.p1 - k), x[1])
                    })
                    .sum::<f64>()
            }
        }
    }
}

fn polynomial_repr(u: PolyCoeffs, p1: usize) -> Repr {
    let sign = if p1.is_multiple_of(2) { 1.0 } else { -1.0 };
    let rhs = u.laplacian_power(p1).scaled(sign);
    let derivatives = MultiIndex::up_to(MAX_ORDER as i64).map(|nu| u.differentiate(nu)).collect();
    Repr::Polynomial { derivatives, rhs }
}

/// `d^m/dx^m sin^p(pi x)`, from the exponential expansion
/// `sin^p t = (2i)^-p sum_k C(p,k) (-1)^k e^{i(p-2k)t}`.
pub fn sin_power_derivative(p: usize, m: usize, x: f64) -> f64 {
    let phase = (m as f64 - p as f64) * 0.5 * PI;
    let sum: f64 = (0..=p)
        .map(|k| {
            let freq = (p as f64 - 2.0 * k as f64) * PI;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(p, k) * freq.powi(m as i32) * (freq * x + phase).cos()
        })
        .sum();
    sum / 2f64.powi(p as i32)
}
