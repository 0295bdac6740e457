//! Exact calculus on bivariate polynomials in scaled monomial bases and on
//! univariate Legendre series along edges.
//!
//! Multi-indices of total degree `<= k` are enumerated in graded
//! lexicographic order: degree by degree, and inside one degree `d` by
//! decreasing `nu1`, i.e. `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.
//! The position of `nu` is therefore `d(d+1)/2 + nu2`.

use crate::error::VemError;

/// A pair `(nu1, nu2)` of derivative / exponent orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub nu1: usize,
    pub nu2: usize,
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex { nu1: 0, nu2: 0 };

    pub const fn new(nu1: usize, nu2: usize) -> Self {
        Self { nu1, nu2 }
    }

    pub fn order(&self) -> usize {
        self.nu1 + self.nu2
    }

    /// Position in the graded lexicographic enumeration.
    pub fn position(&self) -> usize {
        let d = self.order();
        d * (d + 1) / 2 + self.nu2
    }

    pub fn from_position(pos: usize) -> Self {
        let mut d = 0;
        while (d + 1) * (d + 2) / 2 <= pos {
            d += 1;
        }
        let nu2 = pos - d * (d + 1) / 2;
        Self::new(d - nu2, nu2)
    }

    /// All multi-indices with `lo <= |nu| <= hi`, graded lexicographic.
    pub fn range(lo: usize, hi: i64) -> impl Iterator<Item = MultiIndex> {
        let hi = if hi < 0 { None } else { Some(hi as usize) };
        hi.into_iter().flat_map(move |hi| {
            (lo..=hi).flat_map(|d| (0..=d).map(move |nu2| MultiIndex::new(d - nu2, nu2)))
        })
    }

    /// All multi-indices with `|nu| <= k`; empty for negative `k`.
    pub fn up_to(k: i64) -> impl Iterator<Item = MultiIndex> {
        Self::range(0, k)
    }

    /// All multi-indices with `|nu| == d`.
    pub fn of_order(d: usize) -> impl Iterator<Item = MultiIndex> {
        Self::range(d, d as i64)
    }

    pub fn factorial(&self) -> f64 {
        factorial(self.nu1) * factorial(self.nu2)
    }
}

impl std::ops::Add for MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: Self) -> Self {
        MultiIndex::new(self.nu1 + rhs.nu1, self.nu2 + rhs.nu2)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.nu1, self.nu2)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Dimension of `P_k` in two variables; zero for `k < 0`.
pub fn basis_count(k: i64) -> usize {
    if k < 0 {
        0
    } else {
        let k = k as usize;
        (k + 1) * (k + 2) / 2
    }
}

/// Scaled monomials `((x - center) / scale)^nu`, `|nu| <= degree`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMonomialBasis {
    pub center: [f64; 2],
    pub scale: f64,
    pub degree: i64,
}

impl ScaledMonomialBasis {
    pub fn new(center: [f64; 2], scale: f64, degree: i64) -> Self {
        debug_assert!(scale > 0.0);
        Self { center, scale, degree }
    }

    /// Plain monomials in global coordinates.
    pub fn global(degree: i64) -> Self {
        Self::new([0.0, 0.0], 1.0, degree)
    }

    pub fn count(&self) -> usize {
        basis_count(self.degree)
    }

    pub fn with_degree(&self, degree: i64) -> Self {
        Self { degree, ..*self }
    }

    fn same_frame(&self, other: &Self) -> bool {
        self.center == other.center && self.scale == other.scale
    }

    pub fn local_coords(&self, x: [f64; 2]) -> [f64; 2] {
        [
            (x[0] - self.center[0]) / self.scale,
            (x[1] - self.center[1]) / self.scale,
        ]
    }

    /// Values of every basis function at `x`.
    pub fn eval_all(&self, x: [f64; 2]) -> Vec<f64> {
        let n = self.count();
        if n == 0 {
            return Vec::new();
        }
        let [xi, eta] = self.local_coords(x);
        let k = self.degree as usize;
        let px = powers(xi, k);
        let py = powers(eta, k);
        MultiIndex::up_to(self.degree)
            .map(|nu| px[nu.nu1] * py[nu.nu2])
            .collect()
    }

    /// Values of `D^mu m_nu` at `x` for every basis function `m_nu`.
    pub fn eval_all_derivative(&self, mu: MultiIndex, x: [f64; 2]) -> Vec<f64> {
        let n = self.count();
        if n == 0 {
            return Vec::new();
        }
        let [xi, eta] = self.local_coords(x);
        let k = self.degree as usize;
        let px = powers(xi, k);
        let py = powers(eta, k);
        let scale = self.scale.powi(-(mu.order() as i32));
        MultiIndex::up_to(self.degree)
            .map(|nu| {
                if nu.nu1 < mu.nu1 || nu.nu2 < mu.nu2 {
                    0.0
                } else {
                    falling(nu.nu1, mu.nu1)
                        * falling(nu.nu2, mu.nu2)
                        * px[nu.nu1 - mu.nu1]
                        * py[nu.nu2 - mu.nu2]
                        * scale
                }
            })
            .collect()
    }
}

fn powers(x: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut p = 1.0;
    for _ in 0..=k {
        out.push(p);
        p *= x;
    }
    out
}

/// `n (n-1) ... (n-k+1)`
fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// A polynomial expanded in a [`ScaledMonomialBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoeffs {
    pub basis: ScaledMonomialBasis,
    pub coeffs: Vec<f64>,
}

impl PolyCoeffs {
    pub fn new(basis: ScaledMonomialBasis, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), basis.count(), "coefficient count must match basis");
        Self { basis, coeffs }
    }

    pub fn zero(basis: ScaledMonomialBasis) -> Self {
        Self { basis, coeffs: vec![0.0; basis.count()] }
    }

    /// The single basis function `m_nu` in a basis of degree `|nu|`.
    pub fn monomial(frame: ScaledMonomialBasis, nu: MultiIndex) -> Self {
        let basis = frame.with_degree(nu.order() as i64);
        let mut coeffs = vec![0.0; basis.count()];
        coeffs[nu.position()] = 1.0;
        Self { basis, coeffs }
    }

    pub fn constant(frame: ScaledMonomialBasis, c: f64) -> Self {
        Self { basis: frame.with_degree(0), coeffs: vec![c] }
    }

    pub fn degree(&self) -> i64 {
        self.basis.degree
    }

    pub fn coeff(&self, nu: MultiIndex) -> f64 {
        self.coeffs.get(nu.position()).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        self.basis
            .eval_all(x)
            .iter()
            .zip(&self.coeffs)
            .map(|(b, c)| b * c)
            .sum()
    }

    /// Re-expands in the same frame with a different degree, truncating or
    /// zero-padding the coefficient list.
    pub fn with_degree(&self, degree: i64) -> Self {
        let basis = self.basis.with_degree(degree);
        let n = basis.count();
        let mut coeffs = vec![0.0; n];
        for (i, c) in self.coeffs.iter().enumerate().take(n) {
            coeffs[i] = *c;
        }
        Self { basis, coeffs }
    }

    pub fn differentiate(&self, mu: MultiIndex) -> Self {
        if mu == MultiIndex::ZERO {
            return self.clone();
        }
        let degree = self.degree() - mu.order() as i64;
        let basis = self.basis.with_degree(degree.max(-1));
        let mut out = Self::zero(basis);
        if degree < 0 {
            return out;
        }
        let scale = self.basis.scale.powi(-(mu.order() as i32));
        for (i, c) in self.coeffs.iter().enumerate() {
            let nu = MultiIndex::from_position(i);
            if nu.nu1 < mu.nu1 || nu.nu2 < mu.nu2 || *c == 0.0 {
                continue;
            }
            let target = MultiIndex::new(nu.nu1 - mu.nu1, nu.nu2 - mu.nu2);
            out.coeffs[target.position()] +=
                c * falling(nu.nu1, mu.nu1) * falling(nu.nu2, mu.nu2) * scale;
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        let dxx = self.differentiate(MultiIndex::new(2, 0));
        let dyy = self.differentiate(MultiIndex::new(0, 2));
        dxx.add(&dyy).expect("same frame")
    }

    /// `Delta^m p`.
    pub fn laplacian_power(&self, m: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..m {
            out = out.laplacian();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, VemError> {
        if !self.basis.same_frame(&other.basis) {
            return Err(VemError::IncompatibleFrames);
        }
        let degree = self.degree().max(other.degree());
        let mut out = self.with_degree(degree);
        for (i, c) in other.coeffs.iter().enumerate() {
            out.coeffs[i] += c;
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, VemError> {
        if !self.basis.same_frame(&other.basis) {
            return Err(VemError::IncompatibleFrames);
        }
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(Self::zero(self.basis.with_degree(-1)));
        }
        let degree = self.degree() + other.degree();
        let mut out = Self::zero(self.basis.with_degree(degree));
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            let ni = MultiIndex::from_position(i);
            for (j, b) in other.coeffs.iter().enumerate() {
                let nj = MultiIndex::from_position(j);
                out.coeffs[(ni + nj).position()] += a * b;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut out = Self::constant(self.basis, 1.0);
        for _ in 0..n {
            out = out.multiply(self).expect("same frame");
        }
        out
    }
}

/// Coefficients of the Legendre polynomials `P_0..=P_n` in powers of `s`.
pub fn legendre_table(n: usize) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    table.push(vec![1.0]);
    if n >= 1 {
        table.push(vec![0.0, 1.0]);
    }
    for k in 1..n {
        // (k+1) P_{k+1} = (2k+1) s P_k - k P_{k-1}
        let mut next = vec![0.0; k + 2];
        for (i, c) in table[k].iter().enumerate() {
            next[i + 1] += (2 * k + 1) as f64 * c;
        }
        for (i, c) in table[k - 1].iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        for c in next.iter_mut() {
            *c /= (k + 1) as f64;
        }
        table.push(next);
    }
    table
}

/// `d^a/ds^a P_k(s)` for `k = 0..=n`.
pub fn legendre_derivatives(n: usize, a: usize, s: f64) -> Vec<f64> {
    legendre_table(n)
        .iter()
        .map(|coeffs| {
            let mut value = 0.0;
            let mut sp = 1.0;
            for (i, c) in coeffs.iter().enumerate().skip(a) {
                value += c * falling(i, a) * sp;
                sp *= s;
            }
            value
        })
        .collect()
}

/// A polynomial along an edge, expanded in Legendre polynomials of the
/// parameter `s in [-1, 1]` where arclength from the midpoint is
/// `s * length / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgePoly {
    pub edge: usize,
    pub length: f64,
    pub coeffs: Vec<f64>,
}

impl EdgePoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.derivative(0, s)
    }

    /// `a`-th derivative with respect to arclength at parameter `s`.
    pub fn derivative(&self, a: usize, s: f64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        let values = legendre_derivatives(self.degree(), a, s);
        let scale = (2.0 / self.length).powi(a as i32);
        values.iter().zip(&self.coeffs).map(|(v, c)| v * c).sum::<f64>() * scale
    }
}
