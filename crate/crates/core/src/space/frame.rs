//! Changes between Cartesian derivatives and derivatives along an edge frame
//! `(t, n)`.

use crate::polycalc::{binomial, MultiIndex};

/// Product of two directional operators as a polynomial in `(d_x, d_y)`,
/// returned as coefficients indexed by the power of `d_y`.
fn directional_power(dir: [f64; 2], k: usize) -> Vec<f64> {
    (0..=k)
        .map(|b| binomial(k, b) * dir[0].powi((k - b) as i32) * dir[1].powi(b as i32))
        .collect()
}

/// Coefficients `c_nu` with `d_t^ell d_n^j = sum_nu c_nu D^nu`, `|nu| = ell + j`.
pub fn directional_expansion(ell: usize, j: usize, t: [f64; 2], n: [f64; 2]) -> Vec<(MultiIndex, f64)> {
    let ct = directional_power(t, ell);
    let cn = directional_power(n, j);
    let order = ell + j;
    let mut out = vec![0.0; order + 1];
    for (a, x) in ct.iter().enumerate() {
        for (b, y) in cn.iter().enumerate() {
            out[a + b] += x * y;
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(b, c)| (MultiIndex::new(order - b, b), c))
        .collect()
}

/// Expresses `D^mu` in the orthonormal frame: `D^mu = sum c_{ab} d_t^a d_n^b`
/// over `a + b = |mu|`, returned as `(a, b, c_ab)`.
pub fn cartesian_in_frame(mu: MultiIndex, t: [f64; 2], n: [f64; 2]) -> Vec<(usize, usize, f64)> {
    // d_x = t_x d_t + n_x d_n,  d_y = t_y d_t + n_y d_n
    let px = directional_power([t[0], n[0]], mu.nu1);
    let py = directional_power([t[1], n[1]], mu.nu2);
    let order = mu.order();
    let mut out = vec![0.0; order + 1];
    for (b1, x) in px.iter().enumerate() {
        for (b2, y) in py.iter().enumerate() {
            out[b1 + b2] += x * y;
        }
    }
    out.into_iter()
        .enumerate()
        .filter(|(_, c)| *c != 0.0)
        .map(|(b, c)| (order - b, b, c))
        .collect()
}

/// Given Cartesian derivatives `D^nu v` for `|nu| <= max_order` (graded
/// lexicographic order), returns `out[j][ell] = d_t^ell d_n^j v` for
/// `j + ell <= max_order`.
pub fn vertex_frame_change(derivatives: &[f64], max_order: usize, n: [f64; 2], t: [f64; 2]) -> Vec<Vec<f64>> {
    (0..=max_order)
        .map(|j| {
            (0..=max_order - j)
                .map(|ell| {
                    directional_expansion(ell, j, t, n)
                        .iter()
                        .map(|(nu, c)| c * derivatives[nu.position()])
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// `Delta^mu v` restricted to a straight edge:
/// `sum_nu C(mu, nu) d_t^{2(mu-nu)} d_n^{2 nu} v`, as
/// `(coefficient, tangential order, normal order)`.
pub fn edge_laplacian_expansion(mu: usize) -> Vec<(f64, usize, usize)> {
    (0..=mu).map(|nu| (binomial(mu, nu), 2 * (mu - nu), 2 * nu)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycalc::{PolyCoeffs, ScaledMonomialBasis};
    use approx::assert_relative_eq;

    #[test]
    fn axis_aligned_mixed() {
        let e = directional_expansion(1, 1, [1.0, 0.0], [0.0, 1.0]);
        for (nu, c) in e {
            let expect = if nu == MultiIndex::new(1, 1) { 1.0 } else { 0.0 };
            assert_eq!(c, expect);
        }
    }

    #[test]
    fn second_tangential_matches_printed_expansion() {
        let t = [0.6, 0.8];
        let e = directional_expansion(2, 0, t, [0.8, -0.6]);
        assert_relative_eq!(e[0].1, t[0] * t[0]);
        assert_relative_eq!(e[1].1, 2.0 * t[0] * t[1]);
        assert_relative_eq!(e[2].1, t[1] * t[1]);
    }

    /// v = x^2 y at (1,1), n = (1,0), t = (0,1).
    #[test]
    fn frame_change_on_cubic() {
        let g = ScaledMonomialBasis::global(3);
        let mut c = vec![0.0; 10];
        c[MultiIndex::new(2, 1).position()] = 1.0;
        let v = PolyCoeffs::new(g, c);
        let derivs: Vec<f64> =
            MultiIndex::up_to(2).map(|nu| v.differentiate(nu).eval([1.0, 1.0])).collect();
        let out = vertex_frame_change(&derivs, 2, [1.0, 0.0], [0.0, 1.0]);
        assert_eq!(out[1][0], 2.0); // d_n v = 2xy
        assert_eq!(out[0][1], 1.0); // d_t v = x^2
        assert_eq!(out[1][1], 2.0); // d_t d_n v = 2x
    }

    /// Random rotation: frame derivatives against differentiation of the
    /// polynomial rewritten in rotated coordinates.
    #[test]
    fn rotated_frame_matches_rotated_polynomial() {
        let theta: f64 = 0.7312;
        let t = [theta.cos(), theta.sin()];
        let n = [t[1], -t[0]];
        let coeffs: Vec<f64> = (0..10).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let v = PolyCoeffs::new(ScaledMonomialBasis::global(3), coeffs);
        let x0 = [0.3, -0.4];
        let derivs: Vec<f64> = MultiIndex::up_to(3).map(|nu| v.differentiate(nu).eval(x0)).collect();
        let out = vertex_frame_change(&derivs, 3, n, t);
        // w(a, b) = v(x0 + a t + b n); d_t^l d_n^j v(x0) = d_a^l d_b^j w(0,0)
        // w is a cubic in (a,b); recover its coefficients by sampling.
        let w = |a: f64, b: f64| v.eval([x0[0] + a * t[0] + b * n[0], x0[1] + a * t[1] + b * n[1]]);
        let pts: Vec<[f64; 2]> = (0..16).map(|i| [0.3 * (i % 4) as f64 - 0.45, 0.25 * (i / 4) as f64 - 0.4]).collect();
        let a = nalgebra::DMatrix::from_fn(16, 10, |r, c| {
            let nu = MultiIndex::from_position(c);
            pts[r][0].powi(nu.nu1 as i32) * pts[r][1].powi(nu.nu2 as i32)
        });
        let rhs = nalgebra::DVector::from_fn(16, |r, _| w(pts[r][0], pts[r][1]));
        let wc = a.svd(true, true).solve(&rhs, 1e-14).unwrap();
        for (j, row) in out.iter().enumerate().take(4) {
            for (ell, value) in row.iter().enumerate().take(4 - j) {
                let nu = MultiIndex::new(ell, j);
                let oracle = wc[nu.position()] * nu.factorial();
                assert_relative_eq!(*value, oracle, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn cartesian_round_trip() {
        let theta: f64 = 2.1;
        let t = [theta.cos(), theta.sin()];
        let n = [t[1], -t[0]];
        // D^mu expressed in the frame, then each d_t^a d_n^b back in Cartesian
        for mu in MultiIndex::up_to(3) {
            let mut back = vec![0.0; MultiIndex::up_to(3).count()];
            for (a, b, c) in cartesian_in_frame(mu, t, n) {
                for (nu, d) in directional_expansion(a, b, t, n) {
                    back[nu.position()] += c * d;
                }
            }
            for (i, x) in back.iter().enumerate() {
                let expect = if i == mu.position() { 1.0 } else { 0.0 };
                assert_relative_eq!(*x, expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn laplacian_rows() {
        assert_eq!(edge_laplacian_expansion(0), vec![(1.0, 0, 0)]);
        assert_eq!(edge_laplacian_expansion(1), vec![(1.0, 2, 0), (1.0, 0, 2)]);
        let c: Vec<f64> = edge_laplacian_expansion(2).iter().map(|x| x.0).collect();
        assert_eq!(c, vec![1.0, 2.0, 1.0]);
    }
}
