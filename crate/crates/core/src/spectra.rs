//! Tree-contour generating functions `ρ`, analytic homotopy-class intensities,
//! the contractible intensity and the Ihara zeta cross-check.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::freegroup::{enumerate_geodesic_classes, GeodesicClass};
use crate::graph::{GraphModel, SpanningTreeFrame};

pub const RHO_TOLERANCE: f64 = 1e-12;
pub const RHO_MAX_ITERATIONS: usize = 100_000;
const RHO_BOUND: f64 = 1e12;

/// Solution of the tree-contour fixed point at one value of `s`.
#[derive(Debug, Clone)]
pub struct RhoTable {
    pub s: f64,
    /// `ρ^{x,y}(s)` for adjacent `x, y`; zero elsewhere.
    pub edge: DMatrix<f64>,
    /// `ρ^x(s)`.
    pub vertex: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl RhoTable {
    pub fn rho(&self, x: usize, y: usize) -> f64 {
        self.edge[(x, y)]
    }
}

/// Solves `ρ^{x,y} = 1 / (1 - s Σ_{z ≠ x} P^y_z P^z_y ρ^{y,z})` by monotone
/// iteration from `ρ ≡ 1`, then `ρ^x = 1 / (1 - s Σ_y P^x_y P^y_x ρ^{x,y})`.
pub fn solve_rho(g: &GraphModel, s: f64) -> Result<RhoTable> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("s must lie in [0,1], got {s}")));
    }
    let n = g.vertex_count();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| g.neighbors(x).iter().map(move |&y| (x, y)))
        .collect();
    let mut rho = DMatrix::from_fn(n, n, |x, y| if g.is_edge(x, y) { 1.0 } else { 0.0 });
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    // Past the tolerance, keep polishing while the residual still shrinks.
    let mut polish = 0;
    loop {
        if residual <= RHO_TOLERANCE {
            polish += 1;
            if polish > 64 || residual == 0.0 {
                break;
            }
        }
        if iterations == RHO_MAX_ITERATIONS {
            return Err(Error::NoConvergence(iterations));
        }
        iterations += 1;
        let previous = residual;
        let mut next = rho.clone();
        residual = 0.0;
        for &(x, y) in &pairs {
            let r: f64 = g
                .neighbors(y)
                .iter()
                .filter(|&&z| z != x)
                .map(|&z| g.p(y, z) * g.p(z, y) * rho[(y, z)])
                .sum::<f64>()
                * s;
            if r >= 1.0 {
                return Err(Error::Divergence(x, y));
            }
            let v = 1.0 / (1.0 - r);
            if v > RHO_BOUND {
                return Err(Error::Divergence(x, y));
            }
            residual = f64::max(residual, (v - rho[(x, y)]).abs());
            next[(x, y)] = v;
        }
        if previous <= RHO_TOLERANCE && residual >= previous {
            break;
        }
        rho = next;
    }
    let vertex = (0..n)
        .map(|x| {
            let r: f64 = g
                .neighbors(x)
                .iter()
                .map(|&y| g.p(x, y) * g.p(y, x) * rho[(x, y)])
                .sum::<f64>()
                * s;
            if r >= 1.0 {
                Err(Error::Divergence(x, x))
            } else {
                Ok(1.0 / (1.0 - r))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RhoTable {
        s,
        edge: rho,
        vertex,
        iterations,
        residual,
    })
}

/// `μ_γ = (1/mult) ∏ P^a_b ρ^{a,b}` over the steps of the geodesic loop of `γ`.
pub fn class_intensity(
    class: &GeodesicClass,
    g: &GraphModel,
    frame: &SpanningTreeFrame,
    rho: &RhoTable,
) -> Result<f64> {
    if (rho.s - 1.0).abs() > 0.0 {
        return Err(Error::Precondition("class intensities need ρ solved at s = 1".into()));
    }
    let l = class.geodesic_loop(frame);
    let prod: f64 = l.steps().map(|(a, b)| g.p(a, b) * rho.rho(a, b)).product();
    Ok(prod / class.multiplicity() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularForms {
    pub rho_edge: f64,
    pub rho_vertex: f64,
    /// `P ρ^{x,y}`, the intensity factor per unit of geodesic length.
    pub factor: f64,
    /// `√(1 - 4(d-1)/(d+κ)²)`.
    pub b: f64,
}

/// Closed forms on a `d`-regular graph with unit conductances and uniform `κ`.
pub fn regular_closed_forms(d: usize, kappa: f64, s: f64) -> Result<RegularForms> {
    if d < 2 || (d == 2 && kappa <= 0.0) {
        return Err(Error::Domain(format!("need d >= 3, or d = 2 with κ > 0 (d={d}, κ={kappa})")));
    }
    if !(kappa >= 0.0) || !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("κ={kappa}, s={s} out of range")));
    }
    let df = d as f64;
    let dk2 = (df + kappa) * (df + kappa);
    let a = 4.0 * (df - 1.0) / dk2;
    if a * s > 1.0 || a > 1.0 {
        return Err(Error::Domain("negative square-root argument".into()));
    }
    let t = (1.0 - a * s).sqrt();
    // (d+κ)²/(2s(d-1)) (1 - t), rewritten to stay finite at s = 0.
    let rho_edge = 2.0 / (1.0 + t);
    let rho_vertex = 2.0 * (df - 1.0) / (df - 2.0 + df * t);
    Ok(RegularForms {
        rho_edge,
        rho_vertex,
        factor: rho_edge / (df + kappa),
        b: (1.0 - a).sqrt(),
    })
}

/// Killing rate at which the per-edge factor of a `d`-regular graph equals `u`.
pub fn ihara_kappa(d: usize, u: f64) -> f64 {
    1.0 / u + u * (d as f64 - 1.0) - d as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

pub const QUAD_DELTA: f64 = 1e-6;
const QUAD_TOL: f64 = 1e-11;
const QUAD_MAX_DEPTH: usize = 40;

/// `Σ_x ∫_0^1 (ρ^x(s) - 1)/(2s) ds`.
///
/// Adaptive Gauss–Kronrod (7, 15) on `[δ, 1]`; the integrand tends to
/// `½ Σ_y P^x_y P^y_x` as `s → 0`, so `[0, δ]` is a trapezoid between that
/// limit and the value at `δ`.
pub fn contractible_intensity(g: &GraphModel) -> Result<Quadrature> {
    let f = |s: f64| -> Result<f64> {
        let t = solve_rho(g, s)?;
        Ok(t.vertex.iter().map(|r| (r - 1.0) / (2.0 * s)).sum())
    };
    let f0: f64 = (0..g.vertex_count())
        .map(|x| {
            g.neighbors(x)
                .iter()
                .map(|&y| 0.5 * g.p(x, y) * g.p(y, x))
                .sum::<f64>()
        })
        .sum();
    let head = 0.5 * QUAD_DELTA * (f0 + f(QUAD_DELTA)?);
    let body = adaptive_gk(&f, QUAD_DELTA, 1.0, QUAD_TOL)?;
    Ok(Quadrature {
        value: head + body.value,
        error: body.error,
    })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

fn adaptive_gk<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    fn go<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> Result<(f64, f64)> {
        let (v, e) = gk15(f, a, b)?;
        if e <= tol || depth == 0 {
            return Ok((v, e));
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = go(f, a, m, 0.5 * tol, depth - 1)?;
        let (v2, e2) = go(f, m, b, 0.5 * tol, depth - 1)?;
        Ok((v1 + v2, e1 + e2))
    }
    let (value, error) = go(f, a, b, tol, QUAD_MAX_DEPTH)?;
    if !(error <= 1e3 * tol) {
        return Err(Error::Quadrature(error));
    }
    Ok(Quadrature { value, error })
}

/// One coefficient of both sides of the Ihara identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaRow {
    pub degree: usize,
    pub lhs: BigRational,
    pub rhs: BigRational,
}

impl ZetaRow {
    pub fn diff(&self) -> BigRational {
        &self.lhs - &self.rhs
    }
}

/// Coefficients of `Σ_γ u^{|γ|}/mult(γ)` and of
/// `-χ log(1-u²) - log det(I - uA + (d-1)u² I)`, `χ = |E| - |X|`, through degree `max_degree`.
pub fn ihara_check(g: &GraphModel, frame: &SpanningTreeFrame, max_degree: usize) -> Result<Vec<ZetaRow>> {
    let d = g.regular_degree().ok_or(Error::NotRegular)?;
    if g.edges().iter().any(|e| e.conductance != 1.0) {
        return Err(Error::NotRegular);
    }
    let lhs = geodesic_series(frame, max_degree);
    let chi = g.edge_count() as i64 - g.vertex_count() as i64;
    let rhs = ihara_series(g, d, chi, max_degree);
    Ok((1..=max_degree)
        .map(|k| ZetaRow {
            degree: k,
            lhs: lhs[k].clone(),
            rhs: rhs[k].clone(),
        })
        .collect())
}

/// `c[k] = Σ_{|γ| = k} 1/mult(γ)` over free homotopy classes of graph length `k`.
pub fn geodesic_series(frame: &SpanningTreeFrame, max_degree: usize) -> Vec<BigRational> {
    let mut c = vec![BigRational::zero(); max_degree + 1];
    for class in enumerate_geodesic_classes(frame.rank(), max_degree) {
        let len = class.geodesic_loop(frame).len();
        if len <= max_degree {
            c[len] += BigRational::new(BigInt::one(), BigInt::from(class.multiplicity()));
        }
    }
    c
}

/// Series of `-χ log(1-u²) - log det(I - N(u))` with `N = uA - (d-1)u² I`.
fn ihara_series(g: &GraphModel, d: usize, chi: i64, max_degree: usize) -> Vec<BigRational> {
    let n = g.vertex_count();
    // N as a polynomial in u with integer matrix coefficients: N_1 = A, N_2 = -(d-1)I.
    let zero = vec![vec![0i64; n]; n];
    let mut n1 = zero.clone();
    let mut n2 = zero.clone();
    for x in 0..n {
        for &y in g.neighbors(x) {
            n1[x][y] = 1;
        }
        n2[x][x] = -(d as i64 - 1);
    }
    let mut out = vec![BigRational::zero(); max_degree + 1];
    // -log det(I - N) = Σ_k tr(N^k)/k.
    let mut power: Vec<Vec<Vec<BigInt>>> = vec![vec![vec![BigInt::zero(); n]; n]; max_degree + 1];
    for x in 0..n {
        power[0][x][x] = BigInt::one();
    }
    for k in 1..=max_degree {
        let mut next = vec![vec![vec![BigInt::zero(); n]; n]; max_degree + 1];
        for deg in 0..=max_degree {
            for (shift, m) in [(1usize, &n1), (2usize, &n2)] {
                if deg + shift > max_degree {
                    continue;
                }
                for i in 0..n {
                    for l in 0..n {
                        if power[deg][i][l].is_zero() {
                            continue;
                        }
                        for j in 0..n {
                            if m[l][j] != 0 {
                                let v = &power[deg][i][l] * BigInt::from(m[l][j]);
                                next[deg + shift][i][j] += v;
                            }
                        }
                    }
                }
            }
        }
        power = next;
        for (deg, coeff) in out.iter_mut().enumerate() {
            let tr: BigInt = (0..n).map(|i| power[deg][i][i].clone()).sum();
            if !tr.is_zero() {
                *coeff += BigRational::new(tr, BigInt::from(k));
            }
        }
    }
    // -χ log(1-u²) = χ Σ_j u^{2j}/j.
    for j in 1..=max_degree / 2 {
        out[2 * j] += BigRational::new(BigInt::from(chi), BigInt::from(j));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::{canonical_class, HomotopyClass, Word};

    fn class(w: &[i64]) -> GeodesicClass {
        match canonical_class(&Word::from_signed(w)) {
            HomotopyClass::Geodesic(c) => c,
            _ => panic!("trivial"),
        }
    }

    #[test]
    fn k4_rho_closed_form() {
        let g = GraphModel::complete(4, 1.0).unwrap();
        let t = solve_rho(&g, 1.0).unwrap();
        let expect = 4.0 * (1.0 - 0.5f64.sqrt());
        assert!((t.rho(0, 1) - expect).abs() < 1e-11);
        assert!((regular_closed_forms(3, 1.0, 1.0).unwrap().rho_edge - expect).abs() < 1e-15);
    }

    #[test]
    fn rho_at_zero_is_one() {
        let g = GraphModel::bowtie(0.3).unwrap();
        let t = solve_rho(&g, 0.0).unwrap();
        assert!(t.vertex.iter().all(|&v| v == 1.0));
        let f = regular_closed_forms(3, 0.0, 0.0).unwrap();
        assert_eq!((f.rho_edge, f.rho_vertex), (1.0, 1.0));
    }

    #[test]
    fn regular_vertex_rho() {
        let f = regular_closed_forms(3, 0.0, 1.0).unwrap();
        assert!((f.rho_vertex - 2.0).abs() < 1e-14);
        assert!(regular_closed_forms(2, 0.0, 1.0).is_err());
    }

    #[test]
    fn tree_rho_matches_path_counting() {
        // Path 0-1-2: ρ^{0,1} sums the weights of excursions 1→2→1 repeated,
        // ρ^{1,2} = 1 since vertex 2 has no other neighbor.
        let g = GraphModel::uniform(3, &[(0, 1), (1, 2)], 1.0).unwrap();
        let t = solve_rho(&g, 1.0).unwrap();
        assert!((t.rho(1, 2) - 1.0).abs() < 1e-15);
        let q = g.p(1, 2) * g.p(2, 1);
        assert!((t.rho(0, 1) - 1.0 / (1.0 - q)).abs() < 1e-13);
    }

    #[test]
    fn k4_massless_class_intensity() {
        let g = GraphModel::complete(4, 0.0).unwrap();
        let frame = SpanningTreeFrame::bfs(&g).unwrap();
        let rho = solve_rho(&g, 1.0).unwrap();
        for c in enumerate_geodesic_classes(3, 3) {
            let len = c.geodesic_loop(&frame).len();
            let v = class_intensity(&c, &g, &frame, &rho).unwrap();
            let expect = 0.5f64.powi(len as i32) / c.multiplicity() as f64;
            assert!((v - expect).abs() < 1e-12 * expect, "{c}");
        }
    }

    #[test]
    fn ihara_parametrization_gives_u_per_edge() {
        let u = 0.3;
        let k = ihara_kappa(3, u);
        let g = GraphModel::complete(4, k).unwrap();
        let frame = SpanningTreeFrame::bfs(&g).unwrap();
        let rho = solve_rho(&g, 1.0).unwrap();
        let c = class(&[1, 2]);
        let len = c.geodesic_loop(&frame).len() as i32;
        assert!((class_intensity(&c, &g, &frame, &rho).unwrap() - u.powi(len)).abs() < 1e-12);
    }

    #[test]
    fn k4_contractible_integral() {
        let g = GraphModel::complete(4, 0.0).unwrap();
        let q = contractible_intensity(&g).unwrap();
        let expect = 4.0 * (1.5 * 3f64.ln() - 2.0 * 2f64.ln());
        assert!((q.value - expect).abs() < 4e-6, "{} vs {expect}", q.value);
    }

    #[test]
    fn ihara_k4_low_degrees() {
        let g = GraphModel::complete(4, 1.0).unwrap();
        let frame = SpanningTreeFrame::bfs(&g).unwrap();
        let rows = ihara_check(&g, &frame, 5).unwrap();
        for r in &rows {
            assert_eq!(r.lhs, r.rhs, "degree {}", r.degree);
        }
        assert_eq!(rows[2].lhs, BigRational::from_integer(8.into()));
        assert!(rows[0].lhs.is_zero() && rows[1].lhs.is_zero());
    }

    #[test]
    fn ihara_with_negated_euler_term_fails_at_degree_two() {
        // (1-u²)^{-χ} with χ = |E|-|X| = 2 would add -2u² - 2u² instead of cancelling.
        let g = GraphModel::complete(4, 1.0).unwrap();
        let rhs = ihara_series(&g, 3, -2, 2);
        assert_ne!(rhs[2], BigRational::zero());
        assert_eq!(ihara_series(&g, 3, 2, 2)[2], BigRational::zero());
    }

    #[test]
    fn ihara_rejects_irregular() {
        let g = GraphModel::bowtie(1.0).unwrap();
        let frame = SpanningTreeFrame::bfs(&g).unwrap();
        assert_eq!(ihara_check(&g, &frame, 4).unwrap_err(), Error::NotRegular);
    }
}
