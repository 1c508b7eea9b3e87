use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{GraphModel, GreenData, SpanningTreeFrame};
use crate::linalg::{complex_log_det, identity_minus, symmetric_eigenvalues};
use crate::measure::total_mass;

pub const DEFAULT_GRID: usize = 64;
pub const IMAG_TOLERANCE: f64 = 1e-10;
const DET_FLOOR: f64 = 1e-14;

/// `P^{(θ)}_{x,y} = P_{x,y} e^{2πi Σ θ_i η^i_{x,y}}`; only cogenerator entries are twisted.
pub fn twisted_matrix(g: &GraphModel, frame: &SpanningTreeFrame, theta: &[f64]) -> DMatrix<Complex64> {
    assert_eq!(theta.len(), frame.rank(), "one angle per cogenerator");
    let n = g.vertex_count();
    DMatrix::from_fn(n, n, |x, y| {
        let p = g.p(x, y);
        match frame.crossing(x, y) {
            Some(l) if p != 0.0 => {
                let phase = 2.0 * PI * theta[l.generator() - 1] * l.sign() as f64;
                Complex64::from_polar(p, phase)
            }
            _ => Complex64::new(p, 0.0),
        }
    })
}

/// `-log det(I - M)` for a matrix whose determinant must be real and positive.
pub(crate) fn neg_log_det_real(m: &DMatrix<Complex64>) -> Result<f64> {
    let ld = complex_log_det(identity_minus(m));
    if ld.is_singular() || ld.log_abs < DET_FLOOR.ln() {
        return Err(Error::Numeric("I - P is singular on the torus".into()));
    }
    if (ld.phase - Complex64::new(1.0, 0.0)).norm() > IMAG_TOLERANCE {
        return Err(Error::Numeric(format!(
            "determinant is not real positive (phase {})",
            ld.phase
        )));
    }
    Ok(-ld.log_abs)
}

/// `F(θ) = -log det(I - P^{(θ)}) = Σ_l e^{2πi⟨Ň(l),θ⟩} μ(l)`.
pub fn twisted_mass(g: &GraphModel, frame: &SpanningTreeFrame, theta: &[f64]) -> Result<f64> {
    neg_log_det_real(&twisted_matrix(g, frame, theta))
}

fn check_grid(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::Config(format!("grid size must be a power of two, got {m}")));
    }
    Ok(())
}

/// `F` on the uniform grid `θ = k/M`, `k ∈ {0..M-1}^r`, with `k_1` varying slowest.
#[derive(Debug, Clone)]
pub struct TorusGrid {
    m: usize,
    rank: usize,
    values: Vec<f64>,
}

impl TorusGrid {
    pub fn new(g: &GraphModel, frame: &SpanningTreeFrame, m: usize) -> Result<Self> {
        check_grid(m)?;
        Self::with_resolution(g, frame, m)
    }

    /// As [`TorusGrid::new`] for any `M ≥ 1`, e.g. an odd prime to match a mod-`p` computation.
    pub fn with_resolution(g: &GraphModel, frame: &SpanningTreeFrame, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("grid size must be positive".into()));
        }
        total_mass(g)?;
        let rank = frame.rank();
        let count = m.checked_pow(rank as u32).ok_or_else(|| Error::Config("grid too large".into()))?;
        let values = (0..count)
            .map(|idx| twisted_mass(g, frame, &angles(idx, m, rank)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, rank, values })
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(1/M^r) Σ_k F(θ_k) e^{-2πi⟨h,k⟩/M}`: the μ-mass of loops with `Ň ≡ h (mod M)`.
    pub fn intensity(&self, h: &[i64]) -> Result<f64> {
        self.inverse_transform(h, |f| f)
    }

    /// Probability that the soup of intensity `α μ` has total current `≡ h (mod M)`.
    pub fn field_law(&self, alpha: f64, h: &[i64]) -> Result<f64> {
        if !(alpha >= 0.0) {
            return Err(Error::Config(format!("intensity must be nonnegative, got {alpha}")));
        }
        let f0 = self.values[0];
        self.inverse_transform(h, |f| (alpha * (f - f0)).exp())
    }

    fn inverse_transform(&self, h: &[i64], map: impl Fn(f64) -> f64) -> Result<f64> {
        if h.len() != self.rank {
            return Err(Error::Precondition(format!(
                "expected {} homology coordinates, got {}",
                self.rank,
                h.len()
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, &f) in self.values.iter().enumerate() {
            let k = digits(idx, self.m, self.rank);
            let dot: i64 = k.iter().zip(h).map(|(&a, &b)| a as i64 * b).sum();
            let phase = -2.0 * PI * (dot.rem_euclid(self.m as i64)) as f64 / self.m as f64;
            acc += Complex64::from_polar(map(f), phase);
        }
        acc /= self.values.len() as f64;
        if acc.im.abs() > IMAG_TOLERANCE {
            return Err(Error::Numeric(format!("imaginary residue {:e}", acc.im)));
        }
        Ok(acc.re)
    }

    /// Sum of the intensities over all `h` in the grid; equals `F(0)`.
    pub fn grid_sum(&self) -> Result<f64> {
        let mut total = 0.0;
        for idx in 0..self.values.len() {
            let h: Vec<i64> = digits(idx, self.m, self.rank).into_iter().map(|d| d as i64).collect();
            total += self.intensity(&h)?;
        }
        Ok(total)
    }
}

fn digits(mut idx: usize, m: usize, rank: usize) -> Vec<usize> {
    let mut k = vec![0; rank];
    for slot in k.iter_mut().rev() {
        *slot = idx % m;
        idx /= m;
    }
    k
}

fn angles(idx: usize, m: usize, rank: usize) -> Vec<f64> {
    digits(idx, m, rank)
        .into_iter()
        .map(|k| k as f64 / m as f64)
        .collect()
}

/// μ-mass of loops with `Ň_i = h_i` for all `i`, on an `M`-grid.
pub fn homology1_intensity(g: &GraphModel, frame: &SpanningTreeFrame, h: &[i64], m: usize) -> Result<f64> {
    TorusGrid::new(g, frame, m)?.intensity(h)
}

/// As [`homology1_intensity`], doubling `M` from 64 until the value moves by less than `tol`.
pub fn homology1_intensity_auto(
    g: &GraphModel,
    frame: &SpanningTreeFrame,
    h: &[i64],
    tol: f64,
    max_points: usize,
) -> Result<(f64, usize)> {
    let mut m = DEFAULT_GRID;
    let mut prev = homology1_intensity(g, frame, h, m)?;
    loop {
        let next_m = 2 * m;
        if next_m.pow(frame.rank() as u32) > max_points {
            return Err(Error::Numeric(format!("grid doubling stopped at M={m} before reaching {tol:e}")));
        }
        let v = homology1_intensity(g, frame, h, next_m)?;
        m = next_m;
        if (v - prev).abs() < tol {
            return Ok((v, m));
        }
        prev = v;
    }
}

/// `P(Ň(𝓛_α) = h)` on an `M`-grid.
pub fn homology1_field_law(
    g: &GraphModel,
    frame: &SpanningTreeFrame,
    alpha: f64,
    h: &[i64],
    m: usize,
) -> Result<f64> {
    TorusGrid::new(g, frame, m)?.field_law(alpha, h)
}

#[derive(Debug, Clone)]
pub struct JacobianReport {
    /// `√det J`.
    pub volume: f64,
    /// Volume of the `[0,1]^r` torus used by the grid routes.
    pub frame_volume: f64,
    pub eigenvalues: Vec<f64>,
}

impl JacobianReport {
    pub fn positive_definite(&self) -> bool {
        self.eigenvalues.iter().all(|&v| v > 0.0)
    }
}

/// Informational comparison of the Jacobian torus volume with the frame torus.
pub fn jacobian_volume_check(g: &GraphModel, frame: &SpanningTreeFrame) -> Result<JacobianReport> {
    let green = GreenData::new(g, frame)?;
    let eigenvalues = if frame.rank() == 0 {
        Vec::new()
    } else {
        symmetric_eigenvalues(&green.jacobian)
    };
    Ok(JacobianReport {
        volume: green.volume,
        frame_volume: 1.0,
        eigenvalues,
    })
}
