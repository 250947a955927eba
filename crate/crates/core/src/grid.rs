//! Uniform radial grids, sampled complex fields, quadrature and rescaling.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::profile::AnalyticProfile;
use crate::transform::SineTransform;

struct GridData {
    r_max: f64,
    n: usize,
    dr: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    wavenumbers: Vec<f64>,
    transform: SineTransform,
}

/// Interior nodes `r_j = j dr`, `j = 1..=n`, `dr = r_max / (n + 1)`, with
/// weights `4 pi r_j^2 dr`. Cheap to clone; clones share storage.
#[derive(Clone)]
pub struct RadialGrid(Arc<GridData>);

impl fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid").field("r_max", &self.0.r_max).field("n", &self.0.n).finish()
    }
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.r_max == other.0.r_max && self.0.n == other.0.n)
    }
}

pub fn make_grid(r_max: f64, n: usize) -> Result<RadialGrid> {
    RadialGrid::new(r_max, n)
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Config(format!("r_max must be positive and finite, got {r_max}")));
        }
        if n < 16 {
            return Err(Error::Config(format!("need at least 16 interior nodes, got {n}")));
        }
        if !(n + 1).is_power_of_two() {
            return Err(Error::Config(format!("n + 1 must be a power of two, got n = {n}")));
        }
        let big_n = (n + 1) as f64;
        let dr = r_max / big_n;
        let nodes: Vec<f64> = (1..=n).map(|j| j as f64 * dr).collect();
        let weights = nodes.iter().map(|r| 4.0 * PI * r * r * dr).collect();
        let wavenumbers = (1..=n).map(|k| k as f64 * PI / r_max).collect();
        Ok(Self(Arc::new(GridData { r_max, n, dr, nodes, weights, wavenumbers, transform: SineTransform::new(n) })))
    }

    pub fn r_max(&self) -> f64 {
        self.0.r_max
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn dr(&self) -> f64 {
        self.0.dr
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.0.weights
    }

    /// `k pi / r_max` for `k = 1..=n`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.0.wavenumbers
    }

    pub fn transform(&self) -> &SineTransform {
        &self.0.transform
    }

    /// Index of the first node with `r_j >= r`, or `n` if none.
    pub fn first_node_at_or_beyond(&self, r: f64) -> usize {
        self.0.nodes.partition_point(|&x| x < r)
    }
}

/// `∫_{R^3} f dx` for a radial density sampled on the interior nodes.
///
/// Trapezoidal rule on `[0, r_max]`: the origin carries zero weight and the
/// outer endpoint value is extrapolated quadratically from the last nodes.
pub fn integrate(density: &[f64], grid: &RadialGrid) -> Result<f64> {
    let n = grid.n();
    if density.len() != n {
        return Err(Error::Shape { expected: n, actual: density.len() });
    }
    let interior: f64 = density.iter().zip(grid.weights()).map(|(d, w)| d * w).sum();
    let end = 3.0 * density[n - 1] - 3.0 * density[n - 2] + density[n - 3];
    let r = grid.r_max();
    Ok(interior + 0.5 * grid.dr() * 4.0 * PI * r * r * end)
}

/// Sampled radial field; `u(0)` finite and `u(r_max) = 0` implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Shape { expected: grid.n(), actual: values.len() });
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Sampling { r: grid.nodes()[j] });
        }
        Ok(Self { grid, values })
    }

    /// Wraps values without the finiteness scan; used inside the time loop
    /// where blow-up is detected separately.
    pub(crate) fn from_raw(grid: RadialGrid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.n()] }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sine coefficients of `v = r u`.
    pub fn sine_coefficients(&self) -> Vec<Complex64> {
        let v: Vec<Complex64> = self.values.iter().zip(self.grid.nodes()).map(|(u, r)| u * r).collect();
        self.grid.transform().analyze(&v)
    }

    pub fn from_sine_coefficients(grid: &RadialGrid, b: &[Complex64]) -> Self {
        let v = grid.transform().synthesize(b);
        let values = v.iter().zip(grid.nodes()).map(|(v, r)| v / r).collect();
        Self { grid: grid.clone(), values }
    }

    /// `∂_r (r u)` at `r_j` for `j = 0..=n+1` (origin and wall included).
    pub fn rv_derivative(&self) -> Vec<Complex64> {
        let b = self.sine_coefficients();
        let c: Vec<Complex64> = b.iter().zip(self.grid.wavenumbers()).map(|(b, k)| b * k).collect();
        self.grid.transform().cosine_synthesize(&c)
    }

    /// Pointwise `∂_r u` at the interior nodes, from the sine series.
    pub fn radial_derivative(&self) -> Vec<Complex64> {
        let dv = self.rv_derivative();
        self.values.iter().zip(self.grid.nodes()).enumerate().map(|(j, (u, r))| (dv[j + 1] - u) / r).collect()
    }

    /// `Σ_{r_j > 0.9 r_max} w_j |u_j|^2 / ‖u‖^2`, zero for the zero field.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let cut = 0.9 * self.grid.r_max();
        let mut total = 0.0;
        let mut outer = 0.0;
        for ((u, w), r) in self.values.iter().zip(self.grid.weights()).zip(self.grid.nodes()) {
            let m = w * u.norm_sqr();
            total += m;
            if *r > cut {
                outer += m;
            }
        }
        if total > 0.0 {
            outer / total
        } else {
            0.0
        }
    }
}

/// Samples `profile(r_j)` at every node.
pub fn sample(profile: &AnalyticProfile, grid: &RadialGrid) -> Result<RadialField> {
    let values: Vec<Complex64> = grid.nodes().iter().map(|&r| profile.value(r)).collect();
    RadialField::new(grid.clone(), values)
}

/// `e^{a λ} u(e^{2 λ} r)` resampled onto `target`.
///
/// Interpolates `r u` with six-point Lagrange stencils, using the odd
/// reflections about `0` and `r_max` implied by the sine basis. Points that
/// map outside the source grid read zero, which is accepted only when the
/// source is negligible near its wall.
pub fn scale_field(
    field: &RadialField,
    lambda: f64,
    amplitude_exponent: f64,
    target: &RadialGrid,
) -> Result<RadialField> {
    if !lambda.is_finite() {
        return Err(Error::Range(format!("scaling parameter must be finite, got {lambda}")));
    }
    let src = field.grid();
    let stretch = (2.0 * lambda).exp();
    let amp = (amplitude_exponent * lambda).exp();
    if lambda == 0.0 && src == target {
        return Ok(field.clone());
    }
    let reach = target.nodes()[target.n() - 1] * stretch;
    if reach > src.r_max() {
        let edge = src.first_node_at_or_beyond(0.9 * src.r_max());
        let peak = field.max_modulus();
        let tail = field.values()[edge..].iter().map(|v| v.norm()).fold(0.0, f64::max);
        if tail > 1e-12 * peak {
            return Err(Error::Range(format!(
                "rescaled grid reaches r = {reach} beyond r_max = {} and the field is not negligible there",
                src.r_max()
            )));
        }
    }
    if stretch < 1.0 {
        // content of the source beyond stretch * r_max is pushed past the wall
        let edge = src.first_node_at_or_beyond(0.95 * stretch * src.r_max());
        let peak = field.max_modulus();
        let lost = field.values()[edge..].iter().map(|v| v.norm()).fold(0.0, f64::max);
        if lost > 1e-12 * peak {
            return Err(Error::Range(format!(
                "rescaling by {stretch} pushes a non-negligible part of the field past r_max = {}",
                target.r_max()
            )));
        }
    }
    let n = src.n() as isize;
    let big_n = n + 1;
    let dr = src.dr();
    let v: Vec<Complex64> = field.values().iter().zip(src.nodes()).map(|(u, r)| u * r).collect();
    // v at integer index j, extended oddly about 0 and N.
    let vat = |j: isize| -> Complex64 {
        let period = 2 * big_n;
        let m = j.rem_euclid(period);
        if m == 0 || m == big_n {
            Complex64::new(0.0, 0.0)
        } else if m < big_n {
            v[(m - 1) as usize]
        } else {
            -v[(period - m - 1) as usize]
        }
    };
    let mut out = Vec::with_capacity(target.n());
    for &r in target.nodes() {
        let x = r * stretch;
        if x >= src.r_max() {
            out.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let pos = x / dr;
        let base = pos.floor() as isize;
        let t = pos - base as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        if t == 0.0 {
            acc = vat(base);
        } else {
            for i in -2..=3isize {
                let mut l = 1.0;
                for k in -2..=3isize {
                    if k != i {
                        l *= (t - k as f64) / (i - k) as f64;
                    }
                }
                acc += vat(base + i) * l;
            }
        }
        out.push(amp * acc / x);
    }
    RadialField::new(target.clone(), out)
}

/// Writes the `r,re,im` snapshot with 17 significant digits.
pub fn write_snapshot(field: &RadialField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["r", "re", "im"]).map_err(|e| csv_err(path, e))?;
    for (r, u) in field.grid().nodes().iter().zip(field.values()) {
        w.write_record([format!("{r:.16e}"), format!("{:.16e}", u.re), format!("{:.16e}", u.im)])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a snapshot and reconstructs its grid from the node spacing.
pub fn read_snapshot(path: impl AsRef<Path>) -> Result<RadialField> {
    let path = path.as_ref();
    let mut rd = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rd.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["r", "re", "im"] {
        return Err(Error::Parse(format!("{}: expected header r,re,im", path.display())));
    }
    let mut rs = Vec::new();
    let mut vals = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("{}: bad number in row {:?}", path.display(), rec)))
        };
        rs.push(num(0)?);
        vals.push(Complex64::new(num(1)?, num(2)?));
    }
    let n = rs.len();
    if n < 16 {
        return Err(Error::Parse(format!("{}: only {n} rows", path.display())));
    }
    let r_max = rs[n - 1] * (n + 1) as f64 / n as f64;
    let grid = RadialGrid::new(r_max, n)?;
    for (a, b) in rs.iter().zip(grid.nodes()) {
        if (a - b).abs() > 1e-9 * r_max {
            return Err(Error::Parse(format!("{}: nodes are not uniformly spaced", path.display())));
        }
    }
    RadialField::new(grid, vals)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_and_validation() {
        let g = make_grid(100.0, 4095).unwrap();
        assert_eq!(g.dr(), 100.0 / 4096.0);
        assert!(make_grid(-1.0, 4095).is_err());
        assert!(make_grid(1.0, 15).is_err());
        assert!(make_grid(1.0, 100).is_err());
    }

    #[test]
    fn volume_of_ball() {
        let g = make_grid(10.0, 8191).unwrap();
        let ones = vec![1.0; g.n()];
        let v = integrate(&ones, &g).unwrap();
        let exact = 4.0 / 3.0 * PI * 1000.0;
        let order = 2.0 / (g.n() as f64 + 1.0).powi(2);
        assert!(((v - exact) / exact).abs() <= order, "{v} vs {exact}");
        assert!(integrate(&ones[1..], &g).is_err());
    }

    #[test]
    fn rescaling_matches_analytic_samples() {
        let g = make_grid(20.0, 1023).unwrap();
        let p = AnalyticProfile::gaussian(1.0, 1.0);
        let f = sample(&p, &g).unwrap();
        let lambda = -0.1;
        let scaled = scale_field(&f, lambda, 3.0, &g).unwrap();
        let exact = sample(&p.rescaled(lambda, 3.0), &g).unwrap();
        for (a, b) in scaled.values().iter().zip(exact.values()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn rescaling_out_of_range_is_refused() {
        let g = make_grid(4.0, 255).unwrap();
        let f = sample(&AnalyticProfile::gaussian(1.0, 2.0), &g).unwrap();
        assert!(matches!(scale_field(&f, 0.5, 3.0, &g), Err(Error::Range(_))));
    }

    #[test]
    fn snapshot_round_trip() {
        let g = make_grid(5.0, 63).unwrap();
        let vals = g.nodes().iter().map(|r| Complex64::new(r.cos() / 3.0, (-r).exp())).collect();
        let f = RadialField::new(g, vals).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        write_snapshot(&f, &path).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid().n(), 63);
    }
}
