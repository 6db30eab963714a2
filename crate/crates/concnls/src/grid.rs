//! Radial and cylindrical quadrature, the radial Laplacian, norms and tail fits.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface area of the unit sphere in `ℝ^d`.
pub fn sphere_area(d: usize) -> f64 {
    let pi = std::f64::consts::PI;
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * pi,
        _ => 2.0 * pi * sphere_area(d - 2) / (d as f64 - 2.0),
    }
}

/// Uniform radial grid `r_i = i h`, `i = 0..=n`.
///
/// Weights are the trapezoid weights `|S^{d−1}| r_i^{d−1} h` except at the
/// origin, where the cell `[0, h/2]` is integrated exactly, and at `r_max`,
/// which gets half a cell. `kmid[i]` couples nodes `i` and `i+1` so that
/// `Σ kmid[i] (u_{i+1} − u_i)²` is the midpoint gradient norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub d: usize,
    pub n: usize,
    pub r_max: f64,
    pub h: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kmid: Vec<f64>,
}

/// JSON description of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub d: usize,
    pub r_max: f64,
    pub n: usize,
    pub scheme: String,
}

impl RadialGrid {
    pub fn new(d: usize, r_max: f64, n: usize) -> Result<Self> {
        if d == 0 || n < 3 || !(r_max > 0.0) {
            return Err(Error::InvalidParams(format!("bad grid d={d} r_max={r_max} n={n}")));
        }
        let h = r_max / n as f64;
        let area = sphere_area(d);
        let dm1 = d as i32 - 1;
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let mut weights: Vec<f64> = nodes.iter().map(|&r| area * r.powi(dm1) * h).collect();
        weights[0] = area * (0.5 * h).powi(d as i32) / d as f64;
        weights[n] *= 0.5;
        let kmid = (0..n).map(|i| area * ((i as f64 + 0.5) * h).powi(dm1) / h).collect();
        Ok(RadialGrid { d, n, r_max, h, nodes, weights, kmid })
    }

    /// Default radius for a solve at multiplier `mu`: `max(30, 15/√μ)` for
    /// `μ ≤ 1` and `30/√μ` above, so that `e^{−√μ r_max}` stays below 1e−9.
    pub fn default_r_max(mu: f64) -> f64 {
        if mu > 1.0 {
            30.0 / mu.sqrt()
        } else if mu > 0.0 {
            30f64.max(15.0 / mu.sqrt())
        } else {
            30.0
        }
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn info(&self) -> GridInfo {
        GridInfo { d: self.d, r_max: self.r_max, n: self.n, scheme: "uniform".into() }
    }

    /// Profile sampled from a closure.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> RadialProfile {
        RadialProfile { grid: self.clone(), values: self.nodes.iter().map(|&r| f(r)).collect() }
    }

    /// `Σ w_i v_i`.
    pub fn quad(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(w, x)| w * x).sum()
    }

    /// Midpoint gradient norm `Σ kmid_i (u_{i+1} − u_i)²`.
    pub fn grad_sq(&self, u: &[f64]) -> f64 {
        self.kmid.iter().enumerate().map(|(i, k)| k * (u[i + 1] - u[i]).powi(2)).sum()
    }

    /// Conservative radial Laplacian. At the origin this is `2d(u₁−u₀)/h²`,
    /// the symmetric stencil for `d·u″(0)`; at `r_max` a linear ghost value is used.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let h2 = self.h * self.h;
        let dm1 = self.d as i32 - 1;
        let mut out = vec![0.0; n + 1];
        out[0] = 2.0 * self.d as f64 * (u[1] - u[0]) / h2;
        for i in 1..=n {
            let r = self.nodes[i];
            let up = if i < n { u[i + 1] } else { 2.0 * u[n] - u[n - 1] };
            let mp = ((i as f64 + 0.5) * self.h).powi(dm1);
            let mm = ((i as f64 - 0.5) * self.h).powi(dm1);
            out[i] = (mp * (up - u[i]) - mm * (u[i] - u[i - 1])) / (h2 * r.powi(dm1));
        }
        out
    }
}

/// A radial function sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

/// Standard norms of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2_sq: f64,
    pub grad_l2_sq: f64,
}

/// Result of a tail fit `u ≈ A r^{−power} e^{−rate·r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub rate: f64,
    pub power: f64,
    pub amplitude: f64,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParams("profile length does not match grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite profile value".into()));
        }
        Ok(RadialProfile { grid, values })
    }

    /// `Σ w_i f(u_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid.weights.iter().zip(&self.values).map(|(w, &u)| w * f(u)).sum()
    }

    pub fn radial_laplacian(&self) -> RadialProfile {
        RadialProfile { grid: self.grid.clone(), values: self.grid.laplacian(&self.values) }
    }

    pub fn l2_sq(&self) -> f64 {
        self.integrate(|u| u * u)
    }

    pub fn grad_l2_sq(&self) -> f64 {
        self.grid.grad_sq(&self.values)
    }

    /// `∫|u|^p`.
    pub fn lp(&self, p: f64) -> f64 {
        self.integrate(|u| u.abs().powf(p))
    }

    pub fn norms(&self) -> Norms {
        Norms { l2_sq: self.l2_sq(), grad_l2_sq: self.grad_l2_sq() }
    }

    /// Four-point Lagrange interpolation; zero beyond `r_max`.
    pub fn interp(&self, r: f64) -> f64 {
        interp_uniform(&self.values, self.grid.h, r)
    }

    /// Least-squares fit of `log u = log A − rate·r − power·log r` on `[ra, rb]`.
    pub fn fit_exponential_tail(&self, ra: f64, rb: f64) -> Result<TailFit> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (&r, &u) in self.grid.nodes.iter().zip(&self.values) {
            if r >= ra && r <= rb {
                xs.push(r);
                ys.push(u);
            }
        }
        fit_exp_power(&xs, &ys)
    }

    /// Writes the two-column `r,u` table.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv_to(f)
    }

    pub fn write_csv_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["r", "u"])?;
        for (r, u) in self.grid.nodes.iter().zip(&self.values) {
            wr.write_record([format!("{r:.12e}"), format!("{u:.12e}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Interpolates uniformly spaced samples starting at 0 with a four-point stencil.
/// Uses even symmetry about the origin.
pub fn interp_uniform(v: &[f64], h: f64, r: f64) -> f64 {
    let n = v.len() - 1;
    let x = r.abs() / h;
    if x > n as f64 {
        return 0.0;
    }
    let i = (x.floor() as usize).min(n - 1);
    let t = x - i as f64;
    let at = |k: isize| -> f64 {
        let k = k.unsigned_abs();
        if k > n {
            2.0 * v[n] - v[2 * n - k]
        } else {
            v[k]
        }
    };
    let i = i as isize;
    let (ym, y0, y1, y2) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    ym * (-t * (t - 1.0) * (t - 2.0) / 6.0)
        + y0 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0)
        + y1 * (-(t + 1.0) * t * (t - 2.0) / 2.0)
        + y2 * ((t + 1.0) * t * (t - 1.0) / 6.0)
}

/// Fits `y ≈ A x^{−power} e^{−rate·x}` by linear least squares on `log y`.
pub fn fit_exp_power(xs: &[f64], ys: &[f64]) -> Result<TailFit> {
    if xs.len() < 3 || xs.len() != ys.len() {
        return Err(Error::InvalidParams("tail fit needs at least 3 samples".into()));
    }
    if let Some(y) = ys.iter().find(|&&y| !(y > 0.0)) {
        return Err(Error::Domain(format!("tail fit needs positive values, got {y}")));
    }
    if xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("tail fit needs positive abscissae".into()));
    }
    let m = xs.len();
    let a = DMatrix::from_fn(m, 3, |i, j| match j {
        0 => 1.0,
        1 => -xs[i],
        _ => -xs[i].ln(),
    });
    let b = DVector::from_iterator(m, ys.iter().map(|y| y.ln()));
    let sol = a.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::Domain(format!("tail fit failed: {e}")))?;
    Ok(TailFit { amplitude: sol[0].exp(), rate: sol[1], power: sol[2] })
}

/// Fits `log y ≈ c − slope·x` by least squares and returns `(slope, c)`.
pub fn fit_log_linear(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 || ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::Domain("log-linear fit needs ≥2 positive samples".into()));
    }
    let (sx, sy): (Vec<f64>, Vec<f64>) = (xs.to_vec(), ys.iter().map(|y| y.ln()).collect());
    let (slope, icpt) = least_squares_line(&sx, &sy);
    Ok((-slope, icpt))
}

/// Ordinary least-squares line `y = a x + b`, returns `(a, b)`.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

/// Tensor grid in cylindrical coordinates `(ζ, s)` about the `e₁` axis,
/// cell-centred in both directions. Weights are `2π s_k Δs_k Δζ_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylGrid {
    pub zeta: Vec<f64>,
    pub s: Vec<f64>,
    pub dz: Vec<f64>,
    pub ds: Vec<f64>,
}

impl CylGrid {
    /// `nz` cells on `[z_lo, z_hi]` and `ns` cells on `[0, s_max]`.
    pub fn new(z_lo: f64, z_hi: f64, nz: usize, s_max: f64, ns: usize) -> Result<Self> {
        if !(z_hi > z_lo) || !(s_max > 0.0) || nz == 0 || ns == 0 {
            return Err(Error::InvalidParams("bad cylindrical grid".into()));
        }
        let ze: Vec<f64> = (0..=nz).map(|j| z_lo + (z_hi - z_lo) * j as f64 / nz as f64).collect();
        let se: Vec<f64> = (0..=ns).map(|k| s_max * k as f64 / ns as f64).collect();
        Self::from_edges(&ze, &se)
    }

    /// Cells between consecutive edges; `s` edges must start at 0.
    pub fn from_edges(z_edges: &[f64], s_edges: &[f64]) -> Result<Self> {
        let increasing = |e: &[f64]| e.len() >= 2 && e.windows(2).all(|w| w[1] > w[0]);
        if !increasing(z_edges) || !increasing(s_edges) || s_edges[0] != 0.0 {
            return Err(Error::InvalidParams("cell edges must increase and s must start at 0".into()));
        }
        let mid = |e: &[f64]| e.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let width = |e: &[f64]| e.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(CylGrid { zeta: mid(z_edges), s: mid(s_edges), dz: width(z_edges), ds: width(s_edges) })
    }

    /// Edges on `[a, b]` with spacing at most `h`.
    pub fn edges(a: f64, b: f64, h: f64) -> Vec<f64> {
        let n = ((b - a) / h).ceil().max(1.0) as usize;
        (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect()
    }

    /// Concatenates edge runs, dropping repeated junction points.
    pub fn join(runs: &[Vec<f64>]) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for run in runs {
            for &x in run {
                if out.last().is_none_or(|&l| x > l + 1e-12 * l.abs().max(1.0)) {
                    out.push(x);
                }
            }
        }
        out
    }

    pub fn weight(&self, j: usize, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.s[k] * self.ds[k] * self.dz[j]
    }

    pub fn len(&self) -> usize {
        self.zeta.len() * self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `∫ f(ζ, s) dx` over the grid.
    pub fn integrate(&self, exec: crate::exec::Execution, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> f64 {
        crate::exec::sum_range(exec, self.zeta.len(), |j| {
            let z = self.zeta[j];
            self.s.iter().enumerate().map(|(k, &s)| self.weight(j, k) * f(z, s)).sum::<f64>()
        })
    }

    /// Several integrals at once: `f` adds its contributions into the slice.
    pub fn integrate_many<const K: usize>(
        &self,
        exec: crate::exec::Execution,
        f: impl Fn(f64, f64, &mut [f64; K]) + Sync + Send,
    ) -> [f64; K] {
        let rows = crate::exec::map_range(exec, self.zeta.len(), |j| {
            let z = self.zeta[j];
            let mut acc = [0.0; K];
            for (k, &s) in self.s.iter().enumerate() {
                let mut v = [0.0; K];
                f(z, s, &mut v);
                let w = self.weight(j, k);
                for i in 0..K {
                    acc[i] += w * v[i];
                }
            }
            acc
        });
        let mut out = [0.0; K];
        for row in rows {
            for i in 0..K {
                out[i] += row[i];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn ball_volume() {
        let g = RadialGrid::new(3, 10.0, 2000).unwrap();
        let vol = g.sample(|_| 1.0).integrate(|u| u);
        let exact = 4.0 / 3.0 * PI * 1000.0;
        assert!(((vol - exact) / exact).abs() < 1e-4);
    }

    #[test]
    fn gaussian_integral() {
        let g = RadialGrid::new(3, 12.0, 1200).unwrap();
        let v = g.sample(|r| (-r * r).exp()).integrate(|u| u);
        assert!(((v - PI.powf(1.5)) / PI.powf(1.5)).abs() < 1e-4);
        let zero = g.sample(|r| (-r * r).exp()).integrate(|_| 0.0);
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn laplacian_of_polynomials() {
        let g = RadialGrid::new(3, 5.0, 500).unwrap();
        let one = g.sample(|_| 1.0).radial_laplacian();
        assert!(one.values.iter().all(|v| v.abs() < 1e-9));
        let sq = g.sample(|r| r * r).radial_laplacian();
        for i in 0..g.n {
            let r = g.nodes[i];
            let tol = if i == 0 { 1e-9 } else { 1e-9 + g.h * g.h / (r * r) };
            assert!((sq.values[i] - 6.0).abs() <= tol, "{i} {}", sq.values[i]);
        }
    }

    #[test]
    fn summation_by_parts() {
        let g = RadialGrid::new(3, 30.0, 3000).unwrap();
        let u = g.sample(|r| (-r * r / 4.0).exp());
        let lap = u.radial_laplacian();
        let pair: f64 = -g.quad(&u.values.iter().zip(&lap.values).map(|(a, b)| a * b).collect::<Vec<_>>());
        assert!((pair - u.grad_l2_sq()).abs() < 1e-10);
    }

    #[test]
    fn gaussian_norm_and_dilation() {
        let g = RadialGrid::new(3, 20.0, 4000).unwrap();
        let u = g.sample(|r| (-r * r / 2.0).exp());
        assert!(((u.l2_sq() - PI.powf(1.5)) / PI.powf(1.5)).abs() < 1e-4);
        let s: f64 = 1.7;
        let us = g.sample(|r| s.powf(1.5) * (-(s * r).powi(2) / 2.0).exp());
        assert!(((us.l2_sq() - u.l2_sq()) / u.l2_sq()).abs() < 1e-4);
        let ratio = us.grad_l2_sq() / u.grad_l2_sq();
        assert!((ratio - s * s).abs() / (s * s) < 1e-4);
    }

    #[test]
    fn quadrature_is_second_order_in_2d() {
        let err = |n| {
            let g = RadialGrid::new(2, 10.0, n).unwrap();
            (g.sample(|r| (-r * r).exp()).integrate(|u| u) - PI).abs()
        };
        let ratio = err(200) / err(400);
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
    }

    #[test]
    fn tail_fits() {
        let g = RadialGrid::new(3, 12.0, 1200).unwrap();
        let u = g.sample(|r| if r > 0.0 { (-2.0 * r).exp() / r } else { 1.0 });
        let f = u.fit_exponential_tail(5.0, 10.0).unwrap();
        assert!((f.rate - 2.0).abs() < 0.02 && (f.power - 1.0).abs() < 0.01);
        let e = g.sample(|r| 3.0 * (-0.5 * r).exp()).fit_exponential_tail(5.0, 10.0).unwrap();
        assert!(e.power.abs() < 1e-6 && (e.amplitude - 3.0).abs() < 1e-6);
        let bad = g.sample(|r| 1.0 - r / 8.0);
        assert!(bad.fit_exponential_tail(5.0, 10.0).is_err());
    }

    #[test]
    fn cylinder_gaussian() {
        let c = CylGrid::new(-8.0, 8.0, 400, 8.0, 400).unwrap();
        let v = c.integrate(crate::exec::Execution::Sequential, |z, s| (-(z * z + s * s)).exp());
        assert!(((v - PI.powf(1.5)) / PI.powf(1.5)).abs() < 1e-4);
    }

    #[test]
    fn interpolation_is_accurate() {
        let g = RadialGrid::new(3, 10.0, 1000).unwrap();
        let u = g.sample(|r| (-r * r).exp());
        for &r in &[0.0, 0.0031, 0.5, 1.2345, 3.3] {
            assert!((u.interp(r) - (-r * r).exp()).abs() < 1e-8);
        }
    }
}
