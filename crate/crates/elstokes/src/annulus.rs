//! Geometry on the twisted annulus: the slope polynomial and its roots,
//! the boundary-value phase function on the unit circle, the two-phase
//! decomposition of the annulus determined by a direction grid, counts of
//! distinguished points in the growth region, and a deterministic raster
//! rendering of the decomposition.

use crate::indices::Parity;
use crate::laplace::theta_grid_parts;
use crate::{check_coprime, Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

/// Coefficients, lowest degree first, of q·X^{p+q} − (p+q)·X^q + p.
pub fn slope_poly(p: u64, q: u64) -> Vec<i64> {
    let n = (p + q) as usize;
    let mut coeffs = vec![0i64; n + 1];
    coeffs[0] = p as i64;
    coeffs[q as usize] = -((p + q) as i64);
    coeffs[n] = q as i64;
    coeffs
}

fn divide_by_x_minus_one(coeffs: &[i64]) -> Result<Vec<i64>> {
    // synthetic division, highest degree first internally
    let deg = coeffs.len() - 1;
    let mut quotient = vec![0i64; deg];
    let mut carry = 0i64;
    for i in (0..=deg).rev() {
        let value = coeffs[i]
            .checked_add(carry)
            .ok_or_else(|| Error::Numeric("overflow in exact deflation".into()))?;
        if i == 0 {
            if value != 0 {
                return Err(Error::Numeric(format!(
                    "deflation remainder {value} is nonzero"
                )));
            }
        } else {
            quotient[i - 1] = value;
            carry = value;
        }
    }
    Ok(quotient)
}

/// Removes the exact double root at 1: divides by (X − 1) twice over the
/// integers, checking both remainders vanish.
pub fn deflate_double_root(coeffs: &[i64]) -> Result<Vec<i64>> {
    divide_by_x_minus_one(&divide_by_x_minus_one(coeffs)?)
}

fn horner(coeffs: &[i64], x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * x + c as f64;
    }
    acc
}

fn horner_derivative(coeffs: &[i64], x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in (1..coeffs.len()).rev() {
        acc = acc * x + (i as i64 * coeffs[i]) as f64;
    }
    acc
}

/// Simultaneous root refinement for a polynomial with simple roots.
fn aberth_roots(coeffs: &[i64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg] as f64;
    let bound = 1.0
        + coeffs[..deg]
            .iter()
            .map(|&c| (c as f64).abs())
            .fold(0.0f64, f64::max)
            / lead.abs();
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(0.8 * bound, TAU * k as f64 / deg as f64 + 0.7))
        .collect();
    let scale: f64 = coeffs.iter().map(|&c| (c as f64).abs()).sum();
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        let snapshot = z.clone();
        for k in 0..deg {
            let fv = horner(coeffs, snapshot[k]);
            let dv = horner_derivative(coeffs, snapshot[k]);
            if dv.norm_sqr() == 0.0 {
                z[k] += Complex64::new(1e-6, 1e-6);
                max_step = f64::INFINITY;
                continue;
            }
            let w = fv / dv;
            let mut repel = Complex64::new(0.0, 0.0);
            for (j, &other) in snapshot.iter().enumerate() {
                if j != k {
                    repel += (snapshot[k] - other).inv();
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * repel;
            let step = if denom.norm_sqr() == 0.0 { w } else { w / denom };
            z[k] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
        }
        if max_step < 1e-14 {
            break;
        }
    }
    // Newton polish
    for zk in z.iter_mut() {
        for _ in 0..4 {
            let dv = horner_derivative(coeffs, *zk);
            if dv.norm_sqr() == 0.0 {
                break;
            }
            *zk -= horner(coeffs, *zk) / dv;
        }
    }
    for zk in &z {
        let scl = scale * (1.0 + zk.norm()).powi(deg as i32);
        if horner(coeffs, *zk).norm() > 1e-10 * scl {
            return Err(Error::Numeric("root refinement did not converge".into()));
        }
    }
    z.sort_by(|a, b| {
        let ka = (a.arg().rem_euclid(TAU), a.norm());
        let kb = (b.arg().rem_euclid(TAU), b.norm());
        ka.partial_cmp(&kb).unwrap()
    });
    Ok(z)
}

/// The roots of the slope polynomial other than the double root at 1,
/// classified by position relative to the unit circle.
#[derive(Clone, Debug)]
pub struct RootReport {
    pub inner: Vec<Complex64>,
    pub outer: Vec<Complex64>,
    /// max |f(z)| over all reported roots of the full slope polynomial
    pub residual_max: f64,
    /// min distance of |z| to 1 over the reported roots
    pub unit_margin_min: f64,
}

impl RootReport {
    pub fn all_roots(&self) -> Vec<Complex64> {
        let mut v = self.inner.clone();
        v.extend(self.outer.iter().copied());
        v
    }
}

pub fn annulus_roots(p: u64, q: u64) -> Result<RootReport> {
    check_coprime(p, q)?;
    let full = slope_poly(p, q);
    let deflated = deflate_double_root(&full)?;
    let roots = aberth_roots(&deflated)?;
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    let mut residual_max = 0.0f64;
    let mut unit_margin_min = f64::INFINITY;
    for z in roots {
        let margin = (z.norm() - 1.0).abs();
        unit_margin_min = unit_margin_min.min(margin);
        if margin < 1e-9 {
            return Err(Error::Numeric(format!(
                "root {z} is too close to the unit circle to classify"
            )));
        }
        residual_max = residual_max.max(horner(&full, z).norm());
        if z.norm() < 1.0 {
            inner.push(z);
        } else {
            outer.push(z);
        }
    }
    if inner.len() != (q - 1) as usize || outer.len() != (p - 1) as usize {
        return Err(Error::Numeric(format!(
            "expected {} inner and {} outer roots, found {} and {}",
            q - 1,
            p - 1,
            inner.len(),
            outer.len()
        )));
    }
    Ok(RootReport {
        inner,
        outer,
        residual_max,
        unit_margin_min,
    })
}

/// g(x) = f(x)/x^q, the phase-defining function on the punctured plane.
pub fn g_eval(p: u64, q: u64, x: Complex64) -> Complex64 {
    horner(&slope_poly(p, q), x) / x.powi(q as i32)
}

/// Phase of g at x, normalized into [0, 2π).
pub fn g_arg(p: u64, q: u64, x: Complex64) -> f64 {
    let a = g_eval(p, q, x).arg().rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// One distinguished point on the unit circle: the k-th root of unity,
/// its phase exponent κ = pk mod n, the numeric phase of g there, and the
/// exact value π/2 + κπ/n it must equal.
#[derive(Clone, Debug)]
pub struct CriticalValue {
    pub k: u64,
    pub kappa: u64,
    pub numeric: f64,
    pub closed_form: f64,
}

pub fn critical_data(p: u64, q: u64) -> Result<Vec<CriticalValue>> {
    check_coprime(p, q)?;
    let n = p + q;
    Ok((1..n)
        .map(|k| {
            let x = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
            let kappa = (p * k) % n;
            CriticalValue {
                k,
                kappa,
                numeric: g_arg(p, q, x),
                closed_form: PI / 2.0 + kappa as f64 * PI / n as f64,
            }
        })
        .collect())
}

/// A point of the compactified annulus: interior in polar coordinates, or
/// a direction on one of the two boundary circles.
#[derive(Clone, Copy, Debug)]
pub enum AnnulusPoint {
    Interior { r: f64, theta: f64 },
    InnerBoundary { theta: f64 },
    OuterBoundary { theta: f64 },
}

fn normalize_signed(a: f64) -> f64 {
    let x = a.rem_euclid(TAU);
    if x > PI {
        x - TAU
    } else {
        x
    }
}

/// Membership in the growth region attached to the root-of-unity index
/// `zeta_exp` for a direction of the given parity: the phase of g at the
/// translated point must lie within π/2 (even parity) or beyond π/2 (odd
/// parity) of the reference phase q·arg(ζ̂) + ε. Boundary directions use
/// the exact phase limits. The comparison is widened by 1e−12 so that
/// knife-edge raster cells are stable.
pub fn b_member(
    p: u64,
    q: u64,
    zeta_exp: u64,
    parity: Parity,
    eps: f64,
    point: AnnulusPoint,
) -> bool {
    let n = p + q;
    let arg_zeta = TAU * zeta_exp as f64 / n as f64;
    let phase = match point {
        AnnulusPoint::Interior { r, theta } => {
            g_arg(p, q, Complex64::from_polar(r, theta - arg_zeta))
        }
        AnnulusPoint::InnerBoundary { theta } => -(q as f64) * (theta - arg_zeta),
        AnnulusPoint::OuterBoundary { theta } => (p as f64) * (theta - arg_zeta),
    };
    let d = normalize_signed(phase - (q as f64) * arg_zeta - eps);
    match parity {
        Parity::Ev => d.abs() < PI / 2.0 + 1e-12,
        Parity::Odd => d.abs() > PI / 2.0 - 1e-12,
    }
}

/// Counts the distinguished unit-circle points (excluding ζ̂ itself) that
/// lie in the growth region for the l-th grid direction, using the
/// canonical grid offset for a unit leading coefficient.
pub fn count_critical(p: u64, q: u64, zeta_exp: u64, l: usize) -> Result<usize> {
    let grid = theta_grid_parts(p, q, Complex64::new(1.0, 0.0))?;
    count_critical_with_eps(p, q, zeta_exp, l, grid.epsilon)
}

pub fn count_critical_with_eps(
    p: u64,
    q: u64,
    zeta_exp: u64,
    l: usize,
    eps: f64,
) -> Result<usize> {
    check_coprime(p, q)?;
    let n = p + q;
    if zeta_exp >= n {
        return Err(Error::Parse(format!(
            "root-of-unity exponent {zeta_exp} out of range for n = {n}"
        )));
    }
    let parity = Parity::of_level(l);
    let mut count = 0;
    for m in 0..n {
        if m == zeta_exp {
            continue;
        }
        let point = AnnulusPoint::Interior {
            r: 1.0,
            theta: TAU * m as f64 / n as f64,
        };
        if b_member(p, q, zeta_exp, parity, eps, point) {
            count += 1;
        }
    }
    Ok(count)
}

/// Radius of the level curve of |g| through direction ϑ, when it exists:
/// r^{p+q} = (p/q)·sin(qϑ)/sin(pϑ). A vanishing denominator means the ray
/// is degenerate for this construction and is an error; a non-positive
/// ratio means no level radius on this ray.
pub fn level_radius(p: u64, q: u64, theta: f64) -> Result<Option<f64>> {
    check_coprime(p, q)?;
    let sp = (p as f64 * theta).sin();
    if sp.abs() < 1e-12 {
        return Err(Error::Numeric(format!(
            "degenerate ray: sin(p·theta) vanishes at theta = {theta}"
        )));
    }
    let ratio = (p as f64 / q as f64) * (q as f64 * theta).sin() / sp;
    if ratio > 0.0 {
        Ok(Some(ratio.powf(1.0 / (p + q) as f64)))
    } else {
        Ok(None)
    }
}

/// Counts cyclic runs of `true` in a circular row.
pub fn cyclic_runs(row: &[bool]) -> usize {
    let len = row.len();
    if len == 0 {
        return 0;
    }
    if row.iter().all(|&b| b) {
        return 1;
    }
    let mut runs = 0;
    for i in 0..len {
        let prev = row[(i + len - 1) % len];
        if row[i] && !prev {
            runs += 1;
        }
    }
    runs
}

/// A deterministic raster of the growth region over log-polar coordinates,
/// together with the exact boundary rows and the marked points.
#[derive(Clone, Debug)]
pub struct Raster {
    pub p: u64,
    pub q: u64,
    pub zeta_exp: u64,
    pub l: usize,
    pub epsilon: f64,
    pub resolution: usize,
    /// outer radius of the plotted window (inner radius is its inverse)
    pub r_max: f64,
    /// membership in the r → 0 limit, one cell per direction sample
    pub inner_row: Vec<bool>,
    /// membership in the r → ∞ limit
    pub outer_row: Vec<bool>,
    /// interior samples: (resolution + 1) radius rows, log r ascending,
    /// each with `resolution` direction samples
    pub interior: Vec<Vec<bool>>,
    /// directions of the n distinguished unit-circle marks
    pub unit_marks: Vec<f64>,
    /// polar coordinates (r, ϑ) of the slope-polynomial roots off 1
    pub root_marks: Vec<(f64, f64)>,
}

impl Raster {
    pub fn compute(
        p: u64,
        q: u64,
        zeta_exp: u64,
        l: usize,
        eps: f64,
        resolution: usize,
    ) -> Result<Raster> {
        check_coprime(p, q)?;
        let n = p + q;
        if zeta_exp >= n {
            return Err(Error::Parse(format!(
                "root-of-unity exponent {zeta_exp} out of range for n = {n}"
            )));
        }
        if resolution < 2 {
            return Err(Error::Parse("resolution must be at least 2".into()));
        }
        let parity = Parity::of_level(l);
        let roots = annulus_roots(p, q)?;
        let r_max = (n / q + 2) as f64;
        let log_max = r_max.ln();
        let theta_of = |j: usize| TAU * j as f64 / resolution as f64;
        let inner_row: Vec<bool> = (0..resolution)
            .map(|j| {
                b_member(
                    p,
                    q,
                    zeta_exp,
                    parity,
                    eps,
                    AnnulusPoint::InnerBoundary { theta: theta_of(j) },
                )
            })
            .collect();
        let outer_row: Vec<bool> = (0..resolution)
            .map(|j| {
                b_member(
                    p,
                    q,
                    zeta_exp,
                    parity,
                    eps,
                    AnnulusPoint::OuterBoundary { theta: theta_of(j) },
                )
            })
            .collect();
        let interior: Vec<Vec<bool>> = (0..=resolution)
            .into_par_iter()
            .map(|i| {
                let log_r = -log_max + 2.0 * log_max * i as f64 / resolution as f64;
                let r = log_r.exp();
                (0..resolution)
                    .map(|j| {
                        b_member(
                            p,
                            q,
                            zeta_exp,
                            parity,
                            eps,
                            AnnulusPoint::Interior {
                                r,
                                theta: theta_of(j),
                            },
                        )
                    })
                    .collect()
            })
            .collect();
        let unit_marks = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
        let root_marks = roots
            .all_roots()
            .iter()
            .map(|z| (z.norm(), z.arg().rem_euclid(TAU)))
            .collect();
        Ok(Raster {
            p,
            q,
            zeta_exp,
            l,
            epsilon: eps,
            resolution,
            r_max,
            inner_row,
            outer_row,
            interior,
            unit_marks,
            root_marks,
        })
    }

    pub fn inner_boundary_runs(&self) -> usize {
        cyclic_runs(&self.inner_row)
    }

    pub fn outer_boundary_runs(&self) -> usize {
        cyclic_runs(&self.outer_row)
    }
}

/// Renders the raster as an SVG document. The output is deterministic for
/// fixed inputs and carries a machine-readable manifest comment.
pub fn render_b_svg(
    p: u64,
    q: u64,
    zeta_exp: u64,
    l: usize,
    eps: f64,
    resolution: usize,
) -> Result<String> {
    let raster = Raster::compute(p, q, zeta_exp, l, eps, resolution)?;
    let manifest = serde_json::json!({
        "p": p,
        "q": q,
        "zeta_exponent": zeta_exp,
        "ell": l,
        "epsilon": eps,
        "resolution": resolution,
    });
    let width = 900.0f64;
    let height = 900.0f64;
    let margin = 40.0f64;
    let res = resolution as f64;
    let rows = res + 3.0; // outer strip, resolution+1 interior rows, inner strip
    let cell_w = (width - 2.0 * margin) / res;
    let cell_h = (height - 2.0 * margin) / rows;
    let x_of = |theta: f64| margin + theta.rem_euclid(TAU) / TAU * (width - 2.0 * margin);
    let log_max = raster.r_max.ln();
    // interior row i (log r ascending) is drawn with large r at the top
    let row_y = |i: f64| margin + i * cell_h;
    let y_of_log = |lr: f64| row_y(1.0 + (log_max - lr) / (2.0 * log_max) * res + 0.5);
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!("<!-- manifest: {manifest} -->\n"));
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let cell = |x: f64, y: f64, fill: &str| {
        format!(
            "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{w:.3}\" height=\"{h:.3}\" fill=\"{fill}\"/>\n",
            w = cell_w + 0.5,
            h = cell_h + 0.5,
        )
    };
    for (j, &m) in raster.outer_row.iter().enumerate() {
        if m {
            svg.push_str(&cell(margin + j as f64 * cell_w, row_y(0.0), "#2b5d8a"));
        }
    }
    for (i, row) in raster.interior.iter().enumerate() {
        // interior[i] has log r ascending; flip so large radius is on top
        let screen_row = 1.0 + (resolution - i) as f64;
        for (j, &m) in row.iter().enumerate() {
            if m {
                svg.push_str(&cell(
                    margin + j as f64 * cell_w,
                    row_y(screen_row),
                    "#7da7cc",
                ));
            }
        }
    }
    for (j, &m) in raster.inner_row.iter().enumerate() {
        if m {
            svg.push_str(&cell(
                margin + j as f64 * cell_w,
                row_y(rows - 1.0),
                "#2b5d8a",
            ));
        }
    }
    for &theta in &raster.unit_marks {
        svg.push_str(&format!(
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"#d62728\"/>\n",
            x_of(theta),
            y_of_log(0.0),
        ));
    }
    for &(r, theta) in &raster.root_marks {
        svg.push_str(&format!(
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"#111111\"/>\n",
            x_of(theta),
            y_of_log(r.ln()),
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
