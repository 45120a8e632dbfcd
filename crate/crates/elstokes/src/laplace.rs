//! Leading-order invariants of the transformed connection: ramification
//! degree, leading coefficients of the new exponential factors, the sign
//! twist on the monodromy, and the dominance order of the exponential
//! factors along a generic grid of directions. The dominance orders are
//! computed numerically and cross-checked against the exact cyclotomic
//! order, which ties the analytic picture to the combinatorial one.

use crate::cyclotomic::OrderingTable;
use crate::linalg::Matrix;
use crate::stokes::MonodromyPair;
use crate::{check_coprime, Error, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

fn normalize_angle(a: f64) -> f64 {
    let x = a.rem_euclid(TAU);
    if x >= TAU {
        0.0
    } else {
        x
    }
}

/// An elementary input: slopes p/q in lowest terms, the nonzero leading
/// coefficient of the exponential factor, and the regular monodromy.
#[derive(Clone, Debug)]
pub struct ElementaryInput {
    pub p: u64,
    pub q: u64,
    pub phi_q: Complex64,
    pub pair: MonodromyPair,
}

impl ElementaryInput {
    pub fn new(p: u64, q: u64, phi_q: Complex64, pair: MonodromyPair) -> Result<Self> {
        check_coprime(p, q)?;
        if !phi_q.is_finite() || phi_q.norm_sqr() == 0.0 {
            return Err(Error::Parse(
                "leading coefficient must be finite and nonzero".into(),
            ));
        }
        Ok(ElementaryInput { p, q, phi_q, pair })
    }
}

/// Formal data of the transform at its irregular point.
#[derive(Clone, Debug)]
pub struct LaplaceFormalData {
    /// ramification degree of the transform: p + q
    pub p_hat: u64,
    /// leading coefficient of the new ramification coordinate: p/(q·φ_q)
    pub rho_hat_lead: Complex64,
    /// leading coefficient of the new exponential factor: (p+q)·φ_q/p
    pub phi_hat_lead: Complex64,
    /// the transform twists the monodromy by (−1)^q
    pub twist_sign: i64,
    /// the p+q exponential leading terms c_k = phi_hat_lead · ζ^{−qk}
    pub exponents: Vec<Complex64>,
}

pub fn laplace_invariants(input: &ElementaryInput) -> Result<LaplaceFormalData> {
    let n = input.p + input.q;
    let p = input.p as f64;
    let q = input.q as f64;
    let phi_hat_lead = input.phi_q * (n as f64) / p;
    let exponents = (0..n)
        .map(|k| {
            let angle = -TAU * (input.q * k) as f64 / n as f64;
            phi_hat_lead * Complex64::from_polar(1.0, angle)
        })
        .collect();
    Ok(LaplaceFormalData {
        p_hat: n,
        rho_hat_lead: Complex64::new(p, 0.0) / (input.phi_q * q),
        phi_hat_lead,
        twist_sign: if input.q % 2 == 1 { -1 } else { 1 },
        exponents,
    })
}

/// The monodromy carried by the transform: (−1)^q · T, exactly.
pub fn twisted_monodromy(input: &ElementaryInput) -> Matrix {
    if input.q % 2 == 1 {
        input.pair.t().neg()
    } else {
        input.pair.t().clone()
    }
}

/// The 2q directions where the factor e^{c·u} with u^q-coordinates changes
/// dominance: (arg c − π/2 + jπ)/q taken mod 2π, sorted.
pub fn stokes_directions(c: Complex64, q: u64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..2 * q)
        .map(|j| normalize_angle((c.arg() - PI / 2.0 + j as f64 * PI) / q as f64))
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// A generic grid of 2q directions: the base direction solves
/// q·ϑ = arg φ_q + π + ε, and successive directions step by π/q. The
/// offset ε is half the smallest positive angular margin between the
/// unperturbed base direction and the full pairwise dominance-change set,
/// so no grid direction ever sits on a dominance change.
#[derive(Clone, Debug)]
pub struct ThetaGrid {
    pub q: u64,
    pub theta0: f64,
    pub epsilon: f64,
    /// the full pairwise dominance-change direction set, sorted
    pub directions: Vec<f64>,
}

impl ThetaGrid {
    pub fn direction(&self, l: usize) -> f64 {
        normalize_angle(self.theta0 + l as f64 * PI / self.q as f64)
    }
}

pub fn theta_grid(input: &ElementaryInput) -> Result<ThetaGrid> {
    theta_grid_parts(input.p, input.q, input.phi_q)
}

/// As `theta_grid`, but from bare slope data (the grid does not depend on
/// the monodromy).
pub fn theta_grid_parts(p: u64, q: u64, phi_q: Complex64) -> Result<ThetaGrid> {
    check_coprime(p, q)?;
    if !phi_q.is_finite() || phi_q.norm_sqr() == 0.0 {
        return Err(Error::Parse(
            "leading coefficient must be finite and nonzero".into(),
        ));
    }
    let input = ElementaryInput {
        p,
        q,
        phi_q,
        pair: MonodromyPair::new(Matrix::identity(0)).expect("empty pair"),
    };
    let inv = laplace_invariants(&input)?;
    let n = inv.exponents.len();
    let mut directions = Vec::new();
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let d = inv.exponents[j] - inv.exponents[k];
            if d.norm() < 1e-12 * inv.phi_hat_lead.norm() {
                return Err(Error::Numeric(format!(
                    "exponential leading terms {j} and {k} coincide"
                )));
            }
            directions.extend(stokes_directions(d, input.q));
        }
    }
    directions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let arg_phi = input.phi_q.arg();
    let q = input.q as f64;
    let mut v_min = f64::INFINITY;
    for &s in &directions {
        let v = (q * s - arg_phi - PI).rem_euclid(PI);
        if v > 1e-12 && v < v_min {
            v_min = v;
        }
    }
    if !v_min.is_finite() {
        return Err(Error::Numeric(
            "no admissible generic offset for the direction grid".into(),
        ));
    }
    let epsilon = v_min / 2.0;
    Ok(ThetaGrid {
        q: input.q,
        theta0: normalize_angle((arg_phi + PI + epsilon) / q),
        epsilon,
        directions,
    })
}

/// Indices of the exponential factors sorted by increasing dominance at
/// the given direction: ascending Re(c_k · e^{−iqϑ}). A tie within the
/// relative tolerance means the direction is degenerate and is an error.
pub fn order_at_direction(exponents: &[Complex64], q: u64, theta: f64) -> Result<Vec<usize>> {
    let rot = Complex64::from_polar(1.0, -(q as f64) * theta);
    let keys: Vec<f64> = exponents.iter().map(|c| (c * rot).re).collect();
    let scale = exponents
        .iter()
        .map(|c| c.norm())
        .fold(1.0f64, f64::max);
    let mut idx: Vec<usize> = (0..exponents.len()).collect();
    idx.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap());
    for w in idx.windows(2) {
        if (keys[w[1]] - keys[w[0]]).abs() < 1e-9 * scale {
            return Err(Error::Numeric(format!(
                "degenerate direction: factors {} and {} tie at theta = {theta}",
                w[0], w[1]
            )));
        }
    }
    Ok(idx)
}

/// Dominance order on the l-th grid direction.
pub fn order_at(input: &ElementaryInput, grid: &ThetaGrid, l: usize) -> Result<Vec<usize>> {
    let inv = laplace_invariants(input)?;
    order_at_direction(&inv.exponents, input.q, grid.direction(l))
}

/// Checks that every grid direction reproduces the exact cyclotomic order:
/// the even directions give the reference order and the odd ones its
/// reverse.
pub fn orders_match_cyclotomic(input: &ElementaryInput) -> Result<bool> {
    let grid = theta_grid(input)?;
    let table = OrderingTable::new(input.p, input.q)?;
    for l in 0..2 * input.q as usize {
        let got = order_at(input, &grid, l)?;
        let want = if l % 2 == 0 { &table.ev } else { &table.odd };
        if got != *want {
            return Ok(false);
        }
    }
    Ok(true)
}
