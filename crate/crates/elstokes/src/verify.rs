//! The structural check battery, the parameter sweep, and the convention
//! calibration harness.
//!
//! Every check is a named predicate on an assembled data set; `verify`
//! runs the full battery without short-circuiting so a report always shows
//! the status of every check, while calibration stops a convention at its
//! first failure (running the cheap checks before the expensive conjugacy
//! test) because only full survival matters there.

use crate::annulus::count_critical_with_eps;
use crate::conventions::ConventionSet;
use crate::cyclotomic::OrderingTable;
use crate::indices::Parity;
use crate::laplace::{laplace_invariants, order_at_direction, theta_grid_parts, ElementaryInput};
use crate::linalg::{Gaussian, Matrix};
use crate::report::Check;
use crate::stokes::{
    assemble, diagonal_blocks_invertible, is_block_triangular, monodromy_realizations_agree,
    sigma_blocks, sigma_ev_odd, sigma_odd_ev, spectral_laplace_check, MonodromyPair,
    StokesDataSet,
};
use crate::{check_coprime, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

/// Options for the check battery.
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Run the floating-point geometry cross-check only for p + q up to
    /// this bound (it costs a root solve and 2q·n region tests).
    pub geometry_bound: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { geometry_bound: 9 }
    }
}

/// All coprime slope pairs with p + q ≤ max_n, ordered by p + q then p.
pub fn coprime_pairs(max_n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for p in 1..n {
            let q = n - p;
            if check_coprime(p, q).is_ok() {
                out.push((p, q));
            }
        }
    }
    out.sort_by_key(|&(p, q)| (p + q, p));
    out
}

/// The monodromies used by the default sweep.
pub fn sweep_monodromies() -> Vec<(String, Matrix)> {
    vec![
        ("diag(2)".into(), Matrix::from_ints(&[&[2]])),
        ("diag(2,3)".into(), Matrix::from_ints(&[&[2, 0], &[0, 3]])),
    ]
}

/// The monodromies used by calibration: the sweep ones plus a rank-two
/// unipotent block, which exercises the non-semisimple branch.
pub fn calibration_monodromies() -> Vec<(String, Matrix)> {
    let mut v = sweep_monodromies();
    v.push(("jordan2(1)".into(), Matrix::from_ints(&[&[1, 1], &[0, 1]])));
    v
}

fn diagonal_entries(t: &Matrix) -> Option<Vec<Gaussian>> {
    if !t.is_square() {
        return None;
    }
    for i in 0..t.rows() {
        for j in 0..t.cols() {
            if i != j && !t.get(i, j).is_zero() {
                return None;
            }
        }
    }
    Some((0..t.rows()).map(|i| t.get(i, i).clone()).collect())
}

fn check_sigma_invertible(data: &StokesDataSet) -> Check {
    for (l, m) in data.maps.iter().enumerate() {
        if !m.is_invertible() {
            return Check::fail("sigma_invertible", json!({ "level": l }));
        }
    }
    Check::pass("sigma_invertible")
}

fn check_opposedness(data: &StokesDataSet) -> Check {
    let r = data.r();
    for l in 0..data.levels() {
        match data.opposedness_summands(l) {
            Ok(summands) => {
                for (k, u) in summands.iter().enumerate() {
                    if u.cols() != r {
                        return Check::fail(
                            "opposedness",
                            json!({ "level": l, "slot": k, "dim": u.cols(), "expected": r }),
                        );
                    }
                }
            }
            Err(e) => {
                return Check::fail("opposedness", json!({ "level": l, "error": e.to_string() }))
            }
        }
    }
    Check::pass("opposedness")
}

fn check_splittings_filtered(data: &StokesDataSet) -> Check {
    match data.splittings_filtered() {
        Ok(true) => Check::pass("splittings_filtered"),
        Ok(false) => Check::fail(
            "splittings_filtered",
            json!("a splitting basis does not refine its filtration"),
        ),
        Err(e) => Check::fail("splittings_filtered", json!({ "error": e.to_string() })),
    }
}

fn check_multiplier_triangularity(data: &StokesDataSet) -> Check {
    let r = data.r();
    match data.graded_multipliers() {
        Ok(mults) => {
            for (l, m) in mults.iter().enumerate() {
                let upper = l % 2 == 0;
                if !is_block_triangular(m, r, upper) {
                    return Check::fail(
                        "multiplier_triangularity",
                        json!({ "level": l, "expected": if upper { "upper" } else { "lower" } }),
                    );
                }
                if !diagonal_blocks_invertible(m, r) {
                    return Check::fail(
                        "multiplier_triangularity",
                        json!({ "level": l, "error": "singular diagonal block" }),
                    );
                }
            }
            Check::pass("multiplier_triangularity")
        }
        Err(e) => Check::fail("multiplier_triangularity", json!({ "error": e.to_string() })),
    }
}

fn check_determinant_identity(data: &StokesDataSet) -> Check {
    if data.det_identity_holds() {
        Check::pass("determinant_identity")
    } else {
        Check::fail(
            "determinant_identity",
            json!("det of composed monodromy differs from ±(det T)^{p+q}"),
        )
    }
}

fn check_monodromy_conjugacy(data: &StokesDataSet) -> Check {
    match monodromy_realizations_agree(data) {
        Ok(true) => Check::pass("monodromy_conjugacy"),
        Ok(false) => Check::fail(
            "monodromy_conjugacy",
            json!("composed monodromy is not conjugate to the (p+q)-th power of the explicit one"),
        ),
        Err(e) => Check::fail("monodromy_conjugacy", json!({ "error": e.to_string() })),
    }
}

fn check_block_assembly(data: &StokesDataSet) -> Check {
    let (p, q) = (data.p, data.q);
    if p <= q && !(p == 1 && q == 1) {
        return Check::skipped(
            "block_assembly_matches",
            "sector block construction assumes p > q",
        );
    }
    for parity in [Parity::Ev, Parity::Odd] {
        let direct = match parity {
            Parity::Ev => sigma_ev_odd(p, q, &data.pair, data.conv),
            Parity::Odd => sigma_odd_ev(p, q, &data.pair, data.conv),
        };
        let blocks = sigma_blocks(p, q, &data.pair, parity, data.conv);
        match (direct, blocks) {
            (Ok(d), Ok(b)) => {
                if d != b {
                    return Check::fail(
                        "block_assembly_matches",
                        json!({ "parity": format!("{parity:?}") }),
                    );
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                return Check::fail("block_assembly_matches", json!({ "error": e.to_string() }))
            }
        }
    }
    Check::pass("block_assembly_matches")
}

fn check_spectral_identity(data: &StokesDataSet) -> Check {
    let Some(entries) = diagonal_entries(data.pair.t()) else {
        return Check::skipped("spectral_identity", "monodromy is not diagonal");
    };
    match spectral_laplace_check(data.p, data.q, &entries, data.conv) {
        Ok(true) => Check::pass("spectral_identity"),
        Ok(false) => Check::fail(
            "spectral_identity",
            json!("characteristic polynomial does not factor as (x−1)^{rq}·∏(x^p − t^{p+q})"),
        ),
        Err(crate::Error::Unsupported(why)) => Check::skipped("spectral_identity", &why),
        Err(e) => Check::fail("spectral_identity", json!({ "error": e.to_string() })),
    }
}

fn check_geometry_counts(data: &StokesDataSet, opts: VerifyOptions) -> Check {
    let (p, q) = (data.p, data.q);
    if p + q > opts.geometry_bound {
        return Check::skipped(
            "geometry_counts",
            &format!("p + q exceeds the geometry bound {}", opts.geometry_bound),
        );
    }
    let inner = || -> Result<Option<serde_json::Value>> {
        let n = (p + q) as usize;
        let phi = Complex64::new(1.0, 0.0);
        let grid = theta_grid_parts(p, q, phi)?;
        let table = OrderingTable::new(p, q)?;
        let input = ElementaryInput::new(p, q, phi, MonodromyPair::new(Matrix::identity(0))?)?;
        let inv = laplace_invariants(&input)?;
        for l in 0..2 * q as usize {
            let numeric = order_at_direction(&inv.exponents, q, grid.direction(l))?;
            let exact = if l % 2 == 0 { &table.ev } else { &table.odd };
            if numeric != *exact {
                return Ok(Some(json!({
                    "direction": l,
                    "numeric_order": numeric,
                    "exact_order": exact,
                })));
            }
            let counts: Vec<usize> = exact
                .iter()
                .map(|&z| count_critical_with_eps(p, q, z as u64, l, grid.epsilon))
                .collect::<Result<_>>()?;
            if counts.windows(2).any(|w| w[0] >= w[1]) {
                return Ok(Some(json!({
                    "direction": l,
                    "counts": counts,
                    "error": "counts are not strictly increasing along the dominance order",
                })));
            }
            let mut sorted = counts.clone();
            sorted.sort_unstable();
            if sorted != (0..n).collect::<Vec<_>>() {
                return Ok(Some(json!({
                    "direction": l,
                    "counts": counts,
                    "error": "counts do not exhaust 0..n-1",
                })));
            }
        }
        Ok(None)
    };
    match inner() {
        Ok(None) => Check::pass("geometry_counts"),
        Ok(Some(witness)) => Check::fail("geometry_counts", witness),
        Err(e) => Check::fail("geometry_counts", json!({ "error": e.to_string() })),
    }
}

/// Runs the full battery in its canonical order. Construction failures
/// surface as an `Err`; check failures are reported in the returned list.
pub fn verify_checks(
    p: u64,
    q: u64,
    pair: &MonodromyPair,
    conv: ConventionSet,
    opts: VerifyOptions,
) -> Result<Vec<Check>> {
    let data = assemble(p, q, pair, conv)?;
    Ok(vec![
        check_sigma_invertible(&data),
        check_opposedness(&data),
        check_splittings_filtered(&data),
        check_multiplier_triangularity(&data),
        check_determinant_identity(&data),
        check_monodromy_conjugacy(&data),
        check_block_assembly(&data),
        check_spectral_identity(&data),
        check_geometry_counts(&data, opts),
    ])
}

/// One sweep entry: the slope pair, the monodromy label, and the battery
/// results.
#[derive(Clone, Debug)]
pub struct SweepItem {
    pub p: u64,
    pub q: u64,
    pub monodromy: String,
    pub checks: Vec<Check>,
}

/// Runs the battery over all coprime pairs with p + q ≤ max_n and the
/// standard sweep monodromies, in parallel.
pub fn verify_sweep(max_n: u64, conv: ConventionSet, opts: VerifyOptions) -> Result<Vec<SweepItem>> {
    let cases: Vec<((u64, u64), (String, Matrix))> = coprime_pairs(max_n)
        .into_iter()
        .flat_map(|pq| {
            sweep_monodromies()
                .into_iter()
                .map(move |m| (pq, m))
                .collect::<Vec<_>>()
        })
        .collect();
    cases
        .into_par_iter()
        .map(|((p, q), (label, t))| {
            let pair = MonodromyPair::new(t)?;
            let checks = verify_checks(p, q, &pair, conv, opts)?;
            Ok(SweepItem {
                p,
                q,
                monodromy: label,
                checks,
            })
        })
        .collect()
}

/// Where a convention assignment first failed during calibration.
#[derive(Clone, Debug)]
pub struct CalibrationFailure {
    pub tag: String,
    pub p: u64,
    pub q: u64,
    pub monodromy: String,
    pub check: String,
    pub witness: Option<serde_json::Value>,
}

#[derive(Clone, Debug)]
pub struct CalibrationReport {
    pub survivors: Vec<ConventionSet>,
    pub conventions_tested: usize,
    pub cases_per_convention: usize,
    /// first failure for each eliminated convention
    pub failures: Vec<CalibrationFailure>,
}

/// Runs the calibration suite (the convention-sensitive structural checks,
/// cheapest first, the conjugacy test last) over every convention
/// assignment and every case, stopping each assignment at its first
/// failure. Exactly one survivor is the expected outcome.
pub fn calibrate(max_n: u64) -> Result<CalibrationReport> {
    let cases: Vec<(u64, u64, String, Matrix)> = coprime_pairs(max_n)
        .into_iter()
        .flat_map(|(p, q)| {
            calibration_monodromies()
                .into_iter()
                .map(move |(label, t)| (p, q, label, t))
                .collect::<Vec<_>>()
        })
        .collect();
    let all = ConventionSet::all();
    let outcomes: Vec<std::result::Result<ConventionSet, CalibrationFailure>> = all
        .par_iter()
        .map(|&conv| {
            for (p, q, label, t) in &cases {
                let fail = |check: &str, witness: Option<serde_json::Value>| CalibrationFailure {
                    tag: conv.tag(),
                    p: *p,
                    q: *q,
                    monodromy: label.clone(),
                    check: check.into(),
                    witness,
                };
                let pair = match MonodromyPair::new(t.clone()) {
                    Ok(pair) => pair,
                    Err(e) => return Err(fail("construction", Some(json!(e.to_string())))),
                };
                let data = match assemble(*p, *q, &pair, conv) {
                    Ok(d) => d,
                    Err(e) => return Err(fail("construction", Some(json!(e.to_string())))),
                };
                for check in [
                    check_sigma_invertible(&data),
                    check_opposedness(&data),
                    check_splittings_filtered(&data),
                    check_multiplier_triangularity(&data),
                    check_determinant_identity(&data),
                    check_monodromy_conjugacy(&data),
                ] {
                    if check.status == crate::report::CheckStatus::Fail {
                        return Err(fail(&check.name, check.witness));
                    }
                }
            }
            Ok(conv)
        })
        .collect();
    let mut survivors = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(conv) => survivors.push(conv),
            Err(f) => failures.push(f),
        }
    }
    Ok(CalibrationReport {
        survivors,
        conventions_tested: all.len(),
        cases_per_convention: cases.len(),
        failures,
    })
}
