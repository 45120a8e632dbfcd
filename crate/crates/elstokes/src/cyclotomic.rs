//! Exact dominance order among the n-th roots of unity (n = p + q) that
//! index the exponential factors of the transformed connection.
//!
//! All comparisons reduce to signs of sines and cosines at rational
//! multiples of π, which are decided by integer residue arithmetic — no
//! floating point anywhere in this module.

use crate::{check_coprime, Error, Result};
use std::cmp::Ordering;

/// Sign of sin(π·num/den) for den > 0, as -1/0/+1.
pub fn sin_sign_pi(num: i64, den: i64) -> i32 {
    assert!(den > 0, "denominator must be positive");
    let m = num.rem_euclid(2 * den);
    if m == 0 || m == den {
        0
    } else if m < den {
        1
    } else {
        -1
    }
}

/// Sign of cos(π·num/den) for den > 0, as -1/0/+1.
pub fn cos_sign_pi(num: i64, den: i64) -> i32 {
    // cos(πx) = sin(π(x + 1/2))
    sin_sign_pi(2 * num + den, 2 * den)
}

/// Sign of cos(π·a/den) − cos(π·b/den), by product-to-sum:
/// cos X − cos Y = −2·sin((X+Y)/2)·sin((X−Y)/2).
pub fn cos_diff_sign_pi(a: i64, b: i64, den: i64) -> i32 {
    -sin_sign_pi(a + b, 2 * den) * sin_sign_pi(a - b, 2 * den)
}

/// Sign of sin(π·a/den) − sin(π·b/den), by product-to-sum:
/// sin X − sin Y = 2·cos((X+Y)/2)·sin((X−Y)/2).
pub fn sin_diff_sign_pi(a: i64, b: i64, den: i64) -> i32 {
    cos_sign_pi(a + b, 2 * den) * sin_sign_pi(a - b, 2 * den)
}

/// Multiplicative inverse of p mod n (requires gcd(p, n) = 1), in [1, n−1].
pub fn inverse_mod(p: i64, n: i64) -> i64 {
    let (mut r0, mut r1) = (n, p.rem_euclid(n));
    let (mut s0, mut s1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "inputs must be coprime");
    s0.rem_euclid(n)
}

/// The dominance order on exponents {0, …, n−1}: with ξ = e^{2πi/n} and
/// w_j = ξ^{jp}, exponent j strictly precedes k at the reference direction
/// iff Re(w_j) > Re(w_k), with ties broken by Im(w_j) > Im(w_k). The
/// tie-break is the limit of the comparison at a direction nudged slightly
/// past the reference ray, so the order is total.
pub fn compare_ev(p: u64, q: u64, j: usize, k: usize) -> Ordering {
    let n = (p + q) as i64;
    let a = 2 * (j as i64) * (p as i64);
    let b = 2 * (k as i64) * (p as i64);
    match cos_diff_sign_pi(a, b, n) {
        1 => Ordering::Less,
        -1 => Ordering::Greater,
        _ => match sin_diff_sign_pi(a, b, n) {
            1 => Ordering::Less,
            -1 => Ordering::Greater,
            _ => Ordering::Equal,
        },
    }
}

/// The order one half-period later: the exact reverse of [`compare_ev`].
pub fn compare_odd(p: u64, q: u64, j: usize, k: usize) -> Ordering {
    compare_ev(p, q, k, j)
}

/// Exponents 0..n sorted by [`compare_ev`], smallest first.
pub fn enumerate_ev(p: u64, q: u64) -> Vec<usize> {
    let n = (p + q) as usize;
    let mut v: Vec<usize> = (0..n).collect();
    v.sort_by(|&j, &k| compare_ev(p, q, j, k));
    v
}

/// Exponents sorted by [`compare_odd`]; equals [`enumerate_ev`] reversed.
pub fn enumerate_odd(p: u64, q: u64) -> Vec<usize> {
    let mut v = enumerate_ev(p, q);
    v.reverse();
    v
}

/// Closed-form candidate for [`enumerate_ev`]: with a·p ≡ 1 (mod n), the
/// sequence [0, a, −a, 2a, −2a, …] taken mod n until all n exponents
/// appear. Used as an independent cross-check of the sort.
pub fn closed_form_ev(p: u64, q: u64) -> Vec<usize> {
    let n = (p + q) as i64;
    let a = inverse_mod(p as i64, n);
    let mut out = vec![0usize];
    let mut m = 1i64;
    while (out.len() as i64) < n {
        out.push((m * a).rem_euclid(n) as usize);
        if (out.len() as i64) < n {
            out.push((-m * a).rem_euclid(n) as usize);
        }
        m += 1;
    }
    out
}

/// Precomputed order data for one (p, q).
#[derive(Clone, Debug)]
pub struct OrderingTable {
    pub p: u64,
    pub q: u64,
    pub n: usize,
    /// a·p = 1 + b·n with a ∈ [1, n−1]
    pub a: usize,
    pub b: usize,
    /// exponents in increasing dominance order at the reference direction
    pub ev: Vec<usize>,
    /// the reversed order, in force one half-period later
    pub odd: Vec<usize>,
    /// pos_ev[j] = position of exponent j in `ev`
    pub pos_ev: Vec<usize>,
    pub pos_odd: Vec<usize>,
}

impl OrderingTable {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        check_coprime(p, q)?;
        let n = (p + q) as usize;
        let ev = enumerate_ev(p, q);
        let cf = closed_form_ev(p, q);
        if ev != cf {
            return Err(Error::Numeric(format!(
                "order sort and closed form disagree for p={p}, q={q}: {ev:?} vs {cf:?}"
            )));
        }
        let odd: Vec<usize> = ev.iter().rev().copied().collect();
        let mut pos_ev = vec![0usize; n];
        let mut pos_odd = vec![0usize; n];
        for (i, &j) in ev.iter().enumerate() {
            pos_ev[j] = i;
        }
        for (i, &j) in odd.iter().enumerate() {
            pos_odd[j] = i;
        }
        let a = inverse_mod(p as i64, n as i64) as usize;
        let b = (a * p as usize - 1) / n;
        Ok(OrderingTable {
            p,
            q,
            n,
            a,
            b,
            ev,
            odd,
            pos_ev,
            pos_odd,
        })
    }

    /// Exponent of the dominance-maximal root of unity (last in `ev`).
    pub fn ev_max_exponent(&self) -> usize {
        *self.ev.last().expect("n >= 2")
    }

    /// First exponent of the reversed (half-period) order.
    pub fn odd_min_exponent(&self) -> usize {
        self.odd[0]
    }

    /// Closed-form exponent of the minimum of the reversed order: n/2 when
    /// n is even, otherwise −a(n−1)/2 mod n. Errors if it disagrees with
    /// the enumerated order (it never does; the check keeps it honest).
    pub fn odd_min(&self) -> Result<usize> {
        let n = self.n as i64;
        let closed = if n % 2 == 0 {
            (n / 2) as usize
        } else {
            (-(self.a as i64) * ((n - 1) / 2)).rem_euclid(n) as usize
        };
        if closed != self.odd_min_exponent() {
            return Err(Error::Numeric(format!(
                "closed-form odd minimum {closed} disagrees with order for p={}, q={}",
                self.p, self.q
            )));
        }
        Ok(closed)
    }
}

/// A trigonometric expression with argument measured in turns/n whose sign
/// is decidable exactly from residues.
#[derive(Clone, Copy, Debug)]
pub enum TrigExpr {
    /// sin(2πa/n)
    Sin { a: i64 },
    /// cos(2πa/n) − cos(2πb/n)
    CosDiff { a: i64, b: i64 },
}

/// Exact sign (−1, 0, 1) of a [`TrigExpr`] at modulus n, via residue
/// reduction — no floating point.
pub fn trig_sign(n: i64, expr: TrigExpr) -> i32 {
    match expr {
        TrigExpr::Sin { a } => sin_sign_pi(2 * a, n),
        TrigExpr::CosDiff { a, b } => cos_diff_sign_pi(2 * a, 2 * b, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_sign_table() {
        assert_eq!(sin_sign_pi(0, 1), 0); // sin 0
        assert_eq!(sin_sign_pi(1, 2), 1); // sin π/2
        assert_eq!(sin_sign_pi(1, 1), 0); // sin π
        assert_eq!(sin_sign_pi(3, 2), -1); // sin 3π/2
        assert_eq!(sin_sign_pi(-1, 2), -1); // sin −π/2
        assert_eq!(sin_sign_pi(5, 2), 1); // periodicity
        assert_eq!(sin_sign_pi(1, 6), 1); // sin 30°
    }

    #[test]
    fn cos_sign_table() {
        assert_eq!(cos_sign_pi(0, 1), 1);
        assert_eq!(cos_sign_pi(1, 2), 0);
        assert_eq!(cos_sign_pi(1, 1), -1);
        assert_eq!(cos_sign_pi(2, 1), 1);
        assert_eq!(cos_sign_pi(2, 3), -1); // cos 120°
        assert_eq!(cos_sign_pi(-1, 3), 1); // cos −60°
    }

    #[test]
    fn diff_signs_match_floating_point() {
        for a in -8i64..=8 {
            for b in -8i64..=8 {
                for den in 1i64..=5 {
                    let fa = (std::f64::consts::PI * a as f64 / den as f64).cos();
                    let fb = (std::f64::consts::PI * b as f64 / den as f64).cos();
                    let want = if (fa - fb).abs() < 1e-12 {
                        0
                    } else if fa > fb {
                        1
                    } else {
                        -1
                    };
                    assert_eq!(cos_diff_sign_pi(a, b, den), want, "cos {a}/{den} {b}/{den}");
                    let fa = (std::f64::consts::PI * a as f64 / den as f64).sin();
                    let fb = (std::f64::consts::PI * b as f64 / den as f64).sin();
                    let want = if (fa - fb).abs() < 1e-12 {
                        0
                    } else if fa > fb {
                        1
                    } else {
                        -1
                    };
                    assert_eq!(sin_diff_sign_pi(a, b, den), want, "sin {a}/{den} {b}/{den}");
                }
            }
        }
    }

    #[test]
    fn inverse_mod_small() {
        assert_eq!(inverse_mod(4, 9), 7);
        assert_eq!(inverse_mod(2, 3), 2);
        assert_eq!(inverse_mod(3, 4), 3);
        assert_eq!(inverse_mod(1, 2), 1);
    }

    #[test]
    fn pinned_order_4_5() {
        assert_eq!(enumerate_ev(4, 5), vec![0, 7, 2, 5, 4, 3, 6, 1, 8]);
        let t = OrderingTable::new(4, 5).unwrap();
        assert_eq!(t.a, 7);
        assert_eq!(t.b, 3);
        assert_eq!(t.ev_max_exponent(), 8);
        assert_eq!(t.odd_min_exponent(), 8);
    }

    #[test]
    fn pinned_small_orders() {
        assert_eq!(enumerate_ev(1, 1), vec![0, 1]);
        assert_eq!(enumerate_ev(2, 1), vec![0, 2, 1]);
        assert_eq!(enumerate_ev(3, 1), vec![0, 3, 1, 2]);
        assert_eq!(enumerate_odd(2, 1), vec![1, 2, 0]);
    }

    #[test]
    fn sort_matches_closed_form_for_small_ranks() {
        for p in 1u64..=29 {
            for q in 1u64..=29 {
                if p + q > 30 || num::integer::gcd(p, q) != 1 {
                    continue;
                }
                assert_eq!(
                    enumerate_ev(p, q),
                    closed_form_ev(p, q),
                    "p={p}, q={q}"
                );
            }
        }
    }

    #[test]
    fn trig_sign_delegates_to_residues() {
        // sin(2π·1/4) = 1 > 0, sin(2π·2/4) = 0, sin(2π·3/4) < 0
        assert_eq!(trig_sign(4, TrigExpr::Sin { a: 1 }), 1);
        assert_eq!(trig_sign(4, TrigExpr::Sin { a: 2 }), 0);
        assert_eq!(trig_sign(4, TrigExpr::Sin { a: 3 }), -1);
        // cos(2π/5) − cos(4π/5) > 0, symmetric pair ties
        assert_eq!(trig_sign(5, TrigExpr::CosDiff { a: 1, b: 2 }), 1);
        assert_eq!(trig_sign(5, TrigExpr::CosDiff { a: 1, b: 4 }), 0);
        assert_eq!(trig_sign(5, TrigExpr::CosDiff { a: 2, b: 1 }), -1);
    }

    #[test]
    fn odd_min_closed_form() {
        for p in 1u64..=10 {
            for q in 1u64..=10 {
                if num::integer::gcd(p, q) != 1 {
                    continue;
                }
                let t = OrderingTable::new(p, q).unwrap();
                assert_eq!(t.odd_min().unwrap(), t.odd_min_exponent(), "p={p}, q={q}");
            }
        }
        assert_eq!(OrderingTable::new(4, 5).unwrap().odd_min().unwrap(), 8);
        assert_eq!(OrderingTable::new(2, 1).unwrap().odd_min().unwrap(), 1);
        assert_eq!(OrderingTable::new(1, 1).unwrap().odd_min().unwrap(), 1);
    }

    #[test]
    fn max_exponent_formulas() {
        for p in 1u64..=10 {
            for q in 1u64..=10 {
                if num::integer::gcd(p, q) != 1 {
                    continue;
                }
                let t = OrderingTable::new(p, q).unwrap();
                let n = t.n;
                if n % 2 == 0 {
                    assert_eq!(t.ev_max_exponent(), n / 2, "p={p}, q={q}");
                } else {
                    let expect =
                        (-(t.a as i64) * ((n as i64 - 1) / 2)).rem_euclid(n as i64) as usize;
                    assert_eq!(t.ev_max_exponent(), expect, "p={p}, q={q}");
                }
            }
        }
    }

    #[test]
    fn order_is_total_and_antisymmetric() {
        for (p, q) in [(2u64, 1u64), (4, 5), (3, 4), (5, 2)] {
            let n = (p + q) as usize;
            for j in 0..n {
                for k in 0..n {
                    let c = compare_ev(p, q, j, k);
                    if j == k {
                        assert_eq!(c, Ordering::Equal);
                    } else {
                        assert_ne!(c, Ordering::Equal, "distinct exponents must compare");
                        assert_eq!(compare_ev(p, q, k, j), c.reverse());
                        assert_eq!(compare_odd(p, q, j, k), c.reverse());
                    }
                }
            }
        }
    }

    #[test]
    fn positions_invert_the_order() {
        let t = OrderingTable::new(4, 5).unwrap();
        for (i, &j) in t.ev.iter().enumerate() {
            assert_eq!(t.pos_ev[j], i);
        }
        for (i, &j) in t.odd.iter().enumerate() {
            assert_eq!(t.pos_odd[j], i);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Uniformly picks a coprime pair with 2 ≤ p + q ≤ 40.
        fn arb_coprime() -> impl Strategy<Value = (u64, u64)> {
            (2u64..=40, 1u64..=39).prop_map(|(n, k)| {
                let candidates: Vec<u64> = (1..n)
                    .filter(|&p| crate::check_coprime(p, n - p).is_ok())
                    .collect();
                let p = candidates[(k as usize - 1) % candidates.len()];
                (p, n - p)
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn orders_are_inverse_permutations((p, q) in arb_coprime()) {
                let t = OrderingTable::new(p, q).unwrap();
                let mut seen = vec![false; t.n];
                for &j in &t.ev {
                    prop_assert!(!seen[j]);
                    seen[j] = true;
                }
                for (i, &j) in t.ev.iter().enumerate() {
                    prop_assert_eq!(t.pos_ev[j], i);
                    prop_assert_eq!(t.odd[t.n - 1 - i], j);
                }
                prop_assert_eq!((t.a as u64 * p) % (p + q), 1);
            }

            #[test]
            fn comparisons_are_consistent_total_orders((p, q) in arb_coprime()) {
                let n = (p + q) as usize;
                for j in 0..n {
                    for k in 0..n {
                        let ev = compare_ev(p, q, j, k);
                        let odd = compare_odd(p, q, j, k);
                        prop_assert_eq!(ev, compare_ev(p, q, k, j).reverse());
                        prop_assert_eq!(odd, ev.reverse());
                        prop_assert_eq!(ev == Ordering::Equal, j == k);
                    }
                }
            }
        }
    }
}
