//! The integer index calculus behind the Stokes-map columns: in/out
//! counting functions, their run extrema, the branch test, the c-maps with
//! their arc-intersection characterizations, the membership trichotomy, and
//! the sector ladder k_min/k_mid/k_max.
//!
//! Everything here is exact integer arithmetic on i64; all fractions such
//! as qk/(p+q) are compared via cross-multiplication.

use crate::conventions::{Bracket, ConventionSet};
use crate::{check_coprime, Error, Result};
use serde::{Deserialize, Serialize};

/// Which of the two alternating families a quantity belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Ev,
    Odd,
}

impl Parity {
    pub fn of_level(level: usize) -> Parity {
        if level % 2 == 0 {
            Parity::Ev
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Ev => Parity::Odd,
            Parity::Odd => Parity::Ev,
        }
    }
}

fn floor_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// The three membership cases of the junction classification.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrichotomyCase {
    I,
    II,
    III,
}

/// Exact index tables for one coprime (p, q) under a fixed convention set.
/// All functions are total on the window [−(p+q), 2(p+q)], which covers
/// every index the run-extrema bounds can reach.
#[derive(Clone, Debug)]
pub struct IndexProfile {
    pub p: u64,
    pub q: u64,
    pub n: i64,
    pub conv: ConventionSet,
}

impl IndexProfile {
    pub fn new(p: u64, q: u64, conv: ConventionSet) -> Result<Self> {
        check_coprime(p, q)?;
        Ok(IndexProfile {
            p,
            q,
            n: (p + q) as i64,
            conv,
        })
    }

    pub fn window(&self) -> std::ops::RangeInclusive<i64> {
        -self.n..=2 * self.n
    }

    fn bracket(&self, which: Bracket, num: i64, den: i64) -> i64 {
        match which {
            Bracket::Floor => floor_div(num, den),
            Bracket::Ceil => ceil_div(num, den),
        }
    }

    /// Count of incoming half-integer hits: bracket of qk/(p+q) + 1/2.
    pub fn ev_in(&self, k: i64) -> i64 {
        let q = self.q as i64;
        self.bracket(self.conv.ev_in_bracket, 2 * q * k + self.n, 2 * self.n)
    }

    pub fn ev_out(&self, k: i64) -> i64 {
        k - self.ev_in(k)
    }

    /// Bracket of qk/(p+q).
    pub fn odd_in(&self, k: i64) -> i64 {
        let q = self.q as i64;
        self.bracket(self.conv.odd_in_bracket, q * k, self.n)
    }

    /// Defined by the difference k − 1 − odd_in(k); the printed closed form
    /// disagrees at small k and is not used.
    pub fn odd_out(&self, k: i64) -> i64 {
        k - 1 - self.odd_in(k)
    }

    pub fn in_val(&self, parity: Parity, k: i64) -> i64 {
        match parity {
            Parity::Ev => self.ev_in(k),
            Parity::Odd => self.odd_in(k),
        }
    }

    pub fn out_val(&self, parity: Parity, k: i64) -> i64 {
        match parity {
            Parity::Ev => self.ev_out(k),
            Parity::Odd => self.odd_out(k),
        }
    }

    /// Branch test: true iff the half-open interval (qk/(p+q) − 1/2,
    /// qk/(p+q)] contains no natural number. The half-open reading is the
    /// ε→0⁺ limit of the shifted-interval characterization and is the
    /// unique one under which interval_empty(k) ⟺ ev_in(k) = odd_in(k)+1
    /// holds at rounding ties (p+q even).
    pub fn interval_empty(&self, k: i64) -> bool {
        let q = self.q as i64;
        let m_min = if self.conv.nat_contains_zero { 0 } else { 1 };
        // Largest integer m with m ≤ qk/n; it is the only candidate.
        let m = floor_div(q * k, self.n);
        let in_interval = 2 * self.n * m > 2 * q * k - self.n;
        !(m >= m_min && in_interval)
    }

    /// Start of the constant in-run through k: the walk ends naturally
    /// (every in-value run is finite) and stays inside the window, which
    /// the assert guards.
    pub fn min_in(&self, parity: Parity, k: i64) -> i64 {
        let v = self.in_val(parity, k);
        let mut k2 = k;
        while self.in_val(parity, k2 - 1) == v {
            k2 -= 1;
            assert!(k2 > -self.n, "in-run walked past the index window");
        }
        k2
    }

    /// End of the constant out-run through k; natural run end, window
    /// guarded by the assert.
    pub fn max_out(&self, parity: Parity, k: i64) -> i64 {
        let v = self.out_val(parity, k);
        let mut k2 = k;
        while self.out_val(parity, k2 + 1) == v {
            k2 += 1;
            assert!(k2 < 2 * self.n, "out-run walked past the index window");
        }
        k2
    }

    pub fn run_extrema(&self, parity: Parity, k: i64) -> (i64, i64) {
        (self.min_in(parity, k), self.max_out(parity, k))
    }

    /// (in(k) mod q, out(k) mod p) for the requested parity.
    pub fn c_map(&self, parity: Parity, k: i64) -> (i64, i64) {
        (
            self.in_val(parity, k).rem_euclid(self.q as i64),
            self.out_val(parity, k).rem_euclid(self.p as i64),
        )
    }

    /// Arc-intersection characterization of the in-value: the unique
    /// integer m whose target arc robustly meets the rotated arc of k, all
    /// reduced to an integer window. For the ev parity the window is
    /// m ∈ (qk/n − 1/2, qk/n + 1/2], for the odd parity (qk/n − 1, qk/n].
    /// Errors if the window does not contain exactly one integer.
    pub fn oracle_in(&self, parity: Parity, k: i64) -> Result<i64> {
        let q = self.q as i64;
        let n = self.n;
        let sat = |m: i64| -> bool {
            match parity {
                Parity::Ev => 2 * q * k - n < 2 * m * n && 2 * m * n <= 2 * q * k + n,
                Parity::Odd => q * k - n < m * n && m * n <= q * k,
            }
        };
        self.unique_window_hit(floor_div(q * k, n), sat)
    }

    /// Arc-intersection characterization of the out-value: windows
    /// m ∈ [pk/n − 1/2, pk/n + 1/2) (ev) and [pk/n − 1, pk/n) (odd).
    pub fn oracle_out(&self, parity: Parity, k: i64) -> Result<i64> {
        let p = self.p as i64;
        let n = self.n;
        let sat = |m: i64| -> bool {
            match parity {
                Parity::Ev => 2 * p * k - n <= 2 * m * n && 2 * m * n < 2 * p * k + n,
                Parity::Odd => p * k - n <= m * n && m * n < p * k,
            }
        };
        self.unique_window_hit(floor_div(p * k, n), sat)
    }

    fn unique_window_hit(&self, center: i64, sat: impl Fn(i64) -> bool) -> Result<i64> {
        let hits: Vec<i64> = (center - 2..=center + 2).filter(|&m| sat(m)).collect();
        match hits.as_slice() {
            [m] => Ok(*m),
            _ => Err(Error::Numeric(format!(
                "arc window hit {} integers instead of one",
                hits.len()
            ))),
        }
    }

    /// Classifies k by the position of k/(p+q) inside the length-1/q window
    /// centered (half-open) on ev_in(k)/q: the first 1/(p+q) of the window
    /// is case I, the last 1/(p+q) is case III, the middle is case II.
    /// Requires p > q, the standing assumption of the junction analysis.
    pub fn trichotomy(&self, k: i64) -> Result<TrichotomyCase> {
        if self.p <= self.q {
            return Err(Error::Unsupported(
                "trichotomy requires p > q".into(),
            ));
        }
        let q = self.q as i64;
        let m = self.ev_in(k);
        // position u/(2nq) of k/n inside [m/q − 1/(2q), m/q + 1/(2q))
        let u = 2 * q * k - 2 * self.n * m + self.n;
        debug_assert!((0..2 * self.n).contains(&u));
        Ok(if u < 2 * q {
            TrichotomyCase::I
        } else if u >= 2 * self.n - 2 * q {
            TrichotomyCase::III
        } else {
            TrichotomyCase::II
        })
    }

    /// Aligned text rendering of the four tables on [0, p+q−1].
    pub fn table_text(&self) -> String {
        let mut s = String::new();
        let cols: Vec<i64> = (0..self.n).collect();
        let row = |name: &str, f: &dyn Fn(i64) -> i64| -> String {
            let vals: Vec<String> = cols.iter().map(|&k| format!("{:>3}", f(k))).collect();
            format!("{:<8}{}\n", name, vals.join(" "))
        };
        s.push_str(&row("k", &|k| k));
        s.push_str(&row("ev_in", &|k| self.ev_in(k)));
        s.push_str(&row("ev_out", &|k| self.ev_out(k)));
        s.push_str(&row("odd_in", &|k| self.odd_in(k)));
        s.push_str(&row("odd_out", &|k| self.odd_out(k)));
        s
    }

    /// Machine-readable tables document.
    pub fn table_document(&self) -> serde_json::Value {
        let ks: Vec<i64> = (0..self.n).collect();
        serde_json::json!({
            "p": self.p,
            "q": self.q,
            "k": ks,
            "ev_in": ks.iter().map(|&k| self.ev_in(k)).collect::<Vec<_>>(),
            "ev_out": ks.iter().map(|&k| self.ev_out(k)).collect::<Vec<_>>(),
            "odd_in": ks.iter().map(|&k| self.odd_in(k)).collect::<Vec<_>>(),
            "odd_out": ks.iter().map(|&k| self.odd_out(k)).collect::<Vec<_>>(),
        })
    }
}

/// Sector ladder (k_min, k_mid, k_max) for the m-th junction, defined for
/// p > q and m ∈ [0, q−1].
pub fn sector_indices(p: u64, q: u64, m: u64) -> Result<(i64, i64, i64)> {
    check_coprime(p, q)?;
    if p <= q {
        return Err(Error::Unsupported(
            "sector ladder requires p > q".into(),
        ));
    }
    if m >= q {
        return Err(Error::Parse(format!("sector index m={m} out of [0, {})", q)));
    }
    let (n, q, m) = ((p + q) as i64, q as i64, m as i64);
    let k_min = ceil_div(m * n, q);
    let k_mid = ceil_div((2 * m + 1) * n, 2 * q);
    let k_max = ceil_div((m + 1) * n, q) - 1;
    Ok((k_min, k_mid, k_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(p: u64, q: u64) -> IndexProfile {
        IndexProfile::new(p, q, ConventionSet::default()).unwrap()
    }

    fn coprime_pairs(max_n: u64) -> Vec<(u64, u64)> {
        let mut v = Vec::new();
        for p in 1..max_n {
            for q in 1..max_n {
                if p + q <= max_n && num::integer::gcd(p, q) == 1 {
                    v.push((p, q));
                }
            }
        }
        v
    }

    #[test]
    fn tables_4_5() {
        let pr = profile(4, 5);
        let ev_in: Vec<i64> = (0..9).map(|k| pr.ev_in(k)).collect();
        let ev_out: Vec<i64> = (0..9).map(|k| pr.ev_out(k)).collect();
        let odd_in: Vec<i64> = (0..9).map(|k| pr.odd_in(k)).collect();
        let odd_out: Vec<i64> = (0..9).map(|k| pr.odd_out(k)).collect();
        assert_eq!(ev_in, vec![0, 1, 1, 2, 2, 3, 3, 4, 4]);
        assert_eq!(ev_out, vec![0, 0, 1, 1, 2, 2, 3, 3, 4]);
        assert_eq!(odd_in, vec![0, 0, 1, 1, 2, 2, 3, 3, 4]);
        assert_eq!(odd_out, vec![-1, 0, 0, 1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn interval_empty_examples() {
        let pr = profile(4, 5);
        assert!(pr.interval_empty(1));
        assert!(!pr.interval_empty(2));
        assert!(!pr.interval_empty(0));
    }

    #[test]
    fn run_extrema_examples() {
        let pr = profile(2, 1);
        assert_eq!(pr.min_in(Parity::Odd, 1), 0);
        assert_eq!(pr.max_out(Parity::Odd, 2), 3);
        let pr = profile(1, 1);
        assert_eq!(pr.max_out(Parity::Ev, 0), 1);
    }

    #[test]
    fn c_map_examples() {
        let pr = profile(4, 3);
        let ms: Vec<i64> = (0..7).map(|k| pr.c_map(Parity::Ev, k).0).collect();
        let ns: Vec<i64> = (0..7).map(|k| pr.c_map(Parity::Ev, k).1).collect();
        assert_eq!(ms, vec![0, 0, 1, 1, 2, 2, 0]);
        assert_eq!(ns, vec![0, 1, 1, 2, 2, 3, 3]);
        let pr = profile(2, 1);
        assert_eq!(pr.c_map(Parity::Odd, 1), (0, 0));
        for (p, q) in coprime_pairs(10) {
            assert_eq!(profile(p, q).c_map(Parity::Ev, 0), (0, 0));
        }
    }

    #[test]
    fn trichotomy_examples() {
        assert_eq!(profile(4, 3).trichotomy(1).unwrap(), TrichotomyCase::III);
        assert_eq!(profile(4, 1).trichotomy(0).unwrap(), TrichotomyCase::II);
        assert_eq!(profile(5, 2).trichotomy(0).unwrap(), TrichotomyCase::II);
        assert!(profile(2, 3).trichotomy(0).is_err());
    }

    #[test]
    fn sector_ladders() {
        assert_eq!(sector_indices(4, 1, 0).unwrap(), (0, 3, 4));
        assert_eq!(sector_indices(5, 2, 0).unwrap(), (0, 2, 3));
        assert_eq!(sector_indices(5, 2, 1).unwrap(), (4, 6, 6));
        assert!(sector_indices(2, 3, 0).is_err());
        assert!(sector_indices(5, 2, 2).is_err());
    }

    #[test]
    fn sector_gaps() {
        // The junction spans (the `s` of each gluing block, including the
        // wraparound ones) are always at least 2, and identity ranges of
        // both parities are nonempty.
        for (p, q) in coprime_pairs(14) {
            if p <= q {
                continue;
            }
            let n = (p + q) as i64;
            let mut prev: Option<(i64, i64)> = None; // (k_mid, k_max)
            let mut first = (0, 0, 0);
            for m in 0..q {
                let (k_min, k_mid, k_max) = sector_indices(p, q, m).unwrap();
                assert!(k_min + 1 <= k_mid && k_mid <= k_max, "({p},{q}) m={m}");
                if let Some((pm_mid, pm_max)) = prev {
                    assert!(k_mid - pm_max >= 2, "({p},{q}) m={m} even span");
                    assert!(k_min - pm_mid + 1 >= 2, "({p},{q}) m={m} odd span");
                } else {
                    first = (k_min, k_mid, k_max);
                }
                prev = Some((k_mid, k_max));
            }
            let (last_mid, last_max) = prev.unwrap();
            assert_eq!(last_max, n - 1, "({p},{q}) final sector ends at n-1");
            assert!(first.1 + n - last_max >= 2, "({p},{q}) even wrap span");
            assert!(first.0 + n - last_mid + 1 >= 2, "({p},{q}) odd wrap span");
        }
    }

    #[test]
    fn identities_and_ranges() {
        for (p, q) in coprime_pairs(16) {
            let pr = profile(p, q);
            let n = pr.n;
            let mut prev = [i64::MIN; 4];
            for k in pr.window() {
                assert_eq!(pr.ev_in(k) + pr.ev_out(k), k);
                assert_eq!(pr.odd_in(k) + pr.odd_out(k), k - 1);
                let cur = [pr.ev_in(k), pr.ev_out(k), pr.odd_in(k), pr.odd_out(k)];
                for (c, pv) in cur.iter().zip(prev.iter()) {
                    assert!(c >= pv, "monotone ({p},{q}) k={k}");
                }
                prev = cur;
                if (0..n).contains(&k) {
                    assert!((0..=q as i64).contains(&pr.ev_in(k)));
                    assert!((0..=p as i64).contains(&pr.ev_out(k)));
                    assert!((0..q as i64).contains(&pr.odd_in(k)));
                    assert!((-1..p as i64).contains(&pr.odd_out(k)));
                }
            }
        }
    }

    #[test]
    fn interval_equivalence_and_oracles() {
        for (p, q) in coprime_pairs(16) {
            let pr = profile(p, q);
            for k in 0..pr.n {
                assert_eq!(
                    pr.interval_empty(k),
                    pr.ev_in(k) == pr.odd_in(k) + 1,
                    "({p},{q}) k={k}"
                );
                assert_eq!(pr.oracle_in(Parity::Ev, k).unwrap(), pr.ev_in(k));
                assert_eq!(pr.oracle_out(Parity::Ev, k).unwrap(), pr.ev_out(k));
                assert_eq!(pr.oracle_in(Parity::Odd, k).unwrap(), pr.odd_in(k));
                assert_eq!(pr.oracle_out(Parity::Odd, k).unwrap(), pr.odd_out(k));
            }
        }
    }

    #[test]
    fn ev_out_fibers_and_injectivity() {
        for (p, q) in coprime_pairs(13) {
            let pr = profile(p, q);
            let mut fiber = std::collections::HashMap::new();
            let mut pairs = std::collections::HashSet::new();
            for k in 0..pr.n {
                *fiber.entry(pr.c_map(Parity::Ev, k).1).or_insert(0) += 1;
                pairs.insert(pr.c_map(Parity::Ev, k));
            }
            if p > q {
                for (&v, &c) in &fiber {
                    assert!(c <= 2, "({p},{q}) out-value {v} hit {c} times");
                }
            }
            if p != 1 && q != 1 {
                assert_eq!(pairs.len() as i64, pr.n, "({p},{q}) c_map injective");
            }
        }
    }

    #[test]
    fn trichotomy_exclusive_and_total() {
        for (p, q) in coprime_pairs(16) {
            if p <= q {
                continue;
            }
            let pr = profile(p, q);
            for k in 0..pr.n {
                // constructor returns exactly one case; just exercise it
                pr.trichotomy(k).unwrap();
            }
        }
    }

    #[test]
    fn ceil_floor_helpers() {
        assert_eq!(floor_div(-3, 2), -2);
        assert_eq!(ceil_div(-3, 2), -1);
        assert_eq!(ceil_div(3, 2), 2);
    }

    #[test]
    fn run_extrema_natural_ends() {
        // the out-run through (1,3)'s jump anchor 3 ends at 6, not at the
        // old clipped value 5 (the clip made the explicit monodromy
        // singular); the in-run below 0 ends where the in-value drops
        let pr = IndexProfile::new(1, 3, ConventionSet::default()).unwrap();
        assert_eq!(pr.max_out(Parity::Ev, 3), 6);
        let pr = IndexProfile::new(3, 1, ConventionSet::default()).unwrap();
        assert_eq!(pr.min_in(Parity::Ev, 0), -2);
        assert_eq!(pr.in_val(Parity::Ev, -2), 0);
        assert_eq!(pr.in_val(Parity::Ev, -3), -1);
    }
}
