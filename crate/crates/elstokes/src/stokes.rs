//! Construction and cross-verification of the alternating family of slot
//! maps attached to a coprime pair (p, q) and a regular monodromy matrix:
//! the two three-term column formulas, the sector-by-sector block assembly,
//! the filtration splittings with their graded multipliers, and the two
//! monodromy realizations together with the identities relating them.

use crate::conventions::{ConventionSet, JumpAnchor, WrapTwist};
use crate::cyclotomic::OrderingTable;
use crate::indices::{sector_indices, IndexProfile, Parity};
use crate::linalg::{matrix_to_document, Gaussian, Matrix, Poly};
use crate::{check_coprime, Error, Result};

/// A regular monodromy datum: an invertible square matrix over Q(i).
/// The size r may be zero (the empty local system), in which case every
/// derived object is 0×0 and all identities hold vacuously.
#[derive(Clone, Debug)]
pub struct MonodromyPair {
    t: Matrix,
    t_inv: Matrix,
}

impl MonodromyPair {
    pub fn new(t: Matrix) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "monodromy matrix must be square, got {}x{}",
                t.rows(),
                t.cols()
            )));
        }
        let t_inv = t
            .inverse()
            .map_err(|_| Error::Singular("monodromy matrix is singular".into()))?;
        Ok(MonodromyPair { t, t_inv })
    }

    pub fn diagonal(entries: &[Gaussian]) -> Result<Self> {
        let r = entries.len();
        let mut m = Matrix::zero(r, r);
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        MonodromyPair::new(m)
    }

    pub fn r(&self) -> usize {
        self.t.rows()
    }

    pub fn t(&self) -> &Matrix {
        &self.t
    }

    /// T^s for any integer s.
    pub fn t_power(&self, s: i64) -> Matrix {
        let powered = if s >= 0 {
            self.t.pow(s as u64)
        } else {
            self.t_inv.pow((-s) as u64)
        };
        powered.expect("square matrix power")
    }
}

/// Reduces an absolute slot index to [0, p+q) and reports the twist power
/// the reduction acquires: under the inverse-up convention a descent by s
/// periods multiplies the passenger vector by T^s and an ascent by T^{−s};
/// the direct-up convention flips the sign.
pub fn wrap_index(n: i64, conv: ConventionSet, j: i64) -> (usize, i64) {
    let slot = j.rem_euclid(n);
    let periods_down = (j - slot) / n;
    let s = match conv.wrap_twist {
        WrapTwist::InverseUp => periods_down,
        WrapTwist::DirectUp => -periods_down,
    };
    (slot as usize, s)
}

/// One column of a slot map before wrapping: the input slot (possibly
/// outside [0, p+q)) and the signed output slots.
#[derive(Clone, Debug)]
struct Column {
    col_abs: i64,
    terms: Vec<(i64, i64)>,
}

fn materialize(n: i64, pair: &MonodromyPair, conv: ConventionSet, cols: &[Column]) -> Matrix {
    let r = pair.r();
    let dim = n as usize * r;
    let mut m = Matrix::zero(dim, dim);
    for c in cols {
        let (slot_c, s_c) = wrap_index(n, conv, c.col_abs);
        for &(row_abs, sign) in &c.terms {
            let (slot_r, s_r) = wrap_index(n, conv, row_abs);
            let mut blk = pair.t_power(s_r - s_c);
            if sign < 0 {
                blk = blk.neg();
            }
            m.add_block(slot_r * r, slot_c * r, &blk);
        }
    }
    m
}

fn sigma_columns(profile: &IndexProfile, from: Parity) -> Vec<Column> {
    let run_parity = from.flip();
    (0..profile.n)
        .map(|k| {
            let empty = profile.interval_empty(k);
            let three_term = match from {
                Parity::Ev => !empty,
                Parity::Odd => empty,
            };
            let terms = if three_term {
                let k_min = profile.min_in(run_parity, k);
                vec![
                    (k_min - 1, 1),
                    (profile.max_out(run_parity, k_min), -1),
                    (profile.max_out(run_parity, k) + 1, 1),
                ]
            } else {
                vec![(k, 1)]
            };
            Column { col_abs: k, terms }
        })
        .collect()
}

/// The map out of an even level, defined columnwise: the identity column
/// v⊗1_k where the branch interval at k misses the naturals, and otherwise
/// the three-term column built from the odd-parity run extrema.
pub fn sigma_ev_odd(p: u64, q: u64, pair: &MonodromyPair, conv: ConventionSet) -> Result<Matrix> {
    let profile = IndexProfile::new(p, q, conv)?;
    Ok(materialize(
        profile.n,
        pair,
        conv,
        &sigma_columns(&profile, Parity::Ev),
    ))
}

/// The map out of an odd level: three-term exactly where the branch
/// interval at k is empty, using the even-parity run extrema.
pub fn sigma_odd_ev(p: u64, q: u64, pair: &MonodromyPair, conv: ConventionSet) -> Result<Matrix> {
    let profile = IndexProfile::new(p, q, conv)?;
    Ok(materialize(
        profile.n,
        pair,
        conv,
        &sigma_columns(&profile, Parity::Odd),
    ))
}

/// Scalar junction block of size (s+1)×(s+1): identity first and last
/// columns, and e_0 − e_1 + e_{j+1} in between.
pub fn junction_matrix(s: usize) -> Matrix {
    let mut m = Matrix::zero(s + 1, s + 1);
    let one = Gaussian::one;
    m.set(0, 0, one());
    m.set(s, s, one());
    for j in 1..s {
        m.set(0, j, one());
        m.set(1, j, -one());
        m.set(j + 1, j, one());
    }
    m
}

fn junction_columns(base: i64, s: i64) -> Vec<Column> {
    (0..=s)
        .map(|j| {
            let terms = if j == 0 || j == s {
                vec![(base + j, 1)]
            } else {
                vec![(base, 1), (base + 1, -1), (base + j + 1, 1)]
            };
            Column {
                col_abs: base + j,
                terms,
            }
        })
        .collect()
}

/// Sector-by-sector assembly of the slot maps for p > q: identity columns
/// on the sector cores and junction blocks across the sector boundaries,
/// with the last junction wrapping around the period. For p = q = 1 the
/// sector structure is trivial and the direct column formula is returned;
/// other p ≤ q are outside the block construction's hypotheses.
pub fn sigma_blocks(
    p: u64,
    q: u64,
    pair: &MonodromyPair,
    from: Parity,
    conv: ConventionSet,
) -> Result<Matrix> {
    check_coprime(p, q)?;
    if p == 1 && q == 1 {
        return match from {
            Parity::Ev => sigma_ev_odd(p, q, pair, conv),
            Parity::Odd => sigma_odd_ev(p, q, pair, conv),
        };
    }
    if p <= q {
        return Err(Error::Unsupported(
            "block assembly requires p > q or p = q = 1".into(),
        ));
    }
    let n = (p + q) as i64;
    let ladders: Vec<(i64, i64, i64)> = (0..q)
        .map(|m| sector_indices(p, q, m))
        .collect::<Result<_>>()?;
    let mut cols: Vec<Option<Column>> = vec![None; n as usize];
    let mut place = |c: Column| {
        let slot = c.col_abs.rem_euclid(n) as usize;
        cols[slot] = Some(c);
    };
    match from {
        Parity::Ev => {
            for &(_, k_mid, k_max) in &ladders {
                for k in k_mid..=k_max {
                    place(Column {
                        col_abs: k,
                        terms: vec![(k, 1)],
                    });
                }
            }
            for m in 1..q as usize {
                let base = ladders[m - 1].2;
                let s = ladders[m].1 - base;
                junction_columns(base, s).into_iter().for_each(&mut place);
            }
            let base = ladders[q as usize - 1].2; // = n − 1
            let s = ladders[0].1 + n - base;
            junction_columns(base, s).into_iter().for_each(&mut place);
        }
        Parity::Odd => {
            for &(k_min, k_mid, _) in &ladders {
                for k in k_min..k_mid {
                    place(Column {
                        col_abs: k,
                        terms: vec![(k, 1)],
                    });
                }
            }
            for m in 1..q as usize {
                let base = ladders[m - 1].1 - 1;
                let s = ladders[m].0 - base;
                junction_columns(base, s).into_iter().for_each(&mut place);
            }
            let base = ladders[q as usize - 1].1 - 1;
            let s = n - base;
            junction_columns(base, s).into_iter().for_each(&mut place);
        }
    }
    let cols: Vec<Column> = cols
        .into_iter()
        .enumerate()
        .map(|(k, c)| c.ok_or_else(|| Error::Numeric(format!("assembly left column {k} empty"))))
        .collect::<Result<_>>()?;
    Ok(materialize(n, pair, conv, &cols))
}

/// The assembled family: 2q slot maps, the map with index 2q−1 carrying
/// the extra diagonal monodromy twist that closes the period.
#[derive(Clone, Debug)]
pub struct StokesDataSet {
    pub p: u64,
    pub q: u64,
    pub conv: ConventionSet,
    pub pair: MonodromyPair,
    /// maps[l] sends level l to level l+1 (mod 2q); even l carry the
    /// even-to-odd column formula, odd l the odd-to-even one.
    pub maps: Vec<Matrix>,
}

pub fn assemble(
    p: u64,
    q: u64,
    pair: &MonodromyPair,
    conv: ConventionSet,
) -> Result<StokesDataSet> {
    let s_eo = sigma_ev_odd(p, q, pair, conv)?;
    let s_oe = sigma_odd_ev(p, q, pair, conv)?;
    let n = (p + q) as usize;
    let twist = Matrix::block_diagonal(&vec![pair.t().clone(); n]);
    let twisted = twist.mul(&s_oe)?;
    let levels = 2 * q as usize;
    let maps = (0..levels)
        .map(|l| {
            if l % 2 == 0 {
                s_eo.clone()
            } else if l == levels - 1 {
                twisted.clone()
            } else {
                s_oe.clone()
            }
        })
        .collect();
    Ok(StokesDataSet {
        p,
        q,
        conv,
        pair: pair.clone(),
        maps,
    })
}

impl StokesDataSet {
    pub fn n(&self) -> usize {
        (self.p + self.q) as usize
    }

    pub fn r(&self) -> usize {
        self.pair.r()
    }

    pub fn levels(&self) -> usize {
        2 * self.q as usize
    }

    /// Decay order shared by every even level: entry j is the slot whose
    /// exponential dominates all later entries there. Odd levels carry the
    /// reversed order.
    pub fn ev_order(&self) -> Vec<usize> {
        OrderingTable::new(self.p, self.q)
            .expect("coprimality was validated at assembly")
            .ev
    }

    /// Rank of slot m in the decay order at the given level (0 = most
    /// dominant); adjacent levels reverse the ranking.
    pub fn level_rank(&self, level: usize, m: usize) -> usize {
        let table = OrderingTable::new(self.p, self.q).expect("coprimality was validated at assembly");
        let pos = table.pos_ev[m];
        if level % 2 == 0 {
            pos
        } else {
            self.n() - 1 - pos
        }
    }

    /// Filtration step j at a level: the span of the unit blocks of all
    /// slots whose rank at this level is ≤ j, columns listed by rank.
    /// Dimension (j+1)·r; step n−1 is the whole space.
    pub fn filtration(&self, level: usize, j: usize) -> Matrix {
        let (n, r) = (self.n(), self.r());
        let mut order = self.ev_order();
        if level % 2 == 1 {
            order.reverse();
        }
        let mut m = Matrix::zero(n * r, (j + 1) * r);
        for (rank, &slot) in order.iter().take(j + 1).enumerate() {
            for i in 0..r {
                m.set(slot * r + i, rank * r + i, Gaussian::one());
            }
        }
        m
    }

    /// The intersections U_m at one level, one per slot and listed in the
    /// shared even order: the level's own filtration step at the slot's rank
    /// against the incoming image of the previous level's step at the same
    /// slot (whose rank there is the mirror n−1−rank). The level-0 incoming
    /// map is the twisted closing map, making the family cyclic.
    pub fn opposedness_summands(&self, level: usize) -> Result<Vec<Matrix>> {
        let levels = self.levels();
        let prev = (level + levels - 1) % levels;
        let incoming = &self.maps[prev];
        self.ev_order()
            .iter()
            .map(|&m| {
                let own = self.filtration(level, self.level_rank(level, m));
                let image = incoming.mul(&self.filtration(prev, self.level_rank(prev, m)))?;
                crate::linalg::subspace_intersection(&own, &image)
            })
            .collect()
    }

    /// Concatenates the canonical bases of the U_k into the change-of-basis
    /// matrix B whose inverse is the splitting at this level. Errors if the
    /// summand dimensions are not all r or B fails to be invertible.
    pub fn splitting_basis(&self, level: usize) -> Result<Matrix> {
        let summands = self.opposedness_summands(level)?;
        let r = self.r();
        for (k, u) in summands.iter().enumerate() {
            if u.cols() != r {
                return Err(Error::DimensionMismatch(format!(
                    "level {level} summand {k} has dimension {} instead of {r}",
                    u.cols()
                )));
            }
        }
        let mut b = Matrix::zero(self.n() * r, 0);
        for u in &summands {
            b = b.hstack(u)?;
        }
        if !b.is_invertible() {
            return Err(Error::Singular(format!(
                "level {level} splitting basis is singular"
            )));
        }
        Ok(b)
    }

    /// Whether the splitting at each level refines the level's filtration.
    /// Basis blocks are listed in the shared even order, so at even levels
    /// step j must equal the span of the first j+1 blocks, and at odd levels
    /// (rank reversed) the span of the last j+1 blocks.
    pub fn splittings_filtered(&self) -> Result<bool> {
        let r = self.r();
        let n = self.n();
        for level in 0..self.levels() {
            let b = self.splitting_basis(level)?;
            for j in 0..n {
                let basis = if level % 2 == 0 {
                    b.columns(0, (j + 1) * r)
                } else {
                    b.columns((n - 1 - j) * r, (j + 1) * r)
                };
                if !crate::linalg::subspace_eq(&basis, &self.filtration(level, j))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The multipliers Σ_l = B_{l+1}^{−1} · S_l · B_l expressing each map
    /// in the split bases.
    pub fn graded_multipliers(&self) -> Result<Vec<Matrix>> {
        let levels = self.levels();
        let bases: Vec<Matrix> = (0..levels)
            .map(|l| self.splitting_basis(l))
            .collect::<Result<_>>()?;
        (0..levels)
            .map(|l| {
                let b_next_inv = bases[(l + 1) % levels].inverse()?;
                b_next_inv.mul(&self.maps[l])?.mul(&bases[l])
            })
            .collect()
    }

    pub fn monodromy_composition(&self) -> Matrix {
        let dim = self.n() * self.r();
        let mut m = Matrix::identity(dim);
        for s in &self.maps {
            m = s.mul(&m).expect("map dimensions agree");
        }
        m
    }

    /// det(S_{2q−1} ⋯ S_0) = (−1)^{q·r·(p+q)} · det(T)^{p+q}.
    pub fn det_identity_holds(&self) -> bool {
        let lhs = self.monodromy_composition().det().expect("square");
        let det_t = self.pair.t().det().expect("square");
        let mut rhs = gaussian_pow(&det_t, self.p + self.q);
        if (self.q * self.r() as u64 * (self.p + self.q)) % 2 == 1 {
            rhs = -rhs;
        }
        lhs == rhs
    }

    /// Serializable snapshot of the full data set. The filtration lists
    /// give one representative per level parity (all even levels share the
    /// same steps, as do all odd ones).
    pub fn document(&self) -> Result<serde_json::Value> {
        let n = self.n();
        let even: Vec<_> = (0..n)
            .map(|j| matrix_to_document(&self.filtration(0, j)))
            .collect::<Result<_>>()?;
        let odd: Vec<_> = (0..n)
            .map(|j| matrix_to_document(&self.filtration(1, j)))
            .collect::<Result<_>>()?;
        let maps: Vec<_> = self
            .maps
            .iter()
            .map(matrix_to_document)
            .collect::<Result<_>>()?;
        Ok(serde_json::json!({
            "p": self.p,
            "q": self.q,
            "r": self.r(),
            "monodromy": matrix_to_document(self.pair.t())?,
            "maps": maps,
            "decay_order_even": self.ev_order(),
            "filtrations": { "even": even, "odd": odd },
            "conventions": self.conv,
        }))
    }
}

fn gaussian_pow(g: &Gaussian, e: u64) -> Gaussian {
    let mut acc = Gaussian::one();
    for _ in 0..e {
        acc = acc * g.clone();
    }
    acc
}

/// Whether the r-blocked matrix is block upper (or lower) triangular.
pub fn is_block_triangular(m: &Matrix, r: usize, upper: bool) -> bool {
    if r == 0 {
        return true;
    }
    let nb = m.rows() / r;
    for bi in 0..nb {
        for bj in 0..nb {
            let zero_required = if upper { bi > bj } else { bi < bj };
            if zero_required {
                for i in 0..r {
                    for j in 0..r {
                        if !m.get(bi * r + i, bj * r + j).is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Whether every diagonal r-block of the matrix is invertible.
pub fn diagonal_blocks_invertible(m: &Matrix, r: usize) -> bool {
    if r == 0 {
        return true;
    }
    let nb = m.rows() / r;
    (0..nb).all(|b| {
        Matrix::from_fn(r, r, |i, j| m.get(b * r + i, b * r + j).clone()).is_invertible()
    })
}

/// The one-step unramified realization of the monodromy: identity columns
/// shifted by one slot where the even in-count stays constant, and a
/// three-term jump column where it increments. The jump column is anchored
/// at k or at k+1 according to the convention; the family is cyclic via
/// the wrap twist.
pub fn monodromy_explicit(
    p: u64,
    q: u64,
    pair: &MonodromyPair,
    conv: ConventionSet,
) -> Result<Matrix> {
    let profile = IndexProfile::new(p, q, conv)?;
    let cols: Vec<Column> = (0..profile.n)
        .map(|k| {
            let jump = profile.ev_in(k + 1) == profile.ev_in(k) + 1;
            let terms = if jump {
                let a = match conv.explicit_jump_anchor {
                    JumpAnchor::Anchored => k,
                    JumpAnchor::Shifted => k + 1,
                };
                let mo = profile.max_out(Parity::Ev, a);
                vec![(a, 1), (mo, -1), (mo + 1, 1)]
            } else {
                vec![(k + 1, 1)]
            };
            Column { col_abs: k, terms }
        })
        .collect();
    Ok(materialize(profile.n, pair, conv, &cols))
}

/// Whether the composed monodromy is conjugate to the (p+q)-th power of
/// the explicit one — the exact sense in which the two realizations agree.
pub fn monodromy_realizations_agree(data: &StokesDataSet) -> Result<bool> {
    let comp = data.monodromy_composition();
    let explicit = monodromy_explicit(data.p, data.q, &data.pair, data.conv)?;
    if !explicit.is_invertible() {
        return Ok(false);
    }
    crate::linalg::conjugacy_equivalent(&comp, &explicit.pow(data.p + data.q)?)
}

/// Exact spectral identity for diagonal monodromy: the characteristic
/// polynomial of the composed monodromy equals
/// (x−1)^{rq} · ∏_i (x^p − t_i^{p+q}).
/// Eigenvalues that are zero or roots of unity in Q(i) (the only ones are
/// ±1, ±i) are rejected: the identity's derivation needs the exponential
/// factors it encodes to stay pairwise distinct.
pub fn spectral_laplace_check(
    p: u64,
    q: u64,
    eigenvalues: &[Gaussian],
    conv: ConventionSet,
) -> Result<bool> {
    for t in eigenvalues {
        if t.is_zero() {
            return Err(Error::Singular("zero eigenvalue in spectral check".into()));
        }
        let units = [
            Gaussian::one(),
            -Gaussian::one(),
            Gaussian::i(),
            -Gaussian::i(),
        ];
        if units.contains(t) {
            return Err(Error::Unsupported(
                "spectral identity requires eigenvalues that are not roots of unity".into(),
            ));
        }
    }
    let pair = MonodromyPair::diagonal(eigenvalues)?;
    let data = assemble(p, q, &pair, conv)?;
    let actual = data.monodromy_composition().charpoly()?;
    let n = p + q;
    let mut expected = Poly::one();
    let x_minus_one = Poly::x_pow_minus(1, Gaussian::one());
    for _ in 0..(eigenvalues.len() as u64 * q) {
        expected = expected.mul(&x_minus_one);
    }
    for t in eigenvalues {
        expected = expected.mul(&Poly::x_pow_minus(p as usize, gaussian_pow(t, n)));
    }
    Ok(actual == expected)
}

/// Nilpotency profile (Jordan block sizes) of M at eigenvalue 1.
fn jordan_sizes_at_one(m: &Matrix) -> Vec<usize> {
    let dim = m.rows();
    let shifted = m.sub(&Matrix::identity(dim)).expect("square");
    let mut nullities = vec![0usize];
    let mut power = Matrix::identity(dim);
    loop {
        power = power.mul(&shifted).expect("square");
        let nullity = dim - power.rank();
        if nullity == *nullities.last().unwrap() {
            break;
        }
        nullities.push(nullity);
    }
    // blocks of size ≥ j: nullities[j] − nullities[j−1]
    let mut sizes = Vec::new();
    for j in 1..nullities.len() {
        let ge_j = nullities[j] - nullities[j - 1];
        let ge_next = if j + 1 < nullities.len() {
            nullities[j + 1] - nullities[j]
        } else {
            0
        };
        for _ in 0..ge_j - ge_next {
            sizes.push(j);
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// For p = 1 the composed monodromy's Jordan structure at eigenvalue 1 is
/// predicted from T's: every block of T at 1 grows by one, and rq − (number
/// of such blocks) fresh size-1 blocks appear. Returns None for p ≠ 1,
/// where no such shift law is claimed.
pub fn jordan_shift_check(
    p: u64,
    q: u64,
    pair: &MonodromyPair,
    conv: ConventionSet,
) -> Result<Option<bool>> {
    if p != 1 {
        return Ok(None);
    }
    let t_sizes = jordan_sizes_at_one(pair.t());
    let fresh = pair.r() * q as usize - t_sizes.len();
    let mut predicted: Vec<usize> = t_sizes.iter().map(|s| s + 1).collect();
    predicted.extend(std::iter::repeat(1).take(fresh));
    let comp = assemble(p, q, pair, conv)?.monodromy_composition();
    let actual = jordan_sizes_at_one(&comp);
    let mut predicted_sorted = predicted;
    predicted_sorted.sort_unstable_by(|a, b| b.cmp(a));
    Ok(Some(actual == predicted_sorted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::conjugacy_equivalent;

    fn conv() -> ConventionSet {
        ConventionSet::default()
    }

    fn scalar_pair(num: i64) -> MonodromyPair {
        MonodromyPair::new(Matrix::from_ints(&[&[num]])).unwrap()
    }

    fn rat(n: i64, d: i64) -> Gaussian {
        Gaussian::from_ratio(n, d).unwrap()
    }

    fn rows(r: &[&[Gaussian]]) -> Matrix {
        Matrix::from_rows(r.iter().map(|x| x.to_vec()).collect()).unwrap()
    }

    #[test]
    fn pair_rejects_singular_and_nonsquare() {
        assert!(MonodromyPair::new(Matrix::from_ints(&[&[0]])).is_err());
        assert!(MonodromyPair::new(Matrix::zero(2, 3)).is_err());
        assert!(MonodromyPair::new(Matrix::zero(0, 0)).is_ok());
    }

    #[test]
    fn wrap_index_twists() {
        let c = conv();
        assert_eq!(wrap_index(3, c, 1), (1, 0));
        assert_eq!(wrap_index(3, c, -1), (2, -1));
        assert_eq!(wrap_index(3, c, 3), (0, 1));
        assert_eq!(wrap_index(3, c, 7), (1, 2));
        let mut d = c;
        d.wrap_twist = WrapTwist::DirectUp;
        assert_eq!(wrap_index(3, d, -1), (2, 1));
        assert_eq!(wrap_index(3, d, 3), (0, -1));
    }

    #[test]
    fn sigma_2_1_pinned() {
        let pair = scalar_pair(2);
        let eo = sigma_ev_odd(2, 1, &pair, conv()).unwrap();
        let expect = rows(&[
            &[rat(-1, 1), rat(-1, 1), rat(0, 1)],
            &[rat(1, 1), rat(0, 1), rat(0, 1)],
            &[rat(1, 2), rat(3, 2), rat(1, 1)],
        ]);
        assert_eq!(eo, expect);
        let oe = sigma_odd_ev(2, 1, &pair, conv()).unwrap();
        let expect = Matrix::from_ints(&[&[1, 0, 2], &[0, 1, 1], &[0, 0, -1]]);
        assert_eq!(oe, expect);
    }

    #[test]
    fn sigma_1_2_pinned() {
        let pair = scalar_pair(2);
        let eo = sigma_ev_odd(1, 2, &pair, conv()).unwrap();
        let expect = rows(&[
            &[rat(-1, 1), rat(0, 1), rat(-2, 1)],
            &[rat(1, 1), rat(1, 1), rat(3, 1)],
            &[rat(1, 2), rat(0, 1), rat(0, 1)],
        ]);
        assert_eq!(eo, expect);
        let oe = sigma_odd_ev(1, 2, &pair, conv()).unwrap();
        let expect = Matrix::from_ints(&[&[1, 1, 0], &[0, -1, 0], &[0, 1, 1]]);
        assert_eq!(oe, expect);
    }

    #[test]
    fn sigma_1_1_pinned() {
        let pair = scalar_pair(2);
        let eo = sigma_ev_odd(1, 1, &pair, conv()).unwrap();
        let expect = rows(&[&[rat(-1, 1), rat(0, 1)], &[rat(3, 2), rat(1, 1)]]);
        assert_eq!(eo, expect);
        // the lower-left entry is Id + T^{-1}, not Id + T
        let oe = sigma_odd_ev(1, 1, &pair, conv()).unwrap();
        let expect = Matrix::from_ints(&[&[1, 3], &[0, -1]]);
        assert_eq!(oe, expect);
    }

    #[test]
    fn assemble_1_1_unit_monodromy() {
        let pair = scalar_pair(1);
        let data = assemble(1, 1, &pair, conv()).unwrap();
        assert_eq!(data.maps.len(), 2);
        assert_eq!(data.maps[0], Matrix::from_ints(&[&[-1, 0], &[2, 1]]));
        assert_eq!(data.maps[1], Matrix::from_ints(&[&[1, 2], &[0, -1]]));
        let comp = data.monodromy_composition();
        assert_eq!(comp, Matrix::from_ints(&[&[3, 2], &[-2, -1]]));
        let sq = Poly::x_pow_minus(1, Gaussian::one());
        assert_eq!(comp.charpoly().unwrap(), sq.mul(&sq));
        assert!(data.det_identity_holds());
    }

    #[test]
    fn composition_charpoly_2_1() {
        let pair = scalar_pair(2);
        let data = assemble(2, 1, &pair, conv()).unwrap();
        let comp = data.monodromy_composition();
        // (x − 1)(x² − 8)
        let expect = Poly::x_pow_minus(1, Gaussian::one())
            .mul(&Poly::x_pow_minus(2, Gaussian::from_int(8)));
        assert_eq!(comp.charpoly().unwrap(), expect);
        assert!(data.det_identity_holds());
    }

    #[test]
    fn explicit_2_1_pinned() {
        let pair = scalar_pair(2);
        let m = monodromy_explicit(2, 1, &pair, conv()).unwrap();
        let expect = Matrix::from_ints(&[&[0, 2, 2], &[1, 1, 0], &[0, -1, 0]]);
        assert_eq!(m, expect);
        // (x − 1)(x² − 2)
        let cp = Poly::x_pow_minus(1, Gaussian::one())
            .mul(&Poly::x_pow_minus(2, Gaussian::from_int(2)));
        assert_eq!(m.charpoly().unwrap(), cp);
    }

    #[test]
    fn explicit_4_5_columns() {
        let pair = scalar_pair(2);
        let m = monodromy_explicit(4, 5, &pair, conv()).unwrap();
        let col = |k: usize| m.column(k);
        let unit = |i: usize, v: i64| {
            let mut c = Matrix::zero(9, 1);
            c.set(i, 0, Gaussian::from_int(v));
            c
        };
        // k = 0 jumps: 1_0 − 1_1 + 1_2
        let expect = unit(0, 1).add(&unit(1, -1)).unwrap().add(&unit(2, 1)).unwrap();
        assert_eq!(col(0), expect);
        // k = 1 passes: 1_2
        assert_eq!(col(1), unit(2, 1));
        // k = 8 jumps with wrap: 1_8 − T·1_1 + T·1_2
        let expect = unit(8, 1).add(&unit(1, -2)).unwrap().add(&unit(2, 2)).unwrap();
        assert_eq!(col(8), expect);
    }

    #[test]
    fn explicit_shifted_variant_cancels_on_2_1() {
        let pair = scalar_pair(2);
        let mut shifted = conv();
        shifted.explicit_jump_anchor = JumpAnchor::Shifted;
        let m = monodromy_explicit(2, 1, &pair, shifted).unwrap();
        assert_ne!(m, monodromy_explicit(2, 1, &pair, conv()).unwrap());
        assert!(!m.is_invertible());
    }

    #[test]
    fn opposedness_and_multipliers_2_1() {
        let pair = scalar_pair(2);
        let data = assemble(2, 1, &pair, conv()).unwrap();
        for level in 0..2 {
            let summands = data.opposedness_summands(level).unwrap();
            assert_eq!(summands.len(), 3);
            for u in &summands {
                assert_eq!(u.cols(), 1);
            }
        }
        // canonical column-space bases of the summands, in the even order
        let b0 = data.splitting_basis(0).unwrap();
        let expect = rows(&[
            &[rat(1, 1), rat(1, 1), rat(0, 1)],
            &[rat(0, 1), rat(0, 1), rat(1, 1)],
            &[rat(0, 1), rat(-1, 2), rat(0, 1)],
        ]);
        assert_eq!(b0, expect);
        let b1 = data.splitting_basis(1).unwrap();
        let expect = rows(&[
            &[rat(1, 1), rat(0, 1), rat(0, 1)],
            &[rat(-1, 1), rat(0, 1), rat(1, 1)],
            &[rat(-1, 2), rat(1, 1), rat(0, 1)],
        ]);
        assert_eq!(b1, expect);
        assert!(data.splittings_filtered().unwrap());
        let mult = data.graded_multipliers().unwrap();
        let expect0 = rows(&[
            &[rat(-1, 1), rat(-1, 1), rat(-1, 1)],
            &[rat(0, 1), rat(-1, 2), rat(1, 1)],
            &[rat(0, 1), rat(0, 1), rat(-1, 1)],
        ]);
        let expect1 = Matrix::from_ints(&[&[2, 0, 0], &[-2, 4, 0], &[-3, 2, 2]]);
        assert_eq!(mult[0], expect0);
        assert_eq!(mult[1], expect1);
        assert!(is_block_triangular(&mult[0], 1, true));
        assert!(is_block_triangular(&mult[1], 1, false));
        assert!(diagonal_blocks_invertible(&mult[0], 1));
        assert!(diagonal_blocks_invertible(&mult[1], 1));
        // product of the multiplier determinants equals the composition's
        let det = mult[0].det().unwrap() * mult[1].det().unwrap();
        assert_eq!(det, data.monodromy_composition().det().unwrap());
    }

    #[test]
    fn splittings_hold_beyond_the_smallest_pairs() {
        let pair = scalar_pair(2);
        for (p, q) in [(3u64, 1u64), (1, 3), (4, 1), (1, 4), (5, 2), (3, 4)] {
            let data = assemble(p, q, &pair, conv()).unwrap();
            assert!(data.splittings_filtered().unwrap(), "({p},{q}) filtered");
            let mult = data.graded_multipliers().unwrap();
            for (l, m) in mult.iter().enumerate() {
                assert!(is_block_triangular(m, 1, l % 2 == 0), "({p},{q}) level {l}");
                assert!(diagonal_blocks_invertible(m, 1), "({p},{q}) level {l}");
            }
            assert!(data.det_identity_holds(), "({p},{q}) det");
        }
        let t2 = MonodromyPair::new(Matrix::from_ints(&[&[2, 0], &[1, 3]])).unwrap();
        let data = assemble(3, 1, &t2, conv()).unwrap();
        assert!(data.splittings_filtered().unwrap());
        for (l, m) in data.graded_multipliers().unwrap().iter().enumerate() {
            assert!(is_block_triangular(m, 2, l % 2 == 0));
            assert!(diagonal_blocks_invertible(m, 2));
        }
    }

    #[test]
    fn realizations_agree_when_one_index_function_has_long_runs() {
        let pair = scalar_pair(2);
        for (p, q) in [(1u64, 3u64), (1, 4), (3, 1), (4, 1)] {
            let data = assemble(p, q, &pair, conv()).unwrap();
            let explicit = monodromy_explicit(p, q, &pair, conv()).unwrap();
            assert!(explicit.is_invertible(), "({p},{q}) explicit invertible");
            assert!(
                monodromy_realizations_agree(&data).unwrap(),
                "({p},{q}) realizations"
            );
        }
    }

    #[test]
    fn multipliers_alternate_for_r_2() {
        let t = Matrix::from_ints(&[&[2, 1], &[0, 3]]);
        let pair = MonodromyPair::new(t).unwrap();
        let data = assemble(2, 3, &pair, conv()).unwrap();
        let mult = data.graded_multipliers().unwrap();
        assert_eq!(mult.len(), 6);
        for (l, m) in mult.iter().enumerate() {
            let upper = l % 2 == 0;
            assert!(is_block_triangular(m, 2, upper), "level {l}");
            assert!(diagonal_blocks_invertible(m, 2), "level {l}");
        }
        assert!(data.splittings_filtered().unwrap());
        assert!(data.det_identity_holds());
    }

    #[test]
    fn junction_matrix_pinned() {
        let expect = Matrix::from_ints(&[&[1, 1, 0], &[0, -1, 0], &[0, 1, 1]]);
        assert_eq!(junction_matrix(2), expect);
    }

    #[test]
    fn blocks_match_direct_columns() {
        let pair = scalar_pair(2);
        let t2 = Matrix::from_ints(&[&[2, 0], &[1, 3]]);
        let pair2 = MonodromyPair::new(t2).unwrap();
        for (p, q) in [(4u64, 1u64), (5, 2), (3, 2), (7, 2), (5, 4), (1, 1)] {
            for parity in [Parity::Ev, Parity::Odd] {
                let direct = match parity {
                    Parity::Ev => sigma_ev_odd(p, q, &pair, conv()).unwrap(),
                    Parity::Odd => sigma_odd_ev(p, q, &pair, conv()).unwrap(),
                };
                let blocks = sigma_blocks(p, q, &pair, parity, conv()).unwrap();
                assert_eq!(blocks, direct, "({p},{q}) {parity:?}");
                let direct2 = match parity {
                    Parity::Ev => sigma_ev_odd(p, q, &pair2, conv()).unwrap(),
                    Parity::Odd => sigma_odd_ev(p, q, &pair2, conv()).unwrap(),
                };
                let blocks2 = sigma_blocks(p, q, &pair2, parity, conv()).unwrap();
                assert_eq!(blocks2, direct2, "({p},{q}) {parity:?} r=2");
            }
        }
        assert!(sigma_blocks(2, 3, &pair, Parity::Ev, conv()).is_err());
        assert!(sigma_blocks(1, 2, &pair, Parity::Odd, conv()).is_err());
    }

    #[test]
    fn realizations_agree_small() {
        let pair = scalar_pair(2);
        for (p, q) in [(1u64, 1u64), (2, 1), (1, 2), (3, 2)] {
            let data = assemble(p, q, &pair, conv()).unwrap();
            assert!(
                monodromy_realizations_agree(&data).unwrap(),
                "({p},{q}) realizations"
            );
        }
    }

    #[test]
    fn spectral_identity_and_guards() {
        let two = Gaussian::from_int(2);
        let three = Gaussian::from_int(3);
        assert!(spectral_laplace_check(2, 1, &[two.clone()], conv()).unwrap());
        assert!(spectral_laplace_check(1, 2, &[two.clone()], conv()).unwrap());
        assert!(spectral_laplace_check(3, 2, &[two.clone()], conv()).unwrap());
        assert!(spectral_laplace_check(2, 1, &[two.clone(), three], conv()).unwrap());
        assert!(spectral_laplace_check(2, 1, &[Gaussian::one()], conv()).is_err());
        assert!(spectral_laplace_check(2, 1, &[Gaussian::i()], conv()).is_err());
        assert!(spectral_laplace_check(2, 1, &[Gaussian::zero()], conv()).is_err());
    }

    #[test]
    fn jordan_shift_examples() {
        // T = (1): one block of size 1 grows to size 2 on dimension 2
        let pair = scalar_pair(1);
        assert_eq!(jordan_shift_check(1, 1, &pair, conv()).unwrap(), Some(true));
        // T = J_2(1): {2} grows to {3} plus a fresh size-1 block, dim 4
        let j2 = MonodromyPair::new(Matrix::from_ints(&[&[1, 1], &[0, 1]])).unwrap();
        assert_eq!(jordan_shift_check(1, 1, &j2, conv()).unwrap(), Some(true));
        assert_eq!(jordan_shift_check(1, 2, &j2, conv()).unwrap(), Some(true));
        assert_eq!(jordan_shift_check(1, 2, &pair, conv()).unwrap(), Some(true));
        // skip for p ≠ 1
        assert_eq!(jordan_shift_check(2, 1, &pair, conv()).unwrap(), None);
    }

    #[test]
    fn jordan_sizes_helper() {
        let j2 = Matrix::from_ints(&[&[1, 1], &[0, 1]]);
        assert_eq!(jordan_sizes_at_one(&j2), vec![2]);
        let m = Matrix::block_diagonal(&[j2, Matrix::from_ints(&[&[5]])]);
        assert_eq!(jordan_sizes_at_one(&m), vec![2]);
        assert_eq!(jordan_sizes_at_one(&Matrix::identity(3)), vec![1, 1, 1]);
    }

    #[test]
    fn explicit_power_equals_composition_for_1_1() {
        // with T = (1) the square of the explicit realization IS the
        // composition, not merely conjugate to it
        let pair = scalar_pair(1);
        let data = assemble(1, 1, &pair, conv()).unwrap();
        let explicit = monodromy_explicit(1, 1, &pair, conv()).unwrap();
        let squared = explicit.pow(2).unwrap();
        assert_eq!(squared, data.monodromy_composition());
        assert!(conjugacy_equivalent(&squared, &data.monodromy_composition()).unwrap());
    }

    #[test]
    fn zero_rank_is_vacuous() {
        let pair = MonodromyPair::new(Matrix::zero(0, 0)).unwrap();
        let data = assemble(3, 2, &pair, conv()).unwrap();
        assert!(data.det_identity_holds());
        assert!(data.splittings_filtered().unwrap());
        assert!(monodromy_realizations_agree(&data).unwrap());
    }

    #[test]
    fn document_roundtrip_fields() {
        let pair = scalar_pair(2);
        let data = assemble(2, 1, &pair, conv()).unwrap();
        let doc = data.document().unwrap();
        assert_eq!(doc["p"], 2);
        assert_eq!(doc["q"], 1);
        assert_eq!(doc["r"], 1);
        assert_eq!(doc["maps"].as_array().unwrap().len(), 2);
        assert_eq!(doc["filtrations"]["even"].as_array().unwrap().len(), 3);
    }
}
