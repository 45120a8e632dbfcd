//! Exact linear algebra over the Gaussian rationals Q(i).
//!
//! Scalars are pairs of `num::BigRational` (kept reduced with positive
//! denominator by the backing crate). Elimination cores run fraction-free
//! (Bareiss) over Z[i] after clearing denominators, so coefficient growth
//! stays polynomially bounded; results are converted back to reduced
//! rationals. Characteristic polynomials use the division-free
//! Samuelson–Berkowitz recurrence, and similarity of matrices is decided by
//! invariant factors (Smith normal form of xI − A over Q(i)[x]).

use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rat = BigRational;

fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact Gaussian rational re + im·i.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Gaussian {
    pub re: Rat,
    pub im: Rat,
}

impl Gaussian {
    pub fn new(re: Rat, im: Rat) -> Self {
        Gaussian { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Gaussian::new(rat_int(n), Rat::zero())
    }

    /// Builds re = num/den exactly; den must be nonzero.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Gaussian::new(
            Rat::new(BigInt::from(num), BigInt::from(den)),
            Rat::zero(),
        ))
    }

    pub fn from_rat(re: Rat) -> Self {
        Gaussian::new(re, Rat::zero())
    }

    pub fn zero() -> Self {
        Gaussian::new(Rat::zero(), Rat::zero())
    }

    pub fn one() -> Self {
        Gaussian::new(Rat::one(), Rat::zero())
    }

    pub fn i() -> Self {
        Gaussian::new(Rat::zero(), Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gaussian::new(self.re.clone(), -self.im.clone())
    }

    /// |z|² as a rational.
    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Gaussian::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn div(&self, other: &Gaussian) -> Result<Self> {
        Ok(self.clone() * other.inv()?)
    }

    /// Floating approximation, used only at the geometry boundary.
    pub fn to_f64(&self) -> (f64, f64) {
        fn r2f(r: &Rat) -> f64 {
            let n = r.numer();
            let d = r.denom();
            // Good enough for the magnitudes this crate produces.
            let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
            let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
            nf / df
        }
        (r2f(&self.re), r2f(&self.im))
    }
}

impl Add for Gaussian {
    type Output = Gaussian;
    fn add(self, o: Gaussian) -> Gaussian {
        Gaussian::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Gaussian {
    type Output = Gaussian;
    fn sub(self, o: Gaussian) -> Gaussian {
        Gaussian::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Gaussian {
    type Output = Gaussian;
    fn mul(self, o: Gaussian) -> Gaussian {
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        Gaussian::new(re, im)
    }
}

impl Neg for Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        Gaussian::new(-self.re, -self.im)
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

// ---------------------------------------------------------------------------
// Gaussian integers, used only inside the fraction-free elimination core.
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Debug)]
struct GInt {
    re: BigInt,
    im: BigInt,
}

impl GInt {
    fn one() -> Self {
        GInt {
            re: BigInt::one(),
            im: BigInt::zero(),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, o: &GInt) -> GInt {
        GInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn sub(&self, o: &GInt) -> GInt {
        GInt {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    /// Exact division; Bareiss guarantees divisibility whenever called.
    fn exact_div(&self, d: &GInt) -> GInt {
        let n = &d.re * &d.re + &d.im * &d.im;
        debug_assert!(!n.is_zero());
        let re = &self.re * &d.re + &self.im * &d.im;
        let im = &self.im * &d.re - &self.re * &d.im;
        debug_assert!((&re % &n).is_zero() && (&im % &n).is_zero());
        GInt {
            re: re / &n,
            im: im / n,
        }
    }

    fn to_gaussian_over(&self, den: &BigInt) -> Gaussian {
        Gaussian::new(
            Rat::new(self.re.clone(), den.clone()),
            Rat::new(self.im.clone(), den.clone()),
        )
    }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// Dense row-major matrix over Q(i). Subspaces are represented throughout
/// as explicit column bases (an n×0 matrix is the zero subspace of C^n).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Gaussian>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Gaussian::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, Gaussian::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Gaussian) -> Self {
        let mut m = Matrix::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Gaussian>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Integer-entry convenience constructor, mostly for tests and fixtures.
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&n| Gaussian::from_int(n)).collect())
                .collect(),
        )
        .expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Gaussian {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Gaussian) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(self.rows)
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, o: &Matrix) -> Result<Matrix> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Matrix::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).clone();
                    out.set(i, j, cur + a.clone() * b.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &Matrix) -> Result<Matrix> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::DimensionMismatch("add".into()));
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).clone() + o.get(i, j).clone()
        }))
    }

    pub fn sub(&self, o: &Matrix) -> Result<Matrix> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::DimensionMismatch("sub".into()));
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).clone() - o.get(i, j).clone()
        }))
    }

    pub fn scale(&self, s: &Gaussian) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).clone() * s.clone()
        })
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&(-Gaussian::one()))
    }

    /// Matrix power by repeated multiplication (square matrices only).
    pub fn pow(&self, e: u64) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("pow of non-square".into()));
        }
        let mut acc = Matrix::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn hstack(&self, o: &Matrix) -> Result<Matrix> {
        if self.rows != o.rows {
            return Err(Error::DimensionMismatch("hstack".into()));
        }
        Ok(Matrix::from_fn(self.rows, self.cols + o.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                o.get(i, j - self.cols).clone()
            }
        }))
    }

    pub fn column(&self, j: usize) -> Matrix {
        Matrix::from_fn(self.rows, 1, |i, _| self.get(i, j).clone())
    }

    /// The contiguous column slice [start, start + count).
    pub fn columns(&self, start: usize, count: usize) -> Matrix {
        assert!(start + count <= self.cols, "column slice out of range");
        Matrix::from_fn(self.rows, count, |i, j| self.get(i, start + j).clone())
    }

    pub fn from_columns(cols: &[Matrix]) -> Result<Matrix> {
        if cols.is_empty() {
            return Ok(Matrix::zero(0, 0));
        }
        let n = cols[0].rows;
        let mut out = Matrix::zero(n, 0);
        for c in cols {
            out = out.hstack(c)?;
        }
        Ok(out)
    }

    /// Copies `block` into self with its (0,0) at (at_row, at_col).
    pub fn put_block(&mut self, at_row: usize, at_col: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(at_row + i, at_col + j, block.get(i, j).clone());
            }
        }
    }

    /// Adds `block` (entry-wise) into self at the given offset.
    pub fn add_block(&mut self, at_row: usize, at_col: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let cur = self.get(at_row + i, at_col + j).clone();
                self.set(at_row + i, at_col + j, cur + block.get(i, j).clone());
            }
        }
    }

    pub fn block_diagonal(blocks: &[Matrix]) -> Matrix {
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zero(rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.put_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// (rows, pivot column indices): fully reduced row echelon form over Q(i).
    /// The elimination itself is fraction-free over Z[i]; the normalization
    /// to reduced rationals happens once at the end.
    fn rref(&self) -> (Vec<Vec<Gaussian>>, Vec<usize>) {
        // Clear denominators row by row; scaling rows changes neither the
        // row space's RREF nor pivot columns.
        let mut int_rows: Vec<Vec<GInt>> = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut l = BigInt::one();
            for j in 0..self.cols {
                let g = self.get(i, j);
                l = l.lcm(g.re.denom());
                l = l.lcm(g.im.denom());
            }
            let row = (0..self.cols)
                .map(|j| {
                    let g = self.get(i, j);
                    GInt {
                        re: g.re.numer() * (&l / g.re.denom()),
                        im: g.im.numer() * (&l / g.im.denom()),
                    }
                })
                .collect();
            int_rows.push(row);
        }

        // Bareiss fraction-free forward elimination with column pivoting.
        let mut pivots: Vec<usize> = Vec::new();
        let mut prev = GInt::one();
        let mut rank = 0usize;
        for col in 0..self.cols {
            let Some(pr) = (rank..self.rows).find(|&r| !int_rows[r][col].is_zero()) else {
                continue;
            };
            int_rows.swap(rank, pr);
            let piv = int_rows[rank][col].clone();
            for r in 0..self.rows {
                if r == rank || int_rows[r][col].is_zero() {
                    // Still rescale untouched rows below so the Bareiss
                    // denominators stay consistent.
                    if r > rank {
                        for j in 0..self.cols {
                            let v = int_rows[r][j].mul(&piv).exact_div(&prev);
                            int_rows[r][j] = v;
                        }
                    }
                    continue;
                }
                if r < rank {
                    continue; // back-substitution happens over Q(i) below
                }
                let factor = int_rows[r][col].clone();
                for j in 0..self.cols {
                    let v = int_rows[r][j]
                        .mul(&piv)
                        .sub(&int_rows[rank][j].mul(&factor))
                        .exact_div(&prev);
                    int_rows[r][j] = v;
                }
            }
            prev = piv;
            pivots.push(col);
            rank += 1;
            if rank == self.rows {
                break;
            }
        }

        // Convert the echelon (first `rank` rows) to rationals, then reduce
        // upwards to reach RREF with unit pivots.
        let mut rows: Vec<Vec<Gaussian>> = int_rows
            .iter()
            .take(rank)
            .map(|r| {
                r.iter()
                    .map(|g| g.to_gaussian_over(&BigInt::one()))
                    .collect()
            })
            .collect();
        for (ri, &pc) in pivots.iter().enumerate() {
            let inv = rows[ri][pc].inv().expect("pivot nonzero");
            for j in 0..self.cols {
                rows[ri][j] = rows[ri][j].clone() * inv.clone();
            }
        }
        for ri in (0..rank).rev() {
            let pc = pivots[ri];
            for up in 0..ri {
                let f = rows[up][pc].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let v = rows[up][j].clone() - f.clone() * rows[ri][j].clone();
                    rows[up][j] = v;
                }
            }
        }
        (rows, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Exact determinant (fraction-free; zero for rank-deficient input).
    /// The empty 0×0 determinant is 1.
    pub fn det(&self) -> Result<Gaussian> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("det of non-square".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Gaussian::one());
        }
        // Clear denominators globally so det scales by a known factor.
        let mut den = BigInt::one();
        for g in &self.data {
            den = den.lcm(g.re.denom());
            den = den.lcm(g.im.denom());
        }
        let mut m: Vec<Vec<GInt>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let g = self.get(i, j);
                        GInt {
                            re: g.re.numer() * (&den / g.re.denom()),
                            im: g.im.numer() * (&den / g.im.denom()),
                        }
                    })
                    .collect()
            })
            .collect();
        let mut sign = false;
        let mut prev = GInt::one();
        for k in 0..n {
            let Some(pr) = (k..n).find(|&r| !m[r][k].is_zero()) else {
                return Ok(Gaussian::zero());
            };
            if pr != k {
                m.swap(k, pr);
                sign = !sign;
            }
            let piv = m[k][k].clone();
            for r in k + 1..n {
                let factor = m[r][k].clone();
                for j in k..n {
                    let v = m[r][j].mul(&piv).sub(&m[k][j].mul(&factor)).exact_div(&prev);
                    m[r][j] = v;
                }
            }
            prev = piv;
        }
        // Bareiss: the last pivot is det of the integer matrix.
        let mut d = m[n - 1][n - 1].to_gaussian_over(&BigInt::one());
        if sign {
            d = -d;
        }
        // Undo the den^n scaling.
        let scale = Gaussian::from_rat(Rat::new(BigInt::one(), num::pow::pow(den, n)));
        Ok(d * scale)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of non-square".into()));
        }
        let n = self.rows;
        let aug = self.hstack(&Matrix::identity(n))?;
        let (rows, pivots) = aug.rref();
        if pivots.len() < n || pivots.iter().take(n).enumerate().any(|(i, &p)| p != i) {
            return Err(Error::Singular("inverse of rank-deficient matrix".into()));
        }
        Ok(Matrix::from_fn(n, n, |i, j| rows[i][n + j].clone()))
    }

    /// Column basis of the kernel {x : Mx = 0}, canonical (free variables in
    /// increasing column order, each set to 1).
    pub fn kernel(&self) -> Matrix {
        let (rows, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zero(self.cols, free.len());
        for (fi, &fc) in free.iter().enumerate() {
            out.set(fc, fi, Gaussian::one());
            for (ri, &pc) in pivots.iter().enumerate() {
                out.set(pc, fi, -rows[ri][fc].clone());
            }
        }
        out
    }

    /// Canonical column basis of the column space (RREF of the transpose,
    /// transposed back). Coordinate subspaces come out as unit vectors.
    pub fn column_space(&self) -> Matrix {
        let (rows, _) = self.transpose().rref();
        let rank = rows.len();
        Matrix::from_fn(self.rows, rank, |i, j| rows[j][i].clone())
    }

    /// Monic characteristic polynomial det(xI − M), division-free
    /// (Samuelson–Berkowitz), lowest-degree coefficient first.
    pub fn charpoly(&self) -> Result<Poly> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("charpoly of non-square".into()));
        }
        let n = self.rows;
        // coefficients highest-first during the recurrence
        let mut p = vec![Gaussian::one()]; // charpoly of the empty matrix
        for r in 1..=n {
            let a = self.get(r - 1, r - 1).clone();
            // u_m = Row · B^m · Col for the leading (r-1)-block B
            let mut u: Vec<Gaussian> = Vec::new();
            if r >= 2 {
                let mut w: Vec<Gaussian> =
                    (0..r - 1).map(|i| self.get(i, r - 1).clone()).collect();
                for _ in 0..r - 1 {
                    let dot = (0..r - 1).fold(Gaussian::zero(), |acc, j| {
                        acc + self.get(r - 1, j).clone() * w[j].clone()
                    });
                    u.push(dot);
                    let next: Vec<Gaussian> = (0..r - 1)
                        .map(|i| {
                            (0..r - 1).fold(Gaussian::zero(), |acc, j| {
                                acc + self.get(i, j).clone() * w[j].clone()
                            })
                        })
                        .collect();
                    w = next;
                }
            }
            // p_r(x) = (x − a)·p_{r−1}(x) − Σ_k x^k Σ_j c_j u_{r−2−k−j}
            let mut next = vec![Gaussian::zero(); r + 1];
            for (idx, c) in p.iter().enumerate() {
                // c is the coefficient of x^{r-1-idx} in p_{r-1}
                next[idx] = next[idx].clone() + c.clone(); // times x
                next[idx + 1] = next[idx + 1].clone() - a.clone() * c.clone();
            }
            for k in 0..r.saturating_sub(1) {
                // coefficient of x^k: subtract Σ_j c_j u_{r-2-k-j}
                let mut s = Gaussian::zero();
                for (j, c) in p.iter().enumerate() {
                    let m = r - 2 - k;
                    if j <= m {
                        s = s + c.clone() * u[m - j].clone();
                    }
                }
                next[r - k] = next[r - k].clone() - s;
            }
            p = next;
        }
        p.reverse(); // lowest-first
        Ok(Poly::new(p))
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Polynomials over Q(i)
// ---------------------------------------------------------------------------

/// Dense polynomial, coefficient of x^k at index k; the zero polynomial is
/// the empty coefficient vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    c: Vec<Gaussian>,
}

impl Poly {
    pub fn new(mut c: Vec<Gaussian>) -> Self {
        while c.last().map(|x| x.is_zero()).unwrap_or(false) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(Gaussian::one())
    }

    pub fn constant(g: Gaussian) -> Self {
        Poly::new(vec![g])
    }

    pub fn x() -> Self {
        Poly::new(vec![Gaussian::zero(), Gaussian::one()])
    }

    /// x^n − c
    pub fn x_pow_minus(n: usize, c: Gaussian) -> Self {
        let mut v = vec![Gaussian::zero(); n + 1];
        v[0] = -c;
        v[n] = Gaussian::one();
        Poly::new(v)
    }

    pub fn coeffs(&self) -> &[Gaussian] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&Gaussian> {
        self.c.last()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let mut v = vec![Gaussian::zero(); n];
        for (i, x) in self.c.iter().enumerate() {
            v[i] = v[i].clone() + x.clone();
        }
        for (i, x) in o.c.iter().enumerate() {
            v[i] = v[i].clone() + x.clone();
        }
        Poly::new(v)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.c.iter().map(|x| -x.clone()).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![Gaussian::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                v[i + j] = v[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(v)
    }

    pub fn scale(&self, s: &Gaussian) -> Poly {
        Poly::new(self.c.iter().map(|x| x.clone() * s.clone()).collect())
    }

    /// Euclidean division by a nonzero divisor: (quotient, remainder).
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = d.leading().unwrap().inv()?;
        let mut rem = self.clone();
        let mut quo = vec![
            Gaussian::zero();
            self.c.len().saturating_sub(d.c.len()).saturating_add(1)
        ];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let f = rem.leading().unwrap().clone() * lead_inv.clone();
            let shift = rd - dd;
            quo[shift] = f.clone();
            // rem -= f x^shift d
            let mut v = rem.c.clone();
            for (j, b) in d.c.iter().enumerate() {
                v[shift + j] = v[shift + j].clone() - f.clone() * b.clone();
            }
            rem = Poly::new(v);
        }
        Ok((Poly::new(quo), rem))
    }

    pub fn monic(&self) -> Result<Poly> {
        let l = self.leading().ok_or(Error::DivisionByZero)?;
        Ok(self.scale(&l.inv()?))
    }

    /// Monic gcd by the Euclidean algorithm; gcd(0,0) = 0.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic().expect("nonzero")
        }
    }

    pub fn eval(&self, x: &Gaussian) -> Gaussian {
        let mut acc = Gaussian::zero();
        for c in self.c.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({})", c)?,
                1 => write!(f, "({})x", c)?,
                _ => write!(f, "({})x^{}", c, k)?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Subspace operations and similarity
// ---------------------------------------------------------------------------

/// Canonical column basis of (col A) ∩ (col B); both must live in the same
/// ambient C^n. Returned as an n×d matrix (d = intersection dimension).
pub fn subspace_intersection(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(
            "intersection of subspaces of different ambient spaces".into(),
        ));
    }
    if a.cols() == 0 || b.cols() == 0 {
        return Ok(Matrix::zero(a.rows(), 0));
    }
    // Kernel of [A | −B]; the A-part of each kernel vector maps into A's
    // columns and lands in the intersection.
    let stacked = a.hstack(&b.neg())?;
    let k = stacked.kernel();
    let xa = Matrix::from_fn(a.cols(), k.cols(), |i, j| k.get(i, j).clone());
    let vecs = a.mul(&xa)?;
    Ok(vecs.column_space())
}

/// dim(col A + col B)
pub fn subspace_sum_dim(a: &Matrix, b: &Matrix) -> Result<usize> {
    Ok(a.hstack(b)?.rank())
}

/// True iff col A = col B as subspaces.
pub fn subspace_eq(a: &Matrix, b: &Matrix) -> Result<bool> {
    let ra = a.rank();
    let rb = b.rank();
    Ok(ra == rb && subspace_sum_dim(a, b)? == ra)
}

/// Invariant factors (nonunit, monic, each dividing the next) of xI − M.
pub fn invariant_factors(m: &Matrix) -> Result<Vec<Poly>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("invariant factors".into()));
    }
    let n = m.rows();
    let mut a: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mij = Poly::constant(-m.get(i, j).clone());
                    if i == j {
                        Poly::x().add(&mij)
                    } else {
                        mij
                    }
                })
                .collect()
        })
        .collect();
    smith_diagonal(&mut a);
    let mut out: Vec<Poly> = (0..n)
        .map(|t| a[t][t].monic().expect("xI - M has full rank over Q(i)[x]"))
        .filter(|p| p.degree() != Some(0))
        .collect();
    out.sort_by_key(|p| p.degree());
    Ok(out)
}

/// In-place Smith reduction of a square polynomial matrix over the
/// Euclidean domain Q(i)[x]. Only the diagonal is meaningful afterwards.
fn smith_diagonal(a: &mut Vec<Vec<Poly>>) {
    let n = a.len();
    for t in 0..n {
        'outer: loop {
            // pick the minimal-degree nonzero entry in the trailing block
            let mut best: Option<(usize, usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if let Some(d) = a[i][j].degree() {
                        if best.map(|(bd, _, _)| d < bd).unwrap_or(true) {
                            best = Some((d, i, j));
                        }
                    }
                }
            }
            let Some((_, bi, bj)) = best else {
                break; // all-zero trailing block
            };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            // clear column t below the pivot
            let mut dirty = false;
            for i in t + 1..n {
                if a[i][t].is_zero() {
                    continue;
                }
                let (q, r) = a[i][t].divrem(&a[t][t]).expect("pivot nonzero");
                for j in t..n {
                    let v = a[i][j].sub(&q.mul(&a[t][j]));
                    a[i][j] = v;
                }
                if !r.is_zero() {
                    dirty = true;
                }
            }
            // clear row t right of the pivot
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let (q, r) = a[t][j].divrem(&a[t][t]).expect("pivot nonzero");
                for i in t..n {
                    let v = a[i][j].sub(&a[i][t].mul(&q));
                    a[i][j] = v;
                }
                if !r.is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // pivot must divide the whole trailing block
            for i in t + 1..n {
                for j in t + 1..n {
                    if a[i][j].is_zero() {
                        continue;
                    }
                    let (_, r) = a[i][j].divrem(&a[t][t]).expect("pivot nonzero");
                    if !r.is_zero() {
                        // fold row i into row t and restart
                        for jj in t..n {
                            let v = a[t][jj].add(&a[i][jj]);
                            a[t][jj] = v;
                        }
                        continue 'outer;
                    }
                }
            }
            break;
        }
    }
}

/// Exact similarity test (same invariant factors of xI − M). Charpoly
/// equality is checked first as a cheap filter.
pub fn conjugacy_equivalent(a: &Matrix, b: &Matrix) -> Result<bool> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch("conjugacy of non-square".into()));
    }
    if a.rows() != b.rows() {
        return Ok(false);
    }
    let ca = a.charpoly()?;
    if ca != b.charpoly()? {
        return Ok(false);
    }
    // A squarefree characteristic polynomial forces the minimal polynomial
    // to equal it, so equal characteristic polynomials already decide
    // similarity and the invariant-factor computation can be skipped.
    let derivative = Poly::new(
        ca.coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * Gaussian::from_int(i as i64))
            .collect(),
    );
    if ca.gcd(&derivative).degree() == Some(0) {
        return Ok(true);
    }
    Ok(invariant_factors(a)? == invariant_factors(b)?)
}

// ---------------------------------------------------------------------------
// Shared matrix text format
// ---------------------------------------------------------------------------

fn quad_component(v: &serde_json::Value, what: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| {
        Error::Parse(format!(
            "matrix entry component `{what}` must be an integer (floats are rejected), got {v}"
        ))
    })
}

fn rat_to_pair(r: &Rat, what: &str) -> Result<(i64, i64)> {
    let n: i64 = r
        .numer()
        .try_into()
        .map_err(|_| Error::Parse(format!("{what} numerator exceeds the text format's integer range")))?;
    let d: i64 = r
        .denom()
        .try_into()
        .map_err(|_| Error::Parse(format!("{what} denominator exceeds the text format's integer range")))?;
    Ok((n, d))
}

/// Serializes a matrix to the shared exact text format: row-major entries,
/// each a quadruple (re_num, re_den, im_num, im_den) with positive
/// denominators.
pub fn matrix_to_document(m: &Matrix) -> Result<serde_json::Value> {
    let mut entries = Vec::with_capacity(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let g = m.get(i, j);
            let (rn, rd) = rat_to_pair(&g.re, "entry real part")?;
            let (in_, id) = rat_to_pair(&g.im, "entry imaginary part")?;
            entries.push(serde_json::json!([rn, rd, in_, id]));
        }
    }
    Ok(serde_json::json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "entries": entries,
    }))
}

/// Parses the shared exact text format; rejects floats, zero/negative
/// denominators, and shape mismatches.
pub fn matrix_from_document(v: &serde_json::Value) -> Result<Matrix> {
    let rows = v
        .get("rows")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| Error::Parse("missing integer field `rows`".into()))? as usize;
    let cols = v
        .get("cols")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| Error::Parse("missing integer field `cols`".into()))? as usize;
    let entries = v
        .get("entries")
        .and_then(|x| x.as_array())
        .ok_or_else(|| Error::Parse("missing array field `entries`".into()))?;
    if entries.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries for a {}x{} matrix, got {}",
            rows * cols,
            rows,
            cols,
            entries.len()
        )));
    }
    let mut m = Matrix::zero(rows, cols);
    for (idx, e) in entries.iter().enumerate() {
        let quad = e
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::Parse(format!("entry {idx} is not a quadruple")))?;
        let rn = quad_component(&quad[0], "re_num")?;
        let rd = quad_component(&quad[1], "re_den")?;
        let im_n = quad_component(&quad[2], "im_num")?;
        let im_d = quad_component(&quad[3], "im_den")?;
        if rd <= 0 || im_d <= 0 {
            return Err(Error::Parse(format!(
                "entry {idx} has a non-positive denominator"
            )));
        }
        let g = Gaussian::new(
            Rat::new(BigInt::from(rn), BigInt::from(rd)),
            Rat::new(BigInt::from(im_n), BigInt::from(im_d)),
        );
        m.set(idx / cols, idx % cols, g);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: i64) -> Gaussian {
        Gaussian::from_int(n)
    }

    #[test]
    fn gaussian_arithmetic_stays_reduced() {
        let a = Gaussian::from_ratio(2, 4).unwrap();
        assert_eq!(a.re.numer(), &BigInt::from(1));
        assert_eq!(a.re.denom(), &BigInt::from(2));
        let b = Gaussian::new(Rat::new(BigInt::from(1), BigInt::from(3)), Rat::one());
        let prod = a.clone() * b;
        // (1/2)(1/3 + i) = 1/6 + i/2
        assert_eq!(prod.re, Rat::new(BigInt::from(1), BigInt::from(6)));
        assert_eq!(prod.im, Rat::new(BigInt::from(1), BigInt::from(2)));
        assert!(prod.re.denom() > &BigInt::zero());
    }

    #[test]
    fn inverse_of_i_is_minus_i() {
        let inv = Gaussian::i().inv().unwrap();
        assert_eq!(inv, -Gaussian::i());
    }

    #[test]
    fn twisted_map_example() {
        // diag(T,T)·[[1, 1+T^{-1}],[0, -1]] with T = 2 gives [[2,3],[0,-2]]
        let t = g(2);
        let tinv = t.inv().unwrap();
        let m = Matrix::from_rows(vec![
            vec![g(1), g(1) + tinv],
            vec![g(0), g(-1)],
        ])
        .unwrap();
        let tw = Matrix::from_rows(vec![vec![t.clone(), g(0)], vec![g(0), t]]).unwrap();
        let prod = tw.mul(&m).unwrap();
        assert_eq!(prod, Matrix::from_ints(&[&[2, 3], &[0, -2]]));
    }

    #[test]
    fn det_and_rank_basics() {
        let m = Matrix::from_ints(&[&[1, 2], &[3, 4]]);
        assert_eq!(m.det().unwrap(), g(-2));
        assert_eq!(m.rank(), 2);
        let s = Matrix::from_ints(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.det().unwrap(), g(0));
        assert_eq!(s.rank(), 1);
        assert_eq!(Matrix::zero(0, 0).det().unwrap(), g(1));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix::from_ints(&[&[1, 1, 0], &[0, -1, 0], &[0, 1, 1]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).unwrap().is_identity());
        assert!(Matrix::from_ints(&[&[1, 2], &[2, 4]]).inverse().is_err());
    }

    #[test]
    fn kernel_and_rank_nullity() {
        let m = Matrix::from_ints(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = m.kernel();
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k).unwrap().is_zero_matrix());
        assert_eq!(m.rank() + k.cols(), m.cols());
    }

    #[test]
    fn charpoly_examples() {
        let p = Matrix::identity(2).charpoly().unwrap();
        // (x-1)^2 = 1 - 2x + x^2
        assert_eq!(p.coeffs(), &[g(1), g(-2), g(1)]);
        let p = Matrix::from_ints(&[&[0, 2], &[1, 0]]).charpoly().unwrap();
        assert_eq!(p.coeffs(), &[g(-2), g(0), g(1)]);
        let p = Matrix::from_ints(&[&[3, 2], &[-2, -1]]).charpoly().unwrap();
        assert_eq!(p.coeffs(), &[g(1), g(-2), g(1)]);
        assert_eq!(Matrix::zero(0, 0).charpoly().unwrap(), Poly::one());
    }

    #[test]
    fn charpoly_matches_det_at_points() {
        let m = Matrix::from_ints(&[&[1, 2, 0], &[0, 3, 1], &[5, 0, 1]]);
        let p = m.charpoly().unwrap();
        for x in [-2i64, 0, 1, 7] {
            let xi = Matrix::identity(3).scale(&g(x));
            let d = xi.sub(&m).unwrap().det().unwrap();
            assert_eq!(p.eval(&g(x)), d, "x = {x}");
        }
    }

    #[test]
    fn intersection_examples() {
        // span(e1) ∩ span(e1+e2) = 0 in C^2
        let a = Matrix::from_ints(&[&[1], &[0]]);
        let b = Matrix::from_ints(&[&[1], &[1]]);
        let i = subspace_intersection(&a, &b).unwrap();
        assert_eq!(i.cols(), 0);
        // span(e1, e2) ∩ span(e2, e3) = span(e2) in C^3
        let a = Matrix::from_ints(&[&[1, 0], &[0, 1], &[0, 0]]);
        let b = Matrix::from_ints(&[&[0, 0], &[1, 0], &[0, 1]]);
        let i = subspace_intersection(&a, &b).unwrap();
        assert_eq!(i, Matrix::from_ints(&[&[0], &[1], &[0]]));
    }

    #[test]
    fn intersection_dimension_formula() {
        let a = Matrix::from_ints(&[&[1, 0], &[1, 1], &[0, 2], &[0, 0]]);
        let b = Matrix::from_ints(&[&[1, 1], &[1, 0], &[0, 0], &[0, 1]]);
        let inter = subspace_intersection(&a, &b).unwrap();
        let sum = subspace_sum_dim(&a, &b).unwrap();
        assert_eq!(inter.cols() + sum, a.rank() + b.rank());
    }

    #[test]
    fn conjugacy_examples() {
        let jordan = Matrix::from_ints(&[&[1, 1], &[0, 1]]);
        assert!(!conjugacy_equivalent(&jordan, &Matrix::identity(2)).unwrap());
        let d23 = Matrix::from_ints(&[&[2, 0], &[0, 3]]);
        let d32 = Matrix::from_ints(&[&[3, 0], &[0, 2]]);
        assert!(conjugacy_equivalent(&d23, &d32).unwrap());
        // conjugation by an explicit invertible P
        let p = Matrix::from_ints(&[&[1, 2], &[1, 3]]);
        let m = Matrix::from_ints(&[&[5, 1], &[0, 5]]);
        let conj = p.mul(&m).unwrap().mul(&p.inverse().unwrap()).unwrap();
        assert!(conjugacy_equivalent(&m, &conj).unwrap());
        assert!(conjugacy_equivalent(&Matrix::zero(0, 0), &Matrix::zero(0, 0)).unwrap());
    }

    #[test]
    fn invariant_factors_of_identity() {
        let f = invariant_factors(&Matrix::identity(2)).unwrap();
        // two copies of (x - 1)
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].coeffs(), &[g(-1), g(1)]);
        assert_eq!(f[1].coeffs(), &[g(-1), g(1)]);
    }

    #[test]
    fn poly_divrem_gcd() {
        // (x^2 - 1) / (x - 1) = (x + 1), remainder 0
        let a = Poly::new(vec![g(-1), g(0), g(1)]);
        let b = Poly::new(vec![g(-1), g(1)]);
        let (q, r) = a.divrem(&b).unwrap();
        assert!(r.is_zero());
        assert_eq!(q.coeffs(), &[g(1), g(1)]);
        let gcd = a.gcd(&Poly::new(vec![g(1), g(1)]));
        assert_eq!(gcd.coeffs(), &[g(1), g(1)]);
    }

    #[test]
    fn document_roundtrip_and_rejections() {
        let m = Matrix::from_rows(vec![
            vec![Gaussian::from_ratio(1, 2).unwrap(), Gaussian::i()],
            vec![g(-3), g(0)],
        ])
        .unwrap();
        let doc = matrix_to_document(&m).unwrap();
        let back = matrix_from_document(&doc).unwrap();
        assert_eq!(m, back);

        let bad = serde_json::json!({"rows": 1, "cols": 1, "entries": [[0.5, 1, 0, 1]]});
        assert!(matrix_from_document(&bad).is_err());
        let bad = serde_json::json!({"rows": 1, "cols": 1, "entries": [[1, 0, 0, 1]]});
        assert!(matrix_from_document(&bad).is_err());
        let bad = serde_json::json!({"rows": 1, "cols": 1, "entries": [[1, -2, 0, 1]]});
        assert!(matrix_from_document(&bad).is_err());
        let bad = serde_json::json!({"rows": 2, "cols": 1, "entries": [[1, 1, 0, 1]]});
        assert!(matrix_from_document(&bad).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_gaussian() -> impl Strategy<Value = Gaussian> {
            (-6i64..=6, 1i64..=4, -6i64..=6, 1i64..=4).prop_map(|(rn, rd, im, id)| {
                Gaussian::from_ratio(rn, rd).unwrap() + Gaussian::i() * Gaussian::from_ratio(im, id).unwrap()
            })
        }

        fn arb_matrix(n: usize) -> impl Strategy<Value = Matrix> {
            proptest::collection::vec(arb_gaussian(), n * n)
                .prop_map(move |v| Matrix::from_fn(n, n, |i, j| v[i * n + j].clone()))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn det_is_multiplicative(a in arb_matrix(3), b in arb_matrix(3)) {
                let lhs = a.mul(&b).unwrap().det().unwrap();
                let rhs = a.det().unwrap() * b.det().unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn matrices_satisfy_their_charpoly(m in arb_matrix(3)) {
                let cp = m.charpoly().unwrap();
                let mut acc = Matrix::zero(3, 3);
                let mut pow = Matrix::identity(3);
                for c in cp.coeffs() {
                    acc = acc.add(&pow.scale(c)).unwrap();
                    pow = pow.mul(&m).unwrap();
                }
                prop_assert_eq!(acc, Matrix::zero(3, 3));
            }

            #[test]
            fn inverse_round_trips(m in arb_matrix(3)) {
                match m.inverse() {
                    Ok(inv) => {
                        prop_assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(3));
                        prop_assert_eq!(inv.mul(&m).unwrap(), Matrix::identity(3));
                    }
                    Err(_) => prop_assert!(m.det().unwrap().is_zero()),
                }
            }

            #[test]
            fn kernel_is_annihilated_and_complements_rank(m in arb_matrix(3)) {
                let k = m.kernel();
                prop_assert_eq!(k.cols(), 3 - m.rank());
                if k.cols() > 0 {
                    let image = m.mul(&k).unwrap();
                    prop_assert!((0..3).all(|i| (0..k.cols()).all(|j| image.get(i, j).is_zero())));
                }
            }

            #[test]
            fn document_round_trip(m in arb_matrix(2)) {
                let doc = matrix_to_document(&m).unwrap();
                prop_assert_eq!(matrix_from_document(&doc).unwrap(), m);
            }
        }
    }
}
