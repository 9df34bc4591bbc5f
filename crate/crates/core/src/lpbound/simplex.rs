// Dense tableau simplex for covering-type programs
//
//     min 1·x   s.t.  a_i·x >= b_i  (or = b_i),  x >= 0
//
// solved through the dual  max b·y  s.t.  A^T y <= 1,  y_i >= 0 on inequality
// rows (equality rows get a free variable split in two). The all-slack basis
// of the dual is feasible, so no phase 1 is needed, and adding a primal row
// is adding a dual column, which keeps the current basis feasible.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, FromPrimitive, Signed, ToPrimitive, Zero};

use crate::ratio::Rational;

/// Arithmetic the tableau runs on. Operations return `None` on overflow.
pub(crate) trait Scalar: Clone + Debug {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Option<Self>;
    fn to_rational(&self) -> Rational;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn compare(&self, o: &Self) -> Ordering;
}

pub(crate) type Small = Ratio<i128>;

impl Scalar for Small {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
    fn from_rational(r: &Rational) -> Option<Self> {
        Some(Ratio::new(r.numer().to_i128()?, r.denom().to_i128()?))
    }
    fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn compare(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn compare(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }
}

pub(crate) const FLOAT_TOL: f64 = 1e-9;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Option<Self> {
        r.to_f64()
    }
    fn to_rational(&self) -> Rational {
        Rational::from_f64(*self).unwrap_or_else(Zero::zero)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn is_zero(&self) -> bool {
        self.abs() <= FLOAT_TOL
    }
    fn is_pos(&self) -> bool {
        *self > FLOAT_TOL
    }
    fn is_neg(&self) -> bool {
        *self < -FLOAT_TOL
    }
    fn compare(&self, o: &Self) -> Ordering {
        self.partial_cmp(o).unwrap_or(Ordering::Equal)
    }
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum SimplexError {
    Overflow,
    /// The dual is unbounded, so the covering program is infeasible.
    Unbounded,
}

type Step<T> = std::result::Result<T, SimplexError>;

fn ov<T>(v: Option<T>) -> Step<T> {
    v.ok_or(SimplexError::Overflow)
}

/// A dual column: which primal row it belongs to and with which sign.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ColumnMeta {
    pub row: usize,
    pub negated: bool,
}

pub(crate) struct DualTableau<S> {
    m: usize,
    // rows of the tableau; columns 0..m are slacks, then structural columns
    t: Vec<Vec<S>>,
    rhs: Vec<S>,
    obj: Vec<S>,
    value: S,
    basis: Vec<usize>,
    pub cols: Vec<ColumnMeta>,
    bland: bool,
    degenerate_streak: usize,
    pub pivots: usize,
}

impl<S: Scalar> DualTableau<S> {
    /// `m` primal variables, all with unit cost.
    pub fn new(m: usize) -> Self {
        let t = (0..m)
            .map(|i| (0..m).map(|j| S::from_i64((i == j) as i64)).collect())
            .collect();
        DualTableau {
            m,
            t,
            rhs: vec![S::from_i64(1); m],
            obj: vec![S::zero(); m],
            value: S::zero(),
            basis: (0..m).collect(),
            cols: Vec::new(),
            bland: false,
            degenerate_streak: 0,
            pivots: 0,
        }
    }

    /// Appends the dual column of a primal row with sparse coefficients
    /// `coeffs` (variable index, value) and right-hand side `b`.
    pub fn add_column(&mut self, meta: ColumnMeta, coeffs: &[(usize, S)], b: &S) -> Step<()> {
        let sign = |v: &S| -> Step<S> {
            if meta.negated {
                ov(S::zero().sub(v))
            } else {
                Ok(v.clone())
            }
        };
        let b = sign(b)?;
        // current column = B^-1 a, and B^-1 sits in the slack block
        for i in 0..self.m {
            let mut acc = S::zero();
            for (e, a) in coeffs {
                let binv = &self.t[i][*e];
                if !binv.is_zero() {
                    acc = ov(acc.add(&ov(binv.mul(&sign(a)?))?))?;
                }
            }
            self.t[i].push(acc);
        }
        let mut r = S::zero();
        for (e, a) in coeffs {
            if !self.obj[*e].is_zero() {
                r = ov(r.add(&ov(self.obj[*e].mul(&sign(a)?))?))?;
            }
        }
        self.obj.push(ov(r.sub(&b))?);
        self.cols.push(meta);
        Ok(())
    }

    fn choose_entering(&self) -> Option<usize> {
        if self.bland {
            return (0..self.obj.len()).find(|&j| self.obj[j].is_neg());
        }
        let mut best: Option<usize> = None;
        for j in 0..self.obj.len() {
            if self.obj[j].is_neg()
                && best.is_none_or(|b| self.obj[j].compare(&self.obj[b]) == Ordering::Less)
            {
                best = Some(j);
            }
        }
        best
    }

    fn choose_leaving(&self, c: usize) -> Step<Option<usize>> {
        let mut best: Option<(usize, S)> = None;
        for i in 0..self.m {
            let a = &self.t[i][c];
            if !a.is_pos() {
                continue;
            }
            let ratio = ov(self.rhs[i].div(a))?;
            let better = match &best {
                None => true,
                Some((bi, br)) => match ratio.compare(br) {
                    Ordering::Less => true,
                    Ordering::Equal => self.basis[i] < self.basis[*bi],
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((i, ratio));
            }
        }
        Ok(best.map(|(i, _)| i))
    }

    fn pivot(&mut self, r: usize, c: usize) -> Step<()> {
        let p = self.t[r][c].clone();
        let width = self.t[r].len();
        for j in 0..width {
            if !self.t[r][j].is_zero() {
                self.t[r][j] = ov(self.t[r][j].div(&p))?;
            }
        }
        self.rhs[r] = ov(self.rhs[r].div(&p))?;
        let prow = self.t[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.m {
            if i == r || self.t[i][c].is_zero() {
                continue;
            }
            let f = self.t[i][c].clone();
            for (cell, p) in self.t[i][..width].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *cell = ov(cell.sub(&ov(f.mul(p))?))?;
                }
            }
            self.rhs[i] = ov(self.rhs[i].sub(&ov(f.mul(&prhs))?))?;
        }
        let f = self.obj[c].clone();
        if !f.is_zero() {
            for (cell, p) in self.obj[..width].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *cell = ov(cell.sub(&ov(f.mul(p))?))?;
                }
            }
            self.value = ov(self.value.sub(&ov(f.mul(&prhs))?))?;
        }
        self.basis[r] = c;
        self.pivots += 1;
        Ok(())
    }

    /// Pivots to optimality. Dantzig's rule, switching permanently to
    /// Bland's rule after a long run of degenerate pivots.
    pub fn optimize(&mut self) -> Step<()> {
        while let Some(c) = self.choose_entering() {
            let Some(r) = self.choose_leaving(c)? else {
                return Err(SimplexError::Unbounded);
            };
            if self.rhs[r].is_zero() {
                self.degenerate_streak += 1;
                if self.degenerate_streak > 2 * self.m + 10 {
                    self.bland = true;
                }
            } else {
                self.degenerate_streak = 0;
            }
            self.pivot(r, c)?;
        }
        Ok(())
    }

    /// Primal solution: the reduced costs of the slack columns.
    pub fn primal(&self) -> Vec<S> {
        self.obj[..self.m].to_vec()
    }

    /// Dual values per structural column.
    pub fn dual(&self) -> Vec<S> {
        let mut y = vec![S::zero(); self.cols.len()];
        for (i, &b) in self.basis.iter().enumerate() {
            if b >= self.m {
                y[b - self.m] = self.rhs[i].clone();
            }
        }
        y
    }

    pub fn value(&self) -> S {
        self.value.clone()
    }
}
