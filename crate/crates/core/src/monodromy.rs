//! Exact Stokes, connection and monodromy data from the sheet diagram of a covering.
//!
//! Everything here is integer / rational arithmetic; eigenvalues that are roots of
//! unity are carried symbolically as fractions of a full turn.

use crate::covering::{Covering, Cut};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

pub type Q = Ratio<i128>;

/// Dense rational matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Q>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged integer matrix");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Q::from_integer(v as i128);
            }
        }
        m
    }

    pub fn from_columns(cols: &[Vec<i64>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = Q::from_integer(v as i128);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Q) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..n {
                if r != col && !a[(r, col)].is_zero() {
                    let f = a[(r, col)];
                    for j in 0..n {
                        let (x, y) = (a[(col, j)], inv[(col, j)]);
                        a[(r, j)] -= f * x;
                        inv[(r, j)] -= f * y;
                    }
                }
            }
        }
        Some(inv)
    }

    /// Exact rank by row reduction.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| !a[(r, col)].is_zero()) else { continue };
            for j in 0..self.cols {
                a.data.swap(p * self.cols + j, rank * self.cols + j);
            }
            for r in 0..self.rows {
                if r != rank && !a[(r, col)].is_zero() {
                    let f = a[(r, col)] / a[(rank, col)];
                    for j in 0..self.cols {
                        let x = a[(rank, j)];
                        a[(r, j)] -= f * x;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Characteristic polynomial det(x − M), ascending coefficients (Faddeev–LeVerrier).
    pub fn char_poly(&self) -> Vec<Q> {
        let n = self.rows;
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            let mut next = self.mul(&m);
            for i in 0..n {
                next[(i, i)] += coeffs[n - k + 1];
            }
            m = next;
            let am = self.mul(&m);
            let tr: Q = (0..n).map(|i| am[(i, i)]).sum();
            coeffs[n - k] = -tr / Q::from_integer(k as i128);
        }
        coeffs
    }

    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        if !self.is_integer() {
            return None;
        }
        Some(
            (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self[(i, j)].to_integer() as i64).collect())
                .collect(),
        )
    }

    pub fn to_complex(&self) -> crate::linalg::CMat {
        crate::linalg::CMat::from_fn(self.rows, self.cols, |i, j| {
            let q = self[(i, j)];
            C64::new(*q.numer() as f64 / *q.denom() as f64, 0.0)
        })
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

impl std::ops::Sub for &QMat {
    type Output = QMat;
    fn sub(self, o: &QMat) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }
}

/// `exp(2πi·turn)` with `turn` reduced to [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UnitRoot {
    pub num: i64,
    pub den: i64,
}

impl UnitRoot {
    pub fn from_turn(t: Ratio<i64>) -> Self {
        let den = *t.denom();
        let num = t.numer().rem_euclid(den);
        let r = Ratio::new(num, den);
        Self { num: *r.numer(), den: *r.denom() }
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * self.num as f64 / self.den as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JordanBlock {
    pub eigenvalue: UnitRoot,
    pub size: usize,
}

/// Predicted spectrum of V: ±1/2 each `g + m` times, then `α/(n_i+1) − 1/2`.
pub fn predicted_spectrum(genus: usize, ramification: &[usize]) -> Vec<Ratio<i64>> {
    let m = ramification.len().saturating_sub(1);
    let half = Ratio::new(1, 2);
    let mut mu = Vec::new();
    for _ in 0..genus + m {
        mu.push(half);
        mu.push(-half);
    }
    for &ni in ramification {
        for alpha in 1..=ni as i64 {
            mu.push(Ratio::new(alpha, ni as i64 + 1) - half);
        }
    }
    mu
}

/// Jordan structure of M₀ predicted from the genus and the ramification over ∞.
pub fn predicted_jordan_blocks(genus: usize, ramification: &[usize]) -> Vec<JordanBlock> {
    let minus_one = UnitRoot::from_turn(Ratio::new(1, 2));
    let m = ramification.len().saturating_sub(1);
    let mut blocks = vec![JordanBlock { eigenvalue: minus_one, size: 1 }; 2 * genus];
    blocks.extend((0..m).map(|_| JordanBlock { eigenvalue: minus_one, size: 2 }));
    for &ni in ramification {
        for alpha in 1..=ni as i64 {
            blocks.push(JordanBlock {
                eigenvalue: UnitRoot::from_turn(Ratio::new(alpha, ni as i64 + 1) + Ratio::new(1, 2)),
                size: 1,
            });
        }
    }
    blocks
}

/// Multiple of `A = [[−1,1],[1,−1]]` in the block of S with row cut `row` and
/// column cut `col` (row below column).
pub fn block_multiple(col: Cut, row: Cut) -> i64 {
    let (a, b) = (col.lower, col.upper);
    if row == col {
        return -2;
    }
    let shares_a = row.lower == a || row.upper == a;
    let shares_b = row.lower == b || row.upper == b;
    match (shares_a, shares_b) {
        (false, false) => 0,
        (true, false) => {
            let t = if row.lower == a { row.upper } else { row.lower };
            if t < a {
                1
            } else {
                -1
            }
        }
        (false, true) => {
            let t = if row.lower == b { row.upper } else { row.lower };
            if t > b {
                1
            } else {
                -1
            }
        }
        (true, true) => -2,
    }
}

/// Stokes matrix from the sheet diagram by the 2×2 block rule.
pub fn stokes_from_cuts(cuts: &[Cut]) -> QMat {
    let n = 2 * cuts.len();
    let mut s = QMat::identity(n);
    let a = [[-1i128, 1], [1, -1]];
    for (c, _) in cuts.iter().enumerate() {
        s[(2 * c + 1, 2 * c)] = Q::from_integer(-2);
        for r in c + 1..cuts.len() {
            let k = block_multiple(cuts[c], cuts[r]) as i128;
            for (di, row) in a.iter().enumerate() {
                for (dj, &v) in row.iter().enumerate() {
                    s[(2 * r + di, 2 * c + dj)] = Q::from_integer(k * v);
                }
            }
        }
    }
    s
}

/// Basis in which a relative chain is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainBasis {
    /// `{Ĉ_k^r}`
    Right,
    /// `{Ĉ_k^l}`
    Left,
    /// The γ basis `{a, b, V, W₀}`.
    Gamma,
    /// The Jordan basis `{a, b, Υ}`.
    Jordan,
}

/// Integer combination of basis contours of Λ*(z).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeChain {
    pub basis: ChainBasis,
    pub coeffs: Vec<Q>,
}

/// Labels of the γ basis, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GammaLabel {
    A(usize),
    B(usize),
    V(usize),
    W0(usize),
    T(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JordanLabel {
    A(usize),
    B(usize),
    /// `N·V_k`
    Upsilon1(usize),
    /// Sum of paths into `∞_k` from the other points over ∞.
    Upsilon2(usize),
    Delta(usize, usize),
}

/// Decomposition of the γ and Jordan bases into the `{Ĉ_k^r}` basis.
#[derive(Debug, Clone)]
pub struct ChainDecomposition {
    pub gamma_labels: Vec<GammaLabel>,
    /// Columns: γ contours in `Ĉ^r` coordinates.
    pub gamma: QMat,
    pub jordan_labels: Vec<JordanLabel>,
    /// Columns: Jordan contours in `Ĉ^r` coordinates (this is C).
    pub jordan: QMat,
    pub sheets: usize,
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn axpy(acc: &mut [i64], k: i64, v: &[i64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += k * b;
    }
}

/// Builds the γ and Jordan bases for a covering unramified over ∞ from its cut list.
pub fn decompose(cuts: &[Cut], sheets: usize) -> Result<ChainDecomposition> {
    let n = 2 * cuts.len();
    let ck = |c: usize| unit(n, 2 * c);
    let cl = |c: usize| unit(n, 2 * c + 1);
    let mut pairs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, c) in cuts.iter().enumerate() {
        pairs.entry((c.lower, c.upper)).or_default().push(i);
    }
    let mut groups: Vec<&Vec<usize>> = pairs.values().collect();
    groups.sort_by_key(|g| g[0]);
    let (mut a_cycles, mut b_cycles) = (Vec::new(), Vec::new());
    for g in &groups {
        for i in 0..g.len() - 1 {
            let mut a = ck(g[i]);
            axpy(&mut a, -1, &cl(g[i]));
            a_cycles.push(a);
            let mut b = vec![0; n];
            for j in i..g.len() - 1 {
                axpy(&mut b, 1, &cl(g[j]));
                axpy(&mut b, -1, &ck(g[j + 1]));
            }
            b_cycles.push(b);
        }
    }
    // the sheet graph with parallel cuts merged must be a tree
    let genus = a_cycles.len();
    if pairs.len() + 1 != sheets {
        return Err(Error::BasisDecompositionUnavailable(format!(
            "sheet graph has {} distinct edges for {} sheets; only parallel-cut handles are supported",
            pairs.len(),
            sheets
        )));
    }
    let m = sheets - 1;
    let mut v_cycles = Vec::with_capacity(m);
    for s in 1..sheets {
        let mut v = vec![0; n];
        for (i, c) in cuts.iter().enumerate() {
            if c.lower == s {
                axpy(&mut v, -1, &ck(i));
                axpy(&mut v, 1, &cl(i));
            } else if c.upper == s {
                axpy(&mut v, -1, &cl(i));
                axpy(&mut v, 1, &ck(i));
            }
        }
        v_cycles.push(v);
    }
    let mut w: Vec<Option<Vec<i64>>> = vec![None; sheets];
    w[0] = Some(vec![0; n]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let base = w[s].clone().expect("visited sheet has a path");
        for (&(lo, up), lst) in &pairs {
            let last = *lst.last().expect("non-empty group");
            if lo == s && w[up].is_none() {
                let mut p = base.clone();
                axpy(&mut p, 1, &cl(last));
                w[up] = Some(p);
                queue.push_back(up);
            }
            if up == s && w[lo].is_none() {
                let mut p = base.clone();
                axpy(&mut p, -1, &cl(last));
                w[lo] = Some(p);
                queue.push_back(lo);
            }
        }
    }
    let w: Vec<Vec<i64>> = w
        .into_iter()
        .map(|p| p.ok_or_else(|| Error::Validation("sheet diagram is not connected".into())))
        .collect::<Result<_>>()?;

    let mut gamma_labels = Vec::new();
    let mut gamma_cols = Vec::new();
    for (i, a) in a_cycles.iter().enumerate() {
        gamma_labels.push(GammaLabel::A(i + 1));
        gamma_cols.push(a.clone());
    }
    for (i, b) in b_cycles.iter().enumerate() {
        gamma_labels.push(GammaLabel::B(i + 1));
        gamma_cols.push(b.clone());
    }
    for (k, v) in v_cycles.iter().enumerate() {
        gamma_labels.push(GammaLabel::V(k + 1));
        gamma_cols.push(v.clone());
    }
    for k in 1..sheets {
        gamma_labels.push(GammaLabel::W0(k));
        gamma_cols.push(w[k].clone());
    }

    let mut jordan_labels = Vec::new();
    let mut jordan_cols = Vec::new();
    for (i, a) in a_cycles.iter().enumerate() {
        jordan_labels.push(JordanLabel::A(i + 1));
        jordan_cols.push(a.clone());
    }
    for (i, b) in b_cycles.iter().enumerate() {
        jordan_labels.push(JordanLabel::B(i + 1));
        jordan_cols.push(b.clone());
    }
    for k in 1..sheets {
        let mut u1 = vec![0; n];
        axpy(&mut u1, sheets as i64, &v_cycles[k - 1]);
        jordan_labels.push(JordanLabel::Upsilon1(k));
        jordan_cols.push(u1);
        let mut u2 = vec![0; n];
        for j in 0..sheets {
            if j != k {
                axpy(&mut u2, -1, &w[k]);
                axpy(&mut u2, 1, &w[j]);
            }
        }
        jordan_labels.push(JordanLabel::Upsilon2(k));
        jordan_cols.push(u2);
    }
    debug_assert_eq!(gamma_cols.len(), 2 * genus + 2 * m);
    if gamma_cols.len() != n {
        return Err(Error::BasisDecompositionUnavailable(format!(
            "γ basis has {} elements for n = {}",
            gamma_cols.len(),
            n
        )));
    }
    Ok(ChainDecomposition {
        gamma_labels,
        gamma: QMat::from_columns(&gamma_cols, n),
        jordan_labels,
        jordan: QMat::from_columns(&jordan_cols, n),
        sheets,
    })
}

/// Transformation of the γ basis under `arg z → arg z + 2π`: a, b, V fixed,
/// `W_{0i} → W_{0i} + V_i + Σ_j V_j`.
pub fn gamma_rotation(genus: usize, m: usize) -> QMat {
    let n = 2 * genus + 2 * m;
    let mut t = QMat::identity(n);
    let v0 = 2 * genus;
    let w0 = 2 * genus + m;
    for i in 0..m {
        t[(v0 + i, w0 + i)] += Q::one();
        for j in 0..m {
            t[(v0 + j, w0 + i)] += Q::one();
        }
    }
    t
}

#[derive(Debug, Clone)]
pub struct MonodromyData {
    pub s: QMat,
    pub c: QMat,
    pub m0_tilde: QMat,
    /// Exact M₀ when all its entries are rational.
    pub m0: Option<QMat>,
    pub m0_blocks: Vec<JordanBlock>,
    pub mu: Vec<Ratio<i64>>,
    pub decomposition: Option<ChainDecomposition>,
    /// Resonant matrix of the local form at 0; never computed.
    pub r: Option<QMat>,
}

fn cuts_of(cov: &Covering) -> Result<Vec<Cut>> {
    cov.cuts.clone().ok_or_else(|| {
        Error::BasisDecompositionUnavailable(
            "sheet diagram unknown for this covering; supply one with `with_diagram`".into(),
        )
    })
}

fn check_stokes_preconditions(cov: &Covering) -> Result<Vec<Cut>> {
    let sum_n: usize = cov.infinity.iter().map(|p| p.ramification).sum();
    if sum_n > 0 && cov.n() > 1 {
        return Err(Error::AssumptionViolated(
            "Stokes block rule requires no ramification over ∞".into(),
        ));
    }
    if !cov.n().is_multiple_of(2) && cov.n() != 1 {
        return Err(Error::AssumptionViolated("odd number of branch points".into()));
    }
    cov.order_branch_points(cov.line.phi)
        .map_err(|e| Error::AssumptionViolated(format!("A1 fails: {e}")))?;
    let cuts = cuts_of(cov)?;
    if cuts.iter().any(|c| c.lower == c.upper || c.upper >= cov.degree) {
        return Err(Error::AssumptionViolated("cut sheet labels out of range".into()));
    }
    Ok(cuts)
}

pub fn stokes_matrix(cov: &Covering) -> Result<QMat> {
    if cov.n() == 1 {
        return Ok(QMat::identity(1));
    }
    let cuts = check_stokes_preconditions(cov)?;
    Ok(stokes_from_cuts(&cuts))
}

pub fn connection_matrix(cov: &Covering) -> Result<QMat> {
    if cov.n() == 1 {
        return Ok(QMat::identity(1));
    }
    let cuts = check_stokes_preconditions(cov)?;
    Ok(decompose(&cuts, cov.degree)?.jordan)
}

/// `(M̃₀, M₀)` with M₀ exact when rational.
pub fn monodromy_at_zero(cov: &Covering) -> Result<(QMat, Option<QMat>)> {
    if cov.n() == 1 {
        // single point over ∞ with n₀ = 1: T_{0;1} is invariant up to the 1/√z sign
        let m = QMat::identity(1);
        return Ok((m.clone(), Some(m)));
    }
    let cuts = check_stokes_preconditions(cov)?;
    let dec = decompose(&cuts, cov.degree)?;
    let m = cov.degree - 1;
    let mt = gamma_rotation(cov.genus, m).scale(-Q::one());
    let ginv = dec.gamma.inverse().ok_or_else(|| Error::ConsistencyFailure("γ basis is singular".into()))?;
    let j = ginv.mul(&dec.jordan);
    let jinv = j.inverse().ok_or_else(|| Error::ConsistencyFailure("Jordan basis is singular".into()))?;
    let m0 = jinv.mul(&mt).mul(&j);
    Ok((mt, Some(m0)))
}

pub fn monodromy_data(cov: &Covering) -> Result<MonodromyData> {
    let s = stokes_matrix(cov)?;
    let c = connection_matrix(cov)?;
    let (m0_tilde, m0) = monodromy_at_zero(cov)?;
    let ram = cov.infinity_ramification();
    let decomposition = if cov.n() > 1 { Some(decompose(&cuts_of(cov)?, cov.degree)?) } else { None };
    Ok(MonodromyData {
        s,
        c,
        m0_tilde,
        m0,
        m0_blocks: predicted_jordan_blocks(cov.genus, &ram),
        mu: predicted_spectrum(cov.genus, &ram),
        decomposition,
        r: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub m0_identity: bool,
    pub jordan_structure: bool,
    pub eigenvalues_match: bool,
    pub unit_lower_triangular: bool,
    pub vanishing_pattern: bool,
}

impl ConsistencyReport {
    pub fn all(&self) -> bool {
        self.m0_identity && self.jordan_structure && self.eigenvalues_match && self.unit_lower_triangular && self.vanishing_pattern
    }
}

/// Checks S triangularity and vanishing pattern, the identity `M₀ = C⁻¹SᵀS⁻¹C`,
/// the Jordan structure and `spec M₀ = e^{2πiμ}`.
pub fn check_consistency(data: &MonodromyData, cov: Option<&Covering>) -> Result<ConsistencyReport> {
    let n = data.s.rows;
    let s = &data.s;
    let unit_lower = (0..n).all(|i| s[(i, i)] == Q::one() && (i + 1..n).all(|j| s[(i, j)].is_zero()));
    let vanishing_pattern = match cov {
        Some(cov) if cov.n() == n => {
            let lp = cov.line;
            cov.stokes_rays().iter().all(|r| !lp.in_right(r.direction) || s[(r.i, r.j)].is_zero())
        }
        _ => true,
    };
    let sinv = s.inverse().ok_or_else(|| Error::ConsistencyFailure("S is singular".into()))?;
    let cinv = data.c.inverse().ok_or_else(|| Error::ConsistencyFailure("C is singular".into()))?;
    let monodromy = s.transpose().mul(&sinv);
    let conj = cinv.mul(&monodromy).mul(&data.c);
    let m0_identity = data.m0.as_ref().is_some_and(|m0| *m0 == conj);

    // Jordan structure: size-2 blocks at −1 ⇔ rank(M₀ + 1) = n − #blocks
    let blocks_at_minus_one = data.m0_blocks.iter().filter(|b| b.eigenvalue == UnitRoot { num: 1, den: 2 }).count();
    let mut shifted = conj.clone();
    for i in 0..n {
        shifted[(i, i)] += Q::one();
    }
    let jordan_structure = n - shifted.rank() == blocks_at_minus_one;

    // characteristic polynomial vs Π(x − e^{2πiμ})
    let cp = conj.char_poly();
    let roots: Vec<C64> = data.mu.iter().map(|&m| UnitRoot::from_turn(m).value()).collect();
    let target = crate::poly::from_roots(&roots);
    let eigenvalues_match = cp.len() == target.len()
        && cp.iter().zip(&target).all(|(a, b)| {
            let a = *a.numer() as f64 / *a.denom() as f64;
            (C64::new(a, 0.0) - b).norm() < 1e-9
        });

    let report = ConsistencyReport {
        m0_identity,
        jordan_structure,
        eigenvalues_match,
        unit_lower_triangular: unit_lower,
        vanishing_pattern,
    };
    if !report.all() {
        return Err(Error::ConsistencyFailure(format!("{report:?}")));
    }
    Ok(report)
}

impl RelativeChain {
    pub fn new(basis: ChainBasis, coeffs: &[i64]) -> Self {
        Self { basis, coeffs: coeffs.iter().map(|&c| Q::from_integer(c as i128)).collect() }
    }

    /// Matrix taking coordinates in `basis` to `Ĉ^r` coordinates.
    fn to_right(basis: ChainBasis, data: &MonodromyData) -> Result<QMat> {
        Ok(match basis {
            ChainBasis::Right => QMat::identity(data.s.rows),
            ChainBasis::Left => data.s.clone(),
            ChainBasis::Gamma => {
                data.decomposition.as_ref().map(|d| d.gamma.clone()).unwrap_or_else(|| QMat::identity(data.s.rows))
            }
            ChainBasis::Jordan => data.c.clone(),
        })
    }

    pub fn rebase(&self, target: ChainBasis, data: &MonodromyData) -> Result<Self> {
        let into = Self::to_right(self.basis, data)?;
        let out = Self::to_right(target, data)?
            .inverse()
            .ok_or_else(|| Error::ConsistencyFailure("singular basis change".into()))?;
        let v = QMat { rows: self.coeffs.len(), cols: 1, data: self.coeffs.clone() };
        let w = out.mul(&into.mul(&v));
        Ok(Self { basis: target, coeffs: w.data })
    }
}

/// Human-readable block annotation of S in multiples of A.
pub fn block_annotation(cuts: &[Cut]) -> Vec<String> {
    let mut out = Vec::new();
    for r in 0..cuts.len() {
        let row: Vec<String> = (0..cuts.len())
            .map(|c| {
                if c == r {
                    "S0".to_string()
                } else if c > r {
                    "0".to_string()
                } else {
                    match block_multiple(cuts[c], cuts[r]) {
                        0 => "0".into(),
                        1 => "A".into(),
                        -1 => "-A".into(),
                        k => format!("{k}A"),
                    }
                }
            })
            .collect();
        out.push(row.join(" "));
    }
    out
}

/// Whether every entry of a rational matrix is an integer of absolute value ≤ `bound`.
pub fn bounded_integer(m: &QMat, bound: i128) -> bool {
    m.data.iter().all(|x| x.is_integer() && x.to_integer().abs() <= bound)
}
