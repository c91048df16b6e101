//! Dense two-phase simplex with Bland's rule and Farkas certificates.
//!
//! Problems have the form
//!
//! ```text
//! minimize c^T x  subject to  A x = b,  l <= x <= u
//! ```
//!
//! where bounds may be infinite. They are brought into standard form
//! (`A' x' = b'`, `x' >= 0`) by shifting, reflecting or splitting variables
//! and adding one row per finite upper bound. Phase one minimizes the sum of
//! artificials; a positive optimum yields dual multipliers `y` that certify
//! infeasibility of the original system: `y^T b` exceeds the maximum of
//! `(A^T y)^T x` over the bound box.
//!
//! The tableau is rebuilt from the original matrix with a dense LU solve
//! every few dozen pivots and before any optimality verdict, which keeps
//! drift out of both the solution and the certificate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest pivot magnitude accepted in the ratio test.
pub const PIVOT_TOL: f64 = 1e-10;
/// Tolerance on constraint and bound satisfaction of returned solutions.
pub const FEAS_TOL: f64 = 1e-8;
/// Required margin of a Farkas certificate.
pub const CERT_TOL: f64 = 1e-9;

const REDUCED_COST_TOL: f64 = 1e-10;
const PHASE_ONE_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;
/// Pivots between rebuilds of the tableau from the original matrix; the
/// second value is used when a solve has to be repeated.
const REFACTOR_EVERY: [usize; 2] = [50, 1];

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    a: DMatrix<f64>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    c: Vec<f64>,
}

impl LinearProgram {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if b.len() != m {
            return Err(Error::InvalidLp(format!("b has {} entries for {m} rows", b.len())));
        }
        if lower.len() != n || upper.len() != n || c.len() != n {
            return Err(Error::InvalidLp(format!(
                "{n} variables but {} lower, {} upper, {} cost entries",
                lower.len(),
                upper.len(),
                c.len()
            )));
        }
        if a.iter().chain(&b).chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidLp("non-finite coefficient".into()));
        }
        for j in 0..n {
            if lower[j].is_nan() || upper[j].is_nan() || lower[j] > upper[j] || lower[j] == f64::INFINITY || upper[j] == f64::NEG_INFINITY {
                return Err(Error::InvalidLp(format!(
                    "variable {j} has bounds [{}, {}]",
                    lower[j], upper[j]
                )));
            }
        }
        Ok(Self { a, b, lower, upper, c })
    }

    /// Zero objective: a pure feasibility question.
    pub fn feasibility(a: DMatrix<f64>, b: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = a.ncols();
        Self::new(a, b, lower, upper, vec![0.0; n])
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `||A x - b||_inf`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let ax = &self.a * DVector::from_column_slice(x);
        ax.iter()
            .zip(&self.b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    /// Largest amount by which `x` leaves its bounds.
    pub fn bound_violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub solution: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Farkas multipliers, one per equality row, when infeasible.
    pub certificate: Option<Vec<f64>>,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn is_infeasible(&self) -> bool {
        self.status == LpStatus::Infeasible
    }
}

/// `y^T b - max_{l <= x <= u} (A^T y)^T x`, or `None` when the maximum is unbounded.
///
/// Components of `A^T y` within [`CERT_TOL`] of zero are treated as zero
/// when the matching bound is infinite.
pub fn certificate_gap(lp: &LinearProgram, y: &[f64]) -> Option<f64> {
    if y.len() != lp.rows() {
        return None;
    }
    let yv = DVector::from_column_slice(y);
    let g = lp.a.tr_mul(&yv);
    let mut support = 0.0;
    for (j, &gj) in g.iter().enumerate() {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        if gj > CERT_TOL {
            if !u.is_finite() {
                return None;
            }
            support += gj * u;
        } else if gj < -CERT_TOL {
            if !l.is_finite() {
                return None;
            }
            support += gj * l;
        } else {
            // tiny component: count its worst case over the finite side(s)
            let lo = if l.is_finite() { gj * l } else { 0.0 };
            let hi = if u.is_finite() { gj * u } else { 0.0 };
            support += lo.max(hi);
        }
    }
    let yb: f64 = y.iter().zip(&lp.b).map(|(a, b)| a * b).sum();
    Some(yb - support)
}

/// True iff `y` proves that `A x = b, l <= x <= u` has no solution.
pub fn verify_certificate(lp: &LinearProgram, y: &[f64]) -> bool {
    certificate_gap(lp, y).is_some_and(|gap| gap > CERT_TOL)
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = l + x'[col]
    Shift { col: usize, lower: f64 },
    /// x = u - x'[col]
    Reflect { col: usize, upper: f64 },
    /// x = x'[pos] - x'[neg]
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    a: DMatrix<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    map: Vec<VarMap>,
}

fn to_standard_form(lp: &LinearProgram) -> StandardForm {
    let (m, n) = lp.a.shape();
    let mut map = Vec::with_capacity(n);
    let mut cols = 0usize;
    let mut bound_rows = Vec::new();
    for j in 0..n {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                map.push(VarMap::Shift { col: cols, lower: l });
                bound_rows.push((cols, u - l));
                cols += 1;
            }
            (true, false) => {
                map.push(VarMap::Shift { col: cols, lower: l });
                cols += 1;
            }
            (false, true) => {
                map.push(VarMap::Reflect { col: cols, upper: u });
                cols += 1;
            }
            (false, false) => {
                map.push(VarMap::Split { pos: cols, neg: cols + 1 });
                cols += 2;
            }
        }
    }
    let structural = cols;
    let total_cols = structural + bound_rows.len();
    let total_rows = m + bound_rows.len();
    let mut a = DMatrix::zeros(total_rows, total_cols);
    let mut b = vec![0.0; total_rows];
    let mut c = vec![0.0; total_cols];
    b[..m].copy_from_slice(&lp.b);
    for (j, vm) in map.iter().enumerate() {
        match *vm {
            VarMap::Shift { col, lower } => {
                for i in 0..m {
                    a[(i, col)] = lp.a[(i, j)];
                    b[i] -= lp.a[(i, j)] * lower;
                }
                c[col] = lp.c[j];
            }
            VarMap::Reflect { col, upper } => {
                for i in 0..m {
                    a[(i, col)] = -lp.a[(i, j)];
                    b[i] -= lp.a[(i, j)] * upper;
                }
                c[col] = -lp.c[j];
            }
            VarMap::Split { pos, neg } => {
                for i in 0..m {
                    a[(i, pos)] = lp.a[(i, j)];
                    a[(i, neg)] = -lp.a[(i, j)];
                }
                c[pos] = lp.c[j];
                c[neg] = -lp.c[j];
            }
        }
    }
    for (r, &(col, width)) in bound_rows.iter().enumerate() {
        let row = m + r;
        a[(row, col)] = 1.0;
        a[(row, structural + r)] = 1.0;
        b[row] = width;
    }
    StandardForm { a, b, c, map }
}

/// Dense tableau over `[diag(signs) A' | I]`. Row `rows` holds reduced
/// costs; the last column holds the rhs.
struct Tableau {
    t: DMatrix<f64>,
    basis: Vec<usize>,
    rows: usize,
    cols: usize,
    full: DMatrix<f64>,
    rhs: DVector<f64>,
    costs: Vec<f64>,
    since_refactor: usize,
    refactor_every: usize,
    /// Phase two: artificials still basic (at level zero) leave on any
    /// nonzero entry of the entering column so they never become positive.
    hold_artificials: bool,
}

enum PivotResult {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn new(full: DMatrix<f64>, rhs: Vec<f64>, basis: Vec<usize>, costs: Vec<f64>, refactor_every: usize) -> Result<Self> {
        let (rows, cols) = full.shape();
        let mut tab = Self {
            t: DMatrix::zeros(rows + 1, cols + 1),
            basis,
            rows,
            cols,
            full,
            rhs: DVector::from_vec(rhs),
            costs,
            since_refactor: 0,
            refactor_every,
            hold_artificials: false,
        };
        tab.refactor()?;
        Ok(tab)
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[(i, self.cols)]
    }

    fn set_costs(&mut self, costs: Vec<f64>) {
        self.costs = costs;
        self.reprice();
    }

    /// Rebuilds the tableau from the original matrix and the current basis.
    fn refactor(&mut self) -> Result<()> {
        let lu = self.full.select_columns(self.basis.iter()).lu();
        let body = lu.solve(&self.full).ok_or(Error::IllConditioned)?;
        let xb = lu.solve(&self.rhs).ok_or(Error::IllConditioned)?;
        if body.iter().chain(xb.iter()).any(|v| !v.is_finite()) {
            return Err(Error::IllConditioned);
        }
        let (m, n) = (self.rows, self.cols);
        for i in 0..m {
            for j in 0..n {
                self.t[(i, j)] = body[(i, j)];
            }
            self.t[(i, n)] = xb[i];
            // basic columns are exact unit vectors
            self.t[(i, self.basis[i])] = 1.0;
        }
        for (i, &bj) in self.basis.iter().enumerate() {
            for r in 0..m {
                if r != i {
                    self.t[(r, bj)] = 0.0;
                }
            }
        }
        self.since_refactor = 0;
        self.reprice();
        Ok(())
    }

    /// Recomputes the reduced-cost row from the current body.
    fn reprice(&mut self) {
        let (m, n) = (self.rows, self.cols);
        for j in 0..=n {
            let z: f64 = (0..m).map(|i| self.costs[self.basis[i]] * self.t[(i, j)]).sum();
            self.t[(m, j)] = if j < n { self.costs[j] - z } else { -z };
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[(row, col)];
        let width = self.cols + 1;
        for k in 0..width {
            self.t[(row, k)] /= p;
        }
        for i in 0..=self.rows {
            if i == row {
                continue;
            }
            let f = self.t[(i, col)];
            if f != 0.0 {
                for k in 0..width {
                    let v = self.t[(row, k)];
                    if v != 0.0 {
                        self.t[(i, k)] -= f * v;
                    }
                }
                self.t[(i, col)] = 0.0;
            }
        }
        self.basis[row] = col;
        self.since_refactor += 1;
    }

    /// Bland's rule iterations over columns `< allowed`. Optimality is only
    /// declared on a freshly refactorized tableau.
    fn run(&mut self, allowed: usize) -> Result<PivotResult> {
        for _ in 0..MAX_PIVOTS {
            if self.since_refactor >= self.refactor_every {
                self.refactor()?;
            }
            let obj = self.rows;
            let Some(enter) = (0..allowed).find(|&j| self.t[(obj, j)] < -REDUCED_COST_TOL) else {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                return Ok(PivotResult::Optimal);
            };
            // textbook minimum ratio, then the largest pivot among near-ties
            let first_artificial = self.cols - self.rows;
            let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
            for i in 0..self.rows {
                let a = self.t[(i, enter)];
                let held = self.hold_artificials && self.basis[i] >= first_artificial;
                if a > PIVOT_TOL || (held && a < -PIVOT_TOL) {
                    let ratio = if held { 0.0 } else { self.rhs(i).max(0.0) / a };
                    candidates.push((i, ratio, a.abs()));
                }
            }
            let min_ratio = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            let tie = 1e-12 * (1.0 + min_ratio.abs());
            let leave = candidates
                .into_iter()
                .filter(|c| c.1 <= min_ratio + tie)
                .max_by(|x, y| x.2.total_cmp(&y.2).then(self.basis[y.0].cmp(&self.basis[x.0])));
            match leave {
                None => return Ok(PivotResult::Unbounded),
                Some((row, _, _)) => self.pivot(row, enter),
            }
        }
        Err(Error::IllConditioned)
    }
}

/// Solves `lp`. Optimal solutions satisfy the constraints within [`FEAS_TOL`];
/// infeasible verdicts carry a certificate accepted by [`verify_certificate`].
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpOutcome> {
    match solve_with(lp, REFACTOR_EVERY[0]) {
        Err(Error::IllConditioned) => solve_with(lp, REFACTOR_EVERY[1]),
        other => other,
    }
}

fn solve_with(lp: &LinearProgram, refactor_every: usize) -> Result<LpOutcome> {
    let sf = to_standard_form(lp);
    let (m, n) = sf.a.shape();
    let m_orig = lp.rows();

    // sign-normalize rows so that b >= 0; artificials form the first basis
    let signs: Vec<f64> = sf.b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let full = full_matrix(&sf.a, &signs);
    let rhs: Vec<f64> = (0..m).map(|i| signs[i] * sf.b[i]).collect();
    let phase_one_costs: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
    let basis = crash_basis(&full, n);
    let mut tab = Tableau::new(full, rhs, basis, phase_one_costs, refactor_every)?;
    tab.run(n)?;

    let infeasibility = -tab.t[(m, n + m)];
    if infeasibility > PHASE_ONE_TOL {
        let c_b: Vec<f64> = tab.basis.iter().map(|&j| if j >= n { 1.0 } else { 0.0 }).collect();
        let y = solve_transposed(&tab.full, &tab.basis, &c_b)?;
        let certificate: Vec<f64> = (0..m_orig).map(|i| signs[i] * y[i]).collect();
        if verify_certificate(lp, &certificate) {
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                solution: None,
                objective: None,
                certificate: Some(certificate),
            });
        }
        // a residue too small to certify; the solution check below decides
    }

    let phase_two_costs: Vec<f64> = (0..n + m).map(|j| if j < n { sf.c[j] } else { 0.0 }).collect();
    tab.set_costs(phase_two_costs);
    tab.hold_artificials = true;
    if let PivotResult::Unbounded = tab.run(n)? {
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            solution: None,
            objective: None,
            certificate: None,
        });
    }

    let mut xs = vec![0.0; n];
    for (i, &j) in tab.basis.iter().enumerate() {
        if j < n {
            xs[j] = tab.rhs(i).max(0.0);
        }
    }
    let x: Vec<f64> = sf
        .map
        .iter()
        .map(|vm| match *vm {
            VarMap::Shift { col, lower } => lower + xs[col],
            VarMap::Reflect { col, upper } => upper - xs[col],
            VarMap::Split { pos, neg } => xs[pos] - xs[neg],
        })
        .collect();
    if lp.residual(&x) > FEAS_TOL || lp.bound_violation(&x) > FEAS_TOL {
        return Err(Error::IllConditioned);
    }
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        objective: Some(lp.objective(&x)),
        solution: Some(x),
        certificate: None,
    })
}

/// `[diag(signs) A | I]`.
fn full_matrix(a: &DMatrix<f64>, signs: &[f64]) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut out = DMatrix::zeros(m, n + m);
    for i in 0..m {
        for j in 0..n {
            out[(i, j)] = signs[i] * a[(i, j)];
        }
        out[(i, n + i)] = 1.0;
    }
    out
}

/// Starting basis: a structural unit column where a row has one, otherwise
/// the row's artificial.
fn crash_basis(full: &DMatrix<f64>, n: usize) -> Vec<usize> {
    let m = full.nrows();
    let mut basis: Vec<usize> = (n..n + m).collect();
    for j in 0..n {
        let col = full.column(j);
        if col.iter().filter(|v| **v != 0.0).count() != 1 {
            continue;
        }
        let i = col.iter().position(|v| *v != 0.0).expect("one nonzero");
        if col[i] == 1.0 && basis[i] >= n {
            basis[i] = j;
        }
    }
    basis
}

fn solve_transposed(full: &DMatrix<f64>, basis: &[usize], rhs: &[f64]) -> Result<Vec<f64>> {
    let bm = full.select_columns(basis.iter()).transpose();
    bm.lu()
        .solve(&DVector::from_column_slice(rhs))
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .map(|x| x.as_slice().to_vec())
        .ok_or(Error::IllConditioned)
}
