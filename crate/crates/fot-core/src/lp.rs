//! Dense two-phase primal simplex with deterministic pivoting and dual
//! extraction.
//!
//! Problems are tiny and dense here, so the solver keeps a full tableau.
//! Artificial variables are added to every row and kept in the tableau with
//! zero cost after phase 1; their final columns are `B^-1 e_i`, which is what
//! makes the row duals directly readable at the end.

use crate::error::{FotError, Result};
use crate::num::Real;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-8;
/// Pivot element tolerance.
pub const PIVOT_TOL: f64 = 1e-10;
/// Hard iteration cap; exceeding it is an error, never a silent best-effort.
const MAX_ITERS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct LpRow<F> {
    pub coeffs: Vec<F>,
    pub sense: Sense,
    pub rhs: F,
}

/// Per-variable bounds; defaults to `[0, +inf)`.
#[derive(Debug, Clone, Copy)]
pub struct Bounds<F> {
    pub lower: F,
    pub upper: F,
}

impl<F: Real> Default for Bounds<F> {
    fn default() -> Self {
        Bounds { lower: F::zero(), upper: F::infinity() }
    }
}

impl<F: Real> Bounds<F> {
    pub fn free() -> Self {
        Bounds { lower: F::neg_infinity(), upper: F::infinity() }
    }

    pub fn unit() -> Self {
        Bounds { lower: F::zero(), upper: F::one() }
    }
}

#[derive(Debug, Clone)]
pub struct LpProblem<F> {
    /// Objective coefficients; the problem is a minimization.
    pub minimize: Vec<F>,
    pub rows: Vec<LpRow<F>>,
    /// One entry per variable; missing entries default to `[0, +inf)`.
    pub bounds: Vec<Bounds<F>>,
}

impl<F: Real> LpProblem<F> {
    pub fn new(minimize: Vec<F>) -> Self {
        let n = minimize.len();
        LpProblem { minimize, rows: Vec::new(), bounds: vec![Bounds::default(); n] }
    }

    pub fn push_row(&mut self, coeffs: Vec<F>, sense: Sense, rhs: F) {
        self.rows.push(LpRow { coeffs, sense, rhs });
    }

    fn validate(&self) -> Result<()> {
        let n = self.minimize.len();
        if self.bounds.len() != n {
            return Err(FotError::DimensionMismatch(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(FotError::DimensionMismatch(format!(
                    "row {i} has {} coefficients for {} variables",
                    row.coeffs.len(),
                    n
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(FotError::Lp(format!("non-finite data in row {i}")));
            }
        }
        if self.minimize.iter().any(|c| !c.is_finite()) {
            return Err(FotError::Lp("non-finite objective coefficient".into()));
        }
        let cols = n + self.rows.len();
        if self.rows.len() * cols > 1_000_000 {
            return Err(FotError::SearchSpaceExceeded("LP larger than 10^6 cells".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpResult<F> {
    pub status: LpStatus,
    /// Primal values in original variable space (empty unless optimal).
    pub primal: Vec<F>,
    /// Row duals as rhs sensitivities of the minimization: `>=` rows carry
    /// non-negative duals, `<=` rows non-positive ones (user rows only).
    pub duals: Vec<F>,
    pub objective: F,
}

struct Tableau<F> {
    a: Vec<Vec<F>>,
    rhs: Vec<F>,
    basis: Vec<usize>,
    ncols: usize,
}

impl<F: Real> Tableau<F> {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col];
        let inv = F::one() / piv;
        for v in self.a[row].iter_mut() {
            *v = *v * inv;
        }
        self.rhs[row] = self.rhs[row] * inv;
        for r in 0..self.a.len() {
            if r == row {
                continue;
            }
            let factor = self.a[r][col];
            if factor == F::zero() {
                continue;
            }
            for c in 0..self.ncols {
                let delta = factor * self.a[row][c];
                self.a[r][c] = self.a[r][c] - delta;
            }
            self.rhs[r] = self.rhs[r] - factor * self.rhs[row];
        }
        self.basis[row] = col;
    }
}

/// Solve with Dantzig pricing, falling back to Bland's rule for anti-cycling
/// after `3 (rows + cols)` iterations of a phase.
pub fn solve_lp<F: Real>(p: &LpProblem<F>) -> Result<LpResult<F>> {
    p.validate()?;
    let nvars = p.minimize.len();
    let m_user = p.rows.len();
    let pivot_tol = F::of(PIVOT_TOL);
    let feas_tol = F::of(FEAS_TOL);

    // Variable transform: x = lb + x_pos (- x_neg when free). Finite upper
    // bounds become internal rows after the user rows.
    let mut pos_col = vec![0usize; nvars];
    let mut neg_col = vec![None::<usize>; nvars];
    let mut shift = vec![F::zero(); nvars];
    let mut ncols = 0usize;
    for v in 0..nvars {
        pos_col[v] = ncols;
        ncols += 1;
        if p.bounds[v].lower == F::neg_infinity() {
            neg_col[v] = Some(ncols);
            ncols += 1;
        } else {
            shift[v] = p.bounds[v].lower;
        }
    }
    let n_struct = ncols;

    struct RawRow<F> {
        coeffs: Vec<(usize, F)>,
        sense: Sense,
        rhs: F,
    }
    let mut raw: Vec<RawRow<F>> = Vec::new();
    for row in &p.rows {
        let mut coeffs = Vec::new();
        let mut rhs = row.rhs;
        for (v, c) in row.coeffs.iter().enumerate() {
            if *c == F::zero() {
                continue;
            }
            coeffs.push((pos_col[v], *c));
            if let Some(nc) = neg_col[v] {
                coeffs.push((nc, -*c));
            }
            rhs = rhs - *c * shift[v];
        }
        raw.push(RawRow { coeffs, sense: row.sense, rhs });
    }
    for v in 0..nvars {
        let ub = p.bounds[v].upper;
        if ub < F::infinity() {
            let mut coeffs = vec![(pos_col[v], F::one())];
            if let Some(nc) = neg_col[v] {
                coeffs.push((nc, -F::one()));
            }
            raw.push(RawRow { coeffs, sense: Sense::Le, rhs: ub - shift[v] });
        }
    }
    let m = raw.len();

    // Row sign normalization so every rhs is non-negative.
    let mut sign = vec![F::one(); m];
    for (i, row) in raw.iter_mut().enumerate() {
        if row.rhs < F::zero() {
            sign[i] = -F::one();
            row.rhs = -row.rhs;
            for (_, c) in row.coeffs.iter_mut() {
                *c = -*c;
            }
            row.sense = match row.sense {
                Sense::Le => Sense::Ge,
                Sense::Eq => Sense::Eq,
                Sense::Ge => Sense::Le,
            };
        }
    }

    // Column layout: structural | slacks | artificials.
    let n_slack = raw.iter().filter(|r| r.sense != Sense::Eq).count();
    let total = n_struct + n_slack + m;
    let mut t = Tableau {
        a: vec![vec![F::zero(); total]; m],
        rhs: vec![F::zero(); m],
        basis: vec![0; m],
        ncols: total,
    };
    let mut slack_at = n_struct;
    let art_base = n_struct + n_slack;
    for (i, row) in raw.iter().enumerate() {
        for (c, v) in &row.coeffs {
            t.a[i][*c] = t.a[i][*c] + *v;
        }
        match row.sense {
            Sense::Le => {
                t.a[i][slack_at] = F::one();
                slack_at += 1;
            }
            Sense::Ge => {
                t.a[i][slack_at] = -F::one();
                slack_at += 1;
            }
            Sense::Eq => {}
        }
        t.a[i][art_base + i] = F::one();
        t.rhs[i] = row.rhs;
        t.basis[i] = art_base + i;
    }

    // Phase 1: drive the artificials to zero.
    let mut cost1 = vec![F::zero(); total];
    for j in art_base..total {
        cost1[j] = F::one();
    }
    let barred = |_j: usize| false;
    if run_simplex(&mut t, &cost1, &barred, pivot_tol)? == LpStatus::Unbounded {
        return Err(FotError::Lp("phase-1 objective unbounded; inconsistent tableau".into()));
    }
    let infeasibility: F = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(b, _)| **b >= art_base)
        .map(|(_, v)| *v)
        .sum();
    if infeasibility > feas_tol {
        return Ok(LpResult {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            duals: Vec::new(),
            objective: F::nan(),
        });
    }
    // Pivot lingering zero-valued artificials out where a real column exists.
    for i in 0..m {
        if t.basis[i] >= art_base {
            if let Some(col) = (0..art_base).find(|c| t.a[i][*c].abs() > pivot_tol) {
                t.pivot(i, col);
            }
        }
    }

    // Phase 2: original objective over the transformed columns.
    let mut cost2 = vec![F::zero(); total];
    for v in 0..nvars {
        cost2[pos_col[v]] = p.minimize[v];
        if let Some(nc) = neg_col[v] {
            cost2[nc] = -p.minimize[v];
        }
    }
    let barred = |j: usize| j >= art_base;
    if run_simplex(&mut t, &cost2, &barred, pivot_tol)? == LpStatus::Unbounded {
        return Ok(LpResult {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            duals: Vec::new(),
            objective: F::neg_infinity(),
        });
    }

    let mut col_value = vec![F::zero(); total];
    for (i, b) in t.basis.iter().enumerate() {
        col_value[*b] = t.rhs[i];
    }
    let mut primal = vec![F::zero(); nvars];
    for v in 0..nvars {
        let mut x = shift[v] + col_value[pos_col[v]];
        if let Some(nc) = neg_col[v] {
            x = x - col_value[nc];
        }
        primal[v] = x;
    }
    let objective = p
        .minimize
        .iter()
        .zip(&primal)
        .map(|(c, x)| *c * *x)
        .sum();

    // y_i = c_B B^-1 e_i read off the artificial column of row i.
    let mut duals = Vec::with_capacity(m_user);
    for i in 0..m_user {
        let mut y = F::zero();
        for (r, b) in t.basis.iter().enumerate() {
            let cb = cost2[*b];
            if cb != F::zero() {
                y = y + cb * t.a[r][art_base + i];
            }
        }
        duals.push(sign[i] * y);
    }

    Ok(LpResult { status: LpStatus::Optimal, primal, duals, objective })
}

fn run_simplex<F: Real>(
    t: &mut Tableau<F>,
    cost: &[F],
    barred: &dyn Fn(usize) -> bool,
    pivot_tol: F,
) -> Result<LpStatus> {
    let m = t.a.len();
    let bland_after = 3 * (m + t.ncols);
    // reduced costs maintained implicitly: rc_j = c_j - c_B B^-1 a_j
    for iter in 0..MAX_ITERS {
        let mut cb = vec![F::zero(); m];
        for (i, b) in t.basis.iter().enumerate() {
            cb[i] = cost[*b];
        }
        let mut entering = None;
        let mut best = -pivot_tol;
        for j in 0..t.ncols {
            if barred(j) || t.basis.contains(&j) {
                continue;
            }
            let mut rc = cost[j];
            for i in 0..m {
                if cb[i] != F::zero() {
                    rc = rc - cb[i] * t.a[i][j];
                }
            }
            if rc < best {
                if iter >= bland_after {
                    // Bland: first improving column
                    entering = Some(j);
                    break;
                }
                best = rc;
                entering = Some(j);
            }
        }
        let Some(col) = entering else {
            return Ok(LpStatus::Optimal);
        };
        let mut leave = None;
        let mut best_ratio = F::infinity();
        for i in 0..m {
            if t.a[i][col] > pivot_tol {
                let ratio = t.rhs[i] / t.a[i][col];
                let better = ratio < best_ratio - pivot_tol
                    || ((ratio - best_ratio).abs() <= pivot_tol
                        && leave.map_or(true, |l: usize| t.basis[i] < t.basis[l]));
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return Ok(LpStatus::Unbounded);
        };
        t.pivot(row, col);
    }
    Err(FotError::Lp(format!("iteration cap {MAX_ITERS} exceeded")))
}

/// Parse the LP-format text emitted by the encodings module into an LP
/// continuous relaxation: binaries become `[0,1]` variables, declared-free
/// variables unbounded. Bracketed quadratic terms are rejected.
pub fn parse_lp_text(text: &str) -> Result<(LpProblem<f64>, Vec<String>)> {
    use std::collections::HashMap;

    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Objective,
        Rows,
        Bounds,
        Binaries,
    }

    if text.contains('[') {
        return Err(FotError::Parse("quadratic LP terms are not supported".into()));
    }
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut intern = |names: &mut Vec<String>, tok: &str| -> usize {
        match index.get(tok) {
            Some(i) => *i,
            None => {
                names.push(tok.to_string());
                index.insert(tok.to_string(), names.len() - 1);
                names.len() - 1
            }
        }
    };

    fn parse_terms(
        tokens: &[&str],
        intern: &mut dyn FnMut(&str) -> usize,
    ) -> Result<(Vec<(usize, f64)>, Option<(Sense, f64)>)> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut pending: Option<f64> = None;
        let mut i = 0;
        while i < tokens.len() {
            let tok = tokens[i];
            match tok {
                "+" => sign = 1.0,
                "-" => sign = -sign,
                "<=" | "=<" | ">=" | "=>" | "=" => {
                    let sense = match tok {
                        "<=" | "=<" => Sense::Le,
                        ">=" | "=>" => Sense::Ge,
                        _ => Sense::Eq,
                    };
                    let rhs: f64 = tokens
                        .get(i + 1)
                        .ok_or_else(|| FotError::Parse("missing rhs".into()))?
                        .parse()
                        .map_err(|_| FotError::Parse(format!("bad rhs {:?}", tokens[i + 1])))?;
                    return Ok((terms, Some((sense, rhs))));
                }
                _ => {
                    if let Ok(v) = tok.parse::<f64>() {
                        pending = Some(sign * pending.unwrap_or(1.0) * v);
                    } else {
                        let var = intern(tok);
                        terms.push((var, pending.take().unwrap_or(sign)));
                        sign = 1.0;
                    }
                }
            }
            i += 1;
        }
        if pending.is_some() {
            return Err(FotError::Parse("dangling coefficient".into()));
        }
        Ok((terms, None))
    }

    let mut section = Section::None;
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut rows: Vec<(Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    let mut free: Vec<usize> = Vec::new();
    let mut binary: Vec<usize> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => {
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Rows;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "binaries" | "binary" => {
                section = Section::Binaries;
                continue;
            }
            "end" => break,
            _ => {}
        }
        let body = match line.split_once(':') {
            Some((_, rest)) => rest,
            None => line,
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match section {
            Section::None => return Err(FotError::Parse(format!("stray line {line:?}"))),
            Section::Objective => {
                let (terms, tail) = parse_terms(&tokens, &mut |t| intern(&mut names, t))?;
                if tail.is_some() {
                    return Err(FotError::Parse("relation in objective".into()));
                }
                objective.extend(terms);
            }
            Section::Rows => {
                let (terms, tail) = parse_terms(&tokens, &mut |t| intern(&mut names, t))?;
                let (sense, rhs) =
                    tail.ok_or_else(|| FotError::Parse(format!("row without relation: {line:?}")))?;
                rows.push((terms, sense, rhs));
            }
            Section::Bounds => {
                if tokens.len() == 2 && tokens[1].eq_ignore_ascii_case("free") {
                    let var = intern(&mut names, tokens[0]);
                    free.push(var);
                } else {
                    return Err(FotError::Parse(format!("unsupported bound line {line:?}")));
                }
            }
            Section::Binaries => {
                for tok in tokens {
                    let var = intern(&mut names, tok);
                    binary.push(var);
                }
            }
        }
    }

    let n = names.len();
    let mut minimize = vec![0.0; n];
    for (j, c) in objective {
        minimize[j] += c;
    }
    let mut p = LpProblem::new(minimize);
    for (terms, sense, rhs) in rows {
        let mut coeffs = vec![0.0; n];
        for (j, c) in terms {
            coeffs[j] += c;
        }
        p.push_row(coeffs, sense, rhs);
    }
    for j in free {
        p.bounds[j] = Bounds::free();
    }
    for j in binary {
        p.bounds[j] = Bounds::unit();
    }
    Ok((p, names))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(minimize: Vec<f64>) -> LpProblem<f64> {
        LpProblem::new(minimize)
    }

    #[test]
    fn min_x_at_least_three() {
        let mut p = lp(vec![1.0]);
        p.push_row(vec![1.0], Sense::Ge, 3.0);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.primal[0] - 3.0).abs() < 1e-9);
        assert!((r.objective - 3.0).abs() < 1e-9);
        assert!((r.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_pair() {
        let mut p = lp(vec![0.0]);
        p.push_row(vec![1.0], Sense::Le, 0.0);
        p.push_row(vec![1.0], Sense::Ge, 1.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detection() {
        let mut p = lp(vec![-1.0]);
        p.push_row(vec![0.0], Sense::Le, 1.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn max_min_fairness_toy() {
        // variables f, g free; min f - g with g <= y_i <= f for y = (1, 2)
        let mut p: LpProblem<f64> = LpProblem::new(vec![1.0, -1.0]);
        p.bounds = vec![Bounds::free(), Bounds::free()];
        p.push_row(vec![0.0, 1.0], Sense::Le, 1.0); // g <= 1
        p.push_row(vec![0.0, 1.0], Sense::Le, 2.0); // g <= 2
        p.push_row(vec![1.0, 0.0], Sense::Ge, 1.0); // f >= 1
        p.push_row(vec![1.0, 0.0], Sense::Ge, 2.0); // f >= 2
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-9);
        assert!((r.primal[0] - 2.0).abs() < 1e-9);
        assert!((r.primal[1] - 1.0).abs() < 1e-9);
        // one unit of dual weight on each side
        let g_duals: f64 = r.duals[0] + r.duals[1];
        let f_duals: f64 = r.duals[2] + r.duals[3];
        assert!((g_duals + 1.0).abs() < 1e-9);
        assert!((f_duals - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bounds_and_equality() {
        // min -x - 2y s.t. x + y = 1, x in [0, 0.25], y in [0, 1]
        let mut p: LpProblem<f64> = LpProblem::new(vec![-1.0, -2.0]);
        p.bounds = vec![
            Bounds { lower: 0.0, upper: 0.25 },
            Bounds { lower: 0.0, upper: 1.0 },
        ];
        p.push_row(vec![1.0, 1.0], Sense::Eq, 1.0);
        let r = solve_lp(&p).unwrap();
        assert!((r.objective + 2.0).abs() < 1e-9);
        assert!((r.primal[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn shifted_lower_bound() {
        // min x with x >= -2 via bounds and x >= -5 via a row
        let mut p = LpProblem::new(vec![1.0]);
        p.bounds = vec![Bounds { lower: -2.0, upper: f64::INFINITY }];
        p.push_row(vec![1.0], Sense::Ge, -5.0);
        let r = solve_lp(&p).unwrap();
        assert!((r.primal[0] + 2.0).abs() < 1e-9);
    }

    /// Brute-force oracle: enumerate all candidate vertices by activating
    /// subsets of rows/bounds and solving the square systems.
    fn vertex_oracle(p: &LpProblem<f64>) -> Option<f64> {
        let n = p.minimize.len();
        // candidate hyperplanes: rows at equality, bounds at either end
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for row in &p.rows {
            planes.push((row.coeffs.clone(), row.rhs));
        }
        for (v, b) in p.bounds.iter().enumerate() {
            for bound in [b.lower, b.upper] {
                if bound.is_finite() {
                    let mut c = vec![0.0; n];
                    c[v] = 1.0;
                    planes.push((c, bound));
                }
            }
        }
        let mut best: Option<f64> = None;
        let idx: Vec<usize> = (0..planes.len()).collect();
        for combo in combinations(&idx, n) {
            let a: Vec<Vec<f64>> = combo.iter().map(|i| planes[*i].0.clone()).collect();
            let b: Vec<f64> = combo.iter().map(|i| planes[*i].1).collect();
            let Some(x) = solve_square(&a, &b) else { continue };
            if feasible(p, &x) {
                let obj: f64 = p.minimize.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(obj, |cur: f64| cur.min(obj)));
            }
        }
        best
    }

    fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if items.len() < k {
            return vec![];
        }
        let mut out = Vec::new();
        for (i, first) in items.iter().enumerate() {
            for mut rest in combinations(&items[i + 1..], k - 1) {
                rest.insert(0, *first);
                out.push(rest);
            }
        }
        out
    }

    fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a
            .iter()
            .zip(b)
            .map(|(row, rhs)| {
                let mut r = row.clone();
                r.push(*rhs);
                r
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).max_by(|x, y| m[*x][col].abs().total_cmp(&m[*y][col].abs()))?;
            if m[piv][col].abs() < 1e-9 {
                return None;
            }
            m.swap(col, piv);
            for r in 0..n {
                if r != col {
                    let f = m[r][col] / m[col][col];
                    for c in col..=n {
                        let delta = f * m[col][c];
                        m[r][c] -= delta;
                    }
                }
            }
        }
        Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
    }

    fn feasible(p: &LpProblem<f64>, x: &[f64]) -> bool {
        for row in &p.rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
            let ok = match row.sense {
                Sense::Le => lhs <= row.rhs + 1e-7,
                Sense::Eq => (lhs - row.rhs).abs() <= 1e-7,
                Sense::Ge => lhs >= row.rhs - 1e-7,
            };
            if !ok {
                return false;
            }
        }
        p.bounds
            .iter()
            .zip(x)
            .all(|(b, v)| *v >= b.lower - 1e-7 && *v <= b.upper + 1e-7)
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(42);
        let mut solved = 0;
        for _ in 0..60 {
            let n = rng.gen_range(1..=3);
            let mut p = LpProblem::new((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect());
            p.bounds = (0..n)
                .map(|_| Bounds { lower: 0.0, upper: rng.gen_range(0.5..3.0) })
                .collect();
            for _ in 0..rng.gen_range(1..=3) {
                let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
                p.push_row(coeffs, sense, rng.gen_range(-1.0..1.0));
            }
            let r = solve_lp(&p).unwrap();
            let oracle = vertex_oracle(&p);
            match r.status {
                LpStatus::Optimal => {
                    let v = oracle.expect("oracle found no vertex but simplex was optimal");
                    assert!((r.objective - v).abs() < 1e-6, "{} vs {}", r.objective, v);
                    assert!(feasible(&p, &r.primal));
                    solved += 1;
                }
                LpStatus::Infeasible => assert!(oracle.is_none()),
                LpStatus::Unbounded => unreachable!("boxed variables cannot be unbounded"),
            }
        }
        assert!(solved > 10);
    }

    #[test]
    fn duals_satisfy_complementary_slackness() {
        let mut p = LpProblem::new(vec![1.0, 1.0]);
        p.push_row(vec![1.0, 2.0], Sense::Ge, 4.0);
        p.push_row(vec![3.0, 1.0], Sense::Ge, 6.0);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        for (row, y) in p.rows.iter().zip(&r.duals) {
            let slack: f64 =
                row.coeffs.iter().zip(&r.primal).map(|(c, v)| c * v).sum::<f64>() - row.rhs;
            assert!((slack * y).abs() < 1e-7);
            assert!(*y >= -1e-9); // >= rows in a minimization
        }
        // strong duality on this all->=-rows problem: y'b equals the objective
        let dual_obj: f64 = r.duals.iter().zip(&p.rows).map(|(y, row)| y * row.rhs).sum();
        assert!((dual_obj - r.objective).abs() < 1e-7);
    }

    #[test]
    fn parses_lp_text() {
        let text = "\\ comment\nMinimize\n obj: + 1 x + -2 y\nSubject To\n c0: + 1 x + 1 y <= 4\n c1: + 1 x >= 1\nBounds\n x free\nBinaries\n y\nEnd\n";
        let (p, names) = parse_lp_text(text).unwrap();
        assert_eq!(names, vec!["x", "y"]);
        assert_eq!(p.minimize, vec![1.0, -2.0]);
        assert_eq!(p.rows.len(), 2);
        assert_eq!(p.bounds[0].lower, f64::NEG_INFINITY);
        assert_eq!(p.bounds[1].upper, 1.0);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 1.0).abs() < 1e-9); // x=1, y=1
    }

    #[test]
    fn parser_rejects_quadratics() {
        let text = "Minimize\n obj: + 1 x\nSubject To\n c: + [ 1 x * x ] <= 1\nEnd\n";
        assert!(matches!(parse_lp_text(text), Err(FotError::Parse(_))));
    }

    #[test]
    fn determinism_bit_for_bit() {
        let mut p = LpProblem::new(vec![1.0, -2.0, 0.5]);
        p.bounds = vec![Bounds::unit(); 3];
        p.push_row(vec![1.0, 1.0, 1.0], Sense::Eq, 1.0);
        p.push_row(vec![1.0, -1.0, 0.0], Sense::Le, 0.5);
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        assert_eq!(a.primal, b.primal);
        assert_eq!(a.duals, b.duals);
        assert!(a.objective == b.objective);
    }
}
