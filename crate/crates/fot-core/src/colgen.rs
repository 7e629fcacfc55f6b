//! Simultaneous row-and-column generation for the `w1·Min + w2·Avg`
//! aggregator with the max-minus-min unfairness: a restricted master LP over
//! a subset of decisions, dual extraction with the textbook sign
//! normalization, and an exhaustive pricing scan that evaluates the
//! eliminated dual rows through their closed-form substitutions.

use crate::encodings::DEFAULT_EPS;
use crate::error::{FotError, Result};
use crate::instance::FilteredInstance;
use crate::lp::{solve_lp, Bounds, LpProblem, LpResult, LpStatus, Sense};
use crate::Scalar;

/// Dual-violation threshold below which a constraint counts as violated.
pub const PRICE_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct MasterState {
    /// Ordered subset of decision indices; positions define the local `j`.
    pub active: Vec<usize>,
    /// `(w_min, w_avg)`.
    pub weights: (Scalar, Scalar),
    pub lp: LpProblem<Scalar>,
    pub last: Option<LpResult<Scalar>>,
    pub eps: Scalar,
    pub big_m: Scalar,
}

/// Duals labeled as in the master's row list; `gamma`, `delta`, `mu` are
/// indexed `[i][j]` over stakeholders and active columns.
#[derive(Debug, Clone)]
pub struct DualVector {
    pub alpha: Vec<Scalar>,
    pub beta: Vec<Scalar>,
    pub gamma: Vec<Vec<Scalar>>,
    pub delta: Vec<Vec<Scalar>>,
    pub upsilon: Vec<Scalar>,
    pub zeta: Vec<Scalar>,
    pub eta: Vec<Scalar>,
    pub theta: Vec<Scalar>,
    pub nu: Scalar,
    pub lambda: Vec<Scalar>,
    pub mu: Vec<Vec<Scalar>>,
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iteration: usize,
    pub entering: Option<usize>,
    pub master_value: Scalar,
    pub max_violation: Scalar,
}

#[derive(Debug, Clone)]
pub struct ColgenRun {
    pub state: MasterState,
    pub value: Scalar,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
}

/// Shared big-M for the whole instance so the master stays comparable as
/// columns enter: covers every attainable `y1` magnitude.
pub fn default_big_m(fi: &FilteredInstance) -> Scalar {
    let mut hi = 0.0f64;
    let mut lo = 0.0f64;
    for i in 0..fi.n() {
        for j in 0..fi.k() {
            hi = hi.max(fi.utility(i, j));
            lo = lo.min(fi.utility(i, j));
        }
    }
    hi - lo + 1.0
}

struct Layout {
    n: usize,
    a: usize,
}

impl Layout {
    // variables: f, g, y1_i, y2_i, p_j, r_j, b_ij (i-major)
    fn f(&self) -> usize {
        0
    }
    fn g(&self) -> usize {
        1
    }
    fn y1(&self, i: usize) -> usize {
        2 + i
    }
    fn y2(&self, i: usize) -> usize {
        2 + self.n + i
    }
    fn p(&self, j: usize) -> usize {
        2 + 2 * self.n + j
    }
    fn r(&self, j: usize) -> usize {
        2 + 2 * self.n + self.a + j
    }
    fn b(&self, i: usize, j: usize) -> usize {
        2 + 2 * self.n + 2 * self.a + i * self.a + j
    }
    fn num_vars(&self) -> usize {
        2 + 2 * self.n + 2 * self.a + self.n * self.a
    }
    // rows, in the formulation's printed order
    fn row_alpha(&self, i: usize) -> usize {
        i
    }
    fn row_beta(&self, i: usize) -> usize {
        self.n + i
    }
    fn row_gamma(&self, i: usize, j: usize) -> usize {
        2 * self.n + i * self.a + j
    }
    fn row_delta(&self, i: usize, j: usize) -> usize {
        2 * self.n + self.n * self.a + i * self.a + j
    }
    fn row_upsilon(&self, i: usize) -> usize {
        2 * self.n + 2 * self.n * self.a + i
    }
    fn row_zeta(&self, i: usize) -> usize {
        3 * self.n + 2 * self.n * self.a + i
    }
    fn row_eta(&self, j: usize) -> usize {
        4 * self.n + 2 * self.n * self.a + j
    }
    fn row_theta(&self, j: usize) -> usize {
        4 * self.n + 2 * self.n * self.a + self.a + j
    }
    fn row_nu(&self) -> usize {
        4 * self.n + 2 * self.n * self.a + 2 * self.a
    }
    fn row_lambda(&self, j: usize) -> usize {
        self.row_nu() + 1 + j
    }
    fn row_mu(&self, i: usize, j: usize) -> usize {
        self.row_nu() + 1 + self.a + i * self.a + j
    }
}

/// Restricted master: the linear relaxation of the probabilistic-equivalent
/// MILP over `active`, with both integrality requirements dropped and the
/// binaries relaxed into `[0, 1]` via explicit upper-bound rows.
pub fn build_master(
    fi: &FilteredInstance,
    weights: (Scalar, Scalar),
    active: &[usize],
    eps: Scalar,
    big_m: Scalar,
) -> Result<MasterState> {
    if active.is_empty() {
        return Err(FotError::InvalidInstance("colgen master needs a non-empty active set".into()));
    }
    for &j in active {
        if j >= fi.k() {
            return Err(FotError::InvalidInstance(format!(
                "active column {j} outside the surviving set of size {}",
                fi.k()
            )));
        }
    }
    let (w1, w2) = weights;
    let n = fi.n();
    let a = active.len();
    let lay = Layout { n, a };
    let mut minimize = vec![0.0; lay.num_vars()];
    minimize[lay.f()] = 1.0;
    minimize[lay.g()] = -1.0;
    let mut lp = LpProblem::new(minimize);
    lp.bounds[lay.f()] = Bounds::free();
    lp.bounds[lay.g()] = Bounds::free();
    for i in 0..n {
        lp.bounds[lay.y1(i)] = Bounds::free();
        lp.bounds[lay.y2(i)] = Bounds::free();
    }
    let u = |i: usize, j: usize| fi.utility(i, active[j]);
    let zero = || vec![0.0; lay.num_vars()];
    // (alpha_i): w1 y1 + w2 y2 - g >= 0
    for i in 0..n {
        let mut row = zero();
        row[lay.y1(i)] = w1;
        row[lay.y2(i)] = w2;
        row[lay.g()] = -1.0;
        lp.push_row(row, Sense::Ge, 0.0);
    }
    // (beta_i): w1 y1 + w2 y2 - f <= 0
    for i in 0..n {
        let mut row = zero();
        row[lay.y1(i)] = w1;
        row[lay.y2(i)] = w2;
        row[lay.f()] = -1.0;
        lp.push_row(row, Sense::Le, 0.0);
    }
    // (gamma_ij): u r_j - y1_i - M b_ij <= 0
    for i in 0..n {
        for j in 0..a {
            let mut row = zero();
            row[lay.r(j)] = u(i, j);
            row[lay.y1(i)] = -1.0;
            row[lay.b(i, j)] = -big_m;
            lp.push_row(row, Sense::Le, 0.0);
        }
    }
    // (delta_ij): y1_i - u r_j + M r_j <= M
    for i in 0..n {
        for j in 0..a {
            let mut row = zero();
            row[lay.y1(i)] = 1.0;
            row[lay.r(j)] = big_m - u(i, j);
            lp.push_row(row, Sense::Le, big_m);
        }
    }
    // (upsilon_i): y2_i - sum_j p_j u_ij = 0
    for i in 0..n {
        let mut row = zero();
        row[lay.y2(i)] = 1.0;
        for j in 0..a {
            row[lay.p(j)] = -u(i, j);
        }
        lp.push_row(row, Sense::Eq, 0.0);
    }
    // (zeta_i): sum_j b_ij - sum_j r_j = -1
    for i in 0..n {
        let mut row = zero();
        for j in 0..a {
            row[lay.b(i, j)] = 1.0;
            row[lay.r(j)] = -1.0;
        }
        lp.push_row(row, Sense::Eq, -1.0);
    }
    // (eta_j): r_j - p_j >= 0
    for j in 0..a {
        let mut row = zero();
        row[lay.r(j)] = 1.0;
        row[lay.p(j)] = -1.0;
        lp.push_row(row, Sense::Ge, 0.0);
    }
    // (theta_j): p_j - eps r_j >= 0
    for j in 0..a {
        let mut row = zero();
        row[lay.p(j)] = 1.0;
        row[lay.r(j)] = -eps;
        lp.push_row(row, Sense::Ge, 0.0);
    }
    // (nu): sum_j p_j = 1
    let mut row = zero();
    for j in 0..a {
        row[lay.p(j)] = 1.0;
    }
    lp.push_row(row, Sense::Eq, 1.0);
    // (lambda_j): r_j <= 1
    for j in 0..a {
        let mut row = zero();
        row[lay.r(j)] = 1.0;
        lp.push_row(row, Sense::Le, 1.0);
    }
    // (mu_ij): b_ij <= 1
    for i in 0..n {
        for j in 0..a {
            let mut row = zero();
            row[lay.b(i, j)] = 1.0;
            lp.push_row(row, Sense::Le, 1.0);
        }
    }
    Ok(MasterState { active: active.to_vec(), weights, lp, last: None, eps, big_m })
}

pub fn solve_master(state: &mut MasterState) -> Result<()> {
    let r = solve_lp(&state.lp)?;
    if r.status != LpStatus::Optimal {
        return Err(FotError::Lp(format!("restricted master not optimal: {:?}", r.status)));
    }
    state.last = Some(r);
    Ok(())
}

/// Map the simplex's rhs sensitivities onto the labeled duals, with signs
/// normalized so the dual rows read exactly as printed: `<=`-row duals are
/// negated so alpha..theta, lambda, mu are all non-negative. Verifies the
/// `(f)` and `(g)` dual rows and strong duality on every extraction.
pub fn extract_duals(fi: &FilteredInstance, state: &MasterState) -> Result<DualVector> {
    let last = state
        .last
        .as_ref()
        .ok_or_else(|| FotError::Lp("extract_duals before solve_master".into()))?;
    let n = fi.n();
    let a = state.active.len();
    let lay = Layout { n, a };
    let y = &last.duals;
    let d = DualVector {
        alpha: (0..n).map(|i| y[lay.row_alpha(i)]).collect(),
        beta: (0..n).map(|i| -y[lay.row_beta(i)]).collect(),
        gamma: (0..n)
            .map(|i| (0..a).map(|j| -y[lay.row_gamma(i, j)]).collect())
            .collect(),
        delta: (0..n)
            .map(|i| (0..a).map(|j| -y[lay.row_delta(i, j)]).collect())
            .collect(),
        upsilon: (0..n).map(|i| y[lay.row_upsilon(i)]).collect(),
        zeta: (0..n).map(|i| -y[lay.row_zeta(i)]).collect(),
        eta: (0..a).map(|j| y[lay.row_eta(j)]).collect(),
        theta: (0..a).map(|j| y[lay.row_theta(j)]).collect(),
        nu: y[lay.row_nu()],
        lambda: (0..a).map(|j| -y[lay.row_lambda(j)]).collect(),
        mu: (0..n).map(|i| (0..a).map(|j| -y[lay.row_mu(i, j)]).collect()).collect(),
    };
    let sum_beta: Scalar = d.beta.iter().sum();
    let sum_alpha: Scalar = d.alpha.iter().sum();
    if sum_beta > 1.0 + PRICE_TOL || sum_alpha < 1.0 - PRICE_TOL {
        return Err(FotError::Lp(format!(
            "dual rows (f)/(g) violated: sum beta = {sum_beta}, sum alpha = {sum_alpha}"
        )));
    }
    let dual_obj = dual_objective(state, &d);
    if (dual_obj - last.objective).abs() > 1e-6 * (1.0 + last.objective.abs()) {
        return Err(FotError::Lp(format!(
            "strong duality violated: dual {dual_obj} vs primal {}",
            last.objective
        )));
    }
    Ok(d)
}

fn dual_objective(state: &MasterState, d: &DualVector) -> Scalar {
    let lam: Scalar = d.lambda.iter().sum();
    let mu_and_mdelta: Scalar = d
        .mu
        .iter()
        .zip(&d.delta)
        .flat_map(|(mr, dr)| mr.iter().zip(dr).map(|(m, dd)| m + state.big_m * dd))
        .sum();
    let zeta: Scalar = d.zeta.iter().sum();
    -lam - mu_and_mdelta + zeta + d.nu
}

/// Exhaustive pricing over the non-active decisions. A candidate's own
/// duals are absent from the restricted dual, so its rows are evaluated at
/// zero through the substitutions: the `(p_j)` residual becomes
/// `sum_i u_ij upsilon_i - nu`, and the `(r_j)` residual becomes
/// `-sum_i zeta_i` — a positive `lambda_j` substitution means the row needs
/// paid slack, i.e. the candidate's `r_j` column has negative reduced cost
/// even when `(p_j)` holds (this is the row-generation half: the candidate
/// enters through its consistency rows, not its probability mass). Returns
/// the most violated candidate below `-PRICE_TOL`; ties broken by the more
/// negative `(p_j)` residual, then the lowest index.
pub fn price(fi: &FilteredInstance, duals: &DualVector, active: &[usize]) -> Option<usize> {
    let sum_zeta: Scalar = duals.zeta.iter().sum();
    let res_r = -sum_zeta.max(0.0);
    let mut best: Option<(Scalar, Scalar, usize)> = None;
    for j in 0..fi.k() {
        if active.contains(&j) {
            continue;
        }
        let res_p = pricing_residual(fi, duals, j);
        let res = res_p.min(res_r);
        if res < -PRICE_TOL
            && best.map_or(true, |(b, bp, _)| res < b || (res == b && res_p < bp))
        {
            best = Some((res, res_p, j));
        }
    }
    best.map(|(_, _, j)| j)
}

/// Residual of the substituted `(p_j)` dual row at a decision; used by the
/// trace and the dual-feasibility checks.
pub fn pricing_residual(fi: &FilteredInstance, duals: &DualVector, j: usize) -> Scalar {
    (0..fi.n()).map(|i| fi.utility(i, j) * duals.upsilon[i]).sum::<Scalar>() - duals.nu
}

/// Run the simultaneous row-and-column generation loop from the singleton
/// `argmax c` until pricing finds no violated dual row.
pub fn run_colgen(fi: &FilteredInstance, weights: (Scalar, Scalar)) -> Result<ColgenRun> {
    let eps = DEFAULT_EPS;
    let big_m = default_big_m(fi);
    let start = (0..fi.k())
        .max_by(|x, y| fi.efficiency(*x).total_cmp(&fi.efficiency(*y)).then(y.cmp(x)))
        .ok_or_else(|| FotError::InvalidInstance("no decisions survive the filter".into()))?;
    let mut active = vec![start];
    let cap = fi.k() + 5;
    let mut trace = Vec::new();
    let mut entering: Option<usize> = None;
    let mut prev_value = f64::INFINITY;
    for iteration in 1..=cap {
        let mut state = build_master(fi, weights, &active, eps, big_m)?;
        solve_master(&mut state)?;
        let value = state.last.as_ref().unwrap().objective;
        debug_assert!(
            value <= prev_value + 1e-9,
            "master value increased: {prev_value} -> {value}"
        );
        prev_value = value;
        let duals = extract_duals(fi, &state)?;
        let candidate = price(fi, &duals, &active);
        let sum_zeta: Scalar = duals.zeta.iter().sum();
        let max_violation = candidate
            .map(|j| -pricing_residual(fi, &duals, j).min(-sum_zeta.max(0.0)))
            .unwrap_or(0.0);
        trace.push(TraceRow { iteration, entering, master_value: value, max_violation });
        match candidate {
            None => {
                return Ok(ColgenRun { state, value, iterations: iteration, trace });
            }
            Some(j) => {
                active.push(j);
                entering = Some(j);
            }
        }
    }
    Err(FotError::ColgenStalled(cap))
}

/// Evaluate every printed dual row at every decision in the surviving set,
/// taking the substituted values for non-active columns; returns the worst
/// (most positive) slack violation.
pub fn dual_feasibility_gap(fi: &FilteredInstance, state: &MasterState, d: &DualVector) -> Scalar {
    let n = fi.n();
    let (w1, w2) = state.weights;
    let mut worst: Scalar = d.beta.iter().sum::<Scalar>() - 1.0;
    worst = worst.max(1.0 - d.alpha.iter().sum::<Scalar>());
    for i in 0..n {
        let gamma_minus_delta: Scalar =
            d.gamma[i].iter().zip(&d.delta[i]).map(|(g, dd)| g - dd).sum();
        worst = worst.max(w1 * (d.alpha[i] - d.beta[i]) + gamma_minus_delta);
        worst = worst.max(w2 * (d.alpha[i] - d.beta[i]) + d.upsilon[i]);
    }
    let sum_zeta: Scalar = d.zeta.iter().sum();
    for j in 0..fi.k() {
        if let Some(pos) = state.active.iter().position(|&x| x == j) {
            // (p_j), (r_j), (b_ij) with the column's own extracted duals
            let uu: Scalar = (0..n).map(|i| fi.utility(i, j) * d.upsilon[i]).sum();
            worst = worst.max(-uu - d.eta[pos] + d.theta[pos] + d.nu);
            // the delta rows carry r with coefficient (M - u), so the dual
            // row for r_j picks up -M*sum_i delta_ij on top of the printed
            // u*(delta - gamma) form
            let ud: Scalar = (0..n)
                .map(|i| {
                    fi.utility(i, j) * (d.delta[i][pos] - d.gamma[i][pos])
                        - state.big_m * d.delta[i][pos]
                })
                .sum();
            worst = worst
                .max(ud + sum_zeta + d.eta[pos] - state.eps * d.theta[pos] - d.lambda[pos]);
            for i in 0..n {
                worst = worst.max(state.big_m * d.gamma[i][pos] - d.zeta[i] - d.mu[i][pos]);
            }
        } else {
            // non-active: gamma = delta = eta = theta = 0 and the
            // substitutions close (r_j) and (b_ij); only (p_j) can fail
            worst = worst.max(-pricing_residual(fi, d, j));
            let lambda_j = sum_zeta.max(0.0);
            worst = worst.max(sum_zeta - lambda_j);
            for i in 0..n {
                let mu_ij = (-d.zeta[i]).max(0.0);
                worst = worst.max(-d.zeta[i] - mu_ij);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::AggregatorSpec;
    use crate::instance::{alpha_filter, gen_random, Instance};
    use crate::relaxation::{evaluate_probs, solve_relaxation};
    use crate::unfairness::UnfairnessSpec;

    fn toy() -> FilteredInstance {
        let inst = Instance {
            n: 2,
            k: 2,
            alpha: 0.5,
            utilities: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            efficiency: vec![1.0, 1.0],
            labels: None,
        };
        alpha_filter(&inst).unwrap()
    }

    fn full_master_value(fi: &FilteredInstance, weights: (f64, f64)) -> f64 {
        let all: Vec<usize> = (0..fi.k()).collect();
        let mut state =
            build_master(fi, weights, &all, DEFAULT_EPS, default_big_m(fi)).unwrap();
        solve_master(&mut state).unwrap();
        state.last.unwrap().objective
    }

    #[test]
    fn singleton_master_is_the_gap_of_one_column() {
        let fi = toy();
        let mut state =
            build_master(&fi, (0.5, 0.5), &[0], DEFAULT_EPS, default_big_m(&fi)).unwrap();
        solve_master(&mut state).unwrap();
        // one column: min = avg = u_i0, so the value is the plain gap
        assert!((state.last.unwrap().objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn toy_two_columns_reach_zero() {
        let fi = toy();
        let run = run_colgen(&fi, (0.5, 0.5)).unwrap();
        assert_eq!(run.iterations, 2);
        assert!(run.value.abs() < 1e-8, "value {}", run.value);
        assert_eq!(run.state.active.len(), 2);
    }

    #[test]
    fn k1_terminates_immediately() {
        let inst = gen_random(2, 1, 5, 0.1).unwrap();
        let fi = alpha_filter(&inst).unwrap();
        let run = run_colgen(&fi, (0.5, 0.5)).unwrap();
        assert_eq!(run.iterations, 1);
        assert!(run.trace[0].entering.is_none());
    }

    #[test]
    fn pure_average_weights_match_relaxation_lp() {
        for seed in 0..10 {
            let inst = gen_random(3, 4, 700 + seed, 0.1).unwrap();
            let fi = alpha_filter(&inst).unwrap();
            let run = run_colgen(&fi, (0.0, 1.0)).unwrap();
            let r = solve_relaxation(&fi, &AggregatorSpec::Average, &UnfairnessSpec::Gap).unwrap();
            assert!(
                (run.value - r.objective).abs() < 1e-6,
                "seed {seed}: colgen {} vs lp {}",
                run.value,
                r.objective
            );
        }
    }

    #[test]
    fn converges_to_the_full_master_on_random_instances() {
        for seed in 0..50 {
            let inst = gen_random(1 + (seed as usize % 3), 1 + (seed as usize % 6), seed, 0.1)
                .unwrap();
            let fi = alpha_filter(&inst).unwrap();
            let run = run_colgen(&fi, (0.5, 0.5)).unwrap();
            let full = full_master_value(&fi, (0.5, 0.5));
            assert!(
                (run.value - full).abs() < 1e-7,
                "seed {seed}: colgen {} vs full {}",
                run.value,
                full
            );
            assert!(run.iterations <= fi.k() + 1, "seed {seed}: {} rounds", run.iterations);
            let duals = extract_duals(&fi, &run.state).unwrap();
            let gap = dual_feasibility_gap(&fi, &run.state, &duals);
            assert!(gap <= PRICE_TOL, "seed {seed}: dual gap {gap}");
            let values: Vec<f64> = run.trace.iter().map(|t| t.master_value).collect();
            for w in values.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "seed {seed}: not monotone {values:?}");
            }
        }
    }

    #[test]
    fn duplicate_column_is_not_priced() {
        let inst = Instance {
            n: 2,
            k: 3,
            alpha: 0.5,
            utilities: vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            efficiency: vec![1.0, 1.0, 1.0],
            labels: None,
        };
        let fi = alpha_filter(&inst).unwrap();
        let run = run_colgen(&fi, (0.5, 0.5)).unwrap();
        // column 2 duplicates column 0; once {0, 1} is optimal its residual
        // cannot be violated
        assert!(!run.state.active.contains(&2));
    }

    #[test]
    fn nu_is_the_simplex_row_sensitivity() {
        let fi = toy();
        let mut state =
            build_master(&fi, (0.5, 0.5), &[0], DEFAULT_EPS, default_big_m(&fi)).unwrap();
        solve_master(&mut state).unwrap();
        let duals = extract_duals(&fi, &state).unwrap();
        let base = state.last.as_ref().unwrap().objective;
        let h = 1e-4;
        let lay_nu = {
            let n = fi.n();
            let lay = Layout { n, a: 1 };
            lay.row_nu()
        };
        let mut perturbed = state.lp.clone();
        perturbed.rows[lay_nu].rhs = 1.0 - h;
        let r = solve_lp(&perturbed).unwrap();
        let fd = (base - r.objective) / h;
        assert!((fd - duals.nu).abs() < 1e-5, "fd {fd} vs nu {}", duals.nu);
    }

    #[test]
    fn zero_utilities_zero_duals() {
        let inst = Instance {
            n: 2,
            k: 2,
            alpha: 1.0,
            utilities: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            efficiency: vec![1.0, 1.0],
            labels: None,
        };
        let fi = alpha_filter(&inst).unwrap();
        let run = run_colgen(&fi, (0.5, 0.5)).unwrap();
        assert!(run.value.abs() < 1e-9);
        let duals = extract_duals(&fi, &run.state).unwrap();
        let linked: f64 = duals
            .upsilon
            .iter()
            .chain(duals.gamma.iter().flatten())
            .chain(duals.delta.iter().flatten())
            .map(|x| x.abs())
            .sum();
        assert!(linked < 1e-7, "utility-linked duals {linked}");
    }

    #[test]
    fn colgen_value_lower_bounds_integer_relaxation() {
        // the relaxed-binary master can only under-shoot the true
        // probabilistic relaxation of the min+avg composite
        for seed in 0..10 {
            let inst = gen_random(2, 3, 800 + seed, 0.1).unwrap();
            let fi = alpha_filter(&inst).unwrap();
            let run = run_colgen(&fi, (0.5, 0.5)).unwrap();
            let spec = AggregatorSpec::min_avg_combo(0.5, 0.5);
            let r = solve_relaxation(&fi, &spec, &UnfairnessSpec::Gap).unwrap();
            assert!(
                run.value <= r.objective + 1e-6,
                "seed {seed}: master {} above relaxation {}",
                run.value,
                r.objective
            );
            let _ = evaluate_probs(&fi, &spec, &UnfairnessSpec::Gap, &r.p.probs).unwrap();
        }
    }
}


