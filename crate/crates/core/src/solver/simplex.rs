//! Bounded revised simplex over `A x + s = b`.
//!
//! The basis inverse is held explicitly (dense, column-major) and updated
//! in product form after each pivot. Phase one minimizes the sum of bound
//! infeasibilities of the basic variables; phase two minimizes the cost.
//! The ratio test is the two-pass Harris test. Pricing is Dantzig's rule,
//! switching to Bland's rule after a long run of non-improving pivots.

use super::{PivotRule, SolveOptions, Status};

const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const REFACTOR_EVERY: usize = 100;
const MAX_VERIFICATIONS: usize = 20;

/// Problem in computational form: structural columns `0..n` are stored
/// compressed by column; column `n + i` is the slack of row `i`.
pub(crate) struct StdForm {
    pub m: usize,
    pub n: usize,
    pub col_start: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub vals: Vec<f64>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

pub(crate) struct SimplexResult {
    pub status: Status,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub d: Vec<f64>,
    pub state: Vec<VarState>,
    pub iterations: usize,
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { row: usize, theta: f64, bound: f64 },
}

struct Simplex<'a> {
    lp: &'a StdForm,
    ftol: f64,
    dtol: f64,
    max_iterations: usize,
    rule: PivotRule,
    m: usize,
    basis: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    binv: Vec<f64>,
    alpha: Vec<f64>,
    alpha_nz: Vec<usize>,
    cb: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    /// `y` matches phase-two costs and the current basis.
    duals_current: bool,
    row_r: Vec<f64>,
}

pub(crate) fn run(lp: &StdForm, opts: &SolveOptions) -> SimplexResult {
    let mut s = Simplex::new(lp, opts);
    let status = s.solve();
    s.set_costs(false);
    s.compute_duals();
    s.compute_reduced_costs(false);
    SimplexResult {
        status,
        x: s.x,
        y: s.y,
        d: s.d,
        state: s.state,
        iterations: s.iterations,
    }
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a StdForm, opts: &SolveOptions) -> Self {
        let m = lp.m;
        let ntot = lp.n + m;
        let mut state = vec![VarState::Basic; ntot];
        let mut x = vec![0.0; ntot];
        for j in 0..lp.n {
            let (lo, up) = (lp.lower[j], lp.upper[j]);
            if lo.is_finite() {
                state[j] = VarState::AtLower;
                x[j] = lo;
            } else if up.is_finite() {
                state[j] = VarState::AtUpper;
                x[j] = up;
            } else {
                state[j] = VarState::Free;
            }
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let mut s = Simplex {
            lp,
            ftol: opts.feasibility_tol,
            dtol: opts.optimality_tol,
            max_iterations: opts.max_iterations,
            rule: opts.pivot_rule,
            m,
            basis: (lp.n..ntot).collect(),
            state,
            x,
            binv,
            alpha: vec![0.0; m],
            alpha_nz: Vec::with_capacity(m),
            cb: vec![0.0; m],
            y: vec![0.0; m],
            d: vec![0.0; ntot],
            iterations: 0,
            since_refactor: 0,
            duals_current: false,
            row_r: vec![0.0; m],
        };
        s.compute_basic_values();
        s
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lp = self.lp;
        let range = if j < lp.n { lp.col_start[j]..lp.col_start[j + 1] } else { 0..0 };
        let slack = (j >= lp.n).then(|| (j - lp.n, 1.0));
        range.map(move |k| (lp.row_idx[k], lp.vals[k])).chain(slack)
    }

    fn compute_basic_values(&mut self) {
        let m = self.m;
        let mut r = self.lp.b.clone();
        for j in 0..self.lp.n + m {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for (i, a) in self.column(j) {
                    r[i] -= a * xj;
                }
            }
        }
        let mut xb = vec![0.0; m];
        for (k, &rk) in r.iter().enumerate() {
            if rk != 0.0 {
                let col = &self.binv[k * m..(k + 1) * m];
                for (v, &c) in xb.iter_mut().zip(col) {
                    *v += rk * c;
                }
            }
        }
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[p];
        }
    }

    /// `alpha = B^-1 a_j`, with the list of its nonzero positions.
    fn ftran(&mut self, j: usize) {
        let m = self.m;
        self.alpha.fill(0.0);
        let entries: Vec<(usize, f64)> = self.column(j).collect();
        for (i, a) in entries {
            let col = &self.binv[i * m..(i + 1) * m];
            for (v, &c) in self.alpha.iter_mut().zip(col) {
                *v += a * c;
            }
        }
        self.alpha_nz.clear();
        for (p, v) in self.alpha.iter_mut().enumerate() {
            if v.abs() <= DROP_TOL {
                *v = 0.0;
            } else {
                self.alpha_nz.push(p);
            }
        }
    }

    /// Product-form update of the inverse for a pivot in position `r`.
    fn pivot_update(&mut self, r: usize) {
        let m = self.m;
        let ar = self.alpha[r];
        for k in 0..m {
            let col = &mut self.binv[k * m..(k + 1) * m];
            let v = col[r];
            if v == 0.0 {
                continue;
            }
            let f = v / ar;
            for &i in &self.alpha_nz {
                col[i] -= self.alpha[i] * f;
            }
            col[r] = f;
        }
    }

    /// Rebuilds the inverse from scratch: basic slacks keep their own rows,
    /// structural columns are pivoted in with partial pivoting. Columns that
    /// turn out dependent are replaced by slacks.
    fn refactor(&mut self) {
        let m = self.m;
        let n = self.lp.n;
        self.binv.fill(0.0);
        for i in 0..m {
            self.binv[i * m + i] = 1.0;
        }
        let mut claimed = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        let mut structurals = Vec::new();
        for &j in &self.basis {
            if j >= n {
                claimed[j - n] = true;
                new_basis[j - n] = j;
            } else {
                structurals.push(j);
            }
        }
        for j in structurals {
            self.ftran(j);
            let mut best = None;
            let mut best_abs = SINGULAR_TOL;
            for &p in &self.alpha_nz {
                if !claimed[p] && self.alpha[p].abs() > best_abs {
                    best_abs = self.alpha[p].abs();
                    best = Some(p);
                }
            }
            match best {
                Some(r) => {
                    self.pivot_update(r);
                    claimed[r] = true;
                    new_basis[r] = j;
                }
                None => {
                    log::debug!("dropping dependent column {j} from the basis");
                    self.make_nonbasic_near(j);
                }
            }
        }
        for (i, slot) in new_basis.iter_mut().enumerate() {
            if *slot == usize::MAX {
                *slot = n + i;
            }
        }
        self.basis = new_basis;
        for &j in &self.basis {
            self.state[j] = VarState::Basic;
        }
        self.since_refactor = 0;
        self.duals_current = false;
        self.compute_basic_values();
    }

    fn make_nonbasic_near(&mut self, j: usize) {
        let (lo, up) = (self.lp.lower[j], self.lp.upper[j]);
        let v = self.x[j];
        let (state, value) = match (lo.is_finite(), up.is_finite()) {
            (true, true) if (v - lo).abs() <= (up - v).abs() => (VarState::AtLower, lo),
            (true, true) => (VarState::AtUpper, up),
            (true, false) => (VarState::AtLower, lo),
            (false, true) => (VarState::AtUpper, up),
            (false, false) => (VarState::Free, 0.0),
        };
        self.state[j] = state;
        self.x[j] = value;
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.lp.n {
            self.lp.cost[j]
        } else {
            0.0
        }
    }

    /// Fills the basic cost vector; returns whether phase one is active.
    fn set_costs(&mut self, allow_phase1: bool) -> bool {
        let mut infeasible = false;
        if allow_phase1 {
            for (p, &j) in self.basis.iter().enumerate() {
                let v = self.x[j];
                self.cb[p] = if v < self.lp.lower[j] - self.ftol {
                    infeasible = true;
                    -1.0
                } else if v > self.lp.upper[j] + self.ftol {
                    infeasible = true;
                    1.0
                } else {
                    0.0
                };
            }
        }
        if !infeasible {
            for (p, &j) in self.basis.iter().enumerate() {
                self.cb[p] = self.cost(j);
            }
        }
        infeasible
    }

    fn phase_objective(&self, phase1: bool) -> f64 {
        if phase1 {
            self.basis
                .iter()
                .map(|&j| {
                    let v = self.x[j];
                    (self.lp.lower[j] - v).max(0.0) + (v - self.lp.upper[j]).max(0.0)
                })
                .sum()
        } else {
            (0..self.lp.n).map(|j| self.lp.cost[j] * self.x[j]).sum()
        }
    }

    fn compute_duals(&mut self) {
        let m = self.m;
        for k in 0..m {
            let col = &self.binv[k * m..(k + 1) * m];
            self.y[k] = col.iter().zip(&self.cb).map(|(a, c)| a * c).sum();
        }
    }

    /// Rank-one dual update for a pivot in position `r`, applied before the
    /// inverse changes: `y += d_q / alpha_r * (row r of B^-1)`.
    fn update_duals(&mut self, r: usize, d_q: f64) {
        let m = self.m;
        let f = d_q / self.alpha[r];
        for k in 0..m {
            self.row_r[k] = self.binv[k * m + r];
        }
        for (y, &v) in self.y.iter_mut().zip(&self.row_r) {
            *y += f * v;
        }
    }

    fn compute_reduced_costs(&mut self, phase1: bool) {
        let n = self.lp.n;
        for j in 0..n + self.m {
            if self.state[j] == VarState::Basic {
                self.d[j] = 0.0;
                continue;
            }
            let c = if phase1 { 0.0 } else { self.cost(j) };
            let ya: f64 = self.column(j).map(|(i, a)| self.y[i] * a).sum();
            self.d[j] = c - ya;
        }
    }

    /// Entering variable and its direction of movement.
    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.lp.n + self.m {
            let d = self.d[j];
            let dir = match self.state[j] {
                VarState::Basic => continue,
                VarState::AtLower if d < -self.dtol && self.lp.upper[j] > self.lp.lower[j] => 1.0,
                VarState::AtUpper if d > self.dtol && self.lp.upper[j] > self.lp.lower[j] => -1.0,
                VarState::Free if d.abs() > self.dtol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Bound a basic variable moving at `rate` runs into, or `None` if it
    /// never blocks.
    fn blocking_bound(&self, j: usize, rate: f64, phase1: bool) -> Option<f64> {
        let (lo, up, v) = (self.lp.lower[j], self.lp.upper[j], self.x[j]);
        let below = phase1 && v < lo - self.ftol;
        let above = phase1 && v > up + self.ftol;
        let bound = if rate < 0.0 {
            if below {
                return None;
            }
            if above {
                up
            } else {
                lo
            }
        } else {
            if above {
                return None;
            }
            if below {
                lo
            } else {
                up
            }
        };
        bound.is_finite().then_some(bound)
    }

    fn ratio_test(&self, q: usize, dir: f64, phase1: bool, bland: bool) -> Step {
        let range = self.lp.upper[q] - self.lp.lower[q];
        let mut candidates = Vec::new();
        let mut theta_max = f64::INFINITY;
        for &p in &self.alpha_nz {
            let a = self.alpha[p];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let rate = -dir * a;
            let j = self.basis[p];
            let Some(bound) = self.blocking_bound(j, rate, phase1) else {
                continue;
            };
            let dist = (bound - self.x[j]) / rate;
            let relaxed = ((bound - self.x[j]) + rate.signum() * self.ftol) / rate;
            if !bland {
                theta_max = theta_max.min(relaxed);
            }
            candidates.push((p, dist.max(0.0), bound));
        }
        if bland {
            theta_max = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        }
        if range.is_finite() && range <= theta_max {
            return Step::Flip(range);
        }
        if candidates.is_empty() {
            return Step::Unbounded;
        }
        let mut chosen: Option<(usize, f64, f64)> = None;
        for &(p, dist, bound) in &candidates {
            if bland {
                if dist <= theta_max + 1e-12 {
                    let better = chosen.map_or(true, |(cp, _, _)| self.basis[p] < self.basis[cp]);
                    if better {
                        chosen = Some((p, dist, bound));
                    }
                }
            } else if dist <= theta_max {
                let better = chosen.map_or(true, |(cp, _, _)| self.alpha[p].abs() > self.alpha[cp].abs());
                if better {
                    chosen = Some((p, dist, bound));
                }
            }
        }
        match chosen {
            Some((row, theta, bound)) => Step::Pivot { row, theta, bound },
            None => Step::Unbounded,
        }
    }

    fn apply_step(&mut self, q: usize, dir: f64, theta: f64) {
        if theta != 0.0 {
            self.x[q] += dir * theta;
            for &p in &self.alpha_nz {
                let j = self.basis[p];
                self.x[j] -= dir * self.alpha[p] * theta;
            }
        }
    }

    fn solve(&mut self) -> Status {
        let mut stalled = 0usize;
        let mut last: Option<(bool, f64)> = None;
        let mut verifications = 0usize;
        let mut troubles = 0usize;
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let phase1 = self.set_costs(true);
            let obj = self.phase_objective(phase1);
            match last {
                Some((was1, prev)) if was1 == phase1 && obj >= prev - 1e-12 * (1.0 + prev.abs()) => {
                    stalled += 1
                }
                _ => stalled = 0,
            }
            last = Some((phase1, obj));
            let bland = self.rule == PivotRule::Bland || stalled > 3 * self.m.max(1);

            if phase1 || !self.duals_current {
                self.compute_duals();
                self.duals_current = !phase1;
            }
            self.compute_reduced_costs(phase1);
            let Some((q, dir)) = self.price(bland) else {
                if self.since_refactor > 0 && verifications < MAX_VERIFICATIONS {
                    verifications += 1;
                    self.refactor();
                    continue;
                }
                return if phase1 { Status::Infeasible } else { Status::Optimal };
            };
            if self.iterations >= self.max_iterations {
                return Status::IterationLimit;
            }
            self.ftran(q);
            match self.ratio_test(q, dir, phase1, bland) {
                Step::Unbounded => {
                    if !phase1 {
                        return Status::Unbounded;
                    }
                    troubles += 1;
                    if troubles > 5 {
                        log::warn!("phase one reports an unbounded ray; giving up");
                        return Status::IterationLimit;
                    }
                    self.refactor();
                    continue;
                }
                Step::Flip(range) => {
                    self.apply_step(q, dir, range);
                    let (lo, up) = (self.lp.lower[q], self.lp.upper[q]);
                    if dir > 0.0 {
                        self.state[q] = VarState::AtUpper;
                        self.x[q] = up;
                    } else {
                        self.state[q] = VarState::AtLower;
                        self.x[q] = lo;
                    }
                }
                Step::Pivot { row, theta, bound } => {
                    self.apply_step(q, dir, theta);
                    let leaving = self.basis[row];
                    self.x[leaving] = bound;
                    self.state[leaving] = if bound == self.lp.lower[leaving] {
                        VarState::AtLower
                    } else {
                        VarState::AtUpper
                    };
                    self.basis[row] = q;
                    self.state[q] = VarState::Basic;
                    if self.duals_current {
                        self.update_duals(row, self.d[q]);
                    }
                    self.pivot_update(row);
                    self.since_refactor += 1;
                }
            }
            self.iterations += 1;
        }
    }
}
