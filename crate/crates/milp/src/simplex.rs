//! Dense bounded-variable simplex.
//!
//! Every row `i` gets a slack column `n + i` so the system reads `A x + s = b`
//! with the row sense encoded in the slack bounds. The tableau `B^-1 [A | I]`
//! is stored explicitly; the models this crate targets have at most a few
//! thousand columns and the tableau stays sparse enough that row updates
//! skipping zeros are cheap.
//!
//! Both primal (with a sum-of-infeasibilities phase one) and dual iterations
//! are available. The dual method is what makes branch-and-bound cheap: after
//! a bound change the previous optimal basis stays dual feasible.

use std::time::Instant;

use crate::model::{Model, Sense};

const PIVOT_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-7;
const REFACTOR_EVERY: usize = 120;
const DEGENERATE_STREAK: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pos {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    TimeLimit,
}

enum Step {
    Flip,
    Pivot(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    m: usize,
    n: usize,
    ncols: usize,
    /// Structural matrix, row major `m x n`, kept for refactorisation.
    a: Vec<f64>,
    b: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    tab: Vec<f64>,
    beta0: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<Pos>,
    xb: Vec<f64>,
    since_refactor: usize,
    pub(crate) iterations: usize,
    pub(crate) max_iterations: usize,
    pub(crate) deadline: Option<Instant>,
}

impl Simplex {
    pub(crate) fn from_model(model: &Model) -> Simplex {
        let m = model.rows.len();
        let n = model.vars.len();
        let ncols = n + m;
        let mut a = vec![0.0; m * n];
        let mut b = vec![0.0; m];
        let mut lower = vec![0.0; ncols];
        let mut upper = vec![0.0; ncols];
        let mut cost = vec![0.0; ncols];
        for (j, v) in model.vars.iter().enumerate() {
            lower[j] = v.lower;
            upper[j] = v.upper;
            cost[j] = v.obj;
        }
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, coef) in &row.coeffs {
                a[i * n + j.0] += coef;
            }
            b[i] = row.rhs;
            let (lo, hi) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower[n + i] = lo;
            upper[n + i] = hi;
        }
        let mut s = Simplex {
            m,
            n,
            ncols,
            a,
            b,
            cost,
            lower,
            upper,
            tab: Vec::new(),
            beta0: Vec::new(),
            basis: Vec::new(),
            pos: vec![Pos::Lower; ncols],
            xb: vec![0.0; m],
            since_refactor: 0,
            iterations: 0,
            max_iterations: 50_000 + 50 * ncols,
            deadline: None,
        };
        s.slack_basis();
        s
    }

    fn slack_basis(&mut self) {
        let (m, n, ncols) = (self.m, self.n, self.ncols);
        self.tab = vec![0.0; m * ncols];
        for i in 0..m {
            self.tab[i * ncols..i * ncols + n].copy_from_slice(&self.a[i * n..(i + 1) * n]);
            self.tab[i * ncols + n + i] = 1.0;
        }
        self.beta0 = self.b.clone();
        self.basis = (n..ncols).collect();
        for j in 0..n {
            self.pos[j] = self.resting_pos(j, None);
        }
        for i in 0..m {
            self.pos[n + i] = Pos::Basic(i);
        }
        self.since_refactor = 0;
        self.compute_xb();
    }

    /// Nonbasic position for `j`, keeping `prefer` when that bound is finite.
    fn resting_pos(&self, j: usize, prefer: Option<Pos>) -> Pos {
        let lo = self.lower[j].is_finite();
        let hi = self.upper[j].is_finite();
        match prefer {
            Some(Pos::Upper) if hi => Pos::Upper,
            Some(Pos::Lower) if lo => Pos::Lower,
            _ if lo => Pos::Lower,
            _ if hi => Pos::Upper,
            _ => Pos::Zero,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.pos[j] {
            Pos::Lower => self.lower[j],
            Pos::Upper => self.upper[j],
            Pos::Zero | Pos::Basic(_) => 0.0,
        }
    }

    pub(crate) fn value(&self, j: usize) -> f64 {
        match self.pos[j] {
            Pos::Basic(r) => self.xb[r],
            _ => self.nonbasic_value(j),
        }
    }

    pub(crate) fn structural_values(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.value(j)).collect()
    }

    pub(crate) fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.value(j)).sum()
    }

    pub(crate) fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Change the bounds of structural column `j`.
    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        if self.lower[j] == lo && self.upper[j] == hi {
            return;
        }
        self.lower[j] = lo;
        self.upper[j] = hi;
        if let Pos::Basic(_) = self.pos[j] {
            return;
        }
        let prev = self.pos[j];
        self.pos[j] = self.resting_pos(j, Some(prev));
    }

    fn compute_xb(&mut self) {
        let ncols = self.ncols;
        let nonbasic: Vec<(usize, f64)> = (0..ncols)
            .filter(|&j| !matches!(self.pos[j], Pos::Basic(_)))
            .map(|j| (j, self.nonbasic_value(j)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        for i in 0..self.m {
            let row = &self.tab[i * ncols..(i + 1) * ncols];
            let mut v = self.beta0[i];
            for &(j, xj) in &nonbasic {
                v -= row[j] * xj;
            }
            self.xb[i] = v;
        }
    }

    fn violation(&self, r: usize) -> f64 {
        let j = self.basis[r];
        let x = self.xb[r];
        (self.lower[j] - x).max(x - self.upper[j]).max(0.0)
    }

    fn max_violation(&self) -> f64 {
        (0..self.m).map(|r| self.violation(r)).fold(0.0, f64::max)
    }

    /// Reduced costs for the given basic-cost vector (indexed by row) and
    /// column costs.
    fn reduced_costs(&self, basic_cost: &[f64], col_cost: Option<&[f64]>) -> Vec<f64> {
        let ncols = self.ncols;
        let mut d = match col_cost {
            Some(c) => c.to_vec(),
            None => vec![0.0; ncols],
        };
        for (i, &y) in basic_cost.iter().enumerate() {
            if y == 0.0 {
                continue;
            }
            let row = &self.tab[i * ncols..(i + 1) * ncols];
            for (dj, &t) in d.iter_mut().zip(row) {
                if t != 0.0 {
                    *dj -= y * t;
                }
            }
        }
        d
    }

    fn phase2_reduced_costs(&self) -> Vec<f64> {
        let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.reduced_costs(&cb, Some(&self.cost))
    }

    fn dual_feasible(&self, d: &[f64]) -> bool {
        (0..self.ncols).all(|j| match self.pos[j] {
            Pos::Basic(_) => true,
            _ if self.lower[j] == self.upper[j] => true,
            Pos::Lower => d[j] >= -DUAL_TOL,
            Pos::Upper => d[j] <= DUAL_TOL,
            Pos::Zero => d[j].abs() <= DUAL_TOL,
        })
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ncols = self.ncols;
        let piv = self.tab[r * ncols + q];
        let inv = 1.0 / piv;
        {
            let row = &mut self.tab[r * ncols..(r + 1) * ncols];
            for t in row.iter_mut() {
                if *t != 0.0 {
                    *t *= inv;
                }
            }
            row[q] = 1.0;
        }
        self.beta0[r] *= inv;
        let nz: Vec<usize> = (0..ncols).filter(|&j| self.tab[r * ncols + j] != 0.0).collect();
        let pivot_row: Vec<f64> = nz.iter().map(|&j| self.tab[r * ncols + j]).collect();
        let beta_r = self.beta0[r];
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * ncols + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * ncols..(i + 1) * ncols];
            for (&j, &p) in nz.iter().zip(&pivot_row) {
                let v = row[j] - f * p;
                row[j] = if v.abs() < 1e-13 { 0.0 } else { v };
            }
            row[q] = 0.0;
            self.beta0[i] -= f * beta_r;
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.pos[q] = Pos::Basic(r);
        // caller fixes the leaving position
        self.pos[leaving] = Pos::Lower;
        self.since_refactor += 1;
        self.iterations += 1;
    }

    /// Rebuild the tableau from the original matrix for the current basis.
    /// Falls back to the slack basis if the basis has become singular.
    pub(crate) fn refactor(&mut self) {
        let (m, n, ncols) = (self.m, self.n, self.ncols);
        let old_basis = self.basis.clone();
        let saved_pos = self.pos.clone();
        let iterations = self.iterations;
        self.tab = vec![0.0; m * ncols];
        for i in 0..m {
            self.tab[i * ncols..i * ncols + n].copy_from_slice(&self.a[i * n..(i + 1) * n]);
            self.tab[i * ncols + n + i] = 1.0;
        }
        self.beta0 = self.b.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        let mut ok = true;
        for &j in &old_basis {
            let mut best = None;
            let mut best_abs = 1e-8;
            for r in 0..m {
                if !assigned[r] {
                    let v = self.tab[r * ncols + j].abs();
                    if v > best_abs {
                        best_abs = v;
                        best = Some(r);
                    }
                }
            }
            match best {
                Some(r) => {
                    self.pivot(r, j);
                    assigned[r] = true;
                    new_basis[r] = j;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        self.iterations = iterations;
        if !ok {
            log::debug!("singular basis during refactor, restarting from slack basis");
            let keep: Vec<Pos> = saved_pos;
            self.slack_basis();
            for j in 0..n {
                self.pos[j] = self.resting_pos(j, Some(keep[j]));
            }
            self.compute_xb();
            return;
        }
        self.basis = new_basis;
        for j in 0..ncols {
            self.pos[j] = match saved_pos[j] {
                Pos::Basic(_) => Pos::Lower,
                p => p,
            };
        }
        for (r, &j) in self.basis.iter().enumerate() {
            self.pos[j] = Pos::Basic(r);
        }
        for j in 0..ncols {
            if !matches!(self.pos[j], Pos::Basic(_)) {
                let p = self.pos[j];
                self.pos[j] = self.resting_pos(j, Some(p));
            }
        }
        self.since_refactor = 0;
        self.compute_xb();
    }

    fn out_of_budget(&self) -> Option<LpOutcome> {
        if self.iterations >= self.max_iterations {
            return Some(LpOutcome::IterationLimit);
        }
        if let Some(d) = self.deadline {
            if self.iterations % 32 == 0 && Instant::now() >= d {
                return Some(LpOutcome::TimeLimit);
            }
        }
        None
    }

    fn maybe_refactor(&mut self) {
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    /// Solve from the current basis.
    pub(crate) fn solve(&mut self) -> LpOutcome {
        self.compute_xb();
        if self.max_violation() > PRIMAL_TOL {
            let d = self.phase2_reduced_costs();
            if self.dual_feasible(&d) {
                match self.dual() {
                    LpOutcome::Optimal => return self.primal(false),
                    LpOutcome::IterationLimit => {}
                    other => return other,
                }
            }
            match self.primal(true) {
                LpOutcome::Optimal => {}
                other => return other,
            }
        }
        self.primal(false)
    }

    /// Primal simplex. In phase one the objective is the total bound
    /// violation of the basic variables; success means a feasible basis.
    fn primal(&mut self, phase_one: bool) -> LpOutcome {
        let mut degenerate = 0usize;
        loop {
            if let Some(out) = self.out_of_budget() {
                return out;
            }
            self.maybe_refactor();
            let d = if phase_one {
                let mut g = vec![0.0; self.m];
                let mut any = false;
                for r in 0..self.m {
                    let j = self.basis[r];
                    if self.xb[r] < self.lower[j] - PRIMAL_TOL {
                        g[r] = -1.0;
                        any = true;
                    } else if self.xb[r] > self.upper[j] + PRIMAL_TOL {
                        g[r] = 1.0;
                        any = true;
                    }
                }
                if !any {
                    return LpOutcome::Optimal;
                }
                self.reduced_costs(&g, None)
            } else {
                self.phase2_reduced_costs()
            };
            let bland = degenerate >= DEGENERATE_STREAK;
            let Some((q, dir)) = self.choose_entering(&d, bland) else {
                return if phase_one {
                    LpOutcome::Infeasible
                } else {
                    LpOutcome::Optimal
                };
            };
            match self.ratio_test(q, dir, phase_one, bland) {
                None => {
                    if phase_one {
                        // cannot happen with a bounded phase-one objective; restart cleanly
                        self.refactor();
                        continue;
                    }
                    return LpOutcome::Unbounded;
                }
                Some((theta, step)) => {
                    if theta <= 1e-12 {
                        degenerate += 1;
                    } else {
                        degenerate = 0;
                    }
                    self.apply_primal_step(q, dir, theta, step);
                }
            }
        }
    }

    fn choose_entering(&self, d: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            if self.lower[j] == self.upper[j] {
                continue;
            }
            let dir = match self.pos[j] {
                Pos::Basic(_) => continue,
                Pos::Lower if d[j] < -DUAL_TOL => 1.0,
                Pos::Upper if d[j] > DUAL_TOL => -1.0,
                Pos::Zero if d[j] < -DUAL_TOL => 1.0,
                Pos::Zero if d[j] > DUAL_TOL => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            let score = d[j].abs();
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, phase_one: bool, bland: bool) -> Option<(f64, Step)> {
        let ncols = self.ncols;
        let mut theta = f64::INFINITY;
        let mut step = None;
        let mut best_alpha = 0.0;
        let span = self.upper[q] - self.lower[q];
        if span.is_finite() {
            theta = span;
            step = Some(Step::Flip);
        }
        for r in 0..self.m {
            let t = self.tab[r * ncols + q];
            if t.abs() < PIVOT_TOL {
                continue;
            }
            // rate of change of basic r per unit move of the entering column
            let alpha = -t * dir;
            let j = self.basis[r];
            let x = self.xb[r];
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let limit = if phase_one && x < lo - PRIMAL_TOL {
                if alpha > 0.0 {
                    (lo - x) / alpha
                } else {
                    continue;
                }
            } else if phase_one && x > hi + PRIMAL_TOL {
                if alpha < 0.0 {
                    (x - hi) / -alpha
                } else {
                    continue;
                }
            } else if alpha > 0.0 {
                if hi.is_finite() {
                    (hi - x).max(0.0) / alpha
                } else {
                    continue;
                }
            } else if lo.is_finite() {
                (x - lo).max(0.0) / -alpha
            } else {
                continue;
            };
            let better = if bland {
                limit < theta - 1e-12
                    || (limit <= theta + 1e-12
                        && matches!(step, Some(Step::Pivot(rr)) if self.basis[rr] > j))
            } else {
                limit < theta - 1e-12 || (limit <= theta + 1e-12 && alpha.abs() > best_alpha)
            };
            if better || step.is_none() {
                theta = limit;
                best_alpha = alpha.abs();
                step = Some(Step::Pivot(r));
            }
        }
        step.map(|s| (theta, s))
    }

    fn apply_primal_step(&mut self, q: usize, dir: f64, theta: f64, step: Step) {
        let ncols = self.ncols;
        let delta = dir * theta;
        for r in 0..self.m {
            let t = self.tab[r * ncols + q];
            if t != 0.0 {
                self.xb[r] -= t * delta;
            }
        }
        match step {
            Step::Flip => {
                self.pos[q] = if dir > 0.0 { Pos::Upper } else { Pos::Lower };
            }
            Step::Pivot(r) => {
                let entering_value = self.nonbasic_value(q) + delta;
                let leaving = self.basis[r];
                let x = self.xb[r];
                let (lo, hi) = (self.lower[leaving], self.upper[leaving]);
                let leave_pos = if lo.is_finite() && (!hi.is_finite() || (x - lo).abs() <= (x - hi).abs()) {
                    Pos::Lower
                } else if hi.is_finite() {
                    Pos::Upper
                } else {
                    Pos::Zero
                };
                self.pivot(r, q);
                self.pos[leaving] = leave_pos;
                self.xb[r] = entering_value;
            }
        }
    }

    /// Dual simplex; requires a dual feasible basis.
    fn dual(&mut self) -> LpOutcome {
        let ncols = self.ncols;
        let mut stall = 0usize;
        loop {
            if let Some(out) = self.out_of_budget() {
                return out;
            }
            self.maybe_refactor();
            let bland = stall >= DEGENERATE_STREAK;
            let mut r_sel = None;
            let mut worst = PRIMAL_TOL;
            for r in 0..self.m {
                let v = self.violation(r);
                if v > worst {
                    if bland {
                        if r_sel.map_or(true, |rr: usize| self.basis[r] < self.basis[rr]) {
                            r_sel = Some(r);
                        }
                    } else {
                        worst = v;
                        r_sel = Some(r);
                    }
                }
            }
            let Some(r) = r_sel else {
                return LpOutcome::Optimal;
            };
            let leaving = self.basis[r];
            let x = self.xb[r];
            let below = x < self.lower[leaving];
            let target = if below { self.lower[leaving] } else { self.upper[leaving] };
            let d = self.phase2_reduced_costs();
            let mut q_sel = None;
            let mut best_ratio = f64::INFINITY;
            let mut best_piv = 0.0;
            for j in 0..ncols {
                if self.lower[j] == self.upper[j] {
                    continue;
                }
                let t = self.tab[r * ncols + j];
                if t.abs() < PIVOT_TOL {
                    continue;
                }
                let (can_up, can_down) = match self.pos[j] {
                    Pos::Basic(_) => continue,
                    Pos::Lower => (true, false),
                    Pos::Upper => (false, true),
                    Pos::Zero => (true, true),
                };
                // x_r moves by -t per unit increase of x_j
                let eligible = if below {
                    (t < 0.0 && can_up) || (t > 0.0 && can_down)
                } else {
                    (t > 0.0 && can_up) || (t < 0.0 && can_down)
                };
                if !eligible {
                    continue;
                }
                let ratio = d[j].abs() / t.abs();
                let better = if bland {
                    ratio < best_ratio - 1e-12
                } else {
                    ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && t.abs() > best_piv)
                };
                if better {
                    best_ratio = ratio;
                    best_piv = t.abs();
                    q_sel = Some(j);
                }
            }
            let Some(q) = q_sel else {
                return LpOutcome::Infeasible;
            };
            if best_ratio <= 1e-12 {
                stall += 1;
            } else {
                stall = 0;
            }
            let t = self.tab[r * ncols + q];
            let delta_q = (x - target) / t;
            for i in 0..self.m {
                let ti = self.tab[i * ncols + q];
                if ti != 0.0 {
                    self.xb[i] -= ti * delta_q;
                }
            }
            let entering_value = self.nonbasic_value(q) + delta_q;
            self.pivot(r, q);
            self.pos[leaving] = if below { Pos::Lower } else { Pos::Upper };
            self.xb[r] = entering_value;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, Sense, VarKind};

    fn lp(model: &Model) -> (LpOutcome, f64, Vec<f64>) {
        let mut s = Simplex::from_model(model);
        let out = s.solve();
        (out, s.objective(), s.structural_values())
    }

    #[test]
    fn small_lp_optimum() {
        // max x + y  s.t. x + 2y <= 4, 3x + y <= 6 -> (1.6, 1.2), value 2.8
        let mut m = Model::new("t");
        let x = m.add_var("x", VarKind::Continuous, 0.0, f64::INFINITY, -1.0);
        let y = m.add_var("y", VarKind::Continuous, 0.0, f64::INFINITY, -1.0);
        m.add_row("a", "c", vec![(x, 1.0), (y, 2.0)], Sense::Le, 4.0);
        m.add_row("b", "c", vec![(x, 3.0), (y, 1.0)], Sense::Le, 6.0);
        let (out, obj, vals) = lp(&m);
        assert_eq!(out, LpOutcome::Optimal);
        assert!((obj + 2.8).abs() < 1e-9);
        assert!((vals[0] - 1.6).abs() < 1e-9 && (vals[1] - 1.2).abs() < 1e-9);
    }

    #[test]
    fn needs_phase_one() {
        // min x + y s.t. x + y >= 3, x - y = 1, x <= 10 -> (2, 1)
        let mut m = Model::new("t");
        let x = m.add_var("x", VarKind::Continuous, 0.0, 10.0, 1.0);
        let y = m.add_var("y", VarKind::Continuous, 0.0, f64::INFINITY, 1.0);
        m.add_row("a", "c", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.0);
        m.add_row("b", "c", vec![(x, 1.0), (y, -1.0)], Sense::Eq, 1.0);
        let (out, obj, vals) = lp(&m);
        assert_eq!(out, LpOutcome::Optimal);
        assert!((obj - 3.0).abs() < 1e-9);
        assert!(m.max_violation(&vals) < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut m = Model::new("t");
        let x = m.add_var("x", VarKind::Continuous, 0.0, 1.0, 1.0);
        m.add_row("a", "c", vec![(x, 1.0)], Sense::Ge, 2.0);
        assert_eq!(lp(&m).0, LpOutcome::Infeasible);

        let mut m = Model::new("t");
        let x = m.add_var("x", VarKind::Continuous, 0.0, f64::INFINITY, -1.0);
        let y = m.add_var("y", VarKind::Continuous, 0.0, f64::INFINITY, 0.0);
        m.add_row("a", "c", vec![(x, 1.0), (y, -1.0)], Sense::Le, 2.0);
        assert_eq!(lp(&m).0, LpOutcome::Unbounded);
    }

    #[test]
    fn free_variables_and_negative_bounds() {
        // min |t| style: min d s.t. d >= t - 3, d >= 3 - t, t free, t >= 5 via row
        let mut m = Model::new("t");
        let t = m.add_var("t", VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let d = m.add_var("d", VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY, 1.0);
        m.add_row("a", "c", vec![(d, 1.0), (t, -1.0)], Sense::Ge, -3.0);
        m.add_row("b", "c", vec![(d, 1.0), (t, 1.0)], Sense::Ge, 3.0);
        m.add_row("c", "c", vec![(t, 1.0)], Sense::Ge, 5.0);
        let (out, obj, _) = lp(&m);
        assert_eq!(out, LpOutcome::Optimal);
        assert!((obj - 2.0).abs() < 1e-9);
    }

    #[test]
    fn dual_reoptimisation_after_bound_change() {
        let mut m = Model::new("t");
        let x = m.add_var("x", VarKind::Continuous, 0.0, 1.0, -2.0);
        let y = m.add_var("y", VarKind::Continuous, 0.0, 1.0, -3.0);
        m.add_row("a", "c", vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.5);
        let mut s = Simplex::from_model(&m);
        assert_eq!(s.solve(), LpOutcome::Optimal);
        assert!((s.objective() + 4.0).abs() < 1e-9);
        s.set_bounds(1, 0.0, 0.0);
        assert_eq!(s.solve(), LpOutcome::Optimal);
        assert!((s.objective() + 2.0).abs() < 1e-9);
        s.set_bounds(1, 0.0, 1.0);
        s.set_bounds(0, 1.0, 1.0);
        assert_eq!(s.solve(), LpOutcome::Optimal);
        assert!((s.objective() + 3.5).abs() < 1e-9);
        s.refactor();
        assert_eq!(s.solve(), LpOutcome::Optimal);
        assert!((s.objective() + 3.5).abs() < 1e-9);
    }
}
