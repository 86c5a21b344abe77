use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a column in a [`Model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// Index of a row in a [`Model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub obj: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    /// Constraint family label, used for per-family counting.
    pub family: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear minimisation problem with optional integrality restrictions.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub vars: Vec<Var>,
    pub rows: Vec<Row>,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64, obj: f64) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        self.vars.push(Var {
            name: name.into(),
            kind,
            lower,
            upper,
            obj,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, obj: f64) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0, obj)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        family: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> RowId {
        self.rows.push(Row {
            name: name.into(),
            family: family.into(),
            coeffs,
            sense,
            rhs,
        });
        RowId(self.rows.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_mip(&self) -> bool {
        self.vars.iter().any(|v| v.kind.is_integral())
    }

    /// Number of rows per family label.
    pub fn family_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for row in &self.rows {
            *out.entry(row.family.clone()).or_insert(0) += 1;
        }
        out
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.obj * x).sum()
    }

    /// Largest violation of any row, bound or integrality restriction.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
            if v.kind.is_integral() {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * values[j.0]).sum();
            let viol = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Same model with every integrality restriction dropped.
    pub fn relaxation(&self) -> Model {
        let mut m = self.clone();
        for v in &mut m.vars {
            v.kind = VarKind::Continuous;
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// Solved to within the requested relative gap.
    Optimal,
    Infeasible,
    Unbounded,
    /// Limit reached; `values` holds the incumbent if one was found.
    TimeLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::TimeLimit => "time-limit",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    /// Objective of the returned point (`f64::INFINITY` when there is none).
    pub objective: f64,
    /// Best proven lower bound on the optimum.
    pub bound: f64,
    pub values: Vec<f64>,
    /// Number of branch-and-bound nodes processed (0 for pure LPs).
    pub nodes: usize,
}

impl Solution {
    pub fn has_point(&self) -> bool {
        !self.values.is_empty()
    }

    /// Relative gap between the returned point and the proven bound.
    pub fn gap(&self) -> f64 {
        relative_gap(self.objective, self.bound)
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }
}

/// `(upper - lower) / |upper|`, with zero upper bounds treated as absolute.
pub fn relative_gap(upper: f64, lower: f64) -> f64 {
    if !upper.is_finite() || !lower.is_finite() {
        return f64::INFINITY;
    }
    let diff = (upper - lower).max(0.0);
    if upper.abs() < 1e-9 {
        diff
    } else {
        diff / upper.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_counts_and_violation() {
        let mut m = Model::new("t");
        let x = m.add_binary("x", 1.0);
        let y = m.add_var("y", VarKind::Integer, 0.0, f64::INFINITY, 2.0);
        m.add_row("c1", "cap", vec![(x, 4.0), (y, -10.0)], Sense::Le, 0.0);
        m.add_row("c2", "flow", vec![(x, 1.0)], Sense::Eq, 1.0);
        assert_eq!(m.family_counts()["cap"], 1);
        assert!(m.max_violation(&[1.0, 1.0]) < 1e-12);
        assert!((m.max_violation(&[1.0, 0.0]) - 4.0).abs() < 1e-12);
        assert!((m.max_violation(&[1.0, 0.5]) - 0.5).abs() < 1e-12);
        assert_eq!(m.objective_value(&[1.0, 1.0]), 3.0);
    }

    #[test]
    fn gap_handles_zero_objective() {
        assert_eq!(relative_gap(0.0, 0.0), 0.0);
        assert!((relative_gap(10.0, 9.0) - 0.1).abs() < 1e-12);
        assert_eq!(relative_gap(f64::INFINITY, 1.0), f64::INFINITY);
    }
}
