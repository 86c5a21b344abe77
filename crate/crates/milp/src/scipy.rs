//! Out-of-process backend driving `scipy.optimize.milp` (HiGHS) via python3.

use std::io::Write;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::backend::{SolveParams, SolverBackend, SolverError};
use crate::model::{Model, Sense, Solution, Status, VarKind};

const SCRIPT: &str = r#"
import json, sys
import numpy as np
from scipy.optimize import milp, linprog, LinearConstraint, Bounds
from scipy.sparse import coo_matrix

p = json.load(sys.stdin)
n, m = p["n"], len(p["lo"])
c = np.array(p["c"], dtype=float)
lb = np.array([-np.inf if v is None else v for v in p["lb"]])
ub = np.array([np.inf if v is None else v for v in p["ub"]])
opts = {"mip_rel_gap": p["gap"], "disp": False}
if p["time"] is not None:
    opts["time_limit"] = p["time"]
cons = []
if m > 0:
    A = coo_matrix((p["val"], (p["row"], p["col"])), shape=(m, n)).tocsr()
    lo = np.array([-np.inf if v is None else v for v in p["lo"]])
    hi = np.array([np.inf if v is None else v for v in p["hi"]])
    cons = [LinearConstraint(A, lo, hi)]
res = milp(c, constraints=cons, integrality=np.array(p["int"]), bounds=Bounds(lb, ub), options=opts)
out = {"status": int(res.status), "x": None, "fun": None, "bound": None}
if res.x is not None:
    out["x"] = [float(v) for v in res.x]
    out["fun"] = float(res.fun)
bound = getattr(res, "mip_dual_bound", None)
if bound is not None and np.isfinite(bound):
    out["bound"] = float(bound)
print(json.dumps(out))
"#;

#[derive(Serialize)]
struct Payload {
    n: usize,
    c: Vec<f64>,
    lb: Vec<Option<f64>>,
    ub: Vec<Option<f64>>,
    #[serde(rename = "int")]
    integrality: Vec<u8>,
    row: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
    lo: Vec<Option<f64>>,
    hi: Vec<Option<f64>>,
    gap: f64,
    time: Option<f64>,
}

#[derive(Deserialize)]
struct Reply {
    status: i32,
    x: Option<Vec<f64>>,
    fun: Option<f64>,
    bound: Option<f64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone)]
pub struct ScipyBackend {
    pub python: String,
}

/// Interpreter used by the scipy backend; `python3` when unset.
pub const PYTHON_ENV: &str = "SNDRR_PYTHON";

impl Default for ScipyBackend {
    fn default() -> Self {
        ScipyBackend {
            python: std::env::var(PYTHON_ENV).unwrap_or_else(|_| "python3".to_string()),
        }
    }
}

impl ScipyBackend {
    /// True when python3 with `scipy.optimize.milp` can be started.
    pub fn available(&self) -> bool {
        Command::new(&self.python)
            .args(["-c", "from scipy.optimize import milp"])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map(|s| s.success())
            .unwrap_or(false)
    }

    fn payload(model: &Model, params: &SolveParams) -> Payload {
        let mut p = Payload {
            n: model.num_vars(),
            c: model.vars.iter().map(|v| v.obj).collect(),
            lb: model.vars.iter().map(|v| finite(v.lower)).collect(),
            ub: model.vars.iter().map(|v| finite(v.upper)).collect(),
            integrality: model.vars.iter().map(|v| u8::from(v.kind != VarKind::Continuous)).collect(),
            row: Vec::new(),
            col: Vec::new(),
            val: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
            gap: params.rel_gap,
            time: params.time_limit.map(|d| d.as_secs_f64()),
        };
        for (i, r) in model.rows.iter().enumerate() {
            for &(j, a) in &r.coeffs {
                p.row.push(i);
                p.col.push(j.0);
                p.val.push(a);
            }
            let (lo, hi) = match r.sense {
                Sense::Le => (None, Some(r.rhs)),
                Sense::Ge => (Some(r.rhs), None),
                Sense::Eq => (Some(r.rhs), Some(r.rhs)),
            };
            p.lo.push(lo);
            p.hi.push(hi);
        }
        p
    }
}

impl SolverBackend for ScipyBackend {
    fn name(&self) -> &'static str {
        "scipy"
    }

    fn solve(&self, model: &Model, params: &SolveParams) -> Result<Solution, SolverError> {
        let input = serde_json::to_vec(&Self::payload(model, params)).map_err(|e| SolverError::Backend(e.to_string()))?;
        let mut child = Command::new(&self.python)
            .args(["-c", SCRIPT])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| SolverError::Unavailable(format!("{}: {e}", self.python)))?;
        child
            .stdin
            .take()
            .expect("piped stdin")
            .write_all(&input)
            .map_err(|e| SolverError::Backend(e.to_string()))?;
        let out = child.wait_with_output().map_err(|e| SolverError::Backend(e.to_string()))?;
        if !out.status.success() {
            let err = String::from_utf8_lossy(&out.stderr);
            return Err(if err.contains("ModuleNotFoundError") || err.contains("ImportError") {
                SolverError::Unavailable(err.trim().to_string())
            } else {
                SolverError::Backend(err.trim().to_string())
            });
        }
        let reply: Reply = serde_json::from_slice(&out.stdout).map_err(|e| SolverError::Backend(e.to_string()))?;
        let values = reply.x.unwrap_or_default();
        let objective = reply.fun.unwrap_or(f64::INFINITY);
        // 0 optimal, 1 limit reached, 2 infeasible, 3 unbounded
        let (status, bound) = match reply.status {
            0 => (Status::Optimal, reply.bound.unwrap_or(objective)),
            1 => (Status::TimeLimit, reply.bound.unwrap_or(f64::NEG_INFINITY)),
            2 => (Status::Infeasible, f64::INFINITY),
            3 => (Status::Unbounded, f64::NEG_INFINITY),
            s => return Err(SolverError::Backend(format!("scipy status {s}"))),
        };
        let bound = if model.is_mip() { bound } else if status == Status::Optimal { objective } else { bound };
        Ok(Solution {
            status,
            objective,
            bound,
            values,
            nodes: 0,
        })
    }
}
