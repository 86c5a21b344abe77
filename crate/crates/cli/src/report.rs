//! Campaign summaries: runtime/gap deciles, size and iteration ratios over
//! instances both methods solved, and solved-fraction curves.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::campaign::RunRow;

/// Nearest-rank quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

fn sorted_by(rows: &[&RunRow], f: impl Fn(&RunRow) -> f64) -> Vec<f64> {
    let mut v: Vec<f64> = rows.iter().map(|r| f(r)).filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecileRow {
    pub decile: f64,
    pub runtime_arc: Option<f64>,
    pub runtime_node: Option<f64>,
    pub gap_arc: Option<f64>,
    pub gap_node: Option<f64>,
}

impl DecileRow {
    pub fn runtime_improvement(&self) -> Option<f64> {
        improvement(self.runtime_arc?, self.runtime_node?)
    }

    pub fn gap_improvement(&self) -> Option<f64> {
        improvement(self.gap_arc?, self.gap_node?)
    }
}

fn improvement(arc: f64, node: f64) -> Option<f64> {
    (node > 0.0).then(|| (node - arc) / node)
}

fn by_method<'a>(rows: &'a [RunRow], method: &str) -> Vec<&'a RunRow> {
    rows.iter().filter(|r| r.method == method).collect()
}

/// Runtime and final-gap deciles per method over all runs.
pub fn deciles(rows: &[RunRow]) -> Vec<DecileRow> {
    let arc = by_method(rows, "arc");
    let node = by_method(rows, "node");
    let (rt_a, rt_n) = (sorted_by(&arc, |r| r.runtime), sorted_by(&node, |r| r.runtime));
    let (gp_a, gp_n) = (sorted_by(&arc, |r| r.gap), sorted_by(&node, |r| r.gap));
    (1..=10)
        .map(|i| {
            let q = i as f64 / 10.0;
            DecileRow {
                decile: q,
                runtime_arc: quantile(&rt_a, q),
                runtime_node: quantile(&rt_n, q),
                gap_arc: quantile(&gp_a, q),
                gap_node: quantile(&gp_n, q),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Means {
    pub iterations: f64,
    pub variables: f64,
    pub constraints: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSummary {
    /// Instances solved by both methods.
    pub instances: usize,
    pub arc: Means,
    pub node: Means,
    /// Mean over instances of the per-instance arc/node ratios.
    pub mean_ratio: Means,
}

impl RatioSummary {
    /// Ratio of the means, arc over node.
    pub fn ratio(&self) -> Means {
        Means {
            iterations: self.arc.iterations / self.node.iterations,
            variables: self.arc.variables / self.node.variables,
            constraints: self.arc.constraints / self.node.constraints,
        }
    }
}

/// Pairs arc and node rows by instance name.
pub fn paired(rows: &[RunRow]) -> Vec<(&RunRow, &RunRow)> {
    let mut node: BTreeMap<&str, &RunRow> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == "node" && r.solved()) {
        node.insert(&r.instance, r);
    }
    rows.iter()
        .filter(|r| r.method == "arc" && r.solved())
        .filter_map(|a| node.get(a.instance.as_str()).map(|n| (a, *n)))
        .collect()
}

pub fn ratios(rows: &[RunRow]) -> Option<RatioSummary> {
    let pairs = paired(rows);
    if pairs.is_empty() {
        return None;
    }
    let n = pairs.len() as f64;
    let mean = |f: &dyn Fn(&RunRow) -> f64, side: usize| {
        pairs.iter().map(|p| f(if side == 0 { p.0 } else { p.1 })).sum::<f64>() / n
    };
    let means = |side| Means {
        iterations: mean(&|r| r.iterations as f64, side),
        variables: mean(&|r| r.variables as f64, side),
        constraints: mean(&|r| r.constraints as f64, side),
    };
    let per = |f: &dyn Fn(&RunRow) -> f64| pairs.iter().map(|(a, b)| f(a) / f(b)).sum::<f64>() / n;
    Some(RatioSummary {
        instances: pairs.len(),
        arc: means(0),
        node: means(1),
        mean_ratio: Means {
            iterations: per(&|r| r.iterations as f64),
            variables: per(&|r| r.variables as f64),
            constraints: per(&|r| r.constraints as f64),
        },
    })
}

/// `(method, seconds, fraction solved)` at every solve event, per method.
pub fn solved_fraction(rows: &[RunRow]) -> Vec<(String, f64, f64)> {
    let mut methods: BTreeMap<&str, Vec<&RunRow>> = BTreeMap::new();
    for r in rows {
        methods.entry(&r.method).or_default().push(r);
    }
    let mut out = Vec::new();
    for (m, runs) in methods {
        let total = runs.len() as f64;
        let mut times: Vec<f64> = runs.iter().filter(|r| r.solved()).map(|r| r.runtime).collect();
        times.sort_by(f64::total_cmp);
        out.push((m.to_string(), 0.0, 0.0));
        for (i, t) in times.iter().enumerate() {
            out.push((m.to_string(), *t, (i + 1) as f64 / total));
        }
    }
    out
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or("n/a".to_string(), |x| format!("{x:.digits$}"))
}

fn pct(v: Option<f64>) -> String {
    v.map_or("n/a".to_string(), |x| format!("{:.1}%", 100.0 * x))
}

/// Left-aligned columns separated by two spaces.
pub fn columns(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = widths[c])).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn tsv(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| r.join("\t") + "\n").collect()
}

pub fn decile_table(rows: &[DecileRow]) -> Vec<Vec<String>> {
    let mut out = vec![[
        "decile",
        "runtime_arc",
        "runtime_node",
        "runtime_improvement",
        "gap_arc",
        "gap_node",
        "gap_improvement",
    ]
    .map(String::from)
    .to_vec()];
    for d in rows {
        out.push(vec![
            format!("{:.1}", d.decile),
            cell(d.runtime_arc, 3),
            cell(d.runtime_node, 3),
            pct(d.runtime_improvement()),
            pct(d.gap_arc),
            pct(d.gap_node),
            pct(d.gap_improvement()),
        ]);
    }
    out
}

pub fn ratio_table(s: &RatioSummary) -> Vec<Vec<String>> {
    let r = s.ratio();
    let line = |name: &str, a: f64, n: f64, ratio: f64, mean: f64| {
        vec![name.to_string(), format!("{a:.2}"), format!("{n:.2}"), format!("{ratio:.3}"), format!("{mean:.3}")]
    };
    vec![
        ["measure", "arc", "node", "ratio", "mean_ratio"].map(String::from).to_vec(),
        line("iterations", s.arc.iterations, s.node.iterations, r.iterations, s.mean_ratio.iterations),
        line("variables", s.arc.variables, s.node.variables, r.variables, s.mean_ratio.variables),
        line("constraints", s.arc.constraints, s.node.constraints, r.constraints, s.mean_ratio.constraints),
    ]
}

pub fn solved_table(series: &[(String, f64, f64)]) -> Vec<Vec<String>> {
    let mut out = vec![["method", "seconds", "fraction_solved"].map(String::from).to_vec()];
    out.extend(series.iter().map(|(m, t, f)| vec![m.clone(), format!("{t:.4}"), format!("{f:.4}")]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(instance: &str, method: &str, status: &str, runtime: f64, iterations: usize, variables: usize) -> RunRow {
        RunRow {
            instance: instance.into(),
            family: "paths".into(),
            seed: 0,
            nodes: 3,
            arcs: 2,
            commodities: 1,
            horizon: 5,
            method: method.into(),
            partition: "-".into(),
            status: status.into(),
            objective: 10.0,
            lower_bound: 10.0,
            gap: 0.0,
            iterations,
            iteration_bound: 15,
            variables,
            constraints: variables / 2,
            movement_flow_vars: 0,
            timed_nodes: 0,
            safeguard_events: 0,
            bounds_ok: true,
            progress_ok: true,
            runtime,
        }
    }

    #[test]
    fn nearest_rank() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.1), Some(1.0));
        assert_eq!(quantile(&v, 0.5), Some(2.0));
        assert_eq!(quantile(&v, 0.6), Some(3.0));
        assert_eq!(quantile(&v, 1.0), Some(4.0));
        assert_eq!(quantile(&[], 0.5), None);
    }

    #[test]
    fn ratios_skip_unsolved_pairs() {
        let rows = vec![
            row("a", "arc", "optimal", 1.0, 4, 50),
            row("a", "node", "optimal", 2.0, 2, 100),
            row("b", "arc", "optimal", 1.0, 3, 30),
            row("b", "node", "optimal", 2.0, 3, 90),
            row("c", "arc", "optimal", 1.0, 1, 10),
            row("c", "node", "time_limit", 9.0, 1, 1000),
        ];
        let s = ratios(&rows).unwrap();
        assert_eq!(s.instances, 2);
        assert_eq!(s.arc.variables, 40.0);
        assert_eq!(s.node.variables, 95.0);
        assert!((s.ratio().variables - 40.0 / 95.0).abs() < 1e-12);
        assert!((s.mean_ratio.variables - (0.5 + 1.0 / 3.0) / 2.0).abs() < 1e-12);
        assert!((s.mean_ratio.iterations - (2.0 + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn solved_fraction_counts_all_runs() {
        let rows = vec![
            row("a", "arc", "optimal", 2.0, 1, 1),
            row("b", "arc", "optimal", 1.0, 1, 1),
            row("c", "arc", "time_limit", 5.0, 1, 1),
        ];
        let s = solved_fraction(&rows);
        assert_eq!(s.len(), 3);
        assert_eq!(s[1], ("arc".to_string(), 1.0, 1.0 / 3.0));
        assert_eq!(s[2], ("arc".to_string(), 2.0, 2.0 / 3.0));
    }

    #[test]
    fn decile_improvement() {
        let d = DecileRow {
            decile: 0.5,
            runtime_arc: Some(25.0),
            runtime_node: Some(100.0),
            gap_arc: Some(0.0),
            gap_node: Some(0.0),
        };
        assert_eq!(d.runtime_improvement(), Some(0.75));
        assert_eq!(d.gap_improvement(), None);
    }

    #[test]
    fn columns_align() {
        let t = columns(&[vec!["a".into(), "bbb".into()], vec!["cc".into(), "d".into()]]);
        assert_eq!(t, "a   bbb\ncc  d\n");
    }
}
