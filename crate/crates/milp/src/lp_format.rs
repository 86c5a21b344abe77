//! CPLEX LP text export, readable by HiGHS, CPLEX, Gurobi and SCIP.

use std::fmt::Write;

use crate::model::{Model, VarKind};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect()
}

fn terms(out: &mut String, model: &Model, coeffs: impl Iterator<Item = (usize, f64)>) {
    let mut first = true;
    let mut width = 0;
    for (j, a) in coeffs {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { "-" } else if first { "" } else { "+" };
        let term = format!("{sign} {} {}", a.abs(), sanitize(&model.vars[j].name));
        width += term.len() + 1;
        if width > 200 {
            out.push_str("\n   ");
            width = term.len();
        }
        out.push(' ');
        out.push_str(term.trim_start());
        first = false;
    }
    if first {
        out.push_str(" 0");
    }
}

pub fn write_lp(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    out.push_str("Minimize\n obj:");
    terms(&mut out, model, model.vars.iter().enumerate().map(|(j, v)| (j, v.obj)));
    out.push_str("\nSubject To\n");
    for (i, row) in model.rows.iter().enumerate() {
        let name = if row.name.is_empty() { format!("r{i}") } else { sanitize(&row.name) };
        let _ = write!(out, " {name}:");
        terms(&mut out, model, row.coeffs.iter().map(|&(j, a)| (j.0, a)));
        let _ = writeln!(out, " {} {}", row.sense, row.rhs);
    }
    out.push_str("Bounds\n");
    for v in &model.vars {
        let name = sanitize(&v.name);
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", v.lower, v.upper);
            }
            (true, false) => {
                if v.lower != 0.0 {
                    let _ = writeln!(out, " {name} >= {}", v.lower);
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", v.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    let section = |kind: VarKind| -> Vec<String> {
        model.vars.iter().filter(|v| v.kind == kind).map(|v| sanitize(&v.name)).collect()
    };
    for (title, names) in [("Binaries", section(VarKind::Binary)), ("Generals", section(VarKind::Integer))] {
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{title}");
        for chunk in names.chunks(10) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sense;

    #[test]
    fn writes_sections() {
        let mut m = Model::new("demo");
        let x = m.add_binary("x_0", 3.0);
        let y = m.add_var("y 1", VarKind::Integer, 0.0, f64::INFINITY, 1.5);
        let z = m.add_var("z", VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY, 0.0);
        m.add_row("cap", "cap", vec![(x, 2.0), (y, -1.0), (z, 1.0)], Sense::Le, 0.0);
        let lp = write_lp(&m);
        assert!(lp.contains("Minimize\n obj: 3 x_0 + 1.5 y_1"));
        assert!(lp.contains(" cap: 2 x_0 - 1 y_1 + 1 z <= 0"));
        assert!(lp.contains(" z free"));
        assert!(lp.contains("Binaries\n x_0\nGenerals\n y_1\nEnd"));
    }
}
