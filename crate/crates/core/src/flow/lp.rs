//! CPLEX LP text export.

use std::fmt::Write as _;
use std::io::Write;

use super::{FlowModel, Sense};
use crate::error::FlowError;

const LINE_WIDTH: usize = 200;

fn push_terms(out: &mut String, head: &str, terms: &[(usize, i64)], model: &FlowModel) {
    let mut line = String::from(head);
    for (i, &(id, c)) in terms.iter().enumerate() {
        let name = model.var(id).to_string();
        let piece = match (i, c) {
            (0, 1) => name,
            (0, -1) => format!("- {name}"),
            (0, c) => format!("{c} {name}"),
            (_, 1) => format!(" + {name}"),
            (_, -1) => format!(" - {name}"),
            (_, c) if c < 0 => format!(" - {} {name}", -c),
            (_, c) => format!(" + {c} {name}"),
        };
        if line.len() + piece.len() > LINE_WIDTH {
            out.push_str(line.trim_end());
            out.push('\n');
            line = String::from("   ");
        }
        line.push_str(&piece);
    }
    out.push_str(&line);
}

/// Merges repeated variables so every row lists each variable once.
fn merged(terms: &[(usize, i64)]) -> Vec<(usize, i64)> {
    let mut sorted = terms.to_vec();
    sorted.sort_unstable_by_key(|&(id, _)| id);
    let mut out: Vec<(usize, i64)> = Vec::with_capacity(sorted.len());
    for (id, c) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == id => last.1 += c,
            _ => out.push((id, c)),
        }
    }
    out.retain(|&(_, c)| c != 0);
    out
}

/// The model as LP text. Identical models give identical text.
pub fn lp_text(model: &FlowModel) -> String {
    let mut out = String::new();
    writeln!(out, "\\ time-expanded flow model, horizon {}", model.horizon).unwrap();
    if model.horizon == 0 {
        for (o, &v) in model.start.iter().enumerate() {
            writeln!(out, "\\ o{o} fixed at node v{v}").unwrap();
        }
        if !model.trivially_feasible() {
            out.push_str("\\ start does not satisfy the goal: infeasible\n");
        }
    }
    out.push_str("Minimize\n");
    let objective: Vec<(usize, i64)> =
        (0..model.variable_count()).filter(|&id| model.cost(id) != 0).map(|id| (id, model.cost(id))).collect();
    if objective.is_empty() {
        out.push_str(" obj: 0\n");
    } else {
        push_terms(&mut out, " obj: ", &objective, model);
        out.push('\n');
    }
    out.push_str("Subject To\n");
    for row in model.constraints() {
        let terms = merged(&row.terms);
        if terms.is_empty() {
            writeln!(out, "\\ {} is constant", row.name).unwrap();
            continue;
        }
        push_terms(&mut out, &format!(" {}: ", row.name), &terms, model);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
        };
        writeln!(out, " {op} {}", row.rhs).unwrap();
    }
    if model.variable_count() > 0 {
        out.push_str("Binary\n");
        let mut line = String::new();
        for id in 0..model.variable_count() {
            let name = model.var(id).to_string();
            if line.len() + name.len() + 1 > LINE_WIDTH {
                writeln!(out, "{line}").unwrap();
                line.clear();
            }
            line.push(' ');
            line.push_str(&name);
        }
        if !line.is_empty() {
            writeln!(out, "{line}").unwrap();
        }
    }
    out.push_str("End\n");
    out
}

pub fn export_lp(model: &FlowModel, mut dest: impl Write) -> Result<(), FlowError> {
    dest.write_all(lp_text(model).as_bytes())?;
    dest.flush()?;
    Ok(())
}
