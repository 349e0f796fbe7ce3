use std::fmt::Write;

use crate::model::Model;

/// Renders a model in the textual model language. The output parses back to
/// a structurally equal model.
pub fn print_model(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", model.name);
    for c in &model.classes {
        out.push('\n');
        if c.is_abstract {
            out.push_str("abstract ");
        }
        let _ = write!(out, "class {}", c.name);
        if !c.parents.is_empty() {
            let _ = write!(out, " < {}", c.parents.join(", "));
        }
        out.push('\n');
        if !c.attributes.is_empty() {
            out.push_str("attributes\n");
            for a in &c.attributes {
                let _ = writeln!(out, "  {} : {}", a.name, a.ty);
            }
        }
        out.push_str("end\n");
    }
    for a in &model.associations {
        let _ = writeln!(out, "\nassociation {} between", a.name);
        for (i, end) in a.ends.iter().enumerate() {
            let sep = if i == 0 { ";" } else { "" };
            let _ = writeln!(out, "  {} [{}] role {}{sep}", end.class, end.multiplicity, end.role);
        }
        out.push_str("end\n");
    }
    if !model.invariants.is_empty() {
        out.push_str("\nconstraints\n");
        let mut last_context: Option<&str> = None;
        for inv in &model.invariants {
            if last_context != Some(inv.context.as_str()) {
                let _ = writeln!(out, "\ncontext {}", inv.context);
                last_context = Some(&inv.context);
            }
            let _ = writeln!(out, "  inv {}:\n    {}", inv.name, inv.body);
        }
    }
    out
}
