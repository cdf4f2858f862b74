use std::fmt::Write;

use crate::diagram::ClassDiagram;
use crate::multiplicity::MultiplicitySet;
use crate::snapshot::Snapshot;
use crate::transform::{ProofScript, TransformStep};

pub fn print_multiplicity(m: &MultiplicitySet) -> String {
    m.to_string()
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Canonical text: classifiers by name, then generalizations, then
/// associations by name (ends in stored order).
pub fn print_diagram(d: &ClassDiagram) -> String {
    let mut out = String::new();
    writeln!(out, "diagram {} {{", d.name).unwrap();
    for c in &d.classifiers {
        let prefix = if d.abstract_set.contains(c) { "abstract " } else { "" };
        let attrs: Vec<_> = d.attributes_of(c).collect();
        if attrs.is_empty() {
            writeln!(out, "  {prefix}class {c}").unwrap();
        } else {
            writeln!(out, "  {prefix}class {c} {{ attributes {} }}", join(attrs)).unwrap();
        }
    }
    for (sup, sub) in &d.generalizations {
        writeln!(out, "  generalization {sup} <| {sub}").unwrap();
    }
    let mut assocs: Vec<_> = d.associations.iter().collect();
    assocs.sort_by(|a, b| a.name.cmp(&b.name));
    for a in assocs {
        writeln!(out, "  association {} {{", a.name).unwrap();
        for e in &a.ends {
            writeln!(out, "    end {} : {} {}", e.role, e.anchor, e.multi).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn print_snapshot(s: &Snapshot) -> String {
    let mut out = String::new();
    writeln!(out, "snapshot {} {{", s.name).unwrap();
    for (id, o) in &s.objects {
        if o.isa.is_empty() {
            write!(out, "  object {id} {{").unwrap();
        } else {
            write!(out, "  object {id} : {} {{", join(&o.isa)).unwrap();
        }
        if o.link_slots.is_empty() && o.atom_slots.is_empty() {
            out.push_str(" }\n");
            continue;
        }
        out.push('\n');
        for (role, targets) in &o.link_slots {
            writeln!(out, "    {role} -> {{{}}}", join(targets)).unwrap();
        }
        for a in &o.atom_slots {
            writeln!(out, "    attr {a}").unwrap();
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn print_step(step: &TransformStep) -> String {
    match step {
        TransformStep::WeakenMultiplicity { association, role, multi } => {
            format!("weaken {association}.{role} to {multi}")
        }
        TransformStep::EraseAssociation { association } => format!("erase-association {association}"),
        TransformStep::EraseClassifier { classifier, unchecked } => {
            format!("erase-class {classifier}{}", if *unchecked { " unchecked" } else { "" })
        }
        TransformStep::EraseAttribute { classifier, attribute } => {
            format!("erase-attribute {classifier}.{attribute}")
        }
        TransformStep::EraseGeneralization { sup, sub } => format!("erase-generalization {sup} <| {sub}"),
        TransformStep::MoveEndUp { association, role, target, keep_multiplicity } => format!(
            "move-end-up {association}.{role} to {target}{}",
            if *keep_multiplicity { " keep-multiplicity" } else { "" }
        ),
    }
}

pub fn print_script(p: &ProofScript) -> String {
    let mut out = format!("prove {} : {}", p.name, quote(&p.start));
    if let Some(goal) = &p.goal {
        write!(out, " => {}", quote(goal)).unwrap();
    }
    out.push_str(" {\n");
    for step in &p.steps {
        writeln!(out, "  {}", print_step(step)).unwrap();
    }
    out.push_str("}\n");
    out
}
