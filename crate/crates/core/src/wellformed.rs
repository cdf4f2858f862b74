//! Well-formedness of static models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::diagram::ClassDiagram;
use crate::names::ClassifierId;
use crate::textio::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FindingCode {
    Cycle,
    DupAssocName,
    DanglingAnchor,
    AbstractNotDeclared,
    AttrInheritance,
    RoleNameClash,
    EndCount,
    EmptyMultiplicity,
}

impl FindingCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::Cycle => "CYCLE",
            FindingCode::DupAssocName => "DUP_ASSOC_NAME",
            FindingCode::DanglingAnchor => "DANGLING_ANCHOR",
            FindingCode::AbstractNotDeclared => "ABSTRACT_NOT_DECLARED",
            FindingCode::AttrInheritance => "ATTR_INHERITANCE",
            FindingCode::RoleNameClash => "ROLE_NAME_CLASH",
            FindingCode::EndCount => "END_COUNT",
            FindingCode::EmptyMultiplicity => "EMPTY_MULTIPLICITY",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            FindingCode::EmptyMultiplicity => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub code: FindingCode,
    pub message: String,
    pub subject: Vec<String>,
    pub span: Option<SourceSpan>,
}

impl Finding {
    fn new(code: FindingCode, message: String, subject: Vec<String>) -> Self {
        Self { code, message, subject, span: None }
    }

    pub fn severity(&self) -> Severity {
        self.code.severity()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    fn from_findings(findings: Vec<Finding>) -> Self {
        let ok = findings.iter().all(|f| f.severity() != Severity::Error);
        Self { ok, findings }
    }

    pub fn has(&self, code: FindingCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity() == Severity::Error)
    }
}

/// Checks every structural axiom a static model must satisfy. Violations are
/// reported, never raised.
pub fn well_formed(d: &ClassDiagram) -> ValidationReport {
    let mut findings = Vec::new();

    for c in d.abstract_set.difference(&d.classifiers) {
        findings.push(Finding::new(
            FindingCode::AbstractNotDeclared,
            format!("abstract classifier {c} is not a declared classifier"),
            vec![c.to_string()],
        ));
    }

    for (sup, sub) in &d.generalizations {
        for c in [sup, sub] {
            if !d.classifiers.contains(c) {
                findings.push(Finding::new(
                    FindingCode::DanglingAnchor,
                    format!("generalization {sup} <| {sub} refers to undeclared classifier {c}"),
                    vec![sup.to_string(), sub.to_string()],
                ));
            }
        }
    }

    let on_cycle = cyclic_classifiers(d);
    if !on_cycle.is_empty() {
        let names: Vec<String> = on_cycle.iter().map(ToString::to_string).collect();
        findings.push(Finding::new(
            FindingCode::Cycle,
            format!("generalization hierarchy is cyclic through {}", names.join(", ")),
            names,
        ));
    }

    for (sup, sub) in &d.generalizations {
        if !(d.classifiers.contains(sup) && d.classifiers.contains(sub)) {
            continue;
        }
        let inherited: BTreeSet<_> = d.attributes_of(sub).collect();
        let missing: Vec<String> =
            d.attributes_of(sup).filter(|a| !inherited.contains(a)).map(ToString::to_string).collect();
        if !missing.is_empty() {
            findings.push(Finding::new(
                FindingCode::AttrInheritance,
                format!("{sub} specializes {sup} but lacks its attribute(s) {}", missing.join(", ")),
                vec![sup.to_string(), sub.to_string()],
            ));
        }
    }

    let mut assoc_names: BTreeMap<&str, usize> = BTreeMap::new();
    for a in &d.associations {
        *assoc_names.entry(a.name.as_str()).or_default() += 1;
    }
    for (name, count) in assoc_names.iter().filter(|(_, &n)| n > 1) {
        findings.push(Finding::new(
            FindingCode::DupAssocName,
            format!("association name {name} is declared {count} times"),
            vec![name.to_string()],
        ));
    }

    for a in &d.associations {
        if a.ends.len() != 2 {
            findings.push(Finding::new(
                FindingCode::EndCount,
                format!("association {} has {} end(s), expected 2", a.name, a.ends.len()),
                vec![a.name.to_string()],
            ));
        }
        for e in &a.ends {
            if !d.classifiers.contains(&e.anchor) {
                findings.push(Finding::new(
                    FindingCode::DanglingAnchor,
                    format!(
                        "end {} of association {} is anchored at undeclared classifier {}",
                        e.role, a.name, e.anchor
                    ),
                    vec![a.name.to_string(), e.role.to_string(), e.anchor.to_string()],
                ));
            }
            if e.multi.is_empty() {
                findings.push(Finding::new(
                    FindingCode::EmptyMultiplicity,
                    format!(
                        "end {} of association {} admits no link count; {} cannot have instances",
                        e.role, a.name, e.anchor
                    ),
                    vec![a.name.to_string(), e.role.to_string()],
                ));
            }
        }
    }

    let mut roles: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, e) in d.ends() {
        *roles.entry(e.role.as_str()).or_default() += 1;
    }
    for (role, count) in &roles {
        if *count > 1 {
            findings.push(Finding::new(
                FindingCode::RoleNameClash,
                format!("role name {role} is used by {count} association ends"),
                vec![role.to_string()],
            ));
        }
        let owners: Vec<String> = d
            .attributes
            .iter()
            .filter(|(c, attrs)| d.classifiers.contains(*c) && attrs.iter().any(|a| a.as_str() == *role))
            .map(|(c, _)| c.to_string())
            .collect();
        if !owners.is_empty() {
            findings.push(Finding::new(
                FindingCode::RoleNameClash,
                format!("role name {role} is also an attribute of {}", owners.join(", ")),
                std::iter::once(role.to_string()).chain(owners).collect(),
            ));
        }
    }

    ValidationReport::from_findings(findings)
}

/// Classifiers reachable from themselves through one or more generalization
/// edges (super -> sub).
fn cyclic_classifiers(d: &ClassDiagram) -> BTreeSet<ClassifierId> {
    let mut succ: BTreeMap<&ClassifierId, Vec<&ClassifierId>> = BTreeMap::new();
    for (sup, sub) in &d.generalizations {
        succ.entry(sup).or_default().push(sub);
    }
    let mut out = BTreeSet::new();
    for &start in succ.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&ClassifierId> = succ[start].clone();
        while let Some(n) = stack.pop() {
            if n == start {
                out.insert(start.clone());
                break;
            }
            if seen.insert(n) {
                if let Some(next) = succ.get(n) {
                    stack.extend(next.iter().copied());
                }
            }
        }
    }
    out
}
