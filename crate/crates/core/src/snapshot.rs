//! System snapshots and the satisfaction relation between a snapshot and a
//! static model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::diagram::{ClassDiagram, Vocabulary};
use crate::names::{ClassifierId, NameId, ObjectId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("object {object} links {target} through role {role}, but {target} is not in the snapshot")]
    DanglingReference { object: ObjectId, role: NameId, target: ObjectId },
    #[error("object {object} uses {name} both as a link slot and as an attribute")]
    SlotConflict { object: ObjectId, name: NameId },
}

/// One object: its classifier tags, object-valued slots (role -> targets)
/// and the names of its present plain attributes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ObjectState {
    pub isa: BTreeSet<ClassifierId>,
    pub link_slots: BTreeMap<NameId, BTreeSet<ObjectId>>,
    pub atom_slots: BTreeSet<NameId>,
}

impl ObjectState {
    pub fn tagged(isa: impl IntoIterator<Item = ClassifierId>) -> Self {
        Self { isa: isa.into_iter().collect(), ..Self::default() }
    }

    /// Targets of `role`; an absent slot is the empty set.
    pub fn targets(&self, role: &NameId) -> impl Iterator<Item = &ObjectId> {
        self.link_slots.get(role).into_iter().flatten()
    }

    pub fn link_count(&self, role: &NameId) -> usize {
        self.link_slots.get(role).map_or(0, BTreeSet::len)
    }

    pub fn has_slot(&self, name: &NameId) -> bool {
        self.atom_slots.contains(name) || self.link_slots.contains_key(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Snapshot {
    pub name: NameId,
    pub objects: BTreeMap<ObjectId, ObjectState>,
}

impl Default for Snapshot {
    fn default() -> Self {
        Self::named(NameId::new("S").expect("valid identifier"))
    }
}

impl Snapshot {
    pub fn named(name: NameId) -> Self {
        Self { name, objects: BTreeMap::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn with_name(mut self, name: NameId) -> Self {
        self.name = name;
        self
    }

    /// Every object's link slots reference objects of this snapshot, and no
    /// name is both a link slot and an attribute.
    pub fn validate(&self) -> Result<(), SnapshotError> {
        for (id, o) in &self.objects {
            for (role, targets) in &o.link_slots {
                if o.atom_slots.contains(role) {
                    return Err(SnapshotError::SlotConflict { object: id.clone(), name: role.clone() });
                }
                if let Some(t) = targets.iter().find(|t| !self.objects.contains_key(*t)) {
                    return Err(SnapshotError::DanglingReference {
                        object: id.clone(),
                        role: role.clone(),
                        target: t.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Renames objects with a bijection; ids missing from `map` are kept.
    pub fn rename(&self, map: &BTreeMap<ObjectId, ObjectId>) -> Snapshot {
        let r = |o: &ObjectId| map.get(o).cloned().unwrap_or_else(|| o.clone());
        let objects = self
            .objects
            .iter()
            .map(|(id, o)| {
                let state = ObjectState {
                    isa: o.isa.clone(),
                    link_slots: o
                        .link_slots
                        .iter()
                        .map(|(role, ts)| (role.clone(), ts.iter().map(r).collect()))
                        .collect(),
                    atom_slots: o.atom_slots.clone(),
                };
                (r(id), state)
            })
            .collect();
        Snapshot { name: self.name.clone(), objects }
    }
}

/// Materializes every role of `vocab` as a (possibly empty) link slot on
/// every object. Idempotent.
pub fn canonicalize(s: &Snapshot, vocab: &Vocabulary) -> Result<Snapshot, SnapshotError> {
    s.validate()?;
    let mut out = s.clone();
    for (id, o) in &mut out.objects {
        for role in &vocab.roles {
            if o.atom_slots.contains(role) {
                return Err(SnapshotError::SlotConflict { object: id.clone(), name: role.clone() });
            }
            o.link_slots.entry(role.clone()).or_default();
        }
    }
    Ok(out)
}

pub fn extension(s: &Snapshot, c: &ClassifierId) -> BTreeSet<ObjectId> {
    s.objects.iter().filter(|(_, o)| o.isa.contains(c)).map(|(id, _)| id.clone()).collect()
}

pub fn links_of(s: &Snapshot, role: &NameId) -> BTreeSet<(ObjectId, ObjectId)> {
    s.objects.iter().flat_map(|(id, o)| o.targets(role).map(move |t| (id.clone(), t.clone()))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    AbstractInstance,
    IsaClosure,
    MissingAttribute,
    Multiplicity,
    TargetType,
    SourceType,
}

impl Axiom {
    pub fn as_str(self) -> &'static str {
        match self {
            Axiom::AbstractInstance => "ABSTRACT_INSTANCE",
            Axiom::IsaClosure => "ISA_CLOSURE",
            Axiom::MissingAttribute => "MISSING_ATTRIBUTE",
            Axiom::Multiplicity => "MULTIPLICITY",
            Axiom::TargetType => "TARGET_TYPE",
            Axiom::SourceType => "SOURCE_TYPE",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub axiom: Axiom,
    pub subject: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub satisfied: bool,
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn has(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

/// Decides whether `s` is a model of `d`, reporting one violation per failed
/// axiom instance.
///
/// Tags naming classifiers unknown to `d` are ignored, so a model of `d` may
/// carry extra structure.
pub fn satisfies(s: &Snapshot, d: &ClassDiagram) -> Result<Verdict, SnapshotError> {
    let s = canonicalize(s, &d.vocabulary())?;
    let mut violations = Vec::new();
    let mut push = |axiom, subject: Vec<String>, detail: String| {
        violations.push(Violation { axiom, subject, detail });
    };

    for (id, o) in &s.objects {
        for (sup, sub) in &d.generalizations {
            if o.isa.contains(sub) && !o.isa.contains(sup) {
                push(
                    Axiom::IsaClosure,
                    vec![id.to_string(), sub.to_string(), sup.to_string()],
                    format!("{id} is a {sub} but not a {sup}"),
                );
            }
        }

        for c in o.isa.intersection(&d.abstract_set) {
            if !d.direct_subtypes(c).any(|sub| o.isa.contains(sub)) {
                push(
                    Axiom::AbstractInstance,
                    vec![id.to_string(), c.to_string()],
                    format!("{id} instantiates abstract {c} without any of its subclasses"),
                );
            }
        }

        for c in o.isa.intersection(&d.classifiers) {
            for a in d.attributes_of(c) {
                if !o.has_slot(a) {
                    push(
                        Axiom::MissingAttribute,
                        vec![id.to_string(), a.to_string()],
                        format!("{id} is a {c} but has no attribute {a}"),
                    );
                }
            }
        }

        for (assoc, end) in d.ends() {
            let count = o.link_count(&end.role);
            if o.isa.contains(&end.anchor) {
                if !end.multi.contains(count as u64) {
                    push(
                        Axiom::Multiplicity,
                        vec![id.to_string(), end.role.to_string()],
                        format!(
                            "{id} has {count} {} link(s) in {}, allowed {}",
                            end.role, assoc.name, end.multi
                        ),
                    );
                }
                if let Some(opposite) = assoc.opposite(&end.role) {
                    for t in o.targets(&end.role) {
                        let typed = s.objects.get(t).is_some_and(|to| to.isa.contains(&opposite.anchor));
                        if !typed {
                            push(
                                Axiom::TargetType,
                                vec![id.to_string(), end.role.to_string(), t.to_string()],
                                format!("{id}.{} targets {t}, which is not a {}", end.role, opposite.anchor),
                            );
                        }
                    }
                }
            } else if count > 0 {
                push(
                    Axiom::SourceType,
                    vec![id.to_string(), end.role.to_string()],
                    format!("{id} carries role {} but is not a {}", end.role, end.anchor),
                );
            }
        }
    }

    Ok(Verdict { satisfied: violations.is_empty(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplicity::MultiplicitySet;

    fn oid(s: &str) -> ObjectId {
        ObjectId::new(s).unwrap()
    }
    fn cid(s: &str) -> ClassifierId {
        ClassifierId::new(s).unwrap()
    }
    fn nid(s: &str) -> NameId {
        NameId::new(s).unwrap()
    }

    fn object(isa: &[&str], links: &[(&str, &[&str])]) -> ObjectState {
        ObjectState {
            isa: isa.iter().map(|c| cid(c)).collect(),
            link_slots: links.iter().map(|(r, ts)| (nid(r), ts.iter().map(|t| oid(t)).collect())).collect(),
            atom_slots: BTreeSet::new(),
        }
    }

    fn snapshot(objects: Vec<(&str, ObjectState)>) -> Snapshot {
        Snapshot { objects: objects.into_iter().map(|(id, o)| (oid(id), o)).collect(), ..Snapshot::default() }
    }

    fn fig1() -> ClassDiagram {
        ClassDiagram::builder("D")
            .class("University")
            .class("Student")
            .class("FullTimeStudent")
            .class("PartTimeStudent")
            .generalization("Student", "FullTimeStudent")
            .generalization("Student", "PartTimeStudent")
            .association(
                "enlightens",
                ("enlightened_by", "FullTimeStudent", MultiplicitySet::exactly(1)),
                ("enlightens", "University", MultiplicitySet::any()),
            )
            .build()
            .unwrap()
    }

    #[test]
    fn canonicalize_materializes_roles() {
        let s = snapshot(vec![("o1", object(&[], &[]))]);
        let vocab = Vocabulary { roles: BTreeSet::from([nid("r")]), ..Vocabulary::default() };
        let c = canonicalize(&s, &vocab).unwrap();
        assert_eq!(c.objects[&oid("o1")].link_slots[&nid("r")], BTreeSet::new());
        assert_eq!(canonicalize(&c, &vocab).unwrap(), c);
    }

    #[test]
    fn canonicalize_rejects_dangling() {
        let s = snapshot(vec![("o1", object(&[], &[("r", &["o9"])]))]);
        assert!(matches!(
            canonicalize(&s, &Vocabulary::default()),
            Err(SnapshotError::DanglingReference { .. })
        ));
    }

    #[test]
    fn extension_and_links() {
        assert!(extension(&Snapshot::default(), &cid("A")).is_empty());
        let s = snapshot(vec![("o1", object(&["Student", "FullTimeStudent"], &[]))]);
        assert_eq!(extension(&s, &cid("Student")), BTreeSet::from([oid("o1")]));
        assert!(extension(&s, &cid("University")).is_empty());

        let s = snapshot(vec![("o1", object(&[], &[("r", &["o2"])])), ("o2", object(&[], &[("r", &[])]))]);
        assert_eq!(links_of(&s, &nid("r")), BTreeSet::from([(oid("o1"), oid("o2"))]));
        assert!(links_of(&s, &nid("q")).is_empty());
    }

    #[test]
    fn complete_link_relation_has_k_squared_pairs() {
        for k in 1..=3usize {
            let ids: Vec<String> = (1..=k).map(|i| format!("o{i}")).collect();
            let all: Vec<&str> = ids.iter().map(String::as_str).collect();
            let s = snapshot(ids.iter().map(|id| (id.as_str(), object(&[], &[("r", &all)]))).collect());
            let mut brute = 0;
            for a in &ids {
                for b in &ids {
                    if s.objects[&oid(a)].link_slots[&nid("r")].contains(&oid(b)) {
                        brute += 1;
                    }
                }
            }
            assert_eq!(links_of(&s, &nid("r")).len(), brute);
            assert_eq!(brute, k * k);
        }
    }

    #[test]
    fn empty_snapshot_satisfies() {
        assert!(satisfies(&Snapshot::default(), &fig1()).unwrap().satisfied);
    }

    #[test]
    fn abstract_without_subclass_instance() {
        let d = ClassDiagram::builder("E").abstract_class("A").build().unwrap();
        let v = satisfies(&snapshot(vec![("o1", object(&["A"], &[]))]), &d).unwrap();
        assert!(!v.satisfied);
        assert!(v.has(Axiom::AbstractInstance));
    }

    #[test]
    fn missing_supertype_tag() {
        let s = snapshot(vec![
            ("u", object(&["University"], &[("enlightens", &["f"])])),
            ("f", object(&["FullTimeStudent"], &[])),
        ]);
        let v = satisfies(&s, &fig1()).unwrap();
        assert!(v.has(Axiom::IsaClosure));

        let linked = snapshot(vec![
            ("u", object(&["University"], &[("enlightens", &["f"])])),
            ("f", object(&["FullTimeStudent"], &[("enlightened_by", &["u"])])),
        ]);
        let v = satisfies(&linked, &fig1()).unwrap();
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].axiom, Axiom::IsaClosure);
    }

    #[test]
    fn full_time_student_without_university() {
        let s = snapshot(vec![
            ("u", object(&["University"], &[("enlightens", &["f"])])),
            ("f", object(&["FullTimeStudent", "Student"], &[("enlightened_by", &[])])),
        ]);
        let v = satisfies(&s, &fig1()).unwrap();
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].axiom, Axiom::Multiplicity);
        assert_eq!(v.violations[0].subject, ["f", "enlightened_by"]);
    }

    #[test]
    fn source_and_target_typing() {
        let s = snapshot(vec![
            ("p", object(&["PartTimeStudent", "Student"], &[("enlightened_by", &["u"])])),
            ("u", object(&["University"], &[])),
        ]);
        assert!(satisfies(&s, &fig1()).unwrap().has(Axiom::SourceType));

        let s = snapshot(vec![
            ("f", object(&["FullTimeStudent", "Student"], &[("enlightened_by", &["g"])])),
            ("g", object(&["Student"], &[])),
        ]);
        let v = satisfies(&s, &fig1()).unwrap();
        assert_eq!(v.violations.len(), 1);
        assert!(v.has(Axiom::TargetType));
    }

    #[test]
    fn unknown_tags_are_unconstrained() {
        let s = snapshot(vec![("o1", object(&["Alien"], &[]))]);
        assert!(satisfies(&s, &fig1()).unwrap().satisfied);
    }

    #[test]
    fn attributes_required_by_every_tag() {
        let d = ClassDiagram::builder("E")
            .class("A")
            .class("B")
            .attribute("A", "x")
            .attribute("B", "x")
            .attribute("B", "y")
            .generalization("A", "B")
            .build()
            .unwrap();
        let mut o = object(&["A", "B"], &[]);
        o.atom_slots.insert(nid("x"));
        let s = snapshot(vec![("o1", o.clone())]);
        let v = satisfies(&s, &d).unwrap();
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].axiom, Axiom::MissingAttribute);
        o.atom_slots.insert(nid("y"));
        assert!(satisfies(&snapshot(vec![("o1", o)]), &d).unwrap().satisfied);
    }
}
