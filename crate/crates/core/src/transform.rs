//! Diagram transformation rules and replayable proof scripts.
//!
//! Every catalog rule is meant to be a deduction: each model of the input
//! diagram is a model of the output. `run_proof_script` can re-check that
//! claim for every step within a bound.

use std::fmt;

use thiserror::Error;

use crate::diagram::ClassDiagram;
use crate::finder::{check_refinement, Bounds, FinderError, RefinementVerdict};
use crate::multiplicity::MultiplicitySet;
use crate::names::{ClassifierId, NameId};
use crate::wellformed::{well_formed, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepKind {
    WeakenMultiplicity,
    EraseAssociation,
    EraseClassifier,
    EraseAttribute,
    EraseGeneralization,
    MoveEndUp,
}

impl StepKind {
    pub const ALL: [StepKind; 6] = [
        StepKind::WeakenMultiplicity,
        StepKind::EraseAssociation,
        StepKind::EraseClassifier,
        StepKind::EraseAttribute,
        StepKind::EraseGeneralization,
        StepKind::MoveEndUp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::WeakenMultiplicity => "WEAKEN_MULTIPLICITY",
            StepKind::EraseAssociation => "ERASE_ASSOCIATION",
            StepKind::EraseClassifier => "ERASE_CLASSIFIER",
            StepKind::EraseAttribute => "ERASE_ATTRIBUTE",
            StepKind::EraseGeneralization => "ERASE_GENERALIZATION",
            StepKind::MoveEndUp => "MOVE_END_UP",
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TransformStep {
    /// Replace an end's multiplicity by a superset.
    WeakenMultiplicity {
        association: NameId,
        role: NameId,
        multi: MultiplicitySet,
    },
    EraseAssociation {
        association: NameId,
    },
    /// `unchecked` skips the abstract-supertype precondition. That variant is
    /// unsound and exists for mutation testing.
    EraseClassifier {
        classifier: ClassifierId,
        unchecked: bool,
    },
    EraseAttribute {
        classifier: ClassifierId,
        attribute: NameId,
    },
    EraseGeneralization {
        sup: ClassifierId,
        sub: ClassifierId,
    },
    /// Re-anchor an end at a strict ancestor, admitting zero links there.
    /// `keep_multiplicity` leaves the multiplicity unchanged, which is unsound
    /// and exists for mutation testing.
    MoveEndUp {
        association: NameId,
        role: NameId,
        target: ClassifierId,
        keep_multiplicity: bool,
    },
}

impl TransformStep {
    pub fn kind(&self) -> StepKind {
        match self {
            TransformStep::WeakenMultiplicity { .. } => StepKind::WeakenMultiplicity,
            TransformStep::EraseAssociation { .. } => StepKind::EraseAssociation,
            TransformStep::EraseClassifier { .. } => StepKind::EraseClassifier,
            TransformStep::EraseAttribute { .. } => StepKind::EraseAttribute,
            TransformStep::EraseGeneralization { .. } => StepKind::EraseGeneralization,
            TransformStep::MoveEndUp { .. } => StepKind::MoveEndUp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("input diagram is not well formed")]
    IllFormedInput(ValidationReport),
    #[error("no association named {0}")]
    UnknownAssociation(NameId),
    #[error("association {association} has no end with role {role}")]
    UnknownRole { association: NameId, role: NameId },
    #[error("no classifier named {0}")]
    UnknownClassifier(ClassifierId),
    #[error("{new} is not a superset of the current multiplicity {current}")]
    NotAWeakening { current: MultiplicitySet, new: MultiplicitySet },
    #[error("{classifier} still anchors end {role} of association {association}")]
    StillAnchored { classifier: ClassifierId, association: NameId, role: NameId },
    #[error("{classifier} specializes abstract {sup}; erasing it would strengthen {sup}'s abstractness")]
    AbstractSupertype { classifier: ClassifierId, sup: ClassifierId },
    #[error("{classifier} declares no attribute {attribute}")]
    UnknownAttribute { classifier: ClassifierId, attribute: NameId },
    #[error("attribute {attribute} is inherited by {classifier} from {sup}")]
    InheritedAttribute { classifier: ClassifierId, attribute: NameId, sup: ClassifierId },
    #[error("no generalization {sup} <| {sub}")]
    UnknownGeneralization { sup: ClassifierId, sub: ClassifierId },
    #[error("{sup} is abstract; removing {sup} <| {sub} would strengthen its abstractness")]
    AbstractGeneralization { sup: ClassifierId, sub: ClassifierId },
    #[error("{target} is not a strict supertype of {anchor}")]
    NotAnAncestor { anchor: ClassifierId, target: ClassifierId },
    #[error("internal error: rule produced an ill-formed diagram")]
    Internal(ValidationReport),
}

/// Applies one rule, checking its preconditions. The input must be well
/// formed and the output is guaranteed to be.
pub fn apply_step(d: &ClassDiagram, step: &TransformStep) -> Result<ClassDiagram, RuleError> {
    let report = well_formed(d);
    if !report.ok {
        return Err(RuleError::IllFormedInput(report));
    }
    let out = rewrite(d, step)?;
    let report = well_formed(&out);
    if !report.ok {
        return Err(RuleError::Internal(report));
    }
    Ok(out)
}

fn rewrite(d: &ClassDiagram, step: &TransformStep) -> Result<ClassDiagram, RuleError> {
    let mut out = d.clone();
    match step {
        TransformStep::WeakenMultiplicity { association, role, multi } => {
            let end = end_mut(&mut out, association, role)?;
            if !end.multi.is_subset(multi) {
                return Err(RuleError::NotAWeakening { current: end.multi.clone(), new: multi.clone() });
            }
            end.multi = multi.clone();
        }
        TransformStep::EraseAssociation { association } => {
            let before = out.associations.len();
            out.associations.retain(|a| &a.name != association);
            if out.associations.len() == before {
                return Err(RuleError::UnknownAssociation(association.clone()));
            }
        }
        TransformStep::EraseClassifier { classifier, unchecked } => {
            if !d.classifiers.contains(classifier) {
                return Err(RuleError::UnknownClassifier(classifier.clone()));
            }
            if let Some((a, e)) = d.ends().find(|(_, e)| &e.anchor == classifier) {
                return Err(RuleError::StillAnchored {
                    classifier: classifier.clone(),
                    association: a.name.clone(),
                    role: e.role.clone(),
                });
            }
            if !unchecked {
                if let Some(sup) = d.direct_supertypes(classifier).find(|s| d.abstract_set.contains(*s)) {
                    return Err(RuleError::AbstractSupertype {
                        classifier: classifier.clone(),
                        sup: sup.clone(),
                    });
                }
            }
            out.classifiers.remove(classifier);
            out.abstract_set.remove(classifier);
            out.attributes.remove(classifier);
            out.generalizations.retain(|(sup, sub)| sup != classifier && sub != classifier);
        }
        TransformStep::EraseAttribute { classifier, attribute } => {
            if !d.classifiers.contains(classifier) {
                return Err(RuleError::UnknownClassifier(classifier.clone()));
            }
            if !d.attributes_of(classifier).any(|a| a == attribute) {
                return Err(RuleError::UnknownAttribute {
                    classifier: classifier.clone(),
                    attribute: attribute.clone(),
                });
            }
            if let Some(sup) =
                d.direct_supertypes(classifier).find(|s| d.attributes_of(s).any(|a| a == attribute))
            {
                return Err(RuleError::InheritedAttribute {
                    classifier: classifier.clone(),
                    attribute: attribute.clone(),
                    sup: sup.clone(),
                });
            }
            if let Some(attrs) = out.attributes.get_mut(classifier) {
                attrs.remove(attribute);
            }
        }
        TransformStep::EraseGeneralization { sup, sub } => {
            let edge = (sup.clone(), sub.clone());
            if !d.generalizations.contains(&edge) {
                return Err(RuleError::UnknownGeneralization { sup: sup.clone(), sub: sub.clone() });
            }
            if d.abstract_set.contains(sup) {
                return Err(RuleError::AbstractGeneralization { sup: sup.clone(), sub: sub.clone() });
            }
            out.generalizations.remove(&edge);
        }
        TransformStep::MoveEndUp { association, role, target, keep_multiplicity } => {
            let anchor = end_mut(&mut out, association, role)?.anchor.clone();
            let ancestors = d.ancestors(&anchor).map_err(|_| RuleError::UnknownClassifier(anchor.clone()))?;
            if target == &anchor || !ancestors.contains(target) {
                return Err(RuleError::NotAnAncestor { anchor, target: target.clone() });
            }
            let end = end_mut(&mut out, association, role)?;
            end.anchor = target.clone();
            if !keep_multiplicity {
                end.multi = end.multi.with_zero();
            }
        }
    }
    Ok(out)
}

fn end_mut<'a>(
    d: &'a mut ClassDiagram,
    association: &NameId,
    role: &NameId,
) -> Result<&'a mut crate::diagram::AssociationEnd, RuleError> {
    let assoc =
        d.association_mut(association).ok_or_else(|| RuleError::UnknownAssociation(association.clone()))?;
    assoc
        .ends
        .iter_mut()
        .find(|e| &e.role == role)
        .ok_or_else(|| RuleError::UnknownRole { association: association.clone(), role: role.clone() })
}

/// A named derivation from `start` to an optional `goal`. Parsed scripts refer
/// to diagrams by path (`ProofScript<String>`); [`ProofScript::resolve`] loads
/// them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofScript<R = String> {
    pub name: NameId,
    pub start: R,
    pub goal: Option<R>,
    pub steps: Vec<TransformStep>,
}

impl<R> ProofScript<R> {
    pub fn resolve<T, E>(&self, mut load: impl FnMut(&R) -> Result<T, E>) -> Result<ProofScript<T>, E> {
        Ok(ProofScript {
            name: self.name.clone(),
            start: load(&self.start)?,
            goal: self.goal.as_ref().map(&mut load).transpose()?,
            steps: self.steps.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub step: TransformStep,
    pub result: ClassDiagram,
    pub verdict: Option<RefinementVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofFailure {
    #[error("start diagram is not well formed")]
    IllFormedStart(ValidationReport),
    #[error("goal diagram is not well formed")]
    IllFormedGoal(ValidationReport),
    #[error("step {} failed: {error}", index + 1)]
    Rule { index: usize, error: RuleError },
    #[error("step {} is not a deduction at bound {}", index + 1, verdict.max_objects)]
    Counterexample { index: usize, verdict: RefinementVerdict },
    #[error("step {} could not be checked: {error}", index + 1)]
    Check { index: usize, error: FinderError },
    #[error("final diagram differs from the goal")]
    GoalMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofResult {
    pub ok: bool,
    pub per_step: Vec<StepRecord>,
    pub failure: Option<ProofFailure>,
}

impl ProofResult {
    pub fn final_diagram(&self) -> Option<&ClassDiagram> {
        self.per_step.last().map(|r| &r.result)
    }
}

/// Replays `script` left to right. With `verify` set, every step is also
/// checked to be a refinement within those bounds; the universe is widened
/// per step to the names of both diagrams.
pub fn run_proof_script(script: &ProofScript<ClassDiagram>, verify: Option<&Bounds>) -> ProofResult {
    let mut per_step = Vec::new();
    let fail = |per_step, failure| ProofResult { ok: false, per_step, failure: Some(failure) };

    let report = well_formed(&script.start);
    if !report.ok {
        return fail(per_step, ProofFailure::IllFormedStart(report));
    }
    if let Some(goal) = &script.goal {
        let report = well_formed(goal);
        if !report.ok {
            return fail(per_step, ProofFailure::IllFormedGoal(report));
        }
    }

    let mut current = script.start.clone();
    for (index, step) in script.steps.iter().enumerate() {
        let next = match apply_step(&current, step) {
            Ok(next) => next,
            Err(error) => return fail(per_step, ProofFailure::Rule { index, error }),
        };
        let verdict = match verify {
            None => None,
            Some(bounds) => {
                let bounds = bounds.extended_by(&[&current, &next]);
                match check_refinement(&current, &next, &bounds) {
                    Ok(v) => Some(v),
                    Err(error) => return fail(per_step, ProofFailure::Check { index, error }),
                }
            }
        };
        let refuted = verdict.as_ref().filter(|v| !v.holds()).cloned();
        per_step.push(StepRecord { step: step.clone(), result: next.clone(), verdict });
        if let Some(verdict) = refuted {
            return fail(per_step, ProofFailure::Counterexample { index, verdict });
        }
        current = next;
    }

    if let Some(goal) = &script.goal {
        if !current.equivalent(goal) {
            return fail(per_step, ProofFailure::GoalMismatch);
        }
    }
    ProofResult { ok: true, per_step, failure: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::diagram_equal;

    fn nid(s: &str) -> NameId {
        NameId::new(s).unwrap()
    }
    fn cid(s: &str) -> ClassifierId {
        ClassifierId::new(s).unwrap()
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

    fn move_up() -> TransformStep {
        TransformStep::MoveEndUp {
            association: nid("enlightens"),
            role: nid("enlightened_by"),
            target: cid("Student"),
            keep_multiplicity: false,
        }
    }

    fn erase(c: &str) -> TransformStep {
        TransformStep::EraseClassifier { classifier: cid(c), unchecked: false }
    }

    #[test]
    fn move_end_up_makes_end_optional() {
        let d = apply_step(&fig1(), &move_up()).unwrap();
        let end = d.association(&nid("enlightens")).unwrap().end(&nid("enlightened_by")).unwrap();
        assert_eq!(end.anchor, cid("Student"));
        assert_eq!(end.multi, MultiplicitySet::between(0, 1).unwrap());
    }

    #[test]
    fn move_end_up_requires_strict_ancestor() {
        let step = TransformStep::MoveEndUp {
            association: nid("enlightens"),
            role: nid("enlightens"),
            target: cid("Student"),
            keep_multiplicity: false,
        };
        assert!(matches!(apply_step(&fig1(), &step), Err(RuleError::NotAnAncestor { .. })));
    }

    #[test]
    fn erase_class_after_move() {
        let d1 = apply_step(&fig1(), &move_up()).unwrap();
        let d2 = apply_step(&d1, &erase("FullTimeStudent")).unwrap();
        assert!(!d2.classifiers.contains(&cid("FullTimeStudent")));
        assert!(!d2.generalizations.iter().any(|(_, sub)| sub == &cid("FullTimeStudent")));
        assert_eq!(d2.generalizations.len(), 1);
    }

    #[test]
    fn erase_anchored_class_is_rejected() {
        assert!(matches!(
            apply_step(&fig1(), &erase("FullTimeStudent")),
            Err(RuleError::StillAnchored { .. })
        ));
    }

    #[test]
    fn erase_subclass_of_abstract_is_rejected_unless_unchecked() {
        let d = ClassDiagram::builder("E")
            .abstract_class("A")
            .class("B")
            .generalization("A", "B")
            .build()
            .unwrap();
        assert!(matches!(apply_step(&d, &erase("B")), Err(RuleError::AbstractSupertype { .. })));
        let unchecked = TransformStep::EraseClassifier { classifier: cid("B"), unchecked: true };
        assert!(apply_step(&d, &unchecked).is_ok());
    }

    #[test]
    fn weaken_requires_superset() {
        let step = |m| TransformStep::WeakenMultiplicity {
            association: nid("enlightens"),
            role: nid("enlightened_by"),
            multi: m,
        };
        assert!(matches!(
            apply_step(&fig1(), &step(MultiplicitySet::exactly(2))),
            Err(RuleError::NotAWeakening { .. })
        ));
        let same = apply_step(&fig1(), &step(MultiplicitySet::exactly(1))).unwrap();
        assert!(diagram_equal(&same, &fig1()));
    }

    #[test]
    fn erase_attribute_respects_inheritance() {
        let d = ClassDiagram::builder("E")
            .class("A")
            .class("B")
            .attribute("A", "x")
            .attribute("B", "x")
            .attribute("B", "y")
            .generalization("A", "B")
            .build()
            .unwrap();
        let erase_attr =
            |c: &str, a: &str| TransformStep::EraseAttribute { classifier: cid(c), attribute: nid(a) };
        assert!(matches!(apply_step(&d, &erase_attr("B", "x")), Err(RuleError::InheritedAttribute { .. })));
        assert!(apply_step(&d, &erase_attr("B", "y")).is_ok());
        assert!(matches!(apply_step(&d, &erase_attr("A", "y")), Err(RuleError::UnknownAttribute { .. })));
        let no_x = apply_step(&d, &erase_attr("A", "x")).unwrap();
        assert!(no_x.attributes_of(&cid("A")).next().is_none());
    }

    #[test]
    fn erase_generalization_of_abstract_super_rejected() {
        let d = ClassDiagram::builder("E")
            .abstract_class("A")
            .class("B")
            .class("C")
            .generalization("A", "B")
            .generalization("C", "B")
            .build()
            .unwrap();
        let eg = |a: &str, b: &str| TransformStep::EraseGeneralization { sup: cid(a), sub: cid(b) };
        assert!(matches!(apply_step(&d, &eg("A", "B")), Err(RuleError::AbstractGeneralization { .. })));
        assert!(matches!(apply_step(&d, &eg("B", "A")), Err(RuleError::UnknownGeneralization { .. })));
        assert_eq!(apply_step(&d, &eg("C", "B")).unwrap().generalizations.len(), 1);
    }

    #[test]
    fn ill_formed_input_rejected() {
        let d = ClassDiagram::builder("E").class("A").generalization("A", "A").build().unwrap();
        assert!(matches!(apply_step(&d, &erase("A")), Err(RuleError::IllFormedInput(_))));
    }

    #[test]
    fn script_stops_at_failed_precondition() {
        let script = ProofScript {
            name: nid("p"),
            start: fig1(),
            goal: None,
            steps: vec![erase("FullTimeStudent"), move_up()],
        };
        let r = run_proof_script(&script, None);
        assert!(!r.ok);
        assert!(matches!(r.failure, Some(ProofFailure::Rule { index: 0, .. })));
        assert!(r.per_step.is_empty());
    }

    #[test]
    fn identity_script_reaches_start() {
        let script = ProofScript {
            name: nid("p"),
            start: fig1(),
            goal: Some(fig1()),
            steps: vec![TransformStep::WeakenMultiplicity {
                association: nid("enlightens"),
                role: nid("enlightens"),
                multi: MultiplicitySet::any(),
            }],
        };
        let r = run_proof_script(&script, Some(&Bounds::covering(1, &[&fig1()])));
        assert!(r.ok, "{:?}", r.failure);
        assert!(diagram_equal(r.final_diagram().unwrap(), &fig1()));
    }
}
