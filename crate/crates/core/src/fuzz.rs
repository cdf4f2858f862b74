//! Seeded random diagrams and empirical soundness checks of the rule catalog.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{Association, AssociationEnd, ClassDiagram};
use crate::finder::{check_refinement, Bounds, FinderError};
use crate::multiplicity::MultiplicitySet;
use crate::names::{ClassifierId, NameId};
use crate::snapshot::Snapshot;
use crate::transform::{apply_step, TransformStep};

/// Rules the fuzzer can exercise: the six catalog rules plus two deliberately
/// unsound variants used to show the checker detects broken rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    Weaken,
    EraseAssociation,
    EraseClass,
    EraseAttribute,
    EraseGeneralization,
    MoveEndUp,
    /// `move-end-up` without adding 0 to the moved end.
    MoveEndUpNoOptional,
    /// `erase-class` without the abstract-supertype precondition.
    EraseClassUnchecked,
}

impl RuleId {
    pub const CATALOG: [RuleId; 6] = [
        RuleId::Weaken,
        RuleId::EraseAssociation,
        RuleId::EraseClass,
        RuleId::EraseAttribute,
        RuleId::EraseGeneralization,
        RuleId::MoveEndUp,
    ];

    pub const ALL: [RuleId; 8] = [
        RuleId::Weaken,
        RuleId::EraseAssociation,
        RuleId::EraseClass,
        RuleId::EraseAttribute,
        RuleId::EraseGeneralization,
        RuleId::MoveEndUp,
        RuleId::MoveEndUpNoOptional,
        RuleId::EraseClassUnchecked,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Weaken => "weaken",
            RuleId::EraseAssociation => "erase-association",
            RuleId::EraseClass => "erase-class",
            RuleId::EraseAttribute => "erase-attribute",
            RuleId::EraseGeneralization => "erase-generalization",
            RuleId::MoveEndUp => "move-end-up",
            RuleId::MoveEndUpNoOptional => "move-end-up-no-optional",
            RuleId::EraseClassUnchecked => "erase-class-unchecked",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = RuleId::ALL.iter().map(|r| r.as_str()).collect();
            format!("unknown rule {s:?} (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub max_classifiers: usize,
    pub max_associations: usize,
    pub max_attributes: usize,
    pub abstract_probability: f64,
    pub generalization_probability: f64,
    /// Attempts per iteration to draw a diagram where the rule applies.
    pub max_draws: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            max_classifiers: 3,
            max_associations: 2,
            max_attributes: 2,
            abstract_probability: 0.3,
            generalization_probability: 0.4,
            max_draws: 50,
        }
    }
}

const CLASS_NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

fn multiplicity_pool() -> Vec<MultiplicitySet> {
    let r = |lo, hi| MultiplicitySet::between(lo, hi).expect("valid range");
    vec![
        MultiplicitySet::any(),
        r(0, 1),
        MultiplicitySet::exactly(1),
        MultiplicitySet::at_least(1),
        MultiplicitySet::exactly(2),
        r(1, 2),
        MultiplicitySet::exactly(0),
        MultiplicitySet::from_ranges([(0, Some(0)), (2, None)]).expect("valid ranges"),
    ]
}

fn cid(s: impl Into<String>) -> ClassifierId {
    ClassifierId::new(s).expect("generated names are identifiers")
}

fn nid(s: impl Into<String>) -> NameId {
    NameId::new(s).expect("generated names are identifiers")
}

/// A random well-formed diagram. Generalizations only run from lower to
/// higher classifier index, and attributes are propagated down the
/// hierarchy, so the result satisfies every structural axiom by construction.
pub fn generate_diagram(rng: &mut impl Rng, config: &GeneratorConfig) -> ClassDiagram {
    let n = rng.gen_range(1..=config.max_classifiers.clamp(1, CLASS_NAMES.len()));
    let classes: Vec<ClassifierId> = CLASS_NAMES[..n].iter().map(|c| cid(*c)).collect();
    let mut d = ClassDiagram::new(nid("G"));
    for c in &classes {
        d.add_classifier(c.clone());
        if rng.gen_bool(config.abstract_probability) {
            d.abstract_set.insert(c.clone());
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(config.generalization_probability) {
                d.generalizations.insert((classes[i].clone(), classes[j].clone()));
            }
        }
    }
    let attr_names: Vec<NameId> = (0..config.max_attributes).map(|i| nid(format!("a{i}"))).collect();
    for c in &classes {
        for a in &attr_names {
            if rng.gen_bool(0.3) {
                d.attributes.entry(c.clone()).or_default().insert(a.clone());
            }
        }
    }
    for j in 0..n {
        let inherited: Vec<NameId> = (0..j)
            .filter(|&i| d.generalizations.contains(&(classes[i].clone(), classes[j].clone())))
            .flat_map(|i| d.attributes_of(&classes[i]).cloned().collect::<Vec<_>>())
            .collect();
        d.attributes.entry(classes[j].clone()).or_default().extend(inherited);
    }
    let pool = multiplicity_pool();
    let assocs = rng.gen_range(0..=config.max_associations);
    for a in 0..assocs {
        let end = |side: &str, rng: &mut dyn rand::RngCore| {
            AssociationEnd::new(
                nid(format!("r{a}{side}")),
                classes.choose(rng).expect("at least one class").clone(),
                pool.choose(rng).expect("non-empty pool").clone(),
            )
        };
        let first = end("a", rng);
        let second = end("b", rng);
        d.associations.push(Association::binary(nid(format!("as{a}")), first, second));
    }
    debug_assert!(crate::wellformed::well_formed(&d).ok);
    d
}

/// Every parameter binding of `rule` on `d` whose preconditions hold.
pub fn applicable_steps(rule: RuleId, d: &ClassDiagram, rng: &mut impl Rng) -> Vec<TransformStep> {
    let mut out = Vec::new();
    match rule {
        RuleId::Weaken => {
            let pool = multiplicity_pool();
            for (a, e) in d.ends() {
                let extra = pool.choose(rng).expect("non-empty pool");
                out.push(TransformStep::WeakenMultiplicity {
                    association: a.name.clone(),
                    role: e.role.clone(),
                    multi: e.multi.union(extra),
                });
            }
        }
        RuleId::EraseAssociation => {
            out.extend(
                d.associations
                    .iter()
                    .map(|a| TransformStep::EraseAssociation { association: a.name.clone() }),
            );
        }
        RuleId::EraseClass | RuleId::EraseClassUnchecked => {
            let unchecked = rule == RuleId::EraseClassUnchecked;
            for c in &d.classifiers {
                let anchored = d.ends().any(|(_, e)| &e.anchor == c);
                let abstract_super = d.direct_supertypes(c).any(|s| d.abstract_set.contains(s));
                if !anchored && (unchecked || !abstract_super) {
                    out.push(TransformStep::EraseClassifier { classifier: c.clone(), unchecked });
                }
            }
        }
        RuleId::EraseAttribute => {
            for c in &d.classifiers {
                for a in d.attributes_of(c) {
                    if !d.direct_supertypes(c).any(|s| d.attributes_of(s).any(|x| x == a)) {
                        out.push(TransformStep::EraseAttribute {
                            classifier: c.clone(),
                            attribute: a.clone(),
                        });
                    }
                }
            }
        }
        RuleId::EraseGeneralization => {
            for (sup, sub) in &d.generalizations {
                if !d.abstract_set.contains(sup) {
                    out.push(TransformStep::EraseGeneralization { sup: sup.clone(), sub: sub.clone() });
                }
            }
        }
        RuleId::MoveEndUp | RuleId::MoveEndUpNoOptional => {
            for (a, e) in d.ends() {
                let Ok(ancestors) = d.ancestors(&e.anchor) else { continue };
                for target in ancestors.into_iter().filter(|t| t != &e.anchor) {
                    out.push(TransformStep::MoveEndUp {
                        association: a.name.clone(),
                        role: e.role.clone(),
                        target,
                        keep_multiplicity: rule == RuleId::MoveEndUpNoOptional,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzFailure {
    pub iteration: usize,
    pub diagram: ClassDiagram,
    pub step: TransformStep,
    pub counterexample: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzReport {
    pub rule: RuleId,
    pub seed: u64,
    pub iterations: usize,
    /// Iterations in which an applicable binding was found and checked.
    pub applied: usize,
    pub failures: Vec<FuzzFailure>,
}

/// Applies `rule` to random diagrams and checks each result is a refinement
/// within `bounds` (widened to both diagrams' names). Identical inputs give
/// identical reports.
pub fn fuzz_rule_soundness(
    rule: RuleId,
    iterations: usize,
    bounds: &Bounds,
    seed: u64,
    config: &GeneratorConfig,
) -> Result<FuzzReport, FinderError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport { rule, seed, iterations, applied: 0, failures: Vec::new() };
    for iteration in 0..iterations {
        let mut drawn = None;
        for _ in 0..config.max_draws.max(1) {
            let d = generate_diagram(&mut rng, config);
            let steps = applicable_steps(rule, &d, &mut rng);
            if let Some(step) = steps.choose(&mut rng) {
                drawn = Some((d, step.clone()));
                break;
            }
        }
        let Some((d, step)) = drawn else { continue };
        let after = apply_step(&d, &step)
            .map_err(|e| FinderError::Internal(format!("generated binding rejected: {e}")))?;
        report.applied += 1;
        let verdict = check_refinement(&d, &after, &bounds.extended_by(&[&d, &after]))?;
        if let Some(counterexample) = verdict.witness {
            report.failures.push(FuzzFailure { iteration, diagram: d, step, counterexample });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::Vocabulary;
    use crate::wellformed::well_formed;

    #[test]
    fn generated_diagrams_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let d = generate_diagram(&mut rng, &GeneratorConfig::default());
            let r = well_formed(&d);
            assert!(r.ok, "{:?}", r.findings);
        }
    }

    #[test]
    fn rule_names_round_trip() {
        for r in RuleId::ALL {
            assert_eq!(r.as_str().parse::<RuleId>(), Ok(r));
        }
        assert!("nope".parse::<RuleId>().is_err());
    }

    #[test]
    fn same_seed_same_report() {
        let b = Bounds::new(1, Vocabulary::default());
        let cfg = GeneratorConfig::default();
        let a = fuzz_rule_soundness(RuleId::MoveEndUpNoOptional, 30, &b, 11, &cfg).unwrap();
        let again = fuzz_rule_soundness(RuleId::MoveEndUpNoOptional, 30, &b, 11, &cfg).unwrap();
        assert_eq!(a, again);
    }
}
