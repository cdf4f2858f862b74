//! Bounded meaning function: enumeration of the finite carrier, instance
//! finding and refinement checking `M(d1) ⊆ M(d2)` with counterexamples.
//!
//! All verdicts are relative to a scope (`max_objects`). A verdict of
//! [`Outcome::HoldsAtBound`] never claims anything about larger snapshots.

mod search;
mod space;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::diagram::{ClassDiagram, Vocabulary};
use crate::names::ClassifierId;
use crate::snapshot::{satisfies, Snapshot};
use crate::wellformed::{well_formed, ValidationReport};

use search::Search;
use space::{CompiledDiagram, Layout, LocalState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FinderError {
    #[error("diagram {name} is not well formed")]
    IllFormed { name: String, report: ValidationReport },
    #[error("universe does not cover names used by {diagram}: {}", missing.join(", "))]
    UniverseNotCovering { diagram: String, missing: Vec<String> },
    #[error("classifier {0} is not declared by the diagram")]
    UnknownClassifier(ClassifierId),
    #[error("scope too large: {0}")]
    ScopeTooLarge(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// How the carrier is walked. Both strategies yield identical verdicts and
/// identical first counterexamples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Every candidate snapshot is built and then checked.
    Naive,
    /// Per-object constraints filter object states up front and link typing
    /// is checked on every prefix.
    #[default]
    Pruned,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Naive => "naive",
            Strategy::Pruned => "pruned",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "pruned" => Ok(Strategy::Pruned),
            other => Err(format!("unknown strategy {other:?} (expected naive or pruned)")),
        }
    }
}

/// The finite scope standing in for the full semantic domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub max_objects: usize,
    pub universe: Vocabulary,
    pub allow_untagged_objects: bool,
    pub strategy: Strategy,
}

impl Bounds {
    pub fn new(max_objects: usize, universe: Vocabulary) -> Self {
        Self { max_objects, universe, allow_untagged_objects: true, strategy: Strategy::default() }
    }

    /// Universe made of the union of the diagrams' vocabularies.
    pub fn covering(max_objects: usize, diagrams: &[&ClassDiagram]) -> Self {
        let universe = diagrams.iter().fold(Vocabulary::default(), |u, d| u.union(&d.vocabulary()));
        Self::new(max_objects, universe)
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn extended_by(&self, diagrams: &[&ClassDiagram]) -> Self {
        let universe = diagrams.iter().fold(self.universe.clone(), |u, d| u.union(&d.vocabulary()));
        Self { universe, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    HoldsAtBound,
    Counterexample,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::HoldsAtBound => "HOLDS_AT_BOUND",
            Outcome::Counterexample => "COUNTEREXAMPLE",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementVerdict {
    pub outcome: Outcome,
    /// Present iff `outcome` is a counterexample: a model of the first
    /// diagram that is not a model of the second.
    pub witness: Option<Snapshot>,
    /// Models of the first diagram examined, including the witness.
    pub checked_count: u64,
    pub max_objects: usize,
}

impl RefinementVerdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::HoldsAtBound
    }
}

fn require_well_formed(d: &ClassDiagram) -> Result<(), FinderError> {
    let report = well_formed(d);
    if report.ok {
        Ok(())
    } else {
        Err(FinderError::IllFormed { name: d.name.to_string(), report })
    }
}

fn require_covered(d: &ClassDiagram, b: &Bounds) -> Result<(), FinderError> {
    let v = d.vocabulary();
    let u = &b.universe;
    let missing: Vec<String> = v
        .classifiers
        .difference(&u.classifiers)
        .map(ToString::to_string)
        .chain(v.roles.difference(&u.roles).map(ToString::to_string))
        .chain(
            v.attributes
                .iter()
                .filter(|a| !u.attributes.contains(*a) && !u.roles.contains(*a))
                .map(ToString::to_string),
        )
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(FinderError::UniverseNotCovering { diagram: d.name.to_string(), missing })
    }
}

fn layout_for(b: &Bounds) -> Result<Layout, FinderError> {
    let layout = Layout::new(&b.universe, b.allow_untagged_objects)?;
    layout.check_scope(b.max_objects)?;
    Ok(layout)
}

/// Every canonical snapshot of the carrier, in carrier order: fewer objects
/// first, then lexicographically by object state (`o1` most significant).
pub fn enumerate_snapshots(b: &Bounds) -> Result<SnapshotIter, FinderError> {
    Ok(SnapshotIter { inner: ModelIter::new(layout_for(b)?, None, b) })
}

/// Models of `d` within the scope, in carrier order.
pub fn meaning_up_to_bound(d: &ClassDiagram, b: &Bounds) -> Result<ModelIter, FinderError> {
    require_well_formed(d)?;
    require_covered(d, b)?;
    let layout = layout_for(b)?;
    let compiled = CompiledDiagram::compile(d, &layout);
    Ok(ModelIter::new(layout, Some(compiled), b))
}

/// The first model in carrier order whose extension of every classifier in
/// `require_nonempty` is non-empty. `None` is inconclusive beyond the bound.
pub fn find_instance(
    d: &ClassDiagram,
    b: &Bounds,
    require_nonempty: &BTreeSet<ClassifierId>,
) -> Result<Option<Snapshot>, FinderError> {
    if let Some(c) = require_nonempty.iter().find(|c| !d.classifiers.contains(*c)) {
        return Err(FinderError::UnknownClassifier(c.clone()));
    }
    let mut models = meaning_up_to_bound(d, b)?;
    let required: Vec<u64> = require_nonempty
        .iter()
        .map(|c| {
            let i = models.search.layout().classifiers.binary_search(c).expect("covered");
            1u64 << i
        })
        .collect();
    while models.search.advance() {
        let objs = models.search.current();
        if required.iter().all(|&bit| objs.iter().any(|st| st.isa & bit != 0)) {
            let found = models.search.layout().materialize(&objs);
            let verdict = satisfies(&found, d).map_err(|e| FinderError::Internal(e.to_string()))?;
            if !verdict.satisfied {
                return Err(FinderError::Internal(format!(
                    "instance rejected on re-check: {:?}",
                    verdict.violations
                )));
            }
            return Ok(Some(found));
        }
    }
    Ok(None)
}

/// Decides `M(d1) ⊆ M(d2)` over the bounded carrier and returns the first
/// counterexample in carrier order if there is one.
pub fn check_refinement(
    d1: &ClassDiagram,
    d2: &ClassDiagram,
    b: &Bounds,
) -> Result<RefinementVerdict, FinderError> {
    require_well_formed(d1)?;
    require_well_formed(d2)?;
    require_covered(d1, b)?;
    require_covered(d2, b)?;
    let layout = layout_for(b)?;
    let source = CompiledDiagram::compile(d1, &layout);
    let target = CompiledDiagram::compile(d2, &layout);

    let mut search = Search::new(layout, Some(source), b.strategy, b.max_objects);
    let mut checked = 0u64;
    let mut level = usize::MAX;
    let mut target_local: Vec<bool> = Vec::new();
    while search.advance() {
        if search.level() != level {
            level = search.level();
            target_local = search.candidates().iter().map(|st| target.local_ok(st)).collect();
        }
        checked += 1;
        let locally = search.positions().iter().all(|&p| target_local[p]);
        let objs = search.current();
        if locally && target.typing_ok(&objs, objs.len()) {
            continue;
        }
        let witness = search.layout().materialize(&objs);
        verify_witness(&witness, d1, d2)?;
        return Ok(RefinementVerdict {
            outcome: Outcome::Counterexample,
            witness: Some(witness),
            checked_count: checked,
            max_objects: b.max_objects,
        });
    }
    Ok(RefinementVerdict {
        outcome: Outcome::HoldsAtBound,
        witness: None,
        checked_count: checked,
        max_objects: b.max_objects,
    })
}

fn verify_witness(w: &Snapshot, d1: &ClassDiagram, d2: &ClassDiagram) -> Result<(), FinderError> {
    let internal = |e: crate::snapshot::SnapshotError| FinderError::Internal(e.to_string());
    let first = satisfies(w, d1).map_err(internal)?;
    let second = satisfies(w, d2).map_err(internal)?;
    if first.satisfied && !second.satisfied {
        Ok(())
    } else {
        Err(FinderError::Internal(format!(
            "counterexample failed re-verification (source satisfied: {}, target satisfied: {})",
            first.satisfied, second.satisfied
        )))
    }
}

/// Lazily produced models of a diagram (or the whole carrier when unfiltered).
pub struct ModelIter {
    search: Search,
}

impl ModelIter {
    fn new(layout: Layout, filter: Option<CompiledDiagram>, b: &Bounds) -> Self {
        Self { search: Search::new(layout, filter, b.strategy, b.max_objects) }
    }
}

impl Iterator for ModelIter {
    type Item = Snapshot;

    fn next(&mut self) -> Option<Snapshot> {
        if self.search.advance() {
            let objs: Vec<&LocalState> = self.search.current();
            Some(self.search.layout().materialize(&objs))
        } else {
            None
        }
    }
}

pub struct SnapshotIter {
    inner: ModelIter,
}

impl Iterator for SnapshotIter {
    type Item = Snapshot;

    fn next(&mut self) -> Option<Snapshot> {
        self.inner.next()
    }
}
