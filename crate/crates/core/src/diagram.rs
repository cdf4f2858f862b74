//! Abstract syntax of static class diagrams.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::multiplicity::MultiplicitySet;
use crate::names::{ClassifierId, NameError, NameId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssociationEnd {
    pub role: NameId,
    pub anchor: ClassifierId,
    pub multi: MultiplicitySet,
}

impl AssociationEnd {
    pub fn new(role: NameId, anchor: ClassifierId, multi: MultiplicitySet) -> Self {
        Self { role, anchor, multi }
    }
}

/// A named association. Well-formed associations have exactly two ends; the
/// stored order is only used for printing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Association {
    pub name: NameId,
    pub ends: Vec<AssociationEnd>,
}

impl Association {
    pub fn binary(name: NameId, first: AssociationEnd, second: AssociationEnd) -> Self {
        Self { name, ends: vec![first, second] }
    }

    pub fn end(&self, role: &NameId) -> Option<&AssociationEnd> {
        self.ends.iter().find(|e| &e.role == role)
    }

    /// The end opposite to `role` in a binary association.
    pub fn opposite(&self, role: &NameId) -> Option<&AssociationEnd> {
        match self.ends.as_slice() {
            [a, b] if &a.role == role => Some(b),
            [a, b] if &b.role == role => Some(a),
            _ => None,
        }
    }

    fn normalized(&self) -> (NameId, Vec<AssociationEnd>) {
        let mut ends = self.ends.clone();
        ends.sort();
        (self.name.clone(), ends)
    }
}

/// The names a diagram talks about. Association names are a separate
/// namespace and are not part of the vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub classifiers: BTreeSet<ClassifierId>,
    pub roles: BTreeSet<NameId>,
    pub attributes: BTreeSet<NameId>,
}

impl Vocabulary {
    pub fn union(&self, other: &Self) -> Self {
        Self {
            classifiers: self.classifiers.union(&other.classifiers).cloned().collect(),
            roles: self.roles.union(&other.roles).cloned().collect(),
            attributes: self.attributes.union(&other.attributes).cloned().collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.classifiers.is_subset(&other.classifiers)
            && self.roles.is_subset(&other.roles)
            && self.attributes.is_subset(&other.attributes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("unknown classifier {0}")]
    UnknownClassifier(ClassifierId),
}

/// A static model: classifiers, abstract classifiers, attributes per
/// classifier, the `(super, sub)` generalization relation and associations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDiagram {
    pub name: NameId,
    pub classifiers: BTreeSet<ClassifierId>,
    pub abstract_set: BTreeSet<ClassifierId>,
    pub attributes: BTreeMap<ClassifierId, BTreeSet<NameId>>,
    pub generalizations: BTreeSet<(ClassifierId, ClassifierId)>,
    pub associations: Vec<Association>,
}

impl ClassDiagram {
    pub fn new(name: NameId) -> Self {
        Self {
            name,
            classifiers: BTreeSet::new(),
            abstract_set: BTreeSet::new(),
            attributes: BTreeMap::new(),
            generalizations: BTreeSet::new(),
            associations: Vec::new(),
        }
    }

    pub fn builder(name: &str) -> DiagramBuilder {
        DiagramBuilder::new(name)
    }

    /// Declares a classifier (idempotent) and keeps the attribute mapping total.
    pub fn add_classifier(&mut self, c: ClassifierId) {
        self.attributes.entry(c.clone()).or_default();
        self.classifiers.insert(c);
    }

    /// Attributes of `c`; undeclared classifiers have none.
    pub fn attributes_of(&self, c: &ClassifierId) -> impl Iterator<Item = &NameId> {
        self.attributes.get(c).into_iter().flatten()
    }

    pub fn association(&self, name: &NameId) -> Option<&Association> {
        self.associations.iter().find(|a| &a.name == name)
    }

    pub fn association_mut(&mut self, name: &NameId) -> Option<&mut Association> {
        self.associations.iter_mut().find(|a| &a.name == name)
    }

    pub fn ends(&self) -> impl Iterator<Item = (&Association, &AssociationEnd)> {
        self.associations.iter().flat_map(|a| a.ends.iter().map(move |e| (a, e)))
    }

    pub fn direct_supertypes<'a>(&'a self, c: &'a ClassifierId) -> impl Iterator<Item = &'a ClassifierId> {
        self.generalizations.iter().filter(move |(_, sub)| sub == c).map(|(sup, _)| sup)
    }

    pub fn direct_subtypes<'a>(&'a self, c: &'a ClassifierId) -> impl Iterator<Item = &'a ClassifierId> {
        self.generalizations.iter().filter(move |(sup, _)| sup == c).map(|(_, sub)| sub)
    }

    /// `{c}` together with every strict supertype of `c`.
    pub fn ancestors(&self, c: &ClassifierId) -> Result<BTreeSet<ClassifierId>, DiagramError> {
        if !self.classifiers.contains(c) {
            return Err(DiagramError::UnknownClassifier(c.clone()));
        }
        let mut seen = BTreeSet::from([c.clone()]);
        let mut queue = VecDeque::from([c.clone()]);
        while let Some(next) = queue.pop_front() {
            for sup in self.direct_supertypes(&next) {
                if seen.insert(sup.clone()) {
                    queue.push_back(sup.clone());
                }
            }
        }
        Ok(seen)
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary {
            classifiers: self.classifiers.clone(),
            roles: self.ends().map(|(_, e)| e.role.clone()).collect(),
            attributes: self.attributes.values().flatten().cloned().collect(),
        }
    }

    /// Set-level equality: declaration order, end order and the diagram's own
    /// name are irrelevant.
    pub fn equivalent(&self, other: &Self) -> bool {
        let attrs = |d: &Self| -> BTreeMap<ClassifierId, BTreeSet<NameId>> {
            d.classifiers.iter().map(|c| (c.clone(), d.attributes_of(c).cloned().collect())).collect()
        };
        let assocs = |d: &Self| -> BTreeSet<(NameId, Vec<AssociationEnd>)> {
            d.associations.iter().map(Association::normalized).collect()
        };
        self.classifiers == other.classifiers
            && self.abstract_set == other.abstract_set
            && self.generalizations == other.generalizations
            && attrs(self) == attrs(other)
            && assocs(self) == assocs(other)
    }
}

/// `diagram_equal`: see [`ClassDiagram::equivalent`].
pub fn diagram_equal(d1: &ClassDiagram, d2: &ClassDiagram) -> bool {
    d1.equivalent(d2)
}

/// Convenience constructor taking string names; the first invalid name is
/// reported by [`DiagramBuilder::build`].
#[derive(Debug)]
pub struct DiagramBuilder {
    diagram: Result<ClassDiagram, NameError>,
}

impl DiagramBuilder {
    pub fn new(name: &str) -> Self {
        Self { diagram: NameId::new(name).map(ClassDiagram::new) }
    }

    fn with(mut self, f: impl FnOnce(&mut ClassDiagram) -> Result<(), NameError>) -> Self {
        if let Ok(d) = &mut self.diagram {
            if let Err(e) = f(d) {
                self.diagram = Err(e);
            }
        }
        self
    }

    pub fn class(self, c: &str) -> Self {
        self.with(|d| {
            d.add_classifier(ClassifierId::new(c)?);
            Ok(())
        })
    }

    pub fn abstract_class(self, c: &str) -> Self {
        self.with(|d| {
            let c = ClassifierId::new(c)?;
            d.add_classifier(c.clone());
            d.abstract_set.insert(c);
            Ok(())
        })
    }

    pub fn attribute(self, c: &str, a: &str) -> Self {
        self.with(|d| {
            let c = ClassifierId::new(c)?;
            let a = NameId::new(a)?;
            d.attributes.entry(c).or_default().insert(a);
            Ok(())
        })
    }

    /// `sup <| sub`
    pub fn generalization(self, sup: &str, sub: &str) -> Self {
        self.with(|d| {
            d.generalizations.insert((ClassifierId::new(sup)?, ClassifierId::new(sub)?));
            Ok(())
        })
    }

    pub fn association(
        self,
        name: &str,
        first: (&str, &str, MultiplicitySet),
        second: (&str, &str, MultiplicitySet),
    ) -> Self {
        self.with(|d| {
            let end =
                |(role, anchor, multi): (&str, &str, MultiplicitySet)| -> Result<AssociationEnd, NameError> {
                    Ok(AssociationEnd::new(NameId::new(role)?, ClassifierId::new(anchor)?, multi))
                };
            d.associations.push(Association::binary(NameId::new(name)?, end(first)?, end(second)?));
            Ok(())
        })
    }

    pub fn build(self) -> Result<ClassDiagram, NameError> {
        self.diagram
    }
}
