//! Bit-level encoding of the bounded carrier.
//!
//! With `k` objects, an object state is the tuple (isa mask, one target mask
//! per role, attribute mask). Its index is the mixed-radix number with the isa
//! mask most significant, then the roles in name order, then the attributes;
//! bit `j` of a target mask is object `o{j+1}`.

use std::collections::BTreeMap;

use crate::diagram::{ClassDiagram, Vocabulary};
use crate::multiplicity::MultiplicitySet;
use crate::names::{ClassifierId, NameId, ObjectId};
use crate::snapshot::{ObjectState, Snapshot};

use super::FinderError;

/// Upper bound on the number of object states materialized per level.
const MAX_STATES_PER_OBJECT: u64 = 1 << 24;

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub classifiers: Vec<ClassifierId>,
    pub roles: Vec<NameId>,
    pub attributes: Vec<NameId>,
    pub allow_untagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LocalState {
    pub index: u64,
    pub isa: u64,
    pub roles: Vec<u64>,
    pub attrs: u64,
}

impl Layout {
    pub fn new(universe: &Vocabulary, allow_untagged: bool) -> Result<Self, FinderError> {
        let classifiers: Vec<_> = universe.classifiers.iter().cloned().collect();
        let roles: Vec<_> = universe.roles.iter().cloned().collect();
        // A name that is a role somewhere is always a link slot.
        let attributes: Vec<_> =
            universe.attributes.iter().filter(|a| !universe.roles.contains(*a)).cloned().collect();
        if classifiers.len() >= 64 || attributes.len() >= 64 {
            return Err(FinderError::ScopeTooLarge(format!(
                "{} classifiers and {} attributes exceed the 63-name limit",
                classifiers.len(),
                attributes.len()
            )));
        }
        Ok(Self { classifiers, roles, attributes, allow_untagged })
    }

    pub fn state_bits(&self, k: usize) -> u64 {
        (self.classifiers.len() + k * self.roles.len() + self.attributes.len()) as u64
    }

    pub fn check_scope(&self, k: usize) -> Result<(), FinderError> {
        if k >= 64 || self.state_bits(k) >= 63 || (1u64 << self.state_bits(k)) > MAX_STATES_PER_OBJECT {
            return Err(FinderError::ScopeTooLarge(format!(
                "{} bits per object state at {k} objects",
                self.state_bits(k)
            )));
        }
        Ok(())
    }

    fn index_of(&self, k: usize, isa: u64, roles: &[u64], attrs: u64) -> u64 {
        let mut idx = isa;
        for &m in roles {
            idx = (idx << k) | m;
        }
        (idx << self.attributes.len()) | attrs
    }

    /// Object states for `k` objects in ascending index order, restricted to
    /// those accepted by `filter` when given.
    pub fn states(&self, k: usize, filter: Option<&CompiledDiagram>) -> Vec<LocalState> {
        let mut out = Vec::new();
        let isa_count = 1u64 << self.classifiers.len();
        let mask_count = 1u64 << k;
        let attr_count = 1u64 << self.attributes.len();
        for isa in 0..isa_count {
            if isa == 0 && !self.allow_untagged {
                continue;
            }
            if filter.is_some_and(|f| !f.isa_ok(isa)) {
                continue;
            }
            let role_domains: Vec<Vec<u64>> = (0..self.roles.len())
                .map(|j| (0..mask_count).filter(|&m| filter.is_none_or(|f| f.role_ok(isa, j, m))).collect())
                .collect();
            let attr_domain: Vec<u64> =
                (0..attr_count).filter(|&a| filter.is_none_or(|f| f.attrs_ok(isa, a))).collect();
            for roles in product(&role_domains) {
                for &attrs in &attr_domain {
                    out.push(LocalState {
                        index: self.index_of(k, isa, &roles, attrs),
                        isa,
                        roles: roles.clone(),
                        attrs,
                    });
                }
            }
        }
        out
    }

    pub fn object_id(i: usize) -> ObjectId {
        ObjectId::new(format!("o{}", i + 1)).expect("generated ids are identifiers")
    }

    pub fn materialize(&self, objects: &[&LocalState]) -> Snapshot {
        let ids: Vec<ObjectId> = (0..objects.len()).map(Self::object_id).collect();
        let mut snapshot = Snapshot::default();
        for (i, st) in objects.iter().enumerate() {
            let isa = bits(st.isa).map(|b| self.classifiers[b].clone()).collect();
            let link_slots: BTreeMap<_, _> = self
                .roles
                .iter()
                .zip(&st.roles)
                .map(|(role, &m)| (role.clone(), bits(m).map(|b| ids[b].clone()).collect()))
                .collect();
            let atom_slots = bits(st.attrs).map(|b| self.attributes[b].clone()).collect();
            snapshot.objects.insert(ids[i].clone(), ObjectState { isa, link_slots, atom_slots });
        }
        snapshot
    }
}

/// Cartesian product, first domain most significant.
fn product(domains: &[Vec<u64>]) -> Vec<Vec<u64>> {
    domains.iter().fold(vec![Vec::new()], |acc, dom| {
        acc.into_iter()
            .flat_map(|prefix| {
                dom.iter().map(move |&m| {
                    let mut next = prefix.clone();
                    next.push(m);
                    next
                })
            })
            .collect()
    })
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |b| mask & (1u64 << b) != 0)
}

#[derive(Debug, Clone)]
struct CompiledEnd {
    anchor: u64,
    role: usize,
    multi: MultiplicitySet,
    target: Option<u64>,
}

/// A well-formed diagram translated to masks over a [`Layout`].
#[derive(Debug, Clone)]
pub(crate) struct CompiledDiagram {
    /// (sub, super): a `sub` tag demands the `super` tag.
    closure: Vec<(u64, u64)>,
    /// (abstract classifier, mask of its direct subclasses).
    abstracts: Vec<(u64, u64)>,
    /// (classifier, attribute mask it requires).
    required: Vec<(u64, u64)>,
    ends: Vec<CompiledEnd>,
    ends_by_role: Vec<Vec<usize>>,
}

impl CompiledDiagram {
    pub fn compile(d: &ClassDiagram, layout: &Layout) -> Self {
        let class_bit = |c: &ClassifierId| -> u64 {
            let i = layout.classifiers.binary_search(c).expect("universe covers the diagram");
            1u64 << i
        };
        let closure = d.generalizations.iter().map(|(sup, sub)| (class_bit(sub), class_bit(sup))).collect();
        let abstracts = d
            .abstract_set
            .iter()
            .map(|c| (class_bit(c), d.direct_subtypes(c).map(class_bit).fold(0, |m, b| m | b)))
            .collect();
        let required = d
            .classifiers
            .iter()
            .map(|c| {
                let mask = d
                    .attributes_of(c)
                    .filter_map(|a| layout.attributes.binary_search(a).ok())
                    .fold(0u64, |m, i| m | (1u64 << i));
                (class_bit(c), mask)
            })
            .filter(|&(_, m)| m != 0)
            .collect();
        let mut ends = Vec::new();
        let mut ends_by_role = vec![Vec::new(); layout.roles.len()];
        for a in &d.associations {
            for e in &a.ends {
                let role = layout.roles.binary_search(&e.role).expect("universe covers the diagram");
                ends_by_role[role].push(ends.len());
                ends.push(CompiledEnd {
                    anchor: class_bit(&e.anchor),
                    role,
                    multi: e.multi.clone(),
                    target: a.opposite(&e.role).map(|o| class_bit(&o.anchor)),
                });
            }
        }
        Self { closure, abstracts, required, ends, ends_by_role }
    }

    pub fn isa_ok(&self, isa: u64) -> bool {
        self.closure.iter().all(|&(sub, sup)| isa & sub == 0 || isa & sup != 0)
            && self.abstracts.iter().all(|&(c, subs)| isa & c == 0 || isa & subs != 0)
    }

    pub fn role_ok(&self, isa: u64, role: usize, mask: u64) -> bool {
        self.ends_by_role[role].iter().all(|&e| {
            let end = &self.ends[e];
            if isa & end.anchor != 0 {
                end.multi.contains(u64::from(mask.count_ones()))
            } else {
                mask == 0
            }
        })
    }

    pub fn attrs_ok(&self, isa: u64, attrs: u64) -> bool {
        self.required.iter().all(|&(c, req)| isa & c == 0 || attrs & req == req)
    }

    pub fn local_ok(&self, st: &LocalState) -> bool {
        self.isa_ok(st.isa)
            && self.attrs_ok(st.isa, st.attrs)
            && st.roles.iter().enumerate().all(|(j, &m)| self.role_ok(st.isa, j, m))
    }

    /// Target typing among the first `known` objects: links into that prefix
    /// must land on instances of the opposite anchor.
    pub fn typing_ok(&self, objects: &[&LocalState], known: usize) -> bool {
        let known_mask = if known >= 64 { u64::MAX } else { (1u64 << known) - 1 };
        self.ends.iter().all(|end| {
            let Some(target) = end.target else { return true };
            let ext = objects[..known]
                .iter()
                .enumerate()
                .filter(|(_, st)| st.isa & target != 0)
                .fold(0u64, |m, (i, _)| m | (1u64 << i));
            objects[..known].iter().all(|st| st.roles[end.role] & known_mask & !ext == 0)
        })
    }

    pub fn satisfied_by(&self, objects: &[&LocalState]) -> bool {
        objects.iter().all(|st| self.local_ok(st)) && self.typing_ok(objects, objects.len())
    }
}
