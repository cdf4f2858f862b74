//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use classcalc::textio::{parse_diagram, parse_snapshot};
use classcalc::transform::TransformStep;
use classcalc::{
    enumerate_snapshots, satisfies, Bounds, ClassDiagram, ClassifierId, MultiplicitySet, NameId, ObjectId,
    ObjectState, ProofScript, Snapshot, Vocabulary,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/university").join(file)
}

pub fn read_data(file: &str) -> String {
    std::fs::read_to_string(data_path(file)).expect("reference data is readable")
}

pub fn university_d() -> ClassDiagram {
    parse_diagram(&read_data("D.cd")).expect("D parses")
}

pub fn university_dprime() -> ClassDiagram {
    parse_diagram(&read_data("Dprime.cd")).expect("Dprime parses")
}

pub fn university_snapshot(file: &str) -> Snapshot {
    parse_snapshot(&read_data(file)).expect("snapshot parses")
}

pub fn cid(s: &str) -> ClassifierId {
    ClassifierId::new(s).unwrap()
}

pub fn nid(s: &str) -> NameId {
    NameId::new(s).unwrap()
}

pub fn oid(s: &str) -> ObjectId {
    ObjectId::new(s).unwrap()
}

pub fn vocab(classifiers: &[&str], roles: &[&str], attributes: &[&str]) -> Vocabulary {
    Vocabulary {
        classifiers: classifiers.iter().map(|c| cid(c)).collect(),
        roles: roles.iter().map(|r| nid(r)).collect(),
        attributes: attributes.iter().map(|a| nid(a)).collect(),
    }
}

/// `1 + Σ_{n=1..k} (2^c · 2^(n·r) · 2^a)^n`: snapshots with up to `k` objects.
pub fn closed_form_count(c: u32, r: u32, a: u32, k: u32) -> u128 {
    1 + (1..=k).map(|n| (1u128 << (c + n * r + a)).pow(n)).sum::<u128>()
}

pub fn random_multiplicity(rng: &mut impl Rng) -> MultiplicitySet {
    let n = rng.gen_range(0..=3);
    let ranges: Vec<(u64, Option<u64>)> = (0..n)
        .map(|_| {
            let lo = rng.gen_range(0..5);
            match rng.gen_range(0..3) {
                0 => (lo, Some(lo)),
                1 => (lo, Some(lo + rng.gen_range(0..4))),
                _ => (lo, None),
            }
        })
        .collect();
    MultiplicitySet::from_ranges(ranges).unwrap()
}

/// A snapshot over up to `max_objects` objects whose tags and slots are drawn
/// from `v` plus a few fresh names unknown to it.
pub fn random_snapshot(rng: &mut impl Rng, v: &Vocabulary, max_objects: usize) -> Snapshot {
    let n = rng.gen_range(0..=max_objects);
    let ids: Vec<ObjectId> = (1..=n).map(|i| oid(&format!("x{i}"))).collect();
    let mut classifiers: Vec<ClassifierId> = v.classifiers.iter().cloned().collect();
    classifiers.push(cid("Foreign"));
    let mut roles: Vec<NameId> = v.roles.iter().cloned().collect();
    roles.push(nid("foreign_role"));
    let attributes: Vec<NameId> = v.attributes.iter().filter(|a| !v.roles.contains(*a)).cloned().collect();
    let mut s = Snapshot::default();
    for id in &ids {
        let mut o = ObjectState::default();
        for c in &classifiers {
            if rng.gen_bool(0.4) {
                o.isa.insert(c.clone());
            }
        }
        for r in &roles {
            if rng.gen_bool(0.5) {
                let targets = ids.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
                o.link_slots.insert(r.clone(), targets);
            }
        }
        for a in &attributes {
            if rng.gen_bool(0.5) {
                o.atom_slots.insert(a.clone());
            }
        }
        s.objects.insert(id.clone(), o);
    }
    s
}

/// Pushes a random snapshot towards a model of `d`: drops unrealizable tags,
/// closes tags upward, gives abstract tags a realizable subtype, adds required
/// attributes, then draws link sets whose size lies in the end's multiplicity. The result is not
/// guaranteed to satisfy `d` (a multiplicity may be unreachable).
pub fn repair_towards(rng: &mut impl Rng, s: &Snapshot, d: &ClassDiagram) -> Snapshot {
    let mut s = s.clone();
    let realizable = realizable(d);
    for o in s.objects.values_mut() {
        o.isa.retain(|c| !d.classifiers.contains(c) || realizable.contains(c));
        loop {
            let mut changed = false;
            for (sup, sub) in &d.generalizations {
                if o.isa.contains(sub) {
                    changed |= o.isa.insert(sup.clone());
                }
            }
            let pending: Vec<ClassifierId> = o
                .isa
                .iter()
                .filter(|c| d.abstract_set.contains(*c))
                .filter(|c| !d.generalizations.iter().any(|(p, q)| p == *c && o.isa.contains(q)))
                .cloned()
                .collect();
            for c in pending {
                let subs: Vec<&ClassifierId> = d
                    .generalizations
                    .iter()
                    .filter(|(p, q)| *p == c && realizable.contains(q))
                    .map(|(_, q)| q)
                    .collect();
                let q = subs.choose(rng).expect("realizable abstract classifiers have a realizable subtype");
                changed |= o.isa.insert((*q).clone());
            }
            if !changed {
                break;
            }
        }
        for c in o.isa.clone() {
            if let Some(attrs) = d.attributes.get(&c) {
                for a in attrs {
                    if !o.link_slots.contains_key(a) {
                        o.atom_slots.insert(a.clone());
                    }
                }
            }
        }
    }
    let ids: Vec<ObjectId> = s.objects.keys().cloned().collect();
    let tags: BTreeMap<ObjectId, BTreeSet<ClassifierId>> =
        s.objects.iter().map(|(id, o)| (id.clone(), o.isa.clone())).collect();
    for assoc in &d.associations {
        for end in &assoc.ends {
            let Some(opposite) = assoc.opposite(&end.role) else { continue };
            let pool: Vec<ObjectId> =
                ids.iter().filter(|id| tags[*id].contains(&opposite.anchor)).cloned().collect();
            for (id, o) in s.objects.iter_mut() {
                if !tags[id].contains(&end.anchor) {
                    o.link_slots.remove(&end.role);
                    continue;
                }
                let sizes: Vec<usize> = (0..=pool.len()).filter(|n| end.multi.contains(*n as u64)).collect();
                let size = sizes.choose(rng).copied().unwrap_or(0);
                let targets = pool.choose_multiple(rng, size).cloned().collect();
                o.link_slots.insert(end.role.clone(), targets);
            }
        }
    }
    s
}

/// Classifiers that some object can carry: concrete ones, and abstract ones
/// with a realizable direct subtype.
fn realizable(d: &ClassDiagram) -> BTreeSet<ClassifierId> {
    let mut r: BTreeSet<ClassifierId> = d.classifiers.difference(&d.abstract_set).cloned().collect();
    loop {
        let grown: Vec<ClassifierId> = d
            .generalizations
            .iter()
            .filter(|(sup, sub)| r.contains(sub) && !r.contains(sup))
            .map(|(sup, _)| sup.clone())
            .collect();
        if grown.is_empty() {
            return r;
        }
        r.extend(grown);
    }
}

/// A random model of `d` with at most `max_objects` objects, or `None` after
/// `attempts` failed repairs.
pub fn sample_model(
    rng: &mut impl Rng,
    d: &ClassDiagram,
    max_objects: usize,
    attempts: usize,
) -> Option<Snapshot> {
    let v = d.vocabulary();
    (0..attempts).find_map(|_| {
        let raw = random_snapshot(rng, &v, max_objects);
        let s = repair_towards(rng, &raw, d);
        satisfies(&s, d).unwrap().satisfied.then_some(s)
    })
}

/// A bijective renaming of `s`'s object ids onto shuffled fresh ids.
pub fn random_renaming(rng: &mut impl Rng, s: &Snapshot) -> BTreeMap<ObjectId, ObjectId> {
    let mut fresh: Vec<ObjectId> = (0..s.objects.len() + 3).map(|i| oid(&format!("p{i}"))).collect();
    fresh.shuffle(rng);
    s.objects.keys().cloned().zip(fresh).collect()
}

/// First snapshot of the carrier satisfying `d1` but not `d2`, by plain
/// filtering, with the number of `d1`-models scanned up to it.
pub fn brute_refinement(d1: &ClassDiagram, d2: &ClassDiagram, b: &Bounds) -> (Option<Snapshot>, u64) {
    let mut checked = 0;
    for s in enumerate_snapshots(b).unwrap() {
        if !satisfies(&s, d1).unwrap().satisfied {
            continue;
        }
        checked += 1;
        if !satisfies(&s, d2).unwrap().satisfied {
            return (Some(s), checked);
        }
    }
    (None, checked)
}

fn random_ident(rng: &mut impl Rng) -> String {
    const HEADS: [&str; 6] = ["a", "Node", "x_1", "Mid", "leaf", "Q"];
    let mut s = HEADS.choose(rng).unwrap().to_string();
    for _ in 0..rng.gen_range(0..3) {
        s.push(*b"abz09_".choose(rng).unwrap() as char);
    }
    s
}

fn random_path(rng: &mut impl Rng) -> String {
    const PIECES: [&str; 7] = ["D.cd", "dir/x y.cd", "q\"uote", "back\\slash", "", "ü.cd", "../up"];
    PIECES.choose(rng).unwrap().to_string()
}

pub fn random_step(rng: &mut impl Rng) -> TransformStep {
    let c = |rng: &mut _| cid(&random_ident(rng));
    let n = |rng: &mut _| nid(&random_ident(rng));
    match rng.gen_range(0..6) {
        0 => TransformStep::WeakenMultiplicity {
            association: n(rng),
            role: n(rng),
            multi: random_multiplicity(rng),
        },
        1 => TransformStep::EraseAssociation { association: n(rng) },
        2 => TransformStep::EraseClassifier { classifier: c(rng), unchecked: rng.gen_bool(0.3) },
        3 => TransformStep::EraseAttribute { classifier: c(rng), attribute: n(rng) },
        4 => TransformStep::EraseGeneralization { sup: c(rng), sub: c(rng) },
        _ => TransformStep::MoveEndUp {
            association: n(rng),
            role: n(rng),
            target: c(rng),
            keep_multiplicity: rng.gen_bool(0.3),
        },
    }
}

pub fn random_script(rng: &mut impl Rng) -> ProofScript {
    ProofScript {
        name: nid(&random_ident(rng)),
        start: random_path(rng),
        goal: rng.gen_bool(0.7).then(|| random_path(rng)),
        steps: (0..rng.gen_range(1..6)).map(|_| random_step(rng)).collect(),
    }
}

/// Whether the generalization graph has a cycle, by explicit reachability.
pub fn has_cycle_oracle(d: &ClassDiagram) -> bool {
    d.classifiers.iter().any(|start| {
        let mut seen = BTreeSet::new();
        let mut frontier: Vec<&ClassifierId> = vec![start];
        while let Some(c) = frontier.pop() {
            for (sup, sub) in &d.generalizations {
                if sup == c {
                    if sub == start {
                        return true;
                    }
                    if seen.insert(sub) {
                        frontier.push(sub);
                    }
                }
            }
        }
        false
    })
}
