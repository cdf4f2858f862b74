//! Lazy odometer over object-state tuples.
//!
//! Levels run from 0 objects up to the bound; within a level, tuples are
//! visited in lexicographic order of state indices with `o1` most
//! significant. The pruned strategy visits exactly the naive sequence with
//! non-models skipped, so both agree on every filtered prefix.

use super::space::{CompiledDiagram, Layout, LocalState};
use super::Strategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Fresh,
    InLevel,
    Exhausted,
    Done,
}

pub(crate) struct Search {
    layout: Layout,
    filter: Option<CompiledDiagram>,
    strategy: Strategy,
    max_objects: usize,
    k: usize,
    candidates: Vec<LocalState>,
    pos: Vec<usize>,
    phase: Phase,
}

impl Search {
    pub fn new(
        layout: Layout,
        filter: Option<CompiledDiagram>,
        strategy: Strategy,
        max_objects: usize,
    ) -> Self {
        Self {
            layout,
            filter,
            strategy,
            max_objects,
            k: 0,
            candidates: Vec::new(),
            pos: Vec::new(),
            phase: Phase::Fresh,
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Object count of the current leaf.
    pub fn level(&self) -> usize {
        self.k
    }

    pub fn candidates(&self) -> &[LocalState] {
        &self.candidates
    }

    /// Positions into [`Search::candidates`] of the current leaf.
    pub fn positions(&self) -> &[usize] {
        &self.pos
    }

    pub fn current(&self) -> Vec<&LocalState> {
        self.pos.iter().map(|&i| &self.candidates[i]).collect()
    }

    /// Moves to the next accepted leaf; `false` once the carrier is exhausted.
    pub fn advance(&mut self) -> bool {
        loop {
            match self.phase {
                Phase::Done => return false,
                Phase::Fresh => {
                    let pruned = self.strategy == Strategy::Pruned;
                    self.candidates =
                        self.layout.states(self.k, if pruned { self.filter.as_ref() } else { None });
                    self.pos.clear();
                    if self.k == 0 {
                        self.phase = Phase::Exhausted;
                        return true;
                    }
                    if !self.candidates.is_empty() && self.seek(true) {
                        self.phase = Phase::InLevel;
                        return true;
                    }
                    self.phase = Phase::Exhausted;
                }
                Phase::InLevel => {
                    if self.seek(false) {
                        return true;
                    }
                    self.phase = Phase::Exhausted;
                }
                Phase::Exhausted => {
                    if self.k >= self.max_objects {
                        self.phase = Phase::Done;
                        self.candidates.clear();
                        self.pos.clear();
                    } else {
                        self.k += 1;
                        self.phase = Phase::Fresh;
                    }
                }
            }
        }
    }

    /// `descend`: extend the current (accepted) prefix; otherwise bump the
    /// deepest position, backtracking as needed.
    fn seek(&mut self, mut descend: bool) -> bool {
        loop {
            if descend {
                if self.pos.len() == self.k {
                    return true;
                }
                self.pos.push(0);
            } else {
                loop {
                    let Some(last) = self.pos.last_mut() else { return false };
                    *last += 1;
                    if *last < self.candidates.len() {
                        break;
                    }
                    self.pos.pop();
                }
            }
            descend = self.prefix_ok();
        }
    }

    fn prefix_ok(&self) -> bool {
        let Some(filter) = &self.filter else { return true };
        let depth = self.pos.len();
        match self.strategy {
            Strategy::Pruned => filter.typing_ok(&self.current(), depth),
            Strategy::Naive => depth < self.k || filter.satisfied_by(&self.current()),
        }
    }
}
