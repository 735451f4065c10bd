//! Grounded STRIPS task: dense fact indices and ground actions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::hash::{fnv1a64, CanonicalWriter};

/// Bitset over fact indices `0..F`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FactSet {
    words: Vec<u64>,
}

impl FactSet {
    pub fn empty(universe: usize) -> Self {
        FactSet {
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn from_indices(universe: usize, facts: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for f in facts {
            s.insert(f);
        }
        s
    }

    pub fn contains(&self, f: usize) -> bool {
        self.words
            .get(f / 64)
            .is_some_and(|w| w & (1u64 << (f % 64)) != 0)
    }

    pub fn insert(&mut self, f: usize) {
        self.words[f / 64] |= 1u64 << (f % 64);
    }

    pub fn remove(&mut self, f: usize) {
        self.words[f / 64] &= !(1u64 << (f % 64));
    }

    pub fn contains_all(&self, facts: &[usize]) -> bool {
        facts.iter().all(|&f| self.contains(f))
    }

    pub fn contains_none(&self, facts: &[usize]) -> bool {
        facts.iter().all(|&f| !self.contains(f))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter(move |b| w & (1u64 << b) != 0).map(move |b| wi * 64 + b)
        })
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Stable hash of the set: FNV-1a over the little-endian words.
    pub fn stable_hash(&self) -> u64 {
        let mut w = CanonicalWriter::new();
        for &word in &self.words {
            w.u64(word);
        }
        fnv1a64(&w.finish())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundAction {
    /// `schema arg1 arg2 ...`
    pub name: String,
    pub schema: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<usize>,
    pub pre_neg: Vec<usize>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
    pub cost: u32,
}

impl GroundAction {
    pub fn applicable(&self, state: &FactSet) -> bool {
        state.contains_all(&self.pre_pos) && state.contains_none(&self.pre_neg)
    }

    /// Delete effects first, then add effects.
    pub fn apply(&self, state: &FactSet) -> FactSet {
        let mut next = state.clone();
        for &f in &self.del {
            next.remove(f);
        }
        for &f in &self.add {
            next.insert(f);
        }
        next
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundedTask {
    /// Fact names, e.g. `(at-matcher loc0)`; index = fact id.
    pub facts: Vec<String>,
    pub init: FactSet,
    pub goal: Vec<usize>,
    pub actions: Vec<GroundAction>,
}

impl GroundedTask {
    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn fact_index(&self, name: &str) -> Option<usize> {
        self.facts.iter().position(|f| f == name)
    }

    pub fn is_goal(&self, state: &FactSet) -> bool {
        state.contains_all(&self.goal)
    }

    pub fn applicable(&self, state: &FactSet) -> impl Iterator<Item = (usize, &GroundAction)> + '_ {
        let state = state.clone();
        self.actions
            .iter()
            .enumerate()
            .filter(move |(_, a)| a.applicable(&state))
    }

    pub fn fact_names(&self, state: &FactSet) -> Vec<&str> {
        state.iter().map(|f| self.facts[f].as_str()).collect()
    }

    /// Canonical bytes: facts, init, goal, actions in index order. Used to
    /// check that grounding is deterministic.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut w = CanonicalWriter::new();
        w.bytes(b"DTGT");
        w.u32(self.facts.len() as u32);
        for f in &self.facts {
            w.str(f);
        }
        let ids = |w: &mut CanonicalWriter, v: &[usize]| {
            w.u32(v.len() as u32);
            for &i in v {
                w.u32(i as u32);
            }
        };
        let init: Vec<usize> = self.init.iter().collect();
        ids(&mut w, &init);
        ids(&mut w, &self.goal);
        w.u32(self.actions.len() as u32);
        for a in &self.actions {
            w.str(&a.name);
            ids(&mut w, &a.pre_pos);
            ids(&mut w, &a.pre_neg);
            ids(&mut w, &a.add);
            ids(&mut w, &a.del);
            w.u32(a.cost);
        }
        w.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn factset_matches_btreeset(universe in 1usize..200, ops in proptest::collection::vec((any::<bool>(), 0usize..200), 0..100)) {
            let mut fs = FactSet::empty(universe);
            let mut model = alloc::collections::BTreeSet::new();
            for (ins, f) in ops {
                let f = f % universe;
                if ins { fs.insert(f); model.insert(f); } else { fs.remove(f); model.remove(&f); }
            }
            let got: Vec<usize> = fs.iter().collect();
            let want: Vec<usize> = model.iter().copied().collect();
            prop_assert_eq!(got, want);
            prop_assert_eq!(fs.len(), model.len());
        }
    }
}
