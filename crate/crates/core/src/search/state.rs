//! Packed fact-set representation used during search.

use crate::ground::{FactId, GroundAction};

/// Fixed-width bitset over the task's fact universe.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State {
    words: Box<[u64]>,
}

impl State {
    pub fn empty(fact_count: usize) -> State {
        State {
            words: vec![0u64; fact_count.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn from_facts(fact_count: usize, facts: &[FactId]) -> State {
        let mut s = State::empty(fact_count);
        for &f in facts {
            s.insert(f);
        }
        s
    }

    #[inline]
    pub fn contains(&self, fact: FactId) -> bool {
        self.words[(fact / 64) as usize] & (1u64 << (fact % 64)) != 0
    }

    #[inline]
    pub fn insert(&mut self, fact: FactId) {
        self.words[(fact / 64) as usize] |= 1u64 << (fact % 64);
    }

    #[inline]
    pub fn remove(&mut self, fact: FactId) {
        self.words[(fact / 64) as usize] &= !(1u64 << (fact % 64));
    }

    pub fn contains_all(&self, facts: &[FactId]) -> bool {
        facts.iter().all(|&f| self.contains(f))
    }

    /// Successor state after applying an action (delete, then add).
    pub fn apply(&self, action: &GroundAction) -> State {
        let mut next = self.clone();
        for &f in &action.del {
            next.remove(f);
        }
        for &f in &action.add {
            next.insert(f);
        }
        next
    }

    pub fn iter(&self) -> impl Iterator<Item = FactId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64)
                .filter(move |b| w & (1u64 << b) != 0)
                .map(move |b| (wi * 64 + b) as FactId)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Num;
    use crate::pddl::name;

    #[test]
    fn apply_deletes_then_adds() {
        let action = GroundAction {
            id: 0,
            schema: name("a"),
            args: vec![],
            precondition: vec![],
            add: vec![1, 2],
            del: vec![0],
            cost: Num::ZERO,
            duration: Num::ZERO,
            sensing: false,
        };
        let s = State::from_facts(70, &[0, 69]);
        let next = s.apply(&action);
        assert!(!next.contains(0));
        assert!(next.contains(1) && next.contains(2) && next.contains(69));
        assert_eq!(next.iter().collect::<Vec<_>>(), vec![1, 2, 69]);
    }
}
