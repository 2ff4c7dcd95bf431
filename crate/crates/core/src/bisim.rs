//! Strong bisimilarity by partition refinement.
//!
//! Each round gives every state the signature `T F (block)`: its branching
//! value with every successor replaced by the index of its current block.
//! For subdistributions, mapping sums weights, so two states get the same
//! signature exactly when they send equal mass into every block through
//! every shape. Refinement stops when the number of blocks stops growing.

use std::collections::BTreeMap;

use crate::functors::FStruct;
use crate::monads::{MonadTag, TValue};
use crate::system::{StateId, System};
use crate::{Error, Result};

/// Block index per state. Blocks are numbered by first occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: usize,
}

impl Partition {
    pub fn block(&self, x: StateId) -> usize {
        self.block_of[x.0]
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn same_block(&self, x: StateId, y: StateId) -> bool {
        self.block_of[x.0] == self.block_of[y.0]
    }

    /// States grouped by block.
    pub fn blocks(&self) -> Vec<Vec<StateId>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (i, b) in self.block_of.iter().enumerate() {
            out[*b].push(StateId(i));
        }
        out
    }

    fn from_keys<K: Ord>(keys: Vec<K>) -> Self {
        let mut index: BTreeMap<K, usize> = BTreeMap::new();
        let mut block_of = Vec::with_capacity(keys.len());
        for k in keys {
            let next = index.len();
            block_of.push(*index.entry(k).or_insert(next));
        }
        Partition {
            blocks: index.len(),
            block_of,
        }
    }
}

fn signature(sys: &System, p: &Partition, x: StateId) -> (usize, TValue<FStruct<usize>>) {
    let sig = sys
        .transition(x)
        .map(|s| s.fmap(&mut |y: &StateId| p.block(*y)));
    (p.block(x), sig)
}

/// The coarsest bisimulation, as a partition of the states.
pub fn bisimulation_partition(sys: &System) -> Result<Partition> {
    if sys.tag() == MonadTag::Lift {
        return Err(Error::Unsupported(
            "bisimilarity is defined for powerset and subdist systems".into(),
        ));
    }
    let mut p = Partition::from_keys(vec![(); sys.len()]);
    loop {
        let keys: Vec<_> = sys.ids().map(|x| signature(sys, &p, x)).collect();
        let next = Partition::from_keys(keys);
        if next.blocks == p.blocks {
            return Ok(next);
        }
        p = next;
    }
}

pub fn bisimilar(sys: &System, x: StateId, y: StateId) -> Result<bool> {
    for s in [x, y] {
        if s.0 >= sys.len() {
            return Err(Error::UnknownState(s.to_string()));
        }
    }
    Ok(bisimulation_partition(sys)?.same_block(x, y))
}
