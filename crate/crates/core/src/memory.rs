//! Fixed-capacity, class-balanced replay buffer.
//!
//! Every class gets a quota of `capacity / N` exemplars, with the remainder
//! handed one each to the earliest-seen classes. When new classes arrive the
//! old classes are cut back to a prefix of their priority list, so the
//! lowest-priority exemplars are always evicted first.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ClassDataset, ClassId, Embedding, ExemplarId};
use crate::scalar::Scalar;
use crate::selection::PriorityList;

/// Per-class quotas, in the order of `class_ids`.
pub fn quotas(capacity: usize, class_ids: &[ClassId]) -> Result<Vec<(ClassId, usize)>> {
    if class_ids.is_empty() {
        return Err(Error::invalid("quotas need at least one class"));
    }
    let n = class_ids.len();
    let base = capacity / n;
    let extra = capacity % n;
    Ok(class_ids
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, base + usize::from(i < extra)))
        .collect())
}

/// A priority list together with the embedding of each listed exemplar.
#[derive(Debug, Clone, PartialEq)]
pub struct PrioritizedClass<S> {
    list: PriorityList,
    embeddings: Vec<Embedding<S>>,
}

impl<S: Scalar> PrioritizedClass<S> {
    pub fn new(list: PriorityList, embeddings: Vec<Embedding<S>>) -> Result<Self> {
        if list.len() != embeddings.len() {
            return Err(Error::invalid(format!(
                "class {}: {} ids but {} embeddings",
                list.class_id,
                list.len(),
                embeddings.len()
            )));
        }
        Ok(PrioritizedClass { list, embeddings })
    }

    /// Looks up the embeddings of `list` in `data`.
    pub fn from_dataset(list: PriorityList, data: &ClassDataset<S>) -> Result<Self> {
        let embeddings = list
            .ordered_ids
            .iter()
            .map(|&id| data.embedding(id).cloned().ok_or(Error::NotFound(id)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(list, embeddings)
    }

    pub fn class_id(&self) -> ClassId {
        self.list.class_id
    }

    pub fn list(&self) -> &PriorityList {
        &self.list
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ClassSlot<S> {
    entries: PrioritizedClass<S>,
    /// Length of the stored prefix of `entries`.
    stored: usize,
    quota: usize,
    provisional: bool,
}

impl<S: Scalar> ClassSlot<S> {
    fn class_id(&self) -> ClassId {
        self.entries.class_id()
    }

    fn apply_quota(&mut self, quota: usize) {
        self.quota = quota;
        self.stored = self.stored.min(quota);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBuffer<S> {
    capacity: usize,
    slots: Vec<ClassSlot<S>>,
}

/// One stored exemplar, as enumerated by [`MemoryBuffer::replay_view`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayItem<'a, S> {
    pub class_id: ClassId,
    pub exemplar_id: ExemplarId,
    pub embedding: &'a Embedding<S>,
}

/// A class that received fewer exemplars than its quota.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Underfill {
    pub class_id: ClassId,
    pub stored: usize,
    pub quota: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome<S> {
    pub buffer: MemoryBuffer<S>,
    pub underfilled: Vec<Underfill>,
}

impl<S: Scalar> MemoryBuffer<S> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("buffer capacity must be positive"));
        }
        Ok(MemoryBuffer { capacity, slots: Vec::new() })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn num_classes(&self) -> usize {
        self.slots.len()
    }

    /// Class ids in first-seen order.
    pub fn class_ids(&self) -> Vec<ClassId> {
        self.slots.iter().map(|s| s.class_id()).collect()
    }

    pub fn len(&self) -> usize {
        self.slots.iter().map(|s| s.stored).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slot(&self, class_id: ClassId) -> Option<&ClassSlot<S>> {
        self.slots.iter().find(|s| s.class_id() == class_id)
    }

    pub fn stored_ids(&self, class_id: ClassId) -> Option<&[ExemplarId]> {
        self.slot(class_id).map(|s| s.entries.list.prefix(s.stored))
    }

    pub fn stored_embeddings(&self, class_id: ClassId) -> Option<&[Embedding<S>]> {
        self.slot(class_id).map(|s| &s.entries.embeddings[..s.stored])
    }

    /// The complete priority list the class was inserted with.
    pub fn priority_list(&self, class_id: ClassId) -> Option<&PriorityList> {
        self.slot(class_id).map(|s| &s.entries.list)
    }

    pub fn quota(&self, class_id: ClassId) -> Option<usize> {
        self.slot(class_id).map(|s| s.quota)
    }

    pub fn is_provisional(&self, class_id: ClassId) -> Option<bool> {
        self.slot(class_id).map(|s| s.provisional)
    }

    /// `(class id, stored count)` in first-seen order.
    pub fn class_counts(&self) -> Vec<(ClassId, usize)> {
        self.slots.iter().map(|s| (s.class_id(), s.stored)).collect()
    }

    /// Recomputes quotas over all slots and cuts every class back to its quota.
    fn rebalance(&mut self) {
        let ids = self.class_ids();
        if ids.is_empty() {
            return;
        }
        let q = quotas(self.capacity, &ids).expect("non-empty class list");
        for (slot, (_, quota)) in self.slots.iter_mut().zip(q) {
            slot.apply_quota(quota);
        }
    }

    /// Shrinks old classes to the new quotas and inserts each new class's
    /// priority-list prefix. Replaces provisional classes with the same id.
    pub fn update_after_task(&self, new_classes: Vec<PrioritizedClass<S>>) -> Result<UpdateOutcome<S>> {
        let mut seen = BTreeSet::new();
        for c in &new_classes {
            let id = c.class_id();
            if !seen.insert(id) {
                return Err(Error::invalid(format!("class {id} appears twice in one update")));
            }
            if self.slot(id).is_some_and(|s| !s.provisional) {
                return Err(Error::invalid(format!("class {id} is already in the buffer")));
            }
        }

        let mut next = self.clone();
        let mut inserted = Vec::with_capacity(new_classes.len());
        for entries in new_classes {
            let id = entries.class_id();
            let stored = entries.list.len();
            let slot = ClassSlot { entries, stored, quota: 0, provisional: false };
            match next.slots.iter_mut().find(|s| s.class_id() == id) {
                Some(existing) => *existing = slot,
                None => next.slots.push(slot),
            }
            inserted.push(id);
        }
        next.rebalance();

        let underfilled = next
            .slots
            .iter()
            .filter(|s| inserted.contains(&s.class_id()) && s.stored < s.quota)
            .map(|s| Underfill { class_id: s.class_id(), stored: s.stored, quota: s.quota })
            .collect();
        Ok(UpdateOutcome { buffer: next, underfilled })
    }

    /// Reserves a class slot with a placeholder list before the class's
    /// final selection is known. A later [`update_after_task`] for the same
    /// class replaces it.
    ///
    /// [`update_after_task`]: MemoryBuffer::update_after_task
    pub fn provisional_fill(&self, placeholder: PrioritizedClass<S>) -> Result<Self> {
        let id = placeholder.class_id();
        if self.slot(id).is_some_and(|s| !s.provisional) {
            return Err(Error::InvalidState {
                class_id: id,
                reason: "is already finalized".into(),
            });
        }
        let mut next = self.clone();
        let stored = placeholder.list.len();
        let slot = ClassSlot { entries: placeholder, stored, quota: 0, provisional: true };
        match next.slots.iter_mut().find(|s| s.class_id() == id) {
            Some(existing) => *existing = slot,
            None => next.slots.push(slot),
        }
        next.rebalance();
        Ok(next)
    }

    /// Stored exemplars in (first-seen class, priority) order.
    pub fn replay_view(&self) -> Vec<ReplayItem<'_, S>> {
        self.slots
            .iter()
            .flat_map(|s| {
                let class_id = s.class_id();
                s.entries
                    .list
                    .prefix(s.stored)
                    .iter()
                    .zip(&s.entries.embeddings)
                    .map(move |(&exemplar_id, embedding)| ReplayItem { class_id, exemplar_id, embedding })
            })
            .collect()
    }

    /// Checks the capacity, balance and prefix laws.
    pub fn check_invariants(&self) -> Result<()> {
        let total = self.len();
        if total > self.capacity {
            return Err(Error::invalid(format!(
                "buffer holds {total} exemplars, capacity {}",
                self.capacity
            )));
        }
        if self.slots.is_empty() {
            return Ok(());
        }
        let expected = quotas(self.capacity, &self.class_ids())?;
        for (slot, (_, quota)) in self.slots.iter().zip(expected) {
            if slot.quota != quota {
                return Err(Error::invalid(format!(
                    "class {} has quota {}, expected {quota}",
                    slot.class_id(),
                    slot.quota
                )));
            }
            if slot.stored != quota.min(slot.entries.list.len()) {
                return Err(Error::invalid(format!(
                    "class {} stores {} of quota {quota}",
                    slot.class_id(),
                    slot.stored
                )));
            }
        }
        let full: Vec<usize> = self
            .slots
            .iter()
            .filter(|s| s.entries.list.len() >= s.quota)
            .map(|s| s.stored)
            .collect();
        if let (Some(hi), Some(lo)) = (full.iter().max(), full.iter().min()) {
            if hi - lo > 1 {
                return Err(Error::invalid(format!("class counts range over {lo}..={hi}")));
            }
        }
        if self.slots.iter().all(|s| s.entries.list.len() >= s.quota) && total != self.capacity {
            return Err(Error::invalid(format!(
                "buffer holds {total} of {} with sufficient data",
                self.capacity
            )));
        }
        Ok(())
    }

    pub fn to_snapshot(&self, include_embeddings: bool) -> BufferSnapshot {
        BufferSnapshot {
            capacity: self.capacity,
            classes: self
                .slots
                .iter()
                .map(|s| ClassSnapshot {
                    class_id: s.class_id(),
                    quota: s.quota,
                    provisional: s.provisional,
                    exemplar_ids: s.entries.list.prefix(s.stored).to_vec(),
                    priority_list: s.entries.list.ordered_ids.clone(),
                    embeddings: include_embeddings.then(|| {
                        s.entries
                            .embeddings
                            .iter()
                            .map(|e| e.as_slice().iter().map(|v| v.to_f64_lossy()).collect())
                            .collect()
                    }),
                })
                .collect(),
        }
    }

    /// Rebuilds a buffer from a snapshot that carries embeddings.
    pub fn from_snapshot(snapshot: &BufferSnapshot) -> Result<Self> {
        let mut buffer = MemoryBuffer::new(snapshot.capacity)?;
        for c in &snapshot.classes {
            let rows = c.embeddings.as_ref().ok_or_else(|| {
                Error::invalid(format!("snapshot class {} has no embeddings", c.class_id))
            })?;
            let embeddings = rows
                .iter()
                .map(|r| Embedding::new(r.iter().map(|&v| S::from_f64_lossy(v)).collect()))
                .collect::<Result<Vec<_>>>()?;
            let list = PriorityList::new(c.class_id, c.priority_list.clone())?;
            if list.prefix(c.exemplar_ids.len()) != c.exemplar_ids.as_slice() {
                return Err(Error::invalid(format!(
                    "snapshot class {}: stored ids are not a prefix of the priority list",
                    c.class_id
                )));
            }
            if buffer.slot(c.class_id).is_some() {
                return Err(Error::invalid(format!("snapshot repeats class {}", c.class_id)));
            }
            buffer.slots.push(ClassSlot {
                entries: PrioritizedClass::new(list, embeddings)?,
                stored: c.exemplar_ids.len(),
                quota: c.quota,
                provisional: c.provisional,
            });
        }
        buffer.check_invariants()?;
        Ok(buffer)
    }
}

/// JSON form of a [`MemoryBuffer`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferSnapshot {
    pub capacity: usize,
    pub classes: Vec<ClassSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSnapshot {
    pub class_id: ClassId,
    pub quota: usize,
    #[serde(default)]
    pub provisional: bool,
    /// Stored exemplars, highest priority first.
    pub exemplar_ids: Vec<ExemplarId>,
    pub priority_list: Vec<ExemplarId>,
    /// One row per entry of `priority_list`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<Vec<Vec<f64>>>,
}
