//! Fixed-capacity neighbor pools kept sorted by `(dist, id)`.

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEntry {
    pub id: u32,
    /// Squared distance to the pool's owner.
    pub dist: f32,
    pub flag_new: bool,
    pub checked: bool,
}

impl NeighborEntry {
    pub fn new(id: u32, dist: f32, flag_new: bool) -> Self {
        Self {
            id,
            dist,
            flag_new,
            checked: false,
        }
    }

    #[inline]
    fn key_cmp(&self, dist: f32, id: u32) -> Ordering {
        self.dist.total_cmp(&dist).then(self.id.cmp(&id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborPool {
    entries: Vec<NeighborEntry>,
    capacity: usize,
}

impl NeighborPool {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            entries: Vec::with_capacity(capacity + 1),
            capacity,
        }
    }

    /// Builds a pool from arbitrary candidates, keeping the closest
    /// `capacity` distinct ids.
    pub fn from_candidates(
        capacity: usize,
        candidates: impl IntoIterator<Item = NeighborEntry>,
    ) -> Self {
        let mut entries: Vec<NeighborEntry> = candidates.into_iter().collect();
        entries.sort_unstable_by(|a, b| a.key_cmp(b.dist, b.id));
        entries.dedup_by_key(|e| e.id);
        entries.truncate(capacity);
        Self { entries, capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[NeighborEntry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [NeighborEntry] {
        &mut self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.id)
    }

    pub fn contains(&self, id: u32) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }

    /// Distance of the worst entry, or infinity while the pool has room.
    pub fn bound(&self) -> f32 {
        if self.entries.len() < self.capacity {
            f32::INFINITY
        } else {
            self.entries.last().map_or(f32::INFINITY, |e| e.dist)
        }
    }

    /// Offers a candidate. Returns `true` if it was inserted; `false` if the
    /// id is already present or the pool is full of closer entries.
    pub fn insert(&mut self, id: u32, dist: f32, flag_new: bool) -> bool {
        if self.capacity == 0 {
            return false;
        }
        if self.entries.len() == self.capacity {
            let worst = self.entries.last().unwrap();
            if worst.key_cmp(dist, id) != Ordering::Greater {
                return false;
            }
        }
        if self.contains(id) {
            return false;
        }
        let pos = self
            .entries
            .partition_point(|e| e.key_cmp(dist, id) == Ordering::Less);
        self.entries.insert(pos, NeighborEntry::new(id, dist, flag_new));
        self.entries.truncate(self.capacity);
        true
    }

    pub fn truncate(&mut self, len: usize) {
        self.entries.truncate(len);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn keeps_closest_sorted_distinct() {
        let mut p = NeighborPool::with_capacity(3);
        assert!(p.insert(5, 2.0, true));
        assert!(p.insert(1, 1.0, true));
        assert!(!p.insert(1, 1.0, false));
        assert!(p.insert(7, 3.0, true));
        assert!(!p.insert(9, 4.0, true));
        assert!(p.insert(2, 0.5, false));
        assert_eq!(p.ids().collect::<Vec<_>>(), vec![2, 1, 5]);
        assert!(!p.entries()[0].flag_new);
        assert_eq!(p.bound(), 2.0);
    }

    #[test]
    fn ties_break_by_id() {
        let mut p = NeighborPool::with_capacity(2);
        p.insert(9, 1.0, true);
        p.insert(3, 1.0, true);
        assert!(p.insert(4, 1.0, true));
        assert!(!p.insert(5, 1.0, true));
        assert_eq!(p.ids().collect::<Vec<_>>(), vec![3, 4]);
        assert!(NeighborPool::with_capacity(2).bound().is_infinite());
    }

    proptest! {
        #[test]
        fn matches_sorted_dedup(
            cap in 1usize..12,
            offers in prop::collection::vec((0u32..30, 0u32..50), 0..80),
        ) {
            let mut pool = NeighborPool::with_capacity(cap);
            // Distances are a function of the id so duplicates agree.
            for &(id, _) in &offers {
                pool.insert(id, (id * 7 % 13) as f32, true);
            }
            let mut expect: Vec<(u32, u32)> = offers.iter().map(|&(id, _)| (id * 7 % 13, id)).collect();
            expect.sort_unstable();
            expect.dedup();
            expect.truncate(cap);
            let got: Vec<(u32, u32)> = pool.entries().iter().map(|e| (e.dist as u32, e.id)).collect();
            prop_assert_eq!(got, expect);
        }
    }
}
