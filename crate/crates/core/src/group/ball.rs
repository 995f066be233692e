use std::collections::HashMap;
use std::ops::Range;

use super::{Group, GroupElement};
use crate::error::{Error, Result};

/// Default upper bound on the number of elements in an enumerated ball.
pub const DEFAULT_BALL_CAP: usize = 5_000_000;

/// The closed Cayley ball `B_r = {g : |g|_S <= r}`.
///
/// Elements are stored by BFS level and, within a level, by normal form.
/// Since `B_r` is then a prefix of `B_{r+1}`, index `i` refers to the same
/// element in every ball that contains it.
#[derive(Clone, Debug)]
pub struct Ball {
    group: Group,
    radius: usize,
    elements: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    offsets: Vec<usize>,
}

impl Ball {
    pub(super) fn enumerate(group: &Group, radius: usize, cap: usize) -> Result<Ball> {
        if let Some(counts) = group.sphere_counts(radius) {
            let mut total: u128 = 0;
            for (r, c) in counts?.into_iter().enumerate() {
                total += c;
                if total > cap as u128 {
                    return Err(Error::BallTooLarge { radius: r, size: total, cap });
                }
            }
        }

        let id = group.identity();
        let mut elements = vec![id.clone()];
        let mut index = HashMap::new();
        index.insert(id, 0);
        let mut offsets = vec![0, 1];
        for r in 1..=radius {
            let prev = offsets[r - 1]..offsets[r];
            let mut level = Vec::new();
            for i in prev {
                for s in group.generators() {
                    let p = group.mul(&elements[i], s);
                    if !index.contains_key(&p) {
                        index.insert(p.clone(), usize::MAX);
                        level.push(p);
                    }
                }
                if index.len() > cap {
                    return Err(Error::BallTooLarge { radius: r, size: index.len() as u128, cap });
                }
            }
            level.sort_unstable();
            for g in level {
                *index.get_mut(&g).expect("just inserted") = elements.len();
                elements.push(g);
            }
            offsets.push(elements.len());
        }
        Ok(Ball { group: group.clone(), radius, elements, index, offsets })
    }

    /// Rebuilds a ball from its stored parts, e.g. when loading a cache.
    /// The element order and sphere sizes are validated against the group.
    pub fn from_parts(group: &Group, radius: usize, elements: Vec<GroupElement>, sphere_sizes: &[usize]) -> Result<Ball> {
        let bad = |m: String| Error::InvalidParameter(format!("inconsistent ball data: {m}"));
        if sphere_sizes.len() != radius + 1 {
            return Err(bad(format!("{} sphere sizes for radius {radius}", sphere_sizes.len())));
        }
        let mut offsets = vec![0];
        for s in sphere_sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        if *offsets.last().unwrap() != elements.len() {
            return Err(bad("sphere sizes do not sum to the element count".into()));
        }
        if elements.first().map(|g| group.is_identity(g)) != Some(true) {
            return Err(bad("first element is not the identity".into()));
        }
        let mut index = HashMap::with_capacity(elements.len());
        for (r, w) in offsets.windows(2).enumerate() {
            let sphere = &elements[w[0]..w[1]];
            if !sphere.windows(2).all(|p| p[0] < p[1]) {
                return Err(bad(format!("sphere {r} is not sorted")));
            }
            for (k, g) in sphere.iter().enumerate() {
                group.check(g)?;
                if index.insert(g.clone(), w[0] + k).is_some() {
                    return Err(bad(format!("duplicate element {g}")));
                }
            }
        }
        Ok(Ball { group: group.clone(), radius, elements, index, offsets })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    /// Index range of the sphere `S_r`; empty beyond the radius.
    pub fn sphere_range(&self, r: usize) -> Range<usize> {
        if r > self.radius {
            return self.len()..self.len();
        }
        self.offsets[r]..self.offsets[r + 1]
    }

    pub fn sphere(&self, r: usize) -> &[GroupElement] {
        &self.elements[self.sphere_range(r)]
    }

    /// Number of elements of `B_r`, i.e. the length of its index prefix.
    pub fn prefix_len(&self, r: usize) -> usize {
        self.offsets[r.min(self.radius) + 1]
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Word length of the element at index `i`.
    pub fn level(&self, i: usize) -> usize {
        self.offsets.partition_point(|&o| o <= i) - 1
    }

    /// Word length of `g` if it lies in the ball.
    pub fn word_length(&self, g: &GroupElement) -> Option<usize> {
        self.index_of(g).map(|i| self.level(i))
    }

    /// The sub-ball `B_r` for `r <= radius`.
    pub fn truncate(&self, r: usize) -> Ball {
        let r = r.min(self.radius);
        let n = self.prefix_len(r);
        let elements = self.elements[..n].to_vec();
        let index = elements.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        Ball {
            group: self.group.clone(),
            radius: r,
            elements,
            index,
            offsets: self.offsets[..r + 2].to_vec(),
        }
    }
}
