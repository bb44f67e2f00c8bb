//! kD-tree over scene primitives.
//!
//! The split axis cycles with depth (X, Y, Z, X, ...) and the split value is
//! the median primitive centroid along that axis. Primitives straddling a
//! split plane are referenced from both children.

use super::geometry::{Aabb, Ray};
use super::primitive::{Intersection, Primitive};
use crate::error::{Result, VlsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KdTreeConfig {
    pub max_leaf_size: usize,
    pub max_depth: usize,
}

impl Default for KdTreeConfig {
    fn default() -> Self {
        KdTreeConfig {
            max_leaf_size: 32,
            max_depth: 24,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Inner {
        axis: u8,
        split: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        start: u32,
        count: u32,
    },
}

/// Leaves visited by one traversal, for instrumentation.
#[derive(Debug, Default, Clone)]
pub struct TraversalStats {
    pub visited_leaves: Vec<usize>,
    pub primitive_tests: usize,
}

/// Immutable after construction; safe to query from many threads.
#[derive(Debug)]
pub struct KdTree {
    primitives: Vec<Primitive>,
    nodes: Vec<Node>,
    node_bounds: Vec<Aabb>,
    node_depth: Vec<u16>,
    items: Vec<u32>,
    bounds: Aabb,
}

/// Consecutive no-progress splits after which a node becomes a leaf.
const MAX_STALLS: u8 = 3;

impl KdTree {
    pub fn build(primitives: Vec<Primitive>, config: KdTreeConfig) -> Result<KdTree> {
        if primitives.is_empty() {
            return Err(VlsError::Config(
                "cannot build a kD-tree without primitives".into(),
            ));
        }
        let prim_bounds: Vec<Aabb> = primitives.iter().map(Primitive::bounds).collect();
        let centroids: Vec<[f64; 3]> = primitives
            .iter()
            .map(|p| {
                let c = p.centroid();
                [c.x, c.y, c.z]
            })
            .collect();
        let mut bounds = Aabb::empty();
        for b in &prim_bounds {
            bounds.grow(b);
        }
        let mut tree = KdTree {
            primitives,
            nodes: Vec::new(),
            node_bounds: Vec::new(),
            node_depth: Vec::new(),
            items: Vec::new(),
            bounds,
        };
        let all: Vec<u32> = (0..tree.primitives.len() as u32).collect();
        let mut builder = Builder {
            config,
            prim_bounds: &prim_bounds,
            centroids: &centroids,
            tree: &mut tree,
        };
        builder.build(all, bounds, 0, 0);
        Ok(tree)
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn primitive(&self, index: usize) -> &Primitive {
        &self.primitives[index]
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_bounds(&self, node: usize) -> &Aabb {
        &self.node_bounds[node]
    }

    /// Primitive indices stored in every leaf, with the leaf's node index.
    pub fn leaves(&self) -> impl Iterator<Item = (usize, &[u32])> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match n {
            Node::Leaf { start, count } => {
                Some((i, &self.items[*start as usize..(*start + *count) as usize]))
            }
            Node::Inner { .. } => None,
        })
    }

    /// `(depth, axis)` of every inner node.
    pub fn split_axes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes
            .iter()
            .zip(&self.node_depth)
            .filter_map(|(n, d)| match n {
                Node::Inner { axis, .. } => Some((*d as usize, *axis as usize)),
                Node::Leaf { .. } => None,
            })
    }

    pub fn max_depth(&self) -> usize {
        self.node_depth.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn nearest_hit(&self, ray: &Ray) -> Option<Intersection> {
        self.traverse(ray, |_| true, None)
    }

    /// Nearest hit among primitives accepted by `filter`.
    pub fn nearest_hit_where<F>(&self, ray: &Ray, filter: F) -> Option<Intersection>
    where
        F: Fn(&Primitive) -> bool,
    {
        self.traverse(ray, filter, None)
    }

    pub fn nearest_hit_traced(&self, ray: &Ray, stats: &mut TraversalStats) -> Option<Intersection> {
        self.traverse(ray, |_| true, Some(stats))
    }

    fn traverse<F>(
        &self,
        ray: &Ray,
        filter: F,
        mut stats: Option<&mut TraversalStats>,
    ) -> Option<Intersection>
    where
        F: Fn(&Primitive) -> bool,
    {
        let (t0, t1) = self.bounds.intersect(ray)?;
        let mut best: Option<Intersection> = None;
        let mut stack: Vec<(u32, f64, f64)> = Vec::with_capacity(64);
        stack.push((0, t0, t1));
        while let Some((node, tmin, tmax)) = stack.pop() {
            if let Some(b) = &best {
                if b.t_enter < tmin {
                    continue;
                }
            }
            match self.nodes[node as usize] {
                Node::Leaf { start, count } => {
                    if let Some(s) = stats.as_deref_mut() {
                        s.visited_leaves.push(node as usize);
                        s.primitive_tests += count as usize;
                    }
                    for &item in &self.items[start as usize..(start + count) as usize] {
                        let prim = &self.primitives[item as usize];
                        if !filter(prim) {
                            continue;
                        }
                        if let Some(hit) = prim.intersect(ray, item as usize) {
                            let better = match &best {
                                None => true,
                                Some(b) => {
                                    hit.t_enter < b.t_enter
                                        || (hit.t_enter == b.t_enter && hit.primitive < b.primitive)
                                }
                            };
                            if better {
                                best = Some(hit);
                            }
                        }
                    }
                }
                Node::Inner {
                    axis,
                    split,
                    left,
                    right,
                } => {
                    let a = axis as usize;
                    let o = ray.origin[a];
                    let d = ray.direction[a];
                    let origin_left = o < split || (o == split && d <= 0.0);
                    let (near, far) = if origin_left {
                        (left, right)
                    } else {
                        (right, left)
                    };
                    if d == 0.0 {
                        stack.push((near, tmin, tmax));
                        continue;
                    }
                    let t_split = (split - o) / d;
                    if t_split < 0.0 || t_split > tmax {
                        stack.push((near, tmin, tmax));
                    } else if t_split < tmin {
                        stack.push((far, tmin, tmax));
                    } else {
                        stack.push((far, t_split, tmax));
                        stack.push((near, tmin, t_split));
                    }
                }
            }
        }
        best
    }
}

struct Builder<'a> {
    config: KdTreeConfig,
    prim_bounds: &'a [Aabb],
    centroids: &'a [[f64; 3]],
    tree: &'a mut KdTree,
}

impl Builder<'_> {
    fn push(&mut self, node: Node, bounds: Aabb, depth: usize) -> u32 {
        self.tree.nodes.push(node);
        self.tree.node_bounds.push(bounds);
        self.tree.node_depth.push(depth as u16);
        (self.tree.nodes.len() - 1) as u32
    }

    fn leaf(&mut self, items: &[u32], bounds: Aabb, depth: usize) -> u32 {
        let start = self.tree.items.len() as u32;
        self.tree.items.extend_from_slice(items);
        self.push(
            Node::Leaf {
                start,
                count: items.len() as u32,
            },
            bounds,
            depth,
        )
    }

    fn build(&mut self, mut items: Vec<u32>, bounds: Aabb, depth: usize, stalls: u8) -> u32 {
        if items.len() <= self.config.max_leaf_size
            || depth >= self.config.max_depth
            || stalls >= MAX_STALLS
        {
            return self.leaf(&items, bounds, depth);
        }
        let axis = depth % 3;
        let mid = items.len() / 2;
        let centroids = self.centroids;
        items.select_nth_unstable_by(mid, |a, b| {
            centroids[*a as usize][axis].total_cmp(&centroids[*b as usize][axis])
        });
        let mut split = centroids[items[mid] as usize][axis];
        split = split.clamp(bounds.min[axis], bounds.max[axis]);

        let mut left_items = Vec::with_capacity(mid + 1);
        let mut right_items = Vec::with_capacity(items.len() - mid + 1);
        for &i in &items {
            let b = &self.prim_bounds[i as usize];
            if b.min[axis] <= split {
                left_items.push(i);
            }
            if b.max[axis] >= split {
                right_items.push(i);
            }
        }
        let stalled = left_items.len() == items.len() && right_items.len() == items.len();
        let next_stalls = if stalled { stalls + 1 } else { 0 };
        if stalled {
            // Keep the axis rule but push everything to one side.
            split = bounds.max[axis];
            left_items = items;
            right_items = Vec::new();
        }

        let mut left_bounds = bounds;
        left_bounds.max[axis] = split;
        let mut right_bounds = bounds;
        right_bounds.min[axis] = split;

        let index = self.push(
            Node::Inner {
                axis: axis as u8,
                split,
                left: 0,
                right: 0,
            },
            bounds,
            depth,
        );
        let left = self.build(left_items, left_bounds, depth + 1, next_stalls);
        let right = self.build(right_items, right_bounds, depth + 1, next_stalls);
        self.tree.nodes[index as usize] = Node::Inner {
            axis: axis as u8,
            split,
            left,
            right,
        };
        index
    }
}
