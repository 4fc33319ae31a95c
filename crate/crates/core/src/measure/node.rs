use crate::geom::Point;

/// Sentinel tag for nodes that live past a restriction frontier.
pub const TAG_NONE: u64 = u64::MAX;

/// One cell of a measure's natural subdivision tree: an axis-aligned box
/// carrying its exact mass. Children of a node always sum to the node's mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub lo: Point,
    pub hi: Point,
    pub mass: f64,
    pub depth: u32,
    /// Kind-internal bookkeeping (arena index for restricted measures).
    pub tag: u64,
}

impl Node {
    pub fn root(lo: Point, hi: Point) -> Self {
        Node {
            lo,
            hi,
            mass: 1.0,
            depth: 0,
            tag: TAG_NONE,
        }
    }

    pub fn max_side(&self, dim: usize) -> f64 {
        (0..dim)
            .map(|i| self.hi[i] - self.lo[i])
            .fold(0.0_f64, f64::max)
    }

    pub fn center(&self, dim: usize) -> Point {
        let mut c = [0.0; 3];
        for (i, v) in c.iter_mut().enumerate().take(dim) {
            *v = 0.5 * (self.lo[i] + self.hi[i]);
        }
        c
    }

    pub fn contains_point(&self, p: &Point, dim: usize) -> bool {
        (0..dim).all(|i| self.lo[i] <= p[i] && p[i] <= self.hi[i])
    }

    pub fn contains_box(&self, lo: &Point, hi: &Point, dim: usize) -> bool {
        let eps = 1e-12;
        (0..dim).all(|i| self.lo[i] - eps <= lo[i] && hi[i] <= self.hi[i] + eps)
    }
}
