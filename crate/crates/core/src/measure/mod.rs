//! Finite-resolution representations of Radon probability measures on R^d
//! (d <= 3) with guaranteed-enclosure mass queries.
//!
//! Every measure is a tree of axis-aligned cells; the children of a cell
//! always carry exactly the parent's mass. Queries descend the tree against
//! a [`RegionClassifier`], booking interior cells on both sides of the
//! enclosure and straddling cells on the upper side only.

pub mod classify;
mod enclosure;
mod node;

pub use classify::{AllSpace, BallRegion, CellClass, ConeRegion, HalfSpace, RegionClassifier};
pub use node::{Node, TAG_NONE};

use crate::error::{MeasureError, Result};
use crate::geom::{self, Point, ORIGIN};
use crate::interval::MassInterval;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Default finest representable dyadic level.
pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// A homothetic contraction: same ratio on every axis plus an offset given
/// relative to the unit cell.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsMap {
    pub ratio: f64,
    pub offset: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IfsSpec {
    pub dim: usize,
    pub maps: Vec<IfsMap>,
    pub weights: Vec<f64>,
}

/// Per-level subdivision stencil of a grid measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub arity: u32,
    pub kind: RuleKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleKind {
    /// Equal mass to all children.
    Uniform,
    /// Mass only to children meeting the coordinate plane spanned by `axes`
    /// through the lower face, uniformly among them.
    Plane { axes: Vec<usize> },
    /// Mass 1/2 to the first and last child along every axis.
    Cantor,
}

impl Rule {
    /// Per-axis child weight for child index `i` of `arity` children.
    fn axis_weight(&self, axis: usize, i: u32) -> f64 {
        match &self.kind {
            RuleKind::Uniform => 1.0 / self.arity as f64,
            RuleKind::Plane { axes } => {
                if axes.contains(&axis) {
                    1.0 / self.arity as f64
                } else if i == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            RuleKind::Cantor => {
                if i == 0 || i + 1 == self.arity {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }

    pub fn generator_dimension(&self, dim: usize) -> f64 {
        let m = self.arity as f64;
        match &self.kind {
            RuleKind::Uniform => dim as f64,
            RuleKind::Plane { axes } => axes.len() as f64,
            RuleKind::Cantor => dim as f64 * 2.0_f64.ln() / m.ln(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Kind {
    LebesgueBall,
    PointMass,
    Plane { axes: Vec<usize> },
    Ifs(IfsSpec),
    Grid { levels: Arc<Vec<Rule>> },
    Product { a: Arc<Measure>, b: Arc<Measure> },
    Mixture { parts: Vec<(f64, Arc<Measure>)> },
    Affine(AffineView),
    Restricted(Arc<Restricted>),
}

/// nu(A) = base(shift + scale * A) / mass_div.
#[derive(Debug, Clone)]
pub(crate) struct AffineView {
    pub base: Arc<Measure>,
    pub scale: f64,
    pub shift: Point,
    pub mass_div: f64,
}

impl AffineView {
    fn to_base(&self, p: &Point, dim: usize) -> Point {
        let mut q = ORIGIN;
        for i in 0..dim {
            q[i] = self.shift[i] + self.scale * p[i];
        }
        q
    }
    #[allow(clippy::wrong_self_convention)] // inverse of to_base, both are coordinate maps
    fn from_base(&self, p: &Point, dim: usize) -> Point {
        let mut q = ORIGIN;
        for i in 0..dim {
            q[i] = (p[i] - self.shift[i]) / self.scale;
        }
        q
    }
}

#[derive(Debug)]
pub(crate) struct Restricted {
    pub base: Arc<Measure>,
    pub arena: Vec<RNode>,
    pub root_ids: Vec<usize>,
}

#[derive(Debug)]
pub(crate) struct RNode {
    pub node: Node,
    pub child_ids: Vec<usize>,
    /// Leaf of the materialized mask; descent continues into the base tree.
    pub frontier: bool,
}

/// A Radon probability measure at finite resolution.
#[derive(Debug, Clone)]
pub struct Measure {
    dim: usize,
    max_depth: u32,
    pub(crate) kind: Kind,
}

impl Measure {
    pub(crate) fn new(dim: usize, max_depth: u32, kind: Kind) -> Self {
        Measure {
            dim,
            max_depth,
            kind,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Scale below which mass queries report `DepthExceeded`.
    pub fn resolution_floor(&self) -> f64 {
        2.0_f64.powi(-(self.max_depth as i32))
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            Kind::LebesgueBall => "lebesgue_ball",
            Kind::PointMass => "point_mass",
            Kind::Plane { .. } => "plane",
            Kind::Ifs(_) => "ifs",
            Kind::Grid { .. } => "grid",
            Kind::Product { .. } => "product",
            Kind::Mixture { .. } => "mixture",
            Kind::Affine(_) => "view",
            Kind::Restricted(_) => "restricted",
        }
    }

    /// Top-level cells; masses sum to the total mass (1 for base measures).
    pub fn roots(&self) -> Vec<Node> {
        match &self.kind {
            Kind::LebesgueBall | Kind::PointMass | Kind::Plane { .. } => {
                let mut lo = ORIGIN;
                let mut hi = ORIGIN;
                for i in 0..self.dim {
                    lo[i] = -1.0;
                    hi[i] = 1.0;
                }
                vec![Node::root(lo, hi)]
            }
            Kind::Ifs(_) | Kind::Grid { .. } => {
                let mut hi = ORIGIN;
                hi[..self.dim].fill(1.0);
                vec![Node::root(ORIGIN, hi)]
            }
            Kind::Product { a, b } => {
                let ra = a.roots();
                let rb = b.roots();
                let mut out = Vec::new();
                for na in &ra {
                    for nb in &rb {
                        out.push(product_node(na, nb, a.dim, b.dim, na.mass * nb.mass));
                    }
                }
                out
            }
            Kind::Mixture { parts } => {
                let mut out = Vec::new();
                for (w, m) in parts {
                    for mut n in m.roots() {
                        n.mass *= w;
                        out.push(n);
                    }
                }
                out
            }
            Kind::Affine(v) => v
                .base
                .roots()
                .into_iter()
                .map(|mut n| {
                    let lo = v.from_base(&n.lo, self.dim);
                    let hi = v.from_base(&n.hi, self.dim);
                    n.lo = lo;
                    n.hi = hi;
                    n.mass /= v.mass_div;
                    n
                })
                .collect(),
            Kind::Restricted(r) => r
                .root_ids
                .iter()
                .map(|&i| r.arena[i].node)
                .collect(),
        }
    }

    /// Children of a cell. Masses always sum to the parent mass; cells with
    /// zero mass are omitted.
    pub fn children_of(&self, node: &Node) -> Vec<Node> {
        match &self.kind {
            Kind::LebesgueBall => self.lebesgue_children(node),
            Kind::PointMass => {
                let mut hi = ORIGIN;
                for (i, v) in hi.iter_mut().enumerate().take(self.dim) {
                    *v = 0.5 * node.hi[i].max(0.0);
                }
                vec![Node {
                    lo: ORIGIN,
                    hi,
                    mass: node.mass,
                    depth: node.depth + 1,
                    tag: node.tag,
                }]
            }
            Kind::Plane { axes } => self.plane_children(node, axes),
            Kind::Ifs(spec) => {
                let size = node.hi[0] - node.lo[0];
                let mut out = Vec::with_capacity(spec.maps.len());
                for (map, &w) in spec.maps.iter().zip(&spec.weights) {
                    if w <= 0.0 {
                        continue;
                    }
                    let mut lo = ORIGIN;
                    let mut hi = ORIGIN;
                    for i in 0..self.dim {
                        lo[i] = node.lo[i] + size * map.offset[i];
                        hi[i] = lo[i] + size * map.ratio;
                    }
                    out.push(Node {
                        lo,
                        hi,
                        mass: node.mass * w,
                        depth: node.depth + 1,
                        tag: node.tag,
                    });
                }
                out
            }
            Kind::Grid { levels } => {
                let rule = &levels[(node.depth as usize).min(levels.len() - 1)];
                grid_children(node, rule, self.dim)
            }
            Kind::Product { a, b } => {
                let (na, nb) = split_product_node(node, a.dim, b.dim);
                let ca = a.children_of(&na);
                let cb = b.children_of(&nb);
                let mut out = Vec::with_capacity(ca.len() * cb.len());
                for x in &ca {
                    for y in &cb {
                        out.push(product_node(x, y, a.dim, b.dim, node.mass * x.mass * y.mass));
                    }
                }
                out
            }
            Kind::Mixture { parts } => {
                let c = node.center(self.dim);
                for (_, m) in parts {
                    let roots = m.roots();
                    if roots.iter().any(|r| r.contains_point(&c, self.dim)) {
                        return m.children_of(node);
                    }
                }
                Vec::new()
            }
            Kind::Affine(v) => {
                let mut base_node = *node;
                base_node.lo = v.to_base(&node.lo, self.dim);
                base_node.hi = v.to_base(&node.hi, self.dim);
                v.base
                    .children_of(&base_node)
                    .into_iter()
                    .map(|mut c| {
                        let lo = v.from_base(&c.lo, self.dim);
                        let hi = v.from_base(&c.hi, self.dim);
                        c.lo = lo;
                        c.hi = hi;
                        c
                    })
                    .collect()
            }
            Kind::Restricted(r) => {
                if node.tag == TAG_NONE {
                    let mut cs = r.base.children_of(node);
                    for c in &mut cs {
                        c.tag = TAG_NONE;
                    }
                    cs
                } else {
                    let rn = &r.arena[node.tag as usize];
                    if rn.frontier {
                        let mut cs = r.base.children_of(node);
                        for c in &mut cs {
                            c.tag = TAG_NONE;
                        }
                        cs
                    } else {
                        rn.child_ids.iter().map(|&i| r.arena[i].node).collect()
                    }
                }
            }
        }
    }

    fn lebesgue_children(&self, node: &Node) -> Vec<Node> {
        let raw = dyadic_split(node, self.dim);
        let vols: Vec<f64> = raw
            .iter()
            .map(|c| clip_ball_volume(self.dim, &c.lo, &c.hi))
            .collect();
        let total: f64 = vols.iter().sum();
        if total <= 0.0 {
            return Vec::new();
        }
        raw.into_iter()
            .zip(vols)
            .filter(|(_, v)| *v > 0.0)
            .map(|(mut c, v)| {
                c.mass = node.mass * v / total;
                c
            })
            .collect()
    }

    fn plane_children(&self, node: &Node, axes: &[usize]) -> Vec<Node> {
        let raw = dyadic_split(node, self.dim);
        let keep: Vec<Node> = raw
            .into_iter()
            .filter(|c| {
                (0..self.dim)
                    .filter(|i| !axes.contains(i))
                    .all(|i| c.lo[i] <= 0.0 && c.hi[i] > 0.0)
            })
            .collect();
        let vols: Vec<f64> = keep
            .iter()
            .map(|c| plane_clip_volume(c, axes))
            .collect();
        let total: f64 = vols.iter().sum();
        if total <= 0.0 {
            return Vec::new();
        }
        keep.into_iter()
            .zip(vols)
            .filter(|(_, v)| *v > 0.0)
            .map(|(mut c, v)| {
                c.mass = node.mass * v / total;
                c
            })
            .collect()
    }

    /// Smallest child/parent size ratio; used to convert scales to depths.
    pub fn level_ratio(&self) -> f64 {
        match &self.kind {
            Kind::LebesgueBall | Kind::PointMass | Kind::Plane { .. } => 0.5,
            Kind::Ifs(spec) => spec
                .maps
                .iter()
                .map(|m| m.ratio)
                .fold(1.0_f64, f64::min),
            Kind::Grid { levels } => levels
                .iter()
                .map(|r| 1.0 / r.arity as f64)
                .fold(1.0_f64, f64::min),
            Kind::Product { a, b } => a.level_ratio().min(b.level_ratio()),
            Kind::Mixture { parts } => parts
                .iter()
                .map(|(_, m)| m.level_ratio())
                .fold(1.0_f64, f64::min),
            Kind::Affine(v) => v.base.level_ratio(),
            Kind::Restricted(r) => r.base.level_ratio(),
        }
    }

    /// Root extent (largest side of the union of root boxes).
    pub fn root_size(&self) -> f64 {
        self.roots()
            .iter()
            .map(|n| n.max_side(self.dim))
            .fold(0.0, f64::max)
    }

    /// Tree depth at which cells are `extra_levels` subdivisions finer than
    /// the scale `r`.
    pub fn depth_for_scale(&self, r: f64, extra_levels: u32) -> u32 {
        let ratio = self.level_ratio();
        let root = self.root_size().max(1e-300);
        let n = ((r / root).ln() / ratio.ln()).ceil().max(0.0) as u32;
        n + extra_levels
    }

    /// Enclosure of the measure of an arbitrary region.
    pub fn region_mass(&self, region: &dyn RegionClassifier, depth: u32) -> MassInterval {
        enclosure::region_mass_impl(self, region, depth)
    }

    /// Enclosure of mu(B(x, r)), bracketing the open and closed ball.
    pub fn ball_mass(&self, x: Point, r: f64, depth: u32) -> Result<MassInterval> {
        if r <= 0.0 {
            return Err(MeasureError::InvalidRadius(r));
        }
        let floor = self.resolution_floor();
        if r < floor {
            return Err(MeasureError::DepthExceeded { scale: r, floor });
        }
        Ok(self.ball_mass_unchecked(x, r, depth))
    }

    /// As `ball_mass` but without precondition checks; used internally where
    /// radii are derived from already-validated scales.
    pub fn ball_mass_unchecked(&self, x: Point, r: f64, depth: u32) -> MassInterval {
        if let Some(v) = self.analytic_ball_mass(&x, r) {
            return v;
        }
        let region = BallRegion { center: x, r };
        self.region_mass(&region, depth)
    }

    /// Exact ball masses for the analytic standard measures.
    fn analytic_ball_mass(&self, x: &Point, r: f64) -> Option<MassInterval> {
        match &self.kind {
            Kind::LebesgueBall => {
                let dist = geom::norm(*x, self.dim);
                let v = geom::ball_overlap_volume(self.dim, dist, 1.0, r)
                    / geom::unit_ball_volume(self.dim);
                Some(MassInterval::exact(v.clamp(0.0, 1.0), self.max_depth))
            }
            Kind::PointMass => {
                let dist = geom::norm(*x, self.dim);
                let v = if dist < r {
                    MassInterval::exact(1.0, self.max_depth)
                } else if dist > r {
                    MassInterval::exact(0.0, self.max_depth)
                } else {
                    MassInterval::new(0.0, 1.0, self.max_depth)
                };
                Some(v)
            }
            Kind::Plane { axes } => {
                let k = axes.len();
                let mut off2 = 0.0;
                let mut in2 = 0.0;
                for (i, xi) in x.iter().enumerate().take(self.dim) {
                    if axes.contains(&i) {
                        in2 += xi * xi;
                    } else {
                        off2 += xi * xi;
                    }
                }
                if off2 >= r * r {
                    return Some(MassInterval::exact(0.0, self.max_depth));
                }
                let rho = (r * r - off2).sqrt();
                let v = geom::ball_overlap_volume(k, in2.sqrt(), 1.0, rho)
                    / geom::unit_ball_volume(k);
                Some(MassInterval::exact(v.clamp(0.0, 1.0), self.max_depth))
            }
            Kind::Affine(v) => {
                let bx = v.to_base(x, self.dim);
                let inner = v.base.analytic_ball_mass(&bx, v.scale * r)?;
                Some(MassInterval::new(
                    inner.low / v.mass_div,
                    inner.high / v.mass_div,
                    inner.depth_used,
                ))
            }
            _ => None,
        }
    }

    /// Normalized restriction to a region, materialized to `depth`.
    pub fn restrict(&self, region: &dyn RegionClassifier, depth: u32) -> Result<Measure> {
        if matches!(self.kind, Kind::Restricted(_)) {
            return Err(MeasureError::UnsupportedKind(
                "restriction of a restricted measure".into(),
            ));
        }
        let base = Arc::new(self.clone());
        let mut arena: Vec<RNode> = Vec::new();
        let mut low_parts = Vec::new();
        let mut root_ids = Vec::new();
        let mut kept_total = 0.0;
        for root in self.roots() {
            if let Some((id, kept)) =
                build_restricted(self, region, &root, depth, &mut arena, &mut low_parts)
            {
                root_ids.push(id);
                kept_total += kept;
            }
        }
        let low = geom::sorted_sum(&mut low_parts);
        if kept_total <= 0.0 {
            return Err(MeasureError::ZeroMass);
        }
        if low <= 0.0 {
            return Err(MeasureError::AmbiguousMass { high: kept_total });
        }
        for rn in &mut arena {
            rn.node.mass /= kept_total;
        }
        Ok(Measure::new(
            self.dim,
            self.max_depth,
            Kind::Restricted(Arc::new(Restricted {
                base,
                arena,
                root_ids,
            })),
        ))
    }

    /// T_x mu: the translation mu(. + x).
    pub fn translate(&self, x: Point) -> Measure {
        self.affine(1.0, x, 1.0)
    }

    pub(crate) fn affine(&self, scale: f64, shift: Point, mass_div: f64) -> Measure {
        // Flatten nested views so transforms stay one layer deep.
        let view = match &self.kind {
            Kind::Affine(v) => AffineView {
                base: v.base.clone(),
                scale: v.scale * scale,
                shift: {
                    let mut s = v.shift;
                    for i in 0..self.dim {
                        s[i] += v.scale * shift[i];
                    }
                    s
                },
                mass_div: v.mass_div * mass_div,
            },
            _ => AffineView {
                base: Arc::new(self.clone()),
                scale,
                shift,
                mass_div,
            },
        };
        Measure::new(self.dim, self.max_depth, Kind::Affine(view))
    }

    /// True if a positive-mass chain of cells containing the origin descends
    /// to the resolution floor.
    pub fn origin_in_support(&self) -> bool {
        self.point_in_support(&ORIGIN)
    }

    pub fn point_in_support(&self, p: &Point) -> bool {
        let target = self.root_size() * 2.0_f64.powi(-20);
        let mut stack: Vec<Node> = self
            .roots()
            .into_iter()
            .filter(|n| n.mass > 0.0 && n.contains_point(p, self.dim))
            .collect();
        while let Some(node) = stack.pop() {
            if node.max_side(self.dim) <= target {
                return true;
            }
            let mut any = false;
            for c in self.children_of(&node) {
                if c.mass > 0.0 && c.contains_point(p, self.dim) {
                    stack.push(c);
                    any = true;
                }
            }
            if !any && self.children_of(&node).is_empty() {
                // leaf with positive mass (restricted frontier at floor)
                return true;
            }
        }
        false
    }

    /// Draw `n` support points by descending the mass tree proportionally to
    /// cell masses. Deterministic given the seed.
    pub fn support_sample(&self, n: usize, seed: u64) -> Vec<Point> {
        (0..n).map(|i| self.sample_one(seed, i as u64)).collect()
    }

    fn sample_one(&self, seed: u64, index: u64) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15) ^ index);
        let floor = self.resolution_floor() * self.root_size();
        let roots = self.roots();
        let mut node = pick_weighted(&roots, &mut rng);
        let mut levels = 0u32;
        loop {
            if node.max_side(self.dim) <= floor || levels >= 4 * self.max_depth {
                break;
            }
            let children = self.children_of(&node);
            if children.is_empty() {
                break;
            }
            node = pick_weighted(&children, &mut rng);
            levels += 1;
        }
        node.center(self.dim)
    }

    /// All cells at exactly `depth` levels below the roots.
    pub fn cells_at_depth(&self, depth: u32) -> Vec<Node> {
        let mut out = Vec::new();
        let mut stack = self.roots();
        while let Some(node) = stack.pop() {
            if node.mass <= 0.0 {
                continue;
            }
            if node.depth >= depth {
                out.push(node);
            } else {
                stack.extend(self.children_of(&node));
            }
        }
        out.sort_by(|a, b| {
            a.lo[..self.dim]
                .partial_cmp(&b.lo[..self.dim])
                .unwrap()
        });
        out
    }

    /// Number of positive-mass cells and their mean max side at a depth.
    pub fn covering_count(&self, depth: u32) -> (usize, f64) {
        let cells = self.cells_at_depth(depth);
        let n = cells.len();
        let mean = cells.iter().map(|c| c.max_side(self.dim)).sum::<f64>() / n.max(1) as f64;
        (n, mean)
    }
}

fn pick_weighted(nodes: &[Node], rng: &mut ChaCha8Rng) -> Node {
    let total: f64 = nodes.iter().map(|n| n.mass).sum();
    let mut u = rng.gen::<f64>() * total;
    for n in nodes {
        u -= n.mass;
        if u <= 0.0 {
            return *n;
        }
    }
    *nodes.last().expect("pick_weighted on empty node list")
}

fn dyadic_split(node: &Node, dim: usize) -> Vec<Node> {
    let mut out = vec![*node];
    for axis in 0..dim {
        let mut next = Vec::with_capacity(out.len() * 2);
        for n in &out {
            let m = 0.5 * (n.lo[axis] + n.hi[axis]);
            let mut a = *n;
            a.hi[axis] = m;
            let mut b = *n;
            b.lo[axis] = m;
            next.push(a);
            next.push(b);
        }
        out = next;
    }
    for n in &mut out {
        n.depth = node.depth + 1;
        n.mass = 0.0;
        n.tag = node.tag;
    }
    out
}

fn grid_children(node: &Node, rule: &Rule, dim: usize) -> Vec<Node> {
    let m = rule.arity;
    let mut idx = vec![0u32; dim];
    let mut out = Vec::new();
    loop {
        let mut w = 1.0;
        for (axis, &i) in idx.iter().enumerate() {
            w *= rule.axis_weight(axis, i);
            if w == 0.0 {
                break;
            }
        }
        if w > 0.0 {
            let mut lo = ORIGIN;
            let mut hi = ORIGIN;
            for (axis, &i) in idx.iter().enumerate() {
                let step = (node.hi[axis] - node.lo[axis]) / m as f64;
                lo[axis] = node.lo[axis] + step * i as f64;
                hi[axis] = node.lo[axis] + step * (i + 1) as f64;
            }
            out.push(Node {
                lo,
                hi,
                mass: node.mass * w,
                depth: node.depth + 1,
                tag: node.tag,
            });
        }
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == dim {
                return out;
            }
            idx[axis] += 1;
            if idx[axis] < m {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

fn product_node(a: &Node, b: &Node, da: usize, db: usize, mass: f64) -> Node {
    let mut lo = ORIGIN;
    let mut hi = ORIGIN;
    lo[..da].copy_from_slice(&a.lo[..da]);
    hi[..da].copy_from_slice(&a.hi[..da]);
    lo[da..da + db].copy_from_slice(&b.lo[..db]);
    hi[da..da + db].copy_from_slice(&b.hi[..db]);
    Node {
        lo,
        hi,
        mass,
        depth: a.depth.max(b.depth),
        tag: TAG_NONE,
    }
}

fn split_product_node(node: &Node, da: usize, db: usize) -> (Node, Node) {
    let mut a = Node::root(ORIGIN, ORIGIN);
    let mut b = Node::root(ORIGIN, ORIGIN);
    for i in 0..da {
        a.lo[i] = node.lo[i];
        a.hi[i] = node.hi[i];
    }
    for i in 0..db {
        b.lo[i] = node.lo[da + i];
        b.hi[i] = node.hi[da + i];
    }
    a.depth = node.depth;
    b.depth = node.depth;
    a.mass = 1.0;
    b.mass = 1.0;
    (a, b)
}

fn clip_ball_volume(dim: usize, lo: &Point, hi: &Point) -> f64 {
    match dim {
        1 => (hi[0].min(1.0) - lo[0].max(-1.0)).max(0.0),
        2 => geom::disk_rect_area(1.0, lo[0], hi[0], lo[1], hi[1]),
        3 => geom::sphere_box_volume(1.0, lo, hi),
        _ => unreachable!(),
    }
}

fn plane_clip_volume(node: &Node, axes: &[usize]) -> f64 {
    let mut lo = ORIGIN;
    let mut hi = ORIGIN;
    for (j, &axis) in axes.iter().enumerate() {
        lo[j] = node.lo[axis];
        hi[j] = node.hi[axis];
    }
    clip_ball_volume(axes.len(), &lo, &hi)
}

fn build_restricted(
    measure: &Measure,
    region: &dyn RegionClassifier,
    node: &Node,
    depth: u32,
    arena: &mut Vec<RNode>,
    low_parts: &mut Vec<f64>,
) -> Option<(usize, f64)> {
    if node.mass <= 0.0 {
        return None;
    }
    match region.classify(&node.lo, &node.hi, measure.ambient_dim()) {
        CellClass::Outside => None,
        CellClass::Inside => {
            low_parts.push(node.mass);
            let mut n = *node;
            n.tag = arena.len() as u64;
            arena.push(RNode {
                node: n,
                child_ids: Vec::new(),
                frontier: true,
            });
            Some((arena.len() - 1, node.mass))
        }
        CellClass::Straddles => {
            if node.depth >= depth {
                let mut n = *node;
                n.tag = arena.len() as u64;
                arena.push(RNode {
                    node: n,
                    child_ids: Vec::new(),
                    frontier: true,
                });
                return Some((arena.len() - 1, node.mass));
            }
            let children = measure.children_of(node);
            if children.is_empty() {
                let mut n = *node;
                n.tag = arena.len() as u64;
                arena.push(RNode {
                    node: n,
                    child_ids: Vec::new(),
                    frontier: true,
                });
                return Some((arena.len() - 1, node.mass));
            }
            let slot = arena.len();
            let mut n = *node;
            n.tag = slot as u64;
            arena.push(RNode {
                node: n,
                child_ids: Vec::new(),
                frontier: false,
            });
            let mut kept = 0.0;
            let mut ids = Vec::new();
            for c in &children {
                if let Some((id, m)) =
                    build_restricted(measure, region, c, depth, arena, low_parts)
                {
                    ids.push(id);
                    kept += m;
                }
            }
            if ids.is_empty() {
                // no surviving mass below; drop the slot content
                arena[slot].node.mass = 0.0;
                return None;
            }
            arena[slot].node.mass = kept;
            arena[slot].child_ids = ids;
            Some((slot, kept))
        }
    }
}

#[cfg(test)]
mod tests;
