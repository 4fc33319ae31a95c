//! Recursive cylinder descent: turns a region classifier and a mass tree
//! into a guaranteed mass enclosure.

use super::classify::{CellClass, RegionClassifier};
use super::Measure;
use crate::geom::sorted_sum;
use crate::interval::MassInterval;

/// Hard cap on visited nodes per query; when exhausted, remaining straddling
/// cells are booked on the upper side so soundness is preserved.
const NODE_BUDGET: usize = 4_000_000;

pub(crate) fn region_mass_impl(
    measure: &Measure,
    region: &dyn RegionClassifier,
    depth_limit: u32,
) -> MassInterval {
    let dim = measure.ambient_dim();
    let mut inside = Vec::new();
    let mut upper_extra = Vec::new();
    let mut stack = measure.roots();
    let mut budget = NODE_BUDGET;
    while let Some(node) = stack.pop() {
        if node.mass <= 0.0 {
            continue;
        }
        match region.classify(&node.lo, &node.hi, dim) {
            CellClass::Inside => inside.push(node.mass),
            CellClass::Outside => {}
            CellClass::Straddles => {
                if node.depth >= depth_limit || budget == 0 {
                    upper_extra.push(node.mass);
                } else {
                    let children = measure.children_of(&node);
                    if children.is_empty() {
                        upper_extra.push(node.mass);
                    } else {
                        budget = budget.saturating_sub(1);
                        stack.extend(children);
                    }
                }
            }
        }
    }
    // Smallest-first accumulation keeps the result reproducible.
    let low = sorted_sum(&mut inside);
    let extra = sorted_sum(&mut upper_extra);
    MassInterval::new(low, low + extra, depth_limit)
}
