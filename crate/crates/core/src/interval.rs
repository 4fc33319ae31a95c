//! Guaranteed mass enclosures.

/// A two-sided enclosure of the mass of a region: `low <= mass <= high`.
///
/// Recursive cell descent puts fully-interior cells into both bounds and
/// straddling cells into the upper bound only, so refining the descent depth
/// always yields a nested sub-interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassInterval {
    pub low: f64,
    pub high: f64,
    pub depth_used: u32,
}

impl MassInterval {
    pub fn new(low: f64, high: f64, depth_used: u32) -> Self {
        debug_assert!(low <= high + 1e-12, "inverted interval [{low}, {high}]");
        MassInterval {
            low,
            high: high.max(low),
            depth_used,
        }
    }

    pub fn exact(v: f64, depth_used: u32) -> Self {
        MassInterval::new(v, v, depth_used)
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.low + self.high)
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, v: f64) -> bool {
        self.low - 1e-12 <= v && v <= self.high + 1e-12
    }

    /// True if `self` is a sub-interval of `other` (up to roundoff slack).
    pub fn nested_in(&self, other: &MassInterval) -> bool {
        other.low - 1e-9 <= self.low && self.high <= other.high + 1e-9
    }

    pub fn overlaps(&self, other: &MassInterval) -> bool {
        self.low <= other.high + 1e-9 && other.low <= self.high + 1e-9
    }

    /// Enclosure of the ratio `self / denom`, clamped to [0, 1] for mass
    /// ratios of nested regions.
    pub fn ratio(&self, denom: &MassInterval) -> MassInterval {
        let low = if denom.high > 0.0 {
            (self.low / denom.high).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let high = if denom.low > 0.0 {
            (self.high / denom.low).clamp(low, 1.0)
        } else {
            1.0
        };
        MassInterval::new(low, high, self.depth_used.min(denom.depth_used))
    }
}
