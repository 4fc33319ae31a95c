//! Region classifiers: conservative three-way tests of axis-aligned cells
//! against query regions (balls, half-spaces, cones, annuli).

use crate::geom::{box_max_dist_sq, box_min_dist_sq, dot, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Inside,
    Outside,
    Straddles,
}

/// A predicate object classifying axis-aligned cells against a region.
///
/// Classification must be conservative and consistent under subdivision: a
/// cell classified `Inside` never has a child classified `Outside` and vice
/// versa. Enclosures bracket both the open and the closed variant of the
/// region: `Inside` implies the cell lies in the open region, `Outside`
/// implies it is disjoint from the closed region.
pub trait RegionClassifier: Sync {
    fn classify(&self, lo: &Point, hi: &Point, dim: usize) -> CellClass;
}

/// The whole space; restriction to it is the identity.
pub struct AllSpace;

impl RegionClassifier for AllSpace {
    fn classify(&self, _lo: &Point, _hi: &Point, _dim: usize) -> CellClass {
        CellClass::Inside
    }
}

/// Ball around `center`. `Inside` means inside the open ball, `Outside`
/// means disjoint from the closed ball, so one enclosure brackets both
/// conventions.
pub struct BallRegion {
    pub center: Point,
    pub r: f64,
}

impl RegionClassifier for BallRegion {
    fn classify(&self, lo: &Point, hi: &Point, dim: usize) -> CellClass {
        let r2 = self.r * self.r;
        if box_max_dist_sq(lo, hi, &self.center, dim) < r2 {
            CellClass::Inside
        } else if box_min_dist_sq(lo, hi, &self.center, dim) > r2 {
            CellClass::Outside
        } else {
            CellClass::Straddles
        }
    }
}

/// Axis-aligned box. `Inside` means inside the open box, `Outside` means
/// disjoint from the closed box.
pub struct BoxRegion {
    pub lo: Point,
    pub hi: Point,
}

impl RegionClassifier for BoxRegion {
    fn classify(&self, lo: &Point, hi: &Point, dim: usize) -> CellClass {
        let mut inside = true;
        for i in 0..dim {
            if lo[i] >= self.hi[i] || hi[i] <= self.lo[i] {
                return CellClass::Outside;
            }
            if lo[i] <= self.lo[i] || hi[i] >= self.hi[i] {
                inside = false;
            }
        }
        if inside {
            CellClass::Inside
        } else {
            CellClass::Straddles
        }
    }
}

/// Closed half-space {y : (y - anchor) . normal >= offset}.
pub struct HalfSpace {
    pub anchor: Point,
    pub normal: Point,
    pub offset: f64,
}

impl RegionClassifier for HalfSpace {
    fn classify(&self, lo: &Point, hi: &Point, dim: usize) -> CellClass {
        let (mut min, mut max) = (0.0, 0.0);
        for i in 0..dim {
            let a = (lo[i] - self.anchor[i]) * self.normal[i];
            let b = (hi[i] - self.anchor[i]) * self.normal[i];
            min += a.min(b);
            max += a.max(b);
        }
        if min >= self.offset {
            CellClass::Inside
        } else if max < self.offset {
            CellClass::Outside
        } else {
            CellClass::Straddles
        }
    }
}

/// Range of a linear functional `z . v` for `z` ranging over `box - x`.
pub fn linear_range(lo: &Point, hi: &Point, x: &Point, v: &Point, dim: usize) -> (f64, f64) {
    let (mut min, mut max) = (0.0, 0.0);
    for i in 0..dim {
        let a = (lo[i] - x[i]) * v[i];
        let b = (hi[i] - x[i]) * v[i];
        min += a.min(b);
        max += a.max(b);
    }
    (min, max)
}

/// The non-symmetric cone region X(x, r, V, alpha) \ H(x, theta, alpha):
/// points of the open ball whose distance to the plane V is below
/// alpha * |y - x|, minus the closed cone around theta.
pub struct ConeRegion {
    pub center: Point,
    pub r: f64,
    /// Rows of the orthogonal projection onto the complement of V.
    pub proj_perp: [[f64; 3]; 3],
    pub theta: Point,
    pub alpha: f64,
    pub dim: usize,
}

impl ConeRegion {
    /// Pointwise membership (used by the rectifiability checker and tests).
    pub fn contains_point(&self, y: &Point) -> bool {
        let z = [
            y[0] - self.center[0],
            y[1] - self.center[1],
            y[2] - self.center[2],
        ];
        let n = dot(z, z, self.dim).sqrt();
        if n >= self.r || n == 0.0 {
            return false;
        }
        let mut d2 = 0.0;
        for row in self.proj_perp.iter().take(self.dim) {
            let c = dot(*row, z, self.dim);
            d2 += c * c;
        }
        if d2.sqrt() >= self.alpha * n {
            return false;
        }
        // excluded half-cone H: (y - x) . theta >= alpha |y - x|
        dot(z, self.theta, self.dim) < self.alpha * n
    }
}

impl RegionClassifier for ConeRegion {
    fn classify(&self, lo: &Point, hi: &Point, dim: usize) -> CellClass {
        let dmin = box_min_dist_sq(lo, hi, &self.center, dim).sqrt();
        let dmax = box_max_dist_sq(lo, hi, &self.center, dim).sqrt();
        if dmin > self.r {
            return CellClass::Outside;
        }
        // Component intervals of the projection onto the complement of V.
        let mut p_min2 = 0.0;
        let mut p_max2 = 0.0;
        for row in self.proj_perp.iter().take(dim) {
            let (a, b) = linear_range(lo, hi, &self.center, row, dim);
            let lo_c = if a <= 0.0 && b >= 0.0 {
                0.0
            } else {
                a.abs().min(b.abs())
            };
            let hi_c = a.abs().max(b.abs());
            p_min2 += lo_c * lo_c;
            p_max2 += hi_c * hi_c;
        }
        let (p_min, p_max) = (p_min2.sqrt(), p_max2.sqrt());
        let (t_min, t_max) = linear_range(lo, hi, &self.center, &self.theta, dim);

        let outside_x = p_min >= self.alpha * dmax;
        let inside_h = t_min >= self.alpha * dmax;
        if outside_x || inside_h {
            return CellClass::Outside;
        }
        let inside_x = dmax < self.r && p_max < self.alpha * dmin;
        let outside_h = t_max < self.alpha * dmin;
        if inside_x && outside_h {
            CellClass::Inside
        } else {
            CellClass::Straddles
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone_2d(alpha: f64) -> ConeRegion {
        // V = y-axis, theta = e2 (in V)
        ConeRegion {
            center: [0.0; 3],
            r: 1.0,
            proj_perp: [[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]],
            theta: [0.0, 1.0, 0.0],
            alpha,
            dim: 2,
        }
    }

    #[test]
    fn cone_membership_matches_angles() {
        let c = cone_2d(0.5);
        // down-wing points survive, up-wing is eaten by H
        assert!(c.contains_point(&[0.0, -0.5, 0.0]));
        assert!(!c.contains_point(&[0.0, 0.5, 0.0]));
        // off-cone point
        assert!(!c.contains_point(&[0.5, 0.0, 0.0]));
        // outside ball
        assert!(!c.contains_point(&[0.0, -1.5, 0.0]));
    }

    #[test]
    fn cone_classify_is_consistent_with_membership() {
        let c = cone_2d(0.5);
        let cells = [
            ([-0.05, -0.6, 0.0], [0.05, -0.5, 0.0]),
            ([0.4, 0.4, 0.0], [0.6, 0.6, 0.0]),
            ([-0.9, -0.9, 0.0], [0.9, 0.9, 0.0]),
        ];
        for (lo, hi) in cells {
            let class = c.classify(&lo, &hi, 2);
            // corners must agree with a decisive classification
            let corners = [
                [lo[0], lo[1], 0.0],
                [lo[0], hi[1], 0.0],
                [hi[0], lo[1], 0.0],
                [hi[0], hi[1], 0.0],
            ];
            match class {
                CellClass::Inside => assert!(corners.iter().all(|p| c.contains_point(p))),
                CellClass::Outside => assert!(corners.iter().all(|p| !c.contains_point(p))),
                CellClass::Straddles => {}
            }
        }
    }
}
