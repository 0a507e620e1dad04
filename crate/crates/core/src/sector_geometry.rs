//! Geometry of the closed complex sector with half-angle `alpha`: membership,
//! truncations, vertical boundary segments and the evenly spaced point sets
//! living on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on angles used by the membership test. Points whose
/// argument exceeds `alpha` by no more than this are still counted as inside,
/// so that exact boundary points survive floating-point round-trips.
const ANGLE_EPS: f64 = 1e-9;

/// The closed sector `{ r e^{iθ} : r ≥ 0, |θ| ≤ alpha }` with
/// `0 < alpha ≤ π/2`. `tan(alpha)` is computed once at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    alpha: f64,
    tan_alpha: f64,
}

impl Sector {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > std::f64::consts::FRAC_PI_2 {
            return Err(Error::Input(format!(
                "sector half-angle must lie in (0, pi/2], got {alpha}"
            )));
        }
        Ok(Sector {
            alpha,
            tan_alpha: alpha.tan(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tan_alpha(&self) -> f64 {
        self.tan_alpha
    }

    /// Closed-sector membership: `|arg p| ≤ alpha`, origin included.
    pub fn contains(&self, p: SectorPoint) -> bool {
        if p.x == 0.0 && p.y == 0.0 {
            return true;
        }
        if p.x < 0.0 {
            // |arg| > π/2 ≥ alpha unless the point sits on the imaginary
            // axis with alpha = π/2, which the atan2 branch handles.
            return p.x >= -ANGLE_EPS * p.y.abs()
                && self.alpha >= std::f64::consts::FRAC_PI_2 - ANGLE_EPS;
        }
        p.y.abs().atan2(p.x) <= self.alpha + ANGLE_EPS
    }

    /// Area of the truncation `Δ_t = {s ∈ Δ : |s| ≤ t}`, i.e. `alpha · t²`.
    pub fn truncated_area(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Input(format!(
                "truncation radius must be finite and ≥ 0, got {t}"
            )));
        }
        Ok(self.alpha * t * t)
    }

    /// The vertical segment `L_n = {x + iy ∈ Δ : x = n}` at abscissa `n > 0`.
    pub fn segment(&self, n: f64) -> Result<Segment> {
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::Input(format!(
                "segment abscissa must be finite and > 0, got {n}"
            )));
        }
        Ok(Segment {
            n,
            length: 2.0 * n * self.tan_alpha,
        })
    }

    /// The `⌊R_n/r⌋ + 1` evenly spaced points on `L_n`, from the top endpoint
    /// `n + i·n·tan(alpha)` downwards with spacing `r`.
    ///
    /// `R_n = r` is accepted and yields the two endpoints of coverage;
    /// `R_n < r` is a precondition error.
    pub fn segment_points(&self, n: f64, r: f64) -> Result<Vec<SectorPoint>> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::Input(format!("spacing must be > 0, got {r}")));
        }
        let segment = self.segment(n)?;
        let length = segment.length;
        if length < r * (1.0 - 1e-12) {
            return Err(Error::SegmentTooShort {
                n,
                length,
                spacing: r,
            });
        }
        let count = (length / r + 1e-9).floor() as usize + 1;
        let top = n * self.tan_alpha;
        let mut points = Vec::with_capacity(count);
        for j in 0..count {
            points.push(SectorPoint {
                x: n,
                y: top - j as f64 * r,
            });
        }
        Ok(points)
    }
}

/// A point of the sector, stored as real/imaginary parts. Construction only
/// checks finiteness; sector membership is tested where it matters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorPoint {
    pub x: f64,
    pub y: f64,
}

impl SectorPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Input(format!(
                "point coordinates must be finite, got ({x}, {y})"
            )));
        }
        Ok(SectorPoint { x, y })
    }

    pub const ORIGIN: SectorPoint = SectorPoint { x: 0.0, y: 0.0 };

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn add(&self, other: SectorPoint) -> SectorPoint {
        SectorPoint {
            x: self.x + other.x,
            y: self.y + other.y,
        }
    }

    pub fn sub(&self, other: SectorPoint) -> SectorPoint {
        SectorPoint {
            x: self.x - other.x,
            y: self.y - other.y,
        }
    }

    pub fn dist(&self, other: SectorPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// The segment `L_n` together with its length `R_n = 2 n tan(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub n: f64,
    pub length: f64,
}

impl Segment {
    pub fn endpoints(&self) -> (SectorPoint, SectorPoint) {
        let half = self.length / 2.0;
        (
            SectorPoint { x: self.n, y: half },
            SectorPoint {
                x: self.n,
                y: -half,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn p(x: f64, y: f64) -> SectorPoint {
        SectorPoint::new(x, y).unwrap()
    }

    #[test]
    fn sector_rejects_bad_angles() {
        assert!(Sector::new(0.0).is_err());
        assert!(Sector::new(-0.1).is_err());
        assert!(Sector::new(FRAC_PI_2 + 0.01).is_err());
        assert!(Sector::new(f64::NAN).is_err());
        assert!(Sector::new(FRAC_PI_2).is_ok());
    }

    #[test]
    fn membership_examples() {
        let quarter = Sector::new(FRAC_PI_4).unwrap();
        assert!(quarter.contains(p(1.0, 0.0)));
        assert!(!quarter.contains(p(1.0, 1.0001)));
        assert!(quarter.contains(p(1.0, 1.0))); // closed boundary ray
        assert!(quarter.contains(SectorPoint::ORIGIN));
        assert!(!quarter.contains(p(-1.0, 0.0)));

        let half = Sector::new(FRAC_PI_2).unwrap();
        assert!(half.contains(p(0.0, 5.0)));
        assert!(half.contains(p(0.0, -5.0)));
        assert!(!half.contains(p(-0.1, 5.0)));
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(SectorPoint::new(f64::NAN, 0.0).is_err());
        assert!(SectorPoint::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn truncated_area_closed_form() {
        let quarter = Sector::new(FRAC_PI_4).unwrap();
        assert_eq!(quarter.truncated_area(2.0).unwrap(), PI);
        let half = Sector::new(FRAC_PI_2).unwrap();
        assert_eq!(half.truncated_area(0.0).unwrap(), 0.0);
        let s = Sector::new(0.3).unwrap();
        assert!((s.truncated_area(10.0).unwrap() - 30.0).abs() < 1e-12);
        assert!(s.truncated_area(-1.0).is_err());
    }

    #[test]
    fn segment_length_exact() {
        let quarter = Sector::new(FRAC_PI_4).unwrap();
        let seg = quarter.segment(4.0).unwrap();
        assert!((seg.length - 8.0).abs() < 1e-12);
        let (top, bottom) = seg.endpoints();
        assert!((top.y - 4.0).abs() < 1e-12);
        assert!((bottom.y + 4.0).abs() < 1e-12);
    }

    #[test]
    fn segment_points_even_spacing() {
        let quarter = Sector::new(FRAC_PI_4).unwrap();
        let pts = quarter.segment_points(4.0, 2.0).unwrap();
        let expected = [(4.0, 4.0), (4.0, 2.0), (4.0, 0.0), (4.0, -2.0), (4.0, -4.0)];
        assert_eq!(pts.len(), expected.len());
        for (q, (ex, ey)) in pts.iter().zip(expected) {
            assert!((q.x - ex).abs() < 1e-12 && (q.y - ey).abs() < 1e-12);
            assert!(quarter.contains(*q));
        }
    }

    #[test]
    fn segment_points_short_segment_errors() {
        let quarter = Sector::new(FRAC_PI_4).unwrap();
        assert!(matches!(
            quarter.segment_points(0.5, 2.0),
            Err(Error::SegmentTooShort { .. })
        ));
    }

    #[test]
    fn segment_points_equal_length_gives_endpoints() {
        let quarter = Sector::new(FRAC_PI_4).unwrap();
        let pts = quarter.segment_points(1.0, 2.0).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].y - 1.0).abs() < 1e-12);
        assert!((pts[1].y + 1.0).abs() < 1e-12);
    }

    #[test]
    fn segment_points_count_formula() {
        let quarter = Sector::new(FRAC_PI_4).unwrap();
        let pts = quarter.segment_points(3.0, 2.0).unwrap();
        assert_eq!(pts.len(), 4);
        let last = pts.last().unwrap();
        assert!((last.x - 3.0).abs() < 1e-12);
        assert!((last.y + 3.0).abs() < 1e-12);
    }

    #[test]
    fn segment_points_pairwise_separation() {
        let s = Sector::new(1.1).unwrap();
        let pts = s.segment_points(7.0, 1.5).unwrap();
        for (i, a) in pts.iter().enumerate() {
            assert!((a.x - 7.0).abs() < 1e-12);
            assert!(s.contains(*a));
            for b in pts.iter().skip(i + 1) {
                assert!(a.dist(*b) >= 1.5 - 1e-9);
            }
        }
        for w in pts.windows(2) {
            assert!((w[0].y - w[1].y - 1.5).abs() < 1e-12);
        }
    }
}
