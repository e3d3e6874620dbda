//! Planar rigid-body poses and constellation geometry.
//!
//! Angles are kept in the half-open interval (-pi, pi]. Operations that can
//! be mirrored across the x-axis (negating y and heading) are written so the
//! mirrored computation is the exact negation of the original, which keeps
//! trajectory-level mirror checks bit-tight.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

pub const TAU: f64 = 2.0 * PI;

/// Wrap an angle into (-pi, pi]. Rejects NaN and infinities.
pub fn wrap_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(normalize(theta))
}

/// Unchecked wrap into (-pi, pi]. Odd-symmetric everywhere except at the
/// boundary itself, where -pi maps to +pi.
pub(crate) fn normalize(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut r = libm::fmod(theta, TAU);
    if r > PI {
        r -= TAU;
    } else if r <= -PI {
        r += TAU;
    }
    r
}

/// Circular mean of two headings.
pub fn mean_heading(a: f64, b: f64) -> f64 {
    normalize(libm::atan2(libm::sin(a) + libm::sin(b), libm::cos(a) + libm::cos(b)))
}

/// An element of SE(2): position in meters, heading in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 { x: 0.0, y: 0.0, theta: 0.0 };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2 { x, y, theta: normalize(theta) }
    }

    /// Checked constructor rejecting non-finite components.
    pub fn try_new(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite("pose position"));
        }
        Ok(Pose2 { x, y, theta: wrap_angle(theta)? })
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// `self ∘ other`: `other` interpreted in the frame of `self`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let (s, c) = (libm::sin(self.theta), libm::cos(self.theta));
        Pose2 {
            x: self.x + (c * other.x - s * other.y),
            y: self.y + (s * other.x + c * other.y),
            theta: normalize(self.theta + other.theta),
        }
    }

    pub fn inverse(&self) -> Pose2 {
        let (s, c) = (libm::sin(self.theta), libm::cos(self.theta));
        Pose2 {
            x: -(c * self.x + s * self.y),
            y: s * self.x - c * self.y,
            theta: normalize(-self.theta),
        }
    }

    /// `other` expressed in the frame of `self`.
    pub fn between(&self, other: &Pose2) -> Pose2 {
        let (s, c) = (libm::sin(self.theta), libm::cos(self.theta));
        let (wx, wy) = (other.x - self.x, other.y - self.y);
        Pose2 {
            x: c * wx + s * wy,
            y: c * wy - s * wx,
            theta: normalize(other.theta - self.theta),
        }
    }

    /// Map a body-frame point into the world frame.
    pub fn transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = (libm::sin(self.theta), libm::cos(self.theta));
        [self.x + (c * p[0] - s * p[1]), self.y + (s * p[0] + c * p[1])]
    }

    /// Reflection across the world x-axis.
    pub fn mirrored(&self) -> Pose2 {
        Pose2 { x: self.x, y: -self.y, theta: normalize(-self.theta) }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Goal expressed in the body frame of the current pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseDelta {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

pub fn pose_delta(current: &Pose2, goal: &Pose2) -> Result<PoseDelta> {
    if !current.is_finite() || !goal.is_finite() {
        return Err(Error::NonFinite("pose"));
    }
    let rel = current.between(goal);
    Ok(PoseDelta { dx: rel.x, dy: rel.y, dtheta: rel.theta })
}

/// A rigid set of landmark points anchored to the body frame.
///
/// Offsets are stored relative to the point-set centroid so that the split of
/// the alignment distance into a centroid term and a rotation term is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    centroid: [f64; 2],
    offsets: Vec<[f64; 2]>,
    moment: f64,
}

impl Constellation {
    /// Build from body-frame points.
    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidConstellation("need at least 2 points"));
        }
        if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::NonFinite("constellation point"));
        }
        let n = points.len() as f64;
        let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        let centroid = [sx / n, sy / n];
        let offsets: Vec<[f64; 2]> =
            points.iter().map(|p| [p[0] - centroid[0], p[1] - centroid[1]]).collect();
        let moment = offsets.iter().map(|q| q[0] * q[0] + q[1] * q[1]).sum::<f64>() / n;
        if moment <= 0.0 {
            return Err(Error::InvalidConstellation("all points coincide"));
        }
        Ok(Constellation { centroid, offsets, moment })
    }

    /// `count` points equally spaced on a circle of `radius` about the origin.
    pub fn circle(radius: f64, count: usize) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidConstellation("radius must be positive"));
        }
        if count < 2 {
            return Err(Error::InvalidConstellation("need at least 2 points"));
        }
        let offsets: Vec<[f64; 2]> = (0..count)
            .map(|i| {
                let a = TAU * i as f64 / count as f64;
                [radius * libm::cos(a), radius * libm::sin(a)]
            })
            .collect();
        // Exact by symmetry; summing the rounded offsets would only add noise.
        Ok(Constellation { centroid: [0.0, 0.0], offsets, moment: radius * radius })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Planar moment of inertia `I_c`: mean squared centroid-relative radius.
    pub fn moment(&self) -> f64 {
        self.moment
    }

    /// Centroid in the body frame.
    pub fn centroid(&self) -> [f64; 2] {
        self.centroid
    }

    /// Body-frame points.
    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.offsets.iter().map(move |q| [self.centroid[0] + q[0], self.centroid[1] + q[1]])
    }

    /// Small-angle approximation `I_c * dtheta^2` of the rotational term.
    /// Only an approximation; distances use the exact form.
    pub fn small_angle_rotational(&self, heading_error: f64) -> f64 {
        self.moment * heading_error * heading_error
    }
}

/// Constellation alignment distance and its exact split.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceBreakdown {
    /// Mean squared distance between corresponding points, m^2.
    pub total: f64,
    /// Squared centroid distance, m^2.
    pub positional: f64,
    /// `2 I_c (1 - cos dtheta)`, m^2.
    pub rotational_exact: f64,
    /// Wrapped heading difference, rad.
    pub heading_error: f64,
}

impl DistanceBreakdown {
    pub const ZERO: DistanceBreakdown =
        DistanceBreakdown { total: 0.0, positional: 0.0, rotational_exact: 0.0, heading_error: 0.0 };

    /// Squared heading error `d_o`.
    pub fn orientation_sq(&self) -> f64 {
        self.heading_error * self.heading_error
    }
}

/// Distance between the constellation placed at `a` and at `b`.
///
/// `total` is an explicit per-point sum; `positional` and `rotational_exact`
/// come from the centroids and the moment.
pub fn constellation_distance(a: &Pose2, b: &Pose2, c: &Constellation) -> DistanceBreakdown {
    let total = c
        .points()
        .map(|p| {
            let pa = a.transform_point(p);
            let pb = b.transform_point(p);
            let (ex, ey) = (pa[0] - pb[0], pa[1] - pb[1]);
            ex * ex + ey * ey
        })
        .sum::<f64>()
        / c.len() as f64;

    let ca = a.transform_point(c.centroid);
    let cb = b.transform_point(c.centroid);
    let positional = (ca[0] - cb[0]) * (ca[0] - cb[0]) + (ca[1] - cb[1]) * (ca[1] - cb[1]);
    let heading_error = normalize(b.theta - a.theta);
    // 2 I (1 - cos t) == 4 I sin^2(t / 2), without the cancellation near zero.
    let half = libm::sin(0.5 * heading_error);
    let rotational_exact = 4.0 * c.moment * half * half;

    DistanceBreakdown { total, positional, rotational_exact, heading_error }
}

/// Euclidean distance between the final and target positions.
pub fn position_error(final_pose: &Pose2, goal: &Pose2) -> f64 {
    libm::hypot(final_pose.x - goal.x, final_pose.y - goal.y)
}

/// Absolute circular heading difference in [0, pi].
pub fn orientation_error(theta_f: f64, theta_g: f64) -> f64 {
    let d = libm::fmod(libm::fabs(theta_f - theta_g), TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0).unwrap(), 0.0);
        assert!(close(wrap_angle(1.5 * PI).unwrap(), -FRAC_PI_2, 1e-12));
        assert!(close(wrap_angle(-3.0 * PI).unwrap(), PI, 1e-12));
        assert_eq!(wrap_angle(-PI).unwrap(), PI);
        assert_eq!(wrap_angle(PI).unwrap(), PI);
        assert!(wrap_angle(f64::NAN).is_err());
        assert!(wrap_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn pose_delta_examples() {
        let d = pose_delta(&Pose2::IDENTITY, &Pose2::new(1.0, 2.0, 0.5)).unwrap();
        assert_eq!((d.dx, d.dy, d.dtheta), (1.0, 2.0, 0.5));

        // Rotation-matrix oracle: world delta (0, 1) seen from heading pi/2.
        let cur = Pose2::new(1.0, 1.0, FRAC_PI_2);
        let d = pose_delta(&cur, &Pose2::new(1.0, 2.0, FRAC_PI_2)).unwrap();
        let (c, s) = (FRAC_PI_2.cos(), FRAC_PI_2.sin());
        let oracle = (c * 0.0 + s * 1.0, -s * 0.0 + c * 1.0);
        assert!(close(d.dx, oracle.0, 1e-12) && close(d.dx, 1.0, 1e-12));
        assert!(close(d.dy, oracle.1, 1e-12) && close(d.dy, 0.0, 1e-12));
        assert_eq!(d.dtheta, 0.0);

        let p = Pose2::new(-0.3, 4.0, 2.0);
        let d = pose_delta(&p, &p).unwrap();
        assert_eq!((d.dx, d.dy, d.dtheta), (0.0, 0.0, 0.0));

        assert!(pose_delta(&Pose2 { x: f64::NAN, y: 0.0, theta: 0.0 }, &p).is_err());
    }

    #[test]
    fn compose_inverse_identity() {
        let p = Pose2::new(0.7, -1.2, 2.9);
        assert_eq!(p.compose(&Pose2::IDENTITY), p);
        let q = Pose2::IDENTITY.compose(&p);
        assert!(close(q.x, p.x, 1e-15) && close(q.y, p.y, 1e-15) && q.theta == p.theta);
        let r = p.compose(&p.inverse());
        assert!(r.x.abs() < 1e-12 && r.y.abs() < 1e-12 && r.theta.abs() < 1e-12);
        let other = Pose2::new(3.0, 1.0, -2.5);
        let rel = p.between(&other);
        let back = p.compose(&rel);
        assert!(close(back.x, other.x, 1e-12) && close(back.y, other.y, 1e-12));
        assert!(orientation_error(back.theta, other.theta) < 1e-12);
    }

    #[test]
    fn circle_moments() {
        let c = Constellation::circle(1.0, 8).unwrap();
        assert_eq!(c.moment(), 1.0);
        assert_eq!(c.len(), 8);
        let c = Constellation::circle(0.5, 16).unwrap();
        assert_eq!(c.moment(), 0.25);
        // The cached moment agrees with the general constructor.
        let pts: Vec<[f64; 2]> = c.points().collect();
        let g = Constellation::new(&pts).unwrap();
        assert!(close(g.moment(), 0.25, 1e-12));
        assert!(Constellation::circle(1.0, 1).is_err());
        assert!(Constellation::circle(0.0, 8).is_err());
        assert!(Constellation::circle(-1.0, 8).is_err());
    }

    #[test]
    fn general_constellation_moment() {
        let c = Constellation::new(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0]]).unwrap();
        // Hand summation about the centroid (0, 2/3).
        let oracle = (1.0 + 4.0 / 9.0 + 1.0 + 4.0 / 9.0 + 16.0 / 9.0) / 3.0;
        assert!(close(c.moment(), oracle, 1e-12));
        assert!(close(c.moment(), 14.0 / 9.0, 1e-12));
        assert!(close(c.centroid()[1], 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn degenerate_constellations_rejected() {
        assert!(Constellation::new(&[[1.0, 1.0]]).is_err());
        assert!(Constellation::new(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]).is_err());
        assert!(Constellation::new(&[[1.0, f64::NAN], [0.0, 0.0]]).is_err());
    }

    #[test]
    fn distance_examples() {
        let unit = Constellation::circle(1.0, 8).unwrap();
        let a = Pose2::new(0.3, -0.2, 1.0);
        assert_eq!(constellation_distance(&a, &a, &unit), DistanceBreakdown::ZERO);

        let d = constellation_distance(&Pose2::IDENTITY, &Pose2::new(1.0, 0.0, FRAC_PI_2), &unit);
        assert!(close(d.total, 3.0, 1e-12));
        assert!(close(d.positional, 1.0, 1e-12));
        assert!(close(d.rotational_exact, 2.0, 1e-12));

        let d = constellation_distance(&Pose2::IDENTITY, &Pose2::new(0.0, 0.0, PI), &unit);
        assert!(close(d.total, 4.0, 1e-12));
        assert!(close(d.rotational_exact, 4.0, 1e-12));
        assert_eq!(d.positional, 0.0);
    }

    #[test]
    fn small_angle_accessor_is_an_approximation() {
        let unit = Constellation::circle(1.0, 8).unwrap();
        let d = constellation_distance(&Pose2::IDENTITY, &Pose2::new(0.0, 0.0, 0.01), &unit);
        assert!(close(unit.small_angle_rotational(d.heading_error), d.rotational_exact, 1e-8));
        assert!(close(d.orientation_sq(), 1e-4, 1e-15));
        let d = constellation_distance(&Pose2::IDENTITY, &Pose2::new(0.0, 0.0, PI), &unit);
        assert!(unit.small_angle_rotational(d.heading_error) > d.rotational_exact + 5.0);
    }

    #[test]
    fn metric_examples() {
        assert_eq!(position_error(&Pose2::IDENTITY, &Pose2::new(3.0, 4.0, 1.0)), 5.0);
        assert_eq!(position_error(&Pose2::new(1.0, 2.0, 0.0), &Pose2::new(1.0, 2.0, 3.0)), 0.0);
        assert!(close(position_error(&Pose2::new(0.03, 0.04, 0.0), &Pose2::IDENTITY), 0.05, 1e-15));

        assert!(close(orientation_error(0.1, TAU - 0.1), 0.2, 1e-15));
        assert_eq!(orientation_error(PI, -PI), 0.0);
        assert_eq!(orientation_error(0.0, FRAC_PI_4), FRAC_PI_4);
    }

    #[test]
    fn mirror_is_exact_negation() {
        let s = Pose2::new(0.4, -0.7, 0.9);
        let o = Pose2::new(0.2, 0.3, -0.4);
        let m = s.compose(&o).mirrored();
        let mm = s.mirrored().compose(&o.mirrored());
        assert_eq!(m, mm);
        assert_eq!(mean_heading(0.3, 0.7), -mean_heading(-0.7, -0.3));
    }
}
