use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A point or displacement in meters. Serialized as `[x, y, z]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[S; 3]", into = "[S; 3]")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Point3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> From<[S; 3]> for Point3<S> {
    fn from([x, y, z]: [S; 3]) -> Self {
        Self { x, y, z }
    }
}

impl<S: Scalar> From<Point3<S>> for [S; 3] {
    fn from(p: Point3<S>) -> Self {
        [p.x, p.y, p.z]
    }
}

impl<S: Scalar> Point3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    pub fn norm(self) -> S {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(self, other: Self) -> S {
        (other - self).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Move toward `target` by at most `max_step`, landing exactly on it when close enough.
    pub fn step_toward(self, target: Self, max_step: S) -> Self {
        let d = self.distance(target);
        if d <= max_step || d <= S::zero() {
            target
        } else {
            self + (target - self) * (max_step / d)
        }
    }

    pub fn cast<T: Scalar>(self) -> Point3<T> {
        Point3::new(T::lit(self.x.as_f64()), T::lit(self.y.as_f64()), T::lit(self.z.as_f64()))
    }
}

impl<S: Scalar> Add for Point3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Scalar> Sub for Point3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Scalar> Mul<S> for Point3<S> {
    type Output = Self;
    fn mul(self, k: S) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Length of the polyline through `points`.
pub fn path_length<S: Scalar>(points: &[Point3<S>]) -> S {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}
