use std::ops::{Add, Mul, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Polar angle in (-pi, pi].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// Coordinates the Green's kernels can be evaluated on.
pub trait SpacePoint: Copy {
    const DIM: usize;
    /// Euclidean distance between `self` and `other`.
    fn separation(self, other: Self) -> f64;
    /// `(self - other) . dir`
    fn projected(self, other: Self, dir: Self) -> f64;
    fn norm(self) -> f64;
}

impl SpacePoint for Point2 {
    const DIM: usize = 2;
    fn separation(self, other: Self) -> f64 {
        (self - other).norm()
    }
    fn projected(self, other: Self, dir: Self) -> f64 {
        (self - other).dot(dir)
    }
    fn norm(self) -> f64 {
        Point2::norm(self)
    }
}

impl SpacePoint for Point3 {
    const DIM: usize = 3;
    fn separation(self, other: Self) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
    fn projected(self, other: Self, dir: Self) -> f64 {
        (self.x - other.x) * dir.x + (self.y - other.y) * dir.y + (self.z - other.z) * dir.z
    }
    fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}
