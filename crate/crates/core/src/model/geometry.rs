use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Segments shorter than this are rejected as degenerate.
pub const GEOMETRIC_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn lerp(self, other: Point, u: f64) -> Point {
        self + (other - self) * u
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Which end of a road segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum End {
    A,
    B,
}

impl End {
    pub const BOTH: [End; 2] = [End::A, End::B];

    pub fn index(self) -> usize {
        match self {
            End::A => 0,
            End::B => 1,
        }
    }

    pub fn other(self) -> End {
        match self {
            End::A => End::B,
            End::B => End::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadSegment {
    pub id: usize,
    pub a: Point,
    pub b: Point,
    pub length: f64,
}

impl RoadSegment {
    pub fn new(id: usize, a: Point, b: Point) -> Self {
        RoadSegment {
            id,
            a,
            b,
            length: a.dist(b),
        }
    }

    pub fn end(&self, end: End) -> Point {
        match end {
            End::A => self.a,
            End::B => self.b,
        }
    }

    /// Physical point at `offset` meters from endpoint `a`.
    pub fn point_at(&self, offset: f64) -> Point {
        self.a.lerp(self.b, offset / self.length)
    }

    pub fn direction(&self) -> Point {
        (self.b - self.a) * (1.0 / self.length)
    }
}
