//! Integer lattice points of dimension at most [`MAX_DIM`].

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 9;

/// A point of `Z^d` for `d <= MAX_DIM`. Coordinates past `d` are kept at zero,
/// so arithmetic and hashing never need to know the dimension.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Point(pub [i32; MAX_DIM]);

impl Point {
    pub const ORIGIN: Point = Point([0; MAX_DIM]);

    pub fn from_slice(coords: &[i32]) -> Point {
        assert!(coords.len() <= MAX_DIM, "dimension {} exceeds {MAX_DIM}", coords.len());
        let mut p = [0; MAX_DIM];
        p[..coords.len()].copy_from_slice(coords);
        Point(p)
    }

    /// The unit vector `sign * e_axis`.
    pub fn unit(axis: usize, sign: i32) -> Point {
        let mut p = Point::ORIGIN;
        p.0[axis] = sign;
        p
    }

    pub fn coords(&self, dim: usize) -> &[i32] {
        &self.0[..dim]
    }

    pub fn is_origin(&self) -> bool {
        self.0 == [0; MAX_DIM]
    }

    pub fn norm2(&self) -> i64 {
        self.0.iter().map(|&c| c as i64 * c as i64).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    pub fn max_abs(&self) -> i32 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn to_f64(&self, dim: usize) -> Vec<f64> {
        self.0[..dim].iter().map(|&c| c as f64).collect()
    }

    /// Formats the first `dim` coordinates separated by spaces.
    pub fn display(&self, dim: usize) -> String {
        self.0[..dim].iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }

    /// Parses a comma or whitespace separated coordinate list.
    pub fn parse(s: &str) -> Result<Point, String> {
        let coords: Result<Vec<i32>, _> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i32>())
            .collect();
        let coords = coords.map_err(|e| format!("bad coordinate in `{s}`: {e}"))?;
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(format!("`{s}` must have between 1 and {MAX_DIM} coordinates"));
        }
        Ok(Point::from_slice(&coords))
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        let mut p = self.0;
        for (a, b) in p.iter_mut().zip(o.0) {
            *a += b;
        }
        Point(p)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        let mut p = self.0;
        for (a, b) in p.iter_mut().zip(o.0) {
            *a -= b;
        }
        Point(p)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point(self.0.map(|c| -c))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&c| c != 0).map_or(1, |i| i + 1);
        write!(f, "{:?}", &self.0[..last])
    }
}

/// Axis-aligned bounding box, used to reject membership queries cheaply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundingBox {
    pub lo: Point,
    pub hi: Point,
}

impl BoundingBox {
    pub fn of<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<BoundingBox> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = BoundingBox { lo: first, hi: first };
        for p in it {
            for k in 0..MAX_DIM {
                b.lo.0[k] = b.lo.0[k].min(p.0[k]);
                b.hi.0[k] = b.hi.0[k].max(p.0[k]);
            }
        }
        Some(b)
    }

    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        (0..MAX_DIM).all(|k| p.0[k] >= self.lo.0[k] && p.0[k] <= self.hi.0[k])
    }

    pub fn center(&self, dim: usize) -> Vec<f64> {
        (0..dim).map(|k| 0.5 * (self.lo.0[k] as f64 + self.hi.0[k] as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_parse() {
        let a = Point::parse("1, -2, 3").unwrap();
        let b = Point::from_slice(&[0, 5, 1]);
        assert_eq!(a + b, Point::from_slice(&[1, 3, 4]));
        assert_eq!(a - a, Point::ORIGIN);
        assert_eq!((-a).coords(3), &[-1, 2, -3]);
        assert_eq!(a.norm2(), 14);
        assert!(Point::parse("").is_err());
        assert!(Point::parse("1,x").is_err());
    }

    #[test]
    fn bounding_box() {
        let pts = [Point::from_slice(&[0, 0]), Point::from_slice(&[2, -1]), Point::from_slice(&[-1, 3])];
        let b = BoundingBox::of(&pts).unwrap();
        assert_eq!(b.lo.coords(2), &[-1, -1]);
        assert_eq!(b.hi.coords(2), &[2, 3]);
        assert!(b.contains(&Point::from_slice(&[1, 1])));
        assert!(!b.contains(&Point::from_slice(&[3, 1])));
        assert_eq!(b.center(2), vec![0.5, 1.0]);
    }
}
