//! Planar point patterns: Poisson sampling, (conditional) thinning,
//! nearest-neighbor association and uniform sampling inside Voronoi cells.
//!
//! Voronoi cells are never built explicitly. A location belongs to the cell
//! of its nearest point, with exact distance ties going to the lower index.

mod index;

pub use index::NeighborIndex;

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attempts allowed per sample in [`sample_uniform_in_cell`] unless the caller says otherwise.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist2(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point2) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Finite observation region standing in for the whole plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Window {
    Disk { center: Point2, radius: f64 },
    Square { center: Point2, half_width: f64 },
}

impl Window {
    pub fn disk(center: Point2, radius: f64) -> Result<Self> {
        let w = Window::Disk { center, radius };
        w.validate()?;
        Ok(w)
    }

    pub fn square(center: Point2, half_width: f64) -> Result<Self> {
        let w = Window::Square { center, half_width };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let (center, size) = match *self {
            Window::Disk { center, radius } => (center, radius),
            Window::Square { center, half_width } => (center, half_width),
        };
        if !center.is_finite() {
            return Err(Error::invalid("window center", f64::NAN, "must be finite"));
        }
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::invalid(
                "window size",
                size,
                "must be positive and finite",
            ));
        }
        Ok(())
    }

    pub fn center(&self) -> Point2 {
        match *self {
            Window::Disk { center, .. } | Window::Square { center, .. } => center,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Window::Disk { radius, .. } => PI * radius * radius,
            Window::Square { half_width, .. } => 4.0 * half_width * half_width,
        }
    }

    pub fn contains(&self, q: Point2) -> bool {
        match *self {
            Window::Disk { center, radius } => q.dist2(center) <= radius * radius,
            Window::Square { center, half_width } => {
                (q.x - center.x).abs() <= half_width && (q.y - center.y).abs() <= half_width
            }
        }
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounds(&self) -> (Point2, Point2) {
        let (c, h) = match *self {
            Window::Disk { center, radius } => (center, radius),
            Window::Square { center, half_width } => (center, half_width),
        };
        (Point2::new(c.x - h, c.y - h), Point2::new(c.x + h, c.y + h))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        match *self {
            Window::Disk { center, radius } => loop {
                let r = radius * rng.random::<f64>().sqrt();
                let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
                let q = Point2::new(center.x + r * c, center.y + r * s);
                // Rounding can land a hair outside the boundary.
                if self.contains(q) {
                    break q;
                }
            },
            Window::Square { center, half_width } => {
                let x = center.x + half_width * (2.0 * rng.random::<f64>() - 1.0);
                let y = center.y + half_width * (2.0 * rng.random::<f64>() - 1.0);
                Point2::new(x, y)
            }
        }
    }
}

/// Finite set of base-station locations inside a window, in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    points: Vec<Point2>,
    window: Window,
    intensity: f64,
}

impl PointPattern {
    /// Builds a pattern, checking that every point is finite and inside `window`.
    pub fn new(points: Vec<Point2>, window: Window, intensity: f64) -> Result<Self> {
        window.validate()?;
        if let Some(q) = points
            .iter()
            .find(|q| !q.is_finite() || !window.contains(**q))
        {
            return Err(Error::PointOutsideWindow { x: q.x, y: q.y });
        }
        Ok(Self {
            points,
            window,
            intensity,
        })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Intensity the pattern was generated (or thinned) at.
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.points.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                len: self.points.len(),
            })
        }
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(name, p, "must lie in [0, 1]"))
    }
}

/// Homogeneous Poisson point process of intensity `lambda` on `window`.
pub fn sample_ppp<R: Rng + ?Sized>(
    lambda: f64,
    window: Window,
    rng: &mut R,
) -> Result<PointPattern> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(
            "lambda",
            lambda,
            "must be positive and finite",
        ));
    }
    window.validate()?;
    let mean = lambda * window.area();
    let count = Poisson::new(mean)
        .map_err(|_| Error::invalid("expected point count", mean, "not a valid Poisson mean"))?
        .sample(rng) as usize;
    let points = (0..count).map(|_| window.sample_uniform(rng)).collect();
    Ok(PointPattern {
        points,
        window,
        intensity: lambda,
    })
}

/// Nearest and second-nearest points to `origin` as `(index1, r1, index2, r2)`.
///
/// Linear scan; ties go to the lower index. Use [`NeighborIndex`] for many queries.
pub fn nearest_two(pattern: &PointPattern, origin: Point2) -> Result<(usize, f64, usize, f64)> {
    if pattern.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            found: pattern.len(),
        });
    }
    let [(i1, d1), (i2, d2)] = index::linear_nearest2(&pattern.points, origin);
    Ok((i1, d1.sqrt(), i2, d2.sqrt()))
}

/// Index of the point whose Voronoi cell contains `query` (linear scan).
pub fn cell_owner(pattern: &PointPattern, query: Point2) -> Result<usize> {
    if pattern.is_empty() {
        return Err(Error::InsufficientPoints {
            needed: 1,
            found: 0,
        });
    }
    Ok(index::linear_nearest2(&pattern.points, query)[0].0)
}

/// Keeps the point at `keep_index` and every other point independently with probability `p`.
pub fn conditional_thin<R: Rng + ?Sized>(
    pattern: &PointPattern,
    keep_index: usize,
    p: f64,
    rng: &mut R,
) -> Result<PointPattern> {
    check_probability("p", p)?;
    pattern.check_index(keep_index)?;
    let points = pattern
        .points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i == keep_index || rng.random::<f64>() < p)
        .map(|(_, q)| *q)
        .collect();
    Ok(PointPattern {
        points,
        window: pattern.window,
        intensity: pattern.intensity * p,
    })
}

/// Keeps every point independently with probability `p`.
///
/// Returns the retained pattern and, for each retained point, its index in the input.
pub fn thin<R: Rng + ?Sized>(
    pattern: &PointPattern,
    p: f64,
    rng: &mut R,
) -> Result<(PointPattern, Vec<usize>)> {
    check_probability("p", p)?;
    let kept: Vec<usize> = (0..pattern.len())
        .filter(|_| rng.random::<f64>() < p)
        .collect();
    let points = kept.iter().map(|&i| pattern.points[i]).collect();
    Ok((
        PointPattern {
            points,
            window: pattern.window,
            intensity: pattern.intensity * p,
        },
        kept,
    ))
}

/// Uniform point on (Voronoi cell of `cell_index`) ∩ window, by rejection from the window.
pub fn sample_uniform_in_cell<R: Rng + ?Sized>(
    index: &NeighborIndex<'_>,
    cell_index: usize,
    rng: &mut R,
    max_attempts: u64,
) -> Result<Point2> {
    let pattern = index.pattern();
    pattern.check_index(cell_index)?;
    for _ in 0..max_attempts {
        let q = pattern.window.sample_uniform(rng);
        if index.is_owner(q, cell_index) {
            return Ok(q);
        }
    }
    let site = pattern.points[cell_index];
    Err(Error::SamplingFailure {
        cell: cell_index,
        attempts: max_attempts,
        x: site.x,
        y: site.y,
    })
}
