use super::{Point2, PointPattern};
use crate::error::{Error, Result};

/// Patterns smaller than this are searched by linear scan.
const GRID_MIN_POINTS: usize = 64;

/// Slack on the ring lower bound so rounding in cell assignment can never
/// end a search early.
const RING_SLACK: f64 = 1e-9;

type Candidate = (usize, f64);

#[inline]
fn better(a: Candidate, b: Candidate) -> bool {
    a.1 < b.1 || (a.1 == b.1 && a.0 < b.0)
}

#[inline]
fn offer(best: &mut [Candidate; 2], c: Candidate) {
    if better(c, best[0]) {
        best[1] = best[0];
        best[0] = c;
    } else if better(c, best[1]) {
        best[1] = c;
    }
}

const NONE: Candidate = (usize::MAX, f64::INFINITY);

/// Two nearest points by squared distance, ties to the lower index.
pub(super) fn linear_nearest2(points: &[Point2], q: Point2) -> [Candidate; 2] {
    let mut best = [NONE; 2];
    for (i, p) in points.iter().enumerate() {
        offer(&mut best, (i, p.dist2(q)));
    }
    best
}

#[derive(Debug, Clone)]
struct Grid {
    min: Point2,
    cell: f64,
    inv_cell: f64,
    nx: i64,
    ny: i64,
    /// `starts[c]..starts[c + 1]` indexes `items` for cell `c` (row-major).
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl Grid {
    fn build(points: &[Point2], lo: Point2, hi: Point2) -> Self {
        let width = (hi.x - lo.x).max(f64::MIN_POSITIVE);
        let height = (hi.y - lo.y).max(f64::MIN_POSITIVE);
        // About one point per cell, i.e. a side of 1/sqrt(intensity).
        let cell = (width * height / points.len() as f64).sqrt();
        let nx = ((width / cell).ceil() as i64).max(1);
        let ny = ((height / cell).ceil() as i64).max(1);
        let mut grid = Grid {
            min: lo,
            cell,
            inv_cell: 1.0 / cell,
            nx,
            ny,
            starts: Vec::new(),
            items: Vec::new(),
        };

        let ncells = (nx * ny) as usize;
        let cell_of: Vec<usize> = points.iter().map(|&p| grid.clamped_cell(p)).collect();
        let mut starts = vec![0u32; ncells + 1];
        for &c in &cell_of {
            starts[c + 1] += 1;
        }
        for c in 0..ncells {
            starts[c + 1] += starts[c];
        }
        let mut fill = starts.clone();
        let mut items = vec![0u32; points.len()];
        // Ascending point order within each cell.
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        grid.starts = starts;
        grid.items = items;
        grid
    }

    #[inline]
    fn coords(&self, p: Point2) -> (i64, i64) {
        (
            ((p.x - self.min.x) * self.inv_cell).floor() as i64,
            ((p.y - self.min.y) * self.inv_cell).floor() as i64,
        )
    }

    fn clamped_cell(&self, p: Point2) -> usize {
        let (cx, cy) = self.coords(p);
        let cx = cx.clamp(0, self.nx - 1);
        let cy = cy.clamp(0, self.ny - 1);
        (cy * self.nx + cx) as usize
    }

    #[inline]
    fn cell_items(&self, cx: i64, cy: i64) -> &[u32] {
        let c = (cy * self.nx + cx) as usize;
        &self.items[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Squared lower bound on the distance from a query in cell `(qx, qy)`
    /// to anything beyond Chebyshev ring `k`.
    #[inline]
    fn beyond_ring(&self, k: i64) -> f64 {
        let b = ((k as f64) - RING_SLACK).max(0.0) * self.cell;
        b * b
    }

    fn last_ring(&self, qx: i64, qy: i64) -> i64 {
        qx.abs()
            .max((self.nx - 1 - qx).abs())
            .max(qy.abs())
            .max((self.ny - 1 - qy).abs())
    }

    /// Calls `visit` on every point index in ring `k` around `(qx, qy)`.
    /// Returns `false` as soon as `visit` does.
    fn for_ring(&self, qx: i64, qy: i64, k: i64, mut visit: impl FnMut(usize) -> bool) -> bool {
        let y0 = qy - k;
        let y1 = qy + k;
        let x_lo = (qx - k).max(0);
        let x_hi = (qx + k).min(self.nx - 1);
        for cy in y0.max(0)..=y1.min(self.ny - 1) {
            let full_row = cy == y0 || cy == y1;
            let mut scan =
                |cx: i64| -> bool { self.cell_items(cx, cy).iter().all(|&i| visit(i as usize)) };
            if full_row {
                for cx in x_lo..=x_hi {
                    if !scan(cx) {
                        return false;
                    }
                }
            } else {
                for cx in [qx - k, qx + k] {
                    if (0..self.nx).contains(&cx) && !scan(cx) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Nearest-neighbor index over a [`PointPattern`].
///
/// Uses a uniform grid with about one point per cell and expands square
/// rings around the query until the answer is provably exact. Small
/// patterns fall back to a linear scan. Answers always agree with a
/// brute-force scan, including the lower-index tie rule.
#[derive(Debug, Clone)]
pub struct NeighborIndex<'a> {
    pattern: &'a PointPattern,
    grid: Option<Grid>,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(pattern: &'a PointPattern) -> Self {
        let grid = (pattern.len() >= GRID_MIN_POINTS).then(|| {
            let (lo, hi) = pattern.window().bounds();
            Grid::build(pattern.points(), lo, hi)
        });
        Self { pattern, grid }
    }

    pub fn pattern(&self) -> &'a PointPattern {
        self.pattern
    }

    pub fn uses_grid(&self) -> bool {
        self.grid.is_some()
    }

    fn nearest2(&self, q: Point2) -> [Candidate; 2] {
        let points = self.pattern.points();
        let Some(grid) = &self.grid else {
            return linear_nearest2(points, q);
        };
        let want = points.len().min(2) - 1;
        let mut best = [NONE; 2];
        let (qx, qy) = grid.coords(q);
        let last = grid.last_ring(qx, qy);
        for k in 0..=last {
            grid.for_ring(qx, qy, k, |i| {
                offer(&mut best, (i, points[i].dist2(q)));
                true
            });
            if best[want].1 < grid.beyond_ring(k) {
                break;
            }
        }
        best
    }

    /// Index of the nearest point (the owner of `q`'s Voronoi cell).
    pub fn cell_owner(&self, q: Point2) -> Result<usize> {
        if self.pattern.is_empty() {
            return Err(Error::InsufficientPoints {
                needed: 1,
                found: 0,
            });
        }
        Ok(self.nearest2(q)[0].0)
    }

    /// `(index1, r1, index2, r2)` for the two nearest points.
    pub fn nearest_two(&self, q: Point2) -> Result<(usize, f64, usize, f64)> {
        if self.pattern.len() < 2 {
            return Err(Error::InsufficientPoints {
                needed: 2,
                found: self.pattern.len(),
            });
        }
        let [(i1, d1), (i2, d2)] = self.nearest2(q);
        Ok((i1, d1.sqrt(), i2, d2.sqrt()))
    }

    /// Whether `q` lies in the Voronoi cell of point `cell`.
    ///
    /// Stops at the first point that beats `cell`, which makes it much
    /// cheaper than a full query when most proposals are rejected.
    pub fn is_owner(&self, q: Point2, cell: usize) -> bool {
        let points = self.pattern.points();
        let own = (cell, points[cell].dist2(q));
        let Some(grid) = &self.grid else {
            return !points
                .iter()
                .enumerate()
                .any(|(i, p)| better((i, p.dist2(q)), own));
        };
        let (qx, qy) = grid.coords(q);
        let last = grid.last_ring(qx, qy);
        for k in 0..=last {
            let unbeaten = grid.for_ring(qx, qy, k, |i| !better((i, points[i].dist2(q)), own));
            if !unbeaten {
                return false;
            }
            if own.1 < grid.beyond_ring(k) {
                return true;
            }
        }
        true
    }
}
