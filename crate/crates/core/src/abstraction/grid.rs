//! Uniform axis-aligned grids over a box domain with half-open cells and
//! optional periodic (wrap-around) dimensions.

use super::ode::{real, Real};
use super::AbsError;

/// A uniform grid: per dimension a range `[lo, hi)`, a cell count, the
/// resulting width, and whether the dimension is periodic.
#[derive(Debug, Clone)]
pub struct AxisGrid<F: Real> {
    lo: Vec<F>,
    hi: Vec<F>,
    cells: Vec<usize>,
    eta: Vec<F>,
    wrap: Vec<bool>,
}

impl<F: Real> AxisGrid<F> {
    /// Builds the grid; the requested width must divide each range evenly
    /// (up to rounding noise — the stored width is snapped to exact).
    // Negated comparisons so that NaN inputs are rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(domain: &[(F, F)], eta: &[F], wrap: &[bool]) -> Result<AxisGrid<F>, AbsError> {
        if domain.is_empty() || domain.len() != eta.len() || domain.len() != wrap.len() {
            return Err(AbsError::Shape(
                "domain, eta, and wrap must have the same nonzero length".into(),
            ));
        }
        let mut cells = Vec::new();
        let mut widths = Vec::new();
        for (d, (&(lo, hi), &w)) in domain.iter().zip(eta.iter()).enumerate() {
            if !(w > F::zero()) || !(hi > lo) {
                return Err(AbsError::DegenerateGrid(format!(
                    "dimension {d}: need positive width and nonempty range"
                )));
            }
            let ratio = ((hi - lo) / w).to_f64().unwrap_or(f64::NAN);
            let count = ratio.round();
            if !count.is_finite() || count < 1.0 || (ratio - count).abs() > 1e-6 * count {
                return Err(AbsError::DegenerateGrid(format!(
                    "dimension {d}: width does not divide the range evenly ({ratio} cells)"
                )));
            }
            cells.push(count as usize);
            widths.push((hi - lo) / real::<F>(count));
        }
        let total: usize = cells.iter().product();
        if total == 0 || total >= u32::MAX as usize - 1 {
            return Err(AbsError::DegenerateGrid(format!("{total} cells")));
        }
        Ok(AxisGrid {
            lo: domain.iter().map(|&(l, _)| l).collect(),
            hi: domain.iter().map(|&(_, h)| h).collect(),
            cells,
            eta: widths,
            wrap: wrap.to_vec(),
        })
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn cells_per_dim(&self) -> &[usize] {
        &self.cells
    }

    pub fn eta(&self) -> &[F] {
        &self.eta
    }

    pub fn wrap(&self) -> &[bool] {
        &self.wrap
    }

    pub fn domain(&self) -> Vec<(F, F)> {
        self.lo.iter().zip(self.hi.iter()).map(|(&l, &h)| (l, h)).collect()
    }

    /// Dimension-0-fastest linearization of per-dimension indices.
    pub fn id(&self, coords: &[usize]) -> usize {
        let mut id = 0;
        for d in (0..self.dims()).rev() {
            id = id * self.cells[d] + coords[d];
        }
        id
    }

    pub fn coords(&self, mut id: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dims());
        for d in 0..self.dims() {
            out.push(id % self.cells[d]);
            id /= self.cells[d];
        }
        out
    }

    /// Folds a coordinate of a periodic dimension into `[lo, hi)`.
    fn fold(&self, d: usize, v: F) -> F {
        let period = self.hi[d] - self.lo[d];
        let mut rel = (v - self.lo[d]) % period;
        if rel < F::zero() {
            rel = rel + period;
        }
        self.lo[d] + rel
    }

    /// Cell containing `x`: half-open boxes, periodic dimensions folded;
    /// `None` if any non-periodic coordinate leaves `[lo, hi)`.
    pub fn quantize(&self, x: &[F]) -> Option<usize> {
        let mut coords = Vec::with_capacity(self.dims());
        for (d, &xd) in x.iter().enumerate().take(self.dims()) {
            let v = if self.wrap[d] { self.fold(d, xd) } else { xd };
            if v < self.lo[d] || v >= self.hi[d] {
                return None;
            }
            let idx = ((v - self.lo[d]) / self.eta[d]).floor().to_f64().unwrap() as usize;
            coords.push(idx.min(self.cells[d] - 1));
        }
        Some(self.id(&coords))
    }

    pub fn center(&self, id: usize) -> Vec<F> {
        self.coords(id)
            .iter()
            .enumerate()
            .map(|(d, &i)| self.lo[d] + (real::<F>(i as f64) + real::<F>(0.5)) * self.eta[d])
            .collect()
    }

    pub fn cell_box(&self, id: usize) -> Vec<(F, F)> {
        self.coords(id)
            .iter()
            .enumerate()
            .map(|(d, &i)| {
                (
                    self.lo[d] + real::<F>(i as f64) * self.eta[d],
                    self.lo[d] + real::<F>(i as f64 + 1.0) * self.eta[d],
                )
            })
            .collect()
    }

    /// Index interval of cells intersecting the half-open interval `[a, b)`
    /// along dimension `d`, with boundaries snapped: offsets within a few
    /// ulps of a cell edge are treated as exactly on it, so boxes built
    /// from center ± width/2 land on whole cells instead of spilling into
    /// neighbors through rounding noise.
    fn dim_range(&self, d: usize, a: F, b: F) -> (isize, isize) {
        let eta = self.eta[d].to_f64().unwrap();
        let lo = self.lo[d].to_f64().unwrap();
        let snap = |q: f64| {
            let r = q.round();
            let tol = (F::epsilon().to_f64().unwrap() * 64.0).max(1e-13) * (q.abs() + 1.0);
            if (q - r).abs() <= tol {
                r
            } else {
                q
            }
        };
        let qa = snap((a.to_f64().unwrap() - lo) / eta);
        let qb = snap((b.to_f64().unwrap() - lo) / eta);
        // Cell i = [i, i+1) overlaps [qa, qb) iff i+1 > qa and i < qb.
        let first = if qa == qa.floor() { qa as isize } else { qa.floor() as isize };
        let last = if qb == qb.floor() {
            qb as isize - 1
        } else {
            qb.floor() as isize
        };
        (first, last)
    }

    /// All cells whose box intersects the half-open box `bx`, plus whether
    /// the box escapes the domain through a non-periodic face. Periodic
    /// dimensions fold; a periodic extent covering the whole period selects
    /// every cell in that dimension.
    // Negated comparison so that NaN bounds mean "no overlap", not "all".
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn cells_overlapping(&self, bx: &[(F, F)]) -> (Vec<usize>, bool) {
        let mut per_dim: Vec<Vec<usize>> = Vec::with_capacity(self.dims());
        let mut escapes = false;
        for (d, &(a, b)) in bx.iter().enumerate() {
            if !(b > a) {
                return (Vec::new(), true);
            }
            let n = self.cells[d] as isize;
            let mut idx: Vec<usize> = Vec::new();
            if self.wrap[d] {
                let period = self.hi[d] - self.lo[d];
                if b - a >= period {
                    idx.extend(0..self.cells[d]);
                } else {
                    let fa = self.fold(d, a);
                    let fb = fa + (b - a);
                    let (first, last) = self.dim_range(d, fa, fb.min(self.hi[d]));
                    for i in first.max(0)..=last.min(n - 1) {
                        idx.push(i as usize);
                    }
                    if fb > self.hi[d] {
                        let (first, last) = self.dim_range(d, self.lo[d], fb - period);
                        for i in first.max(0)..=last.min(n - 1) {
                            let i = i as usize;
                            if !idx.contains(&i) {
                                idx.push(i);
                            }
                        }
                    }
                }
                idx.sort_unstable();
            } else {
                let (first, last) = self.dim_range(d, a, b);
                if first < 0 || last >= n {
                    escapes = true;
                }
                for i in first.max(0)..=last.min(n - 1) {
                    idx.push(i as usize);
                }
            }
            if idx.is_empty() {
                // No in-domain cell in this dimension: the whole box lies
                // outside (only possible for non-periodic dimensions).
                return (Vec::new(), true);
            }
            per_dim.push(idx);
        }

        let mut ids = Vec::new();
        let mut cursor = vec![0usize; self.dims()];
        'outer: loop {
            let coords: Vec<usize> = cursor
                .iter()
                .enumerate()
                .map(|(d, &c)| per_dim[d][c])
                .collect();
            ids.push(self.id(&coords));
            for d in 0..self.dims() {
                cursor[d] += 1;
                if cursor[d] < per_dim[d].len() {
                    continue 'outer;
                }
                cursor[d] = 0;
            }
            break;
        }
        ids.sort_unstable();
        (ids, escapes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn robot_grid() -> AxisGrid<f64> {
        AxisGrid::new(
            &[(0.0, 5.0), (0.0, 5.0), (0.0, TAU)],
            &[0.2, 0.2, TAU / 8.0],
            &[false, false, true],
        )
        .unwrap()
    }

    #[test]
    fn grid_has_expected_shape() {
        let g = robot_grid();
        assert_eq!(g.cells_per_dim(), &[25, 25, 8]);
        assert_eq!(g.cell_count(), 5000);
    }

    #[test]
    fn uneven_width_is_rejected() {
        assert!(matches!(
            AxisGrid::new(&[(0.0, 1.0)], &[0.3], &[false]),
            Err(AbsError::DegenerateGrid(_))
        ));
    }

    #[test]
    fn quantize_center_round_trips() {
        let g = robot_grid();
        for id in [0usize, 1, 24, 25, 624, 4999, 2500] {
            assert_eq!(g.quantize(&g.center(id)), Some(id));
        }
    }

    #[test]
    fn quantize_is_half_open() {
        let g = AxisGrid::new(&[(0.0, 1.0)], &[0.5], &[false]).unwrap();
        assert_eq!(g.quantize(&[0.0]), Some(0));
        assert_eq!(g.quantize(&[0.5]), Some(1));
        assert_eq!(g.quantize(&[1.0]), None);
        assert_eq!(g.quantize(&[-0.01]), None);
    }

    #[test]
    fn periodic_dimension_folds() {
        let g = robot_grid();
        let a = g.quantize(&[1.0, 1.0, 0.1]).unwrap();
        let b = g.quantize(&[1.0, 1.0, 0.1 + TAU]).unwrap();
        let c = g.quantize(&[1.0, 1.0, 0.1 - TAU]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn exact_cell_box_overlaps_only_itself() {
        // A box reconstructed as center ± η/2 must select exactly its own
        // cell despite floating-point noise (stationary dynamics rely on
        // this to produce self-loops only).
        let g = robot_grid();
        for id in [0usize, 17, 313, 4999, 2499] {
            let c = g.center(id);
            let bx: Vec<(f64, f64)> = c
                .iter()
                .zip(g.eta())
                .map(|(&x, &w)| (x - 0.5 * w, x + 0.5 * w))
                .collect();
            let (ids, escapes) = g.cells_overlapping(&bx);
            assert_eq!(ids, vec![id]);
            assert!(!escapes);
        }
    }

    #[test]
    fn interior_box_selects_the_cell_range() {
        let g = AxisGrid::new(&[(0.0, 1.0), (0.0, 1.0)], &[0.25, 0.25], &[false, false]).unwrap();
        // x in [0.3, 0.6) hits cells 1 and 2; y in [0.1, 0.2) hits cell 0.
        let (ids, escapes) = g.cells_overlapping(&[(0.3, 0.6), (0.1, 0.2)]);
        assert_eq!(ids, vec![1, 2]);
        assert!(!escapes);
    }

    #[test]
    fn escaping_boxes_are_flagged() {
        let g = AxisGrid::new(&[(0.0, 1.0)], &[0.25], &[false]).unwrap();
        let (ids, escapes) = g.cells_overlapping(&[(0.9, 1.2)]);
        assert_eq!(ids, vec![3]);
        assert!(escapes);
        let (ids, escapes) = g.cells_overlapping(&[(1.5, 1.7)]);
        assert!(ids.is_empty());
        assert!(escapes);
    }

    #[test]
    fn wrap_box_crossing_zero_splits_into_two_ranges() {
        let g = robot_grid();
        // θ in [-0.2, 0.2) wraps: last θ-cell and first θ-cell.
        let (ids, escapes) = g.cells_overlapping(&[(1.0, 1.2), (1.0, 1.2), (-0.2, 0.2)]);
        assert!(!escapes);
        let theta_cells: std::collections::BTreeSet<usize> =
            ids.iter().map(|id| g.coords(*id)[2]).collect();
        assert_eq!(theta_cells.into_iter().collect::<Vec<_>>(), vec![0, 7]);
    }

    #[test]
    fn wrap_extent_of_a_full_period_selects_all_cells() {
        let g = robot_grid();
        let (ids, _) = g.cells_overlapping(&[(1.0, 1.2), (1.0, 1.2), (0.0, TAU)]);
        let theta_cells: std::collections::BTreeSet<usize> =
            ids.iter().map(|id| g.coords(*id)[2]).collect();
        assert_eq!(theta_cells.len(), 8);
    }

    #[test]
    fn id_coords_round_trip() {
        let g = robot_grid();
        for id in [0usize, 1, 499, 2500, 4999] {
            assert_eq!(g.id(&g.coords(id)), id);
        }
    }
}
