//! Uniform box grids on [-R, R]^N and scalar fields over them.
//!
//! Nodes are laid out row-major with an odd point count per axis so the
//! origin is always a node. Second derivatives use centered differences on
//! the diagonal and the four-point cross stencil off the diagonal (exact on
//! quadratics); drift terms use one-sided differences chosen upwind with
//! respect to the sign of the drift component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::SymMatrix;

/// Hard cap on total node count (~32 MB of f64 per field at the cap).
pub const MAX_NODES: usize = 1 << 22;

pub const MAX_GRID_DIM: usize = 3;

/// Uniform box grid: dimension, points per axis (odd), half-width R.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    radius: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, radius: f64) -> Result<Self> {
        if !(1..=MAX_GRID_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "grid dimension {dim} outside 1..={MAX_GRID_DIM}"
            )));
        }
        if points < 5 || points % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be odd and at least 5, got {points}"
            )));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "grid radius must be positive and finite, got {radius}"
            )));
        }
        let mut nodes: usize = 1;
        for _ in 0..dim {
            nodes = nodes
                .checked_mul(points)
                .filter(|&n| n <= MAX_NODES)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "grid {points}^{dim} exceeds the {MAX_NODES}-node budget"
                    ))
                })?;
        }
        Ok(Grid {
            dim,
            points,
            radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Mesh width h = 2R/(M-1).
    pub fn h(&self) -> f64 {
        2.0 * self.radius / (self.points - 1) as f64
    }

    pub fn node_count(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    /// Stride of axis k in the flat (row-major) layout.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dim - 1 - axis) as u32)
    }

    #[inline]
    pub fn flat_to_multi(&self, flat: usize) -> [usize; MAX_GRID_DIM] {
        let mut idx = [0usize; MAX_GRID_DIM];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rest % self.points;
            rest /= self.points;
        }
        idx
    }

    #[inline]
    pub fn multi_to_flat(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for axis in 0..self.dim {
            flat = flat * self.points + idx[axis];
        }
        flat
    }

    /// Coordinate of node index i along one axis: -R + i h.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.radius + i as f64 * self.h()
    }

    /// Coordinates of a flat node index; only the first `dim` slots are used.
    #[inline]
    pub fn coords(&self, flat: usize) -> [f64; MAX_GRID_DIM] {
        let idx = self.flat_to_multi(flat);
        let mut x = [0.0f64; MAX_GRID_DIM];
        for axis in 0..self.dim {
            x[axis] = self.coord(idx[axis]);
        }
        x
    }

    /// True when every index is strictly inside (has both neighbors).
    #[inline]
    pub fn is_interior(&self, flat: usize) -> bool {
        let idx = self.flat_to_multi(flat);
        (0..self.dim).all(|a| idx[a] >= 1 && idx[a] + 1 < self.points)
    }

    pub fn origin_flat(&self) -> usize {
        let mid = (self.points - 1) / 2;
        let idx = [mid; MAX_GRID_DIM];
        self.multi_to_flat(&idx[..self.dim])
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&f| self.is_interior(f))
    }

    /// |x|^2 of a flat node.
    #[inline]
    pub fn radius_sq(&self, flat: usize) -> f64 {
        let x = self.coords(flat);
        x[..self.dim].iter().map(|v| v * v).sum()
    }
}

/// Boundary handling policy for a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Values on the boundary layer are identically zero.
    DirichletZero,
    /// Boundary values are held at their initial data.
    Frozen,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::DirichletZero => "dirichlet-zero",
            Boundary::Frozen => "frozen",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dirichlet-zero" => Ok(Boundary::DirichletZero),
            "frozen" => Ok(Boundary::Frozen),
            other => Err(Error::Format(format!("unknown boundary policy {other:?}"))),
        }
    }
}

/// Scalar field over a [`Grid`]. Stepping routines only write interior
/// nodes, so the boundary policy is established at construction and
/// preserved thereafter.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: Grid,
    boundary: Boundary,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Grid, boundary: Boundary) -> Self {
        GridField {
            grid,
            boundary,
            values: vec![0.0; grid.node_count()],
        }
    }

    /// Samples `f` at every node. Dirichlet-zero fields get their boundary
    /// layer zeroed regardless of `f`.
    pub fn from_fn(grid: Grid, boundary: Boundary, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut out = Self::zeros(grid, boundary);
        for flat in 0..grid.node_count() {
            let x = grid.coords(flat);
            out.values[flat] = f(&x[..grid.dim()]);
        }
        if boundary == Boundary::DirichletZero {
            out.zero_boundary();
        }
        out
    }

    /// Wraps raw values (row-major node order). Errors on length mismatch or
    /// a dirichlet-zero boundary that is not identically zero.
    pub fn from_values(grid: Grid, boundary: Boundary, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        let field = GridField {
            grid,
            boundary,
            values,
        };
        if boundary == Boundary::DirichletZero {
            for flat in 0..grid.node_count() {
                if !grid.is_interior(flat) && field.values[flat] != 0.0 {
                    return Err(Error::InvalidArgument(
                        "dirichlet-zero field has nonzero boundary values".into(),
                    ));
                }
            }
        }
        Ok(field)
    }

    fn zero_boundary(&mut self) {
        for flat in 0..self.grid.node_count() {
            if !self.grid.is_interior(flat) {
                self.values[flat] = 0.0;
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn value(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn min_interior(&self) -> f64 {
        self.grid
            .interior_nodes()
            .map(|f| self.values[f])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Hessian at an interior node: centered second differences on the
    /// diagonal, four-point cross differences off it. Exact on quadratics.
    pub fn hessian_at(&self, flat: usize) -> Result<SymMatrix> {
        if !self.grid.is_interior(flat) {
            return Err(Error::InvalidArgument(format!(
                "hessian requested at non-interior node {flat}"
            )));
        }
        Ok(self.hessian_unchecked(flat))
    }

    /// Hessian without the interior check, for stepping loops.
    #[inline]
    pub fn hessian_unchecked(&self, flat: usize) -> SymMatrix {
        let dim = self.grid.dim();
        let h = self.grid.h();
        let h2 = h * h;
        let mut m = SymMatrix::zeros(dim);
        let center = self.values[flat];
        for a in 0..dim {
            let sa = self.grid.stride(a);
            let plus = self.values[flat + sa];
            let minus = self.values[flat - sa];
            m.set(a, a, (plus - 2.0 * center + minus) / h2);
            for b in (a + 1)..dim {
                let sb = self.grid.stride(b);
                let pp = self.values[flat + sa + sb];
                let mm = self.values[flat - sa - sb];
                let pm = self.values[flat + sa - sb];
                let mp = self.values[flat - sa + sb];
                m.set(a, b, (pp + mm - pm - mp) / (4.0 * h2));
            }
        }
        m
    }

    /// drift . Df with one-sided differences: forward difference where the
    /// drift component is positive, backward where negative. With updates of
    /// the form w += dt * (drift . Dw + ...) this is the monotone choice.
    pub fn gradient_upwind_at(&self, flat: usize, drift: &[f64]) -> Result<f64> {
        if !self.grid.is_interior(flat) {
            return Err(Error::InvalidArgument(format!(
                "upwind gradient requested at non-interior node {flat}"
            )));
        }
        if drift.len() != self.grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.dim(),
                got: drift.len(),
            });
        }
        Ok(self.gradient_upwind_unchecked(flat, drift))
    }

    #[inline]
    pub fn gradient_upwind_unchecked(&self, flat: usize, drift: &[f64]) -> f64 {
        let h = self.grid.h();
        let center = self.values[flat];
        let mut acc = 0.0;
        for (a, &d) in drift.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let s = self.grid.stride(a);
            let diff = if d > 0.0 {
                (self.values[flat + s] - center) / h
            } else {
                (center - self.values[flat - s]) / h
            };
            acc += d * diff;
        }
        acc
    }

    /// Tensor-product cubic Lagrange interpolation. Returns None outside the
    /// box. Queries landing on a node (within 1e-9 h per axis) return the
    /// stored value bitwise.
    pub fn value_at(&self, x: &[f64]) -> Option<f64> {
        let grid = &self.grid;
        let dim = grid.dim();
        debug_assert_eq!(x.len(), dim);
        let h = grid.h();
        let r = grid.radius();
        let m = grid.points();

        let mut node_idx = [0usize; MAX_GRID_DIM];
        let mut all_nodes = true;
        for a in 0..dim {
            if x[a].abs() > r * (1.0 + 1e-12) + 1e-12 {
                return None;
            }
            let u = (x[a] + r) / h;
            let rounded = u.round();
            if (u - rounded).abs() <= 1e-9 {
                node_idx[a] = (rounded as isize).clamp(0, (m - 1) as isize) as usize;
            } else {
                all_nodes = false;
            }
        }
        if all_nodes {
            return Some(self.values[grid.multi_to_flat(&node_idx[..dim])]);
        }

        // Four-point stencil per axis, clamped at the box edges.
        let mut starts = [0usize; MAX_GRID_DIM];
        let mut weights = [[0.0f64; 4]; MAX_GRID_DIM];
        for a in 0..dim {
            let u = (x[a] + r) / h;
            let cell = (u.floor() as isize).clamp(0, (m - 2) as isize);
            let start = (cell - 1).clamp(0, (m - 4) as isize) as usize;
            starts[a] = start;
            let t = u - start as f64; // position in stencil units, ~[1, 2]
            for (k, w) in weights[a].iter_mut().enumerate() {
                let mut prod = 1.0;
                for l in 0..4 {
                    if l != k {
                        prod *= (t - l as f64) / (k as f64 - l as f64);
                    }
                }
                *w = prod;
            }
        }

        let mut acc = 0.0;
        let mut offsets = [0usize; MAX_GRID_DIM];
        loop {
            let mut w = 1.0;
            let mut idx = [0usize; MAX_GRID_DIM];
            for a in 0..dim {
                w *= weights[a][offsets[a]];
                idx[a] = starts[a] + offsets[a];
            }
            acc += w * self.values[grid.multi_to_flat(&idx[..dim])];
            // Advance the mixed-radix offset counter.
            let mut axis = 0;
            loop {
                if axis == dim {
                    return Some(acc);
                }
                offsets[axis] += 1;
                if offsets[axis] < 4 {
                    break;
                }
                offsets[axis] = 0;
                axis += 1;
            }
        }
    }
}

/// Max |a - b| over all nodes. Errors when the grids differ.
pub fn sup_distance(a: &GridField, b: &GridField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::MeshMismatch(
            "sup_distance requires identical grids".into(),
        ));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

/// Max f/g over interior nodes where g >= floor. Errors when no node
/// qualifies or the grids differ.
pub fn sup_ratio(f: &GridField, g: &GridField, floor: f64) -> Result<f64> {
    sup_ratio_within(f, g, floor, f64::INFINITY)
}

/// [`sup_ratio`] restricted to nodes with |x| <= max_radius.
pub fn sup_ratio_within(
    f: &GridField,
    g: &GridField,
    floor: f64,
    max_radius: f64,
) -> Result<f64> {
    if f.grid != g.grid {
        return Err(Error::MeshMismatch(
            "sup_ratio requires identical grids".into(),
        ));
    }
    if !(floor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ratio floor must be positive, got {floor}"
        )));
    }
    let r2 = max_radius * max_radius;
    let mut best: Option<f64> = None;
    for flat in f.grid.interior_nodes() {
        if f.grid.radius_sq(flat) > r2 {
            continue;
        }
        let den = g.values[flat];
        if den >= floor {
            let ratio = f.values[flat] / den;
            best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
        }
    }
    best.ok_or_else(|| {
        Error::DegenerateRatio(format!(
            "no interior node has denominator >= {floor} within radius {max_radius}"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = Grid::new(2, 5, 2.0).unwrap();
        assert_eq!(g.h(), 1.0);
        assert_eq!(g.node_count(), 25);
        let origin = g.origin_flat();
        let x = g.coords(origin);
        assert_eq!(&x[..2], &[0.0, 0.0]);
        assert!(g.is_interior(origin));
        assert!(!g.is_interior(0));
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid::new(0, 5, 1.0).is_err());
        assert!(Grid::new(4, 5, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(1, 3, 1.0).is_err());
        assert!(Grid::new(1, 5, 0.0).is_err());
        assert!(Grid::new(1, 5, f64::NAN).is_err());
        assert!(Grid::new(3, 401, 1.0).is_err()); // 401^3 over budget
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new(3, 7, 1.0).unwrap();
        for flat in 0..g.node_count() {
            let idx = g.flat_to_multi(flat);
            assert_eq!(g.multi_to_flat(&idx[..3]), flat);
        }
    }

    #[test]
    fn hessian_exact_on_quadratics() {
        // f(x) = x0^2 + 3 x0 x1 - 2 x1^2 has constant Hessian.
        let g = Grid::new(2, 9, 2.0).unwrap();
        let f = GridField::from_fn(g, Boundary::Frozen, |x| {
            x[0] * x[0] + 3.0 * x[0] * x[1] - 2.0 * x[1] * x[1]
        });
        for flat in g.interior_nodes() {
            let hess = f.hessian_at(flat).unwrap();
            assert!((hess.get(0, 0) - 2.0).abs() < 1e-11);
            assert!((hess.get(0, 1) - 3.0).abs() < 1e-11);
            assert!((hess.get(1, 1) + 4.0).abs() < 1e-11);
        }
    }

    #[test]
    fn hessian_rejects_boundary_nodes() {
        let g = Grid::new(1, 5, 1.0).unwrap();
        let f = GridField::zeros(g, Boundary::DirichletZero);
        assert!(f.hessian_at(0).is_err());
        assert!(f.hessian_at(4).is_err());
        assert!(f.hessian_at(2).is_ok());
    }

    #[test]
    fn upwind_gradient_linear_exact_and_quadratic_first_order() {
        let g = Grid::new(1, 41, 4.0).unwrap();
        let lin = GridField::from_fn(g, Boundary::Frozen, |x| 3.0 * x[0]);
        for flat in g.interior_nodes() {
            let v = lin.gradient_upwind_at(flat, &[0.5]).unwrap();
            assert!((v - 1.5).abs() < 1e-12);
            let v = lin.gradient_upwind_at(flat, &[-0.5]).unwrap();
            assert!((v + 1.5).abs() < 1e-12);
        }
        // f = |x|^2/2 with drift -x/2: exact value -|x|^2/2, error O(h).
        let quad = GridField::from_fn(g, Boundary::Frozen, |x| 0.5 * x[0] * x[0]);
        let h = g.h();
        for flat in g.interior_nodes() {
            let x = g.coords(flat)[0];
            let v = quad.gradient_upwind_at(flat, &[-0.5 * x]).unwrap();
            let exact = -0.5 * x * x;
            assert!(
                (v - exact).abs() <= 0.5 * x.abs() * h * 0.5 + 1e-12,
                "upwind error too large at x={x}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn dirichlet_zero_boundary_enforced() {
        let g = Grid::new(1, 7, 3.0).unwrap();
        let f = GridField::from_fn(g, Boundary::DirichletZero, |_| 1.0);
        assert_eq!(f.value(0), 0.0);
        assert_eq!(f.value(6), 0.0);
        assert_eq!(f.value(3), 1.0);
        let bad = GridField::from_values(g, Boundary::DirichletZero, vec![1.0; 7]);
        assert!(bad.is_err());
    }

    #[test]
    fn interpolation_reproduces_nodes_bitwise_and_cubics_exactly() {
        let g = Grid::new(1, 21, 2.0).unwrap();
        let f = GridField::from_fn(g, Boundary::Frozen, |x| {
            0.3 + 1.7 * x[0] - 0.4 * x[0] * x[0] + 0.09 * x[0] * x[0] * x[0]
        });
        for flat in 0..g.node_count() {
            let x = g.coords(flat);
            let v = f.value_at(&x[..1]).unwrap();
            assert_eq!(v.to_bits(), f.value(flat).to_bits());
        }
        // Off-node queries reproduce the cubic exactly (up to rounding).
        for k in 0..40 {
            let x = -1.9 + 0.097 * k as f64;
            let exact = 0.3 + 1.7 * x - 0.4 * x * x + 0.09 * x * x * x;
            let v = f.value_at(&[x]).unwrap();
            assert!((v - exact).abs() < 1e-12, "cubic interp off at {x}");
        }
        assert!(f.value_at(&[2.5]).is_none());
    }

    #[test]
    fn sup_ratio_floor_and_window() {
        let g = Grid::new(1, 9, 4.0).unwrap();
        let f = GridField::from_fn(g, Boundary::Frozen, |x| 2.0 * (-x[0] * x[0]).exp());
        let gfield = GridField::from_fn(g, Boundary::Frozen, |x| (-x[0] * x[0]).exp());
        let r = sup_ratio(&f, &gfield, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        // Floor excludes every node -> degenerate.
        assert!(matches!(
            sup_ratio(&f, &gfield, 1e3),
            Err(Error::DegenerateRatio(_))
        ));
        assert!(sup_ratio_within(&f, &gfield, 1e-12, 2.0).is_ok());
    }
}
