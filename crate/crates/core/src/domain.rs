//! Uniform box grids, domain masks and grid functions.
//!
//! A [`BoxGrid`] covers `(−L, L)^dim` with `N` interior nodes per axis and
//! step `h = 2L/(N+1)`; node `i` of an axis sits at `h·(2i + 1 − N)/2`, so two
//! grids with the same step and the same parity of `N` share their nodes.
//! That alignment is what lets functions move between a domain, its dilates
//! and a larger embedding box without interpolation.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Node cap per axis used by [`SubDomain::dilate`].
pub const DEFAULT_MAX_NODES_PER_AXIS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid<T> {
    dim: usize,
    halfwidth: T,
    nodes_per_axis: usize,
    step: T,
}

impl<T: Real> BoxGrid<T> {
    /// `dim ∈ {1, 2}`, `halfwidth > 0`, `nodes_per_axis ≥ 1`.
    pub fn new(dim: usize, halfwidth: T, nodes_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid("dim", format!("must be 1 or 2, got {dim}")));
        }
        if !(halfwidth > T::zero()) || !halfwidth.is_finite() {
            return Err(invalid(
                "halfwidth",
                format!("must be positive, got {halfwidth}"),
            ));
        }
        if nodes_per_axis == 0 {
            return Err(invalid("nodes_per_axis", "must be at least 1"));
        }
        let step = T::lit(2.0) * halfwidth / T::from_usize_lossy(nodes_per_axis + 1);
        Ok(Self {
            dim,
            halfwidth,
            nodes_per_axis,
            step,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn halfwidth(&self) -> T {
        self.halfwidth
    }

    #[inline]
    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    #[inline]
    pub fn step(&self) -> T {
        self.step
    }

    /// `h^dim`, the quadrature weight of one node.
    pub fn cell_volume(&self) -> T {
        self.step.powi(self.dim as i32)
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis.pow(self.dim as u32)
    }

    /// Coordinate of node `i` along one axis.
    #[inline]
    pub fn axis_coord(&self, i: usize) -> T {
        let twice = T::from_usize_lossy(2 * i + 1) - T::from_usize_lossy(self.nodes_per_axis);
        self.step * twice / T::lit(2.0)
    }

    /// Per-axis indices of a flat node index (x fastest).
    #[inline]
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.nodes_per_axis, idx / self.nodes_per_axis]
        }
    }

    #[inline]
    pub fn flat_index(&self, axes: [usize; 2]) -> usize {
        if self.dim == 1 {
            axes[0]
        } else {
            axes[0] + self.nodes_per_axis * axes[1]
        }
    }

    /// Coordinates of a node; the second entry is zero in 1D.
    pub fn point(&self, idx: usize) -> [T; 2] {
        let [i, j] = self.axes(idx);
        if self.dim == 1 {
            [self.axis_coord(i), T::zero()]
        } else {
            [self.axis_coord(i), self.axis_coord(j)]
        }
    }

    /// Same step, `extra` more nodes on each side of every axis.
    pub fn grown_by(&self, extra: usize) -> Self {
        let nodes = self.nodes_per_axis + 2 * extra;
        Self {
            dim: self.dim,
            halfwidth: self.step * T::from_usize_lossy(nodes + 1) / T::lit(2.0),
            nodes_per_axis: nodes,
            step: self.step,
        }
    }

    /// Per-axis index shift that maps this grid's nodes into `larger`, when
    /// the two lattices are aligned and `larger` contains this grid.
    pub fn offset_in(&self, larger: &Self) -> Result<usize> {
        if self.dim != larger.dim {
            return Err(Error::GridMismatch(format!(
                "dimension {} vs {}",
                self.dim, larger.dim
            )));
        }
        let rel = ((self.step - larger.step) / larger.step).abs();
        if rel > T::lit(1e-12) {
            return Err(Error::GridMismatch(format!(
                "step {} vs {}",
                self.step, larger.step
            )));
        }
        if larger.nodes_per_axis < self.nodes_per_axis
            || !(larger.nodes_per_axis - self.nodes_per_axis).is_multiple_of(2)
        {
            return Err(Error::GridMismatch(format!(
                "{} nodes per axis cannot be centered in {}",
                self.nodes_per_axis, larger.nodes_per_axis
            )));
        }
        Ok((larger.nodes_per_axis - self.nodes_per_axis) / 2)
    }

    /// Flat index in `larger` of node `idx` of this grid.
    pub fn map_index(&self, idx: usize, offset: usize, larger: &Self) -> usize {
        let [i, j] = self.axes(idx);
        if self.dim == 1 {
            larger.flat_index([i + offset, 0])
        } else {
            larger.flat_index([i + offset, j + offset])
        }
    }
}

/// Built-in domain shapes, all centered at the origin except `Interval`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape<T> {
    /// Open interval `(a, b)`; 1D only.
    Interval { a: T, b: T },
    /// Open centered cube of the given side.
    Square { side: T },
    /// Centered square of the given side with its open upper-right quadrant removed; 2D only.
    LShape { side: T },
    /// Open centered ball.
    Disk { radius: T },
    /// Mask supplied node by node.
    Custom,
}

impl<T: Real> Shape<T> {
    pub fn tag(&self) -> &'static str {
        match self {
            Shape::Interval { .. } => "interval",
            Shape::Square { .. } => "square",
            Shape::LShape { .. } => "lshape",
            Shape::Disk { .. } => "disk",
            Shape::Custom => "custom",
        }
    }

    pub fn contains(&self, p: [T; 2], dim: usize) -> bool {
        let [x, y] = p;
        match *self {
            Shape::Interval { a, b } => a < x && x < b,
            Shape::Square { side } => {
                let r = side / T::lit(2.0);
                x.abs() < r && (dim == 1 || y.abs() < r)
            }
            Shape::LShape { side } => {
                let r = side / T::lit(2.0);
                x.abs() < r && y.abs() < r && !(x >= T::zero() && y >= T::zero())
            }
            Shape::Disk { radius } => x * x + y * y < radius * radius,
            Shape::Custom => false,
        }
    }

    /// Largest coordinate magnitude the shape reaches along any axis.
    pub fn extent(&self) -> T {
        match *self {
            Shape::Interval { a, b } => a.abs().max(b.abs()),
            Shape::Square { side } | Shape::LShape { side } => side / T::lit(2.0),
            Shape::Disk { radius } => radius,
            Shape::Custom => T::zero(),
        }
    }

    /// The image of the shape under `x ↦ αx`.
    pub fn scaled(&self, alpha: T) -> Self {
        match *self {
            Shape::Interval { a, b } => Shape::Interval {
                a: a * alpha,
                b: b * alpha,
            },
            Shape::Square { side } => Shape::Square { side: side * alpha },
            Shape::LShape { side } => Shape::LShape { side: side * alpha },
            Shape::Disk { radius } => Shape::Disk {
                radius: radius * alpha,
            },
            Shape::Custom => Shape::Custom,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let bad = |reason: String| Err(invalid("shape", reason));
        match *self {
            Shape::Interval { a, b } => {
                if dim != 1 {
                    return bad("interval requires dim = 1".into());
                }
                if !(a < b) {
                    return bad(format!(
                        "interval endpoints must satisfy a < b, got ({a}, {b})"
                    ));
                }
            }
            Shape::LShape { .. } if dim != 2 => return bad("lshape requires dim = 2".into()),
            Shape::Square { side } | Shape::LShape { side } if side < T::zero() => {
                return bad(format!("side must be nonnegative, got {side}"))
            }
            Shape::Disk { radius } if radius < T::zero() => {
                return bad(format!("radius must be nonnegative, got {radius}"))
            }
            _ => {}
        }
        Ok(())
    }
}

impl<T: Real> fmt::Display for Shape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Interval { a, b } => write!(f, "interval:{a},{b}"),
            Shape::Square { side } => write!(f, "square:{side}"),
            Shape::LShape { side } => write!(f, "lshape:{side}"),
            Shape::Disk { radius } => write!(f, "disk:{radius}"),
            Shape::Custom => write!(f, "custom"),
        }
    }
}

impl<T: Real> FromStr for Shape<T> {
    type Err = Error;

    /// Parses `interval:a,b`, `square:side`, `lshape:side` or `disk:r`.
    fn from_str(spec: &str) -> Result<Self> {
        let (kind, args) = spec
            .split_once(':')
            .ok_or_else(|| invalid("shape", format!("expected `kind:params`, got `{spec}`")))?;
        let nums = args
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| invalid("shape", format!("bad number `{t}` in `{spec}`")))
            })
            .collect::<Result<Vec<T>>>()?;
        let want = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(invalid(
                    "shape",
                    format!("`{kind}` takes {k} parameter(s), got {}", nums.len()),
                ))
            }
        };
        match kind.trim() {
            "interval" => {
                want(2)?;
                Ok(Shape::Interval {
                    a: nums[0],
                    b: nums[1],
                })
            }
            "square" => {
                want(1)?;
                Ok(Shape::Square { side: nums[0] })
            }
            "lshape" => {
                want(1)?;
                Ok(Shape::LShape { side: nums[0] })
            }
            "disk" => {
                want(1)?;
                Ok(Shape::Disk { radius: nums[0] })
            }
            other => Err(invalid("shape", format!("unknown shape `{other}`"))),
        }
    }
}

/// A node mask selecting the domain Ω inside a box grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SubDomain<T> {
    grid: BoxGrid<T>,
    mask: Vec<bool>,
    indices: Vec<usize>,
    shape: Shape<T>,
}

impl<T: Real> SubDomain<T> {
    /// Masks the nodes lying strictly inside `shape`. The shape may touch
    /// the box boundary but not cross it.
    pub fn from_shape(grid: BoxGrid<T>, shape: Shape<T>) -> Result<Self> {
        if matches!(shape, Shape::Custom) {
            return Err(invalid("shape", "custom shapes need an explicit mask"));
        }
        shape.validate(grid.dim())?;
        let extent = shape.extent();
        if extent > grid.halfwidth() * (T::one() + T::lit(1e-12)) {
            return Err(Error::ShapeOutsideBox(format!(
                "{shape} reaches {extent}, box halfwidth is {}",
                grid.halfwidth()
            )));
        }
        let mask: Vec<bool> = (0..grid.node_count())
            .map(|idx| shape.contains(grid.point(idx), grid.dim()))
            .collect();
        Self::build(grid, mask, shape)
    }

    /// Arbitrary mask; a disconnected mask is accepted with a warning.
    pub fn from_mask(grid: BoxGrid<T>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.node_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.node_count(),
                actual: mask.len(),
            });
        }
        let domain = Self::build(grid, mask, Shape::Custom)?;
        if !domain.is_connected() {
            log::warn!(
                "custom mask with {} nodes is not connected as a grid graph",
                domain.len()
            );
        }
        Ok(domain)
    }

    /// The whole box interior.
    pub fn full(grid: BoxGrid<T>) -> Self {
        let n = grid.node_count();
        let side = T::lit(2.0) * grid.halfwidth();
        Self {
            grid,
            mask: vec![true; n],
            indices: (0..n).collect(),
            shape: Shape::Square { side },
        }
    }

    fn build(grid: BoxGrid<T>, mask: Vec<bool>, shape: Shape<T>) -> Result<Self> {
        let indices: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        if indices.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(Self {
            grid,
            mask,
            indices,
            shape,
        })
    }

    pub fn grid(&self) -> &BoxGrid<T> {
        &self.grid
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Grid indices of the masked nodes, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains_node(&self, idx: usize) -> bool {
        self.mask.get(idx).copied().unwrap_or(false)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.grid.node_count()
    }

    /// True when both masks live on the same grid and every node of `self`
    /// is in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.grid == other.grid && self.indices.iter().all(|&i| other.mask[i])
    }

    pub fn is_connected(&self) -> bool {
        let n = self.grid.nodes_per_axis();
        let mut seen = vec![false; self.mask.len()];
        let mut queue = VecDeque::from([self.indices[0]]);
        seen[self.indices[0]] = true;
        let mut count = 0;
        while let Some(idx) = queue.pop_front() {
            count += 1;
            let [i, j] = self.grid.axes(idx);
            let mut visit = |a: usize, b: usize| {
                let k = self.grid.flat_index([a, b]);
                if self.mask[k] && !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < n {
                visit(i + 1, j);
            }
            if self.grid.dim() == 2 {
                if j > 0 {
                    visit(i, j - 1);
                }
                if j + 1 < n {
                    visit(i, j + 1);
                }
            }
        }
        count == self.len()
    }

    /// Zero-extension of values given on the masked nodes to the whole grid.
    pub fn extend_by_zero(&self, u: &[T]) -> Result<GridFunction<T>> {
        if u.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: u.len(),
            });
        }
        let mut values = vec![T::zero(); self.grid.node_count()];
        for (&idx, &v) in self.indices.iter().zip(u) {
            values[idx] = v;
        }
        GridFunction::new(self.grid, values)
    }

    /// Values of `v` on the masked nodes.
    pub fn restrict(&self, v: &GridFunction<T>) -> Result<Vec<T>> {
        if v.grid() != &self.grid {
            return Err(Error::GridMismatch(
                "grid function and domain live on different grids".into(),
            ));
        }
        Ok(self.indices.iter().map(|&i| v.values()[i]).collect())
    }

    /// The same node set on an aligned grid that contains this one.
    pub fn transfer_to(&self, grid: &BoxGrid<T>) -> Result<Self> {
        let offset = self.grid.offset_in(grid)?;
        let mut mask = vec![false; grid.node_count()];
        for &idx in &self.indices {
            mask[self.grid.map_index(idx, offset, grid)] = true;
        }
        Self::build(*grid, mask, self.shape)
    }

    /// `αΩ` at the same step, on the default node cap.
    pub fn dilate(&self, alpha: T) -> Result<Self> {
        self.dilate_within(alpha, DEFAULT_MAX_NODES_PER_AXIS)
    }

    /// `αΩ = {αx : x ∈ Ω}` for `α ≥ 1`. The grid step is kept; the box is
    /// grown (symmetrically, preserving node alignment) when `αΩ` plus a
    /// one-step margin no longer fits.
    pub fn dilate_within(&self, alpha: T, max_nodes_per_axis: usize) -> Result<Self> {
        if !(alpha >= T::one()) || !alpha.is_finite() {
            return Err(invalid(
                "alpha",
                format!("dilation factor must be ≥ 1, got {alpha}"),
            ));
        }
        if matches!(self.shape, Shape::Custom) {
            return Err(invalid("shape", "custom masks cannot be dilated"));
        }
        let shape = self.shape.scaled(alpha);
        let h = self.grid.step();
        let needed = shape.extent() + h;
        let mut grid = self.grid;
        if needed > grid.halfwidth() {
            let extra = ((needed - grid.halfwidth()) / h)
                .ceil()
                .to_usize()
                .unwrap_or(usize::MAX);
            let nodes = grid
                .nodes_per_axis()
                .saturating_add(extra.saturating_mul(2));
            if nodes > max_nodes_per_axis {
                return Err(Error::CapacityExceeded {
                    needed: nodes,
                    limit: max_nodes_per_axis,
                });
            }
            grid = grid.grown_by(extra);
        }
        Self::from_shape(grid, shape)
    }
}

/// Real values on every interior node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: BoxGrid<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: BoxGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.node_count(),
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: BoxGrid<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.node_count()],
            grid,
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: BoxGrid<T>, f: impl Fn([T; 2]) -> T) -> Result<Self> {
        let values = (0..grid.node_count()).map(|i| f(grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &BoxGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// First node outside `domain` carrying a nonzero value.
    pub fn support_violation(&self, domain: &SubDomain<T>) -> Option<(usize, T)> {
        if domain.grid() != &self.grid {
            return self
                .values
                .iter()
                .position(|v| *v != T::zero())
                .map(|i| (i, self.values[i]));
        }
        self.values
            .iter()
            .enumerate()
            .find(|(i, v)| !domain.contains_node(*i) && **v != T::zero())
            .map(|(i, v)| (i, *v))
    }

    /// Zero-padding onto an aligned grid containing this one.
    pub fn transfer_to(&self, grid: &BoxGrid<T>) -> Result<Self> {
        let offset = self.grid.offset_in(grid)?;
        let mut values = vec![T::zero(); grid.node_count()];
        for (idx, &v) in self.values.iter().enumerate() {
            values[self.grid.map_index(idx, offset, grid)] = v;
        }
        Self::new(*grid, values)
    }
}
