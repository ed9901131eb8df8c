//! Dense complex tensors over a complexified frame.
//!
//! Axes carry a label: a holomorphic axis and an antiholomorphic axis both have
//! `n` slots, a full frame axis has `2n` slots ordered `Z_1..Z_n, Z̄_1..Z̄_n`.

use crate::{HermError, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexKind {
    Holomorphic,
    Antiholomorphic,
}

/// A frame label such as `i` or `j̄`. Positions are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameIndex {
    pub kind: IndexKind,
    pub position: usize,
}

impl FrameIndex {
    pub fn new(kind: IndexKind, position: usize, n: usize) -> Result<Self> {
        if position == 0 || position > n {
            return Err(HermError::Shape(format!(
                "frame position {position} outside 1..={n}"
            )));
        }
        Ok(FrameIndex { kind, position })
    }

    pub fn hol(position: usize) -> Self {
        FrameIndex {
            kind: IndexKind::Holomorphic,
            position,
        }
    }

    pub fn anti(position: usize) -> Self {
        FrameIndex {
            kind: IndexKind::Antiholomorphic,
            position,
        }
    }

    /// Slot in a full frame axis of size `2n`.
    pub fn slot(self, n: usize) -> usize {
        match self.kind {
            IndexKind::Holomorphic => self.position - 1,
            IndexKind::Antiholomorphic => n + self.position - 1,
        }
    }

    pub fn from_slot(slot: usize, n: usize) -> Self {
        if slot < n {
            FrameIndex::hol(slot + 1)
        } else {
            FrameIndex::anti(slot - n + 1)
        }
    }

    pub fn conj(self) -> Self {
        let kind = match self.kind {
            IndexKind::Holomorphic => IndexKind::Antiholomorphic,
            IndexKind::Antiholomorphic => IndexKind::Holomorphic,
        };
        FrameIndex { kind, ..self }
    }

    pub fn is_holomorphic(self) -> bool {
        self.kind == IndexKind::Holomorphic
    }
}

impl std::fmt::Display for FrameIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            IndexKind::Holomorphic => write!(f, "{}", self.position),
            IndexKind::Antiholomorphic => write!(f, "{}̄", self.position),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisKind {
    Holomorphic,
    Antiholomorphic,
    /// Full complexified frame, `2n` slots.
    Frame,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub size: usize,
}

impl Axis {
    pub fn hol(n: usize) -> Self {
        Axis {
            kind: AxisKind::Holomorphic,
            size: n,
        }
    }
    pub fn anti(n: usize) -> Self {
        Axis {
            kind: AxisKind::Antiholomorphic,
            size: n,
        }
    }
    pub fn frame(n: usize) -> Self {
        Axis {
            kind: AxisKind::Frame,
            size: 2 * n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexTensor {
    axes: Vec<Axis>,
    data: Vec<C64>,
}

/// Odometer over all index tuples of the given sizes, last axis fastest.
pub struct MultiIndex {
    sizes: Vec<usize>,
    cur: Vec<usize>,
    done: bool,
}

impl MultiIndex {
    pub fn new(sizes: &[usize]) -> Self {
        MultiIndex {
            sizes: sizes.to_vec(),
            cur: vec![0; sizes.len()],
            done: sizes.iter().any(|&s| s == 0),
        }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut k = self.sizes.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cur[k] += 1;
            if self.cur[k] < self.sizes[k] {
                break;
            }
            self.cur[k] = 0;
        }
        Some(out)
    }
}

impl ComplexTensor {
    pub fn zeros(axes: Vec<Axis>) -> Self {
        let len = axes.iter().map(|a| a.size).product();
        ComplexTensor {
            axes,
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn(axes: Vec<Axis>, mut f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        let sizes: Vec<usize> = axes.iter().map(|a| a.size).collect();
        let data = MultiIndex::new(&sizes).map(|ix| f(&ix)).collect();
        ComplexTensor { axes, data }.finite("from_fn")
    }

    pub fn from_data(axes: Vec<Axis>, data: Vec<C64>) -> Result<Self> {
        let len: usize = axes.iter().map(|a| a.size).product();
        if len != data.len() {
            return Err(HermError::Shape(format!(
                "{} entries for axes of total size {len}",
                data.len()
            )));
        }
        ComplexTensor { axes, data }.finite("from_data")
    }

    /// δ between two axes of equal size.
    pub fn identity(a: Axis, b: Axis) -> Result<Self> {
        if a.size != b.size {
            return Err(HermError::DimensionMismatch {
                axis1: 0,
                axis2: 1,
                size1: a.size,
                size2: b.size,
            });
        }
        ComplexTensor::from_fn(vec![a, b], |ix| {
            if ix[0] == ix[1] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    fn finite(self, op: &str) -> Result<Self> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(self)
        } else {
            Err(HermError::NonFinite(op.to_string()))
        }
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.size).collect()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn offset(&self, ix: &[usize]) -> usize {
        debug_assert_eq!(ix.len(), self.axes.len());
        let mut off = 0;
        for (k, a) in self.axes.iter().enumerate() {
            debug_assert!(ix[k] < a.size);
            off = off * a.size + ix[k];
        }
        off
    }

    pub fn get(&self, ix: &[usize]) -> C64 {
        self.data[self.offset(ix)]
    }

    pub fn set(&mut self, ix: &[usize], v: C64) {
        let o = self.offset(ix);
        self.data[o] = v;
    }

    pub fn indices(&self) -> MultiIndex {
        MultiIndex::new(&self.dims())
    }

    pub fn scale(&self, s: C64) -> Result<Self> {
        ComplexTensor {
            axes: self.axes.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
        }
        .finite("scale")
    }

    pub fn conj(&self) -> Self {
        ComplexTensor {
            axes: self.axes.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(HermError::Shape(format!(
                "shapes {:?} and {:?} differ",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        ComplexTensor {
            axes: self.axes.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
        .finite("add")
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        ComplexTensor {
            axes: self.axes.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
        .finite("sub")
    }

    /// Reorder axes: result axis `k` is input axis `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if order.len() != r || order.iter().any(|&o| o >= r || std::mem::replace(&mut seen[o], true)) {
            return Err(HermError::Shape(format!("bad permutation {order:?}")));
        }
        let axes: Vec<Axis> = order.iter().map(|&o| self.axes[o]).collect();
        let mut src = vec![0; r];
        ComplexTensor::from_fn(axes, |ix| {
            for k in 0..r {
                src[order[k]] = ix[k];
            }
            self.get(&src)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|entry|` over index tuples accepted by `selector`; 0 for an empty selection.
    pub fn max_abs_component(&self, selector: impl Fn(&[usize]) -> bool) -> f64 {
        max_abs_component(self, selector)
    }

    /// Index tuple and value of the largest selected entry.
    pub fn argmax_abs(&self, selector: impl Fn(&[usize]) -> bool) -> Option<(Vec<usize>, C64)> {
        let mut best: Option<(Vec<usize>, C64)> = None;
        for (ix, v) in self.indices().zip(self.data.iter()) {
            if selector(&ix) && best.as_ref().map_or(true, |(_, b)| v.norm() > b.norm()) {
                best = Some((ix, *v));
            }
        }
        best
    }
}

pub fn max_abs_component(t: &ComplexTensor, selector: impl Fn(&[usize]) -> bool) -> f64 {
    t.indices()
        .zip(t.data.iter())
        .filter(|(ix, _)| selector(ix))
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max)
}

/// Einstein contraction of `t1` and `t2` over `pairs` of (axis of t1, axis of t2).
///
/// With `metric_inverse` (a rank-2 tensor `M`), each pair is joined through it:
/// `Σ t1[..p..] M[p,q] t2[..q..]`. Result axes: surviving axes of `t1`, then of `t2`.
pub fn contract(
    t1: &ComplexTensor,
    t2: &ComplexTensor,
    pairs: &[(usize, usize)],
    metric_inverse: Option<&ComplexTensor>,
) -> Result<ComplexTensor> {
    for &(a, b) in pairs {
        if a >= t1.rank() || b >= t2.rank() {
            return Err(HermError::Shape(format!(
                "pair ({a},{b}) out of range for ranks {} and {}",
                t1.rank(),
                t2.rank()
            )));
        }
        let (sa, sb) = (t1.axes[a].size, t2.axes[b].size);
        match metric_inverse {
            None if sa != sb => {
                return Err(HermError::DimensionMismatch {
                    axis1: a,
                    axis2: b,
                    size1: sa,
                    size2: sb,
                })
            }
            Some(m) => {
                if m.rank() != 2 || m.axes[0].size != sa || m.axes[1].size != sb {
                    return Err(HermError::DimensionMismatch {
                        axis1: a,
                        axis2: b,
                        size1: sa,
                        size2: sb,
                    });
                }
            }
            _ => {}
        }
    }
    let free1: Vec<usize> = (0..t1.rank()).filter(|k| !pairs.iter().any(|p| p.0 == *k)).collect();
    let free2: Vec<usize> = (0..t2.rank()).filter(|k| !pairs.iter().any(|p| p.1 == *k)).collect();
    let mut axes: Vec<Axis> = free1.iter().map(|&k| t1.axes[k]).collect();
    axes.extend(free2.iter().map(|&k| t2.axes[k]));

    // summed indices: p for t1 side, q for t2 side (q = p without a metric)
    let mut sum_sizes: Vec<usize> = pairs.iter().map(|&(a, _)| t1.axes[a].size).collect();
    if metric_inverse.is_some() {
        sum_sizes.extend(pairs.iter().map(|&(_, b)| t2.axes[b].size));
    }
    let np = pairs.len();
    let mut i1 = vec![0; t1.rank()];
    let mut i2 = vec![0; t2.rank()];
    ComplexTensor::from_fn(axes, |ix| {
        for (k, &ax) in free1.iter().enumerate() {
            i1[ax] = ix[k];
        }
        for (k, &ax) in free2.iter().enumerate() {
            i2[ax] = ix[free1.len() + k];
        }
        let mut acc = C64::new(0.0, 0.0);
        for s in MultiIndex::new(&sum_sizes) {
            let mut w = C64::new(1.0, 0.0);
            for (k, &(a, b)) in pairs.iter().enumerate() {
                i1[a] = s[k];
                match metric_inverse {
                    None => i2[b] = s[k],
                    Some(m) => {
                        i2[b] = s[np + k];
                        w *= m.get(&[s[k], s[np + k]]);
                    }
                }
            }
            acc += t1.get(&i1) * w * t2.get(&i2);
        }
        acc
    })
}
