//! Connectivity of excursion masks and per-sample geometric certificates.
//!
//! The tested set uses 4-connectivity; its complement uses 8-connectivity in
//! duality checks, so that exactly one of "left-right crossing of the set"
//! and "top-bottom crossing of the complement" occurs on any rectangle.
//!
//! Each certificate evaluates a handful of sup/inf conditions on the two
//! component paths and asserts a geometric consequence for the planar field
//! built from them. Callers are expected to check that consequence on the
//! same sample (see the harness), which turns the implication into a
//! machine-checked statement per replicate.

use crate::error::{Error, Result};
use crate::extremes::l_t;
use crate::field::{AdditiveField, ExcursionMask};
use crate::sampler::ProcessPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// First column to last column.
    LeftRight,
    /// First row to last row.
    TopBottom,
}

/// Disjoint-set forest with path halving and union by rank.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(size: usize) -> Self {
        assert!(size <= u32::MAX as usize, "union-find limited to u32 indices");
        Self {
            parent: (0..size as u32).collect(),
            rank: vec![0; size],
        }
    }

    pub fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let grand = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = grand;
            i = grand;
        }
        i
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
    }
}

/// 4-connected component labeling of a mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    width: usize,
    height: usize,
    /// 0 for cells outside the set, else `1..=component_count`.
    labels: Vec<u32>,
    component_count: usize,
    touches_boundary: Vec<bool>,
}

impl ComponentLabels {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    /// Whether component `label` (1-based) meets the outer ring of the mask.
    pub fn touches_boundary(&self, label: u32) -> bool {
        self.touches_boundary[label as usize - 1]
    }
}

/// Labels the 4-connected components of the set cells, numbering them in
/// row-major order of first appearance.
pub fn label_components(mask: &ExcursionMask) -> Result<ComponentLabels> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut uf = UnionFind::new(w * h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            if x > 0 && bits[i - 1] {
                uf.union(i as u32, (i - 1) as u32);
            }
            if y > 0 && bits[i - w] {
                uf.union(i as u32, (i - w) as u32);
            }
        }
    }
    let mut root_label = vec![0u32; w * h];
    let mut labels = vec![0u32; w * h];
    let mut touches_boundary = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            let root = uf.find(i as u32) as usize;
            if root_label[root] == 0 {
                touches_boundary.push(false);
                root_label[root] = touches_boundary.len() as u32;
            }
            let label = root_label[root];
            labels[i] = label;
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                touches_boundary[label as usize - 1] = true;
            }
        }
    }
    Ok(ComponentLabels {
        width: w,
        height: h,
        labels,
        component_count: touches_boundary.len(),
        touches_boundary,
    })
}

/// Whether a 4-connected component of set cells joins the two opposite sides.
pub fn has_crossing(mask: &ExcursionMask, direction: Direction) -> Result<bool> {
    has_crossing_with(mask, direction, Connectivity::Four)
}

/// Crossing test under either connectivity, by scanline span filling from
/// the starting side.
pub fn has_crossing_with(mask: &ExcursionMask, direction: Direction, connectivity: Connectivity) -> Result<bool> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let diagonal = usize::from(connectivity == Connectivity::Eight);
    let mut seen = vec![false; w * h];
    let mut stack: Vec<(usize, usize)> = match direction {
        Direction::LeftRight => (0..h).rev().filter(|&y| bits[y * w]).map(|y| (0, y)).collect(),
        Direction::TopBottom => (0..w).rev().filter(|&x| bits[x]).map(|x| (x, 0)).collect(),
    };
    while let Some((x, y)) = stack.pop() {
        let row = y * w;
        if seen[row + x] {
            continue;
        }
        let mut lo = x;
        while lo > 0 && bits[row + lo - 1] {
            lo -= 1;
        }
        let mut hi = x;
        while hi + 1 < w && bits[row + hi + 1] {
            hi += 1;
        }
        seen[row + lo..=row + hi].iter_mut().for_each(|c| *c = true);
        let done = match direction {
            Direction::LeftRight => hi == w - 1,
            Direction::TopBottom => y == h - 1,
        };
        if done {
            return Ok(true);
        }
        let from = lo.saturating_sub(diagonal);
        let to = (hi + diagonal).min(w - 1);
        for ny in [y.wrapping_sub(1), y + 1] {
            if ny >= h {
                continue;
            }
            let nrow = ny * w;
            let mut in_run = false;
            for nx in from..=to {
                let open = bits[nrow + nx] && !seen[nrow + nx];
                if open && !in_run {
                    stack.push((nx, ny));
                }
                in_run = open;
            }
        }
    }
    Ok(false)
}

/// Index and value of the maximum over `lo..=hi`, smallest index on ties.
pub fn argmax_in(values: &[f64], lo: usize, hi: usize) -> (usize, f64) {
    let mut best = (lo, values[lo]);
    for (i, &v) in values.iter().enumerate().take(hi + 1).skip(lo + 1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

pub fn min_in(values: &[f64], lo: usize, hi: usize) -> f64 {
    values[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_in(values: &[f64], lo: usize, hi: usize) -> f64 {
    argmax_in(values, lo, hi).1
}

/// A rectangle `[a1, b1] × [a2, b2]` (grid indices) on whose boundary `f > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockingCertificate {
    pub a1: usize,
    pub b1: usize,
    pub a2: usize,
    pub b2: usize,
    pub threshold_s: f64,
    /// Index ranges of `[−T, T]` on axis 0 and `[−τ, τ]` on axis 1.
    pub inner_x: (usize, usize),
    pub inner_y: (usize, usize),
    /// Blocking inequalities hold and `f > 0` at every boundary grid point.
    pub valid: bool,
}

impl BlockingCertificate {
    pub const CSV_HEADER: &'static str = "a1,b1,a2,b2,threshold_s,valid";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.a1, self.b1, self.a2, self.b2, self.threshold_s, self.valid
        )
    }
}

fn boundary_positive(g1: &[f64], g2: &[f64], a1: usize, b1: usize, a2: usize, b2: usize) -> bool {
    (a1..=b1).all(|i| g1[i] + g2[a2] > 0.0 && g1[i] + g2[b2] > 0.0)
        && (a2..=b2).all(|j| g1[a1] + g2[j] > 0.0 && g1[b1] + g2[j] > 0.0)
}

/// Searches for a blocking rectangle around `[−T, T] × [−τ, τ]` at threshold `s`.
///
/// Requires sup `g1 > s` on `[−2T, −T]` and `[T, 2T]`, inf `g1 > −s` on
/// `[−2T, 2T]`, and the same for `g2` with `τ` in place of `T`. The corners
/// are the argmaxes on the outer intervals (smallest index on ties).
pub fn find_blocking_rectangle(
    g1: &ProcessPath,
    g2: &ProcessPath,
    t: f64,
    tau: f64,
    s: f64,
) -> Result<Option<BlockingCertificate>> {
    if !(t > 0.0 && tau > 0.0) {
        return Err(Error::Domain(format!("T and tau must be positive, got {t}, {tau}")));
    }
    let (v1, v2) = (g1.values(), g2.values());
    let left1 = g1.index_range(-2.0 * t, -t)?;
    let right1 = g1.index_range(t, 2.0 * t)?;
    let span1 = g1.index_range(-2.0 * t, 2.0 * t)?;
    let left2 = g2.index_range(-2.0 * tau, -tau)?;
    let right2 = g2.index_range(tau, 2.0 * tau)?;
    let span2 = g2.index_range(-2.0 * tau, 2.0 * tau)?;

    let (a1, sup_l1) = argmax_in(v1, left1.0, left1.1);
    let (b1, sup_r1) = argmax_in(v1, right1.0, right1.1);
    let (a2, sup_l2) = argmax_in(v2, left2.0, left2.1);
    let (b2, sup_r2) = argmax_in(v2, right2.0, right2.1);
    let holds = sup_l1 > s
        && sup_r1 > s
        && min_in(v1, span1.0, span1.1) > -s
        && sup_l2 > s
        && sup_r2 > s
        && min_in(v2, span2.0, span2.1) > -s;
    if !holds {
        return Ok(None);
    }
    let blocking = v1[a1].min(v1[b1]) > -min_in(v2, a2, b2) && v2[a2].min(v2[b2]) > -min_in(v1, a1, b1);
    let valid = blocking && boundary_positive(v1, v2, a1, b1, a2, b2);
    Ok(Some(BlockingCertificate {
        a1,
        b1,
        a2,
        b2,
        threshold_s: s,
        inner_x: g1.index_range(-t, t)?,
        inner_y: g2.index_range(-tau, tau)?,
        valid,
    }))
}

/// Checks a certificate against the field itself: `f > 0` on every boundary
/// grid point of the rectangle, and no 4-connected component of `{f ≤ 0}`
/// inside the rectangle meets both its boundary and the inner window.
pub fn verify_blocking(field: &AdditiveField, cert: &BlockingCertificate) -> Result<bool> {
    if field.dim() != 2 {
        return Err(Error::Domain("blocking certificates are planar".into()));
    }
    let (v1, v2) = (field.component(0).values(), field.component(1).values());
    let BlockingCertificate { a1, b1, a2, b2, .. } = *cert;
    if a1 > b1 || a2 > b2 || b1 >= v1.len() || b2 >= v2.len() {
        return Err(Error::OutOfBounds(format!(
            "rectangle [{a1}, {b1}]×[{a2}, {b2}] outside {}×{}",
            v1.len(),
            v2.len()
        )));
    }
    let (ix, iy) = (cert.inner_x, cert.inner_y);
    if ix.0 < a1 || ix.1 > b1 || iy.0 < a2 || iy.1 > b2 {
        return Err(Error::OutOfBounds("inner window not inside the rectangle".into()));
    }
    if !boundary_positive(v1, v2, a1, b1, a2, b2) {
        return Ok(false);
    }

    // Flood {f ≤ 0} from the boundary ring, evaluating f lazily.
    let (w, h) = (b1 - a1 + 1, b2 - a2 + 1);
    let inside = |x: usize, y: usize| v1[a1 + x] + v2[a2 + y] <= 0.0;
    let mut seeds = Vec::new();
    for x in 0..w {
        for y in [0, h - 1] {
            if inside(x, y) {
                seeds.push(y * w + x);
            }
        }
    }
    for y in 0..h {
        for x in [0, w - 1] {
            if inside(x, y) {
                seeds.push(y * w + x);
            }
        }
    }
    if seeds.is_empty() {
        return Ok(true);
    }
    let mut seen = vec![false; w * h];
    for &s in &seeds {
        seen[s] = true;
    }
    let mut stack = seeds;
    while let Some(i) = stack.pop() {
        let (x, y) = (i % w, i / w);
        if (ix.0..=ix.1).contains(&(a1 + x)) && (iy.0..=iy.1).contains(&(a2 + y)) {
            return Ok(false);
        }
        let neighbours = [
            (x + 1 < w).then(|| (x + 1, y)),
            x.checked_sub(1).map(|nx| (nx, y)),
            (y + 1 < h).then(|| (x, y + 1)),
            y.checked_sub(1).map(|ny| (x, ny)),
        ];
        for (nx, ny) in neighbours.into_iter().flatten() {
            let j = ny * w + nx;
            if !seen[j] && inside(nx, ny) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    Ok(true)
}

fn positive_horizon(t: f64) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::Domain(format!("T must exceed 1, got {t}")));
    }
    Ok(t.ln().sqrt())
}

/// Event that both paths have sup above `L_{i;T}` and inf above `−L_{i;T}` on
/// `[0, T]`. When it holds, the argmax row and column carry `f > 0`, which
/// rules out a left-right crossing of `{f ≤ 0}` in `[0, T]²`.
pub fn certificate_block_at(g1: &ProcessPath, g2: &ProcessPath, t: f64) -> Result<bool> {
    positive_horizon(t)?;
    let (r1, r2) = (g1.index_range(0.0, t)?, g2.index_range(0.0, t)?);
    let l1 = l_t(t, g1.kernel().variance())?;
    let l2 = l_t(t, g2.kernel().variance())?;
    let (v1, v2) = (g1.values(), g2.values());
    Ok(max_in(v1, r1.0, r1.1) > l1
        && min_in(v1, r1.0, r1.1) > -l1
        && max_in(v2, r2.0, r2.1) > l2
        && min_in(v2, r2.0, r2.1) > -l2)
}

/// Event `sup g2 > L_{2;T} − h/√log T` and `inf g1 > −L_{1;T} − h/√log T` on
/// `[0, T]`. Returns the event together with the level
/// `L_{2;T} − L_{1;T} − 2h/√log T` that `f` exceeds along the row through the
/// argmax of `g2`, giving a left-right path in `{f > level}`.
pub fn certificate_path_bth(g1: &ProcessPath, g2: &ProcessPath, t: f64, h: f64) -> Result<(bool, f64)> {
    let root_log = positive_horizon(t)?;
    let (r1, r2) = (g1.index_range(0.0, t)?, g2.index_range(0.0, t)?);
    let l1 = l_t(t, g1.kernel().variance())?;
    let l2 = l_t(t, g2.kernel().variance())?;
    let slack = h / root_log;
    let holds = max_in(g2.values(), r2.0, r2.1) > l2 - slack && min_in(g1.values(), r1.0, r1.1) > -l1 - slack;
    Ok((holds, l2 - l1 - 2.0 * slack))
}

/// Event `sup g1 > L_{1;T} + h/√log T` and `inf g2 > −L_{2;T} + h/√log T` on
/// `[0, T]`. Returns the event and the level `L_{1;T} − L_{2;T} + 2h/√log T`
/// exceeded along the column through the argmax of `g1`: a top-bottom path
/// in `{f > level}`, which precludes a left-right crossing of `{f ≤ level}`.
pub fn certificate_block_cth(g1: &ProcessPath, g2: &ProcessPath, t: f64, h: f64) -> Result<(bool, f64)> {
    let root_log = positive_horizon(t)?;
    let (r1, r2) = (g1.index_range(0.0, t)?, g2.index_range(0.0, t)?);
    let l1 = l_t(t, g1.kernel().variance())?;
    let l2 = l_t(t, g2.kernel().variance())?;
    let slack = h / root_log;
    let holds = max_in(g1.values(), r1.0, r1.1) > l1 + slack && min_in(g2.values(), r2.0, r2.1) > -l2 + slack;
    Ok((holds, l1 - l2 + 2.0 * slack))
}

/// `T_n = 2ⁿ` and `τ(T_n) = T_n^{K1(0)/K2(0)}`.
pub fn ladder_scales(n: u32, k1_0: f64, k2_0: f64) -> (f64, f64) {
    let t_n = (n as f64).exp2();
    (t_n, t_n.powf(k1_0 / k2_0))
}

/// The ladder event at rung `n`: with `L = L_{1;2T_n}`,
/// sup `g1 > L − ℓ/2` and inf `g1 > −L − ℓ/2` on `[0, 2T_n]`, and the same
/// bounds for `g2` on `[0, 2τ(T_n)]`. It yields paths in `{f > −ℓ}` along the
/// argmax column and row.
pub fn certificate_ladder_sn(
    g1: &ProcessPath,
    g2: &ProcessPath,
    n: u32,
    level: f64,
    k1_0: f64,
    k2_0: f64,
) -> Result<bool> {
    if !(k1_0 > 0.0 && k2_0 > 0.0) {
        return Err(Error::Domain("kernel variances must be positive".into()));
    }
    let (t_n, tau) = ladder_scales(n, k1_0, k2_0);
    let r1 = g1.index_range(0.0, 2.0 * t_n)?;
    let r2 = g2.index_range(0.0, 2.0 * tau)?;
    let bound = l_t(2.0 * t_n, k1_0)?;
    let slack = level / 2.0;
    let (v1, v2) = (g1.values(), g2.values());
    Ok(max_in(v1, r1.0, r1.1) > bound - slack
        && min_in(v1, r1.0, r1.1) > -bound - slack
        && max_in(v2, r2.0, r2.1) > bound - slack
        && min_in(v2, r2.0, r2.1) > -bound - slack)
}
