//! The x-extrema engine.
//!
//! A continuous path admits an x-minimum at `y₀` when there are `α < y₀ < β`
//! with `w(y₀) = inf over [α, β]` and both `w(α)` and `w(β)` at least
//! `w(y₀) + x`; x-maxima mirror this. On the full line the x-extrema
//! alternate and partition the path into x-slopes of height `H ≥ x` with
//! excess `e = H − x`; the valley bottom `b(x)` is the x-minimum of the pair
//! straddling the origin, and `b` changes sign exactly at the scales where
//! the origin slope's excess hits zero.
//!
//! On a finite window an extremum is *certified* only when its confining
//! `α, β` lie inside the window; boundary candidates are reported but carry
//! no guarantees. Scales at which the window can no longer certify the
//! origin structure are refused rather than guessed.
//!
//! Two independent algorithms are used and cross-validated: per-scale
//! decomposition runs an alternating drawup/drawdown first-passage scan,
//! while the sign-change sweep merges slopes smallest-height-first with a
//! priority queue, recording a change whenever the merged slope spans the
//! origin. [`reference`] holds a literal by-definition scan for validation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::plpath::{PathError, PiecewiseLinearPath};

#[derive(Debug, Error, PartialEq)]
pub enum ExtremaError {
    #[error("scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("window certifies no extremum at scale {scale}")]
    WindowTooNarrow { scale: f64 },
    #[error("the origin-straddling pair cannot be resolved inside the window")]
    OriginUnresolved,
    #[error("valley bottom at scale {scale} falls on an uncertified boundary candidate")]
    UncertifiedBottom { scale: f64 },
    #[error("window does not certify {needed} at this scale")]
    InsufficientCertification { needed: &'static str },
    #[error("sweep range must satisfy 0 < c <= x_max, got c = {start}, x_max = {x_max}")]
    BadSweepRange { start: f64, x_max: f64 },
    #[error("strength parameter must be nonnegative, got {0}")]
    NegativeStrength(f64),
    #[error("window certification dies at scale {certified_up_to}, below the sweep start")]
    WindowCannotCertify { certified_up_to: f64 },
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Min,
    Max,
}

impl ExtremumKind {
    pub fn opposite(self) -> Self {
        match self {
            ExtremumKind::Min => ExtremumKind::Max,
            ExtremumKind::Max => ExtremumKind::Min,
        }
    }
}

impl std::fmt::Display for ExtremumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtremumKind::Min => write!(f, "min"),
            ExtremumKind::Max => write!(f, "max"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremumPoint {
    pub location: f64,
    pub value: f64,
    pub kind: ExtremumKind,
    pub certified: bool,
}

/// Ordered x-extrema of a path at one scale: certified interior points plus
/// one uncertified candidate at each window end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremaDecomposition {
    pub scale: f64,
    pub points: Vec<ExtremumPoint>,
    /// Index `k` with `points[k].location ≤ 0 < points[k+1].location`, when
    /// the straddling pair exists in the window.
    pub index_origin: Option<usize>,
    /// Set when exact value or height ties forced a leftmost-point choice.
    pub tie_detected: bool,
}

impl ExtremaDecomposition {
    pub fn certified(&self) -> impl Iterator<Item = &ExtremumPoint> {
        self.points.iter().filter(|p| p.certified)
    }

    /// The pair `(x₀, x₁)` straddling the origin.
    pub fn origin_pair(&self) -> Option<(&ExtremumPoint, &ExtremumPoint)> {
        self.index_origin
            .map(|k| (&self.points[k], &self.points[k + 1]))
    }

    /// Index of `points[i]` relative to the origin normalisation
    /// (`x₀ ↦ 0`).
    pub fn relative_index(&self, i: usize) -> Option<i64> {
        self.index_origin.map(|k| i as i64 - k as i64)
    }
}

/// An x-slope: the path between consecutive certified x-extrema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slope {
    /// Index `k` of `T_k`, spanning `[x_k, x_{k+1}]`.
    pub index: i64,
    pub left_location: f64,
    pub right_location: f64,
    pub left_value: f64,
    pub right_value: f64,
    /// `H = |w(x_{k+1}) − w(x_k)| ≥ x`.
    pub height: f64,
    /// `e = H − x ≥ 0`.
    pub excess: f64,
    /// True when the slope rises (left endpoint is the minimum).
    pub ascending: bool,
}

/// Which side of the origin the valley bottom falls on (`x₀ ≤ 0 < x₁`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BottomSign {
    NonPositive,
    Positive,
}

/// One recorded sign change of the valley bottom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignChange {
    /// The change scale `X_k`; equals the origin-slope height there exactly.
    pub scale: f64,
    pub b_before: f64,
    pub b_after: f64,
    /// Excess of the left-neighbour slope `T₋₁` at the change scale.
    pub e_minus: f64,
    /// Excess of the right-neighbour slope `T₁` at the change scale.
    pub e_plus: f64,
    /// `e(T₋₁) ≥ a·X` and `e(T₁) ≥ a·X`.
    pub strong: bool,
    /// False when a neighbour slope touches the window boundary, making
    /// `e_minus`/`e_plus` lower bounds and `b_after` a candidate location.
    pub flanks_certified: bool,
}

/// All certified sign changes of the valley bottom in `[c, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignChangeRecord {
    pub start: f64,
    pub x_max: f64,
    pub strength: f64,
    pub changes: Vec<SignChange>,
    /// Scale at which window certification died; `x_max` when it survived.
    pub certified_up_to: f64,
    /// True when the sweep reached `x_max` with certification intact.
    pub complete: bool,
    pub tie_detected: bool,
}

impl SignChangeRecord {
    /// Whether the change list is guaranteed complete on `[start, x]`.
    pub fn covers(&self, x: f64) -> bool {
        (self.complete && x <= self.x_max) || x < self.certified_up_to
    }

    /// Number of recorded changes at scales ≤ `x`.
    pub fn count_up_to(&self, x: f64) -> usize {
        self.changes.iter().take_while(|c| c.scale <= x).count()
    }
}

/// Collapses exactly-equal consecutive values (plateaus) to their leftmost
/// point. Returns the collapsed breakpoints and whether a collapse happened.
fn collapse(path: &PiecewiseLinearPath) -> (Vec<f64>, Vec<f64>, bool) {
    let mut ts = Vec::with_capacity(path.len());
    let mut vs: Vec<f64> = Vec::with_capacity(path.len());
    let mut tie = false;
    for (t, v) in path.breakpoints() {
        if let Some(&last) = vs.last() {
            if last == v {
                tie = true;
                continue;
            }
        }
        ts.push(t);
        vs.push(v);
    }
    (ts, vs, tie)
}

/// Decomposes a path into its certified x-extrema at scale `x`, with one
/// uncertified candidate on each end of the window.
pub fn decompose(path: &PiecewiseLinearPath, x: f64) -> Result<ExtremaDecomposition, ExtremaError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(ExtremaError::BadScale(x));
    }
    let (ts, vs, mut tie) = collapse(path);
    let n = vs.len();
    if n < 2 {
        return Err(ExtremaError::WindowTooNarrow { scale: x });
    }

    // Phase 1: first passage of a drawup or drawdown of size x from the
    // window start, tracking the running extremes and the pre-extremum
    // witnesses.
    let mut run_min = vs[0];
    let mut argmin = 0usize;
    let mut premax_val = vs[0];
    let mut premax_arg = 0usize;
    let mut run_max = vs[0];
    let mut argmax = 0usize;
    let mut premin_val = vs[0];
    let mut premin_arg = 0usize;
    let mut first_event: Option<ExtremumKind> = None;
    for (j, &v) in vs.iter().enumerate().skip(1) {
        let _ = j;
        if v - run_min >= x {
            first_event = Some(ExtremumKind::Min);
            break;
        }
        if run_max - v >= x {
            first_event = Some(ExtremumKind::Max);
            break;
        }
        if v == run_min || v == run_max {
            tie = true;
        }
        if v < run_min {
            run_min = v;
            argmin = j;
            premax_val = run_max;
            premax_arg = argmax;
        }
        if v > run_max {
            run_max = v;
            argmax = j;
            premin_val = run_min;
            premin_arg = argmin;
        }
    }
    let Some(first_kind) = first_event else {
        return Err(ExtremaError::WindowTooNarrow { scale: x });
    };

    let mut certified: Vec<(usize, ExtremumKind)> = Vec::new();
    let head: (usize, ExtremumKind);
    let mut cursor; // index of the newest located extremum
    let mut cursor_kind;
    match first_kind {
        ExtremumKind::Min => {
            let left_ok = premax_val - vs[argmin] >= x;
            if left_ok {
                certified.push((argmin, ExtremumKind::Min));
                head = (premax_arg, ExtremumKind::Max);
            } else {
                head = (argmin, ExtremumKind::Min);
            }
            cursor = argmin;
            cursor_kind = ExtremumKind::Min;
        }
        ExtremumKind::Max => {
            let left_ok = vs[argmax] - premin_val >= x;
            if left_ok {
                certified.push((argmax, ExtremumKind::Max));
                head = (premin_arg, ExtremumKind::Min);
            } else {
                head = (argmax, ExtremumKind::Max);
            }
            cursor = argmax;
            cursor_kind = ExtremumKind::Max;
        }
    }

    // Phase 2: alternate first-passage scans; each located extremum is
    // certified by construction (confined by its neighbours).
    let tail: (usize, ExtremumKind);
    loop {
        let want = cursor_kind.opposite();
        let mut cur_val = vs[cursor];
        let mut cur_arg = cursor;
        let mut trigger = None;
        for j in (cursor + 1)..n {
            let v = vs[j];
            match want {
                ExtremumKind::Max => {
                    if v == cur_val {
                        tie = true;
                    }
                    if v > cur_val {
                        cur_val = v;
                        cur_arg = j;
                    }
                    if cur_val - v >= x {
                        trigger = Some(j);
                        break;
                    }
                }
                ExtremumKind::Min => {
                    if v == cur_val {
                        tie = true;
                    }
                    if v < cur_val {
                        cur_val = v;
                        cur_arg = j;
                    }
                    if v - cur_val >= x {
                        trigger = Some(j);
                        break;
                    }
                }
            }
        }
        match trigger {
            Some(_) => {
                certified.push((cur_arg, want));
                cursor = cur_arg;
                cursor_kind = want;
            }
            None => {
                tail = (cur_arg, want);
                break;
            }
        }
    }

    if certified.is_empty() {
        return Err(ExtremaError::WindowTooNarrow { scale: x });
    }

    let mut points = Vec::with_capacity(certified.len() + 2);
    points.push(ExtremumPoint {
        location: ts[head.0],
        value: vs[head.0],
        kind: head.1,
        certified: false,
    });
    for &(idx, kind) in &certified {
        points.push(ExtremumPoint {
            location: ts[idx],
            value: vs[idx],
            kind,
            certified: true,
        });
    }
    points.push(ExtremumPoint {
        location: ts[tail.0],
        value: vs[tail.0],
        kind: tail.1,
        certified: false,
    });
    debug_assert!(points.windows(2).all(|w| {
        w[0].location < w[1].location && w[0].kind == w[1].kind.opposite()
    }));

    let k = points.partition_point(|p| p.location <= 0.0);
    let index_origin = if k >= 1 && k < points.len() {
        Some(k - 1)
    } else {
        None
    };
    Ok(ExtremaDecomposition {
        scale: x,
        points,
        index_origin,
        tie_detected: tie,
    })
}

/// Slopes between consecutive certified extrema, indexed so that `T₀` spans
/// the origin pair.
pub fn slopes(dec: &ExtremaDecomposition) -> Result<Vec<Slope>, ExtremaError> {
    let origin = dec.index_origin.ok_or(ExtremaError::OriginUnresolved)?;
    let mut out = Vec::new();
    for (i, pair) in dec.points.windows(2).enumerate() {
        if !(pair[0].certified && pair[1].certified) {
            continue;
        }
        let height = (pair[1].value - pair[0].value).abs();
        out.push(Slope {
            index: i as i64 - origin as i64,
            left_location: pair[0].location,
            right_location: pair[1].location,
            left_value: pair[0].value,
            right_value: pair[1].value,
            height,
            excess: height - dec.scale,
            ascending: pair[0].kind == ExtremumKind::Min,
        });
    }
    if out.len() < 1 {
        return Err(ExtremaError::InsufficientCertification {
            needed: "two adjacent certified extrema",
        });
    }
    Ok(out)
}

/// The valley bottom `b(x)`: the x-minimum of the origin-straddling pair.
///
/// Refuses (rather than guesses) when the selected extremum is an
/// uncertified boundary candidate or the straddle cannot be resolved.
pub fn valley_bottom(
    path: &PiecewiseLinearPath,
    x: f64,
) -> Result<(f64, BottomSign), ExtremaError> {
    let dec = decompose(path, x)?;
    let (left, right) = dec.origin_pair().ok_or(ExtremaError::OriginUnresolved)?;
    let (chosen, sign) = if left.kind == ExtremumKind::Min {
        (left, BottomSign::NonPositive)
    } else {
        (right, BottomSign::Positive)
    };
    if !chosen.certified {
        return Err(ExtremaError::UncertifiedBottom { scale: x });
    }
    Ok((chosen.location, sign))
}

/// Excess heights `(e(T₋₁), e(T₀), e(T₁))` of the three slopes around the
/// origin; requires the extrema `x₋₁ .. x₂` to be certified.
pub fn excess_samples(
    path: &PiecewiseLinearPath,
    x: f64,
) -> Result<(f64, f64, f64), ExtremaError> {
    let dec = decompose(path, x)?;
    let origin = dec.index_origin.ok_or(ExtremaError::OriginUnresolved)?;
    if origin == 0 || origin + 2 >= dec.points.len() {
        return Err(ExtremaError::InsufficientCertification {
            needed: "extrema x_{-1} through x_2",
        });
    }
    let pts = &dec.points[origin - 1..=origin + 2];
    if pts.iter().any(|p| !p.certified) {
        return Err(ExtremaError::InsufficientCertification {
            needed: "extrema x_{-1} through x_2",
        });
    }
    let e = |a: &ExtremumPoint, b: &ExtremumPoint| (b.value - a.value).abs() - x;
    Ok((e(&pts[0], &pts[1]), e(&pts[1], &pts[2]), e(&pts[2], &pts[3])))
}

#[derive(Debug, Clone, Copy)]
struct Node {
    loc: f64,
    val: f64,
    kind: ExtremumKind,
    sentinel: bool,
    alive: bool,
    prev: usize,
    next: usize,
}

#[derive(Debug, Clone, Copy)]
struct PairEntry {
    height: f64,
    left_loc: f64,
    left: u32,
    right: u32,
}

impl PartialEq for PairEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for PairEntry {}
impl PartialOrd for PairEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PairEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.height
            .total_cmp(&other.height)
            .then(self.left_loc.total_cmp(&other.left_loc))
            .then(self.left.cmp(&other.left))
    }
}

/// Sweeps the scale axis for sign changes of the valley bottom in
/// `[c, x_max]` by smallest-height-first slope merging.
///
/// Starting from the strict local extrema, the adjacent pair of smallest
/// height merges away at its height; a merge whose pair spans the origin is
/// exactly a zero of the origin-slope excess, i.e. a sign change of `b`.
/// Boundary pseudo-extrema absorb their neighbours instead of merging, which
/// reproduces the finite-window certification rules; the record reports how
/// far certification survived.
pub fn sweep_sign_changes(
    path: &PiecewiseLinearPath,
    c: f64,
    x_max: f64,
    a: f64,
) -> Result<SignChangeRecord, ExtremaError> {
    if !(c > 0.0 && c.is_finite() && x_max >= c && x_max.is_finite()) {
        return Err(ExtremaError::BadSweepRange { start: c, x_max });
    }
    if !(a >= 0.0 && a.is_finite()) {
        return Err(ExtremaError::NegativeStrength(a));
    }
    let (ts, vs, mut tie) = collapse(path);
    let n = vs.len();
    if n < 3 {
        return Err(ExtremaError::WindowCannotCertify { certified_up_to: 0.0 });
    }

    let mut nodes: Vec<Node> = Vec::new();
    let head_kind = if vs[1] > vs[0] {
        ExtremumKind::Min
    } else {
        ExtremumKind::Max
    };
    nodes.push(Node {
        loc: ts[0],
        val: vs[0],
        kind: head_kind,
        sentinel: true,
        alive: true,
        prev: usize::MAX,
        next: 0,
    });
    for j in 1..n - 1 {
        let down_up = vs[j] < vs[j - 1] && vs[j] < vs[j + 1];
        let up_down = vs[j] > vs[j - 1] && vs[j] > vs[j + 1];
        if down_up || up_down {
            nodes.push(Node {
                loc: ts[j],
                val: vs[j],
                kind: if down_up {
                    ExtremumKind::Min
                } else {
                    ExtremumKind::Max
                },
                sentinel: false,
                alive: true,
                prev: usize::MAX,
                next: 0,
            });
        }
    }
    let mut interior = nodes.len() - 1;
    if interior == 0 {
        return Err(ExtremaError::WindowCannotCertify { certified_up_to: 0.0 });
    }
    let tail_kind = nodes.last().expect("nonempty").kind.opposite();
    nodes.push(Node {
        loc: ts[n - 1],
        val: vs[n - 1],
        kind: tail_kind,
        sentinel: true,
        alive: true,
        prev: usize::MAX,
        next: 0,
    });
    let count = nodes.len();
    for i in 0..count {
        nodes[i].prev = i.wrapping_sub(1);
        nodes[i].next = i + 1;
    }
    debug_assert!(nodes
        .windows(2)
        .all(|w| w[0].kind == w[1].kind.opposite() && w[0].loc < w[1].loc));

    let mut heap: BinaryHeap<std::cmp::Reverse<PairEntry>> = BinaryHeap::with_capacity(count);
    let push_pair = |heap: &mut BinaryHeap<std::cmp::Reverse<PairEntry>>,
                     nodes: &Vec<Node>,
                     l: usize,
                     r: usize| {
        heap.push(std::cmp::Reverse(PairEntry {
            height: (nodes[r].val - nodes[l].val).abs(),
            left_loc: nodes[l].loc,
            left: l as u32,
            right: r as u32,
        }));
    };
    for i in 0..count - 1 {
        push_pair(&mut heap, &nodes, i, i + 1);
    }

    let mut changes = Vec::new();
    let mut certified_up_to = x_max;
    let mut complete = true;
    let mut last_height = f64::NEG_INFINITY;

    while let Some(std::cmp::Reverse(entry)) = heap.pop() {
        let (u, v) = (entry.left as usize, entry.right as usize);
        if !nodes[u].alive || !nodes[v].alive || nodes[u].next != v {
            continue;
        }
        let h = entry.height;
        if h > x_max {
            break;
        }
        if h == last_height {
            tie = true;
        }
        last_height = h;

        let spans_origin = nodes[u].loc <= 0.0 && nodes[v].loc > 0.0;
        if spans_origin && (nodes[u].sentinel || nodes[v].sentinel) {
            // the origin event at h involves the window boundary
            certified_up_to = h;
            complete = false;
            break;
        }
        if spans_origin {
            let wm = nodes[u].prev;
            let wp = nodes[v].next;
            if h >= c {
                let b_before = if nodes[u].kind == ExtremumKind::Min {
                    nodes[u].loc
                } else {
                    nodes[v].loc
                };
                let b_after = if nodes[wm].kind == ExtremumKind::Min {
                    nodes[wm].loc
                } else {
                    nodes[wp].loc
                };
                let e_minus = (nodes[u].val - nodes[wm].val).abs() - h;
                let e_plus = (nodes[wp].val - nodes[v].val).abs() - h;
                changes.push(SignChange {
                    scale: h,
                    b_before,
                    b_after,
                    e_minus,
                    e_plus,
                    strong: e_minus >= a * h && e_plus >= a * h,
                    flanks_certified: !nodes[wm].sentinel && !nodes[wp].sentinel,
                });
            }
            nodes[u].alive = false;
            nodes[v].alive = false;
            interior -= 2;
            nodes[wm].next = wp;
            nodes[wp].prev = wm;
            if interior == 0 {
                certified_up_to = h;
                complete = false;
                break;
            }
            push_pair(&mut heap, &nodes, wm, wp);
        } else if nodes[u].sentinel || nodes[v].sentinel {
            // boundary slope: the sentinel swallows its neighbour, becoming
            // the window-side candidate with that value
            let (s, inner) = if nodes[u].sentinel { (u, v) } else { (v, u) };
            debug_assert!(!nodes[inner].sentinel);
            nodes[s].loc = nodes[inner].loc;
            nodes[s].val = nodes[inner].val;
            nodes[s].kind = nodes[inner].kind;
            nodes[inner].alive = false;
            interior -= 1;
            if s == u {
                let w = nodes[inner].next;
                nodes[s].next = w;
                nodes[w].prev = s;
                if interior == 0 || nodes[s].loc > 0.0 {
                    certified_up_to = h;
                    complete = false;
                    break;
                }
                push_pair(&mut heap, &nodes, s, w);
            } else {
                let w = nodes[inner].prev;
                nodes[s].prev = w;
                nodes[w].next = s;
                if interior == 0 || nodes[s].loc <= 0.0 {
                    certified_up_to = h;
                    complete = false;
                    break;
                }
                push_pair(&mut heap, &nodes, w, s);
            }
        } else {
            // interior merge away from the origin
            let wm = nodes[u].prev;
            let wp = nodes[v].next;
            nodes[u].alive = false;
            nodes[v].alive = false;
            interior -= 2;
            nodes[wm].next = wp;
            nodes[wp].prev = wm;
            if interior == 0 {
                certified_up_to = h;
                complete = false;
                break;
            }
            push_pair(&mut heap, &nodes, wm, wp);
        }
    }

    if !complete && certified_up_to < c {
        return Err(ExtremaError::WindowCannotCertify { certified_up_to });
    }
    Ok(SignChangeRecord {
        start: c,
        x_max,
        strength: a,
        changes,
        certified_up_to,
        complete,
        tie_detected: tie,
    })
}

/// Literal by-definition reference implementations, kept independent of the
/// scan and sweep code paths for cross-validation.
pub mod reference {
    use super::{ExtremumKind, ExtremumPoint};
    use crate::plpath::PiecewiseLinearPath;

    /// All certified x-extrema by the definition, scanning every breakpoint
    /// triple `(α, y₀, β)`. Cubic in the breakpoint count; for tests only.
    pub fn certified_extrema_by_definition(
        path: &PiecewiseLinearPath,
        x: f64,
    ) -> Vec<ExtremumPoint> {
        let ts = path.times();
        let vs = path.values();
        let n = vs.len();
        let mut out = Vec::new();
        for i in 0..n {
            let min_ok = witnessed(vs, i, x, true);
            let max_ok = witnessed(vs, i, x, false);
            if min_ok {
                out.push(ExtremumPoint {
                    location: ts[i],
                    value: vs[i],
                    kind: ExtremumKind::Min,
                    certified: true,
                });
            } else if max_ok {
                out.push(ExtremumPoint {
                    location: ts[i],
                    value: vs[i],
                    kind: ExtremumKind::Max,
                    certified: true,
                });
            }
        }
        out
    }

    fn witnessed(vs: &[f64], i: usize, x: f64, minimum: bool) -> bool {
        let n = vs.len();
        let sign = if minimum { 1.0 } else { -1.0 };
        let w = |j: usize| sign * vs[j];
        for a in 0..i {
            if w(a) < w(i) + x {
                continue;
            }
            for b in (i + 1)..n {
                if w(b) < w(i) + x {
                    continue;
                }
                let attained = (a..=b).map(w).fold(f64::INFINITY, f64::min);
                if attained >= w(i) {
                    return true;
                }
            }
        }
        false
    }
}
