use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::makima::Makima;

/// Ordered waypoints split into contiguous fitting segments.
///
/// `segment_boundaries` holds the first index of every segment after the
/// first, so an unsegmented set has no boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointSet {
    pub points: Vec<[f64; 2]>,
    pub segment_boundaries: Vec<usize>,
}

impl WaypointSet {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("non-finite waypoint");
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return invalid("duplicate consecutive waypoints");
        }
        Ok(Self {
            points,
            segment_boundaries: Vec::new(),
        })
    }

    pub fn with_boundaries(mut self, boundaries: Vec<usize>) -> Result<Self> {
        let n = self.points.len();
        let mut prev = 0;
        for &b in &boundaries {
            if b <= prev || b >= n {
                return invalid("segment boundaries must be strictly increasing inside the point range");
            }
            prev = b;
        }
        self.segment_boundaries = boundaries;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        self.segment_boundaries.len() + 1
    }

    pub fn segments(&self) -> Vec<Range<usize>> {
        let mut edges = vec![0];
        edges.extend(&self.segment_boundaries);
        edges.push(self.points.len());
        edges.windows(2).map(|w| w[0]..w[1]).collect()
    }

    /// Per-point fitting parameter in [0, 1): cumulative chord length within
    /// each segment, normalised so the next segment's first point sits at 1.
    /// The last segment runs to its own final point.
    pub fn chord_lambdas(&self) -> Vec<f64> {
        let segs = self.segments();
        let last = segs.len() - 1;
        let mut out = Vec::with_capacity(self.points.len());
        for (i, r) in segs.into_iter().enumerate() {
            let end = if i < last { r.end + 1 } else { r.end };
            let mut acc = vec![0.0];
            for k in r.start + 1..end {
                let [x0, y0] = self.points[k - 1];
                let [x1, y1] = self.points[k];
                acc.push(acc[acc.len() - 1] + (x1 - x0).hypot(y1 - y0));
            }
            let total = acc[acc.len() - 1];
            out.extend(acc[..r.len()].iter().map(|c| if total > 0.0 { c / total } else { 0.0 }));
        }
        out
    }
}

/// Samples `count` points along the modified-Akima interpolant y(x) through
/// the anchors. Every anchor is kept; the extra points are shared between the
/// anchor intervals in proportion to their width and spaced evenly in x.
pub fn densify_waypoints(anchors: &[(f64, f64)], count: usize) -> Result<WaypointSet> {
    if anchors.len() < 3 {
        return invalid("need at least 3 anchors");
    }
    if count < anchors.len() {
        return invalid("count must be at least the number of anchors");
    }
    let xs: Vec<f64> = anchors.iter().map(|a| a.0).collect();
    let ys: Vec<f64> = anchors.iter().map(|a| a.1).collect();
    if xs.windows(2).any(|w| w[1] == w[0]) {
        return invalid("duplicated abscissa among anchors");
    }
    let spline = Makima::new(&xs, &ys)?;

    let span = xs[xs.len() - 1] - xs[0];
    let extra = count - anchors.len();
    let shares: Vec<f64> = xs
        .windows(2)
        .map(|w| extra as f64 * (w[1] - w[0]) / span)
        .collect();
    let mut alloc: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let mut left = extra - alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in &order {
        if left == 0 {
            break;
        }
        alloc[i] += 1;
        left -= 1;
    }

    let mut points = Vec::with_capacity(count);
    for (i, w) in xs.windows(2).enumerate() {
        points.push([w[0], ys[i]]);
        let k = alloc[i];
        for j in 1..=k {
            let x = w[0] + (w[1] - w[0]) * j as f64 / (k + 1) as f64;
            let y = spline.eval(x).expect("inside knot range");
            points.push([x, y]);
        }
    }
    points.push([xs[xs.len() - 1], ys[ys.len() - 1]]);
    WaypointSet::new(points)
}

/// Discrete curvature of a polyline from index-based central differences
/// (one-sided at the ends).
pub fn discrete_curvature(points: &[[f64; 2]]) -> Vec<f64> {
    let d = gradient(points);
    let dd = gradient(&d);
    d.iter()
        .zip(&dd)
        .map(|(a, b)| {
            let sp = a[0].hypot(a[1]);
            if sp == 0.0 {
                0.0
            } else {
                (a[0] * b[1] - a[1] * b[0]) / sp.powi(3)
            }
        })
        .collect()
}

fn gradient(v: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = v.len();
    if n < 2 {
        return vec![[0.0, 0.0]; n];
    }
    (0..n)
        .map(|i| {
            let (a, b, h) = match i {
                0 => (0, 1, 1.0),
                _ if i == n - 1 => (n - 2, n - 1, 1.0),
                _ => (i - 1, i + 1, 2.0),
            };
            [(v[b][0] - v[a][0]) / h, (v[b][1] - v[a][1]) / h]
        })
        .collect()
}

/// Relative curvature threshold below which a waypoint counts as straight.
const TURN_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy)]
struct Turn {
    start: usize,
    end: usize,
    sign: i8,
}

/// Maximal runs of same-signed curvature above the straight threshold,
/// at least `min_len` points long, with adjacent same-sign runs joined.
fn turning_regions(kappa: &[f64], min_len: usize) -> Vec<Turn> {
    let peak = kappa.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    if peak == 0.0 {
        return Vec::new();
    }
    let thr = TURN_THRESHOLD * peak;
    let sign: Vec<i8> = kappa
        .iter()
        .map(|&k| if k.abs() <= thr { 0 } else if k > 0.0 { 1 } else { -1 })
        .collect();
    let mut runs = Vec::new();
    let mut i = 0;
    while i < sign.len() {
        let mut j = i;
        while j < sign.len() && sign[j] == sign[i] {
            j += 1;
        }
        if sign[i] != 0 && j - i >= min_len {
            runs.push(Turn { start: i, end: j, sign: sign[i] });
        }
        i = j;
    }
    let mut merged: Vec<Turn> = Vec::new();
    for t in runs {
        match merged.last_mut() {
            Some(last) if last.sign == t.sign => last.end = t.end,
            _ => merged.push(t),
        }
    }
    merged
}

/// Splits the waypoints into `m` segments, each holding at most one turning
/// region and at least `p + 1` points.
///
/// Boundaries first go where the curvature changes character: the start of the
/// first turn, the smallest |curvature| between opposite turns (lowest index on
/// ties) and the end of the last turn. Short or surplus segments are then merged
/// into a neighbour and missing ones are made by halving the longest segment.
pub fn segment_waypoints(wps: &WaypointSet, m: usize, p: usize) -> Result<WaypointSet> {
    let n = wps.len();
    if m == 0 {
        return invalid("segment count must be at least 1");
    }
    if m * (p + 1) > n {
        return invalid(format!(
            "{m} segments of at least {} points need {} waypoints, have {n}",
            p + 1,
            m * (p + 1)
        ));
    }
    let kappa = discrete_curvature(&wps.points);
    let turns = turning_regions(&kappa, p + 1);
    if turns.len() > m {
        return invalid(format!(
            "{} turning regions cannot fit into {m} segments",
            turns.len()
        ));
    }

    let mut bounds = Vec::new();
    for (ti, t) in turns.iter().enumerate() {
        if ti == 0 && t.start > 0 {
            bounds.push(t.start);
        }
        match turns.get(ti + 1) {
            Some(next) => {
                // opposite signs only, since same-sign neighbours were merged
                let lo = t.end - 1;
                let mut best = lo;
                for i in lo..=next.start {
                    if kappa[i].abs() < kappa[best].abs() {
                        best = i;
                    }
                }
                bounds.push(best.max(1));
            }
            None if t.end < n => bounds.push(t.end),
            None => {}
        }
    }
    bounds.dedup();

    let has_turn = |r: &Range<usize>| turns.iter().any(|t| t.start < r.end && t.end > r.start);
    let edges = |b: &[usize]| -> Vec<Range<usize>> {
        let mut e = vec![0];
        e.extend(b);
        e.push(n);
        e.windows(2).map(|w| w[0]..w[1]).collect()
    };
    // merge boundary k joins segments k and k+1
    let mergeable = |b: &[usize], k: usize| {
        let segs = edges(b);
        !(has_turn(&segs[k]) && has_turn(&segs[k + 1]))
    };

    loop {
        let segs = edges(&bounds);
        let short = segs.iter().position(|r| r.len() < p + 1);
        let target = match short {
            Some(i) => Some(i),
            None if segs.len() > m => {
                // shortest segment that can be merged with a neighbour
                let mut idx: Vec<usize> = (0..segs.len()).collect();
                idx.sort_by_key(|&i| (segs[i].len(), i));
                idx.into_iter().find(|&i| {
                    (i > 0 && mergeable(&bounds, i - 1)) || (i + 1 < segs.len() && mergeable(&bounds, i))
                })
            }
            None => break,
        };
        let Some(i) = target else {
            return invalid("cannot merge segments without joining two turns");
        };
        let left = (i > 0 && mergeable(&bounds, i - 1)).then(|| segs[i - 1].len());
        let right = (i + 1 < segs.len() && mergeable(&bounds, i)).then(|| segs[i + 1].len());
        let remove = match (left, right) {
            (Some(l), Some(r)) if r < l => i,
            (Some(_), _) => i - 1,
            (None, Some(_)) => i,
            (None, None) => return invalid("segment too short to merge"),
        };
        bounds.remove(remove);
    }
    while bounds.len() + 1 < m {
        let segs = edges(&bounds);
        // longest segment, lowest index on ties
        let r = segs
            .iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then(b.start.cmp(&a.start)))
            .expect("at least one segment");
        let mid = r.start + r.len() / 2;
        bounds.push(mid);
        bounds.sort_unstable();
    }
    if edges(&bounds).iter().any(|r| r.len() < p + 1) {
        return invalid("segmentation leaves a segment with fewer than p + 1 points");
    }
    wps.clone().with_boundaries(bounds)
}
