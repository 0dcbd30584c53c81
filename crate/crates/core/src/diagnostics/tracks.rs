use serde::{Deserialize, Serialize};

use crate::grid::Profile;
use crate::solver::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub u: f64,
    pub kind: CriticalKind,
}

/// Sign changes of the centered derivative on `interval`, with a hysteresis
/// band of `1e-9 · sup |u_x|` and the extremum refined by the vertex of the
/// parabola through three nodes.
pub fn critical_points(p: &Profile, interval: (f64, f64)) -> Vec<CriticalPoint> {
    let Some((j0, j1)) = p.grid().index_range(interval.0, interval.1) else {
        return Vec::new();
    };
    let v = p.values();
    let n = v.len();
    let j0 = j0.max(1);
    let j1 = j1.min(n - 2);
    if j1 <= j0 {
        return Vec::new();
    }
    let d: Vec<f64> = (j0..=j1).map(|j| v[j + 1] - v[j - 1]).collect();
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let tol = 1e-9 * scale;
    let dx = p.grid().dx();
    let mut out = Vec::new();
    let mut last: Option<(usize, bool)> = None;
    for (i, &di) in d.iter().enumerate() {
        if di.abs() <= tol {
            continue;
        }
        let rising = di > 0.0;
        if let Some((k, was_rising)) = last {
            if was_rising != rising {
                let kind = if was_rising {
                    CriticalKind::Max
                } else {
                    CriticalKind::Min
                };
                let (a, b) = (j0 + k, j0 + i);
                let m = (a..=b)
                    .max_by(|&x, &y| {
                        let (ux, uy) = (v[x], v[y]);
                        match kind {
                            CriticalKind::Max => ux.total_cmp(&uy),
                            CriticalKind::Min => uy.total_cmp(&ux),
                        }
                    })
                    .expect("non-empty range");
                let (l, c, r) = (v[m - 1], v[m], v[m + 1]);
                let curv = l - 2.0 * c + r;
                let (off, um) = if curv != 0.0 {
                    let s = (0.5 * (l - r) / curv).clamp(-1.0, 1.0);
                    (s, c - 0.125 * (l - r) * (l - r) / curv)
                } else {
                    (0.0, c)
                };
                out.push(CriticalPoint {
                    x: p.x(m) + off * dx,
                    u: um,
                    kind,
                });
            }
        }
        last = Some((i, rising));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalTrack {
    pub id: usize,
    pub kind: CriticalKind,
    pub samples: Vec<TrackSample>,
    /// The track found no continuation at some snapshot before the last one.
    pub terminated: bool,
}

impl CriticalTrack {
    pub fn born(&self) -> f64 {
        self.samples[0].t
    }

    pub fn last(&self) -> &TrackSample {
        self.samples.last().expect("tracks are never empty")
    }

    /// Total variation of `x(t)` over samples with `t ≥ from`.
    pub fn variation_since(&self, from: f64) -> f64 {
        let xs: Vec<f64> = self.samples.iter().filter(|s| s.t >= from).map(|s| s.x).collect();
        xs.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Alive over the whole of `[from, to]`.
    pub fn spans(&self, from: f64, to: f64) -> bool {
        self.born() <= from && self.last().t >= to
    }
}

/// Continue critical points from snapshot to snapshot by greedy
/// nearest-neighbour matching of the same kind within `match_radius`.
pub fn track_critical_points(
    snapshots: &[Snapshot],
    interval: (f64, f64),
    match_radius: Option<f64>,
) -> Vec<CriticalTrack> {
    let mut tracks: Vec<CriticalTrack> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for s in snapshots {
        let radius = match_radius.unwrap_or(5.0 * s.profile.grid().dx());
        let pts = critical_points(&s.profile, interval);
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (oi, &ti) in open.iter().enumerate() {
            let last = tracks[ti].last();
            for (pi, p) in pts.iter().enumerate() {
                let dist = (p.x - last.x).abs();
                if p.kind == tracks[ti].kind && dist <= radius {
                    pairs.push((dist, oi, pi));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut track_used = vec![false; open.len()];
        let mut point_used = vec![false; pts.len()];
        for (_, oi, pi) in pairs {
            if track_used[oi] || point_used[pi] {
                continue;
            }
            track_used[oi] = true;
            point_used[pi] = true;
            let p = pts[pi];
            tracks[open[oi]].samples.push(TrackSample { t: s.t, x: p.x, u: p.u });
        }
        let mut next_open = Vec::new();
        for (oi, &ti) in open.iter().enumerate() {
            if track_used[oi] {
                next_open.push(ti);
            } else {
                tracks[ti].terminated = true;
            }
        }
        for (pi, p) in pts.iter().enumerate() {
            if !point_used[pi] {
                let id = tracks.len();
                tracks.push(CriticalTrack {
                    id,
                    kind: p.kind,
                    samples: vec![TrackSample { t: s.t, x: p.x, u: p.u }],
                    terminated: false,
                });
                next_open.push(id);
            }
        }
        next_open.sort_unstable();
        open = next_open;
    }
    tracks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    C1,
    C2,
    C3,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseTag {
    pub tag: CaseKind,
    pub k0: Option<usize>,
    /// `(k, N_k)` for `k = 1..=k_max`.
    pub evidence: Vec<(usize, usize)>,
    pub late_window: (f64, f64),
    /// Tracks seen inside `(-k_max, k_max)` during the late window that do not
    /// live through all of it.
    pub transient: usize,
    pub note: String,
}

/// Case trichotomy from the number `N_k` of persistent critical points in
/// `(-k, k)` over the late window.
pub fn classify_case(
    tracks: &[CriticalTrack],
    k_max: usize,
    late_window: (f64, f64),
) -> CaseTag {
    let (from, to) = late_window;
    let persistent: Vec<&CriticalTrack> = tracks.iter().filter(|t| t.spans(from, to)).collect();
    let kmax = k_max.max(1);
    let evidence: Vec<(usize, usize)> = (1..=kmax)
        .map(|k| {
            let kk = k as f64;
            let n = persistent
                .iter()
                .filter(|t| {
                    t.samples
                        .iter()
                        .filter(|s| s.t >= from && s.t <= to)
                        .all(|s| s.x.abs() < kk)
                })
                .count();
            (k, n)
        })
        .collect();
    let transient = tracks
        .iter()
        .filter(|t| !t.spans(from, to))
        .filter(|t| {
            t.samples
                .iter()
                .any(|s| s.t >= from && s.t <= to && s.x.abs() < kmax as f64)
        })
        .count();
    let n_last = evidence[kmax - 1].1;
    let k0 = (1..=kmax)
        .find(|&k| evidence[k - 1..].iter().all(|&(_, n)| n == n_last))
        .expect("k_max itself qualifies");
    let (tag, note) = if transient > 0 {
        (
            CaseKind::Undetermined,
            format!("{transient} critical points appear or vanish inside the largest window late in the run"),
        )
    } else if kmax > 1 && k0 == kmax {
        (
            CaseKind::Undetermined,
            "N_k has not settled before the largest window".to_string(),
        )
    } else {
        let tag = match n_last {
            0 => CaseKind::C1,
            1 => CaseKind::C2,
            _ => CaseKind::C3,
        };
        (tag, String::new())
    };
    CaseTag {
        tag,
        k0: (tag != CaseKind::Undetermined).then_some(k0),
        evidence,
        late_window,
        transient,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn snap(t: f64, p: Profile) -> Snapshot {
        Snapshot {
            step: 0,
            t,
            profile: p,
            theta: (0.0, 0.0),
            rate: None,
        }
    }

    #[test]
    fn subgrid_maximum() {
        let g = Grid::with_spacing(5.0, 0.1).unwrap();
        let p = Profile::from_fn(g, |x| -(x - 0.537) * (x - 0.537));
        let cps = critical_points(&p, (-4.0, 4.0));
        assert_eq!(cps.len(), 1);
        assert_eq!(cps[0].kind, CriticalKind::Max);
        assert!((cps[0].x - 0.537).abs() < 1e-12);
        assert!(cps[0].u.abs() < 1e-12);
    }

    #[test]
    fn monotone_data_has_no_tracks() {
        let g = Grid::with_spacing(20.0, 0.1).unwrap();
        let snaps: Vec<Snapshot> = (0..5)
            .map(|k| snap(k as f64, Profile::from_fn(g, |x| (x - k as f64 * 0.1).tanh())))
            .collect();
        let tracks = track_critical_points(&snaps, (-15.0, 15.0), None);
        assert!(tracks.is_empty());
        let case = classify_case(&tracks, 10, (3.0, 4.0));
        assert_eq!(case.tag, CaseKind::C1);
        assert_eq!(case.k0, Some(1));
    }

    #[test]
    fn drifting_bump_is_one_track() {
        let g = Grid::with_spacing(20.0, 0.05).unwrap();
        let snaps: Vec<Snapshot> = (0..=20)
            .map(|k| {
                let c = 1.5 * (1.0 - (-(k as f64) / 6.0).exp());
                snap(k as f64, Profile::from_fn(g, move |x| (-(x - c) * (x - c)).exp()))
            })
            .collect();
        let tracks = track_critical_points(&snaps, (-15.0, 15.0), None);
        assert_eq!(tracks.len(), 1);
        assert!(!tracks[0].terminated);
        assert!(tracks[0].variation_since(16.0) < 0.06);
        let case = classify_case(&tracks, 10, (16.0, 20.0));
        assert_eq!(case.tag, CaseKind::C2);
        assert_eq!(case.k0, Some(2));
        assert_eq!(case.evidence[0], (1, 0));
    }

    #[test]
    fn two_bumps_are_c3_and_births_are_recorded() {
        let g = Grid::with_spacing(20.0, 0.05).unwrap();
        let two = |x: f64| (-(x - 3.0) * (x - 3.0)).exp() + (-(x + 3.0) * (x + 3.0)).exp();
        let mut snaps = vec![snap(0.0, Profile::from_fn(g, |x| (-x * x).exp()))];
        snaps.extend((1..5).map(|k| snap(k as f64, Profile::from_fn(g, two))));
        let tracks = track_critical_points(&snaps, (-15.0, 15.0), None);
        // the single maximum dies, two maxima and one minimum are born
        assert_eq!(tracks.len(), 4);
        assert!(tracks[0].terminated);
        let case = classify_case(&tracks, 10, (2.0, 4.0));
        assert_eq!(case.tag, CaseKind::C3);
        assert_eq!(case.evidence[9].1, 3);
    }
}
