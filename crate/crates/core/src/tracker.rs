//! Cross-frame lane tracking.
//!
//! Lanes from consecutive frames are matched when their RMS horizontal
//! distance over the image height is at most `w / 200`. Each tracked lane
//! accumulates `psi * rms_confidence * point_count` per detection and loses
//! a factor `e` per frame it goes undetected; the heaviest lane on each
//! side of the image forms the active pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::LaneModelRecord;
use crate::lane_model::{corroborate_curve, ClassifierConfig, LaneShape, Side};
use crate::regression::LineModel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// Weight increment factor for lanes from potential active-lane channels.
    pub psi_active: f64,
    pub psi_inactive: f64,
    /// Lanes match when their RMS x-distance is at most `w / match_tol_divisor`.
    pub match_tol_divisor: f64,
    /// Tracks missing for more than this many frames are dropped.
    pub max_miss: usize,
    /// Preceding-frame tracking. When off, every frame starts from an empty tracker.
    pub pft_enabled: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            psi_active: 1.0,
            psi_inactive: 0.5,
            match_tol_divisor: 200.0,
            max_miss: 10,
            pft_enabled: true,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.psi_inactive > 0.0 && self.psi_active >= self.psi_inactive) {
            return Err(Error::Config(format!(
                "need psi_active >= psi_inactive > 0 (got {} and {})",
                self.psi_active, self.psi_inactive
            )));
        }
        if self.match_tol_divisor.is_nan() || self.match_tol_divisor <= 0.0 {
            return Err(Error::Config("match_tol_divisor must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LaneStats<T> {
    pub rms_confidence: T,
    pub point_count: usize,
}

/// A lane detected in the current frame, before tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    /// Straight fit, when one could be made.
    pub straight: Option<LaneShape<T>>,
    /// Quadratic spline, present only for curve candidates.
    pub curved: Option<LaneShape<T>>,
    pub stats: LaneStats<T>,
    pub active_hint: bool,
    pub channel_id: usize,
}

impl<T: Scalar> Observation<T> {
    pub fn is_curve_candidate(&self) -> bool {
        self.curved.is_some()
    }

    /// Geometry used for matching: the straight fit, or the spline when no
    /// line could be fitted.
    pub fn candidate(&self) -> &LaneShape<T> {
        self.straight
            .as_ref()
            .or(self.curved.as_ref())
            .expect("observation carries a shape")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackedLane<T> {
    pub lane_id: u64,
    /// Output geometry after curve corroboration.
    pub params: LaneShape<T>,
    /// Geometry last observed for matching.
    pub match_shape: LaneShape<T>,
    pub weight: T,
    /// Frames since last detection.
    pub miss_count: usize,
    /// Curve-candidate flags, oldest first.
    pub curve_history: Vec<bool>,
    pub last_stats: LaneStats<T>,
    pub side: Side,
    pub active_hint: bool,
    pub channel_id: usize,
}

/// RMS horizontal distance between two lanes over rows `[0, h]`.
///
/// Two lines use the closed form of the mean of a squared linear function;
/// anything involving a spline is averaged over the integer rows of `[0, h)`.
pub fn zeta<T: Scalar>(a: &LaneShape<T>, b: &LaneShape<T>, h: usize) -> T {
    match (a, b) {
        (LaneShape::Straight(la), LaneShape::Straight(lb)) => zeta_lines(la, lb, T::from_count(h)),
        _ => {
            if h == 0 {
                return T::zero();
            }
            let sum: T = (0..h)
                .map(|y| {
                    let y = T::from_count(y);
                    let d = a.x_at(y) - b.x_at(y);
                    d * d
                })
                .sum();
            (sum / T::from_count(h)).sqrt()
        }
    }
}

fn zeta_lines<T: Scalar>(a: &LineModel<T>, b: &LineModel<T>, h: T) -> T {
    let (ua, va) = a.x_of_y();
    let (ub, vb) = b.x_of_y();
    let (p, q) = (ua - ub, va - vb);
    let mean_sq = p * p * h * h / T::lit(3.0) + p * q * h + q * q;
    mean_sq.max(T::zero()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment<T> {
    /// `(current index, tracked index, zeta)`.
    pub matches: Vec<(usize, usize, T)>,
    pub unmatched_current: Vec<usize>,
    pub unmatched_tracked: Vec<usize>,
}

/// One-to-one matching, greedily in increasing distance among pairs within
/// `w / tol_divisor`.
pub fn match_lanes<T: Scalar>(
    current: &[&LaneShape<T>],
    tracked: &[&LaneShape<T>],
    w: usize,
    h: usize,
    tol_divisor: f64,
) -> Assignment<T> {
    let tol = T::lit(w as f64 / tol_divisor);
    let mut pairs = Vec::new();
    for (ci, c) in current.iter().enumerate() {
        for (ti, t) in tracked.iter().enumerate() {
            let z = zeta(c, t, h);
            if z <= tol {
                pairs.push((z, ci, ti));
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut cur_used = vec![false; current.len()];
    let mut trk_used = vec![false; tracked.len()];
    let mut matches = Vec::new();
    for (z, ci, ti) in pairs {
        if !cur_used[ci] && !trk_used[ti] {
            cur_used[ci] = true;
            trk_used[ti] = true;
            matches.push((ci, ti, z));
        }
    }
    matches.sort_by_key(|m| m.0);
    Assignment {
        matches,
        unmatched_current: (0..current.len()).filter(|&i| !cur_used[i]).collect(),
        unmatched_tracked: (0..tracked.len()).filter(|&i| !trk_used[i]).collect(),
    }
}

/// Adds `psi * c * N` to lanes detected this frame (`miss_count == 0`),
/// divides the rest by `e`, then drops lanes missing for more than `max_miss` frames.
pub fn update_weights<T: Scalar>(tracked: &mut Vec<TrackedLane<T>>, cfg: &TrackerConfig) {
    let decay = T::lit((-1.0f64).exp());
    for lane in tracked.iter_mut() {
        if lane.miss_count == 0 {
            let psi = T::lit(if lane.active_hint {
                cfg.psi_active
            } else {
                cfg.psi_inactive
            });
            lane.weight = lane.weight
                + psi * lane.last_stats.rms_confidence * T::from_count(lane.last_stats.point_count);
        } else {
            lane.weight = lane.weight * decay;
        }
    }
    tracked.retain(|l| l.miss_count <= cfg.max_miss);
}

/// Heaviest lane on each side; ties go to the older track.
pub fn select_active<T: Scalar>(
    tracked: &[TrackedLane<T>],
) -> (Option<&TrackedLane<T>>, Option<&TrackedLane<T>>) {
    let best = |side: Side| {
        tracked.iter().filter(|l| l.side == side).fold(
            None::<&TrackedLane<T>>,
            |acc, l| match acc {
                Some(b)
                    if b.weight > l.weight || (b.weight == l.weight && b.lane_id < l.lane_id) =>
                {
                    Some(b)
                }
                _ => Some(l),
            },
        )
    };
    (best(Side::Left), best(Side::Right))
}

/// Outcome for one observation after tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct Finalized<T> {
    pub observation: usize,
    pub lane_id: u64,
    pub shape: LaneShape<T>,
    pub zeta: Option<T>,
}

/// Tracking state for one video stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracker<T> {
    cfg: TrackerConfig,
    classifier: ClassifierConfig,
    lanes: Vec<TrackedLane<T>>,
    next_id: u64,
}

impl<T: Scalar> Tracker<T> {
    pub fn new(cfg: TrackerConfig, classifier: ClassifierConfig) -> Self {
        Tracker {
            cfg,
            classifier,
            lanes: Vec::new(),
            next_id: 0,
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn lanes(&self) -> &[TrackedLane<T>] {
        &self.lanes
    }

    pub fn reset(&mut self) {
        self.lanes.clear();
        self.next_id = 0;
    }

    fn final_shape(&self, obs: &Observation<T>, history: &[bool]) -> LaneShape<T> {
        let confirmed = match &obs.curved {
            Some(_) if !self.cfg.pft_enabled => true,
            Some(_) => corroborate_curve(true, history, self.classifier.k, self.classifier.window),
            None => false,
        };
        match (&obs.curved, &obs.straight) {
            (Some(c), _) if confirmed => c.clone(),
            (_, Some(s)) => s.clone(),
            (Some(c), None) => c.clone(),
            (None, None) => unreachable!("observation without shape"),
        }
    }

    fn push_history(&self, history: &mut Vec<bool>, flag: bool) {
        history.push(flag);
        let keep = self.classifier.window.max(1);
        if history.len() > keep {
            history.drain(..history.len() - keep);
        }
    }

    /// Matches, updates weights and returns the final shape of every observation.
    pub fn step(
        &mut self,
        observations: &[Observation<T>],
        width: usize,
        height: usize,
    ) -> Vec<Finalized<T>> {
        if !self.cfg.pft_enabled {
            self.reset();
        }
        let current: Vec<&LaneShape<T>> = observations.iter().map(|o| o.candidate()).collect();
        let tracked: Vec<&LaneShape<T>> = self.lanes.iter().map(|l| &l.match_shape).collect();
        let assignment = match_lanes(
            &current,
            &tracked,
            width,
            height,
            self.cfg.match_tol_divisor,
        );

        let bottom = T::from_count(height.saturating_sub(1));
        let side_of = |s: &LaneShape<T>| Side::of_bottom_x(s.x_at(bottom).as_f64(), width);
        let mut finalized = Vec::with_capacity(observations.len());

        for &ti in &assignment.unmatched_tracked {
            self.lanes[ti].miss_count += 1;
        }
        for &(ci, ti, z) in &assignment.matches {
            let obs = &observations[ci];
            let shape = self.final_shape(obs, &self.lanes[ti].curve_history);
            let mut history = std::mem::take(&mut self.lanes[ti].curve_history);
            self.push_history(&mut history, obs.is_curve_candidate());
            let lane = &mut self.lanes[ti];
            lane.curve_history = history;
            lane.params = shape.clone();
            lane.match_shape = obs.candidate().clone();
            lane.miss_count = 0;
            lane.last_stats = obs.stats;
            lane.active_hint = obs.active_hint;
            lane.channel_id = obs.channel_id;
            lane.side = side_of(&shape);
            finalized.push(Finalized {
                observation: ci,
                lane_id: lane.lane_id,
                shape,
                zeta: Some(z),
            });
        }
        for &ci in &assignment.unmatched_current {
            let obs = &observations[ci];
            let shape = self.final_shape(obs, &[]);
            let mut history = Vec::new();
            self.push_history(&mut history, obs.is_curve_candidate());
            let lane_id = self.next_id;
            self.next_id += 1;
            self.lanes.push(TrackedLane {
                lane_id,
                side: side_of(&shape),
                params: shape.clone(),
                match_shape: obs.candidate().clone(),
                weight: T::zero(),
                miss_count: 0,
                curve_history: history,
                last_stats: obs.stats,
                active_hint: obs.active_hint,
                channel_id: obs.channel_id,
            });
            finalized.push(Finalized {
                observation: ci,
                lane_id,
                shape,
                zeta: None,
            });
        }
        update_weights(&mut self.lanes, &self.cfg);
        finalized.sort_by_key(|f| f.observation);
        finalized
    }

    pub fn select_active(&self) -> (Option<&TrackedLane<T>>, Option<&TrackedLane<T>>) {
        select_active(&self.lanes)
    }

    pub fn snapshot(&self) -> TrackerSnapshot {
        TrackerSnapshot {
            next_id: self.next_id,
            lanes: self
                .lanes
                .iter()
                .map(|l| TrackedLaneSnapshot {
                    lane_id: l.lane_id,
                    side: l.side,
                    weight: l.weight.as_f64(),
                    miss_count: l.miss_count,
                    curve_history: l.curve_history.clone(),
                    rms_confidence: l.last_stats.rms_confidence.as_f64(),
                    point_count: l.last_stats.point_count,
                    active_hint: l.active_hint,
                    channel_id: l.channel_id,
                    params: LaneModelRecord::from_shape(&l.params),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedLaneSnapshot {
    pub lane_id: u64,
    pub side: Side,
    pub weight: f64,
    pub miss_count: usize,
    pub curve_history: Vec<bool>,
    pub rms_confidence: f64,
    pub point_count: usize,
    pub active_hint: bool,
    pub channel_id: usize,
    pub params: LaneModelRecord,
}

/// Debug view of a tracker, serializable as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerSnapshot {
    pub next_id: u64,
    pub lanes: Vec<TrackedLaneSnapshot>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(beta0: f64, beta1: f64) -> LaneShape<f64> {
        LaneShape::Straight(LineModel::Sloped { beta0, beta1 })
    }

    /// Line through bottom-row x with the given horizontal drift per row.
    fn lane_at(x_bottom: f64, h: usize) -> LaneShape<f64> {
        // x = x_bottom - 0.4 (h - 1 - y)  =>  y = beta0 + beta1 x
        let beta1 = 1.0 / 0.4;
        let beta0 = (h - 1) as f64 - beta1 * x_bottom;
        line(beta0, beta1)
    }

    fn obs(shape: LaneShape<f64>, c: f64, n: usize, active: bool) -> Observation<f64> {
        Observation {
            straight: Some(shape),
            curved: None,
            stats: LaneStats {
                rms_confidence: c,
                point_count: n,
            },
            active_hint: active,
            channel_id: 0,
        }
    }

    #[test]
    fn zeta_fixtures() {
        assert_eq!(zeta(&line(3.0, 2.0), &line(3.0, 2.0), 288), 0.0);
        assert_eq!(zeta(&line(0.0, 1.0), &line(10.0, 1.0), 288), 10.0);
        assert_eq!(zeta(&line(0.0, 1.0), &line(10.0, 1.0), 5), 10.0);
        // x1 = y, x2 = y / 2: mean of (y/2)^2 over [0, 100] is 10000 / 12
        let z = zeta(&line(0.0, 1.0), &line(0.0, 2.0), 100);
        assert!((z - (10000.0f64 / 12.0).sqrt()).abs() < 1e-12);
        let v = LaneShape::Straight(LineModel::Vertical { x: 7.0 });
        let v2 = LaneShape::Straight(LineModel::Vertical { x: 4.0 });
        assert_eq!(zeta(&v, &v2, 50), 3.0);
    }

    #[test]
    fn smaller_zeta_wins_the_match() {
        let h = 288;
        let cur = lane_at(400.0, h);
        let near = lane_at(402.0, h);
        let far = lane_at(403.0, h);
        assert!((zeta(&cur, &near, h) - 2.0).abs() < 1e-9);
        assert!((zeta(&cur, &far, h) - 3.0).abs() < 1e-9);
        let a = match_lanes(&[&cur], &[&far, &near], 800, h, 200.0);
        assert_eq!(a.matches.len(), 1);
        assert_eq!((a.matches[0].0, a.matches[0].1), (0, 1));
        assert_eq!(a.unmatched_tracked, vec![0]);

        let mut t = Tracker::new(TrackerConfig::default(), ClassifierConfig::default());
        t.step(
            &[
                obs(far.clone(), 1.0, 10, true),
                obs(near.clone(), 1.0, 10, true),
            ],
            800,
            h,
        );
        t.step(&[obs(cur, 1.0, 10, true)], 800, h);
        let misses: Vec<_> = t
            .lanes()
            .iter()
            .map(|l| (l.lane_id, l.miss_count))
            .collect();
        assert_eq!(misses, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn far_lane_starts_a_new_track() {
        let h = 288;
        let mut t = Tracker::new(TrackerConfig::default(), ClassifierConfig::default());
        t.step(&[obs(lane_at(400.0, h), 1.0, 10, true)], 800, h);
        let f = t.step(&[obs(lane_at(404.5, h), 1.0, 10, true)], 800, h);
        assert_eq!(f[0].lane_id, 1);
        assert_eq!(t.lanes().len(), 2);
        let f = t.step(&[obs(lane_at(404.5, h), 1.0, 10, true)], 800, h);
        assert_eq!(f[0].lane_id, 1);
        assert_eq!(f[0].zeta, Some(0.0));
    }

    #[test]
    fn weight_decays_and_accumulates() {
        let h = 288;
        let shape = lane_at(300.0, h);
        let mut t = Tracker::new(TrackerConfig::default(), ClassifierConfig::default());
        t.step(&[obs(shape.clone(), 1.0, 10, true)], 800, h);
        assert_eq!(t.lanes()[0].weight, 10.0);
        t.step(&[], 800, h);
        t.step(&[], 800, h);
        assert!((t.lanes()[0].weight - 10.0 * (-2.0f64).exp()).abs() < 1e-12);
        assert!((t.lanes()[0].weight - 1.3534).abs() < 1e-4);

        let mut t = Tracker::new(TrackerConfig::default(), ClassifierConfig::default());
        t.step(&[obs(shape.clone(), 1.0, 10, true)], 800, h);
        t.step(&[], 800, h);
        t.step(&[obs(shape, 1.0, 10, true)], 800, h);
        assert!((t.lanes()[0].weight - 13.679).abs() < 1e-3);
    }

    #[test]
    fn inactive_lanes_gain_less() {
        let h = 288;
        let mut t = Tracker::new(TrackerConfig::default(), ClassifierConfig::default());
        t.step(&[obs(lane_at(200.0, h), 0.8, 10, false)], 800, h);
        assert!((t.lanes()[0].weight - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tracks_dropped_after_max_miss() {
        let h = 100;
        let cfg = TrackerConfig {
            max_miss: 2,
            ..TrackerConfig::default()
        };
        let mut t = Tracker::new(cfg, ClassifierConfig::default());
        t.step(&[obs(lane_at(30.0, h), 1.0, 5, true)], 100, h);
        t.step(&[], 100, h);
        t.step(&[], 100, h);
        assert_eq!(t.lanes().len(), 1);
        t.step(&[], 100, h);
        assert!(t.lanes().is_empty());
    }

    #[test]
    fn select_active_per_side() {
        let h = 288;
        let mut t = Tracker::new(TrackerConfig::default(), ClassifierConfig::default());
        t.step(
            &[
                obs(lane_at(300.0, h), 1.0, 5, true),
                obs(lane_at(500.0, h), 1.0, 7, true),
            ],
            800,
            h,
        );
        let (l, r) = t.select_active();
        assert_eq!(l.unwrap().weight, 5.0);
        assert_eq!(r.unwrap().weight, 7.0);

        let mut t = Tracker::new(TrackerConfig::default(), ClassifierConfig::default());
        t.step(
            &[
                obs(lane_at(100.0, h), 1.0, 5, true),
                obs(lane_at(300.0, h), 1.0, 9, true),
            ],
            800,
            h,
        );
        let (l, r) = t.select_active();
        assert_eq!(l.unwrap().weight, 9.0);
        assert!(r.is_none());

        let mut t = Tracker::new(TrackerConfig::default(), ClassifierConfig::default());
        t.step(&[obs(lane_at(400.0, h), 1.0, 5, true)], 800, h);
        assert_eq!(t.lanes()[0].side, Side::Right);
    }

    #[test]
    fn no_pft_forgets_between_frames() {
        let h = 288;
        let cfg = TrackerConfig {
            pft_enabled: false,
            ..TrackerConfig::default()
        };
        let mut t = Tracker::new(cfg, ClassifierConfig::default());
        t.step(&[obs(lane_at(300.0, h), 1.0, 10, true)], 800, h);
        t.step(&[], 800, h);
        assert!(t.lanes().is_empty());
        assert_eq!(t.select_active(), (None, None));
    }

    #[test]
    fn snapshot_serializes() {
        let h = 288;
        let mut t = Tracker::new(TrackerConfig::default(), ClassifierConfig::default());
        t.step(&[obs(lane_at(300.0, h), 1.0, 10, true)], 800, h);
        let json = serde_json::to_string(&t.snapshot()).unwrap();
        assert!(json.contains("\"weight\":10.0"));
        let back: TrackerSnapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t.snapshot());
    }
}
