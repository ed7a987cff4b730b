//! `(u, v, d)` keypoints, pinhole back-projection and trace metrics.
//!
//! A keypoint is a pixel location plus metric depth. With known intrinsics it
//! maps one-to-one onto a 3D point in the camera frame, so a predicted trace
//! is both an image-space plan and a metric 3D plan. Dropping the depth
//! gives the 2D trace, keeping only the endpoints gives the start/end
//! referring points.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("depth {0} must be positive and finite")]
    Depth(f64),
    #[error("intrinsics need positive finite focal lengths, got fx = {fx}, fy = {fy}")]
    Intrinsics { fx: f64, fy: f64 },
    #[error("trace has {0} points; at least 2 are required")]
    TraceTooShort(usize),
    #[error("ground-truth trace has zero extent")]
    DegenerateReference,
    #[error("start check needs a nonempty target point cloud")]
    EmptyTarget,
    #[error("box min {min:?} exceeds max {max:?}")]
    InvertedBox { min: [f64; 3], max: [f64; 3] },
    #[error("scene distances must be nonnegative and finite: {0}")]
    SceneParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl std::ops::Add for Point3 {
    type Output = Point3;

    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Point3 {
    type Output = Point3;

    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn scale(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point3, t: f64) -> Point3 {
        self + (o - self).scale(t)
    }

    fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Pixel column, pixel row and metric depth in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub u: f64,
    pub v: f64,
    pub d: f64,
}

impl Keypoint {
    pub fn new(u: f64, v: f64, d: f64) -> Result<Self, GeometryError> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(GeometryError::Depth(d));
        }
        Ok(Self { u, v, d })
    }
}

/// Pinhole intrinsics without distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, GeometryError> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(GeometryError::Intrinsics { fx, fy });
        }
        Ok(Self { fx, fy, cx, cy })
    }
}

pub fn backproject(p: Keypoint, k: &CameraIntrinsics) -> Result<Point3, GeometryError> {
    if !(p.d > 0.0 && p.d.is_finite()) {
        return Err(GeometryError::Depth(p.d));
    }
    Ok(Point3::new(
        (p.u - k.cx) * p.d / k.fx,
        (p.v - k.cy) * p.d / k.fy,
        p.d,
    ))
}

pub fn project(p: Point3, k: &CameraIntrinsics) -> Result<Keypoint, GeometryError> {
    if !(p.z > 0.0 && p.z.is_finite()) {
        return Err(GeometryError::Depth(p.z));
    }
    Ok(Keypoint {
        u: k.fx * p.x / p.z + k.cx,
        v: k.fy * p.y / p.z + k.cy,
        d: p.z,
    })
}

/// Ordered keypoint sequence in execution order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub points: Vec<Keypoint>,
}

impl Trace {
    pub fn new(points: Vec<Keypoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reversed(&self) -> Trace {
        Trace::new(self.points.iter().rev().copied().collect())
    }

    pub fn to_3d(&self, k: &CameraIntrinsics) -> Result<Vec<Point3>, GeometryError> {
        self.points.iter().map(|&p| backproject(p, k)).collect()
    }
}

pub fn to_2d_trace(trace: &Trace) -> Vec<(f64, f64)> {
    trace.points.iter().map(|p| (p.u, p.v)).collect()
}

pub fn referring_endpoints(trace: &Trace) -> Result<(Keypoint, Keypoint), GeometryError> {
    match trace.points.as_slice() {
        [first, .., last] => Ok((*first, *last)),
        _ => Err(GeometryError::TraceTooShort(trace.len())),
    }
}

/// Resample a polyline to `count` points equally spaced in arc length.
/// A polyline of zero length collapses onto its first point.
pub fn resample_by_arc_length(points: &[Point3], count: usize) -> Vec<Point3> {
    assert!(!points.is_empty() && count >= 2);
    let mut cumulative = Vec::with_capacity(points.len());
    cumulative.push(0.0);
    for w in points.windows(2) {
        let next = cumulative.last().unwrap() + w[0].distance(w[1]);
        cumulative.push(next);
    }
    let total = *cumulative.last().unwrap();
    if total == 0.0 {
        return vec![points[0]; count];
    }
    let mut seg = 0;
    (0..count)
        .map(|i| {
            let s = total * i as f64 / (count - 1) as f64;
            while seg + 1 < points.len() - 1 && cumulative[seg + 1] < s {
                seg += 1;
            }
            let len = cumulative[seg + 1] - cumulative[seg];
            let t = if len == 0.0 {
                0.0
            } else {
                ((s - cumulative[seg]) / len).clamp(0.0, 1.0)
            };
            points[seg].lerp(points[seg + 1], t)
        })
        .collect()
}

/// Diagonal length of the axis-aligned bounding box of `points`.
pub fn bounding_diagonal(points: &[Point3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for a in 0..3 {
            lo[a] = lo[a].min(p.axis(a));
            hi[a] = hi[a].max(p.axis(a));
        }
    }
    Point3::from(hi).distance(Point3::from(lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmseNormalization {
    /// Meters.
    None,
    /// Divide by the bounding-box diagonal of the ground-truth trace.
    #[default]
    GroundTruthExtent,
}

pub const DEFAULT_RESAMPLE_POINTS: usize = 64;

/// Root-mean-square 3D distance between two traces after resampling both to
/// `samples` points by arc length.
pub fn trace_rmse(
    pred: &Trace,
    gt: &Trace,
    k: &CameraIntrinsics,
    normalize: RmseNormalization,
    samples: usize,
) -> Result<f64, GeometryError> {
    for t in [pred, gt] {
        if t.len() < 2 {
            return Err(GeometryError::TraceTooShort(t.len()));
        }
    }
    let pred3 = pred.to_3d(k)?;
    let gt3 = gt.to_3d(k)?;
    let scale = match normalize {
        RmseNormalization::None => 1.0,
        RmseNormalization::GroundTruthExtent => {
            let e = bounding_diagonal(&gt3);
            if e == 0.0 {
                return Err(GeometryError::DegenerateReference);
            }
            e
        }
    };
    let a = resample_by_arc_length(&pred3, samples);
    let b = resample_by_arc_length(&gt3, samples);
    let mse = a
        .iter()
        .zip(&b)
        .map(|(p, q)| {
            let d = p.distance(*q);
            d * d
        })
        .sum::<f64>()
        / samples as f64;
    Ok(mse.sqrt() / scale)
}

/// Axis-aligned box in the camera frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self, GeometryError> {
        let b = Self { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        // NaN bounds fail too
        if (0..3).any(|a| self.min[a].partial_cmp(&self.max[a]).is_none_or(|o| o.is_gt())) {
            return Err(GeometryError::InvertedBox {
                min: self.min,
                max: self.max,
            });
        }
        Ok(())
    }

    pub fn inflated(&self, margin: f64) -> Aabb {
        Aabb {
            min: self.min.map(|v| v - margin),
            max: self.max.map(|v| v + margin),
        }
    }

    pub fn center(&self) -> Point3 {
        Point3::new(
            (self.min[0] + self.max[0]) / 2.0,
            (self.min[1] + self.max[1]) / 2.0,
            (self.min[2] + self.max[2]) / 2.0,
        )
    }

    /// Closed containment.
    pub fn contains(&self, p: Point3) -> bool {
        (0..3).all(|a| self.min[a] <= p.axis(a) && p.axis(a) <= self.max[a])
    }

    /// Whether any point of segment `a`-`b` lies in the closed box (slab test).
    pub fn intersects_segment(&self, a: Point3, b: Point3) -> bool {
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for axis in 0..3 {
            let (start, dir) = (a.axis(axis), b.axis(axis) - a.axis(axis));
            let (lo, hi) = (self.min[axis], self.max[axis]);
            if dir == 0.0 {
                if start < lo || start > hi {
                    return false;
                }
                continue;
            }
            let (mut e, mut x) = ((lo - start) / dir, (hi - start) / dir);
            if e > x {
                std::mem::swap(&mut e, &mut x);
            }
            t0 = t0.max(e);
            t1 = t1.min(x);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

/// Evaluation geometry for one trace, all in the camera frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub target_points: Vec<[f64; 3]>,
    #[serde(rename = "dest_box")]
    pub destination_box: Aabb,
    #[serde(rename = "obstacles", default)]
    pub obstacle_boxes: Vec<Aabb>,
    pub start_radius: f64,
    pub end_margin: f64,
    pub clearance: f64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        self.destination_box.validate()?;
        for b in &self.obstacle_boxes {
            b.validate()?;
        }
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !(self.start_radius > 0.0 && self.start_radius.is_finite()) {
            return Err(GeometryError::SceneParameter("start_radius"));
        }
        if !ok(self.end_margin) {
            return Err(GeometryError::SceneParameter("end_margin"));
        }
        if !ok(self.clearance) {
            return Err(GeometryError::SceneParameter("clearance"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvaluation {
    pub start_ok: bool,
    pub end_ok: bool,
    pub collision_free: bool,
    pub success: bool,
}

/// Grasp proximity, placement containment and collision checks for one trace.
///
/// Collisions are tested on the continuous polyline: every segment is
/// intersected exactly against each obstacle inflated by the clearance.
pub fn evaluate_trace(
    trace: &Trace,
    scene: &SceneSpec,
    k: &CameraIntrinsics,
) -> Result<TraceEvaluation, GeometryError> {
    scene.validate()?;
    if trace.len() < 2 {
        return Err(GeometryError::TraceTooShort(trace.len()));
    }
    if scene.target_points.is_empty() {
        return Err(GeometryError::EmptyTarget);
    }
    let pts = trace.to_3d(k)?;
    let start = pts[0];
    let end = pts[pts.len() - 1];

    let start_ok = scene
        .target_points
        .iter()
        .map(|&t| start.distance(Point3::from(t)))
        .fold(f64::INFINITY, f64::min)
        <= scene.start_radius;
    let end_ok = scene
        .destination_box
        .inflated(scene.end_margin)
        .contains(end);
    let inflated: Vec<Aabb> = scene
        .obstacle_boxes
        .iter()
        .map(|b| b.inflated(scene.clearance))
        .collect();
    let collision_free = pts
        .windows(2)
        .all(|w| inflated.iter().all(|b| !b.intersects_segment(w[0], w[1])));

    Ok(TraceEvaluation {
        start_ok,
        end_ok,
        collision_free,
        success: start_ok && end_ok && collision_free,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_k() -> CameraIntrinsics {
        CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap()
    }

    fn kp(u: f64, v: f64, d: f64) -> Keypoint {
        Keypoint::new(u, v, d).unwrap()
    }

    #[test]
    fn pinhole_fixtures() {
        let k = unit_k();
        assert_eq!(backproject(kp(2.0, 3.0, 4.0), &k).unwrap(), Point3::new(8.0, 12.0, 4.0));
        assert_eq!(project(Point3::new(8.0, 12.0, 4.0), &k).unwrap(), kp(2.0, 3.0, 4.0));
        let k2 = CameraIntrinsics::new(600.0, 610.0, 320.0, 240.0).unwrap();
        assert_eq!(backproject(kp(320.0, 240.0, 1.5), &k2).unwrap(), Point3::new(0.0, 0.0, 1.5));
        assert_eq!(project(Point3::new(0.0, 0.0, 1.5), &k2).unwrap(), kp(320.0, 240.0, 1.5));
        assert!(matches!(
            backproject(Keypoint { u: 0.0, v: 0.0, d: 0.0 }, &k),
            Err(GeometryError::Depth(_))
        ));
        assert!(project(Point3::new(1.0, 1.0, -1.0), &k).is_err());
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(Keypoint::new(1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn subspace_projections() {
        let t = Trace::new(vec![kp(1.0, 2.0, 3.0), kp(4.0, 5.0, 6.0)]);
        assert_eq!(to_2d_trace(&t), vec![(1.0, 2.0), (4.0, 5.0)]);
        let single = Trace::new(vec![kp(1.0, 2.0, 3.0)]);
        assert_eq!(to_2d_trace(&single), vec![(1.0, 2.0)]);
        assert!(matches!(
            referring_endpoints(&single),
            Err(GeometryError::TraceTooShort(1))
        ));
        assert_eq!(referring_endpoints(&t).unwrap(), (t.points[0], t.points[1]));

        let five = Trace::new((0..5).map(|i| kp(i as f64, 0.0, 1.0)).collect());
        assert_eq!(referring_endpoints(&five).unwrap(), (five.points[0], five.points[4]));

        let mut joined = five.points.clone();
        joined.extend(t.points.iter().copied());
        let (s, e) = referring_endpoints(&Trace::new(joined)).unwrap();
        assert_eq!((s, e), (five.points[0], t.points[1]));
    }

    #[test]
    fn rmse_fixtures() {
        let k = unit_k();
        let gt = Trace::new(vec![kp(0.0, 0.0, 1.0), kp(0.5, 0.0, 1.0), kp(0.5, 0.5, 2.0)]);
        let n = RmseNormalization::GroundTruthExtent;
        assert_eq!(trace_rmse(&gt, &gt, &k, n, 64).unwrap(), 0.0);
        let rev = gt.reversed();
        assert!(trace_rmse(&rev, &gt, &k, n, 64).unwrap() > 0.0);
        let flat = Trace::new(vec![kp(0.0, 0.0, 1.0), kp(0.0, 0.0, 1.0)]);
        assert!(matches!(
            trace_rmse(&gt, &flat, &k, n, 64),
            Err(GeometryError::DegenerateReference)
        ));
        assert!(trace_rmse(&gt, &flat, &k, RmseNormalization::None, 64).is_ok());
    }

    #[test]
    fn resample_endpoints_and_spacing() {
        let pts = [Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(1.0, 3.0, 0.0)];
        let r = resample_by_arc_length(&pts, 5);
        assert_eq!(r[0], pts[0]);
        assert!(r[4].distance(pts[2]) < 1e-12);
        assert!(r[1].distance(Point3::new(1.0, 0.0, 0.0)) < 1e-12);
        assert!(r[2].distance(Point3::new(1.0, 1.0, 0.0)) < 1e-12);
    }

    fn scene() -> SceneSpec {
        SceneSpec {
            target_points: vec![[0.0, 0.0, 1.0], [0.05, 0.0, 1.0]],
            destination_box: Aabb::new([0.4, -0.1, 0.9], [0.6, 0.1, 1.1]).unwrap(),
            obstacle_boxes: vec![Aabb::new([0.2, 0.0, 0.9], [0.3, 0.2, 1.1]).unwrap()],
            start_radius: 0.02,
            end_margin: 0.01,
            clearance: 0.01,
        }
    }

    /// Start on a target point, arc over the obstacle (negative y is "up"),
    /// finish at the destination box center.
    fn good_trace(k: &CameraIntrinsics) -> Trace {
        let pts = [
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.1, -0.2, 1.0),
            Point3::new(0.5, -0.2, 1.0),
            Point3::new(0.5, 0.0, 1.0),
        ];
        Trace::new(pts.iter().map(|&p| project(p, k).unwrap()).collect())
    }

    #[test]
    fn evaluate_fixture() {
        let k = CameraIntrinsics::new(600.0, 600.0, 320.0, 240.0).unwrap();
        let s = scene();
        let good = good_trace(&k);
        let r = evaluate_trace(&good, &s, &k).unwrap();
        assert_eq!(
            r,
            TraceEvaluation {
                start_ok: true,
                end_ok: true,
                collision_free: true,
                success: true
            }
        );

        let mut bad = good.clone();
        bad.points[2] = project(Point3::new(0.25, 0.1, 1.0), &k).unwrap();
        let r = evaluate_trace(&bad, &s, &k).unwrap();
        assert!(!r.collision_free && !r.success && r.start_ok && r.end_ok);

        let mut far = good.clone();
        *far.points.last_mut().unwrap() = project(Point3::new(0.8, 0.0, 1.0), &k).unwrap();
        let r = evaluate_trace(&far, &s, &k).unwrap();
        assert!(!r.end_ok && !r.success);

        let mut empty = s.clone();
        empty.target_points.clear();
        assert!(matches!(evaluate_trace(&good, &empty, &k), Err(GeometryError::EmptyTarget)));
    }

    #[test]
    fn segment_crossing_between_vertices_collides() {
        // Both vertices clear the box; the segment between them does not.
        let b = Aabb::new([-0.1, -0.1, -0.1], [0.1, 0.1, 0.1]).unwrap();
        assert!(b.intersects_segment(Point3::new(-1.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)));
        assert!(!b.intersects_segment(Point3::new(-1.0, 0.2, 0.0), Point3::new(1.0, 0.2, 0.0)));
        assert!(b.intersects_segment(Point3::new(0.0, 0.0, 0.0), Point3::new(0.0, 0.0, 0.0)));
        assert!(!b.intersects_segment(Point3::new(0.5, 0.5, 0.5), Point3::new(0.2, 0.2, 0.2)));
    }

    #[test]
    fn inverted_box_rejected() {
        assert!(Aabb::new([1.0, 0.0, 0.0], [0.0, 1.0, 1.0]).is_err());
    }

    fn arb_k() -> impl Strategy<Value = CameraIntrinsics> {
        (1.0f64..2000.0, 1.0f64..2000.0, -500.0f64..1500.0, -500.0f64..1500.0)
            .prop_map(|(fx, fy, cx, cy)| CameraIntrinsics::new(fx, fy, cx, cy).unwrap())
    }

    fn arb_trace() -> impl Strategy<Value = Trace> {
        proptest::collection::vec((-200.0f64..1000.0, -200.0f64..800.0, 0.1f64..5.0), 2..20)
            .prop_map(|v| Trace::new(v.into_iter().map(|(u, v, d)| kp(u, v, d)).collect()))
    }

    proptest! {
        #[test]
        fn projection_round_trip(k in arb_k(), u in -1e3f64..3e3, v in -1e3f64..3e3, d in 0.01f64..50.0) {
            let p = kp(u, v, d);
            let back = project(backproject(p, &k).unwrap(), &k).unwrap();
            for (a, b) in [(back.u, p.u), (back.v, p.v), (back.d, p.d)] {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }

        #[test]
        fn reversal_commutes(t in arb_trace()) {
            let r = t.reversed();
            let mut flat = to_2d_trace(&t);
            flat.reverse();
            prop_assert_eq!(to_2d_trace(&r), flat);
            let (s, e) = referring_endpoints(&t).unwrap();
            prop_assert_eq!(referring_endpoints(&r).unwrap(), (e, s));
            prop_assert_eq!(to_2d_trace(&t).len(), t.len());
        }

        #[test]
        fn rmse_translation_invariant(
            gt in arb_trace(),
            pred in arb_trace(),
            shift in (-0.5f64..0.5, -0.5f64..0.5, 0.0f64..1.0),
        ) {
            let k = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0).unwrap();
            let t = Point3::new(shift.0, shift.1, shift.2);
            let mv = |tr: &Trace| Trace::new(
                tr.to_3d(&k).unwrap().into_iter().map(|p| project(p + t, &k).unwrap()).collect()
            );
            let none = RmseNormalization::None;
            let a = trace_rmse(&pred, &gt, &k, none, 64).unwrap();
            let b = trace_rmse(&mv(&pred), &mv(&gt), &k, none, 64).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
            prop_assert_eq!(trace_rmse(&gt, &gt, &k, none, 64).unwrap(), 0.0);
        }

        #[test]
        fn success_monotone_in_thresholds(
            t in arb_trace(),
            shrink_r in 1e-6f64..1.0,
            grow_c in 1.0f64..5.0,
        ) {
            let k = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0).unwrap();
            let mut s = scene();
            s.start_radius = 0.5;
            s.clearance = 0.05;
            let base = evaluate_trace(&t, &s, &k).unwrap();

            let mut tighter_radius = s.clone();
            tighter_radius.start_radius *= shrink_r;
            let r = evaluate_trace(&t, &tighter_radius, &k).unwrap();
            prop_assert!(!(r.success && !base.success));
            prop_assert!(!(r.start_ok && !base.start_ok));

            // A larger clearance inflates the obstacles.
            let mut wider_clearance = s.clone();
            wider_clearance.clearance *= grow_c;
            let c = evaluate_trace(&t, &wider_clearance, &k).unwrap();
            prop_assert!(!(c.success && !base.success));
            prop_assert!(!(c.collision_free && !base.collision_free));
        }
    }
}
