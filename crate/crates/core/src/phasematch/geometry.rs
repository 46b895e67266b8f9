use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2};
use serde::Serialize;

use super::cones::EmissionCone;
use crate::direction::{angle_between, Direction, Vec3};
use crate::error::{Error, Result};

type P2 = Vector2<f64>;

/// One crossing of the external slow and fast cones.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntersectionPoint {
    pub direction: Direction,
    /// Acute angle between the two cone tangents at the crossing, degrees.
    pub cone_angle_deg: f64,
    /// Internal direction of the slow photon that exits along `direction`.
    pub internal_slow: Direction,
    /// Internal direction of the fast photon that exits along `direction`.
    pub internal_fast: Direction,
}

/// Emission geometry for one pump direction.
#[derive(Debug, Clone, Serialize)]
pub struct PdcGeometry {
    pub pump: Direction,
    pub slow_radius_deg: f64,
    pub fast_radius_deg: f64,
    /// Upper (larger e3 component) crossing first.
    pub intersections: [IntersectionPoint; 2],
    pub separation_deg: f64,
    /// Mean of the two crossing angles.
    pub intersection_angle_deg: f64,
    /// Unit connector of the crossings, oriented toward +e3.
    pub p: Direction,
    /// Connector of the far sides of the two circles made orthogonal to T and P.
    pub r: Direction,
    /// The far-side connector before orthogonalization.
    pub r_raw: Direction,
    pub angle_tp_deg: f64,
    pub angle_tr_deg: f64,
    pub angle_pr_deg: f64,
}

/// Best-fit circle axis of points on the unit sphere (normal of the
/// least-squares plane through them) and their mean angle from it, degrees.
pub fn fit_cone_axis(points: &[Direction]) -> Option<(Direction, f64)> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vec3::zeros(), |acc, p| acc + p.vector()) / n;
    let cov = points.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p.vector() - centroid;
        acc + d * d.transpose()
    });
    let eig = SymmetricEigen::new(cov);
    let i = eig.eigenvalues.imin();
    let mut axis: Vec3 = eig.eigenvectors.column(i).into();
    if axis.dot(&centroid) < 0.0 {
        axis = -axis;
    }
    let radius = points.iter().map(|p| angle_between(&axis, &p.vector())).sum::<f64>() / n;
    Some((Direction::new_unchecked(axis), radius.to_degrees()))
}

struct Chart {
    t: Vec3,
    a: Vec3,
    b: Vec3,
}

impl Chart {
    fn new(pump: &Direction) -> Self {
        let (a, b) = pump.transverse_basis();
        Self { t: pump.vector(), a, b }
    }

    /// Gnomonic coordinates around the pump.
    fn to_plane(&self, v: &Vec3) -> P2 {
        let w = v.dot(&self.t);
        P2::new(v.dot(&self.a) / w, v.dot(&self.b) / w)
    }

    fn to_sphere(&self, p: &P2) -> Vec3 {
        (self.t + self.a * p.x + self.b * p.y).normalize()
    }

    fn tangent(&self, at: &Vec3, d: &P2) -> Vec3 {
        let v = self.a * d.x + self.b * d.y;
        v - at * at.dot(&v)
    }
}

/// Catmull-Rom curve through a closed polyline.
struct Spline<'a> {
    pts: &'a [P2],
}

impl Spline<'_> {
    fn ctrl(&self, i: isize) -> P2 {
        let n = self.pts.len() as isize;
        self.pts[i.rem_euclid(n) as usize]
    }

    fn eval(&self, i: usize, s: f64) -> (P2, P2) {
        let i = i as isize;
        let (p0, p1, p2, p3) = (self.ctrl(i - 1), self.ctrl(i), self.ctrl(i + 1), self.ctrl(i + 2));
        let c1 = p2 - p0;
        let c2 = p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3;
        let c3 = -p0 + p1 * 3.0 - p2 * 3.0 + p3;
        let pos = (p1 * 2.0 + c1 * s + c2 * (s * s) + c3 * (s * s * s)) * 0.5;
        let der = (c1 + c2 * (2.0 * s) + c3 * (3.0 * s * s)) * 0.5;
        (pos, der)
    }
}

struct Crossing {
    i: usize,
    s: f64,
    j: usize,
    t: f64,
}

fn segment_crossings(u: &[P2], v: &[P2]) -> Vec<Crossing> {
    let seg_ok = |pts: &[P2]| -> Vec<bool> {
        let lens: Vec<f64> = (0..pts.len()).map(|i| (pts[(i + 1) % pts.len()] - pts[i]).norm()).collect();
        let mut sorted = lens.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        lens.iter().map(|&l| l <= 5.0 * median.max(1e-15)).collect()
    };
    let (ok_u, ok_v) = (seg_ok(u), seg_ok(v));
    let mut out = Vec::new();
    for i in 0..u.len() {
        if !ok_u[i] {
            continue;
        }
        let (p, r) = (u[i], u[(i + 1) % u.len()] - u[i]);
        for j in 0..v.len() {
            if !ok_v[j] {
                continue;
            }
            let (q, w) = (v[j], v[(j + 1) % v.len()] - v[j]);
            let denom = r.perp(&w);
            if denom.abs() < 1e-300 {
                continue;
            }
            let qp = q - p;
            let s = qp.perp(&w) / denom;
            let t = qp.perp(&r) / denom;
            if (0.0..1.0).contains(&s) && (0.0..1.0).contains(&t) {
                out.push(Crossing { i, s, j, t });
            }
        }
    }
    out
}

/// Newton refinement of a chord crossing on the two splines.
fn refine(a: &Spline, b: &Spline, c: &Crossing) -> (P2, P2, P2, f64, f64) {
    let (mut s, mut t) = (c.s, c.t);
    for _ in 0..30 {
        let (pa, da) = a.eval(c.i, s);
        let (pb, db) = b.eval(c.j, t);
        let f = pa - pb;
        let jac = Matrix2::new(da.x, -db.x, da.y, -db.y);
        let Some(inv) = jac.try_inverse() else { break };
        let step = inv * f;
        s -= step.x;
        t -= step.y;
        if step.norm() < 1e-15 {
            break;
        }
    }
    if !(-0.5..=1.5).contains(&s) || !(-0.5..=1.5).contains(&t) {
        s = c.s;
        t = c.t;
    }
    let (pa, da) = a.eval(c.i, s);
    let (_, db) = b.eval(c.j, t);
    (pa, da, db, s, t)
}

fn lerp_dir(list: &[Direction], i: usize, s: f64) -> Direction {
    let a = list[i].vector();
    let b = list[(i + 1) % list.len()].vector();
    Direction::new_unchecked(a * (1.0 - s) + b * s)
}

fn min_separation_deg(u: &[Direction], v: &[Direction]) -> f64 {
    u.iter().flat_map(|a| v.iter().map(move |b| a.angle_deg(b))).fold(f64::INFINITY, f64::min)
}

/// Intersection points, T/P/R frame and crossing angles of two external cones.
pub fn cone_geometry(slow: &EmissionCone, fast: &EmissionCone, pump: &Direction) -> Result<PdcGeometry> {
    if slow.len() < 4 || fast.len() < 4 {
        return Err(Error::InvalidInput("cones need at least 4 points each".into()));
    }
    if slow.len() == fast.len() && slow.external.iter().zip(&fast.external).all(|(a, b)| a.angle_deg(b) < 1e-9) {
        return Err(Error::InvalidInput("identical cones: degenerate intersection".into()));
    }
    let chart = Chart::new(pump);
    let us: Vec<P2> = slow.external.iter().map(|d| chart.to_plane(&d.vector())).collect();
    let vs: Vec<P2> = fast.external.iter().map(|d| chart.to_plane(&d.vector())).collect();
    let crossings = segment_crossings(&us, &vs);
    if crossings.len() < 2 {
        return Err(Error::NoIntersection { min_separation_deg: min_separation_deg(&slow.external, &fast.external) });
    }
    let (sa, sb) = (Spline { pts: &us }, Spline { pts: &vs });
    let mut points: Vec<(IntersectionPoint, Vec3)> = crossings
        .iter()
        .map(|c| {
            let (pos, da, db, s, t) = refine(&sa, &sb, c);
            let x = chart.to_sphere(&pos);
            let (ta, tb) = (chart.tangent(&x, &da), chart.tangent(&x, &db));
            let angle = ta.cross(&tb).norm().atan2(ta.dot(&tb).abs()).to_degrees();
            let (si, sf) = (s.clamp(0.0, 1.0), t.clamp(0.0, 1.0));
            let ip = IntersectionPoint {
                direction: Direction::new_unchecked(x),
                cone_angle_deg: angle,
                internal_slow: lerp_dir(&slow.internal, c.i, si),
                internal_fast: lerp_dir(&fast.internal, c.j, sf),
            };
            (ip, x)
        })
        .collect();
    // Keep the most widely separated pair of crossings.
    let mut best = (0, 1, -1.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = angle_between(&points[i].1, &points[j].1);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (mut first, mut second) = (points.swap_remove(best.1.max(best.0)), points.swap_remove(best.0.min(best.1)));
    if second.1.z > first.1.z {
        std::mem::swap(&mut first, &mut second);
    }
    let t = pump.vector();
    let mut p = first.1 - second.1;
    if p.z < 0.0 {
        p = -p;
    }
    let p = p.normalize();

    // Far sides of the circles, across the line of crossings.
    let (axis_s, axis_f) = match (slow.axis, fast.axis) {
        (Some(a), Some(b)) => (a.vector(), b.vector()),
        _ => return Err(Error::InvalidInput("cone axis fit failed".into())),
    };
    let mut w = axis_s - axis_f;
    w -= t * t.dot(&w) + p * p.dot(&w);
    let extreme = |pts: &[Direction], sign: f64| -> Vec3 {
        pts.iter().map(|d| d.vector()).max_by(|a, b| (sign * a.dot(&w)).total_cmp(&(sign * b.dot(&w)))).expect("non-empty")
    };
    let connector = extreme(&slow.external, 1.0) - extreme(&fast.external, -1.0);
    let r_raw = connector.normalize();
    let r = (connector - t * t.dot(&connector) - p * p.dot(&connector)).normalize();

    let deg = |a: &Vec3, b: &Vec3| angle_between(a, b).to_degrees();
    Ok(PdcGeometry {
        pump: *pump,
        slow_radius_deg: slow.angular_radius_deg,
        fast_radius_deg: fast.angular_radius_deg,
        separation_deg: deg(&first.1, &second.1),
        intersection_angle_deg: 0.5 * (first.0.cone_angle_deg + second.0.cone_angle_deg),
        intersections: [first.0, second.0],
        p: Direction::new_unchecked(p),
        r: Direction::new_unchecked(r),
        r_raw: Direction::new_unchecked(r_raw),
        angle_tp_deg: deg(&t, &p),
        angle_tr_deg: deg(&t, &r),
        angle_pr_deg: deg(&p, &r),
    })
}
