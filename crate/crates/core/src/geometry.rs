//! Sector geometry: route polylines, crossings, merge points, and the
//! distance queries the environment is built on.
//!
//! Positions are planar Cartesian in nautical miles. Aircraft positions are
//! stored as (route id, arc length) and only converted to planar points for
//! separation queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for "this point lies on that route" checks, in nmi.
pub const ON_ROUTE_TOL_NMI: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("arc position {arc} nmi outside route {route} (length {length} nmi)")]
    ArcOutOfRange { route: RouteId, arc: f64, length: f64 },
    #[error("unknown route id {0}")]
    UnknownRoute(RouteId),
    #[error("invalid sector layout: {0}")]
    InvalidLayout(String),
}

/// Planar point in nautical miles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Standard planar Euclidean distance in nmi.
pub fn euclidean_separation(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Dense route identifier; routes in a layout are numbered `0..R-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RouteId(pub usize);

impl fmt::Display for RouteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Routes are conventionally labelled R1, R2, ... on sector charts.
        write!(f, "R{}", self.0 + 1)
    }
}

/// A fixed route: an ordered polyline with pre-computed cumulative arc
/// lengths, so that any position on the route is a single scalar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Route {
    pub id: RouteId,
    pub waypoints: Vec<Point>,
    /// Arc length from the route start to each waypoint; `cumulative[0] == 0`.
    pub cumulative_lengths: Vec<f64>,
}

impl Route {
    pub fn new(id: RouteId, waypoints: Vec<Point>) -> Result<Self, GeometryError> {
        if waypoints.len() < 2 {
            return Err(GeometryError::InvalidLayout(format!(
                "route {id} has {} waypoint(s); need at least 2",
                waypoints.len()
            )));
        }
        let mut cumulative = Vec::with_capacity(waypoints.len());
        cumulative.push(0.0);
        for pair in waypoints.windows(2) {
            let seg = euclidean_separation(pair[0], pair[1]);
            if seg <= 0.0 {
                return Err(GeometryError::InvalidLayout(format!(
                    "route {id} has a zero-length segment"
                )));
            }
            cumulative.push(cumulative.last().unwrap() + seg);
        }
        Ok(Route { id, waypoints, cumulative_lengths: cumulative })
    }

    /// Total route length in nmi.
    pub fn length(&self) -> f64 {
        *self.cumulative_lengths.last().unwrap()
    }

    fn check_arc(&self, arc: f64) -> Result<(), GeometryError> {
        if !arc.is_finite() || arc < 0.0 || arc > self.length() {
            return Err(GeometryError::ArcOutOfRange {
                route: self.id,
                arc,
                length: self.length(),
            });
        }
        Ok(())
    }

    /// Planar point at arc length `arc`, by linear interpolation along the
    /// polyline.
    pub fn position_at(&self, arc: f64) -> Result<Point, GeometryError> {
        self.check_arc(arc)?;
        // Index of the segment containing `arc`: last waypoint with
        // cumulative <= arc, clamped so arc == length lands on the final
        // segment.
        let idx = self
            .cumulative_lengths
            .partition_point(|&c| c <= arc)
            .saturating_sub(1)
            .min(self.waypoints.len() - 2);
        let seg_start = self.cumulative_lengths[idx];
        let seg_len = self.cumulative_lengths[idx + 1] - seg_start;
        let t = (arc - seg_start) / seg_len;
        let a = self.waypoints[idx];
        let b = self.waypoints[idx + 1];
        Ok(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
    }

    /// Remaining distance to the route end: `length - arc`.
    pub fn distance_to_goal(&self, arc: f64) -> Result<f64, GeometryError> {
        self.check_arc(arc)?;
        Ok(self.length() - arc)
    }

    /// Arc position of a planar point that lies on this route (within
    /// `tol` nmi of the polyline), or `None` if it does not.
    pub fn arc_position_of(&self, p: Point, tol: f64) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None; // (distance, arc)
        for (idx, pair) in self.waypoints.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let seg_len2 = dx * dx + dy * dy;
            let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / seg_len2).clamp(0.0, 1.0);
            let proj = Point::new(a.x + t * dx, a.y + t * dy);
            let d = euclidean_separation(p, proj);
            let arc = self.cumulative_lengths[idx] + t * seg_len2.sqrt();
            if best.map(|(bd, _)| d < bd).unwrap_or(true) {
                best = Some((d, arc));
            }
        }
        best.and_then(|(d, arc)| (d <= tol).then_some(arc))
    }
}

/// A point where two routes cross. `arc_positions[k]` is the along-route
/// distance of the crossing on `routes[k]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingPoint {
    pub routes: (RouteId, RouteId),
    pub arc_positions: (f64, f64),
}

/// A point where several upstream routes join a common downstream polyline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergePoint {
    pub upstream_routes: Vec<RouteId>,
    /// Along-route distance of the merge point on each upstream route.
    pub arc_positions: Vec<f64>,
    /// The common downstream polyline, starting at the merge point itself.
    pub shared_segment: Vec<Point>,
}

/// Reference to a crossing or merge point within a layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConflictPointId {
    Crossing(usize),
    Merge(usize),
}

impl fmt::Display for ConflictPointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConflictPointId::Crossing(i) => write!(f, "I{}", i + 1),
            ConflictPointId::Merge(i) => write!(f, "M{}", i + 1),
        }
    }
}

/// A crossing or merge point shared by a pair of routes, with its arc
/// position on each of the two.
#[derive(Debug, Clone, Copy)]
pub struct SharedPoint {
    pub id: ConflictPointId,
    pub arc_on_first: f64,
    pub arc_on_second: f64,
}

/// Immutable sector geometry: routes plus crossing/merge annotations and the
/// derived route-conflict relation.
///
/// Serializes as its three defining fields; the derived lookup tables are
/// rebuilt by [`SectorLayout::new`].
#[derive(Debug, Clone)]
pub struct SectorLayout {
    routes: Vec<Route>,
    intersections: Vec<CrossingPoint>,
    merge_points: Vec<MergePoint>,
    /// Routes sharing a crossing or merge point with each route.
    conflict_sets: Vec<BTreeSet<RouteId>>,
    /// Per route: conflict points on it, sorted by arc position.
    points_by_route: Vec<Vec<(f64, ConflictPointId)>>,
    /// Per unordered route pair: the points both routes pass through.
    shared_by_pair: BTreeMap<(RouteId, RouteId), Vec<SharedPoint>>,
}

impl SectorLayout {
    pub fn new(
        routes: Vec<Route>,
        intersections: Vec<CrossingPoint>,
        merge_points: Vec<MergePoint>,
    ) -> Result<Self, GeometryError> {
        for (idx, route) in routes.iter().enumerate() {
            if route.id.0 != idx {
                return Err(GeometryError::InvalidLayout(format!(
                    "route ids must be dense 0..{}; found {} at index {idx}",
                    routes.len(),
                    route.id.0
                )));
            }
        }
        let route = |id: RouteId| -> Result<&Route, GeometryError> {
            routes.get(id.0).ok_or(GeometryError::UnknownRoute(id))
        };

        for (i, c) in intersections.iter().enumerate() {
            if c.routes.0 == c.routes.1 {
                return Err(GeometryError::InvalidLayout(format!(
                    "crossing {i} references route {} twice",
                    c.routes.0
                )));
            }
            let pa = route(c.routes.0)?.position_at(c.arc_positions.0)?;
            let pb = route(c.routes.1)?.position_at(c.arc_positions.1)?;
            if euclidean_separation(pa, pb) > ON_ROUTE_TOL_NMI {
                return Err(GeometryError::InvalidLayout(format!(
                    "crossing {i} does not lie on both routes: {} from coincidence",
                    euclidean_separation(pa, pb)
                )));
            }
        }

        for (i, m) in merge_points.iter().enumerate() {
            if m.upstream_routes.len() < 2 || m.upstream_routes.len() != m.arc_positions.len() {
                return Err(GeometryError::InvalidLayout(format!(
                    "merge {i} needs >= 2 upstream routes with one arc position each"
                )));
            }
            if m.shared_segment.len() < 2 {
                return Err(GeometryError::InvalidLayout(format!(
                    "merge {i} has a degenerate shared segment"
                )));
            }
            for (&rid, &arc) in m.upstream_routes.iter().zip(&m.arc_positions) {
                let r = route(rid)?;
                let at_merge = r.position_at(arc)?;
                if euclidean_separation(at_merge, m.shared_segment[0]) > ON_ROUTE_TOL_NMI {
                    return Err(GeometryError::InvalidLayout(format!(
                        "merge {i}: route {rid} arc {arc} is not at the shared segment start"
                    )));
                }
                // The downstream geometry of every upstream route must
                // coincide with the shared segment point-for-point.
                let tail: Vec<Point> = r
                    .waypoints
                    .iter()
                    .zip(&r.cumulative_lengths)
                    .filter(|&(_, &c)| c > arc + ON_ROUTE_TOL_NMI)
                    .map(|(&p, _)| p)
                    .collect();
                if tail.len() != m.shared_segment.len() - 1
                    || tail
                        .iter()
                        .zip(&m.shared_segment[1..])
                        .any(|(&a, &b)| euclidean_separation(a, b) > ON_ROUTE_TOL_NMI)
                {
                    return Err(GeometryError::InvalidLayout(format!(
                        "merge {i}: route {rid} does not follow the shared segment downstream"
                    )));
                }
            }
        }

        let mut conflict_sets = vec![BTreeSet::new(); routes.len()];
        let mut points_by_route: Vec<Vec<(f64, ConflictPointId)>> = vec![Vec::new(); routes.len()];
        let mut shared_by_pair: BTreeMap<(RouteId, RouteId), Vec<SharedPoint>> = BTreeMap::new();

        let mut record_pair =
            |a: RouteId, arc_a: f64, b: RouteId, arc_b: f64, id: ConflictPointId| {
                conflict_sets[a.0].insert(b);
                conflict_sets[b.0].insert(a);
                let (first, second, arc_first, arc_second) =
                    if a <= b { (a, b, arc_a, arc_b) } else { (b, a, arc_b, arc_a) };
                shared_by_pair.entry((first, second)).or_default().push(SharedPoint {
                    id,
                    arc_on_first: arc_first,
                    arc_on_second: arc_second,
                });
            };

        for (i, c) in intersections.iter().enumerate() {
            let id = ConflictPointId::Crossing(i);
            record_pair(c.routes.0, c.arc_positions.0, c.routes.1, c.arc_positions.1, id);
            points_by_route[c.routes.0 .0].push((c.arc_positions.0, id));
            points_by_route[c.routes.1 .0].push((c.arc_positions.1, id));
        }
        for (i, m) in merge_points.iter().enumerate() {
            let id = ConflictPointId::Merge(i);
            for k in 0..m.upstream_routes.len() {
                points_by_route[m.upstream_routes[k].0].push((m.arc_positions[k], id));
                for j in k + 1..m.upstream_routes.len() {
                    record_pair(
                        m.upstream_routes[k],
                        m.arc_positions[k],
                        m.upstream_routes[j],
                        m.arc_positions[j],
                        id,
                    );
                }
            }
        }
        for list in &mut points_by_route {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
        }

        Ok(SectorLayout {
            routes,
            intersections,
            merge_points,
            conflict_sets,
            points_by_route,
            shared_by_pair,
        })
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn intersections(&self) -> &[CrossingPoint] {
        &self.intersections
    }

    pub fn merge_points(&self) -> &[MergePoint] {
        &self.merge_points
    }

    pub fn route(&self, id: RouteId) -> Result<&Route, GeometryError> {
        self.routes.get(id.0).ok_or(GeometryError::UnknownRoute(id))
    }

    /// All routes sharing a crossing or merge point with `id`.
    pub fn conflicting_routes(&self, id: RouteId) -> Result<&BTreeSet<RouteId>, GeometryError> {
        self.conflict_sets.get(id.0).ok_or(GeometryError::UnknownRoute(id))
    }

    /// Distance to the nearest crossing/merge point strictly ahead of `arc`
    /// on the given route, or `None` once all such points are passed.
    pub fn next_intersection_distance(
        &self,
        id: RouteId,
        arc: f64,
    ) -> Result<Option<(f64, ConflictPointId)>, GeometryError> {
        let route = self.route(id)?;
        route.check_arc(arc)?;
        Ok(self.points_by_route[id.0]
            .iter()
            .find(|&&(p_arc, _)| p_arc > arc)
            .map(|&(p_arc, pid)| (p_arc - arc, pid)))
    }

    /// Crossing/merge points shared by the two routes, with arc positions
    /// given on `a` and `b` respectively. Empty when the routes do not
    /// conflict (or `a == b`).
    pub fn shared_points(&self, a: RouteId, b: RouteId) -> Vec<SharedPoint> {
        let key = if a <= b { (a, b) } else { (b, a) };
        let swap = a > b;
        self.shared_by_pair
            .get(&key)
            .map(|points| {
                points
                    .iter()
                    .map(|p| {
                        if swap {
                            SharedPoint {
                                id: p.id,
                                arc_on_first: p.arc_on_second,
                                arc_on_second: p.arc_on_first,
                            }
                        } else {
                            *p
                        }
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Planar position of an aircraft given as (route, arc).
    pub fn position(&self, id: RouteId, arc: f64) -> Result<Point, GeometryError> {
        self.route(id)?.position_at(arc)
    }
}

impl Serialize for SectorLayout {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("SectorLayout", 3)?;
        s.serialize_field("routes", &self.routes)?;
        s.serialize_field("intersections", &self.intersections)?;
        s.serialize_field("merge_points", &self.merge_points)?;
        s.end()
    }
}
