use std::collections::{BTreeMap, BTreeSet};

use super::osm::StreetGraph;
use crate::error::{Error, Result};
use crate::model::{ContextEvent, IntersectionType, Priority, TelemetrySample};

pub const EARTH_RADIUS_M: f64 = 6_371_008.8;
pub const DEFAULT_MATCH_RADIUS_M: f64 = 25.0;
/// Largest distance between a junction and a signal-tagged neighbour on its approach.
pub const SIGNAL_APPROACH_M: f64 = 30.0;

/// Great-circle distance in metres.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionCandidate {
    /// Junction node, or the smallest node id of a collapsed roundabout ring.
    pub node_id: i64,
    pub lat: f64,
    pub lon: f64,
    /// Number of road arms meeting at the node.
    pub degree: usize,
    /// Number of distinct ways through the node.
    pub way_count: usize,
    pub signal_tagged: bool,
    pub roundabout_tagged: bool,
    /// A `*_link` way meets a non-link road here.
    pub ramp: bool,
}

fn is_signal(tags: &super::osm::Tags) -> bool {
    tags.get("highway").is_some_and(|v| v == "traffic_signals")
}

/// Junctions of the street graph.
///
/// A node qualifies with at least three arms or when a link road meets a non-link
/// road. The nodes of each roundabout ring collapse into one candidate at the ring
/// centroid. A node counts as signalized when it or an adjacent node carries
/// `highway=traffic_signals`; the neighbour must lie within [`SIGNAL_APPROACH_M`].
pub fn intersection_candidates(graph: &StreetGraph) -> Vec<IntersectionCandidate> {
    let adj = graph.adjacency();
    let by_node = graph.ways_by_node();
    let signal_near = |n: i64| {
        let here = &graph.nodes[&n];
        is_signal(&here.tags)
            || adj.get(&n).is_some_and(|a| {
                a.iter().any(|m| {
                    let there = &graph.nodes[m];
                    is_signal(&there.tags)
                        && haversine_m(here.lat, here.lon, there.lat, there.lon) <= SIGNAL_APPROACH_M
                })
            })
    };

    // Roundabout rings: connected components of roundabout ways.
    let mut ring_of: BTreeMap<i64, usize> = BTreeMap::new();
    let mut rings: Vec<BTreeSet<i64>> = Vec::new();
    for w in graph.ways.values().filter(|w| w.is_roundabout()) {
        let touching: BTreeSet<usize> = w.nodes.iter().filter_map(|n| ring_of.get(n).copied()).collect();
        let mut members: BTreeSet<i64> = w.nodes.iter().copied().collect();
        for &r in &touching {
            members.extend(std::mem::take(&mut rings[r]));
        }
        let idx = rings.len();
        for &n in &members {
            ring_of.insert(n, idx);
        }
        rings.push(members);
    }

    let mut out = Vec::new();
    for ring in rings.iter().filter(|r| !r.is_empty()) {
        let k = ring.len() as f64;
        let lat = ring.iter().map(|n| graph.nodes[n].lat).sum::<f64>() / k;
        let lon = ring.iter().map(|n| graph.nodes[n].lon).sum::<f64>() / k;
        let arms = ring
            .iter()
            .flat_map(|n| adj.get(n).into_iter().flatten())
            .filter(|m| !ring.contains(m))
            .count();
        let ways: BTreeSet<i64> = ring.iter().flat_map(|n| by_node[n].iter().copied()).collect();
        out.push(IntersectionCandidate {
            node_id: *ring.iter().next().expect("non-empty ring"),
            lat,
            lon,
            degree: arms,
            way_count: ways.len(),
            signal_tagged: ring.iter().any(|&n| signal_near(n)),
            roundabout_tagged: true,
            ramp: false,
        });
    }
    for (&id, node) in &graph.nodes {
        if ring_of.contains_key(&id) {
            continue;
        }
        let degree = adj.get(&id).map_or(0, BTreeSet::len);
        let ways = &by_node[&id];
        let links = ways.iter().filter(|w| graph.ways[*w].is_link()).count();
        let ramp = links > 0 && links < ways.len();
        if degree < 3 && !ramp {
            continue;
        }
        out.push(IntersectionCandidate {
            node_id: id,
            lat: node.lat,
            lon: node.lon,
            degree,
            way_count: ways.len(),
            signal_tagged: signal_near(id),
            roundabout_tagged: false,
            ramp,
        });
    }
    out.sort_by_key(|c| c.node_id);
    out
}

/// Type suggestion from map tags: roundabout, then highway ramp, then signalized,
/// else unsignalized.
pub fn suggest_intersection_type(c: &IntersectionCandidate) -> IntersectionType {
    if c.roundabout_tagged {
        IntersectionType::Roundabout
    } else if c.ramp {
        IntersectionType::HighwayRamp
    } else if c.signal_tagged {
        IntersectionType::Signalized
    } else {
        IntersectionType::Unsignalized
    }
}

/// A reviewer's label wins over the tag-based suggestion.
pub fn classify_intersection(c: &IntersectionCandidate, review: Option<IntersectionType>) -> IntersectionType {
    review.unwrap_or_else(|| suggest_intersection_type(c))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteMatch {
    pub candidate: IntersectionCandidate,
    /// Track frame closest to the intersection during this pass.
    pub frame: u64,
    pub distance_m: f64,
}

/// Distance in metres from `p` to segment `a-b`, in a local tangent plane at `p`.
fn point_segment_m(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let k = p.0.to_radians().cos();
    let to_xy = |q: (f64, f64)| {
        (
            (q.1 - p.1).to_radians() * k * EARTH_RADIUS_M,
            (q.0 - p.0).to_radians() * EARTH_RADIUS_M,
        )
    };
    let (ax, ay) = to_xy(a);
    let (bx, by) = to_xy(b);
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (-(ax * dx + ay * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (ax + t * dx).hypot(ay + t * dy)
}

/// Candidates passed within `radius_m` of the track polyline, one match per pass,
/// ordered by frame. Samples without a position are skipped.
pub fn find_route_intersections(
    track: &[TelemetrySample],
    candidates: &[IntersectionCandidate],
    radius_m: f64,
) -> Result<Vec<RouteMatch>> {
    if !(radius_m > 0.0) {
        return Err(Error::InvalidParameter("match radius must be positive".into()));
    }
    let pts: Vec<&TelemetrySample> = track.iter().filter(|s| s.lat.is_finite() && s.lon.is_finite()).collect();
    if pts.is_empty() {
        return Err(Error::Empty("track has no GPS positions".into()));
    }
    let mut out = Vec::new();
    for c in candidates {
        let here = (c.lat, c.lon);
        let seg_near: Vec<bool> = if pts.len() == 1 {
            vec![haversine_m(c.lat, c.lon, pts[0].lat, pts[0].lon) <= radius_m]
        } else {
            pts.windows(2)
                .map(|w| point_segment_m(here, (w[0].lat, w[0].lon), (w[1].lat, w[1].lon)) <= radius_m)
                .collect()
        };
        // Sample i is near if an adjacent segment is near.
        let n = pts.len();
        let near = |i: usize| {
            if n == 1 {
                seg_near[0]
            } else {
                (i > 0 && seg_near[i - 1]) || (i + 1 < n && seg_near[i])
            }
        };
        let mut i = 0;
        while i < n {
            if !near(i) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < n && seg_near[j] {
                j += 1;
            }
            let (best, d) = (i..=j)
                .map(|k| (k, haversine_m(c.lat, c.lon, pts[k].lat, pts[k].lon)))
                .fold((i, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            out.push(RouteMatch {
                candidate: c.clone(),
                frame: pts[best].frame,
                distance_m: d,
            });
            i = j + 1;
        }
    }
    out.sort_by(|a, b| a.frame.cmp(&b.frame).then(a.candidate.node_id.cmp(&b.candidate.node_id)));
    Ok(out)
}

/// Like [`find_route_intersections`] over the whole graph; warns and returns nothing
/// when the track lies outside the extract.
pub fn match_route(track: &[TelemetrySample], graph: &StreetGraph, radius_m: f64) -> Result<Vec<RouteMatch>> {
    if let Some((lat0, lon0, lat1, lon1)) = graph.bounds() {
        let margin_lat = (radius_m / EARTH_RADIUS_M).to_degrees();
        let inside = track.iter().any(|s| {
            let margin_lon = margin_lat / s.lat.to_radians().cos().max(1e-6);
            s.lat >= lat0 - margin_lat
                && s.lat <= lat1 + margin_lat
                && s.lon >= lon0 - margin_lon
                && s.lon <= lon1 + margin_lon
        });
        if !inside {
            log::warn!("track lies entirely outside the street extract");
            return Ok(Vec::new());
        }
    }
    find_route_intersections(track, &intersection_candidates(graph), radius_m)
}

/// Unconfirmed events (no priority) for the matched intersections.
pub fn suggested_events(matches: &[RouteMatch]) -> Vec<ContextEvent> {
    matches
        .iter()
        .map(|m| ContextEvent {
            crossing_frame: m.frame,
            intersection_type: suggest_intersection_type(&m.candidate),
            priority: None,
            yield_onset_frame: None,
        })
        .collect()
}

/// Adds suggestions that do not fall within `tolerance` frames of an existing event;
/// existing (possibly reviewed) events are never modified. Result is sorted by frame.
pub fn merge_events(existing: &[ContextEvent], suggestions: &[ContextEvent], tolerance: u64) -> Vec<ContextEvent> {
    let mut out = existing.to_vec();
    for s in suggestions {
        if !out.iter().any(|e| e.crossing_frame.abs_diff(s.crossing_frame) <= tolerance) {
            out.push(*s);
        }
    }
    out.sort_by_key(|e| e.crossing_frame);
    out
}

/// Event counts by intersection type and priority.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContextTable {
    pub counts: BTreeMap<(IntersectionType, Priority), u64>,
    /// Indices of events without a priority; they are not counted.
    pub unlabeled: Vec<usize>,
}

impl ContextTable {
    pub fn get(&self, t: IntersectionType, p: Priority) -> u64 {
        self.counts.get(&(t, p)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn type_total(&self, t: IntersectionType) -> u64 {
        Priority::ALL.iter().map(|&p| self.get(t, p)).sum()
    }

    pub fn priority_total(&self, p: Priority) -> u64 {
        IntersectionType::ALL.iter().map(|&t| self.get(t, p)).sum()
    }

    /// CSV with header `intersection_type,right_of_way,yield,total` and a total row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("intersection_type,right_of_way,yield,total\n");
        for t in IntersectionType::ALL {
            out.push_str(&format!(
                "{},{},{},{}\n",
                t.as_str(),
                self.get(t, Priority::RightOfWay),
                self.get(t, Priority::Yield),
                self.type_total(t)
            ));
        }
        out.push_str(&format!(
            "total,{},{},{}\n",
            self.priority_total(Priority::RightOfWay),
            self.priority_total(Priority::Yield),
            self.total()
        ));
        out
    }
}

pub fn context_statistics<'a>(events: impl IntoIterator<Item = &'a ContextEvent>) -> ContextTable {
    let mut table = ContextTable::default();
    for t in IntersectionType::ALL {
        for p in Priority::ALL {
            table.counts.insert((t, p), 0);
        }
    }
    for (i, e) in events.into_iter().enumerate() {
        match e.priority {
            Some(p) => *table.counts.entry((e.intersection_type, p)).or_default() += 1,
            None => table.unlabeled.push(i),
        }
    }
    table
}
