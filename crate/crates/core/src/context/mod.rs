//! Street-network parsing, route-to-intersection matching and context statistics.

mod osm;
mod route;

pub use osm::{is_drivable, parse_osm_extract, parse_osm_str, OsmNode, OsmWay, StreetGraph, Tags};
pub use route::{
    classify_intersection, context_statistics, find_route_intersections, haversine_m,
    intersection_candidates, match_route, merge_events, suggest_intersection_type, suggested_events,
    ContextTable, IntersectionCandidate, RouteMatch, DEFAULT_MATCH_RADIUS_M, EARTH_RADIUS_M,
};
