use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

pub type Tags = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct OsmNode {
    pub id: i64,
    pub lat: f64,
    pub lon: f64,
    pub tags: Tags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsmWay {
    pub id: i64,
    pub nodes: Vec<i64>,
    pub tags: Tags,
}

impl OsmWay {
    pub fn highway(&self) -> Option<&str> {
        self.tags.get("highway").map(String::as_str)
    }

    pub fn is_roundabout(&self) -> bool {
        matches!(self.tags.get("junction").map(String::as_str), Some("roundabout" | "circular"))
    }

    /// `motorway_link`, `trunk_link`, ...
    pub fn is_link(&self) -> bool {
        self.highway().is_some_and(|h| h.ends_with("_link"))
    }
}

/// `highway` values that carry no motor traffic.
const NON_DRIVABLE: &[&str] = &[
    "footway",
    "path",
    "cycleway",
    "steps",
    "pedestrian",
    "bridleway",
    "corridor",
    "elevator",
    "platform",
    "proposed",
    "construction",
    "abandoned",
    "raceway",
    "bus_stop",
    "via_ferrata",
];

pub fn is_drivable(highway: &str) -> bool {
    !NON_DRIVABLE.contains(&highway)
}

/// Drivable street network from an OSM extract, keyed by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StreetGraph {
    pub nodes: BTreeMap<i64, OsmNode>,
    pub ways: BTreeMap<i64, OsmWay>,
}

impl StreetGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn way_count(&self) -> usize {
        self.ways.len()
    }

    /// `(min_lat, min_lon, max_lat, max_lon)` of the nodes.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let mut it = self.nodes.values();
        let first = it.next()?;
        let mut b = (first.lat, first.lon, first.lat, first.lon);
        for n in it {
            b = (b.0.min(n.lat), b.1.min(n.lon), b.2.max(n.lat), b.3.max(n.lon));
        }
        Some(b)
    }

    /// Distinct neighbouring nodes of every node along the ways.
    pub fn adjacency(&self) -> BTreeMap<i64, BTreeSet<i64>> {
        let mut adj: BTreeMap<i64, BTreeSet<i64>> = BTreeMap::new();
        for w in self.ways.values() {
            for pair in w.nodes.windows(2) {
                if pair[0] != pair[1] {
                    adj.entry(pair[0]).or_default().insert(pair[1]);
                    adj.entry(pair[1]).or_default().insert(pair[0]);
                }
            }
        }
        adj
    }

    /// Ways through each node, in id order.
    pub fn ways_by_node(&self) -> BTreeMap<i64, Vec<i64>> {
        let mut out: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        for w in self.ways.values() {
            let unique: BTreeSet<i64> = w.nodes.iter().copied().collect();
            for n in unique {
                out.entry(n).or_default().push(w.id);
            }
        }
        out
    }
}

fn tags_of(node: roxmltree::Node<'_, '_>) -> Tags {
    node.children()
        .filter(|c| c.has_tag_name("tag"))
        .filter_map(|t| Some((t.attribute("k")?.to_string(), t.attribute("v")?.to_string())))
        .collect()
}

fn xml_err(path: &Path, doc: Option<&roxmltree::Document<'_>>, pos: usize, message: String) -> Error {
    let (line, column) = doc.map(|d| {
        let p = d.text_pos_at(pos);
        (p.row, p.col)
    }).unwrap_or((0, 0));
    Error::Xml {
        path: path.to_path_buf(),
        line,
        column,
        message,
    }
}

fn attr<T: std::str::FromStr>(
    path: &Path,
    doc: &roxmltree::Document<'_>,
    n: roxmltree::Node<'_, '_>,
    name: &str,
) -> Result<T> {
    n.attribute(name).and_then(|v| v.parse().ok()).ok_or_else(|| {
        xml_err(
            path,
            Some(doc),
            n.range().start,
            format!("<{}> has missing or invalid `{name}`", n.tag_name().name()),
        )
    })
}

/// Parses OSM XML text, keeping drivable `highway` ways and the nodes they use.
pub fn parse_osm_str(text: &str, path: &Path) -> Result<StreetGraph> {
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let p = e.pos();
        Error::Xml {
            path: path.to_path_buf(),
            line: p.row,
            column: p.col,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    if !root.has_tag_name("osm") {
        return Err(xml_err(path, Some(&doc), root.range().start, format!(
            "root element is <{}>, expected <osm>",
            root.tag_name().name()
        )));
    }
    let mut all_nodes = BTreeMap::new();
    let mut ways = BTreeMap::new();
    for el in root.children().filter(|c| c.is_element()) {
        match el.tag_name().name() {
            "node" => {
                let id: i64 = attr(path, &doc, el, "id")?;
                let lat: f64 = attr(path, &doc, el, "lat")?;
                let lon: f64 = attr(path, &doc, el, "lon")?;
                all_nodes.insert(id, OsmNode { id, lat, lon, tags: tags_of(el) });
            }
            "way" => {
                let id: i64 = attr(path, &doc, el, "id")?;
                let tags = tags_of(el);
                if !tags.get("highway").is_some_and(|h| is_drivable(h)) {
                    continue;
                }
                let nodes = el
                    .children()
                    .filter(|c| c.has_tag_name("nd"))
                    .map(|nd| attr::<i64>(path, &doc, nd, "ref"))
                    .collect::<Result<Vec<_>>>()?;
                if nodes.len() >= 2 {
                    ways.insert(id, OsmWay { id, nodes, tags });
                }
            }
            _ => {}
        }
    }
    if ways.is_empty() {
        return Err(Error::Empty(format!("{}: no drivable highway ways", path.display())));
    }
    let mut nodes = BTreeMap::new();
    for w in ways.values() {
        for &n in &w.nodes {
            let node = all_nodes.get(&n).ok_or(Error::MissingNode { way: w.id, node: n })?;
            nodes.entry(n).or_insert_with(|| node.clone());
        }
    }
    Ok(StreetGraph { nodes, ways })
}

pub fn parse_osm_extract(path: &Path) -> Result<StreetGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_osm_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CROSS: &str = r#"<?xml version="1.0"?>
<osm version="0.6">
  <node id="1" lat="48.0" lon="11.0"/>
  <node id="2" lat="48.001" lon="11.0"/>
  <node id="3" lat="48.002" lon="11.0"/>
  <node id="4" lat="48.001" lon="10.999"/>
  <node id="5" lat="48.001" lon="11.001"/>
  <node id="9" lat="48.1" lon="11.1"/>
  <way id="10"><nd ref="1"/><nd ref="2"/><nd ref="3"/><tag k="highway" v="residential"/></way>
  <way id="11"><nd ref="4"/><nd ref="2"/><nd ref="5"/><tag k="highway" v="primary"/></way>
  <way id="12"><nd ref="1"/><nd ref="9"/><tag k="highway" v="footway"/></way>
  <way id="13"><nd ref="3"/><nd ref="9"/><tag k="building" v="yes"/></way>
</osm>"#;

    #[test]
    fn two_crossing_ways() {
        let g = parse_osm_str(CROSS, Path::new("x.osm")).unwrap();
        assert_eq!(g.way_count(), 2);
        assert_eq!(g.node_count(), 5);
        assert!(g.nodes.contains_key(&2));
        assert_eq!(g.adjacency()[&2].len(), 4);
        assert_eq!(g.ways_by_node()[&2], vec![10, 11]);
        assert_eq!(parse_osm_str(CROSS, Path::new("x.osm")).unwrap(), g);
    }

    #[test]
    fn missing_node_names_way() {
        let text = CROSS.replace(r#"<nd ref="5"/>"#, r#"<nd ref="77"/>"#);
        assert!(matches!(
            parse_osm_str(&text, Path::new("x.osm")),
            Err(Error::MissingNode { way: 11, node: 77 })
        ));
    }

    #[test]
    fn malformed_and_empty() {
        let err = parse_osm_str("<osm>\n<node id=\"1\" lat=\"1\" lon=\"2\">\n</osm>", Path::new("x.osm")).unwrap_err();
        assert!(matches!(err, Error::Xml { line: 3, .. }), "{err:?}");
        assert!(matches!(
            parse_osm_str("<osm></osm>", Path::new("x.osm")),
            Err(Error::Empty(_))
        ));
        let bad = CROSS.replace(r#"lat="48.0""#, r#"lat="north""#);
        assert!(matches!(parse_osm_str(&bad, Path::new("x.osm")), Err(Error::Xml { line: 3, .. })));
    }
}
