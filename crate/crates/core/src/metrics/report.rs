use std::collections::{BTreeMap, BTreeSet};

use super::saliency::Metric;
use crate::model::{ActionLabel, IntersectionType, Priority};

/// Grouping families a report can be stratified by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stratum {
    Action,
    Context,
}

impl std::str::FromStr for Stratum {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.trim() {
            "action" => Ok(Stratum::Action),
            "context" => Ok(Stratum::Context),
            other => Err(crate::error::Error::InvalidParameter(format!("unknown stratum `{other}`"))),
        }
    }
}

/// Metric values of one evaluated frame; `None` marks an undefined or degenerate value.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEval {
    pub video_id: String,
    pub frame: u64,
    pub action: ActionLabel,
    pub contexts: Vec<(Priority, IntersectionType)>,
    pub values: BTreeMap<Metric, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricStat {
    pub metric: Metric,
    pub mean: Option<f64>,
    /// Frames contributing to the mean.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub group: String,
    pub category: String,
    pub n_frames: usize,
    pub stats: Vec<MetricStat>,
    pub degenerate_frames: usize,
    pub best: Vec<Metric>,
    pub worst: Vec<Metric>,
}

impl ReportRow {
    pub fn mean(&self, metric: Metric) -> Option<f64> {
        self.stats.iter().find(|s| s.metric == metric).and_then(|s| s.mean)
    }

    pub fn stat(&self, metric: Metric) -> Option<&MetricStat> {
        self.stats.iter().find(|s| s.metric == metric)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedReport {
    pub metrics: Vec<Metric>,
    pub rows: Vec<ReportRow>,
}

pub const REPORT_HEADER: &str = "group,category,n_frames,kld,cc,sim,nss,degenerate_frames,best_flags,worst_flags";

struct Acc {
    n: usize,
    degenerate: usize,
    sums: Vec<(f64, usize)>,
}

impl Acc {
    fn new(k: usize) -> Self {
        Acc {
            n: 0,
            degenerate: 0,
            sums: vec![(0.0, 0); k],
        }
    }

    fn add(&mut self, metrics: &[Metric], f: &FrameEval) {
        self.n += 1;
        let mut degenerate = false;
        for (slot, m) in self.sums.iter_mut().zip(metrics) {
            match f.values.get(m).copied().flatten() {
                Some(v) => {
                    slot.0 += v;
                    slot.1 += 1;
                }
                None => degenerate = true,
            }
        }
        if degenerate {
            self.degenerate += 1;
        }
    }

    fn row(&self, group: &str, category: String, metrics: &[Metric]) -> ReportRow {
        ReportRow {
            group: group.to_string(),
            category,
            n_frames: self.n,
            stats: metrics
                .iter()
                .zip(&self.sums)
                .map(|(&metric, &(s, c))| MetricStat {
                    metric,
                    mean: (c > 0).then(|| s / c as f64),
                    count: c,
                })
                .collect(),
            degenerate_frames: self.degenerate,
            best: Vec::new(),
            worst: Vec::new(),
        }
    }
}

fn mark_extremes(rows: &mut [ReportRow], metrics: &[Metric]) {
    for &m in metrics {
        let candidates: Vec<(usize, f64)> = rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.mean(m).map(|v| (i, v)))
            .collect();
        if candidates.len() < 2 {
            continue;
        }
        let better = |a: f64, b: f64| if m.lower_is_better() { a < b } else { a > b };
        let mut best = candidates[0];
        let mut worst = candidates[0];
        for &c in &candidates[1..] {
            if better(c.1, best.1) {
                best = c;
            }
            if better(worst.1, c.1) {
                worst = c;
            }
        }
        if best.1 != worst.1 {
            rows[best.0].best.push(m);
            rows[worst.0].worst.push(m);
        }
    }
}

/// Groups per-frame values into an overall row plus one row per category of each
/// requested family. Sums are accumulated in input order, so the result does not
/// depend on how the per-frame values were computed.
pub fn stratify(frames: &[FrameEval], metrics: &[Metric], strata: &[Stratum]) -> StratifiedReport {
    let k = metrics.len();
    let mut overall = Acc::new(k);
    let mut actions: Vec<Acc> = ActionLabel::REPORTED.iter().map(|_| Acc::new(k)).collect();
    let mut priority: BTreeMap<Priority, Acc> = Priority::ALL.iter().map(|&p| (p, Acc::new(k))).collect();
    let mut inter: BTreeMap<(IntersectionType, Priority), Acc> = BTreeMap::new();
    for t in IntersectionType::ALL {
        for p in Priority::ALL {
            inter.insert((t, p), Acc::new(k));
        }
    }
    for f in frames {
        if f.action == ActionLabel::Excluded {
            continue;
        }
        overall.add(metrics, f);
        if let Some(i) = ActionLabel::REPORTED.iter().position(|&a| a == f.action) {
            actions[i].add(metrics, f);
        }
        let ps: BTreeSet<Priority> = f.contexts.iter().map(|c| c.0).collect();
        for p in ps {
            priority.get_mut(&p).expect("all priorities").add(metrics, f);
        }
        let ts: BTreeSet<(IntersectionType, Priority)> = f.contexts.iter().map(|&(p, t)| (t, p)).collect();
        for key in ts {
            inter.get_mut(&key).expect("all combinations").add(metrics, f);
        }
    }

    let mut rows = vec![overall.row("overall", "all".into(), metrics)];
    if strata.contains(&Stratum::Action) {
        let mut group: Vec<ReportRow> = ActionLabel::REPORTED
            .iter()
            .zip(&actions)
            .map(|(a, acc)| acc.row("action", a.short_name().into(), metrics))
            .collect();
        mark_extremes(&mut group, metrics);
        rows.extend(group);
    }
    if strata.contains(&Stratum::Context) {
        let mut group: Vec<ReportRow> = Priority::ALL
            .iter()
            .map(|p| priority[p].row("context", p.short_name().into(), metrics))
            .collect();
        mark_extremes(&mut group, metrics);
        rows.extend(group);
        let mut group: Vec<ReportRow> = IntersectionType::ALL
            .iter()
            .flat_map(|&t| Priority::ALL.iter().map(move |&p| (t, p)))
            .map(|(t, p)| inter[&(t, p)].row("intersection", format!("{}/{}", t.as_str(), p.short_name()), metrics))
            .collect();
        mark_extremes(&mut group, metrics);
        rows.extend(group);
    }
    StratifiedReport {
        metrics: metrics.to_vec(),
        rows,
    }
}

fn flags(ms: &[Metric]) -> String {
    ms.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(";")
}

fn cell(row: &ReportRow, m: Metric) -> String {
    row.mean(m).map(|v| format!("{v:.6}")).unwrap_or_default()
}

impl StratifiedReport {
    pub fn overall(&self) -> &ReportRow {
        &self.rows[0]
    }

    pub fn group(&self, group: &str) -> impl Iterator<Item = &ReportRow> {
        let group = group.to_string();
        self.rows.iter().filter(move |r| r.group == group)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = Metric::ALL.iter().map(|&m| cell(r, m)).collect();
            let category = if r.category.contains(',') {
                format!("\"{}\"", r.category)
            } else {
                r.category.clone()
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.group,
                category,
                r.n_frames,
                cells.join(","),
                r.degenerate_frames,
                flags(&r.best),
                flags(&r.worst)
            ));
        }
        out
    }

    /// Markdown table; best and worst values are tagged inline.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| group | category | frames |");
        for m in &self.metrics {
            out.push_str(&format!(" {} |", m.as_str().to_uppercase()));
        }
        out.push_str(" degenerate |\n|---|---|---:|");
        for _ in &self.metrics {
            out.push_str("---:|");
        }
        out.push_str("---:|\n");
        for r in &self.rows {
            out.push_str(&format!("| {} | {} | {} |", r.group, r.category, r.n_frames));
            for &m in &self.metrics {
                let mut c = cell(r, m);
                if c.is_empty() {
                    c.push('-');
                }
                if r.best.contains(&m) {
                    c.push_str(" (best)");
                }
                if r.worst.contains(&m) {
                    c.push_str(" (worst)");
                }
                out.push_str(&format!(" {c} |"));
            }
            out.push_str(&format!(" {} |\n", r.degenerate_frames));
        }
        out
    }
}
