//! Reconstruction of the block catalog: one labeled representative per
//! LC class, chosen so that its `(gamma, wp)` fingerprint matches a row of
//! the published velocity tables.
//!
//! Rows are assigned to classes by a minimum-cost matching that first
//! maximizes the number of rows whose fingerprint is realized exactly by a
//! member of their class, then minimizes the `wp` deviation of the rest. An
//! inexact row gets the member with the row's `gamma` and the nearest `wp`,
//! and is reported as a mismatch.

use crate::graph::{format_ratio, parse_ratio, GraphSpec};
use crate::lc::{enumerate_lc_classes, LcClass};
use crate::{Error, Result};
use num_rational::Ratio;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Table {
    /// `n = 4, 5, 6` rows, measured at `N = 200`.
    Small,
    /// `n = 7` rows, measured at `N = 500`.
    Seven,
}

impl Table {
    fn tag(self) -> &'static str {
        match self {
            Table::Small => "table1",
            Table::Seven => "table2",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "table1" => Some(Table::Small),
            "table2" => Some(Table::Seven),
            _ => None,
        }
    }
}

/// One published row. `height_sum / (n - 1)` is the average height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRow {
    pub table: Table,
    pub n: usize,
    pub graph: usize,
    pub v_e: f64,
    pub v_b: f64,
    pub height_sum: usize,
    pub wp: usize,
    /// Highlighted as an AME block.
    pub ame: bool,
}

impl TableRow {
    pub fn gamma(&self) -> Ratio<usize> {
        Ratio::new(self.height_sum, self.n - 1)
    }

    pub fn source_tag(&self) -> String {
        format!("{}:{}:{}", self.table.tag(), self.n, self.graph)
    }
}

#[allow(clippy::too_many_arguments)]
const fn row(
    table: Table,
    n: usize,
    graph: usize,
    v_e: f64,
    v_b: f64,
    height_sum: usize,
    wp: usize,
    ame: bool,
) -> TableRow {
    TableRow { table, n, graph, v_e, v_b, height_sum, wp, ame }
}

use Table::{Seven as T2, Small as T1};

/// Published rows. Average heights printed with two decimals are stored as
/// exact height sums (e.g. 1.17 at n = 7 is 7/6).
#[allow(clippy::approx_constant)]
pub const PUBLISHED_ROWS: &[TableRow] = &[
    row(T1, 4, 1, 0.420, 0.628, 3, 6, false),
    row(T1, 4, 2, 0.318, 0.327, 3, 3, false),
    row(T1, 5, 1, 0.477, 0.842, 4, 10, false),
    row(T1, 5, 2, 0.466, 0.566, 5, 6, false),
    row(T1, 5, 3, 0.364, 0.376, 4, 4, false),
    row(T1, 5, 4, 0.621, 0.778, 6, 8, true),
    row(T1, 6, 1, 0.522, 1.295, 5, 10, false),
    row(T1, 6, 2, 0.573, 1.198, 6, 1, false),
    row(T1, 6, 3, 0.637, 1.239, 7, 3, false),
    row(T1, 6, 4, 0.564, 0.847, 7, 4, false),
    row(T1, 6, 5, 0.469, 0.654, 6, 4, false),
    row(T1, 6, 6, 0.391, 0.476, 5, 4, false),
    row(T1, 6, 7, 0.706, 1.15, 8, 4, false),
    row(T1, 6, 8, 0.567, 0.797, 7, 6, false),
    row(T1, 6, 9, 0.716, 1.219, 8, 8, false),
    row(T1, 6, 10, 0.685, 1.064, 8, 4, false),
    row(T1, 6, 11, 0.779, 1.251, 9, 9, true),
    row(T2, 7, 1, 0.554, 1.255, 6, 21, false),
    row(T2, 7, 2, 0.603, 1.224, 7, 20, false),
    row(T2, 7, 3, 0.657, 1.221, 8, 19, false),
    row(T2, 7, 4, 0.649, 1.209, 8, 18, false),
    row(T2, 7, 5, 0.718, 1.242, 9, 16, false),
    row(T2, 7, 6, 0.589, 1.015, 7, 16, false),
    row(T2, 7, 7, 0.780, 1.246, 10, 17, false),
    row(T2, 7, 8, 0.646, 0.84, 9, 10, false),
    row(T2, 7, 9, 0.403, 0.448, 6, 7, false),
    row(T2, 7, 10, 0.478, 0.537, 7, 8, false),
    row(T2, 7, 11, 0.426, 0.474, 6, 6, false),
    row(T2, 7, 12, 0.380, 0.501, 6, 9, false),
    row(T2, 7, 13, 0.780, 1.214, 10, 19, false),
    row(T2, 7, 14, 0.579, 0.724, 8, 11, false),
    row(T2, 7, 15, 0.621, 0.703, 9, 11, false),
    row(T2, 7, 16, 0.829, 1.072, 11, 14, false),
    row(T2, 7, 17, 0.566, 0.638, 8, 9, false),
    row(T2, 7, 18, 0.773, 1.098, 10, 15, false),
    row(T2, 7, 19, 0.653, 0.813, 9, 11, false),
    row(T2, 7, 20, 0.572, 0.668, 8, 10, false),
    row(T2, 7, 21, 0.772, 1.016, 10, 12, false),
    row(T2, 7, 22, 0.686, 0.917, 9, 15, false),
    row(T2, 7, 23, 0.774, 1.086, 10, 13, false),
    row(T2, 7, 24, 0.833, 1.19, 11, 19, false),
    row(T2, 7, 25, 0.847, 1.257, 11, 21, false),
    row(T2, 7, 26, 0.731, 0.996, 10, 20, false),
];

pub fn published_rows(n: usize) -> Vec<TableRow> {
    PUBLISHED_ROWS.iter().copied().filter(|r| r.n == n).collect()
}

/// Parse a fingerprint file: whitespace-separated columns
/// `table n graph gamma wp ame v_E v_B`, `#` starts a comment. `gamma` may be
/// a ratio (`7/6`) or a decimal rounded to two places.
pub fn parse_fingerprints(text: &str) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| Error::Parse { line: i + 1, reason };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 8 {
            return Err(err(format!("expected 8 columns, found {}", cols.len())));
        }
        let table = Table::from_tag(cols[0]).ok_or_else(|| err(format!("unknown table '{}'", cols[0])))?;
        let int = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad integer '{s}'")));
        let float = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number '{s}'")));
        let n = int(cols[1])?;
        if n < 2 {
            return Err(err("n must be at least 2".into()));
        }
        let height_sum =
            parse_gamma(cols[3], n).ok_or_else(|| err(format!("gamma '{}' is not k/{}", cols[3], n - 1)))?;
        let ame = match cols[5] {
            "1" | "true" | "yes" => true,
            "0" | "false" | "no" => false,
            other => return Err(err(format!("bad ame flag '{other}'"))),
        };
        rows.push(TableRow {
            table,
            n,
            graph: int(cols[2])?,
            height_sum,
            wp: int(cols[4])?,
            ame,
            v_e: float(cols[6])?,
            v_b: float(cols[7])?,
        });
    }
    Ok(rows)
}

fn parse_gamma(s: &str, n: usize) -> Option<usize> {
    let cuts = n - 1;
    if s.contains('/') {
        let r = parse_ratio(s)?;
        let scaled = r * Ratio::from_integer(cuts);
        return scaled.is_integer().then(|| scaled.to_integer());
    }
    let v: f64 = s.parse().ok()?;
    let k = (v * cuts as f64).round();
    // printed with two decimals
    ((v - k / cuts as f64).abs() <= 0.005 + 1e-9 && k >= 0.0).then_some(k as usize)
}

pub fn format_fingerprints(rows: &[TableRow]) -> String {
    let mut out = String::from("# table n graph gamma wp ame v_E v_B\n");
    for r in rows {
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {}\n",
            r.table.tag(),
            r.n,
            r.graph,
            format_ratio(&r.gamma()),
            r.wp,
            u8::from(r.ame),
            r.v_e,
            r.v_b
        ));
    }
    out
}

/// How a catalog entry relates to the published rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchKind {
    /// Representative reproduces the row's `(gamma, wp)` exactly.
    Exact,
    /// No member of any admissible class reproduces the row; the entry has
    /// the row's `gamma` and the nearest achievable `wp`.
    Nearest,
    /// Class not referenced by any row.
    Unlisted,
}

impl MatchKind {
    fn tag(&self) -> &'static str {
        match self {
            MatchKind::Exact => "exact",
            MatchKind::Nearest => "nearest",
            MatchKind::Unlisted => "unlisted",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(MatchKind::Exact),
            "nearest" => Some(MatchKind::Nearest),
            "unlisted" => Some(MatchKind::Unlisted),
            _ => None,
        }
    }
}

/// One persisted catalog record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub graph: GraphSpec,
    pub gamma: Ratio<usize>,
    pub wp: usize,
    pub height: Vec<usize>,
    /// `table1:5:4` style tag, or `class:<index>` for unlisted classes.
    pub source: String,
    pub match_kind: MatchKind,
}

impl CatalogEntry {
    fn from_graph(graph: GraphSpec, source: String, match_kind: MatchKind) -> Result<Self> {
        let d = graph.descriptors()?;
        Ok(Self { gamma: d.gamma, wp: d.wp, height: d.height, graph, source, match_kind })
    }

    pub fn name(&self) -> &str {
        self.graph.name()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CatalogIssue {
    /// The assigned class has no member with the row's fingerprint.
    /// `exact_classes` lists the classes that do, all claimed by other rows.
    NoExactMatch { row: TableRow, nearest_wp: Option<usize>, gamma_candidates: Vec<usize>, exact_classes: Vec<usize> },
    /// Another class could take this row at no extra cost.
    Ambiguous { row: TableRow, assigned: usize, alternatives: Vec<usize> },
}

impl fmt::Display for CatalogIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogIssue::NoExactMatch { row, nearest_wp, gamma_candidates, exact_classes } => {
                write!(f, "{}: gamma={} wp={} ", row.source_tag(), format_ratio(&row.gamma()), row.wp)?;
                if exact_classes.is_empty() {
                    f.write_str("is realized by no connected labeled graph")?;
                } else {
                    write!(f, "is realized only in classes {exact_classes:?}, needed by other rows")?;
                }
                write!(
                    f,
                    "; nearest wp {} (classes realizing gamma: {:?})",
                    nearest_wp.map_or("none".into(), |w| w.to_string()),
                    gamma_candidates
                )
            }
            CatalogIssue::Ambiguous { row, assigned, alternatives } => write!(
                f,
                "{}: fingerprint fits class {} but also {:?} at equal total cost",
                row.source_tag(),
                assigned,
                alternatives
            ),
        }
    }
}

/// Per-row outcome of the reconstruction.
#[derive(Clone, Debug)]
pub struct RowResolution {
    pub row: TableRow,
    pub class_index: usize,
    /// Classes with at least one member reproducing the fingerprint exactly.
    pub exact_classes: Vec<usize>,
    /// Other exact-fingerprint members of the assigned class that are not
    /// mirror images of the representative.
    pub alternates: Vec<GraphSpec>,
}

#[derive(Clone, Debug)]
pub struct CatalogBuild {
    pub n: usize,
    pub class_count: usize,
    pub entries: Vec<CatalogEntry>,
    pub rows: Vec<RowResolution>,
    pub issues: Vec<CatalogIssue>,
}

impl CatalogBuild {
    /// Fail on the first issue, for callers that need a faithful catalog.
    pub fn strict(self) -> Result<Self> {
        match self.issues.first() {
            Some(issue) => Err(Error::Catalog(issue.to_string())),
            None => Ok(self),
        }
    }

    pub fn entry_for(&self, graph: usize) -> Option<&CatalogEntry> {
        let tag = |e: &CatalogEntry| e.source.rsplit(':').next().and_then(|g| g.parse::<usize>().ok());
        self.entries.iter().find(|e| e.match_kind != MatchKind::Unlisted && tag(e) == Some(graph))
    }
}

/// Fewest edges, then most nearest-neighbour edges, then smallest edge list.
fn preference_key(g: &GraphSpec) -> (usize, std::cmp::Reverse<usize>, Vec<(usize, usize)>) {
    let edges = g.edges();
    let nn = edges.iter().filter(|(u, v)| v - u == 1).count();
    (edges.len(), std::cmp::Reverse(nn), edges)
}

fn preferred(graphs: impl IntoIterator<Item = GraphSpec>) -> Option<GraphSpec> {
    graphs.into_iter().min_by_key(preference_key)
}

fn mirror(g: &GraphSpec) -> GraphSpec {
    let n = g.n_vertices();
    let perm: Vec<usize> = (1..=n).rev().collect();
    g.relabel(&perm).expect("reversal is a permutation")
}

const INFEASIBLE: i64 = 1 << 40;
// larger than any sum of wp deviations, so exact matches are maximized first
const INEXACT: i64 = 1 << 20;

struct ClassProfile {
    ame: bool,
    // height sum -> sorted distinct wp values
    wps: BTreeMap<usize, Vec<usize>>,
}

impl ClassProfile {
    fn new(class: &LcClass) -> Self {
        let mut wps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (h, w) in class.fingerprints() {
            wps.entry(h).or_default().push(w);
        }
        Self { ame: class.simplest_member().is_ame(), wps }
    }

    fn nearest_wp(&self, height_sum: usize, wp: usize) -> Option<usize> {
        self.wps.get(&height_sum)?.iter().copied().min_by_key(|&w| (w.abs_diff(wp), w))
    }

    fn cost(&self, row: &TableRow) -> i64 {
        if self.ame != row.ame {
            return INFEASIBLE;
        }
        match self.nearest_wp(row.height_sum, row.wp) {
            None => INFEASIBLE,
            Some(w) if w == row.wp => 0,
            Some(w) => INEXACT + w.abs_diff(row.wp) as i64,
        }
    }
}

/// Minimum-cost perfect assignment of rows to columns on a square matrix.
/// Returns `assignment[row] = column`.
pub(crate) fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // Shortest augmenting path (Kuhn-Munkres with potentials), 1-based.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

fn total_cost(cost: &[Vec<i64>], assignment: &[usize]) -> i64 {
    assignment.iter().enumerate().map(|(r, &c)| cost[r][c]).sum()
}

/// Enumerate the LC classes on `n` vertices and pick one representative per
/// published row. Classes no row claims are appended as unlisted entries.
pub fn build_catalog(n: usize, rows: &[TableRow]) -> Result<CatalogBuild> {
    if let Some(bad) = rows.iter().find(|r| r.n != n) {
        return Err(Error::Catalog(format!("row {} is for n={}, not {n}", bad.source_tag(), bad.n)));
    }
    let classes = enumerate_lc_classes(n)?;
    if rows.len() > classes.len() {
        return Err(Error::Catalog(format!(
            "{} rows for only {} LC classes on {n} vertices",
            rows.len(),
            classes.len()
        )));
    }
    let profiles: Vec<ClassProfile> = classes.iter().map(ClassProfile::new).collect();
    let size = classes.len();
    // square matrix: padding rows are free for every class
    let mut cost = vec![vec![0i64; size]; size];
    for (r, row) in rows.iter().enumerate() {
        for (c, profile) in profiles.iter().enumerate() {
            cost[r][c] = profile.cost(row);
        }
    }
    let assignment = min_cost_assignment(&cost);
    let best = total_cost(&cost, &assignment);

    let mut issues = Vec::new();
    let mut resolutions = Vec::new();
    let mut entries = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        let c = assignment[r];
        let exact_classes: Vec<usize> = (0..size).filter(|&k| cost[r][k] == 0).collect();
        if cost[r][c] >= INFEASIBLE {
            return Err(Error::Catalog(format!(
                "{}: no class realizes gamma={} with ame={}",
                row.source_tag(),
                format_ratio(&row.gamma()),
                row.ame
            )));
        }
        let wp = profiles[c].nearest_wp(row.height_sum, row.wp).expect("feasible");
        let kind = if wp == row.wp { MatchKind::Exact } else { MatchKind::Nearest };
        if kind == MatchKind::Nearest {
            issues.push(CatalogIssue::NoExactMatch {
                row: *row,
                nearest_wp: Some(wp),
                gamma_candidates: (0..size).filter(|&k| profiles[k].wps.contains_key(&row.height_sum)).collect(),
                exact_classes: exact_classes.clone(),
            });
        }
        let members = classes[c].members_with(row.height_sum, wp);
        let rep = preferred(members.iter().cloned()).expect("nonempty");
        let rep_mirror = mirror(&rep);
        let mut alternates: Vec<GraphSpec> = Vec::new();
        for m in members {
            let m_mirror = mirror(&m);
            let dup = m.edges() == rep.edges()
                || m.edges() == rep_mirror.edges()
                || alternates.iter().any(|a| a.edges() == m.edges() || a.edges() == m_mirror.edges());
            if !dup {
                alternates.push(m);
            }
        }
        alternates.sort_by_key(preference_key);
        let name = format!("n{n}-g{}", row.graph);
        let alternates =
            alternates.into_iter().enumerate().map(|(i, g)| g.with_name(format!("{name}-alt{}", i + 1))).collect();

        // Can another class take this row without raising the optimum?
        let mut alternatives = Vec::new();
        for k in 0..size {
            if k == c || cost[r][k] > cost[r][c] {
                continue;
            }
            let mut trial = cost.clone();
            trial[r][c] = INFEASIBLE;
            for (kk, value) in trial[r].iter_mut().enumerate() {
                if kk != k {
                    *value = INFEASIBLE;
                }
            }
            let alt = min_cost_assignment(&trial);
            if total_cost(&trial, &alt) == best {
                alternatives.push(k);
            }
        }
        if !alternatives.is_empty() {
            issues.push(CatalogIssue::Ambiguous { row: *row, assigned: c, alternatives });
        }

        entries.push(CatalogEntry::from_graph(rep.with_name(name), row.source_tag(), kind)?);
        resolutions.push(RowResolution { row: *row, class_index: c, exact_classes, alternates });
    }
    for (c, class) in classes.iter().enumerate() {
        if assignment[..rows.len()].contains(&c) {
            continue;
        }
        let rep = preferred(class.members()).expect("nonempty class");
        entries.push(CatalogEntry::from_graph(
            rep.with_name(format!("n{n}-c{c}")),
            format!("class:{c}"),
            MatchKind::Unlisted,
        )?);
    }
    Ok(CatalogBuild { n, class_count: size, entries, rows: resolutions, issues })
}

pub const CATALOG_HEADER: &str = "# graphblock catalog v1\n# name\tn\tedges\tgamma\twp\theight\tsource\tmatch\n";

pub fn write_catalog(entries: &[CatalogEntry]) -> String {
    let mut out = String::from(CATALOG_HEADER);
    for e in entries {
        let height = e.height.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",");
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            e.graph.name(),
            e.graph.n_vertices(),
            e.graph.edge_list_string(),
            format_ratio(&e.gamma),
            e.wp,
            height,
            e.source,
            e.match_kind.tag()
        ));
    }
    out
}

/// Parse a catalog file. Stored descriptors are checked against the graph.
pub fn parse_catalog(text: &str) -> Result<Vec<CatalogEntry>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let err = |reason: String| Error::Parse { line: i + 1, reason };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 8 {
            return Err(err(format!("expected 8 tab-separated fields, found {}", cols.len())));
        }
        let n: usize = cols[1].parse().map_err(|_| err(format!("bad n '{}'", cols[1])))?;
        let graph = GraphSpec::parse_edge_list(n, cols[2], cols[0]).map_err(|e| err(e.to_string()))?;
        let gamma = parse_ratio(cols[3]).ok_or_else(|| err(format!("bad gamma '{}'", cols[3])))?;
        let wp: usize = cols[4].parse().map_err(|_| err(format!("bad wp '{}'", cols[4])))?;
        let height = cols[5]
            .split(',')
            .map(|h| h.parse::<usize>().map_err(|_| err(format!("bad height '{h}'"))))
            .collect::<Result<Vec<_>>>()?;
        let match_kind = MatchKind::from_tag(cols[7]).ok_or_else(|| err(format!("bad match '{}'", cols[7])))?;
        let entry = CatalogEntry { graph, gamma, wp, height, source: cols[6].to_string(), match_kind };
        let d = entry.graph.descriptors().map_err(|e| err(e.to_string()))?;
        if d.gamma != entry.gamma || d.wp != entry.wp || d.height != entry.height {
            return Err(err(format!("stored descriptors disagree with graph {}", entry.graph.name())));
        }
        entries.push(entry);
    }
    Ok(entries)
}
