//! Immutable in-memory store of a transformed data graph.
//!
//! Holds the inverse vertex label list, outgoing and incoming adjacency lists
//! grouped by neighbor type, and the predicate index. Every list is sorted
//! ascending so callers can intersect them with merges or binary searches.

use std::borrow::Cow;
use std::io::{self, Read, Write};

use thiserror::Error;

use crate::csr::Csr;
use crate::transform::{DataGraph, EdgeLabelId, LabelId, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Outgoing,
    Incoming,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::Outgoing => Direction::Incoming,
            Direction::Incoming => Direction::Outgoing,
        }
    }
}

/// Which label sets the store indexes: the subclass closure or only the
/// directly asserted types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Entailment {
    #[default]
    Closure,
    Simple,
}

/// A neighbor type: the connecting edge label and one label of the neighbor,
/// or `None` for neighbors without labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NeighborType {
    pub edge_label: EdgeLabelId,
    pub vertex_label: Option<LabelId>,
}

const BLANK: u32 = u32::MAX;

fn pack(el: EdgeLabelId, vl: u32) -> u64 {
    (u64::from(el) << 32) | u64::from(vl)
}

fn unpack(key: u64) -> NeighborType {
    let vl = key as u32;
    NeighborType {
        edge_label: (key >> 32) as u32,
        vertex_label: (vl != BLANK).then_some(vl),
    }
}

/// Result of a label-set lookup. An empty label set matches every vertex, so
/// no list is materialized for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelMatch<'a> {
    AllVertices,
    Vertices(Cow<'a, [VertexId]>),
}

/// Per-vertex keyed segments: `keys.row(v)` lists the sorted keys of `v`, and
/// key number `i` (global index) owns `adj[ends[i]..ends[i + 1]]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Segmented {
    keys: Csr<u64>,
    ends: Vec<usize>,
    adj: Vec<VertexId>,
}

impl Segmented {
    /// Builds from sorted, deduplicated `(vertex, key, neighbor)` triples.
    fn build(n: usize, entries: &[(VertexId, u64, VertexId)]) -> Self {
        let mut keys: Vec<(usize, u64)> = Vec::new();
        let mut ends = vec![0];
        let mut adj = Vec::with_capacity(entries.len());
        for (i, &(v, k, w)) in entries.iter().enumerate() {
            if i > 0 && (entries[i - 1].0, entries[i - 1].1) != (v, k) {
                ends.push(adj.len());
            }
            if i == 0 || (entries[i - 1].0, entries[i - 1].1) != (v, k) {
                keys.push((v as usize, k));
            }
            adj.push(w);
        }
        if !entries.is_empty() {
            ends.push(adj.len());
        }
        Segmented {
            keys: Csr::from_pairs(n, keys),
            ends,
            adj,
        }
    }

    fn segment(&self, v: VertexId, key: u64) -> &[VertexId] {
        let base = self.keys.offsets()[v as usize];
        match self.keys.row(v as usize).binary_search(&key) {
            Ok(i) => &self.adj[self.ends[base + i]..self.ends[base + i + 1]],
            Err(_) => &[],
        }
    }

    fn segments_of(&self, v: VertexId) -> impl Iterator<Item = (u64, &[VertexId])> + '_ {
        let base = self.keys.offsets()[v as usize];
        self.keys
            .row(v as usize)
            .iter()
            .enumerate()
            .map(move |(i, &k)| (k, &self.adj[self.ends[base + i]..self.ends[base + i + 1]]))
    }

    /// Total payload length over all segments of `v`.
    fn span(&self, v: VertexId) -> usize {
        let o = self.keys.offsets();
        self.ends[o[v as usize + 1]] - self.ends[o[v as usize]]
    }

    fn well_formed(&self) -> bool {
        let o = self.keys.offsets();
        o.first() == Some(&0)
            && o.windows(2).all(|w| w[0] <= w[1])
            && self.ends.len() == self.keys.values().len() + 1
            && self.ends.windows(2).all(|w| w[0] < w[1])
            && self.ends.last() == Some(&self.adj.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Adjacency {
    /// Keyed by packed (edge label, vertex label or blank).
    by_type: Segmented,
    /// Keyed by edge label, neighbors of any label.
    by_edge_label: Segmented,
    /// All neighbors regardless of edge label.
    all: Csr<VertexId>,
}

impl Adjacency {
    fn build(n: usize, labels: &Csr<LabelId>, edges: impl Iterator<Item = (VertexId, EdgeLabelId, VertexId)>) -> Self {
        let mut typed = Vec::new();
        let mut plain = Vec::new();
        for (v, el, w) in edges {
            plain.push((v, u64::from(el), w));
            let ls = labels.row(w as usize);
            if ls.is_empty() {
                typed.push((v, pack(el, BLANK), w));
            }
            typed.extend(ls.iter().map(|&l| (v, pack(el, l), w)));
        }
        typed.sort_unstable();
        typed.dedup();
        plain.sort_unstable();
        plain.dedup();
        let mut all: Vec<(usize, VertexId)> = plain.iter().map(|&(v, _, w)| (v as usize, w)).collect();
        all.sort_unstable();
        all.dedup();
        Adjacency {
            by_type: Segmented::build(n, &typed),
            by_edge_label: Segmented::build(n, &plain),
            all: Csr::from_pairs(n, all),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("snapshot i/o error: {0}")]
    Io(String),
    #[error("not a graph store snapshot")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("corrupt snapshot: {0}")]
    Corrupt(&'static str),
}

impl From<io::Error> for SnapshotError {
    fn from(e: io::Error) -> Self {
        SnapshotError::Io(e.to_string())
    }
}

const MAGIC: &[u8; 8] = b"RDFHOMGS";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphStore {
    vertex_count: usize,
    label_count: usize,
    edge_label_count: usize,
    labels: Csr<LabelId>,
    /// Row `l` is the sorted set of vertices carrying label `l`.
    inverse: Csr<VertexId>,
    out: Adjacency,
    inc: Adjacency,
    subjects: Csr<VertexId>,
    objects: Csr<VertexId>,
    /// Per source, packed (target, edge label), sorted.
    out_edges: Csr<u64>,
    edge_count: usize,
}

impl GraphStore {
    pub fn build(graph: &DataGraph) -> Self {
        Self::build_with(graph, Entailment::Closure)
    }

    pub fn build_with(graph: &DataGraph, entailment: Entailment) -> Self {
        let n = graph.vertex_count();
        let labels = Csr::from_rows((0..n as VertexId).map(|v| {
            match entailment {
                Entailment::Closure => graph.labels(v),
                Entailment::Simple => graph.simple_labels(v),
            }
            .iter()
            .copied()
        }));
        let mut inverse_pairs = Vec::with_capacity(labels.values().len());
        for v in 0..n {
            inverse_pairs.extend(labels.row(v).iter().map(|&l| (l as usize, v as VertexId)));
        }
        let inverse = Csr::from_pairs(graph.label_count(), inverse_pairs);
        let edges = graph.edges();
        let out = Adjacency::build(n, &labels, edges.iter().map(|e| (e.source, e.label, e.target)));
        let inc = Adjacency::build(n, &labels, edges.iter().map(|e| (e.target, e.label, e.source)));
        let nel = graph.edge_label_count();
        let dedup_rows = |c: Csr<VertexId>| {
            Csr::from_rows((0..c.rows()).map(|r| {
                let mut row = c.row(r).to_vec();
                row.dedup();
                row
            }))
        };
        let subjects = dedup_rows(Csr::from_pairs(
            nel,
            edges.iter().map(|e| (e.label as usize, e.source)).collect(),
        ));
        let objects = dedup_rows(Csr::from_pairs(
            nel,
            edges.iter().map(|e| (e.label as usize, e.target)).collect(),
        ));
        let out_edges = Csr::from_pairs(
            n,
            edges
                .iter()
                .map(|e| (e.source as usize, pack(e.target, e.label)))
                .collect(),
        );
        GraphStore {
            vertex_count: n,
            label_count: graph.label_count(),
            edge_label_count: nel,
            labels,
            inverse,
            out,
            inc,
            subjects,
            objects,
            out_edges,
            edge_count: edges.len(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn edge_label_count(&self) -> usize {
        self.edge_label_count
    }

    pub fn labels(&self, v: VertexId) -> &[LabelId] {
        self.labels.row(v as usize)
    }

    /// Whether `v` carries every label of the sorted set `required`.
    pub fn has_labels(&self, v: VertexId, required: &[LabelId]) -> bool {
        let have = self.labels(v);
        required.iter().all(|l| have.binary_search(l).is_ok())
    }

    pub fn label_segment(&self, l: LabelId) -> &[VertexId] {
        if (l as usize) < self.label_count {
            self.inverse.row(l as usize)
        } else {
            &[]
        }
    }

    pub fn vertices_with_labels(&self, labels: &[LabelId]) -> LabelMatch<'_> {
        match labels {
            [] => LabelMatch::AllVertices,
            [l] => LabelMatch::Vertices(Cow::Borrowed(self.label_segment(*l))),
            _ => {
                let mut segs: Vec<&[VertexId]> = labels.iter().map(|&l| self.label_segment(l)).collect();
                segs.sort_by_key(|s| s.len());
                LabelMatch::Vertices(Cow::Owned(intersect_all(&segs)))
            }
        }
    }

    pub fn frequency(&self, labels: &[LabelId]) -> usize {
        match self.vertices_with_labels(labels) {
            LabelMatch::AllVertices => self.vertex_count,
            LabelMatch::Vertices(v) => v.len(),
        }
    }

    fn adjacency(&self, dir: Direction) -> &Adjacency {
        match dir {
            Direction::Outgoing => &self.out,
            Direction::Incoming => &self.inc,
        }
    }

    /// Neighbors of `v` in direction `dir` reached over `edge_label` (any
    /// label when `None`) that carry every label in `labels`.
    pub fn adjacent(
        &self,
        v: VertexId,
        dir: Direction,
        edge_label: Option<EdgeLabelId>,
        labels: &[LabelId],
    ) -> Cow<'_, [VertexId]> {
        let adj = self.adjacency(dir);
        match (edge_label, labels) {
            (Some(el), []) => Cow::Borrowed(adj.by_edge_label.segment(v, u64::from(el))),
            (Some(el), [l]) => Cow::Borrowed(adj.by_type.segment(v, pack(el, *l))),
            (Some(el), _) => {
                let mut segs: Vec<&[VertexId]> = labels.iter().map(|&l| adj.by_type.segment(v, pack(el, l))).collect();
                segs.sort_by_key(|s| s.len());
                Cow::Owned(intersect_all(&segs))
            }
            (None, []) => Cow::Borrowed(adj.all.row(v as usize)),
            (None, _) => {
                let mut out: Vec<VertexId> = Vec::new();
                for (key, seg) in adj.by_type.segments_of(v) {
                    if unpack(key).vertex_label == Some(labels[0]) {
                        out.extend_from_slice(seg);
                    }
                }
                out.sort_unstable();
                out.dedup();
                if labels.len() > 1 {
                    out.retain(|&w| self.has_labels(w, labels));
                }
                Cow::Owned(out)
            }
        }
    }

    /// Neighbor types of `v` in direction `dir`, sorted by edge label then
    /// vertex label, with label-less neighbors last within an edge label.
    pub fn neighbor_types(&self, v: VertexId, dir: Direction) -> Vec<NeighborType> {
        self.adjacency(dir)
            .by_type
            .keys
            .row(v as usize)
            .iter()
            .map(|&k| unpack(k))
            .collect()
    }

    /// Distinct edge labels used by `v` in direction `dir`.
    pub fn edge_labels(&self, v: VertexId, dir: Direction) -> impl Iterator<Item = EdgeLabelId> + '_ {
        self.adjacency(dir)
            .by_edge_label
            .keys
            .row(v as usize)
            .iter()
            .map(|&k| k as u32)
    }

    /// Number of incident edges counted over both directions.
    pub fn degree(&self, v: VertexId) -> usize {
        self.out.by_edge_label.span(v) + self.inc.by_edge_label.span(v)
    }

    /// Edge labels of all edges from `source` to `target`, ascending.
    pub fn labels_between(&self, source: VertexId, target: VertexId) -> impl Iterator<Item = EdgeLabelId> + '_ {
        let row = self.out_edges.row(source as usize);
        let lo = row.partition_point(|&k| k < pack(target, 0));
        let hi = row.partition_point(|&k| k <= pack(target, u32::MAX));
        row[lo..hi].iter().map(|&k| k as u32)
    }

    pub fn has_edge(&self, source: VertexId, target: VertexId, label: Option<EdgeLabelId>) -> bool {
        match label {
            Some(el) => self
                .out_edges
                .row(source as usize)
                .binary_search(&pack(target, el))
                .is_ok(),
            None => self.labels_between(source, target).next().is_some(),
        }
    }

    /// Distinct subjects of edges labeled `el`.
    pub fn subjects(&self, el: EdgeLabelId) -> &[VertexId] {
        if (el as usize) < self.edge_label_count {
            self.subjects.row(el as usize)
        } else {
            &[]
        }
    }

    /// Distinct objects of edges labeled `el`.
    pub fn objects(&self, el: EdgeLabelId) -> &[VertexId] {
        if (el as usize) < self.edge_label_count {
            self.objects.row(el as usize)
        } else {
            &[]
        }
    }

    /// Vertices with at least one edge labeled `el` in direction `dir`.
    pub fn predicate_endpoints(&self, el: EdgeLabelId, dir: Direction) -> &[VertexId] {
        match dir {
            Direction::Outgoing => self.subjects(el),
            Direction::Incoming => self.objects(el),
        }
    }

    /// Checks offset monotonicity and payload lengths of every structure.
    pub fn is_well_formed(&self) -> bool {
        let csr_ok = |o: &[usize], len: usize| {
            o.first() == Some(&0) && o.windows(2).all(|w| w[0] <= w[1]) && o.last() == Some(&len)
        };
        csr_ok(self.labels.offsets(), self.labels.values().len())
            && csr_ok(self.inverse.offsets(), self.inverse.values().len())
            && csr_ok(self.subjects.offsets(), self.subjects.values().len())
            && csr_ok(self.objects.offsets(), self.objects.values().len())
            && csr_ok(self.out_edges.offsets(), self.out_edges.values().len())
            && [&self.out, &self.inc].iter().all(|a| {
                a.by_type.well_formed()
                    && a.by_edge_label.well_formed()
                    && csr_ok(a.all.offsets(), a.all.values().len())
            })
    }

    pub fn save(&self, w: &mut dyn Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for x in [
            self.vertex_count,
            self.label_count,
            self.edge_label_count,
            self.edge_count,
        ] {
            w.write_all(&(x as u64).to_le_bytes())?;
        }
        write_csr32(w, &self.labels)?;
        write_csr32(w, &self.inverse)?;
        for a in [&self.out, &self.inc] {
            write_segmented(w, &a.by_type)?;
            write_segmented(w, &a.by_edge_label)?;
            write_csr32(w, &a.all)?;
        }
        write_csr32(w, &self.subjects)?;
        write_csr32(w, &self.objects)?;
        write_usizes(w, self.out_edges.offsets())?;
        write_u64s(w, self.out_edges.values())
    }

    pub fn load(r: &mut dyn Read) -> Result<Self, SnapshotError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(SnapshotError::Version(version));
        }
        let vertex_count = read_u64(r)? as usize;
        let label_count = read_u64(r)? as usize;
        let edge_label_count = read_u64(r)? as usize;
        let edge_count = read_u64(r)? as usize;
        let labels = read_csr32(r)?;
        let inverse = read_csr32(r)?;
        let mut adj = Vec::new();
        for _ in 0..2 {
            adj.push(Adjacency {
                by_type: read_segmented(r)?,
                by_edge_label: read_segmented(r)?,
                all: read_csr32(r)?,
            });
        }
        let subjects = read_csr32(r)?;
        let objects = read_csr32(r)?;
        let offsets = read_usizes(r)?;
        let values = read_u64s(r)?;
        let out_edges = Csr::from_parts(offsets, values).ok_or(SnapshotError::Corrupt("edge list"))?;
        let inc = adj.pop().expect("two directions");
        let out = adj.pop().expect("two directions");
        let store = GraphStore {
            vertex_count,
            label_count,
            edge_label_count,
            labels,
            inverse,
            out,
            inc,
            subjects,
            objects,
            out_edges,
            edge_count,
        };
        let sizes_ok = store.labels.rows() == vertex_count
            && store.inverse.rows() == label_count
            && store.subjects.rows() == edge_label_count
            && store.out_edges.rows() == vertex_count
            && store.out.all.rows() == vertex_count
            && store.inc.all.rows() == vertex_count;
        if !sizes_ok || !store.is_well_formed() {
            return Err(SnapshotError::Corrupt("structure sizes"));
        }
        Ok(store)
    }
}

/// Intersection of sorted lists, smallest first for best performance.
fn intersect_all(segs: &[&[VertexId]]) -> Vec<VertexId> {
    let Some((first, rest)) = segs.split_first() else {
        return Vec::new();
    };
    first
        .iter()
        .copied()
        .filter(|x| rest.iter().all(|s| s.binary_search(x).is_ok()))
        .collect()
}

fn write_usizes(w: &mut dyn Write, xs: &[usize]) -> io::Result<()> {
    w.write_all(&(xs.len() as u64).to_le_bytes())?;
    for &x in xs {
        w.write_all(&(x as u64).to_le_bytes())?;
    }
    Ok(())
}

fn write_u32s(w: &mut dyn Write, xs: &[u32]) -> io::Result<()> {
    w.write_all(&(xs.len() as u64).to_le_bytes())?;
    for &x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn write_u64s(w: &mut dyn Write, xs: &[u64]) -> io::Result<()> {
    w.write_all(&(xs.len() as u64).to_le_bytes())?;
    for &x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn write_csr32(w: &mut dyn Write, c: &Csr<u32>) -> io::Result<()> {
    write_usizes(w, c.offsets())?;
    write_u32s(w, c.values())
}

fn write_segmented(w: &mut dyn Write, s: &Segmented) -> io::Result<()> {
    write_usizes(w, s.keys.offsets())?;
    write_u64s(w, s.keys.values())?;
    write_usizes(w, &s.ends)?;
    write_u32s(w, &s.adj)
}

fn read_u32(r: &mut dyn Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut dyn Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_len(r: &mut dyn Read) -> Result<usize, SnapshotError> {
    let n = read_u64(r)?;
    // guards allocation on corrupt input
    if n > (1 << 40) {
        return Err(SnapshotError::Corrupt("array length"));
    }
    Ok(n as usize)
}

fn read_usizes(r: &mut dyn Read) -> Result<Vec<usize>, SnapshotError> {
    let n = read_len(r)?;
    (0..n).map(|_| Ok(read_u64(r)? as usize)).collect()
}

fn read_u32s(r: &mut dyn Read) -> Result<Vec<u32>, SnapshotError> {
    let n = read_len(r)?;
    (0..n).map(|_| Ok(read_u32(r)?)).collect()
}

fn read_u64s(r: &mut dyn Read) -> Result<Vec<u64>, SnapshotError> {
    let n = read_len(r)?;
    (0..n).map(|_| Ok(read_u64(r)?)).collect()
}

fn read_csr32(r: &mut dyn Read) -> Result<Csr<u32>, SnapshotError> {
    let offsets = read_usizes(r)?;
    let values = read_u32s(r)?;
    Csr::from_parts(offsets, values).ok_or(SnapshotError::Corrupt("offset array"))
}

fn read_segmented(r: &mut dyn Read) -> Result<Segmented, SnapshotError> {
    let offsets = read_usizes(r)?;
    let values = read_u64s(r)?;
    let keys = Csr::from_parts(offsets, values).ok_or(SnapshotError::Corrupt("segment keys"))?;
    let ends = read_usizes(r)?;
    let adj = read_u32s(r)?;
    let s = Segmented { keys, ends, adj };
    if !s.well_formed() {
        return Err(SnapshotError::Corrupt("segment offsets"));
    }
    Ok(s)
}
