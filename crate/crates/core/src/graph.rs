//! Undirected simple graphs on dense node ids `0..n`.
//!
//! Adjacency is kept as one bitset row per node, which gives O(1) pair
//! lookups and lets the motif census intersect whole neighbourhoods with a
//! handful of word operations.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// An immutable undirected simple graph.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_count)
            .finish()
    }
}

impl Graph {
    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(WORD_BITS).max(1);
        Graph {
            n,
            words,
            rows: vec![0; n * words],
            edge_count: 0,
        }
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let mut b = GraphBuilder::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                b.insert(u, v);
            }
        }
        b.build()
    }

    /// Builds a graph from node pairs. Duplicates and reversed duplicates
    /// collapse into a single edge; self-loops are rejected.
    pub fn from_edge_list<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut b = GraphBuilder::new(n);
        for (u, v) in pairs {
            b.try_insert(u, v)?;
        }
        Ok(b.build())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        debug_assert!(u < self.n && v < self.n);
        self.rows[u * self.words + v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(u).iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Bitset row of `u`; bit `v` is set iff `{u, v}` is an edge.
    #[inline]
    pub(crate) fn row(&self, u: usize) -> &[u64] {
        &self.rows[u * self.words..(u + 1) * self.words]
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    /// Edge density `|E| / C(n, 2)`.
    pub fn density(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::DegenerateGraph(format!(
                "density needs at least 2 nodes, got {}",
                self.n
            )));
        }
        let pairs = self.n * (self.n - 1) / 2;
        Ok(self.edge_count as f64 / pairs as f64)
    }

    /// Within-tetrad degrees of the induced subgraph on `t`, sorted ascending.
    pub fn tetrad_degree_signature(&self, t: &Tetrad) -> Result<[u8; 4]> {
        let nodes = t.nodes();
        if nodes.iter().any(|&v| v >= self.n) {
            return Err(Error::InvalidTetrad { nodes });
        }
        let mut deg = [0u8; 4];
        for a in 0..4 {
            for b in (a + 1)..4 {
                if self.has_edge(nodes[a], nodes[b]) {
                    deg[a] += 1;
                    deg[b] += 1;
                }
            }
        }
        deg.sort_unstable();
        Ok(deg)
    }

    /// Returns the graph with node `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "permutation has length {}, graph has {} nodes",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        Graph::from_edge_list(self.n, self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    /// Parses the edge-list text format: a header line `n m` followed by
    /// `m` lines `u v`. Everything after `#` on a line is ignored.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut builder: Option<GraphBuilder> = None;
        let mut seen = 0usize;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (a, b) = parse_pair(content, line_no)?;
            match header {
                None => {
                    header = Some((a, b));
                    builder = Some(GraphBuilder::new(a));
                }
                Some((_, m)) => {
                    if seen == m {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("more edge lines than the declared {m}"),
                        });
                    }
                    let b_ref = builder.as_mut().expect("builder set with header");
                    b_ref.try_insert(a, b).map_err(|e| Error::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    })?;
                    seen += 1;
                }
            }
        }
        let (_, m) = header.ok_or(Error::Parse {
            line: 0,
            msg: "missing `n m` header".into(),
        })?;
        if seen != m {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header declares {m} edges, found {seen}"),
            });
        }
        Ok(builder.expect("builder set with header").build())
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.edge_count)?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }
}

fn parse_pair(content: &str, line: usize) -> Result<(usize, usize)> {
    let mut fields = content.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let tok = fields.next().ok_or_else(|| Error::Parse {
            line,
            msg: format!("missing {what}"),
        })?;
        tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("`{tok}` is not a non-negative integer"),
        })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if let Some(extra) = fields.next() {
        return Err(Error::Parse {
            line,
            msg: format!("unexpected trailing field `{extra}`"),
        });
    }
    Ok((a, b))
}

/// Incremental construction; the finished [`Graph`] is immutable.
pub struct GraphBuilder {
    graph: Graph,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        GraphBuilder {
            graph: Graph::empty(n),
        }
    }

    pub fn n(&self) -> usize {
        self.graph.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.graph.has_edge(u, v)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.graph.degree(u)
    }

    pub(crate) fn row(&self, u: usize) -> &[u64] {
        self.graph.row(u)
    }

    pub fn try_insert(&mut self, u: usize, v: usize) -> Result<bool> {
        let n = self.graph.n;
        for node in [u, v] {
            if node >= n {
                return Err(Error::InvalidNode { node, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(self.insert(u, v))
    }

    /// Inserts `{u, v}`; returns false if it was already present.
    pub(crate) fn insert(&mut self, u: usize, v: usize) -> bool {
        if self.graph.has_edge(u, v) {
            return false;
        }
        self.flip(u, v);
        self.graph.edge_count += 1;
        true
    }

    pub(crate) fn remove(&mut self, u: usize, v: usize) -> bool {
        if !self.graph.has_edge(u, v) {
            return false;
        }
        self.flip(u, v);
        self.graph.edge_count -= 1;
        true
    }

    fn flip(&mut self, u: usize, v: usize) {
        let w = self.graph.words;
        self.graph.rows[u * w + v / WORD_BITS] ^= 1 << (v % WORD_BITS);
        self.graph.rows[v * w + u / WORD_BITS] ^= 1 << (u % WORD_BITS);
    }

    pub fn build(self) -> Graph {
        self.graph
    }
}

/// Four distinct node ids, stored in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tetrad([usize; 4]);

impl Tetrad {
    pub fn new(mut nodes: [usize; 4]) -> Result<Self> {
        nodes.sort_unstable();
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTetrad { nodes });
        }
        Ok(Tetrad(nodes))
    }

    pub fn nodes(&self) -> [usize; 4] {
        self.0
    }
}
