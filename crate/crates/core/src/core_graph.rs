//! Stallings core graphs of finitely generated subgroups of a free group.
//!
//! A [`CoreGraph`] is a folded, pointed, connected graph whose edges are
//! directed and labelled by generators. Graphs are always stored in a
//! canonical numbering: vertices are numbered in BFS order from the
//! basepoint (vertex 0), visiting at each vertex the outgoing then incoming
//! edge of label 1, then of label 2, and so on. Because a folded graph has at
//! most one edge per (vertex, label, direction), two core graphs represent
//! the same subgroup exactly when they compare equal.
//!
//! Quotients are formed by merging the blocks of a vertex partition and
//! folding. The X-distance between a graph and one of its quotients is the
//! smallest partition norm producing that quotient; it detects free factors
//! through the rank sandwich `rk J - rk H <= dist <= rk J`, with equality on
//! the left exactly for free factors.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guard::Guards;
use crate::words::{Letter, ReducedWord};

const NONE: u32 = u32::MAX;

/// A directed edge `from -> to` carrying generator `label` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: usize,
}

impl Edge {
    pub fn new(from: usize, to: usize, label: usize) -> Self {
        Edge { from, to, label }
    }
}

/// A folded pointed labelled graph in canonical numbering; basepoint is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoreGraph {
    alphabet_size: usize,
    num_vertices: usize,
    // sorted by (from, label)
    edges: Vec<Edge>,
    // out[v * k + l] = index into `edges` of the (l+1)-edge leaving v
    out: Vec<u32>,
    inn: Vec<u32>,
}

/// Union-find based Stallings folding over a fixed vertex set.
struct Folder {
    k: usize,
    parent: Vec<u32>,
    // per class root and label: some terminus / origin representative
    out: Vec<u32>,
    inn: Vec<u32>,
    pending: Vec<(u32, u32)>,
}

impl Folder {
    fn new(k: usize, n: usize) -> Self {
        Folder {
            k,
            parent: (0..n as u32).collect(),
            out: vec![NONE; n * k],
            inn: vec![NONE; n * k],
            pending: Vec::new(),
        }
    }

    fn from_graph(g: &CoreGraph) -> Self {
        let k = g.alphabet_size;
        let mut f = Folder::new(k, g.num_vertices);
        for e in &g.edges {
            f.out[e.from * k + e.label - 1] = e.to as u32;
            f.inn[e.to * k + e.label - 1] = e.from as u32;
        }
        f
    }

    fn reset_from(&mut self, g: &CoreGraph) {
        let k = g.alphabet_size;
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.out.iter_mut().for_each(|x| *x = NONE);
        self.inn.iter_mut().for_each(|x| *x = NONE);
        for e in &g.edges {
            self.out[e.from * k + e.label - 1] = e.to as u32;
            self.inn[e.to * k + e.label - 1] = e.from as u32;
        }
        self.pending.clear();
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn add_edge(&mut self, from: usize, label: usize, to: usize) {
        let k = self.k;
        let rf = self.find(from as u32) as usize;
        let rt = self.find(to as u32);
        let slot = rf * k + label - 1;
        if self.out[slot] == NONE {
            self.out[slot] = rt;
        } else {
            self.pending.push((self.out[slot], rt));
        }
        let slot = rt as usize * k + label - 1;
        if self.inn[slot] == NONE {
            self.inn[slot] = rf as u32;
        } else {
            self.pending.push((self.inn[slot], rf as u32));
        }
        self.process();
    }

    fn merge(&mut self, a: usize, b: usize) {
        self.pending.push((a as u32, b as u32));
        self.process();
    }

    fn process(&mut self) {
        let k = self.k;
        while let Some((a, b)) = self.pending.pop() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            let (keep, gone) = if a < b { (a, b) } else { (b, a) };
            self.parent[gone as usize] = keep;
            for l in 0..k {
                for table in [&mut self.out, &mut self.inn] {
                    let g = table[gone as usize * k + l];
                    if g == NONE {
                        continue;
                    }
                    let s = &mut table[keep as usize * k + l];
                    if *s == NONE {
                        *s = g;
                    } else {
                        self.pending.push((*s, g));
                    }
                }
            }
        }
    }

    /// Canonical folded graph of the basepoint's component, plus the map from
    /// original vertices to canonical vertices (`None` outside the component).
    fn extract(&mut self, basepoint: usize) -> (CoreGraph, Vec<Option<usize>>) {
        let n = self.parent.len();
        let k = self.k;
        let roots: Vec<u32> = (0..n as u32).map(|v| self.find(v)).collect();
        let mut edges = Vec::new();
        for v in 0..n {
            if roots[v] as usize != v {
                continue;
            }
            for l in 0..k {
                let t = self.out[v * k + l];
                if t != NONE {
                    edges.push((v, l + 1, roots[t as usize] as usize));
                }
            }
        }
        let (g, root_map) = canonicalize(k, n, &edges, roots[basepoint] as usize);
        let map = roots.iter().map(|&r| root_map[r as usize]).collect();
        (g, map)
    }
}

/// BFS renumbering of a folded graph given as `(from, label, to)` triples over
/// vertex ids `0..n`; vertices unreachable from `base` are dropped.
fn canonicalize(k: usize, n: usize, edges: &[(usize, usize, usize)], base: usize) -> (CoreGraph, Vec<Option<usize>>) {
    let mut out = vec![NONE; n * k];
    let mut inn = vec![NONE; n * k];
    for &(u, l, v) in edges {
        out[u * k + l - 1] = v as u32;
        inn[v * k + l - 1] = u as u32;
    }
    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    map[base] = Some(0);
    order.push(base);
    queue.push_back(base);
    while let Some(v) = queue.pop_front() {
        for l in 0..k {
            for t in [out[v * k + l], inn[v * k + l]] {
                if t != NONE && map[t as usize].is_none() {
                    map[t as usize] = Some(order.len());
                    order.push(t as usize);
                    queue.push_back(t as usize);
                }
            }
        }
    }
    let mut new_edges: Vec<Edge> = edges
        .iter()
        .filter_map(|&(u, l, v)| Some(Edge::new(map[u]?, map[v]?, l)))
        .collect();
    new_edges.sort_by_key(|e| (e.from, e.label, e.to));
    (CoreGraph::assemble(k, order.len(), new_edges), map)
}

impl CoreGraph {
    fn assemble(k: usize, n: usize, edges: Vec<Edge>) -> Self {
        let mut out = vec![NONE; n * k];
        let mut inn = vec![NONE; n * k];
        for (i, e) in edges.iter().enumerate() {
            out[e.from * k + e.label - 1] = i as u32;
            inn[e.to * k + e.label - 1] = i as u32;
        }
        CoreGraph {
            alphabet_size: k,
            num_vertices: n,
            edges,
            out,
            inn,
        }
    }

    /// The graph of the trivial subgroup: a lone basepoint.
    pub fn trivial(alphabet_size: usize) -> Self {
        CoreGraph::assemble(alphabet_size.max(1), 1, Vec::new())
    }

    /// The bouquet of all `alphabet_size` loops, i.e. the whole free group.
    pub fn bouquet(alphabet_size: usize) -> Self {
        let labels: Vec<usize> = (1..=alphabet_size).collect();
        CoreGraph::bouquet_of(alphabet_size, &labels)
    }

    /// One vertex with a loop for each of `labels`.
    pub fn bouquet_of(alphabet_size: usize, labels: &[usize]) -> Self {
        let mut labels = labels.to_vec();
        labels.sort_unstable();
        labels.dedup();
        let edges = labels.into_iter().map(|l| Edge::new(0, 0, l)).collect();
        CoreGraph::assemble(alphabet_size.max(1), 1, edges)
    }

    /// Wedge of one petal per generator, folded, with hanging trees trimmed.
    pub fn from_words(alphabet_size: usize, generators: &[ReducedWord]) -> Result<Self> {
        let k = alphabet_size.max(1);
        if let Some(w) = generators.iter().find(|w| w.letters().iter().any(|l| l.index() > k)) {
            return Err(Error::invalid(format!("generator {w} uses letters beyond alphabet size {k}")));
        }
        let total: usize = generators.iter().map(|w| w.len().saturating_sub(1)).sum();
        let mut folder = Folder::new(k, 1 + total);
        let mut next = 1;
        for w in generators.iter().filter(|w| !w.is_identity()) {
            let len = w.len();
            let mut cur = 0;
            for (i, l) in w.letters().iter().enumerate() {
                let nxt = if i + 1 == len {
                    0
                } else {
                    next += 1;
                    next - 1
                };
                if l.is_inverse() {
                    folder.add_edge(nxt, l.index(), cur);
                } else {
                    folder.add_edge(cur, l.index(), nxt);
                }
                cur = nxt;
            }
        }
        let (folded, _) = folder.extract(0);
        Ok(folded.trimmed())
    }

    /// Folds an arbitrary pointed labelled graph; the result keeps only the
    /// basepoint's component and is not trimmed.
    pub fn fold(alphabet_size: usize, num_vertices: usize, edges: &[Edge], basepoint: usize) -> Result<Folded> {
        let order: Vec<usize> = (0..edges.len()).collect();
        CoreGraph::fold_in_order(alphabet_size, num_vertices, edges, basepoint, &order)
    }

    /// Folding with the edges inserted in the given order (the result does not
    /// depend on it).
    pub fn fold_in_order(
        alphabet_size: usize,
        num_vertices: usize,
        edges: &[Edge],
        basepoint: usize,
        order: &[usize],
    ) -> Result<Folded> {
        let k = alphabet_size.max(1);
        if basepoint >= num_vertices {
            return Err(Error::invalid("basepoint out of range"));
        }
        for e in edges {
            if e.from >= num_vertices || e.to >= num_vertices {
                return Err(Error::invalid(format!("edge {e:?} references a missing vertex")));
            }
            if e.label == 0 || e.label > k {
                return Err(Error::LetterOutOfRange {
                    index: e.label,
                    alphabet_size: k,
                });
            }
        }
        let mut folder = Folder::new(k, num_vertices);
        for &i in order {
            let e = edges.get(i).ok_or_else(|| Error::invalid("fold order index out of range"))?;
            folder.add_edge(e.from, e.label, e.to);
        }
        let (graph, vertex_map) = folder.extract(basepoint);
        Ok(Folded { graph, vertex_map })
    }

    /// Validates an already-folded connected graph and returns it in canonical
    /// numbering together with the renumbering map.
    pub fn from_edges(
        alphabet_size: usize,
        num_vertices: usize,
        edges: &[Edge],
        basepoint: usize,
    ) -> Result<(Self, Vec<usize>)> {
        let k = alphabet_size.max(1);
        if num_vertices == 0 || basepoint >= num_vertices {
            return Err(Error::invalid("graph needs a basepoint among its vertices"));
        }
        let mut out_seen = vec![false; num_vertices * k];
        let mut in_seen = vec![false; num_vertices * k];
        for e in edges {
            if e.from >= num_vertices || e.to >= num_vertices {
                return Err(Error::invalid(format!("edge {e:?} references a missing vertex")));
            }
            if e.label == 0 || e.label > k {
                return Err(Error::LetterOutOfRange {
                    index: e.label,
                    alphabet_size: k,
                });
            }
            let (o, i) = (e.from * k + e.label - 1, e.to * k + e.label - 1);
            if out_seen[o] || in_seen[i] {
                return Err(Error::invalid("graph is not folded"));
            }
            out_seen[o] = true;
            in_seen[i] = true;
        }
        let triples: Vec<_> = edges.iter().map(|e| (e.from, e.label, e.to)).collect();
        let (g, map) = canonicalize(k, num_vertices, &triples, basepoint);
        let map: Option<Vec<usize>> = map.into_iter().collect();
        let map = map.ok_or(Error::NotConnected)?;
        Ok((g, map))
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn basepoint(&self) -> usize {
        0
    }

    pub fn is_trivial(&self) -> bool {
        self.edges.is_empty()
    }

    /// Index of the edge with this label leaving `v`.
    pub fn out_edge(&self, v: usize, label: usize) -> Option<usize> {
        let e = self.out[v * self.alphabet_size + label - 1];
        (e != NONE).then_some(e as usize)
    }

    /// Index of the edge with this label entering `v`.
    pub fn in_edge(&self, v: usize, label: usize) -> Option<usize> {
        let e = self.inn[v * self.alphabet_size + label - 1];
        (e != NONE).then_some(e as usize)
    }

    /// The vertex reached from `v` by reading `letter`, and the edge used.
    pub fn step(&self, v: usize, letter: Letter) -> Option<(usize, usize)> {
        if letter.index() > self.alphabet_size {
            return None;
        }
        if letter.is_inverse() {
            self.in_edge(v, letter.index()).map(|e| (self.edges[e].from, e))
        } else {
            self.out_edge(v, letter.index()).map(|e| (self.edges[e].to, e))
        }
    }

    /// `|E| - |V| + 1`.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.num_vertices
    }

    /// Degree with loops counted twice.
    pub fn degree(&self, v: usize) -> usize {
        (1..=self.alphabet_size)
            .map(|l| self.out_edge(v, l).is_some() as usize + self.in_edge(v, l).is_some() as usize)
            .sum()
    }

    /// Labels that occur on some edge, sorted.
    pub fn labels_used(&self) -> Vec<usize> {
        let mut labels: Vec<usize> = self.edges.iter().map(|e| e.label).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// Every vertex other than the basepoint has degree at least two.
    pub fn is_core(&self) -> bool {
        (1..self.num_vertices).all(|v| self.degree(v) >= 2)
    }

    /// Removes hanging trees not containing the basepoint.
    pub fn trimmed(&self) -> CoreGraph {
        let n = self.num_vertices;
        let mut deg: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut alive = vec![true; n];
        let mut stack: Vec<usize> = (1..n).filter(|&v| deg[v] <= 1).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for e in &self.edges {
                let other = if e.from == v && alive[e.to] {
                    e.to
                } else if e.to == v && alive[e.from] {
                    e.from
                } else {
                    continue;
                };
                deg[other] -= 1;
                if other != 0 && deg[other] <= 1 {
                    stack.push(other);
                }
            }
        }
        if alive.iter().all(|&a| a) {
            return self.clone();
        }
        let triples: Vec<_> = self
            .edges
            .iter()
            .filter(|e| alive[e.from] && alive[e.to])
            .map(|e| (e.from, e.label, e.to))
            .collect();
        canonicalize(self.alphabet_size, n, &triples, 0).0
    }

    /// Follows `w` from the basepoint; returns the end vertex and how often
    /// each edge was traversed, or `None` if the path falls off the graph.
    pub fn trace(&self, w: &ReducedWord) -> Option<(usize, Vec<u32>)> {
        let mut counts = vec![0u32; self.edges.len()];
        let mut v = 0;
        for &l in w.letters() {
            let (next, e) = self.step(v, l)?;
            counts[e] += 1;
            v = next;
        }
        Some((v, counts))
    }

    /// Whether `w` spells a closed path at the basepoint, i.e. lies in the subgroup.
    pub fn membership(&self, w: &ReducedWord) -> bool {
        matches!(self.trace(w), Some((0, _)))
    }

    /// A basis of the subgroup: one generator per edge outside a BFS spanning tree.
    pub fn basis(&self) -> Vec<ReducedWord> {
        let tree = self.spanning_tree(TreeOrder::Bfs);
        let k = self.alphabet_size;
        tree.non_tree_edges
            .iter()
            .map(|&e| {
                let edge = self.edges[e];
                let mut letters = tree.path_from_base[edge.from].clone();
                letters.push(Letter::pos(edge.label));
                letters.extend(tree.path_from_base[edge.to].iter().rev().map(|l| l.inv()));
                ReducedWord::new(letters.clone(), k)
                    .unwrap_or_else(|_| crate::words::RawWord::new(letters, k).expect("labels in range").reduce())
            })
            .collect()
    }

    /// A spanning tree, with the tree path from the basepoint to every vertex.
    pub fn spanning_tree(&self, order: TreeOrder) -> SpanningTree {
        let n = self.num_vertices;
        let mut path: Vec<Option<Vec<Letter>>> = vec![None; n];
        let mut in_tree = vec![false; self.edges.len()];
        path[0] = Some(Vec::new());
        let mut frontier: VecDeque<usize> = VecDeque::from([0]);
        let pop = |f: &mut VecDeque<usize>| match order {
            TreeOrder::Bfs => f.pop_front(),
            TreeOrder::Dfs => f.pop_back(),
        };
        // visit order of incident edges; Reversed scans labels from the top
        let labels: Vec<usize> = match order {
            TreeOrder::Bfs => (1..=self.alphabet_size).collect(),
            TreeOrder::Dfs => (1..=self.alphabet_size).rev().collect(),
        };
        while let Some(v) = pop(&mut frontier) {
            for &l in &labels {
                for letter in [Letter::pos(l), Letter::neg(l)] {
                    if let Some((t, e)) = self.step(v, letter) {
                        if path[t].is_none() {
                            let mut p = path[v].clone().expect("visited");
                            p.push(letter);
                            path[t] = Some(p);
                            in_tree[e] = true;
                            frontier.push_back(t);
                        }
                    }
                }
            }
        }
        SpanningTree {
            path_from_base: path.into_iter().map(|p| p.expect("core graphs are connected")).collect(),
            non_tree_edges: (0..self.edges.len()).filter(|&e| !in_tree[e]).collect(),
            tree_edges: in_tree,
        }
    }

    /// The same graph over a larger alphabet.
    pub fn with_alphabet(&self, alphabet_size: usize) -> Result<CoreGraph> {
        if alphabet_size < self.labels_used().last().copied().unwrap_or(0) {
            return Err(Error::invalid("alphabet too small for the graph's labels"));
        }
        Ok(CoreGraph::assemble(alphabet_size.max(1), self.num_vertices, self.edges.clone()))
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            alphabet_size: self.alphabet_size,
            vertices: (0..self.num_vertices).collect(),
            edges: self.edges.iter().map(|e| [e.from, e.to, e.label]).collect(),
            basepoint: 0,
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<CoreGraph> {
        let index: HashMap<usize, usize> = json.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let lookup = |v: usize| index.get(&v).copied().ok_or_else(|| Error::invalid(format!("unknown vertex {v}")));
        let edges = json
            .edges
            .iter()
            .map(|&[u, v, l]| Ok(Edge::new(lookup(u)?, lookup(v)?, l)))
            .collect::<Result<Vec<_>>>()?;
        let base = lookup(json.basepoint)?;
        let (g, _) = CoreGraph::from_edges(json.alphabet_size, json.vertices.len(), &edges, base)?;
        Ok(g)
    }
}

/// JSON form of a core graph: vertex ids, `[from, to, label]` triples and the basepoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub alphabet_size: usize,
    pub vertices: Vec<usize>,
    pub edges: Vec<[usize; 3]>,
    pub basepoint: usize,
}

impl Serialize for CoreGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoreGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = GraphJson::deserialize(d)?;
        CoreGraph::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Result of folding: the canonical graph and where each input vertex went.
#[derive(Debug, Clone)]
pub struct Folded {
    pub graph: CoreGraph,
    pub vertex_map: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeOrder {
    Bfs,
    Dfs,
}

#[derive(Debug, Clone)]
pub struct SpanningTree {
    pub path_from_base: Vec<Vec<Letter>>,
    pub tree_edges: Vec<bool>,
    pub non_tree_edges: Vec<usize>,
}

/// A partition of `0..n` into nonempty blocks; `norm = n - #blocks`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexPartition {
    blocks: Vec<Vec<usize>>,
}

impl VertexPartition {
    /// Checks the blocks cover `0..n` disjointly and sorts them.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::invalid("partition blocks must be nonempty"));
            }
            for &v in b {
                if v >= n || seen[v] {
                    return Err(Error::invalid("partition blocks must be disjoint subsets of the vertex set"));
                }
                seen[v] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("partition blocks must cover the vertex set"));
        }
        Ok(VertexPartition::normalized(blocks))
    }

    fn normalized(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort();
        VertexPartition { blocks }
    }

    /// The partition into singletons.
    pub fn discrete(n: usize) -> Self {
        VertexPartition {
            blocks: (0..n).map(|v| vec![v]).collect(),
        }
    }

    /// From a block label per element.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut by_label: HashMap<usize, Vec<usize>> = HashMap::new();
        for (v, &l) in labels.iter().enumerate() {
            by_label.entry(l).or_default().push(v);
        }
        VertexPartition::normalized(by_label.into_values().collect())
    }

    /// Cycles of a permutation viewed as a partition.
    pub fn from_permutation(p: &crate::words::Permutation) -> Self {
        VertexPartition::normalized(p.cycles())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_elements(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn norm(&self) -> usize {
        self.num_elements() - self.blocks.len()
    }

    /// Every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &VertexPartition) -> bool {
        let mut owner = vec![usize::MAX; other.num_elements()];
        for (i, b) in other.blocks.iter().enumerate() {
            for &v in b {
                owner[v] = i;
            }
        }
        self.blocks.iter().all(|b| b.iter().all(|&v| owner.get(v) == owner.get(b[0])))
    }
}

/// Restricted-growth-string enumeration of all set partitions of `0..n`.
pub struct SetPartitions {
    labels: Vec<usize>,
    maxes: Vec<usize>,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize) -> Self {
        SetPartitions {
            labels: vec![0; n],
            maxes: vec![0; n],
            done: false,
        }
    }

    /// Current labelling, or `None` when exhausted.
    pub fn current(&self) -> Option<&[usize]> {
        (!self.done).then_some(&self.labels[..])
    }

    pub fn advance(&mut self) {
        let n = self.labels.len();
        let mut i = n;
        while i > 1 {
            i -= 1;
            // labels[i] may go up to max(labels[..i]) + 1
            if self.labels[i] <= self.maxes[i - 1] {
                self.labels[i] += 1;
                self.maxes[i] = self.maxes[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.maxes[j] = self.maxes[i];
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current()?.to_vec();
        self.advance();
        Some(cur)
    }
}

/// A quotient graph and the partition of the source vertices it induces
/// (the fibres of the quotient morphism).
#[derive(Debug, Clone)]
pub struct Quotient {
    pub graph: CoreGraph,
    pub induced: VertexPartition,
}

fn quotient_from_folder(g: &CoreGraph, folder: &mut Folder) -> Quotient {
    let (graph, map) = folder.extract(0);
    let labels: Vec<usize> = map.into_iter().map(|m| m.expect("quotients stay connected")).collect();
    Quotient {
        graph,
        induced: VertexPartition::from_labels(&labels),
    }
    .checked(g)
}

impl Quotient {
    fn checked(self, _src: &CoreGraph) -> Self {
        debug_assert!(self.graph.is_core(), "quotient of a core graph must be a core graph");
        self
    }
}

/// Merges each block of `partition` and folds.
pub fn quotient(g: &CoreGraph, partition: &VertexPartition) -> Result<Quotient> {
    quotient_general(g, std::slice::from_ref(partition), &[])
}

/// Merges vertices per the vertex partitions and equally-labelled edges per
/// the edge partitions (blocks of edge indices), then folds.
pub fn quotient_general(
    g: &CoreGraph,
    vertex_partitions: &[VertexPartition],
    edge_partitions: &[VertexPartition],
) -> Result<Quotient> {
    let mut folder = Folder::from_graph(g);
    for p in vertex_partitions {
        if p.num_elements() != g.num_vertices {
            return Err(Error::invalid("vertex partition does not match the graph's vertex set"));
        }
        for b in &p.blocks {
            for &v in &b[1..] {
                folder.merge(b[0], v);
            }
        }
    }
    for p in edge_partitions {
        if p.num_elements() != g.edges.len() {
            return Err(Error::invalid("edge partition does not match the graph's edge set"));
        }
        for b in &p.blocks {
            let first = g.edges[b[0]];
            for &e in &b[1..] {
                let other = g.edges[e];
                if other.label != first.label {
                    return Err(Error::invalid("edge partition block mixes labels"));
                }
                folder.merge(first.from, other.from);
                folder.merge(first.to, other.to);
            }
        }
    }
    Ok(quotient_from_folder(g, &mut folder))
}

/// One quotient of a core graph with the smallest norm of a vertex partition
/// producing it, and one such partition.
#[derive(Debug, Clone)]
pub struct QuotientEntry {
    pub graph: CoreGraph,
    pub norm: usize,
    pub partition: VertexPartition,
}

/// All quotients of `g`, each with its minimal generating partition norm.
/// The first entry is `g` itself at norm 0; the rest follow by (norm, graph).
pub fn enumerate_quotients(g: &CoreGraph, guards: &Guards) -> Result<Vec<QuotientEntry>> {
    let n = g.num_vertices;
    guards.check_partition(n)?;
    let mut best: HashMap<CoreGraph, (usize, Vec<usize>)> = HashMap::new();
    let mut folder = Folder::from_graph(g);
    let mut parts = SetPartitions::new(n);
    let mut first_in_block = Vec::with_capacity(n);
    while let Some(labels) = parts.current() {
        folder.reset_from(g);
        first_in_block.clear();
        let mut blocks = 0;
        for (v, &l) in labels.iter().enumerate() {
            if l == first_in_block.len() {
                first_in_block.push(v);
                blocks += 1;
            } else {
                folder.merge(first_in_block[l], v);
            }
        }
        let norm = n - blocks;
        let (graph, _) = folder.extract(0);
        match best.get_mut(&graph) {
            Some(entry) if entry.0 <= norm => {}
            Some(entry) => *entry = (norm, labels.to_vec()),
            None => {
                best.insert(graph, (norm, labels.to_vec()));
            }
        }
        parts.advance();
    }
    let mut entries: Vec<QuotientEntry> = best
        .into_iter()
        .map(|(graph, (norm, labels))| QuotientEntry {
            graph,
            norm,
            partition: VertexPartition::from_labels(&labels),
        })
        .collect();
    entries.sort_by(|a, b| (a.norm, &a.graph).cmp(&(b.norm, &b.graph)));
    Ok(entries)
}

/// A label-preserving map between core graphs sending basepoint to basepoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMorphism {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<usize>,
    pub surjective: bool,
    pub injective: bool,
}

/// The unique morphism `src -> dst`, present iff the subgroup of `src` is
/// contained in that of `dst`.
pub fn morphism(src: &CoreGraph, dst: &CoreGraph) -> Option<GraphMorphism> {
    let mut vmap: Vec<Option<usize>> = vec![None; src.num_vertices];
    let mut emap = vec![usize::MAX; src.edges.len()];
    vmap[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let image = vmap[v].expect("queued vertices are mapped");
        for l in 1..=src.alphabet_size {
            for letter in [Letter::pos(l), Letter::neg(l)] {
                let Some((t, e)) = src.step(v, letter) else { continue };
                let (ti, ei) = dst.step(image, letter)?;
                emap[e] = ei;
                match vmap[t] {
                    Some(existing) if existing != ti => return None,
                    Some(_) => {}
                    None => {
                        vmap[t] = Some(ti);
                        queue.push_back(t);
                    }
                }
            }
        }
    }
    let vertex_map: Vec<usize> = vmap.into_iter().map(|v| v.expect("core graphs are connected")).collect();
    let mut vhit = vec![false; dst.num_vertices];
    vertex_map.iter().for_each(|&v| vhit[v] = true);
    let mut ehit = vec![false; dst.edges.len()];
    emap.iter().for_each(|&e| ehit[e] = true);
    let surjective = vhit.iter().all(|&h| h) && ehit.iter().all(|&h| h);
    let mut sorted = vertex_map.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let injective = sorted.len() == vertex_map.len();
    Some(GraphMorphism {
        vertex_map,
        edge_map: emap,
        surjective,
        injective,
    })
}

/// The subgraph of `dst` covered by the image of `m`, as a core graph.
pub fn image(dst: &CoreGraph, m: &GraphMorphism) -> CoreGraph {
    let mut triples: Vec<_> = m
        .edge_map
        .iter()
        .map(|&e| {
            let edge = dst.edges[e];
            (edge.from, edge.label, edge.to)
        })
        .collect();
    triples.sort_unstable();
    triples.dedup();
    canonicalize(dst.alphabet_size, dst.num_vertices, &triples, 0).0
}

/// Memoised quotient enumerations.
#[derive(Debug, Default)]
pub struct QuotientCache {
    guards: Guards,
    cache: HashMap<CoreGraph, Arc<Vec<QuotientEntry>>>,
}

impl QuotientCache {
    pub fn new(guards: Guards) -> Self {
        QuotientCache {
            guards,
            cache: HashMap::new(),
        }
    }

    pub fn guards(&self) -> &Guards {
        &self.guards
    }

    pub fn quotients(&mut self, g: &CoreGraph) -> Result<Arc<Vec<QuotientEntry>>> {
        if let Some(q) = self.cache.get(g) {
            return Ok(q.clone());
        }
        let q = Arc::new(enumerate_quotients(g, &self.guards)?);
        self.cache.insert(g.clone(), q.clone());
        Ok(q)
    }

    /// Minimal partition norm turning `gh` into `gj`.
    pub fn x_distance(&mut self, gh: &CoreGraph, gj: &CoreGraph) -> Result<usize> {
        self.quotients(gh)?
            .iter()
            .find(|q| &q.graph == gj)
            .map(|q| q.norm)
            .ok_or(Error::NotQuotient)
    }

    /// Whether the subgroup of `gh` is a free factor of that of `gj`.
    ///
    /// Injective morphisms (subgraphs) give free factors directly. A surjective
    /// morphism is decided by the distance sandwich. Otherwise `gh` covers its
    /// image `L`, which is a subgraph hence a free factor of `gj`, and `H` is a
    /// free factor of `J` iff it is one of `L`.
    pub fn is_free_factor(&mut self, gh: &CoreGraph, gj: &CoreGraph) -> Result<bool> {
        let m = morphism(gh, gj).ok_or(Error::NoMorphism)?;
        if m.injective {
            return Ok(true);
        }
        let target = if m.surjective { gj.clone() } else { image(gj, &m) };
        let dist = self.x_distance(gh, &target)? as i64;
        Ok(dist == target.rank() as i64 - gh.rank() as i64)
    }
}

/// Minimal partition norm turning `gh` into `gj`; errors unless `gj` is a quotient.
pub fn x_distance(gh: &CoreGraph, gj: &CoreGraph, guards: &Guards) -> Result<usize> {
    QuotientCache::new(*guards).x_distance(gh, gj)
}

/// Whether the subgroup of `gh` is a free factor of that of `gj`.
pub fn is_free_factor(gh: &CoreGraph, gj: &CoreGraph, guards: &Guards) -> Result<bool> {
    QuotientCache::new(*guards).is_free_factor(gh, gj)
}

/// Maximum vertex degree and number of topological edges, after dropping the
/// path hanging from the basepoint when the basepoint is a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    pub max_degree: usize,
    pub topological_edges: usize,
}

pub fn degree_profile(g: &CoreGraph) -> DegreeProfile {
    let n = g.num_vertices;
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut alive = vec![true; n];
    let mut v = 0;
    while alive[v] && deg[v] == 1 {
        alive[v] = false;
        let e = g
            .edges
            .iter()
            .find(|e| (e.from == v && alive[e.to]) || (e.to == v && alive[e.from]))
            .copied();
        let Some(e) = e else { break };
        let next = if e.from == v { e.to } else { e.from };
        deg[next] -= 1;
        v = next;
    }
    let live: Vec<usize> = (0..n).filter(|&v| alive[v] && deg[v] > 0).collect();
    let max_degree = live.iter().map(|&v| deg[v]).max().unwrap_or(0);
    let branch_ends: usize = live.iter().filter(|&&v| deg[v] != 2).map(|&v| deg[v]).sum();
    let topological_edges = if live.is_empty() {
        0
    } else if branch_ends == 0 {
        1
    } else {
        branch_ends / 2
    };
    DegreeProfile {
        max_degree,
        topological_edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str, k: usize) -> ReducedWord {
        ReducedWord::parse(s, Some(k)).unwrap()
    }

    /// The rank-2 example `<x1 x2 x1^-3, x1^2 x2 x1^-2>` built by hand:
    /// v1 -1-> v2 -2-> v3, v4 -1-> v3, v2 -1-> v4, 2-loop at v4 (0-based here).
    fn fig_graph() -> (CoreGraph, Vec<usize>) {
        let edges = [
            Edge::new(0, 1, 1),
            Edge::new(1, 2, 2),
            Edge::new(3, 2, 1),
            Edge::new(1, 3, 1),
            Edge::new(3, 3, 2),
        ];
        CoreGraph::from_edges(2, 4, &edges, 0).unwrap()
    }

    #[test]
    fn single_loop() {
        let g = CoreGraph::from_words(1, &[w("a", 1)]).unwrap();
        assert_eq!(g, CoreGraph::bouquet(1));
        assert_eq!(g.rank(), 1);
    }

    #[test]
    fn two_generator_example_from_words() {
        let g = CoreGraph::from_words(2, &[w("abAAA", 2), w("aabAA", 2)]).unwrap();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.num_edges(), 5);
        assert_eq!(g.rank(), 2);
        assert_eq!(g, fig_graph().0);
    }

    #[test]
    fn square_is_directed_two_cycle() {
        let g = CoreGraph::from_words(1, &[w("aa", 1)]).unwrap();
        let (expected, _) = CoreGraph::from_edges(1, 2, &[Edge::new(0, 1, 1), Edge::new(1, 0, 1)], 0).unwrap();
        assert_eq!(g, expected);
    }

    #[test]
    fn empty_generators_give_trivial_graph() {
        let g = CoreGraph::from_words(2, &[]).unwrap();
        assert_eq!(g, CoreGraph::trivial(2));
        assert_eq!(g.rank(), 0);
        assert!(g.membership(&ReducedWord::identity(2)));
    }

    #[test]
    fn fold_merges_parallel_loops() {
        let f = CoreGraph::fold(1, 1, &[Edge::new(0, 0, 1), Edge::new(0, 0, 1)], 0).unwrap();
        assert_eq!(f.graph, CoreGraph::bouquet(1));
    }

    #[test]
    fn rank_of_bouquet() {
        assert_eq!(CoreGraph::bouquet(3).rank(), 3);
    }

    #[test]
    fn membership_examples() {
        let g = fig_graph().0;
        assert!(g.membership(&w("abAAA", 2)));
        assert!(g.membership(&w("aabAA", 2)));
        assert!(!g.membership(&w("a", 2)));
        assert!(g.membership(&ReducedWord::identity(2)));
    }

    #[test]
    fn morphism_examples() {
        let sq = CoreGraph::from_words(1, &[w("aa", 1)]).unwrap();
        let m = morphism(&sq, &CoreGraph::bouquet(1)).unwrap();
        assert!(m.surjective);
        assert!(!m.injective);
        let x1 = CoreGraph::from_words(2, &[w("a", 2)]).unwrap();
        let x2 = CoreGraph::from_words(2, &[w("b", 2)]).unwrap();
        assert!(morphism(&x1, &x2).is_none());
        let m = morphism(&fig_graph().0, &CoreGraph::bouquet(2)).unwrap();
        assert!(m.surjective);
    }

    #[test]
    fn figure_quotient() {
        let (g, map) = fig_graph();
        // {v1, v4}, {v2}, {v3} in the hand numbering
        let p = VertexPartition::new(4, vec![vec![map[0], map[3]], vec![map[1]], vec![map[2]]]).unwrap();
        let q = quotient(&g, &p).unwrap();
        let (expected, _) = CoreGraph::from_edges(
            2,
            2,
            &[Edge::new(0, 1, 1), Edge::new(1, 0, 1), Edge::new(0, 0, 2), Edge::new(1, 1, 2)],
            0,
        )
        .unwrap();
        assert_eq!(q.graph, expected);
        let induced = VertexPartition::new(4, vec![vec![map[0], map[3]], vec![map[1], map[2]]]).unwrap();
        assert_eq!(q.induced, induced);
        assert!(p.refines(&q.induced));
        assert_eq!(x_distance(&g, &expected, &Guards::default()).unwrap(), 1);
    }

    #[test]
    fn trivial_partition_is_identity_quotient() {
        let g = fig_graph().0;
        let q = quotient(&g, &VertexPartition::discrete(4)).unwrap();
        assert_eq!(q.graph, g);
    }

    #[test]
    fn edge_partition_must_respect_labels() {
        let g = fig_graph().0;
        let p = VertexPartition::new(5, vec![vec![0, 1], vec![2], vec![3], vec![4]]).unwrap();
        let mixed = g.edges()[0].label != g.edges()[1].label;
        let res = quotient_general(&g, &[], &[p]);
        assert_eq!(res.is_err(), mixed);
    }

    #[test]
    fn edge_merge_equals_endpoint_merge() {
        let g = fig_graph().0;
        let ones: Vec<usize> = (0..g.num_edges()).filter(|&e| g.edges()[e].label == 1).collect();
        let mut blocks = vec![vec![ones[0], ones[1]]];
        blocks.extend((0..g.num_edges()).filter(|e| *e != ones[0] && *e != ones[1]).map(|e| vec![e]));
        let ep = VertexPartition::new(g.num_edges(), blocks).unwrap();
        let via_edges = quotient_general(&g, &[], &[ep]).unwrap();
        let (a, b) = (g.edges()[ones[0]], g.edges()[ones[1]]);
        let mut labels: Vec<usize> = (0..4).collect();
        labels[b.from] = labels[a.from];
        let via_vertices = quotient(&g, &VertexPartition::from_labels(&labels)).unwrap();
        assert_eq!(via_edges.graph, via_vertices.graph);
    }

    #[test]
    fn quotients_of_square() {
        let sq = CoreGraph::from_words(1, &[w("aa", 1)]).unwrap();
        let qs = enumerate_quotients(&sq, &Guards::default()).unwrap();
        assert_eq!(qs.len(), 2);
        assert_eq!((qs[0].graph.clone(), qs[0].norm), (sq.clone(), 0));
        assert_eq!((qs[1].graph.clone(), qs[1].norm), (CoreGraph::bouquet(1), 1));
        assert_eq!(x_distance(&sq, &CoreGraph::bouquet(1), &Guards::default()).unwrap(), 1);
    }

    #[test]
    fn quotients_of_trivial() {
        let qs = enumerate_quotients(&CoreGraph::trivial(2), &Guards::default()).unwrap();
        assert_eq!(qs.len(), 1);
    }

    #[test]
    fn quotient_guard() {
        let long = CoreGraph::from_words(2, &[w("abababab", 2).concat(&w("aBaBaB", 2))]).unwrap();
        let guards = Guards {
            partition_vertices: 6,
            ..Guards::default()
        };
        let err = enumerate_quotients(&long, &guards).unwrap_err();
        assert!(err.to_string().contains("Bell("));
    }

    #[test]
    fn x_distance_requires_quotient() {
        let x1 = CoreGraph::from_words(2, &[w("a", 2)]).unwrap();
        assert_eq!(x_distance(&x1, &CoreGraph::bouquet(2), &Guards::default()), Err(Error::NotQuotient));
    }

    #[test]
    fn free_factor_examples() {
        let g = Guards::default();
        let x1 = CoreGraph::from_words(2, &[w("a", 2)]).unwrap();
        assert!(is_free_factor(&x1, &CoreGraph::bouquet(2), &g).unwrap());
        let sq = CoreGraph::from_words(1, &[w("aa", 1)]).unwrap();
        assert!(!is_free_factor(&sq, &CoreGraph::bouquet(1), &g).unwrap());
        let abb = CoreGraph::from_words(2, &[w("abb", 2)]).unwrap();
        assert!(is_free_factor(&abb, &CoreGraph::bouquet(2), &g).unwrap());
        // rank 2 but a proper subgroup of F_2
        let fig = fig_graph().0;
        assert!(!is_free_factor(&fig, &CoreGraph::bouquet(2), &g).unwrap());
    }

    #[test]
    fn free_factor_through_image() {
        // <x1^2> in F_2 is not a free factor; the morphism is neither injective nor onto
        let g = Guards::default();
        let sq = CoreGraph::from_words(2, &[w("aa", 2)]).unwrap();
        assert!(!is_free_factor(&sq, &CoreGraph::bouquet(2), &g).unwrap());
        let b = CoreGraph::from_words(2, &[w("b", 2)]).unwrap();
        assert_eq!(is_free_factor(&sq, &b, &g), Err(Error::NoMorphism));
    }

    #[test]
    fn degree_profiles() {
        let p = degree_profile(&CoreGraph::bouquet(2));
        assert_eq!((p.max_degree, p.topological_edges), (4, 2));
        let p = degree_profile(&fig_graph().0);
        assert!(p.max_degree <= 4 && p.topological_edges <= 5);
        assert_eq!((p.max_degree, p.topological_edges), (4, 2));
        let p = degree_profile(&CoreGraph::from_words(2, &[w("abAbb", 2)]).unwrap());
        assert_eq!((p.max_degree, p.topological_edges), (2, 1));
        let p = degree_profile(&CoreGraph::trivial(2));
        assert_eq!((p.max_degree, p.topological_edges), (0, 0));
    }

    #[test]
    fn basis_generates_same_graph() {
        let g = fig_graph().0;
        let basis = g.basis();
        assert_eq!(basis.len(), 2);
        assert_eq!(CoreGraph::from_words(2, &basis).unwrap(), g);
    }

    #[test]
    fn set_partition_counts() {
        for (n, bell) in [(0usize, 1usize), (1, 1), (3, 5), (5, 52), (7, 877)] {
            assert_eq!(SetPartitions::new(n).count(), bell);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = fig_graph().0;
        let text = serde_json::to_string(&g).unwrap();
        let back: CoreGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn unfolded_json_is_rejected() {
        let text = r#"{"alphabet_size":1,"vertices":[0],"edges":[[0,0,1],[0,0,1]],"basepoint":0}"#;
        assert!(serde_json::from_str::<CoreGraph>(text).is_err());
    }
}
