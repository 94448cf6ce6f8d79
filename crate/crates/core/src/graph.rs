//! Network models, connectivity, greedy coloring and the incidence /
//! Laplacian matrices of an undirected simple graph.
//!
//! Random models draw from `ChaCha8Rng` seeded with the caller's seed.
//! Each construction stage reads its own ChaCha stream so that changing one
//! stage never shifts the draws of another:
//!
//! | stream | use |
//! |--------|-----|
//! | 0 | node placement / pair sampling (Erdős–Rényi, geometric) |
//! | 1 | rewiring decisions (Watts–Strogatz), attachment draws (Barabási–Albert) |

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simple undirected graph on nodes `0..P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Self-loops and repeated
    /// edges are dropped; edges are normalized to `(i, j)` with `i < j` and
    /// sorted.
    pub fn from_edges(
        nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidInput("graph needs at least one node".into()));
        }
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= nodes || b >= nodes {
                return Err(Error::InvalidInput(format!(
                    "edge ({a},{b}) out of range for {nodes} nodes"
                )));
            }
            if a != b {
                list.push((a.min(b), a.max(b)));
            }
        }
        list.sort_unstable();
        list.dedup();
        let mut adjacency = vec![Vec::new(); nodes];
        for &(i, j) in &list {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        Ok(Self {
            nodes,
            edges: list,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, p: usize) -> &[usize] {
        &self.adjacency[p]
    }

    pub fn degree(&self, p: usize) -> usize {
        self.adjacency[p].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Position of edge `{i, j}` in [`Graph::edges`].
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i.min(j), i.max(j))).ok()
    }

    /// Relabels node `p` as `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.nodes {
            return Err(Error::Dimension("permutation length".into()));
        }
        Self::from_edges(
            self.nodes,
            self.edges.iter().map(|&(i, j)| (perm[i], perm[j])),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NetworkModel {
    /// Every pair is linked independently with probability `p`.
    ErdosRenyi { p: f64 },
    /// Ring lattice with `neighbors` links per node, each link rewired with
    /// probability `p`.
    WattsStrogatz { neighbors: usize, p: f64 },
    /// Preferential attachment, one link per arriving node.
    BarabasiAlbert,
    /// Uniform points in the unit square, linked when closer than `radius`.
    Geometric { radius: f64 },
    /// Grid as close to square as `P` allows.
    Lattice,
}

impl NetworkModel {
    /// The seven models of the benchmark network table, in order.
    pub fn benchmark_suite() -> [NetworkModel; 7] {
        [
            NetworkModel::ErdosRenyi { p: 0.25 },
            NetworkModel::ErdosRenyi { p: 0.75 },
            NetworkModel::WattsStrogatz {
                neighbors: 4,
                p: 0.6,
            },
            NetworkModel::WattsStrogatz {
                neighbors: 2,
                p: 0.8,
            },
            NetworkModel::BarabasiAlbert,
            NetworkModel::Geometric { radius: 0.75 },
            NetworkModel::Lattice,
        ]
    }

    pub fn name(&self) -> String {
        match self {
            NetworkModel::ErdosRenyi { p } => format!("erdos-renyi({p})"),
            NetworkModel::WattsStrogatz { neighbors, p } => {
                format!("watts-strogatz({neighbors},{p})")
            }
            NetworkModel::BarabasiAlbert => "barabasi-albert".into(),
            NetworkModel::Geometric { radius } => format!("geometric({radius})"),
            NetworkModel::Lattice => "lattice".into(),
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "probability {p} outside [0,1]"
        )))
    }
}

/// Generates a simple graph on `nodes` nodes. The result may be
/// disconnected; callers decide whether to retry.
pub fn generate_network(model: NetworkModel, nodes: usize, seed: u64) -> Result<Graph> {
    if nodes < 2 {
        return Err(Error::InvalidInput(
            "network needs at least two nodes".into(),
        ));
    }
    match model {
        NetworkModel::ErdosRenyi { p } => {
            check_probability(p)?;
            let mut rng = stream_rng(seed, 0);
            let mut edges = Vec::new();
            for i in 0..nodes {
                for j in i + 1..nodes {
                    if rng.gen::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
            Graph::from_edges(nodes, edges)
        }
        NetworkModel::WattsStrogatz { neighbors, p } => watts_strogatz(nodes, neighbors, p, seed),
        NetworkModel::BarabasiAlbert => {
            let mut rng = stream_rng(seed, 1);
            let mut degree = vec![0usize; nodes];
            let mut edges = Vec::with_capacity(nodes - 1);
            for t in 1..nodes {
                // weight deg + 1 lets the second node attach to the first
                let total: usize = degree[..t].iter().map(|d| d + 1).sum();
                let mut draw = rng.gen_range(0..total);
                let mut target = 0;
                for (q, d) in degree[..t].iter().enumerate() {
                    if draw < d + 1 {
                        target = q;
                        break;
                    }
                    draw -= d + 1;
                }
                edges.push((target, t));
                degree[target] += 1;
                degree[t] += 1;
            }
            Graph::from_edges(nodes, edges)
        }
        NetworkModel::Geometric { radius } => {
            if !(radius > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "radius {radius} must be positive"
                )));
            }
            let mut rng = stream_rng(seed, 0);
            let pts: Vec<(f64, f64)> = (0..nodes)
                .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
                .collect();
            let mut edges = Vec::new();
            for i in 0..nodes {
                for j in i + 1..nodes {
                    let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
                    if (dx * dx + dy * dy).sqrt() < radius {
                        edges.push((i, j));
                    }
                }
            }
            Graph::from_edges(nodes, edges)
        }
        NetworkModel::Lattice => {
            let (rows, cols) = lattice_shape(nodes);
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let p = r * cols + c;
                    if c + 1 < cols {
                        edges.push((p, p + 1));
                    }
                    if r + 1 < rows {
                        edges.push((p, p + cols));
                    }
                }
            }
            Graph::from_edges(nodes, edges)
        }
    }
}

/// `(rows, cols)` with `rows <= cols`, `rows * cols = nodes` and `rows` as
/// large as possible.
pub fn lattice_shape(nodes: usize) -> (usize, usize) {
    let mut rows = (nodes as f64).sqrt() as usize;
    while rows > 1 && !nodes.is_multiple_of(rows) {
        rows -= 1;
    }
    let rows = rows.max(1);
    (rows, nodes / rows)
}

fn watts_strogatz(nodes: usize, neighbors: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability(p)?;
    if neighbors == 0 || neighbors >= nodes {
        return Err(Error::InvalidInput(format!(
            "{neighbors} neighbours needs 0 < n < P = {nodes}"
        )));
    }
    if neighbors % 2 == 1 && nodes % 2 == 1 {
        return Err(Error::InvalidInput(format!(
            "odd ring degree {neighbors} needs an even node count"
        )));
    }
    let half = neighbors / 2;
    let mut adjacency = vec![std::collections::BTreeSet::new(); nodes];
    let mut ring = Vec::new();
    let mut link = |a: usize, b: usize, ring: &mut Vec<(usize, usize)>| {
        if a != b && adjacency[a].insert(b) {
            adjacency[b].insert(a);
            ring.push((a.min(b), a.max(b)));
        }
    };
    for i in 0..nodes {
        for k in 1..=half {
            link(i, (i + k) % nodes, &mut ring);
        }
        if neighbors % 2 == 1 && i < nodes / 2 {
            link(i, i + nodes / 2, &mut ring);
        }
    }
    let mut rng = stream_rng(seed, 1);
    for &(i, j) in &ring {
        if !(rng.gen::<f64>() < p) {
            continue;
        }
        let (keep, drop) = if rng.gen::<bool>() { (i, j) } else { (j, i) };
        if !adjacency[keep].contains(&drop) {
            continue;
        }
        let candidates: Vec<usize> = (0..nodes)
            .filter(|&w| w != keep && !adjacency[keep].contains(&w))
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let w = candidates[rng.gen_range(0..candidates.len())];
        adjacency[keep].remove(&drop);
        adjacency[drop].remove(&keep);
        adjacency[keep].insert(w);
        adjacency[w].insert(keep);
    }
    let edges = adjacency
        .iter()
        .enumerate()
        .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
        .collect::<Vec<_>>();
    Graph::from_edges(nodes, edges)
}

/// Breadth-first reachability from node 0.
pub fn is_connected(g: &Graph) -> bool {
    let mut seen = vec![false; g.node_count()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(p) = queue.pop_front() {
        for &q in g.neighbors(p) {
            if !seen[q] {
                seen[q] = true;
                count += 1;
                queue.push_back(q);
            }
        }
    }
    count == g.node_count()
}

/// Proper node coloring with classes in color order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl Coloring {
    /// Validates a color assignment against `g`.
    pub fn new(g: &Graph, colors: Vec<usize>) -> Result<Self> {
        if colors.len() != g.node_count() {
            return Err(Error::Dimension(format!(
                "{} colors for {} nodes",
                colors.len(),
                g.node_count()
            )));
        }
        if let Some(&(i, j)) = g.edges().iter().find(|&&(i, j)| colors[i] == colors[j]) {
            return Err(Error::InvalidInput(format!(
                "edge ({i},{j}) joins two nodes of color {}",
                colors[i]
            )));
        }
        let count = colors.iter().max().map_or(0, |c| c + 1);
        let mut classes = vec![Vec::new(); count];
        for (p, &c) in colors.iter().enumerate() {
            classes[c].push(p);
        }
        if classes.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInput(
                "color indices must be contiguous".into(),
            ));
        }
        Ok(Self { colors, classes })
    }

    pub fn color(&self, p: usize) -> usize {
        self.colors[p]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    /// Same colors, with the node order inside each class replaced.
    pub fn with_class_order(&self, classes: Vec<Vec<usize>>) -> Result<Self> {
        let same = classes.len() == self.classes.len()
            && classes.iter().zip(&self.classes).all(|(a, b)| {
                let (mut a, mut b) = (a.clone(), b.clone());
                a.sort_unstable();
                b.sort_unstable();
                a == b
            });
        if !same {
            return Err(Error::InvalidInput(
                "class reordering must keep class membership".into(),
            ));
        }
        Ok(Self {
            colors: self.colors.clone(),
            classes,
        })
    }
}

/// Greedy coloring in descending-degree order (ties by index): each node
/// takes the smallest color unused by its already-colored neighbours.
pub fn greedy_coloring(g: &Graph) -> Coloring {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
    let mut colors = vec![usize::MAX; n];
    let mut used = Vec::new();
    for &p in &order {
        used.clear();
        used.resize(g.degree(p) + 1, false);
        for &q in g.neighbors(p) {
            if colors[q] < used.len() {
                used[colors[q]] = true;
            }
        }
        colors[p] = used.iter().position(|&u| !u).expect("degree + 1 slots");
    }
    Coloring::new(g, colors).expect("greedy coloring is proper")
}

/// `P x E` node-arc incidence matrix: edge `(i, j)`, `i < j`, has `+1` in
/// row `i` and `-1` in row `j`. An edgeless graph yields one zero column.
pub fn incidence_matrix<T: Real>(g: &Graph) -> DenseMatrix<T> {
    let mut b = DenseMatrix::zeros(g.node_count(), g.edge_count().max(1));
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        b[(i, e)] = T::one();
        b[(j, e)] = -T::one();
    }
    b
}

/// Degree matrix minus adjacency.
pub fn laplacian<T: Real>(g: &Graph) -> DenseMatrix<T> {
    let n = g.node_count();
    let mut l = DenseMatrix::zeros(n, n);
    for p in 0..n {
        l[(p, p)] = T::from_usize_lossy(g.degree(p));
        for &q in g.neighbors(p) {
            l[(p, q)] = -T::one();
        }
    }
    l
}
