//! Tree augmentation instances: a rooted tree, a set of links, shadow closure,
//! twin links and their stems, and solution validation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v)
    }
}

/// A tree edge, identified by its lower endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TreeEdge {
    pub child: NodeId,
    pub parent: NodeId,
}

impl fmt::Display for TreeEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.child, self.parent)
    }
}

/// An undirected link, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    u: NodeId,
    v: NodeId,
}

impl Link {
    /// Canonicalizes the endpoint order. Panics on a self-loop.
    pub fn new(a: impl Into<NodeId>, b: impl Into<NodeId>) -> Link {
        Link::try_new(a.into(), b.into()).expect("link endpoints must differ")
    }

    pub fn try_new(a: NodeId, b: NodeId) -> Option<Link> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Link { u: a, v: b }),
            std::cmp::Ordering::Greater => Some(Link { u: b, v: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn u(&self) -> NodeId {
        self.u
    }

    pub fn v(&self) -> NodeId {
        self.v
    }

    pub fn endpoints(&self) -> [NodeId; 2] {
        [self.u, self.v]
    }

    pub fn has_endpoint(&self, x: NodeId) -> bool {
        self.u == x || self.v == x
    }

    pub fn other(&self, x: NodeId) -> Option<NodeId> {
        if self.u == x {
            Some(self.v)
        } else if self.v == x {
            Some(self.u)
        } else {
            None
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.u, self.v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    // Euler-tour entry/exit times: `a` is an ancestor of `d` iff tin[a] <= tin[d] && tout[d] <= tout[a].
    tin: Vec<usize>,
    tout: Vec<usize>,
}

impl RootedTree {
    /// Builds a rooted tree from an undirected edge list.
    pub fn from_edges(n: usize, root: NodeId, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::NotATree("no nodes".into()));
        }
        if root.index() >= n {
            return Err(Error::NotATree(format!("root {root} out of range")));
        }
        if edges.len() != n - 1 {
            return Err(Error::NotATree(format!(
                "{} edges for {} nodes (expected {})",
                edges.len(),
                n,
                n - 1
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a.index() >= n || b.index() >= n {
                return Err(Error::NotATree(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::NotATree(format!("self-loop at {a}")));
            }
            adj[a.index()].push(b);
            adj[b.index()].push(a);
        }
        for list in &mut adj {
            list.sort();
        }

        let mut parent = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut seen = vec![false; n];
        let mut children = vec![Vec::new(); n];
        let mut queue = VecDeque::from([root]);
        seen[root.index()] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v.index()] {
                if Some(w) == parent[v.index()] {
                    continue;
                }
                if seen[w.index()] {
                    return Err(Error::NotATree(format!("cycle through edge ({v},{w})")));
                }
                seen[w.index()] = true;
                parent[w.index()] = Some(v);
                depth[w.index()] = depth[v.index()] + 1;
                children[v.index()].push(w);
                queue.push_back(w);
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::NotATree(format!("node {v} is disconnected")));
        }

        let mut tree = RootedTree {
            root,
            parent,
            children,
            depth,
            tin: vec![0; n],
            tout: vec![0; n],
        };
        tree.number();
        Ok(tree)
    }

    /// Builds a tree from a parent array (`None` exactly at the root).
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        let roots: Vec<usize> = (0..parents.len()).filter(|&i| parents[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::NotATree(format!("{} roots", roots.len())));
        }
        let edges: Vec<(NodeId, NodeId)> = parents
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (NodeId(c), NodeId(p))))
            .collect();
        Self::from_edges(parents.len(), NodeId(roots[0]), &edges)
    }

    fn number(&mut self) {
        let mut clock = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((v, i)) = stack.pop() {
            if i == 0 {
                self.tin[v.index()] = clock;
                clock += 1;
            }
            if let Some(&c) = self.children[v.index()].get(i) {
                stack.push((v, i + 1));
                stack.push((c, 0));
            } else {
                self.tout[v.index()] = clock;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).map(NodeId)
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v.index()]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.index()]
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v.index()]
    }

    /// Leaves are the non-root nodes without children.
    pub fn is_leaf(&self, v: NodeId) -> bool {
        v != self.root && self.children[v.index()].is_empty()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes().filter(|&v| self.is_leaf(v)).collect()
    }

    /// All tree edges, ordered by child id.
    pub fn edges(&self) -> Vec<TreeEdge> {
        self.nodes()
            .filter_map(|c| self.parent(c).map(|p| TreeEdge { child: c, parent: p }))
            .collect()
    }

    /// True if `a` lies on the path from the root to `d` (inclusive).
    pub fn is_ancestor(&self, a: NodeId, d: NodeId) -> bool {
        self.tin[a.index()] <= self.tin[d.index()] && self.tout[d.index()] <= self.tout[a.index()]
    }

    pub fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while self.depth(a) > self.depth(b) {
            a = self.parent(a).unwrap();
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent(b).unwrap();
        }
        while a != b {
            a = self.parent(a).unwrap();
            b = self.parent(b).unwrap();
        }
        a
    }

    /// Nodes of the path from `u` to `v`, in order.
    pub fn path_nodes(&self, u: NodeId, v: NodeId) -> Vec<NodeId> {
        let z = self.lca(u, v);
        let mut up = vec![u];
        let mut x = u;
        while x != z {
            x = self.parent(x).unwrap();
            up.push(x);
        }
        let mut down = Vec::new();
        let mut y = v;
        while y != z {
            down.push(y);
            y = self.parent(y).unwrap();
        }
        up.extend(down.into_iter().rev());
        up
    }

    /// Tree edges of the path between `u` and `v`, ordered by child id.
    pub fn path_edges(&self, u: NodeId, v: NodeId) -> Vec<TreeEdge> {
        let z = self.lca(u, v);
        let mut out = Vec::new();
        for mut x in [u, v] {
            while x != z {
                let p = self.parent(x).unwrap();
                out.push(TreeEdge { child: x, parent: p });
                x = p;
            }
        }
        out.sort();
        out
    }

    /// True if the link covers the edge above `child`.
    pub fn covers(&self, link: Link, child: NodeId) -> bool {
        self.is_ancestor(child, link.u()) != self.is_ancestor(child, link.v())
    }
}

/// A TAP instance. Every link maps to the original link it was derived from;
/// originals map to themselves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapInstance {
    tree: RootedTree,
    links: BTreeMap<Link, Link>,
    closed: bool,
    twins: BTreeMap<Link, NodeId>,
    leaves: Vec<NodeId>,
}

impl TapInstance {
    /// Builds an un-closed instance. Repeated links are merged.
    pub fn new(tree: RootedTree, links: impl IntoIterator<Item = Link>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for l in links {
            if l.v().index() >= tree.len() {
                return Err(Error::UnknownLink(l));
            }
            map.insert(l, l);
        }
        Ok(Self::assemble(tree, map, false))
    }

    fn assemble(tree: RootedTree, links: BTreeMap<Link, Link>, closed: bool) -> Self {
        let leaves = tree.leaves();
        let mut inst = TapInstance {
            tree,
            links,
            closed,
            twins: BTreeMap::new(),
            leaves,
        };
        inst.twins = inst.compute_twins_and_stems().1;
        inst
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn node_count(&self) -> usize {
        self.tree.len()
    }

    pub fn root(&self) -> NodeId {
        self.tree.root()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.links.keys().copied()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn contains(&self, l: Link) -> bool {
        self.links.contains_key(&l)
    }

    pub fn origin(&self, l: Link) -> Option<Link> {
        self.links.get(&l).copied()
    }

    pub fn original_links(&self) -> impl Iterator<Item = Link> + '_ {
        self.links.iter().filter(|(l, o)| l == o).map(|(l, _)| *l)
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.tree.is_leaf(v)
    }

    /// Twin links (the set W) with their stems.
    pub fn twins(&self) -> &BTreeMap<Link, NodeId> {
        &self.twins
    }

    pub fn is_twin(&self, l: Link) -> bool {
        self.twins.contains_key(&l)
    }

    pub fn stems(&self) -> BTreeSet<NodeId> {
        self.twins.values().copied().collect()
    }

    pub fn is_stem(&self, v: NodeId) -> bool {
        self.twins.values().any(|&s| s == v)
    }

    /// Nodes that are neither leaves nor stems (the set R).
    pub fn regular_nodes(&self) -> Vec<NodeId> {
        let stems = self.stems();
        self.tree
            .nodes()
            .filter(|&v| !self.is_leaf(v) && !stems.contains(&v))
            .collect()
    }

    pub fn path_edges(&self, u: NodeId, v: NodeId) -> Vec<TreeEdge> {
        self.tree.path_edges(u, v)
    }

    /// Links incident to `v`.
    pub fn incident(&self, v: NodeId) -> impl Iterator<Item = Link> + '_ {
        self.links().filter(move |l| l.has_endpoint(v))
    }

    /// Adds every shadow of every link. Each added shadow takes its origin
    /// from the smallest original link whose path contains it.
    pub fn shadow_completion(&self) -> TapInstance {
        let mut links = self.links.clone();
        let mut order: Vec<(Link, Link)> = self.links.iter().map(|(l, o)| (*l, *o)).collect();
        // originals first so that shadows inherit the smallest original
        order.sort_by_key(|(l, o)| (l != o, *l));
        for (l, origin) in order {
            let path = self.tree.path_nodes(l.u(), l.v());
            for i in 0..path.len() {
                for j in i + 1..path.len() {
                    let s = Link::new(path[i], path[j]);
                    links.entry(s).or_insert(origin);
                }
            }
        }
        Self::assemble(self.tree.clone(), links, true)
    }

    /// Leaf-to-leaf links `ab` whose contraction yields a new leaf: the
    /// path from `a` to `b` has exactly one tree edge leaving it, and that
    /// edge is the parent edge of the lca (the stem). The two sides below the
    /// stem may be chains of degree-2 nodes.
    pub fn compute_twins_and_stems(&self) -> (BTreeSet<Link>, BTreeMap<Link, NodeId>) {
        let mut stem_of = BTreeMap::new();
        for l in self.links() {
            let (a, b) = (l.u(), l.v());
            if !self.tree.is_leaf(a) || !self.tree.is_leaf(b) {
                continue;
            }
            let s = self.tree.lca(a, b);
            if self.tree.parent(s).is_none() {
                continue;
            }
            let path: BTreeSet<NodeId> = self.tree.path_nodes(a, b).into_iter().collect();
            let hanging = path
                .iter()
                .map(|&v| self.tree.children(v).iter().filter(|c| !path.contains(c)).count())
                .sum::<usize>();
            if hanging == 0 {
                stem_of.insert(l, s);
            }
        }
        (stem_of.keys().copied().collect(), stem_of)
    }

    /// Tree edges not covered by any link.
    pub fn uncovered_edges(&self) -> Vec<TreeEdge> {
        let covered = self.coverage(self.links());
        self.tree
            .edges()
            .into_iter()
            .filter(|e| covered[e.child.index()] == 0)
            .collect()
    }

    pub fn is_feasible(&self) -> bool {
        self.uncovered_edges().is_empty()
    }

    pub fn check_feasible(&self) -> Result<()> {
        let uncovered = self.uncovered_edges();
        if uncovered.is_empty() {
            Ok(())
        } else {
            Err(Error::Infeasible { uncovered })
        }
    }

    // Per-child count of links covering the edge above it.
    fn coverage(&self, links: impl IntoIterator<Item = Link>) -> Vec<usize> {
        let mut count = vec![0usize; self.tree.len()];
        for l in links {
            for e in self.tree.path_edges(l.u(), l.v()) {
                count[e.child.index()] += 1;
            }
        }
        count
    }

    /// True iff `solution` covers every tree edge, i.e. tree plus links is
    /// 2-edge-connected.
    pub fn validate_solution<'a>(&self, solution: impl IntoIterator<Item = &'a Link>) -> Result<bool> {
        let links: Vec<Link> = solution.into_iter().copied().collect();
        if let Some(&l) = links.iter().find(|l| !self.contains(**l)) {
            return Err(Error::UnknownLink(l));
        }
        let covered = self.coverage(links);
        Ok(self.tree.edges().iter().all(|e| covered[e.child.index()] > 0))
    }

    /// Replaces each shadow by the original link it came from.
    pub fn map_to_original<'a>(&self, solution: impl IntoIterator<Item = &'a Link>) -> BTreeSet<Link> {
        solution
            .into_iter()
            .map(|l| self.origin(*l).unwrap_or(*l))
            .collect()
    }

    /// Serializes in the instance file format, links sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("tap 1\n");
        out.push_str(&format!("nodes {}\n", self.node_count()));
        out.push_str(&format!("root {}\n", self.root()));
        let mut edges: Vec<(NodeId, NodeId)> = self
            .tree
            .edges()
            .iter()
            .map(|e| (e.child.min(e.parent), e.child.max(e.parent)))
            .collect();
        edges.sort();
        for (a, b) in edges {
            out.push_str(&format!("edge {a} {b}\n"));
        }
        for l in self.links() {
            out.push_str(&format!("link {} {}\n", l.u(), l.v()));
        }
        out
    }

    /// Same as [`to_text`](Self::to_text) but only the original links.
    pub fn to_text_originals(&self) -> String {
        let originals: Vec<Link> = self.original_links().collect();
        TapInstance::new(self.tree.clone(), originals)
            .expect("originals are distinct")
            .to_text()
    }
}

impl FromStr for TapInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_instance(s)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the line-oriented instance format. The result is not shadow-closed.
pub fn parse_instance(text: &str) -> Result<TapInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut header = |key: &str| -> Result<(usize, usize)> {
        let (no, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("missing `{key}` line")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(parse_err(no, format!("expected `{key} <int>`, got `{line}`")));
        }
        let value = parts
            .next()
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| parse_err(no, format!("expected `{key} <int>`, got `{line}`")))?;
        if parts.next().is_some() {
            return Err(parse_err(no, format!("trailing tokens in `{line}`")));
        }
        Ok((no, value))
    };

    let (no, version) = header("tap")?;
    if version != 1 {
        return Err(parse_err(no, format!("unsupported version {version}")));
    }
    let (_, n) = header("nodes")?;
    let (no, root) = header("root")?;
    if root >= n {
        return Err(parse_err(no, format!("root {root} out of range")));
    }

    let mut edges = Vec::new();
    let mut edge_set = BTreeSet::new();
    let mut links = Vec::new();
    for (no, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(no, format!("malformed line `{line}`")));
        }
        let parse_id = |t: &str| -> Result<NodeId> {
            let v: usize = t
                .parse()
                .map_err(|_| parse_err(no, format!("bad node id `{t}`")))?;
            if v >= n {
                return Err(parse_err(no, format!("node {v} out of range")));
            }
            Ok(NodeId(v))
        };
        let a = parse_id(parts[1])?;
        let b = parse_id(parts[2])?;
        let pair = Link::try_new(a, b).ok_or_else(|| parse_err(no, format!("self-loop at {a}")))?;
        match parts[0] {
            "edge" => {
                if !edge_set.insert(pair) {
                    return Err(parse_err(no, format!("duplicate edge {pair}")));
                }
                edges.push((a, b));
            }
            "link" => links.push(pair),
            other => return Err(parse_err(no, format!("unknown record `{other}`"))),
        }
    }
    let tree = RootedTree::from_edges(n, NodeId(root), &edges)?;
    TapInstance::new(tree, links)
}
