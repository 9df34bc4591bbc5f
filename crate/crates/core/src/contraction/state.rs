use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::{Link, NodeId, TapInstance};
use crate::ratio::{half, int, Rational};

use super::{ContractionKind, ContractionRecord, DangerCertificate, SubtreeSummary, TokenAmount};

/// A link of T/I: an instance link whose endpoints lie in different
/// super-nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LiveLink {
    pub link: Link,
    pub a: NodeId,
    pub b: NodeId,
}

impl LiveLink {
    pub fn other(&self, s: NodeId) -> NodeId {
        if self.a == s {
            self.b
        } else {
            self.a
        }
    }
}

/// A matching on leaves of T/I. Each pair stores the super-nodes it joins
/// and the instance link realizing it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LeafMatching {
    pairs: Vec<(NodeId, NodeId, Link)>,
}

impl LeafMatching {
    pub fn pairs(&self) -> &[(NodeId, NodeId, Link)] {
        &self.pairs
    }

    pub fn partner(&self, s: NodeId) -> Option<NodeId> {
        self.pairs.iter().find_map(|&(x, y, _)| {
            if x == s {
                Some(y)
            } else if y == s {
                Some(x)
            } else {
                None
            }
        })
    }

    pub fn is_matched(&self, s: NodeId) -> bool {
        self.partner(s).is_some()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.pairs.iter().map(|p| p.2)
    }
}

// The contracted tree as seen right now; rebuilt after every contraction.
#[derive(Clone, Debug, Default)]
struct View {
    nodes: Vec<NodeId>,
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    live: Vec<LiveLink>,
    incident: Vec<Vec<usize>>,
}

/// The contracted tree T/I together with the matching, the partial
/// solution and the per-node token categories.
#[derive(Clone, Debug)]
pub struct ContractionState<'a> {
    inst: &'a TapInstance,
    rho: Rational,
    membership: Vec<NodeId>,
    members: BTreeMap<NodeId, Vec<NodeId>>,
    contracted: Vec<bool>,
    matching: BTreeSet<Link>,
    partial: Vec<Link>,
    steps: usize,
    view: View,
}

impl<'a> ContractionState<'a> {
    /// Starts from the uncontracted tree with matching `matching` (the
    /// leaf-to-leaf part of an exact leaf cover).
    pub fn new(inst: &'a TapInstance, rho: Rational, matching: impl IntoIterator<Item = Link>) -> Self {
        let n = inst.node_count();
        let mut st = ContractionState {
            inst,
            rho,
            membership: (0..n).map(NodeId).collect(),
            members: (0..n).map(|v| (NodeId(v), vec![NodeId(v)])).collect(),
            contracted: vec![false; n],
            matching: matching.into_iter().collect(),
            partial: Vec::new(),
            steps: 0,
            view: View::default(),
        };
        st.rebuild();
        st
    }

    fn rebuild(&mut self) {
        let n = self.inst.node_count();
        let tree = self.inst.tree();
        let mut v = View {
            nodes: self.members.keys().copied().collect(),
            root: self.membership[tree.root().index()],
            parent: vec![None; n],
            children: vec![Vec::new(); n],
            depth: vec![0; n],
            tin: vec![0; n],
            tout: vec![0; n],
            live: Vec::new(),
            incident: vec![Vec::new(); n],
        };
        for (&s, mem) in &self.members {
            let top = *mem.iter().min_by_key(|&&u| (tree.depth(u), u)).unwrap();
            if let Some(p) = tree.parent(top) {
                let ps = self.membership[p.index()];
                v.parent[s.index()] = Some(ps);
                v.children[ps.index()].push(s);
            }
        }
        for c in v.children.iter_mut() {
            c.sort();
        }
        // iterative DFS for depth and Euler times
        let mut clock = 0;
        let mut stack = vec![(v.root, false)];
        while let Some((s, done)) = stack.pop() {
            if done {
                v.tout[s.index()] = clock;
                clock += 1;
                continue;
            }
            v.tin[s.index()] = clock;
            clock += 1;
            stack.push((s, true));
            for &c in v.children[s.index()].iter().rev() {
                v.depth[c.index()] = v.depth[s.index()] + 1;
                stack.push((c, false));
            }
        }
        for l in self.inst.links() {
            let a = self.membership[l.u().index()];
            let b = self.membership[l.v().index()];
            if a != b {
                let idx = v.live.len();
                v.live.push(LiveLink { link: l, a, b });
                v.incident[a.index()].push(idx);
                v.incident[b.index()].push(idx);
            }
        }
        self.view = v;
    }

    pub fn instance(&self) -> &'a TapInstance {
        self.inst
    }

    pub fn rho(&self) -> &Rational {
        &self.rho
    }

    /// Super-node ids; each is the smallest original node it contains.
    pub fn super_nodes(&self) -> &[NodeId] {
        &self.view.nodes
    }

    pub fn super_count(&self) -> usize {
        self.view.nodes.len()
    }

    pub fn super_of(&self, v: NodeId) -> NodeId {
        self.membership[v.index()]
    }

    pub fn members(&self, s: NodeId) -> &[NodeId] {
        &self.members[&s]
    }

    pub fn root(&self) -> NodeId {
        self.view.root
    }

    pub fn parent(&self, s: NodeId) -> Option<NodeId> {
        self.view.parent[s.index()]
    }

    pub fn children(&self, s: NodeId) -> &[NodeId] {
        &self.view.children[s.index()]
    }

    pub fn depth(&self, s: NodeId) -> usize {
        self.view.depth[s.index()]
    }

    pub fn is_leaf(&self, s: NodeId) -> bool {
        s != self.view.root && self.view.children[s.index()].is_empty()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.view.nodes.iter().copied().filter(|&s| self.is_leaf(s)).collect()
    }

    /// Created by a contraction (as opposed to an original node of T).
    pub fn is_contracted(&self, s: NodeId) -> bool {
        self.contracted[s.index()]
    }

    /// Contracted nodes and the root.
    pub fn is_compound(&self, s: NodeId) -> bool {
        self.contracted[s.index()] || s == self.view.root
    }

    pub fn is_ancestor(&self, a: NodeId, d: NodeId) -> bool {
        let v = &self.view;
        v.tin[a.index()] <= v.tin[d.index()] && v.tout[d.index()] <= v.tout[a.index()]
    }

    pub fn live_links(&self) -> &[LiveLink] {
        &self.view.live
    }

    pub fn live_incident(&self, s: NodeId) -> impl Iterator<Item = &LiveLink> + '_ {
        self.view.incident[s.index()].iter().map(|&i| &self.view.live[i])
    }

    /// The current matching M as instance links between original leaves.
    pub fn matching_links(&self) -> &BTreeSet<Link> {
        &self.matching
    }

    pub fn matching(&self) -> LeafMatching {
        LeafMatching {
            pairs: self
                .matching
                .iter()
                .map(|&l| (self.super_of(l.u()), self.super_of(l.v()), l))
                .collect(),
        }
    }

    /// Links added so far, in instance (closed) ids.
    pub fn partial_solution(&self) -> &[Link] {
        &self.partial
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Super-nodes of the subtree rooted at `s`, in preorder.
    pub fn subtree(&self, s: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![s];
        while let Some(t) = stack.pop() {
            out.push(t);
            stack.extend(self.children(t).iter().rev());
        }
        out
    }

    /// Super-nodes on the T/I path between `x` and `y`.
    pub fn path(&self, mut x: NodeId, mut y: NodeId) -> Vec<NodeId> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        while x != y {
            if self.depth(x) >= self.depth(y) {
                left.push(x);
                x = self.parent(x).expect("non-root");
            } else {
                right.push(y);
                y = self.parent(y).expect("non-root");
            }
        }
        left.push(x);
        left.extend(right.into_iter().rev());
        left
    }

    /// The live link from `a` whose other end is closest to the root,
    /// smallest link on ties.
    pub fn up_link(&self, a: NodeId) -> Result<Link> {
        self.live_incident(a)
            .min_by_key(|ll| (self.depth(ll.other(a)), ll.link))
            .map(|ll| ll.link)
            .ok_or_else(|| Error::Precondition(format!("super-node {a} has no live link")))
    }

    pub fn up_node(&self, a: NodeId) -> Result<NodeId> {
        let l = self.up_link(a)?;
        Ok(self.other_end(l, a))
    }

    fn other_end(&self, l: Link, s: NodeId) -> NodeId {
        let a = self.super_of(l.u());
        if a == s {
            self.super_of(l.v())
        } else {
            a
        }
    }

    /// Tokens owned by a single super-node under the given matching.
    fn node_tokens(&self, s: NodeId) -> TokenAmount {
        if self.contracted[s.index()] {
            return TokenAmount::constant(int(1));
        }
        let inst = self.inst;
        if s == inst.root() {
            return TokenAmount {
                constant: int(1),
                half_degree: vec![s],
            };
        }
        if inst.is_leaf(s) {
            if self.matching.iter().any(|l| l.has_endpoint(s)) {
                TokenAmount::zero()
            } else {
                TokenAmount::constant(&self.rho - half())
            }
        } else if inst.is_stem(s) {
            TokenAmount::zero()
        } else {
            TokenAmount {
                constant: int(0),
                half_degree: vec![s],
            }
        }
    }

    fn matching_link_tokens(&self, l: Link) -> Rational {
        if self.inst.is_twin(l) {
            &self.rho + half()
        } else {
            self.rho.clone()
        }
    }

    /// Tokens owned by a set of super-nodes: the nodes' own tokens plus those
    /// of matching links with both ends inside.
    pub fn tokens_of(&self, nodes: &[NodeId]) -> TokenAmount {
        let set: BTreeSet<NodeId> = nodes.iter().copied().collect();
        let mut total = TokenAmount::zero();
        for &s in nodes {
            total.add(&self.node_tokens(s));
        }
        for &l in &self.matching {
            if set.contains(&self.super_of(l.u())) && set.contains(&self.super_of(l.v())) {
                total.constant += self.matching_link_tokens(l);
            }
        }
        total
    }

    /// Semi-closure test for the subtree rooted at `s` with respect to
    /// `matching`: no pair is split and no unmatched leaf inside has a live
    /// link leaving. The summary is filled in either way.
    pub fn is_semi_closed(&self, s: NodeId, matching: &LeafMatching) -> (bool, SubtreeSummary) {
        let nodes = self.subtree(s);
        let inside: BTreeSet<NodeId> = nodes.iter().copied().collect();
        let mut compatible = true;
        let mut m_prime = Vec::new();
        for &(x, y, l) in matching.pairs() {
            match (inside.contains(&x), inside.contains(&y)) {
                (true, true) => m_prime.push(l),
                (false, false) => {}
                _ => compatible = false,
            }
        }
        let l_prime: Vec<NodeId> = nodes.iter().copied().filter(|&t| self.is_leaf(t)).collect();
        let u_prime: Vec<NodeId> = l_prime.iter().copied().filter(|&t| !matching.is_matched(t)).collect();
        let closed = u_prime
            .iter()
            .all(|&u| self.live_incident(u).all(|ll| inside.contains(&ll.other(u))));
        let summary = self.summarize(s, nodes, m_prime, l_prime, u_prime);
        (compatible && closed, summary)
    }

    fn summarize(
        &self,
        root: NodeId,
        mut nodes: Vec<NodeId>,
        mut m_prime: Vec<Link>,
        mut l_prime: Vec<NodeId>,
        mut u_prime: Vec<NodeId>,
    ) -> SubtreeSummary {
        nodes.sort();
        m_prime.sort();
        l_prime.sort();
        u_prime.sort();
        let u_prime_0 = u_prime.iter().copied().filter(|&u| !self.is_contracted(u)).collect();
        let s_prime = nodes
            .iter()
            .copied()
            .filter(|&t| !self.is_contracted(t) && self.inst.is_stem(t))
            .collect();
        let r_prime: Vec<NodeId> = nodes
            .iter()
            .copied()
            .filter(|&t| !self.is_contracted(t) && !self.inst.is_leaf(t) && !self.inst.is_stem(t))
            .collect();
        let r_prime_live = r_prime_nodes_live(self, &r_prime);
        let c_prime = nodes
            .iter()
            .copied()
            .filter(|&t| self.is_compound(t) && !self.is_leaf(t))
            .collect();
        SubtreeSummary {
            root,
            nodes,
            m_prime,
            u_prime,
            u_prime_0,
            l_prime,
            s_prime,
            r_prime,
            c_prime,
            r_prime_live,
            sigma: None,
        }
    }

    /// Semi-closed subtrees none of whose proper subtrees is semi-closed.
    /// They are pairwise disjoint; returned in preorder of their roots.
    pub fn minimally_semi_closed(&self, matching: &LeafMatching) -> Vec<SubtreeSummary> {
        let mut out = Vec::new();
        // post-order: a node is minimal iff semi-closed and no descendant is
        let order = self.subtree(self.root());
        let mut has_sc_below = vec![false; self.inst.node_count()];
        let mut results: BTreeMap<NodeId, SubtreeSummary> = BTreeMap::new();
        for &s in order.iter().rev() {
            let below = self.children(s).iter().any(|c| has_sc_below[c.index()]);
            let (sc, summary) = self.is_semi_closed(s, matching);
            if sc && !below {
                results.insert(s, summary);
            }
            has_sc_below[s.index()] = below || sc;
        }
        for s in order {
            if let Some(summary) = results.remove(&s) {
                out.push(summary);
            }
        }
        out
    }

    /// Whether contracting the T/I cycle of a link between `x` and `y`
    /// would turn the merged node into a leaf: exactly one T/I edge leaves
    /// the path, and the path does not contain the root.
    pub fn creates_leaf(&self, x: NodeId, y: NodeId) -> bool {
        let path: BTreeSet<NodeId> = self.path(x, y).into_iter().collect();
        if path.contains(&self.root()) {
            return false;
        }
        let mut crossing = 0;
        for &s in &path {
            if let Some(p) = self.parent(s) {
                if !path.contains(&p) {
                    crossing += 1;
                }
            }
            crossing += self.children(s).iter().filter(|c| !path.contains(c)).count();
        }
        crossing == 1
    }

    fn live_between(&self, x: NodeId, y: NodeId) -> Option<Link> {
        self.live_incident(x)
            .filter(|ll| ll.other(x) == y)
            .map(|ll| ll.link)
            .min()
    }

    fn is_open(&self, s: NodeId, inside: &BTreeSet<NodeId>) -> bool {
        self.live_incident(s).any(|ll| !inside.contains(&ll.other(s)))
    }

    /// Dangerous-tree test for a tree that is semi-closed w.r.t. M: one
    /// compound unmatched leaf `a`, one matched pair, no stems, no non-leaf
    /// compound nodes, and an ordering `b, b'` with a live link `ab'` whose
    /// contraction creates no leaf while `b` has a link leaving the tree.
    pub fn is_dangerous(&self, summary: &SubtreeSummary) -> Option<DangerCertificate> {
        let matching = self.matching();
        if !(summary.c_prime.is_empty()
            && summary.s_prime.is_empty()
            && summary.u_prime_0.is_empty()
            && summary.m_prime.len() == 1
            && summary.l_prime.len() == 3
            && summary.u_prime.len() == 1)
        {
            return None;
        }
        let a = summary.u_prime[0];
        let pair = summary.m_prime[0];
        let (p, q) = (self.super_of(pair.u()), self.super_of(pair.v()));
        debug_assert_eq!(matching.partner(p), Some(q));
        let inside: BTreeSet<NodeId> = summary.nodes.iter().copied().collect();
        let valid = |b: NodeId, b2: NodeId| -> Option<Link> {
            let link = self.live_between(a, b2)?;
            (!self.creates_leaf(a, b2) && self.is_open(b, &inside)).then_some(link)
        };
        let cert = |b: NodeId, b_prime: NodeId, link: Link| DangerCertificate {
            root: summary.root,
            a,
            b,
            b_prime,
            link,
        };
        match (valid(p, q), valid(q, p)) {
            (None, None) => None,
            (Some(l), None) => Some(cert(p, q, l)),
            (None, Some(l)) => Some(cert(q, p, l)),
            (Some(lp), Some(lq)) => {
                // both orderings work: b is the one whose up-node is higher
                let up_p = self.up_node(p).ok()?;
                let up_q = self.up_node(q).ok()?;
                if up_p != up_q && self.is_ancestor(up_q, up_p) {
                    Some(cert(q, p, lq))
                } else {
                    Some(cert(p, q, lp))
                }
            }
        }
    }

    /// Picks the tree with the deepest root, smallest id on ties.
    fn deepest(&self, trees: impl IntoIterator<Item = SubtreeSummary>) -> Option<SubtreeSummary> {
        trees
            .into_iter()
            .min_by_key(|t| (std::cmp::Reverse(self.depth(t.root)), t.root))
    }

    /// Cover of a minimally semi-closed tree: its matched pairs plus the
    /// up-links of its unmatched leaves.
    fn tree_cover(&self, summary: &SubtreeSummary) -> Result<Vec<Link>> {
        let mut links = summary.m_prime.clone();
        for &u in &summary.u_prime {
            links.push(self.up_link(u)?);
        }
        links.sort();
        links.dedup();
        Ok(links)
    }

    /// A non-dangerous minimally semi-closed tree w.r.t. M with its cover,
    /// if one exists.
    pub fn pick_semi_closed(&self) -> Result<Option<(SubtreeSummary, Vec<Link>)>> {
        let matching = self.matching();
        let candidates = self
            .minimally_semi_closed(&matching)
            .into_iter()
            .filter(|t| self.is_dangerous(t).is_none());
        match self.deepest(candidates) {
            Some(t) => {
                let links = self.tree_cover(&t)?;
                Ok(Some((t, links)))
            }
            None => Ok(None),
        }
    }

    /// Used when every minimally semi-closed tree is dangerous: rewrites the
    /// matching inside each of them (`bb'` becomes `ab'`), takes a minimally
    /// semi-closed tree under the rewritten matching and covers it.
    ///
    /// Returns the tree (summarized w.r.t. M), its cover and the rewrites.
    pub fn find_tree(&self) -> Result<(SubtreeSummary, Vec<Link>, Vec<DangerCertificate>)> {
        let step = self.steps;
        let matching = self.matching();
        let mut certs = Vec::new();
        for t in self.minimally_semi_closed(&matching) {
            match self.is_dangerous(&t) {
                Some(c) => certs.push(c),
                None => {
                    return Err(Error::Precondition(format!(
                        "minimally semi-closed tree at {} is not dangerous",
                        t.root
                    )))
                }
            }
        }
        if certs.is_empty() {
            return Err(Error::Precondition("no minimally semi-closed tree".into()));
        }
        let mut rewritten = matching.clone();
        for c in &certs {
            let idx = rewritten
                .pairs
                .iter()
                .position(|&(x, y, _)| (x == c.b && y == c.b_prime) || (x == c.b_prime && y == c.b))
                .expect("dangerous pair is matched");
            rewritten.pairs[idx] = (c.a, c.b_prime, c.link);
        }
        let chosen = self
            .deepest(self.minimally_semi_closed(&rewritten))
            .ok_or_else(|| invariant(step, "no minimally semi-closed tree after rewrite"))?;
        let mut links = chosen.m_prime.clone();
        for &u in &chosen.u_prime {
            links.push(self.up_link(u)?);
        }
        links.sort();
        links.dedup();

        let (semi_closed, summary) = self.is_semi_closed(chosen.root, &matching);
        if !semi_closed {
            return Err(invariant(
                step,
                format!("tree at {} is not semi-closed w.r.t. M", chosen.root),
            ));
        }
        if self.is_dangerous(&summary).is_some() {
            return Err(invariant(step, format!("tree at {} is still dangerous", chosen.root)));
        }
        if links.len() != summary.m_prime.len() + summary.u_prime.len() {
            return Err(invariant(
                step,
                format!(
                    "cover has {} links, expected |M'|+|U'| = {}",
                    links.len(),
                    summary.m_prime.len() + summary.u_prime.len()
                ),
            ));
        }
        Ok((summary, links, certs))
    }

    /// Live links joining two unmatched leaves, in link order.
    pub fn greedy_candidates(&self) -> Vec<LiveLink> {
        let matching = self.matching();
        self.view
            .live
            .iter()
            .copied()
            .filter(|ll| {
                self.is_leaf(ll.a)
                    && self.is_leaf(ll.b)
                    && !matching.is_matched(ll.a)
                    && !matching.is_matched(ll.b)
            })
            .collect()
    }

    /// Contracts greedy links until none is left.
    pub fn greedy_contract_exhaust(&mut self) -> Result<Vec<ContractionRecord>> {
        let mut records = Vec::new();
        while let Some(ll) = self.greedy_candidates().first().copied() {
            let nodes = self.path(ll.a, ll.b);
            records.push(self.contract(nodes, vec![ll.link], ContractionKind::Greedy, None, Vec::new())?);
        }
        Ok(records)
    }

    /// Contracts a rooted subtree with the given cover.
    pub fn contract_subtree(
        &mut self,
        kind: ContractionKind,
        summary: SubtreeSummary,
        links: Vec<Link>,
        rewritten: Vec<DangerCertificate>,
    ) -> Result<ContractionRecord> {
        let nodes = summary.nodes.clone();
        self.contract(nodes, links, kind, Some(summary), rewritten)
    }

    fn contract(
        &mut self,
        nodes: Vec<NodeId>,
        links: Vec<Link>,
        kind: ContractionKind,
        summary: Option<SubtreeSummary>,
        rewritten: Vec<DangerCertificate>,
    ) -> Result<ContractionRecord> {
        let step = self.steps;
        let set: BTreeSet<NodeId> = nodes.iter().copied().collect();
        if set.len() < 2 {
            return Err(invariant(step, "contraction of fewer than two super-nodes"));
        }
        // T/I edges inside the set, by lower endpoint
        let internal: BTreeSet<NodeId> = set
            .iter()
            .copied()
            .filter(|&s| self.parent(s).is_some_and(|p| set.contains(&p)))
            .collect();
        if internal.len() != set.len() - 1 {
            return Err(invariant(step, "contracted node set is not connected"));
        }
        let mut covered = BTreeSet::new();
        for &l in &links {
            if !self.inst.contains(l) {
                return Err(Error::UnknownLink(l));
            }
            let (x, y) = (self.super_of(l.u()), self.super_of(l.v()));
            if !set.contains(&x) || !set.contains(&y) {
                return Err(invariant(step, format!("link {l} leaves the contracted tree")));
            }
            let path = self.path(x, y);
            for w in path.windows(2) {
                let lower = if self.parent(w[0]) == Some(w[1]) { w[0] } else { w[1] };
                covered.insert(lower);
            }
        }
        if covered != internal {
            let missing: Vec<String> = internal.difference(&covered).map(|s| s.to_string()).collect();
            return Err(invariant(
                step,
                format!("cover misses the edges above {}", missing.join(", ")),
            ));
        }
        for &l in &self.matching {
            let inside = set.contains(&self.super_of(l.u())) as u8 + set.contains(&self.super_of(l.v())) as u8;
            if inside == 1 {
                return Err(invariant(step, format!("matching link {l} is split")));
            }
        }

        let tokens = self.tokens_of(&nodes);
        let inside_matching: Vec<Link> = self
            .matching
            .iter()
            .copied()
            .filter(|l| set.contains(&self.super_of(l.u())))
            .collect();
        for l in &inside_matching {
            self.matching.remove(l);
        }

        let mut merged: Vec<NodeId> = Vec::new();
        for s in &set {
            merged.extend(self.members.remove(s).expect("live super-node"));
        }
        merged.sort();
        let id = merged[0];
        for &v in &merged {
            self.membership[v.index()] = id;
        }
        self.members.insert(id, merged);
        self.contracted[id.index()] = true;
        self.partial.extend(links.iter().copied());
        self.steps += 1;
        self.rebuild();

        // matched leaves must stay original leaves of T/I
        for &l in &self.matching {
            for v in l.endpoints() {
                let s = self.super_of(v);
                if self.is_contracted(s) || !self.is_leaf(s) {
                    return Err(invariant(step, format!("matched leaf {v} was absorbed")));
                }
            }
        }

        let original_links = self.inst.map_to_original(&links).into_iter().collect();
        Ok(ContractionRecord {
            step,
            kind,
            new_node: id,
            nodes,
            links,
            original_links,
            summary,
            tokens,
            rewritten,
        })
    }
}

fn r_prime_nodes_live(state: &ContractionState<'_>, r_prime: &[NodeId]) -> Vec<Link> {
    let mut out: Vec<Link> = r_prime
        .iter()
        .flat_map(|&v| state.live_incident(v).map(|ll| ll.link))
        .collect();
    out.sort();
    out
}

fn invariant(step: usize, detail: impl Into<String>) -> Error {
    Error::Invariant {
        step,
        detail: detail.into(),
    }
}
