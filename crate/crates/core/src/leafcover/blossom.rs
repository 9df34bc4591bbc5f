// Weighted matching in general graphs by Edmonds' blossom method with
// primal-dual updates, O(n^3). Structure follows Galil's survey
// ("Efficient Algorithms for Finding Maximum Matching in Graphs", 1986) and
// Joris van Rantwijk's reference implementation.
//
// All arithmetic is exact. Dual variables of vertices are kept doubled so
// integer edge weights never produce fractional duals.

use std::fmt::Debug;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ratio::Rational;

const NONE: usize = usize::MAX;

/// Exact integer types the matching engine can run on.
pub trait MatchWeight: Clone + Ord + Debug + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn twice(&self) -> Self;
    /// Exact halving; callers only halve even values.
    fn half(&self) -> Self;
}

macro_rules! prim_weight {
    ($($t:ty),*) => {$(
        impl MatchWeight for $t {
            fn zero() -> Self { 0 }
            fn twice(&self) -> Self { self * 2 }
            fn half(&self) -> Self {
                debug_assert!(self % 2 == 0);
                self / 2
            }
        }
    )*};
}
prim_weight!(i64, i128);

impl MatchWeight for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn twice(&self) -> Self {
        self * 2
    }
    fn half(&self) -> Self {
        debug_assert!(self.is_even());
        self / 2
    }
}

/// Maximum-weight matching. Returns `mate[v]` (or `None` when unmatched).
///
/// With `max_cardinality`, only maximum-cardinality matchings are considered.
/// The graph must be simple (no parallel edges, no self-loops).
pub fn max_weight_matching<W: MatchWeight>(
    nvertex: usize,
    edges: &[(usize, usize, W)],
    max_cardinality: bool,
) -> Vec<Option<usize>> {
    if edges.is_empty() {
        return vec![None; nvertex];
    }
    let mut m = Matcher::new(nvertex, edges);
    m.run(max_cardinality);
    m.mate
        .iter()
        .map(|&p| if p == NONE { None } else { Some(m.endpoint[p]) })
        .collect()
}

struct Matcher<'a, W> {
    nvertex: usize,
    edges: &'a [(usize, usize, W)],
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<W>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

// Python-style indexing with negative offsets.
fn at(list: &[usize], j: isize) -> usize {
    let n = list.len() as isize;
    list[j.rem_euclid(n) as usize]
}

impl<'a, W: MatchWeight> Matcher<'a, W> {
    fn new(nvertex: usize, edges: &'a [(usize, usize, W)]) -> Self {
        let nedge = edges.len();
        let maxweight = edges
            .iter()
            .map(|e| e.2.clone())
            .max()
            .filter(|w| *w > W::zero())
            .unwrap_or_else(W::zero);
        let mut endpoint = Vec::with_capacity(2 * nedge);
        let mut neighbend = vec![Vec::new(); nvertex];
        for (k, (i, j, _)) in edges.iter().enumerate() {
            endpoint.push(*i);
            endpoint.push(*j);
            neighbend[*i].push(2 * k + 1);
            neighbend[*j].push(2 * k);
        }
        // vertex duals start at maxweight (representing maxweight/2 after the
        // doubling in `slack`), blossom duals at zero
        let mut dualvar = vec![maxweight; nvertex];
        dualvar.extend(std::iter::repeat_n(W::zero(), nvertex));
        Matcher {
            nvertex,
            edges,
            endpoint,
            neighbend,
            mate: vec![NONE; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![NONE; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NONE; 2 * nvertex],
            blossomchilds: vec![Vec::new(); 2 * nvertex],
            blossombase: (0..nvertex).chain(std::iter::repeat_n(NONE, nvertex)).collect(),
            blossomendps: vec![Vec::new(); 2 * nvertex],
            bestedge: vec![NONE; 2 * nvertex],
            blossombestedges: vec![None; 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: usize) -> W {
        let (i, j, ref wt) = self.edges[k];
        self.dualvar[i].clone() + self.dualvar[j].clone() - wt.twice()
    }

    fn blossom_leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            if t < self.nvertex {
                out.push(t);
            } else {
                stack.extend(self.blossomchilds[t].iter().rev());
            }
        }
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let leaves = self.blossom_leaves(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b];
            debug_assert!(self.mate[base] != NONE);
            let mb = self.mate[base];
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    /// Traces back from `v` and `w` to find a new blossom or an augmenting
    /// path. Returns the base of the blossom, or NONE.
    fn scan_blossom(&mut self, mut v: usize, mut w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert_eq!(self.label[b], 1);
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                debug_assert_eq!(self.label[b], 2);
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom slots available");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        debug_assert_eq!(self.label[bb], 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = W::zero();
        for v in self.blossom_leaves_of(&path) {
            if self.label[self.inblossom[v]] == 2 {
                self.queue.push(v);
            }
            self.inblossom[v] = b;
        }
        self.blossomchilds[b] = path.clone();
        self.blossomendps[b] = endps;

        let mut bestedgeto = vec![NONE; 2 * self.nvertex];
        for &bv in &path {
            let nblists: Vec<Vec<usize>> = match self.blossombestedges[bv].take() {
                Some(list) => vec![list],
                None => self
                    .blossom_leaves(bv)
                    .into_iter()
                    .map(|v| self.neighbend[v].iter().map(|p| p / 2).collect())
                    .collect(),
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.bestedge[bv] = NONE;
        }
        let list: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &k in &list {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
        self.blossombestedges[b] = Some(list);
    }

    fn blossom_leaves_of(&self, subs: &[usize]) -> Vec<usize> {
        subs.iter().flat_map(|&s| self.blossom_leaves(s)).collect()
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == W::zero() {
                self.expand_blossom(s, endstage);
            } else {
                for v in self.blossom_leaves(s) {
                    self.inblossom[v] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            // relabel the sub-blossoms on the path through the expanded T-blossom
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let len = childs.len() as isize;
            let mut j = childs.iter().position(|&c| c == entrychild).unwrap() as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 == 1 {
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            let endps = self.blossomendps[b].clone();
            let mut p = self.labelend[b];
            while j != 0 {
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = at(&endps, j - endptrick as isize);
                self.label[self.endpoint[q ^ endptrick ^ 1]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                self.allowedge[q / 2] = true;
                j += jstep;
                p = at(&endps, j - endptrick as isize) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = at(&childs, j);
            let ep = self.endpoint[p ^ 1];
            self.label[ep] = 2;
            self.label[bv] = 2;
            self.labelend[ep] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while at(&childs, j) != entrychild {
                let bv = at(&childs, j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let found = self
                    .blossom_leaves(bv)
                    .into_iter()
                    .find(|&v| self.label[v] != 0);
                if let Some(v) = found {
                    debug_assert_eq!(self.label[v], 2);
                    debug_assert_eq!(self.inblossom[v], bv);
                    self.label[v] = 0;
                    let mb = self.mate[self.blossombase[bv]];
                    self.label[self.endpoint[mb]] = 0;
                    let le = self.labelend[v];
                    self.assign_label(v, 2, le);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = None;
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    /// Swaps matched/unmatched edges along the alternating path through
    /// blossom `b` from vertex `v` to the base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let childs = self.blossomchilds[b].clone();
        let endps = self.blossomendps[b].clone();
        let len = childs.len() as isize;
        let i = childs.iter().position(|&c| c == t).unwrap();
        let mut j = i as isize;
        let (jstep, endptrick): (isize, usize) = if i & 1 == 1 {
            j -= len;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = at(&childs, j);
            let p = at(&endps, j - endptrick as isize) ^ endptrick;
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = at(&childs, j);
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.label[bs], 1);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert_eq!(self.label[bt], 2);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert_eq!(self.blossombase[bt], t);
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn run(&mut self, max_cardinality: bool) {
        let n = self.nvertex;
        for _stage in 0..n {
            self.label.iter_mut().for_each(|l| *l = 0);
            self.bestedge.iter_mut().for_each(|e| *e = NONE);
            for b in n..2 * n {
                self.blossombestedges[b] = None;
            }
            self.allowedge.iter_mut().for_each(|a| *a = false);
            self.queue.clear();
            for v in 0..n {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }

            let mut augmented = false;
            loop {
                while let Some(v) = self.queue.pop() {
                    debug_assert_eq!(self.label[self.inblossom[v]], 1);
                    let neigh = self.neighbend[v].clone();
                    for p in neigh {
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = None;
                        if !self.allowedge[k] {
                            let s = self.slack(k);
                            if s <= W::zero() {
                                self.allowedge[k] = true;
                            }
                            kslack = Some(s);
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                debug_assert_eq!(self.label[self.inblossom[w]], 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            let ks = kslack.clone().unwrap();
                            if self.bestedge[b] == NONE || ks < self.slack(self.bestedge[b]) {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0 {
                            let ks = kslack.clone().unwrap();
                            if self.bestedge[w] == NONE || ks < self.slack(self.bestedge[w]) {
                                self.bestedge[w] = k;
                            }
                        }
                    }
                    if augmented {
                        break;
                    }
                }
                if augmented {
                    break;
                }

                // No augmenting path under the current duals: pick the
                // smallest dual adjustment that makes progress.
                let mut deltatype = 0u8;
                let mut delta: Option<W> = None;
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                if !max_cardinality {
                    deltatype = 1;
                    delta = self.dualvar[..n].iter().min().cloned();
                }
                for v in 0..n {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == 0 || d < *delta.as_ref().unwrap() {
                            delta = Some(d);
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * n {
                    if self.blossomparent[b] == NONE && self.label[b] == 1 && self.bestedge[b] != NONE {
                        let d = self.slack(self.bestedge[b]).half();
                        if deltatype == 0 || d < *delta.as_ref().unwrap() {
                            delta = Some(d);
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == 0 || self.dualvar[b] < *delta.as_ref().unwrap())
                    {
                        delta = Some(self.dualvar[b].clone());
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == 0 {
                    // no further improvement possible; max-cardinality mode
                    deltatype = 1;
                    let m = self.dualvar[..n].iter().min().cloned().unwrap();
                    delta = Some(if m < W::zero() { W::zero() } else { m });
                }
                let delta = delta.unwrap();

                for v in 0..n {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] = self.dualvar[v].clone() - delta.clone(),
                        2 => self.dualvar[v] = self.dualvar[v].clone() + delta.clone(),
                        _ => {}
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] = self.dualvar[b].clone() + delta.clone(),
                            2 => self.dualvar[b] = self.dualvar[b].clone() - delta.clone(),
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, mut j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            std::mem::swap(&mut i, &mut j);
                        }
                        let _ = j;
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }

            if !augmented {
                break;
            }
            for b in n..2 * n {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b] == W::zero()
                {
                    self.expand_blossom(b, true);
                }
            }
        }
    }
}

/// Minimum-weight perfect matching on an integer-weighted simple graph.
/// Returns the indices of the chosen edges, sorted.
pub fn min_weight_perfect_matching_int(n: usize, edges: &[(usize, usize, BigInt)]) -> Result<Vec<usize>> {
    if n % 2 == 1 {
        return Err(Error::NoPerfectMatching);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // Keep the cheapest edge per vertex pair.
    let mut best: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
    for (k, (i, j, w)) in edges.iter().enumerate() {
        assert!(i != j && *i < n && *j < n, "edge ({i},{j}) invalid for {n} vertices");
        let key = (*i.min(j), *i.max(j));
        match best.get(&key) {
            Some(&k0) if edges[k0].2 <= *w => {}
            _ => {
                best.insert(key, k);
            }
        }
    }
    let kept: Vec<usize> = best.values().copied().collect();
    if kept.len() < n / 2 {
        return Err(Error::NoPerfectMatching);
    }
    let top = kept.iter().map(|&k| &edges[k].2).max().unwrap().clone() + BigInt::one();
    // maximize (top - w) over maximum-cardinality matchings
    let flipped: Vec<(usize, usize, BigInt)> = kept
        .iter()
        .map(|&k| (edges[k].0, edges[k].1, &top - &edges[k].2))
        .collect();

    let fits = flipped
        .iter()
        .all(|e| e.2.abs().bits() < 100 - (n as u64).ilog2() as u64);
    let mate = if fits {
        let small: Vec<(usize, usize, i128)> = flipped
            .iter()
            .map(|(i, j, w)| (*i, *j, w.to_i128().unwrap()))
            .collect();
        max_weight_matching(n, &small, true)
    } else {
        max_weight_matching(n, &flipped, true)
    };
    if mate.iter().any(|m| m.is_none()) {
        return Err(Error::NoPerfectMatching);
    }
    let mut chosen: Vec<usize> = kept
        .iter()
        .copied()
        .filter(|&k| mate[edges[k].0] == Some(edges[k].1))
        .collect();
    chosen.sort();
    debug_assert_eq!(chosen.len(), n / 2);
    Ok(chosen)
}

/// Minimum-weight perfect matching with exact rational weights.
pub fn min_weight_perfect_matching(n: usize, edges: &[(usize, usize, Rational)]) -> Result<Vec<usize>> {
    let denom = edges
        .iter()
        .fold(BigInt::one(), |acc, e| acc.lcm(e.2.denom()));
    let scaled: Vec<(usize, usize, BigInt)> = edges
        .iter()
        .map(|(i, j, w)| (*i, *j, (w * Rational::from_integer(denom.clone())).to_integer()))
        .collect();
    min_weight_perfect_matching_int(n, &scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{frac, int};
    use proptest::prelude::*;

    // Exhaustive maximum-weight matching for tiny graphs.
    fn brute_max(n: usize, edges: &[(usize, usize, i64)], max_card: bool) -> (usize, i64) {
        #[allow(clippy::too_many_arguments)]
        fn go(
            v: usize,
            n: usize,
            used: &mut Vec<bool>,
            edges: &[(usize, usize, i64)],
            card: usize,
            w: i64,
            best: &mut (usize, i64),
            max_card: bool,
        ) {
            if v == n {
                let better = if max_card {
                    (card, w) > *best
                } else {
                    w > best.1
                };
                if better {
                    *best = (card, w);
                }
                return;
            }
            if used[v] {
                return go(v + 1, n, used, edges, card, w, best, max_card);
            }
            go(v + 1, n, used, edges, card, w, best, max_card);
            for &(a, b, wt) in edges {
                let u = if a == v { b } else if b == v { a } else { continue };
                if u > v && !used[u] {
                    used[v] = true;
                    used[u] = true;
                    go(v + 1, n, used, edges, card + 1, w + wt, best, max_card);
                    used[v] = false;
                    used[u] = false;
                }
            }
        }
        let mut best = (0, 0);
        go(0, n, &mut vec![false; n], edges, 0, 0, &mut best, max_card);
        best
    }

    fn eval(mate: &[Option<usize>], edges: &[(usize, usize, i64)]) -> (usize, i64) {
        let mut card = 0;
        let mut w = 0;
        for &(a, b, wt) in edges {
            if mate[a] == Some(b) {
                assert_eq!(mate[b], Some(a));
                card += 1;
                w += wt;
            }
        }
        (card, w)
    }

    // Exhaustive minimum-weight perfect matching over all pairings.
    fn brute_min_perfect(n: usize, edges: &[(usize, usize, Rational)]) -> Option<Rational> {
        fn go(left: &[usize], edges: &[(usize, usize, Rational)]) -> Option<Rational> {
            if left.is_empty() {
                return Some(int(0));
            }
            let a = left[0];
            let mut best: Option<Rational> = None;
            for i in 1..left.len() {
                let b = left[i];
                let w = edges
                    .iter()
                    .filter(|e| (e.0 == a && e.1 == b) || (e.0 == b && e.1 == a))
                    .map(|e| e.2.clone())
                    .min();
                let Some(w) = w else { continue };
                let rest: Vec<usize> = left.iter().copied().filter(|&x| x != a && x != b).collect();
                if let Some(r) = go(&rest, edges) {
                    let total = w + r;
                    if best.as_ref().is_none_or(|b| total < *b) {
                        best = Some(total);
                    }
                }
            }
            best
        }
        go(&(0..n).collect::<Vec<_>>(), edges)
    }

    fn total(edges: &[(usize, usize, Rational)], chosen: &[usize]) -> Rational {
        chosen.iter().map(|&k| edges[k].2.clone()).fold(int(0), |a, b| a + b)
    }

    #[test]
    fn triangle_with_pendant() {
        let edges = vec![
            (0, 1, int(1)),
            (1, 2, int(2)),
            (0, 2, int(3)),
            (2, 3, int(4)),
            (1, 3, int(5)),
        ];
        let expected = brute_min_perfect(4, &edges).unwrap();
        assert_eq!(expected, int(5));
        let chosen = min_weight_perfect_matching(4, &edges).unwrap();
        assert_eq!(chosen, vec![0, 3]);
        assert_eq!(total(&edges, &chosen), expected);
    }

    #[test]
    fn single_edge() {
        let edges = vec![(0, 1, int(7))];
        assert_eq!(min_weight_perfect_matching(2, &edges).unwrap(), vec![0]);
    }

    #[test]
    fn k4_uniform() {
        let w = frac(5, 4);
        let edges: Vec<_> = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
            .iter()
            .map(|&(a, b)| (a, b, w.clone()))
            .collect();
        let chosen = min_weight_perfect_matching(4, &edges).unwrap();
        assert_eq!(chosen.len(), 2);
        assert_eq!(total(&edges, &chosen), w.clone() + w);
    }

    #[test]
    fn no_perfect_matching() {
        let edges = vec![(0, 1, int(1)), (0, 2, int(1)), (0, 3, int(1))];
        assert_eq!(
            min_weight_perfect_matching(4, &edges),
            Err(Error::NoPerfectMatching)
        );
        assert_eq!(min_weight_perfect_matching(3, &edges[..2]), Err(Error::NoPerfectMatching));
    }

    #[test]
    fn negative_and_huge_weights() {
        let big: BigInt = BigInt::from(1u8) << 200;
        let edges = vec![
            (0, 1, big.clone()),
            (2, 3, big.clone()),
            (0, 2, big.clone() + 1),
            (1, 3, big.clone() - 3),
        ];
        // {01,23} = 2big, {02,13} = 2big - 2
        assert_eq!(min_weight_perfect_matching_int(4, &edges).unwrap(), vec![2, 3]);
        let neg = vec![(0, 1, int(-3)), (2, 3, int(-1)), (0, 2, int(-2)), (1, 3, int(-2))];
        assert_eq!(total(&neg, &min_weight_perfect_matching(4, &neg).unwrap()), int(-4));
    }

    fn graph_strategy(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, i64)>)> {
        (2..=max_n).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let m = pairs.len();
            (
                Just(n),
                proptest::collection::vec((any::<bool>(), 0i64..20), m).prop_map(move |picks| {
                    pairs
                        .iter()
                        .zip(picks)
                        .filter(|(_, (keep, _))| *keep)
                        .map(|(&(i, j), (_, w))| (i, j, w))
                        .collect::<Vec<_>>()
                }),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn max_weight_matches_brute_force((n, edges) in graph_strategy(8), max_card in any::<bool>()) {
            let mate = max_weight_matching(n, &edges, max_card);
            let got = eval(&mate, &edges);
            let want = brute_max(n, &edges, max_card);
            if max_card {
                prop_assert_eq!(got, want);
            } else {
                prop_assert_eq!(got.1, want.1);
            }
        }

        #[test]
        fn min_perfect_matches_brute_force((n, edges) in graph_strategy(8), denom in 1i64..6) {
            let n = n - n % 2;
            let edges: Vec<(usize, usize, Rational)> = edges
                .into_iter()
                .filter(|e| e.0 < n && e.1 < n)
                .map(|(i, j, w)| (i, j, frac(w, denom)))
                .collect();
            let want = brute_min_perfect(n, &edges);
            match min_weight_perfect_matching(n, &edges) {
                Ok(chosen) => {
                    prop_assert_eq!(Some(total(&edges, &chosen)), want);
                    let mut seen = vec![false; n];
                    for &k in &chosen {
                        prop_assert!(!seen[edges[k].0] && !seen[edges[k].1]);
                        seen[edges[k].0] = true;
                        seen[edges[k].1] = true;
                    }
                }
                Err(e) => {
                    prop_assert_eq!(e, Error::NoPerfectMatching);
                    prop_assert!(want.is_none());
                }
            }
        }
    }
}
