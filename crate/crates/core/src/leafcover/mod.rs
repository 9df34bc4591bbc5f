//! Minimum-weight exact covers of the leaf set, by reduction to minimum-weight
//! perfect matching.

mod blossom;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

pub use blossom::{
    max_weight_matching, min_weight_perfect_matching, min_weight_perfect_matching_int, MatchWeight,
};

use crate::error::{Error, Result};
use crate::instance::{Link, NodeId, TapInstance};
use crate::ratio::{self, frac, half, Rational};

/// The weight parameter rho. Values below 3/2 are rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeafWeightConfig {
    #[serde(with = "ratio::serde_str")]
    pub rho: Rational,
}

impl LeafWeightConfig {
    pub fn new(rho: Rational) -> Result<Self> {
        if rho < frac(3, 2) {
            return Err(Error::InvalidRho(ratio::fmt(&rho)));
        }
        Ok(LeafWeightConfig { rho })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let rho = ratio::parse(s).ok_or_else(|| Error::InvalidRho(s.to_string()))?;
        Self::new(rho)
    }
}

impl Default for LeafWeightConfig {
    fn default() -> Self {
        LeafWeightConfig { rho: frac(7, 4) }
    }
}

/// Weight of a leaf-incident link: rho for a plain leaf-to-leaf link,
/// rho + 1/2 for a twin link, rho - 1/2 when only one endpoint is a leaf.
pub fn link_weight(cfg: &LeafWeightConfig, inst: &TapInstance, e: Link) -> Result<Rational> {
    let leaf_ends = e.endpoints().iter().filter(|&&v| inst.is_leaf(v)).count();
    match leaf_ends {
        0 => Err(Error::NoLeafEndpoint(e)),
        1 => Ok(&cfg.rho - half()),
        _ if inst.is_twin(e) => Ok(&cfg.rho + half()),
        _ => Ok(cfg.rho.clone()),
    }
}

/// Total weight of a set of leaf-incident links.
pub fn cover_weight<'a>(
    cfg: &LeafWeightConfig,
    inst: &TapInstance,
    links: impl IntoIterator<Item = &'a Link>,
) -> Result<Rational> {
    links
        .into_iter()
        .try_fold(Rational::zero(), |acc, &l| Ok(acc + link_weight(cfg, inst, l)?))
}

/// True iff every leaf has exactly one incident link in `links`.
pub fn is_exact_cover<'a>(inst: &TapInstance, links: impl IntoIterator<Item = &'a Link>) -> bool {
    let mut degree: BTreeMap<NodeId, usize> = BTreeMap::new();
    for l in links {
        let mut touches = false;
        for v in l.endpoints() {
            if inst.is_leaf(v) {
                *degree.entry(v).or_default() += 1;
                touches = true;
            }
        }
        if !touches {
            return false;
        }
    }
    inst.leaves().iter().all(|v| degree.get(v) == Some(&1))
}

/// A link set meeting every leaf exactly once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactLeafCover {
    pub links: BTreeSet<Link>,
    #[serde(with = "ratio::serde_str")]
    pub weight: Rational,
    /// The leaf-to-leaf links of the cover (the matching M).
    pub matching_part: BTreeSet<Link>,
}

impl ExactLeafCover {
    /// The link covering leaf `a`.
    pub fn link_of(&self, a: NodeId) -> Option<Link> {
        self.links.iter().copied().find(|l| l.has_endpoint(a))
    }
}

/// Minimum-weight exact cover of the leaves. Among covers of equal weight the
/// lexicographically smallest link set is returned.
///
/// Auxiliary graph: leaves `0..k` and one dummy `k + i` per leaf. A leaf pair
/// joined by a link gets an edge of that link's weight; a leaf with an upward
/// link gets an edge to its dummy weighted by its cheapest such link; dummies
/// are pairwise joined at zero cost.
pub fn min_weight_exact_cover(cfg: &LeafWeightConfig, inst: &TapInstance) -> Result<ExactLeafCover> {
    let leaves = inst.leaves();
    let k = leaves.len();
    let index: BTreeMap<NodeId, usize> = leaves.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    // candidate links in canonical order, with their aux edge
    let mut candidates: Vec<(Link, usize, usize)> = Vec::new();
    let mut has_up = vec![false; k];
    for l in inst.links() {
        match (index.get(&l.u()), index.get(&l.v())) {
            (Some(&i), Some(&j)) => candidates.push((l, i, j)),
            (Some(&i), None) | (None, Some(&i)) => {
                // all upward links weigh the same; the first in canonical
                // order is the one a lexicographic tie-break would pick
                if !has_up[i] {
                    has_up[i] = true;
                    candidates.push((l, i, k + i));
                }
            }
            (None, None) => {}
        }
    }
    for (i, &v) in leaves.iter().enumerate() {
        if !has_up[i] && !candidates.iter().any(|c| c.1 == i || c.2 == i) {
            return Err(Error::LeafUncovered(v));
        }
    }

    let weights: Vec<Rational> = candidates
        .iter()
        .map(|c| link_weight(cfg, inst, c.0))
        .collect::<Result<_>>()?;
    let denom = weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let m = candidates.len();
    // Scale so that one unit of weight dominates every sum of tie-break
    // bonuses; earlier links get larger bonuses.
    let scale = &denom << m;
    let mut edges: Vec<(usize, usize, BigInt)> = candidates
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(rank, ((_, i, j), w))| {
            let base = (w * Rational::from_integer(scale.clone())).to_integer();
            (*i, *j, base - (BigInt::one() << (m - 1 - rank)))
        })
        .collect();
    for a in 0..k {
        for b in a + 1..k {
            edges.push((k + a, k + b, BigInt::from(0)));
        }
    }

    let chosen = min_weight_perfect_matching_int(2 * k, &edges)?;
    let links: BTreeSet<Link> = chosen
        .iter()
        .filter(|&&e| e < m)
        .map(|&e| candidates[e].0)
        .collect();
    let matching_part: BTreeSet<Link> = chosen
        .iter()
        .filter(|&&e| e < m && candidates[e].2 < k)
        .map(|&e| candidates[e].0)
        .collect();
    let weight = cover_weight(cfg, inst, &links)?;
    debug_assert!(is_exact_cover(inst, &links));
    Ok(ExactLeafCover {
        links,
        weight,
        matching_part,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::instance::parse_instance;
    use crate::ratio::int;

    fn closed(inst: TapInstance) -> TapInstance {
        inst.shadow_completion()
    }

    #[test]
    fn weight_classes() {
        let cfg = LeafWeightConfig::default();
        let f2 = closed(fixture_2());
        assert_eq!(link_weight(&cfg, &f2, Link::new(2, 3)).unwrap(), frac(9, 4));
        assert_eq!(link_weight(&cfg, &f2, Link::new(1, 2)).unwrap(), frac(5, 4));
        assert_eq!(link_weight(&cfg, &f2, Link::new(0, 1)), Err(Error::NoLeafEndpoint(Link::new(0, 1))));
        // leaves 3 and 5 of the greedy gadget are not twins
        let g = closed(greedy_gadget());
        assert_eq!(link_weight(&cfg, &g, Link::new(3, 5)).unwrap(), frac(7, 4));
        assert_eq!(link_weight(&cfg, &g, Link::new(3, 4)).unwrap(), frac(9, 4));
    }

    #[test]
    fn rho_range() {
        assert!(LeafWeightConfig::parse("3/2").is_ok());
        assert!(matches!(LeafWeightConfig::parse("7/5"), Err(Error::InvalidRho(_))));
        assert!(matches!(LeafWeightConfig::parse("abc"), Err(Error::InvalidRho(_))));
    }

    #[test]
    fn fixture_covers() {
        let cfg = LeafWeightConfig::default();
        let c2 = min_weight_exact_cover(&cfg, &closed(fixture_2())).unwrap();
        assert_eq!(c2.links, BTreeSet::from([Link::new(2, 3)]));
        assert_eq!(c2.matching_part, c2.links);
        assert_eq!(c2.weight, frac(9, 4));

        let c1 = min_weight_exact_cover(&cfg, &closed(fixture_1())).unwrap();
        assert_eq!(c1.links, BTreeSet::from([Link::new(0, 1)]));
        assert_eq!(c1.weight, frac(5, 4));
        assert!(c1.matching_part.is_empty());

        // every link into leaf 3 ties; the canonical first one wins
        let c3 = min_weight_exact_cover(&cfg, &closed(fixture_3())).unwrap();
        assert_eq!(c3.links, BTreeSet::from([Link::new(0, 3)]));
        assert_eq!(c3.weight, frac(5, 4));
    }

    #[test]
    fn rho_three_halves() {
        let cfg = LeafWeightConfig::new(frac(3, 2)).unwrap();
        let f2 = closed(fixture_2());
        assert_eq!(link_weight(&cfg, &f2, Link::new(2, 3)).unwrap(), int(2));
        assert_eq!(link_weight(&cfg, &f2, Link::new(0, 2)).unwrap(), int(1));
        let c = min_weight_exact_cover(&cfg, &f2).unwrap();
        assert_eq!(c.weight, int(2));
        assert!(is_exact_cover(&f2, &c.links));
    }

    #[test]
    fn uncovered_leaf() {
        let inst = parse_instance("tap 1\nnodes 3\nroot 0\nedge 0 1\nedge 0 2\nlink 0 1\n").unwrap();
        let err = min_weight_exact_cover(&LeafWeightConfig::default(), &inst).unwrap_err();
        assert_eq!(err, Error::LeafUncovered(NodeId(2)));
    }
}
