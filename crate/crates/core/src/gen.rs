//! Seeded random instance generation.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, ToPrimitive, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Link, NodeId, RootedTree, TapInstance};
use crate::ratio::{self, Rational};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeShape {
    /// Each node picks a uniform parent among the nodes before it.
    #[default]
    RandomTree,
    /// A spine from the root with the remaining nodes hung off it.
    Caterpillar,
    /// Paths of near-equal length joined at the root.
    StarOfPaths,
}

impl TreeShape {
    pub const ALL: [TreeShape; 3] = [TreeShape::RandomTree, TreeShape::Caterpillar, TreeShape::StarOfPaths];
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeShape::RandomTree => "random-tree",
            TreeShape::Caterpillar => "caterpillar",
            TreeShape::StarOfPaths => "star-of-paths",
        })
    }
}

impl FromStr for TreeShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TreeShape::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::InvalidGenSpec(format!("unknown mode {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    /// Probability that a non-tree pair becomes a link, in (0, 1].
    #[serde(with = "ratio::serde_str")]
    pub link_density: Rational,
    pub seed: u64,
    pub mode: TreeShape,
}

impl GenSpec {
    pub fn new(n: usize, link_density: Rational, seed: u64, mode: TreeShape) -> Self {
        GenSpec {
            n,
            link_density,
            seed,
            mode,
        }
    }

    fn validate(&self) -> Result<(u32, u32)> {
        if self.n < 2 {
            return Err(Error::InvalidGenSpec(format!("n = {} but at least 2 nodes are needed", self.n)));
        }
        let d = &self.link_density;
        if *d <= Rational::zero() || *d > Rational::one() {
            return Err(Error::InvalidGenSpec(format!(
                "link density {} is outside (0, 1]",
                ratio::fmt(d)
            )));
        }
        match (d.numer().to_u32(), d.denom().to_u32()) {
            (Some(p), Some(q)) => Ok((p, q)),
            _ => Err(Error::InvalidGenSpec(format!(
                "link density {} has too large a denominator",
                ratio::fmt(d)
            ))),
        }
    }
}

fn parents(n: usize, mode: TreeShape, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let mut parent = vec![None; n];
    match mode {
        TreeShape::RandomTree => {
            for (v, p) in parent.iter_mut().enumerate().skip(1) {
                *p = Some(rng.random_range(0..v));
            }
        }
        TreeShape::Caterpillar => {
            let spine = n.div_ceil(2);
            for (v, p) in parent.iter_mut().enumerate().skip(1) {
                *p = Some(if v < spine { v - 1 } else { rng.random_range(0..spine) });
            }
        }
        TreeShape::StarOfPaths => {
            let arms = if n <= 3 { n - 1 } else { rng.random_range(2..=3) };
            for (v, p) in parent.iter_mut().enumerate().skip(1) {
                *p = Some(v.saturating_sub(arms));
            }
        }
    }
    parent
}

/// Generates a feasible instance. Every pair of nodes that is not a tree
/// edge becomes a link with the given density; then each edge left
/// uncovered, deepest first, gets one link from its lower side to a random
/// node outside it. A link parallel to the edge is used only when no other
/// pair crosses it.
pub fn generate(spec: &GenSpec) -> Result<TapInstance> {
    let (p, q) = spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let tree = RootedTree::from_parents(&parents(n, spec.mode, &mut rng))?;

    let is_edge = |a: usize, b: usize| {
        tree.parent(NodeId(a)) == Some(NodeId(b)) || tree.parent(NodeId(b)) == Some(NodeId(a))
    };
    let mut links = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !is_edge(a, b) && rng.random_ratio(p, q) {
                links.push(Link::new(a, b));
            }
        }
    }

    let mut edges = tree.edges();
    edges.sort_by_key(|e| (std::cmp::Reverse(tree.depth(e.child)), e.child));
    for e in edges {
        if links.iter().any(|&l| tree.covers(l, e.child)) {
            continue;
        }
        let below: Vec<NodeId> = tree.nodes().filter(|&v| tree.is_ancestor(e.child, v)).collect();
        let above: Vec<NodeId> = tree.nodes().filter(|&v| !tree.is_ancestor(e.child, v)).collect();
        let pairs: Vec<(NodeId, NodeId)> = below
            .iter()
            .flat_map(|&a| above.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| !is_edge(a.index(), b.index()))
            .collect();
        let (a, b) = pairs.choose(&mut rng).copied().unwrap_or((e.child, e.parent));
        links.push(Link::new(a, b));
    }
    let inst = TapInstance::new(tree, links)?;
    debug_assert!(inst.is_feasible());
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::frac;

    #[test]
    fn two_nodes_give_one_parallel_link() {
        let inst = generate(&GenSpec::new(2, frac(1, 2), 3, TreeShape::RandomTree)).unwrap();
        assert_eq!(inst.to_text(), crate::fixtures::FIXTURE_1);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = GenSpec::new(8, frac(1, 4), 7, TreeShape::RandomTree);
        assert_eq!(generate(&spec).unwrap().to_text(), generate(&spec).unwrap().to_text());
        let other = GenSpec { seed: 8, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap().to_text(), generate(&other).unwrap().to_text());
    }

    #[test]
    fn all_feasible() {
        for seed in 0..1000u64 {
            let mode = TreeShape::ALL[(seed % 3) as usize];
            let n = 2 + (seed as usize % 14);
            let density = frac(1 + (seed % 4) as i64, 8);
            let inst = generate(&GenSpec::new(n, density, seed, mode)).unwrap();
            assert!(inst.is_feasible(), "seed {seed}");
            assert_eq!(inst.node_count(), n);
        }
    }

    #[test]
    fn shapes() {
        let cat = generate(&GenSpec::new(10, frac(1, 4), 1, TreeShape::Caterpillar)).unwrap();
        assert_eq!((0..4).filter(|&v| cat.tree().parent(NodeId(v + 1)) == Some(NodeId(v))).count(), 4);
        let star = generate(&GenSpec::new(9, frac(1, 4), 1, TreeShape::StarOfPaths)).unwrap();
        assert!(star.tree().children(star.root()).len() >= 2);
        assert!(star.leaves().len() <= 3);
    }

    #[test]
    fn bad_specs() {
        assert!(generate(&GenSpec::new(1, frac(1, 2), 0, TreeShape::RandomTree)).is_err());
        assert!(generate(&GenSpec::new(5, frac(0, 1), 0, TreeShape::RandomTree)).is_err());
        assert!(generate(&GenSpec::new(5, frac(3, 2), 0, TreeShape::RandomTree)).is_err());
        assert!("zigzag".parse::<TreeShape>().is_err());
        assert_eq!("star-of-paths".parse::<TreeShape>().unwrap(), TreeShape::StarOfPaths);
    }
}
