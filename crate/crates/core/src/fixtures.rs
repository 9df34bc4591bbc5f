//! Small hand-built instances used by tests, benches and the CLI docs.

use crate::instance::{parse_instance, TapInstance};

/// One edge, one parallel link.
pub const FIXTURE_1: &str = "\
tap 1
nodes 2
root 0
edge 0 1
link 0 1
";

/// A cherry under the root: leaves 2 and 3 hang off node 1.
pub const FIXTURE_2: &str = "\
tap 1
nodes 4
root 0
edge 0 1
edge 1 2
edge 1 3
link 2 3
link 0 2
";

/// The path 0-1-2-3 with a single end-to-end link.
pub const FIXTURE_3: &str = "\
tap 1
nodes 4
root 0
edge 0 1
edge 1 2
edge 2 3
link 0 3
";

/// A twin pair under node 2 whose contraction leaves a compound leaf that
/// then forms a greedy contraction with the unmatched leaf 5.
pub const GREEDY_GADGET: &str = "\
tap 1
nodes 6
root 0
edge 0 1
edge 1 2
edge 1 5
edge 2 3
edge 2 4
link 3 4
link 2 5
link 0 5
";

/// A three-leaf subtree rooted at 1 that becomes dangerous once the twin
/// pair (6,7) is contracted into the compound leaf {4,6,7}: leaves 5 and 3
/// are matched, the compound leaf links to 3, and 5 links above node 1.
pub const DANGEROUS_GADGET: &str = "\
tap 1
nodes 8
root 0
edge 0 1
edge 1 2
edge 1 3
edge 2 4
edge 2 5
edge 4 6
edge 4 7
link 6 7
link 3 5
link 3 6
link 0 5
";

/// Two disjoint copies of [`DANGEROUS_GADGET`] under a common root.
pub const DOUBLE_DANGEROUS_GADGET: &str = "\
tap 1
nodes 15
root 0
edge 0 1
edge 1 2
edge 1 3
edge 2 4
edge 2 5
edge 4 6
edge 4 7
edge 0 8
edge 8 9
edge 8 10
edge 9 11
edge 9 12
edge 11 13
edge 11 14
link 6 7
link 3 5
link 3 6
link 0 5
link 13 14
link 10 12
link 10 13
link 0 12
";

fn load(text: &str) -> TapInstance {
    parse_instance(text).expect("fixture parses")
}

pub fn fixture_1() -> TapInstance {
    load(FIXTURE_1)
}

pub fn fixture_2() -> TapInstance {
    load(FIXTURE_2)
}

pub fn fixture_3() -> TapInstance {
    load(FIXTURE_3)
}

pub fn greedy_gadget() -> TapInstance {
    load(GREEDY_GADGET)
}

pub fn dangerous_gadget() -> TapInstance {
    load(DANGEROUS_GADGET)
}

pub fn double_dangerous_gadget() -> TapInstance {
    load(DOUBLE_DANGEROUS_GADGET)
}
