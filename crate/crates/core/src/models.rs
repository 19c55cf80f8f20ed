//! Named reference models used throughout the tests and the CLI.

use alloc::vec;
use alloc::vec::Vec;

use crate::rational::{rat, Rational};
use crate::stepset::StepSet;

fn build(steps: Vec<([i64; 2], Rational)>) -> StepSet {
    StepSet::new(2, steps.into_iter().map(|(v, w)| (v.to_vec(), w)).collect()).expect("reference model is valid")
}

/// Simple walk: `±e1, ±e2` with weight 1/4. Wedge angle π/2.
pub fn simple() -> StepSet {
    build(vec![
        ([1, 0], rat(1, 4)),
        ([-1, 0], rat(1, 4)),
        ([0, 1], rat(1, 4)),
        ([0, -1], rat(1, 4)),
    ])
}

/// Tandem walk: `(-1,0), (0,1), (1,-1)` with weight 1/3. Wedge angle π/3.
pub fn tandem() -> StepSet {
    build(vec![([-1, 0], rat(1, 3)), ([0, 1], rat(1, 3)), ([1, -1], rat(1, 3))])
}

/// `(1,-1)` with weight 1/2; `(-2,0), (-1,1), (0,2)` with 1/6. Same wedge
/// as the tandem walk but with a jump of size two towards the boundary.
pub fn long_jump() -> StepSet {
    build(vec![
        ([1, -1], rat(1, 2)),
        ([-2, 0], rat(1, 6)),
        ([-1, 1], rat(1, 6)),
        ([0, 2], rat(1, 6)),
    ])
}

/// `(±1,0), (-1,1), (1,-1)` with weight 1/4. Wedge angle π/4.
pub fn b2_walk() -> StepSet {
    build(vec![
        ([1, 0], rat(1, 4)),
        ([-1, 0], rat(1, 4)),
        ([-1, 1], rat(1, 4)),
        ([1, -1], rat(1, 4)),
    ])
}

/// The crystallographic members of the family
/// `a(±1,0) = sin²(π/n)/2`, `a(±(1,-1)) = cos²(π/n)/2`, for `n ∈ {3,4,6}`.
pub fn dihedral_family(n: u32) -> StepSet {
    let cos2 = match n {
        3 => rat(1, 4),
        4 => rat(1, 2),
        6 => rat(3, 4),
        _ => panic!("cos²(π/{n}) is irrational"),
    };
    let sin2 = rat(1, 1) - &cos2;
    let half = rat(1, 2);
    build(vec![
        ([1, 0], &sin2 * &half),
        ([-1, 0], &sin2 * &half),
        ([1, -1], &cos2 * &half),
        ([-1, 1], &cos2 * &half),
    ])
}

/// Zero-drift model whose wedge angle `arccos(sqrt(2/5))` is not of the form π/m.
pub fn non_weyl() -> StepSet {
    build(vec![
        ([1, 0], rat(3, 10)),
        ([-1, 0], rat(3, 10)),
        ([1, -1], rat(1, 5)),
        ([-1, 1], rat(1, 5)),
    ])
}

/// Diagonal walk `(±1,±1)` with weight 1/4: identity covariance.
pub fn diagonal() -> StepSet {
    build(vec![
        ([1, 1], rat(1, 4)),
        ([1, -1], rat(1, 4)),
        ([-1, 1], rat(1, 4)),
        ([-1, -1], rat(1, 4)),
    ])
}

/// Simple walk in dimension 3.
pub fn simple3() -> StepSet {
    let mut steps = Vec::new();
    for i in 0..3 {
        for sign in [1, -1] {
            let mut v = vec![0; 3];
            v[i] = sign;
            steps.push((v, rat(1, 6)));
        }
    }
    StepSet::new(3, steps).expect("reference model is valid")
}

/// Look up a model by its CLI name.
pub fn by_name(name: &str) -> Option<StepSet> {
    Some(match name {
        "simple" => simple(),
        "tandem" => tandem(),
        "long_jump" => long_jump(),
        "b2_walk" => b2_walk(),
        "dihedral_n3" => dihedral_family(3),
        "dihedral_n4" => dihedral_family(4),
        "dihedral_n6" => dihedral_family(6),
        "nonweyl" => non_weyl(),
        "diagonal" => diagonal(),
        "simple3" => simple3(),
        _ => return None,
    })
}

pub const NAMES: &[&str] = &[
    "simple",
    "tandem",
    "long_jump",
    "b2_walk",
    "dihedral_n3",
    "dihedral_n4",
    "dihedral_n6",
    "nonweyl",
    "diagonal",
    "simple3",
];
