//! Shared fixtures for the pipeline benchmarks.

use num::rational::BigRational;
use num::One;
use ufh::{Cayley, Element, GroupSpec, UfChain};

pub fn z2() -> GroupSpec {
    GroupSpec::int_lattice(2).unwrap()
}

/// Horizontal-edge chain over B_r(e) in ℤ²: ~|B_r| terms of span 1.
pub fn edge_sheet(r: u64) -> UfChain<BigRational> {
    let spec = z2();
    let mut cayley = Cayley::new(spec.clone());
    let e1 = Element::lattice(&[1, 0]);
    let mut c = UfChain::zero(spec.clone(), 1);
    for v in cayley.ball(r).unwrap() {
        let w = spec.compose(&v, &e1).unwrap();
        c.add_term(vec![v, w], BigRational::one()).unwrap();
    }
    c
}
