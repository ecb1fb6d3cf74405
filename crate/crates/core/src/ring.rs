//! Tuple weights.
//!
//! Every relation carries one weight per tuple. Set semantics uses `()`,
//! bag semantics uses `u64` multiplicities and aggregation uses any
//! commutative [`Ring`]. Integer arithmetic wraps, so `i64` and `u64` are the
//! rings of integers modulo 2^64 and the laws hold exactly.

use std::fmt;

/// A commutative semiring: `add` folds alternative derivations, `mul` combines
/// the tuples of one join result.
pub trait Semiring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

/// A commutative ring, i.e. a semiring with additive inverses.
pub trait Ring: Semiring {
    fn neg(&self) -> Self;
}

impl Semiring for () {
    fn zero() -> Self {}
    fn one() -> Self {}
    fn add(&self, _: &Self) -> Self {}
    fn mul(&self, _: &Self) -> Self {}
}

impl Semiring for u64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn add(&self, other: &Self) -> Self {
        self.wrapping_add(*other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.wrapping_mul(*other)
    }
}

impl Semiring for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn add(&self, other: &Self) -> Self {
        self.wrapping_add(*other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.wrapping_mul(*other)
    }
}

impl Ring for i64 {
    fn neg(&self) -> Self {
        self.wrapping_neg()
    }
}

/// Product ring of two integer rings with componentwise operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair(pub i64, pub i64);

impl Semiring for Pair {
    fn zero() -> Self {
        Pair(0, 0)
    }
    fn one() -> Self {
        Pair(1, 1)
    }
    fn add(&self, other: &Self) -> Self {
        Pair(self.0.add(&other.0), self.1.add(&other.1))
    }
    fn mul(&self, other: &Self) -> Self {
        Pair(self.0.mul(&other.0), self.1.mul(&other.1))
    }
}

impl Ring for Pair {
    fn neg(&self) -> Self {
        Pair(self.0.neg(), self.1.neg())
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.0, self.1)
    }
}

/// Checks the commutative ring laws on one triple of sample values.
pub fn check_ring_laws<R: Ring>(a: &R, b: &R, c: &R) -> Result<(), &'static str> {
    let zero = R::zero();
    let one = R::one();
    if a.add(&b.add(c)) != a.add(b).add(c) {
        return Err("addition is not associative");
    }
    if a.mul(&b.mul(c)) != a.mul(b).mul(c) {
        return Err("multiplication is not associative");
    }
    if a.add(b) != b.add(a) {
        return Err("addition is not commutative");
    }
    if a.mul(b) != b.mul(a) {
        return Err("multiplication is not commutative");
    }
    if a.mul(&b.add(c)) != a.mul(b).add(&a.mul(c)) {
        return Err("multiplication does not distribute over addition");
    }
    if a.add(&zero) != *a || a.mul(&one) != *a {
        return Err("identity law fails");
    }
    if a.add(&a.neg()) != zero {
        return Err("additive inverse law fails");
    }
    Ok(())
}
