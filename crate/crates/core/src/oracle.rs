//! Exact Frobenius numbers.
//!
//! [`frobenius`] computes the Apéry set of the tuple with respect to its
//! smallest element `m`: for each residue `r mod m`, the least representable
//! integer congruent to `r`. That is a shortest-path problem on `m` residue
//! nodes with an edge `r -> (r + a) mod m` of weight `a` per generator.
//! The Frobenius number is `max(Apéry) - m`.
//!
//! [`frobenius_bruteforce`] fills a reachability table instead. It is slow and
//! exists to cross-check the fast path.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid tuple: {0}")]
    InvalidTuple(String),
    #[error("generators {tuple} are not coprime (gcd {gcd})")]
    NotCoprime { tuple: GenTuple, gcd: i64 },
    #[error("arithmetic overflow while computing the Frobenius number of {0}")]
    Overflow(GenTuple),
    #[error("bound {bound} is too small for {tuple}")]
    BoundTooSmall { tuple: GenTuple, bound: i64 },
}

/// Sorted positive generators, at least two of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct GenTuple(Vec<i64>);

impl GenTuple {
    pub fn new(mut elements: Vec<i64>) -> Result<Self, OracleError> {
        if elements.len() < 2 {
            return Err(OracleError::InvalidTuple(format!(
                "need at least 2 generators, got {}",
                elements.len()
            )));
        }
        if let Some(bad) = elements.iter().find(|&&a| a < 1) {
            return Err(OracleError::InvalidTuple(format!(
                "generator {bad} is not a positive integer"
            )));
        }
        elements.sort_unstable();
        Ok(GenTuple(elements))
    }

    pub fn elements(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> i64 {
        self.0[0]
    }

    pub fn max(&self) -> i64 {
        self.0[self.0.len() - 1]
    }

    pub fn gcd(&self) -> i64 {
        self.0.iter().fold(0, |g, &a| g.gcd(&a))
    }

    pub fn is_coprime(&self) -> bool {
        self.gcd() == 1
    }

    /// Adds one generator.
    pub fn with(&self, extra: i64) -> Result<Self, OracleError> {
        let mut v = self.0.clone();
        v.push(extra);
        GenTuple::new(v)
    }

    fn require_coprime(&self) -> Result<(), OracleError> {
        match self.gcd() {
            1 => Ok(()),
            gcd => Err(OracleError::NotCoprime {
                tuple: self.clone(),
                gcd,
            }),
        }
    }
}

impl TryFrom<Vec<i64>> for GenTuple {
    type Error = OracleError;

    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        GenTuple::new(v)
    }
}

impl From<GenTuple> for Vec<i64> {
    fn from(t: GenTuple) -> Self {
        t.0
    }
}

impl fmt::Display for GenTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Least representable integer in each residue class modulo the smallest
/// generator; `None` for classes that are never reached (possible only when
/// the tuple is not coprime).
pub fn apery_set(t: &GenTuple) -> Result<Vec<Option<i64>>, OracleError> {
    let m = t.min();
    let modulus = usize::try_from(m).map_err(|_| OracleError::Overflow(t.clone()))?;
    let mut dist: Vec<Option<i64>> = vec![None; modulus];
    dist[0] = Some(0);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0i64, 0usize)));
    // Generators equal to m (or congruent to 0) add nothing.
    let mut steps: Vec<(i64, usize)> = t
        .elements()
        .iter()
        .map(|&a| (a, (a % m) as usize))
        .filter(|&(_, r)| r != 0)
        .collect();
    steps.dedup();

    while let Some(Reverse((d, r))) = heap.pop() {
        if dist[r].is_some_and(|best| d > best) {
            continue;
        }
        for &(a, step) in &steps {
            let nd = d.checked_add(a).ok_or_else(|| OracleError::Overflow(t.clone()))?;
            let nr = (r + step) % modulus;
            if dist[nr].is_none_or(|best| nd < best) {
                dist[nr] = Some(nd);
                heap.push(Reverse((nd, nr)));
            }
        }
    }
    Ok(dist)
}

/// The largest integer not representable as a non-negative combination of
/// `t`, or -1 when every non-negative integer is representable.
pub fn frobenius(t: &GenTuple) -> Result<i64, OracleError> {
    t.require_coprime()?;
    if t.min() == 1 {
        return Ok(-1);
    }
    let apery = apery_set(t)?;
    let largest = apery
        .iter()
        .map(|d| d.expect("coprime tuple reaches every residue"))
        .max()
        .expect("modulus >= 2");
    largest
        .checked_sub(t.min())
        .ok_or_else(|| OracleError::Overflow(t.clone()))
}

/// A table size large enough for [`frobenius_bruteforce`]: the Frobenius
/// number is at most the smaller of the best coprime-pair closed form and
/// Schur's bound `(a_1 - 1)(a_n - 1) - 1`; the table also needs one full
/// window of `a_1` representable values above it.
pub fn dp_bound(t: &GenTuple) -> Result<i64, OracleError> {
    let overflow = || OracleError::Overflow(t.clone());
    let e = t.elements();
    let (lo, hi) = (t.min(), t.max());
    let mut best = (lo - 1)
        .checked_mul(hi - 1)
        .and_then(|v| v.checked_sub(1))
        .ok_or_else(overflow)?;
    for (i, &a) in e.iter().enumerate() {
        for &b in &e[i + 1..] {
            if a.gcd(&b) == 1 {
                let g = a
                    .checked_mul(b)
                    .and_then(|p| p.checked_sub(a)?.checked_sub(b))
                    .ok_or_else(overflow)?;
                best = best.min(g);
            }
        }
    }
    best.max(0).checked_add(lo).ok_or_else(overflow)
}

/// Reachability-table Frobenius number over `0..=bound`.
pub fn frobenius_bruteforce(t: &GenTuple, bound: i64) -> Result<i64, OracleError> {
    t.require_coprime()?;
    let too_small = || OracleError::BoundTooSmall {
        tuple: t.clone(),
        bound,
    };
    let size = usize::try_from(bound).map_err(|_| too_small())? + 1;
    let reachable = reachability(t.elements(), size);
    let window = t.min() as usize;
    if window > size || !reachable[size - window..].iter().all(|&r| r) {
        return Err(too_small());
    }
    Ok(reachable
        .iter()
        .rposition(|&r| !r)
        .map_or(-1, |i| i as i64))
}

fn reachability(gens: &[i64], size: usize) -> Vec<bool> {
    let mut reachable = vec![false; size];
    reachable[0] = true;
    for n in 1..size {
        reachable[n] = gens
            .iter()
            .any(|&a| (a as usize) <= n && reachable[n - a as usize]);
    }
    reachable
}

/// Whether `n` is a non-negative integer combination of `t`.
pub fn is_representable(t: &GenTuple, n: i64) -> bool {
    if n < 0 {
        return false;
    }
    if n == 0 {
        return true;
    }
    // Schur: above (a_1 - 1)(a_n - 1) - 1 everything is representable.
    if t.is_coprime() {
        if let Some(schur) = (t.min() - 1).checked_mul(t.max() - 1) {
            if n >= schur {
                return true;
            }
        }
    }
    let Ok(n) = usize::try_from(n) else {
        return false;
    };
    reachability(t.elements(), n + 1)[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tup(v: &[i64]) -> GenTuple {
        GenTuple::new(v.to_vec()).unwrap()
    }

    #[test]
    fn table_rows() {
        assert_eq!(frobenius(&tup(&[3, 6, 7, 13])), Ok(11));
        assert_eq!(frobenius(&tup(&[4, 7, 9, 15])), Ok(10));
        assert_eq!(frobenius(&tup(&[5, 8, 11, 17])), Ok(14));
    }

    #[test]
    fn small_cases() {
        assert_eq!(frobenius(&tup(&[3, 5])), Ok(7));
        assert_eq!(frobenius(&tup(&[1, 5])), Ok(-1));
        assert_eq!(frobenius(&tup(&[16, 19, 33, 39])), Ok(79));
        assert_eq!(frobenius(&tup(&[2, 3])), Ok(1));
        assert_eq!(frobenius(&tup(&[5, 3])), Ok(7));
        assert_eq!(frobenius(&tup(&[6, 10, 15])), Ok(29));
    }

    #[test]
    fn bruteforce_cases() {
        assert_eq!(frobenius_bruteforce(&tup(&[3, 5]), 15), Ok(7));
        assert_eq!(frobenius_bruteforce(&tup(&[3, 6, 7, 13]), 26), Ok(11));
        assert_eq!(frobenius_bruteforce(&tup(&[2, 3]), 6), Ok(1));
        assert_eq!(frobenius_bruteforce(&tup(&[1, 3]), 3), Ok(-1));
        assert!(matches!(
            frobenius_bruteforce(&tup(&[3, 5]), 8),
            Err(OracleError::BoundTooSmall { bound: 8, .. })
        ));
        assert!(matches!(
            frobenius_bruteforce(&tup(&[3, 5]), 1),
            Err(OracleError::BoundTooSmall { .. })
        ));
        let t = tup(&[16, 19, 33, 39]);
        assert_eq!(frobenius_bruteforce(&t, dp_bound(&t).unwrap()), Ok(79));
    }

    #[test]
    fn not_coprime() {
        let e = frobenius(&tup(&[2, 4])).unwrap_err();
        assert!(matches!(e, OracleError::NotCoprime { gcd: 2, .. }));
        assert!(frobenius_bruteforce(&tup(&[6, 9]), 100).is_err());
    }

    #[test]
    fn invalid_tuples() {
        assert!(GenTuple::new(vec![5]).is_err());
        assert!(GenTuple::new(vec![0, 5]).is_err());
        assert!(GenTuple::new(vec![-3, 5]).is_err());
        assert_eq!(tup(&[7, 3, 5]).elements(), &[3, 5, 7]);
    }

    #[test]
    fn overflow_is_reported() {
        let big = (i64::MAX - 10..i64::MAX).find(|a| a % 3 != 0).unwrap();
        let t = tup(&[3, big]);
        assert!(matches!(frobenius(&t), Err(OracleError::Overflow(_))));
    }

    #[test]
    fn representability() {
        let t = tup(&[3, 6, 7, 13]);
        assert!(!is_representable(&t, 11));
        assert!(is_representable(&t, 12));
        assert!(is_representable(&tup(&[3, 5]), 8));
        assert!(!is_representable(&tup(&[3, 5]), 7));
        assert!(is_representable(&tup(&[3, 5]), 0));
        assert!(!is_representable(&tup(&[3, 5]), -1));
        assert!(!is_representable(&tup(&[4, 6]), 1_000_001));
    }

    #[test]
    fn apery_of_pair() {
        // Apéry set of <3, 5> w.r.t. 3 is {0, 10, 5}
        let a = apery_set(&tup(&[3, 5])).unwrap();
        assert_eq!(a, vec![Some(0), Some(10), Some(5)]);
    }
}
