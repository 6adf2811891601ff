//! Pairings (perfect matchings), set partitions and the partition-lattice join.
//!
//! All indices are 1-based, matching the way moment queries and pairings are
//! written down by hand: a pairing of `{1, ..., 2k}` is a list of `k` pairs
//! `(a, b)` with `a < b`, sorted by `a`.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{argument_error, Result};
use crate::Limits;

/// A perfect matching of `{1, ..., m}` in canonical form.
///
/// The derived ordering is lexicographic on the canonical pair list, which is
/// also the order produced by [`enumerate_pairings`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<[usize; 2]>", into = "Vec<[usize; 2]>")]
pub struct Pairing {
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    /// Builds a pairing from arbitrary pairs, validating and canonicalizing them.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        if pairs.is_empty() {
            return Err(argument_error!("a pairing needs at least one pair"));
        }
        let m = 2 * pairs.len();
        let mut seen = vec![false; m + 1];
        for &(a, b) in &pairs {
            if a == b {
                return Err(argument_error!("pair ({a}, {b}) repeats an index"));
            }
            for idx in [a, b] {
                if idx == 0 || idx > m {
                    return Err(argument_error!("index {idx} outside 1..={m}"));
                }
                if std::mem::replace(&mut seen[idx], true) {
                    return Err(argument_error!("index {idx} appears in more than one pair"));
                }
            }
        }
        pairs.sort_unstable();
        Ok(Self { pairs })
    }

    /// The pairing `(1,2)(3,4)...(2k-1,2k)`.
    pub fn standard(k: usize) -> Result<Self> {
        Self::new((0..k).map(|t| (2 * t + 1, 2 * t + 2)))
    }

    /// Builds a pairing from a 0-based partner table (`mate[mate[i]] == i`).
    pub(crate) fn from_mates(mate: &[usize]) -> Self {
        let pairs = mate
            .iter()
            .enumerate()
            .filter(|&(i, &j)| i < j)
            .map(|(i, &j)| (i + 1, j + 1))
            .collect();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Order `m = 2k` of the index set.
    pub fn order(&self) -> usize {
        2 * self.pairs.len()
    }

    /// Number of pairs `k`.
    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    /// 0-based partner table.
    pub fn mates(&self) -> Vec<usize> {
        let mut mate = vec![0; self.order()];
        for &(a, b) in &self.pairs {
            mate[a - 1] = b - 1;
            mate[b - 1] = a - 1;
        }
        mate
    }

    pub fn to_partition(&self) -> SetPartition {
        SetPartition {
            m: self.order(),
            blocks: self.pairs.iter().map(|&(a, b)| vec![a, b]).collect(),
        }
    }

    /// Whether `seq` (one entry per position) is constant on every pair.
    pub fn is_constant_on_pairs<T: PartialEq>(&self, seq: &[T]) -> Result<bool> {
        if seq.len() != self.order() {
            return Err(argument_error!(
                "sequence of length {} against a pairing of order {}",
                seq.len(),
                self.order()
            ));
        }
        Ok(self.pairs.iter().all(|&(a, b)| seq[a - 1] == seq[b - 1]))
    }
}

impl TryFrom<Vec<[usize; 2]>> for Pairing {
    type Error = crate::Error;

    fn try_from(value: Vec<[usize; 2]>) -> Result<Self> {
        Self::new(value.into_iter().map(|[a, b]| (a, b)))
    }
}

impl From<Pairing> for Vec<[usize; 2]> {
    fn from(value: Pairing) -> Self {
        value.pairs.into_iter().map(|(a, b)| [a, b]).collect()
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in &self.pairs {
            write!(f, "({a},{b})")?;
        }
        Ok(())
    }
}

/// `(2k-1)!!`, the number of pairings of a `2k`-element set.
pub fn pairing_count(k: usize) -> BigUint {
    (1..=k).map(|t| BigUint::from(2 * t - 1)).product()
}

/// All pairings of `{1, ..., 2k}` in lexicographic canonical order.
///
/// The smallest free index is matched with each larger free index in turn,
/// which emits the canonical pair lists in lexicographic order. Every Gram
/// matrix in the crate is indexed by this order.
pub fn enumerate_pairings(k: usize, limits: &Limits) -> Result<Vec<Pairing>> {
    if k == 0 {
        return Err(argument_error!("k must be at least 1"));
    }
    limits.check_pairing_k(k)?;
    let m = 2 * k;
    let capacity = (1..=k).map(|t| 2 * t - 1).product();
    let mut out = Vec::with_capacity(capacity);
    let mut mate = vec![usize::MAX; m];
    extend_pairings(&mut mate, &mut out);
    Ok(out)
}

fn extend_pairings(mate: &mut [usize], out: &mut Vec<Pairing>) {
    let Some(first) = mate.iter().position(|&x| x == usize::MAX) else {
        out.push(Pairing::from_mates(mate));
        return;
    };
    for other in first + 1..mate.len() {
        if mate[other] != usize::MAX {
            continue;
        }
        mate[first] = other;
        mate[other] = first;
        extend_pairings(mate, out);
        mate[first] = usize::MAX;
        mate[other] = usize::MAX;
    }
}

/// A partition of `{1, ..., m}` into nonempty blocks, in canonical form:
/// blocks sorted by least element, elements sorted within each block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SetPartition {
    m: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(m: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; m + 1];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(argument_error!(
                    "set partitions cannot contain an empty block"
                ));
            }
            block.sort_unstable();
            for &idx in block.iter() {
                if idx == 0 || idx > m {
                    return Err(argument_error!("index {idx} outside 1..={m}"));
                }
                if std::mem::replace(&mut seen[idx], true) {
                    return Err(argument_error!("index {idx} appears in two blocks"));
                }
            }
        }
        if let Some(missing) = (1..=m).find(|&i| !seen[i]) {
            return Err(argument_error!(
                "index {missing} is not covered by any block"
            ));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { m, blocks })
    }

    /// Groups positions by equal label; block order follows first occurrence.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let mut reps: Vec<&T> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (pos, label) in labels.iter().enumerate() {
            match reps.iter().position(|r| *r == label) {
                Some(b) => blocks[b].push(pos + 1),
                None => {
                    reps.push(label);
                    blocks.push(vec![pos + 1]);
                }
            }
        }
        Self {
            m: labels.len(),
            blocks,
        }
    }

    pub fn single_block(m: usize) -> Self {
        Self {
            m,
            blocks: if m == 0 {
                vec![]
            } else {
                vec![(1..=m).collect()]
            },
        }
    }

    pub fn singletons(m: usize) -> Self {
        Self {
            m,
            blocks: (1..=m).map(|i| vec![i]).collect(),
        }
    }

    /// Size of the ground set.
    pub fn order(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// 0-based block label for every position (labels follow canonical block order).
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.m];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                labels[i - 1] = b;
            }
        }
        labels
    }

    /// Least upper bound in the partition lattice.
    pub fn join(&self, other: &SetPartition) -> Result<SetPartition> {
        if self.m != other.m {
            return Err(argument_error!(
                "cannot join partitions of {} and {} elements",
                self.m,
                other.m
            ));
        }
        let mut uf = UnionFind::new(self.m);
        for block in self.blocks.iter().chain(&other.blocks) {
            for w in block.windows(2) {
                uf.union(w[0] - 1, w[1] - 1);
            }
        }
        let roots: Vec<usize> = (0..self.m).map(|i| uf.find(i)).collect();
        Ok(SetPartition::from_labels(&roots))
    }
}

/// Least upper bound `p ∨ q` of two partitions of the same set.
pub fn join(p: &SetPartition, q: &SetPartition) -> Result<SetPartition> {
    p.join(q)
}

/// Number of blocks of `p ∨ q` for two pairings, without materializing the join.
pub fn join_block_count(p: &Pairing, q: &Pairing) -> Result<usize> {
    if p.order() != q.order() {
        return Err(argument_error!(
            "pairings of order {} and {} cannot be joined",
            p.order(),
            q.order()
        ));
    }
    let mut uf = UnionFind::new(p.order());
    for &(a, b) in p.pairs().iter().chain(q.pairs()) {
        uf.union(a - 1, b - 1);
    }
    Ok(uf.components())
}

/// True iff every pair of `q` lies inside a single block of `p`.
pub fn refines(q: &Pairing, p: &SetPartition) -> Result<bool> {
    if q.order() != p.order() {
        return Err(argument_error!(
            "pairing of order {} against a partition of {} elements",
            q.order(),
            p.order()
        ));
    }
    let labels = p.labels();
    Ok(q.is_constant_on_pairs(&labels).expect("orders match"))
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
    }

    fn components(&self) -> usize {
        self.components
    }
}

/// A bijection of `{1, ..., m}`; `images[t - 1] = σ(t)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexPermutation {
    images: Vec<usize>,
}

impl IndexPermutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m + 1];
        for &img in &images {
            if img == 0 || img > m || std::mem::replace(&mut seen[img], true) {
                return Err(argument_error!(
                    "{images:?} is not a permutation of 1..={m}"
                ));
            }
        }
        Ok(Self { images })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            images: (1..=m).collect(),
        }
    }

    /// Swaps `a` and `b`, fixing everything else.
    pub fn transposition(m: usize, a: usize, b: usize) -> Result<Self> {
        let mut images: Vec<usize> = (1..=m).collect();
        if a == 0 || b == 0 || a > m || b > m {
            return Err(argument_error!("transposition ({a} {b}) outside 1..={m}"));
        }
        images.swap(a - 1, b - 1);
        Ok(Self { images })
    }

    pub fn order(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, t: usize) -> usize {
        self.images[t - 1]
    }

    /// `self ∘ other`, i.e. `other` acts first.
    pub fn compose(&self, other: &IndexPermutation) -> Result<Self> {
        if self.order() != other.order() {
            return Err(argument_error!(
                "cannot compose permutations of {} and {} points",
                self.order(),
                other.order()
            ));
        }
        Ok(Self {
            images: other.images.iter().map(|&t| self.apply(t)).collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.order()];
        for (t, &img) in self.images.iter().enumerate() {
            images[img - 1] = t + 1;
        }
        Self { images }
    }
}

/// Relabels every index of `p` through `sigma`.
pub fn apply_permutation(sigma: &IndexPermutation, p: &Pairing) -> Result<Pairing> {
    if sigma.order() != p.order() {
        return Err(argument_error!(
            "permutation of {} points applied to a pairing of order {}",
            sigma.order(),
            p.order()
        ));
    }
    Pairing::new(
        p.pairs()
            .iter()
            .map(|&(a, b)| (sigma.apply(a), sigma.apply(b))),
    )
}

/// Parity of `sigma` as `+1` or `-1`.
pub fn permutation_sign(sigma: &IndexPermutation) -> i32 {
    let m = sigma.order();
    let mut visited = vec![false; m];
    let mut transpositions = 0;
    for start in 0..m {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut t = start;
        while !visited[t] {
            visited[t] = true;
            t = sigma.images[t] - 1;
            len += 1;
        }
        transpositions += len - 1;
    }
    if transpositions % 2 == 0 {
        1
    } else {
        -1
    }
}
