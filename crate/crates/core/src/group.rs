//! The three supported finite groups: symmetric groups in one-line notation,
//! elementary abelian 2-groups as bit strings, and cyclic groups as residues.
//!
//! Permutations compose as `(gh)(i) = g(h(i))`. Elements are always enumerated
//! in lexicographic order, and that order is what every distance matrix and
//! kernel in this crate is indexed by.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of elements a dense enumeration may produce.
/// `S_8` (40,320 elements) fits, `S_9` does not.
pub const DEFAULT_ENUMERATION_CAP: usize = 50_000;

const MAX_SYMMETRIC_DEGREE: usize = 30;
const MAX_C2_RANK: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupSpec {
    Symmetric { n: usize },
    ElementaryAbelian2 { k: usize },
    Cyclic { n: usize },
}

impl GroupSpec {
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::Symmetric { n }.validated()
    }

    pub fn elementary_abelian_2(k: usize) -> Result<Self> {
        Self::ElementaryAbelian2 { k }.validated()
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::Cyclic { n }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Symmetric { n } if n == 0 || n > MAX_SYMMETRIC_DEGREE => Err(Error::InvalidGroup(
                format!("symmetric(n) needs 1 <= n <= {MAX_SYMMETRIC_DEGREE}, got {n}"),
            )),
            Self::ElementaryAbelian2 { k } if k == 0 || k > MAX_C2_RANK => Err(Error::InvalidGroup(
                format!("elementary-abelian-2(k) needs 1 <= k <= {MAX_C2_RANK}, got {k}"),
            )),
            Self::Cyclic { n: 0 } => Err(Error::InvalidGroup("cyclic(n) needs n >= 1".into())),
            ok => Ok(ok),
        }
    }

    pub fn order(&self) -> u128 {
        match *self {
            Self::Symmetric { n } => factorial(n),
            Self::ElementaryAbelian2 { k } => 1u128 << k,
            Self::Cyclic { n } => n as u128,
        }
    }

    pub fn is_abelian(&self) -> bool {
        match *self {
            Self::Symmetric { n } => n <= 2,
            _ => true,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match *self {
            Self::Symmetric { n } => GroupElement::Permutation((1..=n).collect()),
            Self::ElementaryAbelian2 { k } => GroupElement::Bits { k, mask: 0 },
            Self::Cyclic { .. } => GroupElement::Residue(0),
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.check(g).is_ok()
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        match (*self, g) {
            (Self::Symmetric { n }, GroupElement::Permutation(p)) => {
                if p.len() != n {
                    return Err(Error::InvalidElement(format!(
                        "permutation of length {} in S_{n}",
                        p.len()
                    )));
                }
                let mut seen = vec![false; n + 1];
                for &v in p {
                    if v == 0 || v > n || seen[v] {
                        return Err(Error::InvalidElement(format!(
                            "{} is not a permutation of 1..{n}",
                            g
                        )));
                    }
                    seen[v] = true;
                }
                Ok(())
            }
            (Self::ElementaryAbelian2 { k }, GroupElement::Bits { k: bk, mask }) => {
                if *bk != k || (k < 64 && mask >> k != 0) {
                    return Err(Error::InvalidElement(format!("{g} is not an element of C_2^{k}")));
                }
                Ok(())
            }
            (Self::Cyclic { n }, GroupElement::Residue(r)) => {
                if *r as usize >= n {
                    return Err(Error::InvalidElement(format!("residue {r} not in 0..{n}")));
                }
                Ok(())
            }
            _ => Err(Error::InvalidElement(format!("{g} does not belong to {self}"))),
        }
    }

    /// Parses the text form used by the CLI and file formats.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let text = text.trim();
        let g = match *self {
            Self::Symmetric { .. } => {
                let images = text
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::InvalidElement(format!("{text:?}: {e}")))?;
                GroupElement::Permutation(images)
            }
            Self::ElementaryAbelian2 { k } => {
                let mut mask = 0u64;
                for c in text.chars() {
                    mask = (mask << 1)
                        | match c {
                            '0' => 0,
                            '1' => 1,
                            _ => return Err(Error::InvalidElement(format!("bad bit string {text:?}"))),
                        };
                }
                if text.len() != k {
                    return Err(Error::InvalidElement(format!("{text:?} is not {k} bits long")));
                }
                GroupElement::Bits { k, mask }
            }
            Self::Cyclic { .. } => GroupElement::Residue(
                text.parse()
                    .map_err(|e| Error::InvalidElement(format!("{text:?}: {e}")))?,
            ),
        };
        self.check(&g)?;
        Ok(g)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Symmetric { n } => write!(f, "S_{n}"),
            Self::ElementaryAbelian2 { k } => write!(f, "C_2^{k}"),
            Self::Cyclic { n } => write!(f, "C_{n}"),
        }
    }
}

/// A group element. Bit strings store position 1 (the leftmost character)
/// in the most significant of the `k` bits, so integer order is string order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupElement {
    Permutation(Vec<usize>),
    Bits { k: usize, mask: u64 },
    Residue(u64),
}

impl GroupElement {
    pub fn as_permutation(&self) -> Option<&[usize]> {
        match self {
            Self::Permutation(p) => Some(p),
            _ => None,
        }
    }

    /// Bit at 1-based position `pos` of a bit-string element.
    pub fn bit(&self, pos: usize) -> Option<bool> {
        match *self {
            Self::Bits { k, mask } if (1..=k).contains(&pos) => Some((mask >> (k - pos)) & 1 == 1),
            _ => None,
        }
    }

    /// Cycle notation, e.g. `(1 2 3)`; the identity prints as `()`.
    pub fn cycle_notation(&self) -> Option<String> {
        let p = self.as_permutation()?;
        let cycles = cycles_of(p);
        let mut out = String::new();
        for c in cycles.iter().filter(|c| c.len() > 1) {
            out.push('(');
            let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            out.push_str(&parts.join(" "));
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        Some(out)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Permutation(p) => {
                let parts: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            Self::Bits { k, mask } => {
                for pos in 1..=*k {
                    write!(f, "{}", (mask >> (k - pos)) & 1)?;
                }
                Ok(())
            }
            Self::Residue(r) => write!(f, "{r}"),
        }
    }
}

/// Weakly decreasing sequence of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidLabel(format!("partition {parts:?} needs positive parts")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidLabel(format!("partition {parts:?} is not weakly decreasing")));
        }
        Ok(Self { parts })
    }

    /// Sorts the parts and drops zeros.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Conjugacy class size in `S_n`: `n! / prod(i^m_i * m_i!)`.
    pub fn class_size(&self) -> u128 {
        factorial(self.n()) / self.centralizer_order()
    }

    pub fn centralizer_order(&self) -> u128 {
        let mut z: u128 = 1;
        let mut i = 0;
        while i < self.parts.len() {
            let part = self.parts[i];
            let mut m = 0;
            while i < self.parts.len() && self.parts[i] == part {
                m += 1;
                i += 1;
            }
            z *= (part as u128).pow(m as u32) * factorial(m);
        }
        z
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    CycleType(Partition),
    Element(GroupElement),
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CycleType(p) => write!(f, "{p}"),
            Self::Element(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugacyClass {
    pub representative: GroupElement,
    pub size: u128,
    pub label: ClassLabel,
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub fn multiply(spec: &GroupSpec, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    spec.check(g)?;
    spec.check(h)?;
    Ok(multiply_unchecked(spec, g, h))
}

pub(crate) fn multiply_unchecked(spec: &GroupSpec, g: &GroupElement, h: &GroupElement) -> GroupElement {
    match (g, h) {
        (GroupElement::Permutation(a), GroupElement::Permutation(b)) => {
            GroupElement::Permutation(b.iter().map(|&i| a[i - 1]).collect())
        }
        (GroupElement::Bits { k, mask: a }, GroupElement::Bits { mask: b, .. }) => {
            GroupElement::Bits { k: *k, mask: a ^ b }
        }
        (GroupElement::Residue(a), GroupElement::Residue(b)) => {
            let GroupSpec::Cyclic { n } = *spec else { unreachable!("checked by caller") };
            GroupElement::Residue((a + b) % n as u64)
        }
        _ => unreachable!("checked by caller"),
    }
}

pub fn inverse(spec: &GroupSpec, g: &GroupElement) -> Result<GroupElement> {
    spec.check(g)?;
    Ok(inverse_unchecked(spec, g))
}

pub(crate) fn inverse_unchecked(spec: &GroupSpec, g: &GroupElement) -> GroupElement {
    match g {
        GroupElement::Permutation(p) => {
            let mut inv = vec![0; p.len()];
            for (i, &v) in p.iter().enumerate() {
                inv[v - 1] = i + 1;
            }
            GroupElement::Permutation(inv)
        }
        GroupElement::Bits { .. } => g.clone(),
        GroupElement::Residue(r) => {
            let GroupSpec::Cyclic { n } = *spec else { unreachable!("checked by caller") };
            GroupElement::Residue((n as u64 - r) % n as u64)
        }
    }
}

/// `h g h^-1`.
pub fn conjugate(spec: &GroupSpec, h: &GroupElement, g: &GroupElement) -> Result<GroupElement> {
    let hg = multiply(spec, h, g)?;
    Ok(multiply_unchecked(spec, &hg, &inverse_unchecked(spec, h)))
}

pub fn enumerate_elements(spec: &GroupSpec) -> Result<Vec<GroupElement>> {
    enumerate_elements_with_cap(spec, DEFAULT_ENUMERATION_CAP)
}

/// All elements in lexicographic order.
pub fn enumerate_elements_with_cap(spec: &GroupSpec, cap: usize) -> Result<Vec<GroupElement>> {
    let order = spec.order();
    if order > cap as u128 {
        return Err(Error::TooLarge { order, cap });
    }
    Ok(match *spec {
        GroupSpec::Symmetric { n } => {
            let mut out = Vec::with_capacity(order as usize);
            let mut p: Vec<usize> = (1..=n).collect();
            loop {
                out.push(GroupElement::Permutation(p.clone()));
                if !next_permutation(&mut p) {
                    break;
                }
            }
            out
        }
        GroupSpec::ElementaryAbelian2 { k } => {
            (0..order as u64).map(|mask| GroupElement::Bits { k, mask }).collect()
        }
        GroupSpec::Cyclic { n } => (0..n as u64).map(GroupElement::Residue).collect(),
    })
}

/// Position of `g` in the lexicographic enumeration (Lehmer rank for permutations).
pub fn element_index(spec: &GroupSpec, g: &GroupElement) -> Result<usize> {
    spec.check(g)?;
    Ok(match g {
        GroupElement::Permutation(p) => {
            let n = p.len();
            let mut rank = 0usize;
            for i in 0..n {
                let smaller = p[i + 1..].iter().filter(|&&v| v < p[i]).count();
                rank += smaller * factorial(n - 1 - i) as usize;
            }
            rank
        }
        GroupElement::Bits { mask, .. } => *mask as usize,
        GroupElement::Residue(r) => *r as usize,
    })
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&v| v > p[i]).expect("pivot has a successor");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

pub fn random_element<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> GroupElement {
    match *spec {
        GroupSpec::Symmetric { n } => {
            let mut p: Vec<usize> = (1..=n).collect();
            p.shuffle(rng);
            GroupElement::Permutation(p)
        }
        GroupSpec::ElementaryAbelian2 { k } => {
            let mask = if k == 64 { rng.gen() } else { rng.gen::<u64>() & ((1u64 << k) - 1) };
            GroupElement::Bits { k, mask }
        }
        GroupSpec::Cyclic { n } => GroupElement::Residue(rng.gen_range(0..n as u64)),
    }
}

fn cycles_of(p: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; p.len()];
    let mut cycles = Vec::new();
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i + 1);
            i = p[i] - 1;
        }
        cycles.push(cycle);
    }
    cycles
}

pub fn cycle_type(g: &GroupElement) -> Result<Partition> {
    let p = g
        .as_permutation()
        .ok_or_else(|| Error::InvalidElement(format!("{g} is not a permutation")))?;
    GroupSpec::Symmetric { n: p.len() }.check(g)?;
    Partition::from_unsorted(cycles_of(p).iter().map(Vec::len).collect())
}

pub fn fixed_points(p: &[usize]) -> usize {
    p.iter().enumerate().filter(|&(i, &v)| v == i + 1).count()
}

/// All partitions of `n` in reverse-lexicographic order (`[n]` first, `[1^n]` last).
pub fn partitions_of(n: usize) -> Vec<Partition> {
    fn rec(remaining: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: prefix.clone() });
            return;
        }
        for first in (1..=remaining.min(max)).rev() {
            prefix.push(first);
            rec(remaining - first, first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Permutation in `S_n` whose cycles are consecutive runs of the given lengths.
pub fn permutation_of_cycle_type(shape: &Partition) -> GroupElement {
    let mut p = Vec::with_capacity(shape.n());
    let mut start = 1;
    for &len in shape.parts() {
        for j in 0..len {
            p.push(start + (j + 1) % len);
        }
        start += len;
    }
    GroupElement::Permutation(p)
}

/// Conjugacy classes. For `S_n` one class per partition, identity class first
/// (ascending lexicographic order of cycle types); abelian groups get one
/// singleton class per element in enumeration order.
pub fn conjugacy_classes(spec: &GroupSpec) -> Result<Vec<ConjugacyClass>> {
    let spec = spec.validated()?;
    Ok(match spec {
        GroupSpec::Symmetric { n } => class_partitions(n)
            .into_iter()
            .map(|shape| ConjugacyClass {
                representative: permutation_of_cycle_type(&shape),
                size: shape.class_size(),
                label: ClassLabel::CycleType(shape),
            })
            .collect(),
        _ => enumerate_elements_with_cap(&spec, usize::MAX)?
            .into_iter()
            .map(|g| ConjugacyClass {
                representative: g.clone(),
                size: 1,
                label: ClassLabel::Element(g),
            })
            .collect(),
    })
}

/// Cycle types in class order (ascending lexicographic).
pub(crate) fn class_partitions(n: usize) -> Vec<Partition> {
    let mut parts = partitions_of(n);
    parts.reverse();
    parts
}

pub fn class_count(spec: &GroupSpec) -> u128 {
    match *spec {
        GroupSpec::Symmetric { n } => partitions_of(n).len() as u128,
        _ => spec.order(),
    }
}

/// Index of the conjugacy class containing `g`, matching [`conjugacy_classes`] order.
pub fn class_index(spec: &GroupSpec, g: &GroupElement) -> Result<usize> {
    spec.check(g)?;
    match spec {
        GroupSpec::Symmetric { n } => {
            let shape = cycle_type(g)?;
            class_partitions(*n)
                .binary_search(&shape)
                .map_err(|_| Error::InvalidElement(format!("no class for {g}")))
        }
        _ => element_index(spec, g),
    }
}
