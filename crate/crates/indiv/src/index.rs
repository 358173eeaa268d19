//! Finite index sets: plain label lists, lexicographic products, tagged
//! disjoint unions, and subset lattices. Positions (not labels) are the
//! working representation everywhere; labels exist for display and files.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::caps::MAX_GROUP_RING_INDEX;
use crate::error::{Error, Result};

/// Printable identity of a position in an index set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Atom(String),
    Tuple(Vec<Label>),
    Tagged(usize, Box<Label>),
    Subset(Vec<Label>),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Atom(s) => write!(f, "{s}"),
            Label::Tuple(items) => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, ")")
            }
            Label::Tagged(tag, inner) => write!(f, "{tag}:{inner}"),
            Label::Subset(items) => {
                write!(f, "{{")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
enum Node {
    Atoms { labels: Vec<String> },
    Product { factors: Vec<IndexSet> },
    Union { factors: Vec<IndexSet> },
    Subsets { of: IndexSet },
}

/// An ordered finite index set.
///
/// Products enumerate tuples lexicographically with the first factor most
/// significant; unions concatenate their blocks and tag every label with the
/// block number, so blocks with identical labels stay disjoint.
#[derive(Clone, PartialEq, Eq)]
pub struct IndexSet {
    node: Arc<Node>,
    len: usize,
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexSet(len={}, {:?})", self.len, self.node)
    }
}

impl Serialize for IndexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.node.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let node = Node::deserialize(d)?;
        IndexSet::from_node(node).map_err(serde::de::Error::custom)
    }
}

impl IndexSet {
    fn from_node(node: Node) -> Result<Self> {
        let len = match &node {
            Node::Atoms { labels } => {
                for (i, a) in labels.iter().enumerate() {
                    if labels[..i].contains(a) {
                        return Err(Error::DuplicateLabel(a.clone()));
                    }
                }
                labels.len()
            }
            Node::Product { factors } => factors.iter().map(|f| f.len).product(),
            Node::Union { factors } => factors.iter().map(|f| f.len).sum(),
            Node::Subsets { of } => {
                if of.len > MAX_GROUP_RING_INDEX {
                    return Err(Error::DimensionCap {
                        dim: of.len,
                        cap: MAX_GROUP_RING_INDEX,
                    });
                }
                1usize << of.len
            }
        };
        Ok(IndexSet {
            node: Arc::new(node),
            len,
        })
    }

    pub fn atoms<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_node(Node::Atoms {
            labels: labels.into_iter().map(Into::into).collect(),
        })
    }

    /// `n` atoms labelled `0..n-1`.
    pub fn numbered(n: usize) -> Self {
        Self::atoms((0..n).map(|i| i.to_string())).expect("numbered labels are distinct")
    }

    /// The one-point set: the empty product.
    pub fn point() -> Self {
        Self::from_node(Node::Product { factors: vec![] }).expect("point always builds")
    }

    /// Lexicographic product. A single factor is returned unchanged.
    pub fn product(factors: Vec<IndexSet>) -> Self {
        if factors.len() == 1 {
            return factors.into_iter().next().unwrap();
        }
        Self::from_node(Node::Product { factors }).expect("products always build")
    }

    /// Tagged disjoint union (always tagged, even with one block).
    pub fn union(factors: Vec<IndexSet>) -> Self {
        Self::from_node(Node::Union { factors }).expect("unions always build")
    }

    /// The lattice of subsets of `of`, ordered by bitmask value.
    pub fn subsets(of: IndexSet) -> Result<Self> {
        Self::from_node(Node::Subsets { of })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn label(&self, pos: usize) -> Label {
        assert!(pos < self.len, "position {pos} out of range {}", self.len);
        match &*self.node {
            Node::Atoms { labels } => Label::Atom(labels[pos].clone()),
            Node::Product { factors } => {
                let coords = self.decode_product(pos);
                Label::Tuple(
                    coords
                        .iter()
                        .zip(factors)
                        .map(|(&c, f)| f.label(c))
                        .collect(),
                )
            }
            Node::Union { .. } => {
                let (block, inner) = self.decode_union(pos);
                Label::Tagged(block, Box::new(self.union_blocks()[block].label(inner)))
            }
            Node::Subsets { of } => {
                let members = (0..of.len)
                    .filter(|i| pos & (1 << i) != 0)
                    .map(|i| of.label(i))
                    .collect();
                Label::Subset(members)
            }
        }
    }

    pub fn labels(&self) -> Vec<Label> {
        (0..self.len).map(|i| self.label(i)).collect()
    }

    pub fn product_factors(&self) -> Option<&[IndexSet]> {
        match &*self.node {
            Node::Product { factors } => Some(factors),
            _ => None,
        }
    }

    pub fn union_blocks(&self) -> &[IndexSet] {
        match &*self.node {
            Node::Union { factors } => factors,
            _ => std::slice::from_ref(self),
        }
    }

    pub fn is_union(&self) -> bool {
        matches!(&*self.node, Node::Union { .. })
    }

    pub fn subsets_of(&self) -> Option<&IndexSet> {
        match &*self.node {
            Node::Subsets { of } => Some(of),
            _ => None,
        }
    }

    /// Mixed-radix decode of a product position, first factor most significant.
    pub fn decode_product(&self, pos: usize) -> Vec<usize> {
        let factors = self
            .product_factors()
            .expect("decode_product on non-product");
        let mut coords = vec![0usize; factors.len()];
        let mut rest = pos;
        for (i, f) in factors.iter().enumerate().rev() {
            coords[i] = rest % f.len;
            rest /= f.len;
        }
        coords
    }

    pub fn encode_product(&self, coords: &[usize]) -> usize {
        let factors = self
            .product_factors()
            .expect("encode_product on non-product");
        assert_eq!(coords.len(), factors.len());
        let mut pos = 0usize;
        for (c, f) in coords.iter().zip(factors) {
            debug_assert!(*c < f.len);
            pos = pos * f.len + c;
        }
        pos
    }

    pub fn decode_union(&self, pos: usize) -> (usize, usize) {
        let blocks = match &*self.node {
            Node::Union { factors } => factors,
            _ => panic!("decode_union on non-union"),
        };
        let mut rest = pos;
        for (b, f) in blocks.iter().enumerate() {
            if rest < f.len {
                return (b, rest);
            }
            rest -= f.len;
        }
        panic!("position out of range");
    }

    pub fn encode_union(&self, block: usize, inner: usize) -> usize {
        let blocks = match &*self.node {
            Node::Union { factors } => factors,
            _ => panic!("encode_union on non-union"),
        };
        let offset: usize = blocks[..block].iter().map(|f| f.len).sum();
        debug_assert!(inner < blocks[block].len);
        offset + inner
    }
}

/// `p^n_i`: drop coordinate `i` (0-based) from a tuple.
pub fn proj_coords(coords: &[usize], i: usize) -> Result<Vec<usize>> {
    if i >= coords.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            arity: coords.len(),
        });
    }
    let mut out = coords.to_vec();
    out.remove(i);
    Ok(out)
}

/// `t_i^{s'}`: insert `value` at slot `i` (0-based) of the base tuple.
pub fn insert_coord(base: &[usize], i: usize, value: usize) -> Result<Vec<usize>> {
    if i > base.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            arity: base.len() + 1,
        });
    }
    let mut out = base.to_vec();
    out.insert(i, value);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_lex_order() {
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        let t = IndexSet::numbered(3);
        let p = IndexSet::product(vec![s, t]);
        assert_eq!(p.len(), 6);
        // first factor most significant
        assert_eq!(p.label(0).to_string(), "(a,0)");
        assert_eq!(p.label(2).to_string(), "(a,2)");
        assert_eq!(p.label(3).to_string(), "(b,0)");
        assert_eq!(p.encode_product(&[1, 2]), 5);
        assert_eq!(p.decode_product(5), vec![1, 2]);
    }

    #[test]
    fn single_factor_product_normalizes() {
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        assert_eq!(IndexSet::product(vec![s.clone()]), s);
    }

    #[test]
    fn point_has_one_position() {
        let pt = IndexSet::point();
        assert_eq!(pt.len(), 1);
        assert_eq!(pt.label(0).to_string(), "()");
    }

    #[test]
    fn union_tags_blocks() {
        let s = IndexSet::atoms(["a"]).unwrap();
        let t = IndexSet::atoms(["a", "b"]).unwrap();
        let u = IndexSet::union(vec![s, t]);
        assert_eq!(u.len(), 3);
        assert_eq!(u.label(0).to_string(), "0:a");
        assert_eq!(u.label(1).to_string(), "1:a");
        assert_eq!(u.decode_union(2), (1, 1));
        assert_eq!(u.encode_union(1, 1), 2);
    }

    #[test]
    fn subsets_by_mask() {
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        let sub = IndexSet::subsets(s).unwrap();
        assert_eq!(sub.len(), 4);
        assert_eq!(sub.label(0).to_string(), "{}");
        assert_eq!(sub.label(3).to_string(), "{a,b}");
    }

    #[test]
    fn duplicate_atoms_rejected() {
        assert!(matches!(
            IndexSet::atoms(["a", "a"]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn proj_and_insert_are_inverse() {
        let t = vec![4usize, 7, 9];
        assert_eq!(proj_coords(&t, 1).unwrap(), vec![4, 9]);
        assert_eq!(insert_coord(&[4, 9], 1, 7).unwrap(), t);
        assert!(proj_coords(&t, 3).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        let p = IndexSet::product(vec![s.clone(), IndexSet::numbered(2)]);
        let u = IndexSet::union(vec![p.clone(), s.clone()]);
        let sub = IndexSet::subsets(s).unwrap();
        for set in [p, u, sub] {
            let json = serde_json::to_string(&set).unwrap();
            let back: IndexSet = serde_json::from_str(&json).unwrap();
            assert_eq!(back, set);
            assert_eq!(back.len(), set.len());
        }
    }
}
