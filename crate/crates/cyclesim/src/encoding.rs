//! Edge-bitmask coding of Hamiltonian cycles.
//!
//! A cycle over vertices `1..=m` inside an `n`-vertex problem is coded as a
//! set of edges: one bit per edge of the complete graph, `E = n(n-1)/2` bits
//! in total. The bit list is grouped by the higher vertex of the edge and,
//! within a group, ordered by the lower vertex:
//!
//! ```text
//! position:  1     2     3     4     5     6     7   ...
//! edge:     (2,1) (3,1) (3,2) (4,1) (4,2) (4,3) (5,1) ...
//! ```
//!
//! With this ordering a cycle over the first `m` vertices uses only the
//! positions `1..=m(m-1)/2`; every bit above that is zero. Positions are
//! 1-based on every public surface.

use crate::bits;
use crate::error::{Error, Result};

/// Largest vertex count whose edge register fits the 128-bit masks.
pub const MAX_VERTICES: u32 = 16;

/// Number of edge bits used by an `n`-vertex register.
pub fn edge_count(n: u32) -> u32 {
    n * (n - 1) / 2
}

/// Position of edge `(i,k)`, `i > k`, ignoring any upper bound on `i`.
pub(crate) fn position_of_edge(i: u32, k: u32) -> u32 {
    debug_assert!(k >= 1 && k < i);
    (i - 1) * (i - 2) / 2 + k
}

/// Inverse of [`position_of_edge`], by the summation procedure: add the
/// integers 1 + 2 + ... until the sum reaches `l`; the number of terms plus
/// one gives the higher vertex, and the distance of `l` from the previous
/// partial sum gives the lower one.
pub(crate) fn edge_of_position(l: u32) -> (u32, u32) {
    debug_assert!(l >= 1);
    let mut sum = 0u32;
    let mut terms = 0u32;
    while sum < l {
        terms += 1;
        sum += terms;
    }
    let i = terms + 1;
    let k = l - (sum - terms);
    (i, k)
}

/// Bijection between edge-bit positions and vertex pairs for a fixed `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeIndexer {
    n: u32,
    e: u32,
}

impl EdgeIndexer {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::VertexCountTooSmall(n));
        }
        Ok(Self { n, e: edge_count(n) })
    }

    /// Vertex count of the register.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total number of edge positions, `n(n-1)/2`.
    pub fn edge_count(&self) -> u32 {
        self.e
    }

    /// Bit position of edge `(i,k)` with `1 <= k < i <= n`.
    pub fn edge_to_index(&self, i: u32, k: u32) -> Result<u32> {
        if k < 1 || k >= i || i > self.n {
            return Err(Error::InvalidEdge { i, k, n: self.n });
        }
        Ok(position_of_edge(i, k))
    }

    /// Vertex pair `(i,k)`, `i > k`, coded at bit position `l`.
    pub fn index_to_edge(&self, l: u32) -> Result<(u32, u32)> {
        if l < 1 || l > self.e {
            return Err(Error::PositionOutOfRange { l, e: self.e });
        }
        Ok(edge_of_position(l))
    }
}

/// Bitmask over the edge register. Bit `l` is set iff the edge at position
/// `l` belongs to the coded cycle.
///
/// The raw storage puts position 1 at the most significant bit, so the
/// derived `Ord` agrees with lexicographic order on the serialized bit
/// strings of a fixed width.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PathMask(u128);

impl PathMask {
    pub const EMPTY: PathMask = PathMask(0);

    /// Mask with exactly the given positions set.
    pub fn from_positions<I: IntoIterator<Item = u32>>(positions: I) -> Result<Self> {
        let mut raw = 0u128;
        for pos in positions {
            if !(1..=bits::MAX_WIDTH).contains(&pos) {
                return Err(Error::PositionOutOfRange {
                    l: pos,
                    e: bits::MAX_WIDTH,
                });
            }
            bits::set(&mut raw, pos);
        }
        Ok(PathMask(raw))
    }

    pub fn get(&self, pos: u32) -> bool {
        bits::get(self.0, pos)
    }

    pub(crate) fn raw(&self) -> u128 {
        self.0
    }

    pub fn set(&mut self, pos: u32) {
        bits::set(&mut self.0, pos);
    }

    pub fn clear(&mut self, pos: u32) {
        bits::clear(&mut self.0, pos);
    }

    pub fn toggle(&mut self, pos: u32) {
        bits::toggle(&mut self.0, pos);
    }

    pub fn count_ones(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Set positions, ascending.
    pub fn set_positions(&self) -> impl Iterator<Item = u32> {
        bits::set_positions(self.0)
    }

    /// Highest set position, if any.
    pub fn highest_set(&self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(128 - self.0.trailing_zeros())
        }
    }

    /// Plain bit string, position 1 leftmost: `"111000"`.
    pub fn to_bit_string(&self, width: u32) -> String {
        bits::to_bit_string(self.0, width)
    }

    /// Bit string grouped by higher vertex, as in `"1 11 000"` for the
    /// 3-cycle within an `n = 4` register.
    pub fn to_grouped_string(&self, n: u32) -> String {
        let mut groups = Vec::with_capacity(n.saturating_sub(1) as usize);
        for v in 2..=n {
            let lo = position_of_edge(v, 1);
            let hi = position_of_edge(v, v - 1);
            groups.push((lo..=hi).map(|p| if self.get(p) { '1' } else { '0' }).collect::<String>());
        }
        groups.join(" ")
    }

    /// Compact hex form of the same bit string (see [`PathMask::to_bit_string`]),
    /// padded with zero bits on the right to a whole number of nibbles.
    pub fn to_hex_string(&self, width: u32) -> String {
        bits::to_hex_string(self.0, width)
    }

    /// Parses a plain bit string; returns the mask and the width read.
    pub fn from_bit_string(s: &str) -> Result<(Self, u32)> {
        let (raw, width) = bits::from_bit_string(s)?;
        Ok((PathMask(raw), width))
    }

    /// Parses a grouped bit string such as `"1 11 000"`.
    pub fn from_grouped_string(s: &str) -> Result<(Self, u32)> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        Self::from_bit_string(&compact)
    }

    pub fn from_hex_string(s: &str, width: u32) -> Result<Self> {
        Ok(PathMask(bits::from_hex_string(s, width)?))
    }

    /// Self-contained grouped form carrying the register size, e.g.
    /// `"4:1 11 000"`.
    pub fn to_tagged_grouped_string(&self, n: u32) -> String {
        format!("{n}:{}", self.to_grouped_string(n))
    }

    /// Self-contained hex form carrying the register size, e.g. `"4:e0"`.
    pub fn to_tagged_hex_string(&self, n: u32) -> String {
        format!("{n}:{}", self.to_hex_string(edge_count(n)))
    }

    /// Parses either tagged form; returns the mask and its register size.
    pub fn from_tagged_string(s: &str) -> Result<(Self, u32)> {
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| Error::MaskParse(format!("missing n tag in {s:?}")))?;
        let n: u32 = head
            .parse()
            .map_err(|_| Error::MaskParse(format!("bad vertex count {head:?}")))?;
        if n < 3 {
            return Err(Error::VertexCountTooSmall(n));
        }
        let e = edge_count(n);
        if e > bits::MAX_WIDTH {
            return Err(Error::RegisterTooWide { n, bits: e, max: bits::MAX_WIDTH });
        }
        let mask = if body.chars().all(|c| c == '0' || c == '1' || c.is_whitespace()) {
            let (mask, width) = Self::from_grouped_string(body)?;
            if width != e {
                return Err(Error::MaskParse(format!(
                    "bit string has {width} positions, n={n} needs {e}"
                )));
            }
            mask
        } else {
            Self::from_hex_string(body.trim(), e)?
        };
        Ok((mask, n))
    }
}

impl std::fmt::Debug for PathMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PathMask{{{:?}}}", self.set_positions().collect::<Vec<_>>())
    }
}

/// Decodes a level-`m` mask into a tour `(1, v_2, ..., v_m)`.
///
/// Cycles are undirected; the orientation is canonicalized so that the
/// neighbor of vertex 1 with the smaller index comes second. Fails with
/// [`Error::NotACycle`] unless the set edges form a single closed tour
/// through vertices `1..=m`.
pub fn decode_cycle(mask: &PathMask, m: u32) -> Result<Vec<u32>> {
    if m < 3 {
        return Err(Error::NotACycle(format!("level {m} is below the 3-cycle")));
    }
    let ones = mask.count_ones();
    if ones != m {
        return Err(Error::NotACycle(format!(
            "level-{m} cycle needs exactly {m} set bits, found {ones}"
        )));
    }
    let limit = edge_count(m);
    if let Some(hi) = mask.highest_set() {
        if hi > limit {
            return Err(Error::NotACycle(format!(
                "position {hi} exceeds {limit}, the last edge among vertices 1..={m}"
            )));
        }
    }

    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); m as usize + 1];
    for l in mask.set_positions() {
        let (i, k) = edge_of_position(l);
        adj[i as usize].push(k);
        adj[k as usize].push(i);
    }
    for v in 1..=m {
        let d = adj[v as usize].len();
        if d != 2 {
            return Err(Error::NotACycle(format!("vertex {v} has degree {d}")));
        }
    }

    // Walk from vertex 1, taking its smaller neighbor first.
    let mut tour = Vec::with_capacity(m as usize);
    tour.push(1u32);
    let mut prev = 1u32;
    let mut cur = *adj[1].iter().min().unwrap();
    while cur != 1 {
        tour.push(cur);
        let nbrs = &adj[cur as usize];
        let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
        prev = cur;
        cur = next;
    }
    if tour.len() != m as usize {
        return Err(Error::NotACycle(format!(
            "edges split into more than one cycle; walk from vertex 1 visited {} of {m} vertices",
            tour.len()
        )));
    }
    Ok(tour)
}

/// Encodes a tour over vertices `1..=m` as its edge mask. Exactly `m` bits
/// come out set, all within positions `1..=m(m-1)/2`.
pub fn encode_cycle(tour: &[u32]) -> Result<PathMask> {
    let m = tour.len();
    if m < 3 {
        return Err(Error::InvalidTour(format!(
            "a cycle needs at least 3 vertices, got {m}"
        )));
    }
    let mut seen = vec![false; m + 1];
    for &v in tour {
        if v < 1 || v as usize > m {
            return Err(Error::InvalidTour(format!(
                "vertex {v} outside 1..={m}; a level-{m} tour is a permutation of 1..={m}"
            )));
        }
        if seen[v as usize] {
            return Err(Error::InvalidTour(format!("vertex {v} repeats")));
        }
        seen[v as usize] = true;
    }
    let mut mask = PathMask::EMPTY;
    for idx in 0..m {
        let a = tour[idx];
        let b = tour[(idx + 1) % m];
        mask.set(position_of_edge(a.max(b), a.min(b)));
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_to_index_grouped_order() {
        let ix = EdgeIndexer::new(4).unwrap();
        assert_eq!(ix.edge_to_index(2, 1).unwrap(), 1);
        assert_eq!(ix.edge_to_index(3, 2).unwrap(), 3);
        assert_eq!(ix.edge_to_index(4, 1).unwrap(), 4);
    }

    #[test]
    fn edge_to_index_rejects_bad_pairs() {
        let ix = EdgeIndexer::new(5).unwrap();
        assert!(ix.edge_to_index(3, 3).is_err());
        assert!(ix.edge_to_index(2, 4).is_err());
        assert!(ix.edge_to_index(3, 0).is_err());
        assert!(ix.edge_to_index(6, 1).is_err());
    }

    #[test]
    fn index_to_edge_examples() {
        let ix = EdgeIndexer::new(5).unwrap();
        assert_eq!(ix.index_to_edge(1).unwrap(), (2, 1));
        assert_eq!(ix.index_to_edge(6).unwrap(), (4, 3));
        assert!(ix.index_to_edge(0).is_err());
        assert!(ix.index_to_edge(11).is_err());
    }

    /// Independent oracle: list the edges by the grouping rule and read off
    /// position 5 directly.
    #[test]
    fn index_to_edge_position_five_against_listing() {
        let mut listing = Vec::new();
        for i in 2..=5u32 {
            for k in 1..i {
                listing.push((i, k));
            }
        }
        assert_eq!(listing[4], (4, 2));
        let ix = EdgeIndexer::new(5).unwrap();
        assert_eq!(ix.index_to_edge(5).unwrap(), (4, 2));
    }

    #[test]
    fn round_trip_all_positions_up_to_n_50() {
        for n in 3..=50u32 {
            let ix = EdgeIndexer::new(n).unwrap();
            for l in 1..=ix.edge_count() {
                let (i, k) = ix.index_to_edge(l).unwrap();
                assert!(1 <= k && k < i && i <= n);
                assert_eq!(ix.edge_to_index(i, k).unwrap(), l);
            }
        }
    }

    #[test]
    fn decode_the_triangle() {
        let mask = PathMask::from_positions([1, 2, 3]).unwrap();
        assert_eq!(decode_cycle(&mask, 3).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn decode_four_cycle_from_level_mapping() {
        let mask = PathMask::from_positions([2, 3, 4, 5]).unwrap();
        assert_eq!(decode_cycle(&mask, 4).unwrap(), vec![1, 3, 2, 4]);
    }

    #[test]
    fn decode_rejects_degree_violation() {
        let mask = PathMask::from_positions([1, 2, 3, 4]).unwrap();
        let err = decode_cycle(&mask, 4).unwrap_err();
        assert!(matches!(err, Error::NotACycle(ref s) if s.contains("vertex 1 has degree 3")));
    }

    #[test]
    fn decode_rejects_split_cycles() {
        // Triangle 1-2-3 plus triangle 4-5-6: six bits, degree 2 everywhere,
        // but two components.
        let tri123 = [1, 2, 3];
        let tri456 = [
            position_of_edge(5, 4),
            position_of_edge(6, 4),
            position_of_edge(6, 5),
        ];
        let mask = PathMask::from_positions(tri123.into_iter().chain(tri456)).unwrap();
        let err = decode_cycle(&mask, 6).unwrap_err();
        assert!(matches!(err, Error::NotACycle(ref s) if s.contains("more than one cycle")));
    }

    #[test]
    fn encode_examples() {
        assert_eq!(
            encode_cycle(&[1, 2, 3]).unwrap(),
            PathMask::from_positions([1, 2, 3]).unwrap()
        );
        assert_eq!(
            encode_cycle(&[1, 3, 2, 4]).unwrap(),
            PathMask::from_positions([2, 3, 4, 5]).unwrap()
        );
    }

    /// Derived from the index arithmetic: the tour (1,2,4,3) has edges
    /// (2,1), (4,2), (4,3), (3,1) sitting at positions 1, 5, 6, 2.
    #[test]
    fn encode_tour_1_2_4_3() {
        let expect: Vec<u32> = [(2u32, 1u32), (4, 2), (4, 3), (3, 1)]
            .iter()
            .map(|&(i, k)| EdgeIndexer::new(4).unwrap().edge_to_index(i, k).unwrap())
            .collect();
        assert_eq!(expect, vec![1, 5, 6, 2]);
        assert_eq!(
            encode_cycle(&[1, 2, 4, 3]).unwrap(),
            PathMask::from_positions(expect).unwrap()
        );
    }

    #[test]
    fn encode_rejects_bad_tours() {
        assert!(encode_cycle(&[1, 2]).is_err());
        assert!(encode_cycle(&[1, 2, 2]).is_err());
        assert!(encode_cycle(&[1, 2, 5]).is_err());
    }

    #[test]
    fn grouped_string_matches_ket_layout() {
        let mask = PathMask::from_positions([1, 2, 3]).unwrap();
        assert_eq!(mask.to_grouped_string(4), "1 11 000");
        assert_eq!(mask.to_bit_string(6), "111000");
        assert_eq!(mask.to_hex_string(6), "e0");
        let (back, width) = PathMask::from_grouped_string("1 11 000").unwrap();
        assert_eq!(back, mask);
        assert_eq!(width, 6);
    }

    #[test]
    fn tagged_forms_carry_n() {
        let mask = PathMask::from_positions([2, 3, 4, 5]).unwrap();
        assert_eq!(mask.to_tagged_grouped_string(4), "4:0 11 110");
        assert_eq!(mask.to_tagged_hex_string(4), "4:78");
        for text in ["4:0 11 110", "4:78"] {
            let (back, n) = PathMask::from_tagged_string(text).unwrap();
            assert_eq!((back, n), (mask, 4));
        }
        assert!(PathMask::from_tagged_string("0 11 110").is_err());
        assert!(PathMask::from_tagged_string("4:0 11").is_err());
    }

    #[test]
    fn valid_level_masks_stay_in_their_group_prefix() {
        for m in 3..=6u32 {
            let tour: Vec<u32> = (1..=m).collect();
            let mask = encode_cycle(&tour).unwrap();
            assert_eq!(mask.count_ones(), m);
            assert!(mask.highest_set().unwrap() <= edge_count(m));
        }
    }
}
