//! Classical ground truth: permutation-based cycle enumeration, tour
//! weights, and exhaustive minimum-weight search.
//!
//! The enumeration is deliberately independent of the level construction —
//! it fixes vertex 1, walks raw permutations of the rest, and canonicalizes
//! reflections — so set-equality against a built superposition is a genuine
//! cross-check rather than the same code twice.

use itertools::Itertools;
use serde::Deserialize;

use crate::encoding::{decode_cycle, edge_count, encode_cycle, PathMask};
use crate::error::{Error, Result};
use crate::qstate::SparseState;

/// Enumeration guard: `(m-1)!/2` masks, kept to desk scale.
pub const MAX_ENUMERATION_VERTICES: u32 = 10;

/// Symmetric integer weight matrix with zero diagonal, vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    n: u32,
    w: Vec<Vec<i64>>,
}

impl WeightMatrix {
    /// Validates shape, symmetry, and the zero diagonal. Diagnostics carry
    /// 1-based row/column positions.
    #[allow(clippy::needless_range_loop)] // transposed access: w[r][c] vs w[c][r]
    pub fn new(w: Vec<Vec<i64>>) -> Result<Self> {
        let n = w.len();
        if n < 3 {
            return Err(Error::WeightParse(format!(
                "need at least 3 vertices, got {n} rows"
            )));
        }
        for (r, row) in w.iter().enumerate() {
            if row.len() != n {
                return Err(Error::WeightMatrix {
                    row: r + 1,
                    col: row.len(),
                    reason: format!("row has {} cells, expected {n}", row.len()),
                });
            }
        }
        for r in 0..n {
            if w[r][r] != 0 {
                return Err(Error::WeightMatrix {
                    row: r + 1,
                    col: r + 1,
                    reason: format!("diagonal entry must be 0, got {}", w[r][r]),
                });
            }
            for c in 0..r {
                if w[r][c] != w[c][r] {
                    return Err(Error::WeightMatrix {
                        row: r + 1,
                        col: c + 1,
                        reason: format!(
                            "asymmetric: w[{}][{}]={} but w[{}][{}]={}",
                            r + 1,
                            c + 1,
                            w[r][c],
                            c + 1,
                            r + 1,
                            w[c][r]
                        ),
                    });
                }
            }
        }
        Ok(Self { n: n as u32, w })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Weight of the edge between vertices `i` and `k` (1-based).
    pub fn weight(&self, i: u32, k: u32) -> i64 {
        self.w[(i - 1) as usize][(k - 1) as usize]
    }

    /// Parses `n` lines of `n` comma-separated integers.
    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (r, line) in s.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for (c, cell) in line.split(',').enumerate() {
                let value: i64 = cell.trim().parse().map_err(|_| Error::WeightMatrix {
                    row: r + 1,
                    col: c + 1,
                    reason: format!("not an integer: {:?}", cell.trim()),
                })?;
                row.push(value);
            }
            rows.push(row);
        }
        Self::new(rows)
    }

    /// Parses `{ "n": ..., "weights": [[...]] }`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Dto {
            n: usize,
            weights: Vec<Vec<i64>>,
        }
        let dto: Dto =
            serde_json::from_str(s).map_err(|e| Error::WeightParse(e.to_string()))?;
        if dto.weights.len() != dto.n {
            return Err(Error::WeightParse(format!(
                "declared n={} but weights has {} rows",
                dto.n,
                dto.weights.len()
            )));
        }
        Self::new(dto.weights)
    }
}

/// All distinct Hamiltonian cycles over vertices `1..=m` as path masks,
/// sorted ascending. Vertex 1 is fixed, permutations of the rest are
/// walked, and reflections are canonicalized by keeping the orientation
/// whose second vertex is smaller than its last; the result has exactly
/// `(m-1)!/2` masks.
pub fn enumerate_cycles(m: u32) -> Result<Vec<PathMask>> {
    if m < 3 {
        return Err(Error::VertexCountTooSmall(m));
    }
    if m > MAX_ENUMERATION_VERTICES {
        return Err(Error::EnumerationTooLarge(m));
    }
    let mut masks = Vec::new();
    for rest in (2..=m).permutations((m - 1) as usize) {
        if rest[0] > rest[rest.len() - 1] {
            continue;
        }
        let mut tour = Vec::with_capacity(m as usize);
        tour.push(1);
        tour.extend(rest);
        masks.push(encode_cycle(&tour)?);
    }
    masks.sort_unstable();
    Ok(masks)
}

/// Total weight of the tour coded by `mask`: the sum of the weights of its
/// set edges. The mask must decode to a valid cycle within the matrix's
/// vertex range.
pub fn tour_weight(mask: &PathMask, w: &WeightMatrix) -> Result<i64> {
    let m = mask.count_ones();
    decode_cycle(mask, m)?;
    if m > w.n() {
        return Err(Error::PositionOutOfRange {
            l: mask.highest_set().unwrap_or(0),
            e: edge_count(w.n()),
        });
    }
    let mut total = 0i64;
    for l in mask.set_positions() {
        let (i, k) = crate::encoding::edge_of_position(l);
        total += w.weight(i, k);
    }
    Ok(total)
}

/// Where the candidate tours come from.
#[derive(Debug, Clone, Copy)]
pub enum TourSource<'a> {
    /// Enumerate all `(n-1)!/2` cycles from scratch.
    Exhaustive,
    /// Read the tours off a built full-level superposition.
    State(&'a SparseState),
}

/// Minimum-weight tour; ties break toward the lexicographically smallest
/// mask.
pub fn min_tour(w: &WeightMatrix, source: TourSource) -> Result<(PathMask, i64)> {
    let mut best: Option<(PathMask, i64)> = None;
    let mut consider = |mask: PathMask, weight: i64| {
        let better = match &best {
            None => true,
            Some((bmask, bw)) => weight < *bw || (weight == *bw && mask < *bmask),
        };
        if better {
            best = Some((mask, weight));
        }
    };
    match source {
        TourSource::Exhaustive => {
            for mask in enumerate_cycles(w.n())? {
                let weight = tour_weight(&mask, w)?;
                consider(mask, weight);
            }
        }
        TourSource::State(s) => {
            if s.level() != w.n() {
                return Err(Error::LevelMismatch { expected: w.n(), found: s.level() });
            }
            if s.ancilla_width() != 0 {
                return Err(Error::AncillaAlreadyAttached(s.ancilla_width()));
            }
            for (label, _) in s.terms() {
                let weight = tour_weight(&label.path, w)?;
                consider(label.path, weight);
            }
        }
    }
    best.ok_or(Error::EmptyState)
}
