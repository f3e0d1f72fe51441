//! Sparse exact-arithmetic state vector over composite basis labels.
//!
//! A term is a basis label (path mask, ancilla mask, optional aux bit) with
//! a signed integer coefficient `c`; the physical amplitude of term `i` is
//! `c_i / sqrt(N)` with `N = Σ_j c_j²`. The level construction only ever
//! permutes labels and filters terms, so keeping the normalizer implicit
//! makes every probability an exact ratio of integers. Floating point
//! appears solely in the export view ([`SparseState::amplitude`]).

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::encoding::{edge_count, PathMask, MAX_VERTICES};
use crate::error::{Error, Result};

/// Ancilla register mask of up to 128 bits; position 1 is leftmost in the
/// serialized string, matching [`PathMask`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AncillaMask(u128);

impl AncillaMask {
    pub const ZERO: AncillaMask = AncillaMask(0);

    /// The natural unit state `u_l`: exactly bit `l` set.
    pub fn unit(l: u32) -> Self {
        AncillaMask(bits::unit(l))
    }

    pub fn get(&self, pos: u32) -> bool {
        bits::get(self.0, pos)
    }

    pub(crate) fn raw(&self) -> u128 {
        self.0
    }

    pub fn toggle(&mut self, pos: u32) {
        bits::toggle(&mut self.0, pos);
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }

    pub fn count_ones(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn set_positions(&self) -> impl Iterator<Item = u32> {
        bits::set_positions(self.0)
    }

    pub fn to_bit_string(&self, width: u32) -> String {
        bits::to_bit_string(self.0, width)
    }

    pub fn from_bit_string(s: &str) -> Result<(Self, u32)> {
        let (raw, width) = bits::from_bit_string(s)?;
        Ok((AncillaMask(raw), width))
    }

    /// Highest set position, if any.
    pub fn highest_set(&self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(128 - self.0.trailing_zeros())
        }
    }
}

impl std::fmt::Debug for AncillaMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AncillaMask{{{:?}}}", self.set_positions().collect::<Vec<_>>())
    }
}

/// Name of one computational basis state: path register, ancilla register,
/// and the optional aux bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub path: PathMask,
    pub ancilla: AncillaMask,
    pub aux: Option<bool>,
}

impl BasisLabel {
    pub fn new(path: PathMask, ancilla: AncillaMask) -> Self {
        Self { path, ancilla, aux: None }
    }

    pub fn with_aux(path: PathMask, ancilla: AncillaMask, aux: bool) -> Self {
        Self { path, ancilla, aux: Some(aux) }
    }
}

// Sort order (ancilla, path, aux): serialized term order is lexicographic
// by (ancilla, path), which the mask storage makes identical to the
// derived integer order.
impl Ord for BasisLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.ancilla, self.path, self.aux).cmp(&(other.ancilla, other.path, other.aux))
    }
}

impl PartialOrd for BasisLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Debug for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BasisLabel{{path:{:?}, ancilla:{:?}", self.path, self.ancilla)?;
        if let Some(a) = self.aux {
            write!(f, ", aux:{}", u8::from(a))?;
        }
        write!(f, "}}")
    }
}

/// Exact probability: a reduced fraction in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExactProb(Ratio<u128>);

impl ExactProb {
    pub fn new(numerator: u128, denominator: u128) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::ArithmeticOverflow("probability denominator is zero"));
        }
        if numerator > denominator {
            return Err(Error::ArithmeticOverflow("probability above one"));
        }
        Ok(ExactProb(Ratio::new(numerator, denominator)))
    }

    pub fn one() -> Self {
        ExactProb(Ratio::from_integer(1))
    }

    pub fn numer(&self) -> u128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u128 {
        *self.0.denom()
    }

    pub fn as_ratio(&self) -> &Ratio<u128> {
        &self.0
    }

    /// `1 - p`, still exact.
    pub fn complement(&self) -> ExactProb {
        ExactProb(Ratio::from_integer(1) - self.0)
    }

    /// Expected number of measurement repetitions, `1/p`.
    pub fn expected_repetitions(&self) -> Result<Ratio<u128>> {
        if self.0.is_zero() {
            return Err(Error::ZeroProbability);
        }
        Ok(self.0.recip())
    }

    /// Float view for reporting only.
    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl std::fmt::Display for ExactProb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Term sign for phase experiments; amplitudes stay real throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Sparse state: map from basis label to signed integer coefficient.
///
/// Immutable by convention — operations return new states. Iteration over
/// terms is sorted by label, so serialization is reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseState {
    n: u32,
    level: u32,
    ancilla_width: u32,
    terms: BTreeMap<BasisLabel, i64>,
}

impl SparseState {
    /// The level-3 start of the construction: the single tour over three
    /// vertices, path bits {1,2,3} set, no ancilla.
    pub fn initial(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::VertexCountTooSmall(n));
        }
        if n > MAX_VERTICES {
            return Err(Error::RegisterTooWide {
                n,
                bits: edge_count(n),
                max: bits::MAX_WIDTH,
            });
        }
        let path = PathMask::from_positions([1, 2, 3])?;
        let mut terms = BTreeMap::new();
        terms.insert(BasisLabel::new(path, AncillaMask::ZERO), 1i64);
        Ok(Self { n, level: 3, ancilla_width: 0, terms })
    }

    /// Builds a state from explicit terms, validating widths, duplicate
    /// labels, zero coefficients, and uniform aux presence.
    pub fn from_terms<I>(n: u32, level: u32, ancilla_width: u32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisLabel, i64)>,
    {
        if n < 3 {
            return Err(Error::VertexCountTooSmall(n));
        }
        if n > MAX_VERTICES {
            return Err(Error::RegisterTooWide {
                n,
                bits: edge_count(n),
                max: bits::MAX_WIDTH,
            });
        }
        let e = edge_count(n);
        let mut terms = BTreeMap::new();
        let mut aux_present: Option<bool> = None;
        for (label, c) in entries {
            if c == 0 {
                return Err(Error::ZeroCoefficient(format!("{label:?}")));
            }
            if label.path.highest_set().is_some_and(|hi| hi > e) {
                return Err(Error::PositionOutOfRange {
                    l: label.path.highest_set().unwrap(),
                    e,
                });
            }
            if label.ancilla.highest_set().is_some_and(|hi| hi > ancilla_width) {
                return Err(Error::AncillaWidthMismatch {
                    expected: ancilla_width,
                    found: label.ancilla.highest_set().unwrap(),
                });
            }
            let has_aux = label.aux.is_some();
            if *aux_present.get_or_insert(has_aux) != has_aux {
                return Err(Error::StateParse("mixed aux presence across terms".into()));
            }
            if terms.insert(label, c).is_some() {
                return Err(Error::DuplicateTerm(format!("{label:?}")));
            }
        }
        if terms.is_empty() {
            return Err(Error::EmptyState);
        }
        Ok(Self { n, level, ancilla_width, terms })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn ancilla_width(&self) -> u32 {
        self.ancilla_width
    }

    /// Edge-register width `E = n(n-1)/2`.
    pub fn edge_width(&self) -> u32 {
        edge_count(self.n)
    }

    pub fn term_count(&self) -> u64 {
        self.terms.len() as u64
    }

    /// Sorted iteration over `(label, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&BasisLabel, i64)> {
        self.terms.iter().map(|(l, &c)| (l, c))
    }

    pub fn coefficient(&self, label: &BasisLabel) -> Option<i64> {
        self.terms.get(label).copied()
    }

    /// Whether terms carry the aux bit.
    pub fn has_aux(&self) -> bool {
        self.terms.keys().next().is_some_and(|l| l.aux.is_some())
    }

    /// Squared norm `N = Σ c²`; exact.
    pub fn norm_sq(&self) -> Result<u128> {
        let mut total: u128 = 0;
        for &c in self.terms.values() {
            let sq = (c as i128 * c as i128) as u128;
            total = total
                .checked_add(sq)
                .ok_or(Error::ArithmeticOverflow("norm_sq"))?;
        }
        Ok(total)
    }

    /// Physical amplitude `c / sqrt(N)` of a label. Export view only; the
    /// core arithmetic never touches floats.
    pub fn amplitude(&self, label: &BasisLabel) -> f64 {
        let n = self.norm_sq().unwrap_or(0);
        if n == 0 {
            return 0.0;
        }
        self.coefficient(label).unwrap_or(0) as f64 / (n as f64).sqrt()
    }

    pub(crate) fn set_level(mut self, level: u32) -> Self {
        self.level = level;
        self
    }

    /// Applies a label permutation to every term. The coefficients follow
    /// their labels; a collision means the function was not injective and
    /// is reported as a duplicate label.
    pub(crate) fn transform_labels<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(BasisLabel) -> BasisLabel,
    {
        let mut terms = BTreeMap::new();
        for (&label, &c) in &self.terms {
            let image = f(label);
            if terms.insert(image, c).is_some() {
                return Err(Error::DuplicateTerm(format!("{image:?}")));
            }
        }
        Ok(Self { terms, ..*self })
    }

    /// Tensor with the uniform superposition of all natural unit ancilla
    /// states `u_l`, `l = 1..=m(m-1)/2`. Term count multiplies by the
    /// ancilla width; coefficients are unchanged.
    pub fn attach_ancilla_uniform(&self, m: u32) -> Result<Self> {
        if self.ancilla_width != 0 {
            return Err(Error::AncillaAlreadyAttached(self.ancilla_width));
        }
        if self.level != m {
            return Err(Error::LevelMismatch { expected: m, found: self.level });
        }
        let width = m * (m - 1) / 2;
        if width > bits::MAX_WIDTH {
            return Err(Error::AncillaWidthMismatch { expected: bits::MAX_WIDTH, found: width });
        }
        let mut terms = BTreeMap::new();
        for (&label, &c) in &self.terms {
            for l in 1..=width {
                let unit = BasisLabel { ancilla: AncillaMask::unit(l), ..label };
                terms.insert(unit, c);
            }
        }
        Ok(Self { ancilla_width: width, terms, ..*self })
    }

    /// Tensor with the all-zero ancilla of the given width (the reverse
    /// walk starts here). Term count is unchanged.
    pub fn attach_ancilla_zero(&self, width: u32) -> Result<Self> {
        if self.ancilla_width != 0 {
            return Err(Error::AncillaAlreadyAttached(self.ancilla_width));
        }
        if width == 0 || width > bits::MAX_WIDTH {
            return Err(Error::AncillaWidthMismatch { expected: bits::MAX_WIDTH, found: width });
        }
        Ok(Self { ancilla_width: width, terms: self.terms.clone(), ..*self })
    }

    /// Adds an aux bit initialized to 0 on every term.
    pub fn attach_aux_zero(&self) -> Result<Self> {
        if self.has_aux() {
            return Err(Error::AuxAlreadyAttached);
        }
        let terms = self
            .terms
            .iter()
            .map(|(&label, &c)| (BasisLabel { aux: Some(false), ..label }, c))
            .collect();
        Ok(Self { terms, ..*self })
    }

    /// Removes an ancilla register that is all-zero on every term.
    pub fn detach_zero_ancilla(&self) -> Result<Self> {
        if self.ancilla_width == 0 {
            return Err(Error::NoAncilla);
        }
        for label in self.terms.keys() {
            if !label.ancilla.is_zero() {
                return Err(Error::AncillaNotZero);
            }
        }
        Ok(Self { ancilla_width: 0, terms: self.terms.clone(), ..*self })
    }

    /// Projective measurement of the ancilla onto its all-zero state.
    ///
    /// Returns the exact success probability and the post-measurement state
    /// with the ancilla detached. Coefficients are unchanged; the implicit
    /// `1/sqrt(N)` convention absorbs renormalization.
    pub fn project_ancilla_zero(&self) -> Result<(ExactProb, Self)> {
        if self.ancilla_width == 0 {
            return Err(Error::NoAncilla);
        }
        let total = self.norm_sq()?;
        let mut kept: u128 = 0;
        let mut terms = BTreeMap::new();
        for (&label, &c) in &self.terms {
            if label.ancilla.is_zero() {
                kept += (c as i128 * c as i128) as u128;
                terms.insert(label, c);
            }
        }
        if terms.is_empty() {
            return Err(Error::ZeroProbability);
        }
        let p = ExactProb::new(kept, total)?;
        let post = Self { ancilla_width: 0, terms, ..*self };
        Ok((p, post))
    }

    /// Projective measurement of the aux bit onto 1; keeps the matching
    /// terms and strips the aux bit.
    pub fn project_aux_one(&self) -> Result<(ExactProb, Self)> {
        if !self.has_aux() {
            return Err(Error::NoAux);
        }
        let total = self.norm_sq()?;
        let mut kept: u128 = 0;
        let mut terms = BTreeMap::new();
        for (&label, &c) in &self.terms {
            if label.aux == Some(true) {
                kept += (c as i128 * c as i128) as u128;
                terms.insert(BasisLabel { aux: None, ..label }, c);
            }
        }
        if terms.is_empty() {
            return Err(Error::ZeroProbability);
        }
        let p = ExactProb::new(kept, total)?;
        let post = Self { terms, ..*self };
        Ok((p, post))
    }

    /// Inner product `⟨a|b⟩ = Σ c_a·c_b / sqrt(N_a·N_b)`, reported as the
    /// exact value of its square carrying the sign of the product itself,
    /// so `1` means identical states and `0` means orthogonal.
    pub fn inner_product(&self, other: &Self) -> Result<Ratio<i128>> {
        if self.n != other.n
            || self.ancilla_width != other.ancilla_width
            || self.has_aux() != other.has_aux()
        {
            return Err(Error::RegisterMismatch);
        }
        let mut dot: i128 = 0;
        for (label, c) in self.terms() {
            if let Some(d) = other.coefficient(label) {
                dot = dot
                    .checked_add(c as i128 * d as i128)
                    .ok_or(Error::ArithmeticOverflow("inner product"))?;
            }
        }
        let na = i128::try_from(self.norm_sq()?)
            .map_err(|_| Error::ArithmeticOverflow("inner product norm"))?;
        let nb = i128::try_from(other.norm_sq()?)
            .map_err(|_| Error::ArithmeticOverflow("inner product norm"))?;
        let denom = na
            .checked_mul(nb)
            .ok_or(Error::ArithmeticOverflow("inner product norm"))?;
        let sq = dot
            .checked_mul(dot)
            .ok_or(Error::ArithmeticOverflow("inner product square"))?;
        let signed = if dot.is_negative() { -sq } else { sq };
        Ok(Ratio::new(signed, denom))
    }

    /// Multiplies each coefficient by a per-term sign.
    pub fn with_signs<F>(&self, mut sign: F) -> Self
    where
        F: FnMut(&BasisLabel) -> Sign,
    {
        let terms = self
            .terms
            .iter()
            .map(|(&label, &c)| (label, c * sign(&label).factor()))
            .collect();
        Self { terms, ..*self }
    }

    /// Serializes to the JSON state format. Terms come out sorted by
    /// (ancilla, path); identical states serialize byte-identically.
    pub fn to_json_string(&self) -> Result<String> {
        let dto = StateDto {
            n: self.n,
            level: self.level,
            ancilla_width: self.ancilla_width,
            terms: self
                .terms
                .iter()
                .map(|(label, &c)| TermDto {
                    path: label.path.to_bit_string(self.edge_width()),
                    ancilla: label.ancilla.to_bit_string(self.ancilla_width),
                    aux: label.aux.map(u8::from),
                    c,
                })
                .collect(),
            norm_sq: u64::try_from(self.norm_sq()?)
                .map_err(|_| Error::ArithmeticOverflow("norm_sq export"))?,
        };
        serde_json::to_string_pretty(&dto).map_err(|e| Error::StateParse(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let dto: StateDto =
            serde_json::from_str(s).map_err(|e| Error::StateParse(e.to_string()))?;
        let e = edge_count(dto.n);
        let mut entries = Vec::with_capacity(dto.terms.len());
        for t in &dto.terms {
            let (path, pw) = PathMask::from_bit_string(&t.path)?;
            if pw != e {
                return Err(Error::StateParse(format!(
                    "path width {pw} does not match n={} (expected {e})",
                    dto.n
                )));
            }
            let (ancilla, aw) = AncillaMask::from_bit_string(&t.ancilla)?;
            if aw != dto.ancilla_width {
                return Err(Error::StateParse(format!(
                    "ancilla width {aw} does not match declared {}",
                    dto.ancilla_width
                )));
            }
            let aux = match t.aux {
                None => None,
                Some(0) => Some(false),
                Some(1) => Some(true),
                Some(other) => {
                    return Err(Error::StateParse(format!("aux must be 0 or 1, got {other}")))
                }
            };
            entries.push((BasisLabel { path, ancilla, aux }, t.c));
        }
        let state = Self::from_terms(dto.n, dto.level, dto.ancilla_width, entries)?;
        let norm = state.norm_sq()?;
        if norm != dto.norm_sq as u128 {
            return Err(Error::StateParse(format!(
                "declared norm_sq {} disagrees with terms ({norm})",
                dto.norm_sq
            )));
        }
        Ok(state)
    }
}

#[derive(Serialize, Deserialize)]
struct TermDto {
    path: String,
    ancilla: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    aux: Option<u8>,
    c: i64,
}

#[derive(Serialize, Deserialize)]
struct StateDto {
    n: u32,
    level: u32,
    ancilla_width: u32,
    terms: Vec<TermDto>,
    norm_sq: u64,
}
