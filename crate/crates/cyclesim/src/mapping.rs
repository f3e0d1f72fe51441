//! The level mapping `U_m` and its factorization into 4-bit involutions.
//!
//! `U_m` carries cycles over vertices `1..=m` to cycles over `1..=m+1`. It
//! factors into `m(m-1)/2` sub-operations `U_m^l`, one per ancilla bit.
//! Each sub-operation touches exactly four bits: ancilla bit `l`, path bit
//! `l` (the edge to break), and the two path bits for the edges that join
//! the inserted vertex `m+1` to the broken edge's endpoints:
//!
//! * forward pattern — ancilla `l` is 1, path `l` is 1, both new bits 0:
//!   flip all four (break the edge, wire in vertex `m+1`, clear the ancilla);
//! * reverse pattern — ancilla `l` is 0, path `l` is 0, both new bits 1:
//!   flip all four back;
//! * anything else — identity.
//!
//! Both patterns differ in every one of the four bits, so each
//! sub-operation is a self-inverse permutation of basis labels, all matrix
//! elements are 0 or 1, and the whole dynamics stays digital. `U_m` applies
//! the factors in ascending `l`; the adjoint applies them in descending
//! `l`, which inverts the composition exactly.

use crate::encoding::{edge_count, edge_of_position, position_of_edge};
use crate::error::{Error, Result};
use crate::qstate::{BasisLabel, SparseState};

/// One 4-bit involution `U_m^l`: which edge it breaks and which two edge
/// bits it sets for the inserted vertex `m+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubOpSpec {
    m: u32,
    l: u32,
    broken_edge: (u32, u32),
    new_bits: (u32, u32),
}

impl SubOpSpec {
    pub fn new(m: u32, l: u32) -> Result<Self> {
        if m < 3 {
            return Err(Error::VertexCountTooSmall(m));
        }
        let width = m * (m - 1) / 2;
        if l < 1 || l > width {
            return Err(Error::PositionOutOfRange { l, e: width });
        }
        let (a, b) = edge_of_position(l);
        let new_bits = (position_of_edge(m + 1, b), position_of_edge(m + 1, a));
        debug_assert!(new_bits.0 > width && new_bits.0 <= edge_count(m + 1));
        debug_assert!(new_bits.1 > width && new_bits.1 <= edge_count(m + 1));
        Ok(Self { m, l, broken_edge: (a, b), new_bits })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// Endpoints `(a,b)`, `a > b`, of the edge at position `l`.
    pub fn broken_edge(&self) -> (u32, u32) {
        self.broken_edge
    }

    /// Positions of the edges `(m+1, b)` and `(m+1, a)`.
    pub fn new_bits(&self) -> (u32, u32) {
        self.new_bits
    }

    /// Acts on one basis label in place; reports which pattern fired.
    fn act(&self, label: &mut BasisLabel) -> SubOpAction {
        let l = self.l;
        let (i, ip) = self.new_bits;
        let anc = label.ancilla.get(l);
        let edge = label.path.get(l);
        let lo = label.path.get(i);
        let hi = label.path.get(ip);
        let action = if anc && edge && !lo && !hi {
            SubOpAction::Forward
        } else if !anc && !edge && lo && hi {
            SubOpAction::Reverse
        } else {
            return SubOpAction::Identity;
        };
        label.ancilla.toggle(l);
        label.path.toggle(l);
        label.path.toggle(i);
        label.path.toggle(ip);
        action
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SubOpAction {
    Identity,
    Forward,
    Reverse,
}

/// Per-sub-operation record for the gate trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubOpTrace {
    pub m: u32,
    pub l: u32,
    pub broken_edge: (u32, u32),
    pub new_bits: (u32, u32),
    /// Terms matched by the forward pattern.
    pub fired: u64,
}

fn check_register(s: &SparseState, m: u32) -> Result<Vec<SubOpSpec>> {
    let width = m * (m - 1) / 2;
    if s.ancilla_width() != width {
        return Err(Error::AncillaWidthMismatch { expected: width, found: s.ancilla_width() });
    }
    if m + 1 > s.n() {
        return Err(Error::LevelOutOfRange { m, n: s.n(), needed: m + 1 });
    }
    (1..=width).map(|l| SubOpSpec::new(m, l)).collect()
}

/// Applies a single `U_m^l` to every term.
pub fn apply_sub_op(s: &SparseState, spec: &SubOpSpec) -> Result<SparseState> {
    let width = spec.m * (spec.m - 1) / 2;
    if s.ancilla_width() != width {
        return Err(Error::AncillaWidthMismatch { expected: width, found: s.ancilla_width() });
    }
    if spec.m + 1 > s.n() {
        return Err(Error::LevelOutOfRange { m: spec.m, n: s.n(), needed: spec.m + 1 });
    }
    s.transform_labels(|mut label| {
        spec.act(&mut label);
        label
    })
}

/// The full level mapping: `U_m^l` for `l = 1, 2, ..., m(m-1)/2` in order.
pub fn apply_um(s: &SparseState, m: u32) -> Result<SparseState> {
    let specs = check_register(s, m)?;
    s.transform_labels(|mut label| {
        for spec in &specs {
            spec.act(&mut label);
        }
        label
    })
}

/// The adjoint: the same involutions in descending `l`.
pub fn apply_um_dagger(s: &SparseState, m: u32) -> Result<SparseState> {
    let specs = check_register(s, m)?;
    s.transform_labels(|mut label| {
        for spec in specs.iter().rev() {
            spec.act(&mut label);
        }
        label
    })
}

/// `apply_um` plus per-sub-operation forward-fire counts.
pub fn apply_um_with_trace(s: &SparseState, m: u32) -> Result<(SparseState, Vec<SubOpTrace>)> {
    let specs = check_register(s, m)?;
    let mut fired = vec![0u64; specs.len()];
    let out = s.transform_labels(|mut label| {
        for (idx, spec) in specs.iter().enumerate() {
            if spec.act(&mut label) == SubOpAction::Forward {
                fired[idx] += 1;
            }
        }
        label
    })?;
    let trace = specs
        .iter()
        .zip(fired)
        .map(|(spec, fired)| SubOpTrace {
            m,
            l: spec.l,
            broken_edge: spec.broken_edge,
            new_bits: spec.new_bits,
            fired,
        })
        .collect();
    Ok((out, trace))
}

/// The aux-extended mapping: before the gate, the aux bit takes the OR over
/// `l` of `AND(path{l}, ancilla{l})` evaluated on the input label, then
/// `U_m` runs as usual. On the unit-ancilla inputs of the construction this
/// is the single-`l` AND, and a set aux bit marks exactly the fired terms.
pub fn apply_um_aux(s: &SparseState, m: u32) -> Result<SparseState> {
    let specs = check_register(s, m)?;
    for (label, _) in s.terms() {
        match label.aux {
            None => return Err(Error::NoAux),
            Some(true) => return Err(Error::AuxNotCleared),
            Some(false) => {}
        }
    }
    s.transform_labels(|mut label| {
        label.aux = Some(label.ancilla.raw() & label.path.raw() != 0);
        for spec in &specs {
            spec.act(&mut label);
        }
        label
    })
}

/// Matrix element `⟨row|U_m|col⟩` over the truncated register that keeps
/// edge bits through the `(m+1)`-group; always 0 or 1.
///
/// Panics if a label carries bits outside that register or an aux bit —
/// the caller picks labels inside it.
pub fn matrix_element(m: u32, row: &BasisLabel, col: &BasisLabel) -> u8 {
    let width = m * (m - 1) / 2;
    let e = edge_count(m + 1);
    for label in [row, col] {
        assert!(
            label.path.highest_set().is_none_or(|hi| hi <= e),
            "path bits beyond the truncated register"
        );
        assert!(
            label.ancilla.highest_set().is_none_or(|hi| hi <= width),
            "ancilla bits beyond width {width}"
        );
        assert!(label.aux.is_none(), "matrix elements are aux-free");
    }
    let col_state = SparseState::from_terms(m + 1, m, width, [(*col, 1i64)])
        .expect("singleton state over the truncated register");
    let image = apply_um(&col_state, m).expect("register checked above");
    debug_assert_eq!(image.term_count(), 1);
    let (label, c) = image.terms().next().expect("permutation keeps the term");
    debug_assert_eq!(c, 1);
    u8::from(label == row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::PathMask;
    use crate::qstate::AncillaMask;

    fn term(path: &str, ancilla: &str) -> BasisLabel {
        BasisLabel::new(
            PathMask::from_bit_string(path).unwrap().0,
            AncillaMask::from_bit_string(ancilla).unwrap().0,
        )
    }

    fn singleton(n: u32, level: u32, ancilla_width: u32, label: BasisLabel) -> SparseState {
        SparseState::from_terms(n, level, ancilla_width, [(label, 1i64)]).unwrap()
    }

    #[test]
    fn sub_op_specs_for_m3() {
        let spec = SubOpSpec::new(3, 1).unwrap();
        assert_eq!(spec.broken_edge(), (2, 1));
        assert_eq!(spec.new_bits(), (4, 5));
        let spec = SubOpSpec::new(3, 2).unwrap();
        assert_eq!(spec.broken_edge(), (3, 1));
        assert_eq!(spec.new_bits(), (4, 6));
        let spec = SubOpSpec::new(3, 3).unwrap();
        assert_eq!(spec.broken_edge(), (3, 2));
        assert_eq!(spec.new_bits(), (5, 6));
        assert!(SubOpSpec::new(3, 4).is_err());
        assert!(SubOpSpec::new(3, 0).is_err());
    }

    #[test]
    fn sub_op_fires_first_output_of_the_worked_example() {
        let s = singleton(4, 3, 3, term("111000", "100"));
        let spec = SubOpSpec::new(3, 1).unwrap();
        let out = apply_sub_op(&s, &spec).unwrap();
        let (label, c) = out.terms().next().unwrap();
        assert_eq!(c, 1);
        assert_eq!(label.path.to_bit_string(6), "011110");
        assert_eq!(label.ancilla.to_bit_string(3), "000");
    }

    #[test]
    fn sub_op_identity_when_ancilla_points_elsewhere() {
        let s = singleton(4, 3, 3, term("111000", "100"));
        let spec = SubOpSpec::new(3, 2).unwrap();
        let out = apply_sub_op(&s, &spec).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn sub_op_is_an_involution() {
        let fired = singleton(4, 3, 3, term("111000", "100"));
        let spec = SubOpSpec::new(3, 1).unwrap();
        let once = apply_sub_op(&fired, &spec).unwrap();
        let twice = apply_sub_op(&once, &spec).unwrap();
        assert_eq!(twice, fired);
    }

    #[test]
    fn um_reproduces_the_three_tours_over_four_vertices() {
        let s = SparseState::initial(4)
            .unwrap()
            .attach_ancilla_uniform(3)
            .unwrap();
        let out = apply_um(&s, 3).unwrap();
        let kets: Vec<(String, String)> = out
            .terms()
            .map(|(l, _)| (l.ancilla.to_bit_string(3), l.path.to_grouped_string(4)))
            .collect();
        assert_eq!(
            kets,
            vec![
                ("000".into(), "0 11 110".into()),
                ("000".into(), "1 01 101".into()),
                ("000".into(), "1 10 011".into()),
            ]
        );
        let coeffs: Vec<i64> = out.terms().map(|(_, c)| c).collect();
        assert_eq!(coeffs, vec![1, 1, 1]);
    }

    #[test]
    fn um_level_four_fired_and_residual_counts() {
        // Independent count: a (cycle, u_l) pair fires exactly when bit l of
        // the cycle is set, so the three 4-cycles fire 4 times each.
        let cycles = [
            vec![2u32, 3, 4, 5],
            vec![1, 3, 4, 6],
            vec![1, 2, 5, 6],
        ];
        let mut expected_fired = 0u64;
        for mask in &cycles {
            for l in 1..=6u32 {
                if mask.contains(&l) {
                    expected_fired += 1;
                }
            }
        }
        assert_eq!(expected_fired, 12);

        let entries = cycles.iter().map(|ps| {
            (
                BasisLabel::new(
                    PathMask::from_positions(ps.iter().copied()).unwrap(),
                    AncillaMask::ZERO,
                ),
                1i64,
            )
        });
        let level4 = SparseState::from_terms(5, 4, 0, entries).unwrap();
        let attached = level4.attach_ancilla_uniform(4).unwrap();
        let out = apply_um(&attached, 4).unwrap();

        let fired = out.terms().filter(|(l, _)| l.ancilla.is_zero()).count() as u64;
        let residual = out.terms().filter(|(l, _)| !l.ancilla.is_zero()).count() as u64;
        assert_eq!(fired, 12);
        assert_eq!(residual, 6);
        // Residual terms still point at an unset edge: untouched unit ancilla.
        for (label, _) in out.terms() {
            if !label.ancilla.is_zero() {
                assert_eq!(label.ancilla.count_ones(), 1);
                let l = label.ancilla.set_positions().next().unwrap();
                assert!(!label.path.get(l));
            }
        }
    }

    #[test]
    fn um_dagger_inverts_um() {
        let s = SparseState::initial(5)
            .unwrap()
            .attach_ancilla_uniform(3)
            .unwrap();
        let roundtrip = apply_um_dagger(&apply_um(&s, 3).unwrap(), 3).unwrap();
        assert_eq!(roundtrip, s);
    }

    #[test]
    fn um_dagger_reverses_the_worked_example() {
        let rhs_paths = ["011110", "101101", "110011"];
        let entries = rhs_paths
            .iter()
            .map(|p| (term(p, "000"), 1i64));
        let rhs = SparseState::from_terms(4, 3, 3, entries).unwrap();
        let lhs = apply_um_dagger(&rhs, 3).unwrap();
        let expect = SparseState::initial(4)
            .unwrap()
            .attach_ancilla_uniform(3)
            .unwrap();
        assert_eq!(lhs, expect);
    }

    #[test]
    fn aux_bit_marks_fired_terms() {
        let fired = singleton(4, 3, 3, term("111000", "100"))
            .attach_aux_zero()
            .unwrap();
        let out = apply_um_aux(&fired, 3).unwrap();
        let (label, _) = out.terms().next().unwrap();
        assert_eq!(label.aux, Some(true));
        assert!(label.ancilla.is_zero());

        // Ancilla pointing at an unset edge: nothing fires, aux stays 0.
        let unfired = singleton(4, 3, 3, term("110100", "001"))
            .attach_aux_zero()
            .unwrap();
        let out = apply_um_aux(&unfired, 3).unwrap();
        let (label, _) = out.terms().next().unwrap();
        assert_eq!(label.aux, Some(false));
        assert_eq!(label.path.to_bit_string(6), "110100");
    }

    #[test]
    fn aux_requires_cleared_bit() {
        let s = singleton(4, 3, 3, term("111000", "100"));
        assert!(matches!(apply_um_aux(&s, 3), Err(Error::NoAux)));
        let set = SparseState::from_terms(
            4,
            3,
            3,
            [(BasisLabel { aux: Some(true), ..*s.terms().next().unwrap().0 }, 1i64)],
        )
        .unwrap();
        assert!(matches!(apply_um_aux(&set, 3), Err(Error::AuxNotCleared)));
    }

    #[test]
    fn matrix_elements_are_zero_or_one() {
        let col = term("111000", "100");
        let fired_row = term("011110", "000");
        assert_eq!(matrix_element(3, &fired_row, &col), 1);
        // The diagonal vanishes on fired pairs.
        assert_eq!(matrix_element(3, &col, &col), 0);
        // A permutation matrix has a single 1 per column.
        let wrong = term("011110", "010");
        assert_eq!(matrix_element(3, &wrong, &col), 0);
    }

    #[test]
    fn width_checks() {
        let s = SparseState::initial(4).unwrap().attach_ancilla_uniform(3).unwrap();
        assert!(matches!(
            apply_um(&s, 4),
            Err(Error::AncillaWidthMismatch { expected: 6, found: 3 })
        ));
        // Register n=4 has no room for the 5-group.
        let lvl4 = SparseState::from_terms(
            4,
            4,
            6,
            [(term("011110", "000000"), 1i64)],
        )
        .unwrap();
        assert!(matches!(apply_um(&lvl4, 4), Err(Error::LevelOutOfRange { .. })));
    }
}
