//! Level-by-level construction of the uniform cycle superposition.
//!
//! Each step takes the uniform level-`m` state, tensors in the uniform
//! ancilla, applies `U_m`, and post-selects the all-zero ancilla (or the
//! aux bit). The surviving state is the uniform superposition of all
//! `m!/2` cycles over `m+1` vertices and the exact success probability is
//! `2/(m-1)`; a [`ProbabilityLedger`] records both per level, together
//! with the expected repetition count `1/p` of the measurement.

use num_rational::Ratio;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::encoding::edge_count;
use crate::error::{Error, Result};
use crate::mapping::{apply_um, apply_um_aux, apply_um_dagger, apply_um_with_trace, SubOpTrace};
use crate::qstate::{BasisLabel, ExactProb, Sign, SparseState};

/// Default live-term budget: enough for full builds through n = 11.
pub const DEFAULT_TERM_BUDGET: u64 = 10_000_000;

/// Which measurement closes a level step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Project the ancilla onto its all-zero state.
    Projector,
    /// Compute the aux bit through the extended gate and project it onto 1.
    Aux,
}

/// Whether ancilla registers are reused across levels or accounted as
/// consumed per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AncillaMode {
    Reuse,
    Retain,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub variant: Variant,
    pub ancilla_mode: AncillaMode,
    pub term_budget: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Projector,
            ancilla_mode: AncillaMode::Reuse,
            term_budget: DEFAULT_TERM_BUDGET,
        }
    }
}

/// One measured level step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    /// Input level of the step (the step consumes the level-`m` state).
    pub m: u32,
    pub p: ExactProb,
    pub expected_repetitions: Ratio<u128>,
    pub terms_before: u64,
    pub terms_after: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProbabilityLedger {
    pub entries: Vec<LedgerEntry>,
}

#[derive(Serialize)]
struct LedgerEntryDto {
    m: u32,
    p: String,
    expected_repetitions: String,
    terms_before: u64,
    terms_after: u64,
}

impl ProbabilityLedger {
    /// Exact check of the probability law `p = 2/(m-1)` on every entry.
    pub fn law_holds(&self) -> bool {
        self.entries
            .iter()
            .all(|e| *e.p.as_ratio() == Ratio::new(2u128, (e.m - 1) as u128))
    }

    pub fn to_json_string(&self) -> Result<String> {
        let dtos: Vec<LedgerEntryDto> = self
            .entries
            .iter()
            .map(|e| LedgerEntryDto {
                m: e.m,
                p: e.p.to_string(),
                expected_repetitions: e.expected_repetitions.to_string(),
                terms_before: e.terms_before,
                terms_after: e.terms_after,
            })
            .collect();
        serde_json::to_string_pretty(&dtos).map_err(|e| Error::StateParse(e.to_string()))
    }
}

/// Exact bit accounting for a build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceAccounting {
    pub mode: AncillaMode,
    /// Edge register width `E = n(n-1)/2`.
    pub path_bits: u32,
    /// Widest ancilla attached during the build, `(n-1)(n-2)/2` for a full one.
    pub peak_ancilla_width: u32,
    /// Retain mode: `Σ m(m-1)/2` over executed steps. Reuse mode: the peak
    /// width, since one register serves every level.
    pub ancilla_bits_consumed: u64,
    /// Widest live label: path bits plus peak ancilla plus the aux bit.
    pub peak_live_label_bits: u32,
}

/// Product of a build run.
#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub state: SparseState,
    pub ledger: ProbabilityLedger,
    pub space: SpaceAccounting,
    /// Total count of sub-operation applications, `Σ m(m-1)/2`.
    pub sub_op_applications: u64,
}

fn ancilla_width(m: u32) -> u32 {
    m * (m - 1) / 2
}

fn expand_step(
    s: &SparseState,
    m: u32,
    variant: Variant,
    term_budget: u64,
) -> Result<(SparseState, ExactProb)> {
    if s.level() != m {
        return Err(Error::LevelMismatch { expected: m, found: s.level() });
    }
    let live = s.term_count() as u128 * ancilla_width(m) as u128;
    if live > term_budget as u128 {
        return Err(Error::CapacityExceeded { needed: live, budget: term_budget });
    }
    let attached = s.attach_ancilla_uniform(m)?;
    match variant {
        Variant::Projector => {
            let mapped = apply_um(&attached, m)?;
            let (p, post) = mapped.project_ancilla_zero()?;
            Ok((post.set_level(m + 1), p))
        }
        Variant::Aux => {
            let mapped = apply_um_aux(&attached.attach_aux_zero()?, m)?;
            let (p, kept) = mapped.project_aux_one()?;
            let post = kept.detach_zero_ancilla()?;
            Ok((post.set_level(m + 1), p))
        }
    }
}

/// One level step: attach the uniform ancilla, map, post-select. The input
/// sits at level `m` with no ancilla; the output sits at level `m+1` with
/// the measured probability.
pub fn expand_level(s: &SparseState, m: u32, variant: Variant) -> Result<(SparseState, ExactProb)> {
    expand_step(s, m, variant, u64::MAX)
}

/// Live-term schedule check for a full build from the initial state; the
/// peak at step `m` is `(m-1)!/2 · m(m-1)/2` labels.
fn precheck_budget(level: u32, budget: u64) -> Result<()> {
    let mut terms: u128 = 1;
    for m in 3..level {
        let live = terms.saturating_mul(ancilla_width(m) as u128);
        if live > budget as u128 {
            return Err(Error::CapacityExceeded { needed: live, budget });
        }
        terms = terms.saturating_mul(m as u128);
    }
    Ok(())
}

/// Runs the construction from the 3-cycle up to `level` inside an
/// `n`-vertex register.
pub fn build_to_level(n: u32, level: u32, options: &BuildOptions) -> Result<BuildOutcome> {
    if level < 3 {
        return Err(Error::VertexCountTooSmall(level));
    }
    if level > n {
        return Err(Error::LevelOutOfRange { m: level, n, needed: level });
    }
    let mut state = SparseState::initial(n)?;
    precheck_budget(level, options.term_budget)?;

    let mut ledger = ProbabilityLedger::default();
    let mut sub_op_applications = 0u64;
    let mut consumed = 0u64;
    let mut peak_width = 0u32;
    for m in 3..level {
        let terms_before = state.term_count();
        let (next, p) = expand_step(&state, m, options.variant, options.term_budget)?;
        let width = ancilla_width(m);
        sub_op_applications += width as u64;
        consumed += width as u64;
        peak_width = peak_width.max(width);
        ledger.entries.push(LedgerEntry {
            m,
            expected_repetitions: p.expected_repetitions()?,
            p,
            terms_before,
            terms_after: next.term_count(),
        });
        state = next;
    }

    let aux_bit = match options.variant {
        Variant::Projector => 0,
        Variant::Aux => 1,
    };
    let space = SpaceAccounting {
        mode: options.ancilla_mode,
        path_bits: edge_count(n),
        peak_ancilla_width: peak_width,
        ancilla_bits_consumed: match options.ancilla_mode {
            AncillaMode::Retain => consumed,
            AncillaMode::Reuse => peak_width as u64,
        },
        peak_live_label_bits: edge_count(n) + peak_width + aux_bit,
    };
    Ok(BuildOutcome { state, ledger, space, sub_op_applications })
}

/// Full build: the uniform superposition of all `(n-1)!/2` Hamiltonian
/// cycles over `n` vertices, with the per-level probability ledger.
pub fn build_superposition(n: u32, variant: Variant) -> Result<(SparseState, ProbabilityLedger)> {
    let options = BuildOptions { variant, ..BuildOptions::default() };
    let outcome = build_to_level(n, n, &options)?;
    Ok((outcome.state, outcome.ledger))
}

/// Total expected measurement time for a build to `n` vertices, in units of
/// one ancilla measurement: `Σ_{m=4..n} (m-1)/2`.
pub fn expected_measurement_cost(n: u32) -> Ratio<u64> {
    let mut total: Ratio<u64> = Ratio::zero();
    for m in 4..=n.max(3) {
        total += Ratio::new((m - 1) as u64, 2);
    }
    total
}

/// The uncompute step: tensors a fresh all-zero ancilla of width
/// `m(m-1)/2` onto a level-`m+1` state and applies the adjoint mapping.
/// Each level-`m` cycle comes out entangled with the ancilla unit states of
/// its set bits. No measurement happens here.
pub fn reverse_level(s: &SparseState, m: u32) -> Result<SparseState> {
    if m < 3 {
        return Err(Error::VertexCountTooSmall(m));
    }
    if s.level() != m + 1 {
        return Err(Error::LevelMismatch { expected: m + 1, found: s.level() });
    }
    let attached = s.attach_ancilla_zero(ancilla_width(m))?;
    Ok(apply_um_dagger(&attached, m)?.set_level(m))
}

/// Flips the sign of each coefficient per the assignment, then expands.
/// The surviving support set and the success probability match the
/// unscrambled run; only individual term signs may differ.
pub fn phase_scramble_then_expand<F>(
    s: &SparseState,
    m: u32,
    variant: Variant,
    signs: F,
) -> Result<(SparseState, ExactProb)>
where
    F: FnMut(&BasisLabel) -> Sign,
{
    expand_level(&s.with_signs(signs), m, variant)
}

/// Samples repetition counts of a post-selected measurement with success
/// probability `p`: each draw counts Bernoulli trials until the first
/// success. Deterministic for a fixed seed.
pub fn sample_repetitions(p: &ExactProb, trials: u32, seed: u64) -> Result<Vec<u64>> {
    let num = p.numer();
    let den = p.denom();
    if num == 0 {
        return Err(Error::ZeroProbability);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..trials)
        .map(|_| {
            let mut count = 1u64;
            while rng.gen_range(0..den) >= num {
                count += 1;
            }
            count
        })
        .collect())
}

pub fn mean(counts: &[u64]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    counts.iter().sum::<u64>() as f64 / counts.len() as f64
}

/// Gate-level trace of one expansion step.
#[derive(Debug, Clone)]
pub struct LevelTrace {
    /// Ledger of the build-up to the traced level.
    pub ledger: ProbabilityLedger,
    pub sub_ops: Vec<SubOpTrace>,
    /// Terms carrying the all-zero ancilla after the mapping.
    pub fired_terms: u64,
    /// Terms left at the input level, removed by the post-selection.
    pub residual_terms: u64,
    /// Fraction of squared norm on the completed next-level cycles.
    pub good: ExactProb,
    /// The complement, `1 - good`.
    pub residual: ExactProb,
    pub state_after: SparseState,
}

/// Builds to `level` and runs one traced expansion there, decomposing the
/// squared norm into the post-selected part and the residual.
pub fn trace_level(n: u32, level: u32, options: &BuildOptions) -> Result<LevelTrace> {
    if level + 1 > n {
        return Err(Error::LevelOutOfRange { m: level, n, needed: level + 1 });
    }
    let outcome = build_to_level(n, level, options)?;
    let live = outcome.state.term_count() as u128 * ancilla_width(level) as u128;
    if live > options.term_budget as u128 {
        return Err(Error::CapacityExceeded { needed: live, budget: options.term_budget });
    }
    let attached = outcome.state.attach_ancilla_uniform(level)?;
    let (mapped, sub_ops) = apply_um_with_trace(&attached, level)?;
    let (good, post) = mapped.project_ancilla_zero()?;
    let fired_terms = post.term_count();
    Ok(LevelTrace {
        ledger: outcome.ledger,
        sub_ops,
        fired_terms,
        residual_terms: mapped.term_count() - fired_terms,
        residual: good.complement(),
        good,
        state_after: post.set_level(level + 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::decode_cycle;
    use crate::oracle::enumerate_cycles;

    #[test]
    fn expand_from_the_triangle_passes_all_amplitude() {
        let s = SparseState::initial(5).unwrap();
        let (next, p) = expand_level(&s, 3, Variant::Projector).unwrap();
        assert_eq!(next.term_count(), 3);
        assert_eq!(next.level(), 4);
        assert_eq!(p, ExactProb::one());
    }

    #[test]
    fn expand_probability_two_thirds_at_level_four() {
        let s = SparseState::initial(5).unwrap();
        let (lvl4, _) = expand_level(&s, 3, Variant::Projector).unwrap();
        let (lvl5, p) = expand_level(&lvl4, 4, Variant::Projector).unwrap();
        assert_eq!(lvl5.term_count(), 12);
        assert_eq!(*p.as_ratio(), Ratio::new(2u128, 3));
    }

    #[test]
    fn expand_level_five_cross_checked_against_enumeration() {
        let s = SparseState::initial(6).unwrap();
        let (lvl4, _) = expand_level(&s, 3, Variant::Projector).unwrap();
        let (lvl5, _) = expand_level(&lvl4, 4, Variant::Projector).unwrap();
        let (lvl6, p) = expand_level(&lvl5, 5, Variant::Projector).unwrap();
        assert_eq!(*p.as_ratio(), Ratio::new(1u128, 2));
        assert_eq!(lvl6.term_count(), 60);
        let built: Vec<_> = lvl6.terms().map(|(l, _)| l.path).collect();
        let enumerated = enumerate_cycles(6).unwrap();
        assert_eq!(built, enumerated);
    }

    #[test]
    fn build_superposition_counts_and_ledger() {
        let (s, ledger) = build_superposition(4, Variant::Projector).unwrap();
        assert_eq!(s.term_count(), 3);
        assert_eq!(ledger.entries.len(), 1);

        let (s, ledger) = build_superposition(6, Variant::Projector).unwrap();
        assert_eq!(s.term_count(), 60);
        let ps: Vec<String> = ledger.entries.iter().map(|e| e.p.to_string()).collect();
        assert_eq!(ps, vec!["1", "2/3", "1/2"]);
        assert!(ledger.law_holds());
        let reps: Vec<String> = ledger
            .entries
            .iter()
            .map(|e| e.expected_repetitions.to_string())
            .collect();
        assert_eq!(reps, vec!["1", "3/2", "2"]);
    }

    #[test]
    fn build_n3_is_the_initial_state() {
        let (s, ledger) = build_superposition(3, Variant::Projector).unwrap();
        assert_eq!(s.term_count(), 1);
        assert!(ledger.entries.is_empty());
    }

    #[test]
    fn aux_variant_builds_the_same_states() {
        let (a, la) = build_superposition(6, Variant::Projector).unwrap();
        let (b, lb) = build_superposition(6, Variant::Aux).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
    }

    #[test]
    fn default_budget_rejects_n12_up_front() {
        let err = build_superposition(12, Variant::Projector).unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded { .. }));
    }

    #[test]
    fn cost_examples() {
        assert_eq!(expected_measurement_cost(4), Ratio::new(3, 2));
        assert_eq!(expected_measurement_cost(5), Ratio::new(7, 2));
        assert_eq!(expected_measurement_cost(3), Ratio::zero());
        // Closed form: ((n-1)n/2 - 3) / 2, safely below n²/4 at n = 20.
        let n = 20u64;
        let total = expected_measurement_cost(20);
        assert_eq!(total, Ratio::new((n - 1) * n / 2 - 3, 2));
        assert!(total <= Ratio::new(n * n, 4));
    }

    #[test]
    fn reverse_entangles_each_parent_with_its_set_bits() {
        let (lvl5, _) = build_superposition(5, Variant::Projector).unwrap();
        let reversed = reverse_level(&lvl5, 4).unwrap();
        assert_eq!(reversed.term_count(), 12);
        assert_eq!(reversed.level(), 4);

        // Marginal on path bits: each level-4 cycle appears once per set
        // bit, with the ancilla unit state pointing at that bit.
        let mut per_mask: std::collections::BTreeMap<_, u32> = Default::default();
        for (label, c) in reversed.terms() {
            assert_eq!(c, 1);
            assert_eq!(label.ancilla.count_ones(), 1);
            let l = label.ancilla.set_positions().next().unwrap();
            assert!(label.path.get(l));
            *per_mask.entry(label.path).or_default() += 1;
        }
        assert_eq!(per_mask.len(), 3);
        assert!(per_mask.values().all(|&k| k == 4));
    }

    #[test]
    fn reverse_then_reapply_is_identity() {
        let (lvl5, _) = build_superposition(5, Variant::Projector).unwrap();
        let reversed = reverse_level(&lvl5, 4).unwrap();
        // The mapping itself is level-agnostic; restore the builder's label.
        let forward = apply_um(&reversed, 4).unwrap().set_level(5);
        assert_eq!(forward, lvl5.attach_ancilla_zero(6).unwrap());
    }

    #[test]
    fn single_cycle_expands_to_m_children() {
        let (lvl5, _) = build_superposition(5, Variant::Projector).unwrap();
        let (label, _) = lvl5.terms().next().unwrap();
        let single = SparseState::from_terms(6, 5, 0, [(*label, 1i64)]).unwrap();
        let (children, p) = expand_level(&single, 5, Variant::Projector).unwrap();
        assert_eq!(*p.as_ratio(), Ratio::new(5u128, 10));
        assert_eq!(children.term_count(), 5);
        for (l, _) in children.terms() {
            decode_cycle(&l.path, 6).unwrap();
        }
    }

    #[test]
    fn phase_scramble_keeps_support_and_probability() {
        let (lvl4, _) = {
            let s = SparseState::initial(5).unwrap();
            expand_level(&s, 3, Variant::Projector).unwrap()
        };
        let (plain, p_plain) = expand_level(&lvl4, 4, Variant::Projector).unwrap();

        let (all_plus, p_all_plus) =
            phase_scramble_then_expand(&lvl4, 4, Variant::Projector, |_| Sign::Plus).unwrap();
        assert_eq!(all_plus, plain);
        assert_eq!(p_all_plus, p_plain);

        let mut flip = false;
        let (scrambled, p_scrambled) =
            phase_scramble_then_expand(&lvl4, 4, Variant::Projector, |_| {
                flip = !flip;
                if flip {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            })
            .unwrap();
        assert_eq!(p_plain, p_scrambled);
        let a: Vec<_> = plain.terms().map(|(l, _)| *l).collect();
        let b: Vec<_> = scrambled.terms().map(|(l, _)| *l).collect();
        assert_eq!(a, b);
        for (_, c) in scrambled.terms() {
            assert_eq!(c.abs(), 1);
        }
    }

    #[test]
    fn retain_mode_counts_every_ancilla_bit() {
        let options = BuildOptions { ancilla_mode: AncillaMode::Retain, ..Default::default() };
        let outcome = build_to_level(7, 7, &options).unwrap();
        // Σ m(m-1)/2 for m = 3..=6.
        assert_eq!(outcome.space.ancilla_bits_consumed, 3 + 6 + 10 + 15);
        assert_eq!(outcome.space.peak_ancilla_width, 15);
        assert_eq!(outcome.space.path_bits, 21);
        assert_eq!(outcome.space.peak_live_label_bits, 36);
        assert_eq!(outcome.sub_op_applications, 3 + 6 + 10 + 15);

        let reuse = build_to_level(7, 7, &BuildOptions::default()).unwrap();
        assert_eq!(reuse.space.ancilla_bits_consumed, 15);
    }

    #[test]
    fn sampled_repetitions_track_the_expected_mean() {
        let p = ExactProb::new(1, 2).unwrap();
        let counts = sample_repetitions(&p, 2000, 7).unwrap();
        let m = mean(&counts);
        assert!((m - 2.0).abs() < 0.15, "mean {m} too far from 2");
    }

    #[test]
    fn trace_level_decomposition() {
        let trace = trace_level(5, 4, &BuildOptions::default()).unwrap();
        assert_eq!(trace.good.to_string(), "2/3");
        assert_eq!(trace.residual.to_string(), "1/3");
        assert_eq!(trace.fired_terms, 12);
        assert_eq!(trace.residual_terms, 6);
        let fired_sum: u64 = trace.sub_ops.iter().map(|t| t.fired).sum();
        assert_eq!(fired_sum, 12);

        let trace = trace_level(4, 3, &BuildOptions::default()).unwrap();
        assert_eq!(trace.good, ExactProb::one());
        assert_eq!(trace.residual_terms, 0);
    }

    #[test]
    fn ledger_json_shape() {
        let (_, ledger) = build_superposition(5, Variant::Projector).unwrap();
        let text = ledger.to_json_string().unwrap();
        assert!(text.contains("\"p\": \"2/3\""));
        assert!(text.contains("\"expected_repetitions\": \"3/2\""));
        assert!(text.contains("\"terms_after\": 12"));
    }
}
