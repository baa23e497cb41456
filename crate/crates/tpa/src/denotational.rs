//! History-based semantics: pulse-driven step functions, components as
//! finite function sets, fixed-point composition, hiding, the Banach
//! iterator and the extraction of a component from an automaton via
//! choice resolvers.
//!
//! A [`StepFun`] is a deterministic, causal, bounded-horizon stream
//! transformer. A [`Component`] is a nonempty set of step functions over
//! a fixed (I, O) interface. Resolvers are the constructive stand-in for
//! idealized maximal function sets: each deterministic choice
//! policy over an automaton's transition options induces one member.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::automata::{enumerate_slices, histories_over, AutomataError, Automaton, StateId};
use crate::composition::{compose, ComposeConfig, ComposeError, ComposePath, Composition};
use crate::history::{ChannelSet, History, HistoryError, Slice};
use crate::par;

#[derive(Debug, Error)]
pub enum DenotError {
    #[error("causality violation: {0}")]
    CausalityViolation(String),
    #[error("fixed-point equations failed to re-check: {0}")]
    FixpointInconsistent(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("composition precondition violated: {0}")]
    PrecondViolated(String),
    #[error("emission has domain {got}, expected {expected}")]
    EmissionDomain {
        expected: ChannelSet,
        got: ChannelSet,
    },
    #[error("input outside the enumerated space: {0}")]
    UnknownInput(String),
    #[error("resolver budget of {budget} exceeded")]
    ExplosionGuard { budget: usize },
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
}

/// Causality mode of a step function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PulseMode {
    /// Emission at tick n may read the input through tick n.
    Weak,
    /// Emission at tick n may read the input through tick n-1 only.
    Strong,
    /// The P-part of the emission at tick n may read the J-part of the
    /// input through tick n-1 only; everything else through tick n.
    StrongModulo { j: ChannelSet, p: ChannelSet },
}

impl PulseMode {
    /// Whether this mode guarantees strong pulse-drivenness from `j`
    /// into `p`.
    pub fn covers(&self, j: &ChannelSet, p: &ChannelSet) -> bool {
        if j.is_empty() || p.is_empty() {
            return true;
        }
        match self {
            PulseMode::Weak => false,
            PulseMode::Strong => true,
            PulseMode::StrongModulo { j: mj, p: mp } => j.is_subset(mj) && p.is_subset(mp),
        }
    }
}

/// Whether a weak function's emission at tick n may read tick n's input.
/// The default reading treats "input until time j" as including tick
/// j-1's slice on both sides; the alternative withholds the current
/// tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeakVisibility {
    #[default]
    IncludesCurrentTick,
    ExcludesCurrentTick,
}

/// The emission procedure of a step function: produces the output slice
/// at `tick` reading only the guarded `visible` input prefix.
pub trait EmitFn: Send + Sync {
    fn emit(&self, tick: usize, visible: &History) -> Result<Slice, DenotError>;
}

impl<F> EmitFn for F
where
    F: Fn(usize, &History) -> Result<Slice, DenotError> + Send + Sync,
{
    fn emit(&self, tick: usize, visible: &History) -> Result<Slice, DenotError> {
        self(tick, visible)
    }
}

/// A deterministic, causal, bounded-horizon stream transformer.
#[derive(Clone)]
pub struct StepFun {
    pub inputs: ChannelSet,
    pub outputs: ChannelSet,
    pub mode: PulseMode,
    emit: Arc<dyn EmitFn>,
}

impl fmt::Debug for StepFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "StepFun({} -> {}, {:?})",
            self.inputs, self.outputs, self.mode
        )
    }
}

impl StepFun {
    pub fn new(
        inputs: ChannelSet,
        outputs: ChannelSet,
        mode: PulseMode,
        emit: Arc<dyn EmitFn>,
    ) -> Self {
        StepFun {
            inputs,
            outputs,
            mode,
            emit,
        }
    }

    /// The weak identity-copy function: forwards each input channel to
    /// its paired output channel within the same tick.
    pub fn copy(wiring: &[(&str, &str)]) -> StepFun {
        let pairs: Vec<(String, crate::history::Chan)> = wiring
            .iter()
            .map(|(i, o)| (i.to_string(), crate::history::chan(o)))
            .collect();
        let inputs = ChannelSet::of(&wiring.iter().map(|(i, _)| *i).collect::<Vec<_>>());
        let outputs = ChannelSet::of(&wiring.iter().map(|(_, o)| *o).collect::<Vec<_>>());
        let emit = move |tick: usize, visible: &History| {
            let mut s = Slice::default();
            for (i, o) in &pairs {
                s.set(o.clone(), visible.tick(tick).seq(i).to_vec());
            }
            Ok(s)
        };
        StepFun::new(inputs, outputs, PulseMode::Weak, Arc::new(emit))
    }

    /// The strong unit delay: emits `first` at tick 0 and thereafter the
    /// previous tick's input.
    pub fn delay(wiring: &[(&str, &str)], first: Slice) -> StepFun {
        let pairs: Vec<(String, crate::history::Chan)> = wiring
            .iter()
            .map(|(i, o)| (i.to_string(), crate::history::chan(o)))
            .collect();
        let inputs = ChannelSet::of(&wiring.iter().map(|(i, _)| *i).collect::<Vec<_>>());
        let outputs = ChannelSet::of(&wiring.iter().map(|(_, o)| *o).collect::<Vec<_>>());
        let emit = move |tick: usize, visible: &History| {
            if tick == 0 {
                Ok(first.clone())
            } else {
                let mut s = Slice::default();
                for (i, o) in &pairs {
                    s.set(o.clone(), visible.tick(tick - 1).seq(i).to_vec());
                }
                Ok(s)
            }
        };
        StepFun::new(inputs, outputs, PulseMode::Strong, Arc::new(emit))
    }

    fn guarded_prefix(
        &self,
        input: &History,
        tick: usize,
        vis: WeakVisibility,
    ) -> Result<History, DenotError> {
        let upto = match (&self.mode, vis) {
            (PulseMode::Strong, _) => tick,
            (PulseMode::Weak, WeakVisibility::ExcludesCurrentTick) => tick,
            _ => tick + 1,
        };
        Ok(input.prefix(upto)?)
    }

    /// Emission at one tick under the mode's causality guard.
    pub fn emit_at(
        &self,
        input: &History,
        tick: usize,
        vis: WeakVisibility,
    ) -> Result<Slice, DenotError> {
        let visible = self.guarded_prefix(input, tick, vis)?;
        let out = self.emit.emit(tick, &visible)?;
        if out.domain() != self.outputs {
            return Err(DenotError::EmissionDomain {
                expected: self.outputs.clone(),
                got: out.domain(),
            });
        }
        Ok(out)
    }

    /// Applies the function tick by tick; the output history has the
    /// input's length.
    pub fn apply(&self, input: &History) -> Result<History, DenotError> {
        self.apply_with(input, WeakVisibility::IncludesCurrentTick)
    }

    pub fn apply_with(&self, input: &History, vis: WeakVisibility) -> Result<History, DenotError> {
        let mut out = History::empty(self.outputs.clone());
        for n in 0..input.len() {
            out.push(self.emit_at(input, n, vis)?)?;
        }
        Ok(out)
    }
}

/// Input enumeration parameters for the checkers.
#[derive(Debug, Clone)]
pub struct EnumConfig {
    pub alphabet: crate::automata::Alphabet,
    pub bound: usize,
    pub budget: usize,
    pub vis: WeakVisibility,
}

impl EnumConfig {
    pub fn new(alphabet: crate::automata::Alphabet, bound: usize) -> Self {
        EnumConfig {
            alphabet,
            bound,
            budget: 1_000_000,
            vis: WeakVisibility::IncludesCurrentTick,
        }
    }
}

/// Result of the exhaustive pulse classification.
#[derive(Debug, Clone)]
pub enum Classification {
    Strong,
    /// Weak but not strong, with the inputs and depth witnessing
    /// non-strongness.
    Weak {
        witness: (History, History, usize),
    },
    /// Not even weakly pulse-driven at the declared visibility.
    Violation {
        witness: (History, History, usize),
    },
}

/// Exhaustively tests weak and strong pulse-drivenness of `f` over all
/// enumerated input pairs up to the horizon.
pub fn classify_pulse(
    f: &StepFun,
    cfg: &EnumConfig,
    horizon: usize,
) -> Result<Classification, DenotError> {
    let inputs = histories_over(&f.inputs, &cfg.alphabet, cfg.bound, horizon);
    if inputs.len() > cfg.budget {
        return Err(DenotError::ExplosionGuard { budget: cfg.budget });
    }
    let vis = cfg.vis;
    let outputs = par::try_map_vec(inputs, |input| {
        let out = f.apply_with(&input, vis)?;
        Ok::<_, DenotError>((input, out))
    })?;
    // Weak: agreement through j implies output agreement through j.
    for j in 0..=horizon {
        let mut groups: BTreeMap<History, (History, History)> = BTreeMap::new();
        for (input, out) in &outputs {
            let key = input.prefix(j)?;
            let val = out.prefix(j)?;
            match groups.get(&key) {
                None => {
                    groups.insert(key, (input.clone(), val));
                }
                Some((first, expected)) => {
                    if val != *expected {
                        return Ok(Classification::Violation {
                            witness: (first.clone(), input.clone(), j),
                        });
                    }
                }
            }
        }
    }
    // Strong: agreement through j implies output agreement through j+1.
    for j in 0..horizon {
        let mut groups: BTreeMap<History, (History, History)> = BTreeMap::new();
        for (input, out) in &outputs {
            let key = input.prefix(j)?;
            let val = out.prefix(j + 1)?;
            match groups.get(&key) {
                None => {
                    groups.insert(key, (input.clone(), val));
                }
                Some((first, expected)) => {
                    if val != *expected {
                        return Ok(Classification::Weak {
                            witness: (first.clone(), input.clone(), j),
                        });
                    }
                }
            }
        }
    }
    Ok(Classification::Strong)
}

/// Configuration of the Banach iteration.
#[derive(Debug, Clone)]
pub struct FixConfig {
    pub horizon: usize,
    /// Maximum number of applications of the transformer; contractive
    /// transformers stabilize within horizon + 1.
    pub max_iterations: usize,
    /// Starting iterate; all-empty slices when absent.
    pub seed: Option<History>,
    /// When present, the iteration is re-run from this seed and the two
    /// results must agree; a mismatch rejects the transformer as
    /// non-contractive.
    pub check_seed: Option<History>,
}

impl FixConfig {
    pub fn new(horizon: usize) -> Self {
        FixConfig {
            horizon,
            max_iterations: horizon + 1,
            seed: None,
            check_seed: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixOutcome {
    pub value: History,
    /// Applications needed before the iterate stopped changing.
    pub iterations: usize,
}

fn iterate_to_fixpoint<F>(
    domain: &ChannelSet,
    f: &F,
    seed: History,
    cfg: &FixConfig,
) -> Result<FixOutcome, DenotError>
where
    F: Fn(&History) -> Result<History, DenotError>,
{
    let mut cur = seed;
    for application in 1..=cfg.max_iterations {
        let next = f(&cur)?;
        if next.domain() != domain || next.len() != cfg.horizon {
            return Err(DenotError::FixpointInconsistent(format!(
                "transformer produced domain {} length {}, expected {} length {}",
                next.domain(),
                next.len(),
                domain,
                cfg.horizon
            )));
        }
        if next == cur {
            return Ok(FixOutcome {
                value: next,
                iterations: application - 1,
            });
        }
        cur = next;
    }
    Err(DenotError::NoConvergence(format!(
        "iterate still changing after {} applications",
        cfg.max_iterations
    )))
}

/// Banach iteration on history transformers. The transformer must be
/// contractive at prefix level: its output at tick n may depend on input
/// ticks before n only. The returned value satisfies r = f(r) through
/// the horizon and is independent of the seed.
pub fn banach_fix<F>(domain: &ChannelSet, f: F, cfg: &FixConfig) -> Result<FixOutcome, DenotError>
where
    F: Fn(&History) -> Result<History, DenotError>,
{
    let seed = cfg
        .seed
        .clone()
        .unwrap_or_else(|| History::silent(domain.clone(), cfg.horizon));
    let outcome = iterate_to_fixpoint(domain, &f, seed, cfg)?;
    if let Some(check_seed) = &cfg.check_seed {
        let alt = iterate_to_fixpoint(domain, &f, check_seed.clone(), cfg)?;
        if alt.value != outcome.value {
            return Err(DenotError::NoConvergence(
                "fixed point depends on the seed; transformer is not contractive".into(),
            ));
        }
    }
    Ok(outcome)
}

/// A nonempty set of step functions over a fixed (I, O) interface.
#[derive(Debug, Clone)]
pub struct Component {
    pub inputs: ChannelSet,
    pub outputs: ChannelSet,
    pub members: Vec<StepFun>,
}

impl Component {
    pub fn new(
        inputs: ChannelSet,
        outputs: ChannelSet,
        members: Vec<StepFun>,
    ) -> Result<Self, DenotError> {
        if members.is_empty() {
            return Err(DenotError::PrecondViolated(
                "a component must be a nonempty function set".into(),
            ));
        }
        for m in &members {
            if m.inputs != inputs || m.outputs != outputs {
                return Err(DenotError::PrecondViolated(format!(
                    "member interface {} -> {} does not match component {} -> {}",
                    m.inputs, m.outputs, inputs, outputs
                )));
            }
        }
        Ok(Component {
            inputs,
            outputs,
            members,
        })
    }

    /// The set of outputs the component can produce for one input.
    pub fn output_set(&self, input: &History) -> Result<BTreeSet<History>, DenotError> {
        self.members.iter().map(|f| f.apply(input)).collect()
    }

    /// Collapses members that agree on every enumerated input at the
    /// horizon (extensional duplicates).
    pub fn dedup_extensional(
        &mut self,
        cfg: &EnumConfig,
        horizon: usize,
    ) -> Result<(), DenotError> {
        let inputs = histories_over(&self.inputs, &cfg.alphabet, cfg.bound, horizon);
        let mut seen: BTreeSet<Vec<History>> = BTreeSet::new();
        let mut kept = Vec::new();
        for f in self.members.drain(..) {
            let table: Vec<History> = inputs
                .iter()
                .map(|i| f.apply(i))
                .collect::<Result<_, _>>()?;
            if seen.insert(table) {
                kept.push(f);
            }
        }
        self.members = kept;
        Ok(())
    }
}

struct CompositeEmit {
    strong: StepFun,
    weak: StepFun,
    /// Channels feeding back into the strong side (⊆ its inputs).
    j_strong: ChannelSet,
    /// Channels fed by the strong side to the weak one (⊆ its outputs).
    p_strong: ChannelSet,
    /// J-completions probed to verify the strong side's feedback output
    /// is invariant over its current-tick feedback input.
    completions: Vec<Slice>,
}

impl CompositeEmit {
    /// Builds a side's input prefix of `len` ticks from the external
    /// input and the feedback history, with `last_fb` supplying the
    /// final tick's feedback part.
    fn side_prefix(
        side_inputs: &ChannelSet,
        fb_channels: &ChannelSet,
        external: &History,
        fb_hist: &History,
        last_fb: &Slice,
        len: usize,
    ) -> Result<History, DenotError> {
        let mut h = History::empty(side_inputs.clone());
        for t in 0..len {
            let mut s = Slice::empty(side_inputs);
            for c in side_inputs.iter() {
                if fb_channels.contains(c) {
                    let seq = if t + 1 == len {
                        last_fb.seq(c)
                    } else {
                        fb_hist.tick(t).seq(c)
                    };
                    s.set(c.clone(), seq.to_vec());
                } else {
                    s.set(c.clone(), external.tick(t).seq(c).to_vec());
                }
            }
            h.push(s)?;
        }
        Ok(h)
    }
}

impl EmitFn for CompositeEmit {
    fn emit(&self, tick: usize, visible: &History) -> Result<Slice, DenotError> {
        let vis = WeakVisibility::IncludesCurrentTick;
        let mut strong_out = History::empty(self.strong.outputs.clone());
        let mut weak_out = History::empty(self.weak.outputs.clone());
        for m in 0..=tick {
            // Step 1: the strong side's feedback-facing output, which
            // must be invariant over completions of its current-tick
            // feedback input.
            let mut p_out: Option<Slice> = None;
            for cand in &self.completions {
                let in_s = Self::side_prefix(
                    &self.strong.inputs,
                    &self.j_strong,
                    visible,
                    &weak_out,
                    cand,
                    m + 1,
                )?;
                let e = self.strong.emit_at(&in_s, m, vis)?.project(&self.p_strong);
                match &p_out {
                    None => p_out = Some(e),
                    Some(expected) if *expected != e => {
                        return Err(DenotError::CausalityViolation(format!(
                            "feedback output at tick {m} depends on the current-tick \
                             feedback input; the strong mode declaration is wrong"
                        )));
                    }
                    Some(_) => {}
                }
            }
            let p_out = p_out.expect("at least one completion");

            // Step 2: the weak side now has a complete input at tick m.
            let in_w = Self::side_prefix(
                &self.weak.inputs,
                &self.p_strong,
                visible,
                &strong_out,
                &p_out,
                m + 1,
            )?;
            let w_slice = self.weak.emit_at(&in_w, m, vis)?;

            // Step 3: complete the strong side and re-check consistency.
            let j_val = w_slice.project(&self.j_strong);
            let in_s = Self::side_prefix(
                &self.strong.inputs,
                &self.j_strong,
                visible,
                &weak_out,
                &j_val,
                m + 1,
            )?;
            let s_slice = self.strong.emit_at(&in_s, m, vis)?;
            if s_slice.project(&self.p_strong) != p_out {
                return Err(DenotError::FixpointInconsistent(format!(
                    "strong-side output at tick {m} changed after closing the loop"
                )));
            }
            strong_out.push(s_slice)?;
            weak_out.push(w_slice)?;
        }
        Ok(strong_out.tick(tick).sum(weak_out.tick(tick))?)
    }
}

/// One-to-many composition of components. One side must be strongly
/// pulse-driven on the feedback channels (or a feedback set must be
/// empty); the composite evaluates that side's feedback output first on
/// each tick and re-checks the defining equations as it goes.
pub fn compose_components(
    c1: &Component,
    c2: &Component,
    cfg: &EnumConfig,
) -> Result<Component, DenotError> {
    for (label, a, b) in [
        ("I1 and O1", &c1.inputs, &c1.outputs),
        ("I2 and O2", &c2.inputs, &c2.outputs),
        ("O1 and O2", &c1.outputs, &c2.outputs),
    ] {
        if let Some(c) = a.first_common(b) {
            return Err(DenotError::PrecondViolated(format!(
                "{label} must be disjoint but share `{c}`"
            )));
        }
    }
    let j = c1.inputs.intersect(&c2.outputs);
    let p = c2.inputs.intersect(&c1.outputs);
    let inputs = c1
        .inputs
        .minus(&c2.outputs)
        .union(&c2.inputs.minus(&c1.outputs));
    let outputs = c1.outputs.union(&c2.outputs);

    // Pick the side evaluated first on each tick.
    let first_is_c1 = if j.is_empty() {
        true
    } else if p.is_empty() {
        false
    } else if c1.members.iter().all(|f| f.mode.covers(&j, &p)) {
        true
    } else if c2.members.iter().all(|f| f.mode.covers(&p, &j)) {
        false
    } else {
        return Err(DenotError::PrecondViolated(format!(
            "neither side is strongly pulse-driven on the feedback channels (J={j}, P={p})"
        )));
    };

    if c1
        .members
        .len()
        .checked_mul(c2.members.len())
        .is_none_or(|n| n > cfg.budget)
    {
        return Err(DenotError::ExplosionGuard { budget: cfg.budget });
    }

    let (j_strong, p_strong) = if first_is_c1 {
        (j.clone(), p.clone())
    } else {
        (p.clone(), j.clone())
    };
    let completions = enumerate_slices(&j_strong, &cfg.alphabet, cfg.bound);

    let mut members = Vec::with_capacity(c1.members.len() * c2.members.len());
    for f1 in &c1.members {
        for f2 in &c2.members {
            let (strong, weak) = if first_is_c1 {
                (f1.clone(), f2.clone())
            } else {
                (f2.clone(), f1.clone())
            };
            members.push(StepFun::new(
                inputs.clone(),
                outputs.clone(),
                PulseMode::Weak,
                Arc::new(CompositeEmit {
                    strong,
                    weak,
                    j_strong: j_strong.clone(),
                    p_strong: p_strong.clone(),
                    completions: completions.clone(),
                }),
            ));
        }
    }
    Component::new(inputs, outputs, members)
}

/// Re-checks the defining feedback equations of a composite run:
/// o = f1((ι + p)|I1) and p = f2((ι + o)|I2).
pub fn check_composition_equations(
    f1: &StepFun,
    f2: &StepFun,
    input: &History,
    o: &History,
    p: &History,
) -> Result<(), DenotError> {
    let in1 = input.sum(p)?.project(&f1.inputs);
    if f1.apply(&in1)? != *o {
        return Err(DenotError::FixpointInconsistent(
            "o = f1((iota + p)|I1) failed".into(),
        ));
    }
    let in2 = input.sum(o)?.project(&f2.inputs);
    if f2.apply(&in2)? != *p {
        return Err(DenotError::FixpointInconsistent(
            "p = f2((iota + o)|I2) failed".into(),
        ));
    }
    Ok(())
}

/// Hiding on components: every member's output is projected to O \ P.
pub fn hide_component(c: &Component, p: &ChannelSet) -> Result<Component, DenotError> {
    if let Some(ch) = p.iter().find(|ch| !c.outputs.contains(ch)) {
        return Err(DenotError::PrecondViolated(format!(
            "channel `{ch}` is not an output"
        )));
    }
    let keep = c.outputs.minus(p);
    let members = c
        .members
        .iter()
        .map(|f| {
            let inner = f.clone();
            let keep = keep.clone();
            StepFun::new(
                f.inputs.clone(),
                keep.clone(),
                f.mode.clone(),
                Arc::new(move |tick: usize, visible: &History| {
                    Ok(inner
                        .emit_at(visible, tick, WeakVisibility::IncludesCurrentTick)?
                        .project(&keep))
                }),
            )
        })
        .collect();
    Component::new(c.inputs.clone(), keep, members)
}

/// Resolver enumeration parameters.
#[derive(Debug, Clone)]
pub struct ResolverConfig {
    /// Maximum number of exhaustively enumerated members; above this the
    /// extraction falls back to seeded sampling.
    pub member_budget: usize,
    /// Number of sampled members in sampling mode.
    pub sample_size: usize,
    pub seed: u64,
    /// Per-tick input sequence length bound of the strategy tree;
    /// defaults to the automaton's own bound when `None`. Must cover
    /// every slice the member will be applied to, including feedback
    /// values produced by a partner.
    pub input_len_bound: Option<usize>,
}

impl Default for ResolverConfig {
    fn default() -> Self {
        ResolverConfig {
            member_budget: 4096,
            sample_size: 64,
            seed: 1,
            input_len_bound: None,
        }
    }
}

/// A component extracted from an automaton, with a flag telling whether
/// the member set is exhaustive or a seeded sample.
#[derive(Debug, Clone)]
pub struct ResolvedComponent {
    pub component: Component,
    pub exhaustive: bool,
}

#[derive(Debug, Clone)]
struct StrategyNode {
    children: BTreeMap<Slice, (usize, StrategyNode)>,
}

fn count_strategies(
    a: &Automaton,
    state: &StateId,
    depth: usize,
    input_slices: &[Slice],
    memo: &mut HashMap<(StateId, usize), u128>,
) -> Result<u128, DenotError> {
    if depth == 0 {
        return Ok(1);
    }
    if let Some(&n) = memo.get(&(state.clone(), depth)) {
        return Ok(n);
    }
    let mut product: u128 = 1;
    for input in input_slices {
        let mut alternatives: u128 = 0;
        for (_, target) in a.step(state, input)? {
            alternatives = alternatives.saturating_add(count_strategies(
                a,
                &target,
                depth - 1,
                input_slices,
                memo,
            )?);
        }
        if alternatives == 0 {
            return Err(DenotError::PrecondViolated(format!(
                "automaton is not reactive at state `{state}`"
            )));
        }
        product = product.saturating_mul(alternatives);
    }
    memo.insert((state.clone(), depth), product);
    Ok(product)
}

fn enumerate_strategy_nodes(
    a: &Automaton,
    state: &StateId,
    depth: usize,
    input_slices: &[Slice],
    budget: usize,
) -> Result<Vec<StrategyNode>, DenotError> {
    if depth == 0 {
        return Ok(vec![StrategyNode {
            children: BTreeMap::new(),
        }]);
    }
    // Alternatives per input slice: (choice index, subtree).
    let mut per_input: Vec<(Slice, Vec<(usize, StrategyNode)>)> = Vec::new();
    for input in input_slices {
        let mut alts = Vec::new();
        for (k, (_, target)) in a.step(state, input)?.into_iter().enumerate() {
            for sub in enumerate_strategy_nodes(a, &target, depth - 1, input_slices, budget)? {
                alts.push((k, sub));
            }
        }
        per_input.push((input.clone(), alts));
    }
    let mut out: Vec<StrategyNode> = vec![StrategyNode {
        children: BTreeMap::new(),
    }];
    for (input, alts) in per_input {
        let mut next = Vec::with_capacity(out.len() * alts.len());
        for node in &out {
            for (k, sub) in &alts {
                if next.len() + 1 > budget {
                    return Err(DenotError::ExplosionGuard { budget });
                }
                let mut n = node.clone();
                n.children.insert(input.clone(), (*k, sub.clone()));
                next.push(n);
            }
        }
        out = next;
    }
    Ok(out)
}

struct StrategyEmit {
    automaton: Arc<Automaton>,
    root: StrategyNode,
    outputs: ChannelSet,
}

impl EmitFn for StrategyEmit {
    fn emit(&self, tick: usize, visible: &History) -> Result<Slice, DenotError> {
        let mut state = self.automaton.start.clone();
        let mut node = &self.root;
        for m in 0..=tick {
            let input = visible.tick(m);
            let (k, child) = node
                .children
                .get(input)
                .ok_or_else(|| DenotError::UnknownInput(format!("{input}")))?;
            let steps = self.automaton.step(&state, input)?;
            let (action, target) = steps
                .get(*k)
                .ok_or_else(|| DenotError::UnknownInput(format!("choice {k} at {input}")))?;
            if m == tick {
                return Ok(action.project(&self.outputs));
            }
            state = target.clone();
            node = child;
        }
        unreachable!("loop returns at m == tick")
    }
}

fn fnv1a64(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for part in parts {
        for &b in *part {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

struct SampledStrategyEmit {
    automaton: Arc<Automaton>,
    outputs: ChannelSet,
    seed: u64,
    member_index: u64,
}

impl EmitFn for SampledStrategyEmit {
    fn emit(&self, tick: usize, visible: &History) -> Result<Slice, DenotError> {
        let mut state = self.automaton.start.clone();
        let mut prefix = String::new();
        for m in 0..=tick {
            let input = visible.tick(m);
            prefix.push_str(&input.to_string());
            prefix.push(';');
            let steps = self.automaton.step(&state, input)?;
            if steps.is_empty() {
                return Err(DenotError::PrecondViolated(format!(
                    "automaton is not reactive at state `{state}`"
                )));
            }
            let k = (fnv1a64(&[
                &self.seed.to_le_bytes(),
                &self.member_index.to_le_bytes(),
                prefix.as_bytes(),
            ]) % steps.len() as u64) as usize;
            let (action, target) = &steps[k];
            if m == tick {
                return Ok(action.project(&self.outputs));
            }
            state = target.clone();
        }
        unreachable!("loop returns at m == tick")
    }
}

/// Extracts the component generated by an automaton at a bounded
/// horizon. Each member replays one deterministic choice policy over the
/// input-prefix tree; the exhaustive family realizes every behavior of
/// the automaton, the sampled one a stated subset.
pub fn automaton_to_component(
    a: &Automaton,
    horizon: usize,
    mode: PulseMode,
    cfg: &ResolverConfig,
) -> Result<ResolvedComponent, DenotError> {
    // Replaying the transition relation needs the current tick's input,
    // so a truncating `Strong` guard cannot apply here; declared
    // strongness becomes the full-visibility modulo form, whose
    // invariance the composite schedule checks extensionally.
    let mode = match mode {
        PulseMode::Strong => PulseMode::StrongModulo {
            j: a.signature.inputs.clone(),
            p: a.signature.outputs.clone(),
        },
        m => m,
    };
    let bound = cfg.input_len_bound.unwrap_or(a.input_bound);
    let input_slices = enumerate_slices(&a.signature.inputs, &a.signature.alphabet, bound);
    let automaton = Arc::new(a.clone());
    let outputs = a.signature.outputs.clone();
    let inputs = a.signature.inputs.clone();

    let mut memo = HashMap::new();
    let total = count_strategies(a, &a.start, horizon, &input_slices, &mut memo)?;
    if total <= cfg.member_budget as u128 {
        let roots =
            enumerate_strategy_nodes(a, &a.start, horizon, &input_slices, cfg.member_budget)?;
        let members = roots
            .into_iter()
            .map(|root| {
                StepFun::new(
                    inputs.clone(),
                    outputs.clone(),
                    mode.clone(),
                    Arc::new(StrategyEmit {
                        automaton: automaton.clone(),
                        root,
                        outputs: outputs.clone(),
                    }),
                )
            })
            .collect();
        Ok(ResolvedComponent {
            component: Component::new(inputs, outputs, members)?,
            exhaustive: true,
        })
    } else {
        let members = (0..cfg.sample_size as u64)
            .map(|member_index| {
                StepFun::new(
                    inputs.clone(),
                    outputs.clone(),
                    mode.clone(),
                    Arc::new(SampledStrategyEmit {
                        automaton: automaton.clone(),
                        outputs: outputs.clone(),
                        seed: cfg.seed,
                        member_index,
                    }),
                )
            })
            .collect();
        Ok(ResolvedComponent {
            component: Component::new(inputs, outputs, members)?,
            exhaustive: false,
        })
    }
}

/// Verdict of the state-based vs history-based equivalence check.
#[derive(Debug, Clone)]
pub enum EquivOutcome {
    /// Output sets agree for every enumerated input. `exhaustive` is
    /// false when resolver sampling was in effect, downgrading the
    /// verdict to "no counterexample found".
    Equivalent { exhaustive: bool },
    Counterexample {
        input: History,
        automaton_side: BTreeSet<History>,
        component_side: BTreeSet<History>,
    },
}

impl EquivOutcome {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivOutcome::Equivalent { .. })
    }
}

/// Longest output sequence the automaton emits on `channels` over its
/// bounded input space, probed from every state.
pub fn max_output_len(a: &Automaton, channels: &ChannelSet) -> Result<usize, DenotError> {
    let mut max = 0;
    let inputs = a.input_slices();
    for s in &a.states {
        for input in &inputs {
            for (action, _) in a.step(s, input)? {
                for c in channels.iter() {
                    max = max.max(action.seq(c).len());
                }
            }
        }
    }
    Ok(max)
}

/// Compares, input by input, the component extracted from the composed
/// automaton against the composition of the extracted components.
pub fn check_equivalence(
    a1: &Automaton,
    a2: &Automaton,
    horizon: usize,
    ccfg: &ComposeConfig,
    rcfg: &ResolverConfig,
) -> Result<EquivOutcome, DenotError> {
    let Composition {
        automaton: product,
        path,
    } = compose(a1, a2, ccfg)?;

    // Member strategy trees must cover the feedback slices the partner
    // can produce, not just the external input bound.
    let wired_1 = a1.signature.inputs.intersect(&a2.signature.outputs);
    let wired_2 = a2.signature.inputs.intersect(&a1.signature.outputs);
    let bound_1 = a1.input_bound.max(max_output_len(a2, &wired_1)?);
    let bound_2 = a2.input_bound.max(max_output_len(a1, &wired_2)?);

    let (mode_1, mode_2) = match &path {
        ComposePath::Constructive { first_is_a1, j, p } if !j.is_empty() && !p.is_empty() => {
            if *first_is_a1 {
                (
                    PulseMode::StrongModulo {
                        j: j.clone(),
                        p: p.clone(),
                    },
                    PulseMode::Weak,
                )
            } else {
                (
                    PulseMode::Weak,
                    PulseMode::StrongModulo {
                        j: p.clone(),
                        p: j.clone(),
                    },
                )
            }
        }
        _ => (PulseMode::Weak, PulseMode::Weak),
    };

    let lhs = automaton_to_component(&product, horizon, PulseMode::Weak, rcfg)?;
    let r1 = automaton_to_component(
        a1,
        horizon,
        mode_1,
        &ResolverConfig {
            input_len_bound: Some(bound_1),
            ..rcfg.clone()
        },
    )?;
    let r2 = automaton_to_component(
        a2,
        horizon,
        mode_2,
        &ResolverConfig {
            input_len_bound: Some(bound_2),
            ..rcfg.clone()
        },
    )?;
    let ecfg = EnumConfig::new(product.signature.alphabet.clone(), product.input_bound);
    let rhs = compose_components(&r1.component, &r2.component, &ecfg)?;

    let exhaustive = lhs.exhaustive && r1.exhaustive && r2.exhaustive;
    let inputs = product.input_histories(horizon);
    let verdicts = par::try_map_vec(inputs, |input| {
        let automaton_side = lhs.component.output_set(&input)?;
        let component_side = rhs.output_set(&input)?;
        Ok::<_, DenotError>(if automaton_side == component_side {
            None
        } else {
            Some((input, automaton_side, component_side))
        })
    })?;
    if let Some((input, automaton_side, component_side)) = verdicts.into_iter().flatten().next() {
        return Ok(EquivOutcome::Counterexample {
            input,
            automaton_side,
            component_side,
        });
    }
    Ok(EquivOutcome::Equivalent { exhaustive })
}
