//! One-to-many composition of signatures and automata, hiding, the
//! well-definedness precondition and the decomposition oracle.
//!
//! The product transition relation is realized by one of two schedules:
//! a constructive one when one side is strongly pulse-driven on the
//! feedback channels (evaluate that side's feedback output first), and a
//! bounded joint search over candidate feedback slices otherwise. Both
//! produce identical relations on instances where both apply.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::automata::{
    check_reactive, check_signature, check_strong_pulse_modulo, enumerate_slices, executions,
    AutomataError, Automaton, Delta, Execution, PortSignature, PulseVerdict, ReactiveVerdict,
    Responder, StateId,
};
use crate::history::{Chan, ChannelSet, History, HistoryError, Slice};

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("incompatible signatures: {clause} share channel `{channel}`")]
    IncompatibleSignatures { clause: &'static str, channel: Chan },
    #[error("alphabet mismatch between the two signatures")]
    AlphabetMismatch,
    #[error("empty composition at state `{state}` on input {input} (feedback searched up to length {bound})")]
    EmptyComposition {
        state: StateId,
        input: Slice,
        bound: usize,
    },
    #[error("channel `{0}` is not an output")]
    NotAnOutput(Chan),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    History(#[from] HistoryError),
}

/// Checks signature compatibility: no shared writers, hidden channels
/// private to their owner.
pub fn compatible(s1: &PortSignature, s2: &PortSignature) -> Result<(), ComposeError> {
    if s1.alphabet != s2.alphabet {
        return Err(ComposeError::AlphabetMismatch);
    }
    if let Some(channel) = s1.outputs.first_common(&s2.outputs) {
        return Err(ComposeError::IncompatibleSignatures {
            clause: "O1 and O2",
            channel,
        });
    }
    if let Some(channel) = s1.hidden.first_common(&s2.channels()) {
        return Err(ComposeError::IncompatibleSignatures {
            clause: "H1 and C2",
            channel,
        });
    }
    if let Some(channel) = s2.hidden.first_common(&s1.channels()) {
        return Err(ComposeError::IncompatibleSignatures {
            clause: "H2 and C1",
            channel,
        });
    }
    Ok(())
}

/// I = (I1\O2) ∪ (I2\O1), O = O1 ∪ O2, H = H1 ∪ H2.
pub fn compose_signatures(
    s1: &PortSignature,
    s2: &PortSignature,
) -> Result<PortSignature, ComposeError> {
    compatible(s1, s2)?;
    let sig = PortSignature::new(
        s1.alphabet.clone(),
        s1.inputs
            .minus(&s2.outputs)
            .union(&s2.inputs.minus(&s1.outputs)),
        s1.outputs.union(&s2.outputs),
        s1.hidden.union(&s2.hidden),
    );
    check_signature(&sig)?;
    Ok(sig)
}

/// Which schedule realizes a product's transition relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComposePath {
    /// One side's feedback output is computed first; `first_is_a1` says
    /// which.
    Constructive {
        first_is_a1: bool,
        j: ChannelSet,
        p: ChannelSet,
    },
    /// Bounded enumeration of candidate feedback slices.
    JointSearch { bound: usize },
}

impl fmt::Display for ComposePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComposePath::Constructive { first_is_a1, j, p } => write!(
                f,
                "WELL-DEFINED via {} strong mod ({j},{p})",
                if *first_is_a1 { "A1" } else { "A2" }
            ),
            ComposePath::JointSearch { bound } => write!(f, "JOINT-SEARCH bound={bound}"),
        }
    }
}

/// Outcome of the well-definedness precondition check at a bounded horizon.
#[derive(Debug, Clone)]
pub struct PrecondVerdict {
    pub j: ChannelSet,
    pub p: ChannelSet,
    pub a1_strong_mod: bool,
    pub a2_strong_mod: bool,
}

impl PrecondVerdict {
    /// Whether the composition is known to be well defined: trivially if
    /// either feedback set is empty, otherwise by one side being
    /// strongly pulse-driven on the feedback channels.
    pub fn well_defined(&self) -> bool {
        self.j.is_empty() || self.p.is_empty() || self.a1_strong_mod || self.a2_strong_mod
    }
}

/// Computes J = I1∩O2 and P = I2∩O1 and checks each side's
/// strong-pulse-modulo condition at the given horizon.
pub fn check_compose_precondition(
    a1: &Automaton,
    a2: &Automaton,
    horizon: usize,
    budget: usize,
) -> Result<PrecondVerdict, ComposeError> {
    compatible(&a1.signature, &a2.signature)?;
    let j = a1.signature.inputs.intersect(&a2.signature.outputs);
    let p = a2.signature.inputs.intersect(&a1.signature.outputs);
    let a1_strong_mod = if j.is_empty() || p.is_empty() {
        true
    } else {
        check_strong_pulse_modulo(a1, &j, &p, horizon, budget)? == PulseVerdict::Ok
    };
    let a2_strong_mod = if j.is_empty() || p.is_empty() {
        true
    } else {
        check_strong_pulse_modulo(a2, &p, &j, horizon, budget)? == PulseVerdict::Ok
    };
    Ok(PrecondVerdict {
        j,
        p,
        a1_strong_mod,
        a2_strong_mod,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComposeConfig {
    /// Maximum per-channel sequence length of feedback candidates in the
    /// joint search.
    pub joint_bound: usize,
    /// Horizon at which the well-definedness precondition is probed.
    pub precheck_horizon: usize,
    /// Node budget for the internal pulse checks and the product
    /// reactiveness sweep.
    pub budget: usize,
}

impl Default for ComposeConfig {
    fn default() -> Self {
        ComposeConfig {
            joint_bound: 2,
            precheck_horizon: 2,
            budget: 1_000_000,
        }
    }
}

/// Which schedule `compose_forced` must use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcedPath {
    Auto,
    Joint,
    ConstructiveA1,
    ConstructiveA2,
}

/// A composed automaton together with the schedule that realizes it.
#[derive(Debug, Clone)]
pub struct Composition {
    pub automaton: Automaton,
    pub path: ComposePath,
}

/// Canonical state id of a product pair.
pub fn pair_id(s1: &StateId, s2: &StateId) -> StateId {
    Arc::from(format!("({s1},{s2})"))
}

struct PairTable {
    decode: BTreeMap<StateId, (StateId, StateId)>,
}

impl PairTable {
    fn new(a1: &Automaton, a2: &Automaton) -> Arc<PairTable> {
        let mut decode = BTreeMap::new();
        for s1 in &a1.states {
            for s2 in &a2.states {
                decode.insert(pair_id(s1, s2), (s1.clone(), s2.clone()));
            }
        }
        Arc::new(PairTable { decode })
    }

    fn get(&self, s: &StateId) -> Result<&(StateId, StateId), AutomataError> {
        self.decode
            .get(s)
            .ok_or_else(|| AutomataError::UnknownState(s.clone()))
    }
}

/// Builds the I-slice of one side from the product input and the current
/// feedback candidate.
fn side_input(own_inputs: &ChannelSet, feedback: &ChannelSet, i: &Slice, fb: &Slice) -> Slice {
    let mut s = Slice::empty(own_inputs);
    for c in own_inputs.iter() {
        if feedback.contains(c) {
            s.set(c.clone(), fb.seq(c).to_vec());
        } else {
            s.set(c.clone(), i.seq(c).to_vec());
        }
    }
    s
}

struct JointResponder {
    a1: Arc<Automaton>,
    a2: Arc<Automaton>,
    pairs: Arc<PairTable>,
    feedback_slices: Vec<Slice>,
    j: ChannelSet,
    p: ChannelSet,
}

impl Responder for JointResponder {
    fn respond(&self, s: &StateId, input: &Slice) -> Result<Vec<(Slice, StateId)>, AutomataError> {
        let (s1, s2) = self.pairs.get(s)?.clone();
        let mut out = Vec::new();
        for fb in &self.feedback_slices {
            let in1 = side_input(&self.a1.signature.inputs, &self.j, input, fb);
            let in2 = side_input(&self.a2.signature.inputs, &self.p, input, fb);
            let steps1: Vec<_> = self
                .a1
                .step(&s1, &in1)?
                .into_iter()
                .filter(|(act, _)| act.project(&self.p) == fb.project(&self.p))
                .collect();
            if steps1.is_empty() {
                continue;
            }
            let steps2: Vec<_> = self
                .a2
                .step(&s2, &in2)?
                .into_iter()
                .filter(|(act, _)| act.project(&self.j) == fb.project(&self.j))
                .collect();
            for (act1, t1) in &steps1 {
                for (act2, t2) in &steps2 {
                    let action = act1
                        .merge(act2)
                        .map_err(|e| AutomataError::ResponderContract(e.to_string()))?;
                    out.push((action, pair_id(t1, t2)));
                }
            }
        }
        Ok(out)
    }
}

struct ConstructiveResponder {
    a1: Arc<Automaton>,
    a2: Arc<Automaton>,
    pairs: Arc<PairTable>,
    /// Whether the side evaluated first (the strong one) is `a1`.
    first_is_a1: bool,
    /// Feedback into the strong side (its inputs written by the other).
    j_strong: ChannelSet,
    /// Feedback out of the strong side (the other side's inputs).
    p_strong: ChannelSet,
    /// Candidate completions of the strong side's J-input, used both to
    /// seed the schedule and to verify output invariance at runtime.
    completions: Vec<Slice>,
}

impl ConstructiveResponder {
    fn sides<'a>(
        &'a self,
        s1: &'a StateId,
        s2: &'a StateId,
    ) -> (&'a Automaton, &'a Automaton, &'a StateId, &'a StateId) {
        if self.first_is_a1 {
            (&self.a1, &self.a2, s1, s2)
        } else {
            (&self.a2, &self.a1, s2, s1)
        }
    }
}

impl Responder for ConstructiveResponder {
    fn respond(&self, s: &StateId, input: &Slice) -> Result<Vec<(Slice, StateId)>, AutomataError> {
        let (s1, s2) = self.pairs.get(s)?.clone();
        let (strong, weak, ss, sw) = self.sides(&s1, &s2);

        // Step 1: the strong side's feedback output must not depend on
        // its current-tick feedback input. The precondition check was
        // horizon-bounded, so this is re-verified on every step.
        let mut p_outs: Option<BTreeSet<Slice>> = None;
        for completion in &self.completions {
            let in_s = side_input(&strong.signature.inputs, &self.j_strong, input, completion);
            let outs: BTreeSet<Slice> = strong
                .step(ss, &in_s)?
                .into_iter()
                .map(|(act, _)| act.project(&self.p_strong))
                .collect();
            match &p_outs {
                None => p_outs = Some(outs),
                Some(expected) if *expected != outs => {
                    return Err(AutomataError::ResponderContract(format!(
                        "feedback output of the strong side depends on its current-tick \
                         feedback input at state `{ss}` on input {input}"
                    )));
                }
                Some(_) => {}
            }
        }
        let p_outs = p_outs.unwrap_or_default();

        // Steps 2 and 3: complete the weak side, then the strong side.
        let mut out = Vec::new();
        for p_out in &p_outs {
            let in_w = side_input(&weak.signature.inputs, &self.p_strong, input, p_out);
            for (act_w, t_w) in weak.step(sw, &in_w)? {
                let j_val = act_w.project(&self.j_strong);
                let in_s = side_input(&strong.signature.inputs, &self.j_strong, input, &j_val);
                for (act_s, t_s) in strong.step(ss, &in_s)? {
                    if act_s.project(&self.p_strong) != *p_out {
                        continue;
                    }
                    let action = act_s
                        .merge(&act_w)
                        .map_err(|e| AutomataError::ResponderContract(e.to_string()))?;
                    let target = if self.first_is_a1 {
                        pair_id(&t_s, &t_w)
                    } else {
                        pair_id(&t_w, &t_s)
                    };
                    out.push((action, target));
                }
            }
        }
        Ok(out)
    }
}

/// One-to-many composition with an explicit schedule choice.
pub fn compose_forced(
    a1: &Automaton,
    a2: &Automaton,
    cfg: &ComposeConfig,
    forced: ForcedPath,
) -> Result<Composition, ComposeError> {
    let signature = compose_signatures(&a1.signature, &a2.signature)?;
    let j = a1.signature.inputs.intersect(&a2.signature.outputs);
    let p = a2.signature.inputs.intersect(&a1.signature.outputs);

    let path = match forced {
        ForcedPath::Joint => ComposePath::JointSearch {
            bound: cfg.joint_bound,
        },
        ForcedPath::ConstructiveA1 => ComposePath::Constructive {
            first_is_a1: true,
            j: j.clone(),
            p: p.clone(),
        },
        ForcedPath::ConstructiveA2 => ComposePath::Constructive {
            first_is_a1: false,
            j: j.clone(),
            p: p.clone(),
        },
        ForcedPath::Auto => {
            if p.is_empty() || j.is_empty() {
                // Acyclic wiring: run the upstream side first.
                ComposePath::Constructive {
                    first_is_a1: j.is_empty(),
                    j: j.clone(),
                    p: p.clone(),
                }
            } else {
                let verdict = check_compose_precondition(a1, a2, cfg.precheck_horizon, cfg.budget)?;
                if verdict.a1_strong_mod {
                    ComposePath::Constructive {
                        first_is_a1: true,
                        j: j.clone(),
                        p: p.clone(),
                    }
                } else if verdict.a2_strong_mod {
                    ComposePath::Constructive {
                        first_is_a1: false,
                        j: j.clone(),
                        p: p.clone(),
                    }
                } else {
                    ComposePath::JointSearch {
                        bound: cfg.joint_bound,
                    }
                }
            }
        }
    };

    let a1 = Arc::new(a1.clone());
    let a2 = Arc::new(a2.clone());
    let pairs = PairTable::new(&a1, &a2);
    let states: BTreeSet<StateId> = pairs.decode.keys().cloned().collect();
    let start = pair_id(&a1.start, &a2.start);
    let input_bound = a1.input_bound.max(a2.input_bound);

    let delta: Arc<dyn Responder> = match &path {
        ComposePath::JointSearch { bound } => Arc::new(JointResponder {
            feedback_slices: enumerate_slices(&j.union(&p), &signature.alphabet, *bound),
            a1: a1.clone(),
            a2: a2.clone(),
            pairs,
            j: j.clone(),
            p: p.clone(),
        }),
        ComposePath::Constructive { first_is_a1, .. } => {
            let (j_strong, p_strong) = if *first_is_a1 {
                (j.clone(), p.clone())
            } else {
                (p.clone(), j.clone())
            };
            let strong_bound = if *first_is_a1 {
                a1.input_bound
            } else {
                a2.input_bound
            };
            Arc::new(ConstructiveResponder {
                completions: enumerate_slices(&j_strong, &signature.alphabet, strong_bound),
                a1: a1.clone(),
                a2: a2.clone(),
                pairs,
                first_is_a1: *first_is_a1,
                j_strong,
                p_strong,
            })
        }
    };

    let automaton = Automaton {
        signature,
        states,
        start,
        delta: Delta::Responder(delta),
        input_bound,
    };

    // The product must be reactive to be a timed port automaton at all.
    match check_reactive(&automaton)? {
        ReactiveVerdict::Ok => Ok(Composition { automaton, path }),
        ReactiveVerdict::Witness { state, input } => Err(ComposeError::EmptyComposition {
            state,
            input,
            bound: match path {
                ComposePath::JointSearch { bound } => bound,
                ComposePath::Constructive { .. } => cfg.joint_bound,
            },
        }),
    }
}

/// One-to-many composition; the schedule is chosen automatically.
pub fn compose(
    a1: &Automaton,
    a2: &Automaton,
    cfg: &ComposeConfig,
) -> Result<Composition, ComposeError> {
    compose_forced(a1, a2, cfg, ForcedPath::Auto)
}

/// Hiding: moves `p` from the outputs into the hidden set. States and
/// transitions are untouched; behaviors lose `p`.
pub fn hide(a: &Automaton, p: &ChannelSet) -> Result<Automaton, ComposeError> {
    if let Some(c) = p.iter().find(|c| !a.signature.outputs.contains(c)) {
        return Err(ComposeError::NotAnOutput(c.clone()));
    }
    Ok(Automaton {
        signature: PortSignature::new(
            a.signature.alphabet.clone(),
            a.signature.inputs.clone(),
            a.signature.outputs.minus(p),
            a.signature.hidden.union(p),
        ),
        states: a.states.clone(),
        start: a.start.clone(),
        delta: a.delta.clone(),
        input_bound: a.input_bound,
    })
}

/// Which of the three decomposition set equalities a counterexample violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompClaim {
    Execs,
    Scheds,
    Behs,
}

impl fmt::Display for DecompClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompClaim::Execs => write!(f, "execs"),
            DecompClaim::Scheds => write!(f, "scheds"),
            DecompClaim::Behs => write!(f, "behs"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum DecompVerdict {
    Ok,
    Counterexample {
        claim: DecompClaim,
        /// True when the witness is a product-side element missing from
        /// the pairwise join, false for the converse inclusion.
        product_side: bool,
        witness: String,
    },
}

impl DecompVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, DecompVerdict::Ok)
    }
}

fn exec_project(
    e: &Execution,
    channels: &ChannelSet,
    coord: usize,
    pairs: &PairTable,
) -> Execution {
    Execution {
        states: e
            .states
            .iter()
            .map(|s| {
                let (s1, s2) = pairs.decode.get(s).expect("product state");
                if coord == 0 {
                    s1.clone()
                } else {
                    s2.clone()
                }
            })
            .collect(),
        actions: e.actions.project(channels),
    }
}

fn join_histories(
    lhs: &BTreeSet<History>,
    rhs: &BTreeSet<History>,
    shared: &ChannelSet,
) -> BTreeSet<History> {
    let mut by_shared: BTreeMap<History, Vec<&History>> = BTreeMap::new();
    for h in rhs {
        by_shared.entry(h.project(shared)).or_default().push(h);
    }
    let mut out = BTreeSet::new();
    for a in lhs {
        if let Some(partners) = by_shared.get(&a.project(shared)) {
            for b in partners {
                let extra = b.project(&b.domain().minus(a.domain()));
                out.insert(a.sum(&extra).expect("disjoint remainder"));
            }
        }
    }
    out
}

fn first_diff<T: Ord + fmt::Debug>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Option<(bool, String)> {
    if let Some(x) = a.difference(b).next() {
        return Some((true, format!("{x:?}")));
    }
    if let Some(x) = b.difference(a).next() {
        return Some((false, format!("{x:?}")));
    }
    None
}

/// Checks the three decomposition set equalities at the horizon: the product's
/// executions, schedules and behaviors against the pairwise-projectable
/// joins of the components'.
pub fn decomposition_oracle(
    a1: &Automaton,
    a2: &Automaton,
    product: &Automaton,
    horizon: usize,
    budget: usize,
) -> Result<DecompVerdict, ComposeError> {
    let pairs = PairTable::new(a1, a2);
    let c1 = a1.signature.channels();
    let c2 = a2.signature.channels();
    let shared_c = c1.intersect(&c2);
    let ext1 = a1.signature.external();
    let ext2 = a2.signature.external();
    let shared_ext = ext1.intersect(&ext2);

    let execs_p = executions(product, horizon, budget)?;
    let execs_1 = executions(a1, horizon, budget)?;
    let execs_2 = executions(a2, horizon, budget)?;

    // Executions: join on shared actions, pairing states coordinate-wise.
    let mut by_shared: BTreeMap<History, Vec<&Execution>> = BTreeMap::new();
    for e in &execs_2 {
        by_shared
            .entry(e.actions.project(&shared_c))
            .or_default()
            .push(e);
    }
    let mut joined_execs = BTreeSet::new();
    for e1 in &execs_1 {
        if let Some(partners) = by_shared.get(&e1.actions.project(&shared_c)) {
            for e2 in partners {
                let states: Vec<StateId> = e1
                    .states
                    .iter()
                    .zip(&e2.states)
                    .map(|(s1, s2)| pair_id(s1, s2))
                    .collect();
                let extra = e2
                    .actions
                    .project(&e2.actions.domain().minus(e1.actions.domain()));
                let actions = e1.actions.sum(&extra)?;
                joined_execs.insert(Execution { states, actions });
            }
        }
    }
    if let Some((product_side, witness)) = first_diff(&execs_p, &joined_execs) {
        return Ok(DecompVerdict::Counterexample {
            claim: DecompClaim::Execs,
            product_side,
            witness,
        });
    }
    // Sanity: every product execution projects into the component sets.
    for e in &execs_p {
        debug_assert!(execs_1.contains(&exec_project(e, &c1, 0, &pairs)));
        debug_assert!(execs_2.contains(&exec_project(e, &c2, 1, &pairs)));
    }

    let scheds_p: BTreeSet<History> = execs_p.iter().map(|e| e.actions.clone()).collect();
    let scheds_1: BTreeSet<History> = execs_1.iter().map(|e| e.actions.clone()).collect();
    let scheds_2: BTreeSet<History> = execs_2.iter().map(|e| e.actions.clone()).collect();
    let joined_scheds = join_histories(&scheds_1, &scheds_2, &shared_c);
    if let Some((product_side, witness)) = first_diff(&scheds_p, &joined_scheds) {
        return Ok(DecompVerdict::Counterexample {
            claim: DecompClaim::Scheds,
            product_side,
            witness,
        });
    }

    let ext_p = product.signature.external();
    let behs_p: BTreeSet<History> = execs_p.iter().map(|e| e.actions.project(&ext_p)).collect();
    let behs_1: BTreeSet<History> = execs_1.iter().map(|e| e.actions.project(&ext1)).collect();
    let behs_2: BTreeSet<History> = execs_2.iter().map(|e| e.actions.project(&ext2)).collect();
    let joined_behs = join_histories(&behs_1, &behs_2, &shared_ext);
    if let Some((product_side, witness)) = first_diff(&behs_p, &joined_behs) {
        return Ok(DecompVerdict::Counterexample {
            claim: DecompClaim::Behs,
            product_side,
            witness,
        });
    }
    Ok(DecompVerdict::Ok)
}
