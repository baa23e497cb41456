//! Timed port automata: signatures, reactive transition relations,
//! bounded-horizon execution, behavior enumeration and pulse-drivenness
//! analysis.
//!
//! Horizons are always finite; reactiveness and the pulse checks
//! quantify over the bounded input space (per-tick sequence length at
//! most the automaton's `input_bound`), which is an approximation of the
//! unbounded quantifier and is reported as such in verdicts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use thiserror::Error;

use crate::history::{chan, Chan, ChannelSet, History, HistoryError, Msg, Slice};
use crate::par;

pub type StateId = Arc<str>;

pub fn state(name: &str) -> StateId {
    Arc::from(name)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("channel `{0}` appears in more than one of I, O, H")]
    OverlapError(Chan),
    #[error("unknown state `{0}`")]
    UnknownState(StateId),
    #[error("exploration budget of {budget} nodes exceeded")]
    ExplosionGuard { budget: usize },
    #[error("buffer overflow: state `{state}` cannot absorb {incoming} more messages (capacity {capacity})")]
    BufferOverflow {
        state: StateId,
        incoming: usize,
        capacity: usize,
    },
    #[error("responder contract violated: {0}")]
    ResponderContract(String),
    #[error(transparent)]
    History(#[from] HistoryError),
}

/// The finite, canonically ordered message alphabet of a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<Msg>,
}

impl Alphabet {
    /// Builds an alphabet; symbols are sorted and deduplicated so every
    /// enumeration order is canonical.
    pub fn new<I: IntoIterator<Item = Msg>>(symbols: I) -> Self {
        let mut symbols: Vec<Msg> = symbols.into_iter().collect();
        symbols.sort();
        symbols.dedup();
        Alphabet { symbols }
    }

    pub fn of(symbols: &[&str]) -> Self {
        Alphabet::new(symbols.iter().map(|s| Arc::from(*s)))
    }

    pub fn symbols(&self) -> &[Msg] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contains(&self, m: &Msg) -> bool {
        self.symbols.binary_search(m).is_ok()
    }

    pub fn first(&self) -> Msg {
        self.symbols[0].clone()
    }

    /// All sequences of length at most `bound`, ordered by length and
    /// then lexicographically.
    pub fn sequences_up_to(&self, bound: usize) -> Vec<Vec<Msg>> {
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..bound {
            let mut next = Vec::new();
            for seq in &layer {
                for s in &self.symbols {
                    let mut e = seq.clone();
                    e.push(s.clone());
                    next.push(e);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, s) in self.symbols.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// Pairwise disjoint input, output and hidden channel sets plus the
/// message alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortSignature {
    pub alphabet: Alphabet,
    pub inputs: ChannelSet,
    pub outputs: ChannelSet,
    pub hidden: ChannelSet,
}

impl PortSignature {
    pub fn new(
        alphabet: Alphabet,
        inputs: ChannelSet,
        outputs: ChannelSet,
        hidden: ChannelSet,
    ) -> Self {
        PortSignature {
            alphabet,
            inputs,
            outputs,
            hidden,
        }
    }

    /// C = I ∪ O ∪ H.
    pub fn channels(&self) -> ChannelSet {
        self.inputs.union(&self.outputs).union(&self.hidden)
    }

    /// External channels I ∪ O.
    pub fn external(&self) -> ChannelSet {
        self.inputs.union(&self.outputs)
    }
}

/// Checks that I, O and H are pairwise disjoint.
pub fn check_signature(sig: &PortSignature) -> Result<(), AutomataError> {
    for (a, b) in [
        (&sig.inputs, &sig.outputs),
        (&sig.inputs, &sig.hidden),
        (&sig.outputs, &sig.hidden),
    ] {
        if let Some(c) = a.first_common(b) {
            return Err(AutomataError::OverlapError(c));
        }
    }
    Ok(())
}

/// One transition: the action slice covers the full channel set C.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transition {
    pub source: StateId,
    pub action: Slice,
    pub target: StateId,
}

/// A deterministic procedure enumerating, for a state and an input
/// slice, all matching (action, target) pairs. Implementations must
/// return the same list for the same arguments.
pub trait Responder: Send + Sync {
    fn respond(
        &self,
        state: &StateId,
        input: &Slice,
    ) -> Result<Vec<(Slice, StateId)>, AutomataError>;
}

#[derive(Clone)]
pub enum Delta {
    Table(Vec<Transition>),
    Responder(Arc<dyn Responder>),
}

impl fmt::Debug for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::Table(t) => write!(f, "Table({} transitions)", t.len()),
            Delta::Responder(_) => write!(f, "Responder"),
        }
    }
}

/// A timed port automaton at a bounded per-tick input length.
#[derive(Debug, Clone)]
pub struct Automaton {
    pub signature: PortSignature,
    pub states: BTreeSet<StateId>,
    pub start: StateId,
    pub delta: Delta,
    /// Per-tick input sequence length bound used for reactiveness checks
    /// and input enumeration.
    pub input_bound: usize,
}

impl Automaton {
    /// All matching transitions for `(state, input)` in canonical order,
    /// duplicates collapsed.
    pub fn step(&self, s: &StateId, input: &Slice) -> Result<Vec<(Slice, StateId)>, AutomataError> {
        if !self.states.contains(s) {
            return Err(AutomataError::UnknownState(s.clone()));
        }
        let mut out = match &self.delta {
            Delta::Table(transitions) => transitions
                .iter()
                .filter(|t| &t.source == s && t.action.project(&self.signature.inputs) == *input)
                .map(|t| (t.action.clone(), t.target.clone()))
                .collect::<Vec<_>>(),
            Delta::Responder(r) => r.respond(s, input)?,
        };
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// All input slices admitted by this automaton's bound, in canonical
    /// order.
    pub fn input_slices(&self) -> Vec<Slice> {
        enumerate_slices(
            &self.signature.inputs,
            &self.signature.alphabet,
            self.input_bound,
        )
    }

    /// All input histories of the given length, in canonical order.
    pub fn input_histories(&self, horizon: usize) -> Vec<History> {
        histories_over(
            &self.signature.inputs,
            &self.signature.alphabet,
            self.input_bound,
            horizon,
        )
    }
}

/// All slices over `channels` with every sequence of length at most
/// `bound`, in canonical order. The count is
/// `(sum_{k<=bound} |D|^k)^{|channels|}`; the empty channel set yields
/// exactly one (empty) slice.
pub fn enumerate_slices(channels: &ChannelSet, alphabet: &Alphabet, bound: usize) -> Vec<Slice> {
    let seqs = alphabet.sequences_up_to(bound);
    let mut out = vec![Slice::from_entries(std::iter::empty())];
    for c in channels.iter() {
        let mut next = Vec::with_capacity(out.len() * seqs.len());
        for partial in &out {
            for seq in &seqs {
                let mut s = partial.clone();
                s.set(c.clone(), seq.clone());
                next.push(s);
            }
        }
        out = next;
    }
    out
}

/// All histories of `horizon` ticks over `channels` at the given bound,
/// in canonical order.
pub fn histories_over(
    channels: &ChannelSet,
    alphabet: &Alphabet,
    bound: usize,
    horizon: usize,
) -> Vec<History> {
    let slices = enumerate_slices(channels, alphabet, bound);
    let mut out = vec![History::empty(channels.clone())];
    for _ in 0..horizon {
        let mut next = Vec::with_capacity(out.len() * slices.len());
        for h in &out {
            for s in &slices {
                let mut e = h.clone();
                e.push(s.clone()).expect("same domain");
                next.push(e);
            }
        }
        out = next;
    }
    out
}

/// Verdict of the bounded reactiveness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReactiveVerdict {
    Ok,
    /// First reachable (state, input) without any matching transition.
    Witness {
        state: StateId,
        input: Slice,
    },
}

impl ReactiveVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, ReactiveVerdict::Ok)
    }
}

/// Checks that every reachable state has at least one transition for
/// every enumerated input slice. Bounded: inputs are enumerated with
/// per-channel length at most `input_bound`.
pub fn check_reactive(a: &Automaton) -> Result<ReactiveVerdict, AutomataError> {
    check_signature(&a.signature)?;
    let inputs = a.input_slices();
    let mut seen: BTreeSet<StateId> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(a.start.clone());
    queue.push_back(a.start.clone());
    while let Some(s) = queue.pop_front() {
        for input in &inputs {
            let steps = a.step(&s, input)?;
            if steps.is_empty() {
                return Ok(ReactiveVerdict::Witness {
                    state: s,
                    input: input.clone(),
                });
            }
            for (_, target) in steps {
                if seen.insert(target.clone()) {
                    queue.push_back(target);
                }
            }
        }
    }
    Ok(ReactiveVerdict::Ok)
}

/// A bounded-horizon execution: `n+1` states and `n` action slices over
/// the full channel set C.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Execution {
    pub states: Vec<StateId>,
    pub actions: History,
}

/// Exhaustively enumerated executions of length `horizon` from the start
/// state, branching over all enumerated inputs and transitions.
pub fn executions(
    a: &Automaton,
    horizon: usize,
    budget: usize,
) -> Result<BTreeSet<Execution>, AutomataError> {
    let inputs = a.input_slices();
    executions_branching(a, horizon, budget, |_tick| inputs.clone())
}

/// Executions whose input history equals `input` tick for tick.
pub fn executions_for_input(
    a: &Automaton,
    input: &History,
    budget: usize,
) -> Result<BTreeSet<Execution>, AutomataError> {
    let ticks: Vec<Slice> = input.ticks().to_vec();
    executions_branching(
        a,
        input.len(),
        budget,
        move |tick| vec![ticks[tick].clone()],
    )
}

fn executions_branching<F>(
    a: &Automaton,
    horizon: usize,
    budget: usize,
    inputs_at: F,
) -> Result<BTreeSet<Execution>, AutomataError>
where
    F: Fn(usize) -> Vec<Slice> + Send + Sync,
{
    let channels = a.signature.channels();
    let nodes = AtomicUsize::new(0);
    if horizon == 0 {
        let mut set = BTreeSet::new();
        set.insert(Execution {
            states: vec![a.start.clone()],
            actions: History::empty(channels),
        });
        return Ok(set);
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F>(
        a: &Automaton,
        state: &StateId,
        states_so_far: &[StateId],
        actions_so_far: &History,
        tick: usize,
        horizon: usize,
        budget: usize,
        nodes: &AtomicUsize,
        inputs_at: &F,
        out: &mut BTreeSet<Execution>,
    ) -> Result<(), AutomataError>
    where
        F: Fn(usize) -> Vec<Slice> + Send + Sync,
    {
        if tick == horizon {
            out.insert(Execution {
                states: states_so_far.to_vec(),
                actions: actions_so_far.clone(),
            });
            return Ok(());
        }
        for input in inputs_at(tick) {
            for (action, target) in a.step(state, &input)? {
                if nodes.fetch_add(1, Ordering::Relaxed) >= budget {
                    return Err(AutomataError::ExplosionGuard { budget });
                }
                let mut states = states_so_far.to_vec();
                states.push(target.clone());
                let mut actions = actions_so_far.clone();
                actions.push(action)?;
                recurse(
                    a,
                    &target,
                    &states,
                    &actions,
                    tick + 1,
                    horizon,
                    budget,
                    nodes,
                    inputs_at,
                    out,
                )?;
            }
        }
        Ok(())
    }

    // Parallelize over the first-level branches; the per-branch
    // recursion stays sequential and the results merge as sets.
    let mut first: Vec<(Slice, Slice, StateId)> = Vec::new();
    for input in inputs_at(0) {
        for (action, target) in a.step(&a.start, &input)? {
            first.push((input.clone(), action, target));
        }
    }
    let sets = par::try_map_vec(first, |(_input, action, target)| {
        nodes.fetch_add(1, Ordering::Relaxed);
        let states = vec![a.start.clone(), target.clone()];
        let mut actions = History::empty(channels.clone());
        actions.push(action)?;
        let mut out = BTreeSet::new();
        recurse(
            a, &target, &states, &actions, 1, horizon, budget, &nodes, &inputs_at, &mut out,
        )?;
        Ok::<_, AutomataError>(out)
    })?;
    let mut merged = BTreeSet::new();
    for s in sets {
        merged.extend(s);
    }
    Ok(merged)
}

/// Full C-domain action histories of all executions at the horizon.
pub fn schedules(
    a: &Automaton,
    horizon: usize,
    budget: usize,
) -> Result<BTreeSet<History>, AutomataError> {
    Ok(executions(a, horizon, budget)?
        .into_iter()
        .map(|e| e.actions)
        .collect())
}

/// External (I ∪ O) action histories of all executions at the horizon.
/// Duplicate behaviors collapse (set semantics).
pub fn behaviors(
    a: &Automaton,
    horizon: usize,
    budget: usize,
) -> Result<BTreeSet<History>, AutomataError> {
    let ext = a.signature.external();
    Ok(executions(a, horizon, budget)?
        .into_iter()
        .map(|e| e.actions.project(&ext))
        .collect())
}

/// Behaviors whose input projection equals `input` (the set A[ι]).
/// Nonempty for every reactive automaton.
pub fn behaviors_for_input(
    a: &Automaton,
    input: &History,
    budget: usize,
) -> Result<BTreeSet<History>, AutomataError> {
    let ext = a.signature.external();
    Ok(executions_for_input(a, input, budget)?
        .into_iter()
        .map(|e| e.actions.project(&ext))
        .collect())
}

/// Verdict of a pulse-drivenness check over the enumerated input space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PulseVerdict {
    Ok,
    /// Two inputs agreeing through tick `n` whose behavior sets differ
    /// at the compared depth.
    Witness {
        iota: History,
        kappa: History,
        n: usize,
    },
}

impl PulseVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, PulseVerdict::Ok)
    }
}

fn behavior_map(
    a: &Automaton,
    horizon: usize,
    budget: usize,
) -> Result<Vec<(History, BTreeSet<History>)>, AutomataError> {
    let inputs = a.input_histories(horizon);
    if inputs.len() > budget {
        return Err(AutomataError::ExplosionGuard { budget });
    }
    par::try_map_vec(inputs, |input| {
        let behs = behaviors_for_input(a, &input, budget)?;
        Ok((input, behs))
    })
}

fn prefix_set(behs: &BTreeSet<History>, n: usize) -> BTreeSet<History> {
    behs.iter()
        .map(|b| b.prefix(n).expect("n <= horizon"))
        .collect()
}

/// Weak pulse-drivenness at the horizon: inputs agreeing through tick n
/// have equal behavior prefix sets at depth n, for all n <= horizon.
pub fn check_weak_pulse(
    a: &Automaton,
    horizon: usize,
    budget: usize,
) -> Result<PulseVerdict, AutomataError> {
    let by_input = behavior_map(a, horizon, budget)?;
    for n in 0..=horizon {
        let mut groups: BTreeMap<History, (History, BTreeSet<History>)> = BTreeMap::new();
        for (input, behs) in &by_input {
            let key = input.prefix(n)?;
            let set = prefix_set(behs, n);
            match groups.get(&key) {
                None => {
                    groups.insert(key, (input.clone(), set));
                }
                Some((first, expected)) => {
                    if set != *expected {
                        return Ok(PulseVerdict::Witness {
                            iota: first.clone(),
                            kappa: input.clone(),
                            n,
                        });
                    }
                }
            }
        }
    }
    Ok(PulseVerdict::Ok)
}

/// Strong pulse-drivenness: inputs agreeing through tick n have equal
/// behavior prefix sets at depth n+1, for all n with n+1 <= horizon.
pub fn check_strong_pulse(
    a: &Automaton,
    horizon: usize,
    budget: usize,
) -> Result<PulseVerdict, AutomataError> {
    let i = a.signature.inputs.clone();
    let o = a.signature.outputs.clone();
    check_strong_pulse_modulo(a, &i, &o, horizon, budget)
}

/// Strong pulse-drivenness modulo (J, P): if two inputs agree on J
/// through tick n and agree on I \ J everywhere, their behavior sets
/// projected to P agree at depth n+1.
pub fn check_strong_pulse_modulo(
    a: &Automaton,
    j: &ChannelSet,
    p: &ChannelSet,
    horizon: usize,
    budget: usize,
) -> Result<PulseVerdict, AutomataError> {
    let by_input = behavior_map(a, horizon, budget)?;
    let non_j = a.signature.inputs.minus(j);
    for n in 0..horizon {
        let mut groups: BTreeMap<(History, History), (History, BTreeSet<History>)> =
            BTreeMap::new();
        for (input, behs) in &by_input {
            let key = (input.project(j).prefix(n)?, input.project(&non_j));
            let set: BTreeSet<History> = behs
                .iter()
                .map(|b| b.project(p).prefix(n + 1).expect("n+1 <= horizon"))
                .collect();
            match groups.get(&key) {
                None => {
                    groups.insert(key, (input.clone(), set));
                }
                Some((first, expected)) => {
                    if set != *expected {
                        return Ok(PulseVerdict::Witness {
                            iota: first.clone(),
                            kappa: input.clone(),
                            n,
                        });
                    }
                }
            }
        }
    }
    Ok(PulseVerdict::Ok)
}

/// Renames one channel throughout signature and transition relation.
pub fn rename_channel(a: &Automaton, from: &str, to: &str) -> Automaton {
    let to: Chan = chan(to);
    let ren = |cs: &ChannelSet| -> ChannelSet {
        cs.iter()
            .map(|c| {
                if c.as_ref() == from {
                    to.clone()
                } else {
                    c.clone()
                }
            })
            .collect()
    };
    let signature = PortSignature {
        alphabet: a.signature.alphabet.clone(),
        inputs: ren(&a.signature.inputs),
        outputs: ren(&a.signature.outputs),
        hidden: ren(&a.signature.hidden),
    };
    let delta = match &a.delta {
        Delta::Table(ts) => Delta::Table(
            ts.iter()
                .map(|t| Transition {
                    source: t.source.clone(),
                    action: t.action.rename(from, &to),
                    target: t.target.clone(),
                })
                .collect(),
        ),
        Delta::Responder(r) => Delta::Responder(Arc::new(RenamedResponder {
            inner: r.clone(),
            from: chan(from),
            to: to.clone(),
            input_renamed: a.signature.inputs.contains(from),
        })),
    };
    Automaton {
        signature,
        states: a.states.clone(),
        start: a.start.clone(),
        delta,
        input_bound: a.input_bound,
    }
}

struct RenamedResponder {
    inner: Arc<dyn Responder>,
    from: Chan,
    to: Chan,
    input_renamed: bool,
}

impl Responder for RenamedResponder {
    fn respond(&self, s: &StateId, input: &Slice) -> Result<Vec<(Slice, StateId)>, AutomataError> {
        let inner_input = if self.input_renamed {
            input.rename(&self.to, &self.from)
        } else {
            input.clone()
        };
        Ok(self
            .inner
            .respond(s, &inner_input)?
            .into_iter()
            .map(|(action, target)| (action.rename(&self.from, &self.to), target))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    pub(crate) fn sig(d: &[&str], i: &[&str], o: &[&str], h: &[&str]) -> PortSignature {
        PortSignature::new(
            Alphabet::of(d),
            ChannelSet::of(i),
            ChannelSet::of(o),
            ChannelSet::of(h),
        )
    }

    #[test]
    fn signature_disjointness() {
        assert!(check_signature(&sig(&["a"], &["i", "j"], &["o"], &[])).is_ok());
        assert_eq!(
            check_signature(&sig(&["a"], &["i"], &["i"], &[])),
            Err(AutomataError::OverlapError(chan("i")))
        );
        assert!(check_signature(&sig(&["a"], &[], &[], &[])).is_ok());
    }

    #[test]
    fn slice_enumeration_counts() {
        let d2 = Alphabet::of(&["a", "b"]);
        assert_eq!(enumerate_slices(&ChannelSet::of(&["i"]), &d2, 1).len(), 3);
        assert_eq!(enumerate_slices(&ChannelSet::of(&[]), &d2, 1).len(), 1);
        assert_eq!(
            enumerate_slices(&ChannelSet::of(&["i", "j"]), &d2, 1).len(),
            9
        );
        // (|D|^0 + |D|^1 + |D|^2)^2 with |D|=2
        assert_eq!(
            enumerate_slices(&ChannelSet::of(&["i", "j"]), &d2, 2).len(),
            49
        );
    }

    #[test]
    fn slice_enumeration_order_is_canonical() {
        let d = Alphabet::of(&["b", "a"]);
        let slices = enumerate_slices(&ChannelSet::of(&["i"]), &d, 1);
        assert_eq!(slices[0], Slice::of(&[("i", &[])]));
        assert_eq!(slices[1], Slice::of(&[("i", &["a"])]));
        assert_eq!(slices[2], Slice::of(&[("i", &["b"])]));
    }

    /// A two-state automaton that drops all transitions from its second
    /// state, so reactiveness must fail there.
    fn stuck_automaton() -> Automaton {
        let signature = sig(&["a"], &["i"], &[], &[]);
        let c = signature.channels();
        let mk = |seq: &[&str], target: &str| Transition {
            source: state("s0"),
            action: {
                let mut s = Slice::empty(&c);
                s.set(chan("i"), seq.iter().map(|m| Arc::from(*m)).collect());
                s
            },
            target: state(target),
        };
        Automaton {
            signature,
            states: [state("s0"), state("dead")].into_iter().collect(),
            start: state("s0"),
            delta: Delta::Table(vec![mk(&[], "s0"), mk(&["a"], "dead")]),
            input_bound: 1,
        }
    }

    #[test]
    fn reactiveness_witness_at_stuck_state() {
        let a = stuck_automaton();
        match check_reactive(&a).unwrap() {
            ReactiveVerdict::Witness { state: s, input } => {
                assert_eq!(s.as_ref(), "dead");
                assert_eq!(input, Slice::of(&[("i", &[])]));
            }
            ReactiveVerdict::Ok => panic!("expected witness"),
        }
    }

    #[test]
    fn no_input_automaton_is_reactive_with_one_transition_per_state() {
        let signature = sig(&["a"], &[], &["o"], &[]);
        let c = signature.channels();
        let a = Automaton {
            signature,
            states: [state("s0")].into_iter().collect(),
            start: state("s0"),
            delta: Delta::Table(vec![Transition {
                source: state("s0"),
                action: Slice::empty(&c),
                target: state("s0"),
            }]),
            input_bound: 1,
        };
        assert!(check_reactive(&a).unwrap().is_ok());
        // exactly one input slice: the empty one
        assert_eq!(a.input_slices().len(), 1);
    }

    #[test]
    fn executions_at_horizon_zero() {
        let fm = builtins::fair_merge(&Alphabet::of(&["a"]), 1);
        let b = behaviors(&fm, 0, 10_000).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.iter().next().unwrap().is_empty());
    }

    #[test]
    fn explosion_guard_fires() {
        let fm = builtins::fair_merge(&Alphabet::of(&["a", "b"]), 1);
        assert!(matches!(
            behaviors(&fm, 3, 10),
            Err(AutomataError::ExplosionGuard { budget: 10 })
        ));
    }

    #[test]
    fn rename_table_automaton_round_trips() {
        let a = stuck_automaton();
        let r = rename_channel(&a, "i", "x");
        assert!(r.signature.inputs.contains("x"));
        assert!(!r.signature.inputs.contains("i"));
        let rr = rename_channel(&r, "x", "i");
        assert_eq!(format!("{:?}", rr.signature), format!("{:?}", a.signature));
    }
}
