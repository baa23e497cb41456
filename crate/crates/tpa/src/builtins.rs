//! Builtin automata: the fair merge, the restricted-delay buffer and the
//! mutually blocking pair. All three are responder-based: their
//! transition relations are schema-defined and enumerated on demand over
//! the bounded input space.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::automata::{
    state, Alphabet, AutomataError, Automaton, Delta, PortSignature, Responder, StateId,
};
use crate::history::{chan, ChannelSet, Msg, Slice};

/// Default capacity of the buffer builtin's truncated state space.
pub const DEFAULT_BUFFER_CAPACITY: usize = 8;

/// All order-preserving interleavings of `a` and `b`, duplicates
/// collapsed.
pub fn merges(a: &[Msg], b: &[Msg]) -> Vec<Vec<Msg>> {
    fn go(a: &[Msg], b: &[Msg], acc: &mut Vec<Msg>, out: &mut Vec<Vec<Msg>>) {
        if a.is_empty() && b.is_empty() {
            out.push(acc.clone());
            return;
        }
        if let Some((m, rest)) = a.split_first() {
            acc.push(m.clone());
            go(rest, b, acc, out);
            acc.pop();
        }
        if let Some((m, rest)) = b.split_first() {
            acc.push(m.clone());
            go(a, rest, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(a, b, &mut Vec::new(), &mut out);
    out.sort();
    out.dedup();
    out
}

struct FairMergeResponder;

impl Responder for FairMergeResponder {
    fn respond(&self, s: &StateId, input: &Slice) -> Result<Vec<(Slice, StateId)>, AutomataError> {
        let a = input.seq("i").to_vec();
        let b = input.seq("j").to_vec();
        Ok(merges(&a, &b)
            .into_iter()
            .map(|c| {
                let mut action = input.clone();
                action.set(chan("o"), c);
                (action, s.clone())
            })
            .collect())
    }
}

/// The fair merge automaton: one state, inputs `i` and `j`, output `o`.
/// Every transition emits one order-preserving interleaving of the two
/// input sequences within the same tick.
pub fn fair_merge(alphabet: &Alphabet, input_bound: usize) -> Automaton {
    Automaton {
        signature: PortSignature::new(
            alphabet.clone(),
            ChannelSet::of(&["i", "j"]),
            ChannelSet::of(&["o"]),
            ChannelSet::empty(),
        ),
        states: [state("s")].into_iter().collect(),
        start: state("s"),
        delta: Delta::Responder(Arc::new(FairMergeResponder)),
        input_bound,
    }
}

fn encode_buffer_state(content: &[Msg]) -> StateId {
    let mut s = String::from("q[");
    for (k, m) in content.iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        s.push_str(m);
    }
    s.push(']');
    Arc::from(s.as_str())
}

struct BufferResponder {
    capacity: usize,
    contents: BTreeMap<StateId, Vec<Msg>>,
}

impl Responder for BufferResponder {
    fn respond(&self, s: &StateId, input: &Slice) -> Result<Vec<(Slice, StateId)>, AutomataError> {
        let content = self
            .contents
            .get(s)
            .ok_or_else(|| AutomataError::UnknownState(s.clone()))?;
        let b = input.seq("i").to_vec();
        // Emitted part is a prefix of the stored content; a nonempty
        // buffer must emit at least one message.
        let emit_range = if content.is_empty() {
            0..=0
        } else {
            1..=content.len()
        };
        let mut out = Vec::new();
        for k in emit_range {
            let rest = content.len() - k;
            if rest + b.len() > self.capacity {
                continue;
            }
            let emitted: Vec<Msg> = content[..k].to_vec();
            let mut next = content[k..].to_vec();
            next.extend(b.iter().cloned());
            let mut action = input.clone();
            action.set(chan("o"), emitted);
            out.push((action, encode_buffer_state(&next)));
        }
        if out.is_empty() {
            return Err(AutomataError::BufferOverflow {
                state: s.clone(),
                incoming: b.len(),
                capacity: self.capacity,
            });
        }
        Ok(out)
    }
}

/// The restricted-delay buffer over a state space truncated to
/// `capacity` stored messages. Inputs that no emission choice can absorb
/// raise a `BufferOverflow` configuration error.
pub fn buffer(alphabet: &Alphabet, input_bound: usize, capacity: usize) -> Automaton {
    let contents: BTreeMap<StateId, Vec<Msg>> = alphabet
        .sequences_up_to(capacity)
        .into_iter()
        .map(|seq| (encode_buffer_state(&seq), seq))
        .collect();
    Automaton {
        signature: PortSignature::new(
            alphabet.clone(),
            ChannelSet::of(&["i"]),
            ChannelSet::of(&["o"]),
            ChannelSet::empty(),
        ),
        states: contents.keys().cloned().collect(),
        start: encode_buffer_state(&[]),
        delta: Delta::Responder(Arc::new(BufferResponder { capacity, contents })),
        input_bound,
    }
}

struct PrependResponder {
    input_chan: &'static str,
    output_chan: &'static str,
    prepend: Msg,
}

impl Responder for PrependResponder {
    fn respond(&self, s: &StateId, input: &Slice) -> Result<Vec<(Slice, StateId)>, AutomataError> {
        let a = input.seq(self.input_chan);
        let mut out_seq = Vec::with_capacity(a.len() + 1);
        out_seq.push(self.prepend.clone());
        out_seq.extend(a.iter().cloned());
        let mut action = input.clone();
        action.set(chan(self.output_chan), out_seq);
        Ok(vec![(action, s.clone())])
    }
}

/// The mutually blocking pair: two single-state automata with
/// complementary signatures, each echoing its input with the canonical
/// first alphabet symbol prepended. Their composition demands
/// `#o = #i + 1` and `#i = #o + 1` simultaneously, so the product
/// transition relation is empty.
pub fn blocking_pair(alphabet: &Alphabet, input_bound: usize) -> (Automaton, Automaton) {
    let first = alphabet.first();
    let a1 = Automaton {
        signature: PortSignature::new(
            alphabet.clone(),
            ChannelSet::of(&["i"]),
            ChannelSet::of(&["o"]),
            ChannelSet::empty(),
        ),
        states: [state("s1")].into_iter().collect(),
        start: state("s1"),
        delta: Delta::Responder(Arc::new(PrependResponder {
            input_chan: "i",
            output_chan: "o",
            prepend: first.clone(),
        })),
        input_bound,
    };
    let a2 = Automaton {
        signature: PortSignature::new(
            alphabet.clone(),
            ChannelSet::of(&["o"]),
            ChannelSet::of(&["i"]),
            ChannelSet::empty(),
        ),
        states: [state("s2")].into_iter().collect(),
        start: state("s2"),
        delta: Delta::Responder(Arc::new(PrependResponder {
            input_chan: "o",
            output_chan: "i",
            prepend: first,
        })),
        input_bound,
    };
    (a1, a2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{
        behaviors, behaviors_for_input, check_reactive, check_strong_pulse,
        check_strong_pulse_modulo, check_weak_pulse,
    };
    use crate::history::{msg, History};

    const BUDGET: usize = 1_000_000;

    #[test]
    fn fair_merge_is_reactive() {
        let fm = fair_merge(&Alphabet::of(&["a", "b"]), 1);
        assert!(check_reactive(&fm).unwrap().is_ok());
    }

    #[test]
    fn fair_merge_step_both_inputs() {
        let fm = fair_merge(&Alphabet::of(&["a", "b"]), 1);
        let steps = fm
            .step(&state("s"), &Slice::of(&[("i", &["a"]), ("j", &["b"])]))
            .unwrap();
        assert_eq!(steps.len(), 2);
        let outs: Vec<_> = steps.iter().map(|(act, _)| act.seq("o").to_vec()).collect();
        assert!(outs.contains(&vec![msg("a"), msg("b")]));
        assert!(outs.contains(&vec![msg("b"), msg("a")]));
    }

    #[test]
    fn fair_merge_step_one_empty_input() {
        let fm = fair_merge(&Alphabet::of(&["a", "b"]), 1);
        let steps = fm
            .step(&state("s"), &Slice::of(&[("i", &[]), ("j", &["b"])]))
            .unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0.seq("o"), &[msg("b")]);
    }

    #[test]
    fn fair_merge_behavior_count_at_horizon_one() {
        // |D|=1, L=1: four input slices; the (<a>,<a>) input has two
        // merge orders producing the same output sequence, so the
        // distinct behavior count is 4.
        let fm = fair_merge(&Alphabet::of(&["a"]), 1);
        let b = behaviors(&fm, 1, BUDGET).unwrap();
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn fair_merge_behaviors_for_input() {
        let fm = fair_merge(&Alphabet::of(&["a", "b"]), 1);
        let mut input = History::empty(ChannelSet::of(&["i", "j"]));
        input
            .push(Slice::of(&[("i", &["a"]), ("j", &["b"])]))
            .unwrap();
        let behs = behaviors_for_input(&fm, &input, BUDGET).unwrap();
        assert_eq!(behs.len(), 2);
        for b in &behs {
            assert_eq!(b.project(&fm.signature.inputs), input);
        }
    }

    #[test]
    fn fair_merge_weak_but_not_strong() {
        let fm = fair_merge(&Alphabet::of(&["a", "b"]), 1);
        assert!(check_weak_pulse(&fm, 2, BUDGET).unwrap().is_ok());
        match check_strong_pulse(&fm, 2, BUDGET).unwrap() {
            crate::automata::PulseVerdict::Witness { n, .. } => assert_eq!(n, 0),
            _ => panic!("expected a tick-0 witness"),
        }
    }

    #[test]
    fn fair_merge_not_strong_modulo_full_feedback() {
        let fm = fair_merge(&Alphabet::of(&["a", "b"]), 1);
        let j = ChannelSet::of(&["i", "j"]);
        let p = ChannelSet::of(&["o"]);
        match check_strong_pulse_modulo(&fm, &j, &p, 2, BUDGET).unwrap() {
            crate::automata::PulseVerdict::Witness { n, .. } => assert_eq!(n, 0),
            _ => panic!("expected witness"),
        }
    }

    #[test]
    fn strong_modulo_with_empty_p_is_trivial() {
        let fm = fair_merge(&Alphabet::of(&["a", "b"]), 1);
        let j = ChannelSet::of(&["i", "j"]);
        assert!(
            check_strong_pulse_modulo(&fm, &j, &ChannelSet::empty(), 2, BUDGET)
                .unwrap()
                .is_ok()
        );
    }

    #[test]
    fn buffer_step_from_empty_state() {
        let buf = buffer(&Alphabet::of(&["m"]), 1, 4);
        let steps = buf
            .step(&encode_buffer_state(&[]), &Slice::of(&[("i", &["m"])]))
            .unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0.seq("o"), &[] as &[Msg]);
        assert_eq!(steps[0].1, encode_buffer_state(&[msg("m")]));
    }

    #[test]
    fn buffer_nonempty_state_must_emit() {
        let buf = buffer(&Alphabet::of(&["m"]), 1, 4);
        let s = encode_buffer_state(&[msg("m"), msg("m")]);
        let steps = buf.step(&s, &Slice::of(&[("i", &[])])).unwrap();
        assert_eq!(steps.len(), 2);
        for (act, _) in &steps {
            assert!(!act.seq("o").is_empty());
        }
    }

    #[test]
    fn buffer_delayed_echo() {
        let buf = buffer(&Alphabet::of(&["m"]), 1, 4);
        let mut input = History::empty(ChannelSet::of(&["i"]));
        input.push(Slice::of(&[("i", &["m"])])).unwrap();
        input.push(Slice::of(&[("i", &[])])).unwrap();
        let behs = behaviors_for_input(&buf, &input, BUDGET).unwrap();
        assert_eq!(behs.len(), 1);
        let b = behs.iter().next().unwrap();
        assert_eq!(b.tick(0).seq("o"), &[] as &[Msg]);
        assert_eq!(b.tick(1).seq("o"), &[msg("m")]);
    }

    #[test]
    fn buffer_is_strongly_pulse_driven() {
        let buf = buffer(&Alphabet::of(&["m"]), 1, 4);
        assert!(check_strong_pulse(&buf, 3, BUDGET).unwrap().is_ok());
    }

    #[test]
    fn buffer_overflow_is_an_error() {
        let buf = buffer(&Alphabet::of(&["m"]), 2, 1);
        let err = buf
            .step(&encode_buffer_state(&[]), &Slice::of(&[("i", &["m", "m"])]))
            .unwrap_err();
        assert!(matches!(err, AutomataError::BufferOverflow { .. }));
    }

    #[test]
    fn blocking_pair_signatures_are_complementary() {
        let d = Alphabet::of(&["a", "b"]);
        let (a1, a2) = blocking_pair(&d, 1);
        assert_eq!(a1.signature.inputs, ChannelSet::of(&["i"]));
        assert_eq!(a1.signature.outputs, ChannelSet::of(&["o"]));
        assert_eq!(a2.signature.inputs, ChannelSet::of(&["o"]));
        assert_eq!(a2.signature.outputs, ChannelSet::of(&["i"]));
        assert!(check_reactive(&a1).unwrap().is_ok());
        assert!(check_reactive(&a2).unwrap().is_ok());
    }

    #[test]
    fn blocking_automaton_prepends_first_symbol() {
        let d = Alphabet::of(&["b", "a"]);
        let (a1, _) = blocking_pair(&d, 1);
        let steps = a1.step(&state("s1"), &Slice::of(&[("i", &["b"])])).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0.seq("o"), &[msg("a"), msg("b")]);
    }
}
