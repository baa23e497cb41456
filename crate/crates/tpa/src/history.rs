//! Timed communication histories and their algebra: sum, projection,
//! prefix and the dyadic (Baire) distance on equal-length prefixes.
//!
//! A [`Slice`] is one tick's named communication, a map from channel
//! names to finite message sequences. A [`History`] is a finite prefix
//! of a named communication history: a sequence of slices over a fixed
//! channel set. All values are immutable after construction and safe to
//! share across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Channel name. Cheap to clone, ordered lexicographically.
pub type Chan = Arc<str>;

/// A single message: an atom drawn from the session alphabet.
pub type Msg = Arc<str>;

pub fn chan(name: &str) -> Chan {
    Arc::from(name)
}

pub fn msg(name: &str) -> Msg {
    Arc::from(name)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HistoryError {
    #[error("overlapping domains: channel `{0}` appears on both sides of a sum")]
    OverlappingDomains(Chan),
    #[error("length mismatch: {0} vs {1} ticks")]
    LengthMismatch(usize, usize),
    #[error("horizon exceeded: prefix {requested} of a {length}-tick history")]
    HorizonExceeded { requested: usize, length: usize },
    #[error("domain mismatch: {0} vs {1}")]
    DomainMismatch(ChannelSet, ChannelSet),
}

/// A finite, duplicate-free, canonically ordered set of channel names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ChannelSet(BTreeSet<Chan>);

impl ChannelSet {
    pub fn new<I: IntoIterator<Item = Chan>>(names: I) -> Self {
        ChannelSet(names.into_iter().collect())
    }

    pub fn of(names: &[&str]) -> Self {
        ChannelSet(names.iter().map(|n| chan(n)).collect())
    }

    pub fn empty() -> Self {
        ChannelSet(BTreeSet::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, c: &str) -> bool {
        self.0.contains(c)
    }

    /// Canonical (lexicographic) iteration order.
    pub fn iter(&self) -> impl Iterator<Item = &Chan> {
        self.0.iter()
    }

    pub fn union(&self, other: &ChannelSet) -> ChannelSet {
        ChannelSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersect(&self, other: &ChannelSet) -> ChannelSet {
        ChannelSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn minus(&self, other: &ChannelSet) -> ChannelSet {
        ChannelSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_disjoint(&self, other: &ChannelSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn is_subset(&self, other: &ChannelSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// First channel (in canonical order) shared with `other`, if any.
    pub fn first_common(&self, other: &ChannelSet) -> Option<Chan> {
        self.0.intersection(&other.0).next().cloned()
    }
}

impl fmt::Display for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Chan> for ChannelSet {
    fn from_iter<I: IntoIterator<Item = Chan>>(iter: I) -> Self {
        ChannelSet(iter.into_iter().collect())
    }
}

/// One tick's named communication: every channel of the domain maps to a
/// finite message sequence. The empty sequence is a legal, distinct value
/// meaning "no message this tick".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Slice {
    entries: BTreeMap<Chan, Vec<Msg>>,
}

impl Slice {
    /// The slice with empty sequences on every channel of `domain`.
    pub fn empty(domain: &ChannelSet) -> Self {
        Slice {
            entries: domain.iter().map(|c| (c.clone(), Vec::new())).collect(),
        }
    }

    pub fn from_entries<I: IntoIterator<Item = (Chan, Vec<Msg>)>>(entries: I) -> Self {
        Slice {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn of(entries: &[(&str, &[&str])]) -> Self {
        Slice {
            entries: entries
                .iter()
                .map(|(c, ms)| (chan(c), ms.iter().map(|m| msg(m)).collect()))
                .collect(),
        }
    }

    pub fn domain(&self) -> ChannelSet {
        self.entries.keys().cloned().collect()
    }

    pub fn get(&self, c: &str) -> Option<&[Msg]> {
        self.entries.get(c).map(|v| v.as_slice())
    }

    pub fn seq(&self, c: &str) -> &[Msg] {
        self.entries.get(c).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn set(&mut self, c: Chan, seq: Vec<Msg>) {
        self.entries.insert(c, seq);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Chan, &Vec<Msg>)> {
        self.entries.iter()
    }

    /// Sum of two slices over disjoint domains (pointwise union).
    pub fn sum(&self, other: &Slice) -> Result<Slice, HistoryError> {
        if let Some(c) = self.domain().first_common(&other.domain()) {
            return Err(HistoryError::OverlappingDomains(c));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.clone());
        Ok(Slice { entries })
    }

    /// Restriction of the slice to the channels of `keep`.
    pub fn project(&self, keep: &ChannelSet) -> Slice {
        Slice {
            entries: self
                .entries
                .iter()
                .filter(|(c, _)| keep.contains(c))
                .map(|(c, v)| (c.clone(), v.clone()))
                .collect(),
        }
    }

    /// Merge of two slices that must agree on every shared channel.
    pub fn merge(&self, other: &Slice) -> Result<Slice, HistoryError> {
        for (c, v) in &other.entries {
            if let Some(w) = self.entries.get(c) {
                if v != w {
                    return Err(HistoryError::DomainMismatch(self.domain(), other.domain()));
                }
            }
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.clone());
        Ok(Slice { entries })
    }

    /// Rename a channel, keeping its sequence.
    pub fn rename(&self, from: &str, to: &Chan) -> Slice {
        let mut entries = BTreeMap::new();
        for (c, v) in &self.entries {
            if c.as_ref() == from {
                entries.insert(to.clone(), v.clone());
            } else {
                entries.insert(c.clone(), v.clone());
            }
        }
        Slice { entries }
    }
}

impl fmt::Display for Slice {
    /// Canonical rendering: channels in canonical order, `name:<m1,m2>`
    /// with `<>` for the empty sequence.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (c, seq)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}:<")?;
            for (j, m) in seq.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{m}")?;
            }
            write!(f, ">")?;
        }
        Ok(())
    }
}

/// A bounded prefix of a named communication history: a sequence of
/// slices over a fixed channel set, index 0 being the first time unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct History {
    domain: ChannelSet,
    ticks: Vec<Slice>,
}

impl History {
    /// The empty prefix over `domain`.
    pub fn empty(domain: ChannelSet) -> Self {
        History {
            domain,
            ticks: Vec::new(),
        }
    }

    /// All-empty slices over `domain` for `len` ticks.
    pub fn silent(domain: ChannelSet, len: usize) -> Self {
        let tick = Slice::empty(&domain);
        History {
            ticks: vec![tick; len],
            domain,
        }
    }

    pub fn from_ticks(domain: ChannelSet, ticks: Vec<Slice>) -> Result<Self, HistoryError> {
        for t in &ticks {
            if t.domain() != domain {
                return Err(HistoryError::DomainMismatch(domain.clone(), t.domain()));
            }
        }
        Ok(History { domain, ticks })
    }

    pub fn domain(&self) -> &ChannelSet {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    pub fn tick(&self, k: usize) -> &Slice {
        &self.ticks[k]
    }

    pub fn ticks(&self) -> &[Slice] {
        &self.ticks
    }

    /// Append one slice; its domain must match.
    pub fn push(&mut self, s: Slice) -> Result<(), HistoryError> {
        if s.domain() != self.domain {
            return Err(HistoryError::DomainMismatch(
                self.domain.clone(),
                s.domain(),
            ));
        }
        self.ticks.push(s);
        Ok(())
    }

    /// Tick-wise sum over disjoint domains; both histories must have the
    /// same length.
    pub fn sum(&self, other: &History) -> Result<History, HistoryError> {
        if let Some(c) = self.domain.first_common(&other.domain) {
            return Err(HistoryError::OverlappingDomains(c));
        }
        if self.len() != other.len() {
            return Err(HistoryError::LengthMismatch(self.len(), other.len()));
        }
        let ticks = self
            .ticks
            .iter()
            .zip(&other.ticks)
            .map(|(a, b)| a.sum(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(History {
            domain: self.domain.union(&other.domain),
            ticks,
        })
    }

    /// Tick-wise projection; length preserved.
    pub fn project(&self, keep: &ChannelSet) -> History {
        History {
            domain: self.domain.intersect(keep),
            ticks: self.ticks.iter().map(|t| t.project(keep)).collect(),
        }
    }

    /// The first `j` ticks.
    pub fn prefix(&self, j: usize) -> Result<History, HistoryError> {
        if j > self.len() {
            return Err(HistoryError::HorizonExceeded {
                requested: j,
                length: self.len(),
            });
        }
        Ok(History {
            domain: self.domain.clone(),
            ticks: self.ticks[..j].to_vec(),
        })
    }

    pub fn rename(&self, from: &str, to: &Chan) -> History {
        let domain = self
            .domain
            .iter()
            .map(|c| {
                if c.as_ref() == from {
                    to.clone()
                } else {
                    c.clone()
                }
            })
            .collect();
        History {
            domain,
            ticks: self.ticks.iter().map(|t| t.rename(from, to)).collect(),
        }
    }
}

impl fmt::Display for History {
    /// One tick per line, prefixed `t=<k>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.ticks.iter().enumerate() {
            writeln!(f, "t={k} {t}")?;
        }
        Ok(())
    }
}

/// A dyadic distance value `2^-exponent`, either exact or an upper bound.
///
/// The upper-bound form arises when two histories agree through the
/// entire compared horizon: the true distance of the underlying infinite
/// streams is then at most `2^-horizon`, possibly zero, and equality is
/// not decidable from the prefix alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DyadicDistance {
    Exact { exponent: u32 },
    UpperBound { exponent: u32 },
}

impl DyadicDistance {
    /// The `j` such that the distance is known to be at most `2^-j`.
    pub fn bound_exponent(&self) -> u32 {
        match self {
            DyadicDistance::Exact { exponent } | DyadicDistance::UpperBound { exponent } => {
                *exponent
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, DyadicDistance::Exact { .. })
    }

    pub fn value(&self) -> f64 {
        0.5f64.powi(self.bound_exponent() as i32)
    }

    /// Whether this distance is certainly `<= 2^-j`.
    pub fn at_most(&self, j: u32) -> bool {
        self.bound_exponent() >= j
    }
}

impl fmt::Display for DyadicDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DyadicDistance::Exact { exponent } => write!(f, "2^-{exponent}"),
            DyadicDistance::UpperBound { exponent } => write!(f, "<=2^-{exponent}"),
        }
    }
}

/// Baire distance of two equal-length, equal-domain history prefixes.
///
/// Returns the exact `2^-j` where `j` is the longest common prefix
/// length, or an upper bound `2^-n` when the histories agree through the
/// whole compared horizon `n`.
pub fn baire_distance(s: &History, t: &History) -> Result<DyadicDistance, HistoryError> {
    if s.domain() != t.domain() {
        return Err(HistoryError::DomainMismatch(
            s.domain().clone(),
            t.domain().clone(),
        ));
    }
    if s.len() != t.len() {
        return Err(HistoryError::LengthMismatch(s.len(), t.len()));
    }
    for j in 0..s.len() {
        if s.tick(j) != t.tick(j) {
            return Ok(DyadicDistance::Exact { exponent: j as u32 });
        }
    }
    Ok(DyadicDistance::UpperBound {
        exponent: s.len() as u32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(domain: &[&str], ticks: &[&[(&str, &[&str])]]) -> History {
        History::from_ticks(
            ChannelSet::of(domain),
            ticks.iter().map(|t| Slice::of(t)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn sum_slice_pointwise_union() {
        let a = Slice::of(&[("i", &["a"])]);
        let b = Slice::of(&[("j", &["b", "c"])]);
        let s = a.sum(&b).unwrap();
        assert_eq!(s, Slice::of(&[("i", &["a"]), ("j", &["b", "c"])]));
    }

    #[test]
    fn sum_slice_empty_is_unit() {
        let a = Slice::of(&[]);
        let b = Slice::of(&[("j", &["b"])]);
        assert_eq!(a.sum(&b).unwrap(), b);
    }

    #[test]
    fn sum_slice_overlap_rejected() {
        let a = Slice::of(&[("i", &["a"])]);
        let b = Slice::of(&[("i", &["b"])]);
        assert_eq!(a.sum(&b), Err(HistoryError::OverlappingDomains(chan("i"))));
    }

    #[test]
    fn sum_history_tickwise() {
        let a = h(&["i"], &[&[("i", &["a"])]]);
        let b = h(&["j"], &[&[("j", &[])]]);
        let s = a.sum(&b).unwrap();
        assert_eq!(s, h(&["i", "j"], &[&[("i", &["a"]), ("j", &[])]]));
    }

    #[test]
    fn sum_history_empty_lengths() {
        let a = History::empty(ChannelSet::of(&["i"]));
        let b = History::empty(ChannelSet::of(&["j"]));
        let s = a.sum(&b).unwrap();
        assert_eq!(s.len(), 0);
        assert_eq!(*s.domain(), ChannelSet::of(&["i", "j"]));
    }

    #[test]
    fn sum_history_length_mismatch() {
        let a = History::silent(ChannelSet::of(&["i"]), 2);
        let b = History::silent(ChannelSet::of(&["j"]), 3);
        assert_eq!(a.sum(&b), Err(HistoryError::LengthMismatch(2, 3)));
    }

    #[test]
    fn project_slice_basic() {
        let s = Slice::of(&[("i", &["a"]), ("o", &["b"])]);
        assert_eq!(
            s.project(&ChannelSet::of(&["o"])),
            Slice::of(&[("o", &["b"])])
        );
    }

    #[test]
    fn project_slice_disjoint_is_empty_named_sequence() {
        let s = Slice::of(&[("i", &["a"])]);
        assert_eq!(s.project(&ChannelSet::of(&["z"])), Slice::of(&[]));
    }

    #[test]
    fn project_slice_identity() {
        let s = Slice::of(&[("i", &["a"]), ("o", &["b"])]);
        assert_eq!(s.project(&s.domain()), s);
    }

    #[test]
    fn project_history_tickwise() {
        let a = h(
            &["i", "o"],
            &[
                &[("i", &["a"]), ("o", &["b"])],
                &[("i", &[]), ("o", &["c"])],
            ],
        );
        assert_eq!(
            a.project(&ChannelSet::of(&["o"])),
            h(&["o"], &[&[("o", &["b"])], &[("o", &["c"])]])
        );
    }

    #[test]
    fn project_history_to_empty_set() {
        let a = h(&["i"], &[&[("i", &["a"])], &[("i", &[])]]);
        let p = a.project(&ChannelSet::empty());
        assert_eq!(p.len(), 2);
        assert!(p.domain().is_empty());
    }

    #[test]
    fn projection_composes() {
        let a = h(
            &["i", "o", "z"],
            &[&[("i", &["a"]), ("o", &["b"]), ("z", &["c"])]],
        );
        let o = ChannelSet::of(&["i", "o"]);
        let p = ChannelSet::of(&["o", "z"]);
        assert_eq!(a.project(&o).project(&p), a.project(&o.intersect(&p)));
    }

    #[test]
    fn prefix_edges() {
        let a = h(&["i"], &[&[("i", &["a"])], &[("i", &[])], &[("i", &["b"])]]);
        assert_eq!(a.prefix(0).unwrap(), History::empty(ChannelSet::of(&["i"])));
        assert_eq!(a.prefix(3).unwrap(), a);
        assert_eq!(
            a.prefix(4),
            Err(HistoryError::HorizonExceeded {
                requested: 4,
                length: 3
            })
        );
    }

    #[test]
    fn baire_distance_agreement_through_horizon() {
        let a = History::silent(ChannelSet::of(&["i"]), 5);
        let d = baire_distance(&a, &a.clone()).unwrap();
        assert_eq!(d, DyadicDistance::UpperBound { exponent: 5 });
    }

    #[test]
    fn baire_distance_first_disagreement() {
        let mut a = History::silent(ChannelSet::of(&["i"]), 4);
        let b = a.clone();
        a.ticks[3] = Slice::of(&[("i", &["a"])]);
        assert_eq!(
            baire_distance(&a, &b).unwrap(),
            DyadicDistance::Exact { exponent: 3 }
        );
    }

    #[test]
    fn baire_distance_first_tick() {
        let mut a = History::silent(ChannelSet::of(&["i"]), 2);
        let b = a.clone();
        a.ticks[0] = Slice::of(&[("i", &["a"])]);
        let d = baire_distance(&a, &b).unwrap();
        assert_eq!(d, DyadicDistance::Exact { exponent: 0 });
        assert_eq!(d.value(), 1.0);
    }

    #[test]
    fn prefix_commutes_with_sum_and_projection() {
        let a = h(&["i"], &[&[("i", &["a"])], &[("i", &["b"])]]);
        let b = h(&["j"], &[&[("j", &[])], &[("j", &["c"])]]);
        for n in 0..=2 {
            let lhs = a.sum(&b).unwrap().prefix(n).unwrap();
            let rhs = a.prefix(n).unwrap().sum(&b.prefix(n).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            let keep = ChannelSet::of(&["i"]);
            assert_eq!(
                a.sum(&b).unwrap().project(&keep).prefix(n).unwrap(),
                a.sum(&b).unwrap().prefix(n).unwrap().project(&keep)
            );
        }
    }

    #[test]
    fn sum_then_project_recovers_summand() {
        let a = Slice::of(&[("i", &["a"])]);
        let b = Slice::of(&[("j", &["b"])]);
        assert_eq!(a.sum(&b).unwrap().project(&a.domain()), a);
    }

    #[test]
    fn canonical_rendering() {
        let s = Slice::of(&[("j", &[]), ("i", &["a", "b"])]);
        assert_eq!(s.to_string(), "i:<a,b> j:<>");
        let hh = h(&["i"], &[&[("i", &["a"])], &[("i", &[])]]);
        assert_eq!(hh.to_string(), "t=0 i:<a>\nt=1 i:<>\n");
    }
}
