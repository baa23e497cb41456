//! A small line-oriented text format for describing automata, nets and
//! input scripts.
//!
//! ```text
//! alphabet a b;
//! automaton A {
//!   sig in(i j) out(o) hid();
//!   state s0 start;
//!   trans s0 -> s0 on i:<a> j:<> out o:<a>;
//! }
//! builtin FM = fair_merge;
//! builtin BUF = buffer(8);
//! rename BUF.i -> m;
//! net N = hide {o} (FM (x) BUF);
//! input { t0 i:<a> j:<>; t1 i:<> j:<b>; }
//! config horizon 2;
//! ```
//!
//! `(x)` is the composition operator, `hide {…}` projects outputs away.
//! `#` starts a comment. Parse errors carry line and column.

use std::fmt::Write as _;

use thiserror::Error;

use crate::automata::{
    check_signature, rename_channel, state, Alphabet, AutomataError, Automaton, Delta,
    PortSignature, Transition,
};
use crate::builtins;
use crate::composition::{compose_forced, ComposeConfig, ComposeError, Composition, ForcedPath};
use crate::history::{chan, msg, ChannelSet, History, HistoryError, Slice};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("undefined name `{name}` at line {line}")]
    Name { line: usize, name: String },
    #[error("type error at line {line}: {msg}")]
    Type { line: usize, msg: String },
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    History(#[from] HistoryError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuiltinRef {
    FairMerge,
    Buffer(usize),
    BlockingA,
    BlockingB,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransDef {
    pub source: String,
    pub target: String,
    /// Channel -> message sequence; missing channels default to empty.
    pub on: Vec<(String, Vec<String>)>,
    pub out: Vec<(String, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableDef {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub hidden: Vec<String>,
    /// (state name, is start).
    pub states: Vec<(String, bool)>,
    pub trans: Vec<TransDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AutomatonDef {
    Table(TableDef),
    Builtin(BuiltinRef),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetExpr {
    Ref(String),
    Compose(Box<NetExpr>, Box<NetExpr>),
    Hide(Vec<String>, Box<NetExpr>),
}

/// Session parameters; command-line flags override these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionConfig {
    pub horizon: usize,
    pub bound: usize,
    pub seed: u64,
    pub budget: usize,
    pub joint_bound: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            horizon: 2,
            bound: 1,
            seed: 1,
            budget: 1_000_000,
            joint_bound: 2,
        }
    }
}

/// One tick of a raw input script: `(channel, messages)` pairs.
pub type ScriptTick = Vec<(String, Vec<String>)>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NetworkDescription {
    pub alphabet: Vec<String>,
    /// Definition order is preserved for rendering and reporting.
    pub automata: Vec<(String, AutomatonDef)>,
    /// (automaton name, old channel, new channel), applied in order.
    pub renames: Vec<(String, String, String)>,
    pub net: Option<(String, NetExpr)>,
    /// Raw input script: one entry per tick.
    pub input: Option<Vec<ScriptTick>>,
    pub config: Option<SessionConfig>,
}

// ---------------------------------------------------------------------
// Tokenizer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Lt,
    Gt,
    Comma,
    Dot,
    Eq,
    Arrow,
    Otimes,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Otimes => write!(f, "`(x)`"),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, NetError> {
    let mut toks = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            match c {
                '#' => break,
                c if c.is_whitespace() => i += 1,
                '(' if i + 2 < chars.len() && chars[i + 1] == 'x' && chars[i + 2] == ')' => {
                    toks.push((Tok::Otimes, line_no, col));
                    i += 3;
                }
                '(' => {
                    toks.push((Tok::LParen, line_no, col));
                    i += 1;
                }
                ')' => {
                    toks.push((Tok::RParen, line_no, col));
                    i += 1;
                }
                '{' => {
                    toks.push((Tok::LBrace, line_no, col));
                    i += 1;
                }
                '}' => {
                    toks.push((Tok::RBrace, line_no, col));
                    i += 1;
                }
                ';' => {
                    toks.push((Tok::Semi, line_no, col));
                    i += 1;
                }
                ':' => {
                    toks.push((Tok::Colon, line_no, col));
                    i += 1;
                }
                '<' => {
                    toks.push((Tok::Lt, line_no, col));
                    i += 1;
                }
                '>' => {
                    toks.push((Tok::Gt, line_no, col));
                    i += 1;
                }
                ',' => {
                    toks.push((Tok::Comma, line_no, col));
                    i += 1;
                }
                '.' => {
                    toks.push((Tok::Dot, line_no, col));
                    i += 1;
                }
                '=' => {
                    toks.push((Tok::Eq, line_no, col));
                    i += 1;
                }
                '-' if i + 1 < chars.len() && chars[i + 1] == '>' => {
                    toks.push((Tok::Arrow, line_no, col));
                    i += 2;
                }
                c if c.is_ascii_digit() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    // A digit run followed by word characters is an
                    // identifier such as `0a` or state names.
                    if i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                        while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                            i += 1;
                        }
                        let word: String = chars[start..i].iter().collect();
                        toks.push((Tok::Ident(word), line_no, col));
                    } else {
                        let word: String = chars[start..i].iter().collect();
                        toks.push((Tok::Num(word.parse().unwrap()), line_no, col));
                    }
                }
                c if c.is_alphanumeric() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    toks.push((Tok::Ident(word), line_no, col));
                }
                other => {
                    return Err(NetError::Syntax {
                        line: line_no,
                        col,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
    }
    Ok(toks)
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((1, 1))
    }

    fn next(&mut self) -> Result<Tok, NetError> {
        let (line, col) = self.here();
        let t = self
            .toks
            .get(self.pos)
            .map(|(t, _, _)| t.clone())
            .ok_or(NetError::Syntax {
                line,
                col,
                msg: "unexpected end of input".into(),
            })?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok) -> Result<(), NetError> {
        let (line, col) = self.here();
        let got = self.next()?;
        if got != want {
            return Err(NetError::Syntax {
                line,
                col,
                msg: format!("expected {want}, found {got}"),
            });
        }
        Ok(())
    }

    fn ident(&mut self) -> Result<String, NetError> {
        let (line, col) = self.here();
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            Tok::Num(n) => Ok(n.to_string()),
            other => Err(NetError::Syntax {
                line,
                col,
                msg: format!("expected an identifier, found {other}"),
            }),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), NetError> {
        let (line, col) = self.here();
        let got = self.ident()?;
        if got != word {
            return Err(NetError::Syntax {
                line,
                col,
                msg: format!("expected `{word}`, found `{got}`"),
            });
        }
        Ok(())
    }

    fn number(&mut self) -> Result<usize, NetError> {
        let (line, col) = self.here();
        match self.next()? {
            Tok::Num(n) => Ok(n),
            other => Err(NetError::Syntax {
                line,
                col,
                msg: format!("expected a number, found {other}"),
            }),
        }
    }
}

// ---------------------------------------------------------------------
// Parser

/// Parses `name:<m1,m2>`; `<>` is the empty sequence.
fn parse_slice_entry(lx: &mut Lexer) -> Result<(String, Vec<String>), NetError> {
    let name = lx.ident()?;
    lx.expect(Tok::Colon)?;
    lx.expect(Tok::Lt)?;
    let mut seq = Vec::new();
    if lx.peek() != Some(&Tok::Gt) {
        loop {
            seq.push(lx.ident()?);
            match lx.peek() {
                Some(Tok::Comma) => {
                    lx.next()?;
                }
                _ => break,
            }
        }
    }
    lx.expect(Tok::Gt)?;
    Ok((name, seq))
}

fn parse_chan_list(lx: &mut Lexer) -> Result<Vec<String>, NetError> {
    lx.expect(Tok::LParen)?;
    let mut out = Vec::new();
    while lx.peek() != Some(&Tok::RParen) {
        out.push(lx.ident()?);
    }
    lx.expect(Tok::RParen)?;
    Ok(out)
}

fn parse_table(lx: &mut Lexer) -> Result<TableDef, NetError> {
    lx.expect(Tok::LBrace)?;
    lx.keyword("sig")?;
    lx.keyword("in")?;
    let inputs = parse_chan_list(lx)?;
    lx.keyword("out")?;
    let outputs = parse_chan_list(lx)?;
    lx.keyword("hid")?;
    let hidden = parse_chan_list(lx)?;
    lx.expect(Tok::Semi)?;

    let mut states = Vec::new();
    let mut trans = Vec::new();
    while lx.peek() != Some(&Tok::RBrace) {
        let (line, col) = lx.here();
        match lx.ident()?.as_str() {
            "state" => {
                let name = lx.ident()?;
                let start = if lx.peek() == Some(&Tok::Ident("start".into())) {
                    lx.next()?;
                    true
                } else {
                    false
                };
                lx.expect(Tok::Semi)?;
                states.push((name, start));
            }
            "trans" => {
                let source = lx.ident()?;
                lx.expect(Tok::Arrow)?;
                let target = lx.ident()?;
                let mut on = Vec::new();
                let mut out = Vec::new();
                if lx.peek() == Some(&Tok::Ident("on".into())) {
                    lx.next()?;
                    while matches!(lx.peek(), Some(Tok::Ident(w)) if w != "out")
                        && lx.peek() != Some(&Tok::Semi)
                    {
                        on.push(parse_slice_entry(lx)?);
                    }
                }
                if lx.peek() == Some(&Tok::Ident("out".into())) {
                    lx.next()?;
                    while matches!(lx.peek(), Some(Tok::Ident(_))) {
                        out.push(parse_slice_entry(lx)?);
                    }
                }
                lx.expect(Tok::Semi)?;
                trans.push(TransDef {
                    source,
                    target,
                    on,
                    out,
                });
            }
            other => {
                return Err(NetError::Syntax {
                    line,
                    col,
                    msg: format!("expected `state` or `trans`, found `{other}`"),
                })
            }
        }
    }
    lx.expect(Tok::RBrace)?;
    Ok(TableDef {
        inputs,
        outputs,
        hidden,
        states,
        trans,
    })
}

fn parse_builtin(lx: &mut Lexer) -> Result<BuiltinRef, NetError> {
    let (line, col) = lx.here();
    let name = lx.ident()?;
    match name.as_str() {
        "fair_merge" => Ok(BuiltinRef::FairMerge),
        "blocking_a" => Ok(BuiltinRef::BlockingA),
        "blocking_b" => Ok(BuiltinRef::BlockingB),
        "buffer" => {
            let capacity = if lx.peek() == Some(&Tok::LParen) {
                lx.next()?;
                let n = lx.number()?;
                lx.expect(Tok::RParen)?;
                n
            } else {
                builtins::DEFAULT_BUFFER_CAPACITY
            };
            Ok(BuiltinRef::Buffer(capacity))
        }
        other => Err(NetError::Syntax {
            line,
            col,
            msg: format!("unknown builtin `{other}`"),
        }),
    }
}

fn parse_term(lx: &mut Lexer) -> Result<NetExpr, NetError> {
    match lx.peek() {
        Some(Tok::LParen) => {
            lx.next()?;
            let e = parse_expr(lx)?;
            lx.expect(Tok::RParen)?;
            Ok(e)
        }
        Some(Tok::Ident(w)) if w == "hide" => {
            lx.next()?;
            lx.expect(Tok::LBrace)?;
            let mut chans = Vec::new();
            while lx.peek() != Some(&Tok::RBrace) {
                chans.push(lx.ident()?);
            }
            lx.expect(Tok::RBrace)?;
            let inner = parse_term(lx)?;
            Ok(NetExpr::Hide(chans, Box::new(inner)))
        }
        _ => Ok(NetExpr::Ref(lx.ident()?)),
    }
}

fn parse_expr(lx: &mut Lexer) -> Result<NetExpr, NetError> {
    let mut acc = parse_term(lx)?;
    while lx.peek() == Some(&Tok::Otimes) {
        lx.next()?;
        let rhs = parse_term(lx)?;
        acc = NetExpr::Compose(Box::new(acc), Box::new(rhs));
    }
    Ok(acc)
}

pub fn parse(text: &str) -> Result<NetworkDescription, NetError> {
    let mut lx = Lexer {
        toks: lex(text)?,
        pos: 0,
    };
    let mut desc = NetworkDescription::default();
    while lx.peek().is_some() {
        let (line, col) = lx.here();
        match lx.ident()?.as_str() {
            "alphabet" => {
                while lx.peek() != Some(&Tok::Semi) {
                    desc.alphabet.push(lx.ident()?);
                }
                lx.expect(Tok::Semi)?;
            }
            "automaton" => {
                let name = lx.ident()?;
                let table = parse_table(&mut lx)?;
                desc.automata.push((name, AutomatonDef::Table(table)));
            }
            "builtin" => {
                let name = lx.ident()?;
                lx.expect(Tok::Eq)?;
                let b = parse_builtin(&mut lx)?;
                lx.expect(Tok::Semi)?;
                desc.automata.push((name, AutomatonDef::Builtin(b)));
            }
            "rename" => {
                let name = lx.ident()?;
                lx.expect(Tok::Dot)?;
                let old = lx.ident()?;
                lx.expect(Tok::Arrow)?;
                let new = lx.ident()?;
                lx.expect(Tok::Semi)?;
                desc.renames.push((name, old, new));
            }
            "net" => {
                let name = lx.ident()?;
                lx.expect(Tok::Eq)?;
                let expr = parse_expr(&mut lx)?;
                lx.expect(Tok::Semi)?;
                desc.net = Some((name, expr));
            }
            "input" => {
                lx.expect(Tok::LBrace)?;
                let mut ticks: Vec<Vec<(String, Vec<String>)>> = Vec::new();
                while lx.peek() != Some(&Tok::RBrace) {
                    let (tline, tcol) = lx.here();
                    let label = lx.ident()?;
                    let idx: usize = label.strip_prefix('t').and_then(|s| s.parse().ok()).ok_or(
                        NetError::Syntax {
                            line: tline,
                            col: tcol,
                            msg: format!("expected a tick label like `t0`, found `{label}`"),
                        },
                    )?;
                    if idx != ticks.len() {
                        return Err(NetError::Syntax {
                            line: tline,
                            col: tcol,
                            msg: format!(
                                "tick labels must be consecutive; expected `t{}`",
                                ticks.len()
                            ),
                        });
                    }
                    let mut entries = Vec::new();
                    while lx.peek() != Some(&Tok::Semi) {
                        entries.push(parse_slice_entry(&mut lx)?);
                    }
                    lx.expect(Tok::Semi)?;
                    ticks.push(entries);
                }
                lx.expect(Tok::RBrace)?;
                desc.input = Some(ticks);
            }
            "config" => {
                let cfg = desc.config.get_or_insert_with(SessionConfig::default);
                let (kline, kcol) = lx.here();
                let key = lx.ident()?;
                let value = lx.number()?;
                lx.expect(Tok::Semi)?;
                match key.as_str() {
                    "horizon" => cfg.horizon = value,
                    "bound" => cfg.bound = value,
                    "seed" => cfg.seed = value as u64,
                    "budget" => cfg.budget = value,
                    "joint_bound" => cfg.joint_bound = value,
                    other => {
                        return Err(NetError::Syntax {
                            line: kline,
                            col: kcol,
                            msg: format!("unknown config key `{other}`"),
                        })
                    }
                }
            }
            other => {
                return Err(NetError::Syntax {
                    line,
                    col,
                    msg: format!("unknown statement `{other}`"),
                })
            }
        }
    }
    if desc.alphabet.is_empty() {
        return Err(NetError::Syntax {
            line: 1,
            col: 1,
            msg: "an `alphabet` declaration is required".into(),
        });
    }
    Ok(desc)
}

// ---------------------------------------------------------------------
// Elaboration

/// A fully elaborated net: the automaton plus human-readable notes about
/// how each composition node was resolved.
#[derive(Debug, Clone)]
pub struct Elaborated {
    pub automaton: Automaton,
    pub notes: Vec<String>,
}

impl NetworkDescription {
    pub fn alphabet(&self) -> Alphabet {
        Alphabet::of(&self.alphabet.iter().map(String::as_str).collect::<Vec<_>>())
    }

    pub fn session(&self) -> SessionConfig {
        self.config.clone().unwrap_or_default()
    }

    fn table_to_automaton(&self, name: &str, t: &TableDef) -> Result<Automaton, NetError> {
        let alphabet = self.alphabet();
        let inputs = ChannelSet::of(&t.inputs.iter().map(String::as_str).collect::<Vec<_>>());
        let outputs = ChannelSet::of(&t.outputs.iter().map(String::as_str).collect::<Vec<_>>());
        let hidden = ChannelSet::of(&t.hidden.iter().map(String::as_str).collect::<Vec<_>>());
        let signature = PortSignature {
            alphabet: alphabet.clone(),
            inputs: inputs.clone(),
            outputs: outputs.clone(),
            hidden: hidden.clone(),
        };
        check_signature(&signature)?;
        let emitted = outputs.union(&hidden);
        let channels = signature.channels();

        let starts: Vec<_> = t.states.iter().filter(|(_, s)| *s).collect();
        if starts.len() != 1 {
            return Err(NetError::Type {
                line: 0,
                msg: format!(
                    "automaton `{name}` must declare exactly one start state, found {}",
                    starts.len()
                ),
            });
        }
        let known: std::collections::BTreeSet<&str> =
            t.states.iter().map(|(n, _)| n.as_str()).collect();
        let symbols: std::collections::BTreeSet<&str> =
            self.alphabet.iter().map(String::as_str).collect();

        let mut transitions = Vec::new();
        for tr in &t.trans {
            for end in [&tr.source, &tr.target] {
                if !known.contains(end.as_str()) {
                    return Err(NetError::Name {
                        line: 0,
                        name: end.clone(),
                    });
                }
            }
            let mut action = Slice::empty(&channels);
            for (entries, allowed, kind) in
                [(&tr.on, &inputs, "input"), (&tr.out, &emitted, "output")]
            {
                for (c, seq) in entries.iter() {
                    if !allowed.contains(c.as_str()) {
                        return Err(NetError::Type {
                            line: 0,
                            msg: format!(
                                "channel `{c}` is not an {kind} channel of automaton `{name}`"
                            ),
                        });
                    }
                    for m in seq {
                        if !symbols.contains(m.as_str()) {
                            return Err(NetError::Type {
                                line: 0,
                                msg: format!("message `{m}` is not in the alphabet"),
                            });
                        }
                    }
                    action.set(chan(c), seq.iter().map(|m| msg(m)).collect());
                }
            }
            transitions.push(Transition {
                source: state(&tr.source),
                action,
                target: state(&tr.target),
            });
        }
        let input_bound = transitions
            .iter()
            .flat_map(|tr| inputs.iter().map(|c| tr.action.seq(c).len()))
            .max()
            .unwrap_or(1)
            .max(1);
        Ok(Automaton {
            signature,
            states: t.states.iter().map(|(n, _)| state(n)).collect(),
            start: state(&starts[0].0),
            delta: Delta::Table(transitions),
            input_bound,
        })
    }

    /// Builds one named automaton with renames applied.
    pub fn automaton(&self, name: &str, session: &SessionConfig) -> Result<Automaton, NetError> {
        let def = self
            .automata
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d)
            .ok_or(NetError::Name {
                line: 0,
                name: name.to_string(),
            })?;
        let alphabet = self.alphabet();
        let mut a = match def {
            AutomatonDef::Table(t) => self.table_to_automaton(name, t)?,
            AutomatonDef::Builtin(BuiltinRef::FairMerge) => {
                builtins::fair_merge(&alphabet, session.bound)
            }
            AutomatonDef::Builtin(BuiltinRef::Buffer(capacity)) => {
                builtins::buffer(&alphabet, session.bound, *capacity)
            }
            AutomatonDef::Builtin(BuiltinRef::BlockingA) => {
                builtins::blocking_pair(&alphabet, session.bound).0
            }
            AutomatonDef::Builtin(BuiltinRef::BlockingB) => {
                builtins::blocking_pair(&alphabet, session.bound).1
            }
        };
        for (target, old, new) in &self.renames {
            if target == name {
                if !a.signature.channels().contains(old.as_str()) {
                    return Err(NetError::Type {
                        line: 0,
                        msg: format!("automaton `{name}` has no channel `{old}`"),
                    });
                }
                a = rename_channel(&a, old, new);
            }
        }
        Ok(a)
    }

    fn elaborate_expr(
        &self,
        expr: &NetExpr,
        session: &SessionConfig,
        notes: &mut Vec<String>,
    ) -> Result<Automaton, NetError> {
        match expr {
            NetExpr::Ref(name) => self.automaton(name, session),
            NetExpr::Compose(lhs, rhs) => {
                let a1 = self.elaborate_expr(lhs, session, notes)?;
                let a2 = self.elaborate_expr(rhs, session, notes)?;
                let cfg = ComposeConfig {
                    joint_bound: session.joint_bound,
                    budget: session.budget,
                    ..ComposeConfig::default()
                };
                let Composition { automaton, path } =
                    compose_forced(&a1, &a2, &cfg, ForcedPath::Auto)?;
                notes.push(format!("{path}"));
                Ok(automaton)
            }
            NetExpr::Hide(chans, inner) => {
                let a = self.elaborate_expr(inner, session, notes)?;
                let p = ChannelSet::of(&chans.iter().map(String::as_str).collect::<Vec<_>>());
                if let Some(c) = p.iter().find(|c| !a.signature.outputs.contains(c)) {
                    return Err(NetError::Type {
                        line: 0,
                        msg: format!("cannot hide `{c}`: not an output of the composed node"),
                    });
                }
                Ok(crate::composition::hide(&a, &p)?)
            }
        }
    }

    /// Elaborates the net expression, or the sole automaton when no
    /// `net` statement is present.
    pub fn elaborate(&self, session: &SessionConfig) -> Result<Elaborated, NetError> {
        let mut notes = Vec::new();
        let automaton = match &self.net {
            Some((_, expr)) => self.elaborate_expr(expr, session, &mut notes)?,
            None => {
                let (name, _) = self.automata.first().ok_or(NetError::Syntax {
                    line: 1,
                    col: 1,
                    msg: "the description defines no automaton".into(),
                })?;
                self.automaton(name, session)?
            }
        };
        Ok(Elaborated { automaton, notes })
    }

    /// Builds the input script as a History over `domain`; channels
    /// missing from a tick default to the empty sequence.
    pub fn input_history(&self, domain: &ChannelSet) -> Result<Option<History>, NetError> {
        let Some(ticks) = &self.input else {
            return Ok(None);
        };
        let mut h = History::empty(domain.clone());
        for entries in ticks {
            let mut s = Slice::empty(domain);
            for (c, seq) in entries {
                if !domain.contains(c.as_str()) {
                    return Err(NetError::Type {
                        line: 0,
                        msg: format!("script channel `{c}` is not a top-level input"),
                    });
                }
                s.set(chan(c), seq.iter().map(|m| msg(m)).collect());
            }
            h.push(s)?;
        }
        Ok(Some(h))
    }
}

// ---------------------------------------------------------------------
// Rendering

fn render_entries(out: &mut String, entries: &[(String, Vec<String>)]) {
    for (c, seq) in entries {
        let _ = write!(out, " {c}:<{}>", seq.join(","));
    }
}

/// Renders a description back to its text form. Table automata
/// round-trip structurally.
pub fn render(desc: &NetworkDescription) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alphabet {};", desc.alphabet.join(" "));
    for (name, def) in &desc.automata {
        match def {
            AutomatonDef::Table(t) => {
                let _ = writeln!(out, "automaton {name} {{");
                let _ = writeln!(
                    out,
                    "  sig in({}) out({}) hid({});",
                    t.inputs.join(" "),
                    t.outputs.join(" "),
                    t.hidden.join(" ")
                );
                for (s, start) in &t.states {
                    let _ = writeln!(out, "  state {s}{};", if *start { " start" } else { "" });
                }
                for tr in &t.trans {
                    let mut line = format!("  trans {} -> {} on", tr.source, tr.target);
                    render_entries(&mut line, &tr.on);
                    line.push_str(" out");
                    render_entries(&mut line, &tr.out);
                    let _ = writeln!(out, "{line};");
                }
                let _ = writeln!(out, "}}");
            }
            AutomatonDef::Builtin(b) => {
                let b = match b {
                    BuiltinRef::FairMerge => "fair_merge".to_string(),
                    BuiltinRef::Buffer(n) => format!("buffer({n})"),
                    BuiltinRef::BlockingA => "blocking_a".to_string(),
                    BuiltinRef::BlockingB => "blocking_b".to_string(),
                };
                let _ = writeln!(out, "builtin {name} = {b};");
            }
        }
    }
    for (name, old, new) in &desc.renames {
        let _ = writeln!(out, "rename {name}.{old} -> {new};");
    }
    if let Some((name, expr)) = &desc.net {
        let _ = writeln!(out, "net {name} = {};", render_expr(expr));
    }
    if let Some(ticks) = &desc.input {
        let _ = writeln!(out, "input {{");
        for (k, entries) in ticks.iter().enumerate() {
            let mut line = format!("  t{k}");
            render_entries(&mut line, entries);
            let _ = writeln!(out, "{line};");
        }
        let _ = writeln!(out, "}}");
    }
    if let Some(cfg) = &desc.config {
        let _ = writeln!(out, "config horizon {};", cfg.horizon);
        let _ = writeln!(out, "config bound {};", cfg.bound);
        let _ = writeln!(out, "config seed {};", cfg.seed);
        let _ = writeln!(out, "config budget {};", cfg.budget);
        let _ = writeln!(out, "config joint_bound {};", cfg.joint_bound);
    }
    out
}

fn render_expr(e: &NetExpr) -> String {
    match e {
        NetExpr::Ref(n) => n.clone(),
        NetExpr::Compose(a, b) => format!("({} (x) {})", render_expr(a), render_expr(b)),
        NetExpr::Hide(chans, inner) => {
            format!("hide {{{}}} {}", chans.join(" "), render_expr(inner))
        }
    }
}
