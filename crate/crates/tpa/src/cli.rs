//! Command-line workflows over network descriptions: `check`,
//! `compose`, `run`, `behaviors`, `equiv` and `dist`.
//!
//! Exit codes: 0 ok, 1 witness/counterexample found, 2 usage or parse
//! error, 3 budget exceeded. All output ordering is canonical, so
//! repeated runs with the same inputs and seed are byte-identical.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automata::{
    behaviors, check_reactive, check_strong_pulse, check_weak_pulse, AutomataError, Automaton,
    PulseVerdict, ReactiveVerdict,
};
use crate::composition::{ComposeConfig, ComposeError};
use crate::denotational::{check_equivalence, DenotError, EquivOutcome, ResolverConfig};
use crate::history::{baire_distance, chan, msg, ChannelSet, History, Slice};
use crate::netdesc::{self, NetError, NetExpr, NetworkDescription, SessionConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WITNESS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tpanet",
    about = "Timed port automata networks: composition, hiding, pulse analysis and \
             bounded-horizon semantics checks",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// Horizon T (number of ticks).
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Per-tick message sequence length bound L.
    #[arg(long)]
    pub bound: Option<usize>,
    /// RNG seed for `run` and sampled resolvers.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enumeration node budget.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Append a line-delimited machine-readable verdict block.
    #[arg(long)]
    pub machine: bool,
    /// Network description file.
    pub file: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signature, reactiveness and pulse-drivenness verdicts per automaton.
    Check(CommonArgs),
    /// Elaborate the net into a flat product and report the schedule.
    Compose(CommonArgs),
    /// One seeded execution trace for the input script.
    Run(CommonArgs),
    /// Exhaustive behavior set at the horizon.
    Behaviors(CommonArgs),
    /// Compare the composed automaton's semantics against the
    /// composition of its parts' semantics.
    Equiv(CommonArgs),
    /// Distance between two trace files.
    Dist {
        #[arg(long)]
        machine: bool,
        first: PathBuf,
        second: PathBuf,
    },
}

/// Output text plus process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

struct Report {
    command: &'static str,
    human: String,
    machine: Vec<(String, String)>,
    code: i32,
}

impl Report {
    fn new(command: &'static str) -> Self {
        Report {
            command,
            human: String::new(),
            machine: Vec::new(),
            code: EXIT_OK,
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.human.push_str(s.as_ref());
        self.human.push('\n');
    }

    fn kv(&mut self, k: &str, v: impl ToString) {
        self.machine.push((k.to_string(), v.to_string()));
    }

    fn finish(mut self, machine: bool) -> Outcome {
        if machine {
            let status = match self.code {
                EXIT_OK => "ok",
                EXIT_WITNESS => "witness",
                _ => "error",
            };
            self.human.push_str("machine-begin\n");
            let _ = writeln!(self.human, "command={}", self.command);
            let _ = writeln!(self.human, "status={status}");
            for (k, v) in &self.machine {
                // One record per line; embedded newlines become `\n`.
                let _ = writeln!(self.human, "{k}={}", v.replace('\n', "\\n"));
            }
            self.human.push_str("machine-end\n");
        }
        Outcome {
            stdout: self.human,
            code: self.code,
        }
    }
}

fn exit_code_automata(e: &AutomataError) -> i32 {
    match e {
        AutomataError::ExplosionGuard { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

fn exit_code_compose(e: &ComposeError) -> i32 {
    match e {
        ComposeError::EmptyComposition { .. } => EXIT_WITNESS,
        ComposeError::Automata(a) => exit_code_automata(a),
        _ => EXIT_USAGE,
    }
}

fn exit_code_denot(e: &DenotError) -> i32 {
    match e {
        DenotError::ExplosionGuard { .. } => EXIT_BUDGET,
        DenotError::Automata(a) => exit_code_automata(a),
        DenotError::Compose(c) => exit_code_compose(c),
        _ => EXIT_USAGE,
    }
}

fn exit_code_net(e: &NetError) -> i32 {
    match e {
        NetError::Automata(a) => exit_code_automata(a),
        NetError::Compose(c) => exit_code_compose(c),
        _ => EXIT_USAGE,
    }
}

fn fail(command: &'static str, machine: bool, msg: String, code: i32) -> Outcome {
    let mut r = Report::new(command);
    r.line(format!("error: {msg}"));
    r.kv("error", &msg);
    r.code = code;
    r.finish(machine)
}

fn load(args: &CommonArgs) -> Result<(NetworkDescription, SessionConfig), (String, i32)> {
    let text = std::fs::read_to_string(&args.file).map_err(|e| {
        (
            format!("cannot read {}: {e}", args.file.display()),
            EXIT_USAGE,
        )
    })?;
    let desc = netdesc::parse(&text).map_err(|e| (e.to_string(), exit_code_net(&e)))?;
    let mut session = desc.session();
    if let Some(t) = args.horizon {
        session.horizon = t;
    }
    if let Some(l) = args.bound {
        session.bound = l;
    }
    if let Some(s) = args.seed {
        session.seed = s;
    }
    if let Some(b) = args.budget {
        session.budget = b;
    }
    Ok((desc, session))
}

fn signature_line(a: &Automaton) -> String {
    format!(
        "signature in={} out={} hid={}",
        a.signature.inputs, a.signature.outputs, a.signature.hidden
    )
}

fn cmd_check(args: &CommonArgs) -> Outcome {
    let (desc, session) = match load(args) {
        Ok(v) => v,
        Err((msg, code)) => return fail("check", args.machine, msg, code),
    };
    let mut r = Report::new("check");
    let mut names: Vec<String> = desc.automata.iter().map(|(n, _)| n.clone()).collect();
    if let Some((name, _)) = &desc.net {
        names.push(name.clone());
    }
    for name in names {
        let a = if desc.net.as_ref().is_some_and(|(n, _)| *n == name) {
            match desc.elaborate(&session) {
                Ok(e) => e.automaton,
                Err(e) => return fail("check", args.machine, e.to_string(), exit_code_net(&e)),
            }
        } else {
            match desc.automaton(&name, &session) {
                Ok(a) => a,
                Err(e) => return fail("check", args.machine, e.to_string(), exit_code_net(&e)),
            }
        };
        r.line(format!("automaton {name}: {}", signature_line(&a)));
        r.kv(&format!("{name}.inputs"), &a.signature.inputs);
        r.kv(&format!("{name}.outputs"), &a.signature.outputs);
        let reactive = match check_reactive(&a) {
            Ok(v) => v,
            Err(e) => return fail("check", args.machine, e.to_string(), exit_code_automata(&e)),
        };
        match &reactive {
            ReactiveVerdict::Ok => {
                r.line("  reactive: ok");
                r.kv(&format!("{name}.reactive"), "ok");
            }
            ReactiveVerdict::Witness { state, input } => {
                r.line(format!("  reactive: witness state={state} input={input}"));
                r.kv(
                    &format!("{name}.reactive"),
                    format!("witness state={state} input={input}"),
                );
                r.code = EXIT_WITNESS;
                continue;
            }
        }
        let weak = match check_weak_pulse(&a, session.horizon, session.budget) {
            Ok(v) => v,
            Err(e) => return fail("check", args.machine, e.to_string(), exit_code_automata(&e)),
        };
        match &weak {
            PulseVerdict::Ok => {
                r.line("  weak-pulse: ok");
                r.kv(&format!("{name}.weak_pulse"), "ok");
            }
            PulseVerdict::Witness { n, .. } => {
                r.line(format!("  weak-pulse: witness at n={n}"));
                r.kv(&format!("{name}.weak_pulse"), format!("witness n={n}"));
                r.code = EXIT_WITNESS;
            }
        }
        let strong = match check_strong_pulse(&a, session.horizon, session.budget) {
            Ok(v) => v,
            Err(e) => return fail("check", args.machine, e.to_string(), exit_code_automata(&e)),
        };
        match &strong {
            PulseVerdict::Ok => {
                r.line("  strong-pulse: ok");
                r.kv(&format!("{name}.strong_pulse"), "ok");
            }
            PulseVerdict::Witness { n, .. } => {
                // Informative only: many useful automata are weakly but
                // not strongly pulse-driven.
                r.line(format!("  strong-pulse: witness at n={n}"));
                r.kv(&format!("{name}.strong_pulse"), format!("witness n={n}"));
            }
        }
    }
    r.finish(args.machine)
}

fn cmd_compose(args: &CommonArgs) -> Outcome {
    let (desc, session) = match load(args) {
        Ok(v) => v,
        Err((msg, code)) => return fail("compose", args.machine, msg, code),
    };
    let mut r = Report::new("compose");
    match desc.elaborate(&session) {
        Ok(elab) => {
            let a = &elab.automaton;
            r.line(format!("product: {}", signature_line(a)));
            r.line(format!("states: {}", a.states.len()));
            for note in &elab.notes {
                r.line(format!("schedule: {note}"));
                r.kv("schedule", note);
            }
            r.kv("inputs", &a.signature.inputs);
            r.kv("outputs", &a.signature.outputs);
            r.kv("hidden", &a.signature.hidden);
            r.kv("states", a.states.len());
        }
        Err(e) => {
            let code = exit_code_net(&e);
            if code == EXIT_WITNESS {
                r.line(format!("EMPTY-COMPOSITION: {e}"));
                r.kv("witness", e.to_string());
                r.code = EXIT_WITNESS;
            } else {
                return fail("compose", args.machine, e.to_string(), code);
            }
        }
    }
    r.finish(args.machine)
}

fn cmd_run(args: &CommonArgs) -> Outcome {
    let (desc, session) = match load(args) {
        Ok(v) => v,
        Err((msg, code)) => return fail("run", args.machine, msg, code),
    };
    let elab = match desc.elaborate(&session) {
        Ok(e) => e,
        Err(e) => return fail("run", args.machine, e.to_string(), exit_code_net(&e)),
    };
    let a = &elab.automaton;
    let script = match desc.input_history(&a.signature.inputs) {
        Ok(Some(h)) => h,
        Ok(None) => {
            return fail(
                "run",
                args.machine,
                "`run` needs an `input { ... }` script".into(),
                EXIT_USAGE,
            )
        }
        Err(e) => return fail("run", args.machine, e.to_string(), exit_code_net(&e)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(session.seed);
    let mut state = a.start.clone();
    let mut trace = History::empty(a.signature.channels());
    for t in 0..script.len() {
        let input = script.tick(t);
        let steps = match a.step(&state, input) {
            Ok(s) => s,
            Err(e) => return fail("run", args.machine, e.to_string(), exit_code_automata(&e)),
        };
        if steps.is_empty() {
            let mut r = Report::new("run");
            r.line(trace.to_string());
            r.line(format!("STUCK at t={t} state={state} input={input}"));
            r.kv("stuck_tick", t);
            r.kv("stuck_state", &state);
            r.code = EXIT_WITNESS;
            return r.finish(args.machine);
        }
        let (action, target) = steps[rng.gen_range(0..steps.len())].clone();
        trace.push(action).expect("step actions share the domain C");
        state = target;
    }
    let mut r = Report::new("run");
    r.line(trace.to_string());
    r.kv("trace", trace.to_string());
    r.kv("final_state", &state);
    r.finish(args.machine)
}

fn cmd_behaviors(args: &CommonArgs) -> Outcome {
    let (desc, session) = match load(args) {
        Ok(v) => v,
        Err((msg, code)) => return fail("behaviors", args.machine, msg, code),
    };
    let elab = match desc.elaborate(&session) {
        Ok(e) => e,
        Err(e) => return fail("behaviors", args.machine, e.to_string(), exit_code_net(&e)),
    };
    let set = match behaviors(&elab.automaton, session.horizon, session.budget) {
        Ok(s) => s,
        Err(e) => {
            return fail(
                "behaviors",
                args.machine,
                e.to_string(),
                exit_code_automata(&e),
            )
        }
    };
    let mut r = Report::new("behaviors");
    r.line(format!("behaviors: {}", set.len()));
    r.kv("count", set.len());
    for (k, b) in set.iter().enumerate() {
        r.line(format!("-- behavior {k}"));
        let rendered = b.to_string();
        if !rendered.is_empty() {
            r.human.push_str(&rendered);
            if !rendered.ends_with('\n') {
                r.human.push('\n');
            }
        }
        r.kv(&format!("behavior.{k}"), rendered);
    }
    r.finish(args.machine)
}

fn cmd_equiv(args: &CommonArgs) -> Outcome {
    let (desc, session) = match load(args) {
        Ok(v) => v,
        Err((msg, code)) => return fail("equiv", args.machine, msg, code),
    };
    // The comparison needs the two sides of one composition node.
    let Some((_, NetExpr::Compose(lhs, rhs))) = &desc.net else {
        return fail(
            "equiv",
            args.machine,
            "`equiv` needs `net N = A (x) B;` with exactly one composition".into(),
            EXIT_USAGE,
        );
    };
    let (NetExpr::Ref(n1), NetExpr::Ref(n2)) = (lhs.as_ref(), rhs.as_ref()) else {
        return fail(
            "equiv",
            args.machine,
            "`equiv` compares two named automata, not nested expressions".into(),
            EXIT_USAGE,
        );
    };
    let a1 = match desc.automaton(n1, &session) {
        Ok(a) => a,
        Err(e) => return fail("equiv", args.machine, e.to_string(), exit_code_net(&e)),
    };
    let a2 = match desc.automaton(n2, &session) {
        Ok(a) => a,
        Err(e) => return fail("equiv", args.machine, e.to_string(), exit_code_net(&e)),
    };
    let ccfg = ComposeConfig {
        budget: session.budget,
        joint_bound: session.joint_bound,
        ..ComposeConfig::default()
    };
    let rcfg = ResolverConfig {
        seed: session.seed,
        ..ResolverConfig::default()
    };
    let mut r = Report::new("equiv");
    match check_equivalence(&a1, &a2, session.horizon, &ccfg, &rcfg) {
        Ok(EquivOutcome::Equivalent { exhaustive }) => {
            if exhaustive {
                r.line(format!("EQUIVALENT at horizon {}", session.horizon));
                r.kv("verdict", "equivalent");
            } else {
                r.line(format!(
                    "NO COUNTEREXAMPLE at horizon {} (sampled resolvers)",
                    session.horizon
                ));
                r.kv("verdict", "no-counterexample");
            }
        }
        Ok(EquivOutcome::Counterexample {
            input,
            automaton_side,
            component_side,
        }) => {
            r.line("COUNTEREXAMPLE input:");
            r.line(input.to_string());
            r.line(format!(
                "automaton-side outputs: {} / component-side outputs: {}",
                automaton_side.len(),
                component_side.len()
            ));
            for h in automaton_side.symmetric_difference(&component_side) {
                r.line("-- differs");
                r.line(h.to_string());
            }
            r.kv("verdict", "counterexample");
            r.kv("input", input.to_string());
            r.code = EXIT_WITNESS;
        }
        Err(e) => return fail("equiv", args.machine, e.to_string(), exit_code_denot(&e)),
    }
    r.finish(args.machine)
}

/// Parses the canonical trace format: one `t=<k>` line per tick with
/// `name:<m1,m2>` entries.
pub fn parse_trace(text: &str) -> Result<History, String> {
    let mut ticks: Vec<Vec<(String, Vec<String>)>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap();
        let idx: usize = head
            .strip_prefix("t=")
            .and_then(|s| s.parse().ok())
            .ok_or(format!("line {}: expected `t=<k>`", lineno + 1))?;
        if idx != ticks.len() {
            return Err(format!(
                "line {}: ticks must be consecutive, expected t={}",
                lineno + 1,
                ticks.len()
            ));
        }
        let mut entries = Vec::new();
        for part in parts {
            let (name, rest) = part
                .split_once(":<")
                .ok_or(format!("line {}: malformed entry `{part}`", lineno + 1))?;
            let body = rest
                .strip_suffix('>')
                .ok_or(format!("line {}: malformed entry `{part}`", lineno + 1))?;
            let seq: Vec<String> = if body.is_empty() {
                Vec::new()
            } else {
                body.split(',').map(str::to_string).collect()
            };
            entries.push((name.to_string(), seq));
        }
        ticks.push(entries);
    }
    let domain: ChannelSet = {
        let names: std::collections::BTreeSet<&str> = ticks
            .iter()
            .flat_map(|t| t.iter().map(|(n, _)| n.as_str()))
            .collect();
        ChannelSet::of(&names.into_iter().collect::<Vec<_>>())
    };
    let mut h = History::empty(domain.clone());
    for entries in &ticks {
        let mut s = Slice::empty(&domain);
        for (c, seq) in entries {
            s.set(chan(c), seq.iter().map(|m| msg(m)).collect());
        }
        h.push(s).map_err(|e| e.to_string())?;
    }
    Ok(h)
}

fn cmd_dist(machine: bool, first: &PathBuf, second: &PathBuf) -> Outcome {
    let mut traces = Vec::new();
    for path in [first, second] {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                return fail(
                    "dist",
                    machine,
                    format!("cannot read {}: {e}", path.display()),
                    EXIT_USAGE,
                )
            }
        };
        match parse_trace(&text) {
            Ok(h) => traces.push(h),
            Err(e) => return fail("dist", machine, e, EXIT_USAGE),
        }
    }
    let (mut a, mut b) = (traces.remove(0), traces.remove(0));
    // Align domains: a channel absent from one file reads as silent.
    let domain = a.domain().union(b.domain());
    if *a.domain() != domain {
        a = pad_domain(&a, &domain);
    }
    if *b.domain() != domain {
        b = pad_domain(&b, &domain);
    }
    match baire_distance(&a, &b) {
        Ok(d) => {
            let mut r = Report::new("dist");
            r.line(format!("distance: {d}"));
            r.kv("distance", d);
            r.finish(machine)
        }
        Err(e) => fail("dist", machine, e.to_string(), EXIT_USAGE),
    }
}

fn pad_domain(h: &History, domain: &ChannelSet) -> History {
    let mut out = History::empty(domain.clone());
    for t in 0..h.len() {
        let mut s = Slice::empty(domain);
        for c in h.domain().iter() {
            s.set(c.clone(), h.tick(t).seq(c).to_vec());
        }
        out.push(s).expect("padded slices share the domain");
    }
    out
}

/// Runs one parsed command to completion. The caller prints `stdout`
/// and exits with `code`.
pub fn execute(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Compose(args) => cmd_compose(args),
        Command::Run(args) => cmd_run(args),
        Command::Behaviors(args) => cmd_behaviors(args),
        Command::Equiv(args) => cmd_equiv(args),
        Command::Dist {
            machine,
            first,
            second,
        } => cmd_dist(*machine, first, second),
    }
}
