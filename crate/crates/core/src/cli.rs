//! The `regioncalc` command line.
//!
//! Exit codes: 0 success, 1 type rejection, 2 property violation,
//! 3 usage or IO error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::analysis::{check_diamond, explore, with_workers, Bounds};
use crate::semantics::{canonicalize, classify_stuck, run_with, RunStatus, ThreadClass};
use crate::syntax::{parse_unit, SourceUnit};
use crate::translate::{check_preservation, check_simulation, print_iterm, print_iterm_plain, translate};
use crate::typecheck::{check_unit, CheckMode, Judgement};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "regioncalc", version, about = "Checker and evaluator for an affine calculus with regions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Type-check a unit.
    Check(Common),
    /// Run a unit, printing one line per step.
    Eval(Common),
    /// Explore every interleaving.
    Explore(Common),
    /// Check the one-step diamond and uniqueness of normal forms.
    Diamond(Common),
    /// Check that the translated program simulates every step.
    Simulate(Common),
    /// Print the translated program.
    Translate(Common),
    /// Run to a stuck state and classify its threads.
    Stuck(Common),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Source unit (`.rgc`).
    pub input: PathBuf,
    /// plain, confluent, effects, stratified or stratified-confluent.
    #[arg(long)]
    pub mode: Option<CheckMode>,
    /// Most reduction steps taken by eval and stuck.
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    /// Deepest path followed when exploring interleavings.
    #[arg(long, default_value_t = 10_000)]
    pub depth: usize,
    /// Most distinct states kept when exploring interleavings.
    #[arg(long, default_value_t = 100_000)]
    pub width: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Skip type checking (for negative controls).
    #[arg(long)]
    pub bypass_typing: bool,
    /// Pick redexes at random with this seed instead of leftmost first.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also print the translated program.
    #[arg(long)]
    pub emit_intuitionistic: bool,
}

impl Common {
    fn bounds(&self) -> Bounds {
        Bounds { depth: self.depth, width: self.width }
    }

    fn json(&self) -> bool {
        self.format == Format::Json
    }
}

/// Output sink plus the chosen format.
struct Out<'a> {
    w: &'a mut dyn Write,
    json: bool,
}

impl Out<'_> {
    fn line(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.w, "{}", s.as_ref());
    }

    fn value(&mut self, v: serde_json::Value) {
        self.line(v.to_string());
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    with_workers(move || dispatch(cli, out, err))
}

fn dispatch(cli: Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32 {
    let (cmd, c) = match &cli.command {
        Command::Check(c) => ("check", c),
        Command::Eval(c) => ("eval", c),
        Command::Explore(c) => ("explore", c),
        Command::Diamond(c) => ("diamond", c),
        Command::Simulate(c) => ("simulate", c),
        Command::Translate(c) => ("translate", c),
        Command::Stuck(c) => ("stuck", c),
    };
    let unit = match load(&c.input) {
        Ok(u) => u,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut o = Out { w: out, json: c.json() };
    match cmd {
        "check" => check(&unit, c, &mut o),
        "eval" => eval(&unit, c, &mut o, err),
        "explore" => explore_cmd(&unit, c, &mut o, err),
        "diamond" => diamond(&unit, c, &mut o, err),
        "simulate" => simulate(&unit, c, &mut o, err),
        "translate" => translate_cmd(&unit, c, &mut o, err),
        _ => stuck(&unit, c, &mut o, err),
    }
}

fn load(path: &PathBuf) -> Result<SourceUnit, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_unit(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn reject(o: &mut Out, mode: CheckMode, e: &crate::typecheck::TypeError) -> i32 {
    if o.json {
        o.value(json!({"accepted": false, "mode": mode.name(), "error": e.to_json()}));
    } else {
        o.line(format!("rejected ({mode}): {e}"));
    }
    EXIT_REJECTED
}

/// Type-checks unless bypassed; `Err` carries the exit code.
fn gate(u: &SourceUnit, mode: CheckMode, c: &Common, o: &mut Out) -> Result<Option<Judgement>, i32> {
    if c.bypass_typing {
        return Ok(None);
    }
    match check_unit(u, mode) {
        Ok(j) => Ok(Some(j)),
        Err(e) => Err(reject(o, mode, &e)),
    }
}

fn check(u: &SourceUnit, c: &Common, o: &mut Out) -> i32 {
    let mode = c.mode.unwrap_or(CheckMode::Effects);
    let j = match check_unit(u, mode) {
        Ok(j) => j,
        Err(e) => return reject(o, mode, &e),
    };
    let tr = if c.emit_intuitionistic { translate(u, &j).ok() } else { None };
    if o.json {
        let mut v = json!({
            "accepted": true,
            "mode": mode.name(),
            "type": j.ty.to_string(),
            "effect": j.effect.to_string(),
            "derivation": j.derivation.to_json(&u.main),
        });
        if let Some(tr) = &tr {
            v["intuitionistic"] = json!(print_iterm(&tr.term));
        }
        o.value(v);
    } else {
        o.line(format!("accepted ({mode}): {}", j.ty));
        o.line(format!("effect: {}", j.effect));
        if let Some(tr) = &tr {
            o.line(format!("intuitionistic: {}", print_iterm(&tr.term)));
        }
    }
    EXIT_OK
}

fn eval(u: &SourceUnit, c: &Common, o: &mut Out, err: &mut dyn Write) -> i32 {
    let mode = c.mode.unwrap_or(CheckMode::Effects);
    if let Err(code) = gate(u, mode, c, o) {
        return code;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed.unwrap_or(0));
    let random = c.seed.is_some();
    let mut lines = Vec::new();
    let json = o.json;
    let outcome = run_with(
        &canonicalize(&u.main),
        c.budget,
        |rs| if random { rng.gen_range(0..rs.len()) } else { 0 },
        |s| {
            lines.push(if json {
                serde_json::to_string(s).unwrap_or_default()
            } else {
                format!("{:>5}  {:<13} thread {}  {:<11} {}", s.step, s.rule, s.thread, s.redex_kind, s.program)
            })
        },
    );
    for l in lines {
        o.line(l);
    }
    let outcome = match outcome {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "runtime error: {e}");
            return EXIT_VIOLATION;
        }
    };
    let status = match outcome.status {
        RunStatus::Terminated => "Terminated",
        RunStatus::BudgetExceeded => "BudgetExceeded",
    };
    if o.json {
        o.value(json!({"status": status, "steps": outcome.steps, "final": outcome.last.print()}));
    } else {
        o.line(format!("{status} after {} steps: {}", outcome.steps, outcome.last.print()));
    }
    match outcome.status {
        RunStatus::Terminated => EXIT_OK,
        RunStatus::BudgetExceeded => EXIT_VIOLATION,
    }
}

fn explore_cmd(u: &SourceUnit, c: &Common, o: &mut Out, err: &mut dyn Write) -> i32 {
    let mode = c.mode.unwrap_or(CheckMode::Effects);
    if let Err(code) = gate(u, mode, c, o) {
        return code;
    }
    let r = explore(&canonicalize(&u.main), c.bounds(), false);
    if o.json {
        o.value(r.to_json());
    } else {
        o.line(format!("states: {}", r.states.len()));
        o.line(format!("edges: {}", r.edges.len()));
        o.line(format!("normal forms: {}", r.normal_forms.len()));
        for &i in &r.normal_forms {
            o.line(format!("  {}", r.states[i].print()));
        }
        o.line(format!("divergent: {}", r.divergent));
        if let Some(n) = r.longest_path {
            o.line(format!("longest path: {n}"));
        }
        if r.truncated {
            o.line("truncated: true");
        }
    }
    for e in &r.errors {
        let _ = writeln!(err, "runtime error: {e}");
    }
    if r.errors.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn diamond(u: &SourceUnit, c: &Common, o: &mut Out, err: &mut dyn Write) -> i32 {
    let mode = c.mode.unwrap_or(CheckMode::Confluent);
    if !mode.confluent() && !c.bypass_typing {
        let _ = writeln!(err, "error: diamond needs a confluent mode, got {mode}");
        return EXIT_USAGE;
    }
    if let Err(code) = gate(u, mode, c, o) {
        return code;
    }
    let r = check_diamond(&canonicalize(&u.main), c.bounds());
    let ok = r.violations.is_empty() && r.normal_forms.len() <= 1 && r.errors.is_empty();
    if o.json {
        let mut v = r.to_json();
        v["holds"] = json!(ok);
        o.value(v);
    } else {
        o.line(format!("states: {}", r.states.len()));
        o.line(format!("normal forms: {}", r.normal_forms.len()));
        for &i in &r.normal_forms {
            o.line(format!("  {}", r.states[i].print()));
        }
        o.line(format!("diamond violations: {}", r.violations.len()));
        for v in &r.violations {
            o.line(format!("  {} : {} vs {}", v.state, v.left, v.right));
        }
    }
    for e in &r.errors {
        let _ = writeln!(err, "runtime error: {e}");
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn simulate(u: &SourceUnit, c: &Common, o: &mut Out, err: &mut dyn Write) -> i32 {
    let mode = c.mode.unwrap_or(CheckMode::Effects);
    if !matches!(mode, CheckMode::Effects | CheckMode::StratifiedEffects) {
        let _ = writeln!(err, "error: simulate needs mode effects or stratified, got {mode}");
        return EXIT_USAGE;
    }
    if let Err(code) = gate(u, mode, c, o) {
        return code;
    }
    let r = check_simulation(u, mode, c.bounds());
    let ok = r.holds() && r.ambiguous == 0;
    if o.json {
        let mut v = serde_json::to_value(&r).unwrap_or_default();
        v["holds"] = json!(ok);
        o.value(v);
    } else {
        o.line(format!("pairs: {}", r.pairs));
        o.line(format!("matched steps: {}", r.steps));
        o.line(format!("max surplus stores: {}", r.max_surplus));
        o.line(format!("holds: {ok}"));
        for f in &r.failures {
            o.line(format!("  {f}"));
        }
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn translate_cmd(u: &SourceUnit, c: &Common, o: &mut Out, err: &mut dyn Write) -> i32 {
    let mode = c.mode.unwrap_or(CheckMode::Effects);
    let j = match check_unit(u, mode) {
        Ok(j) => j,
        Err(e) => return reject(o, mode, &e),
    };
    let tr = match translate(u, &j) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_VIOLATION;
        }
    };
    let preserved = if mode.effects() {
        Some(check_preservation(u, &j, mode.formation()))
    } else {
        None
    };
    if o.json {
        o.value(json!({
            "term": print_iterm(&tr.term),
            "plain": print_iterm_plain(&tr.term),
            "type": tr.ty.to_string(),
            "effect": tr.effect.to_string(),
            "checks": preserved.as_ref().map(|p| p.is_ok()),
        }));
    } else {
        o.line(print_iterm(&tr.term));
        if let Some(p) = &preserved {
            match p {
                Ok(_) => o.line(format!("checks at {} with effect {}", tr.ty, tr.effect)),
                Err(e) => o.line(format!("does not check: {e}")),
            }
        }
    }
    match preserved {
        Some(Err(_)) => EXIT_VIOLATION,
        _ => EXIT_OK,
    }
}

fn stuck(u: &SourceUnit, c: &Common, o: &mut Out, err: &mut dyn Write) -> i32 {
    let mode = c.mode.unwrap_or(CheckMode::Effects);
    if let Err(code) = gate(u, mode, c, o) {
        return code;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed.unwrap_or(0));
    let random = c.seed.is_some();
    let outcome = match run_with(
        &canonicalize(&u.main),
        c.budget,
        |rs| if random { rng.gen_range(0..rs.len()) } else { 0 },
        |_| {},
    ) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "runtime error: {e}");
            return EXIT_VIOLATION;
        }
    };
    if outcome.status == RunStatus::BudgetExceeded {
        let _ = writeln!(err, "budget of {} steps exceeded", c.budget);
        return EXIT_VIOLATION;
    }
    let classes = classify_stuck(&outcome.last);
    let anomaly = classes.contains(&ThreadClass::Anomaly);
    if o.json {
        o.value(json!({
            "program": outcome.last.print(),
            "threads": classes.iter().zip(&outcome.last.threads).map(|(k, t)| json!({
                "thread": t.to_string(),
                "class": match k {
                    ThreadClass::Value => "Value".to_string(),
                    ThreadClass::BlockedGet(_) => "BlockedGet".to_string(),
                    ThreadClass::Anomaly => "Anomaly".to_string(),
                },
                "address": match k { ThreadClass::BlockedGet(x) => Some(x.to_string()), _ => None },
            })).collect::<Vec<_>>(),
        }));
    } else {
        o.line(outcome.last.print());
        for (k, t) in classes.iter().zip(&outcome.last.threads) {
            let label = match k {
                ThreadClass::Value => "Value".to_string(),
                ThreadClass::BlockedGet(x) => format!("BlockedGet({x})"),
                ThreadClass::Anomaly => "Anomaly".to_string(),
            };
            o.line(format!("  {label}: {t}"));
        }
    }
    if anomaly {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}
