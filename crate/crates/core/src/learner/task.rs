use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::dominance::{Example, Label, PartialInterpretation, Weight};
use crate::program::{parse_atom, parse_program, GroundAtom, Program};
use crate::{Error, Result};

use super::space::{HypothesisSpace, ModeDecl, Scoring};

/// Background, examples and mode bias of a constraint learning task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearningTask {
    pub background: Program,
    pub abk: Program,
    pub examples: Vec<Example>,
    pub space: HypothesisSpace,
    pub scoring: Scoring,
}

impl LearningTask {
    pub fn new(background: Program, examples: Vec<Example>, space: HypothesisSpace) -> Self {
        LearningTask {
            background,
            abk: Program::new(),
            examples,
            space,
            scoring: Scoring::literals(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for e in &self.examples {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::Config(format!("duplicate example id {}", e.id)));
            }
        }
        if self.space.max_body == 0 || self.space.max_vars == 0 {
            return Err(Error::Config("max_body and max_vars must be at least 1".into()));
        }
        Ok(())
    }
}

fn atom_list(atoms: &BTreeSet<GroundAtom>) -> String {
    atoms.iter().rev().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
}

/// Context program on one line: `pigeon(3). hole(3).`
pub fn render_context(p: &Program) -> String {
    p.to_string().lines().collect::<Vec<_>>().join(" ")
}

/// One `#pos`/`#neg` line; atom lists in descending rank order.
pub fn render_example(e: &Example) -> String {
    let kind = match e.label {
        Label::Positive => "pos",
        Label::Negative => "neg",
    };
    let weight = match e.weight {
        Weight::Finite(w) => format!("@{w}"),
        Weight::Infinite => String::new(),
    };
    format!(
        "#{kind}({}{weight}, {{{}}}, {{{}}}, {{{}}}).",
        e.id,
        atom_list(&e.pi.inclusions),
        atom_list(&e.pi.exclusions),
        render_context(&e.context)
    )
}

/// Render a task in the ILASP input format. The output depends only on the
/// task, so emitting twice gives identical bytes.
pub fn emit_ilasp_task(task: &LearningTask) -> String {
    let mut out = String::new();
    out.push_str(&task.background.to_string());
    if !task.abk.is_empty() {
        out.push('\n');
        out.push_str(&task.abk.to_string());
    }
    if !task.examples.is_empty() {
        out.push('\n');
        for e in &task.examples {
            let _ = writeln!(out, "{}", render_example(e));
        }
    }
    if !task.space.modes.is_empty() {
        out.push('\n');
        for m in &task.space.modes {
            let _ = writeln!(out, "{m}");
        }
    }
    out
}

fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let before = &src[..pos];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Split on commas outside any brackets.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in s.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out
}

fn strip(s: &str, open: char, close: char) -> Option<&str> {
    s.trim().strip_prefix(open)?.strip_suffix(close)
}

fn parse_mode(args: &str) -> std::result::Result<ModeDecl, String> {
    let parts = split_top(args);
    let (recall, rest) = match parts.first().and_then(|p| p.parse::<u32>().ok()) {
        Some(r) => (r, &parts[1..]),
        None => (u32::MAX, &parts[..]),
    };
    if recall == 0 {
        return Err("recall must be at least 1".into());
    }
    let schema = rest.first().ok_or("missing mode schema")?;
    let (predicate, arg_types) = match schema.find('(') {
        None => (schema.to_string(), Vec::new()),
        Some(i) => {
            let inner = strip(&schema[i..], '(', ')').ok_or("malformed schema")?;
            let types = split_top(inner)
                .into_iter()
                .map(|a| strip(a.strip_prefix("var").ok_or("only var(type) placeholders are supported")?, '(', ')').map(|t| t.trim().to_string()).ok_or("malformed placeholder"))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (schema[..i].trim().to_string(), types)
        }
    };
    let mut anti_reflexive = false;
    if let Some(opts) = rest.get(1) {
        let inner = strip(opts, '(', ')').ok_or("malformed mode options")?;
        for o in split_top(inner) {
            match o {
                "anti_reflexive" => anti_reflexive = true,
                "positive" => {}
                other => return Err(format!("unsupported mode option {other}")),
            }
        }
    }
    Ok(ModeDecl {
        recall,
        predicate,
        arg_types,
        anti_reflexive,
    })
}

fn parse_atom_set(s: &str) -> Result<BTreeSet<GroundAtom>> {
    let inner = strip(s, '{', '}').ok_or_else(|| Error::Config(format!("expected an atom set, found {s}")))?;
    split_top(inner).into_iter().filter(|a| !a.is_empty()).map(parse_atom).collect()
}

fn parse_example(label: Label, args: &str) -> Result<Example> {
    let parts = split_top(args);
    if !(3..=4).contains(&parts.len()) {
        return Err(Error::Config(format!("example needs 3 or 4 arguments: {args}")));
    }
    let (id, weight) = match parts[0].split_once('@') {
        Some((id, w)) => {
            let w = w.trim().parse().map_err(|_| Error::Config(format!("bad example weight {w}")))?;
            (id.trim().to_string(), Weight::Finite(w))
        }
        None => (parts[0].to_string(), Weight::Infinite),
    };
    let context = match parts.get(3) {
        Some(c) => parse_program(strip(c, '{', '}').ok_or_else(|| Error::Config(format!("bad context {c}")))?)?,
        None => Program::new(),
    };
    Ok(Example {
        id,
        label,
        weight,
        pi: PartialInterpretation {
            inclusions: parse_atom_set(parts[1])?,
            exclusions: parse_atom_set(parts[2])?,
        },
        context,
    })
}

/// Parse `#modeb` declarations (other text is ignored).
pub fn parse_modes(src: &str) -> Result<Vec<ModeDecl>> {
    Ok(parse_las(src)?.space.modes)
}

/// Parse an ILASP-style task: background rules, `#pos`, `#neg`, `#modeb`
/// and `#maxv` statements.
pub fn parse_las(src: &str) -> Result<LearningTask> {
    let mut background = String::new();
    let mut examples = Vec::new();
    let mut space = HypothesisSpace::new(Vec::new());
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut bg_start = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'#' => {
                background.push_str(&src[bg_start..i]);
                let start = i;
                let open = src[i..].find('(').map(|k| i + k);
                let Some(open) = open else {
                    let (l, c) = line_col(src, start);
                    return Err(Error::syntax(l, c, "directive without arguments"));
                };
                let name = src[i + 1..open].trim();
                let mut depth = 0i32;
                let mut close = None;
                for (k, ch) in src[open..].char_indices() {
                    match ch {
                        '(' | '{' => depth += 1,
                        ')' | '}' => {
                            depth -= 1;
                            if depth == 0 {
                                close = Some(open + k);
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                let (l, c) = line_col(src, start);
                let close = close.ok_or_else(|| Error::syntax(l, c, "unbalanced parentheses"))?;
                let args = &src[open + 1..close];
                let after = src[close + 1..].trim_start();
                if !after.starts_with('.') {
                    return Err(Error::syntax(l, c, format!("#{name} must end with `.`")));
                }
                match name {
                    "modeb" => space.modes.push(parse_mode(args).map_err(|m| Error::syntax(l, c, m))?),
                    "pos" => examples.push(parse_example(Label::Positive, args)?),
                    "neg" => examples.push(parse_example(Label::Negative, args)?),
                    "maxv" => {
                        space.max_vars = args.trim().parse().map_err(|_| Error::syntax(l, c, "bad #maxv"))?;
                    }
                    other => return Err(Error::syntax(l, c, format!("unsupported directive #{other}"))),
                }
                i = src.len() - after.len() + 1;
                bg_start = i;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    background.push_str(&src[bg_start..]);
    let task = LearningTask {
        background: parse_program(&background)?,
        abk: Program::new(),
        examples,
        space,
        scoring: Scoring::literals(),
    };
    task.validate()?;
    Ok(task)
}

impl std::fmt::Display for LearningTask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&emit_ilasp_task(self))
    }
}
