use std::collections::HashMap;

use thiserror::Error;

use super::spec::{pack_key, MachineSpec, SpecError, StateId, Transition};
use super::{Move, OutputAction, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("missing `{0}` declaration")]
    Missing(&'static str),
    #[error("`{0}` declared twice")]
    Duplicate(&'static str),
    #[error("declaration after the first transition")]
    DeclarationAfterTransitions,
    #[error("determinism violation: state `{state}` already has a transition on `{symbols}`")]
    Nondeterministic { state: String, symbols: String },
    #[error("reference to undeclared state `{0}`")]
    UndeclaredState(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

struct RawTransition {
    line: usize,
    state: String,
    reads: Vec<Symbol>,
    next: String,
    writes: Vec<Symbol>,
    moves: Vec<Move>,
    output: OutputAction,
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, kind: ParseErrorKind::Syntax(msg.into()) }
}

fn list<T>(line: usize, text: &str, what: &str, f: impl Fn(char) -> Option<T>) -> Result<Vec<T>, ParseError> {
    text.split(',')
        .map(|item| {
            let mut chars = item.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => f(c).ok_or_else(|| syntax(line, format!("bad {what} `{item}`"))),
                _ => Err(syntax(line, format!("bad {what} `{item}`"))),
            }
        })
        .collect()
}

/// Parses the machine-file format.
///
/// A state counts as declared when it is the start state, a halting state, or
/// the source of at least one transition. Transition targets must be declared.
pub fn parse_machine(text: &str) -> Result<MachineSpec, ParseError> {
    let mut name: Option<String> = None;
    let mut tapes: Option<usize> = None;
    let mut start: Option<(usize, String)> = None;
    let mut halts: Option<Vec<String>> = None;
    let mut raw: Vec<RawTransition> = Vec::new();

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split(';').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        let is_transition = words.len() == 7 && words[2] == "->";
        if !is_transition && matches!(words[0], "machine" | "tapes" | "start" | "halt") {
            if !raw.is_empty() {
                return Err(ParseError { line, kind: ParseErrorKind::DeclarationAfterTransitions });
            }
            let dup = |what| ParseError { line, kind: ParseErrorKind::Duplicate(what) };
            match words[0] {
                "machine" => {
                    if words.len() != 2 {
                        return Err(syntax(line, "expected `machine <name>`"));
                    }
                    if name.replace(words[1].to_string()).is_some() {
                        return Err(dup("machine"));
                    }
                }
                "tapes" => {
                    let k = match words.as_slice() {
                        [_, k] => k.parse::<usize>().map_err(|_| syntax(line, format!("bad tape count `{k}`")))?,
                        _ => return Err(syntax(line, "expected `tapes <k>`")),
                    };
                    if tapes.replace(k).is_some() {
                        return Err(dup("tapes"));
                    }
                }
                "start" => {
                    if words.len() != 2 {
                        return Err(syntax(line, "expected `start <state>`"));
                    }
                    if start.replace((line, words[1].to_string())).is_some() {
                        return Err(dup("start"));
                    }
                }
                _ => {
                    if words.len() < 2 {
                        return Err(syntax(line, "expected `halt <state> ...`"));
                    }
                    if halts.replace(words[1..].iter().map(|s| s.to_string()).collect()).is_some() {
                        return Err(dup("halt"));
                    }
                }
            }
            continue;
        }
        // <state> <reads> -> <next> <writes> <moves> <out>
        if words.len() != 7 || words[2] != "->" {
            return Err(syntax(line, "expected `<state> <reads> -> <state> <writes> <moves> <out>`"));
        }
        let output = {
            let mut chars = words[6].chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => OutputAction::from_char(c),
                _ => None,
            }
            .ok_or_else(|| syntax(line, format!("bad output action `{}`", words[6])))?
        };
        raw.push(RawTransition {
            line,
            state: words[0].to_string(),
            reads: list(line, words[1], "symbol", Symbol::from_char)?,
            next: words[3].to_string(),
            writes: list(line, words[4], "symbol", Symbol::from_char)?,
            moves: list(line, words[5], "move", Move::from_char)?,
            output,
        });
    }

    let last = text.lines().count().max(1);
    let missing = |what| ParseError { line: last, kind: ParseErrorKind::Missing(what) };
    let name = name.ok_or_else(|| missing("machine"))?;
    let tapes = tapes.ok_or_else(|| missing("tapes"))?;
    let (start_line, start) = start.ok_or_else(|| missing("start"))?;
    let halts = halts.ok_or_else(|| missing("halt"))?;

    let mut ids: HashMap<String, StateId> = HashMap::new();
    let mut states: Vec<String> = Vec::new();
    let mut intern = |s: &str| -> StateId {
        if let Some(&id) = ids.get(s) {
            return id;
        }
        let id = states.len() as StateId;
        states.push(s.to_string());
        ids.insert(s.to_string(), id);
        id
    };
    let start_id = intern(&start);
    let halt_ids: Vec<StateId> = halts.iter().map(|h| intern(h)).collect();
    for t in &raw {
        intern(&t.state);
    }
    let declared = ids.clone();

    let mut seen: HashMap<(StateId, u32), usize> = HashMap::new();
    let mut transitions = Vec::with_capacity(raw.len());
    for t in raw {
        let state = declared[&t.state];
        let next = *declared
            .get(&t.next)
            .ok_or_else(|| ParseError { line: t.line, kind: ParseErrorKind::UndeclaredState(t.next.clone()) })?;
        if t.reads.len() != tapes + 1 || t.moves.len() != tapes + 1 || t.writes.len() != tapes {
            return Err(syntax(
                t.line,
                format!("expected {} reads, {} writes and {} moves", tapes + 1, tapes, tapes + 1),
            ));
        }
        if seen.insert((state, pack_key(&t.reads)), t.line).is_some() {
            return Err(ParseError {
                line: t.line,
                kind: ParseErrorKind::Nondeterministic {
                    state: t.state.clone(),
                    symbols: t.reads.iter().map(|s| s.to_char()).collect(),
                },
            });
        }
        transitions.push((state, t.reads, Transition { next, writes: t.writes, moves: t.moves, output: t.output }));
    }

    MachineSpec::new(name, tapes, states, start_id, &halt_ids, transitions)
        .map_err(|e| ParseError { line: start_line, kind: ParseErrorKind::Spec(e) })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EMIT_HASH_ONE: &str = "\
; emits #1 for any input whose first bit is 1
machine emit1
tapes 1
start q0
halt done
q0 1,_ -> q1 _ S,S #
q1 1,_ -> done _ S,S 1
";

    #[test]
    fn minimal_machine() {
        let spec = parse_machine(EMIT_HASH_ONE).unwrap();
        assert_eq!(spec.states().len(), 3);
        assert_eq!(spec.transition_count(), 2);
        assert_eq!(spec.work_tapes(), 1);
    }

    #[test]
    fn duplicate_key_is_a_determinism_error() {
        let text = format!("{EMIT_HASH_ONE}q0 1,_ -> done _ S,S 0\n");
        let err = parse_machine(&text).unwrap_err();
        assert_eq!(err.line, 8);
        assert!(matches!(err.kind, ParseErrorKind::Nondeterministic { .. }));
    }

    #[test]
    fn undeclared_target() {
        let text = EMIT_HASH_ONE.replace("-> done", "-> nowhere");
        let err = parse_machine(&text).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndeclaredState("nowhere".into()));
        assert_eq!(err.line, 7);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = EMIT_HASH_ONE.replace("q1 1,_ -> done _ S,S 1", "q1 1,_ -> done _ S,X 1");
        let err = parse_machine(&text).unwrap_err();
        assert_eq!(err.line, 7);
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn declarations_must_precede_transitions() {
        let text = format!("{EMIT_HASH_ONE}tapes 2\n");
        let err = parse_machine(&text).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DeclarationAfterTransitions);
    }

    #[test]
    fn missing_declaration() {
        let text = EMIT_HASH_ONE.replace("start q0\n", "");
        let err = parse_machine(&text).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Missing("start"));
    }

    #[test]
    fn declaration_order_is_free() {
        let text = "halt done\nstart q0\ntapes 1\nmachine m\nq0 1,_ -> done _ S,S #\n";
        assert!(parse_machine(text).is_ok());
    }

    #[test]
    fn display_roundtrips_through_the_parser() {
        let spec = parse_machine(EMIT_HASH_ONE).unwrap();
        let again = parse_machine(&spec.to_string()).unwrap();
        assert_eq!(spec.to_string(), again.to_string());
    }
}
