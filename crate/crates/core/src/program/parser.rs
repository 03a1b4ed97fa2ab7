use std::collections::HashMap;

use super::{ArithOp, Atom, Builtin, ChoiceElement, CmpOp, GroundAtom, Head, Program, Rule, Term, Value};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    If,
    Dot,
    Plus,
    Minus,
    Cmp(CmpOp),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! push {
        ($t:expr, $len:expr) => {{
            out.push(Token { tok: $t, line, col });
            i += $len;
            col += $len;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            ',' => push!(Tok::Comma, 1),
            ';' => push!(Tok::Semi, 1),
            '.' => push!(Tok::Dot, 1),
            '+' => push!(Tok::Plus, 1),
            '-' => push!(Tok::Minus, 1),
            ':' if chars.get(i + 1) == Some(&'-') => push!(Tok::If, 2),
            ':' => push!(Tok::Colon, 1),
            '<' if chars.get(i + 1) == Some(&'=') => push!(Tok::Cmp(CmpOp::Le), 2),
            '<' => push!(Tok::Cmp(CmpOp::Lt), 1),
            '>' if chars.get(i + 1) == Some(&'=') => push!(Tok::Cmp(CmpOp::Ge), 2),
            '>' => push!(Tok::Cmp(CmpOp::Gt), 1),
            '!' if chars.get(i + 1) == Some(&'=') => push!(Tok::Cmp(CmpOp::Ne), 2),
            '=' if chars.get(i + 1) == Some(&'=') => push!(Tok::Cmp(CmpOp::Eq), 2),
            '=' => push!(Tok::Cmp(CmpOp::Eq), 1),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text
                    .parse::<i64>()
                    .map_err(|_| Error::syntax(line, col, format!("integer out of range: {text}")))?;
                out.push(Token {
                    tok: Tok::Int(n),
                    line,
                    col,
                });
                col += i - start;
            }
            c if c == '_' || c.is_ascii_alphabetic() => {
                // gringo convention: leading underscores, then the case of the
                // first letter decides between identifier and variable.
                let start = i;
                while i < chars.len() && (chars[i] == '_' || chars[i].is_ascii_alphanumeric() || chars[i] == '\'') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let first = text.chars().find(|c| *c != '_');
                let tok = match first {
                    Some(f) if f.is_ascii_lowercase() => Tok::Ident(text.clone()),
                    Some(f) if f.is_ascii_uppercase() => Tok::Var(text.clone()),
                    _ => return Err(Error::syntax(line, col, "anonymous variables are not supported")),
                };
                out.push(Token { tok, line, col });
                col += i - start;
            }
            other => return Err(Error::syntax(line, col, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    arities: HashMap<String, usize>,
}

enum BodyLit {
    Pos(Atom),
    Neg(Atom),
    Builtin(Builtin),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::syntax(t.line, t.col, msg))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn program(&mut self) -> Result<Program> {
        let mut prog = Program::new();
        while *self.peek() != Tok::Eof {
            let start = self.toks[self.pos].clone();
            let rule = self.rule()?;
            self.check_arities(&rule)?;
            rule.check_safety()?;
            match rule.head {
                Some(Head::Atom(ref a)) if rule.has_empty_body() && a.is_ground() => {
                    prog.facts.push(eval_ground_atom(a).ok_or_else(|| {
                        Error::syntax(start.line, start.col, "arithmetic over a symbolic constant")
                    })?);
                }
                _ => prog.rules.push(rule),
            }
        }
        Ok(prog)
    }

    fn check_arities(&mut self, rule: &Rule) -> Result<()> {
        for a in rule.atoms() {
            match self.arities.get(&a.predicate) {
                Some(&n) if n != a.arity() => {
                    return Err(Error::ArityMismatch {
                        predicate: a.predicate.clone(),
                        first: n,
                        second: a.arity(),
                    });
                }
                Some(_) => {}
                None => {
                    self.arities.insert(a.predicate.clone(), a.arity());
                }
            }
        }
        Ok(())
    }

    fn rule(&mut self) -> Result<Rule> {
        let head = match self.peek() {
            Tok::If => None,
            Tok::LBrace => Some(self.choice()?),
            Tok::Ident(_) => Some(Head::Atom(self.atom()?)),
            other => return self.err(format!("expected rule head, found {other:?}")),
        };
        let mut rule = Rule {
            head,
            body_pos: Vec::new(),
            body_neg: Vec::new(),
            builtins: Vec::new(),
        };
        if *self.peek() == Tok::If {
            self.next();
            loop {
                match self.body_literal()? {
                    BodyLit::Pos(a) => rule.body_pos.push(a),
                    BodyLit::Neg(a) => rule.body_neg.push(a),
                    BodyLit::Builtin(b) => rule.builtins.push(b),
                }
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        } else if rule.head.is_none() {
            return self.err("expected `:-`");
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(rule)
    }

    fn choice(&mut self) -> Result<Head> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut elements = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let atom = self.atom()?;
                let mut condition = Vec::new();
                if *self.peek() == Tok::Colon {
                    self.next();
                    loop {
                        condition.push(self.atom()?);
                        if *self.peek() == Tok::Comma {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                elements.push(ChoiceElement { atom, condition });
                if *self.peek() == Tok::Semi {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        if *self.peek() != Tok::Cmp(CmpOp::Eq) {
            return self.err("choice rules need an exact bound `= n`");
        }
        self.next();
        let bound = match self.next().tok {
            Tok::Int(n) if n >= 0 => n as u32,
            _ => return self.err("expected a non-negative integer bound"),
        };
        Ok(Head::Choice { elements, bound })
    }

    fn body_literal(&mut self) -> Result<BodyLit> {
        if let Tok::Ident(name) = self.peek() {
            if name == "not" && matches!(self.peek_at(1), Tok::Ident(_)) {
                self.next();
                return Ok(BodyLit::Neg(self.atom()?));
            }
            // An identifier followed by a comparison is a symbolic term.
            if !matches!(self.peek_at(1), Tok::Cmp(_) | Tok::Plus | Tok::Minus) {
                return Ok(BodyLit::Pos(self.atom()?));
            }
        }
        let lhs = self.term()?;
        let op = match self.next().tok {
            Tok::Cmp(op) => op,
            other => return self.err(format!("expected comparison operator, found {other:?}")),
        };
        let rhs = self.term()?;
        Ok(BodyLit::Builtin(Builtin { lhs, op, rhs }))
    }

    fn atom(&mut self) -> Result<Atom> {
        let name = match self.next().tok {
            Tok::Ident(n) => n,
            other => return self.err(format!("expected predicate name, found {other:?}")),
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            loop {
                args.push(self.term()?);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(Atom { predicate: name, args })
    }

    fn term(&mut self) -> Result<Term> {
        let mut t = self.primary()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.primary()?;
            if matches!(t, Term::Sym(_)) || matches!(rhs, Term::Sym(_)) {
                return self.err("arithmetic over a symbolic constant");
            }
            t = Term::Arith(Box::new(t), op, Box::new(rhs));
        }
        Ok(t)
    }

    fn primary(&mut self) -> Result<Term> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok(Term::Int(n)),
            Tok::Minus => {
                let u = self.next();
                match u.tok {
                    Tok::Int(n) => Ok(Term::Int(-n)),
                    _ => Err(Error::syntax(u.line, u.col, "expected integer after unary minus")),
                }
            }
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::Ident(s) => Ok(Term::Sym(s)),
            other => Err(Error::syntax(t.line, t.col, format!("expected term, found {other:?}"))),
        }
    }
}

pub(crate) fn eval_ground_atom(a: &Atom) -> Option<GroundAtom> {
    let args = a
        .args
        .iter()
        .map(|t| super::ground::eval_term(t, &Default::default()))
        .collect::<Option<Vec<Value>>>()?;
    Some(GroundAtom::new(a.predicate.clone(), args))
}

/// Parse a program in the supported fragment. Ground facts are collected
/// separately from rules.
pub fn parse_program(src: &str) -> Result<Program> {
    let toks = lex(src)?;
    Parser {
        toks,
        pos: 0,
        arities: HashMap::new(),
    }
    .program()
}

/// Parse a single ground atom such as `p2h(3,1)`.
pub fn parse_atom(src: &str) -> Result<GroundAtom> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        arities: HashMap::new(),
    };
    let atom = p.atom()?;
    if *p.peek() != Tok::Eof {
        return p.err("trailing input after atom");
    }
    eval_ground_atom(&atom).ok_or_else(|| Error::syntax(1, 1, format!("atom `{atom}` is not ground")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::RuleKind;

    const PIGEON: &str = "
        pigeon(X-1) :- pigeon(X), X > 1.
        hole(X-1) :- hole(X), X > 1.
        {p2h(P,H) : hole(H)} = 1 :- pigeon(P).
        :- p2h(P1,H), p2h(P2,H), P1 != P2.
    ";

    #[test]
    fn p3h3_encoding_with_instance() {
        let src = format!("pigeon(3). hole(3).\n{PIGEON}");
        let p = parse_program(&src).unwrap();
        assert_eq!(p.facts.len(), 2);
        assert_eq!(p.rules.len(), 4);
        assert_eq!(p.rules[2].kind(), RuleKind::Choice);
        assert_eq!(p.rules[3].kind(), RuleKind::Constraint);
    }

    #[test]
    fn empty_source() {
        let p = parse_program("").unwrap();
        assert!(p.rules.is_empty() && p.facts.is_empty());
        let p = parse_program("% only a comment\n").unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn constraint_shape() {
        let p = parse_program(":- p2h(P1,H), p2h(P2,H), P1 != P2.").unwrap();
        assert_eq!(p.rules.len(), 1);
        let r = &p.rules[0];
        assert!(r.head.is_none());
        assert_eq!(r.body_pos.len(), 2);
        assert_eq!(r.builtins.len(), 1);
        assert_eq!(r.builtins[0].op, CmpOp::Ne);
    }

    #[test]
    fn normal_rule_with_negation_and_builtin() {
        let p = parse_program("h :- b1, not b2, X > 1, q(X).").unwrap();
        let r = &p.rules[0];
        assert_eq!(r.kind(), RuleKind::Normal);
        assert_eq!(r.body_pos.len(), 2);
        assert_eq!(r.body_neg.len(), 1);
        assert_eq!(r.builtins.len(), 1);
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_program("p(1).\nq(2) :- .").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unsafe_rule_rejected() {
        assert!(matches!(
            parse_program("p(X) :- q(Y).").unwrap_err(),
            Error::Unsafe { .. }
        ));
        assert!(matches!(
            parse_program("p(X) :- not q(X).").unwrap_err(),
            Error::Unsafe { .. }
        ));
        // Arithmetic does not bind.
        assert!(matches!(
            parse_program("p :- q(X+1).").unwrap_err(),
            Error::Unsafe { .. }
        ));
        assert!(matches!(parse_program("p(X).").unwrap_err(), Error::Unsafe { .. }));
    }

    #[test]
    fn arity_mismatch_rejected() {
        assert!(matches!(
            parse_program("p(1). p(1,2).").unwrap_err(),
            Error::ArityMismatch { .. }
        ));
    }

    #[test]
    fn choice_requires_exact_bound() {
        assert!(parse_program("{a; b}.").is_err());
        let p = parse_program("{a; b : c} = 1. c.").unwrap();
        assert_eq!(p.rules[0].kind(), RuleKind::Choice);
    }

    #[test]
    fn reserved_prefix_identifiers() {
        let p = parse_program("__sbc_eq(0,0). q :- __sbc_eq(0,0).").unwrap();
        assert_eq!(p.facts[0].predicate, "__sbc_eq");
    }

    #[test]
    fn negative_integers_and_display_round_trip() {
        let src = "p(-2). q(X-1) :- p(X), X != -3.";
        let p = parse_program(src).unwrap();
        let again = parse_program(&p.to_string()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn parse_single_atom() {
        assert_eq!(parse_atom("p2h(3,1)").unwrap(), GroundAtom::ints("p2h", &[3, 1]));
        assert!(parse_atom("p(X)").is_err());
    }
}
