use thiserror::Error;

use super::lexer::{tokenize, Tok, Token};
use super::{
    ArithOp, Atom, Builtin, Clause, CmpOp, Conjunction, EntryDecl, Expr, Literal, Operand, Program,
    PropLit, PropRel, SourceAssertion, Span, Status, Term,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: unknown assertion status `{status}` (expected trust, check or sample_check)")]
    UnknownStatus { line: usize, column: usize, status: String },
    #[error("{line}:{column}: `{property}` is not a built-in property; user-defined properties are not supported")]
    UnknownProperty { line: usize, column: usize, property: String },
}

impl ParseError {
    fn syntax(span: Span, message: impl Into<String>) -> Self {
        ParseError::Syntax { line: span.line, column: span.column, message: message.into() }
    }

    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { line, column, .. }
            | ParseError::UnknownStatus { line, column, .. }
            | ParseError::UnknownProperty { line, column, .. } => Span { line: *line, column: *column },
        }
    }
}

/// Parses a program in the Prolog-like surface syntax.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut program = Program::default();
    while p.peek() != &Tok::Eof {
        p.anon = 0;
        if p.peek() == &Tok::Neck {
            p.directive(&mut program)?;
        } else {
            program.clauses.push(p.clause()?);
        }
    }
    program.group_clauses();
    program.refresh_warnings();
    Ok(program)
}

/// Parses an entry description `head : Pre` (the `:- entry` prefix and the
/// final dot are optional).
pub fn parse_entry(text: &str) -> Result<EntryDecl, ParseError> {
    let mut p = Parser::new(text)?;
    if p.peek() == &Tok::Neck {
        p.bump();
        p.expect_name("entry")?;
    }
    let entry = p.entry_body()?;
    p.eat(&Tok::Dot);
    p.expect_eof()?;
    Ok(entry)
}

/// Parses a single atom such as `fact(3,R)`.
pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut p = Parser::new(text)?;
    let atom = p.atom()?;
    p.eat(&Tok::Dot);
    p.expect_eof()?;
    Ok(atom)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    anon: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        let toks = tokenize(text).map_err(|e| ParseError::syntax(e.span, e.message))?;
        Ok(Parser { toks, pos: 0, anon: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::syntax(self.span(), format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn expect_name(&mut self, name: &str) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::Name(n) if n == name) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{name}`")))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn var(&mut self, name: String) -> super::Var {
        if name == "_" {
            self.anon += 1;
            super::Var(format!("_A{}", self.anon))
        } else {
            super::Var(name)
        }
    }

    // -- directives -------------------------------------------------------

    fn directive(&mut self, program: &mut Program) -> Result<(), ParseError> {
        let span = self.span();
        self.expect(Tok::Neck)?;
        let word_span = self.span();
        let word = match self.peek().clone() {
            Tok::Name(n) => n,
            _ => return Err(self.unexpected("`entry`, `pred` or an assertion status")),
        };
        self.bump();
        if word == "entry" {
            let mut entry = self.entry_body()?;
            entry.span = span;
            self.expect(Tok::Dot)?;
            program.entries.push(entry);
            return Ok(());
        }
        let status = if word == "pred" {
            Status::Check
        } else {
            let mut status_word = word.clone();
            if word == "sample" && self.peek() == &Tok::Minus {
                if let Tok::Name(n) = self.peek_at(1).clone() {
                    self.bump();
                    self.bump();
                    status_word = format!("sample-{n}");
                }
            }
            let status = Status::parse(&status_word);
            let followed_by_pred = matches!(self.peek(), Tok::Name(n) if n == "pred");
            match (status, followed_by_pred) {
                (Some(s), true) => {
                    self.bump();
                    s
                }
                (None, true) => {
                    return Err(ParseError::UnknownStatus {
                        line: word_span.line,
                        column: word_span.column,
                        status: status_word,
                    })
                }
                _ => return Err(ParseError::syntax(word_span, format!("unknown directive `{word}`"))),
            }
        };

        let head_span = self.span();
        let head = self.atom()?;
        if !head.is_normalized() {
            return Err(ParseError::syntax(head_span, format!("assertion head `{head}` must have distinct variables")));
        }
        let pre = if self.eat(&Tok::Colon) { self.conjunction()? } else { Conjunction::default() };
        let post = if self.eat(&Tok::Arrow) { self.conjunction()? } else { Conjunction::default() };
        self.expect(Tok::Dot)?;
        let head_vars = head.vars();
        for v in pre.vars().into_iter().chain(post.vars()) {
            if !head_vars.contains(&v) {
                return Err(ParseError::syntax(
                    head_span,
                    format!("variable {v} in assertion for `{head}` does not occur in its head"),
                ));
            }
        }
        program.assertions.push(SourceAssertion { status, head, pre, post, span });
        Ok(())
    }

    fn entry_body(&mut self) -> Result<EntryDecl, ParseError> {
        let span = self.span();
        let head = self.atom()?;
        if !head.is_normalized() {
            return Err(ParseError::syntax(span, format!("entry `{head}` must have distinct variables")));
        }
        let pre = if self.eat(&Tok::Colon) { self.conjunction()? } else { Conjunction::default() };
        let head_vars = head.vars();
        if let Some(v) = pre.vars().into_iter().find(|v| !head_vars.contains(v)) {
            return Err(ParseError::syntax(span, format!("variable {v} in entry `{head}` does not occur in its head")));
        }
        Ok(EntryDecl { head, pre, span })
    }

    // -- property formulas ------------------------------------------------

    fn conjunction(&mut self) -> Result<Conjunction, ParseError> {
        let mut lits = Vec::new();
        loop {
            if self.eat(&Tok::LParen) {
                lits.extend(self.conjunction()?.0);
                self.expect(Tok::RParen)?;
            } else if matches!(self.peek(), Tok::Name(n) if n == "true") && self.peek_at(1) != &Tok::LParen {
                self.bump();
            } else {
                lits.push(self.prop_lit()?);
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(Conjunction(lits))
    }

    fn prop_lit(&mut self) -> Result<PropLit, ParseError> {
        let span = self.span();
        if let Tok::Name(name) = self.peek().clone() {
            if self.peek_at(1) == &Tok::LParen {
                let ctor: fn(super::Var) -> PropLit = match name.as_str() {
                    "int" => PropLit::Int,
                    "nat" => PropLit::Nat,
                    "even" => PropLit::Even,
                    _ => {
                        return Err(ParseError::UnknownProperty {
                            line: span.line,
                            column: span.column,
                            property: name,
                        })
                    }
                };
                self.bump();
                self.bump();
                let v = match self.bump().tok {
                    Tok::Var(v) => self.var(v),
                    _ => return Err(ParseError::syntax(span, format!("`{name}/1` expects a variable argument"))),
                };
                self.expect(Tok::RParen)?;
                return Ok(ctor(v));
            }
            return Err(ParseError::UnknownProperty { line: span.line, column: span.column, property: name });
        }
        let lhs = self.operand()?;
        let rel = match self.peek() {
            Tok::Unify => PropRel::Unify,
            t => match cmp_op(t) {
                Some(op) => PropRel::Cmp(op),
                None => return Err(self.unexpected("a comparison operator")),
            },
        };
        self.bump();
        let rhs = self.operand()?;
        Ok(PropLit::Rel(rel, lhs, rhs))
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(Operand::Var(self.var(v)))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Operand::Int(n))
            }
            Tok::Minus => {
                if let Tok::Int(n) = *self.peek_at(1) {
                    self.bump();
                    self.bump();
                    Ok(Operand::Int(-n))
                } else {
                    Err(self.unexpected("a variable or integer"))
                }
            }
            _ => Err(self.unexpected("a variable or integer")),
        }
    }

    // -- clauses ----------------------------------------------------------

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let span = self.span();
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.eat(&Tok::Neck) {
            loop {
                body.push(self.literal()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::Dot)?;
        Ok(Clause { head, body, span })
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let name = match self.peek().clone() {
            Tok::Name(n) => n,
            _ => return Err(self.unexpected("a predicate name")),
        };
        self.bump();
        let args = if self.eat(&Tok::LParen) { self.args()? } else { Vec::new() };
        Ok(Atom { pred: name, args })
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        loop {
            args.push(self.expr()?.to_term());
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let span = self.span();
        if self.eat(&Tok::Bang) {
            return Ok(Literal::Builtin(Builtin::Cut));
        }
        if let Tok::Name(n) = self.peek().clone() {
            if let Some(status) = Status::parse(&n).filter(|_| n != "sample-check") {
                if self.peek_at(1) == &Tok::LParen {
                    self.bump();
                    self.bump();
                    let cond = self.conjunction()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Literal::PpAssert(status, cond));
                }
            }
        }
        let lhs = self.expr()?;
        if matches!(self.peek(), Tok::Name(n) if n == "is") {
            self.bump();
            let rhs = self.expr()?;
            return Ok(Literal::Builtin(Builtin::Is(lhs.to_term(), rhs)));
        }
        if self.eat(&Tok::Unify) {
            let rhs = self.expr()?;
            return Ok(Literal::Builtin(Builtin::Unify(lhs.to_term(), rhs.to_term())));
        }
        if let Some(op) = cmp_op(self.peek()) {
            self.bump();
            let rhs = self.expr()?;
            return Ok(Literal::Builtin(Builtin::Compare(op, lhs, rhs)));
        }
        match lhs {
            Expr::Opaque(Term::Compound(name, args)) => {
                if name == "true" && args.is_empty() {
                    Ok(Literal::Builtin(Builtin::True))
                } else {
                    Ok(Literal::Call(Atom { pred: name, args }))
                }
            }
            other => Err(ParseError::syntax(span, format!("`{other}` is not a valid body literal"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while self.eat(&Tok::Star) {
            let rhs = self.factor()?;
            lhs = Expr::Bin(ArithOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Expr::Var(self.var(v)))
            }
            Tok::Minus => {
                self.bump();
                if let Tok::Int(n) = *self.peek() {
                    self.bump();
                    return Ok(Expr::Int(-n));
                }
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Name(name) => {
                self.bump();
                let args = if self.eat(&Tok::LParen) { self.args()? } else { Vec::new() };
                Ok(Expr::Opaque(Term::Compound(name, args)))
            }
            _ => Err(self.unexpected("a term")),
        }
    }
}

fn cmp_op(t: &Tok) -> Option<CmpOp> {
    Some(match t {
        Tok::Gt => CmpOp::Gt,
        Tok::Ge => CmpOp::Ge,
        Tok::Lt => CmpOp::Lt,
        Tok::Le => CmpOp::Le,
        Tok::ArithEq => CmpOp::Eq,
        _ => return None,
    })
}
