//! Infix expression parser (Pratt style).
//!
//! Binding power, loosest first: `+ -`, `* /`, prefix `-`, `^`.
//! `^` is right-associative and its exponent must reduce to an integer
//! constant. Positions in errors are 1-based character columns; a missing
//! operand at end of input is reported one past the last character.

use super::expr::{Expr, Func};
use super::number::parse_decimal;
use super::symbol::SymbolTable;
use super::ExprError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Num(chars[start..i].iter().collect()), pos });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), pos });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            other => {
                return Err(ExprError::Syntax {
                    position: pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Token { tok, pos });
        i += 1;
    }
    out.push(Token { tok: Tok::End, pos: chars.len() + 1 });
    Ok(out)
}

const BP_ADD: u8 = 10;
const BP_MUL: u8 = 20;
const BP_PREFIX: u8 = 30;
const BP_POW: u8 = 40;

struct Parser<'a> {
    tokens: Vec<Token>,
    at: usize,
    context: &'a SymbolTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn syntax(pos: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax { position: pos, message: message.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        let t = self.next();
        if t.tok == tok {
            Ok(())
        } else {
            Err(Self::syntax(t.pos, format!("expected {what}, found {}", describe(&t.tok))))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ExprError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = self.peek().clone();
            let (l_bp, r_bp) = match op.tok {
                Tok::Plus | Tok::Minus => (BP_ADD, BP_ADD + 1),
                Tok::Star | Tok::Slash => (BP_MUL, BP_MUL + 1),
                Tok::Caret => (BP_POW, BP_POW - 1),
                _ => break,
            };
            if l_bp < min_bp {
                break;
            }
            self.next();
            let rhs_pos = self.peek().pos;
            let rhs = self.expr(r_bp)?;
            lhs = match op.tok {
                Tok::Plus => Expr::Add(vec![lhs, rhs]),
                Tok::Minus => Expr::Add(vec![lhs, Expr::Neg(Box::new(rhs))]),
                Tok::Star => Expr::Mul(vec![lhs, rhs]),
                Tok::Slash => Expr::Div(Box::new(lhs), Box::new(rhs)),
                Tok::Caret => {
                    let exponent = rhs
                        .simplify()
                        .as_number()
                        .and_then(|n| n.as_integer())
                        .ok_or_else(|| Self::syntax(rhs_pos, "exponent must be an integer constant"))?;
                    Expr::Pow(Box::new(lhs), exponent)
                }
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ExprError> {
        let t = self.next();
        match t.tok {
            Tok::Minus => Ok(Expr::Neg(Box::new(self.expr(BP_PREFIX)?))),
            Tok::Plus => self.expr(BP_PREFIX),
            Tok::Num(text) => parse_decimal(&text)
                .map(Expr::Num)
                .ok_or_else(|| Self::syntax(t.pos, format!("malformed number `{text}`"))),
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| Self::syntax(t.pos, format!("unknown function `{name}`")))?;
                    self.next();
                    let arg = self.expr(0)?;
                    if self.peek().tok == Tok::Comma {
                        return Err(Self::syntax(self.peek().pos, format!("`{name}` takes one argument")));
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Func(func, Box::new(arg)));
                }
                self.context
                    .get(&name)
                    .map(Expr::sym)
                    .ok_or(ExprError::UnknownSymbol(name))
            }
            Tok::End => Err(Self::syntax(t.pos, "unexpected end of input")),
            other => Err(Self::syntax(t.pos, format!("unexpected {}", describe(&other)))),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(s) => format!("number `{s}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses `text` against the symbols registered in `context`. The result is
/// the raw tree; call [`Expr::simplify`] for the canonical form.
pub fn parse(text: &str, context: &SymbolTable) -> Result<Expr, ExprError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, at: 0, context };
    let expr = parser.expr(0)?;
    let rest = parser.peek();
    if rest.tok != Tok::End {
        return Err(Parser::syntax(rest.pos, format!("unexpected {}", describe(&rest.tok))));
    }
    Ok(expr)
}
