//! Recursive-descent parser for the chart expression language.
//!
//! Grammar, loosest to tightest: `+ -`, `* /`, unary `-`, `^` with a constant
//! exponent (right-associative), then atoms: numbers, coordinates, the
//! functions sin/cos/exp/ln/sqrt, and parentheses.

use super::Expr;
use crate::error::{Error, Result};

/// Parse `src` over the given coordinate names. Any other identifier is
/// rejected with its position.
pub fn parse_expr(src: &str, coords: &[String]) -> Result<Expr> {
    let tokens = lex(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        coords,
    };
    let e = p.expr()?;
    match p.peek() {
        Token::End => Ok(e),
        t => Err(Error::Syntax {
            pos: p.cur_pos(),
            msg: format!("unexpected {}", t.describe()),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(c) => format!("number {c}"),
            Token::Ident(s) => format!("identifier '{s}'"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Caret => "'^'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Token::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Token::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Token::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Token::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Token::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent part: e or E, optional sign, digits
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("bad number literal '{text}'"),
                })?;
                out.push((Token::Num(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push((Token::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    out.push((Token::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    coords: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn cur_pos(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::add(&lhs, &rhs);
                }
                Token::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::sub(&lhs, &rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::mul(&lhs, &rhs);
                }
                Token::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::div(&lhs, &rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Token::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::neg(&inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            let caret_pos = self.cur_pos();
            self.bump();
            // exponent binds tighter than unary minus elsewhere but still
            // admits a leading sign, and chains right-associatively
            let exponent = self.unary()?;
            let c = exponent
                .simplify()
                .as_num()
                .ok_or(Error::NonConstantExponent { pos: caret_pos })?;
            return Ok(Expr::powc(&base, c));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.cur_pos();
        match self.bump() {
            Token::Num(c) => Ok(Expr::num(c)),
            Token::Ident(name) => {
                if *self.peek() == Token::LParen {
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return match name.as_str() {
                        "sin" => Ok(Expr::sin(&arg)),
                        "cos" => Ok(Expr::cos(&arg)),
                        "exp" => Ok(Expr::exp(&arg)),
                        "ln" => Ok(Expr::ln(&arg)),
                        "sqrt" => Ok(Expr::sqrt(&arg)),
                        _ => Err(Error::UnknownIdentifier { name, pos }),
                    };
                }
                if self.coords.contains(&name) {
                    Ok(Expr::var(name))
                } else {
                    Err(Error::UnknownIdentifier { name, pos })
                }
            }
            Token::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            t => Err(Error::Syntax {
                pos,
                msg: format!("expected a value, found {}", t.describe()),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if *self.peek() == Token::RParen {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                pos: self.cur_pos(),
                msg: format!("expected ')', found {}", self.peek().describe()),
            })
        }
    }
}
