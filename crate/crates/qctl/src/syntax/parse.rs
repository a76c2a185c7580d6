//! Hand-rolled lexer and recursive-descent parser for the QCTL grammar.

use std::fmt;

use super::{Formula, PropName};
use std::sync::Arc;

/// Syntax error with line/column and the set of expected tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub found: String,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at {}:{}: found {}, expected {}",
            self.line,
            self.column,
            self.found,
            self.expected.join(" or "),
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            if self.pos >= self.src.len() {
                out.push(Spanned { tok: Tok::Eof, line, col });
                return Ok(out);
            }
            let c = self.src[self.pos];
            let tok = match c {
                b'~' => {
                    self.bump();
                    Tok::Not
                }
                b'&' => {
                    self.bump();
                    Tok::And
                }
                b'|' => {
                    self.bump();
                    Tok::Or
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'[' => {
                    self.bump();
                    Tok::LBracket
                }
                b']' => {
                    self.bump();
                    Tok::RBracket
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'-' => {
                    self.bump();
                    if self.pos < self.src.len() && self.src[self.pos] == b'>' {
                        self.bump();
                        Tok::Implies
                    } else {
                        return Err(ParseError {
                            line,
                            column: col,
                            found: "`-`".into(),
                            expected: vec!["`->`"],
                        });
                    }
                }
                b'<' => {
                    self.bump();
                    if self.pos + 1 < self.src.len()
                        && self.src[self.pos] == b'-'
                        && self.src[self.pos + 1] == b'>'
                    {
                        self.bump();
                        self.bump();
                        Tok::Iff
                    } else {
                        return Err(ParseError {
                            line,
                            column: col,
                            found: "`<`".into(),
                            expected: vec!["`<->`"],
                        });
                    }
                }
                c if c.is_ascii_alphanumeric() || c == b'_' => {
                    let start = self.pos;
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                    {
                        self.bump();
                    }
                    Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
                }
                other => {
                    return Err(ParseError {
                        line,
                        column: col,
                        found: format!("`{}`", other as char),
                        expected: vec!["a formula token"],
                    });
                }
            };
            out.push(Spanned { tok, line, col });
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

/// Parses the concrete syntax into a [`Formula`].
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut parser = Parser { toks, pos: 0 };
    let f = parser.formula()?;
    parser.expect_eof()?;
    Ok(f)
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        let cur = self.peek();
        ParseError {
            line: cur.line,
            column: cur.col,
            found: cur.tok.describe(),
            expected,
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(vec!["end of input"]))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.iff_level()
    }

    fn iff_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implies_level()?;
        while self.peek().tok == Tok::Iff {
            self.advance();
            let rhs = self.implies_level()?;
            lhs = Formula::Iff(Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    fn implies_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.or_level()?;
        while self.peek().tok == Tok::Implies {
            self.advance();
            let rhs = self.or_level()?;
            lhs = Formula::Implies(Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and_level()?;
        while self.peek().tok == Tok::Or {
            self.advance();
            let rhs = self.and_level()?;
            lhs = Formula::Or(Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::And {
            self.advance();
            let rhs = self.unary()?;
            lhs = Formula::And(Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    fn quantifier(&mut self, exists: bool) -> Result<Formula, ParseError> {
        let name = match &self.peek().tok {
            Tok::Ident(s) if !is_keyword(s) => s.clone(),
            _ => return Err(self.error(vec!["a proposition name"])),
        };
        self.advance();
        if self.peek().tok != Tok::Dot {
            return Err(self.error(vec!["`.`"]));
        }
        self.advance();
        let body = self.formula()?;
        let p = PropName::new(name);
        Ok(if exists {
            Formula::Exists(p, Arc::new(body))
        } else {
            Formula::Forall(p, Arc::new(body))
        })
    }

    fn until(&mut self, existential: bool) -> Result<Formula, ParseError> {
        // opening '[' already consumed by caller
        let left = self.formula()?;
        match &self.peek().tok {
            Tok::Ident(s) if s == "U" => {
                self.advance();
            }
            _ => return Err(self.error(vec!["`U`"])),
        }
        let right = self.formula()?;
        if self.peek().tok != Tok::RBracket {
            return Err(self.error(vec!["`]`"]));
        }
        self.advance();
        Ok(if existential {
            Formula::EU(Arc::new(left), Arc::new(right))
        } else {
            Formula::AU(Arc::new(left), Arc::new(right))
        })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().tok.clone() {
            Tok::Not => {
                self.advance();
                Ok(Formula::Not(Arc::new(self.unary()?)))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.formula()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.error(vec!["`)`"]));
                }
                self.advance();
                Ok(inner)
            }
            Tok::Ident(word) => {
                match word.as_str() {
                    "true" => {
                        self.advance();
                        Ok(Formula::True)
                    }
                    "false" => {
                        self.advance();
                        Ok(Formula::False)
                    }
                    "exists" => {
                        self.advance();
                        self.quantifier(true)
                    }
                    "forall" => {
                        self.advance();
                        self.quantifier(false)
                    }
                    "EX" => self.unary_op(Formula::EX),
                    "AX" => self.unary_op(Formula::AX),
                    "EF" => self.unary_op(Formula::EF),
                    "AG" => self.unary_op(Formula::AG),
                    "AF" => self.unary_op(Formula::AF),
                    "EXEF" => self.unary_op(Formula::EXEF),
                    "AXAG" => self.unary_op(Formula::AXAG),
                    "E" if self.next_is_bracket() => {
                        self.advance();
                        self.advance(); // '['
                        self.until(true)
                    }
                    "A" if self.next_is_bracket() => {
                        self.advance();
                        self.advance(); // '['
                        self.until(false)
                    }
                    _ => {
                        self.advance();
                        Ok(Formula::Prop(PropName::new(word)))
                    }
                }
            }
            _ => Err(self.error(vec!["a formula"])),
        }
    }

    fn unary_op(&mut self, build: fn(Arc<Formula>) -> Formula) -> Result<Formula, ParseError> {
        self.advance();
        Ok(build(Arc::new(self.unary()?)))
    }

    fn next_is_bracket(&self) -> bool {
        self.pos + 1 < self.toks.len() && self.toks[self.pos + 1].tok == Tok::LBracket
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "true" | "false" | "exists" | "forall" | "EX" | "AX" | "EF" | "AG" | "AF" | "EXEF"
            | "AXAG" | "U"
    )
}
