//! Boolean wildcard query language for corpus filtering.
//!
//! Grammar (operators case-insensitive, AND binds tighter than OR):
//!
//! ```text
//! expr    := and_expr ( ("OR" | ",") and_expr )*
//! and_expr:= primary ( "AND" primary )*
//! primary := "(" expr ")" | term
//! term    := 'quoted phrase' | word+          (a trailing `*` marks a prefix wildcard)
//! ```
//!
//! Consecutive bare words form a single phrase, so `Deep Learn*` is the
//! phrase "Deep Learn" with a wildcard on its last token.

use std::fmt;

use thiserror::Error;

use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("empty query")]
    EmptyQuery,
    #[error("unbalanced parenthesis at offset {0}")]
    UnbalancedParen(usize),
    #[error("unterminated quote starting at offset {0}")]
    UnterminatedQuote(usize),
    #[error("dangling operator {op} at offset {offset}")]
    DanglingOperator { op: String, offset: usize },
    #[error("empty term at offset {0}")]
    EmptyTerm(usize),
    #[error("wildcard `*` is only allowed at the end of a phrase (offset {0})")]
    MisplacedWildcard(usize),
    #[error("expected an operator at offset {0}")]
    ExpectedOperator(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryExpr {
    Phrase { text: String, wildcard: bool },
    And(Box<QueryExpr>, Box<QueryExpr>),
    Or(Box<QueryExpr>, Box<QueryExpr>),
}

impl QueryExpr {
    pub fn phrase(text: impl Into<String>) -> Self {
        QueryExpr::Phrase {
            text: text.into(),
            wildcard: false,
        }
    }

    pub fn prefix(text: impl Into<String>) -> Self {
        QueryExpr::Phrase {
            text: text.into(),
            wildcard: true,
        }
    }

    pub fn and(left: QueryExpr, right: QueryExpr) -> Self {
        QueryExpr::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: QueryExpr, right: QueryExpr) -> Self {
        QueryExpr::Or(Box::new(left), Box::new(right))
    }

    /// Evaluates against an already tokenized (lowercased) document.
    pub fn matches_tokens(&self, doc_tokens: &[String]) -> bool {
        match self {
            QueryExpr::Phrase { text, wildcard } => {
                phrase_matches(&tokenize(text), *wildcard, doc_tokens)
            }
            QueryExpr::And(l, r) => l.matches_tokens(doc_tokens) && r.matches_tokens(doc_tokens),
            QueryExpr::Or(l, r) => l.matches_tokens(doc_tokens) || r.matches_tokens(doc_tokens),
        }
    }

    /// Canonical fully parenthesized form; reparses to an identical tree.
    pub fn to_canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for QueryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryExpr::Phrase { text, wildcard } => {
                write!(f, "'{text}{}'", if *wildcard { "*" } else { "" })
            }
            QueryExpr::And(l, r) => write!(f, "({l} AND {r})"),
            QueryExpr::Or(l, r) => write!(f, "({l} OR {r})"),
        }
    }
}

fn phrase_matches(phrase: &[String], wildcard: bool, doc: &[String]) -> bool {
    let Some((last, head)) = phrase.split_last() else {
        return false;
    };
    if phrase.len() > doc.len() {
        return false;
    }
    doc.windows(phrase.len()).any(|w| {
        let (w_last, w_head) = w.split_last().expect("window is non-empty");
        w_head == head
            && if wildcard {
                w_last.starts_with(last.as_str())
            } else {
                w_last == last
            }
    })
}

/// Evaluates `expr` against a document's title and abstract.
pub fn eval_query(expr: &QueryExpr, doc: &crate::corpus::PatentDocument) -> bool {
    expr.matches_tokens(&doc.search_tokens())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    And,
    Or,
    Quoted(String),
    Word(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    offset: usize,
}

fn is_word_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '(' | ')' | ',' | '\''))
}

fn lex(source: &str) -> Result<Vec<Spanned>, QueryError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let offset = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => out.push(Spanned { tok: Tok::LParen, offset }),
            ')' => out.push(Spanned { tok: Tok::RParen, offset }),
            ',' => out.push(Spanned { tok: Tok::Comma, offset }),
            '\'' => {
                let start = i + 1;
                let end = chars[start..]
                    .iter()
                    .position(|&c| c == '\'')
                    .map(|p| start + p)
                    .ok_or(QueryError::UnterminatedQuote(offset))?;
                let text: String = chars[start..end].iter().collect();
                out.push(Spanned {
                    tok: Tok::Quoted(text),
                    offset,
                });
                i = end + 1;
                continue;
            }
            _ => {
                let start = i;
                while i < chars.len() && is_word_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = if word.eq_ignore_ascii_case("and") {
                    Tok::And
                } else if word.eq_ignore_ascii_case("or") {
                    Tok::Or
                } else {
                    Tok::Word(word)
                };
                out.push(Spanned { tok, offset: start });
                continue;
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Splits a trailing `*` off a phrase; any other `*` is rejected.
fn make_phrase(raw: &str, offset: usize) -> Result<QueryExpr, QueryError> {
    let trimmed = raw.trim();
    let (body, wildcard) = match trimmed.strip_suffix('*') {
        Some(body) => (body.trim_end(), true),
        None => (trimmed, false),
    };
    if body.contains('*') {
        return Err(QueryError::MisplacedWildcard(offset));
    }
    if body.is_empty() {
        return Err(QueryError::EmptyTerm(offset));
    }
    Ok(QueryExpr::Phrase {
        text: body.to_string(),
        wildcard,
    })
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end_offset: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.offset)
            .unwrap_or(self.end_offset)
    }

    fn parse_or(&mut self) -> Result<QueryExpr, QueryError> {
        let mut left = self.parse_and()?;
        while let Some(Tok::Or | Tok::Comma) = self.peek() {
            let op = self.toks[self.pos].clone();
            self.pos += 1;
            let right = self.parse_and_after(&op)?;
            left = QueryExpr::or(left, right);
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<QueryExpr, QueryError> {
        let mut left = self.parse_primary()?;
        while let Some(Tok::And) = self.peek() {
            let op = self.toks[self.pos].clone();
            self.pos += 1;
            let right = self.parse_primary_after(&op)?;
            left = QueryExpr::and(left, right);
        }
        Ok(left)
    }

    fn dangling(op: &Spanned) -> QueryError {
        let name = match op.tok {
            Tok::And => "AND",
            Tok::Or => "OR",
            _ => ",",
        };
        QueryError::DanglingOperator {
            op: name.to_string(),
            offset: op.offset,
        }
    }

    fn operand_follows(&self) -> bool {
        matches!(self.peek(), Some(Tok::LParen | Tok::Quoted(_) | Tok::Word(_)))
    }

    fn parse_and_after(&mut self, op: &Spanned) -> Result<QueryExpr, QueryError> {
        if !self.operand_follows() {
            return Err(Self::dangling(op));
        }
        self.parse_and()
    }

    fn parse_primary_after(&mut self, op: &Spanned) -> Result<QueryExpr, QueryError> {
        if !self.operand_follows() {
            return Err(Self::dangling(op));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<QueryExpr, QueryError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                if let Some(Tok::RParen) = self.peek() {
                    return Err(QueryError::EmptyTerm(self.offset()));
                }
                let inner = self.parse_or()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(QueryError::UnbalancedParen(offset)),
                }
            }
            Some(Tok::Quoted(text)) => {
                self.pos += 1;
                make_phrase(&text, offset)
            }
            Some(Tok::Word(_)) => {
                let mut words = Vec::new();
                while let Some(Tok::Word(w)) = self.peek() {
                    words.push(w.clone());
                    self.pos += 1;
                }
                make_phrase(&words.join(" "), offset)
            }
            Some(Tok::RParen) => Err(QueryError::UnbalancedParen(offset)),
            Some(Tok::And | Tok::Or | Tok::Comma) => {
                let op = self.toks[self.pos].clone();
                Err(Self::dangling(&op))
            }
            None => Err(QueryError::EmptyTerm(offset)),
        }
    }
}

pub fn parse_query(source: &str) -> Result<QueryExpr, QueryError> {
    if source.trim().is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    let toks = lex(source)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end_offset: source.chars().count(),
    };
    let expr = parser.parse_or()?;
    match parser.toks.get(parser.pos) {
        None => Ok(expr),
        Some(Spanned {
            tok: Tok::RParen,
            offset,
        }) => Err(QueryError::UnbalancedParen(*offset)),
        Some(s) => Err(QueryError::ExpectedOperator(s.offset)),
    }
}
