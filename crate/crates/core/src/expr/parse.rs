//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := base ('^' exponent)?
//! base     := number | ident | '(' expr ')' | func '(' expr ')' | '-' base
//! func     := sin | cos | exp | log | sqrt
//! exponent := ['-'] number
//! ```
//!
//! Whitespace is insignificant. Identifiers must name coordinates of the
//! active chart; integer exponents become exact integer powers.

use thiserror::Error;

use super::ScalarExpr;

/// Coordinate names in chart order, plus aliases (`q`/`p` for `q1`/`p1` when
/// a chart has a single degree of freedom).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordSet {
    names: Vec<String>,
    aliases: Vec<(String, usize)>,
}

impl CoordSet {
    pub fn new(names: Vec<String>, aliases: Vec<(String, usize)>) -> Self {
        CoordSet { names, aliases }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Resolve a name or alias to its coordinate index.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name).or_else(|| {
            self.aliases
                .iter()
                .find(|(a, _)| a == name)
                .map(|(_, i)| *i)
        })
    }
}

/// Syntax or identifier error with the byte position in the input.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub message: String,
    pub position: usize,
}

impl ParseError {
    fn new(message: impl Into<String>, position: usize) -> Self {
        ParseError {
            message: message.into(),
            position,
        }
    }
}

const FUNCTIONS: [&str; 5] = ["sin", "cos", "exp", "log", "sqrt"];

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push((Token::Plus, i));
                i += 1;
            }
            '-' => {
                tokens.push((Token::Minus, i));
                i += 1;
            }
            '*' => {
                tokens.push((Token::Star, i));
                i += 1;
            }
            '/' => {
                tokens.push((Token::Slash, i));
                i += 1;
            }
            '^' => {
                tokens.push((Token::Caret, i));
                i += 1;
            }
            '(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // Scientific-notation suffix: e or E, optional sign, digits.
                if i < bytes.len()
                    && matches!(bytes[i] as char, 'e' | 'E')
                    && i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_digit()
                        || (matches!(bytes[i + 1] as char, '+' | '-')
                            && i + 2 < bytes.len()
                            && bytes[i + 2].is_ascii_digit()))
                {
                    i += 2;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit
                    .parse()
                    .map_err(|_| ParseError::new(format!("invalid number `{lit}`"), start))?;
                tokens.push((Token::Number(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(text[start..i].to_string()), start));
            }
            other => {
                return Err(ParseError::new(
                    format!("unexpected character `{other}`"),
                    i,
                ))
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    coords: &'a CoordSet,
    input_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or(self.input_len)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), ParseError> {
        let pos = self.here();
        match self.bump() {
            Some(t) if t == token => Ok(()),
            _ => Err(ParseError::new(format!("expected {what}"), pos)),
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    acc = acc.add(self.term()?);
                }
                Some(Token::Minus) => {
                    self.bump();
                    acc = acc.sub(self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    acc = acc.mul(self.factor()?);
                }
                Some(Token::Slash) => {
                    self.bump();
                    acc = acc.div(self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<ScalarExpr, ParseError> {
        let base = self.base()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            let (value, pos) = self.exponent()?;
            // Integral exponents become exact integer powers.
            if value.fract() == 0.0 && value.abs() <= i32::MAX as f64 {
                Ok(base.powi(value as i32))
            } else if value.is_finite() {
                Ok(base.powf(value))
            } else {
                Err(ParseError::new("non-finite exponent", pos))
            }
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<(f64, usize), ParseError> {
        let pos = self.here();
        let negate = if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Some(Token::Number(v)) => Ok((if negate { -v } else { v }, pos)),
            _ => Err(ParseError::new("expected a numeric exponent", pos)),
        }
    }

    fn base(&mut self) -> Result<ScalarExpr, ParseError> {
        let pos = self.here();
        match self.bump() {
            Some(Token::Number(v)) => Ok(ScalarExpr::constant(v)),
            Some(Token::Minus) => Ok(self.base()?.neg()),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                if FUNCTIONS.contains(&name.as_str()) {
                    self.expect(Token::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "`)`")?;
                    Ok(match name.as_str() {
                        "sin" => arg.sin(),
                        "cos" => arg.cos(),
                        "exp" => arg.exp(),
                        "log" => arg.log(),
                        _ => arg.sqrt(),
                    })
                } else if let Some(index) = self.coords.index_of(&name) {
                    Ok(ScalarExpr::coord(index))
                } else {
                    Err(ParseError::new(format!("unknown identifier `{name}`"), pos))
                }
            }
            _ => Err(ParseError::new("expected a number, coordinate or `(`", pos)),
        }
    }
}

/// Parse `text` against the coordinate names of the active chart.
pub fn parse(text: &str, coords: &CoordSet) -> Result<ScalarExpr, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::new("empty expression", 0));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        coords,
        input_len: text.len(),
    };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(ParseError::new("trailing input", parser.here()));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contact1() -> CoordSet {
        CoordSet::new(
            vec!["q1".into(), "p1".into(), "z".into()],
            vec![("q".into(), 0), ("p".into(), 1)],
        )
    }

    #[test]
    fn parses_contact_example_hamiltonian() {
        // H(q,p,z) = p^2/2 - 1/q - 1/z^2, value at (1,1,1) is -1.5.
        let e = parse("p^2/2 - 1/q - 1/z^2", &contact1()).unwrap();
        assert_eq!(e.eval(&[1.0, 1.0, 1.0]).unwrap(), -1.5);
    }

    #[test]
    fn parses_zero_to_constant() {
        let e = parse("0", &contact1()).unwrap();
        assert!(e.is_zero());
    }

    #[test]
    fn rejects_unknown_identifier_naming_offender() {
        let coords = CoordSet::new(
            vec!["q1".into(), "q2".into(), "p1".into(), "p2".into()],
            vec![],
        );
        let err = parse("p3 + 1", &coords).unwrap_err();
        assert!(err.message.contains("p3"), "{err}");
        assert_eq!(err.position, 0);
    }

    #[test]
    fn reports_syntax_error_position() {
        let err = parse("q + ", &contact1()).unwrap_err();
        assert_eq!(err.position, 4);
    }

    #[test]
    fn function_calls_and_nesting() {
        let e = parse("sin(q)^2 + cos(q)^2", &contact1()).unwrap();
        let v = e.eval(&[0.7, 0.0, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_exponent() {
        let e = parse("q^-2", &contact1()).unwrap();
        assert_eq!(e.eval(&[2.0, 0.0, 0.0]).unwrap(), 0.25);
    }

    #[test]
    fn unary_minus_binds_to_base() {
        // Per the grammar, `-q^2` is `(-q)^2`.
        let e = parse("-q^2", &contact1()).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0, 0.0]).unwrap(), 9.0);
    }

    #[test]
    fn scientific_notation_literals() {
        let e = parse("1e-3 + q", &contact1()).unwrap();
        assert_eq!(e.eval(&[1.0, 0.0, 0.0]).unwrap(), 1.001);
    }
}
