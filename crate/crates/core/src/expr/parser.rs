//! Pratt parser over the token stream.
//!
//! Binding strength, loosest first: `+ -` (left), `* /` (left), unary `-`,
//! `^` (right). So `-q1^2` is `-(q1^2)` and `2^3^2` is `2^(3^2)`.

use super::lexer::{tokenize, Token, TokenKind};
use super::{BinOp, CoordKind, ExprAst, Func, ParseError};

const PREFIX_NEG_BP: u8 = 25;

pub fn parse_expression(source: &str) -> Result<ExprAst, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: source.chars().count(),
    };
    let ast = parser.expr(0)?;
    if let Some(tok) = parser.peek() {
        return Err(parser.unexpected(tok.position, &["operator", "end of input"]));
    }
    Ok(ast)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

fn infix_binding(op: &str) -> Option<(BinOp, u8, u8)> {
    Some(match op {
        "+" => (BinOp::Add, 10, 11),
        "-" => (BinOp::Sub, 10, 11),
        "*" => (BinOp::Mul, 20, 21),
        "/" => (BinOp::Div, 20, 21),
        "^" => (BinOp::Pow, 31, 30),
        _ => return None,
    })
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.position)
    }

    fn unexpected(&self, position: usize, expected: &[&str]) -> ParseError {
        ParseError::SyntaxError {
            position,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<ExprAst, ParseError> {
        let mut lhs = self.prefix()?;
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokenKind::Operator => {
                    let (op, lbp, rbp) = infix_binding(&tok.lexeme).expect("lexer only emits known operators");
                    if lbp < min_bp {
                        break;
                    }
                    self.pos += 1;
                    let rhs = self.expr(rbp)?;
                    lhs = ExprAst::binary(op, lhs, rhs);
                }
                TokenKind::RParen | TokenKind::Comma => break,
                // juxtaposition such as `2q1` or `q1 (v1)`
                _ => return Err(self.unexpected(tok.position, &["operator"])),
            }
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<ExprAst, ParseError> {
        const START: [&str; 4] = ["number", "identifier", "'('", "'-'"];
        let position = self.here();
        let Some(tok) = self.next() else {
            return Err(self.unexpected(position, &START));
        };
        match tok.kind {
            TokenKind::Number => tok
                .lexeme
                .parse::<f64>()
                .map(ExprAst::Constant)
                .map_err(|_| self.unexpected(tok.position, &["number"])),
            TokenKind::Operator if tok.lexeme == "-" => {
                let operand = self.expr(PREFIX_NEG_BP)?;
                Ok(ExprAst::Neg(Box::new(operand)))
            }
            TokenKind::LParen => {
                let inner = self.expr(0)?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Identifier => self.identifier(tok),
            _ => Err(self.unexpected(tok.position, &START)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let position = self.here();
        match self.next() {
            Some(t) if t.kind == TokenKind::RParen => Ok(()),
            _ => Err(self.unexpected(position, &["')'"])),
        }
    }

    fn identifier(&mut self, tok: Token) -> Result<ExprAst, ParseError> {
        if self.peek().is_some_and(|t| t.kind == TokenKind::LParen) {
            let func = Func::from_name(&tok.lexeme).ok_or_else(|| ParseError::UnknownFunction {
                name: tok.lexeme.clone(),
                position: tok.position,
            })?;
            self.pos += 1;
            let arg = self.expr(0)?;
            self.expect_rparen()?;
            return Ok(ExprAst::Call {
                func,
                arg: Box::new(arg),
            });
        }
        match tok.lexeme.as_str() {
            "pi" => return Ok(ExprAst::Constant(std::f64::consts::PI)),
            "e" => return Ok(ExprAst::Constant(std::f64::consts::E)),
            _ => {}
        }
        if let Some((kind, digits)) = split_coordinate(&tok.lexeme) {
            return match digits.parse::<usize>() {
                Ok(index) if index >= 1 => Ok(ExprAst::CoordVar { kind, index }),
                _ => Err(self.unexpected(tok.position, &["coordinate index >= 1"])),
            };
        }
        Ok(ExprAst::Param(tok.lexeme))
    }
}

fn split_coordinate(ident: &str) -> Option<(CoordKind, &str)> {
    let mut chars = ident.chars();
    let kind = match chars.next()? {
        'q' => CoordKind::Q,
        'v' => CoordKind::V,
        'z' => CoordKind::Z,
        _ => return None,
    };
    let digits = chars.as_str();
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
        Some((kind, digits))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinOp::*;

    fn c(v: f64) -> ExprAst {
        ExprAst::Constant(v)
    }

    #[test]
    fn e1_lagrangian_shape() {
        let ast = parse_expression("v1^2/2 - q1^2/2 - gamma1*z1").unwrap();
        let half_sq = |x: ExprAst| ExprAst::binary(Div, ExprAst::binary(Pow, x, c(2.0)), c(2.0));
        let expected = ExprAst::binary(
            Sub,
            ExprAst::binary(Sub, half_sq(ExprAst::v(1)), half_sq(ExprAst::q(1))),
            ExprAst::binary(Mul, ExprAst::Param("gamma1".into()), ExprAst::z(1)),
        );
        assert_eq!(ast, expected);
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        assert_eq!(
            parse_expression("-q1^2").unwrap(),
            ExprAst::Neg(Box::new(ExprAst::binary(Pow, ExprAst::q(1), c(2.0))))
        );
        assert_eq!(
            parse_expression("2^-1").unwrap(),
            ExprAst::binary(Pow, c(2.0), ExprAst::Neg(Box::new(c(1.0))))
        );
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(
            parse_expression("a^b^c").unwrap(),
            ExprAst::binary(
                Pow,
                ExprAst::Param("a".into()),
                ExprAst::binary(Pow, ExprAst::Param("b".into()), ExprAst::Param("c".into()))
            )
        );
    }

    #[test]
    fn subtraction_is_left_associative() {
        assert_eq!(
            parse_expression("1-2-3").unwrap(),
            ExprAst::binary(Sub, ExprAst::binary(Sub, c(1.0), c(2.0)), c(3.0))
        );
    }

    #[test]
    fn unterminated_call_fails_at_end() {
        match parse_expression("sin(") {
            Err(ParseError::SyntaxError { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_function_is_named() {
        assert_eq!(
            parse_expression("foo(q1)"),
            Err(ParseError::UnknownFunction {
                name: "foo".into(),
                position: 0
            })
        );
    }

    #[test]
    fn implicit_multiplication_is_rejected() {
        assert!(matches!(
            parse_expression("2q1"),
            Err(ParseError::SyntaxError { position: 1, .. })
        ));
        assert!(matches!(
            parse_expression("q1 v1"),
            Err(ParseError::SyntaxError { position: 3, .. })
        ));
    }

    #[test]
    fn misc_errors() {
        assert!(parse_expression("").is_err());
        assert!(parse_expression("q0").is_err());
        assert!(parse_expression("(q1").is_err());
        assert!(parse_expression("q1)").is_err());
        assert!(parse_expression("sin(q1, v1)").is_err());
        assert!(parse_expression("*2").is_err());
    }

    #[test]
    fn named_constants_and_coordinates() {
        assert_eq!(parse_expression("pi").unwrap(), c(std::f64::consts::PI));
        assert_eq!(parse_expression("z12").unwrap(), ExprAst::z(12));
        assert_eq!(parse_expression("qx").unwrap(), ExprAst::Param("qx".into()));
        assert_eq!(parse_expression("v").unwrap(), ExprAst::Param("v".into()));
    }
}
