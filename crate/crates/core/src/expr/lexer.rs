//! Tokenizer for the expression language.

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Operator,
    LParen,
    RParen,
    Comma,
}

/// A lexeme with its character offset in the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: usize,
}

/// Splits `source` into tokens. Whitespace separates tokens and is dropped.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;

    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let kind = if c.is_ascii_digit() || (c == '.' && next_is_digit(&chars, i + 1)) {
            i = scan_number(&chars, i);
            TokenKind::Number
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            TokenKind::Identifier
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => TokenKind::Operator,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                ',' => TokenKind::Comma,
                other => {
                    return Err(ParseError::IllegalCharacter {
                        position: start,
                        character: other,
                    })
                }
            }
        };
        tokens.push(Token {
            kind,
            lexeme: chars[start..i].iter().collect(),
            position: start,
        });
    }
    Ok(tokens)
}

fn next_is_digit(chars: &[char], i: usize) -> bool {
    chars.get(i).is_some_and(|c| c.is_ascii_digit())
}

fn scan_number(chars: &[char], mut i: usize) -> usize {
    while next_is_digit(chars, i) {
        i += 1;
    }
    if chars.get(i) == Some(&'.') {
        i += 1;
        while next_is_digit(chars, i) {
            i += 1;
        }
    }
    // An exponent is only consumed when digits follow; "2e" leaves the `e` to
    // the identifier scanner and the parser rejects the juxtaposition.
    if matches!(chars.get(i), Some('e' | 'E')) {
        let mut j = i + 1;
        if matches!(chars.get(j), Some('+' | '-')) {
            j += 1;
        }
        if next_is_digit(chars, j) {
            i = j;
            while next_is_digit(chars, i) {
                i += 1;
            }
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.lexeme)).collect()
    }

    #[test]
    fn splits_power_over_number() {
        use TokenKind::*;
        assert_eq!(
            kinds("v1^2/2"),
            vec![
                (Identifier, "v1".into()),
                (Operator, "^".into()),
                (Number, "2".into()),
                (Operator, "/".into()),
                (Number, "2".into()),
            ]
        );
    }

    #[test]
    fn empty_source_has_no_tokens() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("   \t\n").unwrap().is_empty());
    }

    #[test]
    fn rejects_illegal_character() {
        assert_eq!(
            tokenize("q1 @ 2"),
            Err(ParseError::IllegalCharacter {
                position: 3,
                character: '@'
            })
        );
    }

    #[test]
    fn numbers_with_exponents() {
        let toks = kinds("1.5e-3 + .25 + 2E+4 + 7.");
        let nums: Vec<_> = toks
            .iter()
            .filter(|(k, _)| *k == TokenKind::Number)
            .map(|(_, s)| s.as_str())
            .collect();
        assert_eq!(nums, vec!["1.5e-3", ".25", "2E+4", "7."]);
    }

    #[test]
    fn dangling_exponent_is_not_swallowed() {
        let toks = kinds("2e");
        assert_eq!(toks[0], (TokenKind::Number, "2".into()));
        assert_eq!(toks[1], (TokenKind::Identifier, "e".into()));
    }

    #[test]
    fn positions_increase_and_lexemes_cover_source() {
        let src = "  sin( q1 )*exp(-z2) , 3.0e2";
        let toks = tokenize(src).unwrap();
        let chars: Vec<char> = src.chars().collect();
        for w in toks.windows(2) {
            assert!(w[0].position < w[1].position);
        }
        for t in &toks {
            let slice: String = chars[t.position..t.position + t.lexeme.chars().count()]
                .iter()
                .collect();
            assert_eq!(slice, t.lexeme);
        }
        let joined: String = toks.iter().map(|t| t.lexeme.as_str()).collect();
        let stripped: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        assert_eq!(joined, stripped);
    }
}
