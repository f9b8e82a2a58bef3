//! Text form of hierarchical words.
//!
//! ```text
//! word    := LITERAL:"<digits>" | POWER(word,<k>) | CONCAT(word,word,...)
//! ```
//!
//! `format` and `parse` are inverse to each other on the node structure, so
//! a stage word of period 2^40 still serializes in a few hundred bytes.

use repat_core::symbolic::{HierarchicalWord, WordNode};

use crate::error::{LabError, Result};

pub fn format(w: &HierarchicalWord) -> String {
    let mut out = String::new();
    write_node(w, &mut out);
    out
}

fn write_node(w: &HierarchicalWord, out: &mut String) {
    match w.node() {
        WordNode::Literal(s) => {
            out.push_str("LITERAL:\"");
            out.extend(s.iter().map(|c| char::from(b'0' + c.get())));
            out.push('"');
        }
        WordNode::Power(child, k) => {
            out.push_str("POWER(");
            write_node(child, out);
            out.push_str(&std::format!(",{k})"));
        }
        WordNode::Concat(children) => {
            out.push_str("CONCAT(");
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_node(c, out);
            }
            out.push(')');
        }
    }
}

pub fn parse(text: &str) -> Result<HierarchicalWord> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let w = p.word()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(w)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> LabError {
        LabError::Grammar(std::format!("{what} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.s.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&std::format!("expected `{tok}`")))
        }
    }

    fn word(&mut self) -> Result<HierarchicalWord> {
        if self.eat("LITERAL:\"") {
            let start = self.pos;
            while self.s.get(self.pos).is_some_and(|&b| b != b'"') {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.s[start..self.pos]).map_err(|_| self.err("non-utf8 literal"))?;
            self.expect("\"")?;
            Ok(HierarchicalWord::parse_literal(digits)?)
        } else if self.eat("POWER(") {
            let child = self.word()?;
            self.expect(",")?;
            self.skip_ws();
            let start = self.pos;
            while self.s.get(self.pos).is_some_and(u8::is_ascii_digit) {
                self.pos += 1;
            }
            let k: u64 = std::str::from_utf8(&self.s[start..self.pos])
                .ok()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| self.err("expected exponent"))?;
            self.expect(")")?;
            Ok(HierarchicalWord::power(child, k)?)
        } else if self.eat("CONCAT(") {
            let mut children = vec![self.word()?];
            while self.eat(",") {
                children.push(self.word()?);
            }
            self.expect(")")?;
            Ok(HierarchicalWord::concat(children)?)
        } else {
            Err(self.err("expected LITERAL, POWER or CONCAT"))
        }
    }
}
