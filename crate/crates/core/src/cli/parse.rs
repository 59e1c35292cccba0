//! Text forms of multisegments, permutations and generator sets.
//!
//! Multisegments: `msum := term ("+" term)*`, `term := [count "*"] "[" int ["," int] "]"`.
//! Whitespace is ignored everywhere. `0` on its own denotes the empty multisegment.

use crate::coxeter::{GeneratorSet, Permutation};
use crate::error::{Error, Result};
use crate::multiseg::{Multisegment, Segment};

struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { text: text.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.text.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s = std::str::from_utf8(&self.text[start..self.pos]).unwrap_or("");
        match s.parse::<i64>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err("expected an integer")
            }
        }
    }
}

pub fn parse_segment(text: &str) -> Result<Segment> {
    let mut c = Cursor::new(text);
    let s = segment(&mut c)?;
    if !c.at_end() {
        return c.err("trailing input");
    }
    Ok(s)
}

fn segment(c: &mut Cursor<'_>) -> Result<Segment> {
    c.expect(b'[')?;
    let i = c.int()?;
    let j = if c.eat(b',') { c.int()? } else { i };
    let at = c.pos;
    c.expect(b']')?;
    Segment::try_new(i, j).ok_or(Error::Parse { pos: at, msg: format!("empty segment [{i},{j}]") })
}

pub fn parse_multisegment(text: &str) -> Result<Multisegment> {
    let mut c = Cursor::new(text);
    if c.peek() == Some(b'0') {
        c.pos += 1;
        if c.at_end() {
            return Ok(Multisegment::empty());
        }
        return c.err("'0' must stand alone");
    }
    let mut items = Vec::new();
    loop {
        let count = if c.peek() == Some(b'[') {
            1
        } else {
            let at = c.pos;
            let n = c.int()?;
            c.expect(b'*')?;
            if n < 1 {
                return Err(Error::Parse { pos: at, msg: "count must be positive".into() });
            }
            u32::try_from(n).map_err(|_| Error::Parse { pos: at, msg: "count too large".into() })?
        };
        items.push((segment(&mut c)?, count));
        if c.at_end() {
            break;
        }
        c.expect(b'+')?;
    }
    Ok(Multisegment::from_counts(items))
}

pub fn format_multisegment(a: &Multisegment) -> String {
    a.to_string()
}

/// One-line form `3,4,1,2` (brackets optional) or cycle form `(1 3)(2 4)`.
/// Cycle input produces a permutation of the largest entry mentioned unless
/// `n` is given.
pub fn parse_permutation(text: &str, n: Option<usize>) -> Result<Permutation> {
    let trimmed = text.trim();
    if trimmed.starts_with('(') {
        return parse_cycles(trimmed, n);
    }
    let mut c = Cursor::new(trimmed);
    let bracketed = c.eat(b'[');
    let mut vals = Vec::new();
    if !(bracketed && c.peek() == Some(b']')) && !c.at_end() {
        loop {
            let at = c.pos;
            let v = c.int()?;
            if v < 1 {
                return Err(Error::Parse { pos: at, msg: "entries start at 1".into() });
            }
            vals.push(v as usize);
            if !c.eat(b',') {
                break;
            }
        }
    }
    if bracketed {
        c.expect(b']')?;
    }
    if !c.at_end() {
        return c.err("trailing input");
    }
    if let Some(n) = n {
        if n < vals.len() {
            return Err(Error::Parse { pos: 0, msg: format!("more than {n} entries") });
        }
        vals.extend(vals.len() + 1..=n);
    }
    Permutation::new(vals).map_err(|e| Error::Parse { pos: 0, msg: e.to_string() })
}

fn parse_cycles(text: &str, n: Option<usize>) -> Result<Permutation> {
    let mut c = Cursor::new(text);
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    while !c.at_end() {
        c.expect(b'(')?;
        let mut cyc = Vec::new();
        while c.peek() != Some(b')') {
            let at = c.pos;
            let v = c.int()?;
            if v < 1 {
                return Err(Error::Parse { pos: at, msg: "entries start at 1".into() });
            }
            cyc.push(v as usize);
            c.eat(b',');
        }
        c.expect(b')')?;
        cycles.push(cyc);
    }
    let top = cycles.iter().flatten().copied().max().unwrap_or(0);
    let n = n.unwrap_or(top).max(top);
    let mut w: Vec<usize> = (1..=n).collect();
    let mut seen = vec![false; n + 1];
    for cyc in &cycles {
        for (idx, &x) in cyc.iter().enumerate() {
            if seen[x] {
                return Err(Error::Parse { pos: 0, msg: format!("{x} appears twice in the cycles") });
            }
            seen[x] = true;
            w[x - 1] = cyc[(idx + 1) % cyc.len()];
        }
    }
    Permutation::new(w).map_err(|e| Error::Parse { pos: 0, msg: e.to_string() })
}

/// Comma separated generator indices, e.g. `1,3` for `{σ_1, σ_3}`.
pub fn parse_generator_set(text: &str, n: usize) -> Result<GeneratorSet> {
    let mut c = Cursor::new(text);
    let mut members = Vec::new();
    while !c.at_end() {
        let at = c.pos;
        let i = c.int()?;
        if i < 1 || i as usize >= n {
            return Err(Error::Parse { pos: at, msg: format!("generator index {i} outside 1..{}", n - 1) });
        }
        members.push(i as usize);
        if !c.eat(b',') {
            break;
        }
    }
    if !c.at_end() {
        return c.err("trailing input");
    }
    Ok(GeneratorSet::new(n, members))
}
