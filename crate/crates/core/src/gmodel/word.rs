use std::fmt;

use super::GModelError;

/// Ordered finite symbol set. Symbols are referred to by their index
/// everywhere else in the crate; the order fixes enumeration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self, GModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(GModelError::AlphabetTooSmall);
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(GModelError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// `{"0", "1"}`.
    pub fn binary() -> Self {
        Self {
            symbols: vec!["0".to_string(), "1".to_string()],
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Result<usize, GModelError> {
        self.symbols
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| GModelError::UnknownSymbol(symbol.to_string()))
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    /// Parses a word written leftmost coordinate first. Whitespace separates
    /// symbols if present; otherwise every character is one symbol.
    pub fn parse_word(&self, anchor: i64, text: &str) -> Result<Word, GModelError> {
        let symbols = if text.split_whitespace().count() > 1 {
            text.split_whitespace()
                .map(|s| self.index_of(s))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            text.trim()
                .chars()
                .map(|c| self.index_of(&c.to_string()))
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Word::new(anchor, symbols))
    }

    pub fn format_word(&self, word: &Word) -> String {
        let single = self.symbols.iter().all(|s| s.chars().count() == 1);
        let parts: Vec<&str> = word.symbols().iter().map(|&i| self.symbol(i)).collect();
        if single {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }

    pub(crate) fn check(&self, word: &Word) -> Result<(), GModelError> {
        match word.symbols().iter().find(|&&s| s >= self.size()) {
            Some(&index) => Err(GModelError::SymbolOutOfRange {
                index,
                size: self.size(),
            }),
            None => Ok(()),
        }
    }
}

/// Closed integer interval `[start, end]`; empty when `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub start: i64,
    pub end: i64,
}

impl Interval {
    pub fn new(start: i64, end: i64) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        if self.start > self.end {
            0
        } else {
            (self.end - self.start + 1) as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.start > self.end
    }

    pub fn contains(&self, i: i64) -> bool {
        self.start <= i && i <= self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Finite sequence of symbol indices occupying `[anchor, anchor + len - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    anchor: i64,
    symbols: Vec<usize>,
}

impl Word {
    pub fn new(anchor: i64, symbols: Vec<usize>) -> Self {
        Self { anchor, symbols }
    }

    pub fn empty(anchor: i64) -> Self {
        Self::new(anchor, Vec::new())
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.anchor, self.anchor + self.symbols.len() as i64 - 1)
    }

    /// Symbol at absolute coordinate `i`, if covered.
    pub fn at(&self, i: i64) -> Option<usize> {
        if i < self.anchor {
            return None;
        }
        self.symbols.get((i - self.anchor) as usize).copied()
    }

    /// Sub-word on `[start, end]` (clipped to this word's interval).
    pub fn slice(&self, start: i64, end: i64) -> Word {
        let lo = start.max(self.anchor);
        let hi = end.min(self.interval().end);
        if lo > hi {
            return Word::empty(lo);
        }
        let from = (lo - self.anchor) as usize;
        let to = (hi - self.anchor) as usize + 1;
        Word::new(lo, self.symbols[from..to].to_vec())
    }

    /// Joins `self` with a word starting right after it. An empty `right`
    /// is accepted regardless of its anchor.
    pub fn concat(&self, right: &Word) -> Result<Word, GModelError> {
        if right.is_empty() {
            return Ok(self.clone());
        }
        if self.is_empty() {
            return Ok(right.clone());
        }
        let expected = self.interval().end + 1;
        if right.anchor != expected {
            return Err(GModelError::IntervalMismatch {
                left: self.interval(),
                right: right.interval(),
            });
        }
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&right.symbols);
        Ok(Word::new(self.anchor, symbols))
    }
}

/// Lexicographic index of `symbols` with the first entry most significant.
pub(crate) fn lex_index(symbols: &[usize], base: usize) -> usize {
    symbols.iter().fold(0, |acc, &s| acc * base + s)
}

/// Inverse of [`lex_index`] for a fixed length.
pub(crate) fn lex_decode(mut index: usize, base: usize, len: usize, out: &mut [usize]) {
    debug_assert_eq!(out.len(), len);
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
}
