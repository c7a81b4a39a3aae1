//! Labeled binary pattern sets and their text format.
//!
//! ```text
//! label: 0
//! 111
//! 101
//! 111
//!
//! label: 1
//! ...
//! ```

use std::path::Path;

use crate::encoder::BinaryPattern;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPattern {
    pub label: usize,
    pub pattern: BinaryPattern,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    pub items: Vec<LabeledPattern>,
}

pub const PATTERNS_5X3: &str = "\
label: 0
111
001
001
001
001

label: 1
100
100
100
100
111

label: 2
000
010
111
010
000

label: 3
011
100
010
001
110
";

pub const DIGITS_7X3: &str = "\
label: 0
111
101
101
101
101
101
111

label: 1
010
110
010
010
010
010
111

label: 2
111
001
001
111
100
100
111

label: 3
111
001
001
111
001
001
111

label: 4
101
101
101
111
001
001
001

label: 5
111
100
100
111
001
001
111

label: 6
111
100
100
111
101
101
111

label: 7
111
001
001
010
010
010
010

label: 8
111
101
101
111
101
101
111

label: 9
111
101
101
111
001
010
100
";

impl PatternSet {
    pub fn parse(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        let mut label: Option<(usize, usize)> = None;
        let mut rows: Vec<&str> = Vec::new();
        let flush = |label: &mut Option<(usize, usize)>,
                     rows: &mut Vec<&str>,
                     items: &mut Vec<LabeledPattern>|
         -> Result<()> {
            if let Some((l, line)) = label.take() {
                if rows.is_empty() {
                    return Err(Error::invalid(format!("line {line}: pattern {l} has no rows")));
                }
                let pattern = BinaryPattern::from_rows(rows)
                    .map_err(|e| Error::invalid(format!("pattern at line {line}: {e}")))?;
                items.push(LabeledPattern { label: l, pattern });
            }
            rows.clear();
            Ok(())
        };
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix("label:") {
                flush(&mut label, &mut rows, &mut items)?;
                let l = rest.trim().parse::<usize>().map_err(|_| {
                    Error::invalid(format!("line {}: bad label {:?}", k + 1, rest.trim()))
                })?;
                label = Some((l, k + 1));
            } else if line.is_empty() {
                flush(&mut label, &mut rows, &mut items)?;
            } else if label.is_some() {
                rows.push(line);
            } else {
                return Err(Error::invalid(format!(
                    "line {}: pattern rows must follow a `label:` line",
                    k + 1
                )));
            }
        }
        flush(&mut label, &mut rows, &mut items)?;
        let set = Self { items };
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        let first = self
            .items
            .first()
            .ok_or_else(|| Error::invalid("pattern set is empty"))?;
        let (r, c) = (first.pattern.rows, first.pattern.cols);
        if self
            .items
            .iter()
            .any(|p| p.pattern.rows != r || p.pattern.cols != c)
        {
            return Err(Error::invalid("all patterns must share one size"));
        }
        Ok(())
    }

    pub fn builtin_5x3() -> Self {
        Self::parse(PATTERNS_5X3).expect("built-in patterns parse")
    }

    pub fn builtin_digits_7x3() -> Self {
        Self::parse(DIGITS_7X3).expect("built-in digits parse")
    }

    /// `(rows, cols)` of every pattern.
    pub fn dims(&self) -> (usize, usize) {
        let p = &self.items[0].pattern;
        (p.rows, p.cols)
    }

    pub fn classes(&self) -> usize {
        self.items.iter().map(|p| p.label + 1).max().unwrap_or(0)
    }
}
