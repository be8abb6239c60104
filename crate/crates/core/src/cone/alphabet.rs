use crate::error::{input, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::sync::Arc;

/// Ordered list of distinct symbol labels. Cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet(Arc<Vec<String>>);

impl TryFrom<Vec<String>> for Alphabet {
    type Error = crate::error::Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.0.as_ref().clone()
    }
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return input("alphabet must be nonempty");
        }
        let mut seen = HashSet::new();
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return input(format!("duplicate symbol {s:?} in alphabet"));
            }
        }
        Ok(Alphabet(Arc::new(symbols)))
    }

    /// Symbols `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Self {
        assert!(n > 0, "alphabet must be nonempty");
        Alphabet(Arc::new((0..n).map(|i| i.to_string()).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn label(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|s| s == label)
    }

    pub fn require_index(&self, label: &str) -> Result<usize> {
        match self.index_of(label) {
            Some(i) => Ok(i),
            None => input(format!("unknown symbol {label:?}")),
        }
    }

    /// Pairs `(y, z)` in row-major order, labelled `"y,z"`.
    pub fn product(&self, other: &Alphabet) -> Alphabet {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in self.symbols() {
            for b in other.symbols() {
                out.push(format!("{a},{b}"));
            }
        }
        Alphabet(Arc::new(out))
    }

    /// Sequences of length `n` in lexicographic order (first symbol most significant).
    pub fn power(&self, n: usize) -> Alphabet {
        assert!(n > 0);
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.product(self);
        }
        acc
    }

    /// Concatenation for sum alphabets; overlapping labels are tagged `0:`/`1:`.
    pub fn disjoint_union(&self, other: &Alphabet) -> Alphabet {
        let clash = self.symbols().iter().any(|s| other.index_of(s).is_some());
        let out: Vec<String> = if clash {
            self.symbols()
                .iter()
                .map(|s| format!("0:{s}"))
                .chain(other.symbols().iter().map(|s| format!("1:{s}")))
                .collect()
        } else {
            self.symbols().iter().chain(other.symbols()).cloned().collect()
        };
        Alphabet(Arc::new(out))
    }

    /// Label of a sequence given by symbol indices, joined by commas.
    pub fn sequence_label(&self, seq: &[usize]) -> String {
        seq.iter().map(|&i| self.label(i)).collect::<Vec<_>>().join(",")
    }

    pub fn parse_sequence(&self, s: &str) -> Result<Vec<usize>> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(',').map(|t| self.require_index(t)).collect()
    }
}

/// Base-`k` index of a sequence, first symbol most significant.
pub fn sequence_index(seq: &[usize], k: usize) -> usize {
    seq.iter().fold(0, |acc, &d| acc * k + d)
}

pub fn sequence_digits(mut index: usize, k: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % k;
        index /= k;
    }
    out
}

/// `k^n`, or `None` on overflow.
pub fn checked_pow(k: usize, n: usize) -> Option<usize> {
    (0..n).try_fold(1usize, |acc, _| acc.checked_mul(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn product_labels() {
        let a = Alphabet::new(["0", "1"]).unwrap();
        let p = a.power(2);
        assert_eq!(p.symbols(), &["0,0", "0,1", "1,0", "1,1"]);
        assert_eq!(p.index_of("1,0"), Some(sequence_index(&[1, 0], 2)));
        assert_eq!(sequence_digits(2, 2, 2), vec![1, 0]);
    }

    #[test]
    fn disjoint_union_tags_only_on_clash() {
        let a = Alphabet::new(["0", "1"]).unwrap();
        let b = Alphabet::new(["2"]).unwrap();
        assert_eq!(a.disjoint_union(&b).symbols(), &["0", "1", "2"]);
        assert_eq!(a.disjoint_union(&a).symbols(), &["0:0", "0:1", "1:0", "1:1"]);
    }
}
