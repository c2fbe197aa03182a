use std::fmt;

use crate::localgroup::Perm;

/// An eventually periodic point `prefix · period · period · …` of the Cantor
/// set of infinite words.
///
/// Always normalized: the period is primitive, and the prefix is as short as
/// possible (a prefix ending in the period's last digit is rolled into a
/// rotated period).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CantorPoint {
    prefix: Vec<u8>,
    period: Vec<u8>,
}

impl CantorPoint {
    pub fn new(prefix: Vec<u8>, period: Vec<u8>) -> Result<Self, String> {
        if period.is_empty() {
            return Err("a point needs a non-empty period".into());
        }
        let mut p = CantorPoint { prefix, period };
        p.normalize();
        Ok(p)
    }

    fn normalize(&mut self) {
        let n = self.period.len();
        if let Some(k) = (1..=n)
            .filter(|k| n % k == 0)
            .find(|&k| (0..n).all(|i| self.period[i] == self.period[i % k]))
        {
            self.period.truncate(k);
        }
        while let (Some(&a), Some(&b)) = (self.prefix.last(), self.period.last()) {
            if a != b {
                break;
            }
            self.prefix.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    pub fn digit(&self, i: usize) -> u8 {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// The first `n` digits.
    pub fn truncate(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.digit(i)).collect()
    }

    pub fn max_digit(&self) -> u8 {
        self.prefix.iter().chain(&self.period).copied().max().unwrap_or(0)
    }

    /// The point with its first `n` digits removed.
    pub fn shift(&self, n: usize) -> CantorPoint {
        if n <= self.prefix.len() {
            CantorPoint {
                prefix: self.prefix[n..].to_vec(),
                period: self.period.clone(),
            }
        } else {
            let mut period = self.period.clone();
            period.rotate_left((n - self.prefix.len()) % self.period.len());
            CantorPoint {
                prefix: vec![],
                period,
            }
        }
    }

    /// `word · self`, renormalized.
    pub fn prepend(&self, word: &[u8]) -> CantorPoint {
        let mut prefix = word.to_vec();
        prefix.extend_from_slice(&self.prefix);
        let mut p = CantorPoint {
            prefix,
            period: self.period.clone(),
        };
        p.normalize();
        p
    }

    /// Applies a permutation of the digits to every position.
    pub fn map_digits(&self, sigma: &Perm) -> CantorPoint {
        let f = |d: &u8| sigma.apply(*d as usize) as u8;
        // a digit permutation is a bijection, so normal form is preserved
        CantorPoint {
            prefix: self.prefix.iter().map(f).collect(),
            period: self.period.iter().map(f).collect(),
        }
    }

    /// Parses `"prefix(period)"`, e.g. `"0(10)"` or `"(0)"`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let (prefix, rest) = text
            .split_once('(')
            .ok_or_else(|| format!("expected \"prefix(period)\", got {text:?}"))?;
        let period = rest
            .strip_suffix(')')
            .ok_or_else(|| format!("missing ')' in {text:?}"))?;
        let digits = |s: &str| {
            s.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| format!("bad digit {c:?} in {text:?}"))
                })
                .collect::<Result<Vec<u8>, String>>()
        };
        CantorPoint::new(digits(prefix)?, digits(period)?)
    }
}

impl fmt::Display for CantorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.prefix {
            write!(f, "{d}")?;
        }
        f.write_str("(")?;
        for d in &self.period {
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for CantorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> CantorPoint {
        CantorPoint::parse(s).unwrap()
    }

    #[test]
    fn normal_forms() {
        assert_eq!(p("0(10)").to_string(), "(01)");
        assert_eq!(p("0(01)").to_string(), "0(01)");
        assert_eq!(p("(0101)").to_string(), "(01)");
        assert_eq!(p("1(0)").to_string(), "1(0)");
        assert_eq!(p("000(0)").to_string(), "(0)");
        assert_eq!(p("11(011)").to_string(), "(110)");
        assert!(CantorPoint::parse("0()").is_err());
        assert!(CantorPoint::parse("0(a)").is_err());
    }

    #[test]
    fn shift_and_prepend() {
        let x = p("01(10)");
        assert_eq!(x.shift(1), p("1(10)"));
        assert_eq!(x.shift(3), p("(01)"));
        assert_eq!(x.shift(3).prepend(&[0, 1, 1]), x);
    }

    proptest! {
        #[test]
        fn normalization_preserves_the_word(
            prefix in proptest::collection::vec(0u8..3, 0..6),
            period in proptest::collection::vec(0u8..3, 1..5),
        ) {
            let raw = |i: usize| if i < prefix.len() { prefix[i] } else { period[(i - prefix.len()) % period.len()] };
            let x = CantorPoint::new(prefix.clone(), period.clone()).unwrap();
            for i in 0..40 {
                prop_assert_eq!(x.digit(i), raw(i));
            }
            prop_assert!(x.prefix().len() <= prefix.len());
            prop_assert!(x.period().len() <= period.len());
            prop_assert_eq!(CantorPoint::parse(&x.to_string()).unwrap(), x);
        }
    }
}
