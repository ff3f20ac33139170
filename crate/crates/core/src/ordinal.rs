//! Ordinals below ω^ω in Cantor normal form.
//!
//! An ordinal is a list of `(exponent, coefficient)` terms with strictly
//! decreasing exponents and positive coefficients; the empty list is zero.
//! The derived lexicographic order on term lists coincides with the ordinal
//! order, so `Ord` is derived.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrdinalCNF {
    terms: Vec<(u32, u64)>,
}

impl OrdinalCNF {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn omega() -> Self {
        Self {
            terms: vec![(1, 1)],
        }
    }

    pub fn from_nat(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Self {
                terms: vec![(0, n)],
            }
        }
    }

    /// Builds an ordinal from terms, rejecting non-canonical input.
    pub fn from_terms(terms: Vec<(u32, u64)>) -> Result<Self> {
        for (i, &(e, c)) in terms.iter().enumerate() {
            if c == 0 {
                return Err(Error::pre(format!("term {i} has zero coefficient")));
            }
            if i > 0 && terms[i - 1].0 <= e {
                return Err(Error::pre(format!(
                    "term {i} exponent {e} does not decrease"
                )));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The finite value, if this ordinal is below ω.
    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(0, c)] => Some(*c),
            _ => None,
        }
    }

    pub fn succ(&self) -> Self {
        self.add_nat(1)
    }

    /// `self + k` for a natural `k` (adds to the finite tail).
    pub fn add_nat(&self, k: u64) -> Self {
        if k == 0 {
            return self.clone();
        }
        let mut terms = self.terms.clone();
        match terms.last_mut() {
            Some((0, c)) => *c += k,
            _ => terms.push((0, k)),
        }
        Self { terms }
    }
}

impl fmt::Display for OrdinalCNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, &(e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "w*{c}")?,
                _ => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

fn parse_nat<T: FromStr>(s: &str, term: &str) -> Result<T> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(0, format!("bad number in ordinal term `{term}`")));
    }
    s.parse()
        .map_err(|_| Error::parse(0, format!("number out of range in term `{term}`")))
}

/// Parses the literal grammar `term ("+" term)*` with
/// `term = w^E*C | w*C | C`.
pub fn ord_parse(text: &str) -> Result<OrdinalCNF> {
    let text = text.trim();
    if text == "0" {
        return Ok(OrdinalCNF::zero());
    }
    let mut terms: Vec<(u32, u64)> = Vec::new();
    for term in text.split('+') {
        let (e, c): (u32, u64) = if let Some(rest) = term.strip_prefix("w^") {
            let (e, c) = rest
                .split_once('*')
                .ok_or_else(|| Error::parse(0, format!("missing coefficient in `{term}`")))?;
            let e: u32 = parse_nat(e, term)?;
            if e < 2 {
                return Err(Error::parse(0, format!("non-canonical exponent in `{term}`")));
            }
            (e, parse_nat(c, term)?)
        } else if let Some(c) = term.strip_prefix("w*") {
            (1, parse_nat(c, term)?)
        } else {
            (0, parse_nat(term, term)?)
        };
        if c == 0 {
            return Err(Error::parse(0, format!("zero coefficient in `{term}`")));
        }
        if let Some(&(prev, _)) = terms.last() {
            if prev <= e {
                return Err(Error::parse(
                    0,
                    format!("exponents not strictly decreasing at `{term}`"),
                ));
            }
        }
        terms.push((e, c));
    }
    Ok(OrdinalCNF { terms })
}

impl FromStr for OrdinalCNF {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ord_parse(s)
    }
}

pub fn ord_cmp(a: &OrdinalCNF, b: &OrdinalCNF) -> std::cmp::Ordering {
    a.cmp(b)
}

/// The finite set Γ_n of ordinals below `gamma` whose exponents and
/// coefficients are all at most `n`, in increasing order.
///
/// Distinct exponents bounded by `n` already limit a member to `n + 1` terms.
pub fn gamma_filtration(gamma: &OrdinalCNF, n: u32) -> Vec<OrdinalCNF> {
    let mut out = Vec::new();
    // each exponent 0..=n gets a coefficient in 0..=n (0 = absent)
    let width = n as usize + 1;
    let mut coeffs = vec![0u64; width];
    loop {
        let terms: Vec<(u32, u64)> = (0..width)
            .rev()
            .filter(|&e| coeffs[e] > 0)
            .map(|e| (e as u32, coeffs[e]))
            .collect();
        let d = OrdinalCNF { terms };
        if &d < gamma {
            out.push(d);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == width {
                out.sort();
                return out;
            }
            if coeffs[i] < n as u64 {
                coeffs[i] += 1;
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}
