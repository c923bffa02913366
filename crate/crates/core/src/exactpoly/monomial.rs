use std::cmp::Ordering;
use std::fmt;

/// Index into the single global variable space.
pub type Var = u32;

/// A power product of variables, stored as `(var, exponent)` pairs sorted by
/// variable with no zero exponents. The empty product is the constant monomial.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds a monomial from arbitrary pairs; repeated variables are merged
    /// and zero exponents dropped.
    pub fn from_pairs<I: IntoIterator<Item = (Var, u32)>>(pairs: I) -> Self {
        let mut v: Vec<(Var, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        v.sort_unstable_by_key(|&(x, _)| x);
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(v.len());
        for (x, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 += e,
                _ => out.push((x, e)),
            }
        }
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .binary_search_by_key(&v, |&(x, _)| x)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn pairs(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, k: u32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(v, e)| (v, e * k)).collect())
    }
}

/// Graded lexicographic order: total degree first, then the exponent of the
/// lowest-index variable decides (a larger exponent is a larger monomial).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            if a.0 != b.0 {
                // self has a positive exponent at a variable where other has none
                return if a.0 < b.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
            }
            match a.1.cmp(&b.1) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, &(v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "v{v}")?;
            } else {
                write!(f, "v{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_drop_zero() {
        let m = Monomial::from_pairs([(3, 1), (1, 2), (3, 2), (5, 0)]);
        assert_eq!(m.pairs(), &[(1, 2), (3, 3)]);
        assert_eq!(m.degree(), 5);
        assert_eq!(m.exponent(3), 3);
        assert_eq!(m.exponent(5), 0);
    }

    #[test]
    fn graded_order() {
        let x1 = Monomial::var(0);
        let x2 = Monomial::var(1);
        let x1sq = x1.pow(2);
        assert!(x1sq > x1);
        assert!(x1sq > x1.mul(&x2));
        assert!(x1 > x2);
        assert!(Monomial::one() < x2);
        assert_eq!(x1.mul(&x2).cmp(&x2.mul(&x1)), Ordering::Equal);
    }
}
