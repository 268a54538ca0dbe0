//! Boolean formulas over cones: `∧ ↦ ∩`, `∨ ↦ +`, `¬ ↦ polar`.

use std::collections::BTreeMap;
use std::fmt;

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::numerics::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Var(usize),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(i) => write!(f, "X{i}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Not(a) => write!(f, "!{a}"),
        }
    }
}

impl Formula {
    pub fn var(i: usize) -> Formula {
        Formula::Var(i)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    /// `X_0 ∧ X_1 ∧ … ∧ X_{n−1}`, left-nested.
    pub fn and_chain(n: usize) -> Formula {
        (1..n).fold(Formula::Var(0), |acc, i| Formula::and(acc, Formula::Var(i)))
    }

    /// `X_0 ∨ X_1 ∨ … ∨ X_{n−1}`, left-nested.
    pub fn or_chain(n: usize) -> Formula {
        (1..n).fold(Formula::Var(0), |acc, i| Formula::or(acc, Formula::Var(i)))
    }

    /// Variable indices in order of appearance, with repetitions.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk(&mut out);
        out
    }

    fn walk(&self, out: &mut Vec<usize>) {
        match self {
            Formula::Var(i) => out.push(*i),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.walk(out);
                b.walk(out);
            }
            Formula::Not(a) => a.walk(out),
        }
    }

    /// One more than the largest variable index.
    pub fn num_vars(&self) -> usize {
        self.occurrences().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_read_once(&self) -> bool {
        let mut seen = BTreeMap::new();
        self.occurrences().into_iter().all(|i| seen.insert(i, ()).is_none())
    }

    /// True for `∧`-only formulas (no negation).
    pub fn is_and_chain(&self) -> bool {
        match self {
            Formula::Var(_) => true,
            Formula::And(a, b) => a.is_and_chain() && b.is_and_chain(),
            _ => false,
        }
    }

    pub fn is_or_chain(&self) -> bool {
        match self {
            Formula::Var(_) => true,
            Formula::Or(a, b) => a.is_or_chain() && b.is_or_chain(),
            _ => false,
        }
    }

    /// Parses `X0`, `!`/`¬`/`~`, `&`/`∧`, `|`/`∨` and parentheses. `!` binds
    /// tightest, then `&`, then `|`; binary operators associate to the left.
    pub fn parse(s: &str) -> Result<Formula> {
        let tokens = tokenize(s)?;
        let mut p = Parser { tokens, pos: 0 };
        let f = p.or()?;
        if p.pos != p.tokens.len() {
            return Err(Error::InvalidFormula(format!("unexpected token at position {}", p.pos)));
        }
        Ok(f)
    }

    /// Evaluates the formula on cones.
    pub fn eval_cones<S: Scalar>(&self, cones: &[Cone<S>]) -> Result<Cone<S>> {
        let Some(first) = cones.first() else {
            return Err(Error::InvalidFormula("no cones given".into()));
        };
        let d = first.dim();
        if let Some(c) = cones.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: c.dim() });
        }
        if self.num_vars() > cones.len() {
            return Err(Error::InvalidFormula(format!("{} variables but {} cones", self.num_vars(), cones.len())));
        }
        self.eval_unchecked(cones)
    }

    fn eval_unchecked<S: Scalar>(&self, cones: &[Cone<S>]) -> Result<Cone<S>> {
        Ok(match self {
            Formula::Var(i) => cones[*i].clone(),
            Formula::And(a, b) => a.eval_unchecked(cones)?.intersect(&b.eval_unchecked(cones)?)?,
            Formula::Or(a, b) => a.eval_unchecked(cones)?.minkowski_sum(&b.eval_unchecked(cones)?)?,
            Formula::Not(a) => a.eval_unchecked(cones)?.polar(),
        })
    }

    /// Generic dimension of `F(L_0, …, L_n)` for subspaces in general position
    /// with `dim L_i = ks[i]`. Repeated variables use the same `k`, which is
    /// only meaningful for read-once formulas; see [`dim_formula`].
    pub fn dim_recursion(&self, d: usize, ks: &[usize]) -> usize {
        match self {
            Formula::Var(i) => ks[*i],
            Formula::Not(a) => d - a.dim_recursion(d, ks),
            Formula::And(a, b) => (a.dim_recursion(d, ks) + b.dim_recursion(d, ks)).saturating_sub(d),
            Formula::Or(a, b) => (a.dim_recursion(d, ks) + b.dim_recursion(d, ks)).min(d),
        }
    }
}

/// Generic dimension of `F(L_0, …, L_n)`; read-once formulas only.
pub fn dim_formula(f: &Formula, d: usize, ks: &[usize]) -> Result<usize> {
    if !f.is_read_once() {
        return Err(Error::NotReadOnce);
    }
    if f.num_vars() > ks.len() {
        return Err(Error::InvalidFormula(format!("{} variables but {} dimensions", f.num_vars(), ks.len())));
    }
    if let Some(&k) = ks.iter().find(|&&k| k > d) {
        return Err(Error::DimensionMismatch { expected: d, found: k });
    }
    Ok(f.dim_recursion(d, ks))
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Var(usize),
    Not,
    And,
    Or,
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => {}
            '!' | '¬' | '~' => out.push(Token::Not),
            '&' | '∧' => out.push(Token::And),
            '|' | '∨' => out.push(Token::Or),
            '(' => out.push(Token::Open),
            ')' => out.push(Token::Close),
            'X' | 'x' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && (chars[j].is_ascii_digit() || ('₀'..='₉').contains(&chars[j])) {
                    j += 1;
                }
                if j == start {
                    return Err(Error::InvalidFormula(format!("variable without index at position {i}")));
                }
                let digits: String = chars[start..j]
                    .iter()
                    .map(|&ch| if ch.is_ascii_digit() { ch } else { char::from(b'0' + (ch as u32 - '₀' as u32) as u8) })
                    .collect();
                let idx = digits.parse().map_err(|_| Error::InvalidFormula(format!("bad index {digits}")))?;
                out.push(Token::Var(idx));
                i = j;
                continue;
            }
            other => return Err(Error::InvalidFormula(format!("unexpected character {other:?} at position {i}"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut f = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Token::Var(i)) => {
                self.pos += 1;
                Ok(Formula::Var(i))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let f = self.or()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(Error::InvalidFormula("missing ')'".into()));
                }
                self.pos += 1;
                Ok(f)
            }
            _ => Err(Error::InvalidFormula(format!("expected a variable at token {}", self.pos))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::{null_space, rank};
    use crate::numerics::{Matrix, Rational, Rng};

    #[test]
    fn parse_and_print() {
        let f = Formula::parse("¬(X₀∧X₁)∨X₂").unwrap();
        assert_eq!(f, Formula::or(Formula::not(Formula::and(Formula::var(0), Formula::var(1))), Formula::var(2)));
        assert_eq!(Formula::parse(&f.to_string()).unwrap(), f);
        assert_eq!(Formula::parse("X0 | X1 & X2").unwrap(), Formula::or(Formula::var(0), Formula::and(Formula::var(1), Formula::var(2))));
        assert!(Formula::parse("X0 &").is_err());
        assert!(Formula::parse("(X0").is_err());
        assert!(Formula::parse("Y0").is_err());
        assert!(Formula::parse("(X0 | X1) & !X0").unwrap().occurrences() == vec![0, 1, 0]);
    }

    #[test]
    fn read_once() {
        assert!(Formula::parse("!(X0 & X1) | X2").unwrap().is_read_once());
        let probe = Formula::parse("(X0 | X1) & !X0").unwrap();
        assert!(!probe.is_read_once());
        assert_eq!(dim_formula(&probe, 2, &[1, 1]), Err(Error::NotReadOnce));
    }

    #[test]
    fn dim_examples() {
        assert_eq!(dim_formula(&Formula::and_chain(2), 3, &[2, 2]).unwrap(), 1);
        assert_eq!(dim_formula(&Formula::or_chain(2), 3, &[2, 2]).unwrap(), 3);
        assert_eq!(dim_formula(&Formula::not(Formula::var(0)), 5, &[2]).unwrap(), 3);
        // chains match the closed forms
        for d in 1..=4 {
            for k0 in 0..=d {
                for k1 in 0..=d {
                    for k2 in 0..=d {
                        let ks = [k0, k1, k2];
                        let and = dim_formula(&Formula::and_chain(3), d, &ks).unwrap();
                        assert_eq!(and, (k0 + k1 + k2).saturating_sub(2 * d));
                        let or = dim_formula(&Formula::or_chain(3), d, &ks).unwrap();
                        assert_eq!(or, (k0 + k1 + k2).min(d));
                    }
                }
            }
        }
    }

    #[test]
    fn dim_is_monotone_for_positive_formulas() {
        let fs = ["X0 & X1", "X0 | X1", "(X0 & X1) | X2", "(X0 | X1) & X2", "X0 & (X1 | X2)"];
        for s in fs {
            let f = Formula::parse(s).unwrap();
            let n = f.num_vars();
            for d in 1..=4 {
                let tuples = all_tuples(n, d);
                for ks in &tuples {
                    for i in 0..n {
                        if ks[i] < d {
                            let mut up = ks.clone();
                            up[i] += 1;
                            assert!(dim_formula(&f, d, &up).unwrap() >= dim_formula(&f, d, ks).unwrap());
                        }
                    }
                }
            }
        }
    }

    fn all_tuples(n: usize, d: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out.into_iter().flat_map(|t| (0..=d).map(move |k| [t.clone(), vec![k]].concat())).collect();
        }
        out
    }

    // Independent oracle: random integer subspaces, combined by exact rational
    // linear algebra (∩ via stacked orthogonal complements, + via stacked
    // bases, ¬ via orthogonal complement).
    fn random_subspace(d: usize, k: usize, rng: &mut Rng) -> Matrix<Rational> {
        let cols: Vec<Vec<Rational>> =
            (0..k).map(|_| (0..d).map(|_| Rational::integer(rng.int_in(-1_000_000, 1_000_000))).collect()).collect();
        Matrix::from_cols(d, &cols)
    }

    fn complement(b: &Matrix<Rational>, d: usize) -> Matrix<Rational> {
        if b.ncols() == 0 {
            return Matrix::identity(d);
        }
        null_space(&b.transpose())
    }

    fn oracle(f: &Formula, d: usize, spaces: &[Matrix<Rational>]) -> Matrix<Rational> {
        match f {
            Formula::Var(i) => spaces[*i].clone(),
            Formula::Not(a) => complement(&oracle(a, d, spaces), d),
            Formula::Or(a, b) => {
                let (x, y) = (oracle(a, d, spaces), oracle(b, d, spaces));
                let cols = [x.col_vecs(), y.col_vecs()].concat();
                if cols.is_empty() {
                    return Matrix::zeros(d, 0);
                }
                crate::numerics::linalg::column_basis(&Matrix::from_cols(d, &cols), 0.0)
            }
            Formula::And(a, b) => {
                let (x, y) = (oracle(a, d, spaces), oracle(b, d, spaces));
                let rows = [complement(&x, d).col_vecs(), complement(&y, d).col_vecs()].concat();
                if rows.is_empty() {
                    return Matrix::identity(d);
                }
                null_space(&Matrix::from_rows(d, &rows))
            }
        }
    }

    #[test]
    fn dim_matches_random_subspace_oracle() {
        let mut rng = Rng::new(77);
        let fs = ["!(X0 & X1) | X2", "X0 & X1", "X0 | X1", "!X0 & X1", "(X0 | !X1) & X2", "!(!X0 | X1)"];
        for s in fs {
            let f = Formula::parse(s).unwrap();
            let n = f.num_vars();
            for d in 1..=4 {
                for ks in all_tuples(n, d) {
                    let expected = dim_formula(&f, d, &ks).unwrap();
                    for _ in 0..20 {
                        let spaces: Vec<_> = ks.iter().map(|&k| random_subspace(d, k, &mut rng)).collect();
                        // the random integer bases have full rank with overwhelming probability
                        assert!(spaces.iter().zip(&ks).all(|(m, &k)| m.ncols() == 0 || rank(m) == k));
                        let got = oracle(&f, d, &spaces);
                        let dim = if got.ncols() == 0 { 0 } else { rank(&got) };
                        assert_eq!(dim, expected, "{s} d={d} ks={ks:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn eval_on_cones() {
        let o = Cone::<Rational>::orthant(3);
        let h = Cone::half_space(3, vec![Rational::integer(1), Rational::integer(1), Rational::integer(0)]).unwrap();
        let w = Cone::from_i64_rows(3, &[&[-1, 0, 0], &[0, -1, 0]]).unwrap();
        assert!(Formula::var(0).eval_cones(&[o.clone()]).unwrap().same_set(&o, 0.0));
        assert!(Formula::not(Formula::var(0)).eval_cones(&[o.clone()]).unwrap().same_set(&o.polar(), 0.0));
        let f = Formula::parse("!(X0 & X1) | X2").unwrap();
        let got = f.eval_cones(&[o.clone(), h.clone(), w.clone()]).unwrap();
        let manual = o.intersect(&h).unwrap().polar().minkowski_sum(&w).unwrap();
        let mut rng = Rng::new(3);
        let (gf, mf) = (got.to_f64(), manual.to_f64());
        for _ in 0..2000 {
            let x = crate::numerics::sample_gaussian(3, &mut rng);
            assert_eq!(gf.contains_f64(&x, 1e-9), mf.contains_f64(&x, 1e-9));
        }
        assert!(matches!(
            Formula::and_chain(2).eval_cones(&[o, Cone::orthant(2)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
