//! Boolean access policies compiled to LSSS matrices `(M, ρ)`.
//!
//! Grammar (keywords case-insensitive):
//!
//! ```text
//! expr   := term (OR term)*
//! term   := factor (AND factor)*
//! factor := ATTR | "(" expr ")"
//! ATTR   := name "=" value
//! ```
//!
//! Compilation uses the recursive AND/OR gadget: an OR gate hands its vector to
//! both children; an AND gate with vector `v` padded to width `c` gives the left
//! child `v || 1` and the right child `(0, …, 0, -1)`, growing the width by one.

use std::collections::BTreeSet;
use std::fmt;

use ark_ff::{Field, One, Zero};
use rand::RngCore;
use thiserror::Error;

use crate::pairing::{random_nonzero, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("empty policy expression")]
    Empty,
    #[error("malformed policy at byte {pos}: {msg}")]
    Malformed { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PolicyNode {
    Leaf(String),
    And(Vec<PolicyNode>),
    Or(Vec<PolicyNode>),
}

impl PolicyNode {
    pub fn evaluate(&self, attrs: &BTreeSet<String>) -> bool {
        match self {
            PolicyNode::Leaf(a) => attrs.contains(a),
            PolicyNode::And(c) => c.iter().all(|n| n.evaluate(attrs)),
            PolicyNode::Or(c) => c.iter().any(|n| n.evaluate(attrs)),
        }
    }

    /// Flattens nested gates of the same kind and collapses single-child
    /// gates, giving the shape the parser produces.
    pub fn normalized(self) -> PolicyNode {
        match self {
            PolicyNode::Leaf(a) => PolicyNode::Leaf(a),
            PolicyNode::And(c) => gate(flatten_and(c.into_iter().map(PolicyNode::normalized).collect()), PolicyNode::And),
            PolicyNode::Or(c) => gate(flatten_or(c.into_iter().map(PolicyNode::normalized).collect()), PolicyNode::Or),
        }
    }

    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            PolicyNode::Leaf(a) => out.push(a),
            PolicyNode::And(c) | PolicyNode::Or(c) => c.iter().for_each(|n| n.collect_leaves(out)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent_and: bool) -> fmt::Result {
        match self {
            PolicyNode::Leaf(a) => f.write_str(a),
            PolicyNode::And(c) => join(f, c, " AND ", true),
            PolicyNode::Or(c) => {
                if parent_and {
                    f.write_str("(")?;
                    join(f, c, " OR ", false)?;
                    f.write_str(")")
                } else {
                    join(f, c, " OR ", false)
                }
            }
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, nodes: &[PolicyNode], sep: &str, and: bool) -> fmt::Result {
    for (i, n) in nodes.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        n.fmt_prec(f, and)?;
    }
    Ok(())
}

impl fmt::Display for PolicyNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    LParen,
    RParen,
    And,
    Or,
    Attr(String),
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '/')
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, PolicyError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let ident = |i: &mut usize| {
        let start = *i;
        while *i < chars.len() && is_ident_char(chars[*i].1) {
            *i += 1;
        }
        chars[start..*i].iter().map(|(_, c)| *c).collect::<String>()
    };
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].1.is_whitespace() {
            *i += 1;
        }
    };
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            out.push((pos, Token::LParen));
            i += 1;
        } else if c == ')' {
            out.push((pos, Token::RParen));
            i += 1;
        } else if is_ident_char(c) {
            let word = ident(&mut i);
            let mut j = i;
            skip_ws(&mut j);
            if j < chars.len() && chars[j].1 == '=' {
                j += 1;
                skip_ws(&mut j);
                let value = ident(&mut j);
                if value.is_empty() {
                    return Err(PolicyError::Malformed { pos, msg: format!("attribute `{word}` has no value") });
                }
                out.push((pos, Token::Attr(format!("{word}={value}"))));
                i = j;
            } else if word.eq_ignore_ascii_case("and") {
                out.push((pos, Token::And));
            } else if word.eq_ignore_ascii_case("or") {
                out.push((pos, Token::Or));
            } else {
                return Err(PolicyError::Malformed { pos, msg: format!("expected name=value, found `{word}`") });
            }
        } else {
            return Err(PolicyError::Malformed { pos, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<PolicyNode, PolicyError> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { PolicyNode::Or(flatten_or(terms)) })
    }

    fn term(&mut self) -> Result<PolicyNode, PolicyError> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { PolicyNode::And(flatten_and(factors)) })
    }

    fn factor(&mut self) -> Result<PolicyNode, PolicyError> {
        let at = self.here();
        match self.tokens.get(self.pos).map(|(_, t)| t.clone()) {
            Some(Token::Attr(a)) => {
                self.pos += 1;
                Ok(PolicyNode::Leaf(a))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Token::RParen) {
                    return Err(PolicyError::Malformed { pos: self.here(), msg: "expected `)`".into() });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(t) => Err(PolicyError::Malformed { pos: at, msg: format!("unexpected token {t:?}") }),
            None => Err(PolicyError::Malformed { pos: at, msg: "unexpected end of input".into() }),
        }
    }
}

fn gate(mut children: Vec<PolicyNode>, make: fn(Vec<PolicyNode>) -> PolicyNode) -> PolicyNode {
    if children.len() == 1 {
        children.pop().unwrap()
    } else {
        make(children)
    }
}

fn flatten_and(nodes: Vec<PolicyNode>) -> Vec<PolicyNode> {
    nodes
        .into_iter()
        .flat_map(|n| match n {
            PolicyNode::And(c) => c,
            other => vec![other],
        })
        .collect()
}

fn flatten_or(nodes: Vec<PolicyNode>) -> Vec<PolicyNode> {
    nodes
        .into_iter()
        .flat_map(|n| match n {
            PolicyNode::Or(c) => c,
            other => vec![other],
        })
        .collect()
}

pub fn parse_policy(src: &str) -> Result<PolicyNode, PolicyError> {
    if src.trim().is_empty() {
        return Err(PolicyError::Empty);
    }
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, end: src.len() };
    let node = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(PolicyError::Malformed { pos: p.here(), msg: "trailing input".into() });
    }
    Ok(node)
}

/// Canonicalizes a single `name=value` attribute label (whitespace around
/// `=` removed). Used for key attribute sets so they match policy leaves.
pub fn normalize_attribute(src: &str) -> Result<String, PolicyError> {
    match tokenize(src)?.as_slice() {
        [(_, Token::Attr(a))] => Ok(a.clone()),
        [] => Err(PolicyError::Empty),
        _ => Err(PolicyError::Malformed { pos: 0, msg: format!("`{src}` is not a single name=value attribute") }),
    }
}

/// LSSS access structure: `L × n` matrix over `Z_p` with a label per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessPolicy {
    pub matrix: Vec<Vec<Scalar>>,
    pub row_labels: Vec<String>,
    /// Canonical policy text (stored next to ciphertexts).
    pub source: String,
    pub tree: PolicyNode,
}

impl AccessPolicy {
    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }

    pub fn is_satisfied_by(&self, attrs: &BTreeSet<String>) -> bool {
        self.tree.evaluate(attrs)
    }
}

pub fn compile_policy(src: &str) -> Result<AccessPolicy, PolicyError> {
    let tree = parse_policy(src)?;
    Ok(compile_tree(tree))
}

pub fn compile_tree(tree: PolicyNode) -> AccessPolicy {
    let tree = tree.normalized();
    let mut rows: Vec<(Vec<i64>, String)> = Vec::new();
    let mut width = 1usize;
    gadget(&tree, vec![1], &mut width, &mut rows);
    let matrix = rows
        .iter()
        .map(|(v, _)| {
            let mut r: Vec<Scalar> = v.iter().map(|x| crate::pairing::scalar_from_i64(*x)).collect();
            r.resize(width, Scalar::zero());
            r
        })
        .collect();
    AccessPolicy {
        matrix,
        row_labels: rows.into_iter().map(|(_, l)| l).collect(),
        source: tree.to_string(),
        tree,
    }
}

fn gadget(node: &PolicyNode, vector: Vec<i64>, width: &mut usize, rows: &mut Vec<(Vec<i64>, String)>) {
    match node {
        PolicyNode::Leaf(a) => rows.push((vector, a.clone())),
        PolicyNode::Or(children) => {
            for c in children {
                gadget(c, vector.clone(), width, rows);
            }
        }
        PolicyNode::And(children) => match children.len() {
            0 => {}
            1 => gadget(&children[0], vector, width, rows),
            n => {
                // n-ary AND folds left: ((c0 AND c1) AND c2) ...
                let left = if n == 2 { children[0].clone() } else { PolicyNode::And(children[..n - 1].to_vec()) };
                let col = *width;
                *width += 1;
                let mut left_vec = vector;
                left_vec.resize(col, 0);
                left_vec.push(1);
                let mut right_vec = vec![0; col];
                right_vec.push(-1);
                gadget(&left, left_vec, width, rows);
                gadget(&children[n - 1], right_vec, width, rows);
            }
        },
    }
}

/// Secret shares `v_i = M_i · v⃗` with `v⃗[0] = secret`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareSet {
    pub secret: Scalar,
    pub vector: Vec<Scalar>,
    pub shares: Vec<Scalar>,
}

pub fn share_with_vector(policy: &AccessPolicy, vector: Vec<Scalar>) -> ShareSet {
    assert_eq!(vector.len(), policy.cols(), "blinding vector width");
    let shares = policy
        .matrix
        .iter()
        .map(|row| row.iter().zip(&vector).map(|(m, v)| *m * v).sum())
        .collect();
    ShareSet { secret: vector[0], vector, shares }
}

pub fn share_secret<R: RngCore>(policy: &AccessPolicy, secret: Scalar, rng: &mut R) -> ShareSet {
    let mut vector = vec![secret];
    vector.extend((1..policy.cols()).map(|_| random_nonzero(rng)));
    share_with_vector(policy, vector)
}

/// Rows `P` and coefficients `j_i` with `Σ j_i M_i = (1, 0, …, 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionPlan {
    pub rows: Vec<usize>,
    pub coefficients: Vec<Scalar>,
}

impl ReconstructionPlan {
    pub fn combine(&self, shares: &[Scalar]) -> Scalar {
        self.rows.iter().zip(&self.coefficients).map(|(r, j)| shares[*r] * j).sum()
    }
}

fn rank(rows: &[&Vec<Scalar>]) -> usize {
    let mut m: Vec<Vec<Scalar>> = rows.iter().map(|r| (*r).clone()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][c].inverse().unwrap();
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let factor = m[i][c] * inv;
                for k in c..cols {
                    let sub = m[rank][k] * factor;
                    m[i][k] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `Σ_k x_k · basis_k = e1` for linearly independent `basis`.
fn solve_target(basis: &[&Vec<Scalar>]) -> Option<Vec<Scalar>> {
    let n = basis.first()?.len();
    let k = basis.len();
    // Augmented n × (k + 1) system; column j is basis row j.
    let mut a: Vec<Vec<Scalar>> = (0..n)
        .map(|r| {
            let mut row: Vec<Scalar> = basis.iter().map(|b| b[r]).collect();
            row.push(if r == 0 { Scalar::one() } else { Scalar::zero() });
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for c in 0..k {
        let Some(p) = (pivot_row..n).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(pivot_row, p);
        let inv = a[pivot_row][c].inverse().unwrap();
        for x in a[pivot_row].iter_mut() {
            *x *= inv;
        }
        for i in 0..n {
            if i != pivot_row && !a[i][c].is_zero() {
                let factor = a[i][c];
                for j in c..=k {
                    let sub = a[pivot_row][j] * factor;
                    a[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        pivot_row += 1;
    }
    if a[pivot_row..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    let mut x = vec![Scalar::zero(); k];
    for (r, c) in pivots.iter().enumerate() {
        x[*c] = a[r][k];
    }
    Some(x)
}

/// Gaussian elimination over the rows whose label is held. Rows are admitted
/// greedily in index order while they increase the rank; the first prefix
/// basis spanning the target vector is solved.
pub fn find_reconstruction(policy: &AccessPolicy, attrs: &BTreeSet<String>) -> Option<ReconstructionPlan> {
    let mut basis_idx: Vec<usize> = Vec::new();
    for (i, label) in policy.row_labels.iter().enumerate() {
        if !attrs.contains(label) {
            continue;
        }
        let mut candidate: Vec<&Vec<Scalar>> = basis_idx.iter().map(|&b| &policy.matrix[b]).collect();
        candidate.push(&policy.matrix[i]);
        if rank(&candidate) < candidate.len() {
            continue;
        }
        basis_idx.push(i);
        if let Some(coeffs) = solve_target(&candidate) {
            let (rows, coefficients) = basis_idx
                .iter()
                .zip(coeffs)
                .filter(|(_, c)| !c.is_zero())
                .map(|(r, c)| (*r, c))
                .unzip();
            return Some(ReconstructionPlan { rows, coefficients });
        }
    }
    None
}
