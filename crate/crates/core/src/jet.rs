//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar function around a
//! point, one coefficient per canonical (sorted) multi-index of total degree
//! at most the jet order. Mixed partials are therefore symmetric by
//! construction. Jets are generic over their coefficient type, so a
//! `Jet<Jet<f64>>` carries derivatives of an outer and an inner variable set
//! and reaches total differentiation order 6 while each level stays within
//! order 4.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Highest supported truncation order of a single jet level.
pub const MAX_ORDER: usize = 4;
/// Highest supported number of variables of a single jet level.
pub const MAX_VARS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("jet order {0} outside [1, {MAX_ORDER}]")]
    InvalidOrder(usize),
    #[error("{0} jet variables exceed the maximum of {MAX_VARS}")]
    TooManyVariables(usize),
    #[error("multi-index {index:?} invalid for {vars} variables")]
    InvalidMultiIndex { index: Vec<usize>, vars: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A primitive was evaluated outside its domain.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("domain error in {function}: argument {argument} (in `{expression}`)")]
pub struct DomainError {
    pub function: String,
    pub argument: f64,
    pub expression: String,
}

/// Number type that the expression evaluator and the geometry kernels run on.
///
/// Primitive functions assume their argument is inside the domain; callers
/// check [`Scalar::re`] first.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn from_f64(c: f64) -> Self;
    /// The plain real value (constant term at every nesting level).
    fn re(&self) -> f64;
    fn is_zero(&self) -> bool;
    /// `self += a * b`
    fn mul_acc(&mut self, a: &Self, b: &Self);
    fn scale(&self, c: f64) -> Self;
    fn recip(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn powf(&self, r: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;

    fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::from_f64(1.0);
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// Absolute value away from the kink at zero.
    fn abs(&self) -> Self {
        if self.re() < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn powf(&self, r: f64) -> Self {
        f64::powf(*self, r)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// Monomial bookkeeping shared by all jets with the same variable count and order.
#[derive(Debug)]
pub struct Layout {
    vars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// For each monomial `i`: the pairs `(j, k)` with `x^i * x^j = x^k`.
    products: Vec<Vec<(u32, u32)>>,
    /// `alpha!` for each monomial.
    factorials: Vec<f64>,
}

type LayoutCache = Mutex<HashMap<(usize, usize), Arc<Layout>>>;

impl Layout {
    /// Shared layout for `vars` variables truncated at total degree `order`.
    pub fn get(vars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<LayoutCache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((vars, order))
            .or_insert_with(|| Arc::new(Layout::build(vars, order)))
            .clone()
    }

    fn build(vars: usize, order: usize) -> Layout {
        let mut exponents = Vec::new();
        for degree in 0..=order {
            let mut current = vec![0u8; vars];
            push_degree(&mut exponents, &mut current, 0, degree);
        }
        let index: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let degree = |e: &[u8]| e.iter().map(|&v| v as usize).sum::<usize>();
        let products = exponents
            .iter()
            .map(|ei| {
                let di = degree(ei);
                exponents
                    .iter()
                    .enumerate()
                    .filter(|(_, ej)| di + degree(ej) <= order)
                    .map(|(j, ej)| {
                        let sum: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                        (j as u32, index[&sum] as u32)
                    })
                    .collect()
            })
            .collect();
        let factorials = exponents
            .iter()
            .map(|e| e.iter().map(|&v| factorial(v as usize)).product())
            .collect();
        Layout {
            vars,
            order,
            exponents,
            index,
            products,
            factorials,
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored coefficients, `C(vars + order, order)`.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exponents[i]
    }

    pub fn position(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    fn same(a: &Arc<Layout>, b: &Arc<Layout>) -> bool {
        Arc::ptr_eq(a, b) || (a.vars == b.vars && a.order == b.order)
    }
}

// Monomials of one degree, lexicographically descending in the first variable.
fn push_degree(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, var: usize, left: usize) {
    if var + 1 == current.len() {
        current[var] = left as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    if current.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in (0..=left).rev() {
        current[var] = e as u8;
        push_degree(out, current, var + 1, left - e);
    }
    current[var] = 0;
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Truncated Taylor expansion with coefficients of type `S`.
///
/// A jet without a layout is a pure constant; it combines with any other jet.
#[derive(Clone)]
pub struct Jet<S> {
    layout: Option<Arc<Layout>>,
    coeffs: Vec<S>,
}

pub type JetScalar = Jet<f64>;

impl<S: Scalar> Jet<S> {
    pub fn constant(value: S) -> Self {
        Jet {
            layout: None,
            coeffs: vec![value],
        }
    }

    /// Constant stored with a full layout.
    pub fn constant_in(layout: &Arc<Layout>, value: S) -> Self {
        let mut coeffs = vec![S::from_f64(0.0); layout.len()];
        coeffs[0] = value;
        Jet {
            layout: Some(layout.clone()),
            coeffs,
        }
    }

    /// Seed for variable `var`: value `value`, first derivative one along `var`.
    pub fn variable(layout: &Arc<Layout>, value: S, var: usize) -> Self {
        assert!(var < layout.vars, "variable {var} out of range");
        let mut jet = Self::constant_in(layout, value);
        if layout.order > 0 {
            let mut e = vec![0u8; layout.vars];
            e[var] = 1;
            jet.coeffs[layout.index[&e]] = S::from_f64(1.0);
        }
        jet
    }

    pub fn from_coefficients(layout: &Arc<Layout>, coeffs: Vec<S>) -> Self {
        assert_eq!(coeffs.len(), layout.len());
        Jet {
            layout: Some(layout.clone()),
            coeffs,
        }
    }

    pub fn layout(&self) -> Option<&Arc<Layout>> {
        self.layout.as_ref()
    }

    pub fn order(&self) -> usize {
        self.layout.as_ref().map_or(0, |l| l.order)
    }

    pub fn value(&self) -> &S {
        &self.coeffs[0]
    }

    pub fn coefficients(&self) -> &[S] {
        &self.coeffs
    }

    /// Taylor coefficient of the monomial with the given exponents.
    pub fn coefficient(&self, exponents: &[u8]) -> S {
        match &self.layout {
            None => {
                if exponents.iter().all(|&e| e == 0) {
                    self.coeffs[0].clone()
                } else {
                    S::from_f64(0.0)
                }
            }
            Some(l) => match l.position(exponents) {
                Some(i) => self.coeffs[i].clone(),
                None => S::from_f64(0.0),
            },
        }
    }

    /// Mixed partial derivative; `index` lists variables with repetition,
    /// e.g. `[0, 0, 2]` for the third derivative along `x0, x0, x2`.
    ///
    /// Orders beyond the truncation read as zero, so callers must size the jet.
    pub fn partial(&self, index: &[usize]) -> S {
        let Some(layout) = &self.layout else {
            return if index.is_empty() {
                self.coeffs[0].clone()
            } else {
                S::from_f64(0.0)
            };
        };
        debug_assert!(index.len() <= layout.order, "partial beyond jet order");
        let mut e = vec![0u8; layout.vars];
        for &v in index {
            e[v] += 1;
        }
        match layout.position(&e) {
            Some(i) => self.coeffs[i].scale(layout.factorials[i]),
            None => S::from_f64(0.0),
        }
    }

    /// Jet of the partial derivative along `var`, one order lower.
    pub fn derivative(&self, var: usize) -> Self {
        let Some(layout) = &self.layout else {
            return Jet::constant(S::from_f64(0.0));
        };
        if layout.order == 0 {
            return Jet::constant(S::from_f64(0.0));
        }
        let lower = Layout::get(layout.vars, layout.order - 1);
        let coeffs = (0..lower.len())
            .map(|i| {
                let mut e = lower.exponents[i].clone();
                let times = e[var] as f64 + 1.0;
                e[var] += 1;
                self.coeffs[layout.index[&e]].scale(times)
            })
            .collect();
        Jet {
            layout: Some(lower),
            coeffs,
        }
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let Some(layout) = &self.layout else {
            return self.clone();
        };
        if order >= layout.order {
            return self.clone();
        }
        let lower = Layout::get(layout.vars, order);
        // Graded ordering makes the lower layout a prefix.
        Jet {
            coeffs: self.coeffs[..lower.len()].to_vec(),
            layout: Some(lower),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Jet<T> {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    fn mul_scalar(&self, s: &S) -> Self {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    fn widen(&self, layout: &Arc<Layout>) -> Self {
        match &self.layout {
            Some(_) => self.clone(),
            None => Self::constant_in(layout, self.coeffs[0].clone()),
        }
    }

    /// `f(self)` given `f^(k)(a0)` for `k = 0..=order`, where `a0` is the value.
    fn compose(&self, derivs: impl FnOnce(&S, usize) -> Vec<S>) -> Self {
        let order = self.order();
        let d = derivs(&self.coeffs[0], order);
        let Some(layout) = &self.layout else {
            return Jet::constant(d[0].clone());
        };
        if order == 0 {
            return Jet::constant_in(layout, d[0].clone());
        }
        let mut h = self.clone();
        h.coeffs[0] = S::from_f64(0.0);
        let mut result = h.clone().mul_scalar(&d[1]);
        result.coeffs[0] = d[0].clone();
        let mut power = h.clone();
        let mut kfact = 1.0;
        for (k, dk) in d.iter().enumerate().skip(2) {
            kfact *= k as f64;
            power = power * h.clone();
            let term = power.mul_scalar(&dk.scale(1.0 / kfact));
            result += term;
        }
        result
    }
}

impl<S: Scalar> fmt::Debug for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.layout {
            None => write!(f, "Jet({:?})", self.coeffs[0]),
            Some(l) => {
                write!(f, "Jet[{} vars, order {}](", l.vars, l.order)?;
                for (i, c) in self.coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        write!(f, " {:?}:{:?}", l.exponents[i], c)?;
                    }
                }
                write!(f, " )")
            }
        }
    }
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<S: Scalar> AddAssign for Jet<S> {
    fn add_assign(&mut self, rhs: Self) {
        match (&self.layout, &rhs.layout) {
            (_, None) => self.coeffs[0] += rhs.coeffs[0].clone(),
            (None, Some(_)) => {
                let c = self.coeffs[0].clone();
                *self = rhs;
                self.coeffs[0] += c;
            }
            (Some(a), Some(b)) => {
                assert!(Layout::same(a, b), "jet layout mismatch");
                for (x, y) in self.coeffs.iter_mut().zip(rhs.coeffs) {
                    *x += y;
                }
            }
        }
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet {
            layout: self.layout,
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<S: Scalar> SubAssign for Jet<S> {
    fn sub_assign(&mut self, rhs: Self) {
        match (&self.layout, &rhs.layout) {
            (_, None) => self.coeffs[0] -= rhs.coeffs[0].clone(),
            (None, Some(_)) => {
                let c = self.coeffs[0].clone();
                *self = -rhs;
                self.coeffs[0] += c;
            }
            (Some(a), Some(b)) => {
                assert!(Layout::same(a, b), "jet layout mismatch");
                for (x, y) in self.coeffs.iter_mut().zip(rhs.coeffs) {
                    *x -= y;
                }
            }
        }
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = match (&self.layout, &rhs.layout) {
            (None, None) => return Jet::constant(self.coeffs[0].clone() * rhs.coeffs[0].clone()),
            (None, Some(_)) => return rhs.mul_scalar(&self.coeffs[0]),
            (_, None) => return self.mul_scalar(&rhs.coeffs[0]),
            (Some(a), Some(b)) => {
                assert!(Layout::same(a, b), "jet layout mismatch");
                Jet::constant_in(a, S::from_f64(0.0))
            }
        };
        let layout = out.layout.clone().expect("layout");
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for &(j, k) in &layout.products[i] {
                let b = &rhs.coeffs[j as usize];
                if !b.is_zero() {
                    out.coeffs[k as usize].mul_acc(a, b);
                }
            }
        }
        out
    }
}

impl<S: Scalar> Div for Jet<S> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        match rhs.layout {
            None => {
                let inv = rhs.coeffs[0].recip();
                self.mul_scalar(&inv)
            }
            Some(_) => self * rhs.recip(),
        }
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    fn from_f64(c: f64) -> Self {
        Jet::constant(S::from_f64(c))
    }

    fn re(&self) -> f64 {
        self.coeffs[0].re()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn mul_acc(&mut self, a: &Self, b: &Self) {
        let (Some(la), Some(lb)) = (&a.layout, &b.layout) else {
            let p = a.clone() * b.clone();
            *self += p;
            return;
        };
        assert!(Layout::same(la, lb), "jet layout mismatch");
        if self.layout.is_none() {
            *self = self.widen(la);
        }
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for &(j, k) in &la.products[i] {
                let y = &b.coeffs[j as usize];
                if !y.is_zero() {
                    self.coeffs[k as usize].mul_acc(x, y);
                }
            }
        }
    }

    fn scale(&self, c: f64) -> Self {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect(),
        }
    }

    fn recip(&self) -> Self {
        self.compose(|a0, order| {
            let r = a0.recip();
            let mut out = Vec::with_capacity(order + 1);
            let mut power = r.clone();
            let mut sign_fact = 1.0;
            out.push(r.clone());
            for k in 1..=order {
                power = power * r.clone();
                sign_fact *= -(k as f64);
                out.push(power.scale(sign_fact));
            }
            out
        })
    }

    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    fn exp(&self) -> Self {
        self.compose(|a0, order| vec![a0.exp(); order + 1])
    }

    fn ln(&self) -> Self {
        self.compose(|a0, order| {
            let r = a0.recip();
            let mut out = vec![a0.ln()];
            let mut power = S::from_f64(1.0);
            let mut coef = 1.0;
            for k in 1..=order {
                power = power * r.clone();
                out.push(power.scale(coef));
                coef *= -(k as f64);
            }
            out
        })
    }

    fn powf(&self, r: f64) -> Self {
        self.compose(|a0, order| {
            let base = a0.powf(r);
            let inv = a0.recip();
            let mut out = vec![base.clone()];
            let mut term = base;
            let mut falling = 1.0;
            for k in 1..=order {
                falling *= r - (k as f64 - 1.0);
                term = term * inv.clone();
                out.push(term.scale(falling));
            }
            out
        })
    }

    fn sin(&self) -> Self {
        self.compose(|a0, order| {
            let (s, c) = (a0.sin(), a0.cos());
            (0..=order)
                .map(|k| match k % 4 {
                    0 => s.clone(),
                    1 => c.clone(),
                    2 => -s.clone(),
                    _ => -c.clone(),
                })
                .collect()
        })
    }

    fn cos(&self) -> Self {
        self.compose(|a0, order| {
            let (s, c) = (a0.sin(), a0.cos());
            (0..=order)
                .map(|k| match k % 4 {
                    0 => c.clone(),
                    1 => -s.clone(),
                    2 => -c.clone(),
                    _ => s.clone(),
                })
                .collect()
        })
    }
}

/// Identity seeds at `point`: jet `i` has value `point[i]` and unit first
/// derivative along variable `i`.
pub fn lift(point: &[f64], order: usize) -> Result<Vec<JetScalar>, JetError> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(JetError::InvalidOrder(order));
    }
    if point.len() > MAX_VARS {
        return Err(JetError::TooManyVariables(point.len()));
    }
    let layout = Layout::get(point.len(), order);
    Ok(point
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(&layout, v, i))
        .collect())
}

/// Two-level seeds: the outer jet carries `outer_order` derivatives and every
/// outer coefficient is itself a jet of order `inner_order` in the same
/// variables. Reading inner derivatives of outer coefficients gives jets of
/// derivatives.
pub fn lift_nested(
    point: &[f64],
    outer_order: usize,
    inner_order: usize,
) -> Result<Vec<Jet<JetScalar>>, JetError> {
    let inner = lift(point, inner_order)?;
    if !(1..=MAX_ORDER).contains(&outer_order) {
        return Err(JetError::InvalidOrder(outer_order));
    }
    let outer = Layout::get(point.len(), outer_order);
    Ok(inner
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let mut jet = Jet::constant_in(&outer, v);
            let mut e = vec![0u8; point.len()];
            e[i] = 1;
            jet.coeffs[outer.index[&e]] = JetScalar::from_f64(1.0);
            jet
        })
        .collect())
}

/// Scalar field that can be evaluated on any [`Scalar`] type.
pub trait JetField {
    fn arity(&self) -> usize;
    fn eval<S: Scalar>(&self, point: &[S]) -> Result<S, DomainError>;
}

/// Mixed partial of `field` at `point` along `index` (variables with repetition).
pub fn derivative<F: JetField + ?Sized>(
    field: &F,
    point: &[f64],
    index: &[usize],
) -> Result<f64, JetError> {
    if index.len() > MAX_ORDER || index.iter().any(|&v| v >= point.len()) {
        return Err(JetError::InvalidMultiIndex {
            index: index.to_vec(),
            vars: point.len(),
        });
    }
    let seeds = lift(point, index.len().max(1))?;
    let value = field.eval(&seeds)?;
    Ok(value.partial(index))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Poly;
    impl JetField for Poly {
        fn arity(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, p: &[S]) -> Result<S, DomainError> {
            Ok(p[0].clone() * p[1].clone())
        }
    }

    struct BerwaldMoor3;
    impl JetField for BerwaldMoor3 {
        fn arity(&self) -> usize {
            3
        }
        fn eval<S: Scalar>(&self, p: &[S]) -> Result<S, DomainError> {
            Ok((p[0].clone() * p[1].clone() * p[2].clone()).powf(2.0 / 3.0))
        }
    }

    struct Const;
    impl JetField for Const {
        fn arity(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, _: &[S]) -> Result<S, DomainError> {
            Ok(S::from_f64(4.5))
        }
    }

    #[test]
    fn layout_sizes() {
        assert_eq!(Layout::get(1, 4).len(), 5);
        assert_eq!(Layout::get(4, 4).len(), 70);
        assert_eq!(Layout::get(8, 4).len(), 495);
        assert_eq!(Layout::get(0, 3).len(), 1);
    }

    #[test]
    fn lift_seeds() {
        let j = lift(&[3.0], 2).unwrap();
        assert_eq!(*j[0].value(), 3.0);
        assert_eq!(j[0].partial(&[0]), 1.0);
        assert_eq!(j[0].partial(&[0, 0]), 0.0);

        let j = lift(&[1.0, 2.0], 1).unwrap();
        for (i, jet) in j.iter().enumerate() {
            for k in 0..2 {
                assert_eq!(jet.partial(&[k]), if i == k { 1.0 } else { 0.0 });
            }
        }

        let j = lift(&[1.0, 2.0, 3.0, 4.0], 4).unwrap();
        assert_eq!(j[0].coefficients().len(), 70);
        assert!(lift(&[1.0], 0).is_err());
        assert!(lift(&[1.0], 5).is_err());
    }

    #[test]
    fn bilinear_and_constant() {
        assert_eq!(derivative(&Poly, &[5.0, 7.0], &[0, 1]).unwrap(), 1.0);
        assert_eq!(derivative(&Poly, &[5.0, 7.0], &[1, 0]).unwrap(), 1.0);
        for idx in [&[0usize][..], &[0, 1], &[1, 1, 0], &[0, 0, 1, 1]] {
            assert_eq!(derivative(&Const, &[1.0, 2.0], idx).unwrap(), 0.0);
        }
    }

    #[test]
    fn berwald_moor_second_derivative() {
        // Frozen from central differences with Richardson extrapolation.
        let d = derivative(&BerwaldMoor3, &[1.0, 1.0, 1.0], &[0, 0]).unwrap();
        assert!((d + 2.0 / 9.0).abs() < 1e-14, "{d}");
        let d = derivative(&BerwaldMoor3, &[1.0, 1.0, 1.0], &[0, 1]).unwrap();
        assert!((d - 4.0 / 9.0).abs() < 1e-14, "{d}");
    }

    #[test]
    fn derivative_of_jet_lowers_order() {
        let j = lift(&[0.5, 2.0], 4).unwrap();
        let f = (j[0].clone() * j[1].clone()).exp();
        let df = f.derivative(0);
        assert_eq!(df.order(), 3);
        for idx in [&[][..], &[0], &[1, 1], &[0, 1, 1]] {
            let mut full = vec![0];
            full.extend_from_slice(idx);
            assert!((df.partial(idx) - f.partial(&full)).abs() < 1e-12);
        }
    }

    #[test]
    fn nested_reaches_order_six() {
        // f = x^6: sixth derivative 720 from outer order 4 and inner order 2.
        let x = lift_nested(&[1.3], 4, 2).unwrap();
        let f = x[0].powi(6);
        let inner2 = f.map(|c| c.partial(&[0, 0]));
        let d6 = inner2.partial(&[0, 0, 0, 0]);
        assert!((d6 - 720.0).abs() < 1e-9, "{d6}");
        // x^(1/2) with powf: fifth derivative
        let g = x[0].powf(0.5);
        let d5 = g.map(|c| c.partial(&[0])).partial(&[0, 0, 0, 0]);
        let a: f64 = 1.3;
        let exact = 0.5 * -0.5 * -1.5 * -2.5 * -3.5 * a.powf(0.5 - 5.0);
        assert!((d5 - exact).abs() < 1e-10 * exact.abs(), "{d5} {exact}");
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = lift(&[0.7], 4).unwrap().remove(0);
        let checks: Vec<(JetScalar, [f64; 5])> = vec![
            (x.exp(), [0.7f64.exp(); 5]),
            (
                x.ln(),
                [0.7f64.ln(), 1.0 / 0.7, -1.0 / 0.49, 2.0 / 0.343, -6.0 / 0.2401],
            ),
            (
                x.sin(),
                [0.7f64.sin(), 0.7f64.cos(), -0.7f64.sin(), -0.7f64.cos(), 0.7f64.sin()],
            ),
            (
                x.recip(),
                [1.0 / 0.7, -1.0 / 0.49, 2.0 / 0.343, -6.0 / 0.2401, 24.0 / 0.16807],
            ),
        ];
        for (jet, expect) in checks {
            for (k, e) in expect.iter().enumerate() {
                let got = jet.partial(&vec![0; k]);
                assert!((got - e).abs() < 1e-12 * e.abs().max(1.0), "k={k} {got} {e}");
            }
        }
    }
}
