//! Exact arithmetic in cyclotomic fields.
//!
//! A [`Cyclotomic`] stores a value as a rational combination of the powers
//! `1, z, ..., z^(m-1)` of the primitive `m`-th root of unity `z = exp(2 pi i / m)`.
//! That representation is not unique; equality and zero tests reduce modulo the
//! cyclotomic polynomial `Phi_m`, whose power basis is a Q-basis of Q(z).
//! Rationals are the `m = 1` case and take a fast path everywhere.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

#[derive(Clone, Debug)]
pub struct Cyclotomic {
    order: usize,
    coeffs: Vec<Rational>,
}

impl Cyclotomic {
    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        Self { order: 1, coeffs: vec![r] }
    }

    pub fn from_integer(v: i128) -> Self {
        Self::from_rational(Rational::from_integer(v))
    }

    /// `z_order^power`.
    pub fn root_of_unity(order: usize, power: i64) -> Self {
        assert!(order > 0, "root of unity of order 0");
        let mut coeffs = vec![Rational::zero(); order];
        coeffs[power.rem_euclid(order as i64) as usize] = Rational::one();
        Self { order, coeffs }
    }

    /// `sum_k coeffs[k] z_order^k`.
    pub fn from_coefficients(order: usize, coeffs: Vec<Rational>) -> Self {
        assert!(order > 0 && coeffs.len() == order, "need {order} coefficients, got {}", coeffs.len());
        Self { order, coeffs }
    }

    /// Coefficients over `1, z, ..., z^(order-1)`, not reduced.
    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_rational_form(&self) -> bool {
        self.order == 1
    }

    /// Re-expresses the value over `z_target`, where `order` divides `target`.
    pub fn lift(&self, target: usize) -> Self {
        assert_eq!(target % self.order, 0, "cannot lift order {} to {target}", self.order);
        if target == self.order {
            return self.clone();
        }
        let step = target / self.order;
        let mut coeffs = vec![Rational::zero(); target];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k * step] = *c;
        }
        Self { order: target, coeffs }
    }

    /// Coefficients over the power basis `1, z, ..., z^(phi(m)-1)`.
    pub fn canonical(&self) -> Vec<Rational> {
        if self.order == 1 {
            return self.coeffs.clone();
        }
        if let Some((p, denom)) = self.reduced_integer() {
            return p.into_iter().map(|v| ratio(v, denom)).collect();
        }
        let (deg, lower) = reduction_terms(self.order);
        let mut p = self.coeffs.clone();
        for i in (deg..p.len()).rev() {
            let c = p[i];
            if c.is_zero() {
                continue;
            }
            p[i] = Rational::zero();
            for &(j, a) in lower.iter() {
                p[i - deg + j] -= c * a;
            }
        }
        p.truncate(deg);
        p
    }

    /// Canonical coefficients as integer numerators over one common
    /// denominator; `None` on `i128` overflow.
    fn reduced_integer(&self) -> Option<(Vec<i128>, i128)> {
        let (deg, lower) = reduction_terms(self.order);
        let denom = self.coeffs.iter().try_fold(1i128, |acc, c| {
            let d = *c.denom();
            if d == 1 || d == acc {
                return Some(acc);
            }
            acc.checked_mul(d / acc.gcd(&d))
        })?;
        let mut p = self
            .coeffs
            .iter()
            .map(|c| if *c.denom() == denom { Some(*c.numer()) } else { c.numer().checked_mul(denom / c.denom()) })
            .collect::<Option<Vec<i128>>>()?;
        for i in (deg..p.len()).rev() {
            let c = p[i];
            if c == 0 {
                continue;
            }
            p[i] = 0;
            for &(j, a) in lower.iter() {
                let t = &mut p[i - deg + j];
                *t = t.checked_sub(c.checked_mul(a)?)?;
            }
        }
        p.truncate(deg);
        Some((p, denom))
    }

    pub fn is_zero(&self) -> bool {
        if self.order == 1 {
            return self.coeffs[0].is_zero();
        }
        if self.coeffs.iter().all(Zero::is_zero) {
            return true;
        }
        match self.reduced_integer() {
            Some((p, _)) => p.iter().all(|v| *v == 0),
            None => self.canonical().iter().all(Zero::is_zero),
        }
    }

    pub fn to_rational(&self) -> Option<Rational> {
        if self.order == 1 {
            return Some(self.coeffs[0]);
        }
        if let Some((p, denom)) = self.reduced_integer() {
            return p[1..].iter().all(|v| *v == 0).then(|| ratio(p[0], denom));
        }
        let c = self.canonical();
        c[1..].iter().all(Zero::is_zero).then(|| c[0])
    }

    /// Same value, expressed as a plain rational when it is one.
    /// Rational values drop to order 1; others keep their order with
    /// coefficients reduced modulo `Phi_order`, which makes later reductions cheap.
    pub fn simplified(self) -> Self {
        if self.order == 1 {
            return self;
        }
        let Some((p, denom)) = self.reduced_integer() else {
            return match self.to_rational() {
                Some(r) => Self::from_rational(r),
                None => self,
            };
        };
        if p[1..].iter().all(|v| *v == 0) {
            return Self::from_rational(ratio(p[0], denom));
        }
        let mut coeffs: Vec<Rational> = p.into_iter().map(|v| ratio(v, denom)).collect();
        coeffs.resize(self.order, Rational::zero());
        Self { order: self.order, coeffs }
    }

    pub fn conj(&self) -> Self {
        if self.order == 1 {
            return self.clone();
        }
        let m = self.order;
        let mut coeffs = vec![Rational::zero(); m];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(m - k) % m] = *c;
        }
        Self { order: m, coeffs }
    }

    pub fn scale(&self, r: Rational) -> Self {
        if r.is_one() {
            return self.clone();
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.is_zero() { Rational::zero() } else { mul_small(c, &r).unwrap_or_else(|| c * r) })
            .collect();
        Self { order: self.order, coeffs }
    }

    pub fn to_complex(&self) -> Complex64 {
        let m = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / m;
                Complex64::from_polar(ratio_to_f64(c), angle)
            })
            .sum()
    }

    /// Real part as `f64`. Values in rational form convert directly; others
    /// are summed numerically over their roots of unity.
    pub fn to_f64(&self) -> f64 {
        if self.order == 1 {
            return ratio_to_f64(&self.coeffs[0]);
        }
        self.to_complex().re
    }

    /// `"p/q"` for rationals, otherwise `"zeta<m>:[c0,c1,...]"` over the reduced power basis.
    pub fn to_exact_string(&self) -> String {
        match self.to_rational() {
            Some(r) => format!("{}/{}", r.numer(), r.denom()),
            None => {
                let parts: Vec<String> =
                    self.canonical().iter().map(|c| format!("{}/{}", c.numer(), c.denom())).collect();
                format!("zeta{}:[{}]", self.order, parts.join(","))
            }
        }
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        if a.order == b.order {
            return (a.clone(), b.clone());
        }
        let l = a.order.lcm(&b.order);
        (a.lift(l), b.lift(l))
    }
}

pub(crate) fn ratio_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.order == 1 && other.order == 1 {
            return self.coeffs[0] == other.coeffs[0];
        }
        (self - other).is_zero()
    }
}

impl Eq for Cyclotomic {}

impl From<Rational> for Cyclotomic {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

impl<'a> Add<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &Cyclotomic) -> Cyclotomic {
        if self.order == 1 && rhs.order == 1 {
            return Cyclotomic::from_rational(self.coeffs[0] + rhs.coeffs[0]);
        }
        let (mut a, b) = Cyclotomic::common(self, rhs);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        a
    }
}

impl<'a> Sub<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &Cyclotomic) -> Cyclotomic {
        self + &(-rhs)
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl<'a> Mul<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        if rhs.order == 1 {
            return self.scale(rhs.coeffs[0]);
        }
        if self.order == 1 {
            return rhs.scale(self.coeffs[0]);
        }
        let (a, b) = Cyclotomic::common(self, rhs);
        let m = a.order;
        let mut coeffs = vec![Rational::zero(); m];
        for (i, x) in a.coeffs.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.coeffs.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                coeffs[(i + j) % m] += x * y;
            }
        }
        Cyclotomic { order: m, coeffs }
    }
}

impl AddAssign<&Cyclotomic> for Cyclotomic {
    fn add_assign(&mut self, rhs: &Cyclotomic) {
        if self.order == 1 && rhs.order == 1 {
            self.coeffs[0] += rhs.coeffs[0];
        } else if self.order == rhs.order {
            for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *x += y;
            }
        } else {
            *self = &*self + rhs;
        }
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.to_rational() {
            return write!(f, "{r}");
        }
        let mut first = true;
        for (k, c) in self.canonical().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let coef = if mag.is_one() && k > 0 { String::new() } else { mag.to_string() };
            let power = match k {
                0 => String::new(),
                1 => format!("z{}", self.order),
                _ => format!("z{}^{k}", self.order),
            };
            let joiner = if !coef.is_empty() && !power.is_empty() { "*" } else { "" };
            write!(f, "{sign}{coef}{joiner}{power}")?;
            first = false;
        }
        Ok(())
    }
}

/// `n / d` reduced, using 64-bit gcd when both fit.
pub fn ratio(n: i128, d: i128) -> Rational {
    match (i64::try_from(n), i64::try_from(d)) {
        (Ok(a), Ok(b)) if b != 0 && a != i64::MIN && b != i64::MIN => {
            let g = a.gcd(&b) * b.signum();
            Ratio::new_raw((a / g) as i128, (b / g) as i128)
        }
        _ => Rational::new(n, d),
    }
}

/// Product of two reduced rationals in 64-bit arithmetic, `None` when any part does not fit.
fn mul_small(a: &Rational, b: &Rational) -> Option<Rational> {
    let (an, ad) = (i64::try_from(*a.numer()).ok()?, i64::try_from(*a.denom()).ok()?);
    let (bn, bd) = (i64::try_from(*b.numer()).ok()?, i64::try_from(*b.denom()).ok()?);
    let g1 = an.gcd(&bd);
    let g2 = bn.gcd(&ad);
    let n = (an / g1).checked_mul(bn / g2)?;
    let d = (ad / g2).checked_mul(bd / g1)?;
    Some(Ratio::new_raw(n as i128, d as i128))
}

type Reduction = (usize, Arc<Vec<(usize, i128)>>);

/// Degree of `Phi_m` and its nonzero lower-order terms (`Phi_m` is monic and usually sparse).
fn reduction_terms(m: usize) -> Reduction {
    static CACHE: OnceLock<Mutex<HashMap<usize, Reduction>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("reduction cache poisoned").get(&m) {
        return hit.clone();
    }
    let phi = cyclotomic_polynomial(m);
    let deg = phi.len() - 1;
    let lower = phi[..deg].iter().enumerate().filter(|(_, a)| **a != 0).map(|(j, a)| (j, *a)).collect();
    let entry = (deg, Arc::new(lower));
    cache.lock().expect("reduction cache poisoned").insert(m, entry.clone());
    entry
}

/// Integer coefficients of `Phi_m`, lowest degree first.
pub fn cyclotomic_polynomial(m: usize) -> Vec<i128> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<i128>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().expect("cyclotomic cache poisoned").get(&m) {
        return p.clone();
    }
    // Phi_m = (x^m - 1) / prod_{d | m, d < m} Phi_d
    let mut num = vec![0i128; m + 1];
    num[0] = -1;
    num[m] = 1;
    for d in (1..m).filter(|d| m.is_multiple_of(*d)) {
        num = divide_monic(&num, &cyclotomic_polynomial(d));
    }
    cache.lock().expect("cyclotomic cache poisoned").insert(m, num.clone());
    num
}

fn divide_monic(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![0i128; num.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        for (j, &a) in den.iter().enumerate() {
            rem[i + j] -= c * a;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    quot
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(5), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn sum_of_roots_vanishes() {
        for m in 2..=24 {
            let mut s = Cyclotomic::zero();
            for k in 0..m as i64 {
                s += &Cyclotomic::root_of_unity(m, k);
            }
            assert!(s.is_zero(), "m = {m}");
        }
    }

    #[test]
    fn rational_detection() {
        // z4^2 = -1, z6 + z6^-1 = 1, z3 + z3^2 = -1
        assert_eq!(Cyclotomic::root_of_unity(4, 2).to_rational(), Some(r(-1, 1)));
        let z6 = &Cyclotomic::root_of_unity(6, 1) + &Cyclotomic::root_of_unity(6, 5);
        assert_eq!(z6.to_rational(), Some(r(1, 1)));
        let z3 = &Cyclotomic::root_of_unity(3, 1) + &Cyclotomic::root_of_unity(3, 2);
        assert_eq!(z3, Cyclotomic::from_integer(-1));
        // z12 + z12^11 = sqrt(3) is not rational
        let s3 = &Cyclotomic::root_of_unity(12, 1) + &Cyclotomic::root_of_unity(12, 11);
        assert_eq!(s3.to_rational(), None);
        assert!(((&s3 * &s3).to_rational().unwrap() - r(3, 1)).is_zero());
    }

    #[test]
    fn mixed_orders_and_conjugation() {
        let z4 = Cyclotomic::root_of_unity(4, 1);
        let z6 = Cyclotomic::root_of_unity(6, 1);
        let prod = &z4 * &z6;
        assert_eq!(prod, Cyclotomic::root_of_unity(12, 5));
        assert_eq!(&z4 * &z4.conj(), Cyclotomic::one());
        let c = prod.to_complex();
        let expected = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 5.0 / 12.0);
        assert!((c - expected).norm() < 1e-14);
        assert_eq!(Cyclotomic::root_of_unity(6, 3).lift(12), Cyclotomic::from_integer(-1));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Cyclotomic::from_rational(r(-3, 4)).to_exact_string(), "-3/4");
        assert_eq!(Cyclotomic::from_integer(20).to_exact_string(), "20/1");
        let s = &Cyclotomic::root_of_unity(12, 1) + &Cyclotomic::root_of_unity(12, 11);
        assert!(s.to_exact_string().starts_with("zeta12:["));
        assert_eq!(Cyclotomic::root_of_unity(4, 1).to_string(), "z4");
    }
}
