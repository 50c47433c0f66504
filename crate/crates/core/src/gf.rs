//! Prime fields `F_p` and quadratic extensions `F_p[x]/(x^2 - delta)`.
//!
//! Elements are plain `(a, b)` pairs standing for `a + b*x`; every operation
//! goes through the owning [`FieldSpec`], which validates residues and keeps
//! arithmetic from silently mixing fields. Element ordering is lexicographic
//! on `(a, b)` and is used wherever a canonical choice between candidates is
//! needed (roots of unity, square roots, enumeration).

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Largest accepted modulus. Keeps `p^2` and every intermediate product in range.
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported maximum {MAX_MODULUS}")]
    ModulusTooLarge(u64),
    #[error("{delta} is a square mod {p}; the quotient ring is not a field")]
    DeltaIsSquare { p: u64, delta: u64 },
    #[error("quadratic extensions over characteristic 2 are not supported")]
    EvenCharacteristicExtension,
    #[error("division by zero")]
    DivisionByZero,
    #[error("no primitive {n}-th root of unity in a field of order {order}")]
    NoSuchRoot { n: u64, order: u64 },
    #[error("element ({a}, {b}) is not a member of {field}")]
    NotInField { a: u64, b: u64, field: FieldSpec },
}

/// A field description: `F_p` when `delta` is absent, otherwise `F_{p^2}`
/// realised as `F_p[x]/(x^2 - delta)` with `delta` a non-square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u64,
    delta: Option<u64>,
}

/// `a + b*x`; `b == 0` for prime-field elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement {
    pub a: u64,
    pub b: u64,
}

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement { a: 0, b: 0 };
    pub const ONE: FieldElement = FieldElement { a: 1, b: 0 };

    pub const fn new(a: u64, b: u64) -> Self {
        FieldElement { a, b }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == 0 {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}x", self.a, self.b)
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.delta {
            None => write!(f, "F_{}", self.p),
            Some(d) => write!(f, "F_{}[x]/(x^2-{})", self.p, d),
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the base set is exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &b in &BASES {
        let mut x = pow_mod(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `q >= 2` with `q ≡ 1 (mod n)`.
pub fn smallest_prime_congruent_one(n: u64) -> u64 {
    let n = n.max(1);
    let mut q = n + 1;
    while !is_prime(q) {
        q += n;
    }
    q
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldSpec {
    /// Validates `p` (and `delta`, when given) and returns the field.
    pub fn new(p: u64, delta: Option<u64>) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if p > MAX_MODULUS {
            return Err(GfError::ModulusTooLarge(p));
        }
        let delta = match delta {
            None => None,
            Some(_) if p == 2 => return Err(GfError::EvenCharacteristicExtension),
            Some(raw) => {
                let d = raw % p;
                // Euler's criterion; zero counts as a square.
                if d == 0 || pow_mod(d, (p - 1) / 2, p) == 1 {
                    return Err(GfError::DeltaIsSquare { p, delta: d });
                }
                Some(d)
            }
        };
        Ok(FieldSpec { p, delta })
    }

    pub fn prime(p: u64) -> Result<Self, GfError> {
        Self::new(p, None)
    }

    pub fn extension(p: u64, delta: u64) -> Result<Self, GfError> {
        Self::new(p, Some(delta))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn delta(&self) -> Option<u64> {
        self.delta
    }

    pub fn degree(&self) -> u32 {
        if self.delta.is_some() {
            2
        } else {
            1
        }
    }

    /// Field order `q = p^degree`.
    pub fn order(&self) -> u64 {
        self.p.pow(self.degree())
    }

    /// The subfield `F_p` this field is built over.
    pub fn base(&self) -> FieldSpec {
        FieldSpec {
            p: self.p,
            delta: None,
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    /// Embeds an integer (reduced mod p) into the prime subfield.
    pub fn from_u64(&self, v: u64) -> FieldElement {
        FieldElement::new(v % self.p, 0)
    }

    /// Embeds a signed integer (reduced mod p) into the prime subfield.
    pub fn from_i64(&self, v: i64) -> FieldElement {
        let r = v.rem_euclid(self.p as i64) as u64;
        FieldElement::new(r, 0)
    }

    /// Checked constructor: both residues must already be reduced.
    pub fn element(&self, a: u64, b: u64) -> Result<FieldElement, GfError> {
        let x = FieldElement::new(a, b);
        if self.contains(x) {
            Ok(x)
        } else {
            Err(GfError::NotInField {
                a,
                b,
                field: *self,
            })
        }
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        x.a < self.p && (x.b < self.p) && (self.delta.is_some() || x.b == 0)
    }

    pub fn add(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement::new((x.a + y.a) % p, (x.b + y.b) % p)
    }

    pub fn neg(&self, x: FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement::new((p - x.a) % p, (p - x.b) % p)
    }

    pub fn sub(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        let p = self.p;
        match self.delta {
            None => FieldElement::new(mul_mod(x.a, y.a, p), 0),
            Some(delta) => {
                // (a + bx)(c + dx) = (ac + bd*delta) + (ad + bc)x
                let ac = mul_mod(x.a, y.a, p);
                let bd = mul_mod(x.b, y.b, p);
                let ad = mul_mod(x.a, y.b, p);
                let bc = mul_mod(x.b, y.a, p);
                FieldElement::new((ac + mul_mod(bd, delta, p)) % p, (ad + bc) % p)
            }
        }
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement, GfError> {
        if x.is_zero() {
            return Err(GfError::DivisionByZero);
        }
        let p = self.p;
        match self.delta {
            None => Ok(FieldElement::new(pow_mod(x.a, p - 2, p), 0)),
            Some(delta) => {
                // (a + bx)^-1 = (a - bx) / (a^2 - b^2 delta); the norm is nonzero
                // because delta is a non-square.
                let norm = (mul_mod(x.a, x.a, p) + p - mul_mod(mul_mod(x.b, x.b, p), delta, p)) % p;
                let norm_inv = pow_mod(norm, p - 2, p);
                Ok(FieldElement::new(
                    mul_mod(x.a, norm_inv, p),
                    mul_mod((p - x.b) % p, norm_inv, p),
                ))
            }
        }
    }

    pub fn div(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(x, self.inv(y)?))
    }

    pub fn pow(&self, x: FieldElement, mut exp: u64) -> FieldElement {
        let mut base = x;
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn sum<I: IntoIterator<Item = FieldElement>>(&self, items: I) -> FieldElement {
        items
            .into_iter()
            .fold(self.zero(), |acc, x| self.add(acc, x))
    }

    /// Position of `x` in the canonical (lexicographic) enumeration.
    pub fn index_of(&self, x: FieldElement) -> u64 {
        match self.delta {
            None => x.a,
            Some(_) => x.a * self.p + x.b,
        }
    }

    /// Inverse of [`FieldSpec::index_of`].
    pub fn element_at(&self, index: u64) -> FieldElement {
        match self.delta {
            None => FieldElement::new(index, 0),
            Some(_) => FieldElement::new(index / self.p, index % self.p),
        }
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |i| self.element_at(i))
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, x: FieldElement) -> Option<u64> {
        if x.is_zero() {
            return None;
        }
        let mut n = self.order() - 1;
        for f in prime_factors(n) {
            while n.is_multiple_of(f) && self.pow(x, n / f) == self.one() {
                n /= f;
            }
        }
        Some(n)
    }

    /// The first element, in canonical order, of multiplicative order exactly `n`.
    pub fn find_root_of_unity(&self, n: u64) -> Result<FieldElement, GfError> {
        let group = self.order() - 1;
        if n == 0 || !group.is_multiple_of(n) {
            return Err(GfError::NoSuchRoot {
                n,
                order: self.order(),
            });
        }
        self.elements()
            .skip(1)
            .find(|&x| self.multiplicative_order(x) == Some(n))
            .ok_or(GfError::NoSuchRoot {
                n,
                order: self.order(),
            })
    }

    pub fn is_square(&self, x: FieldElement) -> bool {
        self.sqrt(x).is_some()
    }

    /// A square root of `x`, choosing the canonically smaller of the two roots.
    pub fn sqrt(&self, x: FieldElement) -> Option<FieldElement> {
        if x.is_zero() {
            return Some(x);
        }
        match self.delta {
            None => {
                let r = tonelli_shanks(x.a, self.p)?;
                Some(FieldElement::new(r.min((self.p - r) % self.p), 0))
            }
            Some(_) => self.elements().find(|&r| self.mul(r, r) == x),
        }
    }
}

/// Square root of `n` modulo an odd prime (or 2); `None` for non-residues.
fn tonelli_shanks(n: u64, p: u64) -> Option<u64> {
    let n = n % p;
    if p == 2 || n == 0 {
        return Some(n);
    }
    if pow_mod(n, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn make_fields() {
        let f5 = f(5);
        assert_eq!((f5.p(), f5.degree(), f5.delta()), (5, 1, None));
        let f49 = FieldSpec::extension(7, 5).unwrap();
        assert_eq!((f49.degree(), f49.order()), (2, 49));
        assert_eq!(FieldSpec::prime(6), Err(GfError::NotPrime(6)));
        assert_eq!(
            FieldSpec::extension(7, 2),
            Err(GfError::DeltaIsSquare { p: 7, delta: 2 })
        );
        assert_eq!(
            FieldSpec::extension(2, 1),
            Err(GfError::EvenCharacteristicExtension)
        );
    }

    #[test]
    fn five_is_a_non_square_mod_seven() {
        let squares: Vec<u64> = (1..7).map(|r| r * r % 7).collect();
        assert!(!squares.contains(&5));
        assert!(FieldSpec::extension(7, 5).is_ok());
    }

    #[test]
    fn basic_arithmetic() {
        let f5 = f(5);
        assert_eq!(f5.add(f5.from_u64(3), f5.from_u64(4)), f5.from_u64(2));
        assert_eq!(f5.inv(f5.from_u64(2)).unwrap(), f5.from_u64(3));
        assert_eq!(f5.inv(f5.zero()), Err(GfError::DivisionByZero));
        let f49 = FieldSpec::extension(7, 5).unwrap();
        let x = FieldElement::new(0, 1);
        assert_eq!(f49.mul(x, x), FieldElement::new(5, 0));
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(f(11).find_root_of_unity(5).unwrap(), f(11).from_u64(3));
        assert_eq!(f(5).find_root_of_unity(4).unwrap(), f(5).from_u64(2));
        assert!(matches!(
            f(5).find_root_of_unity(3),
            Err(GfError::NoSuchRoot { n: 3, .. })
        ));
        assert_eq!(f(7).find_root_of_unity(6).unwrap(), f(7).from_u64(3));
        assert_eq!(f(5).find_root_of_unity(1).unwrap(), f(5).one());
    }

    #[test]
    fn square_roots() {
        assert_eq!(f(5).sqrt(f(5).from_u64(4)), Some(f(5).from_u64(2)));
        assert_eq!(f(7).sqrt(f(7).from_u64(5)), None);
        let f49 = FieldSpec::extension(7, 5).unwrap();
        assert_eq!(
            f49.sqrt(FieldElement::new(5, 0)),
            Some(FieldElement::new(0, 1))
        );
    }

    #[test]
    fn tonelli_shanks_matches_exhaustive_search() {
        for p in [2u64, 3, 5, 7, 11, 13, 17, 29, 41, 97, 113] {
            let fp = f(p);
            for x in fp.elements() {
                let brute = fp.elements().find(|&r| fp.mul(r, r) == x);
                assert_eq!(fp.sqrt(x), brute, "p={p} x={x}");
            }
        }
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(3_215_031_751));
        assert_eq!(smallest_prime_congruent_one(5), 11);
        assert_eq!(smallest_prime_congruent_one(4), 5);
        assert_eq!(smallest_prime_congruent_one(8), 17);
        assert_eq!(smallest_prime_congruent_one(3), 7);
    }

    #[test]
    fn element_validation() {
        let f5 = f(5);
        assert!(f5.element(4, 0).is_ok());
        assert!(f5.element(5, 0).is_err());
        assert!(f5.element(1, 1).is_err());
        assert_eq!(f5.from_i64(-2), f5.from_u64(3));
    }
}
