//! Reduction of cyclotomic data modulo a prime `p = 1 (mod M)`.
//!
//! The map `zeta_M -> omega` into `F_p` is a ring homomorphism on elements
//! whose denominators are prime to `p`, and it is injective on `M`-th roots of
//! unity. Hence for a diagonalisable matrix with `M`-th root eigenvalues the
//! reduced characteristic polynomial recovers the eigenvalue multiset exactly.

use crate::cyclo::CycloElt;
use crate::exactla::Mat;
use crate::util::{is_prime_u64, mul_mod, pow_mod, prime_factors};

#[derive(Debug, Clone)]
pub struct ModP {
    pub p: u64,
    pub order: u64,
    pub omega: u64,
}

impl ModP {
    /// Smallest prime `p > 2^30` with `p = 1 (mod order)` and a primitive `order`-th root.
    pub fn new(order: u64) -> ModP {
        Self::with_floor(order, 1 << 30)
    }

    pub fn with_floor(order: u64, floor: u64) -> ModP {
        let mut p = (floor / order + 1) * order + 1;
        while !is_prime_u64(p) {
            p += order;
        }
        let q = prime_factors(order);
        let cof = (p - 1) / order;
        let mut g = 2;
        loop {
            let w = pow_mod(g, cof, p);
            if q.iter().all(|&r| pow_mod(w, order / r, p) != 1) {
                return ModP { p, order, omega: w };
            }
            g += 1;
        }
    }

    pub fn zeta_image(&self, n: u32) -> u64 {
        assert_eq!(self.order % n as u64, 0, "conductor must divide the root order");
        pow_mod(self.omega, self.order / n as u64, self.p)
    }

    pub fn omega_pow(&self, k: i64) -> u64 {
        pow_mod(self.omega, k.rem_euclid(self.order as i64) as u64, self.p)
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn inv(&self, a: u64) -> u64 {
        pow_mod(a, self.p - 2, self.p)
    }

    pub fn reduce(&self, e: &CycloElt) -> Option<u64> {
        e.reduce_mod(self.p, self.zeta_image(e.field().conductor()))
    }

    /// Row-major reduction of a matrix.
    pub fn reduce_mat(&self, m: &Mat) -> Option<Vec<u64>> {
        let z = self.zeta_image(m.field().conductor());
        m.entries().iter().map(|e| e.reduce_mod(self.p, z)).collect()
    }

    pub fn matmul(&self, a: &[u64], b: &[u64], n: usize) -> Vec<u64> {
        let p = self.p as u128;
        let mut out = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: u128 = 0;
                for k in 0..n {
                    acc += a[i * n + k] as u128 * b[k * n + j] as u128;
                }
                out[i * n + j] = (acc % p) as u64;
            }
        }
        out
    }

    pub fn rank(&self, a: &[u64], rows: usize, cols: usize) -> usize {
        let mut m = a.to_vec();
        let mut rank = 0;
        for c in 0..cols {
            let Some(piv) = (rank..rows).find(|&r| m[r * cols + c] != 0) else {
                continue;
            };
            for k in 0..cols {
                m.swap(rank * cols + k, piv * cols + k);
            }
            let inv = self.inv(m[rank * cols + c]);
            for r in 0..rows {
                if r != rank && m[r * cols + c] != 0 {
                    let f = self.mul(m[r * cols + c], inv);
                    for k in c..cols {
                        let v = self.mul(f, m[rank * cols + k]);
                        m[r * cols + k] = self.sub(m[r * cols + k], v);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Monic characteristic polynomial `det(xI - A)`, lowest degree first.
    pub fn charpoly(&self, a: &[u64], n: usize) -> Vec<u64> {
        // Faddeev-LeVerrier; p exceeds n so the divisions are legal.
        let mut c = vec![0u64; n + 1];
        c[n] = 1;
        let mut mk = vec![0u64; n * n];
        for k in 1..=n {
            let mut next = self.matmul(a, &mk, n);
            for i in 0..n {
                next[i * n + i] = self.add(next[i * n + i], c[n - k + 1]);
            }
            let am = self.matmul(a, &next, n);
            let tr = (0..n).fold(0u64, |acc, i| self.add(acc, am[i * n + i]));
            let kinv = self.inv(k as u64);
            c[n - k] = self.sub(0, self.mul(tr, kinv));
            mk = next;
        }
        c
    }

    pub fn eval(&self, poly: &[u64], x: u64) -> u64 {
        poly.iter().rev().fold(0u64, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// Multiplicity of `omega^k` as a root of `poly`, for every `k` with nonzero multiplicity.
    pub fn root_multiplicities(&self, poly: &[u64]) -> Vec<(u64, usize)> {
        let mut out = Vec::new();
        let mut rest = poly.to_vec();
        let mut total = 0;
        let deg = poly.len() - 1;
        for k in 0..self.order {
            if total == deg {
                break;
            }
            let x = self.omega_pow(k as i64);
            let mut mult = 0;
            while rest.len() > 1 && self.eval(&rest, x) == 0 {
                rest = self.synthetic_div(&rest, x);
                mult += 1;
            }
            if mult > 0 {
                out.push((k, mult));
                total += mult;
            }
        }
        out
    }

    fn synthetic_div(&self, poly: &[u64], x: u64) -> Vec<u64> {
        let n = poly.len() - 1;
        let mut q = vec![0u64; n];
        let mut carry = 0u64;
        for i in (0..n).rev() {
            carry = self.add(poly[i + 1], self.mul(carry, x));
            q[i] = carry;
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_setup() {
        let m = ModP::new(360);
        assert_eq!((m.p - 1) % 360, 0);
        assert_eq!(pow_mod(m.omega, 360, m.p), 1);
        assert_ne!(pow_mod(m.omega, 180, m.p), 1);
        assert_ne!(pow_mod(m.omega, 120, m.p), 1);
        assert_ne!(pow_mod(m.omega, 72, m.p), 1);
    }

    #[test]
    fn multiplicities_of_diagonal() {
        let m = ModP::new(12);
        let w = m.omega_pow(4);
        let a = vec![w, 0, 0, 0, w, 0, 0, 0, 1];
        let cp = m.charpoly(&a, 3);
        assert_eq!(m.root_multiplicities(&cp), vec![(0, 1), (4, 2)]);
    }
}
