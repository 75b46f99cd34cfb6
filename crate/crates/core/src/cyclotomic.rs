//! Exact sums of roots of unity in `ℤ[ζ_m]`.
//!
//! An element is an integer combination of powers `ζ_m^k`; reducing the
//! coefficient polynomial modulo the cyclotomic polynomial `Φ_m` yields a
//! canonical form, so integrality and vanishing are decided exactly.

/// Coefficients (lowest degree first) of `Φ_n`.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    assert!(n >= 1);
    // x^n - 1
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in (1..n).filter(|d| n % d == 0) {
        num = divide_exact(&num, &cyclotomic_polynomial(d));
    }
    num
}

fn divide_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dd = den.len() - 1;
    assert_eq!(den[dd], 1, "divisor must be monic");
    let mut rem = num.to_vec();
    let mut q = vec![0i64; num.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd];
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    q
}

/// `Σ_k c_k ζ_m^k` with integer `c_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicSum {
    order: u64,
    coeffs: Vec<i64>,
}

impl CyclotomicSum {
    pub fn zero(order: u64) -> Self {
        assert!(order >= 1);
        CyclotomicSum { order, coeffs: vec![0; order as usize] }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Adds `c · ζ_m^k`.
    pub fn add_root(&mut self, k: u64, c: i64) {
        self.coeffs[(k % self.order) as usize] += c;
    }

    /// Canonical coefficients of degree `< φ(m)`.
    pub fn reduced(&self) -> Vec<i64> {
        let phi = cyclotomic_polynomial(self.order);
        let d = phi.len() - 1;
        let mut rem = self.coeffs.clone();
        for i in (d..rem.len()).rev() {
            let c = rem[i];
            if c != 0 {
                for (j, &pj) in phi.iter().enumerate() {
                    rem[i - d + j] -= c * pj;
                }
            }
        }
        rem.truncate(d.max(1));
        rem
    }

    /// `Some(n)` exactly when the sum equals the rational integer `n`.
    pub fn as_integer(&self) -> Option<i64> {
        let r = self.reduced();
        r[1..].iter().all(|&c| c == 0).then_some(r[0])
    }
}
