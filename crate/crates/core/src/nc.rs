use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 24;

/// A non-crossing perfect pairing of points `0..2k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NcPairing {
    partner: Vec<usize>,
}

impl NcPairing {
    /// Validates a pairing given as 0-based point pairs.
    pub fn new(two_k: usize, pairs: &[(usize, usize)]) -> Result<NcPairing> {
        if !two_k.is_multiple_of(2) {
            return Err(Error::OddPoints(two_k));
        }
        let mut partner = vec![usize::MAX; two_k];
        for &(a, b) in pairs {
            if a >= two_k || b >= two_k || a == b || partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(Error::BadPairing);
            }
            partner[a] = b;
            partner[b] = a;
        }
        if partner.contains(&usize::MAX) {
            return Err(Error::BadPairing);
        }
        let p = NcPairing { partner };
        if !p.is_noncrossing() {
            return Err(Error::BadPairing);
        }
        Ok(p)
    }

    pub(crate) fn from_partner(partner: Vec<usize>) -> NcPairing {
        NcPairing { partner }
    }

    pub fn points(&self) -> usize {
        self.partner.len()
    }

    pub fn k(&self) -> usize {
        self.partner.len() / 2
    }

    pub fn partner(&self, i: usize) -> usize {
        self.partner[i]
    }

    pub fn partners(&self) -> &[usize] {
        &self.partner
    }

    /// Pairs `(i, j)` with `i < j`, ordered by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.partner.len()).filter(|&i| i < self.partner[i]).map(|i| (i, self.partner[i])).collect()
    }

    pub fn is_noncrossing(&self) -> bool {
        let pairs = self.pairs();
        for &(a, c) in &pairs {
            for &(b, d) in &pairs {
                if a < b && b < c && c < d {
                    return false;
                }
            }
        }
        true
    }

    /// Juxtaposition: `self` on points `0..2k`, `other` shifted after it.
    pub fn juxtapose(&self, other: &NcPairing) -> NcPairing {
        let n = self.partner.len();
        let mut partner = self.partner.clone();
        partner.extend(other.partner.iter().map(|p| p + n));
        NcPairing { partner }
    }

    /// True when no proper prefix `0..2j` is closed under the pairing.
    pub fn is_irreducible(&self) -> bool {
        self.partner.is_empty() || self.partner[0] == self.partner.len() - 1
    }

    /// Rotation moving every point two places towards the start.
    pub fn rotated(&self) -> NcPairing {
        let n = self.partner.len();
        if n == 0 {
            return self.clone();
        }
        let mut partner = vec![0; n];
        for i in 0..n {
            partner[(i + n - 2) % n] = (self.partner[i] + n - 2) % n;
        }
        NcPairing { partner }
    }

    pub fn display(&self) -> String {
        let parts: Vec<String> = self.pairs().iter().map(|(a, b)| format!("{{{},{}}}", a + 1, b + 1)).collect();
        parts.join("")
    }
}

/// All non-crossing perfect pairings of `two_k` points, point 0's partner ascending.
pub fn noncrossing_pairings(two_k: usize) -> Result<Vec<NcPairing>> {
    if !two_k.is_multiple_of(2) {
        return Err(Error::OddPoints(two_k));
    }
    if two_k > MAX_POINTS {
        return Err(Error::Graph(format!("at most {MAX_POINTS} points supported")));
    }
    let mut out = Vec::new();
    for p in pairings_rec(0, two_k) {
        out.push(NcPairing { partner: p });
    }
    Ok(out)
}

fn pairings_rec(offset: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for j in (1..n).step_by(2) {
        let inner = pairings_rec(offset + 1, j - 1);
        let outer = pairings_rec(offset + j + 1, n - j - 1);
        for a in &inner {
            for b in &outer {
                let mut p = Vec::with_capacity(n);
                p.push(offset + j);
                p.extend_from_slice(a);
                p.push(offset);
                p.extend_from_slice(b);
                out.push(p);
            }
        }
    }
    out
}

pub fn catalan(n: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n as u128 - i) / (i + 1);
    }
    r
}

/// Pairings of `2n` points with exactly `k` outer blocks in the Kreweras sense; rows sum to Catalan.
pub fn narayana(n: usize, k: usize) -> u128 {
    if n == 0 {
        return if k == 0 { 1 } else { 0 };
    }
    if k == 0 || k > n {
        return 0;
    }
    binomial(n, k) * binomial(n, k - 1) / n as u128
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentMethod {
    Recursion,
    ClosedForm,
    Narayana,
}

impl MomentMethod {
    pub fn name(self) -> &'static str {
        match self {
            MomentMethod::Recursion => "recursion",
            MomentMethod::ClosedForm => "closed_form",
            MomentMethod::Narayana => "narayana",
        }
    }
}

/// Moments `m_0..=m_nmax` of the free Poisson law with rate `delta` and unit jump.
pub fn free_poisson_moments(delta: f64, nmax: usize, method: MomentMethod) -> Result<Vec<f64>> {
    if !(delta >= 1.0) {
        return Err(Error::DeltaBelowOne(delta));
    }
    if nmax > 30 {
        return Err(Error::Graph("nmax above 30".into()));
    }
    Ok(match method {
        MomentMethod::Recursion => {
            let mut m = vec![1.0];
            for n in 1..=nmax {
                let conv: f64 = (0..n).map(|k| m[k] * m[n - 1 - k]).sum();
                m.push((delta - 1.0) * m[n - 1] + conv);
            }
            m
        }
        MomentMethod::ClosedForm => closed_form_coefficients(delta, nmax),
        MomentMethod::Narayana => (0..=nmax)
            .map(|n| (0..=n).map(|k| narayana(n, k) as f64 * delta.powi(k as i32)).sum())
            .collect(),
    })
}

/// Taylor coefficients of `(1-(d-1)z)/(2z) * (1 - sqrt(1 - 4z/(1-(d-1)z)^2))`.
fn closed_form_coefficients(delta: f64, nmax: usize) -> Vec<f64> {
    let len = nmax + 2;
    let mut a = vec![0.0; len];
    a[0] = 1.0;
    if len > 1 {
        a[1] = -(delta - 1.0);
    }
    let a2 = series_mul(&a, &a, len);
    let inv_a2 = series_inverse(&a2, len);
    let mut radicand = vec![0.0; len];
    radicand[0] = 1.0;
    for n in 1..len {
        radicand[n] = -4.0 * inv_a2[n - 1];
    }
    let s = series_sqrt(&radicand, len);
    // (1 - s) / z has coefficients -s[n+1].
    let q: Vec<f64> = (0..len - 1).map(|n| -s[n + 1]).collect();
    let prod = series_mul(&a[..len - 1], &q, len - 1);
    prod.iter().take(nmax + 1).map(|c| c / 2.0).collect()
}

/// Closed-form moment generating function, principal branch with value 1 at 0.
pub fn mgf_closed_form(delta: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    let a = 1.0 - (delta - 1.0) * z;
    a / (2.0 * z) * (1.0 - (1.0 - 4.0 * z / (a * a)).sqrt())
}

pub fn series_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, x) in a.iter().enumerate().take(len) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Reciprocal of a power series with nonzero constant term.
pub fn series_inverse(a: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    out[0] = 1.0 / a[0];
    for n in 1..len {
        let s: f64 = (1..=n).map(|k| a.get(k).copied().unwrap_or(0.0) * out[n - k]).sum();
        out[n] = -s / a[0];
    }
    out
}

/// Square root of a power series with constant term 1.
pub fn series_sqrt(a: &[f64], len: usize) -> Vec<f64> {
    let mut s = vec![0.0; len];
    s[0] = 1.0;
    for n in 1..len {
        let cross: f64 = (1..n).map(|k| s[k] * s[n - k]).sum();
        s[n] = (a.get(n).copied().unwrap_or(0.0) - cross) / 2.0;
    }
    s
}

/// Coefficients `1..=nmax` of `1 - 1/Phi(z)` where `Phi = sum_n catalan(n) z^n`.
pub fn free_generator_counts(nmax: usize) -> Vec<f64> {
    let phi: Vec<f64> = (0..=nmax).map(|n| catalan(n) as f64).collect();
    let inv = series_inverse(&phi, nmax + 1);
    (1..=nmax).map(|n| -inv[n]).collect()
}
