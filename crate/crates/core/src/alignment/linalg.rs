//! Small dense complex vector routines, plus exact arithmetic over the
//! Gaussian integers for integer-valued channels and beams.

use num_complex::Complex64;

/// Collinearity threshold: `|⟨u,v⟩|² ≥ (1 - COLLINEAR_TOL)·‖u‖²‖v‖²`.
pub const COLLINEAR_TOL: f64 = 1e-9;
/// Relative threshold below which a Gram-Schmidt residual counts as zero.
pub const RANK_TOL: f64 = 1e-9;

/// `⟨u, v⟩ = Σ conj(u_k) v_k`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn is_zero(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

pub fn collinear_f64(u: &[Complex64], v: &[Complex64]) -> bool {
    inner(u, v).norm_sqr() >= (1.0 - COLLINEAR_TOL) * norm_sqr(u) * norm_sqr(v)
}

/// Orthonormal basis of `span(vectors)` by modified Gram-Schmidt with one
/// re-orthogonalization pass. Numerically dependent vectors are dropped.
pub fn orthonormal_basis(vectors: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let scale = norm_sqr(v);
        if scale == 0.0 {
            continue;
        }
        let r = residual(v, &basis);
        let n = norm_sqr(&r);
        if n > RANK_TOL * scale {
            let inv = 1.0 / n.sqrt();
            basis.push(r.into_iter().map(|z| z * inv).collect());
        }
    }
    basis
}

/// Component of `v` orthogonal to the orthonormal `basis`.
pub fn residual(v: &[Complex64], basis: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = inner(q, &r);
            for (rk, qk) in r.iter_mut().zip(q) {
                *rk -= c * qk;
            }
        }
    }
    r
}

pub fn rank_f64(vectors: &[Vec<Complex64>]) -> usize {
    orthonormal_basis(vectors).len()
}

/// A Gaussian integer `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussInt {
    pub re: i128,
    pub im: i128,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };

    /// Exact conversion when both parts are integers of moderate size.
    pub fn from_complex(z: Complex64) -> Option<Self> {
        const LIMIT: f64 = (1u64 << 31) as f64;
        let ok = |x: f64| x.fract() == 0.0 && x.abs() < LIMIT;
        (ok(z.re) && ok(z.im)).then(|| GaussInt {
            re: z.re as i128,
            im: z.im as i128,
        })
    }

    fn mul(self, o: Self) -> Self {
        GaussInt {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn sub(self, o: Self) -> Self {
        GaussInt {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }

    fn conj(self) -> Self {
        GaussInt {
            re: self.re,
            im: -self.im,
        }
    }

    fn norm_sqr(self) -> i128 {
        self.re * self.re + self.im * self.im
    }

    /// Exact quotient; `o` must divide `self`.
    fn div_exact(self, o: Self) -> Self {
        let n = o.norm_sqr();
        let p = self.mul(o.conj());
        debug_assert!(p.re % n == 0 && p.im % n == 0);
        GaussInt {
            re: p.re / n,
            im: p.im / n,
        }
    }
}

pub fn to_exact(v: &[Complex64]) -> Option<Vec<GaussInt>> {
    v.iter().map(|&z| GaussInt::from_complex(z)).collect()
}

fn inner_exact(u: &[GaussInt], v: &[GaussInt]) -> GaussInt {
    u.iter().zip(v).fold(GaussInt::ZERO, |acc, (a, b)| {
        let p = a.conj().mul(*b);
        GaussInt {
            re: acc.re + p.re,
            im: acc.im + p.im,
        }
    })
}

/// Cauchy-Schwarz equality, decided exactly.
pub fn collinear_exact(u: &[GaussInt], v: &[GaussInt]) -> bool {
    let nu: i128 = u.iter().map(|z| z.norm_sqr()).sum();
    let nv: i128 = v.iter().map(|z| z.norm_sqr()).sum();
    inner_exact(u, v).norm_sqr() == nu * nv
}

/// Rank by fraction-free (Bareiss) elimination, exact over `ℤ[i]`.
pub fn rank_exact(vectors: &[Vec<GaussInt>]) -> usize {
    let mut m: Vec<Vec<GaussInt>> = vectors.to_vec();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = GaussInt { re: 1, im: 0 };
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c] != GaussInt::ZERO) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c];
        for r in rank + 1..rows {
            let lead = m[r][c];
            for k in 0..cols {
                let v = pivot.mul(m[r][k]).sub(lead.mul(m[rank][k]));
                m[r][k] = v.div_exact(prev);
            }
        }
        prev = pivot;
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}
