//! Transfer matrices and trace polynomials.
//!
//! With `M₋₁ = [[1,−λ],[0,1]]`, `M₀ = [[E,−1],[1,0]]` and
//! `M_{n+1} = M_{n−1} M_n^{a_{n+1}}`, the trace polynomials are
//! `h_(n,p)(E) = tr(M_{n−1} M_n^p)`.  By Cayley–Hamilton,
//! `M^p = S_p(tr M)·M − S_{p−1}(tr M)·I` with the Chebyshev polynomials
//! `S₀ = 0, S₁ = 1, S_{p+1} = x S_p − S_{p−1}`, so only the three traces
//! `y_n = tr M_{n−1}`, `x_n = tr M_n`, `z_n = tr(M_{n−1}M_n)` have to be
//! propagated:
//!
//! ```text
//! x_{n+1} = S_a(x_n) z_n − S_{a−1}(x_n) y_n
//! z_{n+1} = S_{a+1}(x_n) z_n − S_a(x_n) y_n
//! y_{n+1} = x_n,        (y₀, x₀, z₀) = (2, E, E − λ).
//! ```

use rug::Float;

/// Digits above which Chebyshev values use binary doubling.
const DOUBLING_THRESHOLD: u32 = 32;

/// The three traces `(tr M_{n−1}, tr M_n, tr M_{n−1}M_n)` at some depth.
#[derive(Clone, Debug)]
pub struct Traces {
    /// `y = tr M_{n−1} = h_(n,0)`.
    pub y: Float,
    /// `x = tr M_n = h_(n+1,0)`.
    pub x: Float,
    /// `z = tr M_{n−1}M_n = h_(n,1)`.
    pub z: Float,
}

/// `(S_{p−1}(x), S_p(x), S_{p+1}(x))` for `p ≥ 0`.
pub fn chebyshev_triple(p: u32, x: &Float) -> (Float, Float, Float) {
    let prec = x.prec();
    if p <= DOUBLING_THRESHOLD {
        // s0 = S_{-1} = -1, s1 = S_0 = 0.
        let mut s0 = Float::with_val(prec, -1);
        let mut s1 = Float::with_val(prec, 0);
        let mut s2 = Float::with_val(prec, 1);
        for _ in 0..p {
            let next = Float::with_val(prec, x * &s2) - &s1;
            s0 = std::mem::replace(&mut s1, std::mem::replace(&mut s2, next));
        }
        (s0, s1, s2)
    } else {
        // Keep (S_k, S_{k+1}); double with
        // S_{2k} = S_k (2 S_{k+1} − x S_k), S_{2k+1} = S_{k+1}² − S_k².
        let mut sk = Float::with_val(prec, 0);
        let mut sk1 = Float::with_val(prec, 1);
        for bit in (0..32 - p.leading_zeros()).rev() {
            let xsk = Float::with_val(prec, x * &sk);
            let two_sk1 = Float::with_val(prec, &sk1 * 2u32);
            let s2k = Float::with_val(prec, &sk * Float::with_val(prec, &two_sk1 - &xsk));
            let s2k1 =
                Float::with_val(prec, sk1.square_ref()) - Float::with_val(prec, sk.square_ref());
            if (p >> bit) & 1 == 1 {
                let s2k2 = Float::with_val(prec, x * &s2k1) - &s2k;
                sk = s2k1;
                sk1 = s2k2;
            } else {
                sk = s2k;
                sk1 = s2k1;
            }
        }
        let skm1 = Float::with_val(prec, x * &sk) - &sk1;
        (skm1, sk, sk1)
    }
}

/// Scalar Chebyshev polynomial `S_p(x)` in `f64` (for `p ≥ 0`).
pub fn chebyshev_s_f64(p: u32, x: f64) -> f64 {
    let (mut a, mut b) = (0.0, 1.0);
    if p == 0 {
        return 0.0;
    }
    for _ in 1..p {
        let c = x * b - a;
        a = b;
        b = c;
    }
    b
}

/// Traces at depth `n = digits.len()` for energy `e`, coupling `lambda`.
pub fn traces(digits: &[u32], lambda: &Float, e: &Float) -> Traces {
    let prec = e.prec();
    let mut y = Float::with_val(prec, 2);
    let mut x = e.clone();
    let mut z = Float::with_val(prec, e - lambda);
    for &a in digits {
        let (sm, s, sp) = chebyshev_triple(a, &x);
        let nx = Float::with_val(prec, &s * &z) - Float::with_val(prec, &sm * &y);
        let nz = Float::with_val(prec, &sp * &z) - Float::with_val(prec, &s * &y);
        y = std::mem::replace(&mut x, nx);
        z = nz;
    }
    Traces { y, x, z }
}

/// `h_(n,p)` from the traces at depth `n`, for any integer `p`
/// (`S_{−p} = −S_p`).
pub fn h_np(t: &Traces, p: i64) -> Float {
    let prec = t.x.prec();
    let s = |k: i64| -> Float {
        if k >= 0 {
            chebyshev_triple(k as u32, &t.x).1
        } else {
            -chebyshev_triple((-k) as u32, &t.x).1
        }
    };
    Float::with_val(prec, &s(p) * &t.z) - Float::with_val(prec, &s(p - 1) * &t.y)
}

/// A value with its derivative in `E`.
#[derive(Clone, Debug)]
pub struct Dual {
    /// Value.
    pub v: Float,
    /// Derivative.
    pub d: Float,
}

impl Dual {
    fn constant(prec: u32, c: i32) -> Self {
        Self {
            v: Float::with_val(prec, c),
            d: Float::with_val(prec, 0),
        }
    }
    fn mul(&self, o: &Dual) -> Dual {
        let prec = self.v.prec();
        let v = Float::with_val(prec, &self.v * &o.v);
        let d = Float::with_val(prec, &self.d * &o.v) + Float::with_val(prec, &self.v * &o.d);
        Dual { v, d }
    }
    fn sub(&self, o: &Dual) -> Dual {
        let prec = self.v.prec();
        Dual {
            v: Float::with_val(prec, &self.v - &o.v),
            d: Float::with_val(prec, &self.d - &o.d),
        }
    }
}

fn chebyshev_triple_dual(p: u32, x: &Dual) -> (Dual, Dual, Dual) {
    let prec = x.v.prec();
    let mut s0 = Dual::constant(prec, -1);
    let mut s1 = Dual::constant(prec, 0);
    let mut s2 = Dual::constant(prec, 1);
    for _ in 0..p {
        let next = x.mul(&s2).sub(&s1);
        s0 = std::mem::replace(&mut s1, std::mem::replace(&mut s2, next));
    }
    (s0, s1, s2)
}

/// Traces and their `E`-derivatives at depth `digits.len()`:
/// returns `(y, x, z)` as [`Dual`]s.
pub fn traces_dual(digits: &[u32], lambda: &Float, e: &Float) -> (Dual, Dual, Dual) {
    let prec = e.prec();
    let mut y = Dual::constant(prec, 2);
    let mut x = Dual {
        v: e.clone(),
        d: Float::with_val(prec, 1),
    };
    let mut z = Dual {
        v: Float::with_val(prec, e - lambda),
        d: Float::with_val(prec, 1),
    };
    for &a in digits {
        let (sm, s, sp) = chebyshev_triple_dual(a, &x);
        let nx = s.mul(&z).sub(&sm.mul(&y));
        let nz = sp.mul(&z).sub(&s.mul(&y));
        y = std::mem::replace(&mut x, nx);
        z = nz;
    }
    (y, x, z)
}

/// A 2×2 matrix of multiprecision reals.
#[derive(Clone, Debug)]
pub struct Mat2(pub [[Float; 2]; 2]);

impl Mat2 {
    fn new(prec: u32, e: [[f64; 2]; 2]) -> Self {
        Mat2([
            [
                Float::with_val(prec, e[0][0]),
                Float::with_val(prec, e[0][1]),
            ],
            [
                Float::with_val(prec, e[1][0]),
                Float::with_val(prec, e[1][1]),
            ],
        ])
    }
    fn identity(prec: u32) -> Self {
        Self::new(prec, [[1.0, 0.0], [0.0, 1.0]])
    }
    /// Matrix product.
    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let prec = self.0[0][0].prec();
        let m = |i: usize, j: usize| {
            Float::with_val(prec, &self.0[i][0] * &o.0[0][j])
                + Float::with_val(prec, &self.0[i][1] * &o.0[1][j])
        };
        Mat2([[m(0, 0), m(0, 1)], [m(1, 0), m(1, 1)]])
    }
    /// Non-negative integer power.
    pub fn pow(&self, mut p: u32) -> Mat2 {
        let mut base = self.clone();
        let mut acc = Mat2::identity(self.0[0][0].prec());
        while p > 0 {
            if p & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            p >>= 1;
        }
        acc
    }
    /// Trace.
    pub fn trace(&self) -> Float {
        Float::with_val(self.0[0][0].prec(), &self.0[0][0] + &self.0[1][1])
    }
    /// Determinant.
    pub fn det(&self) -> Float {
        let prec = self.0[0][0].prec();
        Float::with_val(prec, &self.0[0][0] * &self.0[1][1])
            - Float::with_val(prec, &self.0[0][1] * &self.0[1][0])
    }
}

/// Pair of consecutive transfer matrices `(M_{n−1}, M_n)` with their traces.
#[derive(Clone, Debug)]
pub struct TransferState {
    /// `M_{n−1}`.
    pub m_prev: Mat2,
    /// `M_n`.
    pub m_curr: Mat2,
    /// Depth `n`.
    pub depth: usize,
    /// Working precision in bits.
    pub precision_bits: u32,
    lambda: Float,
}

impl TransferState {
    /// The state `(M₋₁, M₀)` at energy `e` (precision taken from `e`).
    pub fn initial(lambda: &Float, e: &Float) -> Self {
        let prec = e.prec();
        let mut m_prev = Mat2::new(prec, [[1.0, 0.0], [0.0, 1.0]]);
        m_prev.0[0][1] = Float::with_val(prec, -lambda);
        let mut m_curr = Mat2::new(prec, [[0.0, -1.0], [1.0, 0.0]]);
        m_curr.0[0][0] = e.clone();
        Self {
            m_prev,
            m_curr,
            depth: 0,
            precision_bits: prec,
            lambda: Float::with_val(prec, lambda),
        }
    }

    /// Advance one level: `(M_{n−1}, M_n) ↦ (M_n, M_{n−1} M_n^a)`.
    pub fn advance(&mut self, a: u32) {
        let next = self.m_prev.mul(&self.m_curr.pow(a));
        self.m_prev = std::mem::replace(&mut self.m_curr, next);
        self.depth += 1;
    }

    /// `(tr M_{n−1}, tr M_n, tr M_{n−1}M_n)`.
    pub fn traces(&self) -> Traces {
        Traces {
            y: self.m_prev.trace(),
            x: self.m_curr.trace(),
            z: self.m_prev.mul(&self.m_curr).trace(),
        }
    }

    /// Fricke–Vogt invariant `x²+y²+z²−2xyz−1` of the half traces, which
    /// equals `λ²/4` at every depth.
    pub fn fricke_vogt(&self) -> Float {
        let t = self.traces();
        let prec = self.precision_bits;
        let (x, y, z) = (
            Float::with_val(prec, &t.x / 2u32),
            Float::with_val(prec, &t.y / 2u32),
            Float::with_val(prec, &t.z / 2u32),
        );
        let s = Float::with_val(prec, x.square_ref())
            + Float::with_val(prec, y.square_ref())
            + Float::with_val(prec, z.square_ref());
        let p = Float::with_val(prec, &x * &y) * &z * 2u32;
        s - p - 1u32
    }

    /// `λ²/4`.
    pub fn fricke_vogt_target(&self) -> Float {
        Float::with_val(self.precision_bits, self.lambda.square_ref()) / 4u32
    }
}
