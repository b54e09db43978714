//! Independent ground truth for the test suite.
//!
//! Two deliberately slow but transparent engines live here:
//!
//! 1. [`reference_airy`] — the Maclaurin series of Ai/Bi summed in decimal
//!    fixed-point arithmetic on top of `BigInt`, with enough extra digits to
//!    absorb the catastrophic cancellation of `c1*f - c2*g`. Every call is
//!    certified a posteriori by the Wronskian identity evaluated at full
//!    working precision.
//!
//! 2. [`fd_eigensolve`] — a three-point finite-difference discretization of
//!    `-coeff * psi'' + v(x) psi = e psi` with Dirichlet, periodic or
//!    antiperiodic boundary conditions, eigenvalues by Sturm-sequence
//!    bisection (exact counts, no missed eigenvalues) and Richardson
//!    `h -> h/2` extrapolation.
//!
//! Nothing in the production path depends on this module; it exists so that
//! every nontrivial number elsewhere can be checked against arithmetic that
//! shares no code with the fast path.

use crate::CoreError;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

// ---------------------------------------------------------------------------
// fixed-point decimal arithmetic
// ---------------------------------------------------------------------------

/// A decimal fixed-point number: value = `mantissa / 10^digits`.
#[derive(Clone, Debug)]
pub struct FixedDec {
    pub mantissa: BigInt,
    pub digits: u32,
}

impl FixedDec {
    /// Convert to the nearest `f64` by formatting and re-parsing; the decimal
    /// parser performs correct rounding, so the result is within 0.5 ulp.
    pub fn to_f64(&self) -> f64 {
        self.to_decimal_string().parse::<f64>().unwrap()
    }

    /// Plain decimal representation with an explicit decimal point.
    pub fn to_decimal_string(&self) -> String {
        let neg = self.mantissa.is_negative();
        let digits = self.mantissa.abs().to_string();
        let scale = self.digits as usize;
        let (int_part, frac_part) = if digits.len() > scale {
            let split = digits.len() - scale;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            (
                "0".to_string(),
                format!("{:0>width$}", digits, width = scale),
            )
        };
        format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac_part)
    }
}

fn pow10(n: u32) -> BigInt {
    BigInt::from(10u32).pow(n)
}

/// Rounded division (round half away from zero).
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (n2, d2) = (n * &two, d * &two);
    let half = d.clone();
    if n.is_negative() == d.is_negative() {
        (n2 + half) / d2
    } else {
        (n2 - half) / d2
    }
}

/// Fixed-point product at scale `s`: `a*b/10^s`, rounded.
fn fxmul(a: &BigInt, b: &BigInt, scale: &BigInt) -> BigInt {
    round_div(&(a * b), scale)
}

/// Parse a decimal constant of the form "d.ddd..." to scale `s` digits.
/// The string must carry at least `s + 1` fractional digits.
fn parse_const(text: &str, s: u32) -> BigInt {
    let (int_part, frac_part) = text.split_once('.').expect("constant format");
    let s = s as usize;
    assert!(
        frac_part.len() > s,
        "constant string too short for the requested scale"
    );
    let mut m: BigInt = int_part.parse::<BigInt>().unwrap() * pow10(s as u32);
    m += frac_part[..s].parse::<BigInt>().unwrap();
    if frac_part.as_bytes()[s] >= b'5' {
        m += 1;
    }
    m
}

// 250 fractional digits each; far more than the maximum working scale.
const C1_DEC: &str = "0.35502805388781723926006318600418317639797917419917724058332651030081004245012671295717424605404027168842044873034949583975829267044616193710504024002258538638400990260103571281905156820329024916964476618232796777024189895947961734890864062573238976014";
const C2_DEC: &str = "0.25881940379280679840518356018920396347909113835493458221000181385610277267679028065419640582727538431337119321178913338127503595216762601478505098984841944663202964488880560187838330512695052512829334249799988357074907925906015895105094432208938405967";
const PI_DEC: &str = "3.1415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253421170679821480865132823066470938446095505822317253594081284811174502841027019385211055596446229489549303819644288109756659334461284756482337867831652712019091";

// ---------------------------------------------------------------------------
// arbitrary-precision Airy values
// ---------------------------------------------------------------------------

/// All four Airy values at one point, at oracle precision.
#[derive(Clone, Debug)]
pub struct RefAiry {
    pub ai: FixedDec,
    pub bi: FixedDec,
    pub aip: FixedDec,
    pub bip: FixedDec,
}

/// Convert an exact `f64` into fixed point at scale `s` (0.5 ulp rounding).
fn f64_to_fixed(x: f64, s: u32) -> BigInt {
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.abs().to_bits();
    let exp_bits = (bits >> 52) & 0x7ff;
    let (mantissa, exp) = if exp_bits == 0 {
        (bits & ((1u64 << 52) - 1), -1074i64)
    } else {
        (
            (bits & ((1u64 << 52) - 1)) | (1u64 << 52),
            exp_bits as i64 - 1075,
        )
    };
    let m = BigInt::from(mantissa) * pow10(s);
    let val = if exp >= 0 {
        m << exp as u64
    } else {
        let shift = (-exp) as u64;
        (m + (BigInt::from(1) << (shift - 1))) >> shift
    };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

/// Evaluate Ai, Bi, Ai', Bi' at `x` to at least `digits` significant decimal
/// digits, by summing the Maclaurin series
///
/// ```text
/// f(x) = 1 + x^3/(2*3) + ...        g(x) = x + x^4/(3*4) + ...
/// Ai = c1 f - c2 g,  Bi = sqrt(3) (c1 f + c2 g)
/// ```
///
/// in fixed point with `digits + cancellation + guard` decimal places, where
/// the cancellation allowance is `2*zeta*log10(e)` on the positive axis
/// (`zeta = (2/3) x^(3/2)` is the exponential scale of the series terms) and
/// `zeta*log10(e)` on the negative axis. The Wronskian
/// `Ai Bi' - Ai' Bi = 1/pi` is then verified at working precision; failure is
/// reported as an error rather than returning uncertified values.
pub fn reference_airy(x: f64, digits: u32) -> Result<RefAiry, CoreError> {
    if !x.is_finite() {
        return Err(CoreError::NonFinite {
            what: "oracle argument",
        });
    }
    if x.abs() > 30.0 {
        return Err(CoreError::OutOfDomain {
            what: "oracle argument |x|",
            value: x,
        });
    }
    if digits == 0 || digits > 50 {
        return Err(CoreError::OutOfDomain {
            what: "oracle digits",
            value: digits as f64,
        });
    }

    let zeta = 2.0 / 3.0 * x.abs().powf(1.5);
    let cancel_factor = if x > 0.0 { 2.0 } else { 1.0 };
    let cancel = (cancel_factor * zeta * std::f64::consts::LOG10_E).ceil() as u32 + 6;
    let s = digits + cancel + 12;
    let scale = pow10(s);

    let xf = f64_to_fixed(x, s);
    let x2 = fxmul(&xf, &xf, &scale);
    let x3 = fxmul(&x2, &xf, &scale);

    // Current terms of the four series.
    let mut tf = scale.clone(); // f:  term_0 = 1
    let mut tg = xf.clone(); // g:  term_0 = x
    let mut tfp = round_div(&x2, &BigInt::from(2)); // f': term_1 = x^2/2
    let mut tgp = scale.clone(); // g': term_0 = 1

    let mut f_sum = tf.clone();
    let mut g_sum = tg.clone();
    let mut fp_sum = tfp.clone();
    let mut gp_sum = tgp.clone();

    let mut converged = false;
    for k in 1i64..20_000 {
        let k3 = 3 * k;
        tf = round_div(&(&tf * &x3), &(BigInt::from((k3 - 1) * k3) * &scale));
        tg = round_div(&(&tg * &x3), &(BigInt::from(k3 * (k3 + 1)) * &scale));
        if k >= 2 {
            // term ratio (k/(k-1)) * x^3 / ((3k-1) 3k)
            tfp = round_div(
                &(&tfp * &x3 * k),
                &(BigInt::from((k - 1) * (k3 - 1) * k3) * &scale),
            );
        }
        tgp = round_div(&(&tgp * &x3), &(BigInt::from((k3 - 2) * k3) * &scale));

        f_sum += &tf;
        g_sum += &tg;
        if k >= 2 {
            fp_sum += &tfp;
        }
        gp_sum += &tgp;

        if tf.is_zero() && tg.is_zero() && tfp.is_zero() && tgp.is_zero() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CoreError::IterationCap {
            what: "oracle Airy series",
        });
    }

    let c1 = parse_const(C1_DEC, s);
    let c2 = parse_const(C2_DEC, s);
    let pi = parse_const(PI_DEC, s);
    // Integer square root of 3*10^(2s) gives sqrt(3) at scale s.
    let sqrt3 = (BigInt::from(3) * pow10(2 * s)).sqrt();

    let c1f = fxmul(&c1, &f_sum, &scale);
    let c2g = fxmul(&c2, &g_sum, &scale);
    let c1fp = fxmul(&c1, &fp_sum, &scale);
    let c2gp = fxmul(&c2, &gp_sum, &scale);

    let ai = &c1f - &c2g;
    let bi = fxmul(&sqrt3, &(&c1f + &c2g), &scale);
    let aip = &c1fp - &c2gp;
    let bip = fxmul(&sqrt3, &(&c1fp + &c2gp), &scale);

    // Certificate: |pi * (Ai Bi' - Ai' Bi) - 1| <= 10^-(digits+1).
    let w = &fxmul(&ai, &bip, &scale) - &fxmul(&aip, &bi, &scale);
    let resid = (fxmul(&w, &pi, &scale) - &scale).abs();
    if resid > pow10(s - digits - 1) {
        let as_f = FixedDec {
            mantissa: resid,
            digits: s,
        }
        .to_f64();
        return Err(CoreError::NonConvergent {
            what: "oracle Wronskian certificate",
            value: as_f,
        });
    }

    let wrap = |m: BigInt| FixedDec {
        mantissa: m,
        digits: s,
    };
    Ok(RefAiry {
        ai: wrap(ai),
        bi: wrap(bi),
        aip: wrap(aip),
        bip: wrap(bip),
    })
}

// ---------------------------------------------------------------------------
// finite-difference eigensolver
// ---------------------------------------------------------------------------

/// Boundary condition of an [`FdProblem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bc {
    Dirichlet,
    Periodic,
    Antiperiodic,
}

/// A discretized one-dimensional eigenproblem `-coeff psi'' + v psi = e psi`.
///
/// `v` holds the potential sampled on the fine uniform grid with spacing `h`:
/// for `Dirichlet` the samples include both interval endpoints and
/// `v.len() - 1` must be even; for `Periodic`/`Antiperiodic` the samples cover
/// one period half-open (no duplicate of the first node) and `v.len()` must
/// be even. The evenness makes every other node an exact coarse grid for the
/// `h -> 2h` Richardson pair.
#[derive(Clone, Debug)]
pub struct FdProblem {
    pub v: Vec<f64>,
    pub h: f64,
    pub coeff: f64,
    pub bc: Bc,
    pub count: usize,
}

/// Extrapolated eigenvalues plus the Richardson error estimates.
#[derive(Clone, Debug)]
pub struct FdResult {
    pub eigenvalues: Vec<f64>,
    pub error_estimates: Vec<f64>,
}

/// Number of eigenvalues of the symmetric matrix `tridiag(off, diag, off)`
/// (plus `corner` in the two off-corner positions, 0.0 for none) that are
/// strictly below `lam`, by counting negative pivots of the LDL^T
/// factorization. The corner is handled by propagating the fill-in of the
/// last row through the elimination, so the count stays exact for the cyclic
/// case as well.
pub fn sturm_count(diag: &[f64], off: f64, corner: f64, lam: f64) -> usize {
    let n = diag.len();
    debug_assert!(n >= 3);
    let tiny = 1e-300;
    let mut count = 0usize;
    let mut d = diag[0] - lam;
    if d == 0.0 {
        d = -tiny;
    }
    if d < 0.0 {
        count += 1;
    }
    // Fill of the last row in the current column, and the accumulated
    // Schur-complement correction of the last diagonal entry.
    let mut fill = corner;
    let mut schur = fill * fill / d;
    for i in 1..n - 1 {
        let natural = if i == n - 2 { off } else { 0.0 };
        let new_fill = natural - off * fill / d;
        let mut d_next = diag[i] - lam - off * off / d;
        if d_next == 0.0 {
            d_next = -tiny;
        }
        if d_next < 0.0 {
            count += 1;
        }
        fill = new_fill;
        schur += fill * fill / d_next;
        d = d_next;
    }
    let d_last = diag[n - 1] - lam - schur;
    if d_last < 0.0 {
        count += 1;
    }
    count
}

/// Lowest `count` eigenvalues of the (possibly cyclic) tridiagonal matrix by
/// bisection on the Sturm count. Bisection never misses or duplicates an
/// eigenvalue because the count is exact at every probe.
pub fn tridiag_eigenvalues(diag: &[f64], off: f64, corner: f64, count: usize) -> Vec<f64> {
    let bound_pad = 2.0 * off.abs() + corner.abs();
    let mut lo_all = f64::INFINITY;
    let mut hi_all = f64::NEG_INFINITY;
    for &a in diag {
        lo_all = lo_all.min(a - bound_pad);
        hi_all = hi_all.max(a + bound_pad);
    }
    let mut out = Vec::with_capacity(count);
    for j in 0..count.min(diag.len()) {
        let (mut lo, mut hi) = (lo_all, hi_all);
        // smallest lam with count(lam) >= j+1
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sturm_count(diag, off, corner, mid) >= j + 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-14 * mid.abs().max(1.0) {
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

fn assemble(v: &[f64], h: f64, coeff: f64, bc: Bc) -> (Vec<f64>, f64, f64) {
    let w = coeff / (h * h);
    match bc {
        Bc::Dirichlet => {
            // interior nodes only
            let diag: Vec<f64> = v[1..v.len() - 1].iter().map(|&vi| 2.0 * w + vi).collect();
            (diag, -w, 0.0)
        }
        Bc::Periodic => (v.iter().map(|&vi| 2.0 * w + vi).collect(), -w, -w),
        Bc::Antiperiodic => (v.iter().map(|&vi| 2.0 * w + vi).collect(), -w, w),
    }
}

/// Solve the discretized problem on the fine grid and on the nested
/// twice-coarser grid, and return Richardson-extrapolated eigenvalues
/// together with `|fine - coarse| / 3` error estimates.
pub fn fd_eigensolve(p: &FdProblem) -> Result<FdResult, CoreError> {
    let n = p.v.len();
    match p.bc {
        Bc::Dirichlet => {
            if n < 9 || (n - 1) % 2 != 0 {
                return Err(CoreError::InvalidConfig {
                    what: format!("Dirichlet sample count {} must be odd and >= 9", n),
                });
            }
        }
        _ => {
            if n < 8 || n % 2 != 0 {
                return Err(CoreError::InvalidConfig {
                    what: format!("periodic sample count {} must be even and >= 8", n),
                });
            }
        }
    }
    if p.count == 0 || p.count > 50 {
        return Err(CoreError::InvalidConfig {
            what: format!("requested eigenvalue count {} outside 1..=50", p.count),
        });
    }

    let coarse_v: Vec<f64> = p.v.iter().step_by(2).copied().collect();
    let (diag_f, off_f, corner_f) = assemble(&p.v, p.h, p.coeff, p.bc);
    let (diag_c, off_c, corner_c) = assemble(&coarse_v, 2.0 * p.h, p.coeff, p.bc);

    let m = p.count.min(diag_c.len());
    let fine = tridiag_eigenvalues(&diag_f, off_f, corner_f, m);
    let coarse = tridiag_eigenvalues(&diag_c, off_c, corner_c, m);

    let mut eigenvalues = Vec::with_capacity(m);
    let mut error_estimates = Vec::with_capacity(m);
    for j in 0..m {
        eigenvalues.push((4.0 * fine[j] - coarse[j]) / 3.0);
        error_estimates.push((fine[j] - coarse[j]).abs() / 3.0);
    }
    Ok(FdResult {
        eigenvalues,
        error_estimates,
    })
}

// ---------------------------------------------------------------------------
// sawtooth samplers
// ---------------------------------------------------------------------------

/// The dimensionless sawtooth `v(xi) = -1 + |xi|` on `[-1, 1]`, extended
/// 2-periodically.
pub fn sawtooth(xi: f64) -> f64 {
    let r = (xi + 1.0).rem_euclid(2.0) - 1.0;
    -1.0 + r.abs()
}

/// One-period problem on `[-1, 1)` for band-edge cross-validation:
/// `-1/kappa^3 psi'' + v psi = e psi` with periodic or antiperiodic
/// boundary conditions. `n_per_period` fine nodes (even, >= 2000).
pub fn sawtooth_period_problem(kappa: f64, n_per_period: usize, bc: Bc, count: usize) -> FdProblem {
    assert!(n_per_period >= 2000 && n_per_period % 2 == 0);
    assert!(bc != Bc::Dirichlet);
    let h = 2.0 / n_per_period as f64;
    let v: Vec<f64> = (0..n_per_period)
        .map(|i| sawtooth(-1.0 + i as f64 * h))
        .collect();
    FdProblem {
        v,
        h,
        coeff: 1.0 / (kappa * kappa * kappa),
        bc,
        count,
    }
}

/// Dirichlet box holding `2*half_wells + 1` sawtooth wells padded by
/// `pad` half-periods of zero potential on each side. Used to cross-check
/// the finite-lattice solver (the box approximates decay at infinity for
/// e < 0).
pub fn sawtooth_box_problem(
    kappa: f64,
    half_wells: usize,
    pad: f64,
    n_per_period: usize,
    count: usize,
) -> FdProblem {
    assert!(n_per_period >= 2000 && n_per_period % 2 == 0);
    let edge = (2 * half_wells + 1) as f64;
    let h = 2.0 / n_per_period as f64;
    // Round the box up so the endpoints land exactly on grid nodes.
    let mut m = (2.0 * (edge + pad) / h).ceil() as usize;
    if m % 2 != 0 {
        m += 1;
    }
    let half_len = m as f64 * h / 2.0;
    let v: Vec<f64> = (0..=m)
        .map(|i| {
            let xi = -half_len + i as f64 * h;
            if xi.abs() <= edge {
                sawtooth(xi)
            } else {
                0.0
            }
        })
        .collect();
    FdProblem {
        v,
        h,
        coeff: 1.0 / (kappa * kappa * kappa),
        bc: Bc::Dirichlet,
        count,
    }
}
