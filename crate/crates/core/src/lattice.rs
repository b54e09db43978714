//! The sawtooth lattice: potential, physical-to-dimensionless conversion,
//! half-slope Airy propagators, monodromy discriminant, and band edges.
//!
//! Everything here works in the dimensionless reduction. With
//! `kappa = (2 m L0^2 V0 / hbar^2)^(1/3)`, energies are `e = E/V0`, positions
//! are `xi = x/L0`, and the potential on one period `[-1, 1]` is
//! `v(xi) = -1 + |xi|`. On an affine piece of the potential the Schrödinger
//! equation becomes the Airy equation in the shifted variable
//! `t = kappa (xi - 1 - e)` (rising piece), so the state vector
//! `(psi, (L0/kappa) psi_x) = (f(t), f'(t))` is propagated exactly by
//! fundamental Airy matrices. Band edges are the roots of `trace - 2` and
//! `trace + 2` of the one-period monodromy.

use crate::airy::{airy_eval, airy_eval_scaled, kappa0, AiryQuad};
use crate::{solve, CoreError};

// ---------------------------------------------------------------------------
// 2x2 matrices
// ---------------------------------------------------------------------------

/// A real 2x2 matrix. Transfer and monodromy instances have determinant 1
/// (up to rounding); nothing in the type enforces that, the propagator
/// constructors guarantee it structurally.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a11: 1.0,
        a12: 0.0,
        a21: 0.0,
        a22: 1.0,
    };

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            a11: self.a11 * rhs.a11 + self.a12 * rhs.a21,
            a12: self.a11 * rhs.a12 + self.a12 * rhs.a22,
            a21: self.a21 * rhs.a11 + self.a22 * rhs.a21,
            a22: self.a21 * rhs.a12 + self.a22 * rhs.a22,
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Inverse of a determinant-1 matrix (the adjugate). Exact for transfer
    /// matrices; do not use on matrices with det far from 1.
    pub fn inv_unimodular(&self) -> Mat2 {
        Mat2 {
            a11: self.a22,
            a12: -self.a12,
            a21: -self.a21,
            a22: self.a11,
        }
    }

    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            a11: self.a11 - rhs.a11,
            a12: self.a12 - rhs.a12,
            a21: self.a21 - rhs.a21,
            a22: self.a22 - rhs.a22,
        }
    }

    pub fn smul(&self, c: f64) -> Mat2 {
        Mat2 {
            a11: c * self.a11,
            a12: c * self.a12,
            a21: c * self.a21,
            a22: c * self.a22,
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    /// Conjugation by `J = diag(1, -1)`: flips the signs of both
    /// off-diagonal entries.
    pub fn j_conj(&self) -> Mat2 {
        Mat2 {
            a11: self.a11,
            a12: -self.a12,
            a21: -self.a21,
            a22: self.a22,
        }
    }
}

// ---------------------------------------------------------------------------
// lattice description
// ---------------------------------------------------------------------------

/// CODATA 2018 values used by [`kappa_from_physical`].
const ELECTRON_MASS_KG: f64 = 9.109_383_7015e-31;
const HBAR_J_S: f64 = 1.054_571_817e-34;
const EV_J: f64 = 1.602_176_634e-19;
const ANGSTROM_M: f64 = 1e-10;

/// A sawtooth lattice, described by the single dimensionless constant
/// `kappa`. The physical fields are optional provenance: when present they
/// satisfy `kappa = (2 m L0^2 V0 / hbar^2)^(1/3)` to 1e-9 relative.
#[derive(Clone, Debug)]
pub struct Lattice {
    /// Dimensionless lattice constant, `> 0`.
    pub kappa: f64,
    /// Well depth in eV, if physically specified.
    pub v0: Option<f64>,
    /// Half-period in Ångström, if physically specified.
    pub l0: Option<f64>,
    /// Particle mass in electron masses, if physically specified.
    pub mass: Option<f64>,
    /// Whether `kappa >= kappa0()`, the validity threshold of the
    /// closed-form ids/dos formulas. Construction below the threshold
    /// succeeds but flags this false.
    pub formula_valid: bool,
}

impl Lattice {
    /// A lattice from the dimensionless constant alone.
    pub fn dimensionless(kappa: f64) -> Result<Lattice, CoreError> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(CoreError::NonPositive {
                what: "kappa",
                value: kappa,
            });
        }
        Ok(Lattice {
            kappa,
            v0: None,
            l0: None,
            mass: None,
            formula_valid: kappa >= kappa0(),
        })
    }

    /// A lattice from physical parameters (mass in electron masses, depth in
    /// eV, half-period in Ångström).
    pub fn from_physical(mass: f64, v0: f64, l0: f64) -> Result<Lattice, CoreError> {
        let kappa = kappa_from_physical(mass, v0, l0)?;
        Ok(Lattice {
            kappa,
            v0: Some(v0),
            l0: Some(l0),
            mass: Some(mass),
            formula_valid: kappa >= kappa0(),
        })
    }

    /// Check the internal consistency of the physical fields.
    pub fn validate(&self) -> Result<(), CoreError> {
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(CoreError::NonPositive {
                what: "kappa",
                value: self.kappa,
            });
        }
        if let (Some(m), Some(v), Some(l)) = (self.mass, self.v0, self.l0) {
            let k = kappa_from_physical(m, v, l)?;
            if (k - self.kappa).abs() > 1e-9 * self.kappa {
                return Err(CoreError::InvalidConfig {
                    what: format!(
                        "kappa {} inconsistent with physical fields (expected {})",
                        self.kappa, k
                    ),
                });
            }
        }
        Ok(())
    }
}

/// `kappa = (2 m L0^2 V0 / hbar^2)^(1/3)` from mass in electron masses,
/// depth in eV, half-period in Ångström.
pub fn kappa_from_physical(mass: f64, v0: f64, l0: f64) -> Result<f64, CoreError> {
    for (what, value) in [("mass", mass), ("v0", v0), ("l0", l0)] {
        if !value.is_finite() || value <= 0.0 {
            return Err(CoreError::NonPositive { what, value });
        }
    }
    let m = mass * ELECTRON_MASS_KG;
    let v = v0 * EV_J;
    let l = l0 * ANGSTROM_M;
    Ok((2.0 * m * l * l * v / (HBAR_J_S * HBAR_J_S)).cbrt())
}

/// The sawtooth potential at position `x`. For a physically specified
/// lattice, `x` is in Ångström and the value in eV; for a dimensionless one
/// both are in reduced units (`L0 = V0 = 1`). The value lies in `[-V0, 0]`,
/// is even and `2 L0`-periodic.
pub fn potential(x: f64, lat: &Lattice) -> f64 {
    let l0 = lat.l0.unwrap_or(1.0);
    let v0 = lat.v0.unwrap_or(1.0);
    let mut xi = (x / l0).rem_euclid(2.0);
    if xi > 1.0 {
        xi = 2.0 - xi;
    }
    v0 * (xi - 1.0)
}

// ---------------------------------------------------------------------------
// Airy frames and half-slope propagators
// ---------------------------------------------------------------------------

/// Unscaled Airy values at `t`, reconstructing from the scaled evaluation
/// when `t > 25`. Fails only when the values genuinely overflow f64
/// (`exp(zeta)` past ~1e308, i.e. t beyond ~103).
fn airy_unscaled(t: f64) -> Result<AiryQuad, CoreError> {
    if t <= 25.0 {
        return airy_eval(t);
    }
    let s = airy_eval_scaled(t)?;
    let (ep, em) = (s.log_scale.exp(), (-s.log_scale).exp());
    let q = AiryQuad {
        x: t,
        ai: s.ai_s * em,
        bi: s.bi_s * ep,
        aip: s.aip_s * em,
        bip: s.bip_s * ep,
    };
    if !q.bi.is_finite() || !q.bip.is_finite() {
        return Err(CoreError::Overflow { x: t });
    }
    Ok(q)
}

/// Fundamental Airy matrix `F(t) = [[Ai, Bi], [Ai', Bi']]` with its exact
/// inverse `pi [[Bi', -Bi], [-Ai', Ai]]` (Wronskian `Ai Bi' - Ai' Bi = 1/pi`)
/// and the ODE-reduced derivative `dF/dt = [[Ai', Bi'], [t Ai, t Bi]]`.
struct Frame {
    f: Mat2,
    inv: Mat2,
    dot: Mat2,
}

fn frame(t: f64) -> Result<Frame, CoreError> {
    let q = airy_unscaled(t)?;
    let pi = std::f64::consts::PI;
    Ok(Frame {
        f: Mat2::new(q.ai, q.bi, q.aip, q.bip),
        inv: Mat2::new(pi * q.bip, -pi * q.bi, -pi * q.aip, pi * q.ai),
        dot: Mat2::new(q.aip, q.bip, t * q.ai, t * q.bi),
    })
}

/// The rising-half propagator `R = F(t1) F(t0)^{-1}` with
/// `t0 = -kappa (1 + e)`, `t1 = -kappa e`, mapping the state
/// `(psi, (L0/kappa) psi_x)` from the well bottom `xi = 0` to the cusp
/// `xi = 1`.
fn rising_half(e: f64, kappa: f64) -> Result<Mat2, CoreError> {
    if !e.is_finite() || e <= -1.0 {
        return Err(CoreError::OutOfDomain {
            what: "energy e (requires e > -1)",
            value: e,
        });
    }
    rising_half_extended(e, kappa)
}

fn rising_half_extended(e: f64, kappa: f64) -> Result<Mat2, CoreError> {
    if !e.is_finite() {
        return Err(CoreError::NonFinite { what: "energy e" });
    }
    let t0 = -kappa * (1.0 + e);
    let t1 = -kappa * e;
    let f0 = frame(t0)?;
    let f1 = frame(t1)?;
    Ok(f1.f.mul(&f0.inv))
}

/// One-period monodromy without the `e > -1` domain guard. The disordered
/// chain rescales energies per cell (`e / d_n`), which can legitimately
/// drop below the cell's own potential minimum while the composite energy
/// stays physical; the Airy propagator is perfectly regular there (both
/// arguments positive).
pub(crate) fn monodromy_extended(e: f64, kappa: f64) -> Result<Mat2, CoreError> {
    let r = rising_half_extended(e, kappa)?;
    Ok(r.mul(&r.inv_unimodular().j_conj()))
}

/// Propagator of the state `(psi, (L0/kappa) psi')` across one half-period.
///
/// `rising = true` gives the half where the potential rises (`[0, L0]`,
/// `v = -1 + xi`), `rising = false` the half where it falls (`[-L0, 0]`,
/// `v = -1 - xi`), both traversed left to right. The falling half follows
/// from the rising one by the mirror symmetry `xi -> -xi`: a mirrored
/// solution traverses the rising half *backwards* with the sign of its
/// derivative flipped, so the falling propagator is `J R^{-1} J` with
/// `J = diag(1, -1)` — the inverse appears because mirroring reverses the
/// direction of travel.
pub fn half_slope_propagator(e: f64, rising: bool, lat: &Lattice) -> Result<Mat2, CoreError> {
    let r = rising_half(e, lat.kappa)?;
    Ok(if rising {
        r
    } else {
        r.inv_unimodular().j_conj()
    })
}

/// One-period monodromy over `[-L0, L0]`: the rising half applied after the
/// falling half, `M = R · (J R^{-1} J)`. Determinant 1.
pub fn monodromy(e: f64, lat: &Lattice) -> Result<Mat2, CoreError> {
    let r = rising_half(e, lat.kappa)?;
    Ok(r.mul(&r.inv_unimodular().j_conj()))
}

/// The discriminant `Delta(e) = trace of the monodromy`. In terms of the
/// rising-half entries, `Delta = 2 (r11 r22 + r12 r21)`. Real analytic in
/// `e`; `|Delta| <= 2` exactly on the spectrum.
pub fn discriminant(e: f64, lat: &Lattice) -> Result<f64, CoreError> {
    let r = rising_half(e, lat.kappa)?;
    let d = 2.0 * (r.a11 * r.a22 + r.a12 * r.a21);
    if !d.is_finite() {
        return Err(CoreError::Overflow { x: e });
    }
    Ok(d)
}

/// `Delta(e)` together with its analytic derivative `Delta'(e)`.
///
/// Both Airy arguments move at the same rate `dt/de = -kappa`, so
/// `R' = -kappa (dF(t1) - R dF(t0)) F(t0)^{-1}` and
/// `Delta' = 2 (r11' r22 + r11 r22' + r12' r21 + r12 r21')`.
pub fn discriminant_and_derivative(e: f64, lat: &Lattice) -> Result<(f64, f64), CoreError> {
    let kappa = lat.kappa;
    if !e.is_finite() || e <= -1.0 {
        return Err(CoreError::OutOfDomain {
            what: "energy e (requires e > -1)",
            value: e,
        });
    }
    let t0 = -kappa * (1.0 + e);
    let t1 = -kappa * e;
    let f0 = frame(t0)?;
    let f1 = frame(t1)?;
    let r = f1.f.mul(&f0.inv);
    let rp = f1.dot.sub(&r.mul(&f0.dot)).mul(&f0.inv).smul(-kappa);
    let d = 2.0 * (r.a11 * r.a22 + r.a12 * r.a21);
    let dp = 2.0 * (rp.a11 * r.a22 + r.a11 * rp.a22 + rp.a12 * r.a21 + r.a12 * rp.a21);
    if !d.is_finite() || !dp.is_finite() {
        return Err(CoreError::Overflow { x: e });
    }
    Ok((d, dp))
}

/// Whether `e` belongs to the spectrum of the periodic operator:
/// `|Delta(e)| <= 2`.
pub fn spectrum_indicator(e: f64, lat: &Lattice) -> Result<bool, CoreError> {
    Ok(discriminant(e, lat)?.abs() <= 2.0)
}

// ---------------------------------------------------------------------------
// band edges
// ---------------------------------------------------------------------------

/// One spectral band. Edge types alternate with the ordinal: even bands run
/// from a periodic edge (`Delta = +2`) up to an antiperiodic one
/// (`Delta = -2`), odd bands the other way round.
///
/// `e_min <= e_max` always; equality can occur when a band is genuinely
/// narrower than f64 resolution (deep wells at large `kappa` split by
/// tunneling factors below 1e-16), in which case both edges collapse to the
/// same point.
#[derive(Clone, Copy, Debug)]
pub struct Band {
    /// Ordinal, 0-based from the bottom of the spectrum.
    pub p: usize,
    pub e_min: f64,
    pub e_max: f64,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.e_max - self.e_min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.e_min + self.e_max)
    }

    /// Closed-band membership.
    pub fn contains(&self, e: f64) -> bool {
        self.e_min <= e && e <= self.e_max
    }

    /// True when the lower edge is of periodic type (`Delta = +2`), i.e.
    /// when the ordinal is even.
    pub fn lower_edge_periodic(&self) -> bool {
        self.p % 2 == 0
    }
}

enum ScanIssue {
    /// The edge pattern came out inconsistent; halve the step and rescan.
    Retry,
    Fatal(CoreError),
}

/// Two edges closer than this are treated as a degenerate (sub-resolution)
/// band when rounding noise inverts their order.
const DEGENERATE_SLACK: f64 = 1e-9;

/// All spectral bands with `e_min <= e_ceiling`, edges located to ~1e-12.
///
/// The scan leans on two classical facts about Hill discriminants:
/// `Delta' != 0 wherever |Delta| < 2` (the discriminant is strictly
/// monotone across each band), and `Delta'` has exactly one simple zero in
/// every spectral gap (at the gap's extremum of `|Delta|`). Scanning
/// `Delta'` for sign changes therefore finds one point `g_j` per gap, and
/// between consecutive gap extrema `g_{j-1} < g_j` there lies exactly one
/// band whose two edges are *guaranteed single* sign changes of
/// `Delta - 2` and `Delta + 2` on that interval — no matter how thin the
/// band or the gap (both shrink below f64 resolution at large `kappa`,
/// and gaps of even ordinal collapse fast because the even Fourier
/// coefficients of the sawtooth vanish). The `Delta'` scan step is
/// `min(1e-3, half the smallest expected band spacing)` from the
/// semiclassical level density; a pattern inconsistency (two gap extrema
/// inside one step) halves the step and retries before failing loudly.
pub fn band_edges(lat: &Lattice, e_ceiling: f64) -> Result<Vec<Band>, CoreError> {
    if !e_ceiling.is_finite() || e_ceiling <= -1.0 {
        return Err(CoreError::OutOfDomain {
            what: "e_ceiling (requires > -1)",
            value: e_ceiling,
        });
    }
    // Semiclassical spacing de/dp at the ceiling, the tightest point.
    let spacing = std::f64::consts::PI / (2.0 * lat.kappa.powf(1.5) * (1.0 + e_ceiling).sqrt());
    let mut step = (0.5 * spacing).min(1e-3);
    let mut retries: u32 = 0;
    loop {
        match scan_edges(lat, e_ceiling, step, spacing) {
            Ok(bands) => return Ok(bands),
            Err(ScanIssue::Fatal(err)) => return Err(err),
            Err(ScanIssue::Retry) => {
                retries += 1;
                if retries > 6 {
                    return Err(CoreError::ScanFailure { step, retries });
                }
                step *= 0.5;
            }
        }
    }
}

fn scan_edges(
    lat: &Lattice,
    e_ceiling: f64,
    step: f64,
    spacing: f64,
) -> Result<Vec<Band>, ScanIssue> {
    let start = -1.0 + 1e-9;
    // The ceiling-straddling band is closed by the next gap extremum, at
    // most one band-plus-gap pitch away. Semiclassically the pitch is
    // pi/zeta' with zeta' = kappa^(3/2) (sqrt(1+e) - sqrt(max(e,0))), i.e.
    // pi (sqrt(1+e) + sqrt(max(e,0))) / kappa^(3/2); over-barrier bands
    // widen with energy, so this dominates the fixed margin.
    let pitch = std::f64::consts::PI * ((1.0 + e_ceiling).sqrt() + e_ceiling.max(0.0).sqrt())
        / lat.kappa.powf(1.5);
    let cap = e_ceiling + 2.5 * pitch + 4.0 * spacing + 0.25;

    // --- locate one Delta' zero per gap ------------------------------------
    let dprime = |x: f64| discriminant_and_derivative(x, lat).map(|(_, dp)| dp);
    let mut extrema: Vec<f64> = Vec::new();
    let mut e_prev = start;
    let mut dp_prev = dprime(e_prev).map_err(ScanIssue::Fatal)?;
    let mut k: u64 = 1;
    loop {
        let e = start + k as f64 * step;
        k += 1;
        let dp = dprime(e).map_err(ScanIssue::Fatal)?;
        if (dp_prev < 0.0) != (dp < 0.0) {
            let g = solve::bisect_refined(|x| dprime(x).unwrap_or(f64::NAN), e_prev, e, 1e-12)
                .map_err(ScanIssue::Fatal)?;
            extrema.push(g);
        }
        if extrema.last().is_some_and(|&g| g >= e_ceiling) || e >= cap {
            break;
        }
        e_prev = e;
        dp_prev = dp;
    }
    if extrema.last().is_none_or(|&g| g < e_ceiling) {
        // Never reached a gap above the ceiling: a lost extremum.
        return Err(ScanIssue::Retry);
    }

    // --- verify the gap pattern ---------------------------------------------
    // Gap j has |Delta| >= 2 at its extremum, with alternating sign:
    // Delta < -2 in gap 0, > +2 in gap 1, and so on. A violation means the
    // scan skipped a gap (two extrema in one step).
    let disc = |x: f64| discriminant(x, lat);
    for (j, &g) in extrema.iter().enumerate() {
        let d = disc(g).map_err(ScanIssue::Fatal)?;
        let want_negative = j % 2 == 0;
        if d.abs() < 2.0 - 1e-9 || (d < 0.0) != want_negative {
            return Err(ScanIssue::Retry);
        }
    }

    // --- bisect both edges of band j inside (g_{j-1}, g_j) ------------------
    let refine = |a: f64, b: f64, target: f64| -> Result<f64, ScanIssue> {
        let fa = disc(a).map_err(ScanIssue::Fatal)? - target;
        let fb = disc(b).map_err(ScanIssue::Fatal)? - target;
        // A gap closed to machine precision puts the root at the extremum.
        if fa.abs() <= 1e-13 {
            return Ok(a);
        }
        if fb.abs() <= 1e-13 {
            return Ok(b);
        }
        if (fa < 0.0) == (fb < 0.0) {
            return Err(ScanIssue::Retry);
        }
        solve::bisect_refined(
            |x| disc(x).map(|d| d - target).unwrap_or(f64::NAN),
            a,
            b,
            1e-12,
        )
        .map_err(ScanIssue::Fatal)
    };

    let mut bands = Vec::new();
    let mut lower = start;
    for (p, &upper) in extrema.iter().enumerate() {
        // Even bands run from a Delta = +2 edge to a Delta = -2 edge,
        // odd bands the other way round.
        let (tmin, tmax) = if p % 2 == 0 { (2.0, -2.0) } else { (-2.0, 2.0) };
        let mut lo = refine(lower, upper, tmin)?;
        let mut hi = refine(lower, upper, tmax)?;
        if lo > hi {
            if lo - hi <= DEGENERATE_SLACK {
                let mid = 0.5 * (lo + hi);
                lo = mid;
                hi = mid;
            } else {
                return Err(ScanIssue::Retry);
            }
        }
        if let Some(prev) = bands.last() {
            let prev: &Band = prev;
            if lo < prev.e_max - DEGENERATE_SLACK {
                return Err(ScanIssue::Retry);
            }
        }
        bands.push(Band {
            p,
            e_min: lo,
            e_max: hi,
        });
        lower = upper;
    }
    bands.retain(|b| b.e_min <= e_ceiling);
    Ok(bands)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
