//! Monte-Carlo probe of the disorder-averaged integrated density of states
//! for random well depths, with an empirical Lifshitz-exponent fit.
//!
//! Depth disorder multiplies the potential of well n by `d_n = 1 + delta
//! omega_n`, `omega_n` i.i.d. uniform on [0, 1). Dividing the cell equation
//! by `d_n` shows each cell is the clean sawtooth problem at
//! `kappa_n = kappa d_n^(1/3)` and cell energy `e / d_n`, so every cell
//! transfer reuses the Airy half-slope propagators unchanged.
//!
//! Eigenvalues below a query energy are counted exactly by Sturm
//! oscillation along the chain, not by scanning in energy: the
//! left-decaying solution is propagated cell by cell, each cell's interior
//! zero count is pinned down by the cell's clean rotation phase (band
//! edges interpolated in kappa across the depth range) combined with the
//! observed sign flip of psi, and the sign of the final secular pairing
//! settles the remaining boundary term. An energy sweep would miss
//! near-degenerate level pairs — routine for localized states in the
//! Lifshitz tail, whose spacings are Poissonian — while the oscillation
//! count cannot.

use crate::lattice::{band_edges, monodromy_extended, Lattice};
use crate::oracle::{fd_eigensolve, Bc, FdProblem};
use crate::CoreError;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;

/// Grid points with mean ids above this are left out of the Lifshitz fit:
/// closer to the band than this, the clean square-root edge law takes over
/// from the stretched-exponential tail.
pub const IDS_FIT_CAP: f64 = 0.2;

// ---------------------------------------------------------------------------
// configuration and sampling
// ---------------------------------------------------------------------------

/// Monte-Carlo setup: base lattice, relative depth disorder `delta`, number
/// of wells, number of samples, and the RNG seed.
#[derive(Clone, Debug)]
pub struct DisorderConfig {
    pub lattice: Lattice,
    pub delta: f64,
    pub n_sites: usize,
    pub samples: usize,
    pub seed: u64,
}

impl DisorderConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        self.lattice.validate()?;
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(CoreError::InvalidConfig {
                what: format!(
                    "disorder strength delta = {} (needs delta >= 0)",
                    self.delta
                ),
            });
        }
        if self.n_sites == 0 {
            return Err(CoreError::InvalidConfig {
                what: "n_sites = 0".into(),
            });
        }
        if self.samples == 0 {
            return Err(CoreError::InvalidConfig {
                what: "samples = 0".into(),
            });
        }
        Ok(())
    }
}

/// Per-well depths `V0 (1 + delta omega_n)` for one disorder realization
/// (eV for a physically specified lattice, reduced units with `V0 = 1`
/// otherwise). The stream is keyed by `(seed, sample_index)`, so any sample
/// can be regenerated independently of execution order.
pub fn sample_depths(config: &DisorderConfig, sample_index: usize) -> Result<Vec<f64>, CoreError> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(sample_index as u64);
    let v0 = config.lattice.v0.unwrap_or(1.0);
    Ok((0..config.n_sites)
        .map(|_| v0 * (1.0 + config.delta * rng.gen::<f64>()))
        .collect())
}

// ---------------------------------------------------------------------------
// clean band edges across the depth range
// ---------------------------------------------------------------------------

/// Clean band edges as functions of kappa over `[kappa, kappa
/// (1+delta)^(1/3)]`, sampled at Chebyshev nodes and read back by
/// barycentric interpolation. A cell's rotation phase needs to know how
/// many clean edges sit below its rescaled energy; the edges are analytic
/// in kappa, so a handful of nodes reproduces them far below the accuracy
/// that matters for counting.
struct EdgeFamily {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// edges[node][edge index], ascending per node, common length.
    edges: Vec<Vec<f64>>,
}

const EDGE_CEILING: f64 = 0.3;

fn edge_family(lat: &Lattice, delta: f64) -> Result<EdgeFamily, CoreError> {
    let k_lo = lat.kappa;
    let k_hi = lat.kappa * (1.0 + delta).powf(1.0 / 3.0);
    let flatten = |lat: &Lattice| -> Result<Vec<f64>, CoreError> {
        Ok(band_edges(lat, EDGE_CEILING)?
            .iter()
            .flat_map(|b| [b.e_min, b.e_max])
            .collect())
    };
    if k_hi - k_lo < 1e-12 {
        return Ok(EdgeFamily {
            nodes: vec![k_lo],
            weights: vec![1.0],
            edges: vec![flatten(lat)?],
        });
    }
    const M: usize = 17;
    let mut nodes = Vec::with_capacity(M);
    let mut weights = Vec::with_capacity(M);
    let mut edges = Vec::with_capacity(M);
    for j in 0..M {
        let t = (2 * j + 1) as f64 * PI / (2.0 * M as f64);
        let kap = 0.5 * (k_lo + k_hi) + 0.5 * (k_hi - k_lo) * t.cos();
        edges.push(flatten(&Lattice::dimensionless(kap)?)?);
        nodes.push(kap);
        weights.push(if j % 2 == 0 { t.sin() } else { -t.sin() });
    }
    let len = edges.iter().map(Vec::len).min().unwrap_or(0);
    for row in &mut edges {
        row.truncate(len);
    }
    Ok(EdgeFamily {
        nodes,
        weights,
        edges,
    })
}

impl EdgeFamily {
    fn edges_at(&self, kappa: f64) -> Vec<f64> {
        if self.nodes.len() == 1 {
            return self.edges[0].clone();
        }
        let mut coeffs = Vec::with_capacity(self.nodes.len());
        for (j, &x) in self.nodes.iter().enumerate() {
            let d = kappa - x;
            if d == 0.0 {
                return self.edges[j].clone();
            }
            coeffs.push(self.weights[j] / d);
        }
        let denom: f64 = coeffs.iter().sum();
        let n_edges = self.edges[0].len();
        (0..n_edges)
            .map(|i| {
                coeffs
                    .iter()
                    .zip(&self.edges)
                    .map(|(c, row)| c * row[i])
                    .sum::<f64>()
                    / denom
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// one disorder realization
// ---------------------------------------------------------------------------

struct Chain {
    kappa: f64,
    kappas: Vec<f64>,
    inv_d: Vec<f64>,
    cell_edges: Vec<Vec<f64>>,
    e_floor: f64,
    sign_bot: f64,
}

fn build_chain(
    config: &DisorderConfig,
    sample_index: usize,
    family: &EdgeFamily,
) -> Result<Chain, CoreError> {
    let depths = sample_depths(config, sample_index)?;
    let v0 = config.lattice.v0.unwrap_or(1.0);
    let kappa = config.lattice.kappa;
    let mut kappas = Vec::with_capacity(depths.len());
    let mut inv_d = Vec::with_capacity(depths.len());
    let mut cell_edges = Vec::with_capacity(depths.len());
    for depth in &depths {
        let d = depth / v0;
        let kap = kappa * d.powf(1.0 / 3.0);
        kappas.push(kap);
        inv_d.push(1.0 / d);
        cell_edges.push(family.edges_at(kap));
    }
    // Strictly below the lowest possible level: the potential minimum is
    // -max(d_n) and the ground state sits a zero-point energy above it.
    let e_floor = -(1.0 + config.delta) - 1e-6;
    let mut chain = Chain {
        kappa,
        kappas,
        inv_d,
        cell_edges,
        e_floor,
        sign_bot: 1.0,
    };
    let (z, s) = oscillation_count(&chain, e_floor)?;
    debug_assert_eq!(z, 0, "states found below the potential floor");
    if s == 0.0 {
        return Err(CoreError::NearZeroDivision {
            what: "secular pairing at the energy floor",
        });
    }
    chain.sign_bot = s.signum();
    Ok(chain)
}

/// Number of zeros the cell flow pushes psi through, from the cell's
/// rotation phase and the observed entry/exit directions.
///
/// The direction angle `theta = atan2(psi, slope)` (mod pi) increases
/// monotonically whenever psi = 0, so zeros crossed equal the multiples of
/// pi crossed by the lifted angle. The lift is fixed in two steps: the
/// true per-cell rotation deviates from the clean rotation phase by less
/// than pi (leaving two candidates one pi apart), and the parity of the
/// crossing count must match the observed sign flip of psi (selecting
/// one).
fn cell_zero_count(theta_cell: f64, t_in: [f64; 2], t_out: [f64; 2]) -> i64 {
    let th_in = f64::atan2(t_in[0], t_in[1]).rem_euclid(PI);
    let th_out = f64::atan2(t_out[0], t_out[1]).rem_euclid(PI);
    let base = th_out - th_in;
    let k = ((theta_cell - base) / PI).round();
    let rho = base + k * PI;
    let mut z = ((th_in + rho) / PI).floor() as i64;
    let flip = (t_in[0] < 0.0) != (t_out[0] < 0.0);
    if (z.rem_euclid(2) == 1) != flip {
        z += if rho > theta_cell { -1 } else { 1 };
    }
    debug_assert!(z >= 0, "negative zero count survived the parity fix");
    z.max(0)
}

/// Clean rotation phase of one cell: `p pi` plus the in-band Bloch phase
/// oriented by the band parity, where 2p+1 (in a band) or 2p (in a gap)
/// clean edges lie below the cell energy.
fn cell_phase(edges_below: usize, half_trace: f64) -> f64 {
    let p = edges_below / 2;
    if edges_below % 2 == 1 {
        let phi = half_trace.clamp(-1.0, 1.0).acos();
        let oriented = if p % 2 == 0 { phi } else { PI - phi };
        p as f64 * PI + oriented
    } else {
        p as f64 * PI
    }
}

/// Exact count of chain eigenvalues strictly below `e`, together with the
/// (rescaled) secular pairing value there.
fn oscillation_count(chain: &Chain, e: f64) -> Result<(usize, f64), CoreError> {
    let mu = chain.kappa.powf(1.5) * (-e).sqrt();
    let mut u = [1.0, mu];
    let mut z_total: i64 = 0;
    for n in 0..chain.kappas.len() {
        let kap = chain.kappas[n];
        let e_n = e * chain.inv_d[n];
        let m = monodromy_extended(e_n, kap)?;
        let t_in = [u[0], u[1] / kap];
        let t_out = m.apply(t_in);
        let below = chain.cell_edges[n].partition_point(|&x| x < e_n);
        z_total += cell_zero_count(cell_phase(below, m.trace() / 2.0), t_in, t_out);
        u = [t_out[0], kap * t_out[1]];
        let a = u[0].abs().max(u[1].abs());
        if a > 1e100 {
            u[0] /= a;
            u[1] /= a;
        } else if a > 0.0 && a < 1e-100 {
            u[0] *= 1e100;
            u[1] *= 1e100;
        }
    }
    let s = mu * u[0] + u[1];
    // The pairing flips sign at every simple eigenvalue, so its sign
    // relative to the floor fixes whether the right boundary has passed
    // one more matching direction than psi has zeros.
    let parity = i64::from((s < 0.0) != (chain.sign_bot < 0.0));
    let c = (parity - z_total).rem_euclid(2);
    Ok(((z_total + c) as usize, s))
}

// ---------------------------------------------------------------------------
// averaged counting function
// ---------------------------------------------------------------------------

/// Disorder-averaged counting function on a fixed grid, with the spectral
/// bottom estimate.
#[derive(Clone, Debug)]
pub struct EmpiricalIds {
    pub grid: Vec<f64>,
    pub ids_mean: Vec<f64>,
    pub ids_stderr: Vec<f64>,
    /// Lowest eigenvalue seen across all samples.
    pub min_eigenvalue: f64,
    /// Spectral bottom estimate: `min_eigenvalue` minus one grid step.
    pub e0_hat: f64,
    pub samples: usize,
    pub seed: u64,
    pub delta: f64,
    pub n_sites: usize,
}

impl EmpiricalIds {
    /// CSV rows "E,e,ids_mean,ids_stderr" with `E = unit_scale * e`.
    pub fn to_csv(&self, unit_scale: f64) -> String {
        let mut out = String::from("E,e,ids_mean,ids_stderr\n");
        for j in 0..self.grid.len() {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e}\n",
                unit_scale * self.grid[j],
                self.grid[j],
                self.ids_mean[j],
                self.ids_stderr[j]
            ));
        }
        out
    }
}

/// Mean over samples of the finite-volume counting function
/// `#{lambda < e} / (2 n_sites)` at each grid energy.
///
/// Before any averaging, the transfer-matrix count is calibrated against
/// the finite-difference oracle on an 11-well realization drawn from the
/// same stream; a disagreement beyond one level aborts the run.
pub fn empirical_ids(config: &DisorderConfig, grid: &[f64]) -> Result<EmpiricalIds, CoreError> {
    config.validate()?;
    if grid.len() < 2 {
        return Err(CoreError::InvalidConfig {
            what: "ids grid needs >= 2 points".into(),
        });
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || !grid.iter().all(|x| x.is_finite()) {
        return Err(CoreError::InvalidConfig {
            what: "ids grid must be strictly ascending".into(),
        });
    }
    if grid[0] <= -(1.0 + config.delta) || *grid.last().unwrap() >= 0.0 {
        return Err(CoreError::InvalidConfig {
            what: format!(
                "ids grid must lie inside (-(1+delta), 0) = ({}, 0)",
                -(1.0 + config.delta)
            ),
        });
    }
    let family = edge_family(&config.lattice, config.delta)?;
    calibration_guard(config, &family)?;

    let norm = 1.0 / (2.0 * config.n_sites as f64);
    let mut sum = vec![0.0f64; grid.len()];
    let mut sumsq = vec![0.0f64; grid.len()];
    let mut min_eig = f64::INFINITY;
    for sample in 0..config.samples {
        let chain = build_chain(config, sample, &family)?;
        let mut first_occupied: Option<usize> = None;
        for (j, &e) in grid.iter().enumerate() {
            let (count, _) = oscillation_count(&chain, e)?;
            if count > 0 && first_occupied.is_none() {
                first_occupied = Some(j);
            }
            let x = count as f64 * norm;
            sum[j] += x;
            sumsq[j] += x * x;
        }
        if let Some(j) = first_occupied {
            // The lowest level lies between the previous grid point (or the
            // floor) and grid[j]; bisect the integer count down to 1e-9.
            let mut lo = if j == 0 { chain.e_floor } else { grid[j - 1] };
            let mut hi = grid[j];
            while hi - lo > 1e-9 {
                let mid = 0.5 * (lo + hi);
                if oscillation_count(&chain, mid)?.0 > 0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            min_eig = min_eig.min(hi);
        }
    }
    let s = config.samples as f64;
    let ids_mean: Vec<f64> = sum.iter().map(|x| x / s).collect();
    let ids_stderr: Vec<f64> = if config.samples > 1 {
        sumsq
            .iter()
            .zip(&ids_mean)
            .map(|(&sq, &m)| ((sq - s * m * m).max(0.0) / (s * (s - 1.0))).sqrt())
            .collect()
    } else {
        vec![0.0; grid.len()]
    };
    let step = grid[1] - grid[0];
    Ok(EmpiricalIds {
        grid: grid.to_vec(),
        ids_mean,
        ids_stderr,
        min_eigenvalue: min_eig,
        e0_hat: min_eig - step,
        samples: config.samples,
        seed: config.seed,
        delta: config.delta,
        n_sites: config.n_sites,
    })
}

/// Dirichlet finite-difference box holding the given disordered wells,
/// padded by 12 half-periods of zero potential.
fn disordered_box_problem(
    config: &DisorderConfig,
    depths: &[f64],
    n_per_period: usize,
    count: usize,
) -> FdProblem {
    let v0 = config.lattice.v0.unwrap_or(1.0);
    let n_sites = depths.len();
    let edge = n_sites as f64;
    let pad = 12.0;
    let h = 2.0 / n_per_period as f64;
    let mut m = (2.0 * (edge + pad) / h).ceil() as usize;
    if m % 2 != 0 {
        m += 1;
    }
    let half_len = m as f64 * h / 2.0;
    let v: Vec<f64> = (0..=m)
        .map(|i| {
            let xi = -half_len + i as f64 * h;
            if xi.abs() <= edge {
                let cell = (((xi + edge) / 2.0).floor() as usize).min(n_sites - 1);
                let local = xi + edge - 2.0 * cell as f64 - 1.0;
                (depths[cell] / v0) * (-1.0 + local.abs())
            } else {
                0.0
            }
        })
        .collect();
    let kappa = config.lattice.kappa;
    FdProblem {
        v,
        h,
        coeff: 1.0 / (kappa * kappa * kappa),
        bc: Bc::Dirichlet,
        count,
    }
}

fn calibration_guard(config: &DisorderConfig, family: &EdgeFamily) -> Result<(), CoreError> {
    let guard_cfg = DisorderConfig {
        n_sites: 11,
        samples: 1,
        ..config.clone()
    };
    let chain = build_chain(&guard_cfg, 0, family)?;
    let e_cal = -1e-9;
    let (tm_count, _) = oscillation_count(&chain, e_cal)?;
    let depths = sample_depths(&guard_cfg, 0)?;
    let problem = disordered_box_problem(&guard_cfg, &depths, 2000, (tm_count + 8).min(50));
    let fd = fd_eigensolve(&problem)?;
    let fd_count = fd.eigenvalues.iter().filter(|&&x| x < e_cal).count();
    if tm_count.abs_diff(fd_count) > 1 {
        return Err(CoreError::OracleMismatch {
            detail: format!(
                "calibration at 11 sites (seed {}): transfer-matrix count {} vs \
                 finite-difference count {}",
                config.seed, tm_count, fd_count
            ),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Lifshitz fit
// ---------------------------------------------------------------------------

/// Least-squares fit of `ln(-ln IDS)` against `ln(e - e0_hat)` over the
/// deep-tail window.
#[derive(Clone, Copy, Debug)]
pub struct LifshitzFit {
    pub e0_hat: f64,
    /// Energy window actually used, (first, last) grid value.
    pub window: (f64, f64),
    /// Fitted slope; -1/2 for the stretched-exponential Lifshitz law.
    pub exponent: f64,
    /// Standard error of the slope; large values flag that the data do not
    /// follow a pure power of `e - e0` inside the log-log frame.
    pub stderr: f64,
    pub n_points: usize,
}

/// Fit the Lifshitz exponent from an averaged curve. Grid points enter the
/// fit while `0 < ids_mean <= IDS_FIT_CAP`; fewer than 8 such points is an
/// error.
pub fn lifshitz_fit(emp: &EmpiricalIds) -> Result<LifshitzFit, CoreError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut window = (f64::NAN, f64::NAN);
    for j in 0..emp.grid.len() {
        let ids = emp.ids_mean[j];
        let e = emp.grid[j];
        if ids > 0.0 && ids <= IDS_FIT_CAP && e > emp.e0_hat {
            xs.push((e - emp.e0_hat).ln());
            ys.push((-ids.ln()).ln());
            if window.0.is_nan() {
                window.0 = e;
            }
            window.1 = e;
        }
    }
    if xs.len() < 8 {
        return Err(CoreError::TooFewFitPoints {
            found: xs.len(),
            need: 8,
        });
    }
    let fit = crate::fit::linear_fit(&xs, &ys);
    Ok(LifshitzFit {
        e0_hat: emp.e0_hat,
        window,
        exponent: fit.slope,
        stderr: fit.slope_stderr,
        n_points: xs.len(),
    })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
