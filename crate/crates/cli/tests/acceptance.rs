//! Acceptance gate: one test per release criterion, each printing a single
//! `ACCEPTANCE n: PASS/FAIL — detail` line (visible with `--nocapture`, or
//! in the failure report). Criteria are asserted at their stated tolerances
//! and never weakened: a criterion the solver genuinely contradicts fails
//! here, loudly.

use sawlat_core::airy::{airy_eval, kappa0};
use sawlat_core::disorder::{empirical_ids, lifshitz_fit, DisorderConfig, EmpiricalIds};
use sawlat_core::finite::{convergence_report, counting_function, eigenvalues, secular_value};
use sawlat_core::fit::linear_fit;
use sawlat_core::lattice::{band_edges, kappa_from_physical, Band, Lattice};
use sawlat_core::oracle::{fd_eigensolve, reference_airy, sawtooth_period_problem, Bc};
use sawlat_core::spectral::{dos, edge_coefficient_with_window, ids, tabulate, BandTable, Side};

fn verdict(n: u32, pass: bool, detail: &str) {
    let line = format!(
        "ACCEPTANCE {n}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    println!("{line}");
    assert!(pass, "{line}");
}

fn lat28() -> Lattice {
    Lattice::dimensionless(2.8).unwrap()
}

// ---------------------------------------------------------------------------
// 1. kappa reproduction from the physical parameter sets
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_kappa_reproduction() {
    let carbon = kappa_from_physical(1.0, 489.99, 3.08).unwrap();
    let hydrogen = kappa_from_physical(1.0, 13.6, 1.0).unwrap();
    let pass = (carbon - 10.682).abs() <= 0.01 && (hydrogen - 1.526).abs() <= 0.01;
    verdict(
        1,
        pass,
        &format!(
            "carbon kappa {carbon:.6} (target 10.682 ± 0.01), hydrogen kappa {hydrogen:.6} \
             (target 1.526 ± 0.01, half-period 1 A reading of the caption's 2 A length)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. band edges against the finite-difference oracle
// ---------------------------------------------------------------------------

/// One-period fd eigenvalues, Richardson-extrapolated from grids of 8000
/// and 16000 points per period (each eigenvalue error is c h^2 + O(h^4),
/// so (4 E_fine - E_coarse)/3 removes the leading term).
fn fd_edges(kappa: f64, bc: Bc, count: usize) -> Vec<f64> {
    let coarse = fd_eigensolve(&sawtooth_period_problem(kappa, 8000, bc, count))
        .unwrap()
        .eigenvalues;
    let fine = fd_eigensolve(&sawtooth_period_problem(kappa, 16000, bc, count))
        .unwrap()
        .eigenvalues;
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

#[test]
fn criterion_02_band_edges_vs_fd_oracle() {
    let mut worst = (0.0f64, 0.0f64); // (error, kappa)
    let mut checked = 0usize;
    for &kappa in &[1.526f64, 2.8, 10.682] {
        let lat = Lattice::dimensionless(kappa).unwrap();
        let bands = band_edges(&lat, 0.0).unwrap();
        // Periodic one-period eigenvalues are the Delta = +2 edges, the
        // antiperiodic ones the Delta = -2 edges.
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for b in &bands {
            if b.p % 2 == 0 {
                plus.push(b.e_min);
                minus.push(b.e_max);
            } else {
                minus.push(b.e_min);
                plus.push(b.e_max);
            }
        }
        plus.sort_by(f64::total_cmp);
        minus.sort_by(f64::total_cmp);
        for (edges, bc) in [(&plus, Bc::Periodic), (&minus, Bc::Antiperiodic)] {
            let oracle = fd_edges(kappa, bc, edges.len());
            for (i, &edge) in edges.iter().enumerate() {
                let err = (edge - oracle[i]).abs();
                if err > worst.0 {
                    worst = (err, kappa);
                }
                checked += 1;
            }
        }
    }
    let pass = worst.0 <= 1e-6;
    verdict(
        2,
        pass,
        &format!(
            "{checked} edges across kappa ∈ {{1.526, 2.8, 10.682}} (all bands with e_min ≤ 0); \
             worst |edge - fd| = {:.2e} at kappa = {} (tolerance 1e-6)",
            worst.0, worst.1
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. counting theorem (2N+2 roots per band, none in gaps)
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_counting_theorem() {
    let lat = lat28();
    let table = BandTable::build(&lat, 1.0).unwrap();
    let mut counts_ok = true;
    let mut found_summary = String::new();
    for &n in &[0usize, 5, 10, 20] {
        let spectrum = eigenvalues(n, &lat, &table).unwrap();
        let required = 2 * n + 2;
        if spectrum.per_band_counts.iter().any(|&c| c != required) {
            counts_ok = false;
        }
        found_summary.push_str(&format!(
            " N={n}: {:?} (required {required});",
            spectrum.per_band_counts
        ));
    }
    // Gap scan: no secular sign changes strictly between and above the bands.
    let mut gap_roots = 0usize;
    for n in [0usize, 5, 10, 20] {
        for gap in [
            (table.bands[0].e_max + 1e-9, table.bands[1].e_min - 1e-9),
            (table.bands[1].e_max + 1e-9, -1e-6),
        ] {
            let m = 400;
            let mut prev = secular_value(gap.0, n, &lat).unwrap();
            for i in 1..=m {
                let e = gap.0 + (gap.1 - gap.0) * i as f64 / m as f64;
                let cur = secular_value(e, n, &lat).unwrap();
                if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
                    gap_roots += 1;
                }
                prev = cur;
            }
        }
    }
    let pass = counts_ok && gap_roots == 0;
    verdict(
        3,
        pass,
        &format!(
            "per-band secular root counts:{found_summary} gap roots {gap_roots}. The solved \
             counting function converges to the IDS and hits the exact half-integer gap \
             labels with the found counts; the 2N+2 requirement is not met by H_(2N+1)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 4. finite-size IDS convergence
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_ids_convergence() {
    let lat = lat28();
    let table = BandTable::build(&lat, 1.0).unwrap();
    let grid: Vec<f64> = (0..1000)
        .map(|i| -1.0 + 1e-6 + (1.0 - 2e-6) * i as f64 / 999.0)
        .collect();
    let rows = convergence_report(&lat, &table, &[10, 20, 40, 80], &grid).unwrap();
    let sups: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    let ratios: Vec<f64> = sups.windows(2).map(|w| w[0] / w[1]).collect();
    let ratios_ok = ratios.iter().all(|r| (1.5..=3.0).contains(r));
    let ln_n: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ln_sup: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
    let exponent = -linear_fit(&ln_n, &ln_sup).slope;
    let pass = ratios_ok && (0.5..=1.5).contains(&exponent);
    let sup_list: Vec<String> = sups.iter().map(|s| format!("{s:.3e}")).collect();
    verdict(
        4,
        pass,
        &format!(
            "sup errors [{}] over N ∈ {{10, 20, 40, 80}}, halving ratios {ratios:.2?} \
             (required [1.5, 3]), decay exponent {exponent:.3} vs 1/N (required [0.5, 1.5])",
            sup_list.join(", ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 5. gap labelling (half-integer IDS on gaps)
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_gap_labelling() {
    let mut worst = 0.0f64;
    let mut gaps_checked = 0usize;
    for &kappa in &[2.8f64, 10.682] {
        let lat = Lattice::dimensionless(kappa).unwrap();
        let table = BandTable::build(&lat, 0.5).unwrap();
        // Below the spectrum the label is 0.
        let below = ids((-1.0 + table.bands[0].e_min) / 2.0, &lat, &table).unwrap();
        worst = worst.max(below.abs());
        for w in table.bands.windows(2) {
            let (lo, hi) = (w[0].e_max, w[1].e_min);
            if hi - lo <= 1e-8 {
                continue; // gap closed beyond resolution, no interior to probe
            }
            let label = (w[0].p + 1) as f64 * 0.5;
            let mut probed = false;
            for frac in [0.25, 0.5, 0.75] {
                let e = lo + (hi - lo) * frac;
                if e >= 0.0 {
                    continue; // criterion concerns gaps below e = 0
                }
                let dev = (ids(e, &lat, &table).unwrap() - label).abs();
                worst = worst.max(dev);
                probed = true;
            }
            if probed {
                gaps_checked += 1;
            }
        }
    }
    let pass = worst <= 1e-9;
    verdict(
        5,
        pass,
        &format!(
            "{gaps_checked} open gaps below e = 0 at kappa ∈ {{2.8, 10.682}}; worst deviation \
             from the half-integer label {worst:.2e} (tolerance 1e-9)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. square-root edge exponents and coefficients
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_edge_exponents() {
    let lat = lat28();
    let table = BandTable::build(&lat, 2.5).unwrap();
    let eps: Vec<f64> = (0..9)
        .map(|i| 1e-6 * (1e-3f64 / 1e-6).powf(i as f64 / 8.0))
        .collect();
    let ln_eps: Vec<f64> = eps.iter().map(|d| d.ln()).collect();
    let mut worst_dos = 0.0f64;
    let mut worst_ids = 0.0f64;
    let mut worst_k_shift = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for p in 0..=4usize {
        let band = table.bands[p];
        for side in [Side::Lower, Side::Upper] {
            let (edge, ids_edge, dir) = match side {
                Side::Lower => (band.e_min, p as f64 * 0.5, 1.0),
                Side::Upper => (band.e_max, (p + 1) as f64 * 0.5, -1.0),
            };
            let ln_dos: Vec<f64> = eps
                .iter()
                .map(|&d| dos(edge + dir * d, &lat, &table).unwrap().ln())
                .collect();
            let ln_inc: Vec<f64> = eps
                .iter()
                .map(|&d| (dir * (ids(edge + dir * d, &lat, &table).unwrap() - ids_edge)).ln())
                .collect();
            worst_dos = worst_dos.max((linear_fit(&ln_eps, &ln_dos).slope + 0.5).abs());
            worst_ids = worst_ids.max((linear_fit(&ln_eps, &ln_inc).slope - 0.5).abs());
            let c1 = edge_coefficient_with_window(p, side, &lat, &table, 1e-4).unwrap();
            let c2 = edge_coefficient_with_window(p, side, &lat, &table, 5e-5).unwrap();
            worst_k_shift = worst_k_shift.max((c1.k_value - c2.k_value).abs() / c1.k_value.abs());
            for c in [c1, c2] {
                worst_ratio = worst_ratio.max((c.r_value / c.k_value - 0.5).abs() / 0.5);
            }
        }
    }
    let pass =
        worst_dos <= 0.05 && worst_ids <= 0.05 && worst_k_shift <= 0.05 && worst_ratio <= 0.02;
    verdict(
        6,
        pass,
        &format!(
            "10 edges (bands p ≤ 4, window [1e-6, 1e-3]): worst |dos slope + 1/2| = \
             {worst_dos:.4}, worst |ids slope - 1/2| = {worst_ids:.4} (tolerance 0.05); \
             coefficient shift under window halving {worst_k_shift:.4} (≤ 0.05); \
             r/k off 1/2 by {worst_ratio:.4} relative (≤ 0.02)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. band mass, positivity, monotonicity, IDS'-DOS consistency
// ---------------------------------------------------------------------------

/// Integral of the DOS over one band. The substitution
/// `e = mid - half cos(theta)` absorbs both inverse-square-root edge
/// singularities: the integrand becomes analytic and even at both endpoint
/// mirrors, so the midpoint rule converges spectrally.
fn band_mass(b: &Band, lat: &Lattice, table: &BandTable, nodes: usize) -> f64 {
    let (mid, half) = (b.midpoint(), 0.5 * b.width());
    let h = std::f64::consts::PI / nodes as f64;
    let mut sum = 0.0;
    for j in 0..nodes {
        let theta = (j as f64 + 0.5) * h;
        let e = mid - half * theta.cos();
        sum += dos(e, lat, table).unwrap() * half * theta.sin();
    }
    sum * h
}

#[test]
fn criterion_07_band_mass_and_consistency() {
    let lat = lat28();
    let table = BandTable::build(&lat, 2.5).unwrap();
    let mut worst_mass = 0.0f64;
    for p in 0..=4usize {
        let mass = band_mass(&table.bands[p], &lat, &table, 2000);
        // Quadrature self-check: doubling the nodes moves nothing.
        assert!((mass - band_mass(&table.bands[p], &lat, &table, 1000)).abs() < 1e-9);
        worst_mass = worst_mass.max((mass - 0.5).abs());
    }
    // Positivity and monotonicity over a full tabulation.
    let tab = tabulate(&lat, -0.999, 2.4, 300, 1e-6).unwrap();
    let dos_nonneg = tab.rows.iter().all(|r| r.dos.is_none_or(|d| d >= 0.0));
    let ids_monotone = tab.rows.windows(2).all(|w| w[1].ids >= w[0].ids - 1e-12);
    // Centered-difference IDS' against the closed-form DOS, inside bands.
    let h = 1e-6;
    let mut worst_rel = 0.0f64;
    for p in 0..=4usize {
        let b = table.bands[p];
        let margin = 0.05 * b.width();
        for i in 0..20 {
            let e = b.e_min + margin + (b.width() - 2.0 * margin) * i as f64 / 19.0;
            let di =
                (ids(e + h, &lat, &table).unwrap() - ids(e - h, &lat, &table).unwrap()) / (2.0 * h);
            let d = dos(e, &lat, &table).unwrap();
            worst_rel = worst_rel.max((di - d).abs() / d);
        }
    }
    let pass = worst_mass <= 1e-6 && dos_nonneg && ids_monotone && worst_rel <= 1e-4;
    verdict(
        7,
        pass,
        &format!(
            "worst |band mass - 1/2| = {worst_mass:.2e} over p ≤ 4 (tolerance 1e-6); dos ≥ 0: \
             {dos_nonneg}; ids monotone: {ids_monotone}; worst relative IDS'-DOS mismatch \
             {worst_rel:.2e} (tolerance 1e-4)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. Airy kernel accuracy, Wronskian, kappa0
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_airy_kernel() {
    let mut worst_rel = 0.0f64;
    let mut worst_wronskian = 0.0f64;
    let mut x = -20.0f64;
    while x <= 20.0 + 1e-9 {
        let fast = airy_eval(x).unwrap();
        let slow = reference_airy(x, 25).unwrap();
        for (got, want) in [
            (fast.ai, slow.ai.to_f64()),
            (fast.bi, slow.bi.to_f64()),
            (fast.aip, slow.aip.to_f64()),
            (fast.bip, slow.bip.to_f64()),
        ] {
            worst_rel = worst_rel.max((got - want).abs() / want.abs());
        }
        let w = std::f64::consts::PI * (fast.ai * fast.bip - fast.aip * fast.bi);
        worst_wronskian = worst_wronskian.max((w - 1.0).abs());
        x += 0.125;
    }
    let k0 = kappa0();
    let pass = worst_rel <= 1e-12 && worst_wronskian <= 1e-12 && (k0 - 1.515).abs() <= 1e-3;
    verdict(
        8,
        pass,
        &format!(
            "worst relative error vs oracle on [-20, 20]: {worst_rel:.2e} (tolerance 1e-12); \
             worst normalized Wronskian residual {worst_wronskian:.2e} (tolerance 1e-12); \
             kappa0 = {k0:.6} (target 1.515 ± 1e-3)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 9. Lifshitz probe
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_lifshitz_probe() {
    // Synthetic exact law: the fit must recover the exponent to 1e-6.
    let e0 = -1.1;
    let grid: Vec<f64> = (0..40)
        .map(|i| e0 + 1e-3 * (0.3f64 / 1e-3).powf(i as f64 / 39.0))
        .collect();
    let ids_syn: Vec<f64> = grid.iter().map(|&e| (-(e - e0).powf(-0.5)).exp()).collect();
    let n = grid.len();
    let synthetic = EmpiricalIds {
        grid,
        ids_mean: ids_syn,
        ids_stderr: vec![0.0; n],
        min_eigenvalue: e0,
        e0_hat: e0,
        samples: 1,
        seed: 0,
        delta: 0.0,
        n_sites: 1,
    };
    let syn_fit = lifshitz_fit(&synthetic).unwrap();
    let syn_ok = (syn_fit.exponent + 0.5).abs() <= 1e-6;

    // Monte-Carlo experiment at the stated scale.
    let started = std::time::Instant::now();
    let config = DisorderConfig {
        lattice: lat28(),
        delta: 0.3,
        n_sites: 401,
        samples: 100,
        seed: 1,
    };
    let mc_grid: Vec<f64> = (0..400)
        .map(|i| -1.3 + 1e-3 + (1.3 - 2e-3) * i as f64 / 399.0)
        .collect();
    let emp = empirical_ids(&config, &mc_grid).unwrap();
    let fit = lifshitz_fit(&emp).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let mismatch_flag = fit.stderr > 0.1;
    let mc_ok = (-0.8..=-0.3).contains(&fit.exponent) && !mismatch_flag && elapsed <= 600.0;

    // delta = 0 must reduce exactly to the periodic counting function.
    let clean = DisorderConfig {
        lattice: lat28(),
        delta: 0.0,
        n_sites: 41,
        samples: 1,
        seed: 9,
    };
    let red_grid: Vec<f64> = (0..60)
        .map(|i| -0.9993 + (0.9993 - 1e-4) * i as f64 / 59.0)
        .collect();
    let red = empirical_ids(&clean, &red_grid).unwrap();
    let table = BandTable::build(&clean.lattice, 1.0).unwrap();
    let finite = eigenvalues(20, &clean.lattice, &table).unwrap();
    let red_err = red_grid
        .iter()
        .zip(&red.ids_mean)
        .map(|(&e, &v)| (v - counting_function(e, &finite)).abs())
        .fold(0.0f64, f64::max);
    let red_ok = red_err <= 1e-12;

    let pass = syn_ok && mc_ok && red_ok;
    verdict(
        9,
        pass,
        &format!(
            "synthetic exponent {:.8} (target -0.5 ± 1e-6); Monte-Carlo (kappa 2.8, delta 0.3, \
             401 sites, 100 samples) exponent {:.4} ± {:.4} in [-0.8, -0.3], mismatch flag \
             {mismatch_flag}, {elapsed:.0}s of 600s; delta = 0 reduction error {red_err:.2e} \
             (tolerance 1e-12)",
            syn_fit.exponent, fit.exponent, fit.stderr
        ),
    );
}

// ---------------------------------------------------------------------------
// 10. figure regeneration (scripted checks on the emitted tables)
// ---------------------------------------------------------------------------

fn run_table(cmd: &str) -> Vec<(f64, String, f64, Option<f64>, String)> {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_sawlat"))
        .args([
            cmd, "--kappa", "2.8", "--emin", "-1", "--emax", "0.6", "--points", "300",
        ])
        .output()
        .expect("binary spawns");
    assert!(out.status.success());
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[1].parse().unwrap(), // e
                f[2].to_string(),      // band/gap marker
                f[4].parse().unwrap(), // ids
                f[5].parse().ok(),     // dos (empty on guards)
                f[6].to_string(),      // flag
            )
        })
        .collect()
}

#[test]
fn criterion_10_figure_regeneration() {
    let ids_rows = run_table("ids");
    let dos_rows = run_table("dos");

    // Two bands below e = 0, and gap plateaus at exactly 1/2 and 1.
    let bands_below: std::collections::BTreeSet<&str> = ids_rows
        .iter()
        .filter(|r| r.4 != "gap" && r.0 < 0.0)
        .map(|r| r.1.as_str())
        .collect();
    let two_bands = bands_below.len() == 2;
    let mut plateau_dev: f64 = 0.0;
    let mut plateau_05 = false;
    let mut plateau_10 = false;
    for r in ids_rows
        .iter()
        .filter(|r| r.4 == "gap" && r.0 < 0.0 && r.0 > -0.6)
    {
        let nearest = (2.0 * r.2).round() / 2.0;
        plateau_dev = plateau_dev.max((r.2 - nearest).abs());
        if (r.2 - 0.5).abs() <= 1e-9 {
            plateau_05 = true;
        }
        if (r.2 - 1.0).abs() <= 1e-9 {
            plateau_10 = true;
        }
    }
    let plateaus_ok = plateau_dev <= 1e-9 && plateau_05 && plateau_10;

    // Per-band U-shape of the DOS below e = 0: the minimum sits deep in the
    // interior and both edges tower over it.
    let mut u_shapes = 0usize;
    for band in ["0", "1"] {
        let vals: Vec<f64> = dos_rows
            .iter()
            .filter(|r| r.1 == *band && r.4 == "band" && r.3.is_some())
            .map(|r| r.3.unwrap())
            .collect();
        let (argmin, &min) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        if argmin > vals.len() / 10
            && argmin < vals.len() * 9 / 10
            && vals[0] > 2.0 * min
            && vals[vals.len() - 1] > 2.0 * min
        {
            u_shapes += 1;
        }
    }
    let pass = two_bands && plateaus_ok && u_shapes == 2;
    verdict(
        10,
        pass,
        &format!(
            "bands below 0: {} (need 2); gap plateau deviation {plateau_dev:.2e} with the 1/2 \
             and 1 plateaus present: {}; interior DOS minima (U-shape) in 2 bands: {u_shapes}",
            bands_below.len(),
            plateau_05 && plateau_10
        ),
    );
}
