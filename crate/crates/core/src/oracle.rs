//! Independent brute-force validators for the analytic kernel paths:
//! Simpson z-quadrature of the first-order interaction kernel, a direct
//! linear solve of the boundary continuity system, and a literal
//! domain-by-domain poled sum with its own phase algebra.
//!
//! None of these share formulas with the code they check; phase bookkeeping
//! is rederived from the propagation picture on purpose.

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::structures::DomainSegment;

/// Outcome of one oracle-vs-analytic comparison.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub case_id: String,
    pub analytic: Complex64,
    pub oracle: Complex64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn build(
        case_id: String,
        analytic: Complex64,
        oracle: Complex64,
        tolerance: f64,
    ) -> Self {
        let scale = analytic.norm().max(oracle.norm());
        let relative_error = if scale == 0.0 {
            0.0
        } else {
            (analytic - oracle).norm() / scale
        };
        Self {
            case_id,
            analytic,
            oracle,
            relative_error,
            tolerance,
            pass: relative_error <= tolerance,
        }
    }
}

/// Composite-Simpson quadrature of the slab kernel integrand
/// `g E_p exp(i k_p L) exp(i dk (z - L))` over `z in [0, L]`.
///
/// The `exp(i dk (z - L))` profile is the interaction phase referenced to
/// the output plane; its integral reproduces the analytic
/// `exp(-i dk L / 2) L sinc(dk L / 2)` factor.
pub fn integrate_volume_kernel(
    g: Complex64,
    pump_amplitude: Complex64,
    k_p: f64,
    delta_k: f64,
    length: f64,
    steps: usize,
) -> Complex64 {
    assert!(steps >= 1000, "oracle quadrature needs >= 1000 steps");
    let panels = if steps % 2 == 0 { steps } else { steps + 1 };
    let h = length / panels as f64;
    let f = |z: f64| Complex64::from_polar(1.0, delta_k * (z - length));
    let mut acc = f(0.0) + f(length);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(i as f64 * h) * w;
    }
    g * pump_amplitude * Complex64::from_polar(1.0, k_p * length) * acc * (h / 3.0)
}

/// Inputs for the boundary continuity solve at the input face.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryContext {
    pub omega_s: f64,
    pub n_s: f64,
    pub k_s: f64,
    pub area: f64,
    pub constants: PhysicalConstants,
}

/// Solve the two-equation continuity system for the correction kernels
/// (delta a_F, delta a_B) given the nonlinear magnetic kernels at z = 0.
///
/// Unknowns are the electric-field corrections; the system is
///   dE_F - dE_B                           = 0
///   (k_s/(w mu0)) dE_F + (k_s/(w mu0)) dE_B = -(H_F + H_B)
/// solved by a generic 2x2 elimination, then converted to annihilation
/// -operator kernels through the field normalization.
pub fn solve_boundary(
    h_nfr_forward: Complex64,
    h_nfr_backward: Complex64,
    ctx: &BoundaryContext,
) -> Result<(Complex64, Complex64)> {
    if ctx.k_s <= 0.0 {
        return Err(Error::Domain(format!(
            "boundary solve requires k_s > 0, got {}",
            ctx.k_s
        )));
    }
    let kons = ctx.constants;
    let h_fr = ctx.k_s / (ctx.omega_s * kons.mu_0);
    // Row-reduce [[1, -1], [h_fr, h_fr]] x = [0, -(H_F + H_B)].
    let a = [
        [Complex64::from(1.0), Complex64::from(-1.0)],
        [Complex64::from(h_fr), Complex64::from(h_fr)],
    ];
    let rhs = [Complex64::from(0.0), -(h_nfr_forward + h_nfr_backward)];
    // Partial pivoting on the first column.
    let (r0, r1, b0, b1) = if a[0][0].norm() >= a[1][0].norm() {
        (a[0], a[1], rhs[0], rhs[1])
    } else {
        (a[1], a[0], rhs[1], rhs[0])
    };
    let factor = r1[0] / r0[0];
    let a11 = r1[1] - factor * r0[1];
    if a11.norm() == 0.0 {
        return Err(Error::Domain("singular boundary system".into()));
    }
    let de_b = (b1 - factor * b0) / a11;
    let de_f = (b0 - r0[1] * de_b) / r0[0];

    // delta E = i sqrt(hbar w / (2 eps0 c A n)) delta a
    let norm = Complex64::new(0.0, 1.0)
        * (kons.hbar * ctx.omega_s / (2.0 * kons.epsilon_0 * kons.c * ctx.area * ctx.n_s)).sqrt();
    Ok((de_f / norm, de_b / norm))
}

/// Literal signed loop over poled domains using endpoint exponentials:
/// each domain contributes `sign (exp(i dk z1) - exp(i dk z0)) / (i dk)`,
/// the whole sum being referenced to the output through
/// `exp(i (k_s + k_i) L)`.
pub fn poled_direct_sum(
    segments: &[DomainSegment],
    g: Complex64,
    pump_amplitude: Complex64,
    k_s: f64,
    k_i: f64,
    delta_k: f64,
    total_length: f64,
) -> Complex64 {
    assert!(segments.len() <= 10_000, "oracle scale exceeded");
    let mut acc = Complex64::default();
    for s in segments {
        let piece = if delta_k.abs() * total_length < 1e-8 {
            // Near-degenerate phase: fall back to the flat-integrand limit.
            Complex64::from_polar(s.length, delta_k * (s.z_start + 0.5 * s.length))
        } else {
            let z1 = s.z_start + s.length;
            let e1 = Complex64::from_polar(1.0, delta_k * z1);
            let e0 = Complex64::from_polar(1.0, delta_k * s.z_start);
            (e1 - e0) / Complex64::new(0.0, delta_k)
        };
        acc += piece * s.sign;
    }
    g * pump_amplitude * Complex64::from_polar(1.0, (k_s + k_i) * total_length) * acc
}

/// SplitMix64: small, seeded, reproducible generator for the random suites.
#[derive(Debug, Clone)]
pub struct SuiteRng(u64);

impl SuiteRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        (self.range(lo.ln(), hi.ln())).exp()
    }

    pub fn unit_complex(&mut self) -> Complex64 {
        Complex64::from_polar(
            self.range(0.1, 1.0),
            self.range(0.0, std::f64::consts::TAU),
        )
    }
}

/// Analytic slab kernel vs Simpson quadrature over seeded random draws.
///
/// Draws avoid the sinc nulls (|sinc| >= 0.01): relative error is the
/// comparison metric and both routes vanish together at the nulls.
pub fn volume_quadrature_suite(seed: u64, cases: usize, tolerance: f64) -> Vec<OracleReport> {
    let mut rng = SuiteRng::new(seed);
    let mut out = Vec::with_capacity(cases);
    for case in 0..cases {
        let (delta_k, length) = loop {
            let length = rng.log_range(1e-6, 5e-3);
            let x = rng.range(-12.0, 12.0);
            if crate::amplitudes::sinc(0.5 * x).abs() >= 0.01 {
                break (x / length, length);
            }
        };
        let g = rng.unit_complex() * 1e-5;
        let pump = rng.unit_complex();
        let k_p = rng.range(1e6, 4e7);
        let analytic = crate::amplitudes::volume_amplitude(g, pump, k_p, delta_k, length, 0.0);
        let oracle = integrate_volume_kernel(g, pump, k_p, delta_k, length, 4096);
        out.push(OracleReport::build(
            format!("volume/{case:04}"),
            analytic,
            oracle,
            tolerance,
        ));
    }
    out
}

/// Closed-form boundary correction vs the direct two-equation solve.
pub fn boundary_solve_suite(seed: u64, cases: usize, tolerance: f64) -> Vec<OracleReport> {
    let mut rng = SuiteRng::new(seed);
    let constants = PhysicalConstants::default();
    let mut out = Vec::with_capacity(cases);
    for case in 0..cases {
        let omega_s = rng.range(0.8e15, 3.5e15);
        let n_s = rng.range(1.0, 3.5);
        let ctx = BoundaryContext {
            omega_s,
            n_s,
            k_s: n_s * omega_s / constants.c,
            area: rng.log_range(1e-2, 1e2),
            constants,
        };
        let g = rng.unit_complex() * 1e-5;
        let pump = rng.unit_complex();
        let k_p = rng.range(1e6, 4e7);
        let k_i = rng.range(1e6, 4e7);
        let h = crate::amplitudes::nonlinear_magnetic_kernel(
            g, pump, omega_s, n_s, k_p, k_i, 0.0, ctx.area, &constants,
        );
        let analytic = crate::amplitudes::surface_correction_kernel(g, pump, ctx.k_s);
        let (da_f, da_b) = match solve_boundary(h, h, &ctx) {
            Ok(v) => v,
            Err(e) => {
                let mut rep = OracleReport::build(
                    format!("boundary/{case:04}"),
                    analytic,
                    Complex64::default(),
                    tolerance,
                );
                rep.pass = false;
                rep.case_id = format!("boundary/{case:04} ({e})");
                out.push(rep);
                continue;
            }
        };
        // Forward and backward corrections coincide; fold any split into the
        // comparison so a regression in either shows up.
        let worst = if (da_f - analytic).norm() >= (da_b - analytic).norm() {
            da_f
        } else {
            da_b
        };
        out.push(OracleReport::build(
            format!("boundary/{case:04}"),
            analytic,
            worst,
            tolerance,
        ));
    }
    out
}

/// Closed-form geometric poled sum vs the literal signed domain loop.
///
/// Uniform specs only (whole domains); draws are rejected when the signed
/// sum nearly cancels (|sum| < 1e-2 of the incoherent sum), where relative
/// comparison loses meaning.
pub fn poled_sum_suite(seed: u64, cases: usize, tolerance: f64) -> Vec<OracleReport> {
    let mut rng = SuiteRng::new(seed);
    let mut out = Vec::with_capacity(cases);
    for case in 0..cases {
        let (spec, segments, delta_k) = loop {
            let domains = 2 + (rng.next_u64() % 9999) as usize; // up to 10^4 segments
            let duty = if rng.uniform() < 0.5 {
                0.5
            } else {
                rng.range(0.25, 0.75)
            };
            let period = rng.log_range(0.8e-6, 40e-6);
            // Whole periods, plus possibly one trailing positive domain.
            let pairs = domains / 2;
            let trailing = domains % 2 == 1;
            let total = pairs as f64 * period + if trailing { duty * period } else { 0.0 };
            let spec = crate::structures::PoledCrystalSpec {
                medium: crate::dispersion::OpticalMedium::constant("suite", 2.0, 1e-12),
                total_length: total,
                poling_period: period,
                duty_cycle: duty,
            };
            let segments = match crate::structures::segment_decomposition(&spec) {
                Ok(s) => s,
                Err(_) => continue,
            };
            if segments.len() != domains {
                continue;
            }
            let delta_k = rng.range(0.2, 2.9) / (0.5 * period) * 0.5
                + rng.range(-0.05, 0.05) / period;
            let direct = crate::structures::structure_factor_direct(&segments, delta_k);
            let incoherent: f64 = segments.iter().map(|s| s.length).sum();
            if direct.norm() >= 1e-2 * incoherent {
                break (spec, segments, delta_k);
            }
        };
        let g = rng.unit_complex() * 1e-5;
        let pump = rng.unit_complex();
        let k_s = rng.range(5e6, 2e7);
        let k_i = rng.range(5e6, 2e7);
        let geometric = crate::structures::structure_factor_geometric(&spec, &segments, delta_k)
            .expect("suite specs are uniform");
        let analytic = crate::structures::poled_amplitude(
            g,
            pump,
            k_s,
            k_i,
            spec.total_length,
            geometric,
        );
        let oracle = poled_direct_sum(
            &segments,
            g,
            pump,
            k_s,
            k_i,
            delta_k,
            spec.total_length,
        );
        out.push(OracleReport::build(
            format!("poled/{case:04}"),
            analytic,
            oracle,
            tolerance,
        ));
    }
    out
}

/// All registered suites with their default sizes and tolerances; the
/// tolerance scale lets callers tighten (or zero) every bound at once.
pub fn run_all_suites(seed: u64, tolerance_scale: f64) -> Vec<OracleReport> {
    let mut out = Vec::new();
    out.extend(volume_quadrature_suite(seed, 1000, 1e-10 * tolerance_scale));
    out.extend(boundary_solve_suite(
        seed.wrapping_add(1),
        1000,
        1e-12 * tolerance_scale,
    ));
    out.extend(poled_sum_suite(
        seed.wrapping_add(2),
        200,
        1e-10 * tolerance_scale,
    ));
    out
}
