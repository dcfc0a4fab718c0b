//! Property tests for the kernel invariants: sign conventions, energy
//! conservation at interfaces, the surface-to-volume ratio law, density
//! reality and the closed-form/brute-force equivalences.

use num_complex::Complex64;
use pairgen_core::amplitudes::{
    joint_density, sinc, surface_factor, transmitted_amplitude, volume_amplitude, PumpSpectrum,
};
use pairgen_core::dispersion::{
    angular_frequency, fresnel_interface, phase_mismatch, refractive_index, wave_vector,
    Direction, DirectionChannel, ExternalAngles, FieldMode, FieldRole, IndexModel, OpticalMedium,
    SellmeierTerm,
};
use pairgen_core::grid::{Axis, FrequencyGrid};
use pairgen_core::oracle::integrate_volume_kernel;
use pairgen_core::spectra::pairwise_sum;
use pairgen_core::structures::{
    bulk_kernel, poled_kernel, segment_decomposition, structure_factor_direct,
    structure_factor_geometric, BulkCrystalSpec, KernelOptions, PoledCrystalSpec, PoledMethod,
};
use proptest::prelude::*;

fn test_medium(strength: f64, d_eff: f64) -> OpticalMedium {
    OpticalMedium {
        name: "prop".into(),
        index_model: IndexModel::Sellmeier {
            constant: 2.8,
            terms: vec![SellmeierTerm {
                strength,
                center_um_sq: 0.05,
                lambda_weighted: true,
            }],
            lambda_sq_coeff: 0.0,
        },
        d_eff,
        transparency_window: [0.3e-6, 6e-6],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_and_backward_wave_vectors_are_opposite(
        lambda_um in 0.35_f64..5.0,
        strength in 0.2_f64..1.8,
        theta in 0.0_f64..0.6,
    ) {
        let m = test_medium(strength, 0.0);
        let om = angular_frequency(lambda_um * 1e-6);
        let mk = |d: Direction| FieldMode {
            role: FieldRole::Signal,
            direction: d,
            angular_frequency: om,
            external_angle: theta,
        };
        let kf = wave_vector(&m, &mk(Direction::F)).unwrap();
        let kb = wave_vector(&m, &mk(Direction::B)).unwrap();
        prop_assert_eq!(kf, -kb);
        prop_assert!(kf > 0.0);
    }

    #[test]
    fn fresnel_flux_is_conserved(
        n1 in 1.0_f64..3.5,
        n2 in 1.0_f64..3.5,
        theta in 0.0_f64..1.4,
    ) {
        // Below total reflection only.
        prop_assume!((n1 * theta.sin() / n2).abs() < 0.999);
        let (t, r) = fresnel_interface(n1, n2, theta).unwrap();
        let c1 = theta.cos();
        let s2 = n1 * theta.sin() / n2;
        let c2 = (1.0 - s2 * s2).sqrt();
        let flux = (n2 * c2) / (n1 * c1) * t * t + r * r;
        prop_assert!((flux - 1.0).abs() < 1e-12);
        prop_assert!(t.abs() <= 2.0 && r.abs() <= 1.0);
    }

    #[test]
    fn mismatch_flips_sign_under_direction_reversal(
        ls_um in 1.1_f64..2.0,
        li_um in 1.1_f64..2.0,
        strength in 0.2_f64..1.8,
        ch_idx in 0_usize..8,
    ) {
        let m = test_medium(strength, 0.0);
        let ws = angular_frequency(ls_um * 1e-6);
        let wi = angular_frequency(li_um * 1e-6);
        let ch = DirectionChannel::all()[ch_idx];
        let a = phase_mismatch(&m, ws, wi, ch, ExternalAngles::default()).unwrap();
        let b = phase_mismatch(&m, ws, wi, ch.flipped(), ExternalAngles::default()).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn volume_amplitude_matches_quadrature(
        dk_l in -11.0_f64..11.0,
        log_l in -6.0_f64..-2.3,
        g_phase in 0.0_f64..6.2,
        ep_phase in 0.0_f64..6.2,
    ) {
        prop_assume!(sinc(0.5 * dk_l).abs() > 0.01);
        let length = 10f64.powf(log_l);
        let delta_k = dk_l / length;
        let g = Complex64::from_polar(3e-6, g_phase);
        let ep = Complex64::from_polar(0.8, ep_phase);
        let analytic = volume_amplitude(g, ep, 1.7e7, delta_k, length, 0.0);
        let oracle = integrate_volume_kernel(g, ep, 1.7e7, delta_k, length, 4096);
        prop_assert!((analytic - oracle).norm() <= 1e-10 * analytic.norm());
    }

    #[test]
    fn joint_density_is_real_part_of_conjugate_product(
        ar in -2.0_f64..2.0, ai in -2.0_f64..2.0,
        br in -2.0_f64..2.0, bi in -2.0_f64..2.0,
    ) {
        let a = Complex64::new(ar, ai);
        let b = Complex64::new(br, bi);
        let n = joint_density(a, b);
        prop_assert_eq!(n, (a.conj() * b).re);
        prop_assert!((joint_density(a, a) - a.norm_sqr()).abs() <= 1e-15 * a.norm_sqr());
    }

    #[test]
    fn substitution_rule_squares_to_the_density_ratio(
        vs in -0.9_f64..0.9,
        vi in -0.9_f64..0.9,
        t in 0.2_f64..1.4,
        fr in -1.0_f64..1.0,
        fi in -1.0_f64..1.0,
    ) {
        prop_assume!(fr.abs() + fi.abs() > 1e-3);
        let f_vol = Complex64::new(fr, fi);
        let fs = transmitted_amplitude(f_vol * (1.0 + vs), t, t);
        let fid = transmitted_amplitude(f_vol * (1.0 + vi), t, t);
        let n = joint_density(fs, fid);
        let n_vol = joint_density(
            transmitted_amplitude(f_vol, t, t),
            transmitted_amplitude(f_vol, t, t),
        );
        let expect = (1.0 + vs) * (1.0 + vi) * n_vol;
        prop_assert!((n - expect).abs() <= 1e-12 * expect.abs().max(1e-300));
    }

    #[test]
    fn geometric_and_direct_sums_agree_on_uniform_specs(
        domains in 2_usize..400,
        duty in 0.3_f64..0.7,
        period_um in 1.0_f64..30.0,
        dk_per_domain in 0.25_f64..2.8,
    ) {
        let period = period_um * 1e-6;
        let pairs = domains / 2;
        let trailing = domains % 2 == 1;
        let total = pairs as f64 * period + if trailing { duty * period } else { 0.0 };
        prop_assume!(total >= 0.5 * period);
        let spec = PoledCrystalSpec {
            medium: OpticalMedium::constant("uniform", 2.0, 1e-12),
            total_length: total,
            poling_period: period,
            duty_cycle: duty,
        };
        let segments = segment_decomposition(&spec).unwrap();
        prop_assume!(segments.len() == domains);
        let delta_k = dk_per_domain / (duty * period);
        let direct = structure_factor_direct(&segments, delta_k);
        let geometric = structure_factor_geometric(&spec, &segments, delta_k);
        prop_assume!(geometric.is_some());
        let geometric = geometric.unwrap();
        let incoherent: f64 = segments.iter().map(|s| s.length).sum();
        prop_assert!((direct - geometric).norm() <= 1e-10 * incoherent);
    }

    #[test]
    fn pairwise_sum_is_close_to_exact_and_deterministic(
        values in prop::collection::vec(-1e3_f64..1e3, 1..600),
    ) {
        // Reference: f128-free compensated (Neumaier) summation.
        let mut acc = 0.0_f64;
        let mut comp = 0.0_f64;
        for &v in &values {
            let t = acc + v;
            if acc.abs() >= v.abs() {
                comp += (acc - t) + v;
            } else {
                comp += (v - t) + acc;
            }
            acc = t;
        }
        let exact = acc + comp;
        let got = pairwise_sum(&values);
        let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!((got - exact).abs() <= 1e-12 * scale);
        prop_assert_eq!(got.to_bits(), pairwise_sum(&values).to_bits());
    }
}

#[test]
fn ratio_law_holds_exactly_for_slab_kernels() {
    // Surface part = (dk / k_m) * volume part at every node, bitwise, for
    // bulk and poled kernels (the factor is uniform across domains).
    let medium = test_medium(1.1, 8e-12);
    let wp = angular_frequency(0.75e-6);
    let grid = FrequencyGrid::cw_line(
        wp,
        Axis::new(angular_frequency(1.9e-6), angular_frequency(1.25e-6), 129).unwrap(),
    )
    .unwrap();
    let pump = PumpSpectrum::cw(wp, 1.0);
    let opts = KernelOptions::default();

    let bulk = BulkCrystalSpec {
        medium: medium.clone(),
        length: 0.4e-3,
        surround: OpticalMedium::vacuum(),
    };
    let pair = bulk_kernel(&bulk, &pump, &grid, &opts).unwrap();
    let poled = PoledCrystalSpec {
        medium: medium.clone(),
        total_length: 120e-6,
        poling_period: 12e-6,
        duty_cycle: 0.5,
    };
    let ppair = poled_kernel(&poled, &pump, &grid, PoledMethod::GeometricSum, &opts).unwrap();

    for kp in [&pair, &ppair] {
        for i in 0..grid.node_count() {
            let (ws, wi) = grid.node(i);
            let dk = phase_mismatch(&medium, ws, wi, DirectionChannel::FFF, ExternalAngles::default())
                .unwrap();
            let k_s = wave_vector(
                &medium,
                &FieldMode::collinear(FieldRole::Signal, Direction::F, ws),
            )
            .unwrap();
            let k_i = wave_vector(
                &medium,
                &FieldMode::collinear(FieldRole::Idler, Direction::F, wi),
            )
            .unwrap();
            let v_s = surface_factor(dk, k_s.abs()).unwrap();
            let v_i = surface_factor(dk, k_i.abs()).unwrap();
            assert_eq!(kp.signal.surface[i], kp.signal.volume[i] * v_s, "node {i}");
            assert_eq!(kp.idler.surface[i], kp.idler.volume[i] * v_i, "node {i}");
        }
    }
}

#[test]
fn kernels_are_independent_of_worker_count() {
    let medium = test_medium(0.9, 5e-12);
    let wp = angular_frequency(0.8e-6);
    let grid = FrequencyGrid::cw_line(
        wp,
        Axis::new(angular_frequency(2.0e-6), angular_frequency(1.35e-6), 257).unwrap(),
    )
    .unwrap();
    let pump = PumpSpectrum::cw(wp, 1.0);
    let spec = PoledCrystalSpec {
        medium,
        total_length: 600e-6,
        poling_period: 11e-6,
        duty_cycle: 0.5,
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                poled_kernel(
                    &spec,
                    &pump,
                    &grid,
                    PoledMethod::GeometricSum,
                    &KernelOptions::default(),
                )
                .unwrap()
            })
    };
    let a = run(1);
    let b = run(8);
    for i in 0..grid.node_count() {
        assert_eq!(a.signal.total(i), b.signal.total(i));
        assert_eq!(a.idler.total(i), b.idler.total(i));
    }
}

#[test]
fn bulk_kernel_is_continuous_across_the_grid() {
    // No jumps: neighboring nodes differ by a bounded factor on a smooth
    // dispersive medium (mismatch continuity).
    let medium = test_medium(1.1, 8e-12);
    let wp = angular_frequency(0.75e-6);
    let grid = FrequencyGrid::cw_line(
        wp,
        Axis::new(angular_frequency(1.9e-6), angular_frequency(1.3e-6), 2049).unwrap(),
    )
    .unwrap();
    let pump = PumpSpectrum::cw(wp, 1.0);
    let bulk = BulkCrystalSpec {
        medium,
        length: 30e-6,
        surround: OpticalMedium::vacuum(),
    };
    let pair = bulk_kernel(&bulk, &pump, &grid, &KernelOptions::default()).unwrap();
    let scale: f64 = (0..grid.node_count())
        .map(|i| pair.signal.total(i).norm())
        .fold(0.0, f64::max);
    for i in 1..grid.node_count() {
        let d = (pair.signal.total(i) - pair.signal.total(i - 1)).norm();
        assert!(d < 0.02 * scale, "jump at node {i}: {d:e} vs scale {scale:e}");
    }
}

#[test]
fn refractive_index_is_smooth_in_omega() {
    let m = test_medium(1.3, 0.0);
    let lo = angular_frequency(5.0e-6);
    let hi = angular_frequency(0.35e-6);
    let n_samples = 4000;
    let mut prev = refractive_index(&m, lo).unwrap();
    for i in 1..n_samples {
        let om = lo + (hi - lo) * i as f64 / n_samples as f64;
        let n = refractive_index(&m, om).unwrap();
        assert!((n - prev).abs() < 2e-3, "kink near omega {om:e}");
        prev = n;
    }
}
