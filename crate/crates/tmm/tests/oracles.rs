//! Closed-form optics oracles.
//!
//! Every expected value here is computed by an independent route — textbook
//! Fresnel formulas and the multiple-beam (Airy) slab solution evaluated with
//! direct complex arithmetic — and compared against the matrix cascade.

use materials::{IncidenceCondition, Layer, LayerStack, Material, Polarization, SpectralGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tmm::{rt_from_matrix, spectrum, sweep, system_matrix};

fn glass(n: f64) -> Material {
    Material::constant(format!("n{n}"), n, 0.0).unwrap()
}

fn material(n: f64, k: f64) -> Material {
    Material::constant(format!("n{n}k{k}"), n, k).unwrap()
}

/// n*cos(theta) with the decaying branch, the same convention the engine
/// documents, derived here from scratch.
fn qz(n: Complex64, n_sin: f64) -> Complex64 {
    let z = n * n - Complex64::new(n_sin * n_sin, 0.0);
    let q = z.sqrt();
    if q.im < 0.0 || (q.im == 0.0 && q.re < 0.0) {
        -q
    } else {
        q
    }
}

fn fresnel_rt(
    n_i: Complex64,
    n_t: Complex64,
    pol: Polarization,
    n_sin: f64,
) -> (Complex64, Complex64) {
    let (qi, qt) = (qz(n_i, n_sin), qz(n_t, n_sin));
    match pol {
        Polarization::S => ((qi - qt) / (qi + qt), 2.0 * qi / (qi + qt)),
        Polarization::P => {
            let (ei, et) = (n_i * n_i, n_t * n_t);
            let d = et * qi + ei * qt;
            ((et * qi - ei * qt) / d, 2.0 * n_i * n_t * qi / d)
        }
        Polarization::Unpolarized => unreachable!(),
    }
}

fn power_t(t: Complex64, n_amb: f64, n_sub: Complex64, n_sin: f64, pol: Polarization) -> f64 {
    let q_amb = qz(Complex64::new(n_amb, 0.0), n_sin).re;
    let q_sub = qz(n_sub, n_sin);
    let admittance = match pol {
        Polarization::S => q_sub.re / q_amb,
        Polarization::P => (n_sub * n_sub * q_sub.conj()).re / (n_sub.norm_sqr() * q_amb),
        Polarization::Unpolarized => unreachable!(),
    };
    t.norm_sqr() * admittance
}

#[test]
fn bare_interfaces_match_closed_form_fresnel() {
    // Contrasts include total internal reflection (1.5 -> 1.0 beyond 41.8
    // degrees) and an absorbing substrate.
    let contrasts = [
        (1.0, Complex64::new(1.5, 0.0)),
        (1.5, Complex64::new(1.0, 0.0)),
        (1.0, Complex64::new(2.5, 0.3)),
    ];
    for (n_amb, n_sub) in contrasts {
        let sub_material = material(n_sub.re, n_sub.im);
        let stack = LayerStack::bare(glass(n_amb), sub_material).unwrap();
        for angle in [0.0, 30.0, 60.0, 89.0] {
            for pol in [Polarization::S, Polarization::P] {
                let m = system_matrix(&stack, 0.6, angle, pol).unwrap();
                let (r_pow, t_pow) = rt_from_matrix(&m, n_amb, n_sub, angle, pol).unwrap();

                let n_sin = n_amb * (angle as f64).to_radians().sin();
                let (r, t) = fresnel_rt(Complex64::new(n_amb, 0.0), n_sub, pol, n_sin);
                let r_ref = r.norm_sqr();
                let t_ref = power_t(t, n_amb, n_sub, n_sin, pol);

                assert!(
                    (r_pow - r_ref).abs() <= 1e-12,
                    "R mismatch: {r_pow} vs {r_ref} (n {n_amb}->{n_sub}, {angle} deg, {pol:?})"
                );
                assert!(
                    (t_pow - t_ref).abs() <= 1e-12,
                    "T mismatch: {t_pow} vs {t_ref} (n {n_amb}->{n_sub}, {angle} deg, {pol:?})"
                );
                assert!(
                    (r_pow + t_pow - 1.0).abs() <= 1e-12,
                    "interface must conserve energy: R+T = {}",
                    r_pow + t_pow
                );
            }
        }
    }
}

/// Multiple-beam slab solution: r and t of medium 0 | slab 1 | medium 2 from
/// the geometric series, no matrices involved.
fn airy_rt(
    n0: Complex64,
    n1: Complex64,
    n2: Complex64,
    d_um: f64,
    wavelength_um: f64,
    angle_deg: f64,
    pol: Polarization,
) -> (Complex64, Complex64) {
    let n_sin = n0.re * angle_deg.to_radians().sin();
    let (r01, t01) = fresnel_rt(n0, n1, pol, n_sin);
    let (r12, t12) = fresnel_rt(n1, n2, pol, n_sin);
    let (r10, t10) = fresnel_rt(n1, n0, pol, n_sin);
    let delta = 2.0 * std::f64::consts::PI / wavelength_um * qz(n1, n_sin) * d_um;
    let phase = (Complex64::new(0.0, 1.0) * delta).exp();
    let denom = Complex64::new(1.0, 0.0) - r10 * r12 * phase * phase;
    let r = r01 + t01 * t10 * r12 * phase * phase / denom;
    let t = t01 * t12 * phase / denom;
    (r, t)
}

#[test]
fn free_standing_slab_matches_airy_transmittance() {
    let n1 = Complex64::new(2.1, 0.0);
    let d_nm = 430.0;
    let stack = LayerStack::new(
        glass(1.0),
        vec![Layer::new(glass(2.1), d_nm).unwrap()],
        glass(1.0),
    )
    .unwrap();
    let grid = SpectralGrid::linspace(0.4, 2.4, 500).unwrap();
    let cond = IncidenceCondition::normal(Polarization::S);
    let resp = spectrum(&stack, &grid, &cond).unwrap();
    for p in &resp.points {
        let (_, t) = airy_rt(
            Complex64::new(1.0, 0.0),
            n1,
            Complex64::new(1.0, 0.0),
            d_nm * 1e-3,
            p.wavelength_um,
            0.0,
            Polarization::S,
        );
        let t_ref = t.norm_sqr();
        assert!(
            (p.t - t_ref).abs() <= 1e-9,
            "Airy mismatch at {} um: {} vs {}",
            p.wavelength_um,
            p.t,
            t_ref
        );
    }
}

#[test]
fn oblique_absorbing_slab_matches_airy() {
    let n0 = Complex64::new(1.0, 0.0);
    let n1 = Complex64::new(1.9, 0.08);
    let n2 = Complex64::new(1.45, 0.0);
    let d_nm = 260.0;
    let stack = LayerStack::new(
        glass(1.0),
        vec![Layer::new(material(1.9, 0.08), d_nm).unwrap()],
        glass(1.45),
    )
    .unwrap();
    for angle in [0.0, 25.0, 55.0, 80.0] {
        for pol in [Polarization::S, Polarization::P] {
            let m = system_matrix(&stack, 0.55, angle, pol).unwrap();
            let (r_pow, t_pow) = rt_from_matrix(&m, 1.0, n2, angle, pol).unwrap();
            let (r, t) = airy_rt(n0, n1, n2, d_nm * 1e-3, 0.55, angle, pol);
            let n_sin = (angle as f64).to_radians().sin();
            assert!((r_pow - r.norm_sqr()).abs() < 1e-11);
            assert!((t_pow - power_t(t, 1.0, n2, n_sin, pol)).abs() < 1e-11);
        }
    }
}

fn random_lossless_stack(rng: &mut ChaCha8Rng, max_layers: usize) -> LayerStack {
    let layer_count = rng.random_range(0..=max_layers);
    let layers = (0..layer_count)
        .map(|_| {
            Layer::new(
                glass(1.0 + rng.random::<f64>() * 2.0),
                10.0 + rng.random::<f64>() * 400.0,
            )
            .unwrap()
        })
        .collect();
    LayerStack::new(
        Material::air(),
        layers,
        glass(1.0 + rng.random::<f64>() * 2.0),
    )
    .unwrap()
}

#[test]
fn lossless_stacks_conserve_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(20260809);
    for trial in 0..2_000 {
        let stack = random_lossless_stack(&mut rng, 50);
        let wavelength = 0.3 + rng.random::<f64>() * 14.0;
        let angle = rng.random::<f64>() * 89.0;
        let pol = if rng.random::<bool>() {
            Polarization::S
        } else {
            Polarization::P
        };
        let grid = SpectralGrid::new(vec![wavelength]).unwrap();
        let cond = IncidenceCondition::new(angle, pol).unwrap();
        let p = spectrum(&stack, &grid, &cond).unwrap().points[0];
        assert!(
            (p.r + p.t - 1.0).abs() <= 1e-9,
            "trial {trial}: R+T = {} (stack of {} layers, {angle} deg)",
            p.r + p.t,
            stack.layer_count()
        );
        assert!(p.r >= 0.0 && p.r <= 1.0 + 1e-12);
        assert!(p.t >= 0.0 && p.t <= 1.0 + 1e-12);
    }
}

#[test]
fn lossless_transmittance_is_reciprocal_under_layer_reversal() {
    // With matching outer media, reversing the layers is exactly a reversal
    // of the propagation direction, so T must be invariant.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let mut stack = random_lossless_stack(&mut rng, 12);
        stack.substrate = stack.ambient.clone();
        let reversed = stack.reversed_layers();
        let wavelength = 0.4 + rng.random::<f64>() * 2.0;
        let grid = SpectralGrid::new(vec![wavelength]).unwrap();
        let cond = IncidenceCondition::normal(Polarization::S);
        let fwd = spectrum(&stack, &grid, &cond).unwrap().points[0].t;
        let bwd = spectrum(&reversed, &grid, &cond).unwrap().points[0].t;
        assert!(
            (fwd - bwd).abs() <= 1e-9,
            "T changed under reversal: {fwd} vs {bwd}"
        );
    }
}

#[test]
fn sweep_csv_round_trips_through_significant_digits() {
    let stack = LayerStack::new(
        Material::air(),
        vec![Layer::new(material(1.8, 0.02), 150.0).unwrap()],
        glass(1.5),
    )
    .unwrap();
    let grid = SpectralGrid::linspace(0.4, 1.0, 7).unwrap();
    let conditions = vec![
        IncidenceCondition::normal(Polarization::S),
        IncidenceCondition::new(45.0, Polarization::Unpolarized).unwrap(),
    ];
    let result = sweep(&stack, &grid, &conditions, 2).unwrap();
    let csv = result.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "angle_deg,polarization,wavelength_um,R,T,A");
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6);
        let r: f64 = fields[3].parse().unwrap();
        let t: f64 = fields[4].parse().unwrap();
        let a: f64 = fields[5].parse().unwrap();
        // 12 significant digits keep the unity sum to ~1e-12.
        assert!((r + t + a - 1.0).abs() < 1e-10);
        rows += 1;
    }
    assert_eq!(rows, 2 * 7);
}
