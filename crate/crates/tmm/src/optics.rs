use std::f64::consts::PI;

use materials::{IncidenceCondition, Layer, LayerStack, Polarization, SpectralGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Matrix2c, Result, TmmError};

/// Normal component of n*cos(theta) in a medium, from the conserved
/// tangential component `n_amb * sin(theta_amb)`. The square-root branch is
/// fixed to non-negative imaginary part so evanescent and absorbed waves
/// decay in the propagation direction.
fn qz(n: Complex64, n_amb_sin: f64) -> Complex64 {
    let z = n * n - Complex64::new(n_amb_sin * n_amb_sin, 0.0);
    let mut q = z.sqrt();
    if q.im < 0.0 || (q.im == 0.0 && q.re < 0.0) {
        q = -q;
    }
    q
}

/// Fresnel reflection and transmission amplitudes for a wave crossing from
/// the `from` medium into the `to` medium.
fn fresnel(
    n_from: Complex64,
    n_to: Complex64,
    pol: Polarization,
    n_amb_sin: f64,
) -> (Complex64, Complex64) {
    let qi = qz(n_from, n_amb_sin);
    let qt = qz(n_to, n_amb_sin);
    match pol {
        Polarization::S => {
            let denom = qi + qt;
            ((qi - qt) / denom, 2.0 * qi / denom)
        }
        Polarization::P => {
            let (ei, et) = (n_from * n_from, n_to * n_to);
            let denom = et * qi + ei * qt;
            ((et * qi - ei * qt) / denom, 2.0 * n_from * n_to * qi / denom)
        }
        Polarization::Unpolarized => {
            unreachable!("unpolarized light is split into s and p before Fresnel evaluation")
        }
    }
}

fn require_linear_pol(pol: Polarization) -> Result<()> {
    if pol == Polarization::Unpolarized {
        return Err(TmmError::Config(
            "matrix-level operations take s or p polarization; average the two for unpolarized light"
                .into(),
        ));
    }
    Ok(())
}

/// Phase matrix diag(e^{i kz d}, e^{-i kz d}) accumulated crossing one layer,
/// with kz = (2 pi / lambda) sqrt(n^2 - n_amb^2 sin^2 theta). Reduces to the
/// identity as d -> 0.
pub fn propagation_matrix(
    layer: &Layer,
    wavelength_um: f64,
    angle_deg: f64,
    ambient_index: f64,
) -> Result<Matrix2c> {
    let n = layer.material.refractive_index_at(wavelength_um)?;
    propagation_from_index(n, layer.thickness_nm, wavelength_um, angle_deg, ambient_index)
}

fn propagation_from_index(
    n: Complex64,
    thickness_nm: f64,
    wavelength_um: f64,
    angle_deg: f64,
    ambient_index: f64,
) -> Result<Matrix2c> {
    let n_amb_sin = ambient_index * angle_deg.to_radians().sin();
    let kz = 2.0 * PI / wavelength_um * qz(n, n_amb_sin);
    let phase = kz * Complex64::new(0.0, 1.0) * (thickness_nm * 1e-3);
    let m = Matrix2c::diagonal(phase.exp(), (-phase).exp());
    if !m.is_finite() {
        return Err(TmmError::NonFinite(format!(
            "propagation through {thickness_nm} nm at {wavelength_um} um overflowed"
        )));
    }
    Ok(m)
}

/// Interface matrix (1/t) [[1, r], [r, 1]] built from the Fresnel amplitudes
/// of a wave traveling left-to-right, at the refracted angles implied by the
/// conserved `ambient_index * sin(angle)`.
pub fn interface_matrix(
    n_left: Complex64,
    n_right: Complex64,
    angle_deg: f64,
    pol: Polarization,
    ambient_index: f64,
) -> Result<Matrix2c> {
    require_linear_pol(pol)?;
    let n_amb_sin = ambient_index * angle_deg.to_radians().sin();
    interface_from_fresnel(n_left, n_right, pol, n_amb_sin, 0.0)
}

fn interface_from_fresnel(
    n_from: Complex64,
    n_to: Complex64,
    pol: Polarization,
    n_amb_sin: f64,
    wavelength_um: f64,
) -> Result<Matrix2c> {
    let (r, t) = fresnel(n_from, n_to, pol, n_amb_sin);
    if t.norm() == 0.0 || !t.is_finite() || !r.is_finite() {
        return Err(TmmError::SingularInterface {
            n_left: format!("{n_from}"),
            n_right: format!("{n_to}"),
            wavelength_um,
        });
    }
    let inv_t = Complex64::new(1.0, 0.0) / t;
    Ok(Matrix2c::new(inv_t, r * inv_t, r * inv_t, inv_t))
}

/// The factor that advances (forward, backward) amplitudes from medium
/// `from` into medium `to` in an ambient-to-substrate system matrix. This is
/// the interface matrix with the media swapped: its entries are the Fresnel
/// amplitudes of the reverse crossing.
fn crossing_matrix(
    n_from: Complex64,
    n_to: Complex64,
    pol: Polarization,
    n_amb_sin: f64,
    wavelength_um: f64,
) -> Result<Matrix2c> {
    interface_from_fresnel(n_to, n_from, pol, n_amb_sin, wavelength_um)
}

/// Real ambient index at a wavelength; the stack constructor guarantees the
/// ambient is lossless.
fn ambient_index_at(stack: &LayerStack, wavelength_um: f64) -> Result<f64> {
    let n = stack.ambient.refractive_index_at(wavelength_um)?;
    Ok(n.re)
}

/// Full-system matrix: ordered cascade of the entry interface, per-layer
/// propagation and interface factors, and the exit interface into the
/// substrate. Maps ambient-side amplitudes to substrate-side amplitudes.
pub fn system_matrix(
    stack: &LayerStack,
    wavelength_um: f64,
    angle_deg: f64,
    pol: Polarization,
) -> Result<Matrix2c> {
    system_matrix_counted(stack, wavelength_um, angle_deg, pol).map(|(m, _)| m)
}

/// Same as [`system_matrix`], also reporting how many matrix factors were
/// cascaded (N propagations plus N+1 interfaces).
pub fn system_matrix_counted(
    stack: &LayerStack,
    wavelength_um: f64,
    angle_deg: f64,
    pol: Polarization,
) -> Result<(Matrix2c, u64)> {
    require_linear_pol(pol)?;
    let n_amb = ambient_index_at(stack, wavelength_um)?;
    let n_amb_sin = n_amb * angle_deg.to_radians().sin();

    let mut m = Matrix2c::identity();
    let mut ops = 0u64;
    let mut n_prev = Complex64::new(n_amb, 0.0);
    for layer in &stack.layers {
        let n_layer = layer.material.refractive_index_at(wavelength_um)?;
        m = crossing_matrix(n_prev, n_layer, pol, n_amb_sin, wavelength_um)?.mul(&m);
        ops += 1;
        m = propagation_from_index(n_layer, layer.thickness_nm, wavelength_um, angle_deg, n_amb)?
            .mul(&m);
        ops += 1;
        n_prev = n_layer;
    }
    let n_sub = stack.substrate.refractive_index_at(wavelength_um)?;
    m = crossing_matrix(n_prev, n_sub, pol, n_amb_sin, wavelength_um)?.mul(&m);
    ops += 1;

    if !m.is_finite() {
        return Err(TmmError::NonFinite(format!(
            "system matrix at {wavelength_um} um, {angle_deg} deg"
        )));
    }
    Ok((m, ops))
}

/// Reflectance and transmittance from an ambient-to-substrate system matrix:
/// r = -m21/m22, t = det(M)/m22, R = |r|^2, and T scaled by the admittance
/// ratio of substrate to ambient.
pub fn rt_from_matrix(
    m: &Matrix2c,
    n_amb: f64,
    n_sub: Complex64,
    angle_deg: f64,
    pol: Polarization,
) -> Result<(f64, f64)> {
    require_linear_pol(pol)?;
    if m.m22.norm() == 0.0 {
        return Err(TmmError::SingularSystem {
            wavelength_um: f64::NAN,
        });
    }
    let r = -m.m21 / m.m22;
    let t = m.det() / m.m22;

    let n_amb_sin = n_amb * angle_deg.to_radians().sin();
    let q_amb = qz(Complex64::new(n_amb, 0.0), n_amb_sin).re;
    let q_sub = qz(n_sub, n_amb_sin);
    let admittance = match pol {
        Polarization::S => q_sub.re / q_amb,
        Polarization::P => (n_sub * n_sub * q_sub.conj()).re / (n_sub.norm_sqr() * q_amb),
        Polarization::Unpolarized => unreachable!(),
    };

    Ok((r.norm_sqr(), t.norm_sqr() * admittance))
}

/// Reflectance/transmittance/absorptance at one grid wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub wavelength_um: f64,
    pub r: f64,
    pub t: f64,
    pub a: f64,
}

/// Per-wavelength optical response of a stack under one incidence condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResponse {
    pub points: Vec<SpectrumPoint>,
}

impl SpectralResponse {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn response_point(
    stack: &LayerStack,
    wavelength_um: f64,
    cond: &IncidenceCondition,
) -> Result<(SpectrumPoint, u64)> {
    let n_amb = ambient_index_at(stack, wavelength_um)?;
    let n_sub = stack.substrate.refractive_index_at(wavelength_um)?;
    let rt_for = |pol: Polarization| -> Result<(f64, f64, u64)> {
        let (m, ops) = system_matrix_counted(stack, wavelength_um, cond.angle_deg, pol)?;
        let (r, t) = rt_from_matrix(&m, n_amb, n_sub, cond.angle_deg, pol).map_err(|e| {
            match e {
                TmmError::SingularSystem { .. } => TmmError::SingularSystem { wavelength_um },
                other => other,
            }
        })?;
        Ok((r, t, ops))
    };
    let (r, t, ops) = match cond.polarization {
        Polarization::Unpolarized => {
            let (rs, ts, ops_s) = rt_for(Polarization::S)?;
            let (rp, tp, ops_p) = rt_for(Polarization::P)?;
            (0.5 * (rs + rp), 0.5 * (ts + tp), ops_s + ops_p)
        }
        pol => rt_for(pol)?,
    };
    Ok((
        SpectrumPoint {
            wavelength_um,
            r,
            t,
            a: 1.0 - r - t,
        },
        ops,
    ))
}

/// Response over a wavelength grid for one incidence condition. Unpolarized
/// light is the mean of the s and p responses.
pub fn spectrum(
    stack: &LayerStack,
    grid: &SpectralGrid,
    cond: &IncidenceCondition,
) -> Result<SpectralResponse> {
    spectrum_counted(stack, grid, cond).map(|(resp, _)| resp)
}

pub(crate) fn spectrum_counted(
    stack: &LayerStack,
    grid: &SpectralGrid,
    cond: &IncidenceCondition,
) -> Result<(SpectralResponse, u64)> {
    let (points, ops) = spectrum_slice(stack, grid.wavelengths(), cond)?;
    Ok((SpectralResponse { points }, ops))
}

/// Worker kernel: evaluates a contiguous slice of the wavelength domain.
pub(crate) fn spectrum_slice(
    stack: &LayerStack,
    wavelengths_um: &[f64],
    cond: &IncidenceCondition,
) -> Result<(Vec<SpectrumPoint>, u64)> {
    let mut points = Vec::with_capacity(wavelengths_um.len());
    let mut ops = 0u64;
    for &wl in wavelengths_um {
        let (p, n) = response_point(stack, wl, cond)?;
        points.push(p);
        ops += n;
    }
    Ok((points, ops))
}
