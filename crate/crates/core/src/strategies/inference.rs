//! Recovering the referee's direction from a triple.

use std::f64::consts::PI;

use crate::cvalspin::SpinModel;
use crate::error::{Error, Result};
use crate::game::Triple;
use crate::hilbert::{Direction, Particle};

/// The unique menu slot whose c-valued spin at the triple's (η, ξ)
/// reproduces its s̃ within `tol`.
pub fn infer_direction(
    model: &SpinModel,
    triple: &Triple,
    menu: &[Direction],
    particle: Particle,
    tol: f64,
) -> Result<usize> {
    let mut candidates = Vec::new();
    for (slot, n) in menu.iter().enumerate() {
        let s = model.cval_spin(triple.eta_index, triple.xi, n, particle)?;
        if (s - triple.s_tilde).abs() <= tol {
            candidates.push(slot);
        }
    }
    match candidates.len() {
        0 => Err(Error::InferenceFailure {
            particle,
            s_tilde: triple.s_tilde,
        }),
        1 => Ok(candidates[0]),
        _ => Err(Error::AmbiguousInference {
            particle,
            s_tilde: triple.s_tilde,
            candidates,
        }),
    }
}

/// Verifies that every (η, ξ) in the hidden support separates the menu,
/// i.e. no two slots produce s̃ values within `tol` of each other.
pub fn check_menu_distinguishable(
    model: &SpinModel,
    menu: &[Direction],
    particle: Particle,
    tol: f64,
) -> Result<()> {
    if menu.is_empty() {
        return Err(Error::InvalidConfig("empty direction menu".into()));
    }
    for eta in model.support_labels() {
        for &xi in model.xi().support() {
            let values = menu
                .iter()
                .map(|n| model.cval_spin(eta, xi, n, particle))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..values.len() {
                let clash: Vec<usize> = (0..values.len())
                    .filter(|&j| (values[j] - values[i]).abs() <= tol)
                    .collect();
                if clash.len() > 1 {
                    return Err(Error::AmbiguousInference {
                        particle,
                        s_tilde: values[i],
                        candidates: clash,
                    });
                }
            }
        }
    }
    Ok(())
}

fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Polar angles θ in the xz-plane for which s̃ at the triple's (η, ξ)
/// equals the triple's s̃, without a menu.
///
/// s̃ is linear in the direction, so along the xz-plane
/// s̃(θ) = sinθ·s̃_x + cosθ·s̃_z, which has zero, one or two solutions in
/// (−π, π]. Two solutions is the usual case, so this alone does not pin
/// down the direction.
pub fn coplanar_angle_candidates(
    model: &SpinModel,
    triple: &Triple,
    particle: Particle,
    tol: f64,
) -> Result<Vec<f64>> {
    let sx = model.cval_spin(triple.eta_index, triple.xi, &Direction::x(), particle)?;
    let sz = model.cval_spin(triple.eta_index, triple.xi, &Direction::z(), particle)?;
    let r = sx.hypot(sz);
    if r <= tol {
        return Err(Error::Domain(
            "s̃ does not depend on the angle at this (η, ξ)".into(),
        ));
    }
    let ratio = triple.s_tilde / r;
    if ratio.abs() > 1.0 + tol / r {
        return Ok(Vec::new());
    }
    let base = ratio.clamp(-1.0, 1.0).asin();
    // sx·sinθ + sz·cosθ = r·sin(θ + φ)
    let phi = sz.atan2(sx);
    let first = wrap_angle(base - phi);
    let second = wrap_angle(PI - base - phi);
    if (wrap_angle(first - second)).abs() <= tol {
        Ok(vec![first])
    } else {
        Ok(vec![first, second])
    }
}
