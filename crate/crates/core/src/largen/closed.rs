//! Closed-form large-`n` solutions for the Ginibre, spiric and Jordan-shift
//! initial conditions.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::LargeNPoint;
use crate::error::{Error, Result};
use crate::matrix::{build_initial, ComplexMatrix, InitialCondition};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `X0 = 0`.
    Ginibre,
    /// `X0 = diag(a, …, a, -a, …, -a)`.
    Spiric(Complex64),
    /// `X0 = α` on the superdiagonal.
    Jordan(Complex64),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ginibre => "ginibre",
            Self::Spiric(_) => "spiric",
            Self::Jordan(_) => "jordan",
        }
    }

    pub fn initial_condition(&self) -> InitialCondition {
        match *self {
            Self::Ginibre => InitialCondition::Zero,
            Self::Spiric(a) => InitialCondition::Spiric(a),
            Self::Jordan(alpha) => InitialCondition::Jordan(alpha),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Spiric(a) if a.norm() == 0.0 => Err(Error::invalid("spiric parameter a must be non-zero")),
            Self::Spiric(a) | Self::Jordan(a) if !(a.re.is_finite() && a.im.is_finite()) => {
                Err(Error::invalid("family parameter must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Finite-`n` matrix with the family's large-`n` limit.
///
/// For the Jordan shift this is the circulant completion (an extra `α` in
/// the bottom-left corner). It is normal with eigenvalues `α e^{2πik/n}` and
/// shares the shift's large-`n` potential, but lacks the exponentially small
/// singular value that makes the finite shift matrix fill the inner disk of
/// the annulus.
pub fn large_n_realization(family: Family, n: usize) -> Result<ComplexMatrix> {
    family.validate()?;
    match family {
        Family::Jordan(alpha) => {
            let mut x = build_initial(&family.initial_condition(), n)?;
            if n > 1 {
                x.set(n - 1, 0, alpha);
            }
            Ok(x)
        }
        _ => build_initial(&family.initial_condition(), n),
    }
}

/// A closed-form point together with the spiric density written with `Z_a²`
/// in the denominator, a form that diverges on the line `Z_a = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedExample {
    pub point: LargeNPoint,
    pub rho_za_form: Option<f64>,
}

struct SpiricVars {
    za: f64,
    sa: f64,
    a2: f64,
}

fn spiric_vars(a: Complex64, z: Complex64, tau: f64) -> SpiricVars {
    let za = 2.0 * (z.conj() * a).re;
    SpiricVars { za, sa: (tau * tau + 4.0 * za * za).sqrt(), a2: a.norm_sqr() }
}

fn spiric_inside(a: Complex64, z: Complex64, tau: f64) -> bool {
    let lhs = tau * (a.norm_sqr() + z.norm_sqr());
    let rhs = (a * a - z * z).norm_sqr();
    lhs >= rhs * (1.0 - 1e-12)
}

fn jordan_t(alpha: Complex64, z: Complex64, tau: f64) -> f64 {
    (tau * tau + 4.0 * alpha.norm_sqr() * z.norm_sqr()).sqrt()
}

enum JordanRegion {
    Hole,
    Annulus,
    Outside,
}

fn jordan_region(alpha: Complex64, z: Complex64, tau: f64) -> JordanRegion {
    let (z2, a2) = (z.norm_sqr(), alpha.norm_sqr());
    let slack = 1e-12 * (a2 + tau);
    if z2 > a2 + tau + slack {
        JordanRegion::Outside
    } else if z2 < a2 - tau - slack {
        JordanRegion::Hole
    } else {
        JordanRegion::Annulus
    }
}

pub fn closed_example(family: Family, z: Complex64, tau: f64) -> Result<ClosedExample> {
    family.validate()?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be finite and > 0, got {tau}")));
    }
    let z2 = z.norm_sqr();
    let mut rho_za_form = None;
    let (inside, u, phi, rho) = match family {
        Family::Ginibre => {
            if z2 <= tau {
                (true, tau - z2, tau.ln() + z2 / tau - 1.0, 1.0 / (PI * tau))
            } else {
                (false, 0.0, z2.ln(), 0.0)
            }
        }
        Family::Spiric(a) => {
            let SpiricVars { za, sa, a2 } = spiric_vars(a, z, tau);
            rho_za_form = Some((sa * (2.0 - tau * a2) + tau * tau * a2) / (2.0 * PI * tau * za * za * sa));
            if spiric_inside(a, z, tau) {
                let u = (0.5 * tau - a2 - z2 + 0.5 * sa).max(0.0);
                let phi = 0.5 * (0.5 * tau * tau + 0.5 * tau * sa).ln() + (a2 + z2 - 0.5 * tau - 0.5 * sa) / tau;
                let rho = (1.0 / tau - 2.0 * a2 / (sa * (sa + tau))) / PI;
                (true, u, phi, rho)
            } else {
                (false, 0.0, 0.5 * ((z - a).norm_sqr().ln() + (z + a).norm_sqr().ln()), 0.0)
            }
        }
        Family::Jordan(alpha) => {
            let a2 = alpha.norm_sqr();
            match jordan_region(alpha, z, tau) {
                JordanRegion::Hole => (false, 0.0, a2.ln(), 0.0),
                JordanRegion::Outside => (false, 0.0, z2.ln(), 0.0),
                JordanRegion::Annulus => {
                    let t = jordan_t(alpha, z, tau);
                    let u = (t - z2 - a2).max(0.0);
                    let phi = (0.5 * tau + 0.5 * t).ln() + (z2 + a2) / tau - t / tau;
                    (true, u, phi, (1.0 - a2 / t) / (PI * tau))
                }
            }
        }
    };
    Ok(ClosedExample {
        point: LargeNPoint { z, tau, inside, r_star: u.sqrt(), phi, rho, overlap: u / (PI * tau * tau) },
        rho_za_form,
    })
}

/// Diagonal Green's function `g = ∂_z φ` at `r = 0`.
///
/// The spiric interior value is written as `z̄/τ - 2āZ_a/(τ(S_a + τ))`, the
/// form `z̄/τ - ā(S_a - τ)/(2τZ_a)` with the removable `0/0` at `Z_a = 0`
/// rationalized away.
pub fn closed_green(family: Family, z: Complex64, tau: f64) -> Result<Complex64> {
    let p = closed_example(family, z, tau)?.point;
    let zb = z.conj();
    Ok(match family {
        Family::Ginibre => {
            if p.inside {
                zb / tau
            } else {
                1.0 / z
            }
        }
        Family::Spiric(a) => {
            if p.inside {
                let SpiricVars { za, sa, .. } = spiric_vars(a, z, tau);
                zb / tau - a.conj() * (2.0 * za / (tau * (sa + tau)))
            } else {
                z / (z * z - a * a)
            }
        }
        Family::Jordan(alpha) => match jordan_region(alpha, z, tau) {
            JordanRegion::Hole => Complex64::new(0.0, 0.0),
            JordanRegion::Outside => 1.0 / z,
            JordanRegion::Annulus => {
                let t = jordan_t(alpha, z, tau);
                zb / tau * (1.0 - 2.0 * alpha.norm_sqr() / (tau + t))
            }
        },
    })
}
