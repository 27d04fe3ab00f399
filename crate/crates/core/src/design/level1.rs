//! Level-1 phase: two pairs that cancel the bright-excited coupling.

use core::f64::consts::{FRAC_PI_2, PI};

use crate::linalg::wrap_phase;

/// Stokes phase step `pi - 2 alpha` between the two pairs of a unit,
/// reduced to `(-pi, pi]`.
pub fn level1_phase(alpha: f64) -> f64 {
    wrap_phase(PI - 2.0 * alpha)
}

/// Relative phase `theta_p - theta_s` that sends `|g>` to
/// `(|g> + e^{i chi}|f>)/sqrt(2)` through a block
/// `|d><d| + e^{i Phi}|b><b|` at mixing angle `pi/4`.
///
/// The block leaves the ratio of the `f` and `g` amplitudes at
/// `i tan(Phi/2) e^{-i theta_sp}`, so only the sign of `tan(Phi/2)` enters;
/// an equal-weight result needs `|Phi| = pi/2` in addition.
pub fn level1_axis_phase(block_phase: f64, chi: f64) -> f64 {
    let flip = if libm::tan(block_phase / 2.0) < 0.0 { PI } else { 0.0 };
    wrap_phase(-(FRAC_PI_2 - chi + flip))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cis, C64};

    #[test]
    fn examples() {
        assert!(level1_phase(PI / 2.0).abs() < 1e-15);
        assert!((level1_phase(1.029) - 1.0836).abs() < 1e-4);
        assert!((level1_phase(0.4479) - 2.2458).abs() < 1e-4);
    }

    #[test]
    fn reduced_range() {
        for a in [-7.0, -1.0, 0.0, 2.0, 9.5] {
            let p = level1_phase(a);
            assert!(p > -PI && p <= PI);
        }
    }

    #[test]
    fn axis_phase_gives_target() {
        // Direct 2x2 evaluation of the block on |g>.
        for &phi_b in &[FRAC_PI_2, -FRAC_PI_2] {
            for &chi in &[0.0, 0.7, -2.0] {
                let x = -level1_axis_phase(phi_b, chi);
                let h = core::f64::consts::FRAC_1_SQRT_2;
                let d = [cis(x) * h, C64::new(-h, 0.0)];
                let b = [C64::new(h, 0.0), cis(-x) * h];
                let e = cis(phi_b);
                let g = d[0] * d[0].conj() + e * b[0] * b[0].conj();
                let f = d[1] * d[0].conj() + e * b[1] * b[0].conj();
                let overlap = (g + f * cis(-chi)) * h;
                assert!((overlap.norm_sqr() - 1.0).abs() < 1e-12, "Phi {phi_b} chi {chi}");
            }
        }
    }
}
