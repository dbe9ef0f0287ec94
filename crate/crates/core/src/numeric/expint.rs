//! Generalized exponential integrals `E_n(z)` for complex `z` off the
//! negative real axis, used to close oscillatory Fourier tails exactly.

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 10_000;

/// `E_n(z) = ∫_1^∞ e^{-z t} t^{-n} dt` for `n >= 1`, `Re z >= 0`, `z != 0`.
pub fn exp_integral_en(n: u32, z: Complex64) -> Complex64 {
    assert!(n >= 1, "E_n requires n >= 1");
    if z.norm() > 2.0 {
        continued_fraction(n, z)
    } else {
        power_series(n, z)
    }
}

// Modified Lentz evaluation of the continued fraction
// E_n(z) = e^{-z} / (z + n - 1·n/(z + n + 2 - 2(n+1)/(z + n + 4 - ...))).
fn continued_fraction(n: u32, z: Complex64) -> Complex64 {
    let tiny = 1e-300;
    let nf = n as f64;
    let mut b = z + nf;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (nf - 1.0 + i as f64);
        b += 2.0;
        d = (d * an + b).inv();
        c = b + c.inv() * an;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

fn power_series(n: u32, z: Complex64) -> Complex64 {
    let nm1 = n as i64 - 1;
    let mut ans = if nm1 != 0 {
        Complex64::new(1.0 / nm1 as f64, 0.0)
    } else {
        -z.ln() - EULER_GAMMA
    };
    let mut fact = Complex64::new(1.0, 0.0);
    for i in 1..MAX_ITER as i64 {
        fact *= -z / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-z.ln() + psi)
        };
        ans += del;
        if del.norm() < ans.norm() * 1e-17 {
            break;
        }
    }
    ans
}

/// `∫_Z^∞ e^{iωζ} ζ^{-n} dζ` for `Z > 0`; requires `n >= 2` when `ω = 0`.
pub fn oscillatory_tail(n: u32, omega: f64, cutoff: f64) -> Complex64 {
    let scale = cutoff.powi(1 - n as i32);
    if omega == 0.0 {
        assert!(n >= 2, "non-oscillatory tail diverges for n = 1");
        return Complex64::new(scale / (n as f64 - 1.0), 0.0);
    }
    let z = Complex64::new(0.0, -omega.abs() * cutoff);
    let v = exp_integral_en(n, z) * scale;
    if omega < 0.0 {
        v.conj()
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quadrature::gauss_kronrod_panels;

    #[test]
    fn real_argument_matches_known_values() {
        // E_1(1) and E_2(1)
        let e1 = exp_integral_en(1, Complex64::new(1.0, 0.0));
        assert!((e1.re - 0.219_383_934_395_520_3).abs() < 1e-15);
        let e2 = exp_integral_en(2, Complex64::new(1.0, 0.0));
        assert!((e2.re - 0.148_495_506_775_922).abs() < 1e-15);
        let e1 = exp_integral_en(1, Complex64::new(3.0, 0.0));
        assert!((e1.re - 0.013_048_381_094_197_04).abs() < 1e-16);
    }

    #[test]
    fn imaginary_argument_gives_sine_cosine_integrals() {
        // E_1(-ix) = -Ci(x) + i(Si(x) - π/2)... conj convention: E_1(ix) = -Ci(x) + i(Si(x) - π/2)
        for (x, ci, si) in [
            (1.0, 0.337_403_922_900_968_1, 0.946_083_070_367_183),
            (5.0, -0.190_029_749_656_643_9, 1.549_931_244_944_674),
        ] {
            let e = exp_integral_en(1, Complex64::new(0.0, x));
            assert!((e.re + ci).abs() < 1e-14, "x={x} re={}", e.re);
            assert!((e.im - (si - std::f64::consts::FRAC_PI_2)).abs() < 1e-14, "x={x} im={}", e.im);
        }
    }

    #[test]
    fn tail_matches_direct_quadrature() {
        // ∫_Z^∞ cos(ωζ)/ζ^3 dζ, integrand decays fast enough to truncate at 2000.
        let (n, omega, z) = (3u32, 1.7, 4.0);
        let breaks: Vec<f64> = (0..=4000).map(|k| z + k as f64 * 0.5).collect();
        let direct = gauss_kronrod_panels(&|t: f64| (omega * t).cos() / t.powi(3), &breaks, 1e-14, 100_000);
        let tail = oscillatory_tail(n, omega, z);
        // remainder beyond 2004 is below 1/(2·2004²·ω)
        assert!((tail.re - direct.value).abs() < 1e-7);
        let breaks_s: Vec<f64> = breaks.clone();
        let direct_s = gauss_kronrod_panels(&|t: f64| (omega * t).sin() / t.powi(3), &breaks_s, 1e-14, 100_000);
        assert!((tail.im - direct_s.value).abs() < 1e-7);
        let neg = oscillatory_tail(n, -omega, z);
        assert!((neg.im + direct_s.value).abs() < 1e-7);
    }

    #[test]
    fn series_and_fraction_agree_near_switch() {
        for n in 1..6 {
            for z in [Complex64::new(0.0, 1.9), Complex64::new(0.0, 2.1), Complex64::new(1.5, 1.5)] {
                let a = power_series(n, z);
                let b = continued_fraction(n, z);
                assert!((a - b).norm() < 1e-13 * a.norm().max(1e-3), "n={n} z={z}: {a} vs {b}");
            }
        }
    }
}
