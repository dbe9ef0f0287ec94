//! Adaptive quadrature on finite intervals.
//!
//! Two rules: recursive Simpson with Richardson error estimates, and a
//! globally adaptive Gauss-Kronrod (10/21) scheme. Both return the summed
//! local error estimate next to the value.

use std::collections::BinaryHeap;

use super::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> QuadResult
where
    F: Fn(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut acc = SimpsonAcc {
        evaluations: 3,
        ..Default::default()
    };
    simpson_step(f, a, fa, m, fm, b, fb, whole, tol, 0, &mut acc);
    QuadResult {
        value: acc.value.value(),
        error: acc.error,
        evaluations: acc.evaluations,
    }
}

#[derive(Default)]
struct SimpsonAcc {
    value: NeumaierSum,
    error: f64,
    evaluations: usize,
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    acc: &mut SimpsonAcc,
) where
    F: Fn(f64) -> f64,
{
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    acc.evaluations += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= SIMPSON_MAX_DEPTH || delta.abs() <= 15.0 * tol || (m - a) <= f64::EPSILON * a.abs()
    {
        acc.value.add(left + right + delta / 15.0);
        acc.error += delta.abs() / 15.0;
        return;
    }
    simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1, acc);
    simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1, acc);
}

/// Adaptive Simpson over consecutive panels `breaks[i]..breaks[i+1]`.
///
/// The tolerance is shared out in proportion to panel width, so kinks and
/// peaks placed on panel boundaries never sit inside a Simpson cell.
pub fn simpson_panels<F>(f: &F, breaks: &[f64], tol: f64) -> QuadResult
where
    F: Fn(f64) -> f64,
{
    let total = breaks.last().copied().unwrap_or(0.0) - breaks.first().copied().unwrap_or(0.0);
    let mut value = NeumaierSum::new();
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let local = tol * (w[1] - w[0]) / total;
        let r = adaptive_simpson(f, w[0], w[1], local);
        value.add(r.value);
        error += r.error;
        evaluations += r.evaluations;
    }
    QuadResult {
        value: value.value(),
        error,
        evaluations,
    }
}

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_582_355_057_093,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One Gauss-Kronrod 21-point panel: (kronrod value, |kronrod - gauss|).
pub fn gauss_kronrod21<F>(f: &F, a: f64, b: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod over the given initial panels: the panel
/// with the largest error estimate is bisected until the summed estimate
/// drops below `tol` or `max_panels` is reached.
pub fn gauss_kronrod_panels<F>(f: &F, breaks: &[f64], tol: f64, max_panels: usize) -> QuadResult
where
    F: Fn(f64) -> f64,
{
    let mut heap = BinaryHeap::new();
    let mut error = 0.0;
    for w in breaks.windows(2) {
        let (value, err) = gauss_kronrod21(f, w[0], w[1]);
        error += err;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error: err,
        });
    }
    let mut evaluations = 21 * heap.len();
    while error > tol && heap.len() < max_panels {
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        let (lv, le) = gauss_kronrod21(f, worst.a, m);
        let (rv, re) = gauss_kronrod21(f, m, worst.b);
        evaluations += 42;
        error += le + re - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: m,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: m,
            b: worst.b,
            value: rv,
            error: re,
        });
    }
    // Sum in position order so the result does not depend on heap layout.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).collect::<NeumaierSum>().value();
    let error = panels.iter().map(|p| p.error).sum();
    QuadResult {
        value,
        error,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_integrate_constants() {
        let w: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((w - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_is_exact_for_degree_31() {
        for deg in [2, 10, 20, 30] {
            let (v, _) = gauss_kronrod21(&|x: f64| x.powi(deg), -1.0, 1.0);
            let exact = 2.0 / (deg as f64 + 1.0);
            assert!((v - exact).abs() < 1e-14, "degree {deg}: {v}");
        }
    }

    #[test]
    fn gauss_part_is_exact_for_degree_19() {
        let (_, err) = gauss_kronrod21(&|x: f64| x.powi(18), -1.0, 1.0);
        assert!(err < 1e-14);
        let (_, err) = gauss_kronrod21(&|x: f64| x.powi(24), -1.0, 1.0);
        assert!(err > 1e-6);
    }

    #[test]
    fn simpson_handles_smooth_integrand() {
        let r = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((r.value - 2.0).abs() < 1e-11);
        assert!(r.error < 1e-11);
    }

    #[test]
    fn panels_handle_kink_on_boundary() {
        let breaks = [0.0, 0.5, 1.0];
        let r = simpson_panels(&|x: f64| (x - 0.5).abs(), &breaks, 1e-12);
        assert!((r.value - 0.25).abs() < 1e-14);
    }

    #[test]
    fn gk_adaptive_oscillatory() {
        let breaks: Vec<f64> = (0..=10).map(|k| k as f64 * 5.0).collect();
        let r = gauss_kronrod_panels(&|x: f64| (3.0 * x).cos() * (-0.1 * x).exp(), &breaks, 1e-13, 10_000);
        // ∫0^50 e^{-0.1x} cos 3x dx
        let k = 0.1f64;
        let w = 3.0f64;
        let exact = (k + (-k * 50.0).exp() * (w * (w * 50.0).sin() - k * (w * 50.0).cos())) / (k * k + w * w);
        assert!((r.value - exact).abs() < 1e-12, "{} vs {}", r.value, exact);
    }
}
