//! Adaptive Dormand–Prince 5(4) integrator for small first-order systems.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One embedded step; returns the 5th-order solution and the error estimate.
fn step<F>(f: &F, t: f64, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2])
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let comb = |terms: &[(f64, [f64; 2])]| {
        let mut out = y;
        for (a, k) in terms {
            out[0] += h * a * k[0];
            out[1] += h * a * k[1];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, comb(&[(A21, k1)]));
    let k3 = f(t + C3 * h, comb(&[(A31, k1), (A32, k2)]));
    let k4 = f(t + C4 * h, comb(&[(A41, k1), (A42, k2), (A43, k3)]));
    let k5 = f(t + C5 * h, comb(&[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
    let k6 = f(t + h, comb(&[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
    let y5 = comb(&[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = f(t + h, y5);
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err)
}

/// Integrate from `t0` to `t1`, never stepping across `t1`. `stop` is
/// checked after every accepted step; integration ends early when it
/// returns `true`. Returns the final `(t, y)` and whether `stop` fired.
pub(crate) fn integrate<F, S>(
    f: &F,
    t0: f64,
    y0: [f64; 2],
    t1: f64,
    h_init: f64,
    tol: Tolerance,
    mut stop: S,
) -> (f64, [f64; 2], bool)
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
    S: FnMut(f64, [f64; 2]) -> bool,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = h_init.min(t1 - t0);
    let mut rejects = 0usize;
    while t < t1 {
        let last = t + h >= t1;
        let hh = if last { t1 - t } else { h };
        let (y_new, err) = step(f, t, y, hh);
        let mut norm = 0.0_f64;
        for i in 0..2 {
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            norm = norm.max((err[i] / sc).abs());
        }
        if norm <= 1.0 || hh < 1e-14 * t1.abs().max(1.0) || !norm.is_finite() && rejects > 50 {
            t = if last { t1 } else { t + hh };
            y = y_new;
            rejects = 0;
            if stop(t, y) || !y[0].is_finite() {
                return (t, y, true);
            }
            let fac = if norm == 0.0 { 5.0 } else { (0.9 * libm::pow(norm, -0.2)).clamp(0.2, 5.0) };
            h = hh * fac;
        } else {
            rejects += 1;
            let fac = if norm.is_finite() { (0.9 * libm::pow(norm, -0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h = hh * fac;
        }
    }
    (t, y, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: [f64; 2]| [y[1], -y[0]];
        let tol = Tolerance { rtol: 1e-11, atol: 1e-13 };
        let (t, y, stopped) = integrate(&f, 0.0, [1.0, 0.0], 10.0, 0.1, tol, |_, _| false);
        assert!(!stopped);
        assert_eq!(t, 10.0);
        assert!((y[0] - libm::cos(10.0)).abs() < 1e-9);
        assert!((y[1] + libm::sin(10.0)).abs() < 1e-9);
    }

    #[test]
    fn stop_condition_fires() {
        let f = |_t: f64, y: [f64; 2]| [y[1], -y[0]];
        let tol = Tolerance { rtol: 1e-10, atol: 1e-12 };
        let (t, y, stopped) = integrate(&f, 0.0, [1.0, 0.0], 10.0, 0.01, tol, |_, y| y[0] < 0.0);
        assert!(stopped);
        assert!(y[0] < 0.0 && t > 1.5 && t < 1.7);
    }
}
