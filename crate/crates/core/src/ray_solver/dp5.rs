//! Dormand–Prince 5(4) with per-step hooks for branch bookkeeping.

use num_complex::Complex64;

use crate::error::Result;

pub(crate) trait OdeSystem {
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) -> Result<()>;

    /// Inspect a proposed step end; `false` rejects it and halves the step.
    fn admissible(&self, _t: f64, _y: &[Complex64]) -> Result<bool> {
        Ok(true)
    }

    fn accept(&mut self, _t: f64, _y: &[Complex64]) -> Result<()> {
        Ok(())
    }

    /// Reason to stop early, checked after every accepted step.
    fn halt(&self, _t: f64, _y: &[Complex64]) -> Option<String> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StepControl {
    pub tol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Outcome {
    pub accepted: usize,
    pub rejected: usize,
    pub t_last: f64,
    pub halted: Option<String>,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate from `t0` to `t_end`, landing exactly on every point of
/// `stops` (sorted, inside `(t0, t_end]`). `on_accept` sees each accepted
/// step end.
pub(crate) fn integrate<S: OdeSystem>(
    sys: &mut S,
    t0: f64,
    y0: &[Complex64],
    t_end: f64,
    stops: &[f64],
    ctl: StepControl,
    mut on_accept: impl FnMut(&S, f64, &[Complex64]) -> Result<()>,
) -> Result<Outcome> {
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![Complex64::new(0.0, 0.0); n];
    let mut y_new = vec![Complex64::new(0.0, 0.0); n];
    let span = t_end - t0;
    let mut h = (span * 1e-3).max(1e-6).min(span);
    let h_floor = 1e-14 * t_end.abs().max(1.0);
    let mut out = Outcome {
        t_last: t0,
        ..Outcome::default()
    };
    let mut next_stop = stops.iter().copied().filter(|&s| s > t0).peekable();
    while t < t_end {
        if out.accepted + out.rejected >= ctl.max_steps {
            out.halted = Some(format!("step budget of {} exhausted", ctl.max_steps));
            return Ok(out);
        }
        let target = next_stop.peek().copied().unwrap_or(t_end).min(t_end);
        let hits_target = t + h >= target;
        let step = if hits_target { target - t } else { h };
        sys.rhs(t, &y, &mut k[0])?;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += kj[i] * A[s][j];
                }
                stage[i] = y[i] + acc * step;
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            sys.rhs(t + C[s] * step, &stage, &mut tail[0])?;
        }
        // the 7th stage point is the 5th-order solution
        y_new.copy_from_slice(&stage);
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = Complex64::new(0.0, 0.0);
            for (s, ks) in k.iter().enumerate() {
                e += ks[i] * E[s];
            }
            let scale = ctl.tol * (1.0 + y[i].norm().max(y_new[i].norm()));
            err = err.max((e * step).norm() / scale);
        }
        let finite = y_new.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        if finite && err <= 1.0 && sys.admissible(t + step, &y_new)? {
            t = if hits_target { target } else { t + step };
            y.copy_from_slice(&y_new);
            sys.accept(t, &y)?;
            out.accepted += 1;
            out.t_last = t;
            on_accept(sys, t, &y)?;
            if hits_target && next_stop.peek().is_some_and(|&s| s <= t) {
                next_stop.next();
            }
            if let Some(reason) = sys.halt(t, &y) {
                out.halted = Some(reason);
                return Ok(out);
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !hits_target || step >= h {
                h = step * grow;
            }
        } else {
            out.rejected += 1;
            let shrink = if finite && err.is_finite() && err > 1.0 {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.5)
            } else {
                0.5
            };
            h = step * shrink;
            if h < h_floor {
                out.halted = Some(format!("step size underflow at t = {t}"));
                return Ok(out);
            }
        }
    }
    Ok(out)
}

/// Cubic Hermite interpolation on `[t0, t1]` from values and slopes.
pub fn hermite(t0: f64, y0: Complex64, d0: Complex64, t1: f64, y1: Complex64, d1: Complex64, t: f64) -> Complex64 {
    let h = t1 - t0;
    if h == 0.0 {
        return y0;
    }
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    y0 * h00 + d0 * (h10 * h) + y1 * h01 + d1 * (h11 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;
    impl OdeSystem for Decay {
        fn rhs(&self, _t: f64, y: &[Complex64], dy: &mut [Complex64]) -> Result<()> {
            dy[0] = -y[0];
            Ok(())
        }
    }

    #[test]
    fn exponential_decay_hits_stops() {
        let mut hits = Vec::new();
        let out = integrate(
            &mut Decay,
            0.0,
            &[Complex64::new(1.0, 0.0)],
            2.0,
            &[0.5, 1.0, 1.5],
            StepControl { tol: 1e-12, max_steps: 100_000 },
            |_, t, y| {
                hits.push((t, y[0]));
                Ok(())
            },
        )
        .unwrap();
        assert!(out.halted.is_none());
        for stop in [0.5, 1.0, 1.5, 2.0] {
            let (_, y) = hits.iter().find(|(t, _)| *t == stop).unwrap();
            assert!((y.re - (-stop).exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn hermite_is_exact_on_cubics() {
        let p = |t: f64| Complex64::new(t * t * t - 2.0 * t, 0.5 * t * t);
        let d = |t: f64| Complex64::new(3.0 * t * t - 2.0, t);
        let v = hermite(0.2, p(0.2), d(0.2), 0.7, p(0.7), d(0.7), 0.43);
        assert!((v - p(0.43)).norm() < 1e-14);
    }
}
