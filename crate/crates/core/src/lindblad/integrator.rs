//! Dormand-Prince 5(4) with PI step-size control, for small fixed-size
//! real systems.

/// Outcome of an [`Dopri5::advance`] call that did not reach its target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StepLimit {
    pub time: f64,
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// error coefficients: b5 - b4
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    let mut out = *y;
    for (k, c) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Adaptive integrator state. The step size carries over between calls so
/// consecutive output intervals do not restart the controller.
#[derive(Debug, Clone)]
pub(crate) struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    h: Option<f64>,
    err_prev: f64,
    pub steps_taken: usize,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h: None,
            err_prev: 1e-4,
            steps_taken: 0,
        }
    }

    /// Forget the step-size history, e.g. across a discontinuity in the RHS.
    pub fn reset(&mut self) {
        self.h = None;
        self.err_prev = 1e-4;
    }

    fn initial_step<const N: usize, F>(&self, f: &F, t: f64, y: &[f64; N], f0: &[f64; N], span: f64) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let sc = |i: usize| self.atol + self.rtol * y[i].abs();
        let rms = |v: &[f64; N]| {
            ((0..N).map(|i| (v[i] / sc(i)).powi(2)).sum::<f64>() / N as f64).sqrt()
        };
        let d0 = rms(y);
        let d1 = rms(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1 = axpy(y, h0, &[(f0, 1.0)]);
        let f1 = f(t + h0, &y1);
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = rms(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Integrate `y` from `t0` to `t1`, taking at most `max_steps` accepted
    /// plus rejected steps.
    pub fn advance<const N: usize, F>(
        &mut self,
        f: &F,
        t0: f64,
        t1: f64,
        y: &mut [f64; N],
        max_steps: usize,
    ) -> Result<(), StepLimit>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let mut t = t0;
        let mut k1 = f(t, y);
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(f, t, y, &k1, span),
        };
        let mut n = 0usize;
        loop {
            let remaining = t1 - t;
            if remaining <= 1e-14 * t1.abs().max(span) {
                return Ok(());
            }
            if n >= max_steps {
                return Err(StepLimit { time: t });
            }
            n += 1;
            let last = h >= remaining;
            let hs = if last { remaining } else { h };

            let k2 = f(t + C2 * hs, &axpy(y, hs, &[(&k1, A21)]));
            let k3 = f(t + C3 * hs, &axpy(y, hs, &[(&k1, A31), (&k2, A32)]));
            let k4 = f(t + C4 * hs, &axpy(y, hs, &[(&k1, A41), (&k2, A42), (&k3, A43)]));
            let k5 = f(
                t + C5 * hs,
                &axpy(y, hs, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]),
            );
            let k6 = f(
                t + hs,
                &axpy(y, hs, &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]),
            );
            let y_new = axpy(y, hs, &[(&k1, A71), (&k3, A73), (&k4, A74), (&k5, A75), (&k6, A76)]);
            let k7 = f(t + hs, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();

            if err <= 1.0 {
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-ALPHA) * self.err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
                };
                self.err_prev = err.max(1e-4);
                self.steps_taken += 1;
                t = if last { t1 } else { t + hs };
                *y = y_new;
                k1 = k7;
                // a clipped final step says nothing about the natural step size
                let h_next = hs * fac;
                h = if last { h.max(h_next) } else { h_next };
                self.h = Some(h);
            } else {
                let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
                h = hs * fac;
            }
        }
    }
}
