//! Bounded scalar minimization: Brent's method (golden section with
//! parabolic interpolation) on a closed interval.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Brent minimization of `f` on `[lo, hi]` to absolute tolerance `xtol`.
///
/// The interior search never samples the endpoints; when `check_endpoints`
/// is set both bounds are also evaluated and the best of the three is
/// returned, so a monotone objective pins exactly to a bound.
pub fn minimize_bounded<F, E>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    max_iter: usize,
    check_endpoints: bool,
) -> Result<ScalarMinimum, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let golden = 0.5 * (3.0 - 5f64.sqrt());
    let sqrt_eps = f64::EPSILON.sqrt();

    let mut x = a + golden * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x)?;
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut evaluations = 1;

    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + xtol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }

        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= xm { a - x } else { b - x };
            d = golden * e;
        }

        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u)?;
        evaluations += 1;

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    let mut best = ScalarMinimum { x, fx, evaluations };
    if check_endpoints {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        for end in [lo, hi] {
            let fe = f(end)?;
            best.evaluations += 1;
            if fe < best.fx {
                best.x = end;
                best.fx = fe;
            }
        }
    }
    Ok(best)
}
