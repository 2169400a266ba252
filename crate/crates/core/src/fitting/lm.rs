//! Small dense Levenberg-Marquardt solver with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) struct LmSolution {
    pub params: Vec<f64>,
    pub sse: f64,
    /// Gauss-Newton normal matrix JᵀJ at the solution.
    pub normal: DMatrix<f64>,
    pub n_points: usize,
}

impl LmSolution {
    /// Residual-variance-scaled inverse normal matrix, s²(JᵀJ)⁻¹.
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        let dof = self.n_points.saturating_sub(self.params.len());
        if dof == 0 {
            return Err(Error::FitFailure("no residual degrees of freedom".into()));
        }
        let s2 = self.sse / dof as f64;
        let inv = self
            .normal
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::FitFailure("singular normal matrix".into()))?;
        Ok(inv * s2)
    }
}

/// Minimize Σ r² where `model(p, t)` returns `(value, gradient)`.
/// `admissible` rejects parameter vectors outside the model's domain.
pub(crate) fn levenberg_marquardt<M, A>(
    times: &[f64],
    values: &[f64],
    init: Vec<f64>,
    model: M,
    admissible: A,
) -> Result<LmSolution>
where
    M: Fn(&[f64], f64) -> (f64, Vec<f64>),
    A: Fn(&[f64]) -> bool,
{
    let n = times.len();
    let np = init.len();
    let eval = |p: &[f64]| -> (f64, DMatrix<f64>, DVector<f64>) {
        let mut jac = DMatrix::zeros(n, np);
        let mut res = DVector::zeros(n);
        let mut sse = 0.0;
        for (k, (&t, &y)) in times.iter().zip(values).enumerate() {
            let (f, g) = model(p, t);
            let r = y - f;
            res[k] = r;
            sse += r * r;
            for j in 0..np {
                jac[(k, j)] = g[j];
            }
        }
        (sse, jac, res)
    };

    if !admissible(&init) {
        return Err(Error::FitFailure("initial guess outside the model domain".into()));
    }
    let mut p = init;
    let (mut sse, mut jac, mut res) = eval(&p);
    let mut lambda = 1e-3;

    for _ in 0..500 {
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &res;
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for j in 0..np {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-300);
            }
            let Some(step) = a.clone().cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let cand: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            if !cand.iter().all(|x| x.is_finite()) || !admissible(&cand) {
                lambda *= 10.0;
                continue;
            }
            let (s_new, j_new, r_new) = eval(&cand);
            if s_new <= sse {
                let small_step = step
                    .iter()
                    .zip(&p)
                    .all(|(d, x)| d.abs() <= 1e-14 * x.abs().max(1e-300));
                let small_drop = sse - s_new <= 1e-15 * sse;
                p = cand;
                sse = s_new;
                jac = j_new;
                res = r_new;
                lambda = (lambda * 0.1).max(1e-12);
                improved = true;
                if small_step || small_drop || sse == 0.0 {
                    let normal = jac.transpose() * &jac;
                    return Ok(LmSolution { params: p, sse, normal, n_points: n });
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let normal = jac.transpose() * &jac;
    Ok(LmSolution {
        params: p,
        sse,
        normal,
        n_points: n,
    })
}
