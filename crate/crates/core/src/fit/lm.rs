//! Levenberg-Marquardt with Marquardt diagonal scaling.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `½‖r(p)‖²`. `eval` returns residuals and their Jacobian.
pub(crate) fn levenberg_marquardt<F>(p0: &[f64], mut eval: F, max_iter: usize, tol: f64) -> LmOutcome
where
    F: FnMut(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let n = p0.len();
    let mut p = DVector::from_column_slice(p0);
    let (mut r, mut j) = eval(p.as_slice());
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = -1.0;
    let mut nu = 2.0;

    for it in 1..=max_iter {
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let dmax = jtj.diagonal().max();
        if !(dmax > 0.0) || g.amax() <= 1e-300 {
            return LmOutcome {
                params: p.as_slice().to_vec(),
                cost,
                iterations: it - 1,
                converged: true,
            };
        }
        if lambda < 0.0 {
            lambda = 1e-3;
        }
        // inner loop until a step lowers the cost
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12 * dmax);
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => match a.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= nu;
                        nu *= 2.0;
                        if lambda > 1e20 {
                            break;
                        }
                        continue;
                    }
                },
            };
            let trial = &p + &step;
            let (r_new, j_new) = eval(trial.as_slice());
            let cost_new = 0.5 * r_new.norm_squared();
            if cost_new.is_finite() && cost_new <= cost {
                let small = step.norm() <= tol * (p.norm() + tol);
                p = trial;
                r = r_new;
                j = j_new;
                cost = cost_new;
                lambda = (lambda / 3.0).max(1e-15);
                nu = 2.0;
                if small || cost == 0.0 {
                    return LmOutcome {
                        params: p.as_slice().to_vec(),
                        cost,
                        iterations: it,
                        converged: true,
                    };
                }
                break;
            }
            lambda *= nu;
            nu *= 2.0;
            if lambda > 1e20 {
                break;
            }
        }
        if lambda > 1e20 {
            // no descent direction left at working precision
            return LmOutcome {
                params: p.as_slice().to_vec(),
                cost,
                iterations: it,
                converged: true,
            };
        }
    }
    LmOutcome {
        params: p.as_slice().to_vec(),
        cost,
        iterations: max_iter,
        converged: false,
    }
}

/// `(JᵀJ)⁻¹`, falling back to the SVD pseudo-inverse when singular.
pub(crate) fn normal_inverse(j: &DMatrix<f64>) -> DMatrix<f64> {
    let jtj = j.transpose() * j;
    if let Some(ch) = jtj.clone().cholesky() {
        let inv = ch.inverse();
        if inv.iter().all(|x| x.is_finite()) {
            return inv;
        }
    }
    let n = jtj.nrows();
    let svd = jtj.svd(true, true);
    let smax = svd.singular_values.max();
    svd.pseudo_inverse(1e-12 * smax)
        .unwrap_or_else(|_| DMatrix::zeros(n, n))
}
