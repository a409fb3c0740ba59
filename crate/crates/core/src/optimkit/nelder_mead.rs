use super::{check_finite, BoxBounds, MinimizeOutcome, OptimizerConfig, Termination};
use crate::error::{Error, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
/// Initial simplex edge as a fraction of each box side.
const INITIAL_STEP: f64 = 0.1;

struct Counter<F> {
    f: F,
    bounds: BoxBounds,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Counter<F> {
    fn eval(&mut self, mut x: Vec<f64>) -> Result<(Vec<f64>, f64)> {
        self.bounds.project(&mut x);
        let v = (self.f)(&x)?;
        check_finite(v, None)?;
        self.evaluations += 1;
        Ok((x, v))
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
}

/// Nelder-Mead simplex search inside a box.
///
/// Every trial point is projected onto `bounds` before evaluation, so the
/// function is only ever called at feasible points. Stops when the spread of
/// simplex values is below `cfg.cost_tolerance` or after `cfg.max_iterations`
/// simplex updates. The best vertex value never increases.
pub fn minimize_derivative_free<F>(f: F, x0: &[f64], bounds: &BoxBounds, cfg: &OptimizerConfig) -> Result<MinimizeOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    bounds.validate()?;
    let n = x0.len();
    if n == 0 || bounds.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bounds.dim(),
        });
    }
    let mut fc = Counter {
        f,
        bounds: bounds.clone(),
        evaluations: 0,
    };

    let mut simplex = vec![fc.eval(x0.to_vec())?];
    let start = simplex[0].0.clone();
    for i in 0..n {
        let width = bounds.upper[i] - bounds.lower[i];
        let step = if width > 0.0 { INITIAL_STEP * width } else { 0.0 };
        let mut v = start.clone();
        v[i] = if v[i] + step <= bounds.upper[i] { v[i] + step } else { v[i] - step };
        simplex.push(fc.eval(v)?);
    }
    let mut history = Vec::new();
    let mut iterations = 0;

    let termination = loop {
        // stable sort keeps earlier vertices first among ties
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        history.push(simplex[0].1);
        if simplex[n].1 - simplex[0].1 < cfg.cost_tolerance {
            break Termination::CostTolerance;
        }
        if iterations >= cfg.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            centroid.iter_mut().zip(v).for_each(|(c, vi)| *c += vi / n as f64);
        }
        let worst = simplex[n].clone();
        let (xr, fr) = fc.eval(affine(&centroid, &worst.0, -REFLECT))?;

        if fr < simplex[0].1 {
            let (xe, fe) = fc.eval(affine(&centroid, &worst.0, -EXPAND))?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let outside = fr < worst.1;
            let target = if outside { &xr } else { &worst.0 };
            let (xc, fcv) = fc.eval(affine(&centroid, target, CONTRACT))?;
            if fcv < fr.min(worst.1) {
                simplex[n] = (xc, fcv);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    *vertex = fc.eval(affine(&best, &vertex.0, SHRINK))?;
                }
            }
        }
    };

    let (x, cost) = simplex.swap_remove(0);
    Ok(MinimizeOutcome {
        x,
        cost,
        iterations,
        evaluations: fc.evaluations,
        termination,
        cost_history: history,
    })
}
