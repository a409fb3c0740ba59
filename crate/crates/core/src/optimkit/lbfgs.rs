use std::collections::VecDeque;

use super::{check_finite, MinimizeOutcome, OptimizerConfig, Termination};
use crate::error::{Error, Result};

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Directional-derivative ratio above which an accepted step is refined.
const SECANT_C2: f64 = 0.1;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Memory {
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    depth: usize,
}

impl Memory {
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if sy <= 1e-12 * norm(&s) * norm(&y) || sy <= 0.0 {
            return;
        }
        if self.pairs.len() == self.depth {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// Two-loop recursion: returns `-H g`.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q.iter_mut().for_each(|qi| *qi = -*qi);
        q
    }
}

/// L-BFGS minimization of a smooth function.
///
/// `fg` returns the cost and its gradient at a point. Iteration stops once the
/// gradient norm drops below `cfg.gradient_tolerance`, an accepted step
/// lowers the cost by less than `cfg.cost_tolerance`, or `cfg.max_iterations`
/// steps have been taken. Restart settings and the seed are ignored here.
pub fn minimize_quasi_newton<F>(mut fg: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<MinimizeOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    cfg.validate()?;
    let mut x = x0.to_vec();
    let (mut f, mut g) = fg(&x)?;
    check_finite(f, Some(&g))?;
    if g.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: g.len(),
        });
    }
    let mut evaluations = 1;
    let mut history = vec![f];
    let mut memory = Memory {
        pairs: VecDeque::with_capacity(cfg.memory_depth),
        depth: cfg.memory_depth,
    };
    let mut iterations = 0;

    let termination = loop {
        if norm(&g) < cfg.gradient_tolerance {
            break Termination::GradientTolerance;
        }
        if iterations >= cfg.max_iterations {
            break Termination::MaxIterations;
        }

        let mut d = memory.direction(&g);
        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            memory.pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut alpha = if memory.pairs.is_empty() { (1.0 / norm(&d)).min(1.0) } else { 1.0 };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            let (ft, gt) = fg(&trial)?;
            evaluations += 1;
            check_finite(ft, Some(&gt))?;
            if ft <= f + ARMIJO_C1 * alpha * slope {
                let trial_slope = dot(&gt, &d);
                let mut best = (trial, ft, gt);
                if trial_slope.abs() > SECANT_C2 * slope.abs() && trial_slope > slope {
                    // zero of the directional derivative along the secant
                    let refined = alpha * slope / (slope - trial_slope);
                    let xr: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + refined * di).collect();
                    let (fr, gr) = fg(&xr)?;
                    evaluations += 1;
                    check_finite(fr, Some(&gr))?;
                    if fr < best.1 {
                        best = (xr, fr, gr);
                    }
                }
                accepted = Some(best);
                break;
            }
            // minimizer of the quadratic through f(0), f'(0) and f(alpha)
            let interp = -slope * alpha * alpha / (2.0 * (ft - f - slope * alpha));
            alpha = if interp.is_finite() { interp.clamp(0.1 * alpha, 0.5 * alpha) } else { 0.5 * alpha };
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            if memory.pairs.is_empty() {
                break Termination::LineSearchStalled;
            }
            memory.pairs.clear();
            continue;
        };

        iterations += 1;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        memory.push(s, y);
        let decrease = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        history.push(f);
        if decrease < cfg.cost_tolerance {
            break if norm(&g) < cfg.gradient_tolerance {
                Termination::GradientTolerance
            } else {
                Termination::CostTolerance
            };
        }
    };

    Ok(MinimizeOutcome {
        x,
        cost: f,
        iterations,
        evaluations,
        termination,
        cost_history: history,
    })
}
