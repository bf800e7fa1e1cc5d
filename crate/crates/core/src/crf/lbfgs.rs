//! Limited-memory BFGS with a backtracking Armijo line search.
//!
//! Minimizes; callers maximizing a likelihood pass its negation.

use std::collections::VecDeque;

use super::CrfError;

pub(crate) struct Settings {
    pub memory: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    /// Function value after every accepted step, starting with the initial point.
    pub trace: Vec<f64>,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn minimize<F>(mut x: Vec<f64>, settings: &Settings, mut eval: F) -> Result<Minimum, CrfError>
where
    F: FnMut(&[f64], usize) -> Result<(f64, Vec<f64>), CrfError>,
{
    let (mut f, mut g) = eval(&x, 0)?;
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = false;

    for iteration in 1..=settings.max_iterations {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < 1e-10 {
            converged = true;
            break;
        }

        // Two-loop recursion: d = −H·g.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }

        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = if history.is_empty() { 1.0 / gnorm } else { 1.0 };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (fc, gc) = eval(&candidate, iteration)?;
            if fc <= f + ARMIJO * step * slope {
                accepted = Some((candidate, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            if history.is_empty() {
                // No descent possible along the gradient at this precision.
                converged = true;
                break;
            }
            history.clear();
            continue;
        };
        if f_new > f {
            return Err(CrfError::Diverged { iteration, trace });
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let change = (f - f_new).abs() / f_new.abs().max(1.0);
        x = x_new;
        f = f_new;
        g = g_new;
        trace.push(f);
        if change < settings.tolerance {
            converged = true;
            break;
        }
    }
    Ok(Minimum { x, trace, converged })
}
