//! Small derivative-free optimizers used by the likelihood code.

/// Result of a Nelder–Mead minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Tolerance on the spread of function values across the simplex.
    pub f_tol: f64,
    /// Tolerance on the largest vertex distance from the best vertex.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            f_tol: 1e-13,
            x_tol: 1e-10,
        }
    }
}

/// Minimizes `f` starting from `start` with an axis-aligned initial simplex of size `step`.
///
/// `f` may return `+inf` (or NaN, treated as `+inf`) outside its feasible region;
/// the starting point must be feasible.
pub fn nelder_mead<F>(f: F, start: &[f64], step: &[f64], opts: NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += step[i];
        // step back toward the start if the vertex is infeasible
        let mut s = step[i];
        let mut tries = 0;
        while !eval(&v).is_finite() && tries < 30 {
            s *= -0.5;
            v[i] = start[i] + s;
            tries += 1;
        }
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let (alpha, gamma, rho, shrink) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[dim];
        let spread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);
        if worst.is_finite()
            && (worst - best).abs() <= opts.f_tol * (1.0 + best.abs())
            && spread <= opts.x_tol
        {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for v in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-alpha);
        let f_r = eval(&reflected);
        if f_r < values[0] {
            let expanded = along(-gamma);
            let f_e = eval(&expanded);
            if f_e < f_r {
                simplex[dim] = expanded;
                values[dim] = f_e;
            } else {
                simplex[dim] = reflected;
                values[dim] = f_r;
            }
            continue;
        }
        if f_r < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < values[dim] {
            let c = along(-rho);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = along(rho);
            let fc = eval(&c);
            (c, fc)
        };
        if f_c < values[dim].min(f_r) {
            simplex[dim] = contracted;
            values[dim] = f_c;
            continue;
        }
        for i in 1..=dim {
            let shrunk: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + shrink * (x - b))
                .collect();
            values[i] = eval(&shrunk);
            simplex[i] = shrunk;
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        point: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

/// Maximizes a univariate function on `[lo, hi]`: a coarse grid scan locates the best
/// cell, then golden-section search refines inside the neighbouring cells.
///
/// Returns `(argmax, max)`; the max is `-inf` if `f` is nowhere finite on the grid.
pub fn grid_golden_max<F>(f: F, lo: f64, hi: f64, grid: usize, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let h = (hi - lo) / grid as f64;
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=grid {
        let v = eval(lo + i as f64 * h);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    if !best_v.is_finite() {
        return (lo + best_i as f64 * h, best_v);
    }
    let mut a = lo + best_i.saturating_sub(1) as f64 * h;
    let mut b = (lo + (best_i + 1) as f64 * h).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    let grid_x = lo + best_i as f64 * h;
    let (x, v) = if fc > fd { (c, fc) } else { (d, fd) };
    if v >= best_v {
        (x, v)
    } else {
        (grid_x, best_v)
    }
}

/// Bisection for a sign change of `g` on `[lo, hi]`, where `g(lo) <= 0 < g(hi)`.
/// Returns the largest point found with `g <= 0`.
pub fn bisect_last_nonpositive<G>(g: G, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64
where
    G: Fn(f64) -> f64,
{
    for _ in 0..200 {
        if (hi - lo) <= rel_tol * lo.abs().max(hi.abs()).max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.1, 0.1], NelderMeadOptions::default());
        assert!(m.converged);
        assert!((m.point[0] - 1.0).abs() < 1e-6, "{:?}", m.point);
        assert!((m.point[1] - 1.0).abs() < 1e-6, "{:?}", m.point);
    }

    #[test]
    fn respects_infeasible_region() {
        // minimum of (x-2)^2 constrained to x <= 1
        let f = |x: &[f64]| {
            if x[0] > 1.0 {
                f64::INFINITY
            } else {
                (x[0] - 2.0).powi(2) + x[1] * x[1]
            }
        };
        let m = nelder_mead(f, &[0.0, 0.5], &[0.2, 0.2], NelderMeadOptions::default());
        assert!((m.point[0] - 1.0).abs() < 1e-6);
        assert!(m.value.is_finite());
    }

    #[test]
    fn golden_finds_interior_max() {
        let (x, v) = grid_golden_max(|x| -(x - 0.3).powi(2) + 1.0, -1.0, 2.0, 30, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_handles_partially_infinite() {
        let f = |x: f64| {
            if x < 0.5 {
                f64::NEG_INFINITY
            } else {
                -(x - 0.7).powi(2)
            }
        };
        let (x, _) = grid_golden_max(f, 0.0, 1.0, 20, 1e-12);
        assert!((x - 0.7).abs() < 1e-6);
    }

    #[test]
    fn bisection_root() {
        let r = bisect_last_nonpositive(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(r * r - 2.0 <= 0.0);
    }
}
