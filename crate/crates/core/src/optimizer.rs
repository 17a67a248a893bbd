//! Bound-constrained derivative-free minimization with quadratic
//! interpolation models, in the style of Powell's BOBYQA.
//!
//! The model is refit at every iteration from `2n + 1` interpolation points
//! by the least-Frobenius-norm update of the previous Hessian. Steps come
//! from a truncated conjugate-gradient solve of the trust-region subproblem,
//! clipped to the box. The trust radius is bounded below by a resolution
//! `rho` which shrinks from `rho_begin` to `rho_end`.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct DfoConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rho_begin: f64,
    pub rho_end: f64,
    pub max_evals: usize,
}

#[derive(Clone, Debug)]
pub struct DfoResult {
    pub x: Vec<f64>,
    /// Best objective value; `None` when no evaluation was allowed.
    pub f: Option<f64>,
    pub evals: usize,
    /// Best-so-far value after each evaluation.
    pub history: Vec<f64>,
}

struct Tracker<'a, F> {
    f: &'a mut F,
    evals: usize,
    best: f64,
    history: Vec<f64>,
}

impl<F, E> Tracker<'_, F>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    fn eval(&mut self, x: &[f64]) -> Result<f64, E> {
        let v = (self.f)(x)?;
        self.evals += 1;
        let v = if v.is_finite() { v } else { f64::MAX };
        if v < self.best {
            self.best = v;
        }
        self.history.push(self.best);
        Ok(v)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Minimizes `f` from `x0` inside `[lower, upper]`.
pub fn minimize<F, E>(mut f: F, x0: &[f64], cfg: &DfoConfig) -> Result<DfoResult, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let n = x0.len();
    assert_eq!(cfg.lower.len(), n);
    assert_eq!(cfg.upper.len(), n);
    let x0: Vec<f64> = (0..n).map(|i| x0[i].clamp(cfg.lower[i], cfg.upper[i])).collect();
    if cfg.max_evals == 0 || n == 0 {
        return Ok(DfoResult { x: x0, f: None, evals: 0, history: vec![] });
    }
    let mut t = Tracker { f: &mut f, evals: 0, best: f64::INFINITY, history: vec![] };
    let min_width = (0..n).map(|i| cfg.upper[i] - cfg.lower[i]).fold(f64::INFINITY, f64::min);
    let mut rho = cfg.rho_begin.min(0.5 * min_width).max(cfg.rho_end);
    let mut delta = rho;

    // Initial interpolation set: x0 and two points along each axis.
    let mut pts: Vec<Vec<f64>> = vec![x0.clone()];
    for i in 0..n {
        let (lo, hi) = (cfg.lower[i], cfg.upper[i]);
        let (a, b) = if x0[i] + rho > hi {
            (x0[i] - rho, x0[i] - 2.0 * rho)
        } else if x0[i] - rho < lo {
            (x0[i] + rho, x0[i] + 2.0 * rho)
        } else {
            (x0[i] + rho, x0[i] - rho)
        };
        for c in [a, b] {
            let mut p = x0.clone();
            p[i] = c.clamp(lo, hi);
            pts.push(p);
        }
    }
    let mut vals = Vec::with_capacity(pts.len());
    for p in &pts {
        if t.evals >= cfg.max_evals {
            break;
        }
        vals.push(t.eval(p)?);
    }
    pts.truncate(vals.len());
    let best_of = |vals: &[f64]| {
        vals.iter().enumerate().fold(0, |b, (i, &v)| if v < vals[b] { i } else { b })
    };
    if vals.len() < 2 * n + 1 {
        let b = best_of(&vals);
        return Ok(DfoResult { x: pts[b].clone(), f: Some(vals[b]), evals: t.evals, history: t.history });
    }

    let mut hess = DMatrix::<f64>::zeros(n, n);
    let mut geometry_axis = 0usize;
    let mut stalled = false;
    while t.evals < cfg.max_evals {
        let kopt = best_of(&vals);
        let xopt = pts[kopt].clone();
        let fopt = vals[kopt];
        let (grad, h) = match fit_model(&pts, &vals, &xopt, &hess, rho) {
            Some(m) => m,
            None => {
                // Degenerate geometry: rebuild the axis stencil around xopt.
                let mut k = 0;
                for i in 0..n {
                    for sign in [1.0, -1.0] {
                        if t.evals >= cfg.max_evals {
                            break;
                        }
                        if k == kopt {
                            k += 1;
                        }
                        let p = axis_point(&xopt, i, sign * rho, cfg);
                        vals[k] = t.eval(&p)?;
                        pts[k] = p;
                        k += 1;
                    }
                }
                continue;
            }
        };
        hess = h;
        let d = trust_step(&grad, &hess, &xopt, delta, cfg);
        let dnorm = d.norm();
        let pred = -(grad.dot(&d) + 0.5 * d.dot(&(&hess * &d)));
        if dnorm < 0.5 * rho || pred <= 0.0 || stalled {
            stalled = false;
            // Model has nothing more to offer at this resolution: improve
            // geometry if points are far, otherwise refine rho.
            let far = farthest(&pts, &xopt, kopt);
            if dist(&pts[far], &xopt) > 2.0 * delta.max(rho) {
                let i = geometry_axis % n;
                let sign = if (geometry_axis / n) % 2 == 0 { 1.0 } else { -1.0 };
                geometry_axis += 1;
                let p = axis_point(&xopt, i, sign * rho, cfg);
                if dist(&p, &xopt) > 0.0 {
                    vals[far] = t.eval(&p)?;
                    pts[far] = p;
                    continue;
                }
            }
            if rho <= cfg.rho_end {
                break;
            }
            rho = (0.1 * rho).max(cfg.rho_end);
            delta = rho;
            continue;
        }
        let xnew: Vec<f64> = (0..n).map(|i| (xopt[i] + d[i]).clamp(cfg.lower[i], cfg.upper[i])).collect();
        let fnew = t.eval(&xnew)?;
        let ratio = (fopt - fnew) / pred;
        stalled = ratio < 0.1 && delta <= rho * (1.0 + 1e-12);
        delta = if ratio < 0.1 {
            (0.5 * delta).max(rho)
        } else if ratio > 0.7 {
            delta.max(2.0 * dnorm)
        } else {
            delta.max(dnorm)
        };
        let center = if fnew < fopt { &xnew } else { &xopt };
        let far = farthest(&pts, center, kopt);
        pts[far] = xnew;
        vals[far] = fnew;
    }
    let b = best_of(&vals);
    Ok(DfoResult { x: pts[b].clone(), f: Some(vals[b]), evals: t.evals, history: t.history })
}

fn farthest(pts: &[Vec<f64>], center: &[f64], keep: usize) -> usize {
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, p) in pts.iter().enumerate() {
        if k == keep {
            continue;
        }
        let d = dist(p, center);
        if d > best.0 {
            best = (d, k);
        }
    }
    best.1
}

/// `x + step e_i`, flipped to the other side when that leaves the box.
fn axis_point(x: &[f64], i: usize, step: f64, cfg: &DfoConfig) -> Vec<f64> {
    let mut p = x.to_vec();
    let inside = |v: f64| v >= cfg.lower[i] && v <= cfg.upper[i];
    p[i] = if inside(x[i] + step) { x[i] + step } else { x[i] - step };
    p[i] = p[i].clamp(cfg.lower[i], cfg.upper[i]);
    p
}

/// Least-Frobenius-change quadratic fit around `xopt`; returns the gradient
/// at `xopt` and the Hessian.
fn fit_model(
    pts: &[Vec<f64>],
    vals: &[f64],
    xopt: &[f64],
    h_old: &DMatrix<f64>,
    scale: f64,
) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let n = xopt.len();
    let m = pts.len();
    let ys: Vec<DVector<f64>> =
        pts.iter().map(|p| DVector::from_iterator(n, (0..n).map(|i| (p[i] - xopt[i]) / scale))).collect();
    let h_scaled = h_old * (scale * scale);
    let dim = m + n + 1;
    let mut kkt = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for k in 0..m {
        for j in 0..m {
            let dot = ys[k].dot(&ys[j]);
            kkt[(k, j)] = 0.5 * dot * dot;
        }
        kkt[(k, m)] = 1.0;
        kkt[(m, k)] = 1.0;
        for i in 0..n {
            kkt[(k, m + 1 + i)] = ys[k][i];
            kkt[(m + 1 + i, k)] = ys[k][i];
        }
        rhs[k] = vals[k] - 0.5 * ys[k].dot(&(&h_scaled * &ys[k]));
    }
    let sol = kkt.lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut h = h_scaled;
    for k in 0..m {
        h += (&ys[k] * ys[k].transpose()) * sol[k];
    }
    let g = DVector::from_iterator(n, (0..n).map(|i| sol[m + 1 + i]));
    Some((g / scale, h / (scale * scale)))
}

/// Steihaug truncated CG inside the ball, followed by a clip to the box. The
/// clipped step and the clipped Cauchy step are compared on the model.
fn trust_step(g: &DVector<f64>, h: &DMatrix<f64>, x: &[f64], delta: f64, cfg: &DfoConfig) -> DVector<f64> {
    let n = g.len();
    let model = |d: &DVector<f64>| g.dot(d) + 0.5 * d.dot(&(h * d));
    let clip = |d: &DVector<f64>| {
        DVector::from_iterator(n, (0..n).map(|i| (x[i] + d[i]).clamp(cfg.lower[i], cfg.upper[i]) - x[i]))
    };
    // Components pinned at an active bound with the gradient pushing outward
    // are frozen.
    let free: Vec<bool> = (0..n)
        .map(|i| !((x[i] <= cfg.lower[i] && g[i] > 0.0) || (x[i] >= cfg.upper[i] && g[i] < 0.0)))
        .collect();
    let mask = |v: &DVector<f64>| DVector::from_iterator(n, (0..n).map(|i| if free[i] { v[i] } else { 0.0 }));

    let mut d = DVector::<f64>::zeros(n);
    let mut r = mask(&(-g));
    let mut p = r.clone();
    let gnorm = r.norm();
    if gnorm == 0.0 {
        return d;
    }
    for _ in 0..(2 * n).max(10) {
        let hp = mask(&(h * &p));
        let curv = p.dot(&hp);
        let to_boundary = |d: &DVector<f64>, p: &DVector<f64>| {
            let a = p.dot(p);
            let b = 2.0 * d.dot(p);
            let c = d.dot(d) - delta * delta;
            (-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a)
        };
        if curv <= 0.0 {
            let tau = to_boundary(&d, &p);
            d += &p * tau;
            break;
        }
        let alpha = r.dot(&r) / curv;
        let next = &d + &p * alpha;
        if next.norm() >= delta {
            let tau = to_boundary(&d, &p);
            d += &p * tau;
            break;
        }
        d = next;
        let r_new = &r - &hp * alpha;
        if r_new.norm() < 1e-12 * gnorm {
            break;
        }
        let beta = r_new.dot(&r_new) / r.dot(&r);
        p = &r_new + &p * beta;
        r = r_new;
    }
    let cg = clip(&d);
    let gm = mask(&(-g));
    let gh = gm.dot(&(h * &gm));
    let tc = if gh > 0.0 { (gm.dot(&gm) / gh).min(delta / gm.norm()) } else { delta / gm.norm() };
    let cauchy = clip(&(gm * tc));
    if model(&cg) <= model(&cauchy) {
        cg
    } else {
        cauchy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn cfg(n: usize, max_evals: usize) -> DfoConfig {
        DfoConfig { lower: vec![-5.0; n], upper: vec![5.0; n], rho_begin: 0.3, rho_end: 1e-8, max_evals }
    }

    #[test]
    fn quadratic_converges_quickly() {
        let target = [0.7, -1.2, 2.5, 0.1];
        let f = |x: &[f64]| -> Result<f64, Infallible> {
            let d: Vec<f64> = x.iter().zip(&target).map(|(a, b)| a - b).collect();
            Ok(d[0] * d[0] + 3.0 * d[1] * d[1] + 0.5 * d[2] * d[2] + 2.0 * d[3] * d[3] + d[0] * d[1] + 1.5)
        };
        let res = minimize(f, &[0.0; 4], &cfg(4, 200)).unwrap();
        assert!(res.evals <= 200);
        for (a, b) in res.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6, "{:?}", res.x);
        }
        assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| -> Result<f64, Infallible> { Ok((x[0] - 10.0).powi(2) + (x[1] + 1.0).powi(2)) };
        let res = minimize(f, &[0.0, 0.0], &cfg(2, 150)).unwrap();
        assert!((res.x[0] - 5.0).abs() < 1e-9);
        assert!((res.x[1] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_budget_returns_start() {
        let f = |_: &[f64]| -> Result<f64, Infallible> { Ok(0.0) };
        let res = minimize(f, &[0.25, 0.5], &cfg(2, 0)).unwrap();
        assert_eq!(res.x, vec![0.25, 0.5]);
        assert_eq!(res.evals, 0);
        assert!(res.f.is_none());
    }

    #[test]
    fn nonsmooth_objective_still_monotone() {
        let f = |x: &[f64]| -> Result<f64, Infallible> { Ok(x.iter().map(|v| v.abs()).sum::<f64>() + x[0].sin()) };
        let res = minimize(f, &[1.0, -2.0, 0.5], &cfg(3, 80)).unwrap();
        assert!(res.evals <= 80);
        assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
