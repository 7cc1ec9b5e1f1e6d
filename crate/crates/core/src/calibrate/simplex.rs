//! Bounded Nelder–Mead downhill simplex with an evaluation budget.
//!
//! Trial points are projected onto the box. When the simplex collapses
//! (stagnation) the search restarts once from the best point with a fresh
//! simplex. Batches of independent points (the initial simplex, shrink
//! steps) are evaluated concurrently; results are consumed in index order.
//! Revisiting a point already scored reuses its value without spending budget.

use std::collections::HashMap;

use crate::par::{self, Exec};

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    /// Initial edge length per coordinate.
    pub steps: Vec<f64>,
    /// Collapse threshold on the simplex extent (∞-norm).
    pub xtol: f64,
    /// Collapse threshold on the spread of vertex values, relative to the best.
    pub ftol: f64,
    pub restarts: usize,
    pub exec: Exec,
}

/// One objective evaluation, in the order it was requested.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub f: f64,
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: Vec<Evaluation>,
    pub restarts_used: usize,
}

struct Evaluator<'a, F> {
    f: &'a F,
    lower: &'a [f64],
    upper: &'a [f64],
    budget: usize,
    exec: Exec,
    log: Vec<Evaluation>,
    seen: HashMap<Vec<u64>, f64>,
}

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

impl<'a, F> Evaluator<'a, F>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.lower.iter().zip(self.upper)).map(|(&v, (&lo, &hi))| v.clamp(lo, hi)).collect()
    }

    fn remaining(&self) -> usize {
        self.budget.saturating_sub(self.log.len())
    }

    /// Scores `xs`, simulating only unseen points and as many as the budget
    /// allows; `None` once it runs out.
    fn batch(&mut self, xs: Vec<Vec<f64>>) -> Option<Vec<f64>> {
        let xs: Vec<Vec<f64>> = xs.iter().map(|x| self.project(x)).collect();
        let mut fresh: Vec<Vec<f64>> = Vec::new();
        for x in &xs {
            if !self.seen.contains_key(&key(x)) && !fresh.contains(x) {
                fresh.push(x.clone());
            }
        }
        let complete = fresh.len() <= self.remaining();
        fresh.truncate(self.remaining());
        let f = self.f;
        let fs = par::map_slice(self.exec, &fresh, |x| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        });
        for (x, fv) in fresh.into_iter().zip(fs) {
            self.seen.insert(key(&x), fv);
            self.log.push(Evaluation { x, f: fv });
        }
        if !complete {
            return None;
        }
        Some(xs.iter().map(|x| self.seen[&key(x)]).collect())
    }

    fn one(&mut self, x: Vec<f64>) -> Option<(Vec<f64>, f64)> {
        let x = self.project(&x);
        let f = self.batch(vec![x.clone()])?[0];
        Some((x, f))
    }
}

const MAX_ITERATIONS: usize = 10_000;

fn centroid(verts: &[(Vec<f64>, f64)], n: usize) -> Vec<f64> {
    let dim = verts[0].0.len();
    (0..dim).map(|d| verts[..n].iter().map(|v| v.0[d]).sum::<f64>() / n as f64).collect()
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&p, &q)| p + t * (q - p)).collect()
}

/// Minimizes `f` over the box `[lower, upper]` from `x0` using at most
/// `max(budget, 1)` evaluations. The first evaluation is always `x0`.
pub fn minimize<F>(f: &F, x0: &[f64], lower: &[f64], upper: &[f64], budget: usize, opts: &SimplexOptions) -> SimplexResult
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let dim = x0.len();
    let mut ev = Evaluator { f, lower, upper, budget: budget.max(1), exec: opts.exec, log: Vec::new(), seen: HashMap::new() };
    let (start, f0) = ev.one(x0.to_vec()).expect("budget of at least one evaluation");
    let mut best = (start, f0);
    let mut restarts_used = 0;

    if dim > 0 {
        'outer: for round in 0..=opts.restarts {
            restarts_used = round;
            // Initial simplex around the incumbent, stepping inward at an upper bound.
            let mut verts = vec![best.clone()];
            let mut batch = Vec::with_capacity(dim);
            for d in 0..dim {
                let mut x = best.0.clone();
                let step = opts.steps[d];
                x[d] = if x[d] + step <= upper[d] { x[d] + step } else { x[d] - step };
                batch.push(x);
            }
            let Some(fs) = ev.batch(batch.clone()) else { break };
            verts.extend(batch.into_iter().map(|x| ev.project(&x)).zip(fs));

            // Cached revisits cost no budget, so cap the iterations as well.
            for _ in 0..MAX_ITERATIONS {
                verts.sort_by(|a, b| a.1.total_cmp(&b.1));
                if verts[0].1 < best.1 {
                    best = verts[0].clone();
                }
                let extent = verts[1..]
                    .iter()
                    .flat_map(|v| v.0.iter().zip(&verts[0].0).map(|(a, b)| (a - b).abs()))
                    .fold(0.0, f64::max);
                let spread = verts[dim].1 - verts[0].1;
                if extent < opts.xtol || spread <= opts.ftol * verts[0].1.abs() {
                    continue 'outer;
                }

                let c = centroid(&verts, dim);
                let worst = verts[dim].clone();
                let Some(reflected) = ev.one(lerp(&c, &worst.0, -1.0)) else { break 'outer };
                if reflected.1 < verts[0].1 {
                    let Some(expanded) = ev.one(lerp(&c, &reflected.0, 2.0)) else { break 'outer };
                    verts[dim] = if expanded.1 < reflected.1 { expanded } else { reflected };
                } else if reflected.1 < verts[dim - 1].1 {
                    verts[dim] = reflected;
                } else {
                    let outside = reflected.1 < worst.1;
                    let target = if outside { lerp(&c, &reflected.0, 0.5) } else { lerp(&c, &worst.0, 0.5) };
                    let Some(contracted) = ev.one(target) else { break 'outer };
                    let accept = if outside { contracted.1 <= reflected.1 } else { contracted.1 < worst.1 };
                    if accept {
                        verts[dim] = contracted;
                    } else {
                        let anchor = verts[0].0.clone();
                        let shrunk: Vec<Vec<f64>> = verts[1..].iter().map(|v| lerp(&anchor, &v.0, 0.5)).collect();
                        let Some(fs) = ev.batch(shrunk.clone()) else { break 'outer };
                        for (slot, (x, fv)) in verts[1..].iter_mut().zip(shrunk.into_iter().zip(fs)) {
                            *slot = (ev.project(&x), fv);
                        }
                    }
                }
            }
        }
    }

    for e in &ev.log {
        if e.f < best.1 {
            best = (e.x.clone(), e.f);
        }
    }
    SimplexResult { x: best.0, f: best.1, evaluations: ev.log, restarts_used }
}
