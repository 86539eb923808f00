//! Mountain-pass path algorithm.
//!
//! A discrete path `u₀ = z₀, z₁, …, z_m, z_{m+1} = e` starts on the segment
//! from the minimum to the far point. Each iteration takes the highest
//! interior point, maximizes the energy along the local path tangent through
//! it, and then moves it one Armijo descent step, never farther than half the
//! distance to its nearer neighbour. Every few iterations the
//! interior points are redistributed by arc length on both sides of the
//! current peak, which stays in place.

use std::collections::VecDeque;

use crate::functional::{EnergyVariant, SignRestriction};
use crate::mesh::DiscreteFunction;

use crate::linesearch::LineSearch;
use super::{
    cps_of, CpsDiagnostic, Solution, SolutionKind, SolverContext, Stage, StageFailure, TraceRow,
};

const CPS_HISTORY: usize = 64;
const STALL_LIMIT: usize = 5;

/// Ordered path points with their energies; the endpoints never move.
#[derive(Debug, Clone)]
pub struct Path {
    points: Vec<Vec<f64>>,
    energies: Vec<f64>,
}

impl Path {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn interior_len(&self) -> usize {
        self.points.len() - 2
    }

    /// Highest interior point.
    pub fn peak(&self) -> usize {
        let m = self.interior_len();
        (1..=m)
            .max_by(|&a, &b| self.energies[a].total_cmp(&self.energies[b]))
            .expect("path has interior points")
    }
}

pub struct MountainPass<'a> {
    ctx: &'a SolverContext,
    sign: SignRestriction,
    variant: EnergyVariant,
    path: Path,
    ls: LineSearch,
    iteration: usize,
    stalls: usize,
    converged_at: Option<usize>,
    history: VecDeque<CpsDiagnostic>,
    trace: Vec<TraceRow>,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn axpy(a: &[f64], c: f64, d: &[f64]) -> Vec<f64> {
    a.iter().zip(d).map(|(x, y)| x + c * y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<'a> MountainPass<'a> {
    pub fn new(
        ctx: &'a SolverContext,
        u0: &DiscreteFunction,
        e: &DiscreteFunction,
        sign: SignRestriction,
    ) -> Result<Self, StageFailure> {
        let variant = EnergyVariant::signed(sign);
        let f = &ctx.functional;
        let (e0, e1) = (f.energy(u0.values(), &variant), f.energy(e.values(), &variant));
        if !(e1 < e0) {
            return Err(StageFailure::new(
                Stage::MountainPass,
                sign,
                format!("far point energy {e1:.3e} is not below J(u0) = {e0:.3e}"),
            ));
        }
        let m = ctx.options.mp.points.max(1);
        let points: Vec<Vec<f64>> = (0..=m + 1)
            .map(|j| {
                let th = j as f64 / (m + 1) as f64;
                u0.values()
                    .iter()
                    .zip(e.values())
                    .map(|(a, b)| (1.0 - th) * a + th * b)
                    .collect()
            })
            .collect();
        let energies = points.iter().map(|z| f.energy(z, &variant)).collect();
        Ok(Self {
            ctx,
            sign,
            variant,
            path: Path { points, energies },
            ls: LineSearch::new(ctx.options.armijo),
            iteration: 0,
            stalls: 0,
            converged_at: None,
            history: VecDeque::with_capacity(CPS_HISTORY),
            trace: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn iterations(&self) -> usize {
        self.iteration
    }

    fn fail(&self, reason: String) -> StageFailure {
        StageFailure {
            stage: Stage::MountainPass,
            sign: self.sign,
            reason,
            diagnostics: self.history.iter().copied().collect(),
        }
    }

    fn slope_along(&self, z: &[f64], t: &[f64], theta: f64) -> f64 {
        let g = self.ctx.functional.gradient(&axpy(z, theta, t), &self.variant);
        dot(&g, t)
    }

    /// Maximizes the energy along the local tangent through point `k`,
    /// within one neighbor spacing on either side.
    fn climb(&mut self, k: usize) {
        let ctx = self.ctx;
        let z = self.path.points[k].clone();
        let dl = sub(&z, &self.path.points[k - 1]);
        let dr = sub(&self.path.points[k + 1], &z);
        let (ll, lr) = (ctx.seminorm(&dl), ctx.seminorm(&dr));
        if ll == 0.0 || lr == 0.0 {
            return;
        }
        let mut t: Vec<f64> = dl.iter().zip(&dr).map(|(a, b)| a / ll + b / lr).collect();
        let mut lt = ctx.seminorm(&t);
        if lt < 1e-8 {
            t = dr.iter().map(|b| b / lr).collect();
            lt = 1.0;
        }
        t.iter_mut().for_each(|v| *v /= lt);

        let s0 = self.slope_along(&z, &t, 0.0);
        let (mut a, mut b) = match s0 {
            s if s > 0.0 => (0.0, lr),
            s if s < 0.0 => (-ll, 0.0),
            _ => return,
        };
        let (mut fa, mut fb) = if s0 > 0.0 {
            (s0, self.slope_along(&z, &t, b))
        } else {
            (self.slope_along(&z, &t, a), s0)
        };
        let theta = if fa <= 0.0 {
            a
        } else if fb >= 0.0 {
            b
        } else {
            // Illinois regula falsi on the decreasing slope φ'(θ).
            let mut side = 0i8;
            let mut x = 0.5 * (a + b);
            for _ in 0..200 {
                x = (a * fb - b * fa) / (fb - fa);
                if !(x > a && x < b) {
                    x = 0.5 * (a + b);
                }
                let fx = self.slope_along(&z, &t, x);
                if fx == 0.0 || (b - a) <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
                    break;
                }
                if fx > 0.0 {
                    a = x;
                    fa = fx;
                    if side == 1 {
                        fb *= 0.5;
                    }
                    side = 1;
                } else {
                    b = x;
                    fb = fx;
                    if side == -1 {
                        fa *= 0.5;
                    }
                    side = -1;
                }
            }
            x
        };
        let moved = axpy(&z, theta, &t);
        let e = ctx.functional.energy(&moved, &self.variant);
        // The maximizer along the line can only raise the energy.
        if e >= self.path.energies[k] {
            self.path.points[k] = moved;
            self.path.energies[k] = e;
        }
    }

    /// Arc-length redistribution on each side of `peak`, which is kept.
    fn redistribute(&mut self, peak: usize) {
        let ctx = self.ctx;
        let pts = &self.path.points;
        let m = pts.len() - 2;
        let seg_len = |a: &[f64], b: &[f64]| ctx.seminorm(&sub(b, a));
        let left: f64 = (0..peak).map(|j| seg_len(&pts[j], &pts[j + 1])).sum();
        let right: f64 = (peak..=m).map(|j| seg_len(&pts[j], &pts[j + 1])).sum();
        if !(left > 0.0 && right > 0.0) {
            return;
        }
        let free = m - 1;
        let nl = ((free as f64 * left / (left + right)).round() as usize).min(free);
        let nr = free - nl;
        let resample = |poly: &[Vec<f64>], count: usize| -> Vec<Vec<f64>> {
            let lens: Vec<f64> = poly.windows(2).map(|w| seg_len(&w[0], &w[1])).collect();
            let total: f64 = lens.iter().sum();
            let mut out = Vec::with_capacity(count);
            let mut seg = 0;
            let mut acc = 0.0;
            for j in 1..=count {
                let target = total * j as f64 / (count + 1) as f64;
                while seg + 1 < lens.len() && acc + lens[seg] < target {
                    acc += lens[seg];
                    seg += 1;
                }
                let frac = if lens[seg] > 0.0 {
                    ((target - acc) / lens[seg]).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                out.push(
                    poly[seg]
                        .iter()
                        .zip(&poly[seg + 1])
                        .map(|(a, b)| (1.0 - frac) * a + frac * b)
                        .collect(),
                );
            }
            out
        };
        let new_left = resample(&pts[..=peak], nl);
        let new_right = resample(&pts[peak..], nr);

        let mut points = Vec::with_capacity(m + 2);
        let mut energies = Vec::with_capacity(m + 2);
        points.push(pts[0].clone());
        energies.push(self.path.energies[0]);
        for z in new_left {
            energies.push(ctx.functional.energy(&z, &self.variant));
            points.push(z);
        }
        points.push(pts[peak].clone());
        energies.push(self.path.energies[peak]);
        for z in new_right {
            energies.push(ctx.functional.energy(&z, &self.variant));
            points.push(z);
        }
        points.push(pts[m + 1].clone());
        energies.push(self.path.energies[m + 1]);
        self.path = Path { points, energies };
    }

    /// One iteration; `Ok(true)` once the peak is a critical point within tolerance.
    pub fn step(&mut self) -> Result<bool, StageFailure> {
        if self.converged_at.is_some() {
            return Ok(true);
        }
        let ctx = self.ctx;
        let opts = &ctx.options;
        let k = self.path.peak();
        if !(self.path.energies[k] > 0.0) {
            return Err(self.fail(format!(
                "path maximum collapsed to {:.3e} <= 0 without a critical point",
                self.path.energies[k]
            )));
        }
        self.climb(k);

        let z = &self.path.points[k];
        let mut grad = vec![0.0; z.len()];
        let e = ctx.functional.evaluate(z, &self.variant, Some(&mut grad));
        let res = ctx.functional.residual_of_gradient(&grad);
        if self.history.len() == CPS_HISTORY {
            self.history.pop_front();
        }
        self.history.push_back(cps_of(&ctx.functional, z, &self.variant));
        if opts.trace {
            self.trace.push(TraceRow {
                iteration: self.iteration,
                energy: e,
                residual: res,
                seminorm: ctx.seminorm(z),
            });
        }
        if res <= opts.tol {
            self.converged_at = Some(k);
            return Ok(true);
        }

        let d = ctx.direction(&grad);
        let slope = dot(&grad, &d);
        let variant = self.variant;
        let eval = |w: &[f64], g: Option<&mut [f64]>| ctx.functional.evaluate(w, &variant, g);
        // Trust region: the peak may move at most half way to its nearer
        // neighbour, so that it cannot leap across the path.
        let spacing = ctx
            .seminorm(&sub(z, &self.path.points[k - 1]))
            .min(ctx.seminorm(&sub(z, &self.path.points[k + 1])));
        let cap = 0.5 * spacing / ctx.seminorm(&d);
        match self.ls.search_capped(eval, z, &d, e, slope, cap) {
            Some((next, e_next, alpha)) => {
                let scale = 1.0 + z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let shift = alpha * d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if shift < 1e-14 * scale {
                    self.stalls += 1;
                } else {
                    self.stalls = 0;
                }
                self.path.points[k] = next;
                self.path.energies[k] = e_next;
            }
            None => self.stalls += 1,
        }
        if self.stalls >= STALL_LIMIT {
            return Err(self.fail(format!(
                "peak stalled with residual {res:.3e} above tolerance {:.1e}",
                opts.tol
            )));
        }

        self.iteration += 1;
        let every = opts.mp.redistribute_every.max(1);
        if self.iteration.is_multiple_of(every) && self.path.interior_len() > 1 {
            let peak = self.path.peak();
            self.redistribute(peak);
        }
        Ok(false)
    }

    /// Iterates to convergence and returns the peak as a mountain-pass solution.
    pub fn run(mut self) -> Result<Solution, StageFailure> {
        let max_iter = self.ctx.options.mp.max_iter;
        while self.iteration < max_iter {
            if self.step()? {
                break;
            }
        }
        let Some(k) = self.converged_at else {
            return Err(self.fail(format!("no convergence within {max_iter} iterations")));
        };
        let ctx = self.ctx;
        let u = self.path.points[k].clone();
        let energy = self.path.energies[k];
        if !(energy > 0.0) {
            return Err(self.fail(format!("critical level {energy:.3e} is not positive")));
        }
        let residual = ctx.functional.residual(&u, &self.variant);
        Ok(Solution {
            seminorm: ctx.seminorm(&u),
            sup_norm: u.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            u: DiscreteFunction::from_values(ctx.mesh(), u).expect("length preserved"),
            energy,
            residual,
            kind: SolutionKind::MountainPass,
            sign: self.sign.into(),
            iterations: self.iteration,
            converged: true,
            trace: std::mem::take(&mut self.trace),
        })
    }
}

/// Runs the path algorithm between `u0` and `e` for the given sign variant.
pub fn mountain_pass(
    ctx: &SolverContext,
    u0: &Solution,
    e: &DiscreteFunction,
    sign: SignRestriction,
) -> Result<Solution, StageFailure> {
    MountainPass::new(ctx, &u0.u, e, sign)?.run()
}
