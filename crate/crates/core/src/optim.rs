//! Derivative-free optimizers for the VQE outer loop: SPSA and a
//! linear-approximation trust-region method in the COBYLA family.
//!
//! Both record every objective evaluation in an [`OptTrace`], so convergence
//! plots and evaluation accounting come for free. SPSA tolerates stochastic
//! objectives (finite-shot energy estimates); the trust-region method is
//! meant for exact statevector expectations.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("max_evals must be at least 1")]
    ZeroBudget,
    #[error("SPSA gain c must be positive, got {0}")]
    BadGainC(f64),
    #[error("SPSA gain a must be positive, got {0}")]
    BadGainA(f64),
    #[error("trust radii need 0 < rho_end < rho_begin, got {begin} .. {end}")]
    BadRadii { begin: f64, end: f64 },
    #[error("objective returned a non-finite value at evaluation {eval_index}")]
    NonFiniteObjective { eval_index: usize },
    #[error("theta must be non-empty and finite")]
    BadInitialPoint,
}

/// Shared knob set for both optimizers. SPSA gain defaults follow the
/// standard published schedule (α = 0.602, γ = 0.101); `spsa_a = None`
/// calibrates the learning rate so the first step moves ~0.1 per component.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    pub max_evals: usize,
    pub seed: u64,
    pub spsa_a: Option<f64>,
    pub spsa_c: f64,
    /// Stability constant A; `None` selects 0.1 × the iteration budget.
    pub spsa_big_a: Option<f64>,
    pub spsa_alpha: f64,
    pub spsa_gamma: f64,
    /// Per-component cap on one SPSA update, guarding against learning-rate
    /// blowups when the calibration gradient happens to be tiny.
    pub spsa_max_step: f64,
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Minimum best-value improvement treated as progress; 0 disables early
    /// stopping.
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_evals: 1000,
            seed: 0,
            spsa_a: None,
            spsa_c: 0.1,
            spsa_big_a: None,
            spsa_alpha: 0.602,
            spsa_gamma: 0.101,
            spsa_max_step: 1.0,
            rho_begin: 0.5,
            rho_end: 1e-6,
            tolerance: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        if self.max_evals == 0 {
            return Err(OptimError::ZeroBudget);
        }
        if self.spsa_c <= 0.0 {
            return Err(OptimError::BadGainC(self.spsa_c));
        }
        if let Some(a) = self.spsa_a {
            if a <= 0.0 {
                return Err(OptimError::BadGainA(a));
            }
        }
        if !(self.rho_end > 0.0 && self.rho_end < self.rho_begin) {
            return Err(OptimError::BadRadii {
                begin: self.rho_begin,
                end: self.rho_end,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub theta: Vec<f64>,
    pub value: f64,
}

/// Every objective call in order, plus the running optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptTrace {
    pub evaluations: Vec<Evaluation>,
    pub best_theta: Vec<f64>,
    pub best_value: f64,
    pub n_evals: usize,
}

impl OptTrace {
    fn from_evaluations(evaluations: Vec<Evaluation>) -> Self {
        let best = evaluations
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("at least one evaluation");
        OptTrace {
            best_theta: best.theta.clone(),
            best_value: best.value,
            n_evals: evaluations.len(),
            evaluations,
        }
    }
}

/// Write the trace as `eval_index,objective,theta_0,...,theta_{d-1}` CSV.
pub fn write_trace_csv<W: std::io::Write>(trace: &OptTrace, mut w: W) -> std::io::Result<()> {
    let dim = trace.best_theta.len();
    write!(w, "eval_index,objective")?;
    for i in 0..dim {
        write!(w, ",theta_{i}")?;
    }
    writeln!(w)?;
    for (idx, e) in trace.evaluations.iter().enumerate() {
        write!(w, "{idx},{:?}", e.value)?;
        for t in &e.theta {
            write!(w, ",{t:?}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Objective wrapper that enforces the evaluation budget, checks finiteness
/// and records the trace.
struct Recorder<F> {
    f: F,
    evaluations: Vec<Evaluation>,
    max_evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Recorder<F> {
    fn new(f: F, max_evals: usize) -> Self {
        Recorder {
            f,
            evaluations: Vec::new(),
            max_evals,
        }
    }

    fn remaining(&self) -> usize {
        self.max_evals - self.evaluations.len()
    }

    fn eval(&mut self, theta: &[f64]) -> Result<f64, OptimError> {
        let value = (self.f)(theta);
        if !value.is_finite() {
            return Err(OptimError::NonFiniteObjective {
                eval_index: self.evaluations.len(),
            });
        }
        self.evaluations.push(Evaluation {
            theta: theta.to_vec(),
            value,
        });
        Ok(value)
    }
}

/// Iterations without a best-value improvement larger than `tolerance`
/// before SPSA stops early (when a tolerance is configured).
const SPSA_STALL_ITERS: usize = 25;

/// Simultaneous perturbation stochastic approximation. Each iteration spends
/// exactly two objective evaluations, at θ ± c_k·Δ with Rademacher Δ, and
/// steps along the gradient estimate ĝ_i = (f₊ − f₋)/(2 c_k Δ_i) with gains
/// a_k = a/(A+k+1)^α and c_k = c/(k+1)^γ.
pub fn spsa_minimize<F: FnMut(&[f64]) -> f64>(
    f: F,
    theta0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptTrace, OptimError> {
    cfg.validate()?;
    if theta0.is_empty() || theta0.iter().any(|t| !t.is_finite()) {
        return Err(OptimError::BadInitialPoint);
    }
    let dim = theta0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rec = Recorder::new(f, cfg.max_evals);

    let max_iters = (cfg.max_evals / 2).max(1);
    let big_a = cfg.spsa_big_a.unwrap_or(0.1 * max_iters as f64);
    let mut gain_a = cfg.spsa_a;

    let mut theta = theta0.to_vec();
    let mut best = f64::INFINITY;
    let mut stall = 0usize;

    for k in 0..max_iters {
        if rec.remaining() < 2 {
            break;
        }
        let ck = cfg.spsa_c / ((k + 1) as f64).powf(cfg.spsa_gamma);
        let delta: Vec<f64> = (0..dim)
            .map(|_| if rng.next_u64() & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + ck * d).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - ck * d).collect();
        let f_plus = rec.eval(&plus)?;
        let f_minus = rec.eval(&minus)?;

        let grad: Vec<f64> = delta
            .iter()
            .map(|d| (f_plus - f_minus) / (2.0 * ck * d))
            .collect();

        if gain_a.is_none() {
            // calibrate so the first update moves ~0.1 per component
            let mag = grad.iter().map(|g| g.abs()).sum::<f64>() / dim as f64;
            gain_a = Some(if mag > 0.0 {
                0.1 * (big_a + 1.0).powf(cfg.spsa_alpha) / mag
            } else {
                0.1
            });
        }
        let ak = gain_a.unwrap() / (big_a + (k + 1) as f64).powf(cfg.spsa_alpha);
        let raw_step = ak * grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        let clip = if raw_step > cfg.spsa_max_step {
            cfg.spsa_max_step / raw_step
        } else {
            1.0
        };
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= clip * ak * g;
        }

        let iter_best = f_plus.min(f_minus);
        if cfg.tolerance > 0.0 {
            if best - iter_best > cfg.tolerance {
                stall = 0;
            } else {
                stall += 1;
                if stall >= SPSA_STALL_ITERS {
                    break;
                }
            }
        }
        best = best.min(iter_best);
    }

    Ok(OptTrace::from_evaluations(rec.evaluations))
}

/// Mesh shrink factor once the step radius has bottomed out.
const RHO_SHRINK: f64 = 0.5;
/// Step-radius growth on a successful step and shrink on a failed one.
const DELTA_GROW: f64 = 2.0;
const DELTA_SHRINK: f64 = 0.5;
/// Acceptability bounds on the simplex relative to the working scale: no
/// vertex farther than `FAR_FACTOR`× from the best, no edge with a
/// perpendicular component below `FLAT_FACTOR`× (poisedness).
const FAR_FACTOR: f64 = 2.1;
const FLAT_FACTOR: f64 = 0.25;

/// Constrained-optimization-by-linear-approximation style minimizer: keep a
/// simplex of dim+1 points, fit a linear model of f through it, and step
/// along the model's descent direction within a trust radius. When the
/// simplex geometry degrades, one vertex at a time is moved back to the
/// working scale instead of taking an objective step. The step radius adapts
/// between the mesh size and larger excursions; once steps at the mesh scale
/// stop paying off, the mesh shrinks from `rho_begin` towards `rho_end`.
/// Stops when the mesh would drop below `rho_end` or the evaluation budget
/// runs out. Intended for exact (noise-free) objectives.
pub fn cobyla_minimize<F: FnMut(&[f64]) -> f64>(
    f: F,
    theta0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptTrace, OptimError> {
    cfg.validate()?;
    if theta0.is_empty() || theta0.iter().any(|t| !t.is_finite()) {
        return Err(OptimError::BadInitialPoint);
    }
    let dim = theta0.len();
    let mut rec = Recorder::new(f, cfg.max_evals);
    let mut rho = cfg.rho_begin;
    let mut delta = cfg.rho_begin;

    let mut vertices: Vec<Vec<f64>> = vec![theta0.to_vec()];
    let mut values: Vec<f64> = vec![rec.eval(theta0)?];
    for i in 0..dim {
        if rec.remaining() == 0 {
            return Ok(OptTrace::from_evaluations(rec.evaluations));
        }
        let mut v = theta0.to_vec();
        v[i] += rho;
        values.push(rec.eval(&v)?);
        vertices.push(v);
    }

    while rec.remaining() > 0 {
        let best_idx = argmin(&values);
        let scale = delta.max(rho);

        // geometry maintenance: repair one offending vertex per pass
        if let Some((idx, point)) = geometry_repair(&vertices, best_idx, scale) {
            let value = rec.eval(&point)?;
            vertices[idx] = point;
            values[idx] = value;
            continue;
        }

        // linear interpolation model around the best vertex:
        // (v_i − v_best)·g = f_i − f_best
        let rows: Vec<(Vec<f64>, f64)> = (0..vertices.len())
            .filter(|&i| i != best_idx)
            .map(|i| {
                (
                    sub(&vertices[i], &vertices[best_idx]),
                    values[i] - values[best_idx],
                )
            })
            .collect();
        let grad = solve_normal_equations(dim, &rows);
        let grad_norm = grad.as_ref().map(|g| norm(g)).unwrap_or(0.0);

        let stepped = if let Some(grad) = grad.filter(|_| grad_norm >= 1e-15) {
            let candidate: Vec<f64> = vertices[best_idx]
                .iter()
                .zip(&grad)
                .map(|(v, g)| v - delta * g / grad_norm)
                .collect();
            let f_candidate = rec.eval(&candidate)?;

            let worst_idx = argmax(&values);
            if f_candidate < values[best_idx] {
                vertices[worst_idx] = candidate;
                values[worst_idx] = f_candidate;
                delta *= DELTA_GROW;
                true
            } else {
                // keep the sample if it at least beats the worst vertex
                if f_candidate < values[worst_idx] {
                    vertices[worst_idx] = candidate;
                    values[worst_idx] = f_candidate;
                }
                false
            }
        } else {
            false
        };

        if !stepped {
            if delta * DELTA_SHRINK >= rho {
                delta *= DELTA_SHRINK;
            } else {
                rho *= RHO_SHRINK;
                if rho < cfg.rho_end {
                    break;
                }
                delta = rho;
            }
        }
    }

    Ok(OptTrace::from_evaluations(rec.evaluations))
}

/// Check simplex acceptability at the working scale and propose a replacement
/// for the first offending vertex: pulled-in along its own direction when too
/// far from the best vertex, or pushed along an orthogonal-complement
/// direction when its perpendicular contribution is too flat.
fn geometry_repair(
    vertices: &[Vec<f64>],
    best_idx: usize,
    scale: f64,
) -> Option<(usize, Vec<f64>)> {
    let best = &vertices[best_idx];
    let dim = best.len();

    // too far: pull the vertex onto the scale sphere, keeping its direction
    for (i, v) in vertices.iter().enumerate() {
        if i == best_idx {
            continue;
        }
        let edge = sub(v, best);
        let dist = norm(&edge);
        if dist > FAR_FACTOR * scale {
            let point: Vec<f64> = best
                .iter()
                .zip(&edge)
                .map(|(b, e)| b + scale * e / dist)
                .collect();
            return Some((i, point));
        }
    }

    // too flat: Gram-Schmidt each edge against the others; a tiny residual
    // means the vertex adds almost no volume
    for (i, v) in vertices.iter().enumerate() {
        if i == best_idx {
            continue;
        }
        let edge = sub(v, best);
        let others: Vec<Vec<f64>> = vertices
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != best_idx && j != i)
            .map(|(_, u)| sub(u, best))
            .collect();
        let residual = orthogonal_residual(&edge, &others);
        if norm(&residual) < FLAT_FACTOR * scale {
            // replace along a direction orthogonal to the other edges
            let fresh = orthogonal_complement_direction(&others, dim)?;
            let point: Vec<f64> = best
                .iter()
                .zip(&fresh)
                .map(|(b, u)| b + scale * u)
                .collect();
            return Some((i, point));
        }
    }
    None
}

/// Component of `v` orthogonal to the span of `basis` (classical
/// Gram-Schmidt, adequate for the small dimensions used here).
fn orthogonal_residual(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for b in basis {
        let mut r = b.clone();
        for o in &ortho {
            let coeff = dot(&r, o);
            for (ri, oi) in r.iter_mut().zip(o) {
                *ri -= coeff * oi;
            }
        }
        let n = norm(&r);
        if n > 1e-12 {
            for ri in r.iter_mut() {
                *ri /= n;
            }
            ortho.push(r);
        }
    }
    let mut res = v.to_vec();
    for o in &ortho {
        let coeff = dot(&res, o);
        for (ri, oi) in res.iter_mut().zip(o) {
            *ri -= coeff * oi;
        }
    }
    res
}

/// A unit vector orthogonal to the span of `basis`, found by projecting out
/// coordinate axes.
fn orthogonal_complement_direction(basis: &[Vec<f64>], dim: usize) -> Option<Vec<f64>> {
    for axis in 0..dim {
        let mut e = vec![0.0; dim];
        e[axis] = 1.0;
        let mut r = orthogonal_residual(&e, basis);
        let n = norm(&r);
        if n > 1e-8 {
            for ri in r.iter_mut() {
                *ri /= n;
            }
            return Some(r);
        }
    }
    None
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .unwrap()
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .unwrap()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Least-squares fit of g to rows (row·g ≈ rhs) via the normal equations and
/// Gaussian elimination with partial pivoting. None when singular.
fn solve_normal_equations(dim: usize, rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let mut ata = vec![vec![0.0; dim]; dim];
    let mut atb = vec![0.0; dim];
    for (row, rhs) in rows {
        for i in 0..dim {
            atb[i] += row[i] * rhs;
            for j in 0..dim {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))
            .unwrap();
        ata.swap(col, pivot);
        atb.swap(col, pivot);
        let diag = ata[col][col];
        if diag.abs() < 1e-12 {
            return None;
        }
        for row in (col + 1)..dim {
            let factor = ata[row][col] / diag;
            if factor != 0.0 {
                for j in col..dim {
                    ata[row][j] -= factor * ata[col][j];
                }
                atb[row] -= factor * atb[col];
            }
        }
    }
    let mut g = vec![0.0; dim];
    for i in (0..dim).rev() {
        let mut acc = atb[i];
        for j in (i + 1)..dim {
            acc -= ata[i][j] * g[j];
        }
        g[i] = acc / ata[i][i];
    }
    if g.iter().all(|x| x.is_finite()) {
        Some(g)
    } else {
        None
    }
}
