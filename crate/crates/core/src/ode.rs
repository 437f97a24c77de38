//! Fixed-step RK4 over piecewise-constant modes, with steps aligned to the
//! mode boundaries.

use crate::error::{Error, Result};

/// A vector field indexed by a discrete mode (e.g. the environment state).
pub trait SwitchedField<const N: usize> {
    type Mode: Copy;

    fn rhs(&self, t: f64, mode: Self::Mode, y: &[f64; N]) -> [f64; N];
}

/// Time interval on which the mode is constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece<M> {
    pub start: f64,
    pub end: f64,
    pub mode: M,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    /// Record every `stride`-th step (the final point is always recorded).
    pub stride: usize,
    /// Maximum number of step halvings when a step leaves the admissible set.
    pub max_halvings: u32,
}

impl StepControl {
    pub fn new(dt: f64) -> Self {
        StepControl {
            dt,
            stride: 1,
            max_halvings: 6,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }
}

pub fn rk4_step<const N: usize, F: SwitchedField<N>>(f: &F, t: f64, mode: F::Mode, y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = f.rhs(t, mode, y);
    let y2 = axpy(y, 0.5 * h, &k1);
    let k2 = f.rhs(t + 0.5 * h, mode, &y2);
    let y3 = axpy(y, 0.5 * h, &k2);
    let k3 = f.rhs(t + 0.5 * h, mode, &y3);
    let y4 = axpy(y, h, &k3);
    let k4 = f.rhs(t + h, mode, &y4);
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

fn guarded_step<const N: usize, F, A>(
    f: &F,
    t: f64,
    mode: F::Mode,
    y: &[f64; N],
    h: f64,
    depth: u32,
    max_depth: u32,
    admissible: &A,
) -> Result<[f64; N]>
where
    F: SwitchedField<N>,
    A: Fn(&[f64; N]) -> bool,
{
    let y1 = rk4_step(f, t, mode, y, h);
    if admissible(&y1) {
        return Ok(y1);
    }
    if depth >= max_depth {
        return Err(Error::StepCollapse { t });
    }
    log::debug!("step at t = {t} left the admissible set; halving to {}", h / 2.0);
    let mid = guarded_step(f, t, mode, y, 0.5 * h, depth + 1, max_depth, admissible)?;
    guarded_step(f, t + 0.5 * h, mode, &mid, 0.5 * h, depth + 1, max_depth, admissible)
}

/// Where an integration ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// Index of the first piece not (fully) integrated when `stop` fired.
    pub stopped_at: Option<usize>,
}

/// Integrates across `pieces` in order. `record(t, mode, y)` is called for the
/// initial point, every `stride`-th step and the final point. After each step
/// `stop(y)` may end the run early; the run then ends at that step.
#[allow(clippy::too_many_arguments)]
pub fn integrate_pieces<const N: usize, F, A, R, S>(
    f: &F,
    pieces: &[Piece<F::Mode>],
    y0: [f64; N],
    ctl: &StepControl,
    admissible: A,
    mut record: R,
    mut stop: S,
) -> Result<Outcome<N>>
where
    F: SwitchedField<N>,
    A: Fn(&[f64; N]) -> bool,
    R: FnMut(f64, F::Mode, &[f64; N]),
    S: FnMut(&[f64; N]) -> bool,
{
    let mut y = y0;
    let mut t = pieces.first().map_or(0.0, |p| p.start);
    if let Some(p) = pieces.first() {
        record(t, p.mode, &y);
    }
    let mut count = 0usize;
    for (pi, p) in pieces.iter().enumerate() {
        let len = p.end - p.start;
        if len <= 0.0 {
            continue;
        }
        let n = ((len / ctl.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = len / n as f64;
        for k in 0..n {
            let tk = p.start + k as f64 * h;
            y = guarded_step(f, tk, p.mode, &y, h, 0, ctl.max_halvings, &admissible)?;
            t = if k + 1 == n {
                p.end
            } else {
                p.start + (k + 1) as f64 * h
            };
            count += 1;
            let last = pi + 1 == pieces.len() && k + 1 == n;
            if count % ctl.stride == 0 || last {
                record(t, p.mode, &y);
            }
            if !last && stop(&y) {
                if count % ctl.stride != 0 {
                    record(t, p.mode, &y);
                }
                let next = if k + 1 == n { pi + 1 } else { pi };
                return Ok(Outcome {
                    t,
                    y,
                    stopped_at: Some(next),
                });
            }
        }
    }
    Ok(Outcome { t, y, stopped_at: None })
}
