//! Column update kernels.
//!
//! The plain step replaces a column by the normalized negative gradient
//! `-g_i/||g_i||`. The momentum step combines that direction with the
//! previous column, `normalize((1+beta) u - beta v)`, which keeps the
//! iterate on the sphere while retaining a heavy-ball memory term.

use crate::factor::{normalize, Degenerate};

/// Writes `-g/||g||` into `out`, returning `y = ||g||`.
pub fn update_column_plain(g: &[f64], out: &mut [f64]) -> Result<f64, Degenerate> {
    let y = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if y == 0.0 {
        return Err(Degenerate);
    }
    for (o, &x) in out.iter_mut().zip(g) {
        *o = -x / y;
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumOutcome {
    /// Gradient norm at the update instant.
    pub y: f64,
    /// Norm of `(1+beta) u - beta v` before the second normalization;
    /// always in `[1, 1+2*beta]` for unit `u`, `v`.
    pub w: f64,
}

/// Two-step momentum update: `u = -g/||g||`, then
/// `v_new = ((1+beta) u - beta v) / w`. With `beta == 0` the second
/// normalization is skipped so the result is bitwise the plain step.
pub fn update_column_momentum(
    g: &[f64],
    v: &[f64],
    beta: f64,
    u_out: &mut [f64],
    v_out: &mut [f64],
) -> Result<MomentumOutcome, Degenerate> {
    let y = update_column_plain(g, u_out)?;
    if beta == 0.0 {
        v_out.copy_from_slice(u_out);
        return Ok(MomentumOutcome { y, w: 1.0 });
    }
    for d in 0..v_out.len() {
        v_out[d] = (1.0 + beta) * u_out[d] - beta * v[d];
    }
    let w = normalize(v_out)?;
    Ok(MomentumOutcome { y, w })
}
