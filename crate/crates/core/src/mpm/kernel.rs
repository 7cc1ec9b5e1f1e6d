//! Quadratic B-spline interpolation stencil.

use std::fmt;

use super::config::SimConfig;
use crate::tensor3::Vec3;

/// B-spline degree. The affine-transfer factor `12 / (Δx² (b + 1))` is `4 / Δx²` for it.
pub const BSPLINE_DEGREE: usize = 2;

pub fn affine_scale(dx: f64) -> f64 {
    12.0 / (dx * dx * (BSPLINE_DEGREE as f64 + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutsideInterior(pub Vec3);

impl fmt::Display for OutsideInterior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "position {:?} is outside the grid interior", self.0)
    }
}

impl std::error::Error for OutsideInterior {}

/// One node of a stencil.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StencilNode {
    /// Global node index.
    pub index: [usize; 3],
    /// Offset inside the 3×3×3 block, each in `0..3`.
    pub local: [usize; 3],
    pub weight: f64,
    /// `x_i − x_p`
    pub offset: Vec3,
    /// MLS gradient `(4/Δx²) w (x_i − x_p)`.
    pub grad: Vec3,
}

/// The 27 nodes influencing a particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub base: [usize; 3],
    weights: [[f64; 3]; 3],
    frac: Vec3,
    dx: f64,
}

fn weights_1d(fx: f64) -> [f64; 3] {
    [
        0.5 * (1.5 - fx) * (1.5 - fx),
        0.75 - (fx - 1.0) * (fx - 1.0),
        0.5 * (fx - 0.5) * (fx - 0.5),
    ]
}

/// Stencil for a particle at `xp`. The particle must lie in the interior
/// (outside the boundary band), which keeps all 27 nodes on the grid.
pub fn bspline_stencil(xp: Vec3, config: &SimConfig) -> Result<Stencil, OutsideInterior> {
    if !xp.is_finite() || !config.contains_interior(xp) {
        return Err(OutsideInterior(xp));
    }
    let inv_dx = 1.0 / config.dx;
    let mut base = [0usize; 3];
    let mut weights = [[0.0; 3]; 3];
    let mut frac = Vec3::ZERO;
    for a in 0..3 {
        let g = xp[a] * inv_dx;
        let b = (g - 0.5).floor();
        base[a] = b as usize;
        frac[a] = g - b;
        weights[a] = weights_1d(frac[a]);
    }
    Ok(Stencil { base, weights, frac, dx: config.dx })
}

impl Stencil {
    pub fn axis_weights(&self, axis: usize) -> [f64; 3] {
        self.weights[axis]
    }

    pub fn nodes(&self) -> impl Iterator<Item = StencilNode> + '_ {
        let scale = affine_scale(self.dx);
        (0..27).map(move |n| {
            let local = [n / 9, (n / 3) % 3, n % 3];
            let weight = self.weights[0][local[0]] * self.weights[1][local[1]] * self.weights[2][local[2]];
            let offset = Vec3::new(
                (local[0] as f64 - self.frac.x) * self.dx,
                (local[1] as f64 - self.frac.y) * self.dx,
                (local[2] as f64 - self.frac.z) * self.dx,
            );
            StencilNode {
                index: [self.base[0] + local[0], self.base[1] + local[1], self.base[2] + local[2]],
                local,
                weight,
                offset,
                grad: offset * (scale * weight),
            }
        })
    }
}
