//! P2G, grid update and G2P.

use super::config::{BoundaryPolicy, SimConfig};
use super::grid::{Grid, GridNode, MASS_EPSILON};
use super::kernel::{bspline_stencil, Stencil, StencilNode};
use super::Particle;
use crate::constitutive::{total_stress, viscous_return_map, ResolvedMaterial};
use crate::error::SimError;
use crate::par::{self, Exec};
use crate::tensor3::{Mat3, Vec3};

pub(crate) fn compute_stencils(particles: &[Particle], config: &SimConfig, exec: Exec) -> Result<Vec<Stencil>, SimError> {
    par::map_slice(exec, particles, |p| bspline_stencil(p.x, config))
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.map_err(|e| SimError::OutOfDomain { particle: i, position: e.0 }))
        .collect()
}

/// Scatters per-particle stencil contributions onto the grid.
///
/// Particles are bucketed by the x index of their stencil base. A stencil
/// spans three x-planes, so buckets whose bases are congruent mod 3 touch
/// disjoint slabs and can be processed concurrently. Each node therefore
/// accumulates in a fixed order (color, then particle index) whatever the
/// thread count.
fn scatter<F>(grid: &mut Grid, stencils: &[Stencil], exec: Exec, contribute: F)
where
    F: Fn(usize, &StencilNode, &mut GridNode) + Sync + Send,
{
    let [nx, ny, nz] = grid.dims();
    let plane = grid.plane_len();
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); nx];
    for (p, s) in stencils.iter().enumerate() {
        buckets[s.base[0]].push(p as u32);
    }
    for color in 0..3 {
        let tail = &mut grid.nodes[color * plane..];
        par::for_each_chunk_mut(exec, tail, 3 * plane, |k, slab| {
            let base_x = color + 3 * k;
            if base_x >= nx {
                return;
            }
            for &p in &buckets[base_x] {
                let p = p as usize;
                for node in stencils[p].nodes() {
                    let local = (node.local[0] * ny + node.index[1]) * nz + node.index[2];
                    contribute(p, &node, &mut slab[local]);
                }
            }
        });
    }
}

pub(crate) fn p2g_with(particles: &[Particle], grid: &mut Grid, stencils: &[Stencil], exec: Exec) {
    scatter(grid, stencils, exec, |p, node, g| {
        let part = &particles[p];
        let wm = node.weight * part.mass;
        g.mass += wm;
        g.momentum_or_velocity += (part.v + part.c * node.offset) * wm;
    });
}

/// Particle-to-grid transfer of mass and affine momentum. The grid must be cleared.
pub fn p2g(particles: &[Particle], grid: &mut Grid, config: &SimConfig, exec: Exec) -> Result<(), SimError> {
    let stencils = compute_stencils(particles, config, exec)?;
    p2g_with(particles, grid, &stencils, exec);
    Ok(())
}

fn in_band(idx: usize, n: usize, margin: usize) -> bool {
    idx < margin || idx + margin >= n
}

pub(crate) fn grid_update_with(
    particles: &[Particle],
    materials: &[ResolvedMaterial],
    grid: &mut Grid,
    config: &SimConfig,
    stencils: &[Stencil],
    exec: Exec,
) -> Result<(), SimError> {
    // -V0 τ per particle; the node force is this times ∇w.
    let weighted_stress: Vec<Mat3> = par::map_indexed(exec, particles.len(), |i| {
        let p = &particles[i];
        total_stress(&p.f_e, &p.f_n, &materials[p.material])
            .map(|s| s.total() * -p.volume0)
            .map_err(|source| SimError::Constitutive { particle: i, source })
    })
    .into_iter()
    .collect::<Result<_, _>>()?;

    scatter(grid, stencils, exec, |p, node, g| {
        let part = &particles[p];
        g.force += weighted_stress[p] * node.grad + part.ext_accel * (node.weight * part.mass);
    });

    let dims = grid.dims();
    let margin = config.boundary_margin;
    let (dt, gravity, policy) = (config.dt, config.gravity, config.boundary_policy);
    let plane = grid.plane_len();
    par::for_each_chunk_mut(exec, &mut grid.nodes, plane, |i, nodes| {
        for (jk, n) in nodes.iter_mut().enumerate() {
            if n.mass <= MASS_EPSILON {
                n.momentum_or_velocity = Vec3::ZERO;
                continue;
            }
            let inv_m = 1.0 / n.mass;
            let mut v = n.momentum_or_velocity * inv_m + (n.force * inv_m + gravity) * dt;
            let idx = [i, jk / dims[2], jk % dims[2]];
            for a in 0..3 {
                if in_band(idx[a], dims[a], margin) {
                    match policy {
                        BoundaryPolicy::Sticky => v = Vec3::ZERO,
                        BoundaryPolicy::Slip => v[a] = 0.0,
                    }
                }
            }
            n.momentum_or_velocity = v;
        }
    });

    if let Some(flat) = grid.nodes.iter().position(|n| !n.momentum_or_velocity.is_finite()) {
        return Err(SimError::NonFinite { node: grid.node_index(flat) });
    }
    Ok(())
}

/// Normalizes momentum to velocity, applies internal forces `−Σ_p V_p⁰ τ_p ∇w_ip`,
/// particle external accelerations, gravity, and the boundary policy.
pub fn grid_update(
    particles: &[Particle],
    materials: &[ResolvedMaterial],
    grid: &mut Grid,
    config: &SimConfig,
    exec: Exec,
) -> Result<(), SimError> {
    let stencils = compute_stencils(particles, config, exec)?;
    grid_update_with(particles, materials, grid, config, &stencils, exec)
}

/// Per-substep counters from the G2P pass.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct G2pStats {
    pub max_speed: f64,
    pub position_clamps: usize,
    pub return_map_clamps: usize,
}

const CLAMPED_POSITION: u8 = 1;
const CLAMPED_RETURN_MAP: u8 = 2;

pub(crate) fn g2p_with(
    particles: &mut [Particle],
    materials: &[ResolvedMaterial],
    grid: &Grid,
    config: &SimConfig,
    stencils: &[Stencil],
    exec: Exec,
) -> Result<G2pStats, SimError> {
    let dt = config.dt;
    let (lo, hi) = config.interior();
    let updated: Vec<(Particle, u8)> = par::map_indexed(exec, particles.len(), |i| {
        let mut p = particles[i];
        let mut v = Vec3::ZERO;
        let mut b = Mat3::ZERO;
        let mut grad_v = Mat3::ZERO;
        for node in stencils[i].nodes() {
            let vi = grid.node(node.index).momentum_or_velocity;
            v += vi * node.weight;
            b += Mat3::outer(vi * node.weight, node.offset);
            grad_v += Mat3::outer(vi, node.grad);
        }
        let mut flags = 0;
        if p.anchored {
            p.v = Vec3::ZERO;
            p.c = Mat3::ZERO;
        } else {
            p.v = v;
            p.x += v * dt;
            p.c = b * super::kernel::affine_scale(config.dx);
            let clamped = p.x.max(lo).min(hi);
            if clamped != p.x {
                p.x = clamped;
                flags |= CLAMPED_POSITION;
            }
        }
        let step = Mat3::IDENTITY + grad_v * dt;
        p.f_e = step * p.f_e;
        let m = &materials[p.material];
        let rm = viscous_return_map(&(step * p.f_n), m.a, m.b);
        p.f_n = rm.f_n;
        if rm.clamped {
            flags |= CLAMPED_RETURN_MAP;
        }
        (p, flags)
    });

    let mut stats = G2pStats::default();
    for (i, (p, flags)) in updated.into_iter().enumerate() {
        let speed = p.v.norm();
        if !(speed * dt <= config.dx) {
            return Err(SimError::Cfl { particle: i, travel: speed * dt, dx: config.dx });
        }
        stats.max_speed = stats.max_speed.max(speed);
        stats.position_clamps += usize::from(flags & CLAMPED_POSITION != 0);
        stats.return_map_clamps += usize::from(flags & CLAMPED_RETURN_MAP != 0);
        particles[i] = p;
    }
    Ok(stats)
}

/// Grid-to-particle transfer: velocity, position, affine matrix, velocity
/// gradient, then both deformation-gradient branches (the viscoelastic one
/// through the viscous return map).
pub fn g2p(
    particles: &mut [Particle],
    materials: &[ResolvedMaterial],
    grid: &Grid,
    config: &SimConfig,
    exec: Exec,
) -> Result<G2pStats, SimError> {
    let stencils = compute_stencils(particles, config, exec)?;
    g2p_with(particles, materials, grid, config, &stencils, exec)
}

/// One full substep: clear grid, P2G, grid update, G2P.
pub fn substep(
    particles: &mut [Particle],
    materials: &[ResolvedMaterial],
    grid: &mut Grid,
    config: &SimConfig,
    exec: Exec,
) -> Result<G2pStats, SimError> {
    grid.clear();
    let stencils = compute_stencils(particles, config, exec)?;
    p2g_with(particles, grid, &stencils, exec);
    grid_update_with(particles, materials, grid, config, &stencils, exec)?;
    g2p_with(particles, materials, grid, config, &stencils, exec)
}
