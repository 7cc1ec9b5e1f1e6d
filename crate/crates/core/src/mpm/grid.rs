use crate::tensor3::Vec3;

/// Nodes below this mass are inert.
pub const MASS_EPSILON: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GridNode {
    pub mass: f64,
    /// Momentum during P2G, velocity after the grid update.
    pub momentum_or_velocity: Vec3,
    /// Internal plus external force scattered by the grid update.
    pub force: Vec3,
}

/// Dense background grid; node `(i, j, k)` lives at `(i, j, k)·Δx`.
/// Storage is x-major so that an x-plane is one contiguous run.
#[derive(Clone, Debug)]
pub struct Grid {
    dims: [usize; 3],
    pub nodes: Vec<GridNode>,
}

impl Grid {
    pub fn new(dims: [usize; 3]) -> Self {
        Grid { dims, nodes: vec![GridNode::default(); dims[0] * dims[1] * dims[2]] }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Nodes per x-plane.
    pub fn plane_len(&self) -> usize {
        self.dims[1] * self.dims[2]
    }

    pub fn flat_index(&self, [i, j, k]: [usize; 3]) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn node_index(&self, flat: usize) -> [usize; 3] {
        let k = flat % self.dims[2];
        let j = (flat / self.dims[2]) % self.dims[1];
        [flat / self.plane_len(), j, k]
    }

    pub fn node(&self, idx: [usize; 3]) -> &GridNode {
        &self.nodes[self.flat_index(idx)]
    }

    pub fn clear(&mut self) {
        self.nodes.fill(GridNode::default());
    }

    pub fn total_mass(&self) -> f64 {
        self.nodes.iter().map(|n| n.mass).sum()
    }

    /// Sum of the momentum field; meaningful right after P2G.
    pub fn total_momentum(&self) -> Vec3 {
        self.nodes.iter().fold(Vec3::ZERO, |acc, n| acc + n.momentum_or_velocity)
    }
}
