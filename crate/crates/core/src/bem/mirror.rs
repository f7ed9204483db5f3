//! Mirror reduction at normal incidence.
//!
//! For `theta = pi/2` the Bloch phase vanishes, `G_p` is even in `x1 - y1`
//! and the incident field does not depend on `x1`. A mesh that is symmetric
//! about a vertical line then has a symmetric trace, and the system folds
//! onto one element per mirror orbit.

use super::BoundaryMesh;
use crate::greens::LatticeParams;

pub(crate) struct Mirror {
    /// Orbit index of every element.
    pub orbit: Vec<usize>,
    /// Lowest element index of each orbit.
    pub reps: Vec<usize>,
}

impl Mirror {
    /// Row mask for assembly: representatives only.
    pub fn row_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.orbit.len()];
        for &r in &self.reps {
            mask[r] = true;
        }
        mask
    }
}

pub(crate) fn detect(mesh: &BoundaryMesh, params: &LatticeParams) -> Option<Mirror> {
    if params.theta.cos().abs() > 1e-12 || mesh.is_empty() {
        return None;
    }
    let n = mesh.len();
    let axis = mesh.elements.iter().map(|e| e.mid[0]).sum::<f64>() / n as f64;
    let h = mesh.elements.iter().map(|e| e.length).fold(0.0, f64::max);
    let tol = 1e-9 * h.max(1e-300);
    let near = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol;
    let flip = |p: [f64; 2]| [2.0 * axis - p[0], p[1]];

    let mut by_y: Vec<usize> = (0..n).collect();
    by_y.sort_by(|&a, &b| mesh.elements[a].mid[1].total_cmp(&mesh.elements[b].mid[1]));
    let mut partner = vec![usize::MAX; n];
    for (e, el) in mesh.elements.iter().enumerate() {
        let target = flip(el.mid);
        let from = by_y.partition_point(|&i| mesh.elements[i].mid[1] < target[1] - tol);
        let found = by_y[from..]
            .iter()
            .take_while(|&&i| mesh.elements[i].mid[1] <= target[1] + tol)
            .copied()
            .find(|&i| {
                let f = &mesh.elements[i];
                near(f.mid, target) && near(f.start, flip(el.end)) && near(f.end, flip(el.start))
            })?;
        partner[e] = found;
    }
    let mut orbit = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for e in 0..n {
        if orbit[e] == usize::MAX {
            orbit[e] = reps.len();
            orbit[partner[e]] = reps.len();
            reps.push(e);
        }
    }
    Some(Mirror { orbit, reps })
}
