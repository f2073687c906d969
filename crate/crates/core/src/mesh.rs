//! Triangle meshes of `(t, θ)` patches and Wavefront OBJ output.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::{self, Write};

use crate::surface::{SurfacePatch, V3};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<V3>,
    /// Zero-based vertex indices, counter-clockwise seen from `X_t ∧ X_θ`.
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// `V - E + F`; zero for a closed torus.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = HashSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    pub fn write_obj<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# {} vertices, {} faces", self.vertices.len(), self.faces.len())?;
        for v in &self.vertices {
            // `+ 0.0` turns `-0.0` into `0.0`.
            writeln!(out, "v {:.12} {:.12} {:.12}", v.x + 0.0, v.y + 0.0, v.z + 0.0)?;
        }
        for f in &self.faces {
            writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    }
}

/// Samples `patch` on `nt × ntheta` points of `[t0, t1] × [-π, π)`, splitting
/// each quad into two triangles. With `periodic_t` the right end is
/// identified with `t0` (the sample at `t1` is omitted); otherwise `t1` is
/// included and the `t` direction has a boundary.
pub fn grid_mesh(patch: &dyn SurfacePatch, t0: f64, t1: f64, nt: usize, ntheta: usize, periodic_t: bool) -> Mesh {
    assert!(nt >= 2 && ntheta >= 3, "mesh needs at least 2 × 3 samples");
    let dt = if periodic_t {
        (t1 - t0) / nt as f64
    } else {
        (t1 - t0) / (nt - 1) as f64
    };
    let mut vertices = Vec::with_capacity(nt * ntheta);
    for i in 0..nt {
        let t = t0 + dt * i as f64;
        for j in 0..ntheta {
            let th = -PI + 2.0 * PI * j as f64 / ntheta as f64;
            vertices.push(patch.jet(t, th).x);
        }
    }
    let id = |i: usize, j: usize| (i % nt) * ntheta + j % ntheta;
    let rows = if periodic_t { nt } else { nt - 1 };
    let mut faces = Vec::with_capacity(2 * rows * ntheta);
    for i in 0..rows {
        for j in 0..ntheta {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    Mesh { vertices, faces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::CylinderPatch;
    use crate::profile::make_profile;
    use crate::torus::TorusPatch;

    #[test]
    fn closed_torus_topology() {
        let prof = make_profile(-0.1).unwrap();
        let n = 20;
        let tau = prof.tau();
        let patch = TorusPatch::with_lobes(prof, n).unwrap();
        let m = grid_mesh(&patch, -(n as f64) * tau, n as f64 * tau, 400, 64, true);
        assert_eq!(m.vertices.len(), 400 * 64);
        assert_eq!(m.faces.len(), 2 * 400 * 64);
        assert_eq!(m.euler_characteristic(), 0);
        let seam = patch.jet(n as f64 * tau, 0.3).x - patch.jet(-(n as f64) * tau, 0.3).x;
        assert!(seam.amax() < 1e-9);
    }

    #[test]
    fn open_cylinder_and_obj() {
        let m = grid_mesh(&CylinderPatch::new(make_profile(-0.3).unwrap()), -1.0, 1.0, 5, 8, false);
        assert_eq!(m.vertices.len(), 40);
        assert_eq!(m.faces.len(), 64);
        assert_eq!(m.euler_characteristic(), 0);
        let mut buf = Vec::new();
        m.write_obj(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 40);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 64);
        let max_index = text
            .lines()
            .filter(|l| l.starts_with("f "))
            .flat_map(|l| l[2..].split(' ').map(|s| s.parse::<usize>().unwrap()).collect::<Vec<_>>())
            .max()
            .unwrap();
        assert_eq!(max_index, 40);
    }
}
