//! Legacy-ASCII VTK export of simulation snapshots.
//!
//! One unstructured-grid file per snapshot: quadratic triangles, point
//! data `u` (displacement vector) and `phi`, and cell-averaged undamaged
//! stress fields (`sxx`, `szz`, `syy`, `sxz`, `tau_max`, `sigma1`, `P`).
//! Output is deterministic byte-for-byte for identical inputs and crate
//! version. Floats are written in shortest round-trip decimal.

use super::IoError;
use crate::assembly::{stress_at_qp, FemCache, N_QP};
use crate::material::MaterialParams;
use crate::mesh::Mesh;
use crate::solver::FieldState;
use std::fmt::Write as _;
use std::path::Path;

const VTK_QUADRATIC_TRIANGLE: u8 = 22;

/// In-memory form of an exported snapshot, as read back from disk.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub points: Vec<[f64; 2]>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    /// Cell fields keyed by name.
    pub cell_fields: Vec<(String, Vec<f64>)>,
}

/// Writes a snapshot of `state` on `mesh` to `path`.
pub fn export_snapshot(
    mesh: &Mesh,
    cache: &FemCache,
    material: &MaterialParams<f64>,
    state: &FieldState,
    path: impl AsRef<Path>,
) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(
        out,
        "icecliff {} snapshot t={}",
        env!("CARGO_PKG_VERSION"),
        state.t
    );
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");

    let n = mesh.n_nodes();
    let _ = writeln!(out, "POINTS {n} double");
    for &[x, z] in &mesh.nodes {
        let _ = writeln!(out, "{x} {z} 0");
    }

    let m = mesh.elements.len();
    let _ = writeln!(out, "CELLS {m} {}", m * 7);
    for elem in &mesh.elements {
        let _ = writeln!(
            out,
            "6 {} {} {} {} {} {}",
            elem[0], elem[1], elem[2], elem[3], elem[4], elem[5]
        );
    }
    let _ = writeln!(out, "CELL_TYPES {m}");
    for _ in 0..m {
        let _ = writeln!(out, "{VTK_QUADRATIC_TRIANGLE}");
    }

    let _ = writeln!(out, "POINT_DATA {n}");
    out.push_str("VECTORS u double\n");
    for node in 0..n {
        let _ = writeln!(out, "{} {} 0", state.u[2 * node], state.u[2 * node + 1]);
    }
    out.push_str("SCALARS phi double 1\nLOOKUP_TABLE default\n");
    for &p in &state.phi {
        let _ = writeln!(out, "{p}");
    }

    // Cell-averaged undamaged stress and its invariants.
    let mut fields: Vec<(&str, Vec<f64>)> = [
        "sxx_Pa", "szz_Pa", "syy_Pa", "sxz_Pa", "tau_max_Pa", "sigma1_Pa", "pressure_Pa",
    ]
    .iter()
    .map(|name| (*name, vec![0.0; m]))
    .collect();
    for (e, elem) in mesh.elements.iter().enumerate() {
        let mut acc = [0.0f64; 7];
        for q in 0..N_QP {
            let s = stress_at_qp(
                cache.grad(e, q),
                elem,
                &state.u,
                &state.qp[e * N_QP + q].eps_v,
                material,
            );
            acc[0] += s.sxx;
            acc[1] += s.szz;
            acc[2] += s.syy;
            acc[3] += s.sxz;
            acc[4] += s.tau_max();
            acc[5] += s.sigma1();
            acc[6] += s.pressure();
        }
        for (field, v) in fields.iter_mut().zip(acc) {
            field.1[e] = v / N_QP as f64;
        }
    }
    let _ = writeln!(out, "CELL_DATA {m}");
    for (name, values) in &fields {
        let _ = writeln!(out, "SCALARS {name} double 1");
        out.push_str("LOOKUP_TABLE default\n");
        for v in values {
            let _ = writeln!(out, "{v}");
        }
    }

    std::fs::write(path, out).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Reads back a snapshot written by [`export_snapshot`].
pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().peekable();
    let bad = |msg: &str| IoError::Snapshot(msg.to_string());

    let mut points = Vec::new();
    let mut u = Vec::new();
    let mut phi = Vec::new();
    let mut cell_fields = Vec::new();
    let mut n_cells = 0usize;

    while let Some(line) = lines.next() {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("POINTS") => {
                let n: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| bad("POINTS count"))?;
                for _ in 0..n {
                    let row = lines.next().ok_or_else(|| bad("truncated POINTS"))?;
                    let mut vals = row.split_whitespace().map(str::parse::<f64>);
                    let x = vals.next().ok_or_else(|| bad("point x"))?.map_err(|_| bad("point x"))?;
                    let z = vals.next().ok_or_else(|| bad("point z"))?.map_err(|_| bad("point z"))?;
                    points.push([x, z]);
                }
            }
            Some("CELLS") => {
                n_cells = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| bad("CELLS count"))?;
                for _ in 0..n_cells {
                    lines.next().ok_or_else(|| bad("truncated CELLS"))?;
                }
            }
            Some("VECTORS") => {
                for _ in 0..points.len() {
                    let row = lines.next().ok_or_else(|| bad("truncated VECTORS"))?;
                    let mut vals = row.split_whitespace().map(str::parse::<f64>);
                    for _ in 0..2 {
                        u.push(
                            vals.next()
                                .ok_or_else(|| bad("vector component"))?
                                .map_err(|_| bad("vector component"))?,
                        );
                    }
                }
            }
            Some("SCALARS") => {
                let name = words.next().ok_or_else(|| bad("SCALARS name"))?.to_string();
                lines.next(); // LOOKUP_TABLE
                let count = if name == "phi" { points.len() } else { n_cells };
                let mut values = Vec::with_capacity(count);
                for _ in 0..count {
                    let row = lines.next().ok_or_else(|| bad("truncated SCALARS"))?;
                    values.push(row.trim().parse::<f64>().map_err(|_| bad("scalar value"))?);
                }
                if name == "phi" {
                    phi = values;
                } else {
                    cell_fields.push((name, values));
                }
            }
            _ => {}
        }
    }
    Ok(Snapshot {
        points,
        u,
        phi,
        cell_fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rectangle_mesh, DEFAULT_NODE_CAP};
    use crate::solver::FieldState;

    fn setup() -> (Mesh, FemCache, MaterialParams<f64>, FieldState) {
        let mesh = build_rectangle_mesh(2.0, 4.0, 0.5, DEFAULT_NODE_CAP).unwrap();
        let cache = FemCache::new(&mesh);
        let material = MaterialParams::glacial_ice();
        let state = FieldState::zeros(&mesh);
        (mesh, cache, material, state)
    }

    #[test]
    fn zero_state_exports_zero_arrays() {
        let (mesh, cache, material, state) = setup();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.vtk");
        export_snapshot(&mesh, &cache, &material, &state, &path).unwrap();
        let snap = read_snapshot(&path).unwrap();
        assert_eq!(snap.points.len(), mesh.n_nodes());
        assert!(snap.u.iter().all(|&v| v == 0.0));
        assert!(snap.phi.iter().all(|&v| v == 0.0));
        assert_eq!(snap.cell_fields.len(), 7);
        for (_, values) in &snap.cell_fields {
            assert_eq!(values.len(), mesh.elements.len());
            assert!(values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn round_trip_preserves_values() {
        let (mesh, cache, material, mut state) = setup();
        for (i, v) in state.u.iter_mut().enumerate() {
            *v = (i as f64 * 0.37).sin() * 1e-3;
        }
        for (i, v) in state.phi.iter_mut().enumerate() {
            *v = 0.5 + 0.5 * (i as f64 * 0.11).cos();
        }
        for (i, p) in state.qp.iter_mut().enumerate() {
            p.eps_v.exx = 1e-5 * (i as f64 * 0.03).sin();
            p.eps_v.ezz = -p.eps_v.exx;
        }
        state.t = 123.5;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.vtk");
        export_snapshot(&mesh, &cache, &material, &state, &path).unwrap();
        let snap = read_snapshot(&path).unwrap();
        for (a, b) in snap.u.iter().zip(&state.u) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        for (a, b) in snap.phi.iter().zip(&state.phi) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        // Shortest round-trip decimals reproduce exactly.
        assert_eq!(snap.u, state.u);
        assert_eq!(snap.phi, state.phi);
    }

    #[test]
    fn export_is_deterministic() {
        let (mesh, cache, material, state) = setup();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.vtk");
        let b = dir.path().join("b.vtk");
        export_snapshot(&mesh, &cache, &material, &state, &a).unwrap();
        export_snapshot(&mesh, &cache, &material, &state, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}
