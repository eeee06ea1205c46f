//! Plain-text triangle meshes of solved graphs.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hypcurv_core::hypgeo::shape_point;
use hypcurv_core::ScalarField;

use crate::IoError;

/// `surface_sigma0.500`: the file stem for one σ.
pub fn mesh_stem(sigma: f64) -> String {
    format!("surface_sigma{sigma:.3}")
}

/// Triangles over the lattice cells of the grid, as 0-based node triples in
/// counter-clockwise order. Full cells are split along the shorter diagonal
/// of the lifted quadrilateral; cells with three inside corners give one
/// triangle.
pub fn triangulate(field: &ScalarField) -> Vec<[usize; 3]> {
    let grid = &field.grid;
    let index: HashMap<[i32; 2], usize> = (0..grid.len()).map(|k| (grid.lattice(k), k)).collect();
    let mut cells = BTreeSet::new();
    for k in 0..grid.len() {
        let [i, j] = grid.lattice(k);
        for (di, dj) in [(0, 0), (-1, 0), (0, -1), (-1, -1)] {
            cells.insert([i + di, j + dj]);
        }
    }
    let lift = |k: usize| {
        let x = grid.coord(k);
        [x[0], x[1], field.values[k]]
    };
    let dist2 = |a: usize, b: usize| {
        let (p, q) = (lift(a), lift(b));
        (0..3).map(|r| (p[r] - q[r]) * (p[r] - q[r])).sum::<f64>()
    };
    let mut faces = Vec::new();
    for [i, j] in cells {
        // Counter-clockwise corners starting at the lower left.
        let corners = [[i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]].map(|c| index.get(&c).copied());
        match corners {
            [Some(a), Some(b), Some(c), Some(d)] => {
                if dist2(a, c) <= dist2(b, d) {
                    faces.push([a, b, c]);
                    faces.push([a, c, d]);
                } else {
                    faces.push([a, b, d]);
                    faces.push([b, c, d]);
                }
            }
            _ => {
                let present: Vec<usize> = corners.iter().flatten().copied().collect();
                if present.len() == 3 {
                    faces.push([present[0], present[1], present[2]]);
                }
            }
        }
    }
    faces
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| IoError::new(path, e))
}

/// Writes `<stem>.obj` (vertices `x y u`, one per inside node in grid order)
/// and `<stem>.csv` with per-vertex curvature data. Returns both paths.
pub fn export_mesh(field: &ScalarField, dir: &Path) -> Result<[PathBuf; 2], IoError> {
    let stem = mesh_stem(field.sigma);
    let grid = &field.grid;
    let faces = triangulate(field);

    let mut obj = String::new();
    obj.push_str(&format!(
        "# sigma={} eps={} h={} vertices={} faces={}\n",
        field.sigma,
        field.eps,
        grid.h,
        grid.len(),
        faces.len()
    ));
    for k in 0..grid.len() {
        let x = grid.coord(k);
        obj.push_str(&format!("v {} {} {}\n", x[0], x[1], field.values[k]));
    }
    for f in &faces {
        obj.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    let obj_path = dir.join(format!("{stem}.obj"));
    write_file(&obj_path, obj.as_bytes())?;

    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| IoError::new(&csv_path, std::io::Error::other(e));
    w.write_record(["vertex", "x", "y", "u", "kappa_min", "kappa_max", "nu", "eta", "pinned"])
        .map_err(csv_err)?;
    for k in 0..grid.len() {
        let x = grid.coord(k);
        let (kmin, kmax, nu, eta) = match shape_point(&field.discretize(k), field.sigma) {
            Ok(p) => (p.kappa_hyp[0], p.kappa_hyp[p.kappa_hyp.len() - 1], p.nu_up, p.eta.unwrap_or(f64::NAN)),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        w.write_record([
            (k + 1).to_string(),
            x[0].to_string(),
            x[1].to_string(),
            field.values[k].to_string(),
            kmin.to_string(),
            kmax.to_string(),
            nu.to_string(),
            eta.to_string(),
            u8::from(grid.is_pinned(k)).to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::new(&csv_path, std::io::Error::other(e.to_string())))?;
    write_file(&csv_path, &bytes)?;
    Ok([obj_path, csv_path])
}
