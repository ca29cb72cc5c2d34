//! Legacy ASCII VTK export of the hexahedral mesh.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::mesh::{Decomposition, Mesh};
use crate::error::Result;

/// Writes the mesh with subdomain and material ids as cell data and, when
/// given, a nodal field with `dofs_per_node` components.
pub fn write_vtk(path: &Path, mesh: &Mesh, decomposition: &Decomposition, field: Option<(&str, &[f64])>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "bddc mesh")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.node_count())?;
    for p in &mesh.coordinates {
        writeln!(out, "{} {} {}", p[0], p[1], p[2])?;
    }
    let ne = mesh.element_count();
    writeln!(out, "CELLS {} {}", ne, ne * 9)?;
    for e in &mesh.elements {
        let ids: Vec<String> = e.iter().map(|v| v.to_string()).collect();
        writeln!(out, "8 {}", ids.join(" "))?;
    }
    writeln!(out, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        writeln!(out, "12")?;
    }
    writeln!(out, "CELL_DATA {ne}")?;
    writeln!(out, "SCALARS subdomain int 1\nLOOKUP_TABLE default")?;
    for s in &decomposition.element_subdomain {
        writeln!(out, "{s}")?;
    }
    writeln!(out, "SCALARS material int 1\nLOOKUP_TABLE default")?;
    for m in &mesh.materials {
        writeln!(out, "{m}")?;
    }
    if let Some((name, values)) = field {
        let d = mesh.dofs_per_node();
        writeln!(out, "POINT_DATA {}", mesh.node_count())?;
        if d == 1 {
            writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
            for v in values {
                writeln!(out, "{v}")?;
            }
        } else {
            writeln!(out, "VECTORS {name} double")?;
            for node in values.chunks(d) {
                writeln!(out, "{} {} {}", node[0], node[1], node[2])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
