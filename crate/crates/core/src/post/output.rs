use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{nodal_field, ProfileField};
use crate::chem::TransportParams;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::state::FieldState;

pub const TIMESERIES_HEADER: &str = "t_s,t_days,w_m,w_rel,mass_loss_rel,activated_frac,max_Ctot_pct,max_Sp";

/// One row of the time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelineRecord {
    #[serde(rename = "t_s")]
    pub time: f64,
    #[serde(rename = "t_days")]
    pub days: f64,
    /// Surface crack width (m).
    #[serde(rename = "w_m")]
    pub crack_width: f64,
    /// Crack width over the reference width.
    #[serde(rename = "w_rel")]
    pub relative_width: f64,
    /// Steel mass loss (%).
    #[serde(rename = "mass_loss_rel")]
    pub mass_loss: f64,
    #[serde(rename = "activated_frac")]
    pub activated_fraction: f64,
    /// Largest total chloride content on the steel surface (% of binder).
    #[serde(rename = "max_Ctot_pct")]
    pub max_total_chloride: f64,
    #[serde(rename = "max_Sp")]
    pub max_saturation: f64,
}

pub fn write_timeseries(path: &Path, records: &[TimelineRecord]) -> Result<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::Output {
            path: path.to_path_buf(),
            reason: format!("{other:?}"),
        },
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    if records.is_empty() {
        w.write_record(TIMESERIES_HEADER.split(',')).map_err(io)?;
    }
    for r in records {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimelineRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Output {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    r.deserialize()
        .map(|row| {
            row.map_err(|e| Error::Output {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Legacy ASCII VTK snapshot with the nodal fields and displacements.
pub fn write_vtk(path: &Path, mesh: &Mesh, state: &FieldState, p: &TransportParams) -> Result<()> {
    if let Some((name, i)) = state.find_non_finite() {
        return Err(Error::Output {
            path: path.to_path_buf(),
            reason: format!("field {name} is not finite at index {i}"),
        });
    }
    let fields = [
        ("c_f", ProfileField::FreeChloride),
        ("c_b", ProfileField::BoundChloride),
        ("C_tot", ProfileField::TotalChloride),
        ("c_II", ProfileField::Ferrous),
        ("c_III", ProfileField::Ferric),
        ("S_p", ProfileField::Saturation),
        ("phi", ProfileField::Phase),
    ];
    let n = mesh.num_nodes();
    let mut s = String::with_capacity(64 * n * 10);
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("corrosion cracking snapshot\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for x in &mesh.nodes {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", x[0], x[1], 0.0);
    }
    let nt = mesh.num_triangles();
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    let mut scalar = |name: &str, values: &[f64]| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(s, "{v:.16e}");
        }
    };
    for (name, field) in fields {
        scalar(name, &nodal_field(state, field, p)?);
    }
    scalar("theta_p", &state.theta_p);
    let _ = writeln!(s, "VECTORS u double");
    for v in 0..n {
        let _ = writeln!(
            s,
            "{:.16e} {:.16e} {:.16e}",
            state.displacement[2 * v],
            state.displacement[2 * v + 1],
            0.0
        );
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::tests::chen;
    use crate::mesh::{BoundarySets, Subdomain};
    use std::collections::BTreeMap;

    fn single() -> Mesh {
        Mesh {
            nodes: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2]],
            subdomains: vec![Subdomain::Concrete],
            boundaries: BoundarySets {
                sealed: vec![[0, 1], [1, 2], [2, 0]],
                ..Default::default()
            },
            sides: BTreeMap::new(),
        }
    }

    #[test]
    fn vtk_layout_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let m = single();
        let mut s = FieldState::new(&m, 0.15, 1, 0.0);
        s.c_free = vec![1.0, 2.0, 1.0 / 3.0];
        let (a, b) = (dir.path().join("a.vtk"), dir.path().join("b.vtk"));
        write_vtk(&a, &m, &s, &chen()).unwrap();
        write_vtk(&b, &m, &s, &chen()).unwrap();
        let text = std::fs::read_to_string(&a).unwrap();
        assert_eq!(text, std::fs::read_to_string(&b).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert!(text.contains("POINTS 3 double"));
        assert!(text.contains("CELLS 1 4\n3 0 1 2\nCELL_TYPES 1\n5\n"));
        assert!(text.contains("3.3333333333333331e-1"));
        for name in ["c_f", "c_b", "C_tot", "c_II", "c_III", "S_p", "phi", "theta_p"] {
            assert!(text.contains(&format!("SCALARS {name} double 1")), "{name}");
        }
        assert!(text.contains("VECTORS u double"));
    }

    #[test]
    fn vtk_refuses_nan() {
        let dir = tempfile::tempdir().unwrap();
        let m = single();
        let mut s = FieldState::new(&m, 0.15, 1, 0.0);
        s.phase[1] = f64::NAN;
        let err = write_vtk(&dir.path().join("x.vtk"), &m, &s, &chen()).unwrap_err();
        assert!(err.to_string().contains("phi"));
    }

    #[test]
    fn timeseries_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("timeline.csv");
        write_timeseries(&path, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{TIMESERIES_HEADER}\n"));
        let rec = |k: f64| TimelineRecord {
            time: 86400.0 * k,
            days: k,
            crack_width: 1.0 / 3.0 * 1e-4 * k,
            relative_width: 0.1 * k,
            mass_loss: 1e-7 * k,
            activated_fraction: 0.5,
            max_total_chloride: 0.22 + k,
            max_saturation: std::f64::consts::PI,
        };
        let records: Vec<_> = (0..4).map(|k| rec(k as f64)).collect();
        write_timeseries(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().next().unwrap(), TIMESERIES_HEADER);
        assert_eq!(read_timeseries(&path).unwrap(), records);
    }
}
