//! Subcommand bodies. Each returns the files it would write, as
//! `(file name, contents)` pairs, so output can be checked without touching
//! the file system.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use curvature_lines::field::lmn_geometric;
use curvature_lines::flow::{
    epsilon_scan, integrate_orbit, return_map, rotation_number, FlowConfig, RotationEstimate, SectionKind, Stop,
};
use curvature_lines::forms::forms_s3;
use curvature_lines::projection::{project_orbit, project_point, ProjectionPole};
use curvature_lines::{Branch, BumpFunction, Deformation, TorusPoint};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::export::{csv_row, fmt_f64, obj_vertex, to_json, write_file};

pub type Output = Vec<(String, String)>;

pub fn flow_config(cfg: &RunConfig) -> FlowConfig {
    FlowConfig::default().with_tol(cfg.tol, cfg.tol * 1e-2)
}

fn numerical(context: String) -> impl FnOnce(curvature_lines::Error) -> CliError {
    move |source| match source {
        curvature_lines::Error::InvalidArgument(msg) => CliError::Validation(format!("{context}: {msg}")),
        source => CliError::Numerical { context, source },
    }
}

fn pole(cfg: &RunConfig) -> CliResult<ProjectionPole> {
    ProjectionPole::new(cfg.pole).map_err(numerical("pole".into()))
}

pub fn forms_csv(cfg: &RunConfig) -> CliResult<Output> {
    cfg.validate()?;
    let n = cfg.grid;
    let def = Deformation::new(cfg.epsilon, &cfg.h_name);
    let rows = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let pt = TorusPoint::new(TAU * (k / n) as f64 / n as f64, TAU * (k % n) as f64 / n as f64);
            let ctx = || format!("forms at ({}, {}), ε = {}", pt.u, pt.v, cfg.epsilon);
            let fc = forms_s3(&def.jet(pt)).map_err(numerical(ctx()))?;
            let c = lmn_geometric(&def, pt).map_err(numerical(ctx()))?;
            let (i, ii) = (fc.first, fc.second);
            Ok([pt.u, pt.v, i.e, i.f, i.g, ii.e, ii.f, ii.g, c.l, c.m, c.n, c.discriminant()])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = String::from("u,v,E,F,G,e,f,g,L,M,N,delta\n");
    for r in &rows {
        csv_row(&mut out, r);
    }
    Ok(vec![("forms.csv".into(), out)])
}

pub fn orbit_csv(cfg: &RunConfig) -> CliResult<Output> {
    cfg.validate()?;
    let def = Deformation::new(cfg.epsilon, &cfg.h_name);
    let start = TorusPoint::new(cfg.start.0, cfg.start.1);
    let stop = Stop::Crossings { section: cfg.section_for_branch(), count: cfg.iterations };
    let orbit = integrate_orbit(&def, start, cfg.branch, stop, &flow_config(cfg)).map_err(numerical(format!(
        "orbit from ({}, {}), ε = {}",
        start.u, start.v, cfg.epsilon
    )))?;
    let mut out = String::from("i,u_lift,v_lift,u_mod,v_mod,x1,x2,x3,x4\n");
    for (i, s) in orbit.samples.iter().enumerate() {
        let m = s.point.canonical();
        let x = def.jet(s.point).p;
        csv_row(&mut out, &[i as f64, s.point.u, s.point.v, m.u, m.v, x[0], x[1], x[2], x[3]]);
    }
    Ok(vec![("orbit.csv".into(), out)])
}

fn section_start(cfg: &RunConfig, section: SectionKind) -> f64 {
    match (cfg.branch, section) {
        (Branch::First, SectionKind::U0) => cfg.start.1,
        _ => cfg.start.0,
    }
}

pub fn poincare_csv(cfg: &RunConfig) -> CliResult<Output> {
    cfg.validate()?;
    let def = Deformation::new(cfg.epsilon, &cfg.h_name);
    let section = cfg.section_for_branch();
    let fc = flow_config(cfg);
    let mut x = section_start(cfg, section);
    let mut out = String::from("k,x_lift,x_mod,displacement\n");
    csv_row(&mut out, &[0.0, x, curvature_lines::geometry::wrap_angle(x), 0.0]);
    for k in 1..=cfg.iterations {
        let next = return_map(&def, x, cfg.branch, section, &fc)
            .map_err(numerical(format!("return {k} from {x} on {}, ε = {}", section.name(), cfg.epsilon)))?;
        csv_row(&mut out, &[k as f64, next, curvature_lines::geometry::wrap_angle(next), next - x]);
        x = next;
    }
    Ok(vec![("poincare.csv".into(), out)])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationRecord {
    pub eps: f64,
    pub branch: String,
    pub rho: f64,
    pub err: f64,
    pub n: usize,
}

impl From<&RotationEstimate> for RotationRecord {
    fn from(r: &RotationEstimate) -> Self {
        Self { eps: r.eps, branch: r.branch.name().to_owned(), rho: r.rho, err: r.err, n: r.n }
    }
}

pub fn rotation_json(cfg: &RunConfig) -> CliResult<Output> {
    cfg.validate()?;
    let def = Deformation::new(cfg.epsilon, &cfg.h_name);
    let section = cfg.section_for_branch();
    let x0 = section_start(cfg, section);
    let r = rotation_number(&def, cfg.branch, section, cfg.iterations, x0, &flow_config(cfg))
        .map_err(numerical(format!("rotation number from {x0}, ε = {}", cfg.epsilon)))?;
    Ok(vec![("rotation.json".into(), to_json(&RotationRecord::from(&r)))])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanDocument {
    pub records: Vec<RotationRecord>,
    pub selected_eps: Option<f64>,
}

pub fn scan_document(cfg: &RunConfig) -> CliResult<(ScanDocument, curvature_lines::flow::ScanTable)> {
    cfg.validate()?;
    let table = epsilon_scan(&cfg.eps_list, &cfg.h_name, cfg.iterations, cfg.q_max, &flow_config(cfg))
        .map_err(numerical("ε scan".into()))?;
    let records = table
        .rows
        .iter()
        .flat_map(|r| [RotationRecord::from(&r.first), RotationRecord::from(&r.second)])
        .collect();
    Ok((ScanDocument { records, selected_eps: table.selected_eps }, table))
}

pub fn scan_json(cfg: &RunConfig) -> CliResult<Output> {
    let (doc, _) = scan_document(cfg)?;
    Ok(vec![("scan.json".into(), to_json(&doc))])
}

/// Mesh of `Π∘α^ε` on a `grid × grid` lattice and projected principal lines.
pub fn figure_obj(
    eps: f64,
    grid: usize,
    bump: &dyn BumpFunction,
    pole: &ProjectionPole,
    flow: &FlowConfig,
) -> CliResult<Output> {
    if grid < 3 {
        return Err(CliError::Validation(format!("figure needs grid >= 3, got {grid}")));
    }
    let def = Deformation::new(eps, bump);
    let n = grid;
    let verts = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let pt = TorusPoint::new(TAU * (k / n) as f64 / n as f64, TAU * (k % n) as f64 / n as f64);
            project_point(&def, pt, pole).map_err(numerical(format!("mesh vertex at ({}, {})", pt.u, pt.v)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut mesh = String::new();
    for p in &verts {
        obj_vertex(&mut mesh, *p);
    }
    let idx = |i: usize, j: usize| (i % n) * n + (j % n) + 1;
    for i in 0..n {
        for j in 0..n {
            let _ = writeln!(mesh, "f {} {} {} {}", idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
        }
    }

    let starts: Vec<(Branch, TorusPoint, Stop)> = (0..4)
        .flat_map(|k| {
            let s = TAU * k as f64 / 4.0 + 0.1;
            [
                (Branch::First, TorusPoint::new(0.0, s), Stop::USpan(TAU)),
                (Branch::Second, TorusPoint::new(s, 0.0), Stop::VSpan(TAU)),
            ]
        })
        .collect();
    let lines = starts
        .par_iter()
        .map(|&(branch, start, stop)| {
            let ctx = || format!("{} line from ({}, {}), ε = {eps}", branch.name(), start.u, start.v);
            let orbit = integrate_orbit(&def, start, branch, stop, flow).map_err(numerical(ctx()))?;
            project_orbit(&orbit, &def, pole).map_err(numerical(ctx()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut poly = String::new();
    let mut offset = 1;
    let mut records = String::new();
    for line in &lines {
        for p in line {
            obj_vertex(&mut poly, *p);
        }
        records.push('l');
        for k in 0..line.len() {
            let _ = write!(records, " {}", offset + k);
        }
        records.push('\n');
        offset += line.len();
    }
    poly.push_str(&records);
    let tag = fmt_f64(eps);
    Ok(vec![(format!("torus_eps{tag}.obj"), mesh), (format!("lines_eps{tag}.obj"), poly)])
}

pub fn figure(cfg: &RunConfig) -> CliResult<Output> {
    cfg.validate()?;
    figure_obj(cfg.epsilon, cfg.grid, &cfg.h_name, &pole(cfg)?, &flow_config(cfg))
}

pub fn write_outputs(dir: &Path, files: &Output) -> CliResult<Vec<PathBuf>> {
    files
        .iter()
        .map(|(name, contents)| {
            let path = dir.join(name);
            write_file(&path, contents)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::export::{parse_csv, parse_obj, write_csv};

    fn small(eps: f64) -> RunConfig {
        RunConfig { epsilon: eps, grid: 4, iterations: 100, ..RunConfig::default() }
    }

    #[test]
    fn forms_at_zero() {
        let out = forms_csv(&small(0.0)).unwrap();
        let (h, rows) = parse_csv(&out[0].1).unwrap();
        assert_eq!(h.join(","), "u,v,E,F,G,e,f,g,L,M,N,delta");
        assert_eq!(rows.len(), 16);
        for r in &rows {
            assert!(r[8].abs() < 1e-15 && r[10].abs() < 1e-15, "{r:?}");
        }
        assert_eq!(write_csv(&h, &rows), out[0].1);
    }

    #[test]
    fn grid_zero_is_validation_error() {
        let e = forms_csv(&RunConfig { grid: 0, ..RunConfig::default() }).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn rotation_at_zero_is_exact() {
        let out = rotation_json(&small(0.0)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out[0].1).unwrap();
        assert_eq!(v["rho"].as_f64(), Some(0.0));
        assert_eq!(out[0].1.matches("\"rho\": 0.0").count(), 1);
        for key in ["eps", "branch", "rho", "err", "n"] {
            assert!(v.get(key).is_some());
        }
        assert_eq!(v.as_object().unwrap().len(), 5);
    }

    #[test]
    fn too_few_returns_is_validation_error() {
        let e = rotation_json(&RunConfig { iterations: 10, ..RunConfig::default() }).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn scan_cardinality() {
        let cfg = RunConfig { eps_list: vec![0.02, 0.04, 0.06, 0.08, 0.1], iterations: 100, ..RunConfig::default() };
        let out = scan_json(&cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out[0].1).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 10);
        assert!(v.get("selected_eps").is_some());
        assert_eq!(scan_json(&cfg).unwrap(), out);
    }

    #[test]
    fn orbit_columns_and_determinism() {
        let cfg = RunConfig { iterations: 3, ..small(0.2) };
        let a = orbit_csv(&cfg).unwrap();
        assert_eq!(a, orbit_csv(&cfg).unwrap());
        let (h, rows) = parse_csv(&a[0].1).unwrap();
        assert_eq!(h.join(","), "i,u_lift,v_lift,u_mod,v_mod,x1,x2,x3,x4");
        let last = rows.last().unwrap();
        assert!((last[1] - 3.0 * TAU).abs() < 1e-12);
        for r in &rows {
            assert!((0.0..TAU).contains(&r[3]) && (0.0..TAU).contains(&r[4]));
            let n2: f64 = r[5..9].iter().map(|x| x * x).sum();
            assert!((n2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn poincare_rows() {
        let out = poincare_csv(&RunConfig { iterations: 5, ..small(0.1) }).unwrap();
        let (_, rows) = parse_csv(&out[0].1).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows[1..].iter().all(|r| r[3] < 0.0));
    }

    #[test]
    fn figure_mesh_shape() {
        let cfg = RunConfig { grid: 8, ..small(1.0 / 3.0) };
        let out = figure(&cfg).unwrap();
        assert_eq!(out[0].0, "torus_eps0.3333333333333333.obj");
        let mesh = parse_obj(&out[0].1).unwrap();
        assert_eq!(mesh.vertices.len(), 64);
        assert_eq!(mesh.faces.len(), 64);
        let lines = parse_obj(&out[1].1).unwrap();
        assert_eq!(lines.lines.len(), 8);
        assert!(lines.faces.is_empty());
    }
}
