//! One function per command; each returns the text of its artifact.

use caustica::catastrophe::{region_map, CausticCurve};
use caustica::checks::{elliptic_cross_check, harmonic_exactness, jacobi_identity, CheckReport};
use caustica::format::sig9;
use caustica::oracle::{eigen_spectrum, z_exact, Grid};
use caustica::partition::{sweep_csv, z_semiclassical, ZConfig, ZscResult};
use caustica::paths::{PathInventory, PathSolver, Side};
use caustica::PotentialSpec;
use serde::Serialize;

use crate::config::{Format, Job};
use crate::error::CliError;

/// Text produced by a command: the main document and, for `oracle` with
/// temperatures, a second table.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub main: String,
    pub secondary: Option<String>,
}

impl Artifact {
    fn single(main: String) -> Self {
        Self { main, secondary: None }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serialises");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> String {
    v.map(sig9).unwrap_or_default()
}

pub fn run(job: &Job, spec: Option<&PotentialSpec>, format: Format) -> Result<Artifact, CliError> {
    let spec = || spec.ok_or_else(|| CliError::Usage("`potential`: section is missing".into()));
    match job {
        Job::Zsc { betas, x0_cutoff } => zsc(spec()?, betas, *x0_cutoff, format),
        Job::Inventory { x0, beta } => inventory(spec()?, *x0, *beta, format),
        Job::Caustics { betas } => caustics(spec()?, betas, format),
        Job::Regions {
            x0_range,
            beta_range,
            resolution,
        } => {
            let map = region_map(&PathSolver::new(spec()?), *x0_range, *beta_range, *resolution)?;
            Ok(Artifact::single(match format {
                Format::Csv => map.to_csv(),
                Format::Json => map.to_json() + "\n",
            }))
        }
        Job::Oracle { grid, betas } => oracle(spec()?, grid, betas, format),
        Job::Compare { betas, grid } => compare(spec()?, betas, *grid, format),
        Job::Selftest => selftest(format),
    }
}

fn zsc(spec: &PotentialSpec, betas: &[f64], x0_cutoff: Option<f64>, format: Format) -> Result<Artifact, CliError> {
    let solver = PathSolver::new(spec);
    let cfg = ZConfig {
        x0_cutoff,
        ..ZConfig::default()
    };
    let results = betas
        .iter()
        .map(|&b| {
            z_semiclassical(&solver, b, &cfg).map(|r| ZscResult {
                breakdown: None,
                ..r
            })
        })
        .collect::<caustica::Result<Vec<_>>>()?;
    Ok(Artifact::single(match format {
        Format::Csv => sweep_csv(&results),
        Format::Json => json(&results),
    }))
}

fn inventory_csv(inv: &PathInventory) -> String {
    let mut out = String::from("side,n,periodic,x_minus,x_plus,E,S,Delta,stability\n");
    for p in &inv.paths {
        out += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            match p.side {
                Side::Left => "left",
                Side::Right => "right",
                Side::Still => "still",
            },
            p.n_periods,
            p.periodic,
            opt(p.x_minus),
            opt(p.x_plus),
            sig9(p.energy),
            sig9(p.action),
            opt(p.determinant),
            p.stability
        );
    }
    out
}

fn inventory(spec: &PotentialSpec, x0: f64, beta: f64, format: Format) -> Result<Artifact, CliError> {
    let inv = PathSolver::new(spec).enumerate(x0, beta)?;
    Ok(Artifact::single(match format {
        Format::Csv => inventory_csv(&inv),
        Format::Json => json(&inv),
    }))
}

fn caustics(spec: &PotentialSpec, betas: &[f64], format: Format) -> Result<Artifact, CliError> {
    let solver = PathSolver::new(spec);
    let r = 1.01 * spec.critical_radius().max(1e-3);
    let curves = spec
        .find_wells((-r, r))?
        .iter()
        .map(|w| CausticCurve::trace(&solver, w, betas))
        .collect::<caustica::Result<Vec<_>>>()?;
    Ok(Artifact::single(match format {
        Format::Csv => {
            let mut out = String::from("x_m,beta,x0_left,x0_right\n");
            for c in &curves {
                for &(b, l, r) in &c.samples {
                    out += &format!("{},{},{},{}\n", sig9(c.well.x_m), sig9(b), sig9(l), sig9(r));
                }
            }
            out
        }
        Format::Json => json(&curves),
    }))
}

#[derive(Serialize)]
struct ZRow {
    beta: f64,
    z_exact: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct OracleDoc<'a> {
    spectrum: &'a caustica::oracle::SpectrumResult,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    z: Vec<ZRow>,
}

fn oracle(spec: &PotentialSpec, grid: &Grid, betas: &[f64], format: Format) -> Result<Artifact, CliError> {
    let spectrum = eigen_spectrum(spec, grid)?;
    let z = betas
        .iter()
        .map(|&beta| {
            z_exact(&spectrum, beta).map(|z| ZRow {
                beta,
                z_exact: z.value,
                tail_bound: z.tail_bound,
            })
        })
        .collect::<caustica::Result<Vec<_>>>()?;
    Ok(match format {
        Format::Csv => {
            let secondary = (!z.is_empty()).then(|| {
                let mut out = String::from("beta,z_exact,tail_bound\n");
                for r in &z {
                    out += &format!("{},{},{}\n", sig9(r.beta), sig9(r.z_exact), sig9(r.tail_bound));
                }
                out
            });
            Artifact {
                main: spectrum.to_csv(),
                secondary,
            }
        }
        Format::Json => Artifact::single(json(&OracleDoc {
            spectrum: &spectrum,
            z,
        })),
    })
}

/// Grid for the exact spectrum when none is configured: it reaches 1.5 times
/// past the point where `V − min V = 40/β_min`, with about 60 nodes per
/// wavelength at that energy (clamped to 2001..=20001 nodes).
pub fn default_oracle_grid(spec: &PotentialSpec, beta_min: f64) -> Result<Grid, CliError> {
    let v_min = spec
        .critical_points()
        .iter()
        .map(|c| c.v)
        .fold(f64::INFINITY, f64::min);
    let e_cap = 40.0 / beta_min;
    let excess = |x: f64| spec.value(x) - v_min - e_cap;
    let reach = |dir: f64| {
        let mut r = spec.critical_radius().max(1.0);
        while excess(dir * r) < 0.0 {
            r *= 1.25;
        }
        r
    };
    let half = 1.5 * reach(1.0).max(reach(-1.0));
    let k = (2.0 * spec.mass() * e_cap).sqrt() / spec.hbar();
    let wavelength = 2.0 * std::f64::consts::PI / k;
    let n = ((2.0 * half / wavelength * 60.0).ceil() as usize).clamp(2001, 20001);
    Ok(Grid::new(-half, half, n)?)
}

#[derive(Serialize)]
struct CompareRow {
    beta: f64,
    z_sc: f64,
    z_exact: f64,
    rel_error: f64,
}

fn compare(spec: &PotentialSpec, betas: &[f64], grid: Option<Grid>, format: Format) -> Result<Artifact, CliError> {
    let grid = match grid {
        Some(g) => g,
        None => default_oracle_grid(spec, betas[0])?,
    };
    let spectrum = eigen_spectrum(spec, &grid)?;
    let solver = PathSolver::new(spec);
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        let z_sc = z_semiclassical(&solver, beta, &ZConfig::default())?.value;
        let z_ex = z_exact(&spectrum, beta)?.value;
        rows.push(CompareRow {
            beta,
            z_sc,
            z_exact: z_ex,
            rel_error: z_sc / z_ex - 1.0,
        });
    }
    Ok(Artifact::single(match format {
        Format::Csv => {
            let mut out = String::from("beta,z_sc,z_exact,rel_error\n");
            for r in &rows {
                out += &format!("{},{},{},{}\n", sig9(r.beta), sig9(r.z_sc), sig9(r.z_exact), sig9(r.rel_error));
            }
            out
        }
        Format::Json => json(&rows),
    }))
}

#[derive(Serialize)]
struct CheckRow {
    check: &'static str,
    cases: usize,
    worst: f64,
    bound: f64,
    passed: bool,
}

fn selftest(format: Format) -> Result<Artifact, CliError> {
    let reports: Vec<CheckReport> = vec![harmonic_exactness()?, elliptic_cross_check()?, jacobi_identity(1000)?];
    let rows: Vec<CheckRow> = reports
        .iter()
        .map(|r| CheckRow {
            check: r.name,
            cases: r.cases,
            worst: r.worst,
            bound: r.bound,
            passed: r.passed(),
        })
        .collect();
    let text = match format {
        Format::Csv => {
            let mut out = String::from("check,cases,worst,bound,result\n");
            for r in &rows {
                let verdict = if r.passed { "PASS" } else { "FAIL" };
                out += &format!("{},{},{},{},{verdict}\n", r.check, r.cases, sig9(r.worst), sig9(r.bound));
            }
            out
        }
        Format::Json => json(&rows),
    };
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.check).collect();
    if failed.is_empty() {
        Ok(Artifact::single(text))
    } else {
        eprint!("{text}");
        Err(CliError::SelftestFailed(failed.join(", ")))
    }
}
