//! The `evolve`, `huygens` and `zeta` drivers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use hdw_core::closedform::{evolve_dirac_1d, evolve_dirac_2d, evolve_dirac_3d, evolve_kg_1d, ClosedFormOptions};
use hdw_core::fields::{relative_l2_error, smooth_bump_spinor, Vec3};
use hdw_core::huygens::causality_check;
use hdw_core::io::write_dump;
use hdw_core::propagator::{default_eps_schedule, eval_zeta_integral, ZetaRow};
use hdw_core::spectral::{DiracEvolver, KgSolution};
use hdw_core::{
    green_kg, huygens_report, l2_norm, make_gamma_set, make_grid, radial_profile, smooth_bump, zeta_limit, Bump,
    Complex64, Field, Grid, HuygensReport, ScalarField, SpinorField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ConfigError, Engine, Equation, KgSlot, Resolved};

/// Outside-fraction bound of the causality check.
pub const CAUSALITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
#[error("causality check failed: outside fraction {outside:e} at t = {t} (tolerance {CAUSALITY_TOLERANCE:e})")]
pub struct CausalityFailure {
    pub t: f64,
    pub outside: f64,
}

#[derive(Debug, thiserror::Error)]
#[error("{failed} of {total} segment-integral evaluations failed")]
pub struct ZetaFailures {
    pub failed: usize,
    pub total: usize,
}

/// Wall-clock stages, kept out of the data files.
struct Timing {
    start: Instant,
    lines: Vec<String>,
}

impl Timing {
    fn new() -> Self {
        Self { start: Instant::now(), lines: Vec::new() }
    }

    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let s = Instant::now();
        let out = f();
        self.lines.push(format!("{label}\t{:.6}", s.elapsed().as_secs_f64()));
        out
    }

    fn write(mut self, dir: &Path) -> Result<()> {
        self.lines.push(format!("total\t{:.6}", self.start.elapsed().as_secs_f64()));
        fs::write(dir.join("timing.log"), self.lines.join("\n") + "\n")?;
        Ok(())
    }
}

fn prepare(cfg: &Resolved) -> Result<()> {
    fs::create_dir_all(&cfg.dir).with_context(|| format!("creating {}", cfg.dir.display()))?;
    fs::write(cfg.dir.join("resolved.toml"), cfg.file.to_toml())?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn dump<F: Field + ?Sized>(cfg: &Resolved, name: &str, field: &F) -> Result<Option<String>> {
    if !cfg.dumps {
        return Ok(None);
    }
    let mut out = BufWriter::new(File::create(cfg.dir.join(name))?);
    write_dump(field, &mut out)?;
    out.flush()?;
    Ok(Some(name.to_string()))
}

fn bump(cfg: &Resolved) -> Bump {
    Bump::new(cfg.center.clone(), cfg.radius, cfg.amplitude)
}

fn initial_kg(cfg: &Resolved, grid: &Grid) -> Result<(ScalarField, ScalarField)> {
    let b = smooth_bump(grid, &bump(cfg))?;
    let z = ScalarField::zeros(grid);
    Ok(match cfg.slot {
        KgSlot::F => (b, z),
        KgSlot::G => (z, b),
    })
}

/// Grid nodes at uniformly random radius in [0, r_max) and random direction
/// about `center`.
pub fn probe_nodes(grid: &Grid, center: &[f64], r_max: f64, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    (0..count)
        .map(|_| {
            let r = rng.random_range(0.0..r_max);
            let mut d = [0.0; 3];
            loop {
                for v in d.iter_mut().take(n) {
                    *v = rng.random_range(-1.0..1.0);
                }
                let s: f64 = d.iter().map(|v| v * v).sum();
                if s > 1e-6 && s <= 1.0 {
                    let s = s.sqrt();
                    d.iter_mut().for_each(|v| *v /= s);
                    break;
                }
            }
            let x: Vec<f64> = (0..n).map(|i| center[i] + r * d[i]).collect();
            grid.flat_index(&grid.nearest_index(&x)[..n])
        })
        .collect()
}

#[derive(Serialize)]
struct GridInfo {
    #[serde(rename = "L")]
    length: f64,
    #[serde(rename = "N")]
    points: usize,
    h: f64,
}

#[derive(Serialize, Default)]
struct Step {
    t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dump: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l2_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    norm_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_drift: Option<f64>,
    /// Relative L2 distance to the spectral solution (closed-form 1D runs).
    #[serde(skip_serializing_if = "Option::is_none")]
    spectral_l2_rel_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probes: Option<String>,
    /// max |closed − spectral| / max |spectral| over the probes.
    #[serde(skip_serializing_if = "Option::is_none")]
    probe_max_rel_diff: Option<f64>,
}

#[derive(Serialize)]
struct EvolveSummary {
    command: &'static str,
    equation: Equation,
    n: usize,
    engine: Engine,
    grid: GridInfo,
    initial_l2_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_energy: Option<f64>,
    steps: Vec<Step>,
}

fn relative_drift(now: f64, then: f64) -> f64 {
    if then > 0.0 {
        (now - then).abs() / then
    } else {
        (now - then).abs()
    }
}

pub fn evolve(cfg: &Resolved) -> Result<()> {
    let mut timing = Timing::new();
    let grid = make_grid(cfg.n, cfg.length, cfg.points)?;
    if cfg.engine == Engine::Closedform && cfg.equation == Equation::Kg && cfg.n > 1 {
        return Err(ConfigError("closed-form Klein-Gordon evolution is implemented for n = 1 only".into()).into());
    }
    prepare(cfg)?;
    let info = GridInfo { length: cfg.length, points: cfg.points, h: grid.spacing() };
    let summary = match cfg.equation {
        Equation::Dirac => {
            let g = make_gamma_set(cfg.n)?;
            let psi0 = smooth_bump_spinor(&grid, &bump(cfg), cfg.component)?;
            dump(cfg, "initial.hdw", &psi0)?;
            let norm0 = l2_norm(&psi0);
            let evolver = timing.time("spectral_setup", || DiracEvolver::new(&g, &psi0))?;
            let mut steps = Vec::new();
            for (i, &t) in cfg.times.iter().enumerate() {
                let spec = timing.time(&format!("spectral t={t}"), || evolver.at(t))?;
                let residual = evolver.residual(t)? / norm0.max(f64::MIN_POSITIVE);
                let mut step = Step { t, residual: Some(residual), ..Default::default() };
                match (cfg.engine, cfg.n) {
                    (Engine::Spectral, _) => {
                        let norm = l2_norm(&spec);
                        step.l2_norm = Some(norm);
                        step.norm_drift = Some(relative_drift(norm, norm0));
                        step.dump = dump(cfg, &format!("psi_{i:03}.hdw"), &spec)?;
                    }
                    (Engine::Closedform, 1) => {
                        let psi = timing.time(&format!("closedform t={t}"), || evolve_dirac_1d(&psi0, t))?;
                        let norm = l2_norm(&psi);
                        step.l2_norm = Some(norm);
                        step.norm_drift = Some(relative_drift(norm, norm0));
                        step.spectral_l2_rel_diff = Some(relative_l2_error(&psi, &spec));
                        step.dump = dump(cfg, &format!("psi_{i:03}.hdw"), &psi)?;
                    }
                    (Engine::Closedform, n) => {
                        let half = 0.5 * cfg.length - grid.spacing();
                        let nodes = probe_nodes(&grid, &cfg.center, (t + cfg.radius).min(half), cfg.probes, cfg.seed);
                        let pts: Vec<Vec3> = nodes.iter().map(|&f| grid.position(f)).collect();
                        let opts = ClosedFormOptions {
                            interpolation: cfg.interpolation,
                            sphere: cfg.sphere,
                            disk: cfg.disk,
                            support_radius: Some(cfg.radius + max_offset(&cfg.center)),
                        };
                        let vals = timing.time(&format!("closedform t={t}"), || {
                            if n == 2 {
                                evolve_dirac_2d(&g, &psi0, t, &pts, &opts)
                            } else {
                                evolve_dirac_3d(&g, &psi0, t, &pts, &opts)
                            }
                        })?;
                        let name = format!("probes_{i:03}.csv");
                        step.probe_max_rel_diff = Some(write_probes(&cfg.dir.join(&name), &pts, n, &nodes, &vals, &spec)?);
                        step.probes = Some(name);
                    }
                }
                steps.push(step);
            }
            EvolveSummary {
                command: "evolve",
                equation: cfg.equation,
                n: cfg.n,
                engine: cfg.engine,
                grid: info,
                initial_l2_norm: norm0,
                initial_energy: None,
                steps,
            }
        }
        Equation::Kg => {
            let (f, v) = initial_kg(cfg, &grid)?;
            dump(cfg, "initial_f.hdw", &f)?;
            dump(cfg, "initial_g.hdw", &v)?;
            let sol = timing.time("spectral_setup", || KgSolution::new(&f, &v))?;
            let e0 = sol.energy(0.0)?;
            let mut steps = Vec::new();
            for (i, &t) in cfg.times.iter().enumerate() {
                let spec = timing.time(&format!("spectral t={t}"), || sol.value(t))?;
                let energy = sol.energy(t)?;
                let mut step = Step {
                    t,
                    energy: Some(energy),
                    energy_drift: Some(relative_drift(energy, e0)),
                    ..Default::default()
                };
                let phi = if cfg.engine == Engine::Closedform {
                    let phi = timing.time(&format!("closedform t={t}"), || evolve_kg_1d(&f, &v, t))?;
                    step.spectral_l2_rel_diff = Some(relative_l2_error(&phi, &spec));
                    phi
                } else {
                    spec
                };
                step.l2_norm = Some(l2_norm(&phi));
                step.dump = dump(cfg, &format!("phi_{i:03}.hdw"), &phi)?;
                steps.push(step);
            }
            EvolveSummary {
                command: "evolve",
                equation: cfg.equation,
                n: cfg.n,
                engine: cfg.engine,
                grid: info,
                initial_l2_norm: l2_norm(&v).hypot(l2_norm(&f)),
                initial_energy: Some(e0),
                steps,
            }
        }
    };
    write_json(&cfg.dir.join("summary.json"), &summary)?;
    for s in &summary.steps {
        println!(
            "t = {}: {}",
            s.t,
            match (s.norm_drift, s.energy_drift, s.probe_max_rel_diff) {
                (_, _, Some(d)) => format!("closed-form vs spectral max rel diff {d:.3e}"),
                (Some(d), _, _) => format!("norm drift {d:.3e}"),
                (_, Some(d), _) => format!("energy drift {d:.3e}"),
                _ => String::new(),
            }
        );
    }
    timing.write(&cfg.dir)
}

fn max_offset(center: &[f64]) -> f64 {
    center.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Writes `x0,..,re0,im0,..,spec_re0,spec_im0,..` rows and returns the
/// peak-relative maximum deviation from the spectral field.
fn write_probes(
    path: &Path,
    pts: &[Vec3],
    n: usize,
    nodes: &[usize],
    vals: &[Vec<Complex64>],
    spec: &SpinorField,
) -> Result<f64> {
    let dim = spec.dim();
    let mut out = BufWriter::new(File::create(path)?);
    let mut header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    for c in 0..dim {
        header.push(format!("re{c}"));
        header.push(format!("im{c}"));
    }
    for c in 0..dim {
        header.push(format!("spectral_re{c}"));
        header.push(format!("spectral_im{c}"));
    }
    writeln!(out, "{}", header.join(","))?;
    let (mut diff, mut peak) = (0.0f64, 0.0f64);
    for ((x, &node), v) in pts.iter().zip(nodes).zip(vals) {
        let mut row: Vec<String> = x[..n].iter().map(|c| c.to_string()).collect();
        for z in v {
            row.push(format!("{:e}", z.re));
            row.push(format!("{:e}", z.im));
        }
        for (c, z) in v.iter().enumerate() {
            let s = spec.component(c)[node];
            row.push(format!("{:e}", s.re));
            row.push(format!("{:e}", s.im));
            diff = diff.max((z - s).norm());
            peak = peak.max(s.norm());
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(if peak > 0.0 { diff / peak } else { diff })
}

#[derive(Serialize)]
struct HuygensOutput {
    equation: Equation,
    engine: Engine,
    reports: Vec<HuygensEntry>,
}

#[derive(Serialize)]
struct HuygensEntry {
    #[serde(flatten)]
    report: HuygensReport,
    causality_outside_fraction: f64,
    profile: String,
}

pub fn huygens(cfg: &Resolved) -> Result<()> {
    let mut timing = Timing::new();
    let grid = make_grid(cfg.n, cfg.length, cfg.points)?;
    if cfg.engine == Engine::Closedform && cfg.n > 1 {
        return Err(ConfigError(
            "huygens needs the full field; the closed-form engine produces it for n = 1 only".into(),
        )
        .into());
    }
    prepare(cfg)?;
    let label = match cfg.equation {
        Equation::Dirac => "dirac",
        Equation::Kg => "kg",
    };
    let fields: Vec<Box<dyn Field>> = match cfg.equation {
        Equation::Dirac => {
            let g = make_gamma_set(cfg.n)?;
            let psi0 = smooth_bump_spinor(&grid, &bump(cfg), cfg.component)?;
            let evolver = DiracEvolver::new(&g, &psi0)?;
            cfg.times
                .iter()
                .map(|&t| -> Result<Box<dyn Field>> {
                    Ok(match cfg.engine {
                        Engine::Spectral => Box::new(timing.time(&format!("spectral t={t}"), || evolver.at(t))?),
                        Engine::Closedform => {
                            Box::new(timing.time(&format!("closedform t={t}"), || evolve_dirac_1d(&psi0, t))?)
                        }
                    })
                })
                .collect::<Result<_>>()?
        }
        Equation::Kg => {
            let (f, v) = initial_kg(cfg, &grid)?;
            let sol = KgSolution::new(&f, &v)?;
            cfg.times
                .iter()
                .map(|&t| -> Result<Box<dyn Field>> {
                    Ok(match cfg.engine {
                        Engine::Spectral => Box::new(timing.time(&format!("spectral t={t}"), || sol.value(t))?),
                        Engine::Closedform => {
                            Box::new(timing.time(&format!("closedform t={t}"), || evolve_kg_1d(&f, &v, t))?)
                        }
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    let mut reports = Vec::new();
    let mut violation: Option<CausalityFailure> = None;
    for (i, (field, &t)) in fields.iter().zip(&cfg.times).enumerate() {
        let profile = radial_profile(field.as_ref(), &cfg.center)?;
        let name = format!("profile_{i:03}.csv");
        profile.write_csv(BufWriter::new(File::create(cfg.dir.join(&name))?))?;
        let mut report = huygens_report(&profile, t, cfg.radius, cfg.w, cfg.tau)?;
        report.equation = Some(label.to_string());
        let outside = causality_check(&profile, t, cfg.radius, cfg.w);
        if outside >= CAUSALITY_TOLERANCE && violation.is_none() {
            violation = Some(CausalityFailure { t, outside });
        }
        println!(
            "n = {} {label} t = {t}: {} (tail fraction {:.3e}, outside fraction {:.3e})",
            cfg.n, report.classification, report.tail_fraction, outside
        );
        reports.push(HuygensEntry { report, causality_outside_fraction: outside, profile: name });
    }
    write_json(&cfg.dir.join("huygens.json"), &HuygensOutput { equation: cfg.equation, engine: cfg.engine, reports })?;
    timing.write(&cfg.dir)?;
    match violation {
        Some(v) => Err(v.into()),
        None => Ok(()),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn zeta(cfg: &Resolved) -> Result<()> {
    if cfg.n < 2 {
        return Err(ConfigError(format!("the segment integral needs n >= 2, got n = {}", cfg.n)).into());
    }
    if cfg.times.iter().chain(&cfg.r).any(|v| *v <= 0.0) {
        return Err(ConfigError("zeta needs t > 0 and r > 0".into()).into());
    }
    let mut timing = Timing::new();
    prepare(cfg)?;
    let mut scan = BufWriter::new(File::create(cfg.dir.join("zeta_scan.csv"))?);
    let mut limits = BufWriter::new(File::create(cfg.dir.join("zeta_limits.csv"))?);
    writeln!(scan, "n,t,r,eps,re,im,est_error,status")?;
    writeln!(limits, "n,t,r,limit_re,limit_im,extrapolation_error,green_re,green_im,abs_diff,status")?;
    let (mut failed, mut total) = (0usize, 0usize);
    let n = cfg.n;
    for &t in &cfg.times {
        let eps = if cfg.eps.is_empty() { default_eps_schedule(t) } else { cfg.eps.clone() };
        for &r in &cfg.r {
            total += 1;
            let green = if (r - t).abs() > 1e-12 * t.max(1.0) { green_kg(n, t, r).ok().map(|s| s.bulk) } else { None };
            let result = timing.time(&format!("zeta t={t} r={r}"), || zeta_limit(n, t, r, &eps));
            match result {
                Ok(lim) => {
                    for row in &lim.rows {
                        write_scan_row(&mut scan, row, "ok")?;
                    }
                    let diff = green.map(|g| (g - lim.value).norm());
                    writeln!(
                        limits,
                        "{n},{t},{r},{:e},{:e},{:e},{},{},{},ok",
                        lim.value.re,
                        lim.value.im,
                        lim.error,
                        fmt_opt(green.map(|g| g.re)),
                        fmt_opt(green.map(|g| g.im)),
                        fmt_opt(diff)
                    )?;
                    println!("n = {n} t = {t} r = {r}: limit {:.10e}{:+.10e}i", lim.value.re, lim.value.im);
                }
                Err(err) => {
                    failed += 1;
                    // Re-run the scan row by row so each row carries its own status.
                    for &e in &eps {
                        match eval_zeta_integral(n, t, r, e) {
                            Ok(est) => write_scan_row(
                                &mut scan,
                                &ZetaRow { n, t, r, eps: e, re: est.value.re, im: est.value.im, est_error: est.error },
                                "ok",
                            )?,
                            Err(row_err) => {
                                writeln!(scan, "{n},{t},{r},{e:e},,,,{}", csv_text(&row_err.to_string()))?
                            }
                        }
                    }
                    writeln!(
                        limits,
                        "{n},{t},{r},,,,{},{},,{}",
                        fmt_opt(green.map(|g| g.re)),
                        fmt_opt(green.map(|g| g.im)),
                        csv_text(&err.to_string())
                    )?;
                    eprintln!("n = {n} t = {t} r = {r}: {err}");
                }
            }
        }
    }
    scan.flush()?;
    limits.flush()?;
    timing.write(&cfg.dir)?;
    if failed > 0 {
        return Err(ZetaFailures { failed, total }.into());
    }
    Ok(())
}

fn write_scan_row(out: &mut impl Write, row: &ZetaRow, status: &str) -> Result<()> {
    writeln!(out, "{},{},{},{:e},{:e},{:e},{:e},{status}", row.n, row.t, row.r, row.eps, row.re, row.im, row.est_error)?;
    Ok(())
}

fn csv_text(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "'"))
}
