use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use cusplab::geometry::{write_geodesics_csv, ClosedGeodesic, FuchsianSurface};
use cusplab::indicial::{
    index_jump, indicial_family, indicial_set, residue_rank, ContourConfig, IndicialFamily,
};
use cusplab::lp::{
    band_limited_family, interaction_report, lp_blocks, lp_report, norm_equivalence_report_with,
    write_blocks_csv,
};
use cusplab::mode0::{
    bump, cross_root_correction, fit_tail_rates, invert_with_report, kernel_elements,
    line_residual, ModeZeroField,
};
use cusplab::suite;
use cusplab::tensor::{dirichlet_sym_derivative, solenoidal_project, Boundary, SymTensorField};
use cusplab::xray::{
    solenoidal_probe, write_results_csv, xray_classes, BumpOneForm, ChartField, Exterior, Metric,
    Potential, XRayResult,
};
use cusplab::C64;
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::error::CliError;

/// Output directory bookkeeping for one run.
pub struct Run<'a> {
    pub cfg: &'a Config,
    pub seed: u64,
    out: PathBuf,
    pub outputs: Vec<String>,
}

impl<'a> Run<'a> {
    pub fn new(cfg: &'a Config, seed: u64, out: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&out)
            .map_err(|e| CliError::Validation(format!("{}: {e}", out.display())))?;
        Ok(Self {
            cfg,
            seed,
            out,
            outputs: vec![],
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.out.join(name);
        let f = File::create(&path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut BufWriter<File>) -> cusplab::Result<()>,
    ) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn family(cfg: &Config) -> Result<IndicialFamily, CliError> {
    Ok(indicial_family(&cfg.operator()?)?)
}

fn complex(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn indicial(run: &mut Run) -> Result<(), CliError> {
    let spec = run.cfg.operator()?;
    let fam = indicial_family(&spec)?;
    let m = fam.matrix();
    let coefficients: Vec<_> = (0..=m.max_degree())
        .map(|k| {
            let c = m.coefficient(k);
            let rows: Vec<Vec<[f64; 2]>> = (0..c.nrows())
                .map(|i| (0..c.ncols()).map(|j| complex(c[(i, j)])).collect())
                .collect();
            json!({ "power": k, "matrix": rows })
        })
        .collect();
    let det = fam
        .characteristic_polynomial(1)
        .ok()
        .map(|p| p.coeffs().iter().map(|z| complex(*z)).collect::<Vec<_>>());
    run.json(
        "indicial.json",
        &json!({
            "operator": spec.name,
            "d": spec.dim_d,
            "rows": fam.rows(),
            "cols": fam.cols(),
            "coefficients": coefficients,
            "characteristic_polynomial": det,
        }),
    )
}

pub fn roots(run: &mut Run) -> Result<(), CliError> {
    let spec = run.cfg.operator()?;
    let fam = indicial_family(&spec)?;
    let window = run.cfg.window()?;
    let roots = fam.roots(window)?;
    let set = indicial_set(&roots);
    for r in &roots {
        println!(
            "λ = {:+.12} {:+.12}i  multiplicity {}  residue rank {}",
            r.lambda.re, r.lambda.im, r.multiplicity, r.residue_rank
        );
    }
    let list: Vec<_> = roots
        .iter()
        .map(|r| {
            json!({
                "root": complex(r.lambda),
                "multiplicity": r.multiplicity,
                "residue_rank": r.residue_rank,
                "pole_order": r.pole_order,
            })
        })
        .collect();
    run.json("roots.json", &json!({ "operator": spec.name, "d": spec.dim_d, "window": window, "roots": list, "indicial_set": set }))
}

pub fn index_jump_cmd(run: &mut Run) -> Result<(), CliError> {
    let spec = run.cfg.operator()?;
    let fam = indicial_family(&spec)?;
    let (from, to) = (run.cfg.operator.rho, run.cfg.rho_to()?);
    let jump = index_jump(&spec, from, to)?;
    let half = spec.dim_d as f64 / 2.0;
    let (lo, hi) = ((half + from).min(half + to), (half + from).max(half + to));
    let crossed = fam
        .root_multiset()?
        .iter()
        .filter(|r| r.value.re > lo && r.value.re < hi)
        .map(|r| {
            let (rank, order) = residue_rank(&fam, r.value, &ContourConfig::default())?;
            Ok(json!({ "root": complex(r.value), "multiplicity": r.multiplicity, "residue_rank": rank, "pole_order": order }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    println!("index jump {jump}");
    run.json(
        "index_jump.json",
        &json!({
            "operator": spec.name,
            "rho_from": from,
            "rho_to": to,
            "lines": [half + from, half + to],
            "jump": jump,
            "crossed_roots": crossed,
        }),
    )
}

fn mode0_data(cfg: &Config, components: usize) -> Result<ModeZeroField, CliError> {
    if let Some(path) = &cfg.grid.field {
        let f = File::open(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let u = ModeZeroField::read_csv(std::io::BufReader::new(f))?;
        if u.components() != components {
            return Err(CliError::Validation(format!(
                "field has {} components, operator acts on {components}",
                u.components()
            )));
        }
        return Ok(u);
    }
    Ok(ModeZeroField::from_fn(
        cfg.r_grid()?,
        0.0,
        components,
        |r| {
            let mut v = vec![C64::new(0.0, 0.0); components];
            v[0] = C64::new(bump(r, 0.0, 2.0), 0.0);
            v
        },
    )?)
}

pub fn mode0_solve(run: &mut Run) -> Result<(), CliError> {
    let fam = family(run.cfg)?;
    let f = mode0_data(run.cfg, fam.rows())?;
    let (u, report) = invert_with_report(&fam, &f, run.cfg.operator.rho)?;
    let residual = if fam.rows() == fam.cols() {
        Some(line_residual(&fam, &f, &u)?)
    } else {
        None
    };
    let tails = fit_tail_rates(&u).ok();
    run.csv("solution.csv", |w| u.write_csv(w))?;
    run.json(
        "report.json",
        &json!({ "inversion": report, "residual": residual, "tail_rates": tails }),
    )
}

pub fn mode0_kernel(run: &mut Run) -> Result<(), CliError> {
    let fam = family(run.cfg)?;
    let roots = fam.roots(run.cfg.window()?)?;
    let mut elements = Vec::new();
    for r in &roots {
        elements.extend(kernel_elements(&fam, r)?);
    }
    let mut summary = json!({ "roots": roots.iter().map(|r| complex(r.lambda)).collect::<Vec<_>>(), "elements": elements });
    if let Some(to) = run.cfg.operator.rho_to {
        let f = mode0_data(run.cfg, fam.rows())?;
        let (corr, crossed) = cross_root_correction(&fam, &f, run.cfg.operator.rho, to)?;
        run.csv("correction.csv", |w| corr.write_csv(w))?;
        summary["correction"] =
            json!({ "rho_from": run.cfg.operator.rho, "rho_to": to, "elements": crossed });
    }
    run.json("kernel.json", &summary)
}

pub fn lp_norm(run: &mut Run) -> Result<(), CliError> {
    let op = &run.cfg.operator;
    let (s, profile) = (op.s, op.profile);
    let grid = run.cfg.r_grid()?;
    let u = match &run.cfg.grid.field {
        Some(_) => mode0_data(run.cfg, 1)?,
        None => band_limited_family(grid, 1, 32, 40.0, run.seed)?.remove(0),
    };
    let report = lp_report(&u, s, profile)?;
    let interactions = interaction_report(&u, profile)?;
    run.csv("blocks.csv", |w| {
        write_blocks_csv(&lp_blocks(&u, profile)?, w)
    })?;
    run.json(
        "lp_report.json",
        &json!({ "report": report, "interaction_exponent": interactions.exponent }),
    )?;
    if let Some(n) = run.cfg.grid.family_size {
        let fam = band_limited_family(grid, n, 32, 40.0, run.seed)?;
        run.json(
            "equivalence.json",
            &norm_equivalence_report_with(&fam, s, profile)?,
        )?;
    }
    Ok(())
}

fn classes(cfg: &Config, surface: &FuchsianSurface) -> Result<Vec<ClosedGeodesic>, CliError> {
    let mut cs = surface.enumerate_hyperbolic_classes(cfg.surface.max_word_len)?;
    if let Some(cap) = cfg.surface.class_cap {
        cs.truncate(cap);
    }
    Ok(cs)
}

pub fn geodesics(run: &mut Run) -> Result<(), CliError> {
    let surface = run.cfg.surface()?;
    let cs = classes(run.cfg, &surface)?;
    println!("{} classes", cs.len());
    run.csv("geodesics.csv", |w| write_geodesics_csv(&cs, w))
}

/// Built-in 2-tensor `φ g` with `φ` a bump well inside the chart.
fn bump_tensor(cfg: &Config, surface: &FuchsianSurface) -> Result<SymTensorField, CliError> {
    let g = cfg.chart(surface.cusp_width())?;
    let (r0, w) = (
        g.r_min + 0.4 * (g.r_max - g.r_min),
        0.25 * (g.r_max - g.r_min),
    );
    let k = 2.0 * std::f64::consts::PI / surface.cusp_width();
    Ok(SymTensorField::from_fn(2, g, |r, t| {
        let phi = bump(r, r0, w) * (3.0 * ((k * t).cos() - 1.0)).exp();
        vec![phi, phi, 0.0]
    })?)
}

fn potential_form(
    cfg: &Config,
    surface: &FuchsianSurface,
    seed: u64,
) -> Result<BumpOneForm, CliError> {
    let g = cfg.chart(surface.cusp_width())?;
    let (r0, w) = (0.5 * (g.r_min + g.r_max), 0.3 * (g.r_max - g.r_min));
    Ok(BumpOneForm::random(surface, r0, w, 3, seed)?)
}

fn grid_tensor(
    cfg: &Config,
    surface: &FuchsianSurface,
    seed: u64,
    name: &str,
) -> Result<SymTensorField, CliError> {
    match name {
        "zero" => Ok(SymTensorField::zeros(2, cfg.chart(surface.cusp_width())?)?),
        "metric" => Ok(SymTensorField::metric(cfg.chart(surface.cusp_width())?)?),
        "bump" => bump_tensor(cfg, surface),
        "potential" => {
            let p =
                potential_form(cfg, surface, seed)?.to_field(cfg.chart(surface.cusp_width())?)?;
            Ok(dirichlet_sym_derivative(&p)?)
        }
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("{path}: {e}")))?;
            Ok(SymTensorField::from_json(&text)?)
        }
    }
}

pub fn xray(run: &mut Run) -> Result<(), CliError> {
    let surface = run.cfg.surface()?;
    let cs = classes(run.cfg, &surface)?;
    let tol = run.cfg.xray_tol()?;
    let name = run
        .cfg
        .grid
        .tensor
        .clone()
        .unwrap_or_else(|| "metric".into());
    let results: Vec<XRayResult> = match name.as_str() {
        "metric" => xray_classes(&Metric, &cs, tol)?,
        "potential" => xray_classes(
            &Potential(potential_form(run.cfg, &surface, run.seed)?),
            &cs,
            tol,
        )?,
        other => {
            let field = grid_tensor(run.cfg, &surface, run.seed, other)?;
            xray_classes(
                &ChartField::new(&surface, &field, Exterior::Strict)?,
                &cs,
                tol,
            )?
        }
    };
    let max_abs = results.iter().map(|r| r.value.abs()).fold(0.0, f64::max);
    let max_err = results
        .iter()
        .map(|r| r.quadrature_error_estimate)
        .fold(0.0, f64::max);
    println!("{} classes, max |I| = {max_abs:e}", results.len());
    run.csv("xray.csv", |w| write_results_csv(&results, w))?;
    run.json(
        "xray_summary.json",
        &json!({ "tensor": name, "classes": results.len(), "tolerance": tol, "max_abs": max_abs, "max_error_estimate": max_err }),
    )
}

pub fn decompose(run: &mut Run) -> Result<(), CliError> {
    let surface = run.cfg.surface()?;
    let name = run.cfg.grid.tensor.clone().unwrap_or_else(|| "bump".into());
    let f = grid_tensor(run.cfg, &surface, run.seed, &name)?;
    let dec = solenoidal_project(&f, Boundary::Dirichlet)?;
    run.csv("solenoidal.json", |w| {
        Ok(w.write_all(dec.solenoidal.to_json()?.as_bytes())?)
    })?;
    run.csv("potential.json", |w| {
        Ok(w.write_all(dec.potential.to_json()?.as_bytes())?)
    })?;
    let cs = classes(run.cfg, &surface)?;
    let probe = solenoidal_probe(&surface, &f, &cs, run.cfg.xray_tol()?)?;
    println!(
        "verdict {:?}, solenoidal fraction {:e}",
        probe.verdict, probe.solenoidal_fraction
    );
    run.csv("probe.csv", |w| write_results_csv(&probe.results, w))?;
    run.json(
        "decomposition.json",
        &json!({
            "tensor": name,
            "report": dec.report,
            "probe": {
                "verdict": probe.verdict,
                "solenoidal_fraction": probe.solenoidal_fraction,
                "detection_ratio": probe.detection_ratio,
                "best_class": probe.best_class,
                "boundary_leak": probe.boundary_leak,
            },
        }),
    )
}

/// Runs the acceptance table; returns whether every criterion passed.
pub fn suite_cmd(run: &mut Run, only: &[u8]) -> Result<bool, CliError> {
    let ids = if only.is_empty() {
        suite::criterion_ids()
    } else {
        only.to_vec()
    };
    let mut outcomes = Vec::new();
    for id in ids {
        let o = suite::run_criterion(id, run.seed)
            .ok_or_else(|| CliError::Validation(format!("no criterion {id}")))?;
        println!(
            "{} {:>2} {}: {} [{:.2}s / {}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.measured,
            o.seconds,
            o.time_limit
        );
        outcomes.push(o);
    }
    let all = outcomes.iter().all(|o| o.passed);
    run.csv("suite.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        let fmt = |e: csv::Error| cusplab::Error::Format(e.to_string());
        c.write_record(["id", "name", "passed", "measured"])
            .map_err(fmt)?;
        for o in &outcomes {
            c.write_record([
                o.id.to_string(),
                o.name.clone(),
                o.passed.to_string(),
                o.measured.clone(),
            ])
            .map_err(fmt)?;
        }
        c.flush()?;
        Ok(())
    })?;
    // timings stay on stdout so that the files are reproducible
    let rows: Vec<_> = outcomes
        .iter()
        .map(|o| json!({ "id": o.id, "name": o.name, "passed": o.passed, "measured": o.measured, "time_limit": o.time_limit }))
        .collect();
    run.json("suite.json", &json!({ "passed": all, "criteria": rows }))?;
    Ok(all)
}
