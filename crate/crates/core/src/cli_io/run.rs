//! Command pipelines.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Command, RunConfig};
use super::report::*;
use super::source::{parse_field_source, write_field_csv_path, LoadedField};
use crate::body::{embed, forward_f};
use crate::convexity::{
    check_guan_ma, check_pogorelov, check_t32, check_t33, hessian_min, radii_matrix, sweep_with, sym2_max_eig,
    sym2_min_eig, ConvexityReport, Criterion, CriterionEvaluator, Verdict,
};
use crate::error::{Error, Result};
use crate::harmonics::{
    christoffel_residual, linear_component, orthogonality_defect, project_out_linear, solve_christoffel,
    FieldEvaluator, SphericalField,
};
use crate::kernels::{
    berg_g, firey_theta, gamma_const_detail, gamma_monte_carlo, omega_closed, omega_radial, KernelParams, KernelTable,
    RadialQuadratureConfig,
};
use crate::lp::{check_lemma41, check_t41_cond, refined_residual, solve_lp, solve_lp_eigen, LpSolution};
use crate::sphere::{make_grid, norm, SpherePoint};

/// Exit code for a successful run or a `holds` verdict.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILS: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// T33 sampling density used by `check`.
pub const T33_T_VALUES: usize = 16;
pub const T33_DIRECTIONS: usize = 4;

struct Timer<'a> {
    doc: &'a mut ReportDocument,
}

impl Timer<'_> {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.doc.timings.insert(name.to_string(), t.elapsed().as_secs_f64());
        out
    }
}

/// Runs `config` on the current rayon pool. Errors are recorded in the
/// report, which is returned in every case.
pub fn run(config: &RunConfig) -> ReportDocument {
    let mut doc = ReportDocument::new(config);
    let t0 = Instant::now();
    let outcome = config.validate().and_then(|_| match config.command {
        Command::Solve => run_solve(config, &mut doc),
        Command::Check => run_check(config, &mut doc),
        Command::Lp => run_lp(config, &mut doc),
        Command::Gamma => run_gamma(config, &mut doc),
        Command::Kernels => run_kernels(config, &mut doc),
        Command::Reconstruct => run_reconstruct(config, &mut doc),
    });
    match outcome {
        Ok(code) => doc.exit_code = code,
        Err(e) => {
            if let Error::NonConvergence { best, .. } = &e {
                doc.lp = doc.lp.take().or_else(|| lp_section(best, None, config).ok());
            }
            doc.error = Some(ErrorSection { name: e.name().to_string(), message: e.to_string() });
            doc.exit_code = EXIT_ERROR;
        }
    }
    doc.timings.insert("total".into(), t0.elapsed().as_secs_f64());
    doc
}

/// Runs on a dedicated pool sized by `--threads` or the environment.
pub fn run_with_threads(config: &RunConfig) -> ReportDocument {
    match config.thread_count() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(config)),
            Err(e) => {
                let mut doc = ReportDocument::new(config);
                doc.error = Some(ErrorSection { name: "InvalidParameter".into(), message: e.to_string() });
                doc.exit_code = EXIT_ERROR;
                doc
            }
        },
        None => run(config),
    }
}

/// Runs and writes the report to `--report` (or stdout); returns the exit code.
pub fn run_and_write(config: &RunConfig) -> i32 {
    let doc = run_with_threads(config);
    let json = doc.to_json();
    match &config.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("christoffel: cannot write report {}: {e}", path.display());
                return EXIT_ERROR;
            }
        }
        None => println!("{json}"),
    }
    if let Some(err) = &doc.error {
        eprintln!("christoffel: {}: {}", err.name, err.message);
    }
    doc.exit_code
}

fn load(config: &RunConfig, doc: &mut ReportDocument) -> Result<LoadedField> {
    let grid = make_grid(config.l)?;
    let input = config.input.as_deref().expect("validated");
    let lf = Timer { doc }.time("load", || parse_field_source(input, &grid, config.l_max))?;
    let v = lf.field.values();
    doc.input = Some(InputSection {
        source: lf.source.clone(),
        min_value: v.iter().copied().fold(f64::INFINITY, f64::min),
        max_value: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        truncation_error: lf.truncation_error,
    });
    Ok(lf)
}

/// Spectral solve behind the orthogonality gate (or projection).
fn solve_stage(config: &RunConfig, f: &SphericalField, doc: &mut ReportDocument) -> Result<(SphericalField, SphericalField)> {
    let defect = orthogonality_defect(f);
    let tol = config.tol * f.max_abs();
    let mut sec = OrthogonalitySection {
        defect,
        defect_norm: norm(&defect),
        tol,
        projected: config.project,
        removed_linear_part: None,
        removed_magnitude: None,
    };
    let f = if config.project {
        let v = linear_component(f);
        sec.removed_linear_part = Some(v);
        sec.removed_magnitude = Some(norm(&v));
        project_out_linear(f)
    } else {
        f.clone()
    };
    doc.orthogonality = Some(sec);
    let u = Timer { doc }.time("solve", || solve_christoffel(&f, tol))?;
    let (min_u, max_u) = min_max(u.values());
    doc.solver = Some(SolverSection { residual_inf: christoffel_residual(&u, &f)?, min_u, max_u });
    Ok((f, u))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
}

fn write_u(config: &RunConfig, u: &SphericalField) -> Result<()> {
    if let Some(path) = &config.out {
        write_field_csv_path(u, path)?;
    }
    Ok(())
}

fn run_solve(config: &RunConfig, doc: &mut ReportDocument) -> Result<i32> {
    let lf = load(config, doc)?;
    let (_, u) = solve_stage(config, &lf.field, doc)?;
    doc.hessian_min = Some(hessian_min(&u)?);
    write_u(config, &u)?;
    if let Some(path) = &config.obj {
        write_obj(&u, path)?;
    }
    Ok(EXIT_OK)
}

fn write_obj(u: &SphericalField, path: &Path) -> Result<crate::body::SurfaceMesh> {
    let mesh = embed(u)?;
    mesh.write_obj(std::io::BufWriter::new(std::fs::File::create(path)?))?;
    Ok(mesh)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Holds => EXIT_OK,
        Verdict::Fails => EXIT_FAILS,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn run_check(config: &RunConfig, doc: &mut ReportDocument) -> Result<i32> {
    let lf = load(config, doc)?;
    let (f, u) = solve_stage(config, &lf.field, doc)?;
    doc.hessian_min = Some(Timer { doc }.time("hessian", || hessian_min(&u))?);

    let table = KernelTable::closed(2)?;
    let ev = CriterionEvaluator::new(&f, table)?;
    let mut criteria = config.criteria.clone();
    criteria.sort();
    criteria.dedup();
    let mut report: Option<ConvexityReport> = None;
    for c in &criteria {
        let r = Timer { doc }.time(&format!("sweep_{}", c.name()), || sweep_with(&ev, &f, *c, config.n_dirs))?;
        report = Some(match report {
            Some(prev) => prev.merge(r),
            None => r,
        });
    }

    // extra witnesses at seeded random points
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points: Vec<SpherePoint> = (0..config.random_witnesses)
        .map(|_| {
            let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            SpherePoint::new(v)
        })
        .collect::<Result<_>>()?;
    for c in &criteria {
        if points.is_empty() {
            break;
        }
        let ms: Vec<_> = points.iter().map(|x| ev.matrix(*c, x)).collect();
        doc.random_witnesses.push(RandomWitnesses {
            criterion: *c,
            count: ms.len(),
            min_value: ms.iter().map(|m| m.min_eig().0).fold(f64::INFINITY, f64::min),
            max_error_estimate: ms.iter().map(|m| m.err).fold(0.0, f64::max),
        });
    }

    let cfg = RadialQuadratureConfig::default();
    let gamma = gamma_const_detail(2, config.alpha, &cfg)?.value;
    let gamma1 = gamma_const_detail(2, 1.0, &cfg)?.value;
    let mut timer = Timer { doc };
    let t32 = timer.time("t32", || check_t32(&f, config.alpha, gamma))?;
    let t33 = timer.time("t33", || check_t33(&f, T33_T_VALUES, T33_DIRECTIONS))?;
    let pogorelov = timer.time("pogorelov", || check_pogorelov(&f))?;
    let guan_ma = timer.time("guan_ma", || check_guan_ma(&f))?;
    let t41 = check_t41_cond(&f, config.p, gamma1)?;
    doc.sufficient = Some(SufficientSection {
        t32: T32Section { alpha: config.alpha, gamma, seminorm_is_grid_estimate: true, check: t32 },
        t33,
        pogorelov,
        guan_ma,
        t41,
    });

    let report = report.ok_or_else(|| Error::InvalidParameter("no criteria requested".into()))?;
    let verdict = report.overall();
    doc.convexity = Some(report);
    doc.verdict = Some(verdict);
    Ok(verdict_code(verdict))
}

fn lp_section(sol: &LpSolution, f: Option<&SphericalField>, config: &RunConfig) -> Result<LpSection> {
    let gamma1 = gamma_const_detail(2, 1.0, &RadialQuadratureConfig::default())?.value;
    let f = match f {
        Some(f) => f.clone(),
        None => return Err(Error::InvalidParameter("no field".into())),
    };
    let hmin = if sol.converged { Some(hessian_min(&sol.u)?) } else { None };
    Ok(LpSection {
        summary: sol.summary(),
        refined_residual: refined_residual(sol, &f)?,
        lemma41: check_lemma41(sol, &f)?,
        t41cond: check_t41_cond(&f, config.p, gamma1)?,
        gamma1,
        hessian_min: hmin,
    })
}

fn run_lp(config: &RunConfig, doc: &mut ReportDocument) -> Result<i32> {
    let lf = load(config, doc)?;
    let f = &lf.field;
    let out = Timer { doc }.time("lp", || {
        if config.p == 2.0 {
            solve_lp_eigen(f, config.tol, config.max_iter)
        } else {
            solve_lp(f, config.p, config.tol, config.max_iter)
        }
    });
    let sol = match out {
        Ok(sol) => sol,
        Err(Error::NonConvergence { iterations, residual, best }) => {
            doc.lp = lp_section(&best, Some(f), config).ok();
            return Err(Error::NonConvergence { iterations, residual, best });
        }
        Err(e) => return Err(e),
    };
    doc.lp = Some(lp_section(&sol, Some(f), config)?);
    write_u(config, &sol.u)?;
    Ok(EXIT_OK)
}

fn run_gamma(config: &RunConfig, doc: &mut ReportDocument) -> Result<i32> {
    let q = Timer { doc }.time("quadrature", || gamma_const_detail(config.n, config.alpha, &RadialQuadratureConfig::default()))?;
    let mut pole = vec![0.0; config.n + 1];
    pole[config.n] = 1.0;
    let mc = Timer { doc }.time("monte_carlo", || gamma_monte_carlo(config.n, config.alpha, &pole, config.samples, config.seed))?;
    doc.gamma = Some(GammaSection {
        quadrature: q,
        monte_carlo: mc,
        relative_difference: (q.value - mc.value).abs() / q.value,
        z_score: (q.value - mc.value).abs() / mc.std_err,
    });
    Ok(EXIT_OK)
}

/// The s grid of the kernel tables: −0.95 to 0.95 in steps of 0.05.
pub fn kernel_s_grid() -> Vec<f64> {
    (0..39).map(|k| (5 * k as i64 - 95) as f64 / 100.0).collect()
}

fn run_kernels(config: &RunConfig, doc: &mut ReportDocument) -> Result<i32> {
    let cfg = RadialQuadratureConfig::default();
    let mut dims = vec![2, 3, 4];
    if !dims.contains(&config.n) {
        dims.push(config.n);
    }
    let s_grid = kernel_s_grid();
    let (mut rc, mut cf, mut id) = (0.0f64, 0.0f64, 0.0f64);
    for &n in &dims {
        let params = KernelParams::new(n)?;
        for &s in &s_grid {
            let c = omega_closed(s, &params)?;
            rc = rc.max((omega_radial(s, &params, &cfg)? - c).abs());
            cf = cf.max((c - firey_theta(s, &params)?).abs());
            if n == 2 {
                id = id.max((c * (1.0 - s) + 1.0).abs());
            }
        }
    }
    let table = match &config.out {
        Some(path) => {
            write_kernel_table(config.n, &s_grid, path)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    doc.kernels = Some(KernelSection {
        dimensions: dims,
        s_values: s_grid.len(),
        max_radial_vs_closed: rc,
        max_closed_vs_firey: cf,
        max_n2_identity_error: id,
        table,
    });
    Ok(EXIT_OK)
}

/// Berg kernels tabulated alongside ω.
pub const BERG_DIMENSIONS: [usize; 3] = [2, 3, 4];

fn write_kernel_table(n: usize, s_grid: &[f64], path: &Path) -> Result<()> {
    let params = KernelParams::new(n)?;
    let cfg = RadialQuadratureConfig::default();
    let mut wtr = csv::Writer::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let mut header = vec!["s".to_string(), "omega_radial".into(), "omega_closed".into(), "firey_theta".into()];
    header.extend(BERG_DIMENSIONS.iter().map(|m| format!("berg_g{m}")));
    wtr.write_record(&header).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    for &s in s_grid {
        let mut row = vec![
            s.to_string(),
            omega_radial(s, &params, &cfg)?.to_string(),
            omega_closed(s, &params)?.to_string(),
            firey_theta(s, &params)?.to_string(),
        ];
        for m in BERG_DIMENSIONS {
            row.push(berg_g(m, s)?.to_string());
        }
        wtr.write_record(&row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    wtr.flush()?;
    Ok(())
}

fn run_reconstruct(config: &RunConfig, doc: &mut ReportDocument) -> Result<i32> {
    let lf = load(config, doc)?;
    let (f, u) = solve_stage(config, &lf.field, doc)?;
    let mesh = match &config.obj {
        Some(path) => write_obj(&u, path)?,
        None => embed(&u)?,
    };
    let ev = FieldEvaluator::new(u.coeffs().ok_or(Error::NotAnalyzed)?);
    let fu = forward_f(&u)?;
    let (mut rmin, mut rmax, mut trace) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for (x, fv) in u.grid().nodes().iter().zip(fu.values()) {
        let m = radii_matrix(&ev, x);
        let (r1, r2) = (sym2_min_eig(&m).0, sym2_max_eig(&m));
        rmin = rmin.min(r1);
        rmax = rmax.max(r2);
        trace = trace.max((r1 + r2 - fv).abs());
    }
    // the identity is against f itself as well, up to the solve residual
    let _ = f;
    doc.hessian_min = Some(hessian_min(&u)?);
    doc.reconstruct = Some(ReconstructSection {
        vertices: mesh.vertices.len(),
        faces: mesh.faces.len(),
        min_radius: rmin,
        max_radius: rmax,
        trace_identity_error: trace,
        obj: config.obj.as_ref().map(|p| p.display().to_string()),
    });
    write_u(config, &u)?;
    Ok(EXIT_OK)
}

#[allow(dead_code)]
fn criterion_list(c: &[Criterion]) -> String {
    c.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")
}
