use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use infreg_core::capacity::{
    grid_capacity_auto, poincare_constant_estimate, CapacityEstimate, EstimateKind, Grid, Init, SolveOptions,
};
use infreg_core::families::{self, clustered_ball_lower, clustered_shell_bound};
use infreg_core::pde::{assess_probes, probe_regularity, solve_dirichlet, DirichletProblem, ProbeThresholds};
use infreg_core::wiener::wiener_partial_sum;
use infreg_core::{classify_infinity, CapacityBackend, Condenser, CriterionVariant, Error, Exponents, Family};

use crate::config::{weight_name, Command, ConfigError, DomainConfig, ExampleName, JobConfig, VariantName};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 when a solver ran out of iterations, 3 for rejected input, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Core(Error::NotConverged { .. }) => 2,
            CliError::Core(Error::Unsupported(_) | Error::SingularPoint | Error::EllipticityViolation { .. }) => 1,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

/// Files written and a human-readable summary for stdout.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Round-trip exact for binary64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Csv {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Csv {
    fn create(dir: &Path, name: &str, provenance: &str, header: &[&str]) -> Result<Self, CliError> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        let mut csv = Csv { path, out: BufWriter::new(file) };
        csv.line(&format!("# {provenance}"))?;
        csv.row(header.iter().map(|s| s.to_string()))?;
        Ok(csv)
    }

    fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.out, "{s}").map_err(|source| CliError::Io { path: self.path.clone(), source })
    }

    fn row(&mut self, cells: impl IntoIterator<Item = String>) -> Result<(), CliError> {
        let quoted: Vec<String> = cells
            .into_iter()
            .map(|c| if c.contains([',', '"', '\n']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c })
            .collect();
        self.line(&quoted.join(","))
    }

    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.out.flush().map_err(|source| CliError::Io { path: self.path.clone(), source })?;
        Ok(self.path)
    }
}

fn solve_options(cfg: &JobConfig, tol: f64, max_iter: usize) -> SolveOptions {
    SolveOptions {
        tol: cfg.params.tol.unwrap_or(tol),
        max_iter: cfg.params.max_iter.unwrap_or(max_iter),
        init: cfg.params.seed.map_or(Init::Given, Init::Random),
    }
}

fn backend(cfg: &JobConfig) -> CapacityBackend {
    let d = SolveOptions::default();
    let mut b = CapacityBackend::new(32, solve_options(cfg, d.tol, d.max_iter));
    if let Some(h) = cfg.params.grid_h {
        // spacing as a fraction of the rescaled inner set's diameter
        b.cells = (1.0 / h).ceil() as usize;
    }
    b
}

fn kind_name(k: EstimateKind) -> &'static str {
    match k {
        EstimateKind::Exact => "exact",
        EstimateKind::UpperBound => "upper-bound",
        EstimateKind::Grid => "grid",
    }
}

fn domain_name(d: &DomainConfig) -> String {
    match d {
        DomainConfig::Family { family, inverted: false } => family.name().into(),
        DomainConfig::Family { family, inverted: true } => format!("inverted {}", family.name()),
        DomainConfig::Set(_) => "set tree".into(),
    }
}

fn provenance(cfg: &JobConfig, extra: &str) -> String {
    let e = cfg.exponents;
    let dom = cfg.domain.as_ref().map_or(String::new(), |d| format!(" domain={}", domain_name(d)));
    let seed = cfg.params.seed.map_or(String::new(), |s| format!(" seed={s}"));
    let command = format!("{:?}", cfg.command).to_lowercase();
    format!("infreg {command} n={} p={} weight={}{dom}{seed} {extra}", e.n(), e.p(), weight_name(cfg.weight))
}

/// Runs `cfg`, writing artifacts into `out`.
pub fn run(cfg: &JobConfig, out: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    match cfg.command {
        Command::Capacity => capacity(cfg, out),
        Command::Wiener => wiener(cfg, out),
        Command::Classify => classify(cfg, out),
        Command::Invert => invert(cfg, out),
        Command::Solve => solve(cfg, out),
        Command::Examples => examples(cfg, out),
        Command::Poincare => poincare(cfg, out),
    }
}

fn capacity(cfg: &JobConfig, out: &Path) -> Result<Outcome, CliError> {
    let (k, g) = (cfg.k.clone().unwrap(), cfg.g.clone().unwrap());
    let exp = cfg.exponents;
    let est: CapacityEstimate = match cfg.params.grid_h {
        Some(h) => {
            let d = SolveOptions::default();
            grid_capacity_auto(&Condenser::new(k, g, cfg.weight), exp, h, &solve_options(cfg, d.tol, d.max_iter))?
        }
        None => backend(cfg).capacity(&k, &g, exp, cfg.weight)?,
    };
    let method = cfg.params.grid_h.map_or("backend chain: exact radial, ball cover, grid, radial hull".to_string(), |h| format!("grid solve at h={h}"));
    let mut csv = Csv::create(out, "capacity.csv", &provenance(cfg, &method), &["value", "kind", "lower", "upper", "iterations", "converged", "refinement_ratio"])?;
    let (lo, hi) = est.analytic_bounds.map_or((String::new(), String::new()), |(a, b)| (num(a), num(b)));
    csv.row([
        num(est.value),
        kind_name(est.kind).into(),
        lo,
        hi,
        est.iterations.to_string(),
        est.converged.to_string(),
        est.refinement_ratio.map_or(String::new(), num),
    ])?;
    Ok(Outcome { files: vec![csv.finish()?], summary: format!("capacity {} ({})", num(est.value), kind_name(est.kind)) })
}

fn variant(cfg: &JobConfig) -> CriterionVariant {
    match cfg.params.variant.unwrap_or(VariantName::SquareShell) {
        VariantName::Ball => CriterionVariant::BallInDomain,
        VariantName::SquareShell => CriterionVariant::square_shell(),
        VariantName::ExpShell => CriterionVariant::exponential_shell(),
        VariantName::Classic => CriterionVariant::classic(cfg.params.point.clone().unwrap(), cfg.weight),
    }
}

fn wiener(cfg: &JobConfig, out: &Path) -> Result<Outcome, CliError> {
    let v = variant(cfg);
    let dom = cfg.domain.as_ref().unwrap().spec(cfg.exponents.n())?;
    let (lo, hi) = if v.at_infinity() { (1.0, 1e6) } else { (1e-6, 1.0) };
    let r_min = cfg.params.r_min.unwrap_or(lo);
    let r_max = cfg.params.r_max.unwrap_or(hi);
    let spd = cfg.params.samples_per_decade.unwrap_or(16);
    let rep = wiener_partial_sum(&v, &dom, cfg.exponents, r_min, r_max, spd, &backend(cfg))?;
    let extra = format!("variant={} r_min={r_min} r_max={r_max} samples_per_decade={spd}", v.name());
    let mut csv = Csv::create(out, "wiener.csv", &provenance(cfg, &extra), &["r", "capacity", "integrand", "partial_sum"])?;
    for (s, sum) in rep.samples.iter().zip(&rep.partial_sums) {
        csv.row([num(s.r), num(s.capacity), num(s.integrand), num(*sum)])?;
    }
    let last = rep.partial_sums.last().copied().unwrap_or(0.0);
    let summary = format!(
        "variant: {}\nverdict: {}\ncertificate: {}\nfinal partial sum: {}\ntrend: {}",
        v.name(),
        rep.verdict.label(),
        rep.verdict.certificate(),
        num(last),
        num(rep.trend)
    );
    Ok(Outcome { files: vec![csv.finish()?], summary })
}

fn classify(cfg: &JobConfig, out: &Path) -> Result<Outcome, CliError> {
    let dom = cfg.domain.as_ref().unwrap().spec(cfg.exponents.n())?;
    let c = classify_infinity(&dom, cfg.exponents, &backend(cfg))?;
    let mut csv = Csv::create(out, "classify.csv", &provenance(cfg, &format!("variant={}", c.variant.name())), &["class", "variant", "certificate"])?;
    csv.row([c.class.label().into(), c.variant.name(), c.certificate.clone()])?;
    Ok(Outcome { files: vec![csv.finish()?], summary: format!("{}\ncertificate: {}", c.class.label(), c.certificate) })
}

fn invert(cfg: &JobConfig, out: &Path) -> Result<Outcome, CliError> {
    let domain = match cfg.domain.clone().unwrap() {
        DomainConfig::Family { family, inverted } => DomainConfig::Family { family, inverted: !inverted },
        DomainConfig::Set(s) => DomainConfig::Set(infreg_core::inversion::invert_set(&s)?),
    };
    let image = JobConfig { domain: Some(domain), ..cfg.clone() };
    let text = crate::config::print_config(&image);
    let path = out.join("inverted.conf");
    fs::write(&path, &text).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(Outcome { files: vec![path], summary: text })
}

fn solve(cfg: &JobConfig, out: &Path) -> Result<Outcome, CliError> {
    let exp = cfg.exponents;
    let dom = cfg.domain.as_ref().unwrap().spec(exp.n())?;
    let data = cfg.params.data.unwrap();
    let half = cfg.params.half_width.unwrap_or(1.0);
    let h = cfg.params.grid_h.unwrap_or(1.0 / 64.0);
    let cells = (2.0 * half / h).round().max(2.0) as usize;
    let tol = cfg.params.tol.unwrap_or(1e-10);
    let max_iter = cfg.params.max_iter.unwrap_or(100_000);
    let solve_at = |m: usize| -> Result<_, CliError> {
        let prob = DirichletProblem::on_domain(&dom.set, Grid::centered(2, half, m)?, exp, cfg.weight, |x| data.eval(x))?;
        let u = solve_dirichlet(&prob, tol, max_iter)?;
        Ok((prob, u))
    };
    let (prob, u) = solve_at(cells)?;
    let extra = format!("data={data} half_width={half} h={h}");
    let mut files = Vec::new();
    let mut summary = format!("solved on {} nodes, energy {}", u.u.len(), num(u.energy));

    let mut probe_rows = None;
    if let Some(x0) = &cfg.params.point {
        let radii = cfg.params.probe_radii.clone().unwrap_or_else(|| vec![0.4, 0.2, 0.1, 0.05]);
        let coarse = probe_regularity(&prob, &u, x0, &radii)?;
        let (fine_prob, fine_u) = solve_at(2 * cells)?;
        let fine = probe_regularity(&fine_prob, &fine_u, x0, &radii)?;
        let t = ProbeThresholds::default();
        let outcome = assess_probes(&coarse, &fine, t);
        summary = format!(
            "{summary}\nprobe at {x0:?}: {} (thresholds: deviation {} of the data range, refinement factor {})",
            outcome.label(),
            t.relative_deviation,
            t.refinement
        );
        probe_rows = Some((coarse, fine, outcome, t));
    }

    let mut csv = Csv::create(out, "solution.csv", &provenance(cfg, &extra), &["x", "y", "u", "inside"])?;
    let mut x = [0.0; 2];
    for (i, v) in u.u.iter().enumerate() {
        u.grid.coords(i, &mut x);
        csv.row([num(x[0]), num(x[1]), num(*v), u8::from(u.inside[i]).to_string()])?;
    }
    files.push(csv.finish()?);

    if let Some((coarse, fine, outcome, t)) = probe_rows {
        let extra = format!(
            "{extra} probe={:?} coarse_h={h} fine_h={} outcome=\"{}\" thresholds: deviation={} refinement={}",
            coarse.point,
            h / 2.0,
            outcome.label(),
            t.relative_deviation,
            t.refinement
        );
        let header = ["radius", "oscillation_coarse", "deviation_coarse", "oscillation_fine", "deviation_fine"];
        let mut csv = Csv::create(out, "probe.csv", &provenance(cfg, &extra), &header)?;
        for i in 0..coarse.radii.len() {
            csv.row([num(coarse.radii[i]), num(coarse.oscillations[i]), num(coarse.deviations[i]), num(fine.oscillations[i]), num(fine.deviations[i])])?;
        }
        files.push(csv.finish()?);
    }
    Ok(Outcome { files, summary })
}

fn examples(cfg: &JobConfig, out: &Path) -> Result<Outcome, CliError> {
    let which: Vec<ExampleName> = cfg.params.which.map_or_else(|| vec![ExampleName::SparseBalls, ExampleName::ClusteredBalls], |w| vec![w]);
    let mut o = Outcome::default();
    let mut lines = Vec::new();
    for w in which {
        match w {
            ExampleName::SparseBalls => {
                let terms = cfg.params.terms.unwrap_or(30);
                let n = cfg.exponents.n();
                let mut csv = Csv::create(out, "sparse_balls.csv", &provenance(cfg, "sparse balls: dyadic band bounds of the Wiener sum at infinity, normalized by the sphere area"), &["J", "partial_sum", "closed_form"])?;
                let mut last = 0.0;
                for j in 0..=terms {
                    last = families::sparse_balls_upper_series(j, n)?;
                    csv.row([j.to_string(), num(last), num(0.75 * (1.0 - 2f64.powi(-(j as i32))))])?;
                }
                o.files.push(csv.finish()?);
                let verdict = classify_infinity(&Family::SparseBalls.domain(n)?, Exponents::new(n, n as f64)?, &CapacityBackend::without_grid())?;
                lines.push(format!("sparse-balls: partial sum {} at J = {terms} (limit 3/4); p = n: {}", num(last), verdict.class.label()));
            }
            ExampleName::ClusteredBalls => {
                let terms = cfg.params.terms.unwrap_or(30).max(2);
                let mut csv = Csv::create(
                    out,
                    "clustered_balls.csv",
                    &provenance(cfg, "clustered balls at the origin, p = n = 2: half-shell upper sums and full-ball lower sums"),
                    &["J", "half_shell_sum", "ball_lower_sum"],
                )?;
                for j in 1..=terms {
                    csv.row([j.to_string(), num(clustered_shell_bound(j)), num(clustered_ball_lower(j))])?;
                }
                o.files.push(csv.finish()?);
                lines.push(format!(
                    "clustered-balls: half-shell sum {} (convergent), ball lower sum {} at J = {terms} (divergent)",
                    num(clustered_shell_bound(terms)),
                    num(clustered_ball_lower(terms))
                ));
            }
        }
    }
    o.summary = lines.join("\n");
    Ok(o)
}

fn poincare(cfg: &JobConfig, out: &Path) -> Result<Outcome, CliError> {
    let r = cfg.params.radius.unwrap_or(1.0);
    let h = cfg.params.grid_h.unwrap_or(r / 32.0);
    let cells = (2.0 * r / h).ceil() as usize;
    let d = SolveOptions::default();
    let est = poincare_constant_estimate(cfg.exponents, cfg.weight, r, cells, &solve_options(cfg, d.tol, d.max_iter))?;
    let mut csv = Csv::create(out, "poincare.csv", &provenance(cfg, &format!("ball radius={r} h={h}")), &["constant", "quotient", "outer_iterations"])?;
    csv.row([num(est.constant), num(est.quotient), est.outer_iterations.to_string()])?;
    Ok(Outcome { files: vec![csv.finish()?], summary: format!("Poincaré constant estimate {} on B_{r}", num(est.constant)) })
}
