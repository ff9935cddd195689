//! Orchestration of the command-line pipelines.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::carleman::{self, Focus, IdentityQuad, NormQuad};
use crate::config::ExperimentConfig;
use crate::fields::{CoefficientSet, ScalarField};
use crate::forward::{self, GridSpec, Resolution};
use crate::geometry::{self, ConeRegion, DiverseConstruction, SourceEvent};
use crate::inversion::{self, ConeTrace, QMode, StabilitySetup, Theorem};
use crate::io::{sha256_hex, Table};
use crate::quad::{halton_ball, norm, sub, SphereRule};
use crate::transport::RayQuad;
use crate::{Error, Result};

pub const THREADS_ENV: &str = "CONEWAVE_THREADS";
pub const RUN_SCHEMA: &str = "conewave-run/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Forward,
    Traces,
    InvertAb,
    InvertQ,
    Carleman,
    Diverse,
    Identity,
    Stability,
    Psi,
    Validate,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Forward,
        Command::Traces,
        Command::InvertAb,
        Command::InvertQ,
        Command::Carleman,
        Command::Diverse,
        Command::Identity,
        Command::Stability,
        Command::Psi,
        Command::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::Traces => "traces",
            Command::InvertAb => "invert-ab",
            Command::InvertQ => "invert-q",
            Command::Carleman => "carleman",
            Command::Diverse => "diverse",
            Command::Identity => "identity",
            Command::Stability => "stability",
            Command::Psi => "psi",
            Command::Validate => "validate",
        }
    }

    pub fn parse(s: &str) -> Result<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Usage(format!("unknown subcommand {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub resolution: Resolution,
    /// `validate` runs the quick acceptance checks.
    pub deep: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { out: None, threads: None, seed: None, resolution: Resolution::Default, deep: false }
    }
}

/// Result of a run: printable summary lines, files written and whether
/// the deep checks passed.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub checks_passed: bool,
}

/// Thread count: the flag, then the environment, then the machine.
pub fn thread_count(flag: Option<usize>) -> Result<usize> {
    if let Some(k) = flag {
        return if k == 0 { Err(Error::Config("--threads must be positive".into())) } else { Ok(k) };
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(Error::Config(format!("{THREADS_ENV}={s:?} is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    cfg.validate()?;
    let threads = thread_count(opts.threads)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Config(e.to_string()))?;
    let ctx = Ctx {
        cfg,
        seed: opts.seed.unwrap_or(cfg.seed),
        grid: cfg.grid_spec(opts.resolution),
        out: opts.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("conewave-out")),
    };
    let start = Instant::now();
    let mut outcome = pool.install(|| match cmd {
        Command::Forward => ctx.forward(),
        Command::Traces => ctx.traces(),
        Command::InvertAb => ctx.invert_ab(),
        Command::InvertQ => ctx.invert_q(),
        Command::Carleman => ctx.carleman(),
        Command::Diverse => ctx.diverse(),
        Command::Identity => ctx.identity(),
        Command::Stability => ctx.stability(),
        Command::Psi => ctx.psi(),
        Command::Validate => ctx.validate(opts.deep),
    })?;
    if cmd != Command::Validate {
        ctx.write_manifest(cmd, threads, opts.resolution, start.elapsed().as_secs_f64(), &mut outcome)?;
    }
    Ok(outcome)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    grid: GridSpec,
    out: PathBuf,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    schema: &'a str,
    subcommand: &'a str,
    version: &'a str,
    config_sha256: String,
    seed: u64,
    threads: usize,
    resolution: Resolution,
    grid: GridSpec,
    seconds: f64,
    outputs: Vec<(String, String)>,
}

impl Ctx<'_> {
    fn write_table(&self, name: &str, t: Table, out: &mut Outcome) -> Result<()> {
        let path = self.out.join(name);
        t.write(&path)?;
        out.files.push(path);
        Ok(())
    }

    fn write_manifest(&self, cmd: Command, threads: usize, resolution: Resolution, seconds: f64, out: &mut Outcome) -> Result<()> {
        let mut outputs = Vec::new();
        for f in &out.files {
            let hash = if f.is_file() { sha256_hex(&fs::read(f)?) } else { String::new() };
            outputs.push((f.strip_prefix(&self.out).unwrap_or(f).display().to_string(), hash));
        }
        let m = RunManifest {
            schema: RUN_SCHEMA,
            subcommand: cmd.name(),
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: sha256_hex(self.cfg.to_json().as_bytes()),
            seed: self.seed,
            threads,
            resolution,
            grid: self.grid,
            seconds,
            outputs,
        };
        fs::create_dir_all(&self.out)?;
        let text = serde_json::to_string_pretty(&m).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(self.out.join("run.json"), text + "\n")?;
        Ok(())
    }

    fn sources(&self) -> Result<Vec<[f64; 3]>> {
        let s = self.cfg.source_locations()?;
        if s.is_empty() {
            return Err(Error::Config("sources: at least one source location is required".into()));
        }
        Ok(s)
    }

    fn forward(&self) -> Result<Outcome> {
        let cs = self.cfg.coefficient_set()?;
        let ds = forward::forward_map(&cs, &self.sources()?, &self.cfg.taus, &self.grid, self.cfg.expansion_order)?;
        let dir = self.out.join("traces");
        ds.write_dir(&dir)?;
        let rows: usize = ds.sources.iter().map(|s| s.rows.len()).sum();
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        for i in 0..ds.sources.len() {
            out.files.push(dir.join(format!("source_{i}.csv")));
        }
        out.files.push(dir.join("manifest.json"));
        out.lines.push(format!("forward: {} sources, {} taus, {rows} rows, grid n = {}", ds.sources.len(), self.cfg.taus.len(), self.grid.n));
        Ok(out)
    }

    fn traces(&self) -> Result<Outcome> {
        let cs = self.cfg.coefficient_set()?;
        let mut t = Table::new(&["source", "tau", "direction", "w1", "w2", "w3", "r", "t", "u", "v"]);
        for (i, &xi) in self.sources()?.iter().enumerate() {
            for &tau in &self.cfg.taus {
                let Some((dirs, rs)) = cone_layout(self.cfg, xi, tau, self.grid.horizon) else { continue };
                let src = SourceEvent::new(xi, tau);
                let u = forward::cone_trace_u(&cs, src, &dirs, &rs)?;
                let v = forward::cone_trace_v(&cs, src, &dirs, &rs, &RayQuad::default())?;
                for (d, w) in dirs.iter().enumerate() {
                    for (k, &r) in rs.iter().enumerate() {
                        t.push(vec![i as f64, tau, d as f64, w[0], w[1], w[2], r, tau + r, u[d][k], v[d][k]]);
                    }
                }
            }
        }
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        out.lines.push(format!("traces: {} cone samples", t.rows.len()));
        self.write_table("cone_traces.csv", t, &mut out)?;
        Ok(out)
    }

    fn invert_ab(&self) -> Result<Outcome> {
        let cs = self.cfg.coefficient_set()?;
        let locs = self.sources()?;
        let b = cs.bounds();
        let radius = if b.radius.is_finite() && b.radius > 0.0 { b.radius } else { self.cfg.rho };
        let (t_lo, t_hi) = if b.t_lo.is_finite() && b.t_hi.is_finite() { (b.t_lo, b.t_hi) } else { (0.0, self.grid.horizon) };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let points: Vec<([f64; 3], f64)> = halton_ball(self.cfg.ab_points, radius).into_iter().map(|x| (x, rng.gen_range(t_lo..=t_hi))).collect();
        let data = inversion::ab_data_from_alpha(&cs, &locs, &points, 400)?;
        let rec = inversion::recover_ab(&locs, &points, &data, inversion::DEFAULT_CONDITION_THRESHOLD)?;
        let mut t = Table::new(&["x1", "x2", "x3", "t", "a", "b1", "b2", "b3", "a_true", "b1_true", "b2_true", "b3_true", "residual"]);
        let (mut got, mut want) = (Vec::new(), Vec::new());
        for (k, &(x, tt)) in points.iter().enumerate() {
            let v = cs.values(x, tt);
            let row = [rec.a[k], rec.b[k][0], rec.b[k][1], rec.b[k][2]];
            t.push(vec![x[0], x[1], x[2], tt, row[0], row[1], row[2], row[3], v[0], v[1], v[2], v[3], rec.residual[k]]);
            got.push(row.to_vec());
            want.push(v[..4].to_vec());
        }
        let err = inversion::relative_l2(&got, &want);
        let t = t.meta("relative_l2", err).meta("min_singular_value", rec.min_singular_value);
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        out.lines.push(format!("invert-ab: {} points, relative L2 error {err:.3e}, min singular value {:.3e}", points.len(), rec.min_singular_value));
        self.write_table("ab.csv", t, &mut out)?;
        Ok(out)
    }

    fn invert_q(&self) -> Result<Outcome> {
        let cs = self.cfg.coefficient_set()?;
        let other = match (self.cfg.q_mode, &self.cfg.perturbed) {
            (QMode::Relative, Some(p)) => Some(p.build()?),
            (QMode::Relative, None) => return Err(Error::Config("q_mode: relative inversion needs a `perturbed` set".into())),
            _ => None,
        };
        let mut t = Table::new(&["source", "tau", "direction", "r", "t", "q", "q_true"]);
        let rq = RayQuad::default();
        let (mut got, mut want) = (Vec::new(), Vec::new());
        for (i, &xi) in self.sources()?.iter().enumerate() {
            for &tau in &self.cfg.taus {
                let Some((dirs, rs)) = cone_layout(self.cfg, xi, tau, self.grid.horizon) else { continue };
                let src = SourceEvent::new(xi, tau);
                let mut values = forward::cone_trace_v(&cs, src, &dirs, &rs, &rq)?;
                if let Some(o) = &other {
                    let vo = forward::cone_trace_v(o, src, &dirs, &rs, &rq)?;
                    for (a, b) in values.iter_mut().zip(&vo) {
                        for (x, y) in a.iter_mut().zip(b) {
                            *x -= y;
                        }
                    }
                }
                let tr = ConeTrace { xi, tau, dirs, rs, values };
                let q = inversion::recover_q(&tr, &cs, self.cfg.q_mode)?;
                let truth = tr.map_layout(|x, tt| cs.q_value(x, tt) - other.as_ref().map_or(0.0, |o| o.q_value(x, tt)));
                for d in 0..tr.dirs.len() {
                    for (k, &r) in tr.rs.iter().enumerate() {
                        t.push(vec![i as f64, tau, d as f64, r, tau + r, q.values[d][k], truth[d][k]]);
                    }
                }
                got.extend(q.values);
                want.extend(truth);
            }
        }
        let err = inversion::relative_l2(&got, &want);
        let t = t.meta("mode", format!("{:?}", self.cfg.q_mode).to_lowercase()).meta("relative_l2", err);
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        out.lines.push(format!("invert-q: {} cone samples, relative L2 error {err:.3e}", t.rows.len()));
        self.write_table("q.csv", t, &mut out)?;
        Ok(out)
    }

    fn first_cone(&self) -> Result<ConeRegion> {
        let xi = self.sources()?[0];
        let tau = self.cfg.taus[0];
        Ok(ConeRegion::new(SourceEvent::new(xi, tau), self.grid.horizon))
    }

    fn carleman(&self) -> Result<Outcome> {
        let cs = self.cfg.coefficient_set()?;
        let cone = self.first_cone()?;
        let suite = carleman::carleman_suite(&cone, self.seed);
        let res = carleman::carleman_suite_check(&cs, &cone, &suite, &self.cfg.sigmas, &NormQuad::default())?;
        let mut t = Table::new(&["member", "sigma", "ratio"]);
        for (m, (_, rs)) in res.ratios.iter().enumerate() {
            for (k, r) in rs.iter().enumerate() {
                t.push(vec![m as f64, self.cfg.sigmas[k], *r]);
            }
        }
        let names: Vec<&str> = res.ratios.iter().map(|(n, _)| n.as_str()).collect();
        let t = t.meta("members", names.join(" ")).meta("sigma0", res.sigma0).meta("constant", res.constant).meta("violations", res.violations.len());
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        out.lines.push(format!("carleman: {} members, C* = {:.6e} at sigma0 = {}, {} violations", suite.len(), res.constant, res.sigma0, res.violations.len()));
        for (name, s, r) in &res.violations {
            out.lines.push(format!("  {name} at sigma {s}: ratio {r:.6e}"));
        }
        self.write_table("carleman.csv", t, &mut out)?;
        Ok(out)
    }

    fn diverse(&self) -> Result<Outcome> {
        let locs: [[f64; 3]; 4] = match &self.cfg.diverse {
            Some(d) => geometry::construct_diverse(d)?,
            None if self.cfg.sources.len() == 4 => [self.cfg.sources[0], self.cfg.sources[1], self.cfg.sources[2], self.cfg.sources[3]],
            None if self.cfg.sources.is_empty() => geometry::construct_diverse(&DiverseConstruction::Standard { rho: self.cfg.rho, n: 2.0 * self.cfg.rho })?,
            None => return Err(Error::Config(format!("sources: diverse needs exactly 4 locations, got {}", self.cfg.sources.len()))),
        };
        let rep = geometry::is_diverse(&locs, self.cfg.rho, geometry::DEFAULT_DIVERSE_SAMPLES, geometry::DEFAULT_DIVERSE_THRESHOLD)?;
        let mut t = Table::new(&["index", "x1", "x2", "x3"])
            .meta("rho", rep.rho)
            .meta("diverse", rep.diverse)
            .meta("min_abs_det", rep.min_abs_det)
            .meta("min_singular_value", rep.min_singular_value)
            .meta("constant_estimate", rep.constant_estimate);
        for (i, l) in locs.iter().enumerate() {
            t.push(vec![i as f64, l[0], l[1], l[2]]);
        }
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        out.lines.push(format!("diverse: {} (min singular value {:.6e} over {} samples)", rep.diverse, rep.min_singular_value, rep.n_samples));
        if let Some(z) = rep.zero_of_det {
            out.lines.push(format!("  det M vanishes near {z:?}"));
        }
        self.write_table("diverse.csv", t, &mut out)?;
        Ok(out)
    }

    fn identity_field(&self) -> Result<ScalarField> {
        match &self.cfg.field {
            Some(f) => f.build(),
            None => Ok(ScalarField::bump(1.0, [0.0, 0.0, 0.0, 0.5], 0.5, 0.4)),
        }
    }

    fn identity(&self) -> Result<Outcome> {
        let f = self.identity_field()?;
        let xi = self.cfg.source_locations()?.first().copied().unwrap_or([2.0, 0.0, 0.0]);
        let focus = Focus::of(&f);
        let window = identity_window(&focus, xi);
        let mut t = Table::new(&["sigma", "lhs", "rhs", "gap"]);
        let mut worst: f64 = 0.0;
        for &s in &self.cfg.identity_sigmas {
            let r = carleman::tau_integral_identity(&f, xi, s, window, &focus, &IdentityQuad::default())?;
            worst = worst.max(r.gap);
            t.push(vec![s, r.lhs, r.rhs, r.gap]);
        }
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        out.lines.push(format!("identity: {} sigmas, largest relative gap {worst:.3e}", self.cfg.identity_sigmas.len()));
        self.write_table("identity.csv", t, &mut out)?;
        Ok(out)
    }

    fn stability(&self) -> Result<Outcome> {
        let cs = self.cfg.coefficient_set()?;
        let dir = match &self.cfg.direction {
            Some(d) => d.build()?,
            None => return Err(Error::Config("direction: stability needs a perturbation direction".into())),
        };
        let perturbed: Vec<(f64, CoefficientSet)> = self.cfg.amplitudes.iter().map(|&e| (e, perturb(&cs, &dir, e, self.cfg.theorem))).collect();
        let sources = self.sources()?;
        let setup = StabilitySetup {
            theorem: self.cfg.theorem,
            sources,
            taus: self.cfg.taus.clone(),
            grid: self.grid,
            n: self.cfg.expansion_order,
            include_psi: self.cfg.include_psi,
        };
        let rep = inversion::stability_report(&cs, &perturbed, &setup)?;
        let mut t = Table::new(&["amplitude", "lhs", "rhs", "ratio"]).meta("theorem", format!("{:?}", rep.theorem).to_lowercase()).meta("spread", rep.spread());
        for r in &rep.rows {
            t.push(vec![r.amplitude, r.lhs, r.rhs, r.ratio]);
        }
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        out.lines.push(format!("stability: {} amplitudes, ratio spread {:.4}", rep.rows.len(), rep.spread()));
        self.write_table("stability.csv", t, &mut out)?;
        Ok(out)
    }

    fn psi(&self) -> Result<Outcome> {
        let cs = self.cfg.coefficient_set()?;
        let r = forward::solve_psi(&cs, &self.grid)?;
        let mut t = Table::new(&["x1", "x2", "x3", "psi", "psi_t", "psi_tt"]).meta("steps", r.steps).meta("dt", r.dt);
        for (i, x) in self.grid.points().iter().enumerate() {
            t.push(vec![x[0], x[1], x[2], r.w[i], r.w_t[i], r.w_tt[i]]);
        }
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        out.lines.push(format!("psi: {} grid nodes, {} steps", t.rows.len(), r.steps));
        self.write_table("psi.csv", t, &mut out)?;
        Ok(out)
    }

    fn validate(&self, deep: bool) -> Result<Outcome> {
        let mut out = Outcome { checks_passed: true, ..Default::default() };
        out.lines.push("validate: configuration is well formed".into());
        if !deep {
            return Ok(out);
        }
        for (name, value, tol) in deep_checks()? {
            let pass = value < tol;
            out.checks_passed &= pass;
            out.lines.push(format!("{} {name}: {value:.3e} (tolerance {tol:.0e})", if pass { "PASS" } else { "FAIL" }));
        }
        Ok(out)
    }
}

/// Radii and directions sampling the part of the cone through (xi, tau)
/// that meets the coefficient ball, below the horizon.
fn cone_layout(cfg: &ExperimentConfig, xi: [f64; 3], tau: f64, horizon: f64) -> Option<(Vec<[f64; 3]>, Vec<f64>)> {
    let radius = cfg.coefficient_radius();
    let d = norm(xi);
    let r_hi = (d + radius).min(horizon - tau);
    let r_lo = (d - radius).max(1e-2 * radius);
    if r_hi <= r_lo {
        return None;
    }
    let c = &cfg.cone;
    let dirs = if d > radius {
        SphereRule::cap([-xi[0] / d, -xi[1] / d, -xi[2] / d], (radius / d).asin(), c.n_theta, c.n_phi).dirs
    } else {
        SphereRule::product(c.n_theta).dirs
    };
    let rs = (0..c.n_r).map(|k| r_lo + (r_hi - r_lo) * k as f64 / (c.n_r - 1) as f64).collect();
    Some((dirs, rs))
}

/// A tau window containing every cone that meets the support.
pub fn identity_window(focus: &Focus, xi: [f64; 3]) -> (f64, f64) {
    let d = norm(sub(focus.center, xi));
    (focus.t_lo - d - focus.radius - 0.1, focus.t_hi - (d - focus.radius) + 0.1)
}

/// cs + e dir. In ab mode c is adjusted so q stays fixed.
pub fn perturb(cs: &CoefficientSet, dir: &CoefficientSet, e: f64, theorem: Theorem) -> CoefficientSet {
    let a = cs.a.add(&dir.a.scale(e));
    let b = [cs.b[0].add(&dir.b[0].scale(e)), cs.b[1].add(&dir.b[1].scale(e)), cs.b[2].add(&dir.b[2].scale(e))];
    match theorem {
        Theorem::Ab => inversion::with_q_preserved(cs, a, b),
        _ => CoefficientSet::new(a, b, cs.c.add(&dir.c.scale(e))),
    }
}

/// Quick versions of the acceptance checks: (name, measured, tolerance).
pub fn deep_checks() -> Result<Vec<(&'static str, f64, f64)>> {
    let mut out = Vec::new();
    let locs = geometry::construct_diverse(&DiverseConstruction::Standard { rho: 1.0, n: 2.0 })?;
    let rep = geometry::is_diverse(&locs, 1.0, 1024, geometry::DEFAULT_DIVERSE_THRESHOLD)?;
    out.push(("diverse standard set 1/min singular value", 1.0 / rep.min_singular_value, 1e3));

    let f = ScalarField::bump(1.0, [0.0, 0.0, 0.0, 0.5], 0.5, 0.4);
    let focus = Focus::of(&f);
    let xi = [2.0, 0.0, 0.0];
    let r = carleman::tau_integral_identity(&f, xi, 0.0, identity_window(&focus, xi), &focus, &IdentityQuad::default())?;
    out.push(("tau identity relative gap", r.gap, 1e-2));

    let cs = CoefficientSet::new(
        ScalarField::bump(0.3, [0.1, 0.0, 0.0, 0.5], 0.6, 0.4),
        [ScalarField::bump(0.2, [0.0, 0.1, 0.0, 0.5], 0.5, 0.4), ScalarField::zero(), ScalarField::zero()],
        ScalarField::zero(),
    );
    let pts: Vec<([f64; 3], f64)> = halton_ball(8, 0.5).into_iter().map(|x| (x, 0.5)).collect();
    let data = inversion::ab_data_from_alpha(&cs, &locs, &pts, 400)?;
    let rec = inversion::recover_ab(&locs, &pts, &data, inversion::DEFAULT_CONDITION_THRESHOLD)?;
    let got: Vec<Vec<f64>> = (0..pts.len()).map(|k| vec![rec.a[k], rec.b[k][0], rec.b[k][1], rec.b[k][2]]).collect();
    let want: Vec<Vec<f64>> = pts.iter().map(|&(x, t)| cs.values(x, t)[..4].to_vec()).collect();
    out.push(("(a, b) recovery relative L2", inversion::relative_l2(&got, &want), 1e-3));

    let grid = GridSpec::for_support(0.6, 1.0, 12);
    let late = forward::forward_u(&cs, SourceEvent::new(locs[0], 1.0 + 1.0 - norm(locs[0]) + 0.1), 0, &grid)?;
    out.push(("late source trace magnitude", late.f.iter().fold(0.0, |m: f64, v| m.max(v.abs())), 1e-8));
    Ok(out)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p)?;
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcommand_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(Command::parse(c.name()).unwrap(), c);
        }
        assert!(matches!(Command::parse("invert"), Err(Error::Usage(_))));
    }

    #[test]
    fn explicit_thread_flag_wins() {
        assert_eq!(thread_count(Some(3)).unwrap(), 3);
        assert!(thread_count(Some(0)).is_err());
    }

    #[test]
    fn validate_does_no_compute() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions { out: Some(dir.path().join("o")), ..Default::default() };
        let o = run(Command::Validate, &ExperimentConfig::minimal(), &opts).unwrap();
        assert!(o.checks_passed && o.files.is_empty());
        assert!(!dir.path().join("o").exists());
    }

    #[test]
    fn diverse_standard_set_is_certified() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::minimal();
        cfg.diverse = Some(DiverseConstruction::Standard { rho: 1.0, n: 2.0 });
        let opts = RunOptions { out: Some(dir.path().to_path_buf()), threads: Some(1), ..Default::default() };
        let o = run(Command::Diverse, &cfg, &opts).unwrap();
        assert!(o.lines[0].starts_with("diverse: true"), "{:?}", o.lines);
        let t = Table::read(&dir.path().join("diverse.csv")).unwrap();
        assert_eq!(t.get_meta("diverse"), Some("true"));
        assert!(dir.path().join("run.json").is_file());
    }
}
