use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use mems_extremal::branch::{
    check_pointwise_bounds, continue_branch, estimate_lambda_star, minimal_solution, SolverConfig,
};
use mems_extremal::certificate::{
    certify, empirical_p0, run_table1, CertificateReport, SubsolutionSpec, Verdict, DEFAULT_GRID,
    EDGE_CUTOFF, P0_CANDIDATES,
};
use mems_extremal::constants::{
    critical_exponents, hn, k0, BoundaryPair, CriticalValue, ProblemParams,
};
use mems_extremal::mesh::Mesh;
use mems_extremal::report::{to_csv_string, to_json_string, Cell, RunManifest};
use mems_extremal::stability::{hardy_rellich_gap, mu1, weighted_hardy_gap};
use mems_extremal::Error;

#[derive(Debug, Parser, Serialize)]
#[command(name = "mems-extremal", version, about = "Radial MEMS biharmonic model: branches, stability, certificates")]
struct Cli {
    /// Number of radial cells.
    #[arg(long, global = true, default_value_t = 256)]
    mesh: usize,
    /// Worker threads for branch and table evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write outputs and manifest.json here instead of stdout/stderr.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Problem constants: K0, H_n, critical exponents.
    Constants(ConstantsArgs),
    /// Trace the solution branch by amplitude continuation.
    Branch(BranchArgs),
    /// Stability eigenvalue of the minimal solution at a given lambda.
    Mu1(Mu1Args),
    /// Discrete Hardy-Rellich gaps under mesh refinement.
    Hardy(HardyArgs),
    /// Singularity certificate for one sub-solution candidate.
    Certify(CertifyArgs),
    /// Certificates for dimensions 13..31 with the tabulated pairs.
    Table1(Table1Args),
}

#[derive(Debug, Args, Serialize)]
struct ConstantsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Boundary value u(1) for the admissibility helper.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    bc_alpha: f64,
    /// Boundary slope u'(1) for the admissibility helper.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    bc_gamma: f64,
}

#[derive(Debug, Args, Serialize)]
struct BranchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.01)]
    a_min: f64,
    #[arg(long, default_value_t = 0.99)]
    a_max: f64,
    #[arg(long, default_value_t = 99)]
    steps: usize,
    /// Skip the stability eigenvalue at each point.
    #[arg(long)]
    no_mu1: bool,
}

#[derive(Debug, Args, Serialize)]
struct Mu1Args {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Absolute parameter value.
    #[arg(long, allow_negative_numbers = true, required_unless_present = "lambda_k0", conflicts_with = "lambda_k0")]
    lambda: Option<f64>,
    /// Parameter in K0 units; accepts `e2`, `Hn/p` and sums.
    #[arg(long, allow_negative_numbers = true)]
    lambda_k0: Option<Sym>,
    /// Also write the eigenfunction as eigenfunction.csv (needs --out-dir).
    #[arg(long)]
    eigenfunction: bool,
}

#[derive(Debug, Args, Serialize)]
struct HardyArgs {
    #[arg(long)]
    n: usize,
    /// Coefficient as a multiple of H_n.
    #[arg(long, default_value_t = 1.0, conflicts_with = "coefficient")]
    scale: f64,
    /// Absolute coefficient of the r^-4 term.
    #[arg(long)]
    coefficient: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct CertifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3.5)]
    m: f64,
    #[arg(long)]
    p: f64,
    /// In K0 units; accepts `e2`, `Hn/p` and sums such as `e2+0.01`.
    #[arg(long, allow_negative_numbers = true)]
    lambda_prime: Sym,
    /// In K0 units; same syntax as --lambda-prime.
    #[arg(long, allow_negative_numbers = true)]
    beta: Sym,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

#[derive(Debug, Args, Serialize)]
struct Table1Args {
    #[arg(long, default_value_t = 250.0)]
    p: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Also report the smallest p in {2, 5, 10, 25, 50, 100, 250} at which
    /// every row certifies.
    #[arg(long)]
    p0_sweep: bool,
}

/// A sum of numbers and the symbols `e2` (= exp 2) and `Hn/p` (= H_n/(pK0)).
#[derive(Debug, Clone, PartialEq)]
struct Sym {
    text: String,
    terms: Vec<(f64, Atom)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Atom {
    Num(f64),
    E2,
    HnOverP,
}

impl FromStr for Sym {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty value".into());
        }
        let chars: Vec<char> = s.chars().collect();
        let mut pieces = Vec::new();
        let mut start = 0;
        for i in 1..chars.len() {
            let c = chars[i];
            if c != '+' && c != '-' {
                continue;
            }
            // keep exponents such as 1e-3 together
            let exponent = matches!(chars[i - 1], 'e' | 'E') && i >= 2 && (chars[i - 2].is_ascii_digit() || chars[i - 2] == '.');
            if !exponent {
                pieces.push(chars[start..i].iter().collect::<String>());
                start = i;
            }
        }
        pieces.push(chars[start..].iter().collect());
        let mut terms = Vec::new();
        for piece in pieces {
            let piece = piece.trim();
            let (sign, body) = match piece.strip_prefix('-') {
                Some(rest) => (-1.0, rest.trim()),
                None => (1.0, piece.strip_prefix('+').unwrap_or(piece).trim()),
            };
            let atom = match body {
                "e2" => Atom::E2,
                "Hn/p" => Atom::HnOverP,
                other => Atom::Num(
                    other
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| format!("cannot parse `{other}` (expected a number, `e2` or `Hn/p`)"))?,
                ),
            };
            terms.push((sign, atom));
        }
        Ok(Sym { text: s.to_string(), terms })
    }
}

impl Sym {
    /// Value in K0 units.
    fn eval(&self, params: &ProblemParams) -> f64 {
        self.terms
            .iter()
            .map(|&(sign, atom)| {
                sign * match atom {
                    Atom::Num(v) => v,
                    Atom::E2 => 2f64.exp(),
                    Atom::HnOverP => hn(params.n()) / (params.p() * k0(params)),
                }
            })
            .sum()
    }
}

impl Serialize for Sym {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::Parse(_) | Error::BoundaryMismatch { .. } => 2,
        Error::NoConvergence { .. }
        | Error::MonotonicityViolated { .. }
        | Error::NewtonDiverged(_)
        | Error::ContinuationFailed { .. } => 3,
        Error::EigenNonConvergence { .. } | Error::NotPositiveDefinite { .. } => 4,
        _ => 1,
    }
}

/// Where results go: files under `--out-dir`, or stdout.
struct Sink {
    out_dir: Option<PathBuf>,
    manifest: RunManifest,
}

impl Sink {
    fn emit(&mut self, name: &str, contents: &str, primary: bool) -> mems_extremal::Result<()> {
        match &self.out_dir {
            Some(dir) => {
                let dir = dir.clone();
                self.manifest.write_output(&dir, name, contents)?;
            }
            None if primary => print!("{contents}"),
            None => {}
        }
        Ok(())
    }
}

fn params(n: usize, p: f64) -> mems_extremal::Result<ProblemParams> {
    ProblemParams::new(n, p)
}

fn critical_json(v: CriticalValue) -> Value {
    v.value().map_or(Value::Null, |x| json!(x))
}

fn cmd_constants(a: &ConstantsArgs, sink: &mut Sink, format: Format) -> mems_extremal::Result<()> {
    let pp = params(a.n, a.p)?;
    let crit = critical_exponents(a.n)?;
    let undefined = |v: CriticalValue| match v {
        CriticalValue::Undefined(r) => json!(format!("{r:?}")),
        CriticalValue::Defined(_) => Value::Null,
    };
    let bc = BoundaryPair::new(a.bc_alpha, a.bc_gamma);
    let out = json!({
        "n": a.n,
        "p": a.p,
        "K0": k0(&pp),
        "H_n": hn(a.n),
        "p_c": critical_json(crit.p_c),
        "p_c_plus": critical_json(crit.p_c_plus),
        "p_c_undefined": undefined(crit.p_c),
        "p_c_plus_undefined": undefined(crit.p_c_plus),
        "alpha": pp.alpha(),
        "c0_exponent": 1.0 / (a.p + 1.0),
        "boundary_alpha": bc.alpha,
        "boundary_gamma": bc.gamma,
        "boundary_admissible": bc.is_admissible(),
    });
    match format {
        Format::Json => sink.emit("constants.json", &to_json_string(&out)?, true),
        Format::Csv => {
            let obj = out.as_object().expect("object");
            let header: Vec<&str> = obj.keys().map(String::as_str).collect();
            let row: Vec<Cell> = obj.values().map(json_cell).collect();
            sink.emit("constants.csv", &to_csv_string(&header, &[row]), true)
        }
    }
}

fn json_cell(v: &Value) -> Cell {
    match v {
        Value::Null => Cell::Empty,
        Value::Bool(b) => Cell::Bool(*b),
        Value::Number(n) if n.is_f64() => Cell::Num(n.as_f64().unwrap()),
        Value::Number(n) => n.as_i64().map_or(Cell::Empty, Cell::Int),
        Value::String(s) => Cell::Text(s.clone()),
        other => Cell::Text(other.to_string()),
    }
}

fn amplitude_grid(a: &BranchArgs) -> mems_extremal::Result<Vec<f64>> {
    if a.steps == 0 {
        return Err(Error::InvalidParameter("--steps must be at least 1".into()));
    }
    if !(a.a_min > 0.0 && a.a_min < a.a_max && a.a_max < 1.0) {
        return Err(Error::InvalidParameter("need 0 < a-min < a-max < 1".into()));
    }
    if a.steps == 1 {
        return Ok(vec![a.a_min]);
    }
    let d = (a.a_max - a.a_min) / (a.steps - 1) as f64;
    Ok((0..a.steps)
        .map(|i| if i + 1 == a.steps { a.a_max } else { a.a_min + d * i as f64 })
        .collect())
}

fn cmd_branch(a: &BranchArgs, mesh: usize, sink: &mut Sink, format: Format) -> mems_extremal::Result<()> {
    let pp = params(a.n, a.p)?;
    let grid = amplitude_grid(a)?;
    let config = SolverConfig { compute_mu1: !a.no_mu1, ..SolverConfig::default() }.with_mesh(mesh);
    let diagram = continue_branch(&pp, &grid, &config)?;
    let est = estimate_lambda_star(&diagram);
    let k = est.k0;

    let header = ["a", "lambda", "lambda_over_K0", "u_max", "mu1", "e_bilap", "e_pot", "fold_flag"];
    let rows: Vec<Vec<Cell>> = diagram
        .points
        .iter()
        .map(|pt| {
            vec![
                pt.a.into(),
                pt.lambda.into(),
                (pt.lambda / k).into(),
                pt.u_max().into(),
                pt.mu1.into(),
                pt.energy_bilap.into(),
                pt.energy_pot.into(),
                pt.fold_flag.into(),
            ]
        })
        .collect();
    let points: Vec<Value> = diagram
        .points
        .iter()
        .map(|pt| {
            json!({
                "a": pt.a,
                "lambda": pt.lambda,
                "lambda_over_K0": pt.lambda / k,
                "u_max": pt.u_max(),
                "mu1": pt.mu1,
                "e_bilap": pt.energy_bilap,
                "e_pot": pt.energy_pot,
                "fold_flag": pt.fold_flag,
            })
        })
        .collect();

    let fold = diagram.fold_point().map(|f| {
        json!({"a": f.a, "lambda": f.lambda, "lambda_over_K0": f.lambda / k, "u_max": f.u_max(), "mu1": f.mu1})
    });
    let last = diagram.minimal_segment().last().expect("nonempty branch");
    let bounds = check_pointwise_bounds(&last.u, &pp, est.lambda_star_lower)?;
    let (e_bilap_max, e_pot_max) = diagram.energy_max();
    let summary = json!({
        "n": a.n,
        "p": a.p,
        "mesh_cells": diagram.mesh_cells,
        "K0": k,
        "lambda_star_lower": est.lambda_star_lower,
        "lambda_star_lower_over_K0": est.lambda_star_lower_k0,
        "lambda_star_above_K0": if est.exceeds_k0 { "pass" } else { "fail" },
        "fold": fold,
        "resolution_limit": est.resolution_limit,
        "requested": diagram.requested,
        "retained": diagram.retained,
        "energy_bilap_max": e_bilap_max,
        "energy_pot_max": e_pot_max,
        "bounds_amplitude": last.a,
        "bounds": bounds,
        "config": config,
    });
    let csv = to_csv_string(&header, &rows);
    let mut report = summary.clone();
    report["points"] = Value::Array(points);
    let report = to_json_string(&report)?;
    let summary = to_json_string(&summary)?;
    if sink.out_dir.is_some() {
        sink.emit("branch.csv", &csv, true)?;
        sink.emit("branch.json", &report, true)?;
        sink.emit("summary.json", &summary, true)
    } else {
        match format {
            Format::Csv => sink.emit("branch.csv", &csv, true),
            Format::Json => sink.emit("summary.json", &summary, true),
        }
    }
}

fn cmd_mu1(a: &Mu1Args, mesh: usize, sink: &mut Sink, format: Format) -> mems_extremal::Result<()> {
    let pp = params(a.n, a.p)?;
    let lambda = match (&a.lambda, &a.lambda_k0) {
        (Some(l), _) => *l,
        (None, Some(s)) => s.eval(&pp) * k0(&pp),
        (None, None) => return Err(Error::InvalidParameter("--lambda or --lambda-k0 is required".into())),
    };
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
    }
    let config = SolverConfig::default().with_mesh(mesh);
    let sol = minimal_solution(&pp, lambda, &config)?;
    let eig = mu1(&sol.u, &pp, lambda)?;
    let summary = eig.summary();
    let out = json!({
        "n": a.n,
        "p": a.p,
        "lambda": lambda,
        "lambda_over_K0": lambda / k0(&pp),
        "u_max": sol.u.max(),
        "newton_iterations": sol.iterations,
        "mu1": summary.mu1,
        "iterations": summary.iterations,
        "residual": summary.residual,
        "mesh_cells": summary.mesh_cells,
    });
    match format {
        Format::Json => sink.emit("mu1.json", &to_json_string(&out)?, true)?,
        Format::Csv => {
            let obj = out.as_object().expect("object");
            let header: Vec<&str> = obj.keys().map(String::as_str).collect();
            let row: Vec<Cell> = obj.values().map(json_cell).collect();
            sink.emit("mu1.csv", &to_csv_string(&header, &[row]), true)?
        }
    }
    if a.eigenfunction {
        let mut buf = Vec::new();
        eig.eigenfunction.write_csv(&mut buf)?;
        sink.emit("eigenfunction.csv", &String::from_utf8(buf).expect("utf-8"), false)?;
    }
    Ok(())
}

fn cmd_hardy(a: &HardyArgs, mesh: usize, sink: &mut Sink, format: Format) -> mems_extremal::Result<()> {
    let coefficient = a.coefficient.unwrap_or(a.scale * hn(a.n));
    let sweep = [mesh / 2, mesh, 2 * mesh];
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for &cells in &sweep {
        let m = Mesh::new(cells, a.n)?;
        let gap = hardy_rellich_gap(a.n, coefficient, &m)?;
        let weighted = weighted_hardy_gap(a.n, &m)?;
        gaps.push(gap);
        rows.push((cells, gap, weighted));
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let out = json!({
        "n": a.n,
        "H_n": hn(a.n),
        "coefficient": coefficient,
        "scale": coefficient / hn(a.n),
        "sweep": rows.iter().map(|(c, g, w)| json!({"mesh_cells": c, "gap": g, "weighted_gap": w})).collect::<Vec<_>>(),
        "min_gap": min_gap,
        "gap_nonnegative": min_gap >= -1e-6,
        "gap_decreasing": decreasing,
    });
    match format {
        Format::Json => sink.emit("hardy.json", &to_json_string(&out)?, true),
        Format::Csv => {
            let rows: Vec<Vec<Cell>> =
                rows.iter().map(|&(c, g, w)| vec![c.into(), coefficient.into(), g.into(), w.into()]).collect();
            sink.emit("hardy.csv", &to_csv_string(&["mesh_cells", "coefficient", "gap", "weighted_gap"], &rows), true)
        }
    }
}

const CERT_HEADER: [&str; 10] = [
    "n",
    "m",
    "p",
    "lambda_prime_K0",
    "beta_K0",
    "sup_h",
    "x_star",
    "subsolution_margin",
    "stability_margin",
    "verdict",
];

fn cert_row(r: &CertificateReport) -> Vec<Cell> {
    vec![
        r.n.into(),
        r.m.into(),
        r.p.into(),
        r.lambda_prime.into(),
        r.beta.into(),
        r.sup_h.into(),
        r.x_star.into(),
        r.subsolution_margin.into(),
        r.stability_margin.into(),
        r.verdict.as_str().into(),
    ]
}

fn cmd_certify(a: &CertifyArgs, sink: &mut Sink, format: Format) -> mems_extremal::Result<()> {
    let pp = params(a.n, a.p)?;
    let spec = SubsolutionSpec::new(a.m, pp)?;
    let report = certify(&spec, a.lambda_prime.eval(&pp), a.beta.eval(&pp), a.grid)?;
    let mut out = serde_json::to_value(&report).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(obj) = out.as_object_mut() {
        obj.remove("lambda_star_upper_k0");
    }
    out["lambda_star_upper_K0"] = json!(report.lambda_star_upper_k0);
    out["edge_cutoff"] = json!(EDGE_CUTOFF);
    out["lambda_prime_input"] = json!(a.lambda_prime.text);
    out["beta_input"] = json!(a.beta.text);
    let json = to_json_string(&out)?;
    let csv = to_csv_string(&CERT_HEADER, &[cert_row(&report)]);
    if sink.out_dir.is_some() {
        sink.emit("certificate.json", &json, true)?;
        sink.emit("certificate.csv", &csv, true)
    } else {
        match format {
            Format::Json => sink.emit("certificate.json", &json, true),
            Format::Csv => sink.emit("certificate.csv", &csv, true),
        }
    }
}

fn cmd_table1(a: &Table1Args, sink: &mut Sink, format: Format) -> mems_extremal::Result<()> {
    let rows = run_table1(a.p, a.grid)?;
    let all = rows.iter().all(|r| r.verdict == Verdict::SingularCertified);
    let p0 = if a.p0_sweep { Some(empirical_p0(&P0_CANDIDATES, a.grid)?) } else { None };
    let mut out = json!({
        "p": a.p,
        "m": rows.first().map(|r| r.m),
        "grid_size": a.grid,
        "edge_cutoff": EDGE_CUTOFF,
        "all_singular_certified": all,
        "rows": rows,
    });
    if let Some(p0) = p0 {
        out["p0_candidates"] = json!(P0_CANDIDATES);
        out["empirical_p0"] = json!(p0);
    }
    let json = to_json_string(&out)?;
    let csv = to_csv_string(&CERT_HEADER, &rows.iter().map(cert_row).collect::<Vec<_>>());
    if sink.out_dir.is_some() {
        sink.emit("table1.csv", &csv, true)?;
        sink.emit("table1.json", &json, true)
    } else {
        match format {
            Format::Json => sink.emit("table1.json", &json, true),
            Format::Csv => sink.emit("table1.csv", &csv, true),
        }
    }
}

fn run(cli: &Cli, sink: &mut Sink) -> mems_extremal::Result<()> {
    match &cli.command {
        Command::Constants(a) => cmd_constants(a, sink, cli.format),
        Command::Branch(a) => cmd_branch(a, cli.mesh, sink, cli.format),
        Command::Mu1(a) => cmd_mu1(a, cli.mesh, sink, cli.format),
        Command::Hardy(a) => cmd_hardy(a, cli.mesh, sink, cli.format),
        Command::Certify(a) => cmd_certify(a, sink, cli.format),
        Command::Table1(a) => cmd_table1(a, sink, cli.format),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let name = match &cli.command {
        Command::Constants(_) => "constants",
        Command::Branch(_) => "branch",
        Command::Mu1(_) => "mu1",
        Command::Hardy(_) => "hardy",
        Command::Certify(_) => "certify",
        Command::Table1(_) => "table1",
    };
    let parameters = serde_json::to_value(&cli).unwrap_or(Value::Null);
    let mut sink = Sink { out_dir: cli.out_dir.clone(), manifest: RunManifest::new(name, parameters, cli.mesh) };
    let start = Instant::now();
    let result = run(&cli, &mut sink);
    sink.manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e)
        }
    };
    let manifest = match to_json_string(&sink.manifest) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match &cli.out_dir {
        Some(dir) => {
            if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("manifest.json"), manifest)) {
                eprintln!("error: cannot write manifest: {e}");
                return ExitCode::from(1);
            }
        }
        None => eprint!("{manifest}"),
    }
    ExitCode::from(code)
}
