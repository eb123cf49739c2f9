//! Command-line front end.
//!
//! Every subcommand is a pure function of its flags. JSON artifacts carry a
//! `config` object with the version, seed and tolerances in effect; the
//! worker count is deliberately left out because it never changes results.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use trirg::action::{
    action_matrix, assemble_subdivided, cotangent_action, fixed_point_residual, integrate_out_center,
    interpolant_energy, projective_residual, quadrature_energy, rg_step, ActionFamily, ResidualReport,
};
use trirg::expr::Expr;
use trirg::schur_oracle::{verify_hierarchical, SCHUR_MAX_LEVELS, SINGULAR_RATIO};
use trirg::shape_space::{
    cot_from_angles, cot_from_coords, flatness, from_halfplane, to_halfplane, to_minkowski, CotangentVector,
    HalfPlanePoint, DEGENERATE_AREA_RATIO, IDENTITY_TOL_SCALE,
};
use trirg::subdivision::{build_mesh, random_flow, write_flow_csv, MAX_LEVELS};
use trirg::{Error, VERSION};

#[derive(Parser, Debug)]
#[command(name = "trirg", version, about = "Centroid-subdivision renormalization of a Gaussian field on triangles")]
struct Cli {
    /// Seed for every random stream (sample i uses PCG32 stream (seed, i)).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for batch work; 0 uses all cores. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cotangents, half-plane point, Minkowski vector and flatness of a triangle.
    Shape(ShapeArgs),
    /// Write a hierarchical mesh as JSON.
    Subdivide(SubdivideArgs),
    /// Flatness statistics of random subdivision walks, as CSV.
    Flow(FlowArgs),
    /// Decimation map on action families.
    #[command(subcommand)]
    Rg(RgCommand),
    /// Eliminate all interior vertices of a mesh and compare with the root action.
    Schur(SchurArgs),
    /// Energy of a linear interpolant by the cotangent formula, the metric formula and quadrature.
    Energy(EnergyArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct TriangleSpec {
    /// Vertex coordinates x0,y0,x1,y1,x2,y2.
    #[arg(long, value_parser = list::<6>, allow_hyphen_values = true)]
    coords: Option<[f64; 6]>,
    /// Angles at vertices 0,1,2 in degrees.
    #[arg(long, value_parser = list::<3>)]
    angles: Option<[f64; 3]>,
    /// Half-plane point re,im (vertex 0 with vertex 1 at 0 and vertex 2 at 1).
    #[arg(long, value_parser = list::<2>, allow_hyphen_values = true)]
    z: Option<[f64; 2]>,
    /// Cotangents a0,a1,a2.
    #[arg(long, value_parser = list::<3>, allow_hyphen_values = true)]
    a: Option<[f64; 3]>,
}

#[derive(Args, Debug)]
struct ShapeArgs {
    #[command(flatten)]
    triangle: TriangleSpec,
    /// Scale of the cotangent-identity tolerance, scale * max(1, flatness^2).
    #[arg(long, default_value_t = IDENTITY_TOL_SCALE)]
    identity_tol: f64,
}

#[derive(Args, Debug)]
struct SubdivideArgs {
    #[arg(long, value_parser = list::<2>, allow_hyphen_values = true, default_value = "0.5,0.8660254037844386")]
    z: [f64; 2],
    #[arg(long)]
    levels: usize,
    #[arg(long, default_value_t = MAX_LEVELS)]
    max_levels: usize,
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[arg(long, value_parser = list::<2>, allow_hyphen_values = true, default_value = "0.5,0.8660254037844386")]
    z: [f64; 2],
    #[arg(long)]
    steps: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyKind {
    Cotangent,
    Constant,
    Custom,
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value = "cotangent")]
    family: FamilyKind,
    /// P as an expression in a0, a1, a2 (constant family: a number, default 0.5).
    #[arg(long = "P", allow_hyphen_values = true)]
    p: Option<String>,
    /// Q as an expression in a0, a1, a2 (constant family: a number, default -0.5).
    #[arg(long = "Q", allow_hyphen_values = true)]
    q: Option<String>,
}

#[derive(Subcommand, Debug)]
enum RgCommand {
    /// One decimation step at a single shape.
    Step {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        triangle: TriangleSpec,
    },
    /// Residual of (P̃, Q̃) against (P, Q) over random shapes.
    FixedPoint(BatchArgs),
    /// Residual after the best scale factor λ.
    Projective(BatchArgs),
}

#[derive(Args, Debug)]
struct BatchArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 1000)]
    samples: u64,
}

#[derive(Args, Debug)]
struct SchurArgs {
    #[arg(long, value_parser = list::<2>, allow_hyphen_values = true, default_value = "0.5,0.8660254037844386")]
    z: [f64; 2],
    #[arg(long)]
    levels: usize,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = SCHUR_MAX_LEVELS)]
    max_levels: usize,
    /// Record wall-clock time (makes the artifact run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct EnergyArgs {
    #[arg(long, value_parser = list::<6>, allow_hyphen_values = true)]
    coords: [f64; 6],
    #[arg(long, value_parser = list::<3>, allow_hyphen_values = true)]
    phi: [f64; 3],
    /// Subdivisions per side for the quadrature.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    quad_n: u64,
}

fn list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<Vec<f64>, String>>()?;
    let n = v.len();
    v.try_into().map_err(|_| format!("expected {N} comma-separated numbers, got {n}"))
}

enum Artifact {
    Json(Value),
    /// CSV body and the configuration to report alongside it.
    Csv(Vec<u8>, Value),
}

enum Failure {
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn config(cli: &Cli, extra: Value) -> Value {
    let mut c = json!({
        "version": VERSION,
        "seed": cli.seed,
        "tolerances": {
            "identity_tol_scale": IDENTITY_TOL_SCALE,
            "degenerate_area_ratio": DEGENERATE_AREA_RATIO,
            "singular_ratio": SINGULAR_RATIO,
        },
    });
    if let (Some(obj), Value::Object(more)) = (c.as_object_mut(), extra) {
        obj.extend(more);
    }
    c
}

fn halfplane(v: &[f64]) -> Result<HalfPlanePoint, Error> {
    HalfPlanePoint::new(v[0], v[1])
}

fn triangle_shape(t: &TriangleSpec, tol: f64) -> Result<CotangentVector, Error> {
    if let Some(c) = &t.coords {
        return cot_from_coords([c[0], c[1]], [c[2], c[3]], [c[4], c[5]]);
    }
    if let Some(d) = &t.angles {
        return cot_from_angles(d[0].to_radians(), d[1].to_radians(), d[2].to_radians());
    }
    if let Some(z) = &t.z {
        return from_halfplane(halfplane(z)?);
    }
    let a = t.a.as_ref().expect("clap enforces one triangle flag");
    CotangentVector::with_tolerance([a[0], a[1], a[2]], tol)
}

fn family(args: &FamilyArgs) -> Result<ActionFamily, Error> {
    let parse = |s: &Option<String>, default: &str| Expr::parse(s.as_deref().unwrap_or(default));
    match args.family {
        FamilyKind::Cotangent => {
            if args.p.is_some() || args.q.is_some() {
                return Err(Error::InvalidArgument("--P/--Q are only accepted with --family constant or custom".into()));
            }
            Ok(ActionFamily::cotangent())
        }
        FamilyKind::Constant => {
            let (pe, qe) = (parse(&args.p, "0.5")?, parse(&args.q, "-0.5")?);
            let (p, q) = (pe.eval(&[0.0; 3]), qe.eval(&[0.0; 3]));
            if pe.eval(&[1.0, 2.0, 3.0]) != p || qe.eval(&[1.0, 2.0, 3.0]) != q {
                return Err(Error::InvalidArgument("constant family needs expressions free of a0, a1, a2".into()));
            }
            Ok(ActionFamily::constant(p, q))
        }
        FamilyKind::Custom => match (&args.p, &args.q) {
            (Some(p), Some(q)) => Ok(ActionFamily::from_exprs("custom", Expr::parse(p)?, Expr::parse(q)?)),
            _ => Err(Error::InvalidArgument("--family custom needs both --P and --Q".into())),
        },
    }
}

fn family_json(args: &FamilyArgs, fam: &ActionFamily) -> Value {
    let mut v = json!({ "name": fam.name() });
    if matches!(args.family, FamilyKind::Constant | FamilyKind::Custom) {
        v["P"] = json!(args.p.clone().unwrap_or_else(|| "0.5".into()));
        v["Q"] = json!(args.q.clone().unwrap_or_else(|| "-0.5".into()));
    }
    v
}

fn shape_report(a: &CotangentVector) -> Value {
    let z = to_halfplane(a);
    let p = to_minkowski(a);
    json!({
        "cotangents": a.as_array(),
        "z": [z.re, z.im],
        "minkowski": [p.p0, p.p1, p.p2],
        "flatness": flatness(a),
        "identity_residual": a.identity_residual(),
    })
}

fn residual_json(r: &ResidualReport, args: &FamilyArgs, fam: &ActionFamily, seed: u64) -> Value {
    let mut v = serde_json::to_value(r).expect("report serializes");
    v["family"] = family_json(args, fam);
    if matches!(args.family, FamilyKind::Custom) {
        v["tau_symmetry_defect"] = json!(fam.tau_symmetry_defect(r.samples, seed));
    }
    v
}

fn run(cli: &Cli) -> Result<Artifact, Failure> {
    let artifact = match &cli.command {
        Command::Shape(args) => {
            let a = triangle_shape(&args.triangle, args.identity_tol)?;
            let mut v = shape_report(&a);
            v["config"] = config(cli, json!({ "command": "shape" }));
            v["config"]["tolerances"]["identity_tol_scale"] = json!(args.identity_tol);
            Artifact::Json(v)
        }
        Command::Subdivide(args) => {
            let z = halfplane(&args.z)?;
            let mesh = build_mesh([z.re, z.im], [0.0, 0.0], [1.0, 0.0], args.levels, args.max_levels)?;
            let mut v = serde_json::to_value(&mesh).expect("mesh serializes");
            v["config"] = config(cli, json!({ "command": "subdivide", "z": args.z, "levels": args.levels }));
            Artifact::Json(v)
        }
        Command::Flow(args) => {
            let a = from_halfplane(halfplane(&args.z)?)?;
            let rows = random_flow(&a, args.steps, args.samples as usize, cli.seed, cli.workers)?;
            let mut buf = Vec::new();
            write_flow_csv(&rows, &mut buf)?;
            let cfg = json!({ "command": "flow", "z": args.z, "steps": args.steps, "samples": args.samples });
            Artifact::Csv(buf, config(cli, cfg))
        }
        Command::Rg(RgCommand::Step { family: fa, triangle }) => {
            let fam = family(fa)?;
            let a = triangle_shape(triangle, IDENTITY_TOL_SCALE)?;
            let (p_new, q_new) = rg_step(&fam, &a)?;
            let breakdown = assemble_subdivided(&fam, &a)?;
            let effective = integrate_out_center(&breakdown)?;
            Artifact::Json(json!({
                "family": family_json(fa, &fam),
                "shape": a.as_array(),
                "P": fam.p(&a),
                "Q": fam.q(&a),
                "P_new": p_new,
                "Q_new": q_new,
                "breakdown": breakdown,
                "effective": effective,
                "action": action_matrix(&fam, &a),
                "config": config(cli, json!({ "command": "rg step" })),
            }))
        }
        Command::Rg(RgCommand::FixedPoint(b)) => {
            let fam = family(&b.family)?;
            let r = fixed_point_residual(&fam, b.samples as usize, cli.seed, cli.workers)?;
            let mut v = residual_json(&r, &b.family, &fam, cli.seed);
            v["config"] = config(cli, json!({ "command": "rg fixed-point" }));
            Artifact::Json(v)
        }
        Command::Rg(RgCommand::Projective(b)) => {
            let fam = family(&b.family)?;
            let r = projective_residual(&fam, b.samples as usize, cli.seed, cli.workers)?;
            let mut v = residual_json(&r, &b.family, &fam, cli.seed);
            v["config"] = config(cli, json!({ "command": "rg projective" }));
            Artifact::Json(v)
        }
        Command::Schur(args) => {
            let fam = family(&args.family)?;
            let mut r = verify_hierarchical(halfplane(&args.z)?, args.levels, &fam, args.max_levels, cli.workers)?;
            if !args.timing {
                r.elapsed_ms = None;
            }
            let mut v = serde_json::to_value(&r).expect("report serializes");
            v["family"] = family_json(&args.family, &fam);
            v["config"] = config(cli, json!({ "command": "schur", "max_levels": args.max_levels }));
            Artifact::Json(v)
        }
        Command::Energy(args) => {
            let c = &args.coords;
            let (x0, x1, x2) = ([c[0], c[1]], [c[2], c[3]], [c[4], c[5]]);
            let phi = [args.phi[0], args.phi[1], args.phi[2]];
            let a = cot_from_coords(x0, x1, x2)?;
            Artifact::Json(json!({
                "cotangent": cotangent_action(&a, phi),
                "metric": interpolant_energy(x0, x1, x2, phi)?,
                "quadrature": quadrature_energy(x0, x1, x2, phi, args.quad_n as usize)?,
                "config": config(cli, json!({ "command": "energy", "quad_n": args.quad_n })),
            }))
        }
    };
    Ok(artifact)
}

fn emit(cli: &Cli, artifact: Artifact) -> io::Result<()> {
    let (bytes, csv_config) = match artifact {
        Artifact::Json(v) => {
            let mut s = serde_json::to_string_pretty(&v).expect("json");
            s.push('\n');
            (s.into_bytes(), None)
        }
        Artifact::Csv(b, cfg) => (b, Some(cfg)),
    };
    match &cli.out {
        Some(path) => {
            fs::write(path, &bytes)?;
            if let Some(cfg) = csv_config {
                // the CSV file keeps its fixed header, so the configuration goes to stdout
                println!("{}", serde_json::to_string_pretty(&cfg).expect("json"));
            }
            Ok(())
        }
        None => io::stdout().write_all(&bytes),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|a| emit(&cli, a).map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
