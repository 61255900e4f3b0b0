//! Command-line front end.
//!
//! Exit codes: 0 success (and "equivalent"), 1 "not equivalent",
//! 2 input or parse error, 3 internal invariant failure.

use clap::{Args, Parser, Subcommand};
use curvelab::carrousel::{
    build_carrousel_tree, carrousel_code, carrousel_dot, carrousel_json, carrousel_text,
    eggers_dot, eggers_json, eggers_reduce, eggers_text, equivalent,
};
use curvelab::contact::{
    coincidence_exponent, intersection_multiplicity, q_map, verify_ultrametric,
};
use curvelab::decomposition::{
    decompose, largest_disjoint_t, render_section, PieceKind,
};
use curvelab::error::CurveError;
use curvelab::probe::{
    bilipschitz_ratio_experiment, distances_csv, estimate_qmap, recover_tree_numeric,
    sample_points, SampleGrid,
};
use curvelab::projection::{
    find_generic_direction, is_generic, parse_space_curve, project, Direction,
};
use curvelab::puiseux::{parse_curve, Curve};
use curvelab::scalar::{fmt_rat, GaussianRational, Rational};
use curvelab::splice::{
    branch_linking, build_splice, edge_determinants, splice_dot, splice_json, splice_text,
};
use std::fmt::Write as _;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "curvelab",
    about = "Exact invariants of complex plane curve germs from Puiseux data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FormatFlags {
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Emit Graphviz DOT instead of text.
    #[arg(long)]
    dot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Multiplicities, essential/characteristic exponents, contact values,
    /// coincidence exponents, and intersection multiplicities.
    Invariants {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Combinatorial carrousel tree.
    Tree {
        file: String,
        #[command(flatten)]
        format: FormatFlags,
    },
    /// Eggers tree with (m, n, r, s) decorations.
    Eggers {
        file: String,
        #[command(flatten)]
        format: FormatFlags,
    },
    /// Splice diagram with near-weights, arrows, and stubs.
    Splice {
        file: String,
        #[command(flatten)]
        format: FormatFlags,
        /// Run the linking/determinant/ultrametric cross-checks.
        #[arg(long)]
        verify: bool,
    },
    /// Decide embedded-topology (outer Lipschitz) equivalence of two curves.
    Equiv { file1: String, file2: String },
    /// Genericity test and plane projection of a space curve.
    Project {
        file: String,
        /// Projection coefficients b_2,…,b_N (rationals).
        #[arg(long, value_name = "LIST", conflicts_with = "find_generic")]
        direction: Option<String>,
        /// Search for the first generic integer direction.
        #[arg(long)]
        find_generic: bool,
        #[arg(long)]
        json: bool,
    },
    /// Carrousel decomposition piece inventory.
    Carrousel {
        file: String,
        #[arg(long)]
        json: bool,
        /// Check section-level disjointness and report the largest verified t.
        #[arg(long)]
        verify: bool,
    },
    /// SVG sections {x = t} at the given parameters.
    Sections {
        file: String,
        /// Comma-separated section parameters (rationals), e.g. 1/10,1/20.
        #[arg(long, value_name = "LIST")]
        at: String,
        /// Output path; with several values an index is appended.
        #[arg(long, value_name = "PATH")]
        svg: Option<String>,
    },
    /// Numeric laboratory: estimated contact map, recovered tree, and (with
    /// a second curve) the distance-ratio experiment.
    Probe {
        file: String,
        file2: Option<String>,
        /// Grid as tmin,tmax,count (default 1e-4,1e-2,20).
        #[arg(long, value_name = "SPEC")]
        grid: Option<String>,
        /// Denominator bound for exponent rounding (default 24).
        #[arg(long, default_value_t = 24)]
        denbound: u64,
        #[arg(long)]
        json: bool,
        /// Write the raw (t, pair, distance) table as CSV to a path.
        #[arg(long, value_name = "PATH")]
        csv: Option<String>,
    },
}

fn read_curve(path: &str) -> Result<Curve, CurveError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CurveError::Invalid(format!("cannot read {}: {}", path, e)))?;
    parse_curve(&text)
}

fn parse_rational_str(s: &str) -> Result<Rational, CurveError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = num
        .parse()
        .map_err(|_| CurveError::Invalid(format!("bad rational '{}'", s)))?;
    let d: i64 = den
        .parse()
        .map_err(|_| CurveError::Invalid(format!("bad rational '{}'", s)))?;
    if d == 0 {
        return Err(CurveError::Invalid(format!("zero denominator in '{}'", s)));
    }
    Ok(curvelab::scalar::rat(n, d))
}

/// Fixed-width significant-digit formatting for floating output.
fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".into();
    }
    if !x.is_finite() {
        return format!("{}", x);
    }
    let exp = x.abs().log10().floor() as i32;
    let digits = (5 - exp).max(0) as usize;
    format!("{:.*}", digits.min(17), x)
}

fn cmd_invariants(file: &str, json: bool) -> Result<i32, CurveError> {
    let c = read_curve(file)?;
    let q = q_map(&c)?;
    if json {
        let branches: Vec<serde_json::Value> = c
            .branches()
            .iter()
            .map(|b| {
                serde_json::json!({
                    "multiplicity": b.multiplicity(),
                    "essential_exponents": b.essential_exponents(),
                    "characteristic_exponents": b
                        .characteristic_exponents()
                        .iter()
                        .map(curvelab::scalar::json_rat)
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        let mut pairs = Vec::new();
        for i in 0..c.branches().len() {
            for j in (i + 1)..c.branches().len() {
                pairs.push(serde_json::json!({
                    "branches": [i, j],
                    "coincidence_exponent": curvelab::scalar::json_rat(
                        &coincidence_exponent(&c, i, j)),
                    "intersection_multiplicity": intersection_multiplicity(&c, i, j)?,
                }));
            }
        }
        let out = serde_json::json!({
            "multiplicity": c.multiplicity(),
            "branches": branches,
            "q_values": q.finite_values().iter().map(curvelab::scalar::json_rat).collect::<Vec<_>>(),
            "pairs": pairs,
            "qmap": q.to_json(),
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
        return Ok(0);
    }
    println!("multiplicity: {}", c.multiplicity());
    for (i, b) in c.branches().iter().enumerate() {
        let chars: Vec<String> = b.characteristic_exponents().iter().map(fmt_rat).collect();
        let ess: Vec<String> = b.essential_exponents().iter().map(|e| e.to_string()).collect();
        println!(
            "branch {}: n = {}, essential exponents {{{}}}, characteristic exponents {{{}}}",
            i + 1,
            b.multiplicity(),
            ess.join(", "),
            chars.join(", ")
        );
    }
    let vals: Vec<String> = q.finite_values().iter().map(fmt_rat).collect();
    println!("contact value set: {{{}}}", vals.join(", "));
    for i in 0..c.branches().len() {
        for j in (i + 1)..c.branches().len() {
            println!(
                "branches {} and {}: coincidence exponent {}, intersection multiplicity {}",
                i + 1,
                j + 1,
                fmt_rat(&coincidence_exponent(&c, i, j)),
                intersection_multiplicity(&c, i, j)?
            );
        }
    }
    Ok(0)
}

fn cmd_tree(file: &str, format: &FormatFlags) -> Result<i32, CurveError> {
    let c = read_curve(file)?;
    let t = build_carrousel_tree(&q_map(&c)?)?;
    if format.json {
        println!("{}", serde_json::to_string_pretty(&carrousel_json(&t)).unwrap());
    } else if format.dot {
        print!("{}", carrousel_dot(&t));
    } else {
        print!("{}", carrousel_text(&t));
        println!("canonical code: {}", carrousel_code(&t));
    }
    Ok(0)
}

fn cmd_eggers(file: &str, format: &FormatFlags) -> Result<i32, CurveError> {
    let c = read_curve(file)?;
    let q = q_map(&c)?;
    let t = build_carrousel_tree(&q)?;
    let e = eggers_reduce(&t, &q.sheets)?;
    if format.json {
        println!("{}", serde_json::to_string_pretty(&eggers_json(&e)).unwrap());
    } else if format.dot {
        print!("{}", eggers_dot(&e));
    } else {
        print!("{}", eggers_text(&e));
    }
    Ok(0)
}

fn cmd_splice(file: &str, format: &FormatFlags, verify: bool) -> Result<i32, CurveError> {
    let c = read_curve(file)?;
    let q = q_map(&c)?;
    let t = build_carrousel_tree(&q)?;
    let e = eggers_reduce(&t, &q.sheets)?;
    let d = build_splice(&e)?;
    if format.json {
        println!("{}", serde_json::to_string_pretty(&splice_json(&d)).unwrap());
    } else if format.dot {
        print!("{}", splice_dot(&d));
    } else {
        print!("{}", splice_text(&d));
    }
    if verify {
        let mut report = String::new();
        let viol = verify_ultrametric(&q);
        writeln!(report, "ultrametric check: {} violating triple(s)", viol.len()).unwrap();
        let mut all_ok = viol.is_empty();
        for i in 0..c.branches().len() {
            for j in (i + 1)..c.branches().len() {
                let link = branch_linking(&d, i, j)?;
                let mult = intersection_multiplicity(&c, i, j)?;
                let ok = link == mult;
                all_ok &= ok;
                writeln!(
                    report,
                    "branches {} and {}: linking {} vs intersection multiplicity {} -> {}",
                    i + 1,
                    j + 1,
                    link,
                    mult,
                    if ok { "ok" } else { "MISMATCH" }
                )
                .unwrap();
            }
        }
        for (idx, det) in edge_determinants(&d) {
            let eedge = &d.edges[idx];
            let ok = det > 0;
            all_ok &= ok;
            writeln!(
                report,
                "edge {} -- {} ({}, {}): determinant {} -> {}",
                eedge.upper,
                eedge.lower,
                eedge.upper_weight,
                eedge.lower_weight,
                det,
                if ok { "positive" } else { "NON-POSITIVE" }
            )
            .unwrap();
        }
        writeln!(
            report,
            "note: bottom labels follow the recursion m' = s + r*r'*m' \
             (plain edge) or (s + r*m')/r' (extra edge). For the reference \
             curve y = x^(3/2) + x^(13/6), y = x^(7/3) the 13/6-edge label \
             is 22 = 4 + 3*2*3; a commonly reproduced diagram of this curve \
             prints 20 instead, which fails the linking cross-check \
             (3*22 = 66 is the contact sum against a test branch)."
        )
        .unwrap();
        print!("{}", report);
        if !all_ok {
            return Err(CurveError::Internal("splice verification failed".into()));
        }
    }
    Ok(0)
}

fn cmd_equiv(file1: &str, file2: &str) -> Result<i32, CurveError> {
    let c1 = read_curve(file1)?;
    let c2 = read_curve(file2)?;
    if equivalent(&c1, &c2)? {
        println!("equivalent");
        Ok(0)
    } else {
        // a short reason: compare characteristic data
        let chars = |c: &Curve| -> Vec<String> {
            c.branches()
                .iter()
                .map(|b| {
                    let v: Vec<String> =
                        b.characteristic_exponents().iter().map(fmt_rat).collect();
                    format!("{{{}}}", v.join(", "))
                })
                .collect()
        };
        println!(
            "not equivalent (characteristic exponents {} vs {})",
            chars(&c1).join(" "),
            chars(&c2).join(" ")
        );
        Ok(1)
    }
}

fn cmd_project(
    file: &str,
    direction: Option<&str>,
    find_generic: bool,
    json: bool,
) -> Result<i32, CurveError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CurveError::Invalid(format!("cannot read {}: {}", file, e)))?;
    let sc = parse_space_curve(&text)?;
    let dir = match (direction, find_generic) {
        (Some(list), _) => {
            let coeffs: Result<Vec<GaussianRational>, CurveError> = list
                .split(',')
                .map(|s| parse_rational_str(s).map(GaussianRational::from_rational))
                .collect();
            let coeffs = coeffs?;
            if coeffs.len() != sc.ambient_dim() - 1 {
                return Err(CurveError::Invalid(format!(
                    "direction needs {} coefficients, got {}",
                    sc.ambient_dim() - 1,
                    coeffs.len()
                )));
            }
            if coeffs.iter().all(|c| c.is_zero()) {
                return Err(CurveError::Invalid(
                    "direction must have a nonzero coefficient".into(),
                ));
            }
            Direction { b1: GaussianRational::zero(), rest: coeffs }
        }
        (None, true) => find_generic_direction(&sc)?,
        (None, false) => {
            return Err(CurveError::Invalid(
                "pass --direction b2,...,bN or --find-generic".into(),
            ))
        }
    };
    let verdict = is_generic(&sc, &dir)?;
    let projected = project(&sc, &dir)?;
    let code = if verdict.is_generic() {
        let t = build_carrousel_tree(&q_map(&projected.curve)?)?;
        Some(carrousel_code(&t))
    } else {
        None
    };
    if json {
        let mut out = verdict.to_json();
        out["direction"] = serde_json::Value::from(
            dir.rest.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        );
        out["projection"] = serde_json::Value::from(projected.curve.to_string());
        out["warnings"] = serde_json::Value::from(projected.warnings.clone());
        if let Some(code) = &code {
            out["topology_code"] = serde_json::Value::from(code.0.clone());
        }
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("direction: {}", dir);
        println!("verdict: {}", verdict);
        for w in &projected.warnings {
            println!("warning: {}", w);
        }
        println!("projected curve:");
        println!("{}", projected.curve);
        if let Some(code) = &code {
            println!("topology code: {}", code);
        }
    }
    Ok(0)
}

fn cmd_carrousel(file: &str, json: bool, verify: bool) -> Result<i32, CurveError> {
    let c = read_curve(file)?;
    let dec = decompose(&c, None)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&dec.to_json()).unwrap());
    } else {
        if let Some(shear) = &dec.shear {
            println!("applied shear: y -> y + {}*x", shear);
        }
        println!(
            "parameters: eps0 = {}, eta = {}, R = {}",
            fmt_rat(&dec.params.eps0),
            fmt_rat(&dec.params.eta),
            fmt_rat(&dec.params.r_bound)
        );
        let inv = dec.inventory();
        let parts: Vec<String> = inv.iter().map(|(k, v)| format!("{} {}", v, k)).collect();
        println!("piece inventory: {}", parts.join(", "));
        for p in dec.pieces() {
            match p.kind {
                PieceKind::B1 => println!("B(1): cone complement, {} sector(s)", dec.sectors.len()),
                PieceKind::B => println!(
                    "B: sector {}, rate {}, {} hole(s), alpha {} beta {} gamma {}",
                    p.sector.unwrap(),
                    fmt_rat(&p.rate),
                    p.coeffs.len(),
                    fmt_rat(p.alpha.as_ref().unwrap()),
                    fmt_rat(p.beta.as_ref().unwrap()),
                    fmt_rat(p.gamma.as_ref().unwrap()),
                ),
                PieceKind::A => println!(
                    "A: sector {}, rates {} to {}",
                    p.sector.unwrap(),
                    fmt_rat(p.outer_rate.as_ref().unwrap()),
                    fmt_rat(&p.rate),
                ),
                PieceKind::D => println!(
                    "D: sector {}, rate {}, sheet {}",
                    p.sector.unwrap(),
                    fmt_rat(&p.rate),
                    p.sheets.first().map(|s| s.to_string()).unwrap_or_default(),
                ),
            }
        }
    }
    if verify {
        match largest_disjoint_t(&dec) {
            Some(t) => println!("section disjointness verified down from t = {:e}", t),
            None => {
                return Err(CurveError::Internal(
                    "no section parameter on the test ladder is disjoint".into(),
                ))
            }
        }
    }
    Ok(0)
}

fn cmd_sections(file: &str, at: &str, svg: Option<&str>) -> Result<i32, CurveError> {
    let c = read_curve(file)?;
    let dec = decompose(&c, None)?;
    let ts: Result<Vec<Rational>, CurveError> =
        at.split(',').map(parse_rational_str).collect();
    let ts = ts?;
    if ts.is_empty() {
        return Err(CurveError::Invalid("--at needs at least one value".into()));
    }
    for (i, t) in ts.iter().enumerate() {
        let doc = render_section(&dec, t)?;
        match svg {
            None => print!("{}", doc),
            Some(path) => {
                let target = if ts.len() == 1 {
                    path.to_string()
                } else {
                    match path.rsplit_once('.') {
                        Some((stem, ext)) => format!("{}_{}.{}", stem, i, ext),
                        None => format!("{}_{}", path, i),
                    }
                };
                std::fs::write(&target, &doc)
                    .map_err(|e| CurveError::Invalid(format!("cannot write {}: {}", target, e)))?;
                println!("wrote {} (t = {})", target, fmt_rat(t));
            }
        }
    }
    Ok(0)
}

fn parse_grid(spec: Option<&str>) -> Result<SampleGrid, CurveError> {
    match spec {
        None => Ok(SampleGrid::default_grid()),
        Some(s) => {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 3 {
                return Err(CurveError::Invalid("--grid expects tmin,tmax,count".into()));
            }
            let tmin: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| CurveError::Invalid("bad tmin".into()))?;
            let tmax: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| CurveError::Invalid("bad tmax".into()))?;
            let count: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| CurveError::Invalid("bad count".into()))?;
            SampleGrid::geometric(tmax, tmin, count)
        }
    }
}

fn cmd_probe(
    file: &str,
    file2: Option<&str>,
    grid: Option<&str>,
    denbound: u64,
    json: bool,
    csv: Option<&str>,
) -> Result<i32, CurveError> {
    let c = read_curve(file)?;
    let grid = parse_grid(grid)?;
    let est = estimate_qmap(&c, &grid)?;
    let points: Vec<Vec<num_complex::Complex64>> =
        grid.ts.iter().map(|t| sample_points(&c, *t)).collect();
    let (tree, matrix) = recover_tree_numeric(&points, &grid, denbound)?;

    if let Some(path) = csv {
        std::fs::write(path, distances_csv(&c, &grid))
            .map_err(|e| CurveError::Invalid(format!("cannot write {}: {}", path, e)))?;
    }

    let ratio = match file2 {
        None => None,
        Some(f2) => {
            let c2 = read_curve(f2)?;
            if c2.branches().len() != c.branches().len() {
                return Err(CurveError::Invalid(
                    "ratio experiment needs curves with the same branch count".into(),
                ));
            }
            let pairing: Vec<(usize, usize)> =
                (0..c.branches().len()).map(|i| (i, i)).collect();
            Some(bilipschitz_ratio_experiment(&c, &c2, &pairing, &grid)?)
        }
    };

    if json {
        let mut slopes_json = Vec::new();
        for row in &est.slopes {
            slopes_json.push(
                row.iter()
                    .map(|v| {
                        if v.is_finite() {
                            serde_json::Value::from(*v)
                        } else {
                            serde_json::Value::from("inf")
                        }
                    })
                    .collect::<Vec<_>>(),
            );
        }
        let mut out = serde_json::json!({
            "estimated_q": slopes_json,
            "residual": est.residual,
            "recovered_tree": carrousel_json(&tree),
            "rounded_q": matrix.iter().map(|row| row.iter().map(|v| match v {
                curvelab::scalar::ExtendedRational::Infinity => serde_json::Value::from("inf"),
                curvelab::scalar::ExtendedRational::Finite(r) => curvelab::scalar::json_rat(r),
            }).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        if let Some(r) = &ratio {
            out["ratio_stats"] = curvelab::probe::ratio_stats_json(r);
        }
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
        return Ok(0);
    }

    println!("estimated contact exponents (log-log fit, residual {}):", sig6(est.residual));
    for j in 0..est.mu {
        let row: Vec<String> = (0..est.mu)
            .map(|k| if j == k { "inf".into() } else { sig6(est.slopes[j][k]) })
            .collect();
        println!("  {}", row.join(" "));
    }
    println!("recovered carrousel tree (denominator bound {}):", denbound);
    print!("{}", carrousel_text(&tree));
    println!("recovered code: {}", carrousel_code(&tree));
    let sym = build_carrousel_tree(&q_map(&c)?)?;
    println!(
        "matches symbolic tree: {}",
        if carrousel_code(&sym) == carrousel_code(&tree) { "yes" } else { "NO" }
    );
    if let Some(r) = &ratio {
        println!("distance-ratio experiment against {}:", file2.unwrap());
        for p in &r.pairs {
            println!(
                "  branches ({}, {}), sheets ({}, {}): fitted {} in [{}, {}], predicted {} (i0 = {})",
                p.branch_pair.0 + 1,
                p.branch_pair.1 + 1,
                p.sheet_pair.0,
                p.sheet_pair.1,
                sig6(p.fitted),
                sig6(p.min),
                sig6(p.max),
                sig6(p.predicted),
                p.i0
            );
        }
    }
    Ok(0)
}

fn run() -> Result<i32, CurveError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Invariants { file, json } => cmd_invariants(file, *json),
        Command::Tree { file, format } => cmd_tree(file, format),
        Command::Eggers { file, format } => cmd_eggers(file, format),
        Command::Splice { file, format, verify } => cmd_splice(file, format, *verify),
        Command::Equiv { file1, file2 } => cmd_equiv(file1, file2),
        Command::Project { file, direction, find_generic, json } => {
            cmd_project(file, direction.as_deref(), *find_generic, *json)
        }
        Command::Carrousel { file, json, verify } => cmd_carrousel(file, *json, *verify),
        Command::Sections { file, at, svg } => cmd_sections(file, at, svg.as_deref()),
        Command::Probe { file, file2, grid, denbound, json, csv } => cmd_probe(
            file,
            file2.as_deref(),
            grid.as_deref(),
            *denbound,
            *json,
            csv.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
