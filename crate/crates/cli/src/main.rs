//! `arboreal`: enumerate the happy subgroups, compute densities, classify
//! curves and check densities against prime scans.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arboreal::classifier::{classify_report, ClassifyReport};
use arboreal::density::{density_exact, density_finite_level, DensityValue, LiftMode};
use arboreal::ecurve::{curve_from_params, scan, CurveParams, ScanOptions, ScanReport};
use arboreal::groupengine::{decode_generators, Ambient, AmbientKind, Subgroup, SubgroupCatalog};
use arboreal::Error;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "arboreal", version, about)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for sampled computations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the happy subgroups and write the catalog.
    Enumerate {
        /// 8 or 16.
        #[arg(long, default_value_t = 8)]
        modulus: u32,
        #[arg(long)]
        out: PathBuf,
        /// Lattice in Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Exact density of a catalog class or of the group generated by a file.
    Density {
        #[arg(long, requires = "id", conflicts_with = "gens")]
        catalog: Option<PathBuf>,
        #[arg(long)]
        id: Option<u32>,
        /// JSON list of 3×3 generators `[a,b,0,c,d,0,e,f,1]`.
        #[arg(long, required_unless_present = "catalog")]
        gens: Option<PathBuf>,
        /// Modulus the generators live at (with `--gens`).
        #[arg(long, default_value_t = 8)]
        modulus: u32,
        /// Also report the finite-level fixed-point fraction at `2^K`.
        #[arg(long, value_name = "K")]
        finite_level: Option<u32>,
        /// Sample this many lifts instead of enumerating them.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Classify the curve with parameters (a, c, k).
    Classify {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Print the full result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Classify, then compare the row density with a prime scan.
    Verify {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 1_000_000)]
        xmax: u64,
        /// Per-prime `p,N,s,m,odd` lines.
        #[arg(long)]
        audit: Option<PathBuf>,
        /// Absolute error allowed; defaults to 3σ.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Reproduce every row: exemplar, exact density, scan and error.
    Table {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        xmax: u64,
        /// Scan to 10⁷ (overrides `--xmax`).
        #[arg(long)]
        full_scale: bool,
        #[arg(long)]
        out: PathBuf,
        /// Absolute error allowed per row; defaults to 3σ at that row's density.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: i64,
    #[arg(long, allow_negative_numbers = true)]
    c: i64,
    #[arg(long, allow_negative_numbers = true)]
    k: i64,
}

/// Command outcome: the exit code says whether a check failed.
enum Outcome {
    Ok,
    Mismatch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Hypothesis(_) | Error::OrderAmbiguous { .. } | Error::FactorBudget(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> arboreal::Result<Outcome> {
    match cli.command {
        Command::Enumerate { modulus, out, dot } => enumerate(modulus, &out, dot.as_deref()),
        Command::Density {
            catalog,
            id,
            gens,
            modulus,
            finite_level,
            samples,
        } => {
            let h = match (catalog, id, gens) {
                (Some(path), Some(id), _) => SubgroupCatalog::load(&path)?.subgroup(id)?,
                (_, _, Some(path)) => subgroup_from_file(&path, modulus)?,
                _ => {
                    return Err(Error::Contract(
                        "give --catalog with --id, or --gens".into(),
                    ))
                }
            };
            density(&h, finite_level, samples, cli.seed)
        }
        Command::Classify {
            curve,
            catalog,
            json,
        } => {
            let curve = curve.params()?;
            let report = classify_report(&curve, &load_or_build(catalog.as_deref())?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print_classification(&curve, &report);
            }
            Ok(Outcome::Ok)
        }
        Command::Verify {
            curve,
            xmax,
            audit,
            tolerance,
            catalog,
        } => verify(
            &curve.params()?,
            xmax,
            audit.as_deref(),
            tolerance,
            catalog.as_deref(),
        ),
        Command::Table {
            catalog,
            xmax,
            full_scale,
            out,
            tolerance,
        } => {
            let xmax = if full_scale { 10_000_000 } else { xmax };
            table(&SubgroupCatalog::load(&catalog)?, xmax, &out, tolerance)
        }
    }
}

impl CurveArgs {
    fn params(&self) -> arboreal::Result<CurveParams> {
        curve_from_params(self.a, self.c, self.k)
    }
}

fn level_of(modulus: u32) -> arboreal::Result<u32> {
    match modulus {
        8 => Ok(3),
        16 => Ok(4),
        m => Err(Error::Contract(format!("modulus must be 8 or 16, got {m}"))),
    }
}

fn load_or_build(path: Option<&Path>) -> arboreal::Result<SubgroupCatalog> {
    match path {
        Some(p) => SubgroupCatalog::load(p),
        None => SubgroupCatalog::build(3),
    }
}

fn enumerate(modulus: u32, out: &Path, dot: Option<&Path>) -> arboreal::Result<Outcome> {
    let cat = SubgroupCatalog::build(level_of(modulus)?)?;
    cat.save(out)?;
    if let Some(dot) = dot {
        std::fs::write(dot, cat.to_dot())?;
    }
    let hist: Vec<String> = cat
        .index_histogram()
        .iter()
        .map(|(i, n)| format!("{i}:{n}"))
        .collect();
    println!(
        "modulus {modulus}: {} classes, index histogram {{{}}}",
        cat.classes.len(),
        hist.join(", ")
    );
    println!("root children: {}", cat.children(1).len());
    Ok(if cat.classes.len() == 63 {
        Outcome::Ok
    } else {
        Outcome::Mismatch
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GeneratorFile {
    List(Vec<[i64; 9]>),
    Object { generators: Vec<[i64; 9]> },
}

fn subgroup_from_file(path: &Path, modulus: u32) -> arboreal::Result<Subgroup> {
    let level = level_of(modulus)?;
    let n = i64::from(modulus);
    let gens = match serde_json::from_str(&std::fs::read_to_string(path)?)? {
        GeneratorFile::List(g) | GeneratorFile::Object { generators: g } => g,
    };
    let reduced: Vec<[i64; 9]> = gens.iter().map(|m| m.map(|x| x.rem_euclid(n))).collect();
    let packed = decode_generators(&reduced)?;
    let kind = if packed.iter().all(|g| g.in_gamma0()) {
        AmbientKind::Gamma0
    } else {
        AmbientKind::Full
    };
    Subgroup::try_generated(Ambient::new(kind, level)?, &packed)
}

fn density(
    h: &Subgroup,
    finite_level: Option<u32>,
    samples: Option<u64>,
    seed: u64,
) -> arboreal::Result<Outcome> {
    let d = density_exact(h);
    println!("{d} ≈ {}", d.decimal(7));
    println!("order {}, index in AGL₂ {}", h.order(), h.index_in_agl());
    if let Some(k) = finite_level {
        let mode = match samples {
            Some(samples) => LiftMode::Sampled { samples, seed },
            None => LiftMode::Exhaustive,
        };
        let f = density_finite_level(h, k, mode)?;
        println!("level 2^{k}: {f} ≈ {}", f.decimal(7));
    }
    Ok(Outcome::Ok)
}

fn print_classification(curve: &CurveParams, report: &ClassifyReport) {
    let r = &report.result;
    println!(
        "curve {curve}: b = {}, a² − 4b = {}",
        curve.b(),
        curve.disc()
    );
    println!("row {}", report.row);
    println!("density {} ≈ {}", report.density, report.density.decimal(7));
    let rows: Vec<String> = r.satisfied_rows.iter().map(u8::to_string).collect();
    println!("satisfied rows {}", rows.join(","));
    for (row, cert) in &r.certificates {
        let mut line = format!("  row {row}:");
        if let Some(s) = &cert.s {
            let _ = write!(line, " s = {s}");
        }
        if let Some(d) = &cert.d {
            let _ = write!(line, " d = {d}");
        }
        let _ = write!(line, " root = {}", cert.root);
        println!("{line}");
    }
    for w in &r.warnings {
        println!("warning: row {}: {}", w.row, w.message);
    }
    if report.is_exemplar {
        println!("input is the table exemplar for row {}", report.row);
    }
}

/// `3·√(δ(1 − δ)/π(x))`.
fn three_sigma(delta: &DensityValue, primes: u64) -> f64 {
    let d = delta.to_f64();
    3.0 * (d * (1.0 - d) / primes as f64).sqrt()
}

fn verify(
    curve: &CurveParams,
    xmax: u64,
    audit: Option<&Path>,
    tolerance: Option<f64>,
    catalog: Option<&Path>,
) -> arboreal::Result<Outcome> {
    let report = classify_report(curve, &load_or_build(catalog)?)?;
    let scanned = scan(
        curve,
        xmax,
        ScanOptions {
            audit: audit.is_some(),
        },
    )?;
    if let Some(path) = audit {
        scanned.write_audit_csv(BufWriter::new(File::create(path)?))?;
    }
    let err = (scanned.ratio.to_f64() - report.density.to_f64()).abs();
    let tol = tolerance.unwrap_or_else(|| three_sigma(&report.density, scanned.primes_total));
    println!(
        "curve {curve} row {} density {} ({}) empirical {} at x = {xmax} abs_err {err:.6} tolerance {tol:.6}",
        report.row,
        report.density,
        report.density.decimal(6),
        scanned.ratio.decimal(6),
    );
    println!(
        "primes {} good {} odd {} (odd/good {})",
        scanned.primes_total,
        scanned.primes_good,
        scanned.odd_count,
        scanned.good_ratio().decimal(6)
    );
    Ok(if err <= tol {
        Outcome::Ok
    } else {
        Outcome::Mismatch
    })
}

struct TableRow {
    row: u32,
    curve: CurveParams,
    exact: DensityValue,
    classified: Option<u8>,
    scan: ScanReport,
}

fn table(
    cat: &SubgroupCatalog,
    xmax: u64,
    out: &Path,
    tolerance: Option<f64>,
) -> arboreal::Result<Outcome> {
    let mut rows = Vec::new();
    for class in &cat.classes {
        let ex = class
            .exemplar
            .ok_or_else(|| Error::Catalog(format!("class {} has no exemplar curve", class.id)))?;
        let curve = curve_from_params(ex.a, ex.c, ex.k)?;
        let classified = classify_report(&curve, cat).ok().map(|r| r.row);
        let scan = scan(&curve, xmax, ScanOptions::default())?;
        rows.push(TableRow {
            row: class.id,
            curve,
            exact: class.density_value(),
            classified,
            scan,
        });
    }

    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "row,a,c,k,density_exact,empirical,abs_err")?;
    let mut failures = Vec::new();
    for r in &rows {
        let err = (r.scan.ratio.to_f64() - r.exact.to_f64()).abs();
        writeln!(
            w,
            "{},{},{},{},{},{},{err:.6}",
            r.row,
            r.curve.a,
            r.curve.c,
            r.curve.k,
            r.exact,
            r.scan.ratio.decimal(6)
        )?;
        if r.classified != u8::try_from(r.row).ok() {
            failures.push(format!(
                "row {}: exemplar {} classified as {:?}",
                r.row, r.curve, r.classified
            ));
        }
        let tol = tolerance.unwrap_or_else(|| three_sigma(&r.exact, r.scan.primes_total));
        if err > tol {
            failures.push(format!("row {}: abs_err {err:.6} exceeds {tol:.6}", r.row));
        }
    }
    let distinct: BTreeSet<&DensityValue> = rows.iter().map(|r| &r.exact).collect();
    let (min, max) = (distinct.first().copied(), distinct.last().copied());
    let show = |d: Option<&DensityValue>| d.map_or("-".to_string(), DensityValue::to_string);
    let summary = format!(
        "# rows {} distinct_densities {} min {} max {}",
        rows.len(),
        distinct.len(),
        show(min),
        show(max)
    );
    writeln!(w, "{summary}")?;
    w.flush()?;
    println!("{summary}");
    if rows.len() != 63 {
        failures.push(format!("expected 63 rows, found {}", rows.len()));
    }
    if distinct.len() != 21 {
        failures.push(format!(
            "expected 21 distinct densities, found {}",
            distinct.len()
        ));
    }
    if min != Some(&DensityValue::new(1, 14)) || max != Some(&DensityValue::new(89, 168)) {
        failures.push(format!(
            "density range {} .. {}, expected 1/14 .. 89/168",
            show(min),
            show(max)
        ));
    }
    for f in &failures {
        println!("mismatch: {f}");
    }
    Ok(if failures.is_empty() {
        Outcome::Ok
    } else {
        Outcome::Mismatch
    })
}
