use std::path::PathBuf;
use std::process::ExitCode;

use aperiodic_diffraction::diffraction::{
    deformation_from_lengths, symmetry_report, write_peaks, PeakQuery, SymmetryGroup, WeightVector,
};
use aperiodic_diffraction::inflation::{inflate, TypedPointSet};
use aperiodic_diffraction::models::{builtin, builtin_names, DeformationMap, DisplacementMatrix, ModelSpec};
use aperiodic_diffraction::verify::verify_model;
use aperiodic_diffraction::windows::{iterate, membership_volumes, write_windows, RenderOptions};
use aperiodic_diffraction::{AlgebraicElement, Cloud, Engine, Error, FieldId};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "apdiff", version, about = "Diffraction of aperiodic tilings via the internal Fourier cocycle")]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in models.
    Models {
        #[arg(long)]
        json: bool,
    },
    /// Compute a Bragg-peak list and write CSV/JSON/SVG.
    Peaks(PeaksArgs),
    /// Run the self-check suite for a model.
    Verify(ModelArgs),
    /// Render the windows as SVG.
    Window(WindowArgs),
    /// Export an inflation patch as CSV (type, x, y).
    Patch(PatchArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "cap")]
    model: String,
    /// Displacement matrix (JSON) replacing or supplying the model's data.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct PeaksArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Catalog name, or `from-lengths:ℓa,ℓb` (silver, exact values).
    #[arg(long)]
    deformation: Option<String>,
    /// `equal`, `zero-central`, or comma-separated exact weights.
    #[arg(long, default_value = "equal")]
    weights: String,
    /// Centre of the k-region, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    /// Internal-space cutoff |k★| ≤ R.
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, env = "APDIFF_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// File stem (default: `<model>[_<deformation>]_peaks`).
    #[arg(long)]
    stem: Option<String>,
}

#[derive(Args)]
struct WindowArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 30)]
    steps: usize,
    /// Zoom rectangle x0,x1[,y0,y1].
    #[arg(long, allow_hyphen_values = true)]
    zoom: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "APDIFF_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PatchArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 5)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed_type: usize,
    /// Keep points with |x| ≤ radius.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Verification,
    MissingData(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::MissingDisplacement(_) => Failure::MissingData(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn load_model(args: &ModelArgs) -> Result<ModelSpec, Failure> {
    let model = builtin(&args.model)?;
    match &args.data {
        Some(path) => Ok(model.with_displacement(DisplacementMatrix::load(path)?)?),
        None => Ok(model),
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("not a number: {x}"))))
        .collect()
}

fn resolve_deformation(model: &ModelSpec, spec: &str) -> Result<DeformationMap, Failure> {
    if let Some(lengths) = spec.strip_prefix("from-lengths:") {
        if model.field != FieldId::Silver {
            return Err(Failure::Usage("from-lengths applies to the silver models only".into()));
        }
        let parts: Vec<&str> = lengths.split(',').collect();
        if parts.len() != 2 {
            return Err(Failure::Usage("from-lengths needs two lengths ℓa,ℓb".into()));
        }
        if parts.iter().any(|p| p.contains('.') || p.contains('e')) {
            return Err(Failure::Usage(
                "lengths must be exact (e.g. 4-2√2); use the `equal-lengths` preset for λ⁻²".into(),
            ));
        }
        let la = AlgebraicElement::parse(FieldId::Silver, parts[0])?;
        let lb = AlgebraicElement::parse(FieldId::Silver, parts[1])?;
        return Ok(deformation_from_lengths(&la, &lb)?);
    }
    Ok(model.deformation(spec)?.clone())
}

fn cmd_models(json: bool) -> CliResult {
    let models: Vec<ModelSpec> = builtin_names().iter().map(|n| builtin(n)).collect::<Result<_, _>>()?;
    if json {
        let list: Vec<serde_json::Value> = models
            .iter()
            .map(|m| {
                serde_json::json!({
                    "name": m.name,
                    "field": m.field.name(),
                    "tiles": m.n_types(),
                    "dimension": m.dim(),
                    "deformations": m.deformations.iter().map(|d| d.name.clone()).collect::<Vec<_>>(),
                    "displacement": if m.has_data() { "built-in" } else { "none" },
                    "density": m.density_f64(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&list).map_err(|e| Failure::Usage(e.to_string()))?);
    } else {
        for m in &models {
            let defs: Vec<&str> = m.deformations.iter().map(|d| d.name.as_str()).collect();
            let data = if m.has_data() { "built-in".to_string() } else { "none (load required)".to_string() };
            println!(
                "{:<16} field={:<8} tiles={:<3} deformations=[{}] displacement: {}",
                m.name,
                m.field.name(),
                if m.n_types() == 0 { "?".to_string() } else { m.n_types().to_string() },
                defs.join(", "),
                data
            );
        }
    }
    Ok(())
}

fn cmd_peaks(a: &PeaksArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let deformation = a.deformation.as_deref().map(|d| resolve_deformation(&model, d)).transpose()?;
    let engine = Engine::new(model)?;
    let model = &engine.model;
    let mut q = PeakQuery::defaults(model);
    q.weights = WeightVector::parse(model, &a.weights)?;
    if let Some(c) = &a.center {
        q.center = parse_floats(c)?;
        if q.center.len() != model.dim() {
            return Err(Failure::Usage(format!("--center needs {} values", model.dim())));
        }
    }
    q.radius = a.radius.unwrap_or(q.radius);
    q.internal_cutoff = a.cutoff.unwrap_or(q.internal_cutoff);
    q.threshold = a.threshold.unwrap_or(q.threshold);
    q.n_iters = a.iters.unwrap_or(q.n_iters);
    if q.n_iters == 0 {
        return Err(Failure::Usage("--iters must be positive".into()));
    }
    q.deformation = deformation.clone();
    let peaks = engine.peak_list(&q)?;
    let stem = a.stem.clone().unwrap_or_else(|| match &deformation {
        Some(d) if !d.name.starts_with("from-lengths") => format!("{}_{}_peaks", model.name, d.name),
        Some(_) => format!("{}_deformed_peaks", model.name),
        None => format!("{}_peaks", model.name),
    });
    let files = write_peaks(&peaks, &a.out_dir, &stem)?;
    match peaks.first() {
        Some(p) => println!(
            "{} peaks; brightest intensity {:.12e} at k = {:?}",
            peaks.len(),
            p.intensity,
            p.k.k_phys
        ),
        None => println!("0 peaks above threshold {}", q.threshold),
    }
    if model.dim() == 2 && !peaks.is_empty() {
        let rot = symmetry_report(&peaks, SymmetryGroup::Rotation6)?;
        let mir = symmetry_report(&peaks, SymmetryGroup::BestMirror)?;
        println!(
            "sixfold discrepancy {:.1e}; best-axis mirror discrepancy {:.1e} (axis {:.4}°)",
            rot.max_discrepancy,
            mir.max_discrepancy,
            mir.axis.unwrap_or(0.0).to_degrees()
        );
    }
    if let Some(d) = deformation.as_ref().filter(|d| d.period_generator.is_some()) {
        report_periods(&engine, d, &q, &peaks)?;
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

/// Check I(k + p) = I(k) for the catalog period generators on the brightest peaks.
fn report_periods(
    engine: &Engine,
    d: &DeformationMap,
    q: &PeakQuery<f64>,
    peaks: &[aperiodic_diffraction::diffraction::Peak<f64>],
) -> CliResult {
    let periods = engine.period_coords(d)?;
    for (idx, pc) in periods.iter().enumerate() {
        let p = engine.module_point(pc);
        let mut worst = 0.0f64;
        let sample = &peaks[..peaks.len().min(20)];
        for pk in sample {
            let c: Vec<i64> = pk.k.coords.iter().zip(pc).map(|(a, b)| a + b).collect();
            let shifted = engine.module_point(&c);
            let i = engine.intensity_at(&shifted, &q.weights, Some(d), q.n_iters)?;
            worst = worst.max((i - pk.intensity).abs());
        }
        println!(
            "period p{} = {:?} (dual coords {:?}): max |I(k+p) − I(k)| = {:.1e} over {} peaks",
            idx + 1,
            p.k_phys,
            pc,
            worst,
            sample.len()
        );
    }
    Ok(())
}

fn cmd_verify(a: &ModelArgs) -> CliResult {
    let model = load_model(a)?;
    let report = verify_model(&model)?;
    print!("{report}");
    if report.passed() {
        println!("{}: all checks passed", model.name);
        Ok(())
    } else {
        println!("{}: verification FAILED", model.name);
        Err(Failure::Verification)
    }
}

fn cmd_window(a: &WindowArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let cloud = iterate(Cloud::seed(&model)?, &model, a.steps)?;
    let view = match &a.zoom {
        None => None,
        Some(z) => {
            let v = parse_floats(z)?;
            match v.len() {
                2 => Some(([v[0], -1.0], [v[1], 1.0])),
                4 => Some(([v[0], v[2]], [v[1], v[3]])),
                _ => return Err(Failure::Usage("--zoom takes x0,x1 or x0,x1,y0,y1".into())),
            }
        }
    };
    let opts = RenderOptions { view, group: model.orientations };
    let out = a.out.clone().unwrap_or_else(|| a.out_dir.join(format!("{}_windows.svg", model.name)));
    write_windows(&cloud, &opts, &out)?;
    let v = cloud.total_volume();
    println!(
        "{} windows: {} points after {} steps, cell volume {:.6} [{:.6}, {:.6}]",
        model.name,
        cloud.len(),
        cloud.generation,
        v.value,
        v.lower,
        v.upper
    );
    let mv = membership_volumes(&model, &cloud)?;
    println!("membership volume {:.6} (depth {}, overlap {:.2e})", mv.total, mv.depth, mv.overlap);
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_patch(a: &PatchArgs) -> CliResult {
    let model = load_model(&a.model)?;
    if a.seed_type >= model.n_types() {
        return Err(Failure::Usage(format!("seed type must be < {}", model.n_types())));
    }
    let mut patch = inflate(&TypedPointSet::seed(&model, a.seed_type), &model, a.steps)?;
    if let Some(r) = a.radius {
        patch = patch.truncate(r);
    }
    patch.sort_by_position();
    let mut s = String::from("type,x,y\n");
    for (i, x) in &patch.points {
        let v = x.embed_phys::<f64>();
        s.push_str(&format!("{},{:.16e},{}\n", model.tile_labels[*i], v[0], v.get(1).map(|y| format!("{y:.16e}")).unwrap_or_default()));
    }
    match &a.out {
        Some(p) => {
            std::fs::write(p, s).map_err(|e| Failure::Usage(e.to_string()))?;
            println!("{} points; wrote {}", patch.len(), p.display());
        }
        None => print!("{s}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Models { json } => cmd_models(*json),
        Command::Peaks(a) => cmd_peaks(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Window(a) => cmd_window(a),
        Command::Patch(a) => cmd_patch(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => ExitCode::from(2),
        Err(Failure::MissingData(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
