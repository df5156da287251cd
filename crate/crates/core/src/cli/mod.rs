//! Batch front end: gallery documents, verification reports and bitmaps.
//!
//! Exit codes: 0 when every required check passes, 1 when one fails (the
//! report is still written), 2 for usage and input errors.

mod input;
mod pbm;

pub use input::{Construction, PointsEntry, SetDescriptionFile, SetEntry};
pub use pbm::{to_pbm, write_atomic};

use crate::gallery::{generate, GeneratorSpec};
use crate::grid::SampledSet;
use crate::sums::sum_rasters;
use crate::verify::{
    normalize, verify_cantor_ladder, verify_covering_scenario, verify_equivalent_conditions, verify_main_scenario,
    verify_separator_suite, VerificationReport, VerifyOptions, DEFAULT_RESOLUTIONS,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Thread-count override; 0 or unset means one thread per core.
pub const THREADS_ENV: &str = "CONTINUUM_SUMS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "continuum-sums",
    version,
    about = "Interior and measure checks for Minkowski sums of sampled continua"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a set-description document for a built-in generator.
    Gallery(GalleryArgs),
    /// Run a verification scenario and emit its JSON report.
    Verify(VerifyArgs),
    /// Draw the sum of the described sets (or one of them) as a PBM image.
    Bitmap(BitmapArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GalleryKind {
    Segment,
    LShape,
    Circle,
    MomentCurve,
    Polyline,
    CantorSet,
    CantorGraph,
    LadderSteps,
}

#[derive(Debug, Args)]
struct GalleryArgs {
    kind: GalleryKind,
    /// Samples per piece.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, value_delimiter = ',', default_value = "0,0")]
    center: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    #[arg(long, value_delimiter = ',', default_value = "0,0")]
    start: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,0")]
    end: Vec<f64>,
    /// Vertices as `x,y;x,y;...`.
    #[arg(long)]
    vertices: Option<String>,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 4)]
    refine: usize,
    #[arg(long, default_value_t = 5)]
    per_plateau: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Scenario {
    Main,
    C1,
    Cantor,
    Hl,
    Claim,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    scenario: Scenario,
    /// Set-description document (main, c1 and claim).
    input: Option<PathBuf>,
    /// Grid spacing; repeat for a sweep.
    #[arg(long = "h")]
    h: Vec<f64>,
    #[arg(long)]
    s: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 100)]
    directions: usize,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write `<prefix>-h<spacing>.pbm` for each swept resolution.
    #[arg(long)]
    bitmap: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BitmapArgs {
    input: PathBuf,
    #[arg(long = "h")]
    h: f64,
    /// Draw only this set instead of the sum.
    #[arg(long)]
    set: Option<usize>,
    #[arg(long)]
    slice_axis: Option<usize>,
    #[arg(long)]
    slice_index: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Gallery(a) => cmd_gallery(&a, stdout).map(|_| EXIT_PASS),
        Command::Verify(a) => cmd_verify(&a, stdout, stderr),
        Command::Bitmap(a) => cmd_bitmap(&a, stdout).map(|_| EXIT_PASS),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn configure_threads() {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
}

fn parse_vertices(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.split(';')
        .map(|v| {
            v.split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|e| Failure(format!("bad vertex coordinate {c:?}: {e}"))))
                .collect()
        })
        .collect()
}

fn gallery_spec(a: &GalleryArgs) -> Result<GeneratorSpec, Failure> {
    Ok(match a.kind {
        GalleryKind::Segment => GeneratorSpec::Segment { start: a.start.clone(), end: a.end.clone(), budget: a.budget },
        GalleryKind::LShape => GeneratorSpec::LShape { dim: a.dim, length: a.length, budget: a.budget },
        GalleryKind::Circle => GeneratorSpec::Circle { center: a.center.clone(), r: a.r, budget: a.budget },
        GalleryKind::MomentCurve => GeneratorSpec::MomentCurve { dim: a.dim, budget: a.budget },
        GalleryKind::Polyline => {
            let text = a.vertices.as_deref().ok_or_else(|| Failure("polyline needs --vertices".into()))?;
            GeneratorSpec::Polyline { vertices: parse_vertices(text)?, budget: a.budget }
        }
        GalleryKind::CantorSet => GeneratorSpec::CantorSet { depth: a.depth },
        GalleryKind::CantorGraph => GeneratorSpec::CantorGraph { depth: a.depth, refine: a.refine, budget: a.budget },
        GalleryKind::LadderSteps => GeneratorSpec::LadderSteps { depth: a.depth, per_plateau: a.per_plateau },
    })
}

fn cmd_gallery(a: &GalleryArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let spec = gallery_spec(a)?;
    let set = generate(&spec)?.set;
    let doc = SetDescriptionFile {
        dim: set.dim,
        sets: vec![SetEntry::Generator(spec)],
        construction: None,
        resolutions: None,
        seed: None,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    stdout.write_all(text.as_bytes())?;
    Ok(())
}

fn load(path: &Path) -> Result<(SetDescriptionFile, Vec<SampledSet>), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let doc = SetDescriptionFile::parse(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let sets = doc.materialize().map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Ok((doc, sets))
}

fn options(a: &VerifyArgs, doc: Option<&SetDescriptionFile>) -> VerifyOptions {
    let defaults = VerifyOptions::default();
    let resolutions = if !a.h.is_empty() {
        a.h.clone()
    } else {
        doc.and_then(|d| d.resolutions.clone()).unwrap_or_else(|| DEFAULT_RESOLUTIONS.to_vec())
    };
    VerifyOptions {
        resolutions,
        tol: a.tol,
        seed: a.seed.or(doc.and_then(|d| d.seed)).unwrap_or(0),
        rho: a.rho.unwrap_or(defaults.rho),
        s: a.s.or(doc.and_then(|d| d.construction.as_ref().map(|c| c.s))).unwrap_or(defaults.s),
        directions: a.directions,
    }
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let needs_input = matches!(a.scenario, Scenario::Main | Scenario::C1 | Scenario::Claim);
    let loaded = match (&a.input, needs_input) {
        (Some(p), true) => Some(load(p)?),
        (None, true) => return Err(Failure("this scenario needs an input document".into())),
        (Some(_), false) => return Err(Failure("this scenario takes no input document".into())),
        (None, false) => None,
    };
    let opts = options(a, loaded.as_ref().map(|(d, _)| d));
    let mut drawn: Option<Vec<SampledSet>> = None;
    let mut report: VerificationReport = match a.scenario {
        Scenario::Main => {
            let sets = &loaded.as_ref().unwrap().1;
            drawn = Some(sets.clone());
            verify_main_scenario(sets, &opts)?
        }
        Scenario::Claim => {
            let sets = &loaded.as_ref().unwrap().1;
            drawn = Some(sets.clone());
            verify_covering_scenario(sets, &opts)?
        }
        Scenario::C1 => {
            let sets = &loaded.as_ref().unwrap().1;
            let distinct = sets.windows(2).any(|w| w[0] != w[1]);
            if distinct {
                return Err(Failure("c1 takes a document describing a single set".into()));
            }
            drawn = Some(vec![sets[0].clone(); sets[0].dim]);
            verify_equivalent_conditions(&sets[0], &opts)?
        }
        Scenario::Cantor => {
            let graph =
                generate(&GeneratorSpec::CantorGraph { depth: a.depth, refine: 4, budget: 1000 }).map(|g| g.set).ok();
            drawn = graph.map(|g| vec![g.clone(), g]);
            verify_cantor_ladder(a.depth, &opts)?
        }
        Scenario::Hl => {
            let seed = opts.seed;
            verify_separator_suite(a.trials, seed)?
        }
    };
    if let (Some((doc, _)), Some(obj)) = (&loaded, report.inputs.as_object_mut()) {
        obj.insert("document".into(), serde_json::to_value(doc)?);
    }
    let text = report.to_json();
    match &a.out {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(|e| Failure(format!("{}: {e}", path.display())))?,
        None => stdout.write_all(text.as_bytes())?,
    }
    if let Some(prefix) = &a.bitmap {
        match &drawn {
            Some(sets) => write_bitmaps(prefix, sets, &opts)?,
            None => writeln!(stderr, "note: this scenario has no raster to draw")?,
        }
    }
    Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
}

/// Path of the bitmap for spacing `h` under `prefix`.
pub fn bitmap_path(prefix: &Path, h: f64) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(format!("-h{h}.pbm"));
    PathBuf::from(name)
}

fn middle_slice(sum: &crate::grid::GridSet) -> Option<(usize, usize)> {
    (sum.dim() == 3).then(|| {
        let ext = sum.geometry().extents()[2];
        (2, ext / 2)
    })
}

fn write_bitmaps(prefix: &Path, sets: &[SampledSet], opts: &VerifyOptions) -> Result<(), Failure> {
    let dim = sets[0].dim;
    if !(dim == 2 || dim == 3) {
        return Err(Failure(format!("cannot draw {dim}-D sums")));
    }
    // Draw the grids the pipeline measured: normalized coordinates when
    // the sets admit them, the raw sets otherwise.
    let tol = opts.tol.unwrap_or_else(|| {
        let all: Vec<_> = sets.iter().flat_map(|s| s.points.iter().cloned()).collect();
        crate::affine::relative_tol(&all)
    });
    let sets = normalize(sets, tol).map(|n| n.sets).unwrap_or_else(|_| sets.to_vec());
    for h in opts.sweep()? {
        let sum = sum_rasters(&sets, h)?.outer;
        let image = to_pbm(&sum, middle_slice(&sum))?;
        let path = bitmap_path(prefix, h);
        write_atomic(&path, image.as_bytes()).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_bitmap(a: &BitmapArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (_, sets) = load(&a.input)?;
    if !(a.h.is_finite() && a.h > 0.0) {
        return Err(Failure(format!("spacing {} is not positive", a.h)));
    }
    let raster = match a.set {
        Some(i) => {
            let one = sets.get(i).ok_or_else(|| Failure(format!("set index {i} is out of range")))?;
            sum_rasters(std::slice::from_ref(one), a.h)?.sample
        }
        None => sum_rasters(&sets, a.h)?.outer,
    };
    let slice = match (a.slice_axis, a.slice_index) {
        (None, None) => None,
        (Some(axis), Some(index)) => Some((axis, index)),
        (None, Some(index)) => Some((2, index)),
        (Some(_), None) => return Err(Failure("--slice-axis needs --slice-index".into())),
    };
    let image = to_pbm(&raster, slice)?;
    match &a.out {
        Some(path) => write_atomic(path, image.as_bytes()).map_err(|e| Failure(format!("{}: {e}", path.display())))?,
        None => stdout.write_all(image.as_bytes())?,
    }
    Ok(())
}
