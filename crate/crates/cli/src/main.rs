use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use groupmds::chartheory::character_table_with_cap;
use groupmds::group::{class_count, GroupSpec};
use groupmds::mds::{double_center, eigendecompose};
use groupmds::metric::{build_distance_matrix, MetricSpec};
use groupmds::plot::{parse_embedding_csv, render_svg, PlotOptions};
use groupmds::rankings::{aggregate, embed_dataset, parse_rankings, ranking_label, synthesize_rankings, EmbedMode};
use groupmds::spectral::{closed_form_c2k, closed_form_sn, compare_with_eigenvalues, spectrum_via_characters};
use groupmds::verify::{verify_group, DEFAULT_VERIFY_CAP, SPECTRUM_TOL};
use groupmds::Error;

const CHARTABLE_CLASS_CAP: usize = 200;
const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(name = "groupmds", version, about = "Multidimensional scaling on finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the MDS spectrum predicted from characters as JSON
    Spectrum {
        #[command(flatten)]
        group: GroupArgs,
        /// Use the closed-form table (c2k with hamming, or sn with hamming and n >= 4)
        #[arg(long)]
        closed_form: bool,
        /// Also solve the dense kernel (order <= 720) and report the deviation
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Print the character table, class sizes in the column headers
    Chartable {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Embed a ranking file as CSV: id,label,weight,x1(+),...
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u16).range(1..))]
        dims: u16,
        /// dense: classical MDS of all of S_n (n <= 7); standard: principal axes in the standard-representation block
        #[arg(long, value_enum, default_value_t = ModeArg::Dense)]
        mode: ModeArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Render an embedding CSV as an SVG scatter plot.
    ///
    /// x1 and x2 are scaled to fill the unit square of their bounding box
    /// (y up). Point area is proportional to weight. The fill runs linearly
    /// from #2166ac at the minimum to #b2182b at the maximum of the color
    /// column (x3 by default).
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// 1-based coordinate column used for color
        #[arg(long)]
        color_col: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check the character-theoretic spectrum against dense linear algebra; exit 0 iff all checks pass
    Verify {
        #[command(flatten)]
        group: GroupArgs,
        /// Largest group order to build dense matrices for
        #[arg(long, default_value_t = DEFAULT_VERIFY_CAP)]
        cap: usize,
    },
    /// Write synthetic full rankings in the ranking-file format
    Synthesize {
        /// Number of items
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        rows: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Print the pairwise distance matrix as CSV
    Distances {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct GroupArgs {
    #[arg(long, value_enum)]
    group: GroupKind,
    /// Degree for sn, order for cyclic
    #[arg(long)]
    n: Option<usize>,
    /// Rank for c2k
    #[arg(long)]
    k: Option<usize>,
    /// Defaults to the group's natural metric
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
}

#[derive(Args)]
struct OutArgs {
    /// Output path (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupKind {
    Sn,
    C2k,
    Cyclic,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Hamming,
    Arc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Dense,
    Standard,
}

enum Failure {
    Usage(String),
    Resource(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::TooLarge { .. } | Error::Mode(_) => Failure::Resource(msg),
            Error::NotBiInvariant(_) | Error::NotSymmetric(_) => Failure::Other(msg),
            _ => Failure::Usage(msg),
        }
    }
}

type CmdResult = Result<(), Failure>;

impl GroupArgs {
    fn resolve(&self) -> Result<(GroupSpec, MetricSpec), Failure> {
        let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for this group")));
        let spec = match self.group {
            GroupKind::Sn => GroupSpec::symmetric(need(self.n, "n")?)?,
            GroupKind::C2k => GroupSpec::elementary_abelian_2(need(self.k, "k")?)?,
            GroupKind::Cyclic => GroupSpec::cyclic(need(self.n, "n")?)?,
        };
        let metric = match self.metric {
            None => MetricSpec::natural_for(&spec),
            Some(MetricArg::Arc) => MetricSpec::CircularArc,
            Some(MetricArg::Hamming) => match spec {
                GroupSpec::Symmetric { .. } => MetricSpec::HammingPermutation,
                _ => MetricSpec::HammingBitvector,
            },
        };
        if !metric.compatible_with(&spec) {
            return Err(Failure::Usage(format!("metric {metric} is not defined on {spec}")));
        }
        Ok((spec, metric))
    }
}

fn emit(out: &OutArgs, text: &str) -> CmdResult {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Other(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Other(e.to_string())),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))
}

fn with_input(path: &Path, e: Error) -> Failure {
    match e {
        Error::Parse { line, message } => Failure::Usage(format!("{}:{line}: {message}", path.display())),
        other => other.into(),
    }
}

fn cmd_spectrum(group: &GroupArgs, closed_form: bool, verify: bool, out: &OutArgs) -> CmdResult {
    let (spec, metric) = group.resolve()?;
    let summary = if closed_form {
        match (spec, metric) {
            (GroupSpec::ElementaryAbelian2 { k }, MetricSpec::HammingBitvector) => closed_form_c2k(k)?,
            (GroupSpec::Symmetric { n }, MetricSpec::HammingPermutation) => closed_form_sn(n)?,
            _ => return Err(Failure::Usage(format!("no closed form for {spec} with {metric}"))),
        }
    } else {
        spectrum_via_characters(&spec, &metric)?
    };
    let mut doc: serde_json::Value = serde_json::from_str(&summary.to_json()).expect("summary JSON");
    if verify {
        if spec.order() > DEFAULT_VERIFY_CAP as u128 {
            return Err(Failure::Resource(format!(
                "--verify builds a dense kernel and is limited to order {DEFAULT_VERIFY_CAP}; {spec} has order {}",
                spec.order()
            )));
        }
        let dec = eigendecompose(&double_center(&build_distance_matrix(&spec, &metric)?))?;
        let cmp = compare_with_eigenvalues(&summary, &dec.eigenvalues);
        doc["verification"] = serde_json::json!({
            "max_abs_deviation": cmp.max_abs_deviation,
            "max_rel_deviation": cmp.max_rel_deviation,
            "multiplicities_match": cmp.multiplicities_match,
            "passed": cmp.passed(SPECTRUM_TOL),
        });
    }
    emit(out, &(serde_json::to_string_pretty(&doc).expect("JSON") + "\n"))
}

fn cmd_chartable(group: &GroupArgs, format: TableFormat, out: &OutArgs) -> CmdResult {
    let (spec, _) = group.resolve()?;
    let count = class_count(&spec);
    if count > CHARTABLE_CLASS_CAP as u128 {
        return Err(Failure::Resource(format!(
            "{spec} has {count} conjugacy classes; chartable is limited to {CHARTABLE_CLASS_CAP}"
        )));
    }
    let table = character_table_with_cap(&spec, CHARTABLE_CLASS_CAP)?;
    let mut header = vec!["irrep".to_string()];
    header.extend(table.classes.iter().map(|c| format!("{}|{}", c.label, c.size)));
    let rows: Vec<Vec<String>> = table
        .labels
        .iter()
        .zip(&table.entries)
        .map(|(l, row)| std::iter::once(l.to_string()).chain(row.iter().map(|v| v.to_string())).collect())
        .collect();
    let text = match format {
        TableFormat::Csv => {
            let quote = |s: &String| if s.contains(',') { format!("\"{s}\"") } else { s.clone() };
            std::iter::once(&header)
                .chain(&rows)
                .map(|r| r.iter().map(quote).collect::<Vec<_>>().join(",") + "\n")
                .collect::<String>()
        }
        TableFormat::Text => {
            let widths: Vec<usize> = (0..header.len())
                .map(|c| std::iter::once(&header).chain(&rows).map(|r| r[c].chars().count()).max().unwrap_or(0))
                .collect();
            std::iter::once(&header)
                .chain(&rows)
                .map(|r| {
                    let cells: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
                    cells.join("  ").trim_end().to_string() + "\n"
                })
                .collect::<String>()
        }
    };
    emit(out, &text)
}

fn cmd_embed(input: &Path, dims: usize, mode: ModeArg, out: &OutArgs) -> CmdResult {
    let dataset = parse_rankings(&read_input(input)?).map_err(|e| with_input(input, e))?;
    let samples = aggregate(&dataset)?;
    let n = dataset.n_items();
    let mode = match mode {
        ModeArg::Dense => EmbedMode::Dense,
        ModeArg::Standard => EmbedMode::Standard,
    };
    let embedding = embed_dataset(&samples, n, dims, mode)?;
    if embedding.truncated {
        eprintln!("note: only {} coordinates available, {dims} requested", embedding.dims());
    }
    let rows = samples
        .iter()
        .map(|s| Ok((ranking_label(&s.permutation, &dataset.items)?, s.weight)))
        .collect::<Result<Vec<_>, Error>>()?;
    emit(out, &embedding.to_csv(&rows)?)
}

fn cmd_plot(input: &Path, color_col: Option<usize>, out: &OutArgs) -> CmdResult {
    let table = parse_embedding_csv(&read_input(input)?).map_err(|e| with_input(input, e))?;
    let options = PlotOptions { color_column: color_col, ..PlotOptions::default() };
    emit(out, &render_svg(&table, &options)?)
}

fn cmd_verify(group: &GroupArgs, cap: usize) -> Result<ExitCode, Failure> {
    let (spec, metric) = group.resolve()?;
    let report = verify_group(&spec, &metric, cap)?;
    println!("{report}");
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_synthesize(n: usize, rows: usize, seed: u64, out: &OutArgs) -> CmdResult {
    eprintln!("seed: {seed}");
    emit(out, &synthesize_rankings(n, rows, seed)?.to_text())
}

fn cmd_distances(group: &GroupArgs, out: &OutArgs) -> CmdResult {
    let (spec, metric) = group.resolve()?;
    emit(out, &build_distance_matrix(&spec, &metric)?.to_csv())
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let done = |r: CmdResult| r.map(|()| ExitCode::SUCCESS);
    match cli.command {
        Command::Spectrum { group, closed_form, verify, out } => done(cmd_spectrum(&group, closed_form, verify, &out)),
        Command::Chartable { group, format, out } => done(cmd_chartable(&group, format, &out)),
        Command::Embed { input, dims, mode, out } => done(cmd_embed(&input, dims as usize, mode, &out)),
        Command::Plot { input, color_col, out } => done(cmd_plot(&input, color_col, &out)),
        Command::Verify { group, cap } => cmd_verify(&group, cap),
        Command::Synthesize { n, rows, seed, out } => done(cmd_synthesize(n, rows, seed, &out)),
        Command::Distances { group, out } => done(cmd_distances(&group, &out)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
