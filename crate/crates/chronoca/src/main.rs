//! Thin command-line front end over the library pipeline.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chronoca::pipeline::{boundary_line, Artifact, InputKind, PipelineConfig, SourceSpec};
use chronoca::{ca, chronocluster::Dendrogram, plot, Error, FactorModel, Result, TimeBin};

#[derive(Parser)]
#[command(
    name = "chronoca",
    version,
    about = "Embed ordered count data via correspondence analysis and read \
             changepoints off a sequence-constrained cluster hierarchy"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Table,
    Events,
}

#[derive(Clone, Copy, ValueEnum)]
enum BinArg {
    Month,
    Year,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArtifactArg {
    FactorsJson,
    DendrogramJson,
    Newick,
    FactorMapSvg,
    DendrogramSvg,
    ReportText,
}

impl From<ArtifactArg> for Artifact {
    fn from(a: ArtifactArg) -> Artifact {
        match a {
            ArtifactArg::FactorsJson => Artifact::FactorsJson,
            ArtifactArg::DendrogramJson => Artifact::DendrogramJson,
            ArtifactArg::Newick => Artifact::Newick,
            ArtifactArg::FactorMapSvg => Artifact::FactorMapSvg,
            ArtifactArg::DendrogramSvg => Artifact::DendrogramSvg,
            ArtifactArg::ReportText => Artifact::ReportText,
        }
    }
}

/// Flags shared by every subcommand that ingests raw data.
#[derive(Args)]
struct SourceArgs {
    /// Input file (counts CSV, or event-log CSV with --kind events)
    #[arg(long)]
    input: PathBuf,
    /// Input format
    #[arg(long, value_enum, default_value = "table")]
    kind: KindArg,
    /// Calendar bin for event logs
    #[arg(long, value_enum, default_value = "month")]
    bin: BinArg,
    /// Recode cells to presence/absence: 1 if count > threshold else 0
    #[arg(long, value_name = "THRESHOLD")]
    binarize: Option<f64>,
    /// Sum columns with totals below this into one "other" column
    #[arg(long, value_name = "MIN_TOTAL")]
    merge_rare: Option<f64>,
    /// Label for the merged rare column
    #[arg(long, default_value = "other")]
    other_label: String,
}

impl SourceArgs {
    fn spec(&self) -> SourceSpec {
        SourceSpec {
            input: self.input.clone(),
            kind: match self.kind {
                KindArg::Table => InputKind::Table,
                KindArg::Events => InputKind::Events,
            },
            bin: match self.bin {
                BinArg::Month => TimeBin::Month,
                BinArg::Year => TimeBin::Year,
            },
            binarize: self.binarize,
            merge_rare: self.merge_rare,
            other_label: self.other_label.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Load, aggregate, and normalize input into a counts CSV
    Ingest {
        #[command(flatten)]
        source: SourceArgs,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a table's inertia into a factor model
    Ca {
        #[command(flatten)]
        source: SourceArgs,
        /// Factor-model JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render the factor plane to this SVG file
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Factor pair for --svg (1-based)
        #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [1, 2])]
        axes: Vec<usize>,
    },
    /// Build the sequence-constrained complete-link hierarchy
    Cluster {
        /// Input file (counts CSV, or event-log CSV with --kind events)
        #[arg(long, required_unless_present = "factors", conflicts_with = "factors")]
        input: Option<PathBuf>,
        /// Input format
        #[arg(long, value_enum, default_value = "table")]
        kind: KindArg,
        /// Calendar bin for event logs
        #[arg(long, value_enum, default_value = "month")]
        bin: BinArg,
        /// Recode cells to presence/absence: 1 if count > threshold else 0
        #[arg(long, value_name = "THRESHOLD")]
        binarize: Option<f64>,
        /// Sum columns with totals below this into one "other" column
        #[arg(long, value_name = "MIN_TOTAL")]
        merge_rare: Option<f64>,
        /// Label for the merged rare column
        #[arg(long, default_value = "other")]
        other_label: String,
        /// Cluster a previously saved factor model instead of raw input
        #[arg(long)]
        factors: Option<PathBuf>,
        /// Dendrogram JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the tree in Newick form
        #[arg(long)]
        newick: Option<PathBuf>,
        /// Also render the dendrogram to this SVG file
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Cut a saved dendrogram into k contiguous clusters
    Cut {
        /// Dendrogram JSON produced by `cluster`
        #[arg(long)]
        dendrogram: PathBuf,
        /// Number of clusters
        #[arg(long)]
        k: usize,
    },
    /// List the k-1 boundaries of a k-cluster cut with their heights
    Changepoints {
        /// Dendrogram JSON produced by `cluster`
        #[arg(long)]
        dendrogram: PathBuf,
        /// Number of clusters
        #[arg(long)]
        k: usize,
    },
    /// Run ingest -> ca -> cluster -> changepoints and emit artifacts
    Pipeline {
        #[command(flatten)]
        source: SourceArgs,
        /// Number of clusters
        #[arg(long)]
        k: usize,
        /// Directory for emitted artifacts
        #[arg(long)]
        out_dir: PathBuf,
        /// Artifacts to emit (comma separated; all when omitted)
        #[arg(long, value_enum, value_delimiter = ',')]
        emit: Option<Vec<ArtifactArg>>,
    },
}

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    if let Err(err) = run(cli, &mut stdout, &mut stderr) {
        let _ = writeln!(stderr, "error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli, out: &mut dyn Write, diag: &mut dyn Write) -> Result<()> {
    match cli.cmd {
        Cmd::Ingest { source, out: out_path } => {
            let table = source.spec().load(diag)?;
            match out_path {
                Some(path) => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf)?;
                    fs::write(path, buf)?;
                }
                None => table.write_csv(out)?,
            }
            Ok(())
        }
        Cmd::Ca { source, out: out_path, svg, axes } => {
            let table = source.spec().load(diag)?;
            let model = ca::analyze(&table)?;
            if let Some(svg_path) = svg {
                let doc = plot::render_factor_map(&model, (axes[0], axes[1]))?;
                fs::write(svg_path, doc)?;
            }
            match out_path {
                Some(path) => {
                    fs::write(path, model.to_json())?;
                    writeln!(out, "total inertia: {:.6}", model.total_inertia)?;
                    writeln!(out, "factors: {}", model.n_factors())?;
                    if model.n_factors() > 0 {
                        let top = model.n_factors().min(2);
                        writeln!(
                            out,
                            "explained ({top} factors): {:.1}%",
                            100.0 * model.explained_ratio(top)?
                        )?;
                    }
                }
                None => writeln!(out, "{}", model.to_json())?,
            }
            Ok(())
        }
        Cmd::Cluster {
            input,
            kind,
            bin,
            binarize,
            merge_rare,
            other_label,
            factors,
            out: out_path,
            newick,
            svg,
        } => {
            let (points, labels) = match factors {
                Some(path) => {
                    let model = FactorModel::from_json(&fs::read_to_string(path)?)?;
                    (model.row_points(), model.row_labels)
                }
                None => {
                    let source = SourceArgs {
                        input: input.expect("clap enforces --input or --factors"),
                        kind,
                        bin,
                        binarize,
                        merge_rare,
                        other_label,
                    };
                    let table = source.spec().load(diag)?;
                    let model = ca::analyze(&table)?;
                    if model.n_factors() == 0 {
                        return Err(Error::Domain(
                            "no factors: the table has zero inertia, nothing to cluster".into(),
                        ));
                    }
                    (model.row_points(), table.row_labels().to_vec())
                }
            };
            let dendrogram = chronoca::cluster_sequence(&points)?;
            if let Some(path) = newick {
                fs::write(path, dendrogram.to_newick(&labels)?)?;
            }
            if let Some(path) = svg {
                fs::write(path, plot::render_dendrogram(&dendrogram, &labels)?)?;
            }
            match out_path {
                Some(path) => fs::write(path, dendrogram.to_json())?,
                None => writeln!(out, "{}", dendrogram.to_json())?,
            }
            Ok(())
        }
        Cmd::Cut { dendrogram, k } => {
            let dend = Dendrogram::from_json(&fs::read_to_string(dendrogram)?)?;
            let partition = dend.cut(k)?;
            let labels: Vec<String> = partition.labels().iter().map(|l| l.to_string()).collect();
            writeln!(out, "{}", labels.join(" "))?;
            Ok(())
        }
        Cmd::Changepoints { dendrogram, k } => {
            let dend = Dendrogram::from_json(&fs::read_to_string(dendrogram)?)?;
            let report = dend.changepoints(k)?;
            for b in &report.boundaries {
                writeln!(out, "{}", boundary_line(b, None).trim_start())?;
            }
            Ok(())
        }
        Cmd::Pipeline { source, k, out_dir, emit } => {
            let cfg = PipelineConfig {
                source: source.spec(),
                k,
                out_dir,
                emit: emit
                    .map(|list| list.into_iter().map(Artifact::from).collect())
                    .unwrap_or_else(|| Artifact::ALL.to_vec()),
            };
            chronoca::run_pipeline(&cfg, out, diag)?;
            Ok(())
        }
    }
}
