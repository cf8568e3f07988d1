//! End-to-end pipeline: ingest → factor embedding → sequence clustering →
//! changepoint report, with artifact emission.
//!
//! Artifacts are staged in memory and then written via a temp-file +
//! rename step per file, so a failure never leaves a partial artifact
//! behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::ca::{self, FactorModel};
use crate::chronocluster::{cluster_sequence, Boundary, Partition};
use crate::contingency::{ContingencyTable, EventLog, PruneLog, TimeBin};
use crate::error::{Error, Result};
use crate::plot;

/// Whether the input file is a counts table or a timestamped event log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Table,
    Events,
}

/// Artifacts the pipeline can emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Artifact {
    FactorsJson,
    DendrogramJson,
    Newick,
    FactorMapSvg,
    DendrogramSvg,
    ReportText,
}

impl Artifact {
    pub const ALL: [Artifact; 6] = [
        Artifact::FactorsJson,
        Artifact::DendrogramJson,
        Artifact::Newick,
        Artifact::FactorMapSvg,
        Artifact::DendrogramSvg,
        Artifact::ReportText,
    ];

    /// The flag spelling accepted by `--emit`.
    pub fn flag_name(self) -> &'static str {
        match self {
            Artifact::FactorsJson => "factors-json",
            Artifact::DendrogramJson => "dendrogram-json",
            Artifact::Newick => "newick",
            Artifact::FactorMapSvg => "factor-map-svg",
            Artifact::DendrogramSvg => "dendrogram-svg",
            Artifact::ReportText => "report-text",
        }
    }

    /// File name written under the output directory.
    pub fn file_name(self) -> &'static str {
        match self {
            Artifact::FactorsJson => "factors.json",
            Artifact::DendrogramJson => "dendrogram.json",
            Artifact::Newick => "tree.nwk",
            Artifact::FactorMapSvg => "factor_map.svg",
            Artifact::DendrogramSvg => "dendrogram.svg",
            Artifact::ReportText => "report.txt",
        }
    }
}

impl std::str::FromStr for Artifact {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Artifact::ALL
            .into_iter()
            .find(|a| a.flag_name() == s)
            .ok_or_else(|| Error::usage(format!("unknown artifact {s:?}")))
    }
}

/// Where the counts come from and which recodings to apply.
#[derive(Clone, Debug)]
pub struct SourceSpec {
    pub input: PathBuf,
    pub kind: InputKind,
    /// Calendar bin for event-log inputs.
    pub bin: TimeBin,
    /// Optional presence/absence recoding, applied before rare-column
    /// merging.
    pub binarize: Option<f64>,
    /// Optional rare-column merge threshold.
    pub merge_rare: Option<f64>,
    /// Label of the merged rare column.
    pub other_label: String,
}

impl SourceSpec {
    pub fn table(input: impl Into<PathBuf>) -> Self {
        SourceSpec {
            input: input.into(),
            kind: InputKind::Table,
            bin: TimeBin::Month,
            binarize: None,
            merge_rare: None,
            other_label: "other".to_owned(),
        }
    }

    pub fn events(input: impl Into<PathBuf>, bin: TimeBin) -> Self {
        SourceSpec {
            bin,
            kind: InputKind::Events,
            ..SourceSpec::table(input)
        }
    }

    /// Loads and normalizes the counts. Prune warnings go to `diag`.
    pub fn load(&self, diag: &mut dyn Write) -> Result<ContingencyTable> {
        let bytes = fs::read(&self.input)?;
        let (mut table, log) = match self.kind {
            InputKind::Table => ContingencyTable::from_csv(bytes.as_slice())?,
            InputKind::Events => EventLog::from_csv(bytes.as_slice())?.aggregate(self.bin)?,
        };
        emit_warnings(&log, diag)?;
        if let Some(threshold) = self.binarize {
            let (recoded, log) = table.binarize(threshold)?;
            emit_warnings(&log, diag)?;
            table = recoded;
        }
        if let Some(min_total) = self.merge_rare {
            table = table.merge_rare_columns(min_total, &self.other_label)?;
        }
        Ok(table)
    }
}

/// Everything the pipeline needs to run.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub source: SourceSpec,
    /// Number of clusters for the cut.
    pub k: usize,
    pub out_dir: PathBuf,
    pub emit: Vec<Artifact>,
}

/// What the pipeline computed, returned for programmatic use; the same
/// information is printed on the output stream.
#[derive(Clone, Debug)]
pub struct PipelineSummary {
    pub total_inertia: f64,
    pub n_factors: usize,
    /// Inertia share of the first `min(2, N)` factors.
    pub explained_two: f64,
    pub clustering_skipped: bool,
    pub boundaries: Vec<Boundary>,
    pub written: Vec<PathBuf>,
}

fn emit_warnings(log: &PruneLog, diag: &mut dyn Write) -> Result<()> {
    for w in log.warnings() {
        writeln!(diag, "{w}")?;
    }
    Ok(())
}

/// Runs the whole chain and writes the requested artifacts. The summary
/// (total inertia, factor count, explained ratio of two factors, boundary
/// list) is printed to `out`; warnings and skip notices go to `diag`.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<PipelineSummary> {
    if cfg.k < 1 {
        return Err(Error::usage(format!("k must be >= 1, got {}", cfg.k)));
    }

    let table = cfg.source.load(diag)?;
    let model = ca::analyze(&table)?;
    let n_factors = model.n_factors();

    let mut staged: Vec<(Artifact, String)> = Vec::new();
    let wants = |artifact: Artifact| cfg.emit.contains(&artifact);
    if wants(Artifact::FactorsJson) {
        staged.push((Artifact::FactorsJson, model.to_json()));
    }

    if n_factors == 0 {
        writeln!(out, "total inertia 0; no factors; clustering skipped")?;
        for artifact in Artifact::ALL {
            if wants(artifact) && artifact != Artifact::FactorsJson {
                writeln!(
                    diag,
                    "WARN skipped {}: no factors to cluster",
                    artifact.file_name()
                )?;
            }
        }
        let written = write_staged(&cfg.out_dir, &staged)?;
        return Ok(PipelineSummary {
            total_inertia: model.total_inertia,
            n_factors: 0,
            explained_two: 1.0,
            clustering_skipped: true,
            boundaries: Vec::new(),
            written,
        });
    }

    let points = model.row_points();
    let dendrogram = cluster_sequence(&points)?;
    let partition = dendrogram.cut(cfg.k)?;
    let report = dendrogram.changepoints(cfg.k)?;
    let explained_two = model.explained_ratio(n_factors.min(2))?;

    if wants(Artifact::DendrogramJson) {
        staged.push((Artifact::DendrogramJson, dendrogram.to_json()));
    }
    if wants(Artifact::Newick) {
        staged.push((Artifact::Newick, dendrogram.to_newick(table.row_labels())?));
    }
    if wants(Artifact::FactorMapSvg) {
        if n_factors >= 2 {
            staged.push((
                Artifact::FactorMapSvg,
                plot::render_factor_map(&model, (1, 2))?,
            ));
        } else {
            writeln!(diag, "WARN skipped factor_map.svg: only one factor")?;
        }
    }
    if wants(Artifact::DendrogramSvg) {
        staged.push((
            Artifact::DendrogramSvg,
            plot::render_dendrogram(&dendrogram, table.row_labels())?,
        ));
    }
    if wants(Artifact::ReportText) {
        staged.push((
            Artifact::ReportText,
            report_text(&table, &model, explained_two, &partition, &report.boundaries, cfg.k),
        ));
    }
    let written = write_staged(&cfg.out_dir, &staged)?;

    writeln!(out, "total inertia: {:.6}", model.total_inertia)?;
    writeln!(out, "factors: {n_factors}")?;
    writeln!(
        out,
        "explained ({} factors): {:.1}%",
        n_factors.min(2),
        100.0 * explained_two
    )?;
    writeln!(out, "boundaries (k={}): {}", cfg.k, report.boundaries.len())?;
    for b in &report.boundaries {
        writeln!(out, "{}", boundary_line(b, Some(table.row_labels())))?;
    }

    Ok(PipelineSummary {
        total_inertia: model.total_inertia,
        n_factors,
        explained_two,
        clustering_skipped: false,
        boundaries: report.boundaries,
        written,
    })
}

/// One human-readable line per boundary, 1-based row positions.
pub fn boundary_line(b: &Boundary, row_labels: Option<&[String]>) -> String {
    match row_labels {
        Some(labels) => format!(
            "  between rows {} and {} ({} | {}), height {:.6}",
            b.position,
            b.position + 1,
            labels[b.position - 1],
            labels[b.position],
            b.height
        ),
        None => format!(
            "  between rows {} and {}, height {:.6}",
            b.position,
            b.position + 1,
            b.height
        ),
    }
}

fn report_text(
    table: &ContingencyTable,
    model: &FactorModel,
    explained_two: f64,
    partition: &Partition,
    boundaries: &[Boundary],
    k: usize,
) -> String {
    let mut text = String::new();
    text.push_str(&format!("rows: {}\ncolumns: {}\n", table.n_rows(), table.n_cols()));
    text.push_str(&format!("total inertia: {:.6}\n", model.total_inertia));
    text.push_str(&format!("factors: {}\n", model.n_factors()));
    text.push_str(&format!(
        "explained ({} factors): {:.1}%\n",
        model.n_factors().min(2),
        100.0 * explained_two
    ));

    text.push_str(&format!("segments (k={k}):\n"));
    let labels = partition.labels();
    let mut start = 0;
    for i in 0..labels.len() {
        if i + 1 == labels.len() || labels[i + 1] != labels[i] {
            text.push_str(&format!(
                "  cluster {}: rows {}..{} ({} .. {})\n",
                labels[start],
                start + 1,
                i + 1,
                table.row_labels()[start],
                table.row_labels()[i]
            ));
            start = i + 1;
        }
    }

    text.push_str(&format!("boundaries (k={k}): {}\n", boundaries.len()));
    for b in boundaries {
        text.push_str(&boundary_line(b, Some(table.row_labels())));
        text.push('\n');
    }
    text
}

/// Writes each staged artifact to `<out_dir>/.tmp.<name>` and renames it
/// into place, cleaning the temp file up on failure.
fn write_staged(out_dir: &Path, staged: &[(Artifact, String)]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(staged.len());
    if staged.is_empty() {
        return Ok(written);
    }
    fs::create_dir_all(out_dir)?;
    for (artifact, content) in staged {
        let final_path = out_dir.join(artifact.file_name());
        let tmp_path = out_dir.join(format!(".tmp.{}", artifact.file_name()));
        let result = fs::write(&tmp_path, content).and_then(|_| fs::rename(&tmp_path, &final_path));
        if let Err(err) = result {
            let _ = fs::remove_file(&tmp_path);
            return Err(err.into());
        }
        written.push(final_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    // The 4-row two-attribute fixture whose profile geometry is a line
    // with gaps proportional to (1, 9, 1): rows 1-2 and rows 3-4 pair up,
    // with the dominant split between rows 2 and 3.
    const LINE_FIXTURE: &str = "obs,a,b\ns1,20,80\ns2,25,75\ns3,70,30\ns4,75,25\n";
    const INDEPENDENCE_FIXTURE: &str = "obs,a,b\ns1,2,2\ns2,1,1\n";

    fn write_fixture(dir: &Path, name: &str, content: &str) -> PathBuf {
        let path = dir.join(name);
        fs::write(&path, content).unwrap();
        path
    }

    fn config(input: &Path, k: usize, out_dir: PathBuf) -> PipelineConfig {
        PipelineConfig {
            source: SourceSpec::table(input),
            k,
            out_dir,
            emit: Vec::new(),
        }
    }

    #[test]
    fn line_fixture_reports_split_between_rows_2_and_3() {
        let tmp = tempfile::tempdir().unwrap();
        let input = write_fixture(tmp.path(), "line.csv", LINE_FIXTURE);
        let mut cfg = config(&input, 2, tmp.path().join("out"));
        cfg.emit = vec![Artifact::ReportText];

        let mut out = Vec::new();
        let mut diag = Vec::new();
        let summary = run_pipeline(&cfg, &mut out, &mut diag).unwrap();
        assert!(!summary.clustering_skipped);
        assert_eq!(summary.n_factors, 1);
        assert_eq!(summary.boundaries.len(), 1);
        assert_eq!(summary.boundaries[0].position, 2);

        let stdout = String::from_utf8(out).unwrap();
        assert!(stdout.contains("between rows 2 and 3"), "{stdout}");
        let report = fs::read_to_string(tmp.path().join("out/report.txt")).unwrap();
        assert!(report.contains("between rows 2 and 3"), "{report}");
        assert!(report.contains("cluster 1: rows 1..2"), "{report}");
    }

    #[test]
    fn independence_fixture_skips_clustering() {
        let tmp = tempfile::tempdir().unwrap();
        let input = write_fixture(tmp.path(), "indep.csv", INDEPENDENCE_FIXTURE);
        let mut cfg = config(&input, 2, tmp.path().join("out"));
        cfg.emit = vec![Artifact::FactorsJson, Artifact::DendrogramJson];

        let mut out = Vec::new();
        let mut diag = Vec::new();
        let summary = run_pipeline(&cfg, &mut out, &mut diag).unwrap();
        assert!(summary.clustering_skipped);
        assert_eq!(summary.n_factors, 0);

        let stdout = String::from_utf8(out).unwrap();
        assert_eq!(stdout, "total inertia 0; no factors; clustering skipped\n");
        let stderr = String::from_utf8(diag).unwrap();
        assert!(stderr.contains("WARN skipped dendrogram.json"), "{stderr}");
        assert!(tmp.path().join("out/factors.json").exists());
        assert!(!tmp.path().join("out/dendrogram.json").exists());
    }

    #[test]
    fn pipeline_outputs_are_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        // three attributes give two factors, so every artifact is emitted
        let wide = "obs,a,b,c\ns1,20,70,10\ns2,25,65,15\ns3,70,20,30\ns4,75,15,40\n";
        let input = write_fixture(tmp.path(), "wide.csv", wide);
        let run = |out_dir: PathBuf| -> Vec<(String, Vec<u8>)> {
            let mut cfg = config(&input, 2, out_dir.clone());
            cfg.emit = Artifact::ALL.to_vec();
            let mut out = Vec::new();
            let mut diag = Vec::new();
            run_pipeline(&cfg, &mut out, &mut diag).unwrap();
            let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out_dir)
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
                })
                .collect();
            files.sort();
            files.push(("stdout".into(), out));
            files
        };
        let a = run(tmp.path().join("out_a"));
        let b = run(tmp.path().join("out_b"));
        assert_eq!(a, b);
        assert_eq!(a.len(), 7); // six artifacts + stdout
    }

    #[test]
    fn pipeline_propagates_ingest_warnings() {
        let tmp = tempfile::tempdir().unwrap();
        let input = write_fixture(tmp.path(), "warn.csv", "obs,a,b\ns1,1,2\ns2,0,0\ns3,2,1\n");
        let cfg = config(&input, 2, tmp.path().join("out"));
        let mut out = Vec::new();
        let mut diag = Vec::new();
        run_pipeline(&cfg, &mut out, &mut diag).unwrap();
        let stderr = String::from_utf8(diag).unwrap();
        assert!(stderr.contains("WARN dropped row s2"), "{stderr}");
    }

    #[test]
    fn pipeline_missing_input_is_io_error() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = config(&tmp.path().join("missing.csv"), 2, tmp.path().join("out"));
        let err = run_pipeline(&cfg, &mut Vec::new(), &mut Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn pipeline_k_zero_is_usage_error() {
        let tmp = tempfile::tempdir().unwrap();
        let input = write_fixture(tmp.path(), "line.csv", LINE_FIXTURE);
        let cfg = config(&input, 0, tmp.path().join("out"));
        let err = run_pipeline(&cfg, &mut Vec::new(), &mut Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn pipeline_events_input_aggregates_first() {
        let tmp = tempfile::tempdir().unwrap();
        let events = "date,x,y\n\
            1990-01-03,1,9\n1990-01-20,1,9\n1990-02-11,2,18\n1990-03-05,2,18\n\
            1990-04-09,9,1\n1990-05-21,18,2\n1990-06-30,9,1\n";
        let input = write_fixture(tmp.path(), "events.csv", events);
        let cfg = PipelineConfig {
            source: SourceSpec::events(&input, TimeBin::Month),
            k: 2,
            out_dir: tmp.path().join("out"),
            emit: Vec::new(),
        };
        let mut out = Vec::new();
        let summary = run_pipeline(&cfg, &mut out, &mut Vec::new()).unwrap();
        assert_eq!(summary.boundaries.len(), 1);
        assert_eq!(summary.boundaries[0].position, 3);
        let stdout = String::from_utf8(out).unwrap();
        assert!(stdout.contains("between rows 3 and 4"), "{stdout}");
    }

    #[test]
    fn artifact_flag_names_round_trip() {
        for artifact in Artifact::ALL {
            let parsed: Artifact = artifact.flag_name().parse().unwrap();
            assert_eq!(parsed, artifact);
        }
        assert!("bogus".parse::<Artifact>().is_err());
    }
}
