use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{render_svg, AmbiguityMap, RecordStatus, RunConfig, SweepRecord, TheoryBand};
use crate::error::{Error, Result};
use crate::ising::TransitionMatrix;

pub const SWEEP_COLUMNS: [&str; 19] = [
    "t_nominal",
    "b_nominal",
    "j",
    "gamma00",
    "gamma01",
    "gamma10",
    "gamma11",
    "c_c",
    "c_q",
    "t_m",
    "b_m",
    "c_q_m",
    "t_s",
    "b_s",
    "c_q_s",
    "residual",
    "shots",
    "seed",
    "status",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub sweep: PathBuf,
    pub manifest: PathBuf,
    pub ambiguity: PathBuf,
    pub band: PathBuf,
    pub svg: Option<PathBuf>,
}

impl OutputPaths {
    pub fn in_dir(dir: &Path, svg: bool) -> Self {
        OutputPaths {
            sweep: dir.join("sweep.csv"),
            manifest: dir.join("manifest.json"),
            ambiguity: dir.join("ambiguity.csv"),
            band: dir.join("band.csv"),
            svg: svg.then(|| dir.join("ambiguity.svg")),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            msg: format!("{other:?}"),
        },
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    // writing into memory cannot fail
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for row in rows {
        w.write_record(row).expect("in-memory CSV");
    }
    w.into_inner().expect("in-memory CSV")
}

fn to_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    write_file(path, &csv_bytes(header, rows))
}

pub fn sweep_row(r: &SweepRecord) -> Vec<String> {
    let g = r.gamma.map(|g| g.entries());
    let entry = |i: usize, j: usize| opt(g.map(|g| g[i][j]));
    vec![
        r.t_nominal.to_string(),
        r.b_nominal.to_string(),
        r.j.to_string(),
        entry(0, 0),
        entry(0, 1),
        entry(1, 0),
        entry(1, 1),
        opt(r.c_c),
        opt(r.c_q),
        opt(r.t_m),
        opt(r.b_m),
        opt(r.c_q_m),
        opt(r.t_s),
        opt(r.b_s),
        opt(r.c_q_s),
        opt(r.residual),
        r.shots.map(|s| s.to_string()).unwrap_or_default(),
        r.seed.to_string(),
        r.status.label(),
    ]
}

pub fn write_sweep_csv(path: &Path, records: &[SweepRecord]) -> Result<()> {
    to_csv(path, &SWEEP_COLUMNS, records.iter().map(sweep_row))
}

/// Reads a sweep CSV back. Fields not stored in the file (`Γ^s`, `p^s`, the
/// fixed-point states) come back empty.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let fmt = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(SWEEP_COLUMNS.iter().copied()) {
        return Err(fmt("unexpected sweep CSV header".into()));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let field = |k: usize| row.get(k).unwrap_or("");
        let num = |k: usize| -> Result<Option<f64>> {
            let s = field(k);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>().map(Some).map_err(|_| {
                fmt(format!(
                    "row {}: bad {} value {s:?}",
                    line + 1,
                    SWEEP_COLUMNS[k]
                ))
            })
        };
        let req = |k: usize| -> Result<f64> {
            num(k)?.ok_or_else(|| fmt(format!("row {}: missing {}", line + 1, SWEEP_COLUMNS[k])))
        };
        let mut rec = SweepRecord::empty(req(2)?, req(1)?, req(0)?, 0);
        // All four entries are kept so a read-write cycle is byte-exact.
        rec.gamma = match (num(3)?, num(4)?, num(5)?, num(6)?) {
            (Some(a), Some(b), Some(c), Some(d)) => Some(TransitionMatrix::new([[a, b], [c, d]])?),
            _ => None,
        };
        rec.c_c = num(7)?;
        rec.c_q = num(8)?;
        rec.t_m = num(9)?;
        rec.b_m = num(10)?;
        rec.c_q_m = num(11)?;
        rec.t_s = num(12)?;
        rec.b_s = num(13)?;
        rec.c_q_s = num(14)?;
        rec.residual = num(15)?;
        rec.shots = match field(16) {
            "" => None,
            s => Some(
                s.parse()
                    .map_err(|_| fmt(format!("row {}: bad shots {s:?}", line + 1)))?,
            ),
        };
        rec.seed = field(17)
            .parse()
            .map_err(|_| fmt(format!("row {}: bad seed", line + 1)))?;
        rec.status = match field(18) {
            "ok" => RecordStatus::Ok,
            s => RecordStatus::Failed(s.strip_prefix("failed: ").unwrap_or(s).to_string()),
        };
        out.push(rec);
    }
    Ok(out)
}

/// Cells with `t1 < t2` of every map; `r` and `k` are empty when undefined.
pub fn ambiguity_csv(maps: &[AmbiguityMap]) -> String {
    let rows = maps.iter().flat_map(|m| {
        m.upper().map(move |c| {
            vec![
                m.source.name().to_string(),
                c.t1.to_string(),
                c.t2.to_string(),
                opt(c.r),
                opt(c.k),
            ]
        })
    });
    String::from_utf8(csv_bytes(&["source", "t1", "t2", "r", "k"], rows)).expect("UTF-8 CSV")
}

pub fn write_ambiguity_csv(path: &Path, maps: &[AmbiguityMap]) -> Result<()> {
    write_file(path, ambiguity_csv(maps).as_bytes())
}

pub fn write_band_csv(path: &Path, band: Option<&TheoryBand>) -> Result<()> {
    let rows = band.into_iter().flat_map(|b| {
        b.points.iter().map(|p| {
            vec![
                p.t.to_string(),
                p.c_q_low.to_string(),
                p.c_q_mid.to_string(),
                p.c_q_high.to_string(),
            ]
        })
    });
    to_csv(path, &["t", "c_q_low", "c_q_mid", "c_q_high"], rows)
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a RunConfig,
    records: usize,
    failed: Vec<f64>,
    band: Option<BandSummary>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct BandSummary {
    intercept: f64,
    slope: f64,
    sigma: f64,
}

pub fn write_manifest(
    path: &Path,
    cfg: &RunConfig,
    records: &[SweepRecord],
    band: Option<&TheoryBand>,
    files: &[&Path],
) -> Result<()> {
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg,
        records: records.len(),
        failed: records
            .iter()
            .filter(|r| !r.status.is_ok())
            .map(|r| r.t_nominal)
            .collect(),
        band: band.map(|b| BandSummary {
            intercept: b.intercept,
            slope: b.slope,
            sigma: b.sigma,
        }),
        files: files
            .iter()
            .map(|p| {
                p.file_name()
                    .unwrap_or(p.as_os_str())
                    .to_string_lossy()
                    .into_owned()
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&m).expect("manifest serialises");
    write_file(path, (text + "\n").as_bytes())
}

/// Writes every product of a sweep. The SVG shows the first map.
pub fn emit_outputs(
    cfg: &RunConfig,
    records: &[SweepRecord],
    maps: &[AmbiguityMap],
    band: Option<&TheoryBand>,
    paths: &OutputPaths,
) -> Result<()> {
    write_sweep_csv(&paths.sweep, records)?;
    write_ambiguity_csv(&paths.ambiguity, maps)?;
    write_band_csv(&paths.band, band)?;
    let mut files: Vec<&Path> = vec![&paths.sweep, &paths.ambiguity, &paths.band];
    if let (Some(svg), Some(map)) = (&paths.svg, maps.first()) {
        write_file(svg, render_svg(map).as_bytes())?;
        files.push(svg);
    }
    write_manifest(&paths.manifest, cfg, records, band, &files)
}
