//! Versioned, bit-stable file formats.
//!
//! Counts and scan grids are CSV with `#`-prefixed header fields; reports
//! and fiducials are JSON with a fixed key order. Every float is written
//! with 17 significant digits and a lowercase `e` exponent, which makes
//! output byte-stable for identical inputs and round trips lossless. NaN
//! is never emitted; infinite condition numbers serialize as the string
//! `"inf"`. Loaders check `format_version` and reject files written by an
//! incompatible major version.

use std::fmt::Write as _;
use std::path::Path;

use crate::fiducial::ScanGrid;
use crate::linalg::{ComplexMatrix, ComplexVector, C64};
use crate::povm::Fiducial;
use crate::simulator::CountsTable;
use crate::{Error, Result};

/// Version written into (and required from) every file.
pub const FORMAT_VERSION: u64 = 1;

/// 17-significant-digit float, lowercase `e`. Round-trips any finite f64.
fn fmt_f64(x: f64) -> String {
    debug_assert!(!x.is_nan());
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn check_version(found: u64) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found,
            supported: FORMAT_VERSION,
        });
    }
    Ok(())
}

// ── counts CSV ─────────────────────────────────────────────────────────

/// Writes a counts table as CSV: `# key: value` headers followed by
/// `s,j,round,count` rows for every cell, in (round, s, j) order.
pub fn save_counts(table: &CountsTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let dim = table.dim();
    let mut out = String::new();
    let _ = writeln!(out, "# format_version: {FORMAT_VERSION}");
    let _ = writeln!(out, "# dim: {dim}");
    let _ = writeln!(out, "# s_max: {}", table.s_max());
    let _ = writeln!(out, "# rounds: {}", table.rounds().len());
    out.push_str("s,j,round,count\n");
    for (r, round) in table.rounds().iter().enumerate() {
        for s in 0..table.s_max() {
            for j in 0..dim {
                let _ = writeln!(out, "{s},{j},{r},{}", round[s * dim + j]);
            }
        }
    }
    write_file(path, &out)
}

/// Reads a counts CSV. Missing cells default to zero; a duplicate
/// (s, j, round) triple, an out-of-range index, or a malformed row is an
/// error naming the offending line.
pub fn load_counts(path: impl AsRef<Path>) -> Result<CountsTable> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut dim = None;
    let mut smax = None;
    let mut n_rounds = None;
    let mut version = None;
    let mut rounds: Option<Vec<Vec<u64>>> = None;
    let mut seen: Option<Vec<bool>> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest.split_once(':').ok_or_else(|| {
                parse_err(path, lineno, "malformed header, expected `# key: value`")
            })?;
            let value = value.trim();
            let parsed: u64 = value
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("invalid integer `{value}`")))?;
            match key.trim() {
                "format_version" => version = Some(parsed),
                "dim" => dim = Some(parsed as usize),
                "s_max" => smax = Some(parsed as usize),
                "rounds" => n_rounds = Some(parsed as usize),
                other => {
                    return Err(parse_err(path, lineno, format!("unknown header `{other}`")));
                }
            }
            continue;
        }
        if line == "s,j,round,count" {
            continue;
        }
        // First data row: all headers must be in place.
        if rounds.is_none() {
            check_version(
                version.ok_or_else(|| parse_err(path, lineno, "missing format_version header"))?,
            )?;
            let d = dim.ok_or_else(|| parse_err(path, lineno, "missing dim header"))?;
            let sm = smax.ok_or_else(|| parse_err(path, lineno, "missing s_max header"))?;
            let nr = n_rounds.ok_or_else(|| parse_err(path, lineno, "missing rounds header"))?;
            if d < 2 || sm == 0 || nr == 0 {
                return Err(parse_err(path, lineno, "dim, s_max and rounds must be positive"));
            }
            if sm != crate::povm::s_max(d) {
                return Err(parse_err(
                    path,
                    lineno,
                    format!(
                        "s_max {sm} does not match dimension {d} (expected {})",
                        crate::povm::s_max(d)
                    ),
                ));
            }
            rounds = Some(vec![vec![0u64; d * sm]; nr]);
            seen = Some(vec![false; d * sm * nr]);
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let mut nums = [0u64; 4];
        for (slot, field) in nums.iter_mut().zip(&fields) {
            *slot = field
                .trim()
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("invalid integer `{field}`")))?;
        }
        let (s, j, r, count) = (nums[0] as usize, nums[1] as usize, nums[2] as usize, nums[3]);
        let d = dim.unwrap();
        let sm = smax.unwrap();
        let nr = n_rounds.unwrap();
        if s >= sm {
            return Err(parse_err(path, lineno, format!("s = {s} out of range (s_max = {sm})")));
        }
        if j >= d {
            return Err(parse_err(path, lineno, format!("j = {j} out of range (dim = {d})")));
        }
        if r >= nr {
            return Err(parse_err(
                path,
                lineno,
                format!("round = {r} out of range ({nr} rounds)"),
            ));
        }
        let flat = r * d * sm + s * d + j;
        let seen = seen.as_mut().unwrap();
        if seen[flat] {
            return Err(Error::DuplicateCell {
                s,
                j,
                round: r,
                line: lineno,
            });
        }
        seen[flat] = true;
        rounds.as_mut().unwrap()[r][s * d + j] = count;
    }

    let rounds =
        rounds.ok_or_else(|| parse_err(path, text.lines().count().max(1), "no data rows"))?;
    CountsTable::from_rounds(dim.unwrap(), smax.unwrap(), rounds)
}

// ── scan grid CSV ──────────────────────────────────────────────────────

/// Writes a condition-number scan as CSV rows
/// `abs_alpha,arg_alpha,log10_cond,valid` (magnitude-major order).
pub fn save_grid(grid: &ScanGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let _ = writeln!(out, "# format_version: {FORMAT_VERSION}");
    let _ = writeln!(out, "# dim: {}", grid.dim);
    let _ = writeln!(out, "# mag_samples: {}", grid.magnitudes.len());
    let _ = writeln!(out, "# phase_samples: {}", grid.phases.len());
    out.push_str("abs_alpha,arg_alpha,log10_cond,valid\n");
    for (i, mag) in grid.magnitudes.iter().enumerate() {
        for (j, phase) in grid.phases.iter().enumerate() {
            if grid.value(i, j).is_nan() {
                return Err(Error::NonFinite(format!("grid cell ({i}, {j})")));
            }
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(*mag),
                fmt_f64(*phase),
                fmt_f64(grid.value(i, j)),
                u8::from(grid.is_valid(i, j)),
            );
        }
    }
    write_file(path, &out)
}

/// Reads a scan grid CSV written by [`save_grid`].
pub fn load_grid(path: impl AsRef<Path>) -> Result<ScanGrid> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut dim = None;
    let mut n_mag = None;
    let mut n_phase = None;
    let mut version = None;
    let mut rows: Vec<(f64, f64, f64, bool)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(path, lineno, "malformed header"))?;
            let parsed: u64 = value.trim().parse().map_err(|_| {
                parse_err(path, lineno, format!("invalid integer `{}`", value.trim()))
            })?;
            match key.trim() {
                "format_version" => version = Some(parsed),
                "dim" => dim = Some(parsed as usize),
                "mag_samples" => n_mag = Some(parsed as usize),
                "phase_samples" => n_phase = Some(parsed as usize),
                other => return Err(parse_err(path, lineno, format!("unknown header `{other}`"))),
            }
            continue;
        }
        if line == "abs_alpha,arg_alpha,log10_cond,valid" {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let parse_float = |f: &str| -> Result<f64> {
            match f.trim() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => other
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("invalid float `{other}`"))),
            }
        };
        let valid = match fields[3].trim() {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(path, lineno, format!("invalid flag `{other}`"))),
        };
        rows.push((
            parse_float(fields[0])?,
            parse_float(fields[1])?,
            parse_float(fields[2])?,
            valid,
        ));
    }

    check_version(version.ok_or_else(|| parse_err(path, 1, "missing format_version header"))?)?;
    let dim = dim.ok_or_else(|| parse_err(path, 1, "missing dim header"))?;
    let n_mag = n_mag.ok_or_else(|| parse_err(path, 1, "missing mag_samples header"))?;
    let n_phase = n_phase.ok_or_else(|| parse_err(path, 1, "missing phase_samples header"))?;
    if rows.len() != n_mag * n_phase {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!("{} data rows for a {n_mag}×{n_phase} grid", rows.len()),
        ));
    }
    let magnitudes = (0..n_mag).map(|i| rows[i * n_phase].0).collect();
    let phases = (0..n_phase).map(|j| rows[j].1).collect();
    Ok(ScanGrid {
        dim,
        magnitudes,
        phases,
        values: rows.iter().map(|r| r.2).collect(),
        validity: rows.iter().map(|r| r.3).collect(),
    })
}

// ── JSON writer ────────────────────────────────────────────────────────

struct JsonWriter {
    buf: String,
    needs_comma: Vec<bool>,
}

impl JsonWriter {
    fn new() -> Self {
        Self {
            buf: String::new(),
            needs_comma: Vec::new(),
        }
    }

    fn sep(&mut self) {
        if let Some(last) = self.needs_comma.last_mut() {
            if *last {
                self.buf.push(',');
            }
            *last = true;
        }
    }

    fn open_object(&mut self) {
        self.sep();
        self.buf.push('{');
        self.needs_comma.push(false);
    }

    fn close_object(&mut self) {
        self.buf.push('}');
        self.needs_comma.pop();
    }

    fn open_array(&mut self) {
        self.sep();
        self.buf.push('[');
        self.needs_comma.push(false);
    }

    fn close_array(&mut self) {
        self.buf.push(']');
        self.needs_comma.pop();
    }

    fn key(&mut self, name: &str) {
        self.sep();
        let _ = write!(self.buf, "\"{name}\":");
        // The value following a key must not emit another comma.
        if let Some(last) = self.needs_comma.last_mut() {
            *last = false;
        }
    }

    fn string(&mut self, value: &str) {
        self.sep();
        self.buf.push('"');
        for ch in value.chars() {
            match ch {
                '"' => self.buf.push_str("\\\""),
                '\\' => self.buf.push_str("\\\\"),
                '\n' => self.buf.push_str("\\n"),
                c if (c as u32) < 0x20 => {
                    let _ = write!(self.buf, "\\u{:04x}", c as u32);
                }
                c => self.buf.push(c),
            }
        }
        self.buf.push('"');
    }

    fn uint(&mut self, value: u64) {
        self.sep();
        let _ = write!(self.buf, "{value}");
    }

    fn boolean(&mut self, value: bool) {
        self.sep();
        let _ = write!(self.buf, "{value}");
    }

    fn null(&mut self) {
        self.sep();
        self.buf.push_str("null");
    }

    /// Finite floats as 17-digit numbers; infinities as the strings
    /// "inf"/"-inf".
    fn float(&mut self, value: f64) -> Result<()> {
        if value.is_nan() {
            return Err(Error::NonFinite("float in JSON output".into()));
        }
        if value.is_infinite() {
            self.string(if value > 0.0 { "inf" } else { "-inf" });
        } else {
            self.sep();
            let _ = write!(self.buf, "{value:.16e}");
        }
        Ok(())
    }

    fn float_array(&mut self, values: &[f64]) -> Result<()> {
        self.open_array();
        for v in values {
            self.float(*v)?;
        }
        self.close_array();
        Ok(())
    }
}

// ── fiducial JSON ──────────────────────────────────────────────────────

/// Writes a fiducial as JSON with paired real/imaginary amplitude arrays.
pub fn save_fiducial(fiducial: &Fiducial, path: impl AsRef<Path>) -> Result<()> {
    let mut w = JsonWriter::new();
    w.open_object();
    w.key("format_version");
    w.uint(FORMAT_VERSION);
    w.key("dim");
    w.uint(fiducial.dim() as u64);
    w.key("amplitudes");
    w.open_object();
    w.key("re");
    w.float_array(&fiducial.amplitudes().iter().map(|c| c.re).collect::<Vec<_>>())?;
    w.key("im");
    w.float_array(&fiducial.amplitudes().iter().map(|c| c.im).collect::<Vec<_>>())?;
    w.close_object();
    w.close_object();
    w.buf.push('\n');
    write_file(path.as_ref(), &w.buf)
}

fn json_root(path: &Path, text: &str) -> Result<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| parse_err(path, e.line(), e.to_string()))
}

fn get<'v>(path: &Path, value: &'v serde_json::Value, key: &str) -> Result<&'v serde_json::Value> {
    value
        .get(key)
        .ok_or_else(|| parse_err(path, 1, format!("missing key `{key}`")))
}

fn get_u64(path: &Path, value: &serde_json::Value, key: &str) -> Result<u64> {
    get(path, value, key)?
        .as_u64()
        .ok_or_else(|| parse_err(path, 1, format!("key `{key}` is not an unsigned integer")))
}

fn get_f64(path: &Path, value: &serde_json::Value, key: &str) -> Result<f64> {
    let v = get(path, value, key)?;
    json_to_f64(v).ok_or_else(|| parse_err(path, 1, format!("key `{key}` is not a float")))
}

/// Accepts JSON numbers plus the "inf"/"-inf" strings this crate emits.
fn json_to_f64(v: &serde_json::Value) -> Option<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) if s == "inf" => Some(f64::INFINITY),
        serde_json::Value::String(s) if s == "-inf" => Some(f64::NEG_INFINITY),
        _ => None,
    }
}

fn float_vec(path: &Path, v: &serde_json::Value, key: &str) -> Result<Vec<f64>> {
    let arr = get(path, v, key)?
        .as_array()
        .ok_or_else(|| parse_err(path, 1, format!("key `{key}` is not an array")))?;
    arr.iter()
        .map(|x| json_to_f64(x).ok_or_else(|| parse_err(path, 1, format!("non-float in `{key}`"))))
        .collect()
}

/// Reads a fiducial JSON written by [`save_fiducial`]; the amplitude
/// vector must still satisfy the normalization gate.
pub fn load_fiducial(path: impl AsRef<Path>) -> Result<Fiducial> {
    let path = path.as_ref();
    let root = json_root(path, &read_file(path)?)?;
    check_version(get_u64(path, &root, "format_version")?)?;
    let dim = get_u64(path, &root, "dim")? as usize;
    let amps = get(path, &root, "amplitudes")?;
    let re = float_vec(path, amps, "re")?;
    let im = float_vec(path, amps, "im")?;
    if re.len() != dim || im.len() != dim {
        return Err(parse_err(
            path,
            1,
            format!(
                "amplitude arrays have lengths {}/{} for dim {dim}",
                re.len(),
                im.len()
            ),
        ));
    }
    let vector =
        ComplexVector::from_vec(re.iter().zip(&im).map(|(r, i)| C64::new(*r, *i)).collect());
    Fiducial::new(vector)
}

// ── report JSON ────────────────────────────────────────────────────────

/// Echo of the run configuration, embedded in every report.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEcho {
    pub dim: usize,
    pub s_max: usize,
    pub fiducial_source: String,
    pub state: Option<String>,
    pub rounds: Option<u64>,
    pub shots_per_round: Option<u64>,
    pub mc_trials: Option<u64>,
    pub seed: Option<u64>,
    pub raw: bool,
    pub detector_efficiency: f64,
    pub detector_dark: f64,
    pub mle_max_iters: u64,
    pub mle_gradient_tolerance: f64,
    pub mle_step_shrink: f64,
    pub mle_initial_step: f64,
}

/// Fidelity statistics block of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityBlock {
    pub target: String,
    pub mean: f64,
    pub sigma: f64,
    /// (mean − 5σ, mean + 5σ).
    pub interval: (f64, f64),
    /// Fidelity of the noiseless (averaged-counts) reconstruction.
    pub trial1: f64,
}

/// A reconstruction or simulation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFile {
    pub kind: String,
    pub config: ConfigEcho,
    pub condition_number: f64,
    /// Real and imaginary parts of the reported density matrix, row-major.
    pub density_re: Vec<Vec<f64>>,
    pub density_im: Vec<Vec<f64>>,
    /// Smallest eigenvalue of the reported matrix (negative in raw mode
    /// when the linear estimate is unphysical).
    pub min_eigenvalue: f64,
    pub fidelity: Option<FidelityBlock>,
    /// Per-trial fidelities; empty when not requested.
    pub trial_fidelities: Vec<f64>,
    /// Per-trial MLE convergence flags, parallel to `trial_fidelities`.
    pub trial_converged: Vec<bool>,
    pub warnings: Vec<String>,
}

impl ReportFile {
    /// The reported density matrix as a complex matrix.
    pub fn density_matrix(&self) -> ComplexMatrix {
        let d = self.density_re.len();
        ComplexMatrix::from_fn(d, d, |i, j| {
            C64::new(self.density_re[i][j], self.density_im[i][j])
        })
    }

    pub fn set_density_matrix(&mut self, rho: &ComplexMatrix) {
        let d = rho.rows();
        self.density_re = (0..d)
            .map(|i| (0..d).map(|j| rho.get(i, j).re).collect())
            .collect();
        self.density_im = (0..d)
            .map(|i| (0..d).map(|j| rho.get(i, j).im).collect())
            .collect();
    }
}

/// Writes a report as deterministic JSON. The density matrix must be
/// Hermitian within 1e−9.
pub fn save_report(report: &ReportFile, path: impl AsRef<Path>) -> Result<()> {
    let rho = report.density_matrix();
    let defect = rho.hermiticity_defect();
    if defect > 1e-9 {
        return Err(Error::Config(format!(
            "report density matrix deviates from Hermitian by {defect:.3e}"
        )));
    }
    let mut w = JsonWriter::new();
    w.open_object();
    w.key("format_version");
    w.uint(FORMAT_VERSION);
    w.key("kind");
    w.string(&report.kind);

    w.key("config");
    w.open_object();
    let c = &report.config;
    w.key("dim");
    w.uint(c.dim as u64);
    w.key("s_max");
    w.uint(c.s_max as u64);
    w.key("fiducial_source");
    w.string(&c.fiducial_source);
    w.key("state");
    match &c.state {
        Some(s) => w.string(s),
        None => w.null(),
    }
    for (key, value) in [
        ("rounds", c.rounds),
        ("shots_per_round", c.shots_per_round),
        ("mc_trials", c.mc_trials),
        ("seed", c.seed),
    ] {
        w.key(key);
        match value {
            Some(v) => w.uint(v),
            None => w.null(),
        }
    }
    w.key("raw");
    w.boolean(c.raw);
    w.key("detector_efficiency");
    w.float(c.detector_efficiency)?;
    w.key("detector_dark");
    w.float(c.detector_dark)?;
    w.key("mle_max_iters");
    w.uint(c.mle_max_iters);
    w.key("mle_gradient_tolerance");
    w.float(c.mle_gradient_tolerance)?;
    w.key("mle_step_shrink");
    w.float(c.mle_step_shrink)?;
    w.key("mle_initial_step");
    w.float(c.mle_initial_step)?;
    w.close_object();

    w.key("condition_number");
    w.float(report.condition_number)?;
    w.key("density_matrix");
    w.open_object();
    w.key("re");
    w.open_array();
    for row in &report.density_re {
        w.float_array(row)?;
    }
    w.close_array();
    w.key("im");
    w.open_array();
    for row in &report.density_im {
        w.float_array(row)?;
    }
    w.close_array();
    w.close_object();

    w.key("min_eigenvalue");
    w.float(report.min_eigenvalue)?;

    w.key("fidelity");
    match &report.fidelity {
        Some(f) => {
            w.open_object();
            w.key("target");
            w.string(&f.target);
            w.key("mean");
            w.float(f.mean)?;
            w.key("sigma");
            w.float(f.sigma)?;
            w.key("interval");
            w.float_array(&[f.interval.0, f.interval.1])?;
            w.key("trial1");
            w.float(f.trial1)?;
            w.close_object();
        }
        None => w.null(),
    }

    w.key("trial_fidelities");
    w.float_array(&report.trial_fidelities)?;
    w.key("trial_converged");
    w.open_array();
    for c in &report.trial_converged {
        w.boolean(*c);
    }
    w.close_array();
    w.key("warnings");
    w.open_array();
    for msg in &report.warnings {
        w.string(msg);
    }
    w.close_array();

    w.close_object();
    w.buf.push('\n');
    write_file(path.as_ref(), &w.buf)
}

/// Reads a report written by [`save_report`].
pub fn load_report(path: impl AsRef<Path>) -> Result<ReportFile> {
    let path = path.as_ref();
    let root = json_root(path, &read_file(path)?)?;
    check_version(get_u64(path, &root, "format_version")?)?;
    let kind = get(path, &root, "kind")?
        .as_str()
        .ok_or_else(|| parse_err(path, 1, "kind is not a string"))?
        .to_string();

    let cfg = get(path, &root, "config")?;
    let opt_u64 = |key: &str| -> Result<Option<u64>> {
        match get(path, cfg, key)? {
            serde_json::Value::Null => Ok(None),
            v => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| parse_err(path, 1, format!("key `{key}` is not an integer"))),
        }
    };
    let config = ConfigEcho {
        dim: get_u64(path, cfg, "dim")? as usize,
        s_max: get_u64(path, cfg, "s_max")? as usize,
        fiducial_source: get(path, cfg, "fiducial_source")?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        state: get(path, cfg, "state")?.as_str().map(str::to_string),
        rounds: opt_u64("rounds")?,
        shots_per_round: opt_u64("shots_per_round")?,
        mc_trials: opt_u64("mc_trials")?,
        seed: opt_u64("seed")?,
        raw: get(path, cfg, "raw")?
            .as_bool()
            .ok_or_else(|| parse_err(path, 1, "raw is not a boolean"))?,
        detector_efficiency: get_f64(path, cfg, "detector_efficiency")?,
        detector_dark: get_f64(path, cfg, "detector_dark")?,
        mle_max_iters: get_u64(path, cfg, "mle_max_iters")?,
        mle_gradient_tolerance: get_f64(path, cfg, "mle_gradient_tolerance")?,
        mle_step_shrink: get_f64(path, cfg, "mle_step_shrink")?,
        mle_initial_step: get_f64(path, cfg, "mle_initial_step")?,
    };

    let dm = get(path, &root, "density_matrix")?;
    let read_rows = |key: &str| -> Result<Vec<Vec<f64>>> {
        get(path, dm, key)?
            .as_array()
            .ok_or_else(|| parse_err(path, 1, format!("density {key} is not an array")))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| parse_err(path, 1, "density row is not an array"))?
                    .iter()
                    .map(|x| {
                        json_to_f64(x).ok_or_else(|| parse_err(path, 1, "non-float density entry"))
                    })
                    .collect()
            })
            .collect()
    };

    let fidelity = match get(path, &root, "fidelity")? {
        serde_json::Value::Null => None,
        f => {
            let interval = float_vec(path, f, "interval")?;
            if interval.len() != 2 {
                return Err(parse_err(path, 1, "interval must have two entries"));
            }
            Some(FidelityBlock {
                target: get(path, f, "target")?
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
                mean: get_f64(path, f, "mean")?,
                sigma: get_f64(path, f, "sigma")?,
                interval: (interval[0], interval[1]),
                trial1: get_f64(path, f, "trial1")?,
            })
        }
    };

    Ok(ReportFile {
        kind,
        config,
        condition_number: get_f64(path, &root, "condition_number")?,
        density_re: read_rows("re")?,
        density_im: read_rows("im")?,
        min_eigenvalue: get_f64(path, &root, "min_eigenvalue")?,
        fidelity,
        trial_fidelities: float_vec(path, &root, "trial_fidelities")?,
        trial_converged: get(path, &root, "trial_converged")?
            .as_array()
            .ok_or_else(|| parse_err(path, 1, "trial_converged is not an array"))?
            .iter()
            .map(|v| {
                v.as_bool()
                    .ok_or_else(|| parse_err(path, 1, "non-boolean convergence flag"))
            })
            .collect::<Result<_>>()?,
        warnings: get(path, &root, "warnings")?
            .as_array()
            .ok_or_else(|| parse_err(path, 1, "warnings is not an array"))?
            .iter()
            .map(|v| v.as_str().unwrap_or_default().to_string())
            .collect(),
    })
}
