//! LibSVM reading and writing, synthetic sparsity regimes, and run logs.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::solver::{LogRecord, RunLog};
use crate::sparse::SparseMatrix;

/// Largest accepted feature index.
pub const MAX_FEATURE_INDEX: usize = i32::MAX as usize;

/// A LibSVM dataset: one row per example, labels as targets.
#[derive(Debug, Clone)]
pub struct LibsvmData {
    pub matrix: SparseMatrix,
    pub targets: Vec<f64>,
}

impl LibsvmData {
    /// Fails unless every target is `+1` or `-1`.
    pub fn require_binary_labels(&self) -> Result<()> {
        match self.targets.iter().position(|&y| y != 1.0 && y != -1.0) {
            None => Ok(()),
            Some(j) => Err(Error::InvalidArgument(format!(
                "label {} on example {} is not +1 or -1",
                self.targets[j],
                j + 1
            ))),
        }
    }
}

pub fn read_libsvm(path: impl AsRef<Path>) -> Result<LibsvmData> {
    let path = path.as_ref();
    parse_libsvm(BufReader::new(File::open(path)?), path, None)
}

/// Parses LibSVM text. With `num_features` set, the matrix has exactly that
/// many columns and larger indices are errors; otherwise the largest index
/// seen sets the column count.
pub fn parse_libsvm(reader: impl BufRead, source: &Path, num_features: Option<usize>) -> Result<LibsvmData> {
    let err = |line: usize, msg: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        msg,
    };
    let mut triplets = Vec::new();
    let mut targets = Vec::new();
    let mut max_col = 0usize;
    let mut seen: Vec<usize> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = tokens.next().unwrap();
        let label: f64 = label
            .parse()
            .map_err(|_| err(lineno, format!("invalid label '{label}'")))?;
        if !label.is_finite() {
            return Err(err(lineno, format!("label {label} is not finite")));
        }
        let row = targets.len();
        targets.push(label);
        seen.clear();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(lineno, format!("expected 'index:value', found '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(lineno, format!("invalid feature index '{idx}'")))?;
            if idx == 0 {
                return Err(err(lineno, "feature indices are 1-based".into()));
            }
            if idx > MAX_FEATURE_INDEX || num_features.is_some_and(|nf| idx > nf) {
                return Err(err(lineno, format!("feature index {idx} is out of range")));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| err(lineno, format!("invalid value '{val}'")))?;
            if !val.is_finite() {
                return Err(err(lineno, format!("value {val} is not finite")));
            }
            if seen.contains(&idx) {
                return Err(err(lineno, format!("duplicate feature index {idx}")));
            }
            seen.push(idx);
            max_col = max_col.max(idx);
            if val != 0.0 {
                triplets.push((row, idx - 1, val));
            }
        }
    }
    if targets.is_empty() {
        return Err(err(0, "no examples found".into()));
    }
    let cols = num_features.unwrap_or(max_col);
    let matrix = SparseMatrix::from_triplets(targets.len(), cols, &triplets)?;
    Ok(LibsvmData { matrix, targets })
}

pub fn write_libsvm(data: &LibsvmData, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_libsvm(data, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn format_libsvm(data: &LibsvmData, w: &mut impl Write) -> Result<()> {
    let m = data.matrix.rows();
    if data.targets.len() != m {
        return Err(Error::Dimension {
            what: "targets vs matrix rows",
            expected: m,
            got: data.targets.len(),
        });
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (r, c, v) in data.matrix.triplets() {
        rows[r].push((c, v));
    }
    for (row, y) in rows.iter().zip(&data.targets) {
        write!(w, "{y}")?;
        for (c, v) in row {
            write!(w, " {}:{v}", c + 1)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Every row has 30 nonzeros.
    Uniform,
    /// Row `j` (1-based) has `1 + ⌊30 j²/m²⌋` nonzeros.
    Intermediate,
    /// Row 1 has 500 nonzeros, every other row 3.
    Extreme,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Uniform, Regime::Intermediate, Regime::Extreme];

    /// Nonzero count of every row for `m` rows.
    pub fn row_counts(&self, m: usize) -> Vec<usize> {
        match self {
            Self::Uniform => vec![30; m],
            Self::Intermediate => (1..=m)
                .map(|j| 1 + (30 * (j as u128) * (j as u128) / ((m as u128) * (m as u128))) as usize)
                .collect(),
            Self::Extreme => (0..m).map(|j| if j == 0 { 500 } else { 3 }).collect(),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Intermediate => "intermediate",
            Self::Extreme => "extreme",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "intermediate" => Ok(Self::Intermediate),
            "extreme" => Ok(Self::Extreme),
            other => Err(Error::InvalidArgument(format!("unknown regime '{other}'"))),
        }
    }
}

/// `m × n` matrix whose row `j` has exactly the regime's nonzero count, at
/// distinct uniformly chosen columns, with standard normal values.
pub fn gen_synthetic(regime: Regime, m: usize, n: usize, seed: u64) -> Result<SparseMatrix> {
    gen_synthetic_with_rng(regime, m, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn gen_synthetic_with_rng(regime: Regime, m: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<SparseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be positive".into()));
    }
    let counts = regime.row_counts(m);
    if let Some((j, &w)) = counts.iter().enumerate().find(|(_, &w)| w > n) {
        return Err(Error::InvalidArgument(format!(
            "{regime} regime needs {w} nonzeros in row {} but there are only {n} columns",
            j + 1
        )));
    }
    let mut triplets = Vec::with_capacity(counts.iter().sum());
    for (j, &w) in counts.iter().enumerate() {
        for c in rand::seq::index::sample(rng, n, w) {
            // a draw of exactly zero would break the row count, so redraw
            let v = loop {
                let v: f64 = StandardNormal.sample(rng);
                if v != 0.0 {
                    break v;
                }
            };
            triplets.push((j, c, v));
        }
    }
    SparseMatrix::from_triplets(m, n, &triplets)
}

/// Synthetic matrix plus standard normal targets, from one seeded stream.
pub fn gen_synthetic_problem(regime: Regime, m: usize, n: usize, seed: u64) -> Result<LibsvmData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrix = gen_synthetic_with_rng(regime, m, n, &mut rng)?;
    let targets = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
    Ok(LibsvmData { matrix, targets })
}

pub const RUNLOG_HEADER: &str = "k,elapsed_s,objective";

pub fn write_runlog(log: &RunLog, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_runlog(log, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Metadata as `# key=value` lines, then the CSV. A `distance` column is
/// appended only when some record carries one.
pub fn format_runlog(log: &RunLog, w: &mut impl Write) -> Result<()> {
    for (k, v) in &log.metadata {
        writeln!(w, "# {k}={v}")?;
    }
    let with_distance = log.records.iter().any(|r| r.distance.is_some());
    if with_distance {
        writeln!(w, "{RUNLOG_HEADER},distance")?;
    } else {
        writeln!(w, "{RUNLOG_HEADER}")?;
    }
    for r in &log.records {
        write!(w, "{},{},{}", r.k, r.elapsed_s, r.objective)?;
        if with_distance {
            match r.distance {
                Some(d) => write!(w, ",{d}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_runlog(path: impl AsRef<Path>) -> Result<RunLog> {
    let path = path.as_ref();
    parse_runlog(BufReader::new(File::open(path)?), path)
}

pub fn parse_runlog(reader: impl BufRead, source: &Path) -> Result<RunLog> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(source),
        line,
        msg,
    };
    let mut log = RunLog::default();
    let mut columns = None;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if let Some(meta) = line.strip_prefix('#') {
            let (k, v) = meta
                .trim()
                .split_once('=')
                .ok_or_else(|| err(lineno, "metadata must be 'key=value'".into()))?;
            log.metadata.push((k.to_string(), v.to_string()));
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let Some(ncols) = columns else {
            columns = Some(match line.trim() {
                h if h == RUNLOG_HEADER => 3,
                h if h == format!("{RUNLOG_HEADER},distance") => 4,
                h => return Err(err(lineno, format!("unexpected header '{h}'"))),
            });
            continue;
        };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != ncols {
            return Err(err(lineno, format!("expected {ncols} fields, found {}", fields.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(lineno, format!("invalid number '{s}'")));
        let rec = LogRecord {
            k: fields[0]
                .parse()
                .map_err(|_| err(lineno, format!("invalid iteration '{}'", fields[0])))?,
            elapsed_s: num(fields[1])?,
            objective: num(fields[2])?,
            distance: match fields.get(3) {
                Some(d) if !d.is_empty() => Some(num(d)?),
                _ => None,
            },
        };
        if log.records.last().is_some_and(|r| r.k >= rec.k) {
            return Err(err(lineno, "iterations must be strictly increasing".into()));
        }
        log.records.push(rec);
    }
    if columns.is_none() {
        return Err(err(0, "missing header".into()));
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LibsvmData> {
        parse_libsvm(text.as_bytes(), Path::new("mem"), None)
    }

    #[test]
    fn libsvm_example() {
        let d = parse("1 1:2.0 3:1.0\n-1 2:4.0\n").unwrap();
        assert_eq!(d.matrix.rows(), 2);
        assert_eq!(d.matrix.cols(), 3);
        assert_eq!(d.matrix.nnz(), 3);
        assert_eq!(d.targets, vec![1.0, -1.0]);
        assert_eq!(d.matrix.to_dense(), vec![vec![2.0, 0.0, 1.0], vec![0.0, 4.0, 0.0]]);
    }

    #[test]
    fn libsvm_errors_carry_line_numbers() {
        assert!(parse("").is_err());
        assert!(parse("\n# only a comment\n").is_err());
        for (text, line) in [
            ("1 2:1 2:3\n", 1),
            ("1 1:1\n1 0:1\n", 2),
            ("1 1:1\n\nx 1:1\n", 3),
            ("1 1:a\n", 1),
            ("1 1\n", 1),
            ("1 99999999999999999999:1\n", 1),
            ("1 3000000000:1\n", 1),
        ] {
            match parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        let fixed = parse_libsvm("1 4:1\n".as_bytes(), Path::new("mem"), Some(3));
        assert!(fixed.is_err());
    }

    #[test]
    fn explicit_zeros_are_dropped() {
        let d = parse("0.5 1:0 2:3\n").unwrap();
        assert_eq!(d.matrix.nnz(), 1);
        assert_eq!(d.matrix.cols(), 2);
        assert_eq!(d.targets, vec![0.5]);
        assert!(d.require_binary_labels().is_err());
    }

    #[test]
    fn regime_counts() {
        let m = 1000;
        assert!(Regime::Uniform.row_counts(m).iter().all(|&w| w == 30));
        let mid = Regime::Intermediate.row_counts(m);
        assert_eq!(mid[0], 1);
        assert_eq!(mid[m - 1], 31);
        assert!(mid.windows(2).all(|w| w[0] <= w[1]));
        let ext = Regime::Extreme.row_counts(m);
        assert_eq!(ext[0], 500);
        assert!(ext[1..].iter().all(|&w| w == 3));
        assert!(gen_synthetic(Regime::Extreme, 10, 500, 0).is_ok());
        assert!(gen_synthetic(Regime::Extreme, 10, 499, 0).is_err());
    }

    #[test]
    fn runlog_formats() {
        let mut log = RunLog::default();
        let mut buf = Vec::new();
        format_runlog(&log, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,elapsed_s,objective\n");

        log.metadata.push(("seed".into(), "7".into()));
        log.records.push(LogRecord {
            k: 0,
            elapsed_s: 0.0,
            objective: 5.0,
            distance: None,
        });
        let mut buf = Vec::new();
        format_runlog(&log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# seed=7\nk,elapsed_s,objective\n0,0,5\n");
        assert_eq!(parse_runlog(text.as_bytes(), Path::new("mem")).unwrap(), log);
        assert!(parse_runlog("".as_bytes(), Path::new("mem")).is_err());
        assert!(parse_runlog("k,elapsed_s,objective\n1,0,1\n1,0,1\n".as_bytes(), Path::new("mem")).is_err());
    }
}
