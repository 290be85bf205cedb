//! Matrix CSV files, JSON sidecars and the flat `key = value` config format.
//!
//! Matrix files start with a `rows,cols,field` line followed by one line per
//! column (column-major). Complex entries are written as `re+imi`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dictionaries::{DictionaryPair, DictionarySpec};
use crate::error::{Error, Result};
use crate::frames::{SensingPair, SensingProvenance};
use crate::linalg::{CMatrix, CVector, DenseMatrix, Field, C64};

fn format_entry(z: C64, field: Field) -> String {
    match field {
        Field::Real => format!("{}", z.re),
        Field::Complex => {
            if z.im.is_sign_negative() {
                format!("{}-{}i", z.re, -z.im)
            } else {
                format!("{}+{}i", z.re, z.im)
            }
        }
    }
}

fn parse_float(s: &str) -> Option<f64> {
    let v: f64 = s.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Parses `re`, `re+imi`, `re-imi` or `imi`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t = s.trim();
    let bad = || Error::Parse(format!("'{t}' is not a number"));
    let Some(body) = t.strip_suffix('i') else {
        return parse_float(t).map(|re| C64::new(re, 0.0)).ok_or_else(bad);
    };
    // the imaginary part starts at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = parse_float(&body[..k]).ok_or_else(bad)?;
            let im = parse_float(&body[k..]).ok_or_else(bad)?;
            Ok(C64::new(re, im))
        }
        None => parse_float(body)
            .map(|im| C64::new(0.0, im))
            .ok_or_else(bad),
    }
}

pub fn format_matrix_csv(m: &DenseMatrix) -> String {
    let field = m.field();
    let mut out = format!("{},{},{}\n", m.rows(), m.cols(), field.as_str());
    for col in m.as_matrix().column_iter() {
        let line: Vec<String> = col.iter().map(|z| format_entry(*z, field)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_matrix_csv(text: &str) -> Result<DenseMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let parts: Vec<&str> = header.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "header must be 'rows,cols,field', got '{header}'"
        )));
    }
    let rows: usize = parts[0]
        .parse()
        .map_err(|_| Error::Parse(format!("bad row count '{}'", parts[0])))?;
    let cols: usize = parts[1]
        .parse()
        .map_err(|_| Error::Parse(format!("bad column count '{}'", parts[1])))?;
    let field: Field = parts[2].parse()?;
    let mut entries = Vec::with_capacity(rows * cols);
    let mut read_cols = 0;
    for (idx, line) in lines {
        let col: Vec<C64> = line
            .split(',')
            .map(parse_complex)
            .collect::<Result<_>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", idx + 1)))?;
        if col.len() != rows {
            return Err(Error::Parse(format!(
                "line {}: expected {rows} entries, found {}",
                idx + 1,
                col.len()
            )));
        }
        if field == Field::Real && col.iter().any(|z| z.im != 0.0) {
            return Err(Error::Parse(format!(
                "line {}: complex entry in a real matrix",
                idx + 1
            )));
        }
        entries.extend(col);
        read_cols += 1;
    }
    if read_cols != cols {
        return Err(Error::Parse(format!(
            "expected {cols} columns, found {read_cols}"
        )));
    }
    DenseMatrix::from_column_major(rows, cols, entries)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    fs::write(path, format_matrix_csv(m))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    parse_matrix_csv(&fs::read_to_string(path)?)
}

/// Writes a vector as an `n x 1` matrix file.
pub fn write_vector(path: &Path, v: &CVector) -> Result<()> {
    let m = CMatrix::from_column_slice(v.len(), 1, v.as_slice());
    write_matrix(path, &DenseMatrix::new(m)?)
}

pub fn read_vector(path: &Path) -> Result<CVector> {
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(Error::Parse(format!(
            "{}: expected a single column, found {}",
            path.display(),
            m.cols()
        )));
    }
    Ok(m.as_matrix().column(0).into_owned())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// File names used when a sensing pair is saved to a directory.
pub const SENSING_FILES: [&str; 3] = ["a.csv", "a_dual.csv", "sensing.json"];
/// File names used when a dictionary is saved to a directory.
pub const DICTIONARY_FILES: [&str; 3] = ["d.csv", "d_dual.csv", "dictionary.json"];

/// Writes `A`, `Ã` and the provenance sidecar into `dir`.
pub fn save_sensing_pair(dir: &Path, pair: &SensingPair) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join(SENSING_FILES[0]), &pair.a)?;
    write_matrix(&dir.join(SENSING_FILES[1]), &pair.a_dual)?;
    write_json(&dir.join(SENSING_FILES[2]), &pair.provenance)
}

/// Reads a saved sensing pair. The matrices are rebuilt from the sidecar and
/// checked against the stored files.
pub fn load_sensing_pair(dir: &Path) -> Result<SensingPair> {
    let provenance: SensingProvenance = read_json(&dir.join(SENSING_FILES[2]))?;
    let pair = SensingPair::from_provenance(&provenance)?;
    for (file, expected) in [
        (SENSING_FILES[0], &pair.a),
        (SENSING_FILES[1], &pair.a_dual),
    ] {
        let stored = read_matrix(&dir.join(file))?;
        ensure_matches(file, &stored, expected)?;
    }
    Ok(pair)
}

pub fn save_dictionary(dir: &Path, dictionary: &DictionaryPair) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join(DICTIONARY_FILES[0]), &dictionary.d)?;
    write_matrix(&dir.join(DICTIONARY_FILES[1]), &dictionary.d_dual)?;
    write_json(&dir.join(DICTIONARY_FILES[2]), &dictionary.spec)
}

pub fn load_dictionary(dir: &Path) -> Result<DictionaryPair> {
    let spec: DictionarySpec = read_json(&dir.join(DICTIONARY_FILES[2]))?;
    Ok(DictionaryPair {
        d: read_matrix(&dir.join(DICTIONARY_FILES[0]))?,
        d_dual: read_matrix(&dir.join(DICTIONARY_FILES[1]))?,
        spec,
    })
}

fn ensure_matches(name: &str, stored: &DenseMatrix, expected: &DenseMatrix) -> Result<()> {
    if stored.rows() != expected.rows() || stored.cols() != expected.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{name} is {}x{} but its sidecar describes {}x{}",
            stored.rows(),
            stored.cols(),
            expected.rows(),
            expected.cols()
        )));
    }
    let diff = (stored.as_matrix() - expected.as_matrix()).norm();
    if diff > 1e-9 * expected.as_matrix().norm().max(1.0) {
        return Err(Error::Parse(format!(
            "{name} does not match the matrix described by its sidecar"
        )));
    }
    Ok(())
}

/// Inputs of a recovery run read from a directory holding `psi.csv`,
/// `y.csv` and optionally `psi_dual.csv`.
pub struct RecoveryInput {
    pub psi: DenseMatrix,
    pub psi_dual: Option<DenseMatrix>,
    pub y: CVector,
}

pub const RECOVERY_FILES: [&str; 3] = ["psi.csv", "psi_dual.csv", "y.csv"];

pub fn read_recovery_input(dir: &Path) -> Result<RecoveryInput> {
    let dual_path = dir.join(RECOVERY_FILES[1]);
    Ok(RecoveryInput {
        psi: read_matrix(&dir.join(RECOVERY_FILES[0]))?,
        psi_dual: if dual_path.exists() {
            Some(read_matrix(&dual_path)?)
        } else {
            None
        },
        y: read_vector(&dir.join(RECOVERY_FILES[2]))?,
    })
}

pub fn write_recovery_input(
    dir: &Path,
    psi: &DenseMatrix,
    psi_dual: Option<&DenseMatrix>,
    y: &CVector,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join(RECOVERY_FILES[0]), psi)?;
    if let Some(d) = psi_dual {
        write_matrix(&dir.join(RECOVERY_FILES[1]), d)?;
    }
    write_vector(&dir.join(RECOVERY_FILES[2]), y)
}

/// One `key = value` entry with its 1-based line number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are ignored;
/// repeated keys are rejected.
pub fn parse_key_values(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut out: Vec<ConfigEntry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::ConfigLine {
                line,
                message: format!("expected 'key = value', found '{content}'"),
            });
        };
        let key = key.trim();
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::ConfigLine {
                line,
                message: format!("invalid key '{key}'"),
            });
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(Error::ConfigLine {
                line,
                message: format!("key '{key}' already set on line {}", prev.line),
            });
        }
        out.push(ConfigEntry {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

/// Appends `.json` to a path, keeping any existing extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn complex_entries_round_trip() {
        for z in [
            C64::new(1.5, -2.0),
            C64::new(-0.0, 3e-7),
            C64::new(1e-300, -1e300),
            C64::new(-4.25, 0.0),
        ] {
            assert_eq!(parse_complex(&format_entry(z, Field::Complex)).unwrap(), z);
        }
        assert_eq!(
            parse_complex("2.5e-3-1E+2i").unwrap(),
            C64::new(2.5e-3, -100.0)
        );
        assert_eq!(parse_complex("-3i").unwrap(), C64::new(0.0, -3.0));
        assert!(parse_complex("1+nani").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn matrix_csv_layout() {
        let m = DenseMatrix::from_column_major(
            2,
            2,
            vec![
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(3.0, 0.0),
                C64::new(4.0, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(format_matrix_csv(&m), "2,2,real\n1,2\n3,4\n");
        let c = DenseMatrix::from_column_major(1, 1, vec![C64::new(0.5, -1.0)]).unwrap();
        assert_eq!(format_matrix_csv(&c), "1,1,complex\n0.5-1i\n");
    }

    #[test]
    fn malformed_matrices_are_rejected() {
        assert!(parse_matrix_csv("").is_err());
        assert!(parse_matrix_csv("2,2\n1,2\n3,4\n").is_err());
        assert!(parse_matrix_csv("2,2,real\n1,2\n").is_err());
        assert!(parse_matrix_csv("2,2,real\n1,2\n3\n").is_err());
        assert!(parse_matrix_csv("1,1,real\n1+2i\n").is_err());
        assert!(parse_matrix_csv("1,1,real\ninf\n").is_err());
    }

    #[test]
    fn config_lines() {
        let text = "# header\nn = 64\n\nseed=7 # trailing\n";
        let e = parse_key_values(text).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(
            (e[1].line, e[1].key.as_str(), e[1].value.as_str()),
            (4, "seed", "7")
        );
        match parse_key_values("n = 1\nbroken line\n") {
            Err(Error::ConfigLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_key_values("n = 1\nn = 2\n"),
            Err(Error::ConfigLine { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>(), complex in any::<bool>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let entries: Vec<C64> = (0..rows * cols)
                .map(|_| {
                    let re: f64 = rng.random_range(-1e3..1e3);
                    let im: f64 = if complex { rng.random_range(-1e3..1e3) } else { 0.0 };
                    C64::new(re, im)
                })
                .collect();
            let m = DenseMatrix::from_column_major(rows, cols, entries).unwrap();
            let back = parse_matrix_csv(&format_matrix_csv(&m)).unwrap();
            prop_assert_eq!(back.as_matrix(), m.as_matrix());
            prop_assert_eq!(back.field(), m.field());
        }
    }
}
