//! TSP instances: construction, reproducible random generation and file formats.
//!
//! Two on-disk formats are supported. The JSON document
//! `{"name": str, "n": int, "seed": int|null, "dist": [[real]]}` round-trips
//! losslessly. A small TSPLIB subset (`EXPLICIT` with `FULL_MATRIX` or
//! `UPPER_ROW`, and `EUC_2D`) covers interoperability with standard corpora.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A symmetric TSP instance with a validated distance matrix.
///
/// Instances are checked at construction, so every value of this type has a
/// symmetric, finite, non-negative matrix with a zero diagonal and `n >= 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct TspInstance {
    name: String,
    n: usize,
    seed: Option<u64>,
    dist: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawInstance {
    name: String,
    n: usize,
    seed: Option<u64>,
    dist: Vec<Vec<f64>>,
}

impl TryFrom<RawInstance> for TspInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        if raw.dist.len() != raw.n {
            return Err(Error::Schema(format!(
                "field n = {} but dist has {} rows",
                raw.n,
                raw.dist.len()
            )));
        }
        TspInstance::new(raw.name, raw.dist, raw.seed)
    }
}

impl TspInstance {
    pub fn new(name: impl Into<String>, dist: Vec<Vec<f64>>, seed: Option<u64>) -> Result<Self> {
        let n = dist.len();
        if n < 3 {
            return Err(Error::Parameter(format!("instance needs at least 3 nodes, got {n}")));
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parameter(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return Err(Error::Parameter(format!("dist[{i}][{i}] = {} is not zero", dist[i][i])));
            }
            for j in (i + 1)..n {
                let w = dist[i][j];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Parameter(format!(
                        "dist[{i}][{j}] = {w} must be finite and non-negative"
                    )));
                }
                if w != dist[j][i] {
                    return Err(Error::Parameter(format!(
                        "asymmetric weights: dist[{i}][{j}] = {w}, dist[{j}][{i}] = {}",
                        dist[j][i]
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            n,
            seed,
            dist,
        })
    }

    /// Random instance with i.i.d. uniform weights on `[low, high]`.
    ///
    /// The matrix is a pure function of `(n, seed, low, high)`; the upper
    /// triangle is filled row by row from a ChaCha8 stream seeded with `seed`.
    pub fn generate_random(n: usize, seed: u64, low: f64, high: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Parameter(format!("instance needs at least 3 nodes, got {n}")));
        }
        if !(low.is_finite() && high.is_finite()) || low < 0.0 || low > high {
            return Err(Error::Parameter(format!("invalid weight range [{low}, {high}]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = if low == high { low } else { rng.gen_range(low..=high) };
                dist[i][j] = w;
                dist[j][i] = w;
            }
        }
        Self::new(format!("rand-n{n}-s{seed}"), dist, Some(seed))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Number of one-hot decision variables, `n²`.
    pub fn num_vars(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn dist(&self) -> &[Vec<f64>] {
        &self.dist
    }

    /// Hex SHA-256 over `n` and the bit patterns of the matrix. Names and
    /// seeds do not contribute, so renamed copies share caches.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        for row in &self.dist {
            for w in row {
                hasher.update(w.to_bits().to_le_bytes());
            }
        }
        hasher.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    /// Writes the instance as TSPLIB `EXPLICIT`/`FULL_MATRIX`. Weights use the
    /// shortest representation that parses back to the same `f64`.
    pub fn to_tsplib(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME : {}", self.name);
        let _ = writeln!(out, "TYPE : TSP");
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "COMMENT : seed {seed}");
        }
        let _ = writeln!(out, "DIMENSION : {}", self.n);
        let _ = writeln!(out, "EDGE_WEIGHT_TYPE : EXPLICIT");
        let _ = writeln!(out, "EDGE_WEIGHT_FORMAT : FULL_MATRIX");
        let _ = writeln!(out, "EDGE_WEIGHT_SECTION");
        for row in &self.dist {
            let line: Vec<String> = row.iter().map(|w| format!("{w:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out.push_str("EOF\n");
        out
    }

    /// Parses the supported TSPLIB subset. Errors carry the 1-based line.
    pub fn parse_tsplib(text: &str) -> Result<Self> {
        tsplib::parse(text)
    }
}

mod tsplib {
    use super::*;

    #[derive(Clone, Copy, PartialEq)]
    enum WeightType {
        Explicit,
        Euc2d,
    }

    #[derive(Clone, Copy, PartialEq)]
    enum WeightFormat {
        FullMatrix,
        UpperRow,
    }

    enum Section {
        Header,
        Coords,
        Weights,
        Done,
    }

    pub(super) fn parse(text: &str) -> Result<TspInstance> {
        let mut name = String::from("unnamed");
        let mut seed = None;
        let mut dimension: Option<usize> = None;
        let mut weight_type: Option<WeightType> = None;
        let mut weight_format: Option<WeightFormat> = None;
        let mut coords: Vec<(usize, f64, f64)> = Vec::new();
        let mut weights: Vec<(usize, f64)> = Vec::new();
        let mut section = Section::Header;
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            last_line = lineno;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line == "EOF" {
                section = Section::Done;
                break;
            }
            match section {
                Section::Coords if starts_numeric(line) => {
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    if fields.len() != 3 {
                        return Err(Error::parse(lineno, "expected `index x y`"));
                    }
                    let x = parse_f64(fields[1], lineno)?;
                    let y = parse_f64(fields[2], lineno)?;
                    coords.push((lineno, x, y));
                    continue;
                }
                Section::Weights if starts_numeric(line) => {
                    for tok in line.split_whitespace() {
                        weights.push((lineno, parse_f64(tok, lineno)?));
                    }
                    continue;
                }
                _ => {}
            }

            let (key, value) = match line.split_once(':') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (line, ""),
            };
            match key {
                "NAME" => name = value.to_string(),
                "COMMENT" => {
                    if let Some(s) = value.strip_prefix("seed ") {
                        seed = s.trim().parse().ok();
                    }
                }
                "TYPE" => {
                    if value != "TSP" {
                        return Err(Error::parse(lineno, format!("unsupported TYPE `{value}`")));
                    }
                }
                "DIMENSION" => {
                    dimension = Some(
                        value
                            .parse()
                            .map_err(|_| Error::parse(lineno, format!("bad DIMENSION `{value}`")))?,
                    )
                }
                "EDGE_WEIGHT_TYPE" => {
                    weight_type = Some(match value {
                        "EXPLICIT" => WeightType::Explicit,
                        "EUC_2D" => WeightType::Euc2d,
                        other => return Err(Error::parse(lineno, format!("unsupported EDGE_WEIGHT_TYPE `{other}`"))),
                    })
                }
                "EDGE_WEIGHT_FORMAT" => {
                    weight_format = Some(match value {
                        "FULL_MATRIX" => WeightFormat::FullMatrix,
                        "UPPER_ROW" => WeightFormat::UpperRow,
                        other => {
                            return Err(Error::parse(
                                lineno,
                                format!("unsupported EDGE_WEIGHT_FORMAT `{other}`"),
                            ))
                        }
                    })
                }
                "NODE_COORD_TYPE" | "DISPLAY_DATA_TYPE" => {}
                "NODE_COORD_SECTION" => section = Section::Coords,
                "EDGE_WEIGHT_SECTION" => section = Section::Weights,
                other => return Err(Error::parse(lineno, format!("unknown keyword `{other}`"))),
            }
        }
        let _ = section;

        let n = dimension.ok_or_else(|| Error::parse(last_line, "missing DIMENSION"))?;
        let dist = match weight_type {
            Some(WeightType::Euc2d) => euclidean(n, &coords, last_line)?,
            Some(WeightType::Explicit) => {
                let format =
                    weight_format.ok_or_else(|| Error::parse(last_line, "EXPLICIT weights need EDGE_WEIGHT_FORMAT"))?;
                explicit(n, format, &weights, last_line)?
            }
            None => return Err(Error::parse(last_line, "missing EDGE_WEIGHT_TYPE")),
        };
        TspInstance::new(name, dist, seed).map_err(|e| match e {
            Error::Parameter(msg) => Error::parse(last_line, msg),
            other => other,
        })
    }

    fn starts_numeric(line: &str) -> bool {
        line.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.')
    }

    fn parse_f64(tok: &str, lineno: usize) -> Result<f64> {
        tok.parse()
            .map_err(|_| Error::parse(lineno, format!("not a number: `{tok}`")))
    }

    // TSPLIB nint: round half up.
    fn nint(x: f64) -> f64 {
        (x + 0.5).floor()
    }

    fn euclidean(n: usize, coords: &[(usize, f64, f64)], last_line: usize) -> Result<Vec<Vec<f64>>> {
        if coords.len() != n {
            return Err(Error::parse(
                last_line,
                format!("expected {n} coordinates, found {}", coords.len()),
            ));
        }
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (_, xi, yi) = coords[i];
                let (_, xj, yj) = coords[j];
                let w = nint(((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt());
                dist[i][j] = w;
                dist[j][i] = w;
            }
        }
        Ok(dist)
    }

    fn explicit(n: usize, format: WeightFormat, weights: &[(usize, f64)], last_line: usize) -> Result<Vec<Vec<f64>>> {
        let expected = match format {
            WeightFormat::FullMatrix => n * n,
            WeightFormat::UpperRow => n * (n - 1) / 2,
        };
        if weights.len() != expected {
            return Err(Error::parse(
                last_line,
                format!("expected {expected} edge weights, found {}", weights.len()),
            ));
        }
        let mut dist = vec![vec![0.0; n]; n];
        match format {
            WeightFormat::FullMatrix => {
                for (k, &(_, w)) in weights.iter().enumerate() {
                    dist[k / n][k % n] = w;
                }
                for i in 0..n {
                    for j in 0..n {
                        if dist[i][j] != dist[j][i] {
                            let line = weights[i.max(j) * n + i.min(j)].0;
                            return Err(Error::parse(
                                line,
                                format!("asymmetric matrix: dist[{i}][{j}] != dist[{j}][{i}]"),
                            ));
                        }
                    }
                }
            }
            WeightFormat::UpperRow => {
                let mut it = weights.iter();
                for i in 0..n {
                    for j in (i + 1)..n {
                        let &(_, w) = it.next().expect("length checked above");
                        dist[i][j] = w;
                        dist[j][i] = w;
                    }
                }
            }
        }
        Ok(dist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_range_gives_constant_weights() {
        let inst = TspInstance::generate_random(3, 9, 1.0, 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inst.d(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = TspInstance::generate_random(8, 42, 1.0, 100.0).unwrap();
        let b = TspInstance::generate_random(8, 42, 1.0, 100.0).unwrap();
        assert_eq!(a, b);
        let c = TspInstance::generate_random(8, 43, 1.0, 100.0).unwrap();
        assert_ne!(a.dist(), c.dist());
    }

    #[test]
    fn generation_rejects_bad_parameters() {
        assert!(TspInstance::generate_random(2, 0, 1.0, 2.0).is_err());
        assert!(TspInstance::generate_random(5, 0, 3.0, 2.0).is_err());
        assert!(TspInstance::generate_random(5, 0, -1.0, 2.0).is_err());
        assert!(TspInstance::generate_random(5, 0, 0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn construction_checks_invariants() {
        let asym = vec![vec![0.0, 1.0, 2.0], vec![1.5, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        assert!(TspInstance::new("a", asym, None).is_err());
        let diag = vec![vec![1.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        assert!(TspInstance::new("d", diag, None).is_err());
        let neg = vec![vec![0.0, -1.0, 2.0], vec![-1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        assert!(TspInstance::new("n", neg, None).is_err());
    }

    #[test]
    fn euc_2d_uses_rounded_euclidean() {
        let text = "NAME : tri\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\n\
                    NODE_COORD_SECTION\n1 0 0\n2 3 4\n3 0 1.4\nEOF\n";
        let inst = TspInstance::parse_tsplib(text).unwrap();
        assert_eq!(inst.name(), "tri");
        assert_eq!(inst.d(0, 1), 5.0);
        assert_eq!(inst.d(0, 2), 1.0);
    }

    #[test]
    fn asymmetric_full_matrix_is_rejected_with_line() {
        let text = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\n\
                    EDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1 2\n9 0 1\n2 1 0\nEOF\n";
        match TspInstance::parse_tsplib(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn upper_row_is_expanded() {
        let text = "NAME: u\nTYPE: TSP\nDIMENSION: 4\nEDGE_WEIGHT_TYPE: EXPLICIT\n\
                    EDGE_WEIGHT_FORMAT: UPPER_ROW\nEDGE_WEIGHT_SECTION\n1 4 3\n2 5\n6\nEOF\n";
        let inst = TspInstance::parse_tsplib(text).unwrap();
        assert_eq!(inst.dist()[0], vec![0.0, 1.0, 4.0, 3.0]);
        assert_eq!(inst.d(3, 2), 6.0);
    }

    #[test]
    fn unknown_keyword_and_type_are_errors() {
        let text = "NAME: x\nFOO: bar\n";
        assert!(matches!(
            TspInstance::parse_tsplib(text),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: GEO\n";
        assert!(matches!(
            TspInstance::parse_tsplib(text),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn json_missing_dist_is_an_error() {
        let text = r#"{"name": "x", "n": 3, "seed": null}"#;
        assert!(TspInstance::from_json(text).is_err());
    }

    #[test]
    fn json_round_trip_n12_keeps_every_entry() {
        let inst = TspInstance::generate_random(12, 5, 0.5, 99.5).unwrap();
        let back = TspInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back.n(), 12);
        assert_eq!(back.seed(), Some(5));
        let mut compared = 0;
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(back.d(i, j).to_bits(), inst.d(i, j).to_bits());
                compared += 1;
            }
        }
        assert_eq!(compared, 144);
    }

    #[test]
    fn content_hash_ignores_name() {
        let a = TspInstance::generate_random(5, 1, 1.0, 2.0).unwrap();
        let b = a.clone().with_name("other");
        assert_eq!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }
}
