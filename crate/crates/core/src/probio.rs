//! Problem bundles on disk, synthetic generators and solver reports.
//!
//! A bundle is a directory with `A.mtx` … `E.mtx` in Matrix Market format
//! and an optional `expected.json` holding verifiable claims about the
//! spectrum. The solver never reads `expected.json`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra_sparse::io::{load_coo_from_matrix_market_str, save_to_matrix_market};
use nalgebra_sparse::CooMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::deflate::StepRecord;
use crate::diagnostics::{NormCache, SummaryReport};
use crate::eigvec::RecoveryMethod;
use crate::numkit::{qr, CMat, C64, ONE, ZERO};
use crate::pencil::{EigClass, QuarticPencil};
use crate::scaling::ScalingRecord;
pub use crate::serde_real::csv_field;
use crate::solver::{DeflationSummary, EigenSolution, PairFlag, PairSource};
use crate::{Error, Result};

pub const COEFFICIENT_NAMES: [&str; 5] = ["A", "B", "C", "D", "E"];

/// Claims about a problem that tests can check. Counts are either exact or
/// lower bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinities: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_zeros: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_infinities: Option<usize>,
    /// Length of a planted Jordan chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan_chain: Option<usize>,
    /// Known finite eigenvalues as `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<[f64; 2]>>,
    pub provenance: String,
}

#[derive(Debug, Clone)]
pub struct ProblemBundle {
    pub name: String,
    pub pencil: QuarticPencil,
    pub expected: Option<Expected>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
}

fn malformed(path: &Path, msg: impl Into<String>) -> Error {
    Error::MalformedMatrix {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn header_field(path: &Path, text: &str) -> Result<Field> {
    let first = text.lines().next().unwrap_or("").to_ascii_lowercase();
    let words: Vec<&str> = first.split_whitespace().collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(malformed(path, "missing or invalid %%MatrixMarket header"));
    }
    if words[4] != "general" {
        return Err(malformed(path, format!("unsupported symmetry '{}'", words[4])));
    }
    match words[3] {
        "real" => Ok(Field::Real),
        "integer" => Ok(Field::Integer),
        "complex" => Ok(Field::Complex),
        other => Err(malformed(path, format!("unsupported field '{other}'"))),
    }
}

fn densify<T: Copy>(path: &Path, coo: &CooMatrix<T>, f: impl Fn(T) -> C64) -> Result<CMat> {
    let mut m = CMat::zeros(coo.nrows(), coo.ncols());
    for (i, j, v) in coo.triplet_iter() {
        m[(i, j)] += f(*v);
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(malformed(path, "non-finite entry"));
    }
    Ok(m)
}

/// Dense matrix from a Matrix Market file (coordinate or array, real,
/// integer or complex, general).
pub fn read_matrix(path: &Path) -> Result<CMat> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |e: nalgebra_sparse::io::MatrixMarketError| malformed(path, e.message().to_string());
    match header_field(path, &text)? {
        Field::Real => densify(path, &load_coo_from_matrix_market_str::<f64>(&text).map_err(bad)?, |v| {
            C64::new(v, 0.0)
        }),
        Field::Integer => densify(path, &load_coo_from_matrix_market_str::<i128>(&text).map_err(bad)?, |v| {
            C64::new(v as f64, 0.0)
        }),
        Field::Complex => densify(path, &load_coo_from_matrix_market_str::<C64>(&text).map_err(bad)?, |v| v),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Coordinate format; real when every imaginary part is zero. Values are
/// written in shortest round-trip form.
pub fn write_matrix(path: &Path, m: &CMat) -> Result<()> {
    let mut buf = Vec::new();
    let (rows, cols) = m.shape();
    let nz: Vec<(usize, usize, C64)> = (0..cols)
        .flat_map(|j| (0..rows).map(move |i| (i, j)))
        .filter_map(|(i, j)| (m[(i, j)] != ZERO).then(|| (i, j, m[(i, j)])))
        .collect();
    let (ri, ci): (Vec<usize>, Vec<usize>) = nz.iter().map(|&(i, j, _)| (i, j)).unzip();
    let res = if nz.iter().all(|t| t.2.im == 0.0) {
        let vals = nz.iter().map(|t| t.2.re).collect();
        let coo = CooMatrix::try_from_triplets(rows, cols, ri, ci, vals).expect("indices in range");
        save_to_matrix_market(&mut buf, &coo)
    } else {
        let vals = nz.iter().map(|t| t.2).collect();
        let coo = CooMatrix::try_from_triplets(rows, cols, ri, ci, vals).expect("indices in range");
        save_to_matrix_market(&mut buf, &coo)
    };
    res.map_err(|e| Error::io(path, e))?;
    // canonical banner; some readers match it case-sensitively
    if buf.starts_with(b"%%matrixmarket") {
        buf[..14].copy_from_slice(b"%%MatrixMarket");
    }
    write_atomic(path, &buf)
}

pub fn read_bundle(dir: &Path) -> Result<ProblemBundle> {
    let mut mats = Vec::with_capacity(5);
    for name in COEFFICIENT_NAMES {
        let p = dir.join(format!("{name}.mtx"));
        if !p.is_file() {
            return Err(Error::MissingFile {
                name: name.to_string(),
                dir: dir.to_path_buf(),
            });
        }
        mats.push(read_matrix(&p)?);
    }
    let n = mats[0].nrows();
    for (name, m) in COEFFICIENT_NAMES.iter().zip(&mats) {
        if m.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "{name}.mtx is {}×{}, expected {n}×{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let exp_path = dir.join("expected.json");
    let expected = if exp_path.is_file() {
        let text = fs::read_to_string(&exp_path).map_err(|e| Error::io(&exp_path, e))?;
        Some(serde_json::from_str(&text)?)
    } else {
        None
    };
    let mut it = mats.into_iter();
    let mut next = || it.next().expect("five matrices");
    let pencil = QuarticPencil::new(next(), next(), next(), next(), next())?;
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into());
    Ok(ProblemBundle { name, pencil, expected })
}

pub fn write_bundle(dir: &Path, b: &ProblemBundle) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, m) in COEFFICIENT_NAMES.iter().zip(b.pencil.coeffs()) {
        write_matrix(&dir.join(format!("{name}.mtx")), m)?;
    }
    if let Some(e) = &b.expected {
        let text = serde_json::to_string_pretty(e)?;
        write_atomic(&dir.join("expected.json"), text.as_bytes())?;
    }
    Ok(())
}

fn randn(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        C64::new(a, b)
    })
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    qr(&randn(rng, n, n)).0
}

/// `n×n` with exactly `k` zero columns at random positions; the remaining
/// columns are orthonormal times factors in `[1, 10]`.
fn planted_columns(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CMat {
    let zero: Vec<usize> = sample(rng, n, k).into_vec();
    let mut m = random_unitary(rng, n);
    for j in 0..n {
        if zero.contains(&j) {
            m.column_mut(j).fill(ZERO);
        } else {
            let s = rng.random_range(1.0..=10.0);
            m.column_mut(j).scale_mut(s);
        }
    }
    m
}

/// Random quartic whose `E` and `A` have `k_e` and `k_a` exactly zero
/// columns; `B`, `C`, `D` are dense random.
pub fn gen_planted(n: usize, k_e: usize, k_a: usize, seed: u64) -> Result<ProblemBundle> {
    if n == 0 || k_e > n || k_a > n {
        return Err(Error::InvalidArgument(format!("need 0 < n and k ≤ n, got n={n}, k_E={k_e}, k_A={k_a}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = planted_columns(&mut rng, n, k_a);
    let e = planted_columns(&mut rng, n, k_e);
    let b = randn(&mut rng, n, n);
    let c = randn(&mut rng, n, n);
    let d = randn(&mut rng, n, n);
    Ok(ProblemBundle {
        name: format!("planted-n{n}-e{k_e}-a{k_a}-s{seed}"),
        pencil: QuarticPencil::new(a, b, c, d, e)?,
        expected: Some(Expected {
            min_zeros: Some(k_e),
            min_infinities: Some(k_a),
            provenance: "zero columns planted in E and A".into(),
            ..Expected::default()
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainAt {
    Zero,
    Infinity,
}

/// `U·diag(λ^len, R(λ))·V` with a random regular quartic `R` of size
/// `n − 1` and random unitary `U`, `V` (identity when `n = 1`). The first
/// entry contributes a Jordan block of size `len` at `0` and `4 − len`
/// infinite eigenvalues; `at = Infinity` reverses the coefficient order.
pub fn gen_jordan_chain(n: usize, len: usize, at: ChainAt, seed: u64) -> Result<ProblemBundle> {
    if len > 4 || len == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "chain length must be 1..=4 and n positive, got len={len}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coefs: Vec<CMat> = (0..5)
        .map(|k| {
            let mut m = CMat::zeros(n, n);
            if 4 - k == len {
                m[(0, 0)] = ONE;
            }
            if n > 1 {
                m.view_mut((1, 1), (n - 1, n - 1)).copy_from(&randn(&mut rng, n - 1, n - 1));
            }
            m
        })
        .collect();
    if n > 1 {
        let u = random_unitary(&mut rng, n);
        let v = random_unitary(&mut rng, n);
        for m in coefs.iter_mut() {
            *m = &u * &*m * &v;
        }
    }
    if at == ChainAt::Infinity {
        coefs.reverse();
    }
    let (zeros, infs) = match at {
        ChainAt::Zero => (len, 4 - len),
        ChainAt::Infinity => (4 - len, len),
    };
    let mut it = coefs.into_iter();
    let mut next = || it.next().expect("five matrices");
    Ok(ProblemBundle {
        name: format!("jordan-n{n}-len{len}-{}-s{seed}", if at == ChainAt::Zero { "zero" } else { "inf" }),
        pencil: QuarticPencil::new(next(), next(), next(), next(), next())?,
        expected: Some(Expected {
            zeros: Some(zeros),
            infinities: Some(infs),
            jordan_chain: Some(len),
            provenance: "planted scalar block λ^len; remaining block generic".into(),
            ..Expected::default()
        }),
    })
}

/// `n = 9` integer instance laid out like the mirror problem: `A` nonzero
/// only in columns 0–1, `E` only in 7–8, `B` zero in columns 2–3 and `D`
/// zero in 4–5. Generically 9 zero and 9 infinite eigenvalues.
pub fn gen_mirror_like(seed: u64) -> Result<ProblemBundle> {
    let n = 9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut int = |keep: &dyn Fn(usize) -> bool| {
        CMat::from_fn(n, n, |_, j| {
            let v: i32 = rng.random_range(-4..=4);
            if keep(j) {
                C64::new(v as f64, 0.0)
            } else {
                ZERO
            }
        })
    };
    let a = int(&|j| j < 2);
    let b = int(&|j| !(2..4).contains(&j));
    let c = int(&|_| true);
    let d = int(&|j| !(4..6).contains(&j));
    let e = int(&|j| j >= 7);
    Ok(ProblemBundle {
        name: format!("mirror-like-s{seed}"),
        pencil: QuarticPencil::new(a, b, c, d, e)?,
        expected: Some(Expected {
            zeros: Some(9),
            infinities: Some(9),
            provenance: "7 zero columns in A and E, 2 in each second-level matrix".into(),
            ..Expected::default()
        }),
    })
}

/// Dense real random quartic premultiplied by `Δ = diag(2^π(i))`, with `π`
/// a random permutation of `1..=n`.
pub fn gen_graded(n: usize, seed: u64) -> Result<ProblemBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perm = sample(&mut rng, n, n).into_vec();
    let coefs: Vec<CMat> = (0..5)
        .map(|_| {
            CMat::from_fn(n, n, |i, _| {
                let v: f64 = StandardNormal.sample(&mut rng);
                C64::new(v * 2f64.powi(perm[i] as i32 + 1), 0.0)
            })
        })
        .collect();
    let mut it = coefs.into_iter();
    let mut next = || it.next().expect("five matrices");
    Ok(ProblemBundle {
        name: format!("graded-n{n}-s{seed}"),
        pencil: QuarticPencil::new(next(), next(), next(), next(), next())?,
        expected: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub scale: bool,
    pub balance: bool,
    pub balance_iters: usize,
    pub rank_strategy: String,
    pub tol: Option<f64>,
    pub deflate: bool,
    pub eigvec_mode: crate::solver::EigvecMode,
    pub want_left: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub index: usize,
    /// `[re, im]`.
    pub alpha: [f64; 2],
    pub beta: f64,
    pub class: EigClass,
    /// `α/β`, absent for infinite eigenvalues.
    pub lambda: Option<[f64; 2]>,
    pub source: PairSource,
    pub method: RecoveryMethod,
    pub left_method: Option<RecoveryMethod>,
    pub flags: Vec<PairFlag>,
    #[serde(with = "crate::serde_real::opt")]
    pub eta_right: Option<f64>,
    #[serde(with = "crate::serde_real::opt")]
    pub eta_left: Option<f64>,
    #[serde(with = "crate::serde_real::opt")]
    pub omega_right: Option<f64>,
    #[serde(with = "crate::serde_real::opt")]
    pub omega_left: Option<f64>,
    pub right: Vec<[f64; 2]>,
    pub left: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationRecord {
    pub enabled: bool,
    pub zeros: usize,
    pub infinities: usize,
    pub case: String,
    pub reversed: bool,
    pub regular: bool,
    pub rank_a: usize,
    pub rank_e: usize,
    pub pencil_size: usize,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transformations {
    pub balancing: ScalingRecord,
    pub scaling: ScalingRecord,
    pub norms: NormCache,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub problem: String,
    pub n: usize,
    pub config: ReportConfig,
    pub deflation: DeflationRecord,
    pub eigenpairs: Vec<PairRecord>,
    pub summary: Option<SummaryReport>,
    pub transformations: Transformations,
    pub backend: String,
    pub warnings: Vec<String>,
}

fn pair_of(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn deflation_record(d: &DeflationSummary) -> DeflationRecord {
    DeflationRecord {
        enabled: d.enabled,
        zeros: d.zeros,
        infinities: d.infinities,
        case: d.case.label().to_string(),
        reversed: d.reversed,
        regular: d.regular,
        rank_a: d.rank_a,
        rank_e: d.rank_e,
        pencil_size: d.pencil_size,
        steps: d.steps.clone(),
    }
}

impl Report {
    pub fn from_solution(problem: &str, sol: &EigenSolution) -> Self {
        let cfg = &sol.config;
        let eigenpairs = sol
            .pairs
            .iter()
            .enumerate()
            .map(|(index, p)| {
                let dg = p.diagnostics;
                PairRecord {
                    index,
                    alpha: pair_of(p.eig.alpha),
                    beta: p.eig.beta,
                    class: p.eig.class,
                    lambda: p.eig.lambda().map(pair_of),
                    source: p.source,
                    method: p.method,
                    left_method: p.left_method,
                    flags: p.flags.clone(),
                    eta_right: dg.map(|d| d.eta_right),
                    eta_left: dg.and_then(|d| d.eta_left),
                    omega_right: dg.and_then(|d| d.omega_right),
                    omega_left: dg.and_then(|d| d.omega_left),
                    right: p.right.iter().copied().map(pair_of).collect(),
                    left: p.left.as_ref().map(|y| y.iter().copied().map(pair_of).collect()),
                }
            })
            .collect();
        Report {
            problem: problem.to_string(),
            n: sol.n,
            config: ReportConfig {
                scale: cfg.scale,
                balance: cfg.balance,
                balance_iters: cfg.balance_iters,
                rank_strategy: cfg.rank_strategy.name().to_string(),
                tol: cfg.tol(),
                deflate: cfg.deflate,
                eigvec_mode: cfg.eigvec_mode,
                want_left: cfg.want_left,
            },
            deflation: deflation_record(&sol.deflation),
            eigenpairs,
            summary: sol.summary.clone(),
            transformations: Transformations {
                balancing: sol.balancing.clone(),
                scaling: sol.scaling.clone(),
                norms: sol.norms,
            },
            backend: sol.backend.to_string(),
            warnings: sol.warnings.clone(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record([
            "index",
            "alpha_re",
            "alpha_im",
            "beta",
            "class",
            "eta_right",
            "eta_left",
            "omega_right",
            "omega_left",
        ])
        .map_err(io)?;
        let opt = |v: Option<f64>| v.map(csv_field).unwrap_or_default();
        for p in &self.eigenpairs {
            w.write_record([
                p.index.to_string(),
                csv_field(p.alpha[0]),
                csv_field(p.alpha[1]),
                csv_field(p.beta),
                class_name(p.class).to_string(),
                opt(p.eta_right),
                opt(p.eta_left),
                opt(p.omega_right),
                opt(p.omega_left),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

pub fn class_name(c: EigClass) -> &'static str {
    match c {
        EigClass::Zero => "zero",
        EigClass::Finite => "finite",
        EigClass::Infinite => "infinite",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    Both,
}

/// Writes `<stem>.json` and/or `<stem>.csv` next to `path` atomically and
/// returns the files written.
pub fn write_report(report: &Report, path: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if matches!(format, ReportFormat::Json | ReportFormat::Both) {
        let p = path.with_extension("json");
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        write_atomic(&p, text.as_bytes())?;
        out.push(p);
    }
    if matches!(format, ReportFormat::Csv | ReportFormat::Both) {
        let p = path.with_extension("csv");
        write_atomic(&p, report.to_csv()?.as_bytes())?;
        out.push(p);
    }
    Ok(out)
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
