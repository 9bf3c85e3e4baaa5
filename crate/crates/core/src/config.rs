//! TOML experiment configuration.
//!
//! One file describes a whole experiment: the problem sizes, where the
//! error generators come from, the field profiles, the control pair, the
//! algorithm knobs, and the output directory.  Each subcommand reads the
//! subset it needs; unknown keys are rejected so typos fail loudly.
//! Relative paths inside the file resolve against the file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error_model::FieldProfile;
use crate::{Error, Result};

/// Problem sizes.  Either matrix-style (N, I, A, M) or qubit-style (n, k);
/// qubit counts expand to powers of two.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    /// Total Hilbert-space dimension.
    #[serde(rename = "N")]
    pub total_dim: Option<usize>,
    /// Information (code) dimension.
    #[serde(rename = "I")]
    pub code_dim: Option<usize>,
    /// Ancilla dimension; defaults to N / I.
    #[serde(rename = "A")]
    pub ancilla_dim: Option<usize>,
    /// Number of error generators.
    #[serde(rename = "M")]
    pub generator_count: Option<i64>,
    /// Register qubits; N = 2^n.
    #[serde(rename = "n")]
    pub qubits: Option<usize>,
    /// Information qubits; I = 2^k.
    #[serde(rename = "k")]
    pub info_qubits: Option<usize>,
}

impl ProblemBlock {
    pub fn resolved_total_dim(&self) -> Result<usize> {
        match (self.total_dim, self.qubits) {
            (Some(n), _) => Ok(n),
            (None, Some(q)) => {
                if q == 0 || q > 20 {
                    return Err(Error::InvalidArgument(format!("qubit count {q} out of range 1..=20")));
                }
                Ok(1usize << q)
            }
            (None, None) => Err(Error::InvalidArgument(
                "the problem block needs N (total dimension) or n (qubits)".into(),
            )),
        }
    }

    pub fn resolved_code_dim(&self) -> Result<usize> {
        match (self.code_dim, self.info_qubits) {
            (Some(i), _) => Ok(i),
            (None, Some(k)) => Ok(1usize << k),
            (None, None) => Err(Error::InvalidArgument(
                "the problem block needs I (code dimension) or k (information qubits)".into(),
            )),
        }
    }

    pub fn resolved_ancilla_dim(&self) -> Result<usize> {
        if let Some(a) = self.ancilla_dim {
            return Ok(a);
        }
        let n = self.resolved_total_dim()?;
        let i = self.resolved_code_dim()?;
        if i == 0 || n % i != 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot infer the ancilla dimension: total dimension {n} is not a multiple of code dimension {i}"
            )));
        }
        Ok(n / i)
    }

    pub fn resolved_generator_count(&self) -> Result<usize> {
        match self.generator_count {
            Some(m) if m >= 1 => Ok(m as usize),
            Some(m) => Err(Error::InvalidArgument(format!(
                "the generator count M must be at least 1, got {m}"
            ))),
            None => Err(Error::InvalidArgument("the problem block needs M (generator count)".into())),
        }
    }

    fn validate(&self) -> Result<()> {
        if let (Some(n), Some(i), Some(a)) = (self.total_dim, self.code_dim, self.ancilla_dim) {
            if n != i * a {
                return Err(Error::InvalidArgument(format!(
                    "dimension mismatch: N = {n} but I * A = {i} * {a} = {}",
                    i * a
                )));
            }
        }
        if let Some(m) = self.generator_count {
            if m < 1 {
                return Err(Error::InvalidArgument(format!(
                    "the generator count M must be at least 1, got {m}"
                )));
            }
        }
        if let (Some(n), Some(q)) = (self.total_dim, self.qubits) {
            if n != 1usize << q {
                return Err(Error::InvalidArgument(format!("N = {n} conflicts with n = {q} qubits")));
            }
        }
        if let (Some(i), Some(k)) = (self.code_dim, self.info_qubits) {
            if i != 1usize << k {
                return Err(Error::InvalidArgument(format!(
                    "I = {i} conflicts with k = {k} information qubits"
                )));
            }
        }
        if self.total_dim == Some(0) || self.code_dim == Some(0) || self.ancilla_dim == Some(0) {
            return Err(Error::InvalidArgument("problem dimensions must be at least 1".into()));
        }
        Ok(())
    }
}

/// One few-body term: a Pauli word on an explicit support.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewBodyTerm {
    /// Qubit indices, strictly ascending, one or two of them.
    pub support: Vec<usize>,
    /// One single-letter Pauli name ("x", "y", "z") per support qubit.
    pub paulis: Vec<String>,
    #[serde(default = "one")]
    pub coefficient: f64,
}

fn one() -> f64 {
    1.0
}

/// Where the error generators come from.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorBlock {
    /// Seeded dense Hermitian matrices with unit spectral norm.
    RandomHermitian {
        /// Defaults to the experiment seed.
        seed: Option<u64>,
    },
    /// Explicit Pauli words; one generator per term.
    FewBody {
        terms: Vec<FewBodyTerm>,
        /// Normalize each term: "frobenius", "spectral", or "none".
        #[serde(default = "default_normalize")]
        normalize: String,
    },
    /// A generator-set file written by this tool.
    File { path: PathBuf },
}

fn default_normalize() -> String {
    "none".into()
}

impl Default for GeneratorBlock {
    fn default() -> Self {
        GeneratorBlock::RandomHermitian { seed: None }
    }
}

/// One classical field profile, mirrored onto the runtime type.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldBlock {
    Constant {
        amplitude: f64,
    },
    Sinusoid {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    PiecewiseRandom {
        amplitude: f64,
        segment: f64,
        /// Defaults to the experiment seed.
        seed: Option<u64>,
    },
}

impl FieldBlock {
    pub fn to_profile(&self, default_seed: u64) -> Result<FieldProfile> {
        let p = match self {
            FieldBlock::Constant { amplitude } => FieldProfile::Constant { amplitude: *amplitude },
            FieldBlock::Sinusoid { amplitude, omega, phase } => FieldProfile::Sinusoid {
                amplitude: *amplitude,
                omega: *omega,
                phase: *phase,
            },
            FieldBlock::PiecewiseRandom { amplitude, segment, seed } => FieldProfile::PiecewiseRandom {
                amplitude: *amplitude,
                segment: *segment,
                seed: seed.unwrap_or(default_seed),
            },
        };
        p.validate()?;
        Ok(p)
    }
}

/// Where the control Hamiltonian pair comes from.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ControlBlock {
    /// Seeded dense Hermitian pair with unit spectral norms.
    Random {
        /// Defaults to the problem's total dimension.
        dim: Option<usize>,
        /// Defaults to the experiment seed.
        seed: Option<u64>,
        #[serde(default = "yes")]
        sign_reversible: bool,
    },
    /// Random all-to-all two-local Pauli pair on a qubit register.
    TwoLocal {
        /// Defaults to the problem's qubit count.
        qubits: Option<usize>,
        seed: Option<u64>,
    },
    /// A control-sequence file written by synthesize-timings.
    File { path: PathBuf },
}

fn yes() -> bool {
    true
}

/// Algorithm knobs.  Everything is optional; each subcommand fills in its
/// own defaults, listed in the CLI documentation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmBlock {
    /// Convergence threshold (code-search residual or synthesis test
    /// function, depending on the subcommand).
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Slack pulses beyond the constraint count in timing synthesis.
    pub delta_n: Option<usize>,
    /// Line-search halvings in timing synthesis.
    pub halvings: Option<u32>,
    /// Pulse-duration window.
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    /// Protection cycle length.
    pub tau_z: Option<f64>,
    pub n_cycles: Option<usize>,
    /// Evolution substep; defaults to tau_z / 10.
    pub dt: Option<f64>,
    /// "deterministic" or "stochastic".
    pub projection_mode: Option<String>,
    /// Total protected time for the cycle-length sweep.
    pub total_time: Option<f64>,
    pub tau_z_list: Option<Vec<f64>>,
    /// Random-coding sweep knobs.
    pub switches_per_qubit: Option<usize>,
    pub sweep_seeds: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    /// Bracket depth for the algebra-rank probe.
    pub depth: Option<usize>,
    /// "search", "identity", or "replay" (replay needs a control file).
    pub coding: Option<String>,
    /// "basis0", "uniform", or "random".
    pub initial_state: Option<String>,
}

impl AlgorithmBlock {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol", self.tol),
            ("tau_min", self.tau_min),
            ("tau_max", self.tau_max),
            ("tau_z", self.tau_z),
            ("dt", self.dt),
            ("total_time", self.total_time),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (self.tau_min, self.tau_max) {
            if !(lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "the duration window needs tau_min < tau_max, got [{lo}, {hi}]"
                )));
            }
        }
        if let (Some(dt), Some(tau_z)) = (self.dt, self.tau_z) {
            if dt > tau_z {
                return Err(Error::InvalidArgument(format!(
                    "the substep dt = {dt} must not exceed the cycle length tau_Z = {tau_z}"
                )));
            }
        }
        if let Some(mode) = &self.projection_mode {
            if mode != "deterministic" && mode != "stochastic" {
                return Err(Error::InvalidArgument(format!(
                    "projection_mode must be \"deterministic\" or \"stochastic\", got \"{mode}\""
                )));
            }
        }
        if let Some(c) = &self.coding {
            if !["search", "identity", "replay"].contains(&c.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "coding must be \"search\", \"identity\", or \"replay\", got \"{c}\""
                )));
            }
        }
        if let Some(s) = &self.initial_state {
            if !["basis0", "uniform", "random"].contains(&s.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "initial_state must be \"basis0\", \"uniform\", or \"random\", got \"{s}\""
                )));
            }
        }
        if let Some(list) = &self.tau_z_list {
            if list.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
                return Err(Error::InvalidArgument("tau_z_list entries must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
}

/// The whole experiment file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub problem: ProblemBlock,
    #[serde(default)]
    pub generators: GeneratorBlock,
    #[serde(default)]
    pub fields: Vec<FieldBlock>,
    pub control: Option<ControlBlock>,
    #[serde(default)]
    pub algorithm: AlgorithmBlock,
    #[serde(default)]
    pub output: OutputBlock,
    /// Directory the file was loaded from; resolves relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parse from TOML text.  `base_dir` anchors relative paths.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of_offset(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_toml(&text, &base)
    }

    /// Anchor a configured path at the config file's directory.
    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.algorithm.validate()?;
        for f in &self.fields {
            f.to_profile(self.seed)?;
        }
        if let GeneratorBlock::FewBody { terms, normalize } = &self.generators {
            if terms.is_empty() {
                return Err(Error::InvalidArgument("the few-body generator list is empty".into()));
            }
            if !["frobenius", "spectral", "none"].contains(&normalize.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "normalize must be \"frobenius\", \"spectral\", or \"none\", got \"{normalize}\""
                )));
            }
            for t in terms {
                if t.support.len() != t.paulis.len() {
                    return Err(Error::InvalidArgument(format!(
                        "a term lists {} support qubits but {} Pauli names",
                        t.support.len(),
                        t.paulis.len()
                    )));
                }
                for p in &t.paulis {
                    if !["x", "y", "z"].contains(&p.as_str()) {
                        return Err(Error::InvalidArgument(format!(
                            "unknown Pauli name \"{p}\" (use \"x\", \"y\", or \"z\")"
                        )));
                    }
                }
                if !t.coefficient.is_finite() || t.coefficient == 0.0 {
                    return Err(Error::InvalidArgument(
                        "term coefficients must be finite and nonzero".into(),
                    ));
                }
            }
        }
        // Referenced files must exist when the config is accepted.
        if let GeneratorBlock::File { path } = &self.generators {
            let full = self.resolve_path(path);
            if !full.is_file() {
                return Err(Error::InvalidArgument(format!(
                    "generator file {} does not exist",
                    full.display()
                )));
            }
        }
        if let Some(ControlBlock::File { path }) = &self.control {
            let full = self.resolve_path(path);
            if !full.is_file() {
                return Err(Error::InvalidArgument(format!(
                    "control file {} does not exist",
                    full.display()
                )));
            }
        }
        Ok(())
    }

    /// Field profiles with the experiment seed as the fallback.
    pub fn field_profiles(&self) -> Result<Vec<FieldProfile>> {
        self.fields.iter().map(|f| f.to_profile(self.seed)).collect()
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().map(|d| self.resolve_path(&d)).unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Hash identifying (config bytes, effective seed); identical inputs give
/// identical hashes, so reruns are linkable through the manifest.
pub fn config_hash(config_text: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(config_text.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml(text, Path::new("."))
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse(
            r#"
            seed = 7
            [problem]
            N = 8
            I = 2
            M = 3
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.problem.resolved_total_dim().unwrap(), 8);
        assert_eq!(cfg.problem.resolved_ancilla_dim().unwrap(), 4);
        assert_eq!(cfg.problem.resolved_generator_count().unwrap(), 3);
        assert!(matches!(cfg.generators, GeneratorBlock::RandomHermitian { seed: None }));
        assert_eq!(cfg.output_dir(), PathBuf::from("out"));
    }

    #[test]
    fn qubit_style_sizes_expand_to_powers_of_two() {
        let cfg = parse(
            r#"
            [problem]
            n = 3
            k = 1
            M = 2
            "#,
        )
        .unwrap();
        assert_eq!(cfg.problem.resolved_total_dim().unwrap(), 8);
        assert_eq!(cfg.problem.resolved_code_dim().unwrap(), 2);
        assert_eq!(cfg.problem.resolved_ancilla_dim().unwrap(), 4);
    }

    #[test]
    fn inconsistent_dimensions_are_rejected() {
        let err = parse(
            r#"
            [problem]
            N = 8
            I = 2
            A = 3
            M = 1
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("I * A"), "{err}");
    }

    #[test]
    fn negative_generator_count_is_rejected() {
        let err = parse(
            r#"
            [problem]
            N = 4
            I = 2
            M = -1
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("at least 1"), "{err}");
    }

    #[test]
    fn substep_longer_than_a_cycle_is_rejected() {
        let err = parse(
            r#"
            [problem]
            N = 4
            I = 2
            M = 1
            [algorithm]
            tau_z = 0.01
            dt = 0.02
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("must not exceed"), "{err}");
    }

    #[test]
    fn empty_few_body_generator_list_is_rejected() {
        let err = parse(
            r#"
            [problem]
            N = 4
            I = 2
            M = 1
            [generators]
            kind = "few-body"
            terms = []
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("empty"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line_number() {
        let err = parse(
            r#"
            [problem]
            N = 4
            I = 2
            M = 1
            frobnicate = true
            "#,
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert!(line >= 2, "line {line}"),
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn missing_referenced_file_is_rejected() {
        let err = parse(
            r#"
            [problem]
            N = 4
            I = 2
            M = 1
            [generators]
            kind = "file"
            path = "no-such-file.txt"
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("does not exist"), "{err}");
    }

    #[test]
    fn field_blocks_map_onto_profiles() {
        let cfg = parse(
            r#"
            seed = 3
            [problem]
            N = 4
            I = 2
            M = 1
            [[fields]]
            kind = "constant"
            amplitude = 0.01
            [[fields]]
            kind = "sinusoid"
            amplitude = 0.02
            omega = 5.0
            [[fields]]
            kind = "piecewise-random"
            amplitude = 0.01
            segment = 0.1
            "#,
        )
        .unwrap();
        let profiles = cfg.field_profiles().unwrap();
        assert_eq!(profiles.len(), 3);
        match &profiles[2] {
            FieldProfile::PiecewiseRandom { seed, .. } => assert_eq!(*seed, 3),
            other => panic!("wrong profile {other:?}"),
        }
    }

    #[test]
    fn config_hash_tracks_text_and_seed() {
        let a = config_hash("x = 1", 0);
        let b = config_hash("x = 1", 0);
        let c = config_hash("x = 1", 1);
        let d = config_hash("x = 2", 0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_eq!(a.len(), 64);
    }
}
