//! Declarative run configuration: a small key-value document with sections,
//! strict about unknown and duplicate keys so typos fail loudly.
//!
//! ```text
//! experiment = psi-check
//! seed = 42
//! resolution = 1024
//! tolerance = 1e-10
//! out_dir = out
//!
//! [graph]
//! generator = square        # square | multigrid | file
//! width = 10
//! height = 10
//! # directions = 1+0i, 0+1i   (multigrid)
//! # offsets = 0.17, 0.23
//! # radius = 5.0
//! # path = graph.json         (file)
//!
//! [spectral]
//! alphas = 0.9009688679+0.4338837391i, -0.4338837391+0.9009688679i
//! reality_modulus = 1.0
//!
//! [lambda]
//! count = 5
//! # values = 3+0.5i, -1.7+2.2i
//!
//! [run]
//! radius = 4
//! draws = 5
//! genus_max = 3
//! samples = 50
//! ```

use quadgreen::Complex64;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Weights,
    PsiCheck,
    Contours,
    Green,
    VerifyLh,
    Growth,
    ThetaCheck,
}

impl Experiment {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "weights" => Experiment::Weights,
            "psi-check" => Experiment::PsiCheck,
            "contours" => Experiment::Contours,
            "green" => Experiment::Green,
            "verify-lh" => Experiment::VerifyLh,
            "growth" => Experiment::Growth,
            "theta-check" => Experiment::ThetaCheck,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Weights => "weights",
            Experiment::PsiCheck => "psi-check",
            Experiment::Contours => "contours",
            Experiment::Green => "green",
            Experiment::VerifyLh => "verify-lh",
            Experiment::Growth => "growth",
            Experiment::ThetaCheck => "theta-check",
        }
    }

    /// Default tolerance asserted by the experiment's exit status.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            Experiment::Weights => 1e-12,
            Experiment::PsiCheck => 1e-10,
            Experiment::Contours => 1e-6,
            Experiment::Green => 1e-6,
            Experiment::VerifyLh => 1e-6,
            Experiment::Growth => 1e-12,
            Experiment::ThetaCheck => 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub enum GraphSource {
    Square { width: usize, height: usize },
    Multigrid {
        directions: Vec<Complex64>,
        offsets: Vec<f64>,
        radius: f64,
    },
    File { path: String },
}

#[derive(Clone, Debug)]
pub enum LambdaSource {
    Seeded { count: usize },
    Explicit(Vec<Complex64>),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub resolution: usize,
    pub tolerance: f64,
    pub out_dir: Option<String>,
    pub graph: GraphSource,
    pub alphas: Vec<Complex64>,
    pub reality_modulus: Option<f64>,
    pub lambda: LambdaSource,
    pub patch_radius: i64,
    pub draws: usize,
    pub genus_max: usize,
    pub samples: usize,
    /// Canonical text the config hash is computed from.
    pub canonical_text: String,
}

/// Parse a complex number written as `re`, `imi`, or `re+imi` / `re-imi`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim().replace(' ', "");
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    if let Ok(re) = t.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let im_part = |u: &str| -> Result<f64, String> {
        match u {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => other.parse::<f64>().map_err(|e| e.to_string()),
        }
    };
    if let Some(body) = t.strip_suffix('i') {
        // Split at the sign that separates the real and imaginary parts,
        // skipping a leading sign and signs inside exponents.
        let chars: Vec<char> = body.chars().collect();
        let mut split = None;
        for idx in (1..chars.len()).rev() {
            let c = chars[idx];
            if (c == '+' || c == '-') && chars[idx - 1] != 'e' && chars[idx - 1] != 'E' {
                split = Some(idx);
                break;
            }
        }
        match split {
            Some(idx) => {
                let re: f64 = body[..idx].parse().map_err(|e| format!("{e}"))?;
                let im = im_part(&body[idx..])?;
                Ok(Complex64::new(re, im))
            }
            None => Ok(Complex64::new(0.0, im_part(body)?)),
        }
    } else {
        Err(format!("cannot parse '{s}' as a complex number"))
    }
}

pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>, String> {
    s.split(',').map(parse_complex).collect()
}

fn parse_real_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

type Entries = BTreeMap<(String, String), (usize, String)>;

/// Tokenize the document into `(section, key) -> (line, value)`, rejecting
/// duplicates.
fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut out = Entries::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(Some(line_no), "unterminated section header"))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(Some(line_no), "expected 'key = value'"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if out
            .insert((section.clone(), key.clone()), (line_no, value))
            .is_some()
        {
            return Err(err(
                Some(line_no),
                format!("duplicate key '{key}' in section '[{section}]'"),
            ));
        }
    }
    Ok(out)
}

const KNOWN_KEYS: &[(&str, &str)] = &[
    ("", "experiment"),
    ("", "seed"),
    ("", "resolution"),
    ("", "tolerance"),
    ("", "out_dir"),
    ("graph", "generator"),
    ("graph", "width"),
    ("graph", "height"),
    ("graph", "directions"),
    ("graph", "offsets"),
    ("graph", "radius"),
    ("graph", "path"),
    ("spectral", "alphas"),
    ("spectral", "reality_modulus"),
    ("lambda", "count"),
    ("lambda", "values"),
    ("run", "radius"),
    ("run", "draws"),
    ("run", "genus_max"),
    ("run", "samples"),
];

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let entries = tokenize(text)?;
    for ((section, key), (line, _)) in &entries {
        if !KNOWN_KEYS
            .iter()
            .any(|(s, k)| s == section && k == key)
        {
            return Err(err(
                Some(*line),
                format!("unknown key '{key}' in section '[{section}]'"),
            ));
        }
    }
    let get = |section: &str, key: &str| -> Option<&(usize, String)> {
        entries.get(&(section.to_string(), key.to_string()))
    };
    let require = |section: &str, key: &str, why: &str| -> Result<&(usize, String), ConfigError> {
        get(section, key).ok_or_else(|| {
            err(
                None,
                format!(
                    "missing required key '{key}'{} ({why})",
                    if section.is_empty() {
                        String::new()
                    } else {
                        format!(" in section '[{section}]'")
                    }
                ),
            )
        })
    };

    let (exp_line, exp_text) = require("", "experiment", "selects what to run")?;
    let experiment = Experiment::parse(exp_text)
        .ok_or_else(|| err(Some(*exp_line), format!("unknown experiment '{exp_text}'")))?;

    let parse_num = |section: &str, key: &str| -> Result<Option<f64>, ConfigError> {
        match get(section, key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|e| err(Some(*line), format!("{key}: {e}"))),
        }
    };

    let seed = match get("", "seed") {
        None => 0,
        Some((line, v)) => v
            .parse::<u64>()
            .map_err(|e| err(Some(*line), format!("seed: {e}")))?,
    };
    let resolution = match get("", "resolution") {
        None => 1024,
        Some((line, v)) => v
            .parse::<usize>()
            .map_err(|e| err(Some(*line), format!("resolution: {e}")))?,
    };
    let tolerance = parse_num("", "tolerance")?.unwrap_or(experiment.default_tolerance());
    let out_dir = get("", "out_dir").map(|(_, v)| v.clone());

    // The theta experiment has no graph; everything else needs one.
    let graph = if experiment == Experiment::ThetaCheck {
        GraphSource::Square {
            width: 1,
            height: 1,
        }
    } else {
        let (gen_line, generator) = require("graph", "generator", "selects the patch")?;
        match generator.as_str() {
            "square" => {
                let w = require("graph", "width", "square patch size")?;
                let h = require("graph", "height", "square patch size")?;
                GraphSource::Square {
                    width: w.1.parse().map_err(|e| err(Some(w.0), format!("width: {e}")))?,
                    height: h.1.parse().map_err(|e| err(Some(h.0), format!("height: {e}")))?,
                }
            }
            "multigrid" => {
                let d = require("graph", "directions", "multigrid line families")?;
                let o = require("graph", "offsets", "multigrid offsets")?;
                let r = require("graph", "radius", "multigrid disc radius")?;
                GraphSource::Multigrid {
                    directions: parse_complex_list(&d.1)
                        .map_err(|e| err(Some(d.0), format!("directions: {e}")))?,
                    offsets: parse_real_list(&o.1)
                        .map_err(|e| err(Some(o.0), format!("offsets: {e}")))?,
                    radius: r.1.parse().map_err(|e| err(Some(r.0), format!("radius: {e}")))?,
                }
            }
            "file" => {
                let p = require("graph", "path", "graph JSON input")?;
                GraphSource::File { path: p.1.clone() }
            }
            other => {
                return Err(err(Some(*gen_line), format!("unknown generator '{other}'")))
            }
        }
    };

    let alphas = if experiment == Experiment::ThetaCheck && get("spectral", "alphas").is_none() {
        Vec::new()
    } else {
        let (line, text) = require(
            "spectral",
            "alphas",
            &format!("experiment={} needs spectral data", experiment.name()),
        )?;
        parse_complex_list(text).map_err(|e| err(Some(*line), format!("alphas: {e}")))?
    };
    let reality_modulus = parse_num("spectral", "reality_modulus")?;

    let lambda = match (get("lambda", "values"), get("lambda", "count")) {
        (Some((line, v)), _) => LambdaSource::Explicit(
            parse_complex_list(v).map_err(|e| err(Some(*line), format!("values: {e}")))?,
        ),
        (None, Some((line, v))) => LambdaSource::Seeded {
            count: v
                .parse()
                .map_err(|e| err(Some(*line), format!("count: {e}")))?,
        },
        (None, None) => LambdaSource::Seeded { count: 5 },
    };

    let patch_radius = match get("run", "radius") {
        None => 4,
        Some((line, v)) => v
            .parse::<i64>()
            .map_err(|e| err(Some(*line), format!("radius: {e}")))?,
    };
    let draws = match get("run", "draws") {
        None => 5,
        Some((line, v)) => v
            .parse()
            .map_err(|e| err(Some(*line), format!("draws: {e}")))?,
    };
    let genus_max = match get("run", "genus_max") {
        None => 3,
        Some((line, v)) => v
            .parse()
            .map_err(|e| err(Some(*line), format!("genus_max: {e}")))?,
    };
    let samples = match get("run", "samples") {
        None => 50,
        Some((line, v)) => v
            .parse()
            .map_err(|e| err(Some(*line), format!("samples: {e}")))?,
    };

    // Canonical text: sorted (section, key) pairs; the summary hash covers
    // exactly the semantic content. The output location is environmental
    // and excluded, so identical runs into different directories emit
    // byte-identical summaries.
    let canonical_text = entries
        .iter()
        .filter(|((s, k), _)| !(s.is_empty() && k == "out_dir"))
        .map(|((s, k), (_, v))| format!("[{s}] {k} = {v}"))
        .collect::<Vec<_>>()
        .join("\n");

    Ok(RunConfig {
        experiment,
        seed,
        resolution,
        tolerance,
        out_dir,
        graph,
        alphas,
        reality_modulus,
        lambda,
        patch_radius,
        draws,
        genus_max,
        samples,
        canonical_text,
    })
}

/// FNV-1a hash of the canonical config text, used to stamp summaries.
pub fn config_hash(config: &RunConfig) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in config.canonical_text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
