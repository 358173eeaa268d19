//! Scenario configuration: a single JSON file per run, with every knob
//! optional and defaults echoed back into the report header.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// One of E1..E5.
    pub experiment: String,
    /// Primes for the ring families (default [2, 3]).
    #[serde(default)]
    pub p_values: Option<Vec<u32>>,
    /// Largest product-ring width (default 4).
    #[serde(default)]
    pub m_max: Option<usize>,
    /// Tensor-lift arities (default [2, 3]).
    #[serde(default)]
    pub lift_n: Option<Vec<usize>>,
    /// Slice degree for polynomial-ring checks (default 8).
    #[serde(default)]
    pub degree_bound: Option<usize>,
    /// Truncation degree for the symmetric track (default 2).
    #[serde(default)]
    pub sym_degree: Option<usize>,
    /// Base seed for randomized experiments (mandatory for E3).
    #[serde(default)]
    pub seed: Option<u64>,
    /// Pivot seeds for the splitting sweep (default 0..10).
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    /// Instances per avoidance cell (default 100).
    #[serde(default)]
    pub instances: Option<usize>,
    /// Largest avoidance arity (default 3).
    #[serde(default)]
    pub n_max: Option<usize>,
    /// Largest slice-support bound (default 3).
    #[serde(default)]
    pub k_max: Option<usize>,
    /// Tower depth and width for E1 (defaults 1 and 2).
    #[serde(default)]
    pub tower_depth: Option<usize>,
    #[serde(default)]
    pub tower_width: Option<usize>,
    /// An explicit sequence to run alongside the built-in families (E2, E5).
    #[serde(default)]
    pub spec: Option<indiv::witness::IndivSpecData>,
    /// Where certificates are written (default "indiv-out").
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Optional CSV output path.
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ScenarioConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn demo(experiment: &str) -> Result<Self> {
        let cfg = ScenarioConfig {
            experiment: experiment.to_uppercase(),
            p_values: None,
            m_max: None,
            lift_n: None,
            degree_bound: None,
            sym_degree: None,
            seed: Some(42),
            seeds: None,
            instances: Some(100),
            n_max: None,
            k_max: None,
            tower_depth: None,
            tower_width: None,
            spec: None,
            out_dir: None,
            csv: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.experiment.as_str() {
            "E1" | "E2" | "E3" | "E4" | "E5" => {}
            other => bail!("experiment must be one of E1..E5, got {other:?}"),
        }
        if let Some(ps) = &self.p_values {
            for &p in ps {
                indiv::PrimeModulus::new(p)
                    .map_err(|e| anyhow::anyhow!("p_values entry {p}: {e}"))?;
            }
        }
        if self.experiment == "E3" && self.seed.is_none() {
            bail!("E3 is randomized: the config must set \"seed\"");
        }
        if let Some(m) = self.m_max {
            if m == 0 || m > 6 {
                bail!("m_max must be in 1..=6, got {m}");
            }
        }
        if let Some(ns) = &self.lift_n {
            if ns.iter().any(|&n| n == 0 || n > 3) {
                bail!("lift_n entries must be in 1..=3");
            }
        }
        if let Some(n) = self.n_max {
            if n == 0 || n > 3 {
                bail!("n_max must be in 1..=3, got {n}");
            }
        }
        if let Some(k) = self.k_max {
            if k == 0 || k > 3 {
                bail!("k_max must be in 1..=3, got {k}");
            }
        }
        if let Some(spec) = &self.spec {
            indiv::witness::spec_from_data(spec)
                .map_err(|e| anyhow::anyhow!("config field \"spec\": {e}"))?;
        }
        Ok(())
    }

    pub fn p_values(&self) -> Vec<u32> {
        self.p_values.clone().unwrap_or_else(|| vec![2, 3])
    }

    pub fn m_max(&self) -> usize {
        self.m_max.unwrap_or(4)
    }

    pub fn lift_n(&self) -> Vec<usize> {
        self.lift_n.clone().unwrap_or_else(|| vec![2, 3])
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound.unwrap_or(indiv::caps::DEFAULT_DEGREE_BOUND)
    }

    pub fn sym_degree(&self) -> usize {
        self.sym_degree.unwrap_or(2)
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| (0..10).collect())
    }

    pub fn instances(&self) -> usize {
        self.instances.unwrap_or(100)
    }

    pub fn n_max(&self) -> usize {
        self.n_max.unwrap_or(3)
    }

    pub fn k_max(&self) -> usize {
        self.k_max.unwrap_or(3)
    }

    pub fn tower_depth(&self) -> usize {
        self.tower_depth.unwrap_or(1)
    }

    pub fn tower_width(&self) -> usize {
        self.tower_width.unwrap_or(2)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("indiv-out"))
    }

    /// Echo of every effective setting, defaults included.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("experiment".into(), self.experiment.clone()),
            ("p_values".into(), format!("{:?}", self.p_values())),
            ("m_max".into(), self.m_max().to_string()),
            ("lift_n".into(), format!("{:?}", self.lift_n())),
            ("degree_bound".into(), self.degree_bound().to_string()),
            ("sym_degree".into(), self.sym_degree().to_string()),
            ("instances".into(), self.instances().to_string()),
            ("n_max".into(), self.n_max().to_string()),
            ("k_max".into(), self.k_max().to_string()),
            ("tower_depth".into(), self.tower_depth().to_string()),
            ("tower_width".into(), self.tower_width().to_string()),
            ("seeds".into(), format!("{:?}", self.seeds())),
            ("out_dir".into(), self.out_dir().display().to_string()),
            (
                "cap.tuple".into(),
                indiv::caps::TUPLE_CAP.to_string(),
            ),
            (
                "cap.avoid_scan".into(),
                indiv::caps::AVOID_SCAN_CAP.to_string(),
            ),
            (
                "cap.group_ring_index".into(),
                indiv::caps::MAX_GROUP_RING_INDEX.to_string(),
            ),
        ];
        if let Some(seed) = self.seed {
            out.push(("seed".into(), seed.to_string()));
        }
        out
    }
}
