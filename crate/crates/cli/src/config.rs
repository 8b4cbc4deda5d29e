//! Experiment configuration: flat `key = value` lines grouped under
//! `[section]` headers (grid, params, stepper, experiment, sweep). Parse
//! errors carry line numbers and map to exit code 2.

use anyhow::{anyhow, bail, Context, Result};
use nsm_core::{PhysParams, StepperConfig, SystemKind};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// How the initial fields are produced.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    /// Seeded band-limited divergence-free random data with prescribed
    /// amplitude in the given Sobolev order.
    Random {
        band_lo: f64,
        band_hi: f64,
        amplitude: f64,
        hs_order: f64,
    },
    /// Named analytic field.
    Named(String),
    /// Reload a previously written snapshot.
    Snapshot(PathBuf),
}

/// Which parameter a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Nu,
    Sigma,
    C,
    N,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SweepParam::Nu => "nu",
            SweepParam::Sigma => "sigma",
            SweepParam::C => "c",
            SweepParam::N => "n",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub d: usize,
    pub n: usize,
    pub len: f64,
    pub params: PhysParams,
    pub stepper: StepperConfig,
    pub initial: InitialSpec,
    pub sweep: Option<Sweep>,
    pub seed: u64,
    /// Sobolev order used by the hs_* diagnostic columns.
    pub hs_order: f64,
    pub record_helicity: bool,
    pub ball_m: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: "CUSTOM".into(),
            d: 2,
            n: 32,
            len: 2.0 * std::f64::consts::PI,
            params: PhysParams {
                nu: 1.0,
                sigma: 1.0,
                c: 1.0,
                kappa: 0.0,
                alpha: 1.0,
                beta: 1.0,
                b_star: [0.0; 3],
                system: SystemKind::Nsm,
            },
            stepper: StepperConfig {
                dt: 0.01,
                cfl: 0.4,
                t_end: 1.0,
                record_every: 1,
                snapshot_every: 0,
            },
            initial: InitialSpec::Random {
                band_lo: 1.0,
                band_hi: 4.0,
                amplitude: 1.0,
                hs_order: 0.0,
            },
            sweep: None,
            seed: 1,
            hs_order: 1.0,
            record_helicity: false,
            ball_m: None,
        }
    }
}

/// Raw sectioned key-value view of a config file, with line numbers kept for
/// error reporting.
struct RawConfig {
    entries: BTreeMap<(String, String), (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                if section.is_empty() {
                    bail!("line {lineno}: empty section header");
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {lineno}: expected 'key = value', got '{line}'"))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                bail!("line {lineno}: empty key");
            }
            if section.is_empty() {
                bail!("line {lineno}: key '{key}' appears before any [section] header");
            }
            let prev = entries.insert(
                (section.clone(), key.clone()),
                (lineno, value.trim().to_string()),
            );
            if let Some((first, _)) = prev {
                bail!("line {lineno}: duplicate key '{key}' in [{section}] (first at line {first})");
            }
        }
        Ok(RawConfig { entries })
    }

    fn take<T: FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.entries.remove(&(section.into(), key.into())) {
            None => Ok(None),
            Some((lineno, value)) => value.parse::<T>().map(Some).map_err(|e| {
                anyhow!("line {lineno}: bad value '{value}' for [{section}] {key}: {e}")
            }),
        }
    }

    fn take_raw(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.entries.remove(&(section.into(), key.into()))
    }

    fn finish(self) -> Result<()> {
        if let Some(((section, key), (lineno, _))) = self.entries.into_iter().next() {
            bail!("line {lineno}: unknown key '{key}' in [{section}]");
        }
        Ok(())
    }
}

fn parse_f64_list(lineno: usize, what: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("line {lineno}: bad number '{}' in {what}: {e}", x.trim()))
        })
        .collect()
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut raw = RawConfig::parse(text)?;
    let mut cfg = ExperimentConfig::default();

    if let Some(v) = raw.take::<usize>("grid", "d")? {
        cfg.d = v;
    }
    if let Some(v) = raw.take::<usize>("grid", "n")? {
        cfg.n = v;
    }
    if let Some(v) = raw.take::<f64>("grid", "l")? {
        cfg.len = v;
    }

    if let Some((lineno, v)) = raw.take_raw("params", "system") {
        cfg.params.system = v
            .parse()
            .map_err(|e| anyhow!("line {lineno}: {e}"))?;
    }
    if let Some(v) = raw.take::<f64>("params", "nu")? {
        cfg.params.nu = v;
    }
    if let Some(v) = raw.take::<f64>("params", "sigma")? {
        cfg.params.sigma = v;
    }
    if let Some(v) = raw.take::<f64>("params", "c")? {
        cfg.params.c = v;
    }
    if let Some(v) = raw.take::<f64>("params", "kappa")? {
        cfg.params.kappa = v;
    }
    if let Some(v) = raw.take::<f64>("params", "alpha")? {
        cfg.params.alpha = v;
    }
    if let Some(v) = raw.take::<f64>("params", "beta")? {
        cfg.params.beta = v;
    }
    if let Some((lineno, v)) = raw.take_raw("params", "b_star") {
        let xs = parse_f64_list(lineno, "b_star", &v)?;
        if xs.len() != 3 {
            bail!("line {lineno}: b_star needs exactly 3 comma-separated components");
        }
        cfg.params.b_star = [xs[0], xs[1], xs[2]];
    }

    if let Some(v) = raw.take::<f64>("stepper", "dt")? {
        cfg.stepper.dt = v;
    }
    if let Some(v) = raw.take::<f64>("stepper", "cfl")? {
        cfg.stepper.cfl = v;
    }
    if let Some(v) = raw.take::<f64>("stepper", "t_end")? {
        cfg.stepper.t_end = v;
    }
    if let Some(v) = raw.take::<usize>("stepper", "record_every")? {
        cfg.stepper.record_every = v;
    }
    if let Some(v) = raw.take::<usize>("stepper", "snapshot_every")? {
        cfg.stepper.snapshot_every = v;
    }

    if let Some(v) = raw.take::<String>("experiment", "scenario")? {
        cfg.scenario = v.to_ascii_uppercase();
    }
    if let Some(v) = raw.take::<u64>("experiment", "seed")? {
        cfg.seed = v;
    }
    if let Some(v) = raw.take::<f64>("experiment", "hs_order")? {
        cfg.hs_order = v;
    }
    if let Some(v) = raw.take::<bool>("experiment", "helicity")? {
        cfg.record_helicity = v;
    }
    if let Some(v) = raw.take::<f64>("experiment", "ball_m")? {
        cfg.ball_m = Some(v);
    }
    let band_lo = raw.take::<f64>("experiment", "band_lo")?;
    let band_hi = raw.take::<f64>("experiment", "band_hi")?;
    let amplitude = raw.take::<f64>("experiment", "amplitude")?;
    let init_hs = raw.take::<f64>("experiment", "initial_hs_order")?;
    if let Some((lineno, v)) = raw.take_raw("experiment", "initial") {
        cfg.initial = match v.as_str() {
            "random" => InitialSpec::Random {
                band_lo: band_lo.unwrap_or(1.0),
                band_hi: band_hi.unwrap_or(4.0),
                amplitude: amplitude.unwrap_or(1.0),
                hs_order: init_hs.unwrap_or(0.0),
            },
            other if other.starts_with("snapshot:") => {
                InitialSpec::Snapshot(PathBuf::from(other.trim_start_matches("snapshot:")))
            }
            other if !other.is_empty() => InitialSpec::Named(other.to_string()),
            _ => bail!("line {lineno}: empty initial spec"),
        };
    } else if let InitialSpec::Random {
        band_lo: lo,
        band_hi: hi,
        amplitude: amp,
        hs_order: s,
    } = &mut cfg.initial
    {
        // band/amplitude keys still tune the default random initial data
        if let Some(v) = band_lo {
            *lo = v;
        }
        if let Some(v) = band_hi {
            *hi = v;
        }
        if let Some(v) = amplitude {
            *amp = v;
        }
        if let Some(v) = init_hs {
            *s = v;
        }
    }

    if let Some((lineno, v)) = raw.take_raw("sweep", "param") {
        let param = match v.as_str() {
            "nu" => SweepParam::Nu,
            "sigma" => SweepParam::Sigma,
            "c" => SweepParam::C,
            "n" => SweepParam::N,
            other => bail!("line {lineno}: unknown sweep parameter '{other}'"),
        };
        let (vl, values) = raw
            .take_raw("sweep", "values")
            .ok_or_else(|| anyhow!("line {lineno}: sweep has 'param' but no 'values'"))?;
        let values = parse_f64_list(vl, "sweep values", &values)?;
        if values.is_empty() {
            bail!("line {vl}: sweep values must be nonempty");
        }
        if values.iter().any(|&x| !(x > 0.0)) {
            bail!("line {vl}: sweep values must be positive");
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            bail!("line {vl}: sweep values must be strictly increasing");
        }
        cfg.sweep = Some(Sweep { param, values });
    }

    raw.finish()?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    cfg.params
        .validate()
        .map_err(|e| anyhow!("invalid params: {e}"))?;
    cfg.stepper
        .validate()
        .map_err(|e| anyhow!("invalid stepper settings: {e}"))?;
    // fails early with the library's own grid diagnostics
    nsm_core::make_grid(cfg.d, cfg.n, cfg.len).map_err(|e| anyhow!("invalid grid: {e}"))?;
    if let InitialSpec::Random {
        band_lo, band_hi, amplitude, ..
    } = &cfg.initial
    {
        if !(*band_lo >= 0.0 && band_hi > band_lo && *amplitude > 0.0) {
            bail!(
                "invalid random initial spec: need 0 <= band_lo < band_hi and amplitude > 0, \
                 got band_lo = {band_lo}, band_hi = {band_hi}, amplitude = {amplitude}"
            );
        }
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# comment
[grid]
d = 3
n = 16
l = 6.283185307179586

[params]
system = NSM_STAR
nu = 0.5
sigma = 2.0
c = 3.0
alpha = 0.0
b_star = 0, 0, 1

[stepper]
dt = 0.05
t_end = 2.0
record_every = 2

[experiment]
scenario = E5
seed = 42
initial = random
band_lo = 1
band_hi = 3
amplitude = 0.01
helicity = true
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.d, 3);
        assert_eq!(cfg.n, 16);
        assert_eq!(cfg.params.system, SystemKind::NsmStar);
        assert_eq!(cfg.params.b_star, [0.0, 0.0, 1.0]);
        assert_eq!(cfg.scenario, "E5");
        assert_eq!(cfg.seed, 42);
        assert!(cfg.record_helicity);
        match cfg.initial {
            InitialSpec::Random { amplitude, .. } => assert_eq!(amplitude, 0.01),
            other => panic!("wrong initial: {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_config("[grid]\nn = twelve\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_config("x = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = parse_config("[grid]\nn = 16\nn = 32\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = parse_config("[grid]\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn sweep_must_be_sorted_positive() {
        let base = "[grid]\nn = 8\n[sweep]\nparam = nu\nvalues = ";
        assert!(parse_config(&format!("{base}1, 2, 3\n")).is_ok());
        assert!(parse_config(&format!("{base}3, 2\n")).is_err());
        assert!(parse_config(&format!("{base}-1, 2\n")).is_err());
    }

    #[test]
    fn snapshot_initial() {
        let cfg = parse_config("[grid]\nn = 8\n[experiment]\ninitial = snapshot:/tmp/x.nsms\n")
            .unwrap();
        assert_eq!(
            cfg.initial,
            InitialSpec::Snapshot(PathBuf::from("/tmp/x.nsms"))
        );
    }
}
