use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::finite_diff::{optimal_steps, FDConfig};
use crate::integrators::{MaxIterPolicy, MethodKind, NewtonConfig};
use crate::systems::{make_double_pendulum, make_harmonic, make_lennard_jones, AnySystem};
use crate::terrain::{load_grid, synth_grid, ElevationGrid, TopographicHamiltonian};

/// Seed of the synthetic terrain used when no grid file is given.
pub const DEFAULT_SYNTH_SEED: u64 = 0;

/// Settings shared by all harness commands.
///
/// Optional fields fall back to per-command defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: String,
    /// Dimension of the harmonic oscillator.
    pub dim: usize,
    pub methods: Vec<MethodKind>,
    /// Explicit step sizes; when empty, `h_max · 2⁻ᵏ` for `k < levels`.
    pub h: Vec<f64>,
    pub h_max: f64,
    pub levels: usize,
    pub time: f64,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub on_max_iter: MaxIterPolicy,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub eps_bar: f64,
    /// Bound of the noise injected into `H`; 0 disables it.
    pub noise: f64,
    pub seed: u64,
    pub x0: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub grid: Option<PathBuf>,
    pub synth_seed: u64,
    pub synth_size: usize,
    pub synth_bumps: usize,
    pub raster: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: "double-pendulum".into(),
            dim: 2,
            methods: vec![MethodKind::SiaDf],
            h: Vec::new(),
            h_max: 0.1,
            levels: 6,
            time: 1.0,
            steps: None,
            tol: None,
            max_iter: 20,
            on_max_iter: MaxIterPolicy::Fail,
            tau1: None,
            tau2: None,
            eps_bar: 1e-15,
            noise: 0.0,
            seed: 0,
            x0: None,
            out: None,
            grid: None,
            synth_seed: DEFAULT_SYNTH_SEED,
            synth_size: 122,
            synth_bumps: 8,
            raster: 61,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "system",
    "dim",
    "method",
    "h",
    "h_max",
    "levels",
    "time",
    "steps",
    "tol",
    "max_iter",
    "on_max_iter",
    "tau1",
    "tau2",
    "eps_bar",
    "noise",
    "seed",
    "x0",
    "out",
    "grid",
    "synth_seed",
    "synth_size",
    "synth_bumps",
    "raster",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: invalid value '{v}'")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| num::<f64>(key, s)).collect()
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{key} must be > 0, got {v}")))
    }
}

impl ExperimentConfig {
    /// Parses a flat `key = value` file on top of the defaults. `#` starts a
    /// comment line; keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: k + 1, msg: format!("expected 'key = value', got '{line}'") })?;
            self.set(key.trim(), value.trim()).map_err(|e| Error::Parse { line: k + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one option from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "system" => {
                self.system = value.to_string();
                resolve_system_name(value)?;
            }
            "dim" => self.dim = num(&key, value)?,
            "method" | "methods" => {
                let methods: Vec<MethodKind> = if value.trim().eq_ignore_ascii_case("all") {
                    MethodKind::ALL.to_vec()
                } else {
                    value.split(',').map(str::parse).collect::<Result<_>>()?
                };
                if methods.is_empty() {
                    return Err(Error::Config("method list is empty".into()));
                }
                self.methods = methods;
            }
            "h" => {
                let h = list(&key, value)?;
                for &v in &h {
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(Error::Config(format!("h must be >= 0, got {v}")));
                    }
                }
                self.h = h;
            }
            "h_max" => self.h_max = positive(&key, num(&key, value)?)?,
            "levels" => self.levels = num(&key, value)?,
            "time" | "t" => self.time = positive(&key, num(&key, value)?)?,
            "steps" => self.steps = Some(num(&key, value)?),
            "tol" => self.tol = Some(positive(&key, num(&key, value)?)?),
            "max_iter" => self.max_iter = num(&key, value)?,
            "on_max_iter" => self.on_max_iter = value.parse()?,
            "tau1" => self.tau1 = Some(positive(&key, num(&key, value)?)?),
            "tau2" => self.tau2 = Some(positive(&key, num(&key, value)?)?),
            "eps_bar" => self.eps_bar = positive(&key, num(&key, value)?)?,
            "noise" => {
                let v: f64 = num(&key, value)?;
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("noise must be >= 0, got {v}")));
                }
                self.noise = v;
            }
            "seed" => self.seed = num(&key, value)?,
            "x0" => self.x0 = Some(list(&key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "grid" => self.grid = Some(PathBuf::from(value)),
            "synth_seed" => self.synth_seed = num(&key, value)?,
            "synth_size" => self.synth_size = num(&key, value)?,
            "synth_bumps" => self.synth_bumps = num(&key, value)?,
            "raster" => self.raster = num(&key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Step sizes of a study: the explicit list, else `h_max · 2⁻ᵏ`.
    pub fn h_levels(&self) -> Vec<f64> {
        if !self.h.is_empty() {
            return self.h.clone();
        }
        (0..self.levels).map(|k| self.h_max / 2f64.powi(k as i32)).collect()
    }

    /// First configured step size, or `fallback`.
    pub fn single_h(&self, fallback: f64) -> f64 {
        self.h.first().copied().unwrap_or(fallback)
    }

    /// Finite-difference settings. Without explicit steps, injected noise selects
    /// the steps matched to its bound.
    pub fn fd(&self) -> Result<FDConfig> {
        let eps = if self.noise > 0.0 { self.noise.max(self.eps_bar) } else { self.eps_bar };
        let (t1, t2) = if self.noise > 0.0 { optimal_steps(eps)? } else { (1e-5, 1e-4) };
        let fd = FDConfig { tau1: self.tau1.unwrap_or(t1), tau2: self.tau2.unwrap_or(t2), eps_bar: eps };
        fd.validate()?;
        Ok(fd)
    }

    pub fn newton(&self, default_tol: f64) -> Result<NewtonConfig> {
        let cfg = NewtonConfig {
            tol: self.tol.unwrap_or(default_tol),
            max_iter: self.max_iter,
            seed: self.seed,
            fd: self.fd()?,
            on_max_iter: self.on_max_iter,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        resolve_system_name(&self.system)?;
        if self.methods.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        if !(self.time > 0.0) {
            return Err(Error::Config(format!("time must be > 0, got {}", self.time)));
        }
        self.newton(1e-11)?;
        Ok(())
    }

    /// Builds the configured system (noise excluded).
    pub fn build_system(&self) -> Result<AnySystem> {
        Ok(match resolve_system_name(&self.system)? {
            SystemName::Harmonic => {
                AnySystem::Harmonic(make_harmonic(self.dim).map_err(|e| Error::Config(e.to_string()))?)
            }
            SystemName::LennardJones => AnySystem::LennardJones(make_lennard_jones()),
            SystemName::DoublePendulum => AnySystem::DoublePendulum(make_double_pendulum()),
            SystemName::Terrain => AnySystem::Terrain(TopographicHamiltonian::from_grid(&self.terrain_grid()?)),
        })
    }

    pub fn terrain_grid(&self) -> Result<ElevationGrid> {
        match &self.grid {
            Some(path) => load_grid(path),
            None => synth_grid(self.synth_seed, self.synth_size, self.synth_bumps),
        }
    }

    pub fn initial_state(&self, system: &AnySystem) -> Result<Vec<f64>> {
        match &self.x0 {
            Some(x) => {
                use crate::systems::Hamiltonian;
                if x.len() != system.dim() {
                    return Err(Error::Config(format!("x0 has {} entries, system needs {}", x.len(), system.dim())));
                }
                Ok(x.clone())
            }
            None => Ok(system.default_initial_state().into_inner()),
        }
    }

    /// The configuration as `# key = value` lines, for embedding in CSV output.
    pub fn echo(&self, command: &str) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_else(|| "default".into());
        writeln!(s, "# command = {command}").unwrap();
        writeln!(s, "# system = {}", self.system).unwrap();
        if resolve_system_name(&self.system).ok() == Some(SystemName::Harmonic) {
            writeln!(s, "# dim = {}", self.dim).unwrap();
        }
        let methods: Vec<&str> = self.methods.iter().map(|m| m.label()).collect();
        writeln!(s, "# method = {}", methods.join(",")).unwrap();
        if self.h.is_empty() {
            writeln!(s, "# h_max = {:?}", self.h_max).unwrap();
            writeln!(s, "# levels = {}", self.levels).unwrap();
        } else {
            writeln!(s, "# h = {}", join(&self.h)).unwrap();
        }
        writeln!(s, "# time = {:?}", self.time).unwrap();
        writeln!(s, "# steps = {}", self.steps.map(|v| v.to_string()).unwrap_or_else(|| "default".into())).unwrap();
        writeln!(s, "# tol = {}", opt(self.tol)).unwrap();
        writeln!(s, "# max_iter = {}", self.max_iter).unwrap();
        writeln!(s, "# on_max_iter = {}", self.on_max_iter).unwrap();
        writeln!(s, "# tau1 = {}", opt(self.tau1)).unwrap();
        writeln!(s, "# tau2 = {}", opt(self.tau2)).unwrap();
        writeln!(s, "# eps_bar = {:?}", self.eps_bar).unwrap();
        writeln!(s, "# noise = {:?}", self.noise).unwrap();
        writeln!(s, "# seed = {}", self.seed).unwrap();
        if let Some(x0) = &self.x0 {
            writeln!(s, "# x0 = {}", join(x0)).unwrap();
        }
        if resolve_system_name(&self.system).ok() == Some(SystemName::Terrain) || command == "terrain" {
            match &self.grid {
                Some(g) => writeln!(s, "# grid = {}", g.display()).unwrap(),
                None => {
                    writeln!(s, "# synth_seed = {}", self.synth_seed).unwrap();
                    writeln!(s, "# synth_size = {}", self.synth_size).unwrap();
                    writeln!(s, "# synth_bumps = {}", self.synth_bumps).unwrap();
                }
            }
            writeln!(s, "# raster = {}", self.raster).unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SystemName {
    Harmonic,
    LennardJones,
    DoublePendulum,
    Terrain,
}

fn resolve_system_name(name: &str) -> Result<SystemName> {
    match name.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "harmonic" | "harmonic-oscillator" => Ok(SystemName::Harmonic),
        "lennard-jones" | "lj" => Ok(SystemName::LennardJones),
        "double-pendulum" | "dp" => Ok(SystemName::DoublePendulum),
        "terrain" | "topographic" => Ok(SystemName::Terrain),
        _ => Err(Error::Config(format!("unknown system '{name}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let text = "# study\nsystem = lennard-jones\nmethod = IA_DF, sia4-df\nh = 0.1,0.05\ntol = 1e-12\n";
        let mut cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.methods, vec![MethodKind::IaDf, MethodKind::Sia4Df]);
        assert_eq!(cfg.h_levels(), vec![0.1, 0.05]);
        assert_eq!(cfg.newton(1e-11).unwrap().tol, 1e-12);
        cfg.set("max-iter", "5").unwrap();
        assert_eq!(cfg.max_iter, 5);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn default_levels() {
        let cfg = ExperimentConfig::default();
        let h = cfg.h_levels();
        assert_eq!(h.len(), 6);
        assert_eq!(h[5], 0.1 / 32.0);
        let nc = cfg.newton(1e-11).unwrap();
        assert_eq!((nc.tol, nc.max_iter, nc.fd.tau1, nc.fd.tau2), (1e-11, 20, 1e-5, 1e-4));
    }

    #[test]
    fn errors_name_the_line() {
        assert!(matches!(ExperimentConfig::parse("system = dp\nbogus = 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(ExperimentConfig::parse("tol = -1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ExperimentConfig::parse("just words\n"), Err(Error::Parse { line: 1, .. })));
        assert!(ExperimentConfig::parse("system = pendulum\n").is_err());
        assert!(ExperimentConfig::parse("method = euler\n").is_err());
    }

    #[test]
    fn noise_selects_matched_steps() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("noise", "1e-9").unwrap();
        let fd = cfg.fd().unwrap();
        assert!((fd.tau1 - 1e-3).abs() < 1e-15);
        cfg.set("tau1", "1e-4").unwrap();
        assert_eq!(cfg.fd().unwrap().tau1, 1e-4);
    }

    #[test]
    fn echo_is_commented() {
        let cfg = ExperimentConfig::default();
        assert!(cfg.echo("integrate").lines().all(|l| l.starts_with("# ")));
    }
}
