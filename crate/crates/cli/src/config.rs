//! Flat key = value configuration with optional sections and small literal
//! syntaxes for profiles, velocity models, and kernels. Parsing validates
//! everything eagerly and reports errors with line numbers; unknown keys
//! and sections are rejected.
//!
//! ```text
//! velocity = greenshields(vmax=1, rhomax=1)
//! kernel   = exp(eps=0.05)
//! profile  = fig3(nmax=50)
//!
//! [sim]
//! final_time = 1.0
//! snapshots  = 0.25, 0.5, 1.0
//!
//! [check]
//! slack  = 0.05
//! window = -1:1
//! ```

use std::fmt;

use nlclaw_core::{KernelSpec, PiecewiseConstantProfile, VelocityModel, Window};

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// Everything a subcommand may need; presence is validated at dispatch.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub velocity: Option<VelocityModel>,
    pub kernel: Option<KernelSpec>,
    pub profile: Option<PiecewiseConstantProfile>,

    pub final_time: Option<f64>,
    pub theta: Option<f64>,
    pub width_change: Option<f64>,
    pub refine: Option<f64>,
    pub snapshots: Option<Vec<f64>>,

    pub slack: Option<f64>,
    pub check_window: Option<Window>,

    pub sweep_eps: Option<Vec<f64>>,
    pub sweep_times: Option<Vec<f64>>,
    pub sweep_window: Option<Window>,

    pub local_dx: Option<f64>,
    pub local_cfl: Option<f64>,
    pub local_window: Option<Window>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ParseError> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| ParseError { line: line_no, msg };
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
                .ok_or_else(|| err("unterminated section header".into()))?
                .trim();
            match name {
                "sim" | "check" | "sweep" | "local" => section = name.to_string(),
                other => return Err(err(format!("unknown section [{other}]"))),
            }
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected key = value".into()))?;
        let (key, value) = (key.trim(), value.trim());

        match (section.as_str(), key) {
            ("", "velocity") => cfg.velocity = Some(parse_velocity(value).map_err(err)?),
            ("", "kernel") => cfg.kernel = Some(parse_kernel(value).map_err(err)?),
            ("", "profile") => cfg.profile = Some(parse_profile(value).map_err(err)?),
            ("sim", "final_time") => cfg.final_time = Some(parse_number(value).map_err(err)?),
            ("sim", "theta") => cfg.theta = Some(parse_number(value).map_err(err)?),
            ("sim", "width_change") => cfg.width_change = Some(parse_number(value).map_err(err)?),
            ("sim", "refine") => cfg.refine = Some(parse_number(value).map_err(err)?),
            ("sim", "snapshots") => cfg.snapshots = Some(parse_list(value).map_err(err)?),
            ("check", "slack") => cfg.slack = Some(parse_number(value).map_err(err)?),
            ("check", "window") => cfg.check_window = Some(parse_window(value).map_err(err)?),
            ("sweep", "eps") => cfg.sweep_eps = Some(parse_list(value).map_err(err)?),
            ("sweep", "times") => cfg.sweep_times = Some(parse_list(value).map_err(err)?),
            ("sweep", "window") => cfg.sweep_window = Some(parse_window(value).map_err(err)?),
            ("local", "dx") => cfg.local_dx = Some(parse_number(value).map_err(err)?),
            ("local", "cfl") => cfg.local_cfl = Some(parse_number(value).map_err(err)?),
            ("local", "window") => cfg.local_window = Some(parse_window(value).map_err(err)?),
            (sec, key) => {
                let place = if sec.is_empty() { "top level".to_string() } else { format!("[{sec}]") };
                return Err(err(format!("unknown key '{key}' at {place}")));
            }
        }
    }
    Ok(cfg)
}

fn parse_number(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("'{s}' is not a number"))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|p| parse_number(p.trim())).collect()
}

/// `lo:hi`
pub fn parse_window(s: &str) -> Result<Window, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("'{s}' is not a lo:hi window"))?;
    Window::new(parse_number(lo.trim())?, parse_number(hi.trim())?).map_err(|e| e.to_string())
}

/// Splits `name(inner)` or bare `name`.
fn split_call(s: &str) -> Result<(&str, &str), String> {
    match s.find('(') {
        None => Ok((s.trim(), "")),
        Some(p) => {
            let inner = s[p + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("missing ')' in '{s}'"))?;
            Ok((s[..p].trim(), inner.trim()))
        }
    }
}

fn parse_kv_args(inner: &str) -> Result<Vec<(String, String)>, String> {
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("expected key=value in '{pair}'"))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

struct Args(Vec<(String, String)>);

impl Args {
    fn get(&self, key: &str) -> Result<f64, String> {
        let raw = self
            .0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| format!("missing argument '{key}'"))?;
        parse_number(raw)
    }

    fn get_or(&self, key: &str, default: f64) -> Result<f64, String> {
        match self.0.iter().find(|(k, _)| k == key) {
            Some((_, v)) => parse_number(v),
            None => Ok(default),
        }
    }

    fn get_bool_or(&self, key: &str, default: bool) -> Result<bool, String> {
        match self.0.iter().find(|(k, _)| k == key) {
            Some((_, v)) => v.parse::<bool>().map_err(|_| format!("'{v}' is not a bool")),
            None => Ok(default),
        }
    }

    fn check_known(&self, known: &[&str]) -> Result<(), String> {
        for (k, _) in &self.0 {
            if !known.contains(&k.as_str()) {
                return Err(format!("unknown argument '{k}'"));
            }
        }
        Ok(())
    }
}

pub fn parse_velocity(s: &str) -> Result<VelocityModel, String> {
    let (name, inner) = split_call(s)?;
    let args = Args(parse_kv_args(inner)?);
    let model = match name {
        "greenshields" => {
            args.check_known(&["vmax", "rhomax"])?;
            VelocityModel::greenshields(args.get_or("vmax", 1.0)?, args.get_or("rhomax", 1.0)?)
        }
        "underwood" => {
            args.check_known(&["v0", "rhomax"])?;
            VelocityModel::underwood(args.get_or("v0", 1.0)?, args.get_or("rhomax", 1.0)?)
        }
        "gen_greenshields" => {
            args.check_known(&["v0", "rhomax", "n"])?;
            let n = args.get("n")?;
            if n.fract() != 0.0 || n < 1.0 {
                return Err(format!("n = {n} must be a positive integer"));
            }
            VelocityModel::gen_greenshields(args.get_or("v0", 1.0)?, args.get_or("rhomax", 1.0)?, n as u32)
        }
        "gen_california" => {
            args.check_known(&["v0", "rhomax", "alpha", "regularized"])?;
            VelocityModel::gen_california(
                args.get_or("v0", 1.0)?,
                args.get_or("rhomax", 1.0)?,
                args.get("alpha")?,
                args.get_bool_or("regularized", false)?,
            )
        }
        "greenberg" => {
            args.check_known(&["v0", "rhomax"])?;
            VelocityModel::greenberg(args.get_or("v0", 1.0)?, args.get_or("rhomax", 1.0)?)
        }
        other => return Err(format!("unknown velocity model '{other}'")),
    };
    model.map_err(|e| e.to_string())
}

pub fn parse_kernel(s: &str) -> Result<KernelSpec, String> {
    let (name, inner) = split_call(s)?;
    let args = Args(parse_kv_args(inner)?);
    args.check_known(&["eps"])?;
    let eps = args.get("eps")?;
    match name {
        "exp" => KernelSpec::exponential(eps).map_err(|e| e.to_string()),
        "box" => KernelSpec::box_kernel(eps).map_err(|e| e.to_string()),
        other => Err(format!("unknown kernel '{other}'")),
    }
}

pub fn parse_profile(s: &str) -> Result<PiecewiseConstantProfile, String> {
    let (name, inner) = split_call(s)?;
    match name {
        "fig1" => {
            if !inner.is_empty() {
                return Err("fig1 takes no arguments".into());
            }
            Ok(PiecewiseConstantProfile::fig1())
        }
        "fig2" => {
            let args = Args(parse_kv_args(inner)?);
            args.check_known(&["cells"])?;
            let cells = args.get_or("cells", 1000.0)?;
            PiecewiseConstantProfile::fig2(cells as usize).map_err(|e| e.to_string())
        }
        "fig3" => {
            let args = Args(parse_kv_args(inner)?);
            args.check_known(&["nmax"])?;
            let nmax = args.get_or("nmax", 50.0)?;
            PiecewiseConstantProfile::fig3(nmax as usize).map_err(|e| e.to_string())
        }
        "steps" => parse_steps(inner),
        other => Err(format!("unknown profile '{other}'")),
    }
}

/// `steps(x0, v0, x1, v1, ..., xN ; left=L, right=R)`
fn parse_steps(inner: &str) -> Result<PiecewiseConstantProfile, String> {
    let (body, tails) = inner
        .split_once(';')
        .ok_or_else(|| "steps needs '; left=L, right=R'".to_string())?;
    let numbers: Vec<f64> = body
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_number(p.trim()))
        .collect::<Result<_, _>>()?;
    if numbers.len() % 2 != 1 {
        return Err("steps needs alternating positions and values, ending with a position".into());
    }
    let mut breakpoints = Vec::with_capacity(numbers.len() / 2 + 1);
    let mut values = Vec::with_capacity(numbers.len() / 2);
    for (i, &x) in numbers.iter().enumerate() {
        if i % 2 == 0 {
            breakpoints.push(x);
        } else {
            values.push(x);
        }
    }
    let tails = Args(parse_kv_args(tails.trim())?);
    tails.check_known(&["left", "right"])?;
    let left = tails.get("left")?;
    let right = tails.get("right")?;
    PiecewiseConstantProfile::new(breakpoints, values, left, right).map_err(|e| e.to_string())
}
