//! `key = value` configuration files ('#' starts a comment). Unknown keys
//! are errors; omitted keys take the documented defaults (gamma from the
//! problem definition, q = 3, cfl = 2/q, eps_tol = 1e-10, max_ct_iter = 100,
//! safety = 1, t_end from the problem definition).

use ppct_core::problems::{self, ProblemParams, ProblemSpec};
use ppct_core::splitting::RunConfig;
use ppct_core::state::GasModel;
use std::path::PathBuf;

/// A fully resolved run: problem, scheme parameters, grid, output plan.
#[derive(Debug)]
pub struct RunSetup {
    pub problem: ProblemSpec,
    pub config: RunConfig,
    pub resolution: [usize; 3],
    pub out_dir: PathBuf,
    pub params: ProblemParams,
}

pub fn parse_config(text: &str) -> Result<RunSetup, String> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected 'key = value', got '{raw}'", lineno + 1))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(format!("line {}: duplicate key '{key}'", lineno + 1));
        }
        pairs.push((key, value));
    }
    resolve(pairs)
}

fn resolve(mut pairs: Vec<(String, String)>) -> Result<RunSetup, String> {
    let mut take = |key: &str| -> Option<String> {
        let i = pairs.iter().position(|(k, _)| k == key)?;
        Some(pairs.remove(i).1)
    };

    let problem_name = take("problem").ok_or("missing required key 'problem'")?;

    let mut params = ProblemParams::default();
    let mu = take("mu");
    let b0 = take("b0");
    let mach = take("mach");
    match problem_name.as_str() {
        "vortex" => {
            if let Some(v) = &mu {
                params.mu = parse_f64("mu", v)?;
            }
        }
        "jet" => {
            if let Some(v) = &b0 {
                params.b0 = parse_f64("b0", v)?;
            }
            if let Some(v) = &mach {
                params.mach = parse_f64("mach", v)?;
            }
        }
        _ => {}
    }
    for (key, given, allowed) in [
        ("mu", mu.is_some(), problem_name == "vortex"),
        ("b0", b0.is_some(), problem_name == "jet"),
        ("mach", mach.is_some(), problem_name == "jet"),
    ] {
        if given && !allowed {
            return Err(format!(
                "key '{key}' does not apply to problem '{problem_name}'"
            ));
        }
    }

    let problem = problems::by_name(&problem_name, &params).map_err(|e| e.to_string())?;

    let nx = parse_usize("nx", &take("nx").ok_or("missing required key 'nx'")?)?;
    let ny = parse_usize("ny", &take("ny").ok_or("missing required key 'ny'")?)?;
    if let Some(v) = take("nz") {
        if problem.dim == 2 {
            return Err(format!(
                "key 'nz' (= {v}) does not apply: problem '{problem_name}' is 2-dimensional"
            ));
        }
    }

    let gas = match take("gamma") {
        Some(v) => GasModel::new(parse_f64("gamma", &v)?).map_err(|e| e.to_string())?,
        None => problem.gas,
    };
    let q = match take("q") {
        Some(v) => parse_f64("q", &v)?,
        None => 3.0,
    };
    let mut config = RunConfig::new(gas, q);
    if let Some(v) = take("cfl") {
        config.cfl = parse_f64("cfl", &v)?;
    }
    if let Some(v) = take("eps_tol") {
        config.eps_tol = parse_f64("eps_tol", &v)?;
    }
    if let Some(v) = take("max_ct_iter") {
        config.max_ct_iter = parse_usize("max_ct_iter", &v)?;
    }
    if let Some(v) = take("safety") {
        config.safety = parse_f64("safety", &v)?;
    }
    config.t_end = match take("t_end") {
        Some(v) => parse_f64("t_end", &v)?,
        None => problem.default_t_end,
    };
    if let Some(v) = take("snapshots") {
        config.snapshot_times = v
            .split(',')
            .map(|s| parse_f64("snapshots", s.trim()))
            .collect::<Result<_, _>>()?;
    }
    let out_dir = PathBuf::from(take("out_dir").unwrap_or_else(|| "out".to_string()));

    if let Some((key, _)) = pairs.first() {
        return Err(format!("unknown key '{key}'"));
    }
    config.validate().map_err(|e| e.to_string())?;

    Ok(RunSetup {
        problem,
        config,
        resolution: [nx, ny, 1],
        out_dir,
        params,
    })
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("key '{key}': cannot parse '{value}' as a number"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, String> {
    value
        .parse::<usize>()
        .map_err(|_| format!("key '{key}': cannot parse '{value}' as a positive integer"))
}

/// Resolved-config echo; parsing it back reproduces the run bit-for-bit.
pub fn manifest(setup: &RunSetup) -> String {
    let mut out = String::new();
    let mut push = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    push("problem", setup.problem.name.to_string());
    push("nx", setup.resolution[0].to_string());
    push("ny", setup.resolution[1].to_string());
    push("gamma", format!("{:?}", setup.config.gas.gamma));
    push("q", format!("{:?}", setup.config.q));
    push("cfl", format!("{:?}", setup.config.cfl));
    push("eps_tol", format!("{:?}", setup.config.eps_tol));
    push("max_ct_iter", setup.config.max_ct_iter.to_string());
    push("safety", format!("{:?}", setup.config.safety));
    push("t_end", format!("{:?}", setup.config.t_end));
    if !setup.config.snapshot_times.is_empty() {
        push(
            "snapshots",
            setup
                .config
                .snapshot_times
                .iter()
                .map(|t| format!("{t:?}"))
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    push("out_dir", setup.out_dir.display().to_string());
    match setup.problem.name {
        "vortex" => push("mu", format!("{:?}", setup.params.mu)),
        "jet" => {
            push("b0", format!("{:?}", setup.params.b0));
            push("mach", format!("{:?}", setup.params.mach));
        }
        _ => {}
    }
    out
}
