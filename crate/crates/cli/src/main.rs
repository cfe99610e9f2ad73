use ppct_cli::{check, config, convergence, output};
use ppct_core::splitting::run;
use std::path::Path;
use std::process::ExitCode;

const USAGE: &str = "\
usage: ppct <command> [options]

commands:
  run --config FILE            advance a problem and write snapshots,
                               diagnostics, and a reproducible manifest
  convergence --problem vortex [--mu MU] [--q Q] [--cfl C] [--t-end T]
              --grids N1,N2,...
                               grid-refinement error/order table
  check                        run the fast invariant suite (exit 1 on any
                               failure)

configuration keys for `run` (key = value, '#' comments):
  problem nx ny t_end gamma q cfl eps_tol max_ct_iter safety
  snapshots out_dir mu b0 mach
problems: vortex orszag-tang rotor blast shock-cloud sedov jet
";

enum CliError {
    /// Bad command line or configuration: exit code 2.
    Usage(String),
    /// Failure while running: exit code 1.
    Runtime(String),
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!();
            eprint!("{USAGE}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(args: &[String]) -> Result<(), CliError> {
    match args.first().map(String::as_str) {
        Some("run") => cmd_run(&args[1..]),
        Some("convergence") => cmd_convergence(&args[1..]),
        Some("check") => cmd_check(&args[1..]),
        Some(other) => Err(CliError::Usage(format!("unknown command '{other}'"))),
        None => Err(CliError::Usage("no command given".to_string())),
    }
}

/// Flag parser for `--key value` pairs.
fn parse_flags<'a>(
    args: &'a [String],
    known: &[&str],
) -> Result<Vec<(&'a str, &'a str)>, CliError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let flag = args[i]
            .strip_prefix("--")
            .ok_or_else(|| CliError::Usage(format!("expected a --flag, got '{}'", args[i])))?;
        if !known.contains(&flag) {
            return Err(CliError::Usage(format!("unknown flag '--{flag}'")));
        }
        let value = args
            .get(i + 1)
            .ok_or_else(|| CliError::Usage(format!("flag '--{flag}' needs a value")))?;
        if out.iter().any(|(f, _)| *f == flag) {
            return Err(CliError::Usage(format!("duplicate flag '--{flag}'")));
        }
        out.push((flag, value.as_str()));
        i += 2;
    }
    Ok(out)
}

fn get<'a>(flags: &[(&str, &'a str)], name: &str) -> Option<&'a str> {
    flags.iter().find(|(f, _)| *f == name).map(|(_, v)| *v)
}

fn cmd_run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, &["config"])?;
    let path = get(&flags, "config")
        .ok_or_else(|| CliError::Usage("run needs --config FILE".to_string()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read config '{path}': {e}")))?;
    let setup = config::parse_config(&text).map_err(CliError::Usage)?;

    std::fs::create_dir_all(&setup.out_dir).map_err(|e| {
        CliError::Runtime(format!("cannot create '{}': {e}", setup.out_dir.display()))
    })?;
    write_text(
        &setup.out_dir.join("manifest.cfg"),
        &config::manifest(&setup),
    )?;

    let out = run(&setup.problem, &setup.config, setup.resolution)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    for (i, (t, field)) in out.snapshots.iter().enumerate() {
        let path = setup.out_dir.join(format!("snapshot_{i:03}.dat"));
        output::write_snapshot(field, *t, setup.config.gas, &path).map_err(CliError::Runtime)?;
    }
    output::write_diagnostics(&out.records, &setup.out_dir.join("diagnostics.dat"))
        .map_err(CliError::Runtime)?;

    let final_t = out.records.last().map_or(0.0, |r| r.t);
    println!(
        "{}: {} steps to t = {final_t}, {} snapshots -> {}",
        setup.problem.name,
        out.records.len(),
        out.snapshots.len(),
        setup.out_dir.display()
    );
    Ok(())
}

fn cmd_convergence(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, &["problem", "mu", "q", "cfl", "t-end", "grids"])?;
    let problem = get(&flags, "problem").unwrap_or("vortex");
    if problem != "vortex" {
        return Err(CliError::Usage(format!(
            "convergence needs an exact solution; only 'vortex' has one, got '{problem}'"
        )));
    }
    let parse = |name: &str, v: &str| -> Result<f64, CliError> {
        v.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("flag '--{name}': bad number '{v}'")))
    };
    let mut setup = convergence::StudySetup::new(1.0, 3.0);
    if let Some(v) = get(&flags, "mu") {
        setup.mu = parse("mu", v)?;
    }
    if let Some(v) = get(&flags, "q") {
        setup.q = parse("q", v)?;
    }
    if let Some(v) = get(&flags, "cfl") {
        setup.cfl = Some(parse("cfl", v)?);
    }
    if let Some(v) = get(&flags, "t-end") {
        setup.t_end = parse("t-end", v)?;
    }
    let grids: Vec<usize> = get(&flags, "grids")
        .ok_or_else(|| CliError::Usage("convergence needs --grids N1,N2,...".to_string()))?
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("flag '--grids': bad entry '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    if grids.len() < 2 {
        return Err(CliError::Usage(
            "convergence needs at least two grids".to_string(),
        ));
    }

    let rows = convergence::vortex_convergence(&setup, &grids).map_err(CliError::Runtime)?;
    print!("{}", convergence::render_table(&setup, &rows));
    Ok(())
}

fn cmd_check(args: &[String]) -> Result<(), CliError> {
    if !args.is_empty() {
        return Err(CliError::Usage("check takes no arguments".to_string()));
    }
    let mut failures = 0;
    for (name, f) in check::CHECKS {
        match f() {
            Ok(()) => println!("PASS {name}"),
            Err(msg) => {
                failures += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failures > 0 {
        Err(CliError::Runtime(format!("{failures} check(s) failed")))
    } else {
        println!("all {} checks passed", check::CHECKS.len());
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write '{}': {e}", path.display())))
}
