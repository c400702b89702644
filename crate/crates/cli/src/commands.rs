use std::fmt::Write as _;
use std::time::Instant;

use choi_sqpt::basis::{chi_choi_to_pauli, chi_pauli_to_choi};
use choi_sqpt::measure::Observable;
use choi_sqpt::tomo::{full_sqpt, plan_element, reconstruct_element, ChiBasis, MeasurementPlan, Strategy};
use choi_sqpt::{BackendConfig, ChiMatrix, QuantumChannel, PHYSICAL_TOL};
use serde::Serialize;

use crate::args::*;
use crate::report::{complex, emit, ChannelDescriptor, CliError, RunReport, SettingCounts};

const TOOL: &str = "choi-sqpt";
const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn run(cli: &Cli, argv: Vec<String>) -> Result<(), CliError> {
    let start = Instant::now();
    match &cli.command {
        Command::Element(a) => element(a, argv, start),
        Command::Full(a) => full(a, argv, start),
        Command::Validate(a) => validate(a, argv, start),
        Command::Plan(a) => plan(a, argv, start),
        Command::Convert(a) => convert(a, argv, start),
        Command::Export(a) => export(a),
    }
}

fn load_channel(args: &ChannelArgs) -> Result<(QuantumChannel, ChannelDescriptor), CliError> {
    match (&args.channel, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
            let ch = QuantumChannel::from_json(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            let desc = ChannelDescriptor::File {
                path: path.display().to_string(),
                dim: ch.dim(),
                kraus_count: ch.kraus().len(),
            };
            Ok((ch, desc))
        }
        (None, Some(name)) => {
            let ch = QuantumChannel::preset(name, &args.params, args.dim)?;
            let desc = ChannelDescriptor::Preset {
                name: name.clone(),
                params: args.params.clone(),
                dim: args.dim,
            };
            Ok((ch, desc))
        }
        _ => Err(CliError::bad_args("give exactly one of --channel or --preset")),
    }
}

fn backend(args: &BackendArgs) -> Result<BackendConfig, CliError> {
    match args.backend {
        BackendArg::Exact => Ok(BackendConfig::exact()),
        BackendArg::Sampled => Ok(BackendConfig::sampled(args.shots, args.seed)?),
    }
}

/// Parses `e,f,g,h` (or λ indices with `--lambda`) into χ indices.
fn parse_target(args: &TargetArgs, dim: usize) -> Result<[usize; 4], CliError> {
    let parts: Vec<usize> = args
        .target
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::bad_args(format!("target `{}` is not four comma-separated indices", args.target)))?;
    let [x0, x1, x2, x3]: [usize; 4] = parts
        .try_into()
        .map_err(|_| CliError::bad_args(format!("target `{}` needs exactly four indices", args.target)))?;
    if let Some(&bad) = [x0, x1, x2, x3].iter().find(|&&i| i >= dim) {
        return Err(CliError::bad_args(format!("index {bad} out of range for dimension {dim}")));
    }
    Ok(if args.lambda {
        // λ_{ab;cd} = χ_{ca;db}
        [x2, x0, x3, x1]
    } else {
        [x0, x1, x2, x3]
    })
}

fn chi_value(chi: &ChiMatrix) -> serde_json::Value {
    serde_json::from_str(&chi.to_json()).expect("χ json is valid")
}

#[derive(Serialize)]
struct ElementResults {
    target: [usize; 4],
    lambda_target: [usize; 4],
    value: [f64; 2],
    std_error: f64,
}

fn element(a: &ElementArgs, argv: Vec<String>, start: Instant) -> Result<(), CliError> {
    let (ch, desc) = load_channel(&a.channel)?;
    let cfg = backend(&a.backend)?;
    let [e, f, g, h] = parse_target(&a.target, ch.dim())?;
    let plan = plan_element(e, f, g, h, ch.dim())?;
    let est = reconstruct_element(&plan, &ch, &cfg)?;
    let results = ElementResults {
        target: plan.target(),
        lambda_target: plan.lambda_target(),
        value: complex(est.value),
        std_error: est.std_error,
    };
    let pretty = a.output.pretty.then(|| {
        format!(
            "χ[{e}{f};{g}{h}] = {:+.12} {:+.12}i  ± {:.3e}\nsettings: {}\nbackend: {:?}\n",
            est.value.re, est.value.im, est.std_error, est.settings_used, cfg.mode
        )
    });
    let report = RunReport {
        tool: TOOL,
        version: VERSION,
        command: "element",
        args: argv,
        channel: Some(desc),
        backend: Some(cfg),
        results,
        settings: SettingCounts {
            plan: Some(est.settings_used),
            ..Default::default()
        },
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit(&report, a.output.output.as_deref(), pretty)
}

#[derive(Serialize)]
struct FullResults {
    strategy: Strategy,
    tp_shortcut: bool,
    chi: serde_json::Value,
    /// Row-major, same layout as `chi.entries`.
    std_errors: Vec<f64>,
    oracle_max_abs_error: f64,
}

fn full(a: &FullArgs, argv: Vec<String>, start: Instant) -> Result<(), CliError> {
    let (ch, desc) = load_channel(&a.channel)?;
    let cfg = backend(&a.backend)?;
    let dim = ch.dim();
    let strategy = match a.strategy {
        StrategyArg::ChoiFour => Strategy::ChoiFour,
        StrategyArg::ProductHermitian => {
            let local_dim = a.local_dim.unwrap_or(dim);
            let sites = (1..=usize::BITS as usize)
                .find(|&n| local_dim.checked_pow(n as u32) == Some(dim))
                .ok_or_else(|| CliError::bad_args(format!("dimension {dim} is not a power of local dimension {local_dim}")))?;
            Strategy::ProductHermitian { local_dim, sites }
        }
    };
    let result = full_sqpt(&ch, &cfg, strategy, a.tp_shortcut)?;
    let oracle_max_abs_error = result.chi.max_abs_diff(&ch.chi_oracle());
    let n = dim * dim;
    let std_errors = (0..n).flat_map(|r| (0..n).map(move |k| (r, k))).map(|rk| result.std_errors[rk]).collect();
    let pretty = a.output.pretty.then(|| {
        let mut s = String::new();
        let _ = writeln!(s, "χ ({n}x{n}, rows e·D+f):");
        for r in 0..n {
            for k in 0..n {
                let z = result.chi.matrix()[(r, k)];
                let _ = write!(s, " {:+.6}{:+.6}i", z.re, z.im);
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "settings: {} distinct, {} measured, {} inferred\nmax |χ − oracle|: {:.3e}",
            result.distinct_settings, result.measured_settings, result.inferred_settings, oracle_max_abs_error
        );
        s
    });
    let report = RunReport {
        tool: TOOL,
        version: VERSION,
        command: "full",
        args: argv,
        channel: Some(desc),
        backend: Some(cfg),
        results: FullResults {
            strategy,
            tp_shortcut: a.tp_shortcut,
            chi: chi_value(&result.chi),
            std_errors,
            oracle_max_abs_error,
        },
        settings: SettingCounts {
            distinct: Some(result.distinct_settings),
            measured: Some(result.measured_settings),
            inferred: Some(result.inferred_settings),
            ..Default::default()
        },
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit(&report, a.output.output.as_deref(), pretty)
}

fn validate(a: &ValidateArgs, argv: Vec<String>, start: Instant) -> Result<(), CliError> {
    let (ch, desc) = load_channel(&a.channel)?;
    let report_data = ch.validate_cptp(a.tol)?;
    let passed = report_data.passed();
    let pretty = a.output.pretty.then(|| {
        format!(
            "trace preserving: {} (deviation {:.3e})\ncompletely positive: {} (min χ eigenvalue {:.3e})\nTr χ = {:.12} (D = {})\n",
            report_data.trace_preserving,
            report_data.tp_deviation,
            report_data.completely_positive,
            report_data.min_chi_eigenvalue,
            report_data.chi_trace,
            report_data.dim
        )
    });
    let report = RunReport {
        tool: TOOL,
        version: VERSION,
        command: "validate",
        args: argv,
        channel: Some(desc),
        backend: None,
        results: &report_data,
        settings: SettingCounts::default(),
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit(&report, a.output.output.as_deref(), pretty)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::physicality(format!(
            "validation failed: TP deviation {:.3e}, min χ eigenvalue {:.3e}, Tr χ {:.6}",
            report_data.tp_deviation, report_data.min_chi_eigenvalue, report_data.chi_trace
        )))
    }
}

#[derive(Serialize)]
struct PlannedSetting {
    input: Vec<[f64; 2]>,
    projector: Vec<[f64; 2]>,
    weight: [f64; 2],
}

#[derive(Serialize)]
struct PlanResults {
    dim: usize,
    target: [usize; 4],
    lambda_target: [usize; 4],
    settings: Vec<PlannedSetting>,
}

fn plan_results(plan: &MeasurementPlan) -> PlanResults {
    let settings = plan
        .settings()
        .iter()
        .zip(plan.setting_weights())
        .map(|(s, w)| PlannedSetting {
            input: s.input().iter().copied().map(complex).collect(),
            projector: match s.observable() {
                Observable::Projector(phi) => phi.iter().copied().map(complex).collect(),
                Observable::Hermitian(_) => unreachable!("element plans use projectors"),
            },
            weight: complex(w),
        })
        .collect();
    PlanResults {
        dim: plan.dim(),
        target: plan.target(),
        lambda_target: plan.lambda_target(),
        settings,
    }
}

fn plan(a: &PlanArgs, argv: Vec<String>, start: Instant) -> Result<(), CliError> {
    if a.dim < 2 {
        return Err(CliError::bad_args("dimension must be at least 2"));
    }
    let [e, f, g, h] = parse_target(&a.target, a.dim)?;
    let plan = plan_element(e, f, g, h, a.dim)?;
    let results = plan_results(&plan);
    let pretty = a.output.pretty.then(|| {
        let mut s = format!("χ[{e}{f};{g}{h}] = λ[{f}{h};{e}{g}]: {} settings\n", plan.settings_count());
        for (i, set) in results.settings.iter().enumerate() {
            let fmt = |v: &[[f64; 2]]| {
                v.iter().map(|[re, im]| format!("{re:+.4}{im:+.4}i")).collect::<Vec<_>>().join(" ")
            };
            let _ = writeln!(
                s,
                "{:>2}: in [{}]  proj [{}]  w {:+.4}{:+.4}i",
                i + 1,
                fmt(&set.input),
                fmt(&set.projector),
                set.weight[0],
                set.weight[1]
            );
        }
        s
    });
    let report = RunReport {
        tool: TOOL,
        version: VERSION,
        command: "plan",
        args: argv,
        channel: None,
        backend: None,
        results,
        settings: SettingCounts {
            plan: Some(plan.settings_count()),
            ..Default::default()
        },
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit(&report, a.output.output.as_deref(), pretty)
}

#[derive(Serialize)]
struct ConvertResults {
    from: &'static str,
    to: &'static str,
    n_qubits: usize,
    chi: serde_json::Value,
    round_trip_error: f64,
}

fn convert(a: &ConvertArgs, argv: Vec<String>, start: Instant) -> Result<(), CliError> {
    let (chi, desc) = match &a.chi {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
            let chi = ChiMatrix::from_json(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            (chi, None)
        }
        None => {
            let (ch, desc) = load_channel(&a.channel)?;
            (ch.chi_oracle(), Some(desc))
        }
    };
    let dim = chi.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(CliError::bad_args(format!("conversion needs a qubit system, got dimension {dim}")));
    }
    let n_qubits = dim.trailing_zeros() as usize;
    let (converted, back) = match (chi.basis(), a.to) {
        (ChiBasis::Choi, BasisArg::Pauli) => {
            let p = chi_choi_to_pauli(&chi, n_qubits)?;
            let back = chi_pauli_to_choi(&p, n_qubits)?;
            (p, back)
        }
        (ChiBasis::Pauli, BasisArg::Choi) => {
            let c = chi_pauli_to_choi(&chi, n_qubits)?;
            let back = chi_choi_to_pauli(&c, n_qubits)?;
            (c, back)
        }
        (from, _) => {
            return Err(CliError::bad_args(format!("χ is already in the {} basis", from.convention())));
        }
    };
    let round_trip_error = back.max_abs_diff(&chi);
    let pretty = a.output.pretty.then(|| {
        let n = dim * dim;
        let mut s = format!("{} → {} ({n_qubits} qubit(s)):\n", chi.basis().convention(), converted.basis().convention());
        for r in 0..n {
            for k in 0..n {
                let z = converted.matrix()[(r, k)];
                let _ = write!(s, " {:+.6}{:+.6}i", z.re, z.im);
            }
            s.push('\n');
        }
        let _ = writeln!(s, "round-trip error: {round_trip_error:.3e}");
        s
    });
    let report = RunReport {
        tool: TOOL,
        version: VERSION,
        command: "convert",
        args: argv,
        channel: desc,
        backend: None,
        results: ConvertResults {
            from: chi.basis().convention(),
            to: converted.basis().convention(),
            n_qubits,
            chi: chi_value(&converted),
            round_trip_error,
        },
        settings: SettingCounts::default(),
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit(&report, a.output.output.as_deref(), pretty)
}

fn export(a: &ExportArgs) -> Result<(), CliError> {
    let (ch, _) = load_channel(&a.channel)?;
    if !ch.is_trace_preserving(PHYSICAL_TOL) {
        eprintln!("warning: channel is not trace preserving");
    }
    let json = ch.to_json();
    match &a.output {
        Some(path) => std::fs::write(path, format!("{json}\n"))
            .map_err(|e| CliError::bad_args(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}
