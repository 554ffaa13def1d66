use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use chanorder::document::{to_rows, AnyChannel, Document};
use chanorder::infomeasures::{conditional_entropy, hmin_general, pguess_classical, pguess_cq, qcorr, SDP_TOL};
use chanorder::ordering::{
    check_ambiguity_sampled, check_coherence_sampled, check_noisiness_sampled, classical_degradable, km_search,
    quantum_degradable, DegradabilityStatus, DegradabilityVerdict, DegradingMap, KmConfig, ViolationReport, Witness,
    VIOLATION_TOL, WITNESS_MARGIN,
};
use chanorder::pairs::{random_pair as generate_pair, PairKind, PairSpec};
use chanorder::selftest::{Hooks, Profile, Selftest};
use chanorder::QuantumChannel;

use crate::report::{InputRecord, Outcome, Report, Tolerances};
use crate::{
    Cli, CliError, Command, Kind, Measure, Ordering, RandomPairArgs, EXIT_DEGRADABLE, EXIT_INCONCLUSIVE,
    EXIT_NOT_DEGRADABLE,
};

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::CheckDegradable { first, second, tol } => check_degradable(cli, first, second, *tol),
        Command::Measure { measure } => measure_cmd(cli, measure),
        Command::Sample { ordering, first, second, trials, seed } => {
            sample(cli, *ordering, first, second, *trials, *seed)
        }
        Command::RandomPair(args) => random_pair(cli, args),
        &Command::KmSearch { nx, ny, nz, pairs, trials, degradable_only, tol, seed } => {
            let config = KmConfig { nx, ny, nz, pairs, noisiness_trials: trials, degradable_only, tol, seed };
            km(cli, config)
        }
        &Command::Selftest { full, corrupt_solver_tol, .. } => selftest(cli, full, corrupt_solver_tol),
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn say(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(cli: &Cli, report: &Report, text: &str) -> Result<(), CliError> {
    let json = report.to_json();
    if let Some(out) = &cli.out {
        std::fs::write(out, format!("{json}\n"))?;
    }
    if cli.json {
        say(&format!("{json}\n"))?;
    } else {
        for notice in &report.notices {
            eprintln!("notice: {notice}");
        }
        say(text)?;
    }
    Ok(())
}

fn elapsed_ms(start: Instant) -> Option<f64> {
    Some(start.elapsed().as_secs_f64() * 1e3)
}

/// Classical channels compared against quantum ones are embedded.
fn align(a: &InputRecord, b: &InputRecord) -> Result<(AnyChannel, AnyChannel, Vec<String>), CliError> {
    let (ca, cb) = (a.channel()?, b.channel()?);
    let mut notices = Vec::new();
    let mixed = matches!(
        (&ca, &cb),
        (AnyChannel::Classical(_), AnyChannel::Quantum(_)) | (AnyChannel::Quantum(_), AnyChannel::Classical(_))
    );
    if !mixed {
        return Ok((ca, cb, notices));
    }
    let mut embed = |c: AnyChannel, rec: &InputRecord| match c {
        AnyChannel::Classical(_) => {
            notices.push(format!("classical channel {} embedded as a quantum channel", rec.name()));
            AnyChannel::Quantum(c.to_quantum())
        }
        q => q,
    };
    let (ca, cb) = (embed(ca, a), embed(cb, b));
    Ok((ca, cb, notices))
}

fn quantum_of(c: AnyChannel, rec: &InputRecord, notices: &mut Vec<String>) -> QuantumChannel {
    if let AnyChannel::Classical(_) = c {
        notices.push(format!("classical channel {} embedded as a quantum channel", rec.name()));
    }
    c.to_quantum()
}

fn write_rows(text: &mut String, rows: &[Vec<f64>]) {
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.9}")).collect();
        let _ = writeln!(text, "  {}", cells.join(" "));
    }
}

fn verdict_text(v: &DegradabilityVerdict) -> String {
    let mut t = String::new();
    let status = serde_json::to_value(v.status).expect("status serializes");
    let _ = writeln!(t, "status: {}", status.as_str().unwrap_or_default());
    if let Some(r) = v.residual {
        let _ = writeln!(t, "residual: {r:.3e}");
    }
    match &v.degrading_map {
        Some(DegradingMap::Classical { channel }) => {
            let _ = writeln!(t, "degrading map (row z, column y: φ(z|y)):");
            write_rows(&mut t, channel.matrix());
        }
        Some(DegradingMap::Quantum { channel }) => {
            let _ = writeln!(
                t,
                "degrading map: quantum channel {}→{} (Choi operator in the JSON report)",
                channel.d_in(),
                channel.d_out()
            );
        }
        None => {}
    }
    match &v.witness {
        Some(Witness::Classical(w)) => {
            let _ = writeln!(t, "witness: classical encoding, prior {:?}", w.prior);
            let _ = writeln!(t, "  encoding (row x, column u: e(x|u)):");
            write_rows(&mut t, w.encoding.matrix());
            let _ = writeln!(t, "  pguess through first:  {:.12}", w.pguess_first);
            let _ = writeln!(t, "  pguess through second: {:.12}", w.pguess_second);
            let _ = writeln!(t, "  gap: {:.3e}", w.gap());
        }
        Some(Witness::Quantum(w)) => {
            let _ = writeln!(t, "witness: measure-and-prepare encoder with {} outcomes", w.encoder.povm().len());
            let _ = writeln!(t, "  H_min(R|first):  {:.12}", w.hmin_first);
            let _ = writeln!(t, "  H_min(R|second): {:.12}", w.hmin_second);
            let _ = writeln!(t, "  gap: {:.3e}", w.gap());
        }
        None => {}
    }
    if let Some(note) = &v.note {
        let _ = writeln!(t, "note: {note}");
    }
    t
}

fn check_degradable(cli: &Cli, first: &Path, second: &Path, tol: f64) -> Result<u8, CliError> {
    let start = Instant::now();
    let inputs = vec![InputRecord::load(first)?, InputRecord::load(second)?];
    let (a, b, notices) = align(&inputs[0], &inputs[1])?;
    let verdict = match (&a, &b) {
        (AnyChannel::Classical(a), AnyChannel::Classical(b)) => classical_degradable(a, b, tol)?,
        (a, b) => quantum_degradable(&a.to_quantum(), &b.to_quantum(), tol)?,
    };
    let code = match verdict.status {
        DegradabilityStatus::Degradable => EXIT_DEGRADABLE,
        DegradabilityStatus::NotDegradable => EXIT_NOT_DEGRADABLE,
        DegradabilityStatus::Inconclusive => EXIT_INCONCLUSIVE,
    };
    let text = verdict_text(&verdict);
    let report = Report {
        command: "check-degradable".into(),
        inputs,
        notices,
        outcome: Outcome::Verdict(verdict),
        seed: None,
        tolerances: Tolerances {
            feasibility: Some(tol),
            witness_margin: Some(WITNESS_MARGIN),
            violation: None,
            sdp: None,
        },
        wall_time_ms: elapsed_ms(start),
    };
    emit(cli, &report, &text)?;
    Ok(code)
}

fn input_err(rec: &InputRecord, e: chanorder::Error) -> CliError {
    CliError::Input(format!("{}: {e}", rec.path.display()))
}

fn measure_cmd(cli: &Cli, measure: &Measure) -> Result<u8, CliError> {
    let start = Instant::now();
    let mut notices = Vec::new();
    let mut sdp = Some(SDP_TOL);
    let (quantity, inputs, value, optimizer) = match measure {
        Measure::Pguess { input, channel } => {
            let rec = InputRecord::load(input)?;
            match (&rec.document, channel) {
                (Document::Joint { .. }, None) => {
                    let j = rec.document.to_joint().map_err(|e| input_err(&rec, e))?;
                    sdp = None;
                    ("pguess", vec![rec], pguess_classical(&j), None)
                }
                (Document::Ensemble { .. }, Some(channel)) => {
                    let ensemble = rec.document.to_ensemble().map_err(|e| input_err(&rec, e))?;
                    let crec = InputRecord::load(channel)?;
                    let n = quantum_of(crec.channel()?, &crec, &mut notices);
                    let (value, povm) = pguess_cq(&ensemble, &n)?;
                    ("pguess", vec![rec, crec], value, Some(povm.iter().map(to_rows).collect()))
                }
                (Document::Ensemble { .. }, None) => {
                    return Err(CliError::Input("an ensemble needs a channel argument".into()))
                }
                _ => return Err(CliError::Input("pguess expects a joint, or an ensemble and a channel".into())),
            }
        }
        Measure::Hmin { input } => {
            let rec = InputRecord::load(input)?;
            let (rho, dims) = rec.document.to_state().map_err(|e| input_err(&rec, e))?;
            let value = hmin_general(&rho, dims)?;
            ("hmin", vec![rec], value, None)
        }
        Measure::Qcorr { input } => {
            let rec = InputRecord::load(input)?;
            let (rho, dims) = rec.document.to_state().map_err(|e| input_err(&rec, e))?;
            let (value, decoder) = qcorr(&rho, dims)?;
            ("qcorr", vec![rec], value, Some(vec![to_rows(decoder.choi())]))
        }
        Measure::Centropy { input } => {
            let rec = InputRecord::load(input)?;
            let j = rec.document.to_joint().map_err(|e| input_err(&rec, e))?;
            sdp = None;
            ("centropy", vec![rec], conditional_entropy(&j), None)
        }
    };
    let text = format!("{quantity}: {value:.12}\n");
    let report = Report {
        command: format!("measure {quantity}"),
        inputs,
        notices,
        outcome: Outcome::Measure { quantity: quantity.into(), value, optimizer },
        seed: None,
        tolerances: Tolerances { feasibility: None, witness_margin: None, violation: None, sdp },
        wall_time_ms: elapsed_ms(start),
    };
    emit(cli, &report, &text)?;
    Ok(0)
}

fn violations_text(r: &ViolationReport) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "ordering: {}", r.ordering);
    let _ = writeln!(t, "trials: {}", r.trials);
    let _ = writeln!(t, "violations: {}", r.violations);
    match r.worst_trial {
        Some(trial) => {
            let _ = writeln!(t, "worst margin: {:.6e} (trial {trial})", r.worst_margin);
        }
        None => {
            let _ = writeln!(t, "worst margin: {:.6e}", r.worst_margin);
        }
    }
    let _ = writeln!(t, "failed trials: {}", r.failed);
    let _ = writeln!(t, "seed: {}", r.seed);
    t
}

fn sample(
    cli: &Cli,
    ordering: Ordering,
    first: &Path,
    second: &Path,
    trials: usize,
    seed: u64,
) -> Result<u8, CliError> {
    let inputs = vec![InputRecord::load(first)?, InputRecord::load(second)?];
    let (a, b) = (inputs[0].channel()?, inputs[1].channel()?);
    let mut notices = Vec::new();
    let report = match ordering {
        Ordering::Noisiness => match (&a, &b) {
            (AnyChannel::Classical(a), AnyChannel::Classical(b)) => check_noisiness_sampled(a, b, trials, seed)?,
            _ => return Err(CliError::Input("noisiness sampling needs two classical channels".into())),
        },
        Ordering::Ambiguity | Ordering::Coherence => {
            let qa = quantum_of(a, &inputs[0], &mut notices);
            let qb = quantum_of(b, &inputs[1], &mut notices);
            if matches!(ordering, Ordering::Ambiguity) {
                check_ambiguity_sampled(&qa, &qb, trials, seed)?
            } else {
                check_coherence_sampled(&qa, &qb, trials, seed)?
            }
        }
    };
    let code = if report.violations > 0 {
        1
    } else if report.failed > 0 {
        2
    } else {
        0
    };
    let text = violations_text(&report);
    let report = Report {
        command: format!("sample {}", report.ordering),
        inputs,
        notices,
        outcome: Outcome::Violations(report),
        seed: Some(seed),
        tolerances: Tolerances {
            feasibility: None,
            witness_margin: None,
            violation: Some(VIOLATION_TOL),
            sdp: Some(SDP_TOL),
        },
        wall_time_ms: None,
    };
    emit(cli, &report, &text)?;
    Ok(code)
}

fn random_pair(cli: &Cli, args: &RandomPairArgs) -> Result<u8, CliError> {
    let kind = match args.kind {
        Kind::Classical => PairKind::Classical,
        Kind::Quantum => PairKind::Quantum,
    };
    let spec = PairSpec { kind, d_in: args.d_in, d_out: args.d_out, d_out2: args.d_out2, degradable: args.degradable };
    let (a, b) = generate_pair(spec, args.seed)?;
    let tag = if args.degradable { "degradable" } else { "free" };
    let docs = [
        a.to_document(Some(format!("{tag} pair, seed {}, first", args.seed))),
        b.to_document(Some(format!("{tag} pair, seed {}, second", args.seed))),
    ];
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for (name, doc) in ["first.json", "second.json"].iter().zip(&docs) {
                let path = dir.join(name);
                std::fs::write(&path, format!("{}\n", doc.to_json()))?;
                if !cli.json {
                    say(&format!("{}\n", path.display()))?;
                }
            }
            if cli.json {
                say(&format!("{}\n", serde_json::to_string_pretty(&docs).expect("documents serialize")))?;
            }
        }
        None => say(&format!("{}\n", serde_json::to_string_pretty(&docs).expect("documents serialize")))?,
    }
    Ok(0)
}

fn km(cli: &Cli, config: KmConfig) -> Result<u8, CliError> {
    let candidates = km_search(&config)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{} of {} pairs are certified non-degradable without a sampled noisiness violation (exploratory)",
        candidates.len(),
        config.pairs
    );
    for c in &candidates {
        let _ = writeln!(
            text,
            "  pair {}: witness gap {:.3e}, worst noisiness margin {:.3e}",
            c.pair_index,
            c.witness.margin(),
            c.noisiness.worst_margin
        );
    }
    let report = Report {
        command: "km-search".into(),
        inputs: Vec::new(),
        notices: Vec::new(),
        outcome: Outcome::KmSearch { config, candidates },
        seed: Some(config.seed),
        tolerances: Tolerances {
            feasibility: Some(config.tol),
            witness_margin: Some(WITNESS_MARGIN),
            violation: Some(VIOLATION_TOL),
            sdp: None,
        },
        wall_time_ms: None,
    };
    emit(cli, &report, &text)?;
    Ok(0)
}

fn selftest(cli: &Cli, full: bool, corrupt_solver_tol: bool) -> Result<u8, CliError> {
    let profile = if full { Profile::Full } else { Profile::Quick };
    let outcomes = Selftest::new(profile, Hooks { corrupt_solver_tol }).run_all();
    let json = serde_json::to_string_pretty(&outcomes).expect("outcomes serialize");
    if let Some(out) = &cli.out {
        std::fs::write(out, format!("{json}\n"))?;
    }
    if cli.json {
        say(&format!("{json}\n"))?;
    } else {
        for o in &outcomes {
            let mark = if o.passed { "PASS" } else { "FAIL" };
            say(&format!("[{mark}] {}. {} ({:.2} s): {}\n", o.id, o.name, o.seconds, o.detail))?;
        }
    }
    Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 })
}
