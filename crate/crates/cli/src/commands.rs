use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;
use sha2::{Digest, Sha256};

use qpmc_core::checker::{check_quiescent, check_state, Truth, Verdict};
use qpmc_core::logic::{parse_formula, parse_formula_file, render_formula, required_horizon, Horizon};
use qpmc_core::pcp::{concat, pad, parse_pcp, solve_bounded, word_to_string, PcpInstance};
use qpmc_core::qpds::{orthogonality_diagnostic, parse_system, validate_system, Qpds};
use qpmc_core::rational::{parse_rational, Rational};
use qpmc_core::reduction::{
    decide_pcp, encode_bounded, encode_unbounded, formula_file, run_lemmas, BoundPolicy, DecideOptions,
    DecisionMode, EncodeOptions, PhaseAssignment,
};
use qpmc_core::qpds::render_system;

use crate::report::{approx_text, Probability, RunReport, Status};
use crate::{
    CheckArgs, CheckMode, Cli, Command, Decision, DecideArgs, EncodeArgs, EncodingFlags, LemmasArgs, PcpCommand,
    Phases, Policy, SolveArgs, ValidateArgs,
};

const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;

pub fn dispatch(cli: &Cli) -> Result<RunReport> {
    match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Check(a) => check(a, cli.max_horizon),
        Command::Encode(a) => encode(a),
        Command::Pcp(PcpCommand::Solve(a)) => solve(a),
        Command::Pcp(PcpCommand::Decide(a)) => decide(a),
        Command::Lemmas(a) => lemmas(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

fn load_system(path: &Path) -> Result<(Qpds, String)> {
    let text = read(path)?;
    let sys = parse_system(&text).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    Ok((sys, text))
}

fn load_instance(path: &Path, k: Option<usize>) -> Result<PcpInstance> {
    let text = read(path)?;
    let inst = parse_pcp(&text).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    match k {
        Some(k) => Ok(inst.with_bound(Some(k))?),
        None => Ok(inst),
    }
}

fn require_bound(inst: &PcpInstance, command: &str) -> Result<usize> {
    inst.bound()
        .ok_or_else(|| anyhow!("`{command}` needs a bounded instance: add `k:` to the file or pass --k"))
}

fn validate(a: &ValidateArgs) -> Result<RunReport> {
    let (sys, text) = load_system(&a.system)?;
    let checked = validate_system(&sys, !a.lenient);
    let orthogonality = orthogonality_diagnostic(&sys, ORTHOGONALITY_TOLERANCE);
    let mut r = RunReport::new("validate", if checked.passed() { Status::Pass } else { Status::Fail });
    r.digest = Some(digest(&[&text]));
    if !orthogonality.is_empty() {
        r.warnings.push(format!(
            "{} pairs of one-symbol rows are not orthogonal (diagnostic only)",
            orthogonality.len()
        ));
    }
    r.details = json!({
        "strict": !a.lenient,
        "symbols": sys.stack_alphabet().len(),
        "rules": sys.rules().len(),
        "violations": checked.violations,
        "violation_messages": checked.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "orthogonality": orthogonality,
    });
    Ok(r)
}

fn load_formula(arg: &str) -> Result<(qpmc_core::StateFormula, String)> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = read(path)?;
        let (f, _) = parse_formula_file(&text).map_err(|e| anyhow!("{}:{e}", path.display()))?;
        Ok((f, text))
    } else {
        let f = parse_formula(arg).map_err(|e| anyhow!("formula:{e}"))?;
        Ok((f, arg.to_string()))
    }
}

fn truth_status(t: Truth) -> Status {
    match t {
        Truth::Holds => Status::Holds,
        Truth::Fails => Status::Fails,
        Truth::Unknown => Status::Unknown,
    }
}

fn check(a: &CheckArgs, max_horizon: u64) -> Result<RunReport> {
    let (sys, sys_text) = load_system(&a.system)?;
    let (formula, formula_text) = load_formula(&a.formula)?;
    let config = match &a.config {
        Some(c) => sys.parse_configuration(c)?,
        None => sys.start().clone(),
    };
    let needed = required_horizon(&formula);
    let fixed = |h: u64| check_state(&sys, &config, &formula, h);
    let deepen = |ceiling: u64| check_quiescent(&sys, &config, &formula, ceiling);
    let verdict: Verdict = match (a.mode, a.horizon, needed) {
        (CheckMode::Fixed | CheckMode::Auto, Some(h), _) => fixed(h)?,
        (CheckMode::Fixed | CheckMode::Auto, None, Horizon::Bounded(h)) => fixed(h)?,
        (CheckMode::Fixed, None, Horizon::Unbounded) => {
            bail!("--mode fixed needs --horizon for a formula with unbounded until")
        }
        (CheckMode::Auto | CheckMode::Deepen, h, _) => deepen(h.unwrap_or(max_horizon).min(max_horizon))?,
    };
    let mut r = RunReport::new("check", truth_status(verdict.truth));
    r.digest = Some(digest(&[&sys_text, &formula_text]));
    r.horizon = Some(verdict.horizon);
    r.quiescent = Some(verdict.quiescent);
    if let Some(iv) = &verdict.interval {
        r.probabilities.push(Probability {
            label: "outermost".into(),
            value: iv.to_string(),
        });
    }
    if verdict.truth == Truth::Unknown {
        r.warnings
            .push(format!("horizon {} was not enough to settle the verdict", verdict.horizon));
    }
    r.details = json!({
        "formula": render_formula(&formula),
        "configuration": sys.render_configuration(&config),
        "required_horizon": match needed {
            Horizon::Bounded(h) => json!(h),
            Horizon::Unbounded => json!("unbounded"),
        },
    });
    Ok(r)
}

fn encode_options(flags: &EncodingFlags) -> Result<EncodeOptions> {
    let t: Rational = parse_rational(&flags.t).map_err(|e| anyhow!("--t: {e}"))?;
    Ok(EncodeOptions {
        phases: match flags.phases {
            Phases::Unit => PhaseAssignment::Unit,
            Phases::Random => PhaseAssignment::Seeded(flags.seed),
        },
        t,
        policy: match flags.policy {
            Policy::TwoNm => BoundPolicy::TwoNm,
            Policy::Sufficient => BoundPolicy::Sufficient,
        },
    })
}

fn encode(a: &EncodeArgs) -> Result<RunReport> {
    let inst = load_instance(&a.instance, a.flags.k)?;
    let padded = pad(&inst)?;
    let opts = encode_options(&a.flags)?;
    let art = if a.unbounded {
        encode_unbounded(&padded, &opts)?
    } else {
        require_bound(&inst, "encode")?;
        encode_bounded(&padded, &opts)?
    };
    let system = render_system(&art.system);
    let formula = formula_file(&art);
    let mut written = serde_json::Map::new();
    for (out, text, key) in [(&a.system_out, &system, "system"), (&a.formula_out, &formula, "formula")] {
        match out {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
                written.insert(format!("{key}_path"), json!(path.display().to_string()));
            }
            None => {
                written.insert(key.to_string(), json!(text));
            }
        }
    }
    let mut r = RunReport::new("encode", Status::Pass);
    r.digest = Some(inst.digest());
    r.warnings = art.warnings.clone();
    r.horizon = art.horizon_hint.as_bounded();
    r.details = json!({
        "mode": if a.unbounded { "unbounded" } else { "bounded" },
        "t": art.t.to_string(),
        "phases": opts.phases.to_string(),
        "stack_alphabet": art.alphabet_report,
        "step_bounds": art.step_bounds,
        "rules": art.system.rules().len(),
        "output": written,
    });
    Ok(r)
}

fn solve(a: &SolveArgs) -> Result<RunReport> {
    let inst = load_instance(&a.instance, a.k)?;
    let k = require_bound(&inst, "pcp solve")?;
    let witness = solve_bounded(&inst, k);
    let mut r = RunReport::new("pcp solve", if witness.is_some() { Status::Found } else { Status::None });
    r.digest = Some(inst.digest());
    r.details = match &witness {
        Some(w) => {
            let (u, v) = concat(&inst, w.indices())?;
            json!({ "k": k, "witness": w, "upper": word_to_string(&u), "lower": word_to_string(&v) })
        }
        None => json!({ "k": k, "witness": null }),
    };
    Ok(r)
}

fn decide(a: &DecideArgs) -> Result<RunReport> {
    let inst = load_instance(&a.instance, a.flags.k)?;
    require_bound(&inst, "pcp decide")?;
    let enc = encode_options(&a.flags)?;
    let opts = DecideOptions {
        t: enc.t,
        phases: enc.phases,
        mode: match a.mode {
            Decision::Sum => DecisionMode::Sum,
            Decision::Literal => DecisionMode::Literal,
        },
        policy: enc.policy,
    };
    let d = decide_pcp(&pad(&inst)?, &opts)?;
    let status = match d.agreement {
        Some(false) => Status::Disagreement,
        _ => truth_status(d.verdict),
    };
    let mut r = RunReport::new("pcp decide", status);
    r.digest = Some(d.digest.clone());
    r.horizon = Some(d.horizon);
    r.quiescent = Some(d.verdict != Truth::Unknown);
    r.agreement = d.agreement;
    r.warnings = d.warnings.clone();
    if let Some(iv) = &d.formula_interval {
        r.probabilities.push(Probability {
            label: "acceptance formula".into(),
            value: iv.clone(),
        });
    }
    for c in &d.configurations {
        r.probabilities.push(Probability {
            label: format!("{} (sum)", c.configuration),
            value: c.sum.clone(),
        });
    }
    if status == Status::Disagreement {
        r.warnings.push(format!(
            "checker says {} but the brute-force solver {}",
            d.verdict,
            if d.witness.is_some() { "found a witness" } else { "found none" }
        ));
    }
    r.details = serde_json::to_value(&d)?;
    Ok(r)
}

fn lemmas(a: &LemmasArgs) -> Result<RunReport> {
    let inst = load_instance(&a.instance, a.k)?;
    require_bound(&inst, "lemmas")?;
    let report = run_lemmas(&pad(&inst)?, &a.seeds)?;
    let mut r = RunReport::new("lemmas", if report.passed() { Status::Pass } else { Status::Fail });
    r.digest = Some(report.digest.clone());
    r.details = serde_json::to_value(&report)?;
    Ok(r)
}

/// Human-readable lines for stderr.
pub fn summary(r: &RunReport, approx: bool) -> String {
    let mut out = format!("{}: {}\n", r.command, r.verdict.as_str());
    if let Some(e) = &r.error {
        let _ = writeln!(out, "  error: {e}");
    }
    if let Some(h) = r.horizon {
        let _ = writeln!(out, "  horizon: {h}");
    }
    if let Some(a) = r.agreement {
        let _ = writeln!(out, "  oracle agreement: {}", if a { "yes" } else { "NO" });
    }
    for p in &r.probabilities {
        let extra = match approx.then(|| approx_text(&p.value)).flatten() {
            Some(d) => format!("  ~ {d}"),
            None => String::new(),
        };
        let _ = writeln!(out, "  {} = {}{extra}", p.label, p.value);
    }
    match r.command.as_str() {
        "validate" => {
            if let Some(msgs) = r.details["violation_messages"].as_array() {
                for m in msgs.iter().filter_map(|m| m.as_str()) {
                    let _ = writeln!(out, "  violation: {m}");
                }
            }
        }
        "pcp solve" => {
            if !r.details["witness"].is_null() {
                let _ = writeln!(
                    out,
                    "  witness: {} ({} = {})",
                    r.details["witness"], r.details["upper"], r.details["lower"]
                );
            }
        }
        "lemmas" => {
            for c in r.details["checks"].as_array().into_iter().flatten() {
                let mark = if c["passed"].as_bool() == Some(true) { "pass" } else { "FAIL" };
                let _ = writeln!(out, "  [{mark}] {}", c["name"].as_str().unwrap_or("?"));
                for d in c["details"].as_array().into_iter().flatten() {
                    let _ = writeln!(out, "      {}", d.as_str().unwrap_or_default());
                }
            }
        }
        _ => {}
    }
    for w in &r.warnings {
        let _ = writeln!(out, "  warning: {w}");
    }
    out
}
