//! Subcommand implementations and their report shapes.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use krand::advice::{
    lazy_advice_decide, prune_advice_trace, sample_and_decide, success_probability_exact,
    AdviceReportRow, AdviceScenario, ScenarioFile,
};
use krand::bits::Bitstring;
use krand::census::{
    attach_cond_complexities, density_report, find_hitting_sequence, hitting_existence_margin,
    random_hitting_instance, HittingMargin,
};
use krand::checker::oracles::{Constant, FlipAll, FlipFraction};
use krand::checker::perm::{perm_checker, perm_mod_p, HonestPermOracle, PermParams};
use krand::checker::sat::{sat_decide, sat_scenario, CnfFormula};
use krand::checker::{run_checker, Amplified, Oracle, Verdict};
use krand::derand::{parse_instances, Decision, SchwartzZippel};
use krand::kvm::{
    build_ktable, load_ktable, save_ktable, BuildParams, KTable, KvmError, TimeBound,
};
use krand::nwprg::{default_params, greedy_design, NwGenerator, TruthTable};
use krand::rng::{Rng, RngStream};

use crate::cache::cache_path;
use crate::{CliError, CliResult, GlobalArgs};

fn write_report<T: Serialize>(global: &GlobalArgs, name: &str, report: &T) -> CliResult<PathBuf> {
    let path = global
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("krand-{name}.json")));
    let mut bytes = serde_json::to_vec_pretty(report)
        .map_err(|e| CliError::Input(format!("report serialization: {e}")))?;
    bytes.push(b'\n');
    fs::write(&path, bytes)?;
    Ok(path)
}

fn map_kvm_err(e: KvmError) -> CliError {
    match e {
        KvmError::WorkBudgetExceeded { .. } => CliError::Budget(e.to_string()),
        KvmError::BadParams(_) => CliError::Input(e.to_string()),
    }
}

fn parse_condition(cond: &Option<String>) -> CliResult<Option<Bitstring>> {
    match cond {
        None => Ok(None),
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|e: String| CliError::Input(format!("--condition: {e}"))),
    }
}

// ---------------------------------------------------------------- build-ktab

#[derive(Debug, Args)]
pub struct BuildKtabArgs {
    /// Longest output length covered by the table.
    #[arg(long)]
    max_len: u32,
    /// Longest program length enumerated.
    #[arg(long)]
    prog_bits: u32,
    /// Steps per output bit of the time bound.
    #[arg(long, default_value_t = 8)]
    t_a: u32,
    /// Constant steps of the time bound.
    #[arg(long, default_value_t = 8)]
    t_b: u32,
    /// Condition bits, e.g. "1100".
    #[arg(long)]
    condition: Option<String>,
    /// Enumeration partitions; the table is identical for every value.
    #[arg(long, default_value_t = 8)]
    partitions: u32,
}

#[derive(Serialize)]
struct BuildKtabReport {
    cache_hit: bool,
    entries: usize,
    max_len: u32,
    path: String,
    prog_bits: u32,
    t_a: u32,
    t_b: u32,
}

/// Fetch a table from the cache or build and cache it.
pub fn obtain_table(
    global: &GlobalArgs,
    max_len: u32,
    prog_bits: u32,
    tb: TimeBound,
    condition: Option<Bitstring>,
    partitions: u32,
    build_if_missing: bool,
) -> CliResult<(KTable, PathBuf, bool)> {
    let path = cache_path(
        &global.cache_dir,
        krand::kvm::MACHINE_VERSION,
        tb.a,
        tb.b,
        max_len,
        prog_bits,
        condition.as_ref(),
    );
    if path.exists() {
        let table =
            load_ktable(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        return Ok((table, path, true));
    }
    if !build_if_missing {
        return Err(CliError::Input("missing ktable".into()));
    }
    let mut params = BuildParams::new(max_len, prog_bits, tb).with_partitions(partitions);
    params.condition = condition;
    let table = build_ktable(&params).map_err(map_kvm_err)?;
    fs::create_dir_all(&global.cache_dir)?;
    save_ktable(&table, &path).map_err(|e| CliError::Input(e.to_string()))?;
    Ok((table, path, false))
}

pub fn build_ktab(global: &GlobalArgs, args: &BuildKtabArgs) -> CliResult<()> {
    let condition = parse_condition(&args.condition)?;
    let (table, path, cache_hit) = obtain_table(
        global,
        args.max_len,
        args.prog_bits,
        TimeBound::new(args.t_a, args.t_b),
        condition,
        args.partitions,
        true,
    )?;
    let report = BuildKtabReport {
        cache_hit,
        entries: table.raw_entries().len(),
        max_len: args.max_len,
        path: path.display().to_string(),
        prog_bits: args.prog_bits,
        t_a: args.t_a,
        t_b: args.t_b,
    };
    let out = write_report(global, "build-ktab", &report)?;
    println!(
        "table {} ({} entries, cache {}), report {}",
        path.display(),
        report.entries,
        if cache_hit { "hit" } else { "miss" },
        out.display()
    );
    Ok(())
}

// -------------------------------------------------------------------- census

#[derive(Debug, Args)]
pub struct CensusArgs {
    /// Table file; defaults to the cache entry for the other parameters.
    #[arg(long)]
    ktable: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    n_lo: u32,
    /// Top of the length range; defaults to the table range.
    #[arg(long)]
    n_hi: Option<u32>,
    /// Also measure the conditional complexity of the complement prefix;
    /// builds one conditioned table per length (cached).
    #[arg(long)]
    barzdin: bool,
    #[arg(long, default_value_t = 12)]
    max_len: u32,
    #[arg(long, default_value_t = 13)]
    prog_bits: u32,
    #[arg(long, default_value_t = 8)]
    t_a: u32,
    #[arg(long, default_value_t = 8)]
    t_b: u32,
}

pub fn census(global: &GlobalArgs, args: &CensusArgs) -> CliResult<()> {
    let table = match &args.ktable {
        Some(path) => {
            load_ktable(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => {
            obtain_table(
                global,
                args.max_len,
                args.prog_bits,
                TimeBound::new(args.t_a, args.t_b),
                None,
                8,
                false,
            )?
            .0
        }
    };
    let n_hi = args.n_hi.unwrap_or(table.max_len);
    let mut report =
        density_report(&table, args.n_lo, n_hi).map_err(|e| CliError::Input(e.to_string()))?;
    if args.barzdin {
        let mut cond_tables = Vec::new();
        for n in args.n_lo..=n_hi {
            let cond = krand::census::binary_of(n as u64);
            let (t, _, _) = obtain_table(
                global,
                n.max(1),
                table.prog_bits,
                table.time_bound,
                Some(cond),
                8,
                true,
            )?;
            cond_tables.push((n, t));
        }
        let refs: Vec<(u32, &KTable)> = cond_tables.iter().map(|(n, t)| (*n, t)).collect();
        attach_cond_complexities(&mut report, &table, &refs)
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let out = write_report(global, "census", &report)?;
    println!(
        "census over n = {}..={}: measured d = {}{}, report {}",
        args.n_lo,
        n_hi,
        report.measured_d,
        match report.measured_c {
            Some(c) => format!(", measured c = {c}"),
            None => String::new(),
        },
        out.display()
    );
    Ok(())
}

// ------------------------------------------------------------------- hitting

#[derive(Debug, Args)]
pub struct HittingArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// Tuple length; defaults to d * k, the guaranteed regime.
    #[arg(long)]
    m: Option<u32>,
}

#[derive(Serialize)]
struct HittingReport {
    d: u32,
    found: bool,
    good_sets: usize,
    k: u32,
    m: u32,
    margin: String,
    n: u32,
    sequence: Option<Vec<String>>,
    verified: bool,
}

pub fn hitting(global: &GlobalArgs, args: &HittingArgs) -> CliResult<()> {
    let stream = RngStream::new(global.seed, "hitting");
    let mut inst = random_hitting_instance(args.n, args.k, args.d, stream);
    if let Some(m) = args.m {
        inst.m = m;
    }
    let margin = hitting_existence_margin(inst.k, inst.d, inst.m);
    let seq = match find_hitting_sequence(&inst) {
        Ok(seq) => seq,
        Err(e @ krand::census::CensusError::BudgetExceeded(_)) => {
            return Err(CliError::Budget(e.to_string()))
        }
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    let verified = match &seq {
        None => false,
        Some(seq) => inst.good_indices().iter().all(|&g| {
            seq.iter()
                .any(|x| inst.family[g].get(x.value_u64() as usize))
        }),
    };
    let report = HittingReport {
        d: inst.d,
        found: seq.is_some(),
        good_sets: inst.good_indices().len(),
        k: inst.k,
        m: inst.m,
        margin: match margin {
            HittingMargin::Guaranteed => "guaranteed".into(),
            HittingMargin::NotGuaranteed => "not-guaranteed".into(),
        },
        n: inst.n,
        sequence: seq.map(|s| s.iter().map(|x| x.to_string()).collect()),
        verified,
    };
    let out = write_report(global, "hitting", &report)?;
    println!(
        "hitting search n={} k={} d={} m={}: found={} verified={}, report {}",
        inst.n,
        inst.k,
        inst.d,
        inst.m,
        report.found,
        report.verified,
        out.display()
    );
    Ok(())
}

// -------------------------------------------------------------------- design

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    l: usize,
    /// Where to write the design text file.
    #[arg(long, default_value = "design.txt")]
    design_out: PathBuf,
}

#[derive(Serialize)]
struct DesignReport {
    a: usize,
    k: usize,
    l: usize,
    m: usize,
    path: String,
    valid: bool,
}

pub fn design(global: &GlobalArgs, args: &DesignArgs) -> CliResult<()> {
    let d = greedy_design(args.m, args.k, args.a, args.l)
        .map_err(|e| CliError::Input(e.to_string()))?;
    d.validate().map_err(|e| CliError::Input(e.to_string()))?;
    d.save(&args.design_out)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let report = DesignReport {
        a: args.a,
        k: args.k,
        l: args.l,
        m: args.m,
        path: args.design_out.display().to_string(),
        valid: true,
    };
    let out = write_report(global, "design", &report)?;
    println!(
        "design m={} k={} a={} l={} written to {}, report {}",
        args.m,
        args.k,
        args.a,
        args.l,
        args.design_out.display(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- derand-pit

#[derive(Debug, Args)]
pub struct DerandPitArgs {
    /// Table supplying the hard membership bits.
    #[arg(long)]
    ktable: PathBuf,
    /// Field size of the identity-testing instances.
    #[arg(long)]
    prime: u64,
    /// Instance file: one `lhs == rhs` per line.
    #[arg(long)]
    instances: PathBuf,
    /// Generator seed length.
    #[arg(long, default_value_t = 20)]
    seed_len: usize,
    /// Arity of the hard function read from the table.
    #[arg(long, default_value_t = 10)]
    hard_arity: u32,
}

#[derive(Serialize)]
struct PitRow {
    correct: bool,
    decision: String,
    ground_truth: bool,
    source: String,
}

#[derive(Serialize)]
struct DerandPitReport {
    correct: usize,
    degenerate_hard_function: bool,
    hard_ones_fraction: f64,
    intersection_bound: usize,
    rows: Vec<PitRow>,
    seed_len: usize,
    total: usize,
}

pub fn derand_pit(global: &GlobalArgs, args: &DerandPitArgs) -> CliResult<()> {
    let table = load_ktable(&args.ktable)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.ktable.display())))?;
    let cs = krand::census::char_seq(&table, args.hard_arity)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let hard = TruthTable::from_bits(args.hard_arity, cs.bits)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let text = fs::read_to_string(&args.instances)?;
    let instances =
        parse_instances(&text, args.prime).map_err(|e| CliError::Input(e.to_string()))?;
    if instances.is_empty() {
        return Err(CliError::Input("no instances in the file".into()));
    }
    let m = instances.iter().map(|i| i.rand_len()).max().unwrap();
    let (mut a, l) = default_params(args.hard_arity, m, args.seed_len as u32);
    if l < args.hard_arity as usize {
        return Err(CliError::Input(format!(
            "seed length {l} is shorter than the hard arity {}",
            args.hard_arity
        )));
    }
    let design = loop {
        match greedy_design(m, args.hard_arity as usize, a, l) {
            Ok(d) => break d,
            Err(krand::nwprg::NwError::Infeasible { .. }) if a < args.hard_arity as usize => {
                a += 1;
            }
            Err(e) => return Err(CliError::Input(e.to_string())),
        }
    };
    let ones = hard.ones_fraction();
    let degenerate = ones == 0.0 || ones == 1.0;
    let g = NwGenerator::new(design, hard).map_err(|e| CliError::Input(e.to_string()))?;
    let mut rows = Vec::new();
    let mut correct = 0usize;
    for inst in &instances {
        let truth = inst.is_identity();
        let decision = derandomize_cap_checked(&SchwartzZippel, inst, &g, args.seed_len as u32)?;
        let ok = (decision == Decision::Accept) == truth;
        if ok {
            correct += 1;
        }
        rows.push(PitRow {
            correct: ok,
            decision: match decision {
                Decision::Accept => "accept".into(),
                Decision::Reject => "reject".into(),
            },
            ground_truth: truth,
            source: inst.source.clone(),
        });
    }
    let report = DerandPitReport {
        correct,
        degenerate_hard_function: degenerate,
        hard_ones_fraction: ones,
        intersection_bound: a,
        rows,
        seed_len: g.seed_len(),
        total: instances.len(),
    };
    let out = write_report(global, "derand-pit", &report)?;
    println!(
        "derandomized {}/{} instances correctly (seed length {}, hard ones fraction {:.4}{}), report {}",
        report.correct,
        report.total,
        report.seed_len,
        report.hard_ones_fraction,
        if degenerate {
            "; WARNING: degenerate hard function"
        } else {
            ""
        },
        out.display()
    );
    Ok(())
}

fn derandomize_cap_checked(
    alg: &SchwartzZippel,
    inst: &krand::derand::PitInstance,
    g: &NwGenerator,
    cap: u32,
) -> CliResult<Decision> {
    use krand::derand::DerandError;
    krand::derand::derandomize_with_cap(alg, inst, g, cap).map_err(|e| match e {
        DerandError::Nw(krand::nwprg::NwError::CapExceeded(_, _)) => {
            CliError::Budget(e.to_string())
        }
        other => CliError::Input(other.to_string()),
    })
}

// ---------------------------------------------------------------- advice-sim

#[derive(Debug, Args)]
pub struct AdviceSimArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Sampled trials per input for the empirical column.
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    /// Exercise the lazy path and compare with the eager decisions.
    #[arg(long)]
    lazy: bool,
}

#[derive(Serialize)]
struct AdviceSimReport {
    advice_bits: u64,
    lazy_matches: Option<bool>,
    pairs: usize,
    rows: Vec<AdviceReportRow>,
}

pub fn advice_sim(global: &GlobalArgs, args: &AdviceSimArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.scenario)?;
    let file: ScenarioFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("scenario: {e}")))?;
    let scenario: AdviceScenario = file
        .to_scenario()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let (pairs, _trace) =
        prune_advice_trace(&scenario).map_err(|e| CliError::Input(e.to_string()))?;
    let master = RngStream::new(global.seed, "advice-sim");
    let mut rows = Vec::new();
    let mut lazy_matches = true;
    for x in 0..(1u64 << scenario.n()) {
        let exact = success_probability_exact(&scenario, &pairs, x)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let mut hits = 0u64;
        for trial in 0..args.trials {
            let stream = master.derive_u64(trial * (1 << scenario.n()) + x);
            let got = sample_and_decide(&scenario, &pairs, x, stream)
                .map_err(|e| CliError::Input(e.to_string()))?;
            if args.lazy {
                let lazy = lazy_advice_decide(&scenario, &pairs, x, stream)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                if lazy.decision != got {
                    lazy_matches = false;
                }
            }
            if got == scenario.truth(x) {
                hits += 1;
            }
        }
        rows.push(AdviceReportRow {
            x: Bitstring::from_value(scenario.n() as usize, x).to_string(),
            exact_prob: exact.to_string(),
            mc_prob: hits as f64 / args.trials as f64,
            trials: args.trials,
        });
    }
    let report = AdviceSimReport {
        advice_bits: pairs.advice_bits(scenario.n()),
        lazy_matches: args.lazy.then_some(lazy_matches),
        pairs: pairs.len(),
        rows,
    };
    let out = write_report(global, "advice-sim", &report)?;
    println!(
        "advice simulation: {} pairs ({} advice bits), {} inputs, report {}",
        report.pairs,
        report.advice_bits,
        report.rows.len(),
        out.display()
    );
    Ok(())
}

// --------------------------------------------------------------- checker-sim

#[derive(Debug, Args)]
pub struct CheckerSimArgs {
    /// Matrix side of the permanent language.
    #[arg(long, default_value_t = 2)]
    side: usize,
    /// Field size.
    #[arg(long, default_value_t = 5)]
    prime: u64,
    /// Randomness draws per adversarial oracle.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Majority-amplification repetitions for the amplified column.
    #[arg(long, default_value_t = 64)]
    reps: u32,
    /// Optional single instance file: JSON {"p": 5, "matrix": [[...], ...]}.
    #[arg(long)]
    instance: Option<PathBuf>,
}

#[derive(Serialize)]
struct BatteryRow {
    amplified_wrong_rate: f64,
    fail_rate: f64,
    oracle: String,
    trials: u64,
    wrong_nonfail_rate: f64,
}

#[derive(Serialize)]
struct CheckerSimReport {
    battery: Vec<BatteryRow>,
    honest_all_correct: bool,
    instance: Option<InstanceRow>,
    prime: u64,
    side: usize,
}

#[derive(Serialize)]
struct InstanceRow {
    input: String,
    iterations_used: u64,
    outcome: String,
    verified: bool,
}

#[derive(serde::Deserialize)]
struct PermInstanceFile {
    p: u64,
    matrix: Vec<Vec<u64>>,
}

pub fn checker_sim(global: &GlobalArgs, args: &CheckerSimArgs) -> CliResult<()> {
    let checker =
        perm_checker(args.side, args.prime).map_err(|e| CliError::Input(e.to_string()))?;
    let params = checker.params();
    let master = RngStream::new(global.seed, "checker-sim");

    // Completeness spot check: honest oracle over sampled instances.
    let mut honest_ok = true;
    for trial in 0..500u64 {
        let (x, truth_bit) = sample_instance(&params, master.derive_u64(trial));
        let mut oracle = HonestPermOracle { params };
        let mut rng = Rng::from_stream(master.derive("honest").derive_u64(trial));
        match run_checker(&checker, &mut oracle, &x, &mut rng)
            .map_err(|e| CliError::Input(e.to_string()))?
        {
            Verdict::Value(v) if v == truth_bit => {}
            _ => honest_ok = false,
        }
    }

    let mut battery = Vec::new();
    for name in ["flip-all", "flip-10", "constant-0"] {
        let make_oracle = |stream: RngStream| -> Box<dyn Oracle> {
            match name {
                "flip-all" => Box::new(FlipAll(HonestPermOracle { params })),
                "flip-10" => Box::new(FlipFraction {
                    inner: HonestPermOracle { params },
                    stream,
                    percent: 10,
                }),
                _ => Box::new(Constant(false)),
            }
        };
        let corrupt_stream = master.derive("corruption").derive(name);
        let mut wrong = 0u64;
        let mut fails = 0u64;
        let mut amp_wrong = 0u64;
        let amp = Amplified::new(checker, args.reps).map_err(|e| CliError::Input(e.to_string()))?;
        for trial in 0..args.trials {
            let (x, truth_bit) = sample_instance(&params, master.derive(name).derive_u64(trial));
            let mut oracle = make_oracle(corrupt_stream);
            let mut rng = Rng::from_stream(master.derive("rand").derive(name).derive_u64(trial));
            match run_checker(&checker, oracle.as_mut(), &x, &mut rng)
                .map_err(|e| CliError::Input(e.to_string()))?
            {
                Verdict::Value(v) if v != truth_bit => wrong += 1,
                Verdict::Fail => fails += 1,
                _ => {}
            }
            let mut oracle = make_oracle(corrupt_stream);
            let mut rng =
                Rng::from_stream(master.derive("amp-rand").derive(name).derive_u64(trial));
            if let Verdict::Value(v) = run_checker(&amp, oracle.as_mut(), &x, &mut rng)
                .map_err(|e| CliError::Input(e.to_string()))?
            {
                if v != truth_bit {
                    amp_wrong += 1;
                }
            }
        }
        battery.push(BatteryRow {
            amplified_wrong_rate: amp_wrong as f64 / args.trials as f64,
            fail_rate: fails as f64 / args.trials as f64,
            oracle: name.into(),
            trials: args.trials,
            wrong_nonfail_rate: wrong as f64 / args.trials as f64,
        });
    }

    let instance = match &args.instance {
        None => None,
        Some(path) => {
            let file: PermInstanceFile = serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| CliError::Input(format!("instance: {e}")))?;
            if file.p != args.prime {
                return Err(CliError::Input(
                    "instance prime differs from --prime".into(),
                ));
            }
            let k = file.matrix.len();
            let flat: Vec<u64> = file.matrix.into_iter().flatten().collect();
            if flat.len() != k * k || k == 0 || k > args.side {
                return Err(CliError::Input(
                    "matrix must be square, side <= --side".into(),
                ));
            }
            if flat.iter().any(|&e| e >= args.prime) {
                return Err(CliError::Input("matrix entry outside the field".into()));
            }
            let truth = perm_mod_p(&flat, k, args.prime);
            let x = params.encode(k, &flat, 0);
            let mut oracle = HonestPermOracle { params };
            let mut rng = Rng::from_stream(master.derive("instance"));
            let verdict = run_checker(&checker, &mut oracle, &x, &mut rng)
                .map_err(|e| CliError::Input(e.to_string()))?;
            Some(InstanceRow {
                input: x.to_string(),
                iterations_used: 1,
                outcome: match verdict {
                    Verdict::Value(v) => format!("{}", v as u8),
                    Verdict::Fail => "fail".into(),
                },
                verified: verdict == Verdict::Value(truth & 1 == 1),
            })
        }
    };

    let report = CheckerSimReport {
        battery,
        honest_all_correct: honest_ok,
        instance,
        prime: args.prime,
        side: args.side,
    };
    let out = write_report(global, "checker-sim", &report)?;
    println!(
        "checker battery side={} p={}: honest correct = {}, report {}",
        args.side,
        args.prime,
        report.honest_all_correct,
        out.display()
    );
    for row in &report.battery {
        println!(
            "  {:<11} wrong non-fail {:.4}, fail {:.4}, amplified wrong {:.4}",
            row.oracle, row.wrong_nonfail_rate, row.fail_rate, row.amplified_wrong_rate
        );
    }
    Ok(())
}

fn sample_instance(params: &PermParams, stream: RngStream) -> (Bitstring, bool) {
    let k = params.side;
    let matrix: Vec<u64> = (0..k * k).map(|i| stream.at(i as u64) % params.p).collect();
    let bit_idx = (stream.at(99) % params.value_bits() as u64) as usize;
    let truth = (perm_mod_p(&matrix, k, params.p) >> bit_idx) & 1 == 1;
    (params.encode(k, &matrix, bit_idx), truth)
}

// ------------------------------------------------------------------- sat-sim

#[derive(Debug, Args)]
pub struct SatSimArgs {
    /// DIMACS CNF input.
    #[arg(long)]
    cnf: PathBuf,
}

#[derive(Serialize)]
struct SatSimReport {
    input: String,
    iterations_used: u64,
    outcome: u8,
    verified: bool,
}

pub fn sat_sim(global: &GlobalArgs, args: &SatSimArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.cnf)?;
    let phi = CnfFormula::parse_dimacs(&text).map_err(|e| CliError::Input(e.to_string()))?;
    let ss = sat_scenario(&phi).map_err(|e| CliError::Input(e.to_string()))?;
    let stream = RngStream::new(global.seed, "sat-sim");
    let decision = sat_decide(&ss, stream).map_err(|e| CliError::Input(e.to_string()))?;
    let verified = decision.assignment.as_ref().is_some_and(|a| phi.eval(a));
    let report = SatSimReport {
        input: args.cnf.display().to_string(),
        iterations_used: decision.iterations_used,
        outcome: decision.accepted as u8,
        verified,
    };
    let out = write_report(global, "sat-sim", &report)?;
    println!(
        "sat decision: {} (iterations {}, verified {}), report {}",
        report.outcome,
        report.iterations_used,
        report.verified,
        out.display()
    );
    Ok(())
}
