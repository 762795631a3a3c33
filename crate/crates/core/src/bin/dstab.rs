use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use dstab::config::{OutputFormat, RunConfig, SCHEMA_VERSION};
use dstab::conics::{conic_invariants, member_quadratic};
use dstab::extfields::{
    build_s_ramified_character, characters_of_order, count_cyclic_fields, enumerate_fields, wright_fit,
    CyclicFieldRecord, RamificationSpec,
};
use dstab::ffgroup::{count_sl2_with_fixed_points, delta_theoretical, find_tau, sl2_order};
use dstab::homspace::{search_point, table_571a1, QuarticSpace};
use dstab::lfunc::{max_conductor_needed, n_el_count, stability_scan, LContext};
use dstab::primeclass::{classify_range, scan, StabilityParams};
use dstab::search::HitRecord;
use dstab::{Error, Result};

#[derive(Parser)]
#[command(name = "dstab", version, about = "Diophantine stability toolkit for elliptic curves over Q")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// key = value configuration file; explicit flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// 571a1, 5906 or 11a1
    #[arg(long, global = true)]
    curve: Option<String>,
    /// a1,a2,a3,a4,a6 (requires --conductor)
    #[arg(long, global = true, allow_hyphen_values = true)]
    coeffs: Option<String>,
    #[arg(long, global = true)]
    conductor: Option<u64>,
    #[arg(long, global = true)]
    ell: Option<u64>,
    #[arg(long, global = true)]
    n: Option<u32>,
    /// extra split primes, comma separated
    #[arg(long, global = true)]
    sigma: Option<String>,
    #[arg(long, global = true)]
    bound: Option<u64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// +1, -1 or auto
    #[arg(long, global = true, allow_hyphen_values = true)]
    root_number: Option<String>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// text, json or csv
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the primes in [lo, bound]
    ClassifyPrimes {
        #[arg(long, default_value_t = 2)]
        lo: u64,
    },
    /// Level densities of primes up to the bound
    DensityReport,
    /// Cyclic ell^n fields with conductor up to the bound
    EnumerateExtensions {
        /// primes whose splitting is reported
        #[arg(long, value_delimiter = ',')]
        query: Vec<u64>,
    },
    /// Number of cyclic degree-ell fields with discriminant up to the bound
    CountExtensions {
        /// fit log count against log X over decades up to the bound
        #[arg(long)]
        fit: bool,
    },
    /// Character ramified exactly at S with Sigma split
    BuildExtension {
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<u64>,
        /// prescribed local exponents, p:e pairs
        #[arg(long, value_delimiter = ',')]
        ramification: Vec<String>,
    },
    /// L(E, chi, 1) for the index-th order-ell^n character of a conductor
    TwistedLvalue {
        #[arg(long)]
        char_conductor: u64,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Vanishing twisted L-values with conductor up to the bound
    NelCount,
    /// Rank-stability verdicts for cyclic degree-ell fields (conditional)
    StabilityScan,
    /// Ramified places of ax^2 + by^2 + cz^2 and membership of Q(sqrt d)
    ConicMembership {
        #[arg(allow_negative_numbers = true)]
        a: i64,
        #[arg(allow_negative_numbers = true)]
        b: i64,
        #[arg(allow_negative_numbers = true)]
        c: i64,
        #[arg(allow_negative_numbers = true)]
        d: i64,
    },
    /// Point search on y^2 = quartic over Q(sqrt d), or the 571a1 table
    HomspaceSearch {
        /// q4,q3,q2,q1,q0
        #[arg(long, allow_hyphen_values = true, required_unless_present = "table")]
        quartic: Option<String>,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "table")]
        d: Option<i64>,
        #[arg(long, default_value_t = 200)]
        height: i64,
        #[arg(long)]
        table: bool,
    },
    /// SL_2(F_ell) statistics
    GroupOracle {
        /// print only the number of elements with a nonzero fixed vector
        #[arg(long)]
        count_fixed: bool,
        /// element with a fixed space of this dimension
        #[arg(long)]
        tau: Option<usize>,
    },
    /// Run the built-in example suite
    Selftest,
}

fn flag_map(g: &GlobalArgs) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    };
    put("curve", g.curve.clone());
    put("coeffs", g.coeffs.clone());
    put("conductor", g.conductor.map(|v| v.to_string()));
    put("ell", g.ell.map(|v| v.to_string()));
    put("n", g.n.map(|v| v.to_string()));
    put("sigma", g.sigma.clone());
    put("bound", g.bound.map(|v| v.to_string()));
    put("eps", g.eps.map(|v| v.to_string()));
    put("root_number", g.root_number.as_ref().map(|v| v.trim_start_matches('+').to_string()));
    put("cache_dir", g.cache_dir.as_ref().map(|p| p.display().to_string()));
    put("format", g.format.clone());
    put("workers", g.workers.map(|v| v.to_string()));
    m
}

fn load_config(g: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::from_kv(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    let flags = flag_map(g);
    if flags.contains_key("coeffs") != flags.contains_key("conductor") {
        return Err(Error::InvalidInput("--coeffs and --conductor must be given together".into()));
    }
    cfg.apply(&flags)?;
    Ok(cfg)
}

/// Rendered output: JSON payload, CSV header and rows, and a text form.
struct Report {
    json: Value,
    csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    text: String,
}

fn emit(cmd: &str, fmt: OutputFormat, r: Report) {
    match fmt {
        OutputFormat::Json => {
            let out = json!({ "schema_version": SCHEMA_VERSION, "command": cmd, "result": r.json });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
        OutputFormat::Csv => {
            let (header, rows) = r.csv.unwrap_or_else(|| (vec!["json"], vec![vec![r.json.to_string().replace(',', ";")]]));
            println!("# dstab {cmd} schema_version={SCHEMA_VERSION}");
            println!("{}", header.join(","));
            for row in rows {
                println!("{}", row.join(","));
            }
        }
        OutputFormat::Text => print!("{}", r.text),
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn field_row(f: &CyclicFieldRecord) -> Vec<String> {
    vec![f.conductor.to_string(), f.degree.to_string(), f.discriminant.clone(), join(&f.ramified_primes), f.totally_real.to_string()]
}

fn parse_ints(s: &str, what: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::InvalidInput(format!("bad {what} entry {t:?}"))))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.global)?;
    if let Some(w) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
            .map_err(|e| Error::Assertion(e.to_string()))?;
    }
    let cache = cfg.resolved_cache_dir();
    let params = || -> Result<StabilityParams> { StabilityParams::with_sigma(cfg.curve.build()?, cfg.ell, cfg.n, &cfg.sigma) };
    let (name, report) = match cli.command {
        Command::ClassifyPrimes { lo } => {
            let recs = classify_range(&params()?, lo, cfg.bound)?;
            let rows: Vec<Vec<String>> = recs
                .iter()
                .map(|r| vec![r.p.to_string(), r.in_q.to_string(), r.in_p.to_string(), opt(r.level), r.ap.to_string()])
                .collect();
            let text = rows.iter().map(|r| r.join("\t") + "\n").collect();
            ("classify-primes", Report { json: to_json(&recs), csv: Some((vec!["p", "in_Q", "in_P", "level", "a_p"], rows)), text })
        }
        Command::DensityReport => {
            let r = scan(&params()?, cfg.bound)?;
            let rows: Vec<Vec<String>> = r
                .densities
                .iter()
                .map(|e| vec![e.set.clone(), e.count.to_string(), e.empirical.to_string(), opt(e.theoretical.clone()), opt(e.z_score)])
                .collect();
            let mut text = format!("primes <= {}: {} scanned, |Q| = {}, |P| = {}\n", r.bound, r.primes_scanned, r.q_total, r.p_total);
            for e in &r.densities {
                let th = e.theoretical.as_deref().unwrap_or("-");
                let z = e.z_score.map_or("-".into(), |z| format!("{z:.2}"));
                text += &format!("{:<6} {:>9} {:.6}  theory {th}  z {z}\n", e.set, e.count, e.empirical);
            }
            ("density-report", Report { json: to_json(&r), csv: Some((vec!["set", "count", "empirical", "theoretical", "z"], rows)), text })
        }
        Command::EnumerateExtensions { query } => {
            let fields = enumerate_fields(cfg.ell, cfg.n, cfg.bound, &query)?;
            let rows: Vec<Vec<String>> = fields.iter().map(field_row).collect();
            let text = rows.iter().map(|r| r.join("\t") + "\n").collect();
            let header = vec!["conductor", "degree", "discriminant", "ramified", "totally_real"];
            ("enumerate-extensions", Report { json: to_json(&fields), csv: Some((header, rows)), text })
        }
        Command::CountExtensions { fit } => {
            if fit {
                let top = cfg.bound.max(1000);
                let grid: Vec<u128> = (3..).map(|k| 10u128.pow(k)).take_while(|&x| x <= top as u128).collect();
                let w = wright_fit(cfg.ell, &grid)?;
                let rows = w.points.iter().map(|(x, c)| vec![x.to_string(), c.to_string()]).collect();
                let text = format!("slope {:.4} [{:.4}, {:.4}] expected {:.4}\n", w.slope, w.ci_low, w.ci_high, w.expected);
                ("count-extensions", Report { json: to_json(&w), csv: Some((vec!["X", "count"], rows)), text })
            } else {
                let c = count_cyclic_fields(cfg.ell, cfg.bound as u128)?;
                let rows = vec![vec![c.bound.to_string(), c.count.to_string()]];
                let text = format!("{}\n", c.count);
                ("count-extensions", Report { json: to_json(&c), csv: Some((vec!["X", "count"], rows)), text })
            }
        }
        Command::BuildExtension { s, ramification } => {
            let mut ram = RamificationSpec::default();
            for item in &ramification {
                let (p, e) = item
                    .split_once(':')
                    .and_then(|(p, e)| Some((p.trim().parse().ok()?, e.trim().parse().ok()?)))
                    .ok_or_else(|| Error::InvalidInput(format!("bad ramification entry {item:?}; expected p:e")))?;
                ram.exponents.insert(p, e);
            }
            let chi = build_s_ramified_character(&s, &cfg.sigma, cfg.ell, cfg.n, &ram)?;
            let rec = CyclicFieldRecord::from_character(&chi, &cfg.sigma);
            let text = format!("{}\nconductor {}\n", chi.id(), chi.conductor());
            let header = vec!["conductor", "degree", "discriminant", "ramified", "totally_real"];
            let json = json!({ "character": chi.id(), "field": to_json(&rec) });
            ("build-extension", Report { json, csv: Some((header, vec![field_row(&rec)])), text })
        }
        Command::TwistedLvalue { char_conductor, index } => {
            let chars = characters_of_order(char_conductor, cfg.ell, cfg.n)?;
            let chi = chars.get(index).ok_or_else(|| {
                Error::InvalidInput(format!("conductor {char_conductor} has {} characters of this order", chars.len()))
            })?;
            let ctx = LContext::new(cfg.curve.build()?, char_conductor, cfg.eps, cfg.root_number, cache.as_deref())?;
            let l = ctx.twisted_l_value(chi, cfg.eps)?;
            let text = format!("{}\t{:.15e}\t{:.15e}\t|L| {:.6e} +- {:.1e}\n", chi.id(), l.re, l.im, l.abs(), l.error_bound);
            let rows = vec![vec![chi.id(), l.re.to_string(), l.im.to_string(), l.error_bound.to_string(), l.root_number.to_string()]];
            let json = json!({ "character": chi.id(), "value": to_json(&l) });
            ("twisted-lvalue", Report { json, csv: Some((vec!["character", "re", "im", "error_bound", "root_number"], rows)), text })
        }
        Command::NelCount => {
            let curve = cfg.curve.build()?;
            let fmax = max_conductor_needed(&curve, cfg.ell, cfg.bound)?;
            let ctx = LContext::new(curve, fmax, cfg.eps, cfg.root_number, cache.as_deref())?;
            let r = n_el_count(&ctx, cfg.ell, cfg.bound, cfg.eps)?;
            let rows = r
                .ledger
                .iter()
                .map(|v| vec![v.conductor.to_string(), v.orbit.to_string(), v.abs_value.to_string(), v.error_bound.to_string(), to_json(&v.verdict).as_str().unwrap_or_default().to_string()])
                .collect();
            let text = format!("N = {} (characters {}, root number {}, scale {:.4})\n", r.count, r.characters, r.root_number, r.scale);
            let header = vec!["conductor", "orbit", "abs_L", "error_bound", "verdict"];
            ("nel-count", Report { json: to_json(&r), csv: Some((header, rows)), text })
        }
        Command::StabilityScan => {
            let p = params()?;
            let fmax = max_conductor_needed(&p.curve, cfg.ell, cfg.bound)?;
            let ctx = LContext::new(p.curve.clone(), fmax, cfg.eps, cfg.root_number, cache.as_deref())?;
            let r = stability_scan(&p, &ctx, cfg.bound, cfg.eps)?;
            let rows = r
                .fields
                .iter()
                .map(|f| vec![f.conductor.to_string(), f.orbit.to_string(), join(&f.ramified_primes), f.ramified_only_at_silent.to_string(), to_json(&f.verdict).as_str().unwrap_or_default().to_string(), f.min_abs_value.to_string()])
                .collect();
            let text = format!(
                "{} fields, stable fraction {:.4}; ramified only at silent primes: {} (stable fraction {})\n(conditional on standard rank conjectures)\n",
                r.fields.len(),
                r.stable_fraction,
                r.silent_fields,
                r.silent_stable_fraction.map_or("-".into(), |x| format!("{x:.4}"))
            );
            let header = vec!["conductor", "orbit", "ramified", "silent_only", "verdict", "min_abs_L"];
            ("stability-scan", Report { json: to_json(&r), csv: Some((header, rows)), text })
        }
        Command::ConicMembership { a, b, c, d } => {
            let inv = conic_invariants(a, b, c)?;
            let member = member_quadratic(&inv, d)?;
            let ram: Vec<String> = inv.ramified.iter().map(ToString::to_string).collect();
            let text = format!("ramified {{{}}}\nmember {member}\n", ram.join(", "));
            let json = json!({ "ramified": to_json(&inv.ramified), "member": member });
            ("conic-membership", Report { json, csv: Some((vec!["ramified", "member"], vec![vec![ram.join(";"), member.to_string()]])), text })
        }
        Command::HomspaceSearch { quartic, d, height, table } => {
            if table {
                let t = table_571a1(height)?;
                let mut text = String::new();
                let mut rows = Vec::new();
                for row in &t.entries {
                    for e in row {
                        let pt = e.point.as_ref().map(|p| format!("({}, {}, {})", p.a, p.b, p.c));
                        text += &format!("{} d={}: {}\n", e.space, e.d, pt.as_deref().unwrap_or("none"));
                        let (a, b, c) = e.point.as_ref().map_or((String::new(), String::new(), String::new()), |p| (p.a.to_string(), p.b.to_string(), p.c.to_string()));
                        rows.push(vec![e.space.clone(), e.d.to_string(), e.point.is_some().to_string(), a, b, c]);
                    }
                }
                ("homspace-search", Report { json: to_json(&t), csv: Some((vec!["space", "d", "found", "a", "b", "c"], rows)), text })
            } else {
                let coeffs: [i64; 5] = parse_ints(quartic.as_deref().unwrap_or_default(), "quartic")?
                    .try_into()
                    .map_err(|_| Error::InvalidInput("--quartic needs five coefficients".into()))?;
                let d = d.expect("required by clap");
                let space = QuarticSpace::new("quartic", coeffs)?;
                let hit = search_point(&space, d, height)?;
                let rec = hit.as_ref().map(HitRecord::from);
                let text = match &rec {
                    Some(p) => format!("found x = ({} + {}*sqrt({d}))/{}\ny = {} + {}*sqrt({d})\n", p.a, p.b, p.c, p.y.u, p.y.v),
                    None => format!("no point with height <= {height}\n"),
                };
                let row = rec.as_ref().map_or(vec!["false".into(), String::new(), String::new(), String::new()], |p| {
                    vec!["true".into(), p.a.to_string(), p.b.to_string(), p.c.to_string()]
                });
                let json = json!({ "d": d, "height": height, "found": rec.is_some(), "point": to_json(&rec) });
                ("homspace-search", Report { json, csv: Some((vec!["found", "a", "b", "c"], vec![row])), text })
            }
        }
        Command::GroupOracle { count_fixed, tau } => {
            let ell = cfg.ell;
            let fixed = count_sl2_with_fixed_points(ell)?;
            let delta = delta_theoretical(ell)?;
            let tau = tau.map(|dim| find_tau(ell, dim)).transpose()?;
            let text = if count_fixed {
                format!("{fixed}\n")
            } else {
                let mut t = format!("|SL_2(F_{ell})| = {}\nwith fixed points {fixed}\ndelta {delta}\n", sl2_order(ell));
                if let Some(m) = &tau {
                    t += &format!("tau {:?}\n", m.entries());
                }
                t
            };
            let json = json!({
                "ell": ell,
                "sl2_order": sl2_order(ell),
                "with_fixed_points": fixed,
                "delta": delta.to_string(),
                "tau": tau.as_ref().map(|m| m.entries().to_vec()),
            });
            let rows = vec![vec![ell.to_string(), sl2_order(ell).to_string(), fixed.to_string(), delta.to_string()]];
            ("group-oracle", Report { json, csv: Some((vec!["ell", "sl2_order", "with_fixed_points", "delta"], rows)), text })
        }
        Command::Selftest => {
            let outcomes = dstab::selftest::run();
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let mut text = String::new();
            for o in &outcomes {
                text += &format!("{} {:<10} {}{}\n", if o.passed { "ok  " } else { "FAIL" }, o.module, o.name, o.detail.as_ref().map_or(String::new(), |d| format!(": {d}")));
            }
            text += &format!("{} checks, {failed} failed\n", outcomes.len());
            let rows = outcomes.iter().map(|o| vec![o.module.to_string(), o.name.to_string(), o.passed.to_string()]).collect();
            emit("selftest", cfg.format, Report { json: to_json(&outcomes), csv: Some((vec!["module", "check", "passed"], rows)), text });
            if failed > 0 {
                return Err(Error::Assertion(format!("{failed} selftest checks failed")));
            }
            return Ok(());
        }
    };
    emit(name, cfg.format, report);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
