//! Implementations of the subcommands.

use std::path::{Path, PathBuf};

use fastmm::bench::{run_bench, BenchConfig, BenchPlan};
use fastmm::bounds::error_bound;
use fastmm::norms::{gamma2, growth_factor, norm_table, q0, NormId};
use fastmm::orbit::{minimize_gamma2, snap_point, DescentOptions};
use fastmm::schemes::load_external;
use fastmm::slp::{best_of_with_strategy, cancellation_free, codegen_report, kernel_decompose, naive_slp, transpose_slp};
use fastmm::sms::{parse_sms, write_sms, write_sms_f64};
use fastmm::sparsify::{cob_quality, sparsify, verify_factorization, SparsifyOptions};
use fastmm::{load_scheme, validate_matmul, CoeffMatrix, HMRep, SchemeId, Slp, SlpOptions};

use crate::{CliError, Command, Emit, Mode, Outcome, SchemeArgs};

type CmdResult = Result<Outcome, CliError>;

/// Dispatches one subcommand.
pub fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Validate { scheme } => validate(&load(&scheme)?),
        Command::Gamma { scheme, p, q, csv } => gamma(&load(&scheme)?, p, q, csv),
        Command::Bounds { scheme, levels, k0, csv } => bounds(&load(&scheme)?, levels, k0, csv),
        Command::Orbit { scheme, restarts, budget, seed, snap, snap_tol, emit_sms } => {
            let opts = DescentOptions { restarts, max_evals: budget, seed, ..DescentOptions::default() };
            orbit(&load(&scheme)?, &opts, snap.then_some(snap_tol), emit_sms)
        }
        Command::Optimize { input, scheme, mode, emit, branch_budget } => {
            optimize(input.as_deref(), scheme.as_ref(), mode, emit, branch_budget)
        }
        Command::Transpose { input } => transpose(&input),
        Command::Sparsify { scheme, max_subsets } => {
            let mut opts = SparsifyOptions::default();
            if let Some(m) = max_subsets {
                opts.max_subsets = m;
            }
            sparsify_cmd(&load(&scheme)?, &opts)
        }
        Command::Mm { scheme, schedule, levels, size, dist, seed, altbasis, min_base } => {
            let plan = match (scheme, schedule, altbasis) {
                (Some(s), None, true) => BenchPlan::AltBasis(s),
                (None, None, true) => BenchPlan::AltBasis(SchemeId::AccurateSqrt3),
                (Some(s), None, false) => BenchPlan::Plain(s),
                (None, Some(list), false) => BenchPlan::Mixed(parse_schedule(&list)?),
                (None, None, false) => return Err(CliError::Usage("mm needs --scheme or --schedule".into())),
                _ => return Err(CliError::Usage("--altbasis cannot be combined with --schedule".into())),
            };
            let cfg = BenchConfig {
                plans: vec![plan],
                sizes: vec![parse_size(&size)?],
                dists: vec![dist],
                trials: 1,
                seed,
                min_base,
                levels,
            };
            mm(&cfg)
        }
        Command::Bench { plans, sizes, dists, trials, seed, min_base, levels, out } => {
            let mut cfg = BenchConfig::family_222(&[], seed);
            if !plans.is_empty() {
                cfg.plans = plans.iter().map(|p| p.parse()).collect::<fastmm::Result<_>>()?;
            }
            cfg.sizes = sizes.iter().map(|s| parse_size(s)).collect::<Result<_, _>>()?;
            cfg.dists = dists;
            cfg.trials = trials;
            cfg.min_base = min_base;
            cfg.levels = levels;
            bench(&cfg, out.as_deref())
        }
        Command::Catalog => catalog(),
    }
}

fn load(args: &SchemeArgs) -> Result<HMRep, CliError> {
    match (&args.scheme, &args.input) {
        (Some(id), None) => Ok(load_scheme(id)?),
        (None, Some(files)) => Ok(load_external(&files[0], &files[1], &files[2])?),
        _ => Err(CliError::Usage("exactly one of --scheme or --input L R P is required".into())),
    }
}

/// `N` (square) or `MxKxN`.
fn parse_size(s: &str) -> Result<(usize, usize, usize), CliError> {
    let bad = || CliError::Usage(format!("bad size {s:?} (expected N or MxKxN)"));
    let parts: Vec<usize> = s.trim().split('x').map(|t| t.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match parts[..] {
        [n] if n > 0 => Ok((n, n, n)),
        [m, k, n] if m > 0 && k > 0 && n > 0 => Ok((m, k, n)),
        _ => Err(bad()),
    }
}

fn parse_schedule(s: &str) -> Result<Vec<SchemeId>, CliError> {
    let ids = s.split(['>', ',']).map(|t| t.parse()).collect::<fastmm::Result<Vec<SchemeId>>>()?;
    if ids.is_empty() {
        return Err(CliError::Usage("empty schedule".into()));
    }
    Ok(ids)
}

/// Shortest round-trip decimal.
fn num(x: f64) -> String {
    format!("{x}")
}

fn validate(h: &HMRep) -> CmdResult {
    let rep = validate_matmul(h);
    if rep.valid {
        println!("valid");
        return Ok(Outcome::Ok);
    }
    println!("invalid: {} failing input pairs (max residual {:e})", rep.failures.len(), rep.max_residual);
    for f in rep.failures.iter().take(10) {
        println!("  A = e({},{}), B = e({},{}): residual {:e}", f.a, f.b, f.c, f.d, f.residual);
    }
    Ok(Outcome::CheckFailed)
}

fn gamma(h: &HMRep, p: Option<NormId>, q: Option<NormId>, csv: bool) -> CmdResult {
    if let (Some(p), Some(q)) = (p, q) {
        println!("{}", num(growth_factor(h, p, q)));
        return Ok(Outcome::Ok);
    }
    let pairs: Vec<(NormId, NormId)> =
        NormId::table_pairs().into_iter().filter(|(pp, qq)| p.is_none_or(|x| x == *pp) && q.is_none_or(|x| x == *qq)).collect();
    let t = norm_table(h);
    if csv {
        println!("scheme,p,q,gamma");
        for (pp, qq) in &pairs {
            println!("{},{pp},{qq},{}", h.name, num(growth_factor(h, *pp, *qq)));
        }
        println!("{},gamma2,,{}", h.name, num(t.gamma2));
    } else {
        println!("{}  <{},{},{}; {}>", h.name, h.dims().0, h.dims().1, h.dims().2, h.rank());
        for (pp, qq) in &pairs {
            println!("  gamma_({pp},{qq}) = {:>12.6}", growth_factor(h, *pp, *qq));
        }
        println!("  gamma2          = {:>12.6}", t.gamma2);
        println!("  ||.||_2,3 prod  = {:>12.6}", t.l23_product);
        println!("  Frobenius prod  = {:>12.6}", t.frobenius_product);
        println!("  Q0              = {:>12}", q0(h));
    }
    Ok(Outcome::Ok)
}

fn bounds(h: &HMRep, levels: u32, k0: usize, csv: bool) -> CmdResult {
    let fmt_lc = |x: Option<f64>, csv: bool| x.map_or(if csv { String::new() } else { "-".into() }, |v| {
        if csv {
            num(v)
        } else {
            format!("{v:.4}")
        }
    });
    if csv {
        println!("scheme,p,q,gamma,amp,q0,exponent,leading_coeff");
    } else {
        println!(
            "{:<22} {:>4} {:>4} {:>12} {:>10} {:>4} {:>9} {:>13} {:>14}",
            "scheme", "p", "q", "gamma", "amp", "q0", "exponent", "leading_coeff", format!("E({levels})")
        );
    }
    for (p, q) in NormId::table_pairs() {
        let r = error_bound(h, p, q, levels, k0)?;
        if csv {
            println!(
                "{},{p},{q},{},{},{},{},{}",
                h.name,
                num(r.gamma),
                num(r.amp),
                r.q0,
                num(r.exponent),
                fmt_lc(r.leading_coeff, true)
            );
        } else {
            println!(
                "{:<22} {:>4} {:>4} {:>12.4} {:>10.4} {:>4} {:>9.4} {:>13} {:>14.6e}",
                h.name,
                p.to_string(),
                q.to_string(),
                r.gamma,
                r.amp,
                r.q0,
                r.exponent,
                fmt_lc(r.leading_coeff, false),
                r.e_ell
            );
        }
    }
    Ok(Outcome::Ok)
}

fn orbit(h: &HMRep, opts: &DescentOptions, snap: Option<f64>, emit_sms: bool) -> CmdResult {
    let res = minimize_gamma2(h, opts)?;
    println!("scheme      {}", h.name);
    println!("start gamma2 {}", num(gamma2(h)));
    println!("best gamma2  {}", num(res.gamma2));
    println!("evaluations  {}", res.evaluations);
    println!("params       {}", res.point.params.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" "));
    if let Some(tol) = snap {
        let s = snap_point(h, &res.point, tol)?;
        let labels: Vec<String> = s.labels.iter().map(|l| l.clone().unwrap_or_else(|| "?".into())).collect();
        println!("snapped      {}", labels.join(" "));
        println!("snapped gamma2 {}", num(s.gamma2));
    }
    if emit_sms {
        for (name, m) in [("L", res.rep.lf()), ("R", res.rep.rf()), ("P", res.rep.pf())] {
            println!("# {name}");
            println!("{}", write_sms_f64(m));
        }
    }
    Ok(Outcome::Ok)
}

fn synthesize(m: &CoeffMatrix, mode: Mode, opts: &SlpOptions) -> Result<Slp, CliError> {
    Ok(match mode {
        Mode::Direct => cancellation_free(m, opts),
        Mode::Kernel => kernel_decompose(m, opts),
        Mode::Transpose => transpose_slp(&kernel_decompose(&m.transpose(), opts))?,
        Mode::Best => best_of_with_strategy(m, opts).0,
    })
}

/// Search options: an explicit branch budget, or the defaults scaled to
/// the number of products.
fn slp_options(branch_budget: Option<usize>, rank: usize) -> SlpOptions {
    match branch_budget {
        Some(b) => SlpOptions { branch_budget: b, ..SlpOptions::default() },
        None => SlpOptions::for_rank(rank),
    }
}

fn optimize(input: Option<&Path>, scheme: Option<&SchemeId>, mode: Mode, emit: Emit, budget: Option<usize>) -> CmdResult {
    match (input, scheme) {
        (Some(path), None) => {
            let m = parse_sms(&std::fs::read_to_string(path)?)?;
            let opts = slp_options(budget, m.rows().max(m.cols()));
            let s = synthesize(&m, mode, &opts)?;
            match emit {
                Emit::TextSlp => print!("{}", s.to_text()),
                Emit::CsvCounts => {
                    let (n, b) = (naive_slp(&m).counts(), s.counts());
                    println!("matrix,naive_adds,naive_mults,naive_div2,best_adds,best_mults,best_div2");
                    println!("{},{},{},{},{},{},{}", path.display(), n.adds, n.mults, n.div2, b.adds, b.mults, b.div2);
                }
            }
            Ok(Outcome::Ok)
        }
        (None, Some(id)) => {
            let h = load_scheme(id)?;
            optimize_scheme(&h, mode, emit, &slp_options(budget, h.rank()))
        }
        _ => Err(CliError::Usage("exactly one of --input or --scheme is required".into())),
    }
}

fn optimize_scheme(h: &HMRep, mode: Mode, emit: Emit, opts: &SlpOptions) -> CmdResult {
    if mode == Mode::Best {
        let rep = codegen_report(h, opts)?;
        match emit {
            Emit::CsvCounts => print!("{}", rep.to_csv(true)),
            Emit::TextSlp => {
                for row in &rep.rows {
                    println!("# matrix {} ({}: {} adds, {} mults)", row.matrix, row.strategy, row.best.adds, row.best.mults);
                    print!("{}", row.slp.to_text());
                }
            }
        }
        return Ok(Outcome::Ok);
    }
    let (l, r, p) = h.exact()?;
    if emit == Emit::CsvCounts {
        println!("scheme,matrix,naive_adds,naive_mults,naive_div2,best_adds,best_mults,best_div2");
    }
    for (name, m) in [("L", l), ("R", r), ("P", p)] {
        let s = synthesize(m, mode, opts)?;
        let (n, b) = (naive_slp(m).counts(), s.counts());
        match emit {
            Emit::CsvCounts => {
                println!("{},{name},{},{},{},{},{},{}", h.name, n.adds, n.mults, n.div2, b.adds, b.mults, b.div2)
            }
            Emit::TextSlp => {
                println!("# matrix {name} ({} adds, {} mults)", b.adds, b.mults);
                print!("{}", s.to_text());
            }
        }
    }
    Ok(Outcome::Ok)
}

fn transpose(input: &PathBuf) -> CmdResult {
    let s = Slp::parse(&std::fs::read_to_string(input)?)?;
    let t = transpose_slp(&s)?;
    let (cs, ct) = (s.counts(), t.counts());
    eprintln!("adds {} -> {}, mults {} -> {}", cs.adds, ct.adds, cs.mults, ct.mults);
    print!("{}", t.to_text());
    Ok(Outcome::Ok)
}

fn sparsify_cmd(h: &HMRep, opts: &SparsifyOptions) -> CmdResult {
    let c = sparsify(h, opts)?;
    for (name, m) in [("phi", &c.phi), ("psi", &c.psi), ("nu", &c.nu), ("Ls", &c.ls), ("Rs", &c.rs), ("Ps", &c.ps)] {
        println!("# {name}");
        println!("{}", write_sms(m, true)?);
    }
    let verified = verify_factorization(h, &c);
    let (la, ra, pa) = c.core_adds();
    println!("# quality");
    println!("core additions   {} (L {la}, R {ra}, P {pa})", c.core_total_adds());
    println!("ternary core     {}", c.ternary);
    println!("core gamma2      {}", num(c.core_gamma2()));
    for (p, q) in NormId::table_pairs() {
        let qual = cob_quality(&c, p, q)?;
        println!("cob factor ({p},{q}) {}  gamma_mmab {}", num(qual.factor), num(qual.gamma_mmab));
    }
    println!("verified         {verified}");
    Ok(if verified { Outcome::Ok } else { Outcome::CheckFailed })
}

fn mm(cfg: &BenchConfig) -> CmdResult {
    let out = run_bench(cfg)?;
    if let Some(s) = out.skipped.first() {
        return Err(CliError::Usage(format!("{}: {}", s.scheme, s.reason)));
    }
    let r = &out.records[0];
    println!("scheme   {} ({})", r.scheme, r.plan);
    println!("size     {}x{}x{}", r.size.0, r.size.1, r.size.2);
    println!("levels   {}", r.levels);
    println!("dist     {}", r.dist);
    println!("err_max  {:e}", r.err_max);
    println!("rel_err  {:e}", r.rel_err);
    println!("bound    {:e}", r.bound);
    println!("ratio    {:e}", r.ratio);
    Ok(if r.ratio <= 1.0 {
        Outcome::Ok
    } else {
        println!("bound violated");
        Outcome::CheckFailed
    })
}

fn bench(cfg: &BenchConfig, out: Option<&Path>) -> CmdResult {
    let res = run_bench(cfg)?;
    let csv = res.to_csv();
    match out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            print!("{}", res.summary_text());
            println!("wrote {} records to {}", res.records.len(), path.display());
        }
        None => {
            print!("{csv}");
            eprint!("{}", res.summary_text());
        }
    }
    let v = res.violations();
    if v.is_empty() {
        Ok(Outcome::Ok)
    } else {
        eprintln!("{} records exceed their error bound", v.len());
        Ok(Outcome::CheckFailed)
    }
}

fn catalog() -> CmdResult {
    println!("{:<22} {:>9} {:>5} {:>6} {:>6} {:>10} {:>4}", "scheme", "dims", "rank", "exact", "matmul", "gamma2", "q0");
    for id in SchemeId::bundled() {
        let h = load_scheme(&id)?;
        let (m, k, n) = h.dims();
        println!(
            "{:<22} {:>9} {:>5} {:>6} {:>6} {:>10.4} {:>4}",
            id.short_name(),
            format!("{m}x{k}x{n}"),
            h.rank(),
            h.is_exact(),
            validate_matmul(&h).valid,
            gamma2(&h),
            q0(&h)
        );
    }
    Ok(Outcome::Ok)
}
