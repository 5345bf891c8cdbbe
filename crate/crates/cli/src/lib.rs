//! The `iq` command line: quiver validation, algebra and module inspection, Hall products,
//! relation suites and basis checks, all reporting JSON.

pub mod cache;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use iqhall::boundalg::{path_algebra, regular_projective};
use iqhall::dynkin_bases::{
    monomial_basis_check_in, pbw_basis_check_in, BasisReport, KqDynkin, WordChoice,
};
use iqhall::hall_engine::{
    generic_structure_constants_in, generic_to_json, GenericCombination, GenericFactor,
    HallContext, ReducedParams,
};
use iqhall::iquiver::{diagonal_iquiver, validate_iquiver};
use iqhall::repmod::{
    enumerate_reps, is_indecomposable, make_generalized_simple, make_simple, Caps, Rep,
};
use iqhall::scalars::{int, parse_rational, LaurentV, QSqrt};
use iqhall::verify_qsp::{
    bridgeland_suite_in, euler_central_suite_in, rank2_identities, reduced_suite_in,
    serre_suite_in, VerificationReport,
};
use iqhall::{iquiver_algebra, CapsConfig, Config, Error, IQuiver, RawQuiver};

use crate::cache::{write_atomic, Cache};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "iq",
    version,
    about = "Hall algebras of iquiver algebras over prime fields"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalOpts {
    /// Cache directory (overrides IQHALL_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Largest Hom dimension enumerated.
    #[arg(long, global = true)]
    pub hom_cap: Option<usize>,
    /// Largest Ext^1 dimension enumerated.
    #[arg(long, global = true)]
    pub ext_cap: Option<usize>,
    /// Largest End dimension enumerated.
    #[arg(long, global = true)]
    pub end_cap: Option<usize>,
    /// Submodules examined per filtration count.
    #[arg(long, global = true)]
    pub submodule_budget: Option<usize>,
    /// Starting degree bound for Laurent fits.
    #[arg(long, global = true)]
    pub degree_bound: Option<i64>,
    /// Largest degree bound a Laurent fit may escalate to.
    #[arg(long, global = true)]
    pub laurent_cap: Option<i64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a quiver file and print its normalized form.
    Validate { quiver: PathBuf },
    /// Basis and indecomposable projectives of the iquiver algebra.
    Algebra {
        quiver: PathBuf,
        /// Use the path algebra kQ instead.
        #[arg(long)]
        kq: bool,
    },
    /// Enumerate modules.
    #[command(subcommand)]
    Modules(ModulesCmd),
    /// Products in the Hall algebra.
    #[command(subcommand)]
    Hall(HallCmd),
    /// Check relation suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Monomial and PBW bases.
    #[command(subcommand)]
    Bases(BasesCmd),
}

#[derive(Subcommand, Debug)]
pub enum ModulesCmd {
    /// Iso-classes of all modules with a given dimension vector.
    Enumerate {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        q: u64,
        /// `d1,d2,...` in vertex order or `v=d,...`.
        #[arg(long)]
        dims: String,
        /// Largest number of matrix tuples to run through.
        #[arg(long, default_value_t = 1 << 20)]
        budget: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum HallCmd {
    /// Product of two modules in the Hall basis. Modules are `S:v`, `E:v`, `P:v`, `M:d1,d2,..`
    /// (indecomposable kQ-module) or a module JSON file.
    Mul {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Laurent structure constants fitted over several primes.
    Generic {
        #[arg(long)]
        quiver: PathBuf,
        /// Fitting primes [default: 2,3,5].
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
        #[arg(long, default_value_t = 7)]
        check: u64,
        /// Product of simples, e.g. `2,1,1`.
        #[arg(long, conflicts_with = "serre", required_unless_present = "serre")]
        word: Option<String>,
        /// Serre combination in the simples at vertices `i,j`.
        #[arg(long)]
        serre: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Serre relations between every pair of generators.
    Serre {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        q: u64,
    },
    /// Rank-two identities over the built-in A2 and A3 iquivers.
    Rank2 {
        #[arg(long)]
        q: u64,
    },
    /// Quantum group relations through the diagonal iquiver of the given quiver.
    Bridgeland {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        q: u64,
    },
    /// Euler form identities and centrality of the torus.
    Euler {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Relations after specializing the torus with `--sigma`.
    Reduced {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        q: u64,
        /// `v=value,...`; unlisted orbits get 1.
        #[arg(long)]
        sigma: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum BasesCmd {
    /// Monomials along distinguished words.
    Monomial {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        cap: usize,
        /// Pick a random distinguished word per partition instead of the first.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// PBW monomials in the root modules.
    Pbw {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        cap: usize,
        /// Root indices in the order of the PBW product; defaults to the root table order.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
    },
}

/// Outcome of a command: the result object and whether it counts as a pass.
struct Outcome {
    result: Value,
    pass: bool,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome { result, pass: true }
    }
}

struct Env {
    config: Config,
    cache: Cache,
}

impl Env {
    fn caps(&self) -> Caps {
        self.config.caps.module_caps()
    }

    fn context(&self, iq: &IQuiver, p: u64) -> iqhall::Result<HallContext> {
        check_prime(p)?;
        self.cache.context(iq, p, self.caps())
    }

    fn persist(&self, ctx: &HallContext) {
        if let Err(e) = self.cache.store(ctx) {
            eprintln!("iq: could not write cache: {e}");
        }
    }
}

fn check_prime(p: u64) -> iqhall::Result<()> {
    if iqhall::linalg_ff::is_prime(p) {
        Ok(())
    } else {
        Err(Error::Input(format!("{p} is not prime")))
    }
}

fn build_config(g: &GlobalOpts, cache: &Cache) -> Config {
    let d = CapsConfig::default();
    Config {
        cache_dir: cache.root().map(Path::to_path_buf),
        caps: CapsConfig {
            hom_dim: g.hom_cap.unwrap_or(d.hom_dim),
            ext_dim: g.ext_cap.unwrap_or(d.ext_dim),
            end_dim: g.end_cap.unwrap_or(d.end_dim),
            submodule_budget: g.submodule_budget.unwrap_or(d.submodule_budget),
            rewrite_paths: d.rewrite_paths,
            degree_bound: g.degree_bound.unwrap_or(d.degree_bound),
            laurent_bound_cap: g.laurent_cap.unwrap_or(d.laurent_bound_cap),
        },
        threads: g.threads,
        ..Config::default()
    }
}

fn validate_caps(c: &CapsConfig) -> iqhall::Result<()> {
    let positive = [
        c.hom_dim,
        c.ext_dim,
        c.end_dim,
        c.submodule_budget,
        c.rewrite_paths,
    ]
    .iter()
    .all(|&x| x > 0)
        && c.degree_bound > 0
        && c.laurent_bound_cap > 0;
    if positive {
        Ok(())
    } else {
        Err(Error::Input("caps must be positive".into()))
    }
}

fn envelope(config: &Config, key: &str, body: Value) -> Value {
    json!({
        "tool": "iq",
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(config).expect("config serializes"),
        key: body,
    })
}

fn emit(v: &Value, out: Option<&Path>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    text.push('\n');
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cache = Cache::resolve(cli.global.cache_dir.clone(), cli.global.no_cache);
    let config = build_config(&cli.global, &cache);
    if config.threads > 0 {
        // only the first call in a process can size the global pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }
    let env = Env { config, cache };
    let out = cli.global.out.as_deref();
    let res = validate_caps(&env.config.caps).and_then(|_| dispatch(&env, &cli.command));
    let (doc, code) = match res {
        Ok(o) => {
            let code = if o.pass { EXIT_OK } else { EXIT_FAIL };
            (envelope(&env.config, "result", o.result), code)
        }
        Err(e) => {
            eprintln!("iq: {e}");
            let err =
                json!({"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()});
            (envelope(&env.config, "error", err), e.exit_code())
        }
    };
    if let Err(e) = emit(&doc, out) {
        eprintln!("iq: cannot write output: {e}");
        return EXIT_INPUT;
    }
    code
}

fn read_quiver(path: &Path) -> iqhall::Result<IQuiver> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    validate_iquiver(&RawQuiver::from_json_str(&text)?)
}

fn dispatch(env: &Env, cmd: &Command) -> iqhall::Result<Outcome> {
    match cmd {
        Command::Validate { quiver } => {
            let iq = read_quiver(quiver)?;
            let mut v = iq.to_json();
            v["dynkin_type"] = json!(iq.dynkin_type());
            v["split"] = json!(iq.is_split());
            Ok(Outcome::ok(v))
        }
        Command::Algebra { quiver, kq } => {
            algebra_report(&read_quiver(quiver)?, *kq).map(Outcome::ok)
        }
        Command::Modules(ModulesCmd::Enumerate {
            quiver,
            q,
            dims,
            budget,
        }) => enumerate(env, &read_quiver(quiver)?, *q, dims, *budget).map(Outcome::ok),
        Command::Hall(HallCmd::Mul {
            quiver,
            q,
            left,
            right,
        }) => {
            let iq = read_quiver(quiver)?;
            let ctx = env.context(&iq, *q)?;
            let (m, n) = (module_spec(&ctx, left)?, module_spec(&ctx, right)?);
            let prod = ctx.module_product(&m, &n)?;
            env.persist(&ctx);
            Ok(Outcome::ok(json!({
                "left": m.to_json(),
                "right": n.to_json(),
                "product": prod.to_json(),
                "roots": ctx.positive_roots(),
            })))
        }
        Command::Hall(HallCmd::Generic {
            quiver,
            primes,
            check,
            word,
            serre,
        }) => {
            let iq = read_quiver(quiver)?;
            let primes = primes.clone().unwrap_or_else(|| env.config.primes.clone());
            let comb = match (word, serre) {
                (Some(w), _) => word_combination(&iq, w)?,
                (None, Some(s)) => serre_combination(&iq, s)?,
                (None, None) => return Err(Error::Input("give --word or --serre".into())),
            };
            generic(env, &iq, &primes, *check, &comb).map(Outcome::ok)
        }
        Command::Verify(v) => verify(env, v),
        Command::Bases(b) => bases(env, b),
    }
}

fn algebra_report(iq: &IQuiver, kq: bool) -> iqhall::Result<Value> {
    let alg = if kq {
        path_algebra(iq)?
    } else {
        iquiver_algebra(iq)?
    };
    let graded = alg.graded_decomposition();
    let basis: Vec<String> = (0..alg.dim()).map(|b| alg.path_string(b)).collect();
    let projectives: BTreeMap<String, BTreeMap<String, usize>> = (0..alg.n())
        .map(|i| {
            let p = regular_projective(&alg, 2, i);
            let dims = (0..alg.n())
                .map(|j| (iq.vertices[j].clone(), p.dims[j]))
                .collect();
            (iq.vertices[i].clone(), dims)
        })
        .collect();
    Ok(json!({
        "hash": alg.hash,
        "dim": alg.dim(),
        "paths_of_q": iq.num_paths(),
        "degree0_dim": graded.degree0_basis.len(),
        "degree1_dim": graded.degree1_basis.len(),
        "basis": basis,
        "projectives": projectives,
    }))
}

fn parse_dims(iq: &IQuiver, s: &str) -> iqhall::Result<Vec<usize>> {
    let bad = || Error::Input(format!("cannot read dimension vector {s:?}"));
    let parts: Vec<&str> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect();
    if parts.iter().all(|p| p.contains('=')) && !parts.is_empty() {
        let mut d = vec![0; iq.n()];
        for p in parts {
            let (v, x) = p.split_once('=').ok_or_else(bad)?;
            d[iq.vertex(v)?] = x.parse().map_err(|_| bad())?;
        }
        Ok(d)
    } else {
        let d: Vec<usize> = parts
            .iter()
            .map(|p| p.parse().map_err(|_| bad()))
            .collect::<iqhall::Result<_>>()?;
        if d.len() != iq.n() {
            return Err(Error::Input(format!(
                "expected {} entries in {s:?}",
                iq.n()
            )));
        }
        Ok(d)
    }
}

fn enumerate(env: &Env, iq: &IQuiver, q: u64, dims: &str, budget: u64) -> iqhall::Result<Value> {
    let ctx = env.context(iq, q)?;
    let dims = parse_dims(iq, dims)?;
    let reps = enumerate_reps(&ctx.alg, q, &dims, budget)?;
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for m in &reps {
        *counts.entry(ctx.registry.intern(m)?.0).or_default() += 1;
    }
    let classes: Vec<Value> = counts
        .iter()
        .map(|(&id, &count)| {
            let m = ctx.registry.get(iqhall::ModuleId(id));
            let p = m.predicates();
            Ok(json!({
                "id": id,
                "representations": count,
                "module": m.to_json(),
                "end_dim": iqhall::repmod::end_dim(&m),
                "indecomposable": is_indecomposable(&m, env.caps().end_dim)?,
                "is_gproj": p.is_gproj,
                "is_p_leq1": p.is_p_leq1,
                "is_kq_module": p.is_kq_module,
            }))
        })
        .collect::<iqhall::Result<_>>()?;
    env.persist(&ctx);
    Ok(json!({"dims": dims, "representations": reps.len(), "classes": classes}))
}

fn module_spec(ctx: &HallContext, spec: &str) -> iqhall::Result<Rep> {
    let vertex = |v: &str| ctx.iq.vertex(v);
    if let Some(v) = spec.strip_prefix("S:") {
        return Ok(make_simple(&ctx.alg, ctx.p, vertex(v)?));
    }
    if let Some(v) = spec.strip_prefix("E:") {
        return Ok(make_generalized_simple(&ctx.alg, ctx.p, vertex(v)?));
    }
    if let Some(v) = spec.strip_prefix("P:") {
        return Ok(regular_projective(&ctx.alg, ctx.p, vertex(v)?));
    }
    if let Some(d) = spec.strip_prefix("M:") {
        let beta = parse_dims(&ctx.iq, d)?;
        return ctx
            .root_module(&beta)
            .ok_or_else(|| Error::Input(format!("{d} is not a positive root")));
    }
    let path = spec.strip_prefix('@').unwrap_or(spec);
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{path}: {e}")))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Input(format!("{path}: {e}")))?;
    let m = Rep::from_json(&ctx.alg, &v)?;
    if m.p != ctx.p {
        return Err(Error::MismatchedField(m.p, ctx.p));
    }
    Ok(m)
}

fn word_combination(iq: &IQuiver, w: &str) -> iqhall::Result<GenericCombination> {
    let factors = w
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|v| GenericFactor::simple(iq, iq.vertex(v)?))
        .collect::<iqhall::Result<Vec<_>>>()?;
    Ok(vec![(LaurentV::one(), factors)])
}

/// Gaussian binomial in v, by the recurrence on n.
fn qbinom(n: i64, r: i64) -> LaurentV {
    if r < 0 || r > n {
        return LaurentV::zero();
    }
    if r == 0 || r == n {
        return LaurentV::one();
    }
    let a = &LaurentV::monomial(r, int(1)) * &qbinom(n - 1, r);
    let b = &LaurentV::monomial(-(n - r), int(1)) * &qbinom(n - 1, r - 1);
    &a + &b
}

/// Σ_r (−1)^r [1−c_ij choose r] S_i^{1−c_ij−r} S_j S_i^r.
fn serre_combination(iq: &IQuiver, s: &str) -> iqhall::Result<GenericCombination> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Input(format!("--serre wants i,j, got {s:?}")))?;
    let (i, j) = (iq.vertex(a.trim())?, iq.vertex(b.trim())?);
    if i == j {
        return Err(Error::Input("--serre needs two distinct vertices".into()));
    }
    let n = 1 - iq.cartan_entry(i, j);
    let (si, sj) = (GenericFactor::simple(iq, i)?, GenericFactor::simple(iq, j)?);
    Ok((0..=n)
        .map(|r| {
            let mut factors = vec![si.clone(); (n - r) as usize];
            factors.push(sj.clone());
            factors.extend(std::iter::repeat_n(si.clone(), r as usize));
            let c = qbinom(n, r);
            (
                if r % 2 == 1 {
                    &LaurentV::zero() - &c
                } else {
                    c
                },
                factors,
            )
        })
        .collect())
}

fn generic(
    env: &Env,
    iq: &IQuiver,
    primes: &[u64],
    check: u64,
    comb: &GenericCombination,
) -> iqhall::Result<Value> {
    if primes.contains(&check) {
        return Err(Error::Input(
            "the check prime must not be among the fitting primes".into(),
        ));
    }
    let mut all = primes.to_vec();
    all.push(check);
    let ctxs: Vec<HallContext> = all
        .iter()
        .map(|&p| env.context(iq, p))
        .collect::<iqhall::Result<_>>()?;
    let refs: Vec<&HallContext> = ctxs.iter().collect();
    let caps = &env.config.caps;
    let fitted =
        generic_structure_constants_in(&refs, comb, caps.degree_bound, caps.laurent_bound_cap)?;
    for c in &ctxs {
        env.persist(c);
    }
    let mut v = generic_to_json(&fitted);
    v["primes"] = json!(primes);
    v["check"] = json!(check);
    v["roots"] = json!(iq.root_table()?.positive_roots);
    Ok(v)
}

fn parse_sigma(iq: &IQuiver, q: u64, s: Option<&str>) -> iqhall::Result<ReducedParams> {
    let mut sigma: Vec<Option<QSqrt>> = vec![None; iq.n()];
    for part in s
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
    {
        let (v, x) = part
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("--sigma wants v=value, got {part:?}")))?;
        sigma[iq.vertex(v.trim())?] = Some(QSqrt::from_rational(parse_rational(x.trim())?, q));
    }
    let full: Vec<QSqrt> = (0..iq.n())
        .map(|i| {
            sigma[i]
                .clone()
                .or_else(|| sigma[iq.tau[i]].clone())
                .unwrap_or_else(|| QSqrt::one(q))
        })
        .collect();
    ReducedParams::new(iq, full)
}

fn report(r: VerificationReport) -> Outcome {
    Outcome {
        pass: r.pass,
        result: r.to_json(),
    }
}

fn verify(env: &Env, cmd: &VerifyCmd) -> iqhall::Result<Outcome> {
    match cmd {
        VerifyCmd::Rank2 { q } => {
            check_prime(*q)?;
            Ok(report(rank2_identities(*q)?))
        }
        VerifyCmd::Serre { quiver, q } => {
            let ctx = env.context(&read_quiver(quiver)?, *q)?;
            let r = serre_suite_in(&ctx)?;
            env.persist(&ctx);
            Ok(report(r))
        }
        VerifyCmd::Bridgeland { quiver, q } => {
            let base = read_quiver(quiver)?;
            let ctx = env.context(&diagonal_iquiver(&base)?, *q)?;
            let r = bridgeland_suite_in(&base, &ctx)?;
            env.persist(&ctx);
            Ok(report(r))
        }
        VerifyCmd::Euler { quiver, q, samples } => {
            let ctx = env.context(&read_quiver(quiver)?, *q)?;
            let r = euler_central_suite_in(&ctx, *samples)?;
            env.persist(&ctx);
            Ok(report(r))
        }
        VerifyCmd::Reduced { quiver, q, sigma } => {
            let iq = read_quiver(quiver)?;
            let ctx = env.context(&iq, *q)?;
            let r = reduced_suite_in(&ctx, &parse_sigma(&iq, *q, sigma.as_deref())?)?;
            env.persist(&ctx);
            Ok(report(r))
        }
    }
}

fn basis_outcome(r: BasisReport) -> Outcome {
    Outcome {
        pass: r.pass,
        result: r.to_json(),
    }
}

fn bases(env: &Env, cmd: &BasesCmd) -> iqhall::Result<Outcome> {
    let (quiver, q, cap) = match cmd {
        BasesCmd::Monomial { quiver, q, cap, .. } | BasesCmd::Pbw { quiver, q, cap, .. } => {
            (quiver, *q, *cap)
        }
    };
    let iq = read_quiver(quiver)?;
    let ctx = env.context(&iq, q)?;
    let mut kq = KqDynkin::new(&iq, q)?;
    kq.submodule_budget = env.config.caps.submodule_budget;
    let report = match cmd {
        BasesCmd::Monomial { seed, .. } => {
            let choice = seed.map_or(WordChoice::First, WordChoice::Random);
            monomial_basis_check_in(&ctx, &kq, cap, choice)
        }
        BasesCmd::Pbw { order, .. } => {
            let order = match order {
                Some(o) => o.clone(),
                None => (0..kq.roots.roots.len()).collect(),
            };
            pbw_basis_check_in(&ctx, &kq, &order, cap)
        }
    }?;
    env.persist(&ctx);
    Ok(basis_outcome(report))
}
