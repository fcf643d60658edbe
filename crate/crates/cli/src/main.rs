//! `nilfourier`: command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 precondition violation, 3 unsupported
//! case, 4 numeric failure, 5 i/o failure.

mod parse;

use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use nilfourier::forms::eigenproduct_minpoly;
use nilfourier::grid::{e, gowers_interval_norm};
use nilfourier::io::{load_field, parse_element};
use nilfourier::katai::{build_prime_set, katai_terms, tk_statistic, PrimeSet};
use nilfourier::kernels::{decompose, least_prime_above, phi_kernel, structure_report, KernelSpec};
use nilfourier::multfn::{aperiodicity_stat, default_catalog, truncate, MultFnSpec};
use nilfourier::nilseq::{char_search, equid_correlation, leibman_witness, orbit_csv, EquidCatalog, Flavor, OrbitModel};
use nilfourier::numfield::{Field, FieldElement};
use nilfourier::partreg::{coloring_search, coord_strings, folner_ratio, folner_set, mult_average, verify_identity};
use nilfourier::units::{find_units, regularize};
use nilfourier::{Error, ErrorClass, Result};

#[derive(Parser)]
#[command(name = "nilfourier", version, about = "Number-field Gowers norms, kernels and nilsequence diagnostics")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Output format. Commands without a table of their own write `key,value` rows with
    /// nested keys joined by dots.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct FieldArg {
    /// Builtin field (Q, Qi, Qsqrt2, Qsqrt-3, Qsqrt2sqrt3) or a field-definition file.
    #[arg(long, default_value = "Q")]
    field: String,
}

#[derive(Args)]
struct FnArg {
    /// Multiplicative function: mobius, liouville, one, random (phases from --seed),
    /// legendre:P, or a function-spec file.
    #[arg(long = "fn", default_value = "mobius")]
    function: String,
}

#[derive(Args)]
struct SeqArgs {
    /// Coefficient term `J:V`: multi-index J (comma separated) and coefficient vector V.
    /// Exact when every entry is an integer or a fraction p/q.
    #[arg(long = "coef", required = true)]
    coefs: Vec<String>,
    /// Read coefficients in the monomial basis n^J instead of the binomial basis C(n, J).
    #[arg(long)]
    monomial: bool,
    /// Degree; defaults to the largest |J|.
    #[arg(long)]
    degree: Option<u32>,
}

#[derive(Args)]
struct KTypeArgs {
    /// Builtin family: gerardin or gerardin-quartic.
    #[arg(long)]
    preset: Option<String>,
    /// Quadratic form a,b,c,d,e,f for ax²+by²+cz²+dxy+exz+fyz.
    #[arg(long, allow_hyphen_values = true)]
    quad: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Torus,
    Heisenberg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Binomial,
    Monomial,
}

#[derive(Clone, Copy, ValueEnum)]
enum Part {
    Structured,
    Uniform,
}

#[derive(Subcommand)]
enum Command {
    /// Degree, defining polynomial, discriminant, signature and unit rank.
    #[command(after_help = "CSV columns: key,value")]
    FieldInfo(FieldArg),
    /// Value histogram of a multiplicative function over the nonzero points of [-B, B]^D.
    #[command(after_help = "CSV columns: value,count")]
    Mobius {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        function: FnArg,
        /// Box radius B.
        #[arg(long = "box")]
        radius: i64,
    },
    /// Largest progression average over the default catalog on [-N, N]^D.
    #[command(after_help = "CSV columns: key,value")]
    Aperiodicity {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        function: FnArg,
        #[arg(long = "N")]
        n: i64,
    },
    /// Normalized U^d norm of the function on {1..N}^D, computed in Z_{N*}^D.
    #[command(after_help = "CSV columns: key,value")]
    Gowers {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        function: FnArg,
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "d", default_value_t = 2)]
        d: u32,
        /// Ambient modulus N*; defaults to 2N+1.
        #[arg(long = "nstar")]
        n_star: Option<usize>,
    },
    /// Splits the truncated function into structured and uniform parts with a kernel.
    #[command(after_help = "CSV columns: index0,…,index{D-1},re,im for the part chosen by --part")]
    Decompose {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        function: FnArg,
        #[arg(long = "N")]
        n: usize,
        /// Kernel width m.
        #[arg(long, default_value_t = 8)]
        width: usize,
        /// Kernel dilation Q.
        #[arg(long, default_value_t = 12)]
        dilation: u64,
        /// Grid modulus; defaults to the least prime above 3N.
        #[arg(long)]
        modulus: Option<usize>,
        /// Modulus used for the reported shift and spectral bounds; defaults to the dilation.
        #[arg(long)]
        q_report: Option<u64>,
        /// Gowers degree for the reported norms.
        #[arg(long = "d", default_value_t = 2)]
        d: u32,
        #[arg(long, value_enum, default_value_t = Part::Structured)]
        part: Part,
    },
    /// Katai sum S(N) and cross term C_P(N) against the phase e(ξ·n).
    #[command(after_help = "CSV columns: key,value")]
    Katai {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        function: FnArg,
        /// Number of primes in the set.
        #[arg(long, default_value_t = 3)]
        count: usize,
        /// Generator search height.
        #[arg(long, default_value_t = 10)]
        height: u32,
        #[arg(long = "N")]
        n: u64,
        /// Frequency vector ξ, one entry per coordinate.
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
    },
    /// Turán–Kubilius statistic for a prime set.
    #[command(after_help = "CSV columns: key,value")]
    Tk {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        height: u32,
        #[arg(long = "N")]
        n: u64,
    },
    /// Largest correlation of the orbit with test functions along progressions.
    #[command(after_help = "CSV columns: n0,…,n{D-1},c0,… (reduced orbit coordinates)")]
    Equid {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, value_enum, default_value_t = ModelArg::Torus)]
        model: ModelArg,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 3)]
        xi_max: i64,
        #[arg(long, default_value_t = 3)]
        max_step: i64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
    },
    /// Horizontal character with the smallest smooth norm, with an optional progression
    /// witness when that norm is at most --c0.
    #[command(after_help = "CSV columns: key,value")]
    Charsearch {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long = "N")]
        n: u64,
        /// Bound on Σ|ℓ_i|.
        #[arg(long = "c", default_value_t = 10)]
        bound: u64,
        #[arg(long, value_enum, default_value_t = FlavorArg::Binomial)]
        flavor: FlavorArg,
        #[arg(long)]
        c0: Option<f64>,
    },
    /// Minimal polynomial of the eigenvalue products of the multiplication matrix of p/q.
    #[command(after_help = "CSV columns: key,value")]
    Forms {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        /// Denominator; defaults to 1.
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        #[arg(long, default_value_t = 2)]
        m_max: usize,
    },
    /// Balances an element by units so its conjugates have comparable size.
    #[command(after_help = "CSV columns: key,value")]
    Regularize {
        #[command(flatten)]
        field: FieldArg,
        /// Element, e.g. `2,1`, `2+1w^1`, or `2+1w^1 ^4` for a power.
        #[arg(long, num_args = 1.., required = true, allow_hyphen_values = true)]
        elem: Vec<String>,
        /// Unit search height.
        #[arg(long, default_value_t = 2)]
        height: u32,
    },
    /// Checks the parametrization identity symbolically and at random points.
    #[command(after_help = "CSV columns: key,value")]
    PartregVerify {
        #[command(flatten)]
        spec: KTypeArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Searches for a monochromatic solution under a coloring.
    #[command(after_help = "CSV columns: key,value")]
    PartregSearch {
        #[command(flatten)]
        spec: KTypeArgs,
        /// constant, parity, residue:ELEM, or table:PATH.
        #[arg(long, default_value = "parity")]
        coloring: String,
        #[arg(long, default_value_t = 3)]
        height: u32,
    },
    /// Multiplicative Følner set built from the first N split primes, with the ratio for --a.
    #[command(after_help = "CSV columns: c0,…,c{D-1} (one element per row)")]
    Folner {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 3)]
        height: i64,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
    },
    /// Average of ∏χ(m + aᵢn)·∏conj χ(m + a′ᵢn) over m, n in [N]^D.
    #[command(after_help = "CSV columns: key,value")]
    MultAverage {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        function: FnArg,
        /// Shifts aᵢ separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        shifts: String,
        /// Shifts a′ᵢ separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        shifts_prime: String,
        #[arg(long = "N")]
        n: i64,
    },
}

/// A command's result: JSON, and a table when the command has one.
struct Output {
    json: Value,
    csv: Option<Vec<Vec<String>>>,
}

impl Output {
    fn json(json: Value) -> Self {
        Output { json, csv: None }
    }
}

fn field_of(arg: &FieldArg) -> Result<Field> {
    load_field(&arg.field)
}

fn prime_set_json(set: &PrimeSet) -> Value {
    json!({
        "elements": set.elements.iter().map(coord_strings).collect::<Vec<_>>(),
        "norms": set.norms().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "a_p": set.a_p.to_string(),
        "achieved_c": set.achieved_c,
        "skipped": set.skipped,
    })
}

fn interval_values(chi: &MultFnSpec, n: usize) -> Result<Vec<Complex64>> {
    use rayon::prelude::*;
    let d = chi.field().degree();
    let total = n.checked_pow(d as u32).ok_or_else(|| Error::Precondition("box too large".into()))?;
    (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut c = vec![0i128; d];
            let mut r = idx;
            for x in c.iter_mut().rev() {
                *x = (r % n) as i128 + 1;
                r /= n;
            }
            chi.eval_int(&c)
        })
        .collect()
}

fn value_key(v: Complex64) -> String {
    if v.im == 0.0 {
        format!("{}", v.re)
    } else {
        format!("{}{:+}i", v.re, v.im)
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    let seed = cli.seed;
    Ok(match &cli.command {
        Command::FieldInfo(f) => {
            let k = field_of(f)?;
            let (r1, r2) = k.signature();
            Output::json(json!({
                "label": k.label(),
                "degree": k.degree(),
                "defining_poly": k.defining_poly(),
                "discriminant": k.discriminant().to_string(),
                "signature": [r1, r2],
                "unit_rank": k.unit_rank(),
            }))
        }
        Command::Mobius { field, function, radius } => {
            let k = field_of(field)?;
            let chi = parse::multfn(&k, &function.function, seed)?;
            if *radius < 0 {
                return Err(Error::Precondition("box radius must be nonnegative".into()));
            }
            let values = chi.box_values(*radius)?;
            let center = values.len() / 2;
            let mut hist = std::collections::BTreeMap::new();
            if function.function == "mobius" || function.function == "liouville" {
                for key in ["-1", "0", "1"] {
                    hist.insert(key.to_string(), 0u64);
                }
            }
            for (i, v) in values.iter().enumerate() {
                if i != center {
                    *hist.entry(value_key(*v)).or_insert(0) += 1;
                }
            }
            let rows = hist.iter().map(|(k, c)| vec![k.clone(), c.to_string()]);
            Output {
                json: json!({
                    "field": k.label(),
                    "fn": function.function,
                    "box": radius,
                    "points": values.len() - 1,
                    "histogram": hist,
                }),
                csv: Some(std::iter::once(vec!["value".into(), "count".into()]).chain(rows).collect()),
            }
        }
        Command::Aperiodicity { field, function, n } => {
            let k = field_of(field)?;
            let chi = parse::multfn(&k, &function.function, seed)?;
            let catalog = default_catalog(k.degree(), *n);
            let stat = aperiodicity_stat(&chi, *n, &catalog)?;
            Output::json(json!({ "field": k.label(), "fn": function.function, "N": n, "progressions": catalog.len(), "stat": stat }))
        }
        Command::Gowers { field, function, n, d, n_star } => {
            let k = field_of(field)?;
            let chi = parse::multfn(&k, &function.function, seed)?;
            let n_star = n_star.unwrap_or(2 * n + 1);
            let values = interval_values(&chi, *n)?;
            let norm = gowers_interval_norm(&values, k.degree(), *n, *d, n_star)?;
            Output::json(json!({ "field": k.label(), "fn": function.function, "N": n, "d": d, "n_star": n_star, "norm": norm }))
        }
        Command::Decompose { field, function, n, width, dilation, modulus, q_report, d, part } => {
            let k = field_of(field)?;
            let chi = parse::multfn(&k, &function.function, seed)?;
            let modulus = modulus.unwrap_or_else(|| least_prime_above(3 * *n as u64) as usize);
            let spec = KernelSpec::new(modulus, *width, *dilation, k.degree())?;
            let grid = truncate(&chi, *n, modulus)?;
            let report = structure_report(&grid, &spec, q_report.unwrap_or(*dilation), *d)?;
            let csv = if cli.format == Format::Csv {
                let split = decompose(&grid, &phi_kernel(&spec)?)?;
                let g = match part {
                    Part::Structured => split.structured,
                    Part::Uniform => split.uniform,
                };
                let header: Vec<String> = (0..g.dim()).map(|i| format!("index{i}")).chain(["re".into(), "im".into()]).collect();
                let rows = (0..g.len()).map(|i| {
                    let v = g.values()[i];
                    g.coords_of(i).iter().map(ToString::to_string).chain([v.re.to_string(), v.im.to_string()]).collect()
                });
                Some(std::iter::once(header).chain(rows).collect())
            } else {
                None
            };
            Output { json: serde_json::to_value(&report).expect("report serializes"), csv }
        }
        Command::Katai { field, function, count, height, n, xi } => {
            let k = field_of(field)?;
            let chi = parse::multfn(&k, &function.function, seed)?;
            let xi = parse::floats(xi)?;
            if xi.len() != k.degree() {
                return Err(Error::ShapeMismatch(format!("{} frequencies for a degree-{} field", xi.len(), k.degree())));
            }
            let set = build_prime_set(&k, *count, *height)?;
            let h = move |c: &[i64]| e(c.iter().zip(&xi).map(|(&x, f)| x as f64 * f).sum());
            let t = katai_terms(&chi, &h, &set, *n)?;
            Output::json(json!({ "field": k.label(), "fn": function.function, "N": n, "primes": prime_set_json(&set), "terms": t }))
        }
        Command::Tk { field, count, height, n } => {
            let k = field_of(field)?;
            let set = build_prime_set(&k, *count, *height)?;
            let r = tk_statistic(&set, *n)?;
            Output::json(json!({ "field": k.label(), "primes": prime_set_json(&set), "report": r }))
        }
        Command::Equid { seq, model, n, xi_max, max_step, epsilon } => {
            let g = parse::sequence(&seq.coefs, seq.monomial, seq.degree)?;
            let model = match model {
                ModelArg::Torus => OrbitModel::Torus,
                ModelArg::Heisenberg => OrbitModel::Heisenberg,
            };
            let catalog = EquidCatalog::default_for(g.dim(), *n, *xi_max, *max_step);
            let report = equid_correlation(&g, model, *n, &catalog, *epsilon)?;
            let csv = (cli.format == Format::Csv).then(|| {
                orbit_csv(&g, model, *n).lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
            });
            Output { json: serde_json::to_value(&report).expect("report serializes"), csv }
        }
        Command::Charsearch { seq, n, bound, flavor, c0 } => {
            let g = parse::sequence(&seq.coefs, seq.monomial, seq.degree)?;
            let flavor = match flavor {
                FlavorArg::Binomial => Flavor::Binomial,
                FlavorArg::Monomial => Flavor::Monomial,
            };
            let (chi, norm) = char_search(&g, *n, *bound, flavor)?;
            let witness = c0.map(|c0| leibman_witness(&g, &chi, *n, c0)).transpose()?;
            Output::json(json!({ "N": n, "bound": bound, "flavor": flavor, "ell": chi.ell, "smooth_norm": norm, "witness": witness }))
        }
        Command::Forms { field, p, q, m_max } => {
            let k = field_of(field)?;
            let q = match q {
                Some(q) => parse_element(&k, q)?,
                None => FieldElement::one(&k),
            };
            let r = eigenproduct_minpoly(&parse_element(&k, p)?, &q, *m_max)?;
            Output::json(json!({ "field": k.label(), "m_max": m_max, "eigenproducts": r }))
        }
        Command::Regularize { field, elem, height } => {
            let k = field_of(field)?;
            let a = parse_element(&k, &elem.join(" "))?;
            let system = find_units(&k, *height)?;
            let r = regularize(&a, &system)?;
            Output::json(json!({
                "field": k.label(),
                "input": coord_strings(&a),
                "units": system.units.iter().map(coord_strings).collect::<Vec<_>>(),
                "unit": coord_strings(&r.unit),
                "exponents": r.exponents,
                "regularized": coord_strings(&r.regularized),
                "achieved_c": r.achieved_c,
            }))
        }
        Command::PartregVerify { spec, trials } => {
            let s = parse::ktype(spec.preset.as_deref(), spec.quad.as_deref())?;
            let r = verify_identity(&s, *trials, seed)?;
            Output::json(json!({ "spec": s.summary(), "report": r }))
        }
        Command::PartregSearch { spec, coloring, height } => {
            let s = parse::ktype(spec.preset.as_deref(), spec.quad.as_deref())?;
            let c = parse::coloring(&s.field, coloring)?;
            let r = coloring_search(&s, &c, *height)?;
            Output::json(json!({ "spec": s.summary(), "coloring": coloring, "result": r }))
        }
        Command::Folner { field, n, height, a } => {
            let k = field_of(field)?;
            let set = folner_set(&k, *n, *height)?;
            let ratio = a.as_deref().map(|a| folner_ratio(&set, &parse_element(&k, a)?)).transpose()?;
            let header: Vec<String> = (0..k.degree()).map(|i| format!("c{i}")).collect();
            let rows = set.elements.iter().map(coord_strings);
            Output {
                json: json!({ "set": set.summary(), "ratio": ratio }),
                csv: Some(std::iter::once(header).chain(rows).collect()),
            }
        }
        Command::MultAverage { field, function, shifts, shifts_prime, n } => {
            let k = field_of(field)?;
            let chi = parse::multfn(&k, &function.function, seed)?;
            let a = parse::elements(&k, shifts)?;
            let b = parse::elements(&k, shifts_prime)?;
            let r = mult_average(&chi, &a, &b, *n)?;
            Output::json(json!({ "field": k.label(), "fn": function.function, "N": n, "average": r }))
        }
    })
}

/// Scalar leaves of a JSON value as `key,value` rows.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&join(k), x, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&join(&i.to_string()), x, rows)),
        Value::String(s) => rows.push(vec![prefix.to_string(), s.clone()]),
        Value::Null => rows.push(vec![prefix.to_string(), String::new()]),
        other => rows.push(vec![prefix.to_string(), other.to_string()]),
    }
}

fn render(out: Output, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(&out.json).map_err(|e| Error::Io(e.to_string()))?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let rows = out.csv.unwrap_or_else(|| {
                let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
                flatten("", &out.json, &mut rows);
                rows
            });
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
            for r in rows {
                w.write_record(&r).map_err(|e| Error::Io(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Error::Io(e.to_string()))
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("NILFOURIER_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Parse(format!("NILFOURIER_THREADS must be a positive integer, found {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Precondition(e.to_string()))?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Input => 1,
        ErrorClass::Precondition => 2,
        ErrorClass::Unsupported => 3,
        ErrorClass::Numeric => 4,
        ErrorClass::Io => 5,
    }
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    let bytes = render(execute(cli)?, cli.format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(&bytes).map_err(|e| Error::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
