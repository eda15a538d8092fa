//! `infol`: drive the truncated pipelines and print deterministic reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infol_core::complexes::CohomologyTable;
use infol_core::foliations::{
  additive_group, differentiate, foliation_cohomology, integrate, loop_space, multiplicative_group,
  pair_groupoid, tautological_foliation, unit_groupoid, FormalGroupoid,
};
use infol_core::graded_mixed::{check_negative_weight_product, u_product_scalar, z_u, z_v};
use infol_core::infcoh::{
  cech_alexander, compare_inf_derham, de_rham, inf_cohomology, AlgebraSpec, SmoothAffine,
};
use infol_core::{with_scalar, Coefficients, Error, Scalar};
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(
  name = "infol",
  version,
  about = "Exact truncated computations for infinitesimal derived foliations"
)]
struct Cli {
  #[command(subcommand)]
  command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
  Json,
  Csv,
}

#[derive(Args, Clone)]
struct Output {
  #[arg(long, value_enum, default_value = "json")]
  format: Format,
  /// Write the report here instead of stdout.
  #[arg(long)]
  out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Algebra {
  /// `Q[x,y]`, `Z[x]` or `Fp[x]` (with `--p`).
  #[arg(long)]
  algebra: String,
  #[arg(long)]
  p: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Demo {
  PairGroupoid,
  Unit,
  AdditiveGroup,
  MultiplicativeGroup,
  Tautological,
}

#[derive(Subcommand)]
enum Command {
  /// Čech–Alexander infinitesimal cohomology.
  Infcoh {
    #[command(flatten)]
    algebra: Algebra,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = 8)]
    prec: u32,
    #[arg(long, default_value_t = 6)]
    deg: u32,
    #[command(flatten)]
    output: Output,
  },
  /// Truncated algebraic de Rham cohomology with class representatives.
  Derham {
    #[command(flatten)]
    algebra: Algebra,
    #[arg(long, default_value_t = 10)]
    deg: u32,
    #[command(flatten)]
    output: Output,
  },
  /// Infinitesimal against de Rham cohomology (over Q only).
  Compare {
    #[command(flatten)]
    algebra: Algebra,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = 8)]
    prec: u32,
    #[arg(long, default_value_t = 6)]
    deg: u32,
    #[command(flatten)]
    output: Output,
  },
  /// Weight pieces of Z[u] and Z[v] and products of u-powers.
  RedshiftDemo {
    #[arg(long, default_value_t = 2)]
    max_weight: usize,
    #[command(flatten)]
    output: Output,
  },
  /// `v·v = c·γ₂(v)` in the free simplicial commutative ring on a degree-2 class.
  DividedPower {
    /// `Z`, `Q` or `F<p>`.
    #[arg(long)]
    over: String,
    #[arg(long, default_value_t = 5)]
    trunc: usize,
    #[command(flatten)]
    output: Output,
  },
  /// Round trips between formal groupoids and foliations.
  Integrate {
    #[arg(long, value_enum)]
    demo: Demo,
    #[arg(long, default_value = "Q[x]")]
    algebra: String,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value_t = 6)]
    prec: u32,
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[command(flatten)]
    output: Output,
  },
}

/// Echo of the invocation; regenerating a report from it gives the same bytes.
#[derive(Serialize, Default)]
struct RunConfig {
  command: &'static str,
  #[serde(skip_serializing_if = "Option::is_none")]
  algebra: Option<String>,
  #[serde(skip_serializing_if = "Option::is_none")]
  p: Option<u64>,
  #[serde(skip_serializing_if = "Option::is_none")]
  over: Option<String>,
  #[serde(skip_serializing_if = "Option::is_none")]
  demo: Option<String>,
  #[serde(skip_serializing_if = "Option::is_none")]
  levels: Option<usize>,
  #[serde(skip_serializing_if = "Option::is_none")]
  prec: Option<u32>,
  #[serde(skip_serializing_if = "Option::is_none")]
  deg: Option<u32>,
  #[serde(skip_serializing_if = "Option::is_none")]
  max_weight: Option<usize>,
  #[serde(skip_serializing_if = "Option::is_none")]
  trunc: Option<usize>,
}

#[derive(Serialize)]
struct Row {
  degree: i64,
  rank: usize,
  torsion: Vec<u64>,
  trusted: bool,
}

#[derive(Serialize)]
struct Report {
  config: RunConfig,
  version: &'static str,
  table: Vec<Row>,
  verdict: Option<String>,
  #[serde(flatten)]
  extra: Map<String, Value>,
}

struct Outcome {
  report: Report,
  /// Non-zero when the report is printed but the run is flagged (unsound truncation).
  code: u8,
  warning: Option<String>,
}

fn rows(t: &CohomologyTable) -> Vec<Row> {
  t.entries
    .iter()
    .map(|e| Row {
      degree: e.degree,
      rank: e.group.free_rank,
      torsion: e.group.torsion.clone(),
      trusted: e.trusted,
    })
    .collect()
}

fn table_json(t: &CohomologyTable) -> Value {
  serde_json::to_value(rows(t)).expect("rows serialize")
}

fn report(config: RunConfig, table: &CohomologyTable) -> Report {
  Report { config, version: env!("CARGO_PKG_VERSION"), table: rows(table), verdict: None, extra: Map::new() }
}

fn parse_algebra(a: &Algebra) -> Result<(SmoothAffine, Coefficients), Error> {
  let spec = AlgebraSpec::parse(&a.algebra)?;
  let ring = spec.coefficients(a.p)?;
  Ok((SmoothAffine { vars: spec.vars }, ring))
}

fn parse_over(s: &str) -> Result<Coefficients, Error> {
  match s {
    "Z" => Ok(Coefficients::Integers),
    "Q" => Ok(Coefficients::Rationals),
    _ => {
      let p = s
        .strip_prefix('F')
        .and_then(|p| p.parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected Z, Q or F<p>, got {s:?}")))?;
      Coefficients::prime_field(p)
    }
  }
}

fn cmd_infcoh(a: &Algebra, levels: usize, prec: u32, deg: u32) -> Result<Outcome, Error> {
  let (x, ring) = parse_algebra(a)?;
  let config = RunConfig {
    command: "infcoh",
    algebra: Some(a.algebra.clone()),
    p: a.p,
    levels: Some(levels),
    prec: Some(prec),
    deg: Some(deg),
    ..Default::default()
  };
  with_scalar!(&ring, S => {
    let tower = cech_alexander::<S>(&x, levels, prec, deg)?;
    let table = inf_cohomology(&tower)?;
    let mut r = report(config, &table);
    let names: Vec<String> = x.vars.clone();
    let invariants: Vec<String> = tower.invariants().iter().map(|p| p.render(&names)).collect();
    r.extra.insert("degree0_kernel".into(), json!(invariants));
    let sound = tower.is_sound();
    r.extra.insert("sound".into(), json!(sound));
    Outcome {
      report: r,
      code: if sound { 0 } else { 3 },
      warning: (!sound).then(|| format!("unsound truncation: prec {prec} ≤ D {deg}; no degree is trusted")),
    }
  })
}

fn cmd_derham(a: &Algebra, deg: u32) -> Result<Outcome, Error> {
  let (x, ring) = parse_algebra(a)?;
  let config = RunConfig {
    command: "derham",
    algebra: Some(a.algebra.clone()),
    p: a.p,
    deg: Some(deg),
    ..Default::default()
  };
  with_scalar!(&ring, S => {
    let dr = de_rham::<S>(&x, deg)?;
    let mut r = report(config, &dr.table);
    let mut classes = Map::new();
    for e in &dr.table.entries {
      if e.group.torsion.is_empty() {
        classes.insert(e.degree.to_string(), json!(dr.classes(e.degree)?));
      }
    }
    r.extra.insert("classes".into(), Value::Object(classes));
    Outcome { report: r, code: 0, warning: None }
  })
}

fn cmd_compare(a: &Algebra, levels: usize, prec: u32, deg: u32) -> Result<Outcome, Error> {
  let (x, ring) = parse_algebra(a)?;
  let config = RunConfig {
    command: "compare",
    algebra: Some(a.algebra.clone()),
    p: a.p,
    levels: Some(levels),
    prec: Some(prec),
    deg: Some(deg),
    ..Default::default()
  };
  with_scalar!(&ring, S => {
    let v = compare_inf_derham::<S>(&x, levels, prec, deg)?;
    let mut r = report(config, &v.source);
    r.verdict = Some(serde_json::to_value(v.verdict).expect("verdict").as_str().unwrap_or("unknown").to_string());
    r.extra.insert("de_rham".into(), table_json(&v.target));
    r.extra.insert("trusted_window".into(), json!(v.trusted_window));
    Outcome { report: r, code: 0, warning: None }
  })
}

fn cmd_redshift(max_weight: usize) -> Result<Outcome, Error> {
  type Z = infol_core::Integer;
  let config = RunConfig { command: "redshift-demo", max_weight: Some(max_weight), ..Default::default() };
  let trunc = 2 * max_weight + 1;
  let u = z_u::<Z>(max_weight, trunc, 1)?;
  let v = z_v::<Z>(max_weight, 1, trunc)?;
  let mut pieces = Vec::new();
  for n in 0..=max_weight as i64 {
    pieces.push(json!({"ring": "u", "weight": n, "table": table_json(&u.tot_pi(n)?.cohomology()?)}));
  }
  for n in 1..=max_weight as i64 {
    pieces.push(json!({"ring": "v", "weight": -n, "table": table_json(&v.tot_pi(-n)?.cohomology()?)}));
  }
  let mut products = Vec::new();
  for p in 1..=max_weight {
    for q in p..=max_weight - p {
      let c = u_product_scalar::<Z>(p, q)?;
      products.push(json!({"p": p, "q": q, "scalar": c.to_string(), "unit": c.is_unit()}));
    }
  }
  let mut r = report(config, &u.tot_pi(0)?.cohomology()?);
  r.extra.insert("pieces".into(), Value::Array(pieces));
  r.extra.insert("u_products".into(), Value::Array(products));
  Ok(Outcome { report: r, code: 0, warning: None })
}

fn cmd_divided_power(over: &str, trunc: usize) -> Result<Outcome, Error> {
  let ring = parse_over(over)?;
  let config = RunConfig {
    command: "divided-power",
    over: Some(over.to_string()),
    trunc: Some(trunc),
    ..Default::default()
  };
  with_scalar!(&ring, S => {
    let sq = infol_core::graded_mixed::negative_weight_square::<S>(trunc)?;
    debug_assert_eq!(sq.scalar, check_negative_weight_product::<S>(trunc)?);
    let mut r = report(config, &CohomologyTable { ring: ring.clone(), entries: Vec::new() });
    r.table = vec![Row { degree: -4, rank: sq.homology.free_rank, torsion: sq.homology.torsion.clone(), trusted: true }];
    r.extra.insert("scalar".into(), json!(sq.scalar.to_string()));
    r.extra.insert("unit".into(), json!(sq.scalar.is_unit()));
    r.extra.insert("gamma_generates".into(), json!(sq.gamma_generates));
    Outcome { report: r, code: 0, warning: None }
  })
}

fn demo_groupoid<S: Scalar>(demo: Demo, x: &SmoothAffine, prec: u32) -> Result<FormalGroupoid<S>, Error> {
  let point_only = |name: &str| {
    if x.dim() == 0 {
      Ok(())
    } else {
      Err(Error::BadParameters(format!(
        "{name} lives over a point; use an algebra with no variables such as \"Q[]\""
      )))
    }
  };
  match demo {
    Demo::PairGroupoid => pair_groupoid(x, prec),
    Demo::Unit => unit_groupoid(x, prec),
    Demo::AdditiveGroup => point_only("the additive group").and_then(|_| additive_group(prec)),
    Demo::MultiplicativeGroup => {
      point_only("the multiplicative group").and_then(|_| multiplicative_group(prec))
    }
    Demo::Tautological => integrate(&tautological_foliation::<S>(x, 2, prec, prec - 1)?),
  }
}

fn cmd_integrate(
  demo: Demo,
  algebra: &str,
  p: Option<u64>,
  prec: u32,
  levels: usize,
) -> Result<Outcome, Error> {
  let a = Algebra { algebra: algebra.to_string(), p };
  let (x, ring) = parse_algebra(&a)?;
  if prec < 2 {
    return Err(Error::BadParameters("prec must be at least 2".into()));
  }
  let demo_name = demo.to_possible_value().expect("named").get_name().to_string();
  let config = RunConfig {
    command: "integrate",
    algebra: Some(algebra.to_string()),
    p,
    demo: Some(demo_name),
    levels: Some(levels),
    prec: Some(prec),
    ..Default::default()
  };
  let bound = prec - 1;
  with_scalar!(&ring, S => {
    let g = demo_groupoid::<S>(demo, &x, prec)?;
    let f = differentiate(&g, levels, bound)?;
    let back = integrate(&f)?;
    let again = differentiate(&back, levels, bound)?;
    let mut pass = back == g && again.nerve == f.nerve;
    if demo == Demo::Tautological {
      let taut = tautological_foliation::<S>(&x, levels, prec, bound)?;
      pass &= taut.nerve == f.nerve && back == pair_groupoid(&x, prec)?;
    }
    let table = foliation_cohomology(&f)?;
    let mut r = report(config, &table);
    r.verdict = Some(if pass { "pass" } else { "fail" }.to_string());
    r.extra.insert("round_trip".into(), json!(if pass { "pass" } else { "fail" }));
    r.extra.insert("groupoid".into(), serde_json::to_value(back.describe()).expect("groupoid"));
    r.extra.insert("cotangent_rank".into(), json!(f.rank()));
    let loops = loop_space(&f)?;
    r.extra.insert("loop_space_functions".into(), table_json(&loops.cohomology()?));
    Outcome { report: r, code: if pass { 0 } else { 5 }, warning: (!pass).then(|| "round trip failed".to_string()) }
  })
}

fn exit_code(e: &Error) -> u8 {
  match e {
    Error::Parse(_)
    | Error::BadParameters(_)
    | Error::NotPrime(_)
    | Error::UnsupportedPrime(_)
    | Error::UnsupportedRing(_) => 2,
    Error::UnsoundTruncation(_) | Error::InsufficientTruncation(_) => 3,
    Error::UnsupportedComparison(_) => 4,
    _ => 5,
  }
}

fn render(report: &Report, format: Format) -> String {
  match format {
    Format::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
    Format::Csv => {
      let mut s = String::from("degree,rank,torsion,trusted\n");
      for r in &report.table {
        let torsion: Vec<String> = r.torsion.iter().map(u64::to_string).collect();
        s.push_str(&format!("{},{},{},{}\n", r.degree, r.rank, torsion.join(";"), r.trusted));
      }
      s
    }
  }
}

fn main() -> ExitCode {
  let cli = Cli::parse();
  let (result, output) = match &cli.command {
    Command::Infcoh { algebra, levels, prec, deg, output } => {
      (cmd_infcoh(algebra, *levels, *prec, *deg), output)
    }
    Command::Derham { algebra, deg, output } => (cmd_derham(algebra, *deg), output),
    Command::Compare { algebra, levels, prec, deg, output } => {
      (cmd_compare(algebra, *levels, *prec, *deg), output)
    }
    Command::RedshiftDemo { max_weight, output } => (cmd_redshift(*max_weight), output),
    Command::DividedPower { over, trunc, output } => (cmd_divided_power(over, *trunc), output),
    Command::Integrate { demo, algebra, p, prec, levels, output } => {
      (cmd_integrate(*demo, algebra, *p, *prec, *levels), output)
    }
  };
  let outcome = match result {
    Ok(o) => o,
    Err(e) => {
      eprintln!("error: {e}");
      return ExitCode::from(exit_code(&e));
    }
  };
  let text = render(&outcome.report, output.format);
  match &output.out {
    Some(path) => {
      if let Err(e) = std::fs::write(path, text) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(5);
      }
    }
    None => print!("{text}"),
  }
  if let Some(w) = outcome.warning {
    eprintln!("{w}");
  }
  ExitCode::from(outcome.code)
}
