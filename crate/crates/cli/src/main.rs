use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use contextua_core::connection::{self, fragment_complex, View};
use contextua_core::ddg;
use contextua_core::disturbance::{detect_disturbance, extend_scenario, fractions_with_disturbance_capped};
use contextua_core::interference::all_terms;
use contextua_core::io;
use contextua_core::model::{verify_ontic, EmpiricalModel, GptFragment, ObjectKind, OnticRepresentation};
use contextua_core::noncontextuality::{
    contextual_fraction_with, minimal_negativity, noncontextual_lp, verify_nc_certificate, ScaleCap,
};
use contextua_core::rational::{self, Q};
use contextua_core::scenarios;
use contextua_core::vorobyev::{generalized_vorobyev, graham_reduce, CertificateVerdict};
use contextua_core::Error;

#[derive(Parser)]
#[command(name = "contextua", version, about = "Exact contextuality analysis of GPT fragments and empirical models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Exit with status 1 when the verdict is contextual or infeasible.
    #[arg(long, global = true)]
    strict: bool,
    /// Machine-readable JSON (the default).
    #[arg(long, global = true, conflicts_with = "table")]
    json: bool,
    /// Human-readable `path  value` table of the same report.
    #[arg(long, global = true)]
    table: bool,
    /// Write sweep rows as CSV to this path.
    #[arg(long, global = true, value_name = "PATH")]
    emit_csv: Option<PathBuf>,
    /// Seed for randomized scenario generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest effect count accepted by vertex enumeration.
    #[arg(long, global = true, value_name = "N")]
    scale_cap: Option<usize>,
}

impl Global {
    fn cap(&self) -> ScaleCap {
        let mut cap = ScaleCap::default();
        if let Some(n) = self.scale_cap {
            cap.effects = n;
        }
        cap
    }
}

#[derive(Args)]
struct OnticArgs {
    /// Ontic representation JSON (`mu`, `xi`, optional `gamma`).
    #[arg(long)]
    rep: PathBuf,
    #[arg(long, default_value = "effect")]
    kind: ObjectKind,
    #[arg(long, default_value_t = 0)]
    lambda: usize,
    /// Output ontic index for transformations.
    #[arg(long)]
    lambda_out: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check normalization, ranges and measurement completeness.
    Validate { fragment: PathBuf },
    /// Operational equivalences of one object kind.
    Equivalences {
        fragment: PathBuf,
        #[arg(long, default_value = "state")]
        kind: ObjectKind,
    },
    /// Noncontextuality LP, or verification of a supplied representation.
    NcCheck {
        fragment: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
    },
    /// Contextual fraction of a non-disturbing empirical model.
    Fraction { model: PathBuf },
    /// Least negativity of a quasi-probabilistic embedding.
    Negativity { fragment: PathBuf },
    /// Split a valuation cochain into potential and connection.
    Decompose {
        fragment: PathBuf,
        #[command(flatten)]
        ontic: OnticArgs,
        #[arg(long, default_value = "geometrical")]
        view: View,
    },
    /// Curvature of the connection on the attached 2-cells.
    Curvature {
        fragment: PathBuf,
        #[command(flatten)]
        ontic: OnticArgs,
    },
    /// Loop phases and the monodromy class.
    Phases {
        fragment: PathBuf,
        #[command(flatten)]
        ontic: OnticArgs,
        #[arg(long, default_value = "topological")]
        view: View,
    },
    /// Homology of a complex given by its maximal simplices.
    Homology {
        complex: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Graham reduction of a hypergraph, or with --generalized the
    /// cohomological certificate of a fragment.
    Vorobyev {
        input: PathBuf,
        #[arg(long)]
        generalized: bool,
    },
    /// Interference terms of an event measure.
    Interference {
        measure: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Disturbance report, optionally with the extended scenario and the
    /// three-way fractions.
    Disturbance {
        model: PathBuf,
        #[arg(long)]
        extend: bool,
        #[arg(long)]
        fractions: bool,
    },
    /// List or emit built-in scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Fractions and negativity along a one-parameter scenario family.
    Sweep {
        scenario: String,
        /// Parameter to vary.
        #[arg(long)]
        vary: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        /// Fixed parameters, `k=v`.
        #[arg(long = "param", value_parser = key_value)]
        params: Vec<(String, String)>,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    List,
    Emit {
        name: String,
        #[arg(long = "param", value_parser = key_value)]
        params: Vec<(String, String)>,
    },
}

fn key_value(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected k=v, got {s:?}"))
}

/// A report plus whether it carries a contextual or infeasible verdict.
struct Report {
    value: Value,
    flagged: bool,
}

impl Report {
    fn plain(value: Value) -> Self {
        Report { value, flagged: false }
    }
}

type Run = Result<Report, Error>;

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, Error> {
    Ok(serde_json::to_value(x)?)
}

fn fragment(path: &Path) -> Result<GptFragment, Error> {
    io::read_json(path)
}

fn model(path: &Path) -> Result<EmpiricalModel, Error> {
    io::read_json(path)
}

fn all_equivalences(f: &GptFragment, with_transformations: bool) -> Vec<contextua_core::model::OperationalEquivalence> {
    let mut eqs = f.equivalences(ObjectKind::State);
    eqs.extend(f.equivalences(ObjectKind::Effect));
    if with_transformations {
        eqs.extend(f.equivalences(ObjectKind::Transformation));
    }
    eqs
}

fn ontic_cochain(
    f: &GptFragment,
    ontic: &OnticArgs,
    view: View,
) -> Result<(connection::ObjectComplex, ddg::Cochain), Error> {
    let rep: OnticRepresentation = io::read_json(&ontic.rep)?;
    rep.check_shape(f)?;
    let oc = fragment_complex(f, ontic.kind, view)?;
    let xi = oc.ontic_cochain(&rep, ontic.lambda, ontic.lambda_out.unwrap_or(ontic.lambda))?;
    Ok((oc, xi))
}

fn run(command: Command, g: &Global) -> Run {
    let cap = g.cap();
    match command {
        Command::Validate { fragment: path } => {
            let r = fragment(&path)?.validate()?;
            Ok(Report {
                flagged: !r.is_valid(),
                value: to_value(&r)?,
            })
        }
        Command::Equivalences { fragment: path, kind } => {
            Ok(Report::plain(to_value(&fragment(&path)?.equivalences(kind))?))
        }
        Command::NcCheck { fragment: path, rep } => {
            let f = fragment(&path)?;
            if let Some(rep) = rep {
                let rep: OnticRepresentation = io::read_json(&rep)?;
                let r = verify_ontic(&f, &rep, &all_equivalences(&f, rep.gamma.is_some()))?;
                return Ok(Report {
                    flagged: !r.is_noncontextual(),
                    value: json!({ "noncontextual": r.is_noncontextual(), "report": to_value(&r)? }),
                });
            }
            let se = f.equivalences(ObjectKind::State);
            let ee = f.equivalences(ObjectKind::Effect);
            let nc = noncontextual_lp(&f, &se, &ee, cap)?;
            let certificate_verified = if nc.is_noncontextual() {
                None
            } else {
                Some(verify_nc_certificate(&f, &se, &nc)?)
            };
            Ok(Report {
                flagged: !nc.is_noncontextual(),
                value: json!({
                    "noncontextual": nc.is_noncontextual(),
                    "certificate_verified": certificate_verified,
                    "lp": to_value(&nc)?,
                }),
            })
        }
        Command::Fraction { model: path } => {
            let m = model(&path)?;
            let r = contextual_fraction_with(&m, cap).map_err(|e| match e {
                Error::Disturbing { .. } => Error::Precondition(format!(
                    "{e}; use `contextua disturbance --fractions` for disturbing models"
                )),
                e => e,
            })?;
            Ok(Report {
                flagged: r.cf > rational::q(0),
                value: to_value(&r)?,
            })
        }
        Command::Negativity { fragment: path } => {
            let f = fragment(&path)?;
            let n = minimal_negativity(
                &f,
                &f.equivalences(ObjectKind::State),
                &f.equivalences(ObjectKind::Effect),
                cap,
            )?;
            Ok(Report {
                flagged: n.negativity > rational::q(0),
                value: to_value(&n)?,
            })
        }
        Command::Decompose { fragment: path, ontic, view } => {
            let f = fragment(&path)?;
            let (oc, xi) = ontic_cochain(&f, &ontic, view)?;
            let dec = connection::decompose(&oc, &xi)?;
            let r = connection::report(&oc, &dec)?;
            Ok(Report {
                flagged: r.phases.values().any(|p| p != &rational::q(0)),
                value: to_value(&r)?,
            })
        }
        Command::Curvature { fragment: path, ontic } => {
            let f = fragment(&path)?;
            let (oc, xi) = ontic_cochain(&f, &ontic, View::Geometrical)?;
            let c = connection::curvature(&oc, &connection::decompose(&oc, &xi)?)?;
            Ok(Report {
                flagged: !c.is_flat(),
                value: json!({ "flat": c.is_flat(), "f": io::cochain_map(&c.f) }),
            })
        }
        Command::Phases { fragment: path, ontic, view } => {
            let f = fragment(&path)?;
            let (oc, xi) = ontic_cochain(&f, &ontic, view)?;
            let dec = connection::decompose(&oc, &xi)?;
            let phases = connection::loop_phases(&oc, &dec)?;
            let flagged = phases.values().any(|p| p != &rational::q(0));
            let phases: BTreeMap<String, String> =
                phases.iter().map(|(l, p)| (l.to_string(), rational::format(p))).collect();
            let monodromy = match view {
                View::Topological => Some(to_value(&connection::monodromy_class(&oc, &dec)?.class)?),
                View::Geometrical => None,
            };
            Ok(Report {
                flagged,
                value: json!({ "phases": phases, "monodromy": monodromy }),
            })
        }
        Command::Homology { complex, n } => {
            let k = io::complex_from_json(&io::read_text(&complex)?)?;
            let value = match n {
                Some(n) => to_value(&ddg::homology(&k, n))?,
                None => {
                    let groups: Vec<_> = (0..=k.dim().unwrap_or(0)).map(|n| ddg::homology(&k, n)).collect();
                    json!({ "groups": to_value(&groups)?, "euler_characteristic": k.euler_characteristic() })
                }
            };
            Ok(Report::plain(value))
        }
        Command::Vorobyev { input, generalized } => {
            if generalized {
                let f = fragment(&input)?;
                let mut out = serde_json::Map::new();
                let mut certified = false;
                for kind in [ObjectKind::State, ObjectKind::Effect] {
                    let oc = fragment_complex(&f, kind, View::Topological)?;
                    let c = generalized_vorobyev(&oc)?;
                    certified |= c.verdict == CertificateVerdict::NoncontextualCertified;
                    out.insert(format!("{kind:?}").to_lowercase(), to_value(&c)?);
                }
                out.insert("certified".into(), json!(certified));
                return Ok(Report {
                    flagged: !certified,
                    value: Value::Object(out),
                });
            }
            let h = io::hypergraph_from_json(&io::read_text(&input)?)?;
            let r = graham_reduce(&h);
            Ok(Report {
                flagged: !r.is_empty(),
                value: json!({ "acyclic": r.is_empty(), "reduction": to_value(&r)? }),
            })
        }
        Command::Interference { measure, order } => {
            let m = io::measure_from_json(&io::read_text(&measure)?)?;
            Ok(Report::plain(to_value(&all_terms(&m, order)?)?))
        }
        Command::Disturbance { model: path, extend, fractions } => {
            let m = model(&path)?;
            let records = detect_disturbance(&m);
            let mut out = serde_json::Map::new();
            out.insert("disturbing".into(), json!(!records.is_empty()));
            out.insert("records".into(), to_value(&records)?);
            if extend {
                out.insert("extension".into(), to_value(&extend_scenario(&m)?)?);
            }
            if fractions {
                out.insert("fractions".into(), to_value(&fractions_with_disturbance_capped(&m, cap)?)?);
            }
            Ok(Report {
                flagged: !records.is_empty(),
                value: Value::Object(out),
            })
        }
        Command::Scenarios { action } => match action {
            ScenarioAction::List => Ok(Report::plain(Value::Array(
                scenarios::CATALOG
                    .iter()
                    .map(|s| json!({ "name": s.name, "produces": s.produces, "params": s.params }))
                    .collect(),
            ))),
            ScenarioAction::Emit { name, params } => {
                let mut params: BTreeMap<String, String> = params.into_iter().collect();
                if name == "random-acyclic" {
                    params.entry("seed".into()).or_insert_with(|| g.seed.to_string());
                }
                Ok(Report::plain(scenarios::emit(&name, &params)?))
            }
        },
        Command::Sweep { scenario, vary, from, to, steps, params } => sweep(&scenario, &vary, &from, &to, steps, params, g),
    }
}

/// Fragment counterpart of a model scenario, used for the negativity column.
fn fragment_twin(scenario: &str) -> Option<&'static str> {
    match scenario {
        "noisy-pr-box" => Some("pr-box-fragment"),
        "chsh-quantum" => Some("chsh-fragment"),
        _ => None,
    }
}

fn sweep(
    scenario: &str,
    vary: &str,
    from: &str,
    to: &str,
    steps: usize,
    params: Vec<(String, String)>,
    g: &Global,
) -> Run {
    let info = scenarios::CATALOG
        .iter()
        .find(|s| s.name == scenario)
        .ok_or_else(|| Error::Unsupported(format!("unknown scenario {scenario:?}")))?;
    if info.produces != "model" {
        return Err(Error::Precondition(format!("{scenario} emits a fragment; sweeps need a model")));
    }
    if steps < 2 {
        return Err(Error::Precondition("a sweep needs at least 2 steps".into()));
    }
    let (a, b) = (rational::parse(from)?, rational::parse(to)?);
    let base: BTreeMap<String, String> = params.into_iter().collect();
    let cap = g.cap();
    let points: Vec<Q> = (0..steps)
        .map(|i| &a + (&b - &a) * Q::new(i.into(), (steps - 1).into()))
        .collect();
    let rows: Vec<Result<Value, Error>> = points
        .par_iter()
        .map(|p| {
            let mut params = base.clone();
            params.insert(vary.to_string(), rational::format(p));
            let m: EmpiricalModel = serde_json::from_value(scenarios::emit(scenario, &params)?)?;
            let r = fractions_with_disturbance_capped(&m, cap)?;
            let negativity = match fragment_twin(scenario) {
                Some(twin) => {
                    let f: GptFragment = serde_json::from_value(scenarios::emit(twin, &params)?)?;
                    let n = minimal_negativity(
                        &f,
                        &f.equivalences(ObjectKind::State),
                        &f.equivalences(ObjectKind::Effect),
                        cap,
                    )?;
                    Some(rational::format(&n.negativity))
                }
                None => None,
            };
            Ok(json!({
                "param": rational::format(p),
                "ncf": rational::format(&r.ncf),
                "cf": rational::format(&r.cf),
                "df": rational::format(&r.df),
                "negativity": negativity,
            }))
        })
        .collect();
    let rows: Vec<Value> = rows.into_iter().collect::<Result<_, _>>()?;
    if let Some(path) = &g.emit_csv {
        let mut csv = String::from("param,ncf,cf,df,negativity\n");
        for r in &rows {
            let cell = |k: &str| r[k].as_str().unwrap_or("").to_string();
            csv.push_str(&[cell("param"), cell("ncf"), cell("cf"), cell("df"), cell("negativity")].join(","));
            csv.push('\n');
        }
        std::fs::write(path, csv).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(Report::plain(json!({ "scenario": scenario, "vary": vary, "rows": rows })))
}

/// Flattens a report into `path  value` lines.
fn table(value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(map) if !map.is_empty() => {
                for (k, x) in map {
                    walk(&join(k), x, out);
                }
            }
            Value::Array(items) if !items.is_empty() => {
                for (i, x) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", value, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global.clone();
    match run(cli.command, &g) {
        Ok(report) => {
            let text = if g.table {
                table(&report.value)
            } else {
                io::to_json(&report.value) + "\n"
            };
            // a closed pipe downstream is not an analysis failure
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            if g.strict && report.flagged {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
