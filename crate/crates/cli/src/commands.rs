use std::io::Write as _;
use std::path::Path;

use qfp_core::bounds::{margin_report, HeuristicConfig, HeuristicRequest};
use qfp_core::compiler::{
    assemble_shared_randomness_states, compile_one_way, compile_smp, compiled_repetition_scale,
    reduce_embedding_dimension, reduce_embedding_dimension_to, ThresholdRule,
};
use qfp_core::document::{
    Document, Payload, Protocol, Provenance, Report, SimulationReport, Stage, VerifyReport,
};
use qfp_core::embeddings::{check_realization_vectors, check_threshold_vectors, UNIT_TOL};
use qfp_core::problems::{
    eq_margin_realization, eq_matrix, eq_parity_embedding, eq_parity_protocol, eq_parity_protocol_sampled,
    ham_matrix, ham_parity_embedding, ham_parity_gap, ip_matrix, ParitySource,
};
use qfp_core::projections::{jl_dimension, project_with, verify_distortion, ProjectionSpec, Projector};
use qfp_core::sim::{protocol_from_margin, required_repetitions, run_protocol, FingerprintProtocol};
use qfp_core::{RealVector, Seed, SignMatrix, ThresholdEmbedding, VectorSystem};

use crate::{
    Builtin, Cli, Command, CompileArgs, EmitArgs, EmitKind, Failure, HamArgs, MarginArgs, MatrixArgs, ProjectArgs,
    SimulateArgs, VerifyArgs,
};

type Outcome<T = ()> = Result<T, Failure>;

struct Ctx<'a> {
    cli: &'a Cli,
    seed: Seed,
    command_line: String,
}

impl Ctx<'_> {
    fn provenance(&self) -> Provenance {
        Provenance::new(self.command_line.clone(), self.seed)
    }

    fn write(&self, doc: &Document) -> Outcome {
        let text = doc.to_json();
        match &self.cli.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::input(format!("cannot write output: {e}"))),
        }
    }
}

pub fn run(cli: &Cli, command_line: String) -> Outcome {
    let ctx = Ctx {
        cli,
        seed: Seed(cli.seed),
        command_line,
    };
    match &cli.command {
        Command::Margin(a) => margin(&ctx, a),
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Compile(a) => compile(&ctx, a),
        Command::Project(a) => project(&ctx, a),
        Command::Verify(a) => verify(&ctx, a),
        Command::Emit(a) => emit(&ctx, a),
        Command::Ham(a) => ham(&ctx, a),
    }
}

/// Parses a document without checking its mathematical invariants.
fn load(path: &Path) -> Outcome<Document> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    Document::parse(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_valid(path: &Path) -> Outcome<Document> {
    let doc = load(path)?;
    doc.validate()?;
    Ok(doc)
}

fn need<T>(v: Option<T>, flag: &str, problem: &str) -> Outcome<T> {
    v.ok_or_else(|| Failure::input(format!("--builtin {problem} needs {flag}")))
}

fn matrix_from(a: &MatrixArgs) -> Outcome<Option<SignMatrix>> {
    if let Some(path) = &a.matrix {
        let doc = load_valid(path)?;
        return match doc.body {
            Payload::SignMatrix(m) => Ok(Some(m)),
            _ => Err(Failure::input(format!(
                "{}: expected a sign_matrix document, found {}",
                path.display(),
                doc.kind()
            ))),
        };
    }
    let m = match a.builtin {
        None => return Ok(None),
        Some(Builtin::Eq) => eq_matrix(need(a.n, "--n", "eq")?)?,
        Some(Builtin::Ip) => ip_matrix(need(a.k, "--k", "ip")?)?,
        Some(Builtin::Ham) => ham_matrix(need(a.n, "--n", "ham")?, need(a.d, "--d", "ham")?)?,
    };
    Ok(Some(m))
}

fn require_matrix(a: &MatrixArgs) -> Outcome<SignMatrix> {
    matrix_from(a)?.ok_or_else(|| Failure::input("a sign matrix is required (--matrix FILE or --builtin)"))
}

fn margin(ctx: &Ctx, a: &MarginArgs) -> Outcome {
    let m = require_matrix(&a.matrix)?;
    let heuristic = a.heuristic.then(|| {
        let mut config = HeuristicConfig::default();
        config.restarts = a.restarts.unwrap_or(config.restarts);
        config.iterations = a.iterations.unwrap_or(config.iterations);
        HeuristicRequest {
            dim: a.dim.unwrap_or(m.rows() + 1),
            seed: ctx.seed,
            config,
        }
    });
    let report = margin_report(&m, !a.no_bounds, heuristic)?;
    ctx.write(&Document::new(Payload::Report(Report::Margin(report)), ctx.provenance()))
}

fn assemble_exact(v: &VectorSystem, m: &SignMatrix) -> Outcome<ThresholdEmbedding> {
    Ok(assemble_shared_randomness_states(v, m, ThresholdRule::Exact)?)
}

fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Outcome {
    let m = require_matrix(&a.matrix)?;
    let protocol = match &a.input {
        None => match (a.matrix.builtin, a.matrix.n) {
            (Some(Builtin::Eq), Some(n)) => FingerprintProtocol::for_error(eq_parity_embedding(n)?, a.eps)?,
            _ => return Err(Failure::input("simulate needs --input FILE or --builtin eq --n N")),
        },
        Some(path) => {
            let doc = load_valid(path)?;
            match doc.body {
                Payload::Embedding(e) => FingerprintProtocol::for_error(e, a.eps)?,
                Payload::Realization(r) => protocol_from_margin(&m, &r, a.eps)?,
                Payload::Protocol(Protocol::Fingerprint(p)) => p,
                Payload::Protocol(Protocol::Smp(p)) => {
                    FingerprintProtocol::for_error(assemble_exact(&compile_smp(&p)?, &m)?, a.eps)?
                }
                Payload::Protocol(Protocol::OneWay(p)) => {
                    FingerprintProtocol::for_error(assemble_exact(&compile_one_way(&p)?, &m)?, a.eps)?
                }
                _ => {
                    return Err(Failure::input(format!(
                        "cannot simulate a {} document",
                        doc.kind()
                    )))
                }
            }
        }
    };
    let run = run_protocol(&protocol, &m, a.trials, ctx.seed)?;
    let e = protocol.embedding();
    let report = SimulationReport {
        eps: a.eps,
        delta0: e.delta0(),
        delta1: e.delta1(),
        qubits_per_copy: protocol.qubits_per_copy(),
        copies: protocol.repetitions(),
        total_qubits: protocol.total_qubits(),
        run,
    };
    ctx.write(&Document::new(Payload::Report(Report::Simulation(report)), ctx.provenance()))
}

enum Classical {
    Smp(qfp_core::ClassicalSmpProtocol),
    OneWay(qfp_core::OneWayProtocol),
}

fn compile(ctx: &Ctx, a: &CompileArgs) -> Outcome {
    let proto = match &a.input {
        Some(path) => {
            let doc = load_valid(path)?;
            match doc.body {
                Payload::Protocol(Protocol::Smp(p)) => Classical::Smp(p),
                Payload::Protocol(Protocol::OneWay(p)) => Classical::OneWay(p),
                _ => return Err(Failure::input(format!("cannot compile a {} document", doc.kind()))),
            }
        }
        None => match (a.matrix.builtin, a.matrix.n) {
            (Some(Builtin::Eq), Some(n)) if a.sampled => Classical::Smp(eq_parity_protocol_sampled(n, ctx.seed)?),
            (Some(Builtin::Eq), Some(n)) => Classical::Smp(eq_parity_protocol(n)?),
            _ => return Err(Failure::input("compile needs --input FILE or --builtin eq --n N")),
        },
    };
    let (v, c, randomness) = match &proto {
        Classical::Smp(p) if a.one_way => (compile_one_way(&p.to_one_way())?, p.c, p.randomness.len()),
        Classical::Smp(p) => (compile_smp(p)?, p.c, p.randomness.len()),
        Classical::OneWay(p) => (compile_one_way(p)?, p.c, p.randomness.len()),
    };
    let mut prov = ctx.provenance();
    prov.stages.push(Stage {
        asymptotic_repetitions: Some(compiled_repetition_scale(c)),
        ..Stage::new(format!("vector_system ({randomness} random strings)"), v.dim())
    });
    if !(a.assemble || a.reduce) {
        return ctx.write(&Document::new(Payload::VectorSystem(v), prov));
    }

    let m = require_matrix(&a.matrix)?;
    let rule = a.theorem_eps.map_or(ThresholdRule::Exact, ThresholdRule::ProtocolError);
    let mut e = assemble_shared_randomness_states(&v, &m, rule)?;
    let stage = |name: &str, e: &ThresholdEmbedding| -> Outcome<Stage> {
        Ok(Stage {
            delta0: Some(e.delta0()),
            delta1: Some(e.delta1()),
            repetitions: Some(required_repetitions(e.delta0(), e.delta1(), 1.0 / 3.0)?),
            asymptotic_repetitions: Some(compiled_repetition_scale(c)),
            ..Stage::new(name, e.dim())
        })
    };
    prov.stages.push(stage("assembled", &e)?);
    if a.reduce {
        e = match a.target_dim {
            Some(t) => reduce_embedding_dimension_to(&e, &m, t, ctx.seed)?,
            None => reduce_embedding_dimension(&e, &m, ctx.seed)?,
        };
        prov.stages.push(stage("reduced", &e)?);
    }
    ctx.write(&Document::new(Payload::Embedding(e), prov))
}

fn vectors_of(doc: Document) -> Outcome<Vec<RealVector>> {
    match doc.body {
        Payload::Embedding(e) => Ok(e.alphas().iter().chain(e.betas()).cloned().collect()),
        Payload::Realization(r) => Ok(r.alphas().iter().chain(r.betas()).cloned().collect()),
        _ => Err(Failure::input(format!(
            "expected an embedding or realization document, found {}",
            doc.kind()
        ))),
    }
}

fn project(ctx: &Ctx, a: &ProjectArgs) -> Outcome {
    let vs = vectors_of(load_valid(&a.input)?)?;
    let source = vs[0].dim();
    let p = if a.identity {
        Projector::identity(source)
    } else {
        let target = match a.dim {
            Some(d) => d,
            None => jl_dimension(vs.len() + 1, a.eps)?,
        };
        if target > source {
            return Err(Failure::precondition(format!(
                "target dimension {target} exceeds source dimension {source}; pass a smaller --dim"
            )));
        }
        Projector::gaussian(ProjectionSpec::new(source, target, ctx.seed)?)
    };
    let projected = project_with(&p, &vs)?;
    let report = verify_distortion(&vs, &projected, a.eps)?;
    ctx.write(&Document::new(Payload::Report(Report::Distortion(report)), ctx.provenance()))
}

fn first_non_unit(alphas: &[RealVector], betas: &[RealVector]) -> Option<String> {
    let a = alphas.iter().position(|v| !v.is_unit(UNIT_TOL)).map(|i| format!("alpha {i}"));
    a.or_else(|| betas.iter().position(|v| !v.is_unit(UNIT_TOL)).map(|j| format!("beta {j}")))
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> Outcome {
    let m = require_matrix(&a.matrix)?;
    let doc = load(&a.input)?;
    let report = match &doc.body {
        Payload::Embedding(e) => {
            let (d0, d1) = (e.delta0(), e.delta1());
            let rep = check_threshold_vectors(e.alphas(), e.betas(), d0, d1, &m)?;
            let ordered = 0.0 <= d0 && d0 < d1 && d1 <= 1.0;
            VerifyReport {
                valid: rep.valid && ordered,
                unit_norms: rep.unit_norms,
                first_non_unit: first_non_unit(e.alphas(), e.betas()),
                offending_pair: rep.first_violation,
                zero_side_slack: rep.worst_zero_side.map(|w| d0 - w),
                one_side_slack: rep.worst_one_side.map(|w| w - d1),
                achieved_margin: None,
            }
        }
        Payload::Realization(r) => {
            let rep = check_realization_vectors(r.alphas(), r.betas(), r.gamma(), &m)?;
            VerifyReport {
                valid: rep.valid,
                unit_norms: rep.unit_norms,
                first_non_unit: first_non_unit(r.alphas(), r.betas()),
                offending_pair: (!rep.valid).then_some(rep.worst_pair),
                zero_side_slack: None,
                one_side_slack: None,
                achieved_margin: Some(rep.achieved_margin),
            }
        }
        _ => {
            return Err(Failure::input(format!(
                "expected an embedding or realization document, found {}",
                doc.kind()
            )))
        }
    };
    let valid = report.valid;
    let detail = match (&report.first_non_unit, report.offending_pair) {
        (_, Some((x, y))) => format!("violation at pair ({x}, {y})"),
        (Some(v), None) => format!("{v} is not a unit vector"),
        (None, None) => "threshold order violated".into(),
    };
    ctx.write(&Document::new(Payload::Report(Report::Verify(report)), ctx.provenance()))?;
    if valid {
        Ok(())
    } else {
        Err(Failure::precondition(format!("invalid: {detail}")))
    }
}

fn emit(ctx: &Ctx, a: &EmitArgs) -> Outcome {
    let p = &a.matrix;
    let body = match (a.what, p.builtin) {
        (EmitKind::Matrix, _) => Payload::SignMatrix(require_matrix(p)?),
        (EmitKind::Protocol, Some(Builtin::Eq)) => {
            Payload::Protocol(Protocol::Smp(eq_parity_protocol(need(p.n, "--n", "eq")?)?))
        }
        (EmitKind::Embedding, Some(Builtin::Eq)) => Payload::Embedding(eq_parity_embedding(need(p.n, "--n", "eq")?)?),
        (EmitKind::Embedding, Some(Builtin::Ham)) => {
            let (n, d) = (need(p.n, "--n", "ham")?, need(p.d, "--d", "ham")?);
            Payload::Embedding(ham_parity_embedding(n, d, ParitySource::Exhaustive)?.0)
        }
        (EmitKind::Realization, Some(Builtin::Eq)) => {
            Payload::Realization(eq_margin_realization(need(p.n, "--n", "eq")?)?)
        }
        (what, builtin) => {
            return Err(Failure::input(format!(
                "no builtin {what:?} for {}",
                builtin.map_or("an unspecified problem".into(), |b| format!("{b:?}"))
            )))
        }
    };
    ctx.write(&Document::new(body, ctx.provenance()))
}

fn ham(ctx: &Ctx, a: &HamArgs) -> Outcome {
    let report = if a.exhaustive {
        ham_parity_embedding(a.n, a.d, ParitySource::Exhaustive)?.1
    } else if let Some(strings) = a.samples {
        ham_parity_embedding(a.n, a.d, ParitySource::Sampled { strings, seed: ctx.seed })?.1
    } else {
        ham_parity_gap(a.n, a.d)?
    };
    ctx.write(&Document::new(Payload::Report(Report::Ham(report)), ctx.provenance()))
}
