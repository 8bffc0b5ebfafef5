use std::fs;
use std::path::Path;
use std::sync::Arc;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use twocenter::curve::{ClosedCurve, CurveSource};
use twocenter::dynamics::{
    collision_orbit_on, find_torus_with, gcd, trace_orbit_on, CollisionSelector, EulerParams, Orbit, TorusFlow,
    TorusTolerances,
};
use twocenter::invariants::{
    numeric_invariants, theorem_formulas, verify_torus, DoubledSet, InvariantSet, NumericInvariants, PipelineOptions,
    VerificationReport,
};
use twocenter::io::{to_canonical_json, ArrangementDump, LiftDump, OrbitDump};
use twocenter::regularization::{birkhoff_lift_with, levi_civita_lift_with, LiftedCurve, Primary};
use twocenter::topology::{build_arrangement, find_double_points_with, GeometryOptions, JPlusBreakdown};

use crate::error::CliError;
use crate::svg::{render, Plot};
use crate::{CollisionChoice, CoverChoice, InvariantsArgs, OrbitArgs, SweepArgs, Tolerances, TorusArgs};

fn params_for(mu: f64, c: Option<f64>) -> Result<EulerParams, CliError> {
    Ok(match c {
        Some(c) => EulerParams::new(mu, c)?,
        None => EulerParams::with_midpoint_energy(mu)?,
    })
}

fn torus_tolerances(tol: &Tolerances) -> Result<TorusTolerances, CliError> {
    let mut t = TorusTolerances::default();
    if let Some(q) = tol.tol_quad {
        if !(q > 0.0) {
            return Err(CliError::Usage(format!("--tol-quad must be positive (got {q})")));
        }
        t.quad.rel_tol = q;
    }
    Ok(t)
}

fn geometry(tol: &Tolerances) -> Result<GeometryOptions, CliError> {
    let mut g = GeometryOptions::default();
    if let Some(x) = tol.tol_geom {
        if !(x > 0.0) {
            return Err(CliError::Usage(format!("--tol-geom must be positive (got {x})")));
        }
        g.cluster_tol = x;
    }
    Ok(g)
}

fn torus_indices(args: &TorusArgs) -> Result<(u32, u32), CliError> {
    match (args.k, args.l) {
        (Some(k), Some(l)) => Ok((k, l)),
        _ => Err(CliError::Usage("--k and --l are required".into())),
    }
}

fn flow_for(args: &TorusArgs) -> Result<Arc<TorusFlow>, CliError> {
    let (k, l) = torus_indices(args)?;
    let params = params_for(args.mu, args.c)?;
    let tol = torus_tolerances(&args.tol)?;
    let torus = find_torus_with(&params, k, l, &tol)?;
    info!(
        "torus T({k},{l}): f_lambda = {}, lambda_max = {}, T_lambda = {}, T_nu = {}",
        torus.f_lambda, torus.lambda_max, torus.t_lambda, torus.t_nu
    );
    Ok(Arc::new(TorusFlow::with_options(&torus, &tol.quad)?))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cover_name(cover: CoverChoice) -> &'static str {
    match cover {
        CoverChoice::LeviCivitaE => "levi_civita_E",
        CoverChoice::LeviCivitaM => "levi_civita_M",
        CoverChoice::Birkhoff => "birkhoff",
    }
}

fn lift_under(
    cover: CoverChoice,
    curve: &ClosedCurve,
    source: Option<&dyn CurveSource>,
) -> Result<LiftedCurve, CliError> {
    Ok(match cover {
        CoverChoice::LeviCivitaE => levi_civita_lift_with(curve, Primary::E, source)?,
        CoverChoice::LeviCivitaM => levi_civita_lift_with(curve, Primary::M, source)?,
        CoverChoice::Birkhoff => birkhoff_lift_with(curve, source)?,
    })
}

pub fn orbit(args: &OrbitArgs) -> Result<(), CliError> {
    let flow = flow_for(&args.torus)?;
    let orbit = match args.collision {
        Some(which) => {
            if args.torus.phase.is_some() {
                return Err(CliError::Usage("--phase cannot be combined with --collision".into()));
            }
            let which = match which {
                CollisionChoice::First => CollisionSelector::First,
                CollisionChoice::Second => CollisionSelector::Second,
            };
            collision_orbit_on(flow, which, args.torus.resolution)?
        }
        None => {
            let phase = args.torus.phase.unwrap_or_else(|| flow.torus().generic_phase());
            trace_orbit_on(flow, phase, args.torus.resolution)?
        }
    };
    let residual = orbit.max_energy_residual();
    if residual > 1e-8 {
        warn!("energy residual {residual:e} along the trace");
    }
    let dump = OrbitDump::from_orbit(&orbit);
    let stem = match args.collision {
        Some(CollisionChoice::First) => format!("collision1_k{}_l{}", dump.k, dump.l),
        Some(CollisionChoice::Second) => format!("collision2_k{}_l{}", dump.k, dump.l),
        None => format!("orbit_k{}_l{}", dump.k, dump.l),
    };
    write_file(&args.out_dir.join(format!("{stem}.json")), &dump.to_json()?)?;
    write_file(&args.out_dir.join(format!("{stem}.csv")), &dump.to_csv())?;
    if let Some(cover) = args.lift {
        let lifted = lift_under(cover, &orbit.curve, Some(&orbit))?;
        let lift_dump = LiftDump::new(&dump, &lifted);
        let name = format!("{stem}_lift_{}.json", cover_name(cover));
        write_file(&args.out_dir.join(name), &lift_dump.to_json()?)?;
    }
    if let Some(path) = &args.svg {
        let plot = Plot {
            samples: orbit.curve.points(),
            markers: orbit.curve.markers(),
            lambda_max: orbit.torus.lambda_max,
            arrows: args.arrows,
            title: format!("T({},{}) at mu = {}, c = {}", dump.k, dump.l, dump.mu, dump.c),
        };
        write_file(path, &render(&plot))?;
    }
    Ok(())
}

/// The orbit to analyse: traced, or loaded from a dump.
struct Subject {
    dump: OrbitDump,
    curve: ClosedCurve,
    orbit: Option<Orbit>,
}

fn subject(args: &InvariantsArgs) -> Result<Subject, CliError> {
    if let Some(path) = &args.from {
        let dump = OrbitDump::load(path)?;
        let curve = dump
            .curve()
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        return Ok(Subject {
            dump,
            curve,
            orbit: None,
        });
    }
    let flow = flow_for(&args.torus)?;
    let phase = args.torus.phase.unwrap_or_else(|| flow.torus().generic_phase());
    let orbit = trace_orbit_on(flow, phase, args.torus.resolution)?;
    Ok(Subject {
        dump: OrbitDump::from_orbit(&orbit),
        curve: orbit.curve.clone(),
        orbit: Some(orbit),
    })
}

fn suggest_phase(dump: &OrbitDump) -> f64 {
    let spacing = dump.t_nu / (2.0 * f64::from(dump.k.max(1)));
    dump.phase + 0.1 * spacing
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

pub fn invariants(args: &InvariantsArgs) -> Result<(), CliError> {
    let geometry = geometry(&args.torus.tol)?;
    let subject = subject(args)?;
    let source = subject.orbit.as_ref().map(|o| o as &dyn CurveSource);
    let details: NumericInvariants = match numeric_invariants(&subject.curve, source, &geometry) {
        Ok(d) => d,
        Err(e) => {
            let err = CliError::from(e);
            return Err(match err {
                CliError::Numeric(m) => CliError::Numeric(format!(
                    "{m}; try another representative, e.g. --phase {}",
                    suggest_phase(&subject.dump)
                )),
                other => other,
            });
        }
    };
    let d = &subject.dump;
    let closed = theorem_formulas(d.k, d.l).ok();
    let mut out = object(serde_json::to_value(details.set).map_err(|e| CliError::Numeric(e.to_string()))?);
    for (key, value) in [
        ("mu", json!(d.mu)),
        ("c", json!(d.c)),
        ("k", json!(d.k)),
        ("l", json!(d.l)),
        ("phase", json!(d.phase)),
        ("f_lambda", json!(d.f_lambda)),
        ("closed_form", json!(closed)),
        ("matches_closed_form", json!(closed.map(|c| c == details.set))),
        ("intermediate", json!(details)),
    ] {
        out.insert(key.to_string(), value);
    }
    print!("{}", to_canonical_json(&out)?);

    if let Some(dir) = &args.out_dir {
        write_dumps(dir, &subject, &geometry, source)?;
    }
    match closed {
        Some(c) if c != details.set => Err(CliError::Verification(format!(
            "numeric invariants {} differ from the closed form {}",
            show(&details.set),
            show(&c)
        ))),
        _ => Ok(()),
    }
}

fn show(s: &InvariantSet) -> String {
    format!("(j0 {}, jE {}, jM {}, n {}, jEM {})", s.j0, s.j_e, s.j_m, s.n, s.j_em)
}

fn write_dumps(
    dir: &Path,
    subject: &Subject,
    geometry: &GeometryOptions,
    source: Option<&dyn CurveSource>,
) -> Result<(), CliError> {
    let stem = format!("k{}_l{}", subject.dump.k, subject.dump.l);
    let doubles = find_double_points_with(&subject.curve, geometry)?;
    let arr = build_arrangement(&subject.curve, &doubles, geometry)?;
    let breakdown = JPlusBreakdown::from_arrangement(&arr)?;
    write_file(
        &dir.join(format!("arrangement_{stem}.json")),
        &ArrangementDump::new(&arr, &breakdown).to_json()?,
    )?;
    for cover in [
        CoverChoice::LeviCivitaE,
        CoverChoice::LeviCivitaM,
        CoverChoice::Birkhoff,
    ] {
        let lifted = lift_under(cover, &subject.curve, source)?;
        write_file(
            &dir.join(format!("lift_{}_{stem}.json", cover_name(cover))),
            &LiftDump::new(&subject.dump, &lifted).to_json()?,
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    mu: f64,
    c: f64,
    k: u32,
    l: u32,
    passed: bool,
    failed_checks: Vec<String>,
    report_file: String,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    total: usize,
    passed: usize,
    failed: usize,
    runs: Vec<SweepRow>,
}

fn parse_energy(mu: f64, text: &str) -> Result<EulerParams, CliError> {
    if text.trim().eq_ignore_ascii_case("auto") {
        return params_for(mu, None);
    }
    let c: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--c expects numbers or `auto` (got {text:?})")))?;
    params_for(mu, Some(c))
}

fn cell(set: Option<&DoubledSet>, f: impl Fn(&DoubledSet) -> String) -> String {
    set.map_or_else(|| "-".to_string(), f)
}

fn halves(x2: i64) -> String {
    if x2 % 2 == 0 {
        (x2 / 2).to_string()
    } else {
        format!(
            "{}.5",
            if x2 < 0 {
                format!("-{}", (-x2) / 2)
            } else {
                (x2 / 2).to_string()
            }
        )
    }
}

fn table(reports: &[VerificationReport]) -> String {
    let mut out = format!(
        "{:>6} {:>10} {:>3} {:>3} {:>6} {:>6} {:>6} {:>3} {:>4} {:>4}  {}\n",
        "mu", "c", "k", "l", "j0", "jE", "jM", "n", "jEM", "N", "status"
    );
    for r in reports {
        let set = r.numeric.as_ref();
        let status = if r.passed() {
            "pass".to_string()
        } else {
            let names: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
            format!("FAIL ({})", names.join(", "))
        };
        out.push_str(&format!(
            "{:>6} {:>10.6} {:>3} {:>3} {:>6} {:>6} {:>6} {:>3} {:>4} {:>4}  {}\n",
            r.mu,
            r.c,
            r.k,
            r.l,
            cell(set, |s| halves(s.j0_x2)),
            cell(set, |s| halves(s.j_e_x2)),
            cell(set, |s| halves(s.j_m_x2)),
            cell(set, |s| s.n.to_string()),
            cell(set, |s| s.j_em.to_string()),
            r.collision_n.numeric.map_or("-".to_string(), |n| n.to_string()),
            status
        ));
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    out.push_str(&format!("{passed}/{} tori passed\n", reports.len()));
    out
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let mut opts = PipelineOptions {
        resolution: args.resolution,
        ..PipelineOptions::default()
    };
    opts.torus = torus_tolerances(&args.tol)?;
    opts.geometry = geometry(&args.tol)?;

    let mut slices: Vec<EulerParams> = Vec::new();
    for &mu in &args.mu {
        for c in &args.c {
            slices.push(parse_energy(mu, c)?);
        }
    }
    let mut tasks: Vec<(EulerParams, u32, u32)> = Vec::new();
    for p in &slices {
        for k in 1..=args.max_k {
            for l in 1..=args.max_l {
                if gcd(k, l) == 1 {
                    tasks.push((*p, k, l));
                }
            }
        }
    }
    info!("sweeping {} tori", tasks.len());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", args.jobs)))?;
    // Results come back in task order whatever the scheduling.
    let reports: Vec<VerificationReport> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(p, k, l)| {
                let r = verify_torus(p, *k, *l, &opts);
                info!("mu = {} c = {} ({k},{l}): passed = {}", p.mu(), p.c(), r.passed());
                r
            })
            .collect()
    });

    fs::create_dir_all(&args.out_dir)?;
    let mut rows = Vec::with_capacity(reports.len());
    for r in &reports {
        let name = format!("report_mu{}_c{}_k{}_l{}.json", r.mu, r.c, r.k, r.l);
        fs::write(args.out_dir.join(&name), to_canonical_json(r)?)?;
        rows.push(SweepRow {
            mu: r.mu,
            c: r.c,
            k: r.k,
            l: r.l,
            passed: r.passed(),
            failed_checks: r.failures().map(|c| c.name.clone()).collect(),
            report_file: name,
        });
    }
    let passed = rows.iter().filter(|r| r.passed).count();
    let summary = SweepSummary {
        total: rows.len(),
        passed,
        failed: rows.len() - passed,
        runs: rows,
    };
    let text = table(&reports);
    write_file(&args.out_dir.join("summary.json"), &to_canonical_json(&summary)?)?;
    write_file(&args.out_dir.join("summary.txt"), &text)?;
    print!("{text}");
    let failing: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| {
            let names: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
            format!("mu = {} c = {} ({},{}): {}", r.mu, r.c, r.k, r.l, names.join(", "))
        })
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failing.join("; ")))
    }
}
