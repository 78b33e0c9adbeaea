use std::fmt;
use std::fs;
use std::path::Path;

use morrey::blocks::{duality_pairing, make_block, regroup_decomposition, BlockDecomposition, Term};
use morrey::grid::{sample_catalog, CatalogSpec, Cube, CubePolicy, Grid, GridFunction};
use morrey::norms::{morrey_norm, weak_morrey_norm};
use morrey::operators::OperatorSpec;
use morrey::verify::{
    self, boundedness_ratio, function_corpus, hedberg_check, membership_suite, packed_family_check,
    riesz_counterexample, suite, triple_condition, vector_valued_counterexample, Aggregation, HedbergKind,
    HedbergSetup, Instance, Member, NormPair, SeriesReport, Verdict, DRIFT_TOL,
};
use morrey::weight::{classify_gq, dini_tilde, integral_condition_z0, normalize_to_gq, OperatorKind, ProbeGrid, WeightFunction};
use serde_json::{json, Value};

use crate::args::{Cli, Cmd, Common, FnOpt, ProbeOpt, VerifyCmd, WeightOpt};

pub enum Status {
    Pass,
    Fail,
}

impl From<bool> for Status {
    fn from(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(morrey::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<morrey::Error> for CliError {
    fn from(e: morrey::Error) -> Self {
        CliError::Core(e)
    }
}

type Res<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn floats(flag: &str, s: &str) -> Res<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("--{flag}: `{x}` is not a number"))))
        .collect()
}

fn parse_grid(s: &str) -> Res<Grid> {
    let v = floats("grid", s)?;
    let [n, l, cells] = v[..] else {
        return Err(usage(format!("--grid expects n,L,N, got `{s}`")));
    };
    if n.fract() != 0.0 || cells.fract() != 0.0 || n < 1.0 || cells < 1.0 {
        return Err(usage(format!("--grid: n and N must be positive integers, got `{s}`")));
    }
    Ok(Grid::new(n as usize, l, cells as usize)?)
}

fn parse_probe(p: &ProbeOpt) -> Res<ProbeGrid> {
    let Some(s) = &p.probe else {
        return Ok(ProbeGrid::default());
    };
    let v = floats("probe", s)?;
    let [lo, hi, ppo] = v[..] else {
        return Err(usage(format!("--probe expects t_min,t_max,points_per_octave, got `{s}`")));
    };
    if ppo.fract() != 0.0 || ppo < 1.0 {
        return Err(usage(format!("--probe: points per octave must be a positive integer, got {ppo}")));
    }
    Ok(ProbeGrid::new(lo, hi, ppo as usize)?)
}

fn parse_weight(s: &str) -> Res<WeightFunction> {
    Ok(s.parse::<WeightFunction>()?)
}

fn parse_policy(f: &FnOpt, grid: &Grid) -> Res<CubePolicy> {
    let base = match f.sides.trim() {
        "dyadic" => CubePolicy::dyadic(grid),
        "all" => CubePolicy::all(grid),
        list => {
            let sides = list
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| usage(format!("--sides: `{x}` is not a side"))))
                .collect::<Res<Vec<_>>>()?;
            CubePolicy { sides, stride: 1 }
        }
    };
    let policy = CubePolicy {
        stride: f.stride,
        ..base
    };
    policy.validate(grid)?;
    Ok(policy)
}

fn load_function(f: &FnOpt) -> Res<GridFunction> {
    match (&f.func, &f.fn_file) {
        (Some(_), Some(_)) => Err(usage("give either --fn or --fn-file, not both")),
        (None, None) => Err(usage("a function is required: --fn <spec> or --fn-file <path>")),
        (Some(spec), None) => {
            let grid = parse_grid(f.grid.as_deref().ok_or_else(|| usage("--fn needs --grid n,L,N"))?)?;
            let spec: CatalogSpec = spec.parse()?;
            Ok(sample_catalog(&spec, &grid)?)
        }
        (None, Some(path)) => {
            let g = GridFunction::load(path)?;
            if let Some(s) = &f.grid {
                if parse_grid(s)? != *g.grid() {
                    return Err(usage(format!("--grid {s} differs from the grid stored in {}", path.display())));
                }
            }
            Ok(g)
        }
    }
}

fn emit(common: &Common, mut v: Value) -> Res<()> {
    if let Value::Object(m) = &mut v {
        m.insert("deterministic".into(), json!(common.deterministic));
        if let Some(s) = common.seed {
            m.insert("seed".into(), json!(s));
        }
    }
    let text = serde_json::to_string_pretty(&v).map_err(morrey::Error::from)? + "\n";
    match &common.out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn with(mut v: Value, extra: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
        a.extend(b);
    }
    v
}

fn write_rows<'a>(common: &Common, rows: impl IntoIterator<Item = &'a Instance>) -> Res<()> {
    if let Some(p) = &common.csv {
        let file = fs::File::create(p).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
        verify::write_csv(rows, file)?;
    }
    Ok(())
}

fn write_profile(common: &Common, r: &[f64], ratio: &[f64]) -> Res<()> {
    if let Some(p) = &common.csv {
        let mut text = String::from("r,ratio\n");
        for (a, b) in r.iter().zip(ratio) {
            text += &format!("{a:e},{b:e}\n");
        }
        fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn read_blocks(path: &Path, grid: Grid, w: &WeightOpt) -> Res<BlockDecomposition> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(BlockDecomposition::from_json(&text, grid, parse_weight(&w.weight)?, w.q, base)?)
}

fn parse_cube(s: &str, n: usize) -> Res<Cube> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| usage(format!("--cube: `{x}` is not a cell index"))))
        .collect::<Res<Vec<_>>>()?;
    if v.len() != n + 1 {
        return Err(usage(format!("--cube expects {n} corner indices and a side, got `{s}`")));
    }
    Ok(Cube::new(&v[..n], v[n])?)
}

pub fn execute(cli: &Cli) -> Res<Status> {
    let common = &cli.common;
    match &cli.cmd {
        Cmd::CheckWeight { w, n, probe } => {
            let phi = parse_weight(&w.weight)?;
            let probe = parse_probe(probe)?;
            let class = classify_gq(&phi, w.q, *n, &probe)?;
            let z0 = integral_condition_z0(&phi, w.q, *n, &probe, 64)?;
            let dini = dini_tilde(&phi, 1.0).ok();
            emit(
                common,
                json!({
                    "weight": phi.to_string(),
                    "q": w.q,
                    "n": n,
                    "probe": probe,
                    "gq_member": class.member,
                    "doubling": class.doubling_constant,
                    "class": class,
                    "z0": {
                        "sup": z0.sup_constant,
                        "divergent": z0.divergent,
                        "m0": z0.m0,
                        "epsilon_star": z0.epsilon_star,
                    },
                    "dini_at_1": dini,
                }),
            )?;
            Ok(Status::Pass)
        }
        Cmd::NormalizeWeight { w, n, probe, table } => {
            let phi = parse_weight(&w.weight)?;
            let probe = parse_probe(probe)?;
            let out = normalize_to_gq(&phi, w.q, *n, &probe)?;
            let class = classify_gq(&out, w.q, *n, &probe)?;
            if let Some(path) = table {
                let tab = out.tabulate(&probe)?;
                tab.as_table().expect("tabulate yields a table").write_csv(path)?;
            }
            emit(
                common,
                json!({"input": phi.to_string(), "normalized": out.to_string(), "gq_member": class.member, "class": class}),
            )?;
            Ok(Status::Pass)
        }
        Cmd::Norm { w, f } | Cmd::WeakNorm { w, f } => {
            let weak = matches!(cli.cmd, Cmd::WeakNorm { .. });
            let func = load_function(f)?;
            let phi = parse_weight(&w.weight)?;
            let policy = parse_policy(f, func.grid())?;
            let r = if weak {
                weak_morrey_norm(&func, &phi, w.q, &policy)?
            } else {
                morrey_norm(&func, &phi, w.q, &policy)?
            };
            let label = f.func.clone().unwrap_or_else(|| f.fn_file.as_ref().unwrap().display().to_string());
            emit(
                common,
                with(
                    to_value(&r),
                    json!({"norm": if weak {"weak"} else {"strong"}, "function": label, "weight": phi.to_string(), "q": w.q, "grid": func.grid()}),
                ),
            )?;
            Ok(Status::Pass)
        }
        Cmd::ApplyOp { op, f, save } => {
            let spec: OperatorSpec = op.parse()?;
            let func = load_function(f)?;
            let policy = parse_policy(f, func.grid())?;
            let out = spec.apply(&func, &policy)?;
            let mut v = json!({
                "op": spec.to_string(),
                "grid": out.grid(),
                "sup": out.sup_norm(),
                "l1": out.lq_norm(1.0),
            });
            match save {
                Some(p) => {
                    out.save(p)?;
                    v["saved"] = json!(p.display().to_string());
                }
                None => v["values"] = json!(out.values()),
            }
            emit(common, v)?;
            Ok(Status::Pass)
        }
        Cmd::MakeBlock {
            w,
            f,
            cube,
            lambda,
            save,
            append,
        } => {
            let func = load_function(f)?;
            let phi = parse_weight(&w.weight)?;
            let cube = parse_cube(cube, func.grid().n())?;
            let block = make_block(&func, &cube, &phi, w.q)?;
            let certified = block.certified;
            let norm = block.data.lq_norm(w.q / (w.q - 1.0));
            let mut terms = Vec::new();
            if *append {
                let p = save.as_ref().ok_or_else(|| usage("--append needs --save"))?;
                if p.exists() {
                    terms = read_blocks(p, *func.grid(), w)?.terms;
                }
            }
            terms.push(Term { lambda: *lambda, block });
            let d = BlockDecomposition::new(*func.grid(), phi, w.q, terms)?;
            let json = d.to_json()?;
            let mut v = json!({"cube": cube, "certified": certified, "norm_conjugate": norm, "terms": d.terms.len()});
            match save {
                Some(p) => {
                    fs::write(p, json).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
                    v["saved"] = json!(p.display().to_string());
                }
                None => v["decomposition"] = serde_json::from_str(&json).map_err(morrey::Error::from)?,
            }
            emit(common, v)?;
            Ok(certified.into())
        }
        Cmd::Regroup { w, blocks, grid, save } => {
            let d = read_blocks(blocks, parse_grid(grid)?, w)?;
            let r = regroup_decomposition(&d)?;
            let cert = r.decomposition.all_certified();
            let mut v = json!({
                "input_terms": d.terms.len(),
                "output_terms": r.decomposition.terms.len(),
                "assignment": r.assignment,
                "observed_constant": r.observed_constant,
                "all_certified": cert,
            });
            if let Some(p) = save {
                fs::write(p, r.decomposition.to_json()?).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
                v["saved"] = json!(p.display().to_string());
            }
            emit(common, v)?;
            Ok(cert.into())
        }
        Cmd::Pairing { w, blocks, f } => {
            let func = load_function(f)?;
            let d = read_blocks(blocks, *func.grid(), w)?;
            let policy = parse_policy(f, func.grid())?;
            let p = duality_pairing(&func, &d, &policy)?;
            emit(common, to_value(&p))?;
            Ok(p.holds.into())
        }
        Cmd::Verify(v) => verify_cmd(common, v),
        Cmd::Suite { only } => {
            let seed = common.seed.unwrap_or(suite::DEFAULT_SEED);
            let ids: Vec<u8> = if only.is_empty() {
                suite::CRITERIA.iter().map(|c| c.0).collect()
            } else {
                only.clone()
            };
            let mut outcomes = Vec::new();
            for id in ids {
                let o = suite::run(id, seed).ok_or_else(|| usage(format!("no criterion {id}; ids run 1..=15")))?;
                eprintln!("{} {:>2} {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.title);
                outcomes.push(o);
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            let ok = passed == outcomes.len();
            emit(common, json!({"seed": seed, "passed": passed, "total": outcomes.len(), "outcomes": outcomes}))?;
            Ok(ok.into())
        }
    }
}

fn series_out(common: &Common, r: &SeriesReport) -> Res<Status> {
    write_rows(common, &r.instances())?;
    emit(common, to_value(r))?;
    Ok(r.passed.into())
}

fn verify_cmd(common: &Common, v: &VerifyCmd) -> Res<Status> {
    match v {
        VerifyCmd::Maximal {
            op,
            w,
            target_weight,
            t,
            weak,
            family,
            aggregate,
            grid,
            stride,
        } => {
            let spec: OperatorSpec = op.parse()?;
            let grid = parse_grid(grid)?;
            let phi = parse_weight(&w.weight)?;
            let norms = NormPair {
                psi: match target_weight {
                    Some(s) => parse_weight(s)?,
                    None => phi.clone(),
                },
                t: t.unwrap_or(w.q),
                weak_target: *weak,
                phi,
                q: w.q,
            };
            let members: Vec<Member> = if family.trim() == "corpus" {
                function_corpus(grid.half_width())?.into_iter().map(Member::from).collect()
            } else {
                family
                    .split(';')
                    .map(|s| Ok(Member::from(s.trim().parse::<CatalogSpec>()?)))
                    .collect::<Res<_>>()?
            };
            let agg = match aggregate.trim() {
                "none" => Aggregation::None,
                s => {
                    let (u, j) = s
                        .split_once(',')
                        .ok_or_else(|| usage(format!("--aggregate expects none or u,jmax, got `{s}`")))?;
                    let u = if u.trim() == "inf" {
                        f64::INFINITY
                    } else {
                        u.trim().parse().map_err(|_| usage(format!("--aggregate: bad exponent `{u}`")))?
                    };
                    let j_max = j.trim().parse().map_err(|_| usage(format!("--aggregate: bad jmax `{j}`")))?;
                    Aggregation::Lu { u, j_max }
                }
            };
            let r = boundedness_ratio(&spec, &norms, &members, agg, &grid, *stride)?;
            write_rows(common, r.instances.iter().chain(&r.refined_instances))?;
            emit(common, to_value(&r))?;
            Ok((r.verdict == Verdict::Bounded).into())
        }
        VerifyCmd::VectorCounterexample { p, q, u, m, stride } => {
            let u = if u.trim() == "inf" {
                f64::INFINITY
            } else {
                u.trim().parse().map_err(|_| usage(format!("--u: `{u}` is not a number")))?
            };
            series_out(common, &vector_valued_counterexample(*p, *q, u, m, *stride)?)
        }
        VerifyCmd::RieszCounterexample { p, q, n, m, stride } => {
            series_out(common, &riesz_counterexample(*p, *q, *n, m, *stride)?)
        }
        VerifyCmd::Hedberg {
            weight,
            rho,
            a,
            pq,
            func,
            grid,
            norm_q,
            stride,
            probe,
        } => {
            let grid = parse_grid(grid)?;
            let probe = parse_probe(probe)?;
            let phi = parse_weight(weight)?;
            let (kind, exponent) = match (a, pq) {
                (Some(_), Some(_)) => return Err(usage("give either --a or --pq, not both")),
                (_, Some(s)) => {
                    let v = floats("pq", s)?;
                    let [p, q] = v[..] else {
                        return Err(usage(format!("--pq expects p,q, got `{s}`")));
                    };
                    (HedbergKind::Fractional { p, q }, 1.0 - p / q)
                }
                (a, None) => {
                    let a = a.unwrap_or(0.5);
                    (HedbergKind::Maximal { a }, 1.0 - a)
                }
            };
            let rho = match rho {
                Some(s) => parse_weight(s)?,
                None => phi.powered(exponent, &probe)?,
            };
            let setup = HedbergSetup {
                kind,
                rho,
                phi,
                norm_q: *norm_q,
            };
            let members: Vec<Member> = match func {
                Some(s) => vec![Member::from(s.parse::<CatalogSpec>()?)],
                None => function_corpus(grid.half_width())?.into_iter().map(Member::from).collect(),
            };
            let reports = members
                .iter()
                .map(|m| hedberg_check(&setup, m, &grid, *stride, &probe))
                .collect::<morrey::Result<Vec<_>>>()?;
            let coarse = reports.iter().map(|r| r.sup_pointwise_ratio).fold(0.0f64, f64::max);
            let fine = reports.iter().map(|r| r.refined_sup_ratio).fold(0.0f64, f64::max);
            let drift = (fine / coarse - 1.0).abs();
            let ok = coarse.is_finite() && drift < DRIFT_TOL;
            if common.csv.is_some() {
                let rows: Vec<Instance> = reports
                    .iter()
                    .flat_map(|r| {
                        [(r.grid, r.sup_pointwise_ratio), (r.refined, r.refined_sup_ratio)].map(|(g, s)| Instance {
                            family_id: r.function.clone(),
                            m_or_k: 0.0,
                            cells: g.cells_per_axis(),
                            in_norm: 1.0,
                            out_norm: s,
                            ratio: s,
                        })
                    })
                    .collect();
                write_rows(common, &rows)?;
            }
            emit(
                common,
                json!({"sup_ratio": coarse, "refined_sup_ratio": fine, "drift": drift, "stable": ok, "reports": reports}),
            )?;
            Ok(ok.into())
        }
        VerifyCmd::Packed {
            weight,
            p,
            q,
            q2,
            k,
            grid,
            stride,
        } => {
            let grid = parse_grid(grid)?;
            let phi = match weight {
                Some(s) => parse_weight(s)?,
                None => WeightFunction::power(grid.n() as f64 / p),
            };
            series_out(common, &packed_family_check(&phi, *q, *q2, k, &grid, *stride)?)
        }
        VerifyCmd::Membership { w, grid, probe } => {
            let r = membership_suite(&parse_weight(&w.weight)?, w.q, &parse_grid(grid)?, &parse_probe(probe)?)?;
            emit(common, with(to_value(&r), json!({"passed": r.passed()})))?;
            Ok(r.passed().into())
        }
        VerifyCmd::Spanne {
            n,
            p,
            alpha,
            perturb,
            probe,
        } => condition(common, OperatorKind::Spanne, *n, *p, *alpha, *perturb, probe),
        VerifyCmd::Adams {
            n,
            p,
            q,
            simple,
            perturb,
            probe,
        } => {
            let kind = if *simple {
                OperatorKind::AdamsSimple
            } else {
                OperatorKind::AdamsFull
            };
            condition(common, kind, *n, *p, *q, *perturb, probe)
        }
    }
}

fn condition(common: &Common, kind: OperatorKind, n: usize, p: f64, second: f64, perturb: f64, probe: &ProbeOpt) -> Res<Status> {
    let probe = parse_probe(probe)?;
    let r = triple_condition(kind, n, p, second, perturb, &probe)?;
    let holds = r.holds(2.0);
    write_profile(common, &r.r, &r.ratio_profile)?;
    emit(common, with(to_value(&r), json!({"holds": holds, "probe": probe})))?;
    Ok(holds.into())
}
