use cyclo_core::category::{enumerate_homs, CycMorphism};
use cyclo_core::export::model_dot;
use cyclo_core::groupoid::{parse_arrow, CycGroupoid};
use cyclo_core::logic::{expand_macro, parse, Parsed};
use cyclo_core::loops::{
    factor_through_cycle, factorize_arrow, insert_object, minimal_generator, pmin, GenMode, Loop,
};
use cyclo_core::qgroups::{
    archimedean_witness, colimit_cocone, common_generator, parse_ratio, NStarDiagram,
    RationalSubgroup,
};
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::literal::{model, parse_loop, parse_morphism, show_loop, show_morphism};
use crate::{check, Cli, Command, Format, Mode, ModelCmd, QCmd, Report};

pub fn run(cli: &Cli) -> Result<Report, String> {
    let g = &cli.global;
    match &cli.command {
        Command::Model(cmd) => model_cmd(cmd),
        Command::Factorize { n, arrow } => {
            let f = parse_arrow(model(*n)?, arrow)?;
            let fact = factorize_arrow(&f);
            let mut text = format!(
                "{f} = {} + {}*{n}  (base path {}, winding {})\n",
                fact.base_path_length, fact.winding, fact.base_path_length, fact.winding
            );
            let mut json = json!({ "arrow": f, "factorization": fact });
            if let Ok((alpha, w)) = factor_through_cycle(&f) {
                text.push_str(&format!("{f} = {alpha} o C_{}^{w}\n", f.dom()));
                json["through_cycle"] = json!({ "alpha": alpha, "winding": w });
            }
            Ok(Report::ok(text, json))
        }
        Command::Pmin { n, from, to } => {
            let f = pmin::<i64>(model(*n)?, *from, *to).map_err(|e| e.to_string())?;
            Ok(Report::ok(f.to_string(), json!(f)))
        }
        Command::Mingen { n, x, y, mode } => {
            let m = model(*n)?;
            let (x, y) = (parse_loop(m, x)?, parse_loop(m, y)?);
            let mode = match mode {
                Mode::Epicyclic => GenMode::Epicyclic,
                Mode::Cyclic => GenMode::Cyclic,
            };
            let (z, w) = minimal_generator(&x, &y, mode).map_err(|e| e.to_string())?;
            let mut text = format!("z = {}  (k = {})\n", show_loop(&z), z.len());
            for (name, wi) in ["x", "y"].iter().zip(&w) {
                let blocks: Vec<String> = wi
                    .blocks
                    .iter()
                    .map(|b| format!("[{}+{}]^{}", b.start, b.len, b.winding))
                    .collect();
                text.push_str(&format!(
                    "{name}: rotation {} blocks {}\n",
                    wi.rotation,
                    blocks.join(" ")
                ));
            }
            Ok(Report::ok(text, json!({ "z": z, "witnesses": w })))
        }
        Command::Insert { n, cycle, object } => {
            let x = parse_loop(model(*n)?, cycle)?;
            let (i, alpha, beta) = insert_object(&x, *object).map_err(|e| e.to_string())?;
            let text = format!("x_{i} = {beta} o {alpha}\n");
            Ok(Report::ok(
                text,
                json!({ "index": i, "alpha": alpha, "beta": beta }),
            ))
        }
        Command::Homs {
            from,
            to,
            max_degree,
            count,
            sample: how_many,
        } => {
            model(*from)?;
            model(*to)?;
            if *max_degree == 0 {
                return Err("--max-degree must be at least 1".to_string());
            }
            let mut homs = enumerate_homs(*from, *to, *max_degree);
            if *count {
                return Ok(Report::ok(homs.len().to_string(), json!(homs.len())));
            }
            if let Some(k) = how_many {
                let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
                let mut picked = sample(&mut rng, homs.len(), (*k).min(homs.len())).into_vec();
                picked.sort_unstable();
                homs = picked.into_iter().map(|i| homs[i].clone()).collect();
            }
            let text: String = homs
                .iter()
                .map(|h| format!("{}  degree {}\n", show_morphism(h), h.degree()))
                .collect();
            Ok(Report::ok(text, json!(homs)))
        }
        Command::Compose { first, second } => {
            let (h1, h2) = (parse_morphism(first)?, parse_morphism(second)?);
            let h = h2.after(&h1).map_err(|e| e.to_string())?;
            Ok(Report::ok(show_morphism(&h), json!(h)))
        }
        Command::Modfun { morphism } => {
            let h = parse_morphism(morphism)?;
            Ok(Report::ok(h.mod_of().to_string(), json!(h.mod_of())))
        }
        Command::Check(args) => check::run(g, args),
        Command::Parse {
            text,
            expand,
            sizes,
        } => {
            if let Some(name) = expand {
                let (call, f) = expand_macro(name, sizes).map_err(|e| e.to_string())?;
                let text = format!("{call}\n  = {f}\n");
                return Ok(Report::ok(
                    text,
                    json!({ "macro": call.to_string(), "expansion": f.to_string() }),
                ));
            }
            let text = text.as_deref().unwrap_or_default();
            match parse(text).map_err(|e| e.to_string())? {
                Parsed::Sequent(s) => Ok(Report::ok(
                    s.to_string(),
                    json!({ "sequent": s.to_string() }),
                )),
                Parsed::Formula(f) => Ok(Report::ok(
                    f.to_string(),
                    json!({ "formula": f.to_string() }),
                )),
            }
        }
        Command::Q(cmd) => q_cmd(cmd),
        Command::Export {
            format,
            n,
            loops,
            morphism,
        } => export(*format, *n, loops, morphism.as_deref()),
    }
}

fn model_cmd(cmd: &ModelCmd) -> Result<Report, String> {
    match cmd {
        ModelCmd::New { n } => {
            let x = model(*n)?;
            let gens: Vec<String> = x
                .generating_loop::<i64>()
                .iter()
                .map(|f| f.to_string())
                .collect();
            let text = format!("{x}: {n} objects, generators {}\n", gens.join(","));
            Ok(Report::ok(text, json!(x)))
        }
        ModelCmd::FromPerm { perm, transitive } => {
            let orbits =
                CycGroupoid::from_permutation(perm, *transitive).map_err(|e| e.to_string())?;
            let mut text = String::new();
            let mut rows = Vec::new();
            for o in &orbits {
                let labels: Vec<String> = o.labels.iter().map(|l| l.to_string()).collect();
                text.push_str(&format!("{}: objects {}\n", o.model, labels.join(" ")));
                rows.push(json!({ "n": o.model.n(), "labels": o.labels }));
            }
            Ok(Report::ok(text, json!(rows)))
        }
    }
}

fn subgroup(heights: &str) -> Result<RationalSubgroup<i64>, String> {
    heights.parse().map_err(|e| format!("--heights: {e}"))
}

fn ratio(text: &str) -> Result<Ratio<i64>, String> {
    parse_ratio(text).map_err(|e| e.to_string())
}

fn q_cmd(cmd: &QCmd) -> Result<Report, String> {
    match cmd {
        QCmd::CommonGen { heights, x, y } => {
            let h = subgroup(heights)?;
            let cg = common_generator(&h, &ratio(x)?, &ratio(y)?).map_err(|e| e.to_string())?;
            let text = format!("z={} n={} m={}", cg.z, cg.n, cg.m);
            let json = json!({ "z": cg.z.to_string(), "n": cg.n, "m": cg.m });
            Ok(Report::ok(text, json))
        }
        QCmd::Colimit { diagram } => {
            let d: NStarDiagram = diagram.parse().map_err(|e| format!("--diagram: {e}"))?;
            let c = colimit_cocone::<i64>(&d).map_err(|e| e.to_string())?;
            let values: Vec<String> = c.lambdas.iter().map(|l| l.to_string()).collect();
            let text: String = values
                .iter()
                .enumerate()
                .map(|(i, v)| format!("lambda_{i}={v}\n"))
                .collect();
            Ok(Report::ok(
                text,
                json!({ "root": c.root, "lambdas": values }),
            ))
        }
        QCmd::Contains { heights, q } => {
            let h = subgroup(heights)?;
            let member = h.contains(&ratio(q)?);
            Ok(Report::ok(member.to_string(), json!(member)))
        }
        QCmd::Archimedean { heights, x, y } => {
            let h = subgroup(heights)?;
            let n = archimedean_witness(&h, &ratio(x)?, &ratio(y)?).map_err(|e| e.to_string())?;
            Ok(Report::ok(format!("N={n}"), json!(n)))
        }
    }
}

fn export(
    format: Format,
    n: Option<usize>,
    loops: &[String],
    morphism: Option<&str>,
) -> Result<Report, String> {
    if let Some(text) = morphism {
        let h: CycMorphism = parse_morphism(text)?;
        return match format {
            Format::Json => {
                let json = json!(h);
                Ok(Report::ok(
                    serde_json::to_string_pretty(&json).expect("serializable"),
                    json,
                ))
            }
            Format::Dot => {
                let l = Loop::new(
                    h.source()
                        .generating_loop::<i64>()
                        .iter()
                        .map(|f| h.apply(f).unwrap())
                        .collect(),
                )
                .map_err(|e| e.to_string())?;
                let dot = model_dot(h.target(), &[("H(xi)", &l)]);
                Ok(Report::ok(dot.clone(), json!(dot)))
            }
        };
    }
    let x = model(n.expect("clap requires --n without --morphism"))?;
    let mut named = Vec::new();
    for spec in loops {
        let (name, arrows) = spec
            .split_once('=')
            .ok_or_else(|| format!("--loop expects name=disp@src,..., got {spec:?}"))?;
        named.push((name.to_string(), parse_loop(x, arrows)?));
    }
    match format {
        Format::Json => {
            let loops: serde_json::Map<String, serde_json::Value> =
                named.iter().map(|(k, l)| (k.clone(), json!(l))).collect();
            let json = json!({ "model": x, "loops": loops });
            Ok(Report::ok(
                serde_json::to_string_pretty(&json).expect("serializable"),
                json,
            ))
        }
        Format::Dot => {
            let refs: Vec<(&str, &Loop<i64>)> =
                named.iter().map(|(k, l)| (k.as_str(), l)).collect();
            let dot = model_dot(x, &refs);
            Ok(Report::ok(dot.clone(), json!(dot)))
        }
    }
}
