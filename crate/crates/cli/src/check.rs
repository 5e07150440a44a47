use std::time::{Duration, Instant};

use clap::Args;
use cyclo_core::groupoid::CycGroupoid;
use cyclo_core::logic::{
    check, corpus, parse_geo, Bounds, CheckOptions, Corpus, GroupoidStructure, RationalStructure,
    SequentReport, Structure, Verdict,
};
use cyclo_core::qgroups::RationalSubgroup;
use serde_json::json;

use crate::{Global, Report, COUNTEREXAMPLE, OK, UNKNOWN};

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Built-in theory: G, Gbar, GT, GTbar, GC, GCbar, TE, TE-alt, TC, O, Obar, One, Onebar, TN.
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    pub theory: Option<String>,
    /// A `.geo` corpus file.
    #[arg(long)]
    pub file: Option<std::path::PathBuf>,
    /// Check in X_1, ..., X_n-max.
    #[arg(long, default_value_t = 3)]
    pub n_max: usize,
    /// Check in X_n only.
    #[arg(long, conflicts_with = "n_max")]
    pub n: Option<usize>,
    /// Subgroup of Q for ordered-group sequents, e.g. "2:inf,3:1".
    #[arg(long, default_value = "")]
    pub heights: String,
    /// Existential witnesses range over |disp| <= depth (default: the arrow bound).
    #[arg(long)]
    pub witness_depth: Option<i64>,
    /// Give up after this many seconds (exit 2).
    #[arg(long)]
    pub timeout: Option<u64>,
}

fn load(args: &CheckArgs, cap: usize) -> Result<Corpus, String> {
    match (&args.theory, &args.file) {
        (Some(t), _) => corpus(t, cap).map_err(|e| e.to_string()),
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_geo(&text).map_err(|e| format!("{}: {e}", path.display()))
        }
        (None, None) => Err("give --theory or --file".to_string()),
    }
}

pub fn run(g: &Global, args: &CheckArgs) -> Result<Report, String> {
    let c = load(args, g.scheme_cap as usize)?;
    let deadline = args
        .timeout
        .map(|s| Instant::now() + Duration::from_secs(s));
    let opts = CheckOptions {
        deadline,
        ..CheckOptions::default()
    };

    // (label, structure, default bound)
    let mut structures: Vec<(String, Box<dyn Structure>, i64)> = Vec::new();
    if c.signature.name == "ordered_group" {
        let h: RationalSubgroup<i64> = args
            .heights
            .parse()
            .map_err(|e| format!("--heights: {e}"))?;
        structures.push((format!("H = {h}"), Box::new(RationalStructure::new(h)), 3));
    } else {
        let ns: Vec<usize> = match args.n {
            Some(n) => vec![n],
            None => (1..=args.n_max).collect(),
        };
        for n in ns {
            let x = CycGroupoid::new(n).map_err(|e| e.to_string())?;
            structures.push((
                x.to_string(),
                Box::new(GroupoidStructure::new(x)),
                3 * n as i64,
            ));
        }
    }

    let mut text = String::new();
    let mut rows = Vec::new();
    let (mut fails, mut unknown) = (0, 0);
    for (label, s, default) in &structures {
        let m = g.arrow_bound.unwrap_or(*default);
        let b = g.index_bound.unwrap_or(m);
        if m < 0 || b < 0 {
            return Err("bounds must be non-negative".to_string());
        }
        let bounds = Bounds::new(m, b).with_witness_depth(args.witness_depth.unwrap_or(m));
        for ns in &c.sequents {
            let out = check(s.as_ref(), &ns.sequent, &bounds, &opts)
                .map_err(|e| format!("{}: {e}", ns.name))?;
            match &out.verdict {
                Verdict::Fails(_) => fails += 1,
                Verdict::UnknownAtBound(_) => unknown += 1,
                _ => {}
            }
            text.push_str(&format!("{label}  {:<28} {}\n", ns.name, out.verdict));
            let report = SequentReport::new(&ns.sequent, &out.verdict);
            let mut row = serde_json::to_value(&report).expect("serializable");
            row["model"] = json!(label);
            row["name"] = json!(ns.name);
            rows.push(row);
        }
    }
    let code = if fails > 0 {
        COUNTEREXAMPLE
    } else if unknown > 0 {
        UNKNOWN
    } else {
        OK
    };
    text.push_str(&format!(
        "{} checks: {fails} failed, {unknown} unknown at bound\n",
        rows.len()
    ));
    Ok(Report {
        text,
        json: json!({ "theory": c.theory, "signature": c.signature.name, "reports": rows }),
        code,
    })
}
