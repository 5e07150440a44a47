//! Command-line literals for loops and morphisms.

use cyclo_core::category::CycMorphism;
use cyclo_core::groupoid::{parse_arrow, CycGroupoid};
use cyclo_core::loops::Loop;

pub fn model(n: usize) -> Result<CycGroupoid, String> {
    CycGroupoid::new(n).map_err(|e| e.to_string())
}

/// `disp@src,disp@src,...`
pub fn parse_loop(model: CycGroupoid, text: &str) -> Result<Loop<i64>, String> {
    let arrows = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|a| parse_arrow(model, a))
        .collect::<Result<Vec<_>, _>>()?;
    Loop::new(arrows).map_err(|e| format!("{text:?}: {e}"))
}

/// `n>m@base:b1,...,bn` with the degree read off the blocks, or the JSON
/// form `{"src", "dst", "degree", "base", "blocks"}`.
pub fn parse_morphism(text: &str) -> Result<CycMorphism, String> {
    let t = text.trim();
    if t.starts_with('{') {
        let h: CycMorphism = serde_json::from_str(t).map_err(|e| format!("morphism JSON: {e}"))?;
        return h.validate().map_err(|e| e.to_string());
    }
    let bad = || format!("expected n>m@base:b1,...,bn, got {text:?}");
    let (head, blocks) = t.split_once(':').ok_or_else(bad)?;
    let (n, rest) = head.split_once('>').ok_or_else(bad)?;
    let (m, base) = rest.split_once('@').ok_or_else(bad)?;
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let (n, m, base) = (num(n)?, num(m)?, num(base)?);
    let blocks = blocks.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
    if m == 0 {
        return Err(bad());
    }
    let sum: usize = blocks.iter().sum();
    if sum == 0 || !sum.is_multiple_of(m) {
        return Err(format!(
            "blocks sum to {sum}, not a positive multiple of {m}"
        ));
    }
    CycMorphism::new(n, m, sum / m, base, blocks).map_err(|e| e.to_string())
}

pub fn show_morphism(h: &CycMorphism) -> String {
    let blocks: Vec<String> = h.blocks().iter().map(|b| b.to_string()).collect();
    format!(
        "{}>{}@{}:{}",
        h.src_n(),
        h.dst_m(),
        h.base(),
        blocks.join(",")
    )
}

pub fn show_loop(l: &Loop<i64>) -> String {
    let arrows: Vec<String> = l.arrows().iter().map(|f| f.to_string()).collect();
    arrows.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn morphism_literal_round_trip() {
        let h = parse_morphism("3>2@1:1,0,1").unwrap();
        assert_eq!(h.degree(), 1);
        assert_eq!(show_morphism(&h), "3>2@1:1,0,1");
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(parse_morphism(&json).unwrap(), h);
    }

    #[test]
    fn bad_literals() {
        assert!(parse_morphism("3>2:1,0,1").is_err());
        assert!(parse_morphism("3>2@0:1,0,0").is_err());
        assert!(parse_morphism("2>2@0:0,0").is_err());
        assert!(parse_loop(model(3).unwrap(), "1@0,1@2").is_err());
    }
}
