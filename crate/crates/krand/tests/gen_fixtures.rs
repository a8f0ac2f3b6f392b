//! Regenerates the checked-in data fixtures. Run explicitly:
//!
//! ```text
//! cargo test -p krand --test gen_fixtures -- --ignored
//! ```
//!
//! Everything is derived from fixed seeds, so regeneration is reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use krand::census::{binary_of, complement_prefix_complexity, density_report};
use krand::derand::pit::{Expr, PitInstance, Poly};
use krand::kvm::{build_ktable, BuildParams, TimeBound};
use krand::rng::{Rng, RngStream};

const PRIME: u64 = 31;
const VARS: [&str; 3] = ["a", "b", "c"];

fn random_expr(rng: &mut Rng, depth: u32) -> Expr {
    let pick = rng.below(if depth == 0 { 2 } else { 6 });
    match pick {
        0 => Expr::Const(rng.below(PRIME)),
        1 => Expr::Var(rng.below(3) as usize),
        2 | 3 => Expr::Add(
            Box::new(random_expr(rng, depth - 1)),
            Box::new(random_expr(rng, depth - 1)),
        ),
        4 => Expr::Mul(
            Box::new(random_expr(rng, depth - 1)),
            Box::new(random_expr(rng, depth - 1)),
        ),
        _ => Expr::Pow(
            Box::new(random_expr(rng, depth - 1)),
            2 + rng.below(2) as u32,
        ),
    }
}

fn render(expr: &Expr) -> String {
    match expr {
        Expr::Const(c) => c.to_string(),
        Expr::Var(i) => VARS[*i].to_string(),
        Expr::Add(x, y) => format!("({} + {})", render(x), render(y)),
        Expr::Mul(x, y) => format!("({} * {})", render(x), render(y)),
        Expr::Pow(x, e) => format!("({})^{e}", render(x)),
    }
}

/// Rebuild an expression from a normal form, as an explicit sum of monomials
/// with the term order rotated, so identities are syntactically nontrivial.
fn render_normal_form(poly: &Poly, rotate: usize) -> String {
    if poly.terms.is_empty() {
        return "0".to_string();
    }
    let mut terms: Vec<String> = poly
        .terms
        .iter()
        .map(|(exps, coeff)| {
            let mut factors = vec![coeff.to_string()];
            for (i, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(VARS[i].to_string()),
                    _ => factors.push(format!("{}^{e}", VARS[i])),
                }
            }
            factors.join(" * ")
        })
        .collect();
    let n = terms.len();
    terms.rotate_left(rotate % n);
    terms.join(" + ")
}

fn degree_ok(expr: &Expr) -> bool {
    Poly::from_expr(expr, 3, PRIME).total_degree() <= (PRIME - 1) / 3
}

#[test]
#[ignore = "writes tests/data/pit_gf31.txt; run on demand"]
fn generate_pit_instances() {
    let mut rng = Rng::from_stream(RngStream::new(0, "pit-fixtures"));
    let mut lines = String::new();
    writeln!(
        lines,
        "# 50 identity-testing instances over GF({PRIME}): 25 identities, then 25 non-identities."
    )
    .unwrap();

    let mut identities = 0;
    while identities < 25 {
        let e = random_expr(&mut rng, 3);
        if !degree_ok(&e) {
            continue;
        }
        let nf = Poly::from_expr(&e, 3, PRIME);
        if nf.terms.is_empty() && rng.below(4) != 0 {
            continue; // keep at most a few trivially-zero sides
        }
        let lhs = render(&e);
        let rhs = render_normal_form(&nf, identities);
        let line = format!("{lhs} == {rhs}");
        let inst = PitInstance::parse_line(&line, PRIME).expect("generated identity parses");
        assert!(inst.is_identity());
        writeln!(lines, "{line}").unwrap();
        identities += 1;
    }

    let mut distinct = 0;
    while distinct < 25 {
        let e1 = random_expr(&mut rng, 3);
        let e2 = random_expr(&mut rng, 2);
        if !degree_ok(&e1) || !degree_ok(&e2) {
            continue;
        }
        if Poly::from_expr(&e1, 3, PRIME) == Poly::from_expr(&e2, 3, PRIME) {
            continue;
        }
        let line = format!("{} == {}", render(&e1), render(&e2));
        let inst = PitInstance::parse_line(&line, PRIME).expect("generated pair parses");
        assert!(!inst.is_identity());
        writeln!(lines, "{line}").unwrap();
        distinct += 1;
    }

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("pit_gf31.txt"), lines).unwrap();
}

#[test]
#[ignore = "writes tests/data/census_counts.json and cond_complexity.json; run on demand"]
fn generate_census_regression_files() {
    let tb = TimeBound::new(8, 8);
    let base = build_ktable(&BuildParams::new(12, 13, tb)).unwrap();

    let report = density_report(&base, 0, 12).unwrap();
    let counts: Vec<(u32, u64)> = report.rows.iter().map(|r| (r.n, r.count)).collect();

    let mut complexities: Vec<(u32, u32)> = Vec::new();
    for n in 1..=12u32 {
        let cond =
            build_ktable(&BuildParams::new(n, 13, tb).with_condition(binary_of(n as u64))).unwrap();
        complexities.push((n, complement_prefix_complexity(&base, &cond, n).unwrap()));
    }

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    fs::create_dir_all(&dir).unwrap();
    fs::write(
        dir.join("census_counts.json"),
        serde_json::to_string_pretty(&counts).unwrap(),
    )
    .unwrap();
    fs::write(
        dir.join("cond_complexity.json"),
        serde_json::to_string_pretty(&complexities).unwrap(),
    )
    .unwrap();
}
