//! Invariant checks shared by the invariant suite and the acceptance run.
//! Each returns `Err(description)` on the first violation.

#![allow(dead_code)]

use frobevo::dataset::{materialize, Dataset, Row, TupleFamily};
use frobevo::evolve::{
    fitness, one_bit_mutation, one_point_crossover, per_codon_mutation, random_chromosome, run,
    Fitness, GaConfig,
};
use frobevo::expr::{parse_expr, parse_phenotype, BinOp, EvalMode, Expr};
use frobevo::grammar::{parse_bnf, Grammar, Symbol, FROBENIUS_BNF};
use frobevo::mapper::{map_genotype, trace_mapping, Chromosome, MappingLimits, PhenotypeStatus};
use frobevo::oracle::{dp_bound, frobenius, frobenius_bruteforce, is_representable, GenTuple};
use frobevo::verify::{builtin_conjectures, verify_with, OracleKind, Verdict};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn shipped_grammar() -> Grammar {
    parse_bnf(FROBENIUS_BNF).expect("shipped grammar parses")
}

pub fn quad_family() -> TupleFamily {
    TupleFamily::parse("x,x+3,2*x+1,2*x+7", 3, 40).unwrap()
}

pub fn synthetic(f: impl Fn(i64) -> i64, params: impl IntoIterator<Item = i64>) -> Dataset {
    // the tuple is irrelevant to fitness; any valid one will do
    let t = GenTuple::new(vec![2, 3]).unwrap();
    Dataset {
        rows: params
            .into_iter()
            .map(|p| Row {
                param: p,
                tuple: t.clone(),
                target: f(p),
            })
            .collect(),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---- grammar ----

const TERMINALS: &[&str] = &["a", "b", "+", "(", ")", "1.0", "x", "-", "*", "/", "q7"];

pub fn random_grammar_source<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(1..5);
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut src = String::new();
    for name in &names {
        let alts = rng.gen_range(1..5);
        let bodies: Vec<String> = (0..alts)
            .map(|_| {
                let len = rng.gen_range(1..5);
                (0..len)
                    .map(|_| {
                        if rng.gen_bool(0.3) {
                            format!("<{}>", names.choose(rng).unwrap())
                        } else {
                            TERMINALS.choose(rng).unwrap().to_string()
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        src.push_str(&format!("<{name}> ::= {}\n", bodies.join(" | ")));
    }
    src
}

pub fn grammar_round_trip(source: &str) -> Check {
    let g = parse_bnf(source).map_err(|e| format!("parse: {e}"))?;
    let printed = g.to_string();
    let again = parse_bnf(&printed).map_err(|e| format!("reparse of\n{printed}\n: {e}"))?;
    ensure(g == again, || format!("round trip changed grammar:\n{source}\n->\n{printed}"))?;
    let twice = parse_bnf(source).unwrap();
    ensure(g == twice, || "parse_bnf is not deterministic".into())
}

/// Tags alternative j of rule i with terminal `t{i}_{j}`, some of them on
/// continuation lines, and checks the parsed positions.
pub fn grammar_positional(alt_counts: &[usize]) -> Check {
    let mut src = String::from("# tagged\n");
    for (i, &n) in alt_counts.iter().enumerate() {
        src.push_str(&format!("<r{i}> ::= t{i}_0"));
        for j in 1..n {
            if j % 2 == 0 {
                src.push_str(&format!("\n    | t{i}_{j} <r{i}>"));
            } else {
                src.push_str(&format!(" | ( t{i}_{j} )"));
            }
        }
        src.push('\n');
    }
    let g = parse_bnf(&src).map_err(|e| e.to_string())?;
    for (i, &n) in alt_counts.iter().enumerate() {
        let def = g.get(&format!("r{i}")).ok_or("missing rule")?;
        ensure(def.alternatives.len() == n, || format!("rule r{i}: wrong count"))?;
        for (j, alt) in def.alternatives.iter().enumerate() {
            let tag = Symbol::Terminal(format!("t{i}_{j}"));
            ensure(alt.symbols.contains(&tag), || {
                format!("rule r{i} alternative {j} lost its tag")
            })?;
        }
    }
    Ok(())
}

// ---- mapper ----

pub fn mapper_properties(g: &Grammar, c: &Chromosome, limits: MappingLimits) -> Check {
    let p = map_genotype(c, g, limits);
    ensure(p == map_genotype(c, g, limits), || format!("mapping of {c} not deterministic"))?;
    ensure(
        p.codons_consumed <= c.len() * (p.wraps_used + 1),
        || format!("{c}: consumed {} > {} x {}", p.codons_consumed, c.len(), p.wraps_used + 1),
    )?;

    let trace = trace_mapping(c, g, limits);
    ensure(trace.phenotype == p, || "trace phenotype differs from map_genotype".into())?;

    if let PhenotypeStatus::Valid(tokens) = &p.status {
        // replay the derivation from the trace alone
        let mut form = vec![Symbol::Nonterminal(g.start().name.clone())];
        for s in &trace.steps {
            let pos = form
                .iter()
                .position(|x| !x.is_terminal())
                .ok_or("trace continues after derivation finished")?;
            let Symbol::Nonterminal(name) = &form[pos] else { unreachable!() };
            ensure(*name == s.nonterminal, || format!("expanded {} but leftmost is {name}", s.nonterminal))?;
            ensure(c.codons()[s.codon_index] == s.codon, || "trace codon mismatch".into())?;
            let def = g.get(name).unwrap();
            ensure(s.alternative == s.codon as usize % def.alternatives.len(), || {
                "rule choice is not codon mod count".into()
            })?;
            form.splice(pos..=pos, def.alternatives[s.alternative].symbols.iter().cloned());
        }
        let replayed: Vec<String> = form
            .iter()
            .map(|s| match s {
                Symbol::Terminal(t) => Ok(t.clone()),
                Symbol::Nonterminal(n) => Err(format!("<{n}> left unexpanded")),
            })
            .collect::<Result<_, _>>()?;
        ensure(&replayed == tokens, || "replayed sentence differs from phenotype".into())?;
        let terminals = g.terminals();
        ensure(tokens.iter().all(|t| terminals.contains(&t.as_str())), || {
            "phenotype has a non-terminal token".into()
        })?;

        // prefix stability
        if p.wraps_used == 0 && p.codons_consumed < c.len() {
            let mut changed = c.clone();
            for v in &mut changed.0[p.codons_consumed..] {
                *v = v.wrapping_add(97);
            }
            ensure(map_genotype(&changed, g, limits) == p, || {
                format!("{c}: codons after position {} changed the phenotype", p.codons_consumed)
            })?;
        }
    }
    Ok(())
}

pub fn mapper_suite(seed: u64, cases: usize) -> Check {
    let g = shipped_grammar();
    let mut r = rng(seed);
    for _ in 0..cases {
        let len = r.gen_range(1..60);
        let c = random_chromosome(&mut r, len);
        mapper_properties(&g, &c, MappingLimits::default())?;
    }
    Ok(())
}

// ---- expr ----

/// Random tree with integer and terminating-decimal constants.
pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 | 1 => Expr::var(),
            2 => Expr::int(rng.gen_range(-5..=9)),
            _ => Expr::Const(BigRational::new(
                BigInt::from(rng.gen_range(-40..=40)),
                BigInt::from([2, 4, 5, 8, 10][rng.gen_range(0..5)]),
            )),
        };
    }
    let l = random_expr(rng, depth - 1);
    let r = random_expr(rng, depth - 1);
    match rng.gen_range(0..5) {
        0 => Expr::bin(BinOp::Add, l, r),
        1 => Expr::bin(BinOp::Sub, l, r),
        2 => Expr::bin(BinOp::Mul, l, r),
        3 => Expr::bin(BinOp::Div, l, r),
        _ => Expr::floor_div(l, r),
    }
}

pub fn expr_round_trip(e: &Expr) -> Check {
    let text = e.to_string();
    let back = parse_expr(&text).map_err(|err| format!("`{text}` does not parse: {err}"))?;
    ensure(&back == e, || format!("`{text}` reparsed as `{back}`"))
}

/// Whether every division in `e` at `x` has an integral exact quotient.
fn divisions_exact(e: &Expr, x: i64) -> bool {
    match e {
        Expr::Var | Expr::Const(_) => true,
        Expr::Bin(BinOp::Div, l, r) | Expr::FloorDiv(l, r) => {
            divisions_exact(l, x)
                && divisions_exact(r, x)
                && matches!(
                    (l.evaluate(x, EvalMode::Rational), r.evaluate(x, EvalMode::Rational)),
                    (Ok(a), Ok(b)) if !b.is_zero() && (a.clone() / b.clone()).is_integer()
                )
        }
        Expr::Bin(_, l, r) => divisions_exact(l, x) && divisions_exact(r, x),
    }
}

/// Returns how many (expression, x) pairs had only exact divisions.
pub fn floor_matches_rational_on_exact(seed: u64, cases: usize) -> Result<usize, String> {
    let mut r = rng(seed);
    let mut checked = 0;
    for _ in 0..cases {
        // integer constants only so exact divisions are common
        let e = integerize(&random_expr(&mut r, 4));
        for x in -12..=12 {
            if !divisions_exact(&e, x) {
                continue;
            }
            let a = e.evaluate(x, EvalMode::Rational).map_err(|err| err.to_string())?;
            let b = e.evaluate(x, EvalMode::FloorDiv).map_err(|err| err.to_string())?;
            ensure(a == b, || format!("{e} at x={x}: rational {a}, floor {b}"))?;
            ensure(a.is_integer(), || format!("{e} at x={x} not integral"))?;
            checked += 1;
        }
    }
    Ok(checked)
}

fn integerize(e: &Expr) -> Expr {
    match e {
        Expr::Var => Expr::Var,
        Expr::Const(c) => Expr::Const(BigRational::from_integer(c.to_integer())),
        Expr::Bin(op, l, r) => Expr::bin(*op, integerize(l), integerize(r)),
        Expr::FloorDiv(l, r) => Expr::floor_div(integerize(l), integerize(r)),
    }
}

/// Rational evaluation never rounds: result times its denominator is an
/// integer, and it matches an independent fraction-by-hand evaluation.
pub fn rational_exact(e: &Expr, x: i64) -> Check {
    fn by_hand(e: &Expr, x: i64) -> Option<(BigInt, BigInt)> {
        Some(match e {
            Expr::Var => (BigInt::from(x), BigInt::from(1)),
            Expr::Const(c) => (c.numer().clone(), c.denom().clone()),
            Expr::Bin(op, l, r) => {
                let (a, b) = by_hand(l, x)?;
                let (c, d) = by_hand(r, x)?;
                match op {
                    BinOp::Add => (&a * &d + &c * &b, b * d),
                    BinOp::Sub => (&a * &d - &c * &b, b * d),
                    BinOp::Mul => (a * c, b * d),
                    BinOp::Div => {
                        if c.is_zero() {
                            return None;
                        }
                        (a * d, b * c)
                    }
                }
            }
            Expr::FloorDiv(l, r) => {
                let (a, b) = by_hand(l, x)?;
                let (c, d) = by_hand(r, x)?;
                if c.is_zero() {
                    return None;
                }
                ((a * d).div_floor(&(b * c)), BigInt::from(1))
            }
        })
    }
    fn sign_fix((n, d): (BigInt, BigInt)) -> (BigInt, BigInt) {
        if d < BigInt::from(0) {
            (-n, -d)
        } else {
            (n, d)
        }
    }
    let got = e.evaluate(x, EvalMode::Rational);
    match by_hand(e, x).map(sign_fix) {
        None => ensure(got.is_err(), || format!("{e} at {x}: expected division by zero")),
        Some((n, d)) => {
            let v = got.map_err(|err| format!("{e} at {x}: {err}"))?;
            ensure(v.clone() * BigRational::from_integer(v.denom().clone()) == BigRational::from_integer(v.numer().clone()), || "not exact".into())?;
            ensure(v == BigRational::new(n.clone(), d.clone()), || {
                format!("{e} at {x}: got {v}, expected {n}/{d}")
            })
        }
    }
}

pub fn expr_suite(seed: u64, cases: usize) -> Check {
    let mut r = rng(seed);
    for _ in 0..cases {
        let e = random_expr(&mut r, 4);
        expr_round_trip(&e)?;
        rational_exact(&e, r.gen_range(-20..=20))?;
    }
    let checked = floor_matches_rational_on_exact(seed ^ 0x5eed, cases)?;
    ensure(checked >= cases / 4, || format!("only {checked} exact-division cases"))
}

/// Every `/` right operand in phenotypes of the shipped grammar is
/// variable-free. Returns the number of valid phenotypes inspected.
pub fn divisor_structure(seed: u64, wanted: usize) -> Result<usize, String> {
    let g = shipped_grammar();
    let mut r = rng(seed);
    let mut valid = 0;
    let mut attempts = 0;
    while valid < wanted {
        attempts += 1;
        ensure(attempts < wanted * 50, || "too few valid phenotypes".into())?;
        let c = random_chromosome(&mut r, 100);
        let p = map_genotype(&c, &g, MappingLimits::default());
        let Some(tokens) = p.tokens() else { continue };
        let e = parse_phenotype(tokens).map_err(|err| format!("{}: {err}", tokens.join(" ")))?;
        ensure(e.divisors_are_constant(), || format!("variable divisor in {e}"))?;
        // parse-back of the canonical form is the same tree
        expr_round_trip(&e)?;
        valid += 1;
    }
    Ok(valid)
}

// ---- oracle ----

pub fn random_coprime_pair<R: Rng>(rng: &mut R, max: i64) -> (i64, i64) {
    loop {
        let a = rng.gen_range(2..=max);
        let b = rng.gen_range(2..=max);
        if a.gcd(&b) == 1 {
            return (a, b);
        }
    }
}

pub fn random_coprime_tuple<R: Rng>(rng: &mut R, n: usize, max: i64) -> GenTuple {
    loop {
        let v: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=max)).collect();
        let t = GenTuple::new(v).unwrap();
        if t.is_coprime() {
            return t;
        }
    }
}

pub fn pair_closed_form(seed: u64, cases: usize) -> Check {
    let mut r = rng(seed);
    for _ in 0..cases {
        let (a, b) = random_coprime_pair(&mut r, 1000);
        let t = GenTuple::new(vec![a, b]).unwrap();
        let g = frobenius(&t).map_err(|e| e.to_string())?;
        ensure(g == a * b - a - b, || format!("g{t} = {g}, expected {}", a * b - a - b))?;
    }
    Ok(())
}

/// g is not representable and the next `min` integers are.
pub fn definition_check(t: &GenTuple, g: i64) -> Check {
    if g == -1 {
        return ensure(t.elements().contains(&1), || format!("g{t} = -1 without a 1"));
    }
    ensure(g >= 1 && !is_representable(t, g), || format!("g{t} = {g} is representable"))?;
    for j in 1..=t.min() {
        ensure(is_representable(t, g + j), || format!("g{t} = {g} but {} is not representable", g + j))?;
    }
    Ok(())
}

pub fn oracle_agreement(seed: u64, cases: usize) -> Check {
    let mut r = rng(seed);
    for i in 0..cases {
        let n = 3 + i % 4;
        let t = random_coprime_tuple(&mut r, n, 60);
        let fast = frobenius(&t).map_err(|e| e.to_string())?;
        let slow = frobenius_bruteforce(&t, dp_bound(&t).unwrap()).map_err(|e| e.to_string())?;
        ensure(fast == slow, || format!("g{t}: apery {fast}, brute force {slow}"))?;
    }
    Ok(())
}

pub fn oracle_definition_and_monotonicity(seed: u64, cases: usize) -> Check {
    let mut r = rng(seed);
    for _ in 0..cases {
        let n = r.gen_range(2..=5);
        let t = random_coprime_tuple(&mut r, n, 80);
        let g = frobenius(&t).map_err(|e| e.to_string())?;
        definition_check(&t, g)?;
        let extra = r.gen_range(1..=120);
        let bigger = t.with(extra).unwrap();
        let g2 = frobenius(&bigger).map_err(|e| e.to_string())?;
        ensure(g2 <= g, || format!("adding {extra} to {t} raised g from {g} to {g2}"))?;
    }
    Ok(())
}

pub fn quadruple_identity(a_max: i64) -> Check {
    for a in 1..=a_max {
        let t = GenTuple::new(vec![a, a + 1, a + 2, a + 4]).unwrap();
        let want = (a + 1) * (a / 4) + (a + 1) / 4 + 2 * ((a + 2) / 4) - 1;
        let g = frobenius_bruteforce(&t, dp_bound(&t).unwrap()).map_err(|e| e.to_string())?;
        ensure(g == want, || format!("a = {a}: g{t} = {g}, formula {want}"))?;
        ensure(frobenius(&t) == Ok(g), || format!("a = {a}: apery disagrees"))?;
    }
    Ok(())
}

// ---- dataset ----

pub fn dataset_properties(family: &TupleFamily) -> Check {
    let d = materialize(family).map_err(|e| e.to_string())?;
    ensure(d == materialize(family).unwrap(), || "materialize not deterministic".into())?;
    ensure(d.rows.windows(2).all(|w| w[0].param < w[1].param), || "rows unsorted".into())?;
    for row in &d.rows {
        if family.coprimality_filter {
            ensure(row.tuple.is_coprime(), || format!("filter let {} through", row.tuple))?;
        }
        let t = frobenius(&row.tuple).map_err(|e| e.to_string())?;
        ensure(t == row.target, || format!("row {} target {} != {t}", row.param, row.target))?;
    }
    let back = Dataset::from_csv_reader(d.to_csv_string().as_bytes()).map_err(|e| e.to_string())?;
    ensure(back == d, || "CSV round trip changed the dataset".into())
}

// ---- evolve ----

pub fn operator_closure(seed: u64, cases: usize) -> Check {
    let mut r = rng(seed);
    for _ in 0..cases {
        let len = r.gen_range(1..120);
        let a = random_chromosome(&mut r, len);
        let b = random_chromosome(&mut r, len);
        let (c, d) = one_point_crossover(&mut r, &a, &b);
        ensure(c.len() == len && d.len() == len, || "crossover changed length".into())?;
        // each child position comes from one of the parents
        for i in 0..len {
            let pair = (c.0[i], d.0[i]);
            ensure(pair == (a.0[i], b.0[i]) || pair == (b.0[i], a.0[i]), || {
                "crossover invented codons".into()
            })?;
        }
        let mut m = a.clone();
        one_bit_mutation(&mut r, &mut m);
        ensure(m.len() == len, || "mutation changed length".into())?;
        let flipped: u32 = m.0.iter().zip(&a.0).map(|(x, y)| (x ^ y).count_ones()).sum();
        ensure(flipped == 1, || format!("one-bit mutation flipped {flipped} bits"))?;
        let mut pc = a.clone();
        per_codon_mutation(&mut r, &mut pc, 0.3);
        ensure(pc.len() == len, || "per-codon mutation changed length".into())?;
        for (x, y) in pc.0.iter().zip(&a.0) {
            ensure((x ^ y).count_ones() <= 1, || "per-codon mutation flipped >1 bit in a codon".into())?;
        }
    }
    Ok(())
}

pub fn penalty_dominance(seed: u64) -> Check {
    let mut r = rng(seed);
    for _ in 0..200 {
        let n: i64 = r.gen_range(0..i64::MAX);
        let v = Fitness::Valid(BigRational::new(BigInt::from(n) * BigInt::from(n), BigInt::from(r.gen_range(1..100))));
        ensure(v < Fitness::Invalid, || format!("{v} does not beat invalid"))?;
    }
    Ok(())
}

pub fn fitness_zero_iff_exact(seed: u64, cases: usize) -> Check {
    let d = materialize(&quad_family()).unwrap();
    let mut r = rng(seed);
    for _ in 0..cases {
        let e = random_expr(&mut r, 3);
        for mode in [EvalMode::Rational, EvalMode::FloorDiv] {
            let Ok(f) = fitness(&e, &d, mode) else { continue };
            let exact = d.rows.iter().all(|row| {
                e.evaluate(row.param, mode) == Ok(BigRational::from_integer(BigInt::from(row.target)))
            });
            ensure(f.is_zero() == exact, || {
                format!("{e}: fitness {f} vs exact {exact}")
            })?;
        }
    }
    Ok(())
}

pub fn small_config(seed: u64) -> GaConfig {
    GaConfig {
        population_size: 60,
        generations: 15,
        seed,
        ..GaConfig::default()
    }
}

pub fn run_properties(cfg: &GaConfig, data: &Dataset) -> Check {
    let g = shipped_grammar();
    let a = run(cfg, &g, data).map_err(|e| e.to_string())?;
    let b = run(cfg, &g, data).map_err(|e| e.to_string())?;
    ensure(a.to_json() == b.to_json(), || "identical runs differ".into())?;
    ensure(a.history.len() == cfg.generations, || "history length".into())?;
    if cfg.elitism >= 1 {
        ensure(a.history.windows(2).all(|w| w[1].best <= w[0].best), || {
            "best fitness increased despite elitism".into()
        })?;
    }
    let min = a.history.iter().map(|h| &h.best).min();
    ensure(min.is_none_or(|m| *m == a.best.fitness), || "best is not the run minimum".into())?;
    // fitness is computed from the phenotype
    if let Some(tokens) = a.best.phenotype.tokens() {
        let e = parse_phenotype(tokens).unwrap();
        let f = fitness(&e, data, cfg.eval_mode).ok();
        ensure(a.best.fitness.value() == f.as_ref(), || "stored fitness is stale".into())?;
    }
    Ok(())
}

pub fn evolve_suite(seed: u64) -> Check {
    operator_closure(seed, 300)?;
    penalty_dominance(seed)?;
    fitness_zero_iff_exact(seed, 200)?;
    let d = synthetic(|x| 2 * x + 1, 1..=10);
    for s in 0..3 {
        run_properties(&small_config(seed + s), &d)?;
    }
    let mut no_elite = small_config(seed);
    no_elite.elitism = 0;
    run_properties(&no_elite, &d)
}

// ---- verify ----

pub fn verify_suite(k_hi: i64) -> Check {
    for c in builtin_conjectures() {
        let lo = c.k_min;
        let fast = verify_with(&c, lo, k_hi, OracleKind::Apery).map_err(|e| e.to_string())?;
        let slow = verify_with(&c, lo, k_hi, OracleKind::BruteForce).map_err(|e| e.to_string())?;
        let mut slow_as_fast = slow.clone();
        slow_as_fast.oracle = OracleKind::Apery;
        ensure(fast == slow_as_fast, || format!("{}: oracles disagree", c.name))?;
        for rep in [&fast, &slow] {
            ensure(
                rep.matches + rep.counterexamples.len() + rep.skipped.len() == rep.range_size(),
                || format!("{}: bookkeeping", c.name),
            )?;
        }
        if let Verdict::Verified { from, to } = fast.verdict {
            for k in from..=to {
                let t = c.family.tuple_at(k).unwrap();
                if !t.is_coprime() {
                    continue;
                }
                let g = frobenius(&t).unwrap();
                let v = c.formula.evaluate(k, EvalMode::FloorDiv).unwrap();
                ensure(v == BigRational::from_integer(BigInt::from(g)), || {
                    format!("{} at {k}: verified but {v} != {g}", c.name)
                })?;
            }
        }
    }
    Ok(())
}
