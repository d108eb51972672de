//! Generational genetic algorithm over codon strings.
//!
//! Tournament selection, one-point crossover at codon boundaries, bit-flip
//! mutation and elitism. All randomness comes from one `ChaCha8Rng` stream
//! seeded from the config, consumed in a fixed order on a single thread, so a
//! run is reproducible on any platform. Only fitness evaluation fans out.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::expr::{parse_phenotype, BinOp, EvalMode, Expr, ExprError};
use crate::grammar::Grammar;
use crate::mapper::{map_genotype, Chromosome, MappingLimits, Phenotype, PhenotypeStatus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvolveError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("individual has no valid phenotype")]
    InvalidPhenotype,
    #[error("phenotype does not parse as an expression: {0}")]
    Unparseable(ExprError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub chromosome_len: usize,
    pub seed: u64,
    pub tournament_size: usize,
    pub elitism: usize,
    pub eval_mode: EvalMode,
    pub limits: MappingLimits,
    pub mutation: MutationScheme,
}

/// How `mutation_prob` is applied. Either way a mutation flips exactly one
/// bit of one codon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationScheme {
    /// Every codon independently, with probability `mutation_prob`.
    #[default]
    PerCodon,
    /// At most one codon per offspring, with probability `mutation_prob`.
    PerOffspring,
}

impl std::str::FromStr for MutationScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-codon" => Ok(MutationScheme::PerCodon),
            "per-offspring" => Ok(MutationScheme::PerOffspring),
            other => Err(format!("unknown mutation scheme `{other}` (per-codon | per-offspring)")),
        }
    }
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 500,
            generations: 100,
            crossover_prob: 0.9,
            mutation_prob: 0.1,
            chromosome_len: 100,
            seed: 42,
            tournament_size: 3,
            elitism: 1,
            eval_mode: EvalMode::Rational,
            limits: MappingLimits::default(),
            mutation: MutationScheme::default(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        let err = |m: &str| Err(EvolveError::Config(m.to_string()));
        if self.population_size < 2 {
            return err("population_size must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return err("crossover_prob must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return err("mutation_prob must be in [0, 1]");
        }
        if self.elitism >= self.population_size {
            return err("elitism must be smaller than population_size");
        }
        if self.chromosome_len == 0 {
            return err("chromosome_len must be positive");
        }
        if self.tournament_size == 0 {
            return err("tournament_size must be positive");
        }
        if self.limits.max_expansions == 0 {
            return err("max_expansions must be positive");
        }
        Ok(())
    }
}

/// Sum of absolute errors, or the invalid sentinel which ranks below every
/// finite value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fitness {
    Valid(BigRational),
    Invalid,
}

impl Fitness {
    pub fn is_zero(&self) -> bool {
        matches!(self, Fitness::Valid(v) if v.is_zero())
    }

    pub fn value(&self) -> Option<&BigRational> {
        match self {
            Fitness::Valid(v) => Some(v),
            Fitness::Invalid => None,
        }
    }
}

impl fmt::Display for Fitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fitness::Valid(v) => write!(f, "{v}"),
            Fitness::Invalid => f.write_str("invalid"),
        }
    }
}

impl Serialize for Fitness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Σ |e(param) - target| over the dataset rows.
pub fn fitness(e: &Expr, data: &Dataset, mode: EvalMode) -> Result<BigRational, ExprError> {
    let mut total = BigRational::zero();
    for row in &data.rows {
        let v = e.evaluate(row.param, mode)?;
        total += (v - BigRational::from_integer(BigInt::from(row.target))).abs();
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub phenotype: Phenotype,
    pub fitness: Fitness,
}

impl Individual {
    pub fn expression(&self) -> Option<String> {
        self.phenotype.expression()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: Fitness,
    /// Mean fitness over valid individuals.
    pub mean: Option<f64>,
    pub valid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub best: Individual,
    /// Canonical serialization of the best phenotype, when it parses.
    pub best_expression: Option<String>,
    pub history: Vec<GenerationStats>,
    pub config: GaConfig,
    pub seed: u64,
}

impl RunResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run result serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "seed {}  population {}  generations {}\n",
            self.seed, self.config.population_size, self.config.generations
        ));
        s.push_str(&format!("best fitness: {}\n", self.best.fitness));
        if let Some(p) = self.best.expression() {
            s.push_str(&format!("best phenotype: {p}\n"));
        }
        if let Some(c) = &self.best_expression {
            s.push_str(&format!("canonical: {c}\n"));
        }
        s
    }
}

struct Evaluator<'a> {
    grammar: &'a Grammar,
    data: &'a Dataset,
    mode: EvalMode,
    limits: MappingLimits,
    cache: HashMap<Vec<String>, Fitness>,
}

impl Evaluator<'_> {
    fn score(&self, tokens: &[String]) -> Fitness {
        let Ok(e) = parse_phenotype(tokens) else {
            return Fitness::Invalid;
        };
        match fitness(&e, self.data, self.mode) {
            Ok(v) => Fitness::Valid(v),
            Err(_) => Fitness::Invalid,
        }
    }

    fn evaluate(&mut self, population: Vec<Chromosome>) -> Vec<Individual> {
        let phenotypes: Vec<Phenotype> = population
            .par_iter()
            .map(|c| map_genotype(c, self.grammar, self.limits))
            .collect();

        let mut fresh: Vec<&Vec<String>> = Vec::new();
        let mut seen: HashSet<&Vec<String>> = HashSet::new();
        for p in &phenotypes {
            if let PhenotypeStatus::Valid(tokens) = &p.status {
                if !self.cache.contains_key(tokens) && seen.insert(tokens) {
                    fresh.push(tokens);
                }
            }
        }
        let scored: Vec<Fitness> = fresh.par_iter().map(|t| self.score(t)).collect();
        for (tokens, f) in fresh.into_iter().zip(scored) {
            self.cache.insert(tokens.clone(), f);
        }

        population
            .into_iter()
            .zip(phenotypes)
            .map(|(chromosome, phenotype)| {
                let fitness = match &phenotype.status {
                    PhenotypeStatus::Valid(tokens) => self.cache[tokens].clone(),
                    PhenotypeStatus::Invalid(_) => Fitness::Invalid,
                };
                Individual {
                    chromosome,
                    phenotype,
                    fitness,
                }
            })
            .collect()
    }
}

/// Uniform random codons.
pub fn random_chromosome<R: Rng>(rng: &mut R, len: usize) -> Chromosome {
    Chromosome((0..len).map(|_| rng.gen::<u8>()).collect())
}

/// Swaps the tails of two equal-length chromosomes after a uniform cut in `1..len`.
pub fn one_point_crossover<R: Rng>(
    rng: &mut R,
    a: &Chromosome,
    b: &Chromosome,
) -> (Chromosome, Chromosome) {
    let len = a.len().min(b.len());
    if len < 2 {
        return (a.clone(), b.clone());
    }
    let cut = rng.gen_range(1..len);
    let mut c1 = a.0[..cut].to_vec();
    c1.extend_from_slice(&b.0[cut..]);
    let mut c2 = b.0[..cut].to_vec();
    c2.extend_from_slice(&a.0[cut..]);
    (Chromosome(c1), Chromosome(c2))
}

/// Flips one uniformly chosen bit of one uniformly chosen codon.
pub fn one_bit_mutation<R: Rng>(rng: &mut R, c: &mut Chromosome) {
    if c.is_empty() {
        return;
    }
    let idx = rng.gen_range(0..c.len());
    flip_bit(rng, &mut c.0[idx]);
}

/// Visits every codon and, with probability `rate`, flips one of its bits.
pub fn per_codon_mutation<R: Rng>(rng: &mut R, c: &mut Chromosome, rate: f64) {
    for codon in c.0.iter_mut() {
        if rng.gen::<f64>() < rate {
            flip_bit(rng, codon);
        }
    }
}

fn flip_bit<R: Rng>(rng: &mut R, codon: &mut u8) {
    *codon ^= 1 << rng.gen_range(0..8u32);
}

fn mutate<R: Rng>(rng: &mut R, c: &mut Chromosome, cfg: &GaConfig) {
    match cfg.mutation {
        MutationScheme::PerCodon => per_codon_mutation(rng, c, cfg.mutation_prob),
        MutationScheme::PerOffspring => {
            if rng.gen::<f64>() < cfg.mutation_prob {
                one_bit_mutation(rng, c);
            }
        }
    }
}

/// Index of the fittest of `size` draws with replacement; ties go to the
/// earliest draw.
pub fn tournament<R: Rng>(rng: &mut R, pop: &[Individual], size: usize) -> usize {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..size {
        let i = rng.gen_range(0..pop.len());
        if pop[i].fitness < pop[best].fitness {
            best = i;
        }
    }
    best
}

fn generation_stats(generation: usize, pop: &[Individual]) -> GenerationStats {
    let best = pop
        .iter()
        .map(|i| &i.fitness)
        .min()
        .cloned()
        .unwrap_or(Fitness::Invalid);
    let valid: Vec<&BigRational> = pop.iter().filter_map(|i| i.fitness.value()).collect();
    let mean = if valid.is_empty() {
        None
    } else {
        let sum: BigRational = valid.iter().copied().sum();
        (sum / BigRational::from_integer(BigInt::from(valid.len()))).to_f64()
    };
    GenerationStats {
        generation,
        best,
        mean,
        valid: valid.len(),
    }
}

fn argmin(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate().skip(1) {
        if ind.fitness < pop[best].fitness {
            best = i;
        }
    }
    best
}

/// Runs the GA for `cfg.generations` generations after the initial population.
pub fn run(cfg: &GaConfig, grammar: &Grammar, data: &Dataset) -> Result<RunResult, EvolveError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluator = Evaluator {
        grammar,
        data,
        mode: cfg.eval_mode,
        limits: cfg.limits,
        cache: HashMap::new(),
    };

    let initial: Vec<Chromosome> = (0..cfg.population_size)
        .map(|_| random_chromosome(&mut rng, cfg.chromosome_len))
        .collect();
    let mut pop = evaluator.evaluate(initial);
    let mut best = pop[argmin(&pop)].clone();
    let mut history = Vec::with_capacity(cfg.generations);

    for generation in 1..=cfg.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| pop[a].fitness.cmp(&pop[b].fitness).then(a.cmp(&b)));
        let mut next: Vec<Chromosome> = order[..cfg.elitism]
            .iter()
            .map(|&i| pop[i].chromosome.clone())
            .collect();

        while next.len() < cfg.population_size {
            let p1 = tournament(&mut rng, &pop, cfg.tournament_size);
            let p2 = tournament(&mut rng, &pop, cfg.tournament_size);
            let (mut c1, mut c2) = if rng.gen::<f64>() < cfg.crossover_prob {
                one_point_crossover(&mut rng, &pop[p1].chromosome, &pop[p2].chromosome)
            } else {
                (pop[p1].chromosome.clone(), pop[p2].chromosome.clone())
            };
            mutate(&mut rng, &mut c1, cfg);
            mutate(&mut rng, &mut c2, cfg);
            next.push(c1);
            if next.len() < cfg.population_size {
                next.push(c2);
            }
        }

        pop = evaluator.evaluate(next);
        let i = argmin(&pop);
        if pop[i].fitness < best.fitness {
            best = pop[i].clone();
        }
        history.push(generation_stats(generation, &pop));
    }

    let best_expression = best
        .phenotype
        .tokens()
        .and_then(|t| parse_phenotype(t).ok())
        .map(|e| e.to_string());
    Ok(RunResult {
        best,
        best_expression,
        history,
        config: cfg.clone(),
        seed: cfg.seed,
    })
}

/// A floorized candidate formula ready for verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromotedConjecture {
    #[serde(serialize_with = "ser_expr")]
    pub formula: Expr,
    /// Canonical form of `formula`.
    pub canonical: String,
    /// The evolved phenotype this was promoted from.
    pub source: String,
    /// Constant added by the optional repair step.
    pub repair_offset: i64,
    pub seed: Option<u64>,
    pub config: Option<GaConfig>,
    pub dataset_id: Option<String>,
}

fn ser_expr<S: Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

/// Folds constant subtrees and floors every division of the best expression.
pub fn promote(best: &Individual) -> Result<PromotedConjecture, EvolveError> {
    let tokens = best.phenotype.tokens().ok_or(EvolveError::InvalidPhenotype)?;
    let expr = parse_phenotype(tokens).map_err(EvolveError::Unparseable)?;
    let formula = integral_divisors(&expr.fold_constants().map_err(EvolveError::Unparseable)?.floorize());
    Ok(PromotedConjecture {
        canonical: formula.to_string(),
        formula,
        source: tokens.join(" "),
        repair_offset: 0,
        seed: None,
        config: None,
        dataset_id: None,
    })
}

/// `floor(e / (p/q))` becomes `floor(q * e / p)`, so divisors are integers.
fn integral_divisors(e: &Expr) -> Expr {
    match e {
        Expr::Var | Expr::Const(_) => e.clone(),
        Expr::Bin(op, l, r) => Expr::bin(*op, integral_divisors(l), integral_divisors(r)),
        Expr::FloorDiv(l, r) => {
            let l = integral_divisors(l);
            match r.as_ref() {
                Expr::Const(c) if !c.is_integer() => {
                    let q = Expr::Const(BigRational::from_integer(c.denom().clone()));
                    let p = Expr::Const(BigRational::from_integer(c.numer().clone()));
                    Expr::floor_div(Expr::bin(BinOp::Mul, q, l), p)
                }
                _ => Expr::floor_div(l, integral_divisors(r)),
            }
        }
    }
}

/// Promotes the best individual of a run and records its provenance.
pub fn promote_run(result: &RunResult, data: &Dataset) -> Result<PromotedConjecture, EvolveError> {
    let mut p = promote(&result.best)?;
    p.seed = Some(result.seed);
    p.config = Some(result.config.clone());
    p.dataset_id = Some(data.id());
    Ok(p)
}

/// Adds the constant `c` in `-3..=3` that minimises floor-mode fitness. Ties
/// prefer the smaller `|c|`, so an already exact formula is left alone.
pub fn repair_constant(p: &PromotedConjecture, data: &Dataset) -> PromotedConjecture {
    let shifted = |c: i64| -> Expr {
        match c.cmp(&0) {
            Ordering::Equal => p.formula.clone(),
            Ordering::Greater => Expr::bin(BinOp::Add, p.formula.clone(), Expr::int(c)),
            Ordering::Less => Expr::bin(BinOp::Sub, p.formula.clone(), Expr::int(-c)),
        }
    };
    let mut best: Option<(Fitness, i64)> = None;
    for c in [0, -1, 1, -2, 2, -3, 3] {
        let f = match fitness(&shifted(c), data, EvalMode::FloorDiv) {
            Ok(v) => Fitness::Valid(v),
            Err(_) => Fitness::Invalid,
        };
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, c));
        }
    }
    let (_, c) = best.expect("seven candidates");
    let formula = shifted(c);
    PromotedConjecture {
        canonical: formula.to_string(),
        formula,
        repair_offset: c,
        ..p.clone()
    }
}
