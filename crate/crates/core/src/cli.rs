//! Command-line surface: `build`, `verify` and `report`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
//! or IO errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::algebra::VertexAlgebra;
use crate::autgroup::{scale_key, torus_element, weyl_reflection, AutContext, CandidateMap, ResidualKind, Verdict};
use crate::compose::{c2_probe, EnumerationOrder, Generators, SpanClosure};
use crate::dercalc::{
    der_decomposition, exponentiate_derivations, inner_test, nondegeneracy_witness, orthogonality_check, radical_check,
    reductive_split, solve_with_context, trace_form, trace_form_invariant,
};
use crate::error::{Error, Result};
use crate::exactlin::Rational;
use crate::fixpoint::{
    automorphism_form, build_dsum_voa, dsum_automorphisms, dsum_axioms, fixed_point_subalgebra, ideal_chain,
    non_generation_probe, partition_numbers, sigma_lambda_check, summand_scaling, virasoro_highest_weights, DsumSpec,
};
use crate::fockspace::io::{read_lattice, ArenaArtifact, LatticeFile};
use crate::fockspace::{character, Cocycle, FockKey, Lattice, LatticeVoa};

#[derive(Parser, Debug)]
#[command(name = "vertexlab", version, about = "Exact checks on weight-truncated lattice vertex algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the truncated Fock space and write its bases, vacuum and ω.
    Build(BuildArgs),
    /// Run one verification suite, or all of them.
    Verify(VerifyArgs),
    /// Summarize the suite reports in a run directory.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub lattice: PathBuf,
    #[arg(long)]
    pub max_weight: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite name; `--suite` is accepted as well.
    #[arg(value_enum)]
    pub suite_name: Option<SuiteName>,
    #[arg(long, value_enum)]
    pub suite: Option<SuiteName>,
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    #[arg(long)]
    pub max_weight: Option<u32>,
    #[arg(long)]
    pub gen_bound: Option<u32>,
    /// Ideal index for `ideals`, truncation `N'` for `radical`.
    #[arg(long)]
    pub n: Option<u32>,
    /// Summand spec JSON for `dsum`.
    #[arg(long)]
    pub summands: Option<PathBuf>,
    /// Output file, or directory with `--suite all`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit timings so that reruns are byte-identical.
    #[arg(long)]
    pub canonical: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    pub dir: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Generation,
    Automorphisms,
    Derivations,
    Forms,
    Radical,
    Fixedpoint,
    Ideals,
    Dsum,
    All,
}

impl SuiteName {
    pub const EACH: [SuiteName; 8] = [
        SuiteName::Generation,
        SuiteName::Automorphisms,
        SuiteName::Derivations,
        SuiteName::Forms,
        SuiteName::Radical,
        SuiteName::Fixedpoint,
        SuiteName::Ideals,
        SuiteName::Dsum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Generation => "generation",
            SuiteName::Automorphisms => "automorphisms",
            SuiteName::Derivations => "derivations",
            SuiteName::Forms => "forms",
            SuiteName::Radical => "radical",
            SuiteName::Fixedpoint => "fixedpoint",
            SuiteName::Ideals => "ideals",
            SuiteName::Dsum => "dsum",
            SuiteName::All => "all",
        }
    }
}

/// Parsed verification settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub lattice: Option<Lattice>,
    pub cutoff: u32,
    pub gen_bound: u32,
    pub n: Option<u32>,
    pub dsum: Option<DsumSpec>,
    pub canonical: bool,
}

impl RunConfig {
    pub fn new(lattice: Option<Lattice>, cutoff: Option<u32>, gen_bound: Option<u32>) -> Result<Self> {
        let cutoff = cutoff.unwrap_or_else(|| default_cutoff(lattice.as_ref()));
        if cutoff < 2 {
            return Err(Error::Usage(format!("max weight must be at least 2, got {cutoff}")));
        }
        let gen_bound = gen_bound.unwrap_or_else(|| lattice.as_ref().map_or(1, default_gen_bound));
        Ok(RunConfig { lattice, cutoff, gen_bound, n: None, dsum: None, canonical: true })
    }

    fn lattice(&self) -> Result<&Lattice> {
        self.lattice.as_ref().ok_or_else(|| Error::Usage("this suite needs --lattice".into()))
    }
}

/// 8 in rank one, 6 otherwise.
pub fn default_cutoff(lattice: Option<&Lattice>) -> u32 {
    match lattice.map(|l| l.rank()) {
        Some(r) if r > 1 => 6,
        _ => 8,
    }
}

/// Largest weight of an `e^{α_i}`, and at least 1 for the Heisenberg part.
pub fn default_gen_bound(lattice: &Lattice) -> u32 {
    (0..lattice.rank()).map(|i| (lattice.gram()[i][i] / 2) as u32).max().unwrap_or(1).max(1)
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

/// The JSON report of one suite. Keys are emitted in sorted order.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub results: Map<String, Value>,
    pub flags: Vec<Value>,
    pub elapsed_ms: Option<u128>,
}

impl SuiteReport {
    fn new(suite: SuiteName) -> Self {
        SuiteReport { suite: suite.as_str().into(), checks: Vec::new(), results: Map::new(), flags: Vec::new(), elapsed_ms: None }
    }

    fn check(&mut self, name: &str, passed: bool, detail: Value) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    fn set<T: Serialize>(&mut self, key: &str, value: T) {
        self.results.insert(key.into(), serde_json::to_value(value).expect("report values serialize"));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn to_json(&self) -> Value {
        let mut m = self.results.clone();
        m.insert("suite".into(), json!(self.suite));
        m.insert("passed".into(), json!(self.passed()));
        m.insert("checks".into(), serde_json::to_value(&self.checks).expect("checks serialize"));
        m.insert("first_failure".into(), serde_json::to_value(self.first_failure()).expect("check serializes"));
        if !self.flags.is_empty() {
            m.insert("flags".into(), Value::Array(self.flags.clone()));
        }
        if let Some(t) = self.elapsed_ms {
            m.insert("elapsed_ms".into(), json!(t));
        }
        Value::Object(m)
    }

    pub fn to_string_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("json");
        s.push('\n');
        s
    }
}

fn header(rep: &mut SuiteReport, cfg: &RunConfig, lattice: Option<&Lattice>) {
    if let Some(l) = lattice {
        rep.set("lattice", LatticeFile::from_lattice(l));
    }
    rep.set("cutoff", cfg.cutoff);
    rep.set("gen_bound", cfg.gen_bound);
}

pub fn run_suite(suite: SuiteName, cfg: &RunConfig) -> Result<SuiteReport> {
    let t = Instant::now();
    let mut rep = match suite {
        SuiteName::Generation => generation_suite(cfg)?,
        SuiteName::Automorphisms => automorphisms_suite(cfg)?,
        SuiteName::Derivations => derivations_suite(cfg)?,
        SuiteName::Forms => forms_suite(cfg)?,
        SuiteName::Radical => radical_suite(cfg)?,
        SuiteName::Fixedpoint => fixedpoint_suite(cfg)?,
        SuiteName::Ideals => ideals_suite(cfg)?,
        SuiteName::Dsum => dsum_suite(cfg)?,
        SuiteName::All => return Err(Error::Usage("'all' is not a single suite".into())),
    };
    if !cfg.canonical {
        rep.elapsed_ms = Some(t.elapsed().as_millis());
    }
    Ok(rep)
}

fn build_voa(cfg: &RunConfig) -> Result<LatticeVoa> {
    LatticeVoa::build(cfg.lattice()?.clone(), cfg.cutoff)
}

fn generation_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let voa = build_voa(cfg)?;
    let mut rep = SuiteReport::new(SuiteName::Generation);
    header(&mut rep, cfg, Some(voa.lattice()));
    let dims = voa.grading().dims();
    let series: Vec<usize> = character(voa.lattice(), cfg.cutoff).into_iter().map(|x| x as usize).collect();
    rep.check("dims_match_character", dims == series, json!({ "dims": dims, "character": series }));
    rep.set("dims", &dims);

    let spans = |gens: &Generators| {
        let closure = SpanClosure::compute(&voa, gens, None, EnumerationOrder::Standard);
        let per: Vec<Value> = (0..=cfg.cutoff)
            .map(|w| {
                let r = closure.report(w);
                json!({ "weight": w, "target": r.target, "achieved": r.achieved })
            })
            .collect();
        (closure.spans_everything(), closure.first_deficient(), per)
    };
    let (ok, first, per) = spans(&Generators::up_to_weight(&voa, cfg.gen_bound));
    rep.check("low_weights_generate", ok, json!({ "first_deficient": first, "weights": per }));

    let rank = voa.rank();
    let mut vectors = vec![voa.vacuum()];
    let mut labels = vec!["vacuum".to_string()];
    for i in 0..rank {
        for s in [1, -1] {
            let mut c = vec![0; rank];
            c[i] = s;
            vectors.push(voa.exponential(&c)?);
            labels.push(format!("e^{c:?}"));
        }
    }
    let (ok, first, per) = spans(&Generators::new(&voa, vectors, labels)?);
    rep.check("exponentials_generate", ok, json!({ "first_deficient": first, "weights": per }));

    let codims: Vec<(u32, usize)> =
        (1..cfg.cutoff).map(|m| c2_probe(&voa, m).map(|r| (m, r.codim))).collect::<Result<_>>()?;
    // informational: the quotient need not vanish below the cutoff
    let m0 = codims.iter().rev().take_while(|(_, c)| *c == 0).last().map(|(m, _)| *m);
    rep.set("c2_codims", &codims);
    rep.set("c2_m0", m0);
    Ok(rep)
}

struct NamedCandidate {
    name: String,
    map: CandidateMap,
    expect_accept: bool,
}

fn automorphism_candidates(voa: &LatticeVoa, gen_bound: u32) -> Result<Vec<NamedCandidate>> {
    let rank = voa.rank();
    let mut out = vec![NamedCandidate { name: "theta".into(), map: weyl_reflection(voa, gen_bound), expect_accept: true }];
    for s in [Rational::from_int(2), Rational::from_int(-1), Rational::new(1, 3)] {
        out.push(NamedCandidate {
            name: format!("g_{s}"),
            map: torus_element(voa, gen_bound, &vec![s.clone(); rank]),
            expect_accept: true,
        });
    }
    let mut e1 = vec![0; rank];
    e1[0] = 1;
    out.push(NamedCandidate {
        name: "scaled_e".into(),
        map: scale_key(voa, gen_bound, &FockKey::exponential(e1), &Rational::from_int(2))?,
        expect_accept: false,
    });
    Ok(out)
}

fn residual_table(v: &Verdict) -> Vec<Value> {
    v.residuals
        .iter()
        .flatten()
        .map(|r| json!({ "kind": r.kind, "weight": r.weight, "at": r.at, "value": r.value }))
        .collect()
}

fn automorphisms_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let voa = build_voa(cfg)?;
    let mut rep = SuiteReport::new(SuiteName::Automorphisms);
    header(&mut rep, cfg, Some(voa.lattice()));
    let ctx = AutContext::new(&voa, cfg.gen_bound)?;
    let cands = automorphism_candidates(&voa, cfg.gen_bound)?;
    let mut tables = Vec::new();
    for c in &cands {
        let v = ctx.check_with(&c.map, true)?;
        let detail = json!({
            "accepted": v.accepted,
            "residual_count": v.residual_count,
            "condition2_checked": v.condition2_checked,
            "multiplicativity_checked": v.multiplicativity_checked,
            "first_residual": v.first_residual,
        });
        rep.check(&format!("{}_{}", c.name, if c.expect_accept { "accepted" } else { "rejected" }), v.accepted == c.expect_accept, detail);
        if !c.expect_accept {
            let mut e = vec![0; voa.rank()];
            e[0] = 1;
            let f: Vec<i64> = e.iter().map(|x| -x).collect();
            let at = format!(
                "modes [1] args ({}, {})",
                voa.label(voa.index_of(&FockKey::exponential(e)).expect("in range")),
                voa.label(voa.index_of(&FockKey::exponential(f)).expect("in range"))
            );
            let hit = v.residuals.iter().flatten().find(|r| r.kind == ResidualKind::Condition2 && r.at == at);
            rep.check("scaled_e_residual_at_e1f", hit.is_some(), json!({ "at": at, "residual": hit }));
        }
        tables.push((c.name.clone(), v.accepted, residual_table(&v)));
    }

    let (s, t) = (Rational::from_int(2), Rational::new(1, 3));
    let rank = voa.rank();
    let gs = torus_element(&voa, cfg.gen_bound, &vec![s.clone(); rank]);
    let gt = torus_element(&voa, cfg.gen_bound, &vec![t.clone(); rank]);
    let h = ctx.homomorphism_check(&gs, &gt)?;
    rep.check("extension_multiplicative", h.holds, json!({ "s": s, "t": t, "failing_weights": h.failing_weights }));
    let theta = weyl_reflection(&voa, cfg.gen_bound);
    let et = ctx.extend_map(&theta)?;
    rep.check("theta_squared_identity", et.compose(&et).is_identity(), json!(null));

    let standard = Cocycle::standard(voa.lattice().gram());
    if *voa.lattice().cocycle() != standard {
        let base = LatticeVoa::build(Lattice::with_cocycle(voa.lattice().gram().to_vec(), standard)?, cfg.cutoff)?;
        let bctx = AutContext::new(&base, cfg.gen_bound)?;
        for (c, (name, accepted, table)) in automorphism_candidates(&base, cfg.gen_bound)?.iter().zip(&tables) {
            let bv = bctx.check_with(&c.map, true)?;
            let btable = residual_table(&bv);
            if bv.accepted != *accepted || btable != *table {
                rep.flags.push(json!({
                    "candidate": name,
                    "default_cocycle": { "accepted": bv.accepted, "residuals": btable },
                    "this_cocycle": { "accepted": accepted, "residuals": table },
                }));
            }
        }
        let changed: Vec<Value> = rep.flags.iter().map(|f| f["candidate"].clone()).collect();
        rep.check("residuals_match_default_cocycle", changed.is_empty(), json!({ "changed": changed }));
    }
    Ok(rep)
}

/// Cutoff at which exponentials of solved derivations are checked; beyond it
/// the multiplicativity sweep of a dense extension dominates the run.
pub const EXPONENTIAL_CUTOFF: u32 = 6;

fn derivations_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let voa = build_voa(cfg)?;
    let mut rep = SuiteReport::new(SuiteName::Derivations);
    header(&mut rep, cfg, Some(voa.lattice()));
    let ctx = AutContext::new(&voa, cfg.gen_bound)?;
    let der = solve_with_context(&ctx)?;
    rep.set("dim", der.dim());
    rep.set("dims_by_cutoff", &der.dims_by_cutoff);
    rep.check("dimension_stable", der.stable(), json!({ "dims_by_cutoff": der.dims_by_cutoff }));
    rep.check(
        "cross_check",
        der.cross_check_failure.is_none(),
        json!({ "checked": der.cross_checks, "failure": der.cross_check_failure }),
    );
    rep.check("contains_inner", der.contains_inner(&voa)?, json!(null));
    rep.check("closed_under_commutator", der.closed_under_commutator()?, json!(null));

    if voa.dim(1) > 0 {
        let w = nondegeneracy_witness(&voa)?;
        if let Some(n) = w.n {
            let split = der_decomposition(&voa, &der.basis, n)?;
            rep.set("inner_dim", split.inner_dim);
            rep.set("perp_dim", split.perp_dim);
            rep.check("decomposition", split.holds(), serde_json::to_value(&split)?);
        } else {
            rep.check("decomposition", false, json!({ "reason": "no nondegenerate trace form up to the cutoff" }));
        }
        let inner = inner_test(&voa, cfg.gen_bound, cfg.cutoff.min(4))?;
        rep.check(
            "inner_and_quasi_primary",
            inner.passed(),
            json!({ "inner_checks": inner.inner_checks, "inner_failure": inner.inner_failure, "quasi_primary": inner.quasi_primary }),
        );
    }
    // the U-blocks are all that exponentiation reads, so a smaller arena will do
    let exp_cutoff = cfg.cutoff.min(EXPONENTIAL_CUTOFF);
    let exps = if exp_cutoff == cfg.cutoff {
        exponentiate_derivations(&ctx, &der)?
    } else {
        let small = LatticeVoa::build(voa.lattice().clone(), exp_cutoff)?;
        exponentiate_derivations(&AutContext::new(&small, cfg.gen_bound)?, &der)?
    };
    rep.set("exponential_cutoff", exp_cutoff);
    let bad: Vec<&crate::dercalc::ExponentialCheck> = exps.iter().filter(|e| !e.verdict.accepted).collect();
    rep.check("exponentials_accepted", bad.is_empty(), json!({ "checked": exps.len(), "failures": bad }));
    Ok(rep)
}

fn forms_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let voa = build_voa(cfg)?;
    let mut rep = SuiteReport::new(SuiteName::Forms);
    header(&mut rep, cfg, Some(voa.lattice()));
    let w = nondegeneracy_witness(&voa)?;
    rep.set("witness_n", w.n);
    rep.set("det", &w.determinant);
    rep.set("determinants", &w.determinants);
    rep.check("witness_found", w.n.is_some(), json!(null));
    let mut grams = Vec::new();
    let mut invariant = Vec::new();
    for n in 0..=cfg.cutoff {
        let f = trace_form(&voa, n)?;
        if !trace_form_invariant(&voa, &f)? {
            invariant.push(n);
        }
        grams.push(json!({ "n": n, "gram": f.gram }));
    }
    rep.set("trace_forms", grams);
    rep.check("invariant", invariant.is_empty(), json!({ "failing_n": invariant }));
    let split = reductive_split(&voa)?;
    rep.check(
        "reductive",
        split.holds(),
        json!({ "semisimple_dim": split.semisimple.len(), "toral_dim": split.toral.len(), "simple_ideals": split.simple_ideals.len() }),
    );
    let mut bad = Vec::new();
    for n in 0..=cfg.cutoff {
        let o = orthogonality_check(&voa, &split, n)?;
        if !o.semisimple_toral_zero || !o.distinct_ideals_zero {
            bad.push(n);
        }
    }
    rep.check("orthogonality", bad.is_empty(), json!({ "failing_n": bad }));
    Ok(rep)
}

fn radical_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let voa = build_voa(cfg)?;
    let mut rep = SuiteReport::new(SuiteName::Radical);
    header(&mut rep, cfg, Some(voa.lattice()));
    let n_prime = cfg.n.unwrap_or_else(|| cfg.cutoff.saturating_sub(3).max(1));
    let r = radical_check(&voa, n_prime)?;
    rep.set("n_prime", n_prime);
    rep.set("kernel_dim", r.kernel_dim);
    rep.set("image_dim", r.image_dim);
    rep.check("inclusion", r.inclusion_holds, json!({ "checks": r.inclusion_checks }));
    rep.check(
        "zero_mode_coefficient",
        r.coefficient_offsets.iter().all(|c| c.is_zero()),
        json!({ "offsets": r.coefficient_offsets }),
    );
    rep.check("dims_match", r.dims_match, json!({ "kernel": r.kernel_dim, "image": r.image_dim }));
    Ok(rep)
}

fn a1_parent(cfg: &RunConfig) -> Result<Arc<LatticeVoa>> {
    let lattice = cfg.lattice.clone().unwrap_or_else(crate::fixpoint::a1_lattice);
    Ok(Arc::new(LatticeVoa::build(lattice, cfg.cutoff)?))
}

fn fixedpoint_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let fpa = fixed_point_subalgebra(a1_parent(cfg)?)?;
    let mut rep = SuiteReport::new(SuiteName::Fixedpoint);
    header(&mut rep, cfg, Some(fpa.parent().lattice()));
    let dims = fpa.dims();
    let p: Vec<usize> = partition_numbers(cfg.cutoff as usize).into_iter().map(|x| x as usize).collect();
    rep.set("dims", &dims);
    rep.check("dims_are_partitions", dims == p, json!({ "dims": dims, "partitions": p }));
    rep.check("decomposition", fpa.decomposition_holds(), json!(null));
    let c = fpa.closure_check(cfg.cutoff);
    rep.check("closure", c.failures == 0, serde_json::to_value(&c)?);
    let c = fpa.charge_additivity(cfg.cutoff)?;
    rep.check("charge_additivity", c.failures == 0, serde_json::to_value(&c)?);
    rep.check("generated_by_vacuum_omega_e", fpa.generation_check()?, json!(null));
    let hw: Vec<u32> = virasoro_highest_weights(&fpa)?.into_iter().map(|x| x.0).collect();
    let squares: Vec<u32> = (0..).map(|m: u32| m * m).take_while(|&w| w <= cfg.cutoff).collect();
    rep.set("highest_weights", &hw);
    rep.check("highest_weights_are_squares", hw == squares, json!({ "found": hw, "expected": squares }));

    let gb = if cfg.cutoff >= 4 { 4 } else { 2 };
    let ctx = AutContext::new(&fpa.alg, gb)?;
    let mut failed = Vec::new();
    for l in [Rational::from_int(2), Rational::new(1, 2), Rational::from_int(-1)] {
        if !sigma_lambda_check(&ctx, &l)?.accepted {
            failed.push(l);
        }
    }
    rep.check("sigma_lambda_accepted", failed.is_empty(), json!({ "gen_bound": gb, "failing": failed }));
    if gb == 4 {
        let scales = [Rational::one(), Rational::from_int(2), Rational::from_int(3)];
        let v = ctx.check_automorphism(&summand_scaling(&fpa.alg, gb, &scales)?)?;
        rep.check("inconsistent_scaler_rejected", !v.accepted, json!({ "scales": scales, "first_residual": v.first_residual }));
    }
    let form = automorphism_form(&fpa, gb)?;
    rep.check("only_sigma_fixes_omega", form.only_sigma(), serde_json::to_value(&form)?);
    Ok(rep)
}

fn ideals_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let fpa = fixed_point_subalgebra(a1_parent(cfg)?)?;
    let mut rep = SuiteReport::new(SuiteName::Ideals);
    header(&mut rep, cfg, Some(fpa.parent().lattice()));
    let p = partition_numbers(cfg.cutoff as usize);
    let ns: Vec<u32> = match cfg.n {
        Some(n) => vec![n],
        None => (1..).take_while(|n| n * n <= cfg.cutoff).collect(),
    };
    let mut chain = Vec::new();
    for &n in &ns {
        let r = ideal_chain(&fpa, n)?;
        let expected: Vec<usize> =
            (0..=cfg.cutoff as usize).map(|k| if k >= (n * n) as usize { p[k - (n * n) as usize] as usize } else { 0 }).collect();
        rep.check(&format!("ideal_{n}_dims"), r.dims == expected, json!({ "dims": r.dims, "expected": expected }));
        if let Some(c) = &r.climbing_coefficient {
            rep.check(&format!("climbing_{n}"), c.is_one(), json!({ "coefficient": c, "next_in_ideal": r.next_in_ideal }));
        }
        chain.push(r);
    }
    if chain.len() > 1 {
        let strict = chain.windows(2).all(|w| w[0].dims.iter().sum::<usize>() > w[1].dims.iter().sum::<usize>());
        rep.check("strictly_descending", strict, json!(null));
    }
    rep.set("ideals", &chain);
    Ok(rep)
}

fn dsum_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let spec = cfg.dsum.clone().unwrap_or_else(|| DsumSpec { hw_weights: vec![0, 1, 4], cutoff: cfg.cutoff });
    let alg = build_dsum_voa(&spec)?;
    let mut rep = SuiteReport::new(SuiteName::Dsum);
    rep.set("cutoff", spec.cutoff);
    rep.set("hw_weights", &spec.hw_weights);
    let gb = alg.summands().last().map_or(0, |s| s.hw_weight).max(1);
    rep.set("gen_bound", gb);
    let ax = dsum_axioms(&alg);
    rep.check("axioms", ax.holds(), serde_json::to_value(&ax)?);
    let aut = dsum_automorphisms(&alg, gb)?;
    rep.set("derivation_dim", aut.derivation_dim);
    rep.check("diagonal_torus", aut.holds(), serde_json::to_value(&aut)?);
    let mut probes = Vec::new();
    let mut ok = true;
    for n in 0..gb {
        let r = non_generation_probe(&alg, n)?;
        ok &= r.holds();
        probes.push(r);
    }
    rep.check("non_generation", ok, serde_json::to_value(&probes)?);
    Ok(rep)
}

fn write_creating(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::write(path, text)?)
}

fn cmd_build(args: &BuildArgs) -> Result<ExitCode> {
    let lattice = read_lattice(&args.lattice)?;
    let cutoff = args.max_weight.unwrap_or_else(|| default_cutoff(Some(&lattice)));
    let voa = LatticeVoa::build(lattice, cutoff)?;
    let art = ArenaArtifact::new(&voa);
    let dims: Vec<String> = art.dims.iter().map(|d| d.to_string()).collect();
    let text = serde_json::to_string_pretty(&art)? + "\n";
    match &args.out {
        Some(path) => write_creating(path, &text)?,
        None => print!("{text}"),
    }
    println!("dims {}", dims.join(" "));
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let suite = match (args.suite_name, args.suite) {
        (Some(a), Some(b)) if a != b => return Err(Error::Usage("conflicting suite names".into())),
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => return Err(Error::Usage("name a suite".into())),
    };
    let lattice = args.lattice.as_deref().map(read_lattice).transpose()?;
    let mut cfg = RunConfig::new(lattice, args.max_weight, args.gen_bound)?;
    cfg.n = args.n;
    cfg.canonical = args.canonical;
    if let Some(p) = &args.summands {
        let mut spec: DsumSpec = serde_json::from_str(&std::fs::read_to_string(p)?)?;
        if let Some(n) = args.max_weight {
            spec.cutoff = n;
        }
        cfg.dsum = Some(spec);
    }
    let suites: Vec<SuiteName> = if suite == SuiteName::All {
        SuiteName::EACH
            .into_iter()
            .filter(|s| cfg.lattice.is_some() || matches!(s, SuiteName::Fixedpoint | SuiteName::Ideals | SuiteName::Dsum))
            .filter(|s| {
                !matches!(s, SuiteName::Fixedpoint | SuiteName::Ideals)
                    || cfg.lattice.as_ref().is_none_or(|l| l.gram() == [vec![2]])
            })
            .collect()
    } else {
        vec![suite]
    };
    if suite == SuiteName::All {
        let dir = args.out.as_ref().ok_or_else(|| Error::Usage("--suite all needs --out DIR".into()))?;
        std::fs::create_dir_all(dir)?;
    }
    let mut all_ok = true;
    for s in suites {
        let rep = run_suite(s, &cfg)?;
        all_ok &= rep.passed();
        let text = rep.to_string_pretty();
        match (&args.out, suite) {
            (Some(dir), SuiteName::All) => {
                std::fs::write(dir.join(format!("{}.json", s.as_str())), text)?;
                println!("{} {}", s.as_str(), if rep.passed() { "PASS" } else { "FAIL" });
            }
            (Some(path), _) => {
                write_creating(path, &text)?;
                println!("{} {}", s.as_str(), if rep.passed() { "PASS" } else { "FAIL" });
            }
            (None, _) => print!("{text}"),
        }
        if let Some(f) = rep.first_failure() {
            eprintln!("{}: first failing check {}: {}", s.as_str(), f.name, f.detail);
        }
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Aggregated view of the suite reports found in a directory.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub passed: bool,
    pub suites: Vec<SuiteSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub file: String,
    pub passed: bool,
    pub checks: usize,
    pub failed_checks: Vec<String>,
    pub flags: Vec<Value>,
}

pub fn summarize_dir(dir: &Path) -> Result<RunSummary> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut suites = Vec::new();
    for f in files {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&f)?)?;
        let (Some(suite), Some(checks)) = (v["suite"].as_str(), v["checks"].as_array()) else {
            continue;
        };
        suites.push(SuiteSummary {
            suite: suite.into(),
            file: f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            passed: v["passed"].as_bool().unwrap_or(false),
            checks: checks.len(),
            failed_checks: checks
                .iter()
                .filter(|c| c["passed"] != json!(true))
                .filter_map(|c| c["name"].as_str().map(String::from))
                .collect(),
            flags: v["flags"].as_array().cloned().unwrap_or_default(),
        });
    }
    Ok(RunSummary { passed: suites.iter().all(|s| s.passed), suites })
}

pub fn render_summary(s: &RunSummary) -> String {
    if s.suites.is_empty() {
        return "nothing to report\n".into();
    }
    let mut out = String::new();
    for x in &s.suites {
        let ok = x.checks - x.failed_checks.len();
        out += &format!("{:<14} {}  {ok}/{} checks\n", x.suite, if x.passed { "PASS" } else { "FAIL" }, x.checks);
        for f in &x.failed_checks {
            out += &format!("    failed: {f}\n");
        }
        for f in &x.flags {
            out += &format!("    flagged: {} residuals differ from the default cocycle\n", f["candidate"].as_str().unwrap_or("?"));
        }
    }
    let failed = s.suites.iter().filter(|x| !x.passed).count();
    out += &if failed == 0 {
        format!("all {} suites passed\n", s.suites.len())
    } else {
        format!("{failed} of {} suites failed\n", s.suites.len())
    };
    out
}

fn cmd_report(args: &ReportArgs) -> Result<ExitCode> {
    let s = summarize_dir(&args.dir)?;
    print!("{}", render_summary(&s));
    if let Some(p) = &args.out {
        write_creating(p, &(serde_json::to_string_pretty(&s)? + "\n"))?;
    }
    Ok(if s.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

