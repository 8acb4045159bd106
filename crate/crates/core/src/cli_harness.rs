//! Experiment driver: run configuration, the check suites, and a flat,
//! deterministic report in JSON or CSV.

use crate::aba_bridge::aba_sweep;
use crate::dense_oracle::{hamiltonian_decay, hamiltonian_limit_check, oracle_gates, transfer_antiperiodic};
use crate::determinant_engine::off_shell_sweep;
use crate::form_factors::{dense_matrix_element, eigen_states, form_factor, form_factor_sweep, ff_sigma_z_flipped, SpinOp};
use crate::scalar_products::{coherence_sweep, eigen_sweep, gaudin_norm, gaudin_via_slavnov_limit, homogeneous_stress, on_shell_sweep, sp_direct, sp_with_eigenstate};
use crate::sov_states::{d_eigen_check, d_product_check, separate_state_aba, separate_state_dense, sov_gram_check, AbaBase, SeparateStateSpec, Side, SovBasis};
use crate::spectrum_tq::{full_spectrum, tau_top_coefficient};
use crate::chain_model::sample_points;
use crate::{rel_err, ChainParams, Error, Result, Spectrum, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

pub const MAX_SITES: usize = 8;

/// Check suites in the order they run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Oracle,
    Sov,
    Spectrum,
    Identities,
    ScalarProducts,
    FormFactors,
    AbaCheck,
    HomogeneousStress,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Oracle,
        Suite::Sov,
        Suite::Spectrum,
        Suite::Identities,
        Suite::ScalarProducts,
        Suite::FormFactors,
        Suite::AbaCheck,
        Suite::HomogeneousStress,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Sov => "sov",
            Suite::Spectrum => "spectrum",
            Suite::Identities => "identities",
            Suite::ScalarProducts => "scalar-products",
            Suite::FormFactors => "form-factors",
            Suite::AbaCheck => "aba-check",
            Suite::HomogeneousStress => "homogeneous-stress",
        }
    }

    fn needs_spectrum(self) -> bool {
        matches!(self, Suite::Spectrum | Suite::Identities | Suite::ScalarProducts | Suite::FormFactors | Suite::AbaCheck)
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::InvalidArgument(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_sites: usize,
    pub seed: u64,
    pub margin: f64,
    /// replaces every tolerance of the named suite
    pub tolerances: BTreeMap<Suite, f64>,
    pub suites: Vec<Suite>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(n_sites: usize, seed: u64) -> Self {
        RunConfig {
            n_sites,
            seed,
            margin: crate::chain_model::DEFAULT_MARGIN,
            tolerances: BTreeMap::new(),
            suites: Suite::ALL.to_vec(),
            out: None,
            format: Format::Json,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_SITES).contains(&self.n_sites) {
            return Err(Error::InvalidArgument(format!("n_sites = {} outside 1..={MAX_SITES}", self.n_sites)));
        }
        if !(self.margin > 0.0) || !self.margin.is_finite() {
            return Err(Error::InvalidArgument("margin must be positive".into()));
        }
        if let Some((s, t)) = self.tolerances.iter().find(|(_, t)| !(**t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance {t} for {} must be positive", s.name())));
        }
        if self.suites.is_empty() {
            return Err(Error::InvalidArgument("no suites selected".into()));
        }
        Ok(())
    }
}

/// Parse `suite=value`.
pub fn parse_tolerance(s: &str) -> Result<(Suite, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::InvalidArgument(format!("expected suite=value, got '{s}'")))?;
    let t: f64 = v.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad tolerance '{v}'")))?;
    Ok((k.trim().parse()?, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// rel_err ≤ tol
    Within,
    /// value ≥ tol; used for rejected variants, counts and slopes
    AtLeast,
    /// informational, always passes
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub formula: String,
    pub value: [f64; 2],
    pub reference: [f64; 2],
    pub rel_err: f64,
    pub tol: f64,
    pub mode: Mode,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub completed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    pub checks: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n_sites: usize,
    pub seed: u64,
    pub margin: f64,
    pub pass: bool,
    pub suites: Vec<SuiteOutcome>,
    pub rows: Vec<CheckRow>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,formula,value_re,value_im,reference_re,reference_im,rel_err,tol,mode,pass,note\n");
        for r in &self.rows {
            let mode = match r.mode {
                Mode::Within => "within",
                Mode::AtLeast => "at-least",
                Mode::Record => "record",
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&r.name),
                csv_field(&r.formula),
                r.value[0],
                r.value[1],
                r.reference[0],
                r.reference[1],
                r.rel_err,
                r.tol,
                mode,
                r.pass,
                csv_field(r.note.as_deref().unwrap_or(""))
            );
        }
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Row collector for one suite.
struct Sink {
    prefix: &'static str,
    tol_override: Option<f64>,
    rows: Vec<CheckRow>,
}

impl Sink {
    fn push(&mut self, name: &str, formula: &str, value: C64, reference: C64, err: f64, tol: f64, mode: Mode) {
        let tol = match (mode, self.tol_override) {
            (Mode::Within, Some(t)) => t,
            _ => tol,
        };
        let pass = match mode {
            Mode::Within => err <= tol,
            Mode::AtLeast => value.re >= tol,
            Mode::Record => true,
        };
        self.rows.push(CheckRow {
            name: format!("{}.{name}", self.prefix),
            formula: formula.to_string(),
            value: [value.re, value.im],
            reference: [reference.re, reference.im],
            rel_err: err,
            tol,
            mode,
            pass,
            note: None,
        });
    }

    /// A residual that must stay below `tol`.
    fn residual(&mut self, name: &str, formula: &str, err: f64, tol: f64) {
        self.push(name, formula, C64::new(err, 0.0), C64::new(0.0, 0.0), err, tol, Mode::Within);
    }

    /// A computed value against its expected value, relative with floor 1.
    fn value(&mut self, name: &str, formula: &str, got: C64, want: C64, tol: f64) {
        self.push(name, formula, got, want, rel_err(got, want, 1.0), tol, Mode::Within);
    }

    fn at_least(&mut self, name: &str, formula: &str, got: f64, bound: f64) {
        self.push(name, formula, C64::new(got, 0.0), C64::new(bound, 0.0), 0.0, bound, Mode::AtLeast);
    }

    /// A variant that must be rejected: its best error stays above `bound`.
    /// An infinite best error means no case applied, which is recorded only.
    fn rejected(&mut self, name: &str, formula: &str, best_err: f64, bound: f64) {
        if best_err.is_finite() {
            self.at_least(name, formula, best_err, bound);
        } else {
            self.record(name, formula, best_err);
            self.note("no applicable case at this size");
        }
    }

    fn record(&mut self, name: &str, formula: &str, v: f64) {
        self.push(name, formula, C64::new(v, 0.0), C64::new(0.0, 0.0), 0.0, 0.0, Mode::Record);
    }

    fn record_c(&mut self, name: &str, formula: &str, v: C64) {
        self.push(name, formula, v, C64::new(0.0, 0.0), 0.0, 0.0, Mode::Record);
    }

    fn note(&mut self, text: &str) {
        if let Some(r) = self.rows.last_mut() {
            r.note = Some(text.to_string());
        }
    }
}

struct Context {
    params: ChainParams,
    basis: SovBasis,
    spectrum: Option<std::result::Result<Spectrum, String>>,
    seed: u64,
}

impl Context {
    fn spectrum(&mut self) -> Result<&Spectrum> {
        if self.spectrum.is_none() {
            self.spectrum = Some(full_spectrum(&self.params, self.seed).map_err(|e| e.to_string()));
        }
        match self.spectrum.as_ref().unwrap() {
            Ok(s) => Ok(s),
            Err(e) => Err(Error::InvalidArgument(format!("spectrum unavailable: {e}"))),
        }
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Run the selected suites and collect a sorted report.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let params = crate::chain_model::sample_generic_params(config.n_sites, config.seed, config.margin)?;
    let basis = SovBasis::new(&params);
    let mut ctx = Context { params, basis, spectrum: None, seed: config.seed };
    let mut selected = config.suites.clone();
    selected.sort();
    selected.dedup();
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for suite in selected {
        let mut sink = Sink { prefix: suite.name(), tol_override: config.tolerances.get(&suite).copied(), rows: Vec::new() };
        let res = if suite.needs_spectrum() { ctx.spectrum().map(|_| ()) } else { Ok(()) }.and_then(|_| run_suite(suite, &mut ctx, &mut sink));
        let reason = res.err().map(|e| e.to_string());
        if let Some(r) = &reason {
            sink.rows.push(CheckRow {
                name: format!("{}.aborted", suite.name()),
                formula: "suite precondition".into(),
                value: [f64::NAN, 0.0],
                reference: [0.0, 0.0],
                rel_err: f64::NAN,
                tol: 0.0,
                mode: Mode::Within,
                pass: false,
                note: Some(r.clone()),
            });
        }
        outcomes.push(SuiteOutcome {
            suite,
            completed: reason.is_none(),
            reason,
            checks: sink.rows.len(),
            failed: sink.rows.iter().filter(|r| !r.pass).count(),
        });
        rows.extend(sink.rows);
    }
    rows.sort_by(|a, b| a.name.cmp(&b.name));
    let pass = rows.iter().all(|r| r.pass);
    Ok(Report { n_sites: config.n_sites, seed: config.seed, margin: config.margin, pass, suites: outcomes, rows })
}

fn run_suite(suite: Suite, ctx: &mut Context, sink: &mut Sink) -> Result<()> {
    match suite {
        Suite::Oracle => oracle_suite(ctx, sink),
        Suite::Sov => sov_suite(ctx, sink),
        Suite::Spectrum => spectrum_suite(ctx, sink),
        Suite::Identities => identities_suite(ctx, sink),
        Suite::ScalarProducts => scalar_suite(ctx, sink),
        Suite::FormFactors => form_factor_suite(ctx, sink),
        Suite::AbaCheck => aba_suite(ctx, sink),
        Suite::HomogeneousStress => stress_suite(ctx, sink),
    }
}

fn oracle_suite(ctx: &mut Context, sink: &mut Sink) -> Result<()> {
    let p = &ctx.params;
    let g = oracle_gates(p, ctx.seed, 4);
    sink.residual("commutativity", "[T(λ), T(μ)] = 0", g.commutativity, 1e-9);
    sink.residual("quantum_det", "B(λ)C(λ−η) − A(λ)D(λ−η) = a(λ)d(λ−η)", g.quantum_det, 1e-9);
    sink.residual("sx_symmetry", "[Sˣ, T(λ)] = 0", g.sx_symmetry, 1e-9);
    sink.residual("gamma_x_symmetry", "[Γˣ, T(λ)] = 0", g.gamma_x_symmetry, 1e-9);
    sink.residual("similarity", "A(λ) − D(λ) = Γ_U T(λ) Γ_U⁻¹", g.similarity, 1e-9);
    let n = p.n_sites();
    let h0 = hamiltonian_limit_check(n, 0.0)?;
    if n >= 2 {
        sink.residual("hamiltonian.homogeneous", "H = 2η T(0)⁻¹T'(0) − 2N at ξ ≡ 0", h0, 1e-9);
        let (devs, slope) = hamiltonian_decay(n, &[1e-2, 1e-3, 1e-4])?;
        for (e, d) in devs {
            sink.record(&format!("hamiltonian.eps={e:e}"), "‖H − (2η T(0)⁻¹T'(0) − 2N)‖ at ξ_a = ε·a", d);
        }
        sink.at_least("hamiltonian.decay_slope", "log-log slope of the deviation in ε", slope, 0.9);
    } else {
        sink.record("hamiltonian.homogeneous", "H = 2η T(0)⁻¹T'(0) − 2N at ξ ≡ 0", h0);
        sink.note("single site: no bond, T'(0) = 0");
    }
    Ok(())
}

fn sov_suite(ctx: &mut Context, sink: &mut Sink) -> Result<()> {
    let p = &ctx.params;
    let pts = sample_points(p, ctx.seed.wrapping_add(11), 3);
    sink.residual("d_eigen", "D(λ)|h⟩ = d_h(λ)|h⟩ on both sides", d_eigen_check(p, &ctx.basis, &pts), 1e-9);
    let (gram, resolution) = sov_gram_check(p, &ctx.basis);
    sink.residual("gram", "⟨k|h⟩ = δ_kh / (V(ξ)V(ξ−hη))", gram, 1e-9);
    sink.residual("resolution", "Σ_h V(ξ)V(ξ−hη)|h⟩⟨h| = 1", resolution, 1e-9);
    let roots = sample_points(p, ctx.seed.wrapping_add(12), p.n_sites());
    sink.residual("d_product", "∏D(α)|1⟩ equals the SoV sum, both sides", d_product_check(p, &ctx.basis, &roots)?, 1e-9);
    let (one, _) = crate::aba_bridge::one_explicit_check(p, &ctx.basis)?;
    sink.residual("one_dense", "|1⟩ = ⊗(1, −1)", one, 1e-12);
    // closed-form single-site fixture
    let f = ChainParams::fixture_n1();
    let fb = SovBasis::new(&f);
    let l = SeparateStateSpec::one(&f, Side::Left);
    let r = SeparateStateSpec::one(&f, Side::Right);
    let dense = crate::linalg::pair(&separate_state_dense(&f, &fb, &l)?, &separate_state_dense(&f, &fb, &r)?);
    sink.value("fixture_n1.one_norm.dense", "⟨1|1⟩ = 2", dense, c(2.0), 1e-10);
    sink.value("fixture_n1.one_norm.determinant", "⟨1|1⟩ = 2", sp_direct(&f, &l, &r)?, c(2.0), 1e-10);
    Ok(())
}

fn distinct_count(spec: &Spectrum) -> usize {
    let n = spec.params.n_sites();
    let coeffs: Vec<Vec<C64>> = spec.records.iter().map(|r| (0..n).map(|k| r.tau.coeffs.get(k).copied().unwrap_or_default()).collect()).collect();
    let scale = coeffs.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
    (0..coeffs.len())
        .filter(|&i| {
            (0..i).all(|j| coeffs[i].iter().zip(&coeffs[j]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) > 1e-6 * scale)
        })
        .count()
}

fn spectrum_suite(ctx: &mut Context, sink: &mut Sink) -> Result<()> {
    let seed = ctx.seed;
    let basis = &ctx.basis;
    let spec = ctx.spectrum.as_ref().unwrap().as_ref().unwrap();
    let p = &spec.params;
    let n = p.n_sites();
    let dim = p.dim() as f64;
    sink.value("distinct_tau", "2^N distinct transfer eigenvalues", c(distinct_count(spec) as f64), c(dim), 0.0);
    let worst = |f: fn(&crate::spectrum_tq::Residuals) -> f64| spec.records.iter().map(|r| f(&r.residuals)).fold(0.0, f64::max);
    sink.residual("functional_tq", "τ(λ)Q(λ) = a(λ)Q(λ−η) − d(λ)Q(λ+η) at random λ", worst(|r| r.functional_tq), 1e-8);
    sink.residual("discrete_system", "τ at the ξ_a matches the transfer matrix", worst(|r| r.discrete_system), 1e-9);
    sink.residual("bethe", "Bethe equations for the roots of Q", worst(|r| r.bethe), 1e-7);
    sink.residual("q_uniqueness", "Q unchanged under a redrawn auxiliary node", worst(|r| r.uniqueness), 1e-9);
    sink.residual("held_out_tau", "τ interpolant at a held-out point", worst(|r| r.held_out_tau), 1e-9);
    sink.residual("wronskian", "p(λ)q(λ−η) − q(λ)p(λ−η) ∝ d(λ)", worst(|r| r.wronskian), 1e-8);
    sink.residual("pq_reconstruction", "τ = ±½[p(λ−η)q(λ+η) − q(λ−η)p(λ+η)]", worst(|r| r.pq_reconstruction), 1e-8);
    let scale = spec.records.iter().map(|r| r.tau.max_coeff()).fold(1.0, f64::max);
    let mut pair_err = 0.0f64;
    let mut involution = 0usize;
    let mut top = 0.0f64;
    let mut degree_sum = 0usize;
    for (i, r) in spec.records.iter().enumerate() {
        let q = &spec.records[r.partner];
        if q.partner != i {
            involution += 1;
        }
        let d = (0..n).map(|k| r.tau.coeffs.get(k).copied().unwrap_or_default() + q.tau.coeffs.get(k).copied().unwrap_or_default()).map(|z| z.norm()).fold(0.0, f64::max);
        pair_err = pair_err.max(d / scale);
        let want = p.eta * (2.0 * r.degree as f64 - n as f64);
        top = top.max((tau_top_coefficient(p, &r.tau) - want).norm());
        if r.degree + q.degree != n {
            degree_sum += 1;
        }
    }
    sink.residual("pairing.residual", "τ ↔ −τ", pair_err, 1e-9);
    sink.value("pairing.involution_breaks", "partner of partner is self", c(involution as f64), c(0.0), 0.0);
    sink.value("pairing.degree_breaks", "deg Q_τ + deg Q_{−τ} = N", c(degree_sum as f64), c(0.0), 0.0);
    sink.residual("tau_top_coefficient", "leading coefficient of τ is (2R−N)η", top, 1e-8);
    let lam = sample_points(p, seed.wrapping_add(21), 1)[0];
    let t = transfer_antiperiodic(p, lam);
    let (mut eig, mut refs) = (0.0f64, 0.0f64);
    for rec in &spec.records {
        let tau = rec.tau.eval(lam);
        let hat = rec.minus_roots()?;
        for side in [Side::Right, Side::Left] {
            let v = separate_state_dense(p, basis, &SeparateStateSpec::from_roots(p, &rec.bethe_roots, side)?)?;
            let tv = match side {
                Side::Right => &t * &v,
                Side::Left => t.tr_mul(&v),
            };
            eig = eig.max((tv - &v * tau).norm() / (v.norm() * (1.0 + tau.norm())));
            let one = separate_state_aba(p, basis, &rec.bethe_roots, &AbaBase::One, side)?;
            let alt = separate_state_aba(p, basis, &hat, &AbaBase::OneAlt { target: rec.bethe_roots.clone() }, side)?;
            refs = refs.max((&v - one).norm() / v.norm()).max((&v - alt).norm() / v.norm());
        }
    }
    sink.residual("eigenstates", "T(λ)|Q_τ⟩ = τ(λ)|Q_τ⟩ and ⟨Q_τ|T(λ) = τ(λ)⟨Q_τ|", eig, 1e-8);
    sink.residual("eigenstates.d_products", "|Q_τ⟩ from ∏D on |1⟩ and on the alternative reference", refs, 1e-9);
    // closed-form single-site fixture
    let f = ChainParams::fixture_n1();
    let fs = full_spectrum(&f, seed)?;
    let plus = fs.records.iter().find(|r| r.degree == 1).ok_or(Error::InvalidArgument("fixture: no R=1 record".into()))?;
    let minus = fs.records.iter().find(|r| r.degree == 0).ok_or(Error::InvalidArgument("fixture: no R=0 record".into()))?;
    let z = c(0.0);
    sink.value("fixture_n1.tau_plus", "τ = +1", plus.tau.eval(z), c(1.0), 1e-10);
    sink.value("fixture_n1.tau_minus", "τ = −1", minus.tau.eval(z), c(-1.0), 1e-10);
    sink.value("fixture_n1.q_plus.root", "Q_{+1}(λ) = λ + 1/2", plus.bethe_roots[0], c(-0.5), 1e-10);
    sink.value("fixture_n1.q_plus.value_at_1", "Q_{+1}(1) = 3/2", plus.q_tau.eval(c(1.0)), c(1.5), 1e-10);
    sink.value("fixture_n1.q_minus", "Q_{−1}(λ) = 1", minus.q_tau.eval(c(0.7)), c(1.0), 1e-10);
    Ok(())
}

fn identities_suite(ctx: &mut Context, sink: &mut Sink) -> Result<()> {
    let seed = ctx.seed;
    let off = off_shell_sweep(seed.wrapping_add(31), 100, 5)?;
    sink.at_least("off_shell.instances", "random instances per identity", off.instances as f64, 100.0);
    sink.residual("sign_flip", "A⁺_x[f] = A⁻_x[−E⁺/E⁻ · f]", off.sign_flip, 1e-10);
    sink.residual("izergin_expansion", "I^{(μ)}(x, y) = (−1)^N A⁻_x[μE⁺_y] = (−1)^N A⁺_y[μE⁻_x]", off.izergin_expansion, 1e-10);
    sink.residual("unbalanced_expansion", "A⁺_y[μE⁻_x] = (1−μ)^{N−M} A⁻_x[μE⁺_y]", off.unbalanced_expansion, 1e-10);
    sink.residual("zero_overlap", "A^±_y[E^∓_x] = 0 for |y| > |x|", off.zero_overlap, 1e-10);
    sink.residual("izergin_stable", "divided-difference Izergin determinant", off.izergin_stable, 1e-9);
    let spec = ctx.spectrum()?;
    let on = on_shell_sweep(spec, seed.wrapping_add(32), 10)?;
    sink.record("on_shell.root_sets", "on-shell root sets, 10 y-sets each", on.root_sets as f64);
    sink.residual("slavnov_balanced", "S_M(x, y) = (−1)^M A⁻_{x∪y}[μE⁺_ξ] on shell", on.slavnov_balanced, 1e-9);
    sink.residual("slavnov_excess", "S_{M,M+S}(x, y) = (−1)^{M+S(S+1)/2} A⁻_{x∪y}[μE⁺_ξ] on shell", on.slavnov_excess, 1e-9);
    if on.half_filling_cases > 0 {
        sink.residual("half_filling", "S_M = (−1)^{M+N} I^{(−1)}(x∪y, ξ) at N = 2M", on.half_filling, 1e-9);
    } else {
        sink.record("half_filling", "S_M = (−1)^{M+N} I^{(−1)}(x∪y, ξ) at N = 2M", 0.0);
        sink.note("odd N: no half-filled root set");
    }
    sink.rejected("slavnov_excess.unsigned_rejected", "the same identity without the sign", on.unsigned_best, 1e-3);
    let mut lim = 0.0f64;
    for rec in &spec.records {
        let g = gaudin_norm(&spec.params, rec)?;
        let l = gaudin_via_slavnov_limit(&spec.params, rec)?;
        lim = lim.max((l.value - g).norm() / g.norm());
    }
    sink.residual("coinciding_limit", "Slavnov form at α → λ tends to the Gaudin norm", lim, 1e-6);
    Ok(())
}

fn scalar_suite(ctx: &mut Context, sink: &mut Sink) -> Result<()> {
    let seed = ctx.seed;
    let co = coherence_sweep(&ctx.params, &ctx.basis, seed.wrapping_add(41), 50)?;
    sink.at_least("coherence.pairs", "random separate-state pairs", co.pairs as f64, 50.0);
    sink.residual("coherence.direct", "direct N×N determinant against the dense pairing", co.direct, 1e-9);
    sink.residual("coherence.a_form", "(−1)^{N(R+S)} ∏d(u) A⁺_ξ[−E⁻_u]", co.a_form, 1e-9);
    sink.residual("coherence.b_form", "(−1)^{N(R+S)} 2^{N−R−S} ∏d(u) A⁻_u[−E⁺_ξ]", co.b_form, 1e-9);
    sink.residual("coherence.izergin_form", "(−1)^{N(R+S+1)} ∏d(u) I^{(−1)}(u, ξ) at R+S = N", co.izergin_form, 1e-9);
    sink.record("coherence.izergin_cases", "pairs with R+S = N", co.izergin_cases as f64);
    sink.rejected("coherence.b_form_e_minus_rejected", "B form with E⁻_ξ inside A⁻_u", co.b_form_rejected_best, 1e-3);
    let ei = eigen_sweep(ctx.spectrum.as_ref().unwrap().as_ref().unwrap(), &ctx.basis, seed.wrapping_add(42))?;
    sink.record("eigen.cases", "eigenstates against random α, |α| = 0..=N+1", ei.cases as f64);
    sink.residual("eigen.vanishing", "⟨α|Q_τ⟩ = 0 for |α| < R", ei.vanishing, 1e-9);
    sink.residual("eigen.balanced_izergin", "c ∏d(α)∏d(λ̂) I^{(1)}(α∪λ̂, ξ), c = ∏Q_τ(ξ)/Q_{−τ}(ξ)", ei.balanced_izergin, 1e-9);
    sink.residual("eigen.balanced_slavnov", "(−1)^M 2^{N−2M} ∏d(α)∏d(λ) S^{(−1)}(λ, α)", ei.balanced_slavnov, 1e-9);
    sink.residual("eigen.excess", "generalized Slavnov form for |α| > R", ei.excess, 1e-9);
    sink.rejected("eigen.izergin_without_constant_rejected", "balanced Izergin form without c", ei.izergin_rejected_best, 1e-3);
    sink.residual("gaudin.norm", "⟨Q_τ|Q_τ⟩ from the Gaudin determinant", ei.gaudin, 1e-9);
    sink.residual("gaudin.matrix_fd", "Gaudin matrix against finite differences of the Bethe phases", ei.gaudin_fd_matrix, 1e-5);
    sink.residual("gaudin.slavnov_limit", "Slavnov form at α → λ", ei.gaudin_limit, 1e-6);
    // closed-form single-site fixture
    let f = ChainParams::fixture_n1();
    let fs = full_spectrum(&f, seed)?;
    for (deg, want, label) in [(0usize, 2.0, "minus"), (1, 0.5, "plus")] {
        let rec = fs.records.iter().find(|r| r.degree == deg).ok_or(Error::InvalidArgument("fixture record missing".into()))?;
        sink.value(&format!("fixture_n1.gaudin_{label}"), "Gaudin norms {2, 1/2}", gaudin_norm(&f, rec)?, c(want), 1e-10);
        if deg == 0 {
            sink.value("fixture_n1.one_overlap", "⟨1|Q_{−1}⟩ = ⟨1|1⟩ = 2", sp_with_eigenstate(&f, &[], rec)?.value(), c(2.0), 1e-10);
        }
    }
    Ok(())
}

fn form_factor_suite(ctx: &mut Context, sink: &mut Sink) -> Result<()> {
    let spec = ctx.spectrum.as_ref().unwrap().as_ref().unwrap();
    let w = form_factor_sweep(spec, &ctx.basis)?;
    sink.record("combinations", "(bra, ket, site, op) triples checked", w.combinations as f64);
    sink.residual("sigma_minus.selection", "⟨Q_τ|σ⁻|Q_τ'⟩ = 0 for R − R' ∉ {−1, 0, 1}", w.selection, 1e-8);
    sink.residual("sigma_minus.bra_higher", "R = R' + 1 determinant", w.bra_higher, 1e-8);
    sink.residual("sigma_minus.ket_higher", "R' = R + 1 determinant", w.ket_higher, 1e-8);
    sink.residual("sigma_minus.equal", "R = R', τ ≠ τ' rank-one perturbed determinant", w.equal, 1e-8);
    sink.residual("sigma_minus.diagonal", "τ = τ' limit minus the Gaudin norm", w.diagonal, 1e-8);
    sink.residual("sigma_z", "⟨Q_τ|σᶻ|Q_τ'⟩ = 2(R−R')⟨Q_τ|σ⁻|Q_τ'⟩", w.sigma_z, 1e-8);
    sink.residual("sigma_plus", "⟨Q_τ|σ⁺|Q_τ'⟩ = (−1)^{R−R'}⟨Q_τ|σ⁻|Q_τ'⟩", w.sigma_plus, 1e-8);
    sink.residual("gamma_x_consistency", "σ⁺ = Γˣσ⁻Γˣ against the dense pairing", w.gamma_x_consistency, 1e-8);
    sink.residual("reconstruction", "σ⁻_n = (−1)^N ∏_{j<n}T(ξ_j)/a · D(ξ_n)/a · ∏_{j>n}T(ξ_j)/a · Γˣ", w.reconstruction, 1e-9);
    sink.at_least("reconstruction.without_gamma_x_rejected", "the same product without Γˣ", w.reconstruction_raw, 0.5);
    sink.residual("sx_eigenvalue", "Sˣ|Q_τ⟩ = (2R−N)|Q_τ⟩", w.sx_eigenvalue, 1e-9);
    sink.rejected("sx_eigenvalue.n_minus_2r_rejected", "Sˣ eigenvalue read as N−2R", w.sx_rejected_best, 0.5);
    sink.rejected("sigma_z.r_prime_minus_r_rejected", "σᶻ with 2(R'−R)", w.sigma_z_rejected_best, 1e-3);
    // closed-form single-site fixture
    let f = ChainParams::fixture_n1();
    let fb = SovBasis::new(&f);
    let fs = full_spectrum(&f, ctx.seed)?;
    let plus = fs.records.iter().find(|r| r.degree == 1).ok_or(Error::InvalidArgument("fixture record missing".into()))?;
    let minus = fs.records.iter().find(|r| r.degree == 0).ok_or(Error::InvalidArgument("fixture record missing".into()))?;
    let (bl, _) = eigen_states(&f, &fb, minus)?;
    let (_, kr) = eigen_states(&f, &fb, plus)?;
    for (op, want, label) in [(SpinOp::SigmaMinus, -0.5, "sigma_minus"), (SpinOp::SigmaPlus, 0.5, "sigma_plus"), (SpinOp::SigmaZ, 1.0, "sigma_z")] {
        let formula = format!("⟨Q_{{−1}}|{}|Q_{{+1}}⟩ = {want}", op.name());
        sink.value(&format!("fixture_n1.{label}"), &formula, form_factor(&f, minus, plus, 1, op)?, c(want), 1e-10);
        sink.value(&format!("fixture_n1.{label}.dense"), &formula, dense_matrix_element(&bl, &kr, op, 1, 1), c(want), 1e-10);
    }
    let flipped = ff_sigma_z_flipped(&f, minus, plus, 1)?;
    sink.at_least("fixture_n1.sigma_z.r_prime_minus_r_rejected", "σᶻ with 2(R'−R) gives −1, dense gives +1", (flipped - 1.0).norm(), 0.5);
    Ok(())
}

fn aba_suite(ctx: &mut Context, sink: &mut Sink) -> Result<()> {
    let spec = ctx.spectrum.as_ref().unwrap().as_ref().unwrap();
    let a = aba_sweep(spec, &ctx.basis)?;
    let dim = spec.params.dim() as f64;
    sink.residual("twisted_eigen", "∏C(λ)|0'⟩ is an eigenvector of A − D with eigenvalue τ", a.twisted_eigen, 1e-9);
    sink.residual("isospectrality", "spec(A + D) = spec(A − D)", a.isospectrality, 1e-9);
    sink.residual("similarity", "A(λ) − D(λ) = Γ_U T(λ) Γ_U⁻¹", a.similarity, 1e-9);
    sink.residual("correspondence.constant", "|Q_τ⟩ = (−1)^{N(R−1)} 2^{N/2−R} Γ_U⁻¹ ∏C(λ)|0'⟩", a.constant_error, 1e-9);
    sink.residual("correspondence.ratio_spread", "componentwise ratio spread", a.ratio_spread, 1e-9);
    sink.residual("one_explicit.product", "|1⟩ = ⊗(1, −1)", a.one_product, 1e-12);
    sink.residual("one_explicit.via_u", "|1⟩ = (−√2)^N Γ_U⁻¹|0'⟩", a.one_via_u, 1e-12);
    sink.residual("aba_norm", "⟨0'|∏B(λ)∏C(λ)|0'⟩ = Gaudin / 2^{N−2R}", a.aba_norm, 1e-8);
    sink.record("column_sub.pairs", "eigenpairs with R = R' ≥ 1", a.column_sub_pairs as f64);
    sink.residual("column_sub", "SoV and ABA column-substituted Slavnov sums agree", a.column_sub, 1e-9);
    sink.residual("column_sub.sov_sum_vs_dense", "prefactor times the SoV sum equals ⟨Q_τ|σ⁻|Q_τ'⟩", a.sov_sum_vs_dense, 1e-8);
    sink.residual("column_sub.sov_sum_vs_formula", "the same against the determinant form factor", a.sov_sum_vs_formula, 1e-8);
    sink.residual("column_sub.aba_sigma_z", "2^{N−2R−1}⟨0'|∏B σᶻ ∏C|0'⟩ = ⟨Q_τ|σ⁻|Q_τ'⟩", a.aba_sigma_z_vs_dense, 1e-8);
    sink.value("distinct_states", "2^N independent Bethe states", c(a.distinct_states as f64), c(dim), 0.0);
    Ok(())
}

/// ε-list of the near-homogeneous stress.
pub const STRESS_EPS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

fn stress_suite(ctx: &mut Context, sink: &mut Sink) -> Result<()> {
    let n = ctx.params.n_sites().max(2);
    let st = homogeneous_stress(n, &STRESS_EPS, ctx.seed)?;
    sink.record("n_sites", "chain length of the stress (at least 2)", n as f64);
    for p in &st.points {
        let tag = format!("eps={:e}", p.eps);
        sink.record_c(&format!("{tag}.b_form"), "B form at ξ_a = ε·a", p.b_form);
        sink.record_c(&format!("{tag}.izergin_form"), "Izergin form at ξ_a = ε·a", p.izergin_form);
        sink.record_c(&format!("{tag}.slavnov_form"), "Slavnov form with the tracked eigenstate", p.slavnov_form);
        sink.value(&format!("{tag}.b_vs_izergin"), "B and Izergin forms coincide", p.izergin_form, p.b_form, 1e-9);
        sink.residual(&format!("{tag}.bethe"), "tracked eigenstate stays on shell", p.bethe, 1e-8);
        sink.record(&format!("{tag}.raw_condition"), "condition number of the raw N×N scalar-product matrix", p.raw_condition);
        sink.record(&format!("{tag}.raw_direct_deviation"), "raw determinant relative to the B form", p.raw_direct_dev);
    }
    for (k, ((b, i), s)) in st.b_diffs.iter().zip(&st.izergin_diffs).zip(&st.slavnov_diffs).enumerate() {
        let tag = format!("diff={:e}->{:e}", STRESS_EPS[k], STRESS_EPS[k + 1]);
        sink.record(&format!("{tag}.b_form"), "successive difference, relative", *b);
        sink.record(&format!("{tag}.izergin_form"), "successive difference, relative", *i);
        sink.record(&format!("{tag}.slavnov_form"), "successive difference, relative", *s);
    }
    sink.at_least("cauchy_shrink", "min over forms of (d_k/d_{k+1})·(ε_{k+1}/ε_k): differences shrink ∝ ε", st.min_shrink, 0.5);
    sink.at_least("cond_slope", "log-log growth of cond in 1/ε over resolvable decades, against N−1", st.cond_slope, (n - 1) as f64 - 0.15);
    sink.note("decades with cond above 1e15 are not resolvable in double precision");
    sink.at_least("cond_decades", "resolvable decades entering the slope", st.cond_decades as f64, 1.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(RunConfig::new(12, 1).validate().is_err());
        assert!(RunConfig::new(0, 1).validate().is_err());
        let mut c = RunConfig::new(3, 1);
        c.tolerances.insert(Suite::Oracle, -1.0);
        assert!(c.validate().is_err());
        assert!(run(&RunConfig::new(12, 1)).is_err());
    }

    #[test]
    fn tolerance_parsing() {
        assert_eq!(parse_tolerance("form-factors=1e-6").unwrap(), (Suite::FormFactors, 1e-6));
        assert!(parse_tolerance("nope=1").is_err());
        assert!(parse_tolerance("oracle").is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("x\"y"), "\"x\"\"y\"");
    }

    #[test]
    fn n1_all_suites_pass() {
        let r = run(&RunConfig::new(1, 3)).unwrap();
        let fails: Vec<_> = r.failures().map(|x| (&x.name, x.value, x.note.clone())).collect();
        assert!(r.pass, "{fails:?}");
        let row = r.row("form-factors.fixture_n1.sigma_minus").unwrap();
        assert_eq!(row.reference, [-0.5, 0.0]);
    }

    #[test]
    fn deterministic_json() {
        let mut c = RunConfig::new(2, 7);
        c.suites = vec![Suite::Spectrum, Suite::Oracle];
        assert_eq!(run(&c).unwrap().to_json(), run(&c).unwrap().to_json());
    }
}
