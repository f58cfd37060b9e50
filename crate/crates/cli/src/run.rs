//! Pipelines behind each command. Every command yields report sections;
//! a section is asserted when it carries checks that decide the exit status.

use crate::config::{Command, RunConfig};
use anyhow::{Context, Result};
use modelcheck::cutoff::{hessian_sweep, laplacian_sweep, variation_factor, Certificate};
use modelcheck::pde::{
    classify_stochastic_completeness, exterior_eigenfunction, gradient_probe, li_yau_ratio, positivity_probe,
    solve_dirichlet_exhaustion, Completeness, ExhaustionOptions,
};
use modelcheck::radial::{bump, generate_corpus, TestCorpus};
use modelcheck::verify::{
    density_probe, density_surrogate, doubling_radii, enrichment_change, hardy_constant, verify_cz2, verify_hardy,
    verify_hardy2, verify_weight_embedding, Record, VerifyOptions,
};
use modelcheck::{build_green, build_model, CurvatureProfile, GreenFunction, RadialFunction, InequalityReport, Lambda, ModelManifold, Verdict};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// One CSV row: `section,label,lhs,rhs,ratio,bound,margin,log_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub section: String,
    pub label: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    /// Asserted upper bound on the ratio, if any.
    pub bound: Option<f64>,
    /// `bound - ratio`.
    pub margin: Option<f64>,
    pub log_scale: Option<f64>,
}

impl Row {
    fn record(section: &str, r: &Record, bound: Option<f64>) -> Row {
        Row {
            section: section.to_string(),
            label: r.label.clone(),
            lhs: Some(r.lhs),
            rhs: Some(r.rhs),
            ratio: Some(r.ratio),
            bound,
            margin: bound.map(|b| b - r.ratio),
            log_scale: Some(r.log_scale),
        }
    }

    fn value(section: &str, label: &str, v: f64) -> Row {
        Row {
            section: section.to_string(),
            label: label.to_string(),
            lhs: Some(v),
            rhs: None,
            ratio: None,
            bound: None,
            margin: None,
            log_scale: None,
        }
    }

    /// A measured value against an asserted ceiling.
    fn bounded(section: &str, label: &str, v: f64, bound: f64) -> Row {
        Row {
            bound: Some(bound),
            margin: Some(bound - v),
            ratio: Some(v),
            ..Row::value(section, label, v)
        }
    }

    fn pair(section: &str, label: &str, lhs: f64, rhs: f64) -> Row {
        Row {
            rhs: Some(rhs),
            ratio: Some(lhs / rhs),
            ..Row::value(section, label, lhs)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub name: String,
    pub command: Command,
    pub verdict: Verdict,
    /// Failed asserted checks, each naming the offending record.
    pub failures: Vec<String>,
    /// Report-only notes (skipped parts, inconclusive outcomes).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub detail: Value,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

impl Section {
    fn new(command: Command, name: impl Into<String>) -> Section {
        Section {
            name: name.into(),
            command,
            verdict: Verdict::ReportOnly,
            failures: Vec::new(),
            notes: Vec::new(),
            detail: Value::Null,
            rows: Vec::new(),
        }
    }

    /// Records an asserted check.
    fn check(&mut self, ok: bool, failure: impl FnOnce() -> String) {
        if ok {
            if self.verdict == Verdict::ReportOnly {
                self.verdict = Verdict::Holds;
            }
        } else {
            self.verdict = Verdict::Violated;
            self.failures.push(failure());
        }
    }

    fn records(&mut self, report: &InequalityReport, bound: Option<f64>) {
        let name = self.name.clone();
        self.rows.extend(report.records.iter().map(|r| Row::record(&name, r, bound)));
    }
}

pub struct ReportBundle {
    pub config: RunConfig,
    /// JSON of the command's primary model.
    pub model_json: String,
    pub sections: Vec<Section>,
}

impl ReportBundle {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|s| s.verdict != Verdict::Violated)
    }

    /// `section: failure` for every failed asserted check.
    pub fn failures(&self) -> Vec<String> {
        self.sections
            .iter()
            .flat_map(|s| s.failures.iter().map(move |f| format!("{}: {f}", s.name)))
            .collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.sections.iter().flat_map(|s| s.rows.iter())
    }
}

/// Radius each command builds its model to when none is configured.
pub fn default_t_max(command: Command, profile: &CurvatureProfile) -> f64 {
    match command {
        Command::Model | Command::Green | Command::Cutoffs | Command::Stochastic | Command::All => 2048.0,
        Command::Hardy | Command::Hardy2 | Command::Embed | Command::Cz2 => match profile {
            CurvatureProfile::PowerLaw { alpha, .. } => (200.0 / (alpha + 2.0)).clamp(20.0, 100.0),
            CurvatureProfile::Flat => 100.0,
            _ => 40.0,
        },
        Command::Density => 160.0,
        Command::Ppp => 130.0,
        Command::Liyau => 140.0,
    }
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    models: BTreeMap<u64, ModelManifold>,
    greens: BTreeMap<(u64, u64), GreenFunction>,
    opts: VerifyOptions,
}

impl Runner<'_> {
    fn t_max(&self, command: Command) -> f64 {
        self.cfg
            .model
            .t_max
            .unwrap_or_else(|| default_t_max(command, &self.cfg.profile()))
    }

    fn model(&mut self, command: Command) -> Result<&ModelManifold> {
        let t_max = self.t_max(command);
        let key = t_max.to_bits();
        if !self.models.contains_key(&key) {
            let m = &self.cfg.model;
            let model = build_model(m.n, self.cfg.profile(), t_max, m.tol)
                .with_context(|| format!("building the model to t_max = {t_max}"))?;
            self.models.insert(key, model);
        }
        Ok(&self.models[&key])
    }

    fn green(&mut self, command: Command, p: f64) -> Result<(&ModelManifold, &GreenFunction)> {
        let key = (self.t_max(command).to_bits(), p.to_bits());
        self.model(command)?;
        if !self.greens.contains_key(&key) {
            let g = build_green(&self.models[&key.0], p).with_context(|| format!("building the Green function for p = {p}"))?;
            self.greens.insert(key, g);
        }
        Ok((&self.models[&key.0], &self.greens[&key]))
    }

    fn radii(&self, default: &[f64]) -> Vec<f64> {
        self.cfg.verify.radii.clone().unwrap_or_else(|| default.to_vec())
    }

}

fn corpus(seed: u64, model: &ModelManifold, inner: f64, size: usize, prefix: Vec<RadialFunction>) -> Result<Vec<RadialFunction>> {
    Ok(generate_corpus(&TestCorpus::new(seed, size), model, inner, prefix)?)
}

/// Runs the configured command.
pub fn run(cfg: &RunConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let mut ctx = Runner {
        cfg,
        models: BTreeMap::new(),
        greens: BTreeMap::new(),
        opts: VerifyOptions::default(),
    };
    let commands: Vec<Command> = match cfg.command {
        Command::All => Command::PIPELINE.to_vec(),
        c => vec![c],
    };
    let mut sections = Vec::new();
    for c in commands {
        let mut s = match c {
            Command::Model => model_sections(&mut ctx)?,
            Command::Green => green_sections(&mut ctx)?,
            Command::Hardy => hardy_sections(&mut ctx)?,
            Command::Hardy2 => hardy2_sections(&mut ctx)?,
            Command::Embed => embed_sections(&mut ctx)?,
            Command::Cz2 => cz2_sections(&mut ctx)?,
            Command::Cutoffs => cutoff_sections(&mut ctx)?,
            Command::Density => density_sections(&mut ctx)?,
            Command::Ppp => ppp_sections(&mut ctx)?,
            Command::Liyau => liyau_sections(&mut ctx, cfg.command == Command::Liyau)?,
            Command::Stochastic => stochastic_sections(&mut ctx)?,
            Command::All => unreachable!(),
        };
        sections.append(&mut s);
    }
    let primary = if cfg.command == Command::All { Command::Model } else { cfg.command };
    let model_json = ctx.model(primary)?.to_json()?;
    Ok(ReportBundle {
        config: cfg.clone(),
        model_json,
        sections,
    })
}

fn model_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let model = ctx.model(Command::Model)?;
    let mut s = Section::new(Command::Model, "model");
    let res = model.residuals()?;
    let name = s.name.clone();
    s.rows.push(Row::value(&name, "residual:riccati", res.riccati));
    s.rows.push(Row::value(&name, "residual:log_warp", res.log_warp));
    s.rows.push(Row::value(&name, "residual:volume", res.volume));
    let mut samples = Vec::new();
    for t in [1.0, 2.0, 4.0, 8.0] {
        if t <= model.t_max {
            let st = model.state(t)?;
            s.rows.push(Row::value(&name, &format!("w:t={t}"), st.w));
            s.rows.push(Row::value(&name, &format!("logj:t={t}"), st.logj));
            samples.push(json!({"t": t, "w": st.w, "logj": st.logj, "y": st.y}));
        }
    }
    let fits = model.fits();
    if let Some(f) = &fits {
        s.rows.push(Row::value(&name, "fit:w_ratio_limit", f.w_ratio_limit));
        s.rows.push(Row::value(&name, "fit:y_constant", f.y_constant));
        s.rows.push(Row::value(&name, "fit:y_drift", f.y_drift));
    }
    s.detail = json!({
        "n": model.n,
        "profile": model.profile,
        "t_max": model.t_max,
        "tol": model.tol,
        "nodes": model.grid.len(),
        "residuals": res,
        "fits": fits,
        "samples": samples,
    });
    Ok(vec![s])
}

fn green_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let ps = ctx.cfg.verify.p.clone();
    let bound = 1e-7_f64.max(1e3 * ctx.cfg.model.tol);
    let mut out = Vec::new();
    for p in ps {
        let (model, g) = ctx.green(Command::Green, p)?;
        let mut s = Section::new(Command::Green, format!("green[p={p}]"));
        let name = s.name.clone();
        let resid = g.superharmonicity_residual(model)?;
        let seed = g.seed_sensitivity(model)?;
        let fit = g.derivative_fit(model);
        s.rows.push(Row::bounded(&name, "superharmonicity_residual", resid, bound));
        s.rows.push(Row::value(&name, "seed_sensitivity", seed));
        s.rows.push(Row::value(&name, "r_k", g.r_k));
        if let Some(f) = &fit {
            s.rows.push(Row::pair(&name, "derivative_constant", f.fitted, f.predicted));
        }
        s.check(resid < bound, || format!("superharmonicity_residual {resid:e} exceeds {bound:e}"));
        s.detail = json!({
            "p": p,
            "q": g.q,
            "r_k": g.r_k,
            "seed_radius": g.seed_radius,
            "superharmonicity_residual": resid,
            "seed_sensitivity": seed,
            "derivative_fit": fit.map(|f| json!({"fitted": f.fitted, "predicted": f.predicted, "relative_error": f.relative_error()})),
        });
        out.push(s);
    }
    Ok(out)
}

fn worst_label(r: &InequalityReport) -> String {
    r.worst()
        .map(|w| format!("`{}` (ratio {:e})", w.label, w.ratio))
        .unwrap_or_else(|| "no records".into())
}

fn hardy_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let (ps, betas, count, seed) = (ctx.cfg.verify.p.clone(), ctx.cfg.betas(), ctx.cfg.verify.count, ctx.cfg.verify.seed);
    let opts = ctx.opts;
    let mut out = Vec::new();
    for p in ps {
        let (model, g) = ctx.green(Command::Hardy, p)?;
        let family = g.near_extremal_family(model, 0.0)?;
        let corpus = corpus(seed, model, g.r_k, count, family)?;
        for &beta in &betas {
            let r = verify_hardy(model, g, p, beta, &corpus, &opts)?;
            let sharp = hardy_constant(p);
            let saturation = r
                .records
                .iter()
                .filter(|x| x.label.starts_with("extremal"))
                .map(|x| x.ratio / sharp)
                .fold(0.0, f64::max);
            let mut s = Section::new(Command::Hardy, format!("hardy[p={p},beta={beta}]"));
            s.records(&r, Some(sharp));
            s.check(r.verdict == Verdict::Holds, || format!("ratio above the sharp constant {sharp:e}: {}", worst_label(&r)));
            s.check(saturation >= 0.5, || format!("near-extremal family reaches only {saturation:e} of the sharp constant"));
            s.detail = json!({"saturation": saturation, "report": r});
            out.push(s);
        }
    }
    Ok(out)
}

fn hardy2_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let (ps, betas, count, seed) = (ctx.cfg.verify.p.clone(), ctx.cfg.betas(), ctx.cfg.verify.count, ctx.cfg.verify.seed);
    let opts = ctx.opts;
    let mut out = Vec::new();
    for p in ps {
        let (model, g) = ctx.green(Command::Hardy2, p)?;
        let base = corpus(seed, model, g.r_k, count, Vec::new())?;
        let rich = corpus(seed, model, g.r_k, 2 * count, Vec::new())?;
        for &beta in &betas {
            let r = verify_hardy2(model, g, p, beta, &base, &opts)?;
            let r2 = verify_hardy2(model, g, p, beta, &rich, &opts)?;
            let mut s = Section::new(Command::Hardy2, format!("hardy2[p={p},beta={beta}]"));
            s.records(&r, None);
            let chain = r.diagnostics.get("chain_violations").copied().unwrap_or(0.0);
            s.check(chain == 0.0, || format!("{chain} records break the first-order chain"));
            s.detail = json!({"enrichment_change": enrichment_change(&r, &r2), "report": r});
            out.push(s);
        }
    }
    Ok(out)
}

fn embed_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let (ps, count, seed) = (ctx.cfg.verify.p.clone(), ctx.cfg.verify.count, ctx.cfg.verify.seed);
    let alpha = ctx.cfg.curvature_exponent();
    let opts = ctx.opts;
    let radii = ctx.cfg.verify.radii.clone();
    let model = ctx.model(Command::Embed)?;
    let base = corpus(seed, model, 0.0, count, Vec::new())?;
    let rich = corpus(seed, model, 0.0, 2 * count, Vec::new())?;
    let radii = radii.unwrap_or_else(|| doubling_radii(model));
    let mut out = Vec::new();
    for p in ps {
        let e = verify_weight_embedding(model, &base, p, alpha, 1.0, &radii, &opts)?;
        let e2 = verify_weight_embedding(model, &rich, p, alpha, 1.0, &radii, &opts)?;
        let mut s = Section::new(Command::Embed, format!("embed[p={p}]"));
        for (tag, r) in [("second", &e.second_order), ("first", &e.first_order), ("sweep", &e.sweep)] {
            let name = s.name.clone();
            s.rows.extend(r.records.iter().map(|x| Row {
                label: format!("{tag}:{}", x.label),
                ..Row::record(&name, x, None)
            }));
        }
        s.check(e.sweep.verdict == Verdict::Holds, || {
            format!("weight tail sweep does not decay: {}", worst_label(&e.sweep))
        });
        s.detail = json!({
            "alpha": alpha,
            "enrichment_change_second": enrichment_change(&e.second_order, &e2.second_order),
            "enrichment_change_first": enrichment_change(&e.first_order, &e2.first_order),
            "report": e,
        });
        out.push(s);
    }
    Ok(out)
}

fn cz2_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let (count, seed) = (ctx.cfg.verify.count, ctx.cfg.verify.seed);
    let (eps, a2) = (ctx.cfg.verify.epsilon.clone(), ctx.cfg.verify.a2.clone());
    let weight = ctx.cfg.curvature_exponent();
    let opts = ctx.opts;
    let model = ctx.model(Command::Cz2)?;
    let base = corpus(seed, model, 0.0, count, Vec::new())?;
    let rich = corpus(seed, model, 0.0, 2 * count, Vec::new())?;
    let r = verify_cz2(model, &base, weight, &eps, &a2, &opts)?;
    let r2 = verify_cz2(model, &rich, weight, &eps, &a2, &opts)?;
    let mut cz = Section::new(Command::Cz2, "cz2");
    cz.records(&r.cz2, None);
    let name = cz.name.clone();
    for &(a2, a1) in &r.pareto {
        cz.rows.push(Row::value(&name, &format!("pareto:a2={a2}"), a1));
    }
    cz.detail = json!({
        "enrichment_change": enrichment_change(&r.cz2, &r2.cz2),
        "enriched_constant": r2.cz2.empirical_constant,
        "report": r.cz2,
        "weighted": r.weighted,
        "pareto": r.pareto,
    });
    let mut b = Section::new(Command::Cz2, "bochner");
    b.records(&r.bochner, r.bochner.sharp_constant);
    b.check(r.bochner.verdict == Verdict::Holds, || format!("Bochner residual too large: {}", worst_label(&r.bochner)));
    b.detail = json!({"report": r.bochner});
    Ok(vec![cz, b])
}

fn certificate_rows(s: &mut Section, tag: &str, certs: &[Certificate]) {
    let name = s.name.clone();
    for c in certs {
        let r = c.family.r;
        s.rows.push(Row::value(&name, &format!("{tag}:grad_certificate:R={r}"), c.grad_certificate));
        s.rows.push(Row::value(&name, &format!("{tag}:second_certificate:R={r}"), c.second_certificate));
    }
}

fn cutoff_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let beta = ctx.cfg.curvature_exponent();
    let gamma = ctx.cfg.verify.gamma;
    let lambda = ctx.cfg.profile().lambda();
    let radii = ctx.radii(&[16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0]);
    let model = ctx.model(Command::Cutoffs)?;
    let inside: Vec<f64> = radii.iter().copied().filter(|r| 2.0 * r <= model.t_max).collect();
    let mut s = Section::new(Command::Cutoffs, format!("cutoffs[beta={beta}]"));
    if inside.len() < radii.len() {
        s.notes.push(format!("radii beyond t_max/2 = {} dropped", model.t_max / 2.0));
    }
    let certs = hessian_sweep(model, &inside, beta)?;
    certificate_rows(&mut s, "hessian", &certs);
    let gv = variation_factor(&certs.iter().map(|c| c.grad_certificate).collect::<Vec<_>>());
    let hv = variation_factor(&certs.iter().map(|c| c.second_certificate).collect::<Vec<_>>());
    let name = s.name.clone();
    s.rows.push(Row::bounded(&name, "hessian:grad_variation", gv, 2.0));
    s.rows.push(Row::bounded(&name, "hessian:second_variation", hv, 2.0));
    s.check(gv < 2.0, || format!("gradient certificate varies by {gv} across radii"));
    s.check(hv < 2.0, || format!("Hessian certificate varies by {hv} across radii"));
    let mut lap = Value::Null;
    if let Some(lam) = lambda {
        let lr: Vec<f64> = radii.iter().copied().filter(|r| gamma * r <= model.t_max).collect();
        match laplacian_sweep(model, lam, &lr, gamma) {
            Ok(c) => {
                certificate_rows(&mut s, "laplacian", &c);
                lap = json!(c);
            }
            Err(e) => s.notes.push(format!("laplacian cutoffs skipped: {e}")),
        }
    } else {
        s.notes.push("laplacian cutoffs skipped: profile has no scale function".into());
    }
    s.detail = json!({
        "beta": beta,
        "gamma": gamma,
        "grad_variation": gv,
        "second_variation": hv,
        "hessian": certs,
        "laplacian": lap,
    });
    Ok(vec![s])
}

fn density_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let ps = ctx.cfg.verify.p.clone();
    let opts = ctx.opts;
    let radii = ctx.radii(&[8.0, 16.0, 32.0, 64.0]);
    let model = ctx.model(Command::Density)?;
    let mut out = Vec::new();
    for p in ps {
        let f = density_surrogate(model, p, 6.0)?;
        let r = density_probe(model, &f, p, &radii, &opts)?;
        let mut s = Section::new(Command::Density, format!("density[p={p}]"));
        s.records(&r, None);
        s.check(r.verdict == Verdict::Holds, || {
            let bad = r.diagnostics.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ");
            format!("remainder columns do not decay ({bad})")
        });
        s.detail = json!({"report": r});
        out.push(s);
    }
    Ok(out)
}

fn unit_bump(label: &str) -> RadialFunction {
    bump(label, Some(1.0), 2.0, 0.25, 0.25, 1.0, 0)
}

fn ppp_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let radii = ctx.radii(&[8.0, 16.0, 32.0, 64.0]);
    let model = ctx.model(Command::Ppp)?;
    let opts = ExhaustionOptions::default();
    let psi = unit_bump("psi");
    let mu = unit_bump("mu");

    let nested: Vec<f64> = radii.iter().copied().take(3).collect();
    let ex = solve_dirichlet_exhaustion(model, &psi, &nested, &[1.0, 2.0, 4.0], &opts)?;
    let mut e = Section::new(Command::Ppp, "exhaustion");
    let name = e.name.clone();
    for lvl in &ex.levels {
        for (&(p, v), &(_, s)) in lvl.lp_norms.iter().zip(&ex.psi_lp_norms) {
            e.rows.push(Row::pair(&name, &format!("lp:R={}:p={p}", lvl.radius), v, s));
        }
        e.rows.push(Row::pair(&name, &format!("sup:R={}", lvl.radius), lvl.sup_norm, ex.psi_sup));
    }
    e.rows.push(Row::bounded(&name, "monotonicity_violation", ex.monotonicity_violation, 1e-10));
    e.check(ex.monotonicity_violation <= 1e-10, || {
        format!("nested solutions decrease by {:e}", ex.monotonicity_violation)
    });
    e.check(ex.lp_excess() <= 1e-8, || format!("L^p norm exceeds that of psi by {:e}", ex.lp_excess()));
    e.check(ex.sup_excess() <= 1e-8, || format!("sup norm exceeds that of psi by {:e}", ex.sup_excess()));
    e.detail = json!({
        "radii": ex.radii,
        "psi_lp_norms": ex.psi_lp_norms,
        "psi_sup": ex.psi_sup,
        "monotonicity_violation": ex.monotonicity_violation,
        "lp_excess": ex.lp_excess(),
        "sup_excess": ex.sup_excess(),
        "last_change": ex.last_change,
        "converged": ex.converged,
        "levels": ex.levels.iter().map(|l| json!({
            "radius": l.radius,
            "nodes": l.t.len(),
            "richardson_error": l.richardson_error,
            "lp_norms": l.lp_norms,
            "sup_norm": l.sup_norm,
            "min_interior": l.min_interior,
            "underflow_nodes": l.underflow_nodes,
        })).collect::<Vec<_>>(),
    });

    let pr = positivity_probe(model, &mu, &psi, &radii, &opts)?;
    let mut s = Section::new(Command::Ppp, "positivity");
    let name = s.name.clone();
    for row in &pr.pairing {
        for (tag, v) in [
            ("laplacian_v", row.laplacian_v),
            ("laplacian_chi", row.laplacian_chi),
            ("gradient", row.gradient),
            ("mass", row.mass),
            ("total", row.total),
        ] {
            s.rows.push(Row::pair(&name, &format!("R={}:{tag}", row.r), v, pr.target));
        }
    }
    s.rows.push(Row::value(&name, "min_u", pr.min_u));
    s.rows.push(Row::value(&name, "sup_u", pr.sup_u));
    s.check(pr.positive, || format!("min u = {:e} against sup u = {:e}", pr.min_u, pr.sup_u));
    s.check(pr.cutoff_terms_decay, || "cutoff pairing terms do not decay below 1e-3 of the target".into());
    s.detail = json!({"report": pr});

    let g = gradient_probe(model, &psi, radii[0].max(2.0), &[1.25, 1.5, 2.0], &opts)?;
    let mut gs = Section::new(Command::Ppp, "gradient");
    gs.records(&g, None);
    gs.detail = json!({"report": g});
    Ok(vec![e, s, gs])
}

fn liyau_sections(ctx: &mut Runner, required: bool) -> Result<Vec<Section>> {
    let gamma = ctx.cfg.verify.gamma;
    let radii = ctx.radii(&[8.0, 16.0, 32.0, 64.0]);
    let lambda = ctx.cfg.profile().lambda();
    let mut s = Section::new(Command::Liyau, "liyau");
    let Some(lam) = lambda else {
        if required {
            anyhow::bail!("the Li-Yau probe needs a profile with a scale function (power law with alpha > 0 or iterated-log)");
        }
        s.notes.push("skipped: profile has no scale function".into());
        return Ok(vec![s]);
    };
    let model = ctx.model(Command::Liyau)?;
    let v = exterior_eigenfunction(model, 1.0)?;
    let inside: Vec<f64> = radii.iter().copied().filter(|r| gamma * r <= model.t_max).collect();
    if inside.len() < radii.len() {
        s.notes.push(format!("radii beyond t_max/gamma = {} dropped", model.t_max / gamma));
    }
    let ratios: Vec<f64> = inside
        .iter()
        .map(|&r| li_yau_ratio(model, &v, |t| lam.value(t), r, gamma))
        .collect::<modelcheck::Result<_>>()?;
    let name = s.name.clone();
    for (r, q) in inside.iter().zip(&ratios) {
        s.rows.push(Row::value(&name, &format!("R={r}"), *q));
    }
    let variation = variation_factor(&ratios);
    let residual = v.residual(model, 1.0, model.t_max)?;
    s.rows.push(Row::value(&name, "eigenfunction_residual", residual));
    let linear = matches!(lam, Lambda::IteratedLog { k: 0, .. });
    if linear {
        s.rows.push(Row::bounded(&name, "variation", variation, 2.0));
        s.check(variation < 2.0, || format!("ratio varies by {variation} across radii"));
    } else {
        s.rows.push(Row::value(&name, "variation", variation));
    }
    s.detail = json!({
        "lambda": lam,
        "gamma": gamma,
        "radii": inside,
        "ratios": ratios,
        "variation": variation,
        "eigenfunction_residual": residual,
    });
    Ok(vec![s])
}

fn stochastic_sections(ctx: &mut Runner) -> Result<Vec<Section>> {
    let tol = ctx.cfg.model.tol;
    let model = ctx.model(Command::Stochastic)?;
    let r = classify_stochastic_completeness(model)?;
    let mut s = Section::new(Command::Stochastic, "stochastic");
    let name = s.name.clone();
    for &(t, inc) in &r.increments {
        s.rows.push(Row::value(&name, &format!("increment:T={t}"), inc));
    }
    for (i, q) in r.ratios.iter().enumerate() {
        s.rows.push(Row::value(&name, &format!("ratio:{i}"), *q));
    }
    let bound = 100.0 * tol;
    s.rows.push(Row::bounded(&name, "identity_residual", r.identity_residual, bound));
    s.check(r.identity_residual < bound, || {
        format!("identity residual {:e} exceeds {bound:e}", r.identity_residual)
    });
    let expected = match model.profile {
        CurvatureProfile::PowerLaw { a, alpha } if a > 0.0 && alpha > 2.0 => Some(Completeness::Incomplete),
        CurvatureProfile::PowerLaw { .. } | CurvatureProfile::Flat => Some(Completeness::Complete),
        _ => None,
    };
    match (expected, r.verdict) {
        (_, Completeness::Inconclusive) => s.notes.push("increment ratios straddle the thresholds".into()),
        (Some(e), v) => s.check(e == v, || {
            let recs: Vec<String> = r.ratios.iter().enumerate().map(|(i, q)| format!("`ratio:{i}` = {q}")).collect();
            format!("classified {v:?} where {e:?} is expected ({})", recs.join(", "))
        }),
        (None, _) => {}
    }
    s.detail = json!({
        "verdict": r.verdict,
        "expected": expected,
        "increments": r.increments,
        "ratios": r.ratios,
        "u_at_tmax": r.u_at_tmax,
        "identity_residual": r.identity_residual,
    });
    Ok(vec![s])
}
