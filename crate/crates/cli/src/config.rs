//! Run configuration: TOML text in, validated [`RunConfig`] out, and back.
//!
//! Every value is read through [`toml::Spanned`] so that semantic errors
//! point at the offending line, not just the section.

use beamlab::integrator::{IntegratorConfig, Scheme};
use beamlab::laws::{DampingLaw, K2Kind, K3Kind, SourceLaw};
use beamlab::{Error, Result};
use serde::Deserialize;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::PathBuf;
use toml::Spanned;

pub const DEFAULT_N_MODES: usize = 16;
pub const DEFAULT_ENERGY: f64 = 2.0;
pub const DEFAULT_OUTPUT_DIR: &str = "runs";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub n_modes: usize,
    pub length: f64,
    pub kappa: f64,
    pub quad_points: usize,
}

/// Forcing profile `h` in modal coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum HProfile {
    Zero,
    /// `amplitude·w_j`, 1-based `j`.
    Mode {
        j: usize,
        amplitude: f64,
    },
    List(Vec<f64>),
}

impl HProfile {
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        match self {
            HProfile::Zero => vec![0.0; n],
            HProfile::Mode { j, amplitude } => {
                let mut h = vec![0.0; n];
                h[j - 1] = *amplitude;
                h
            }
            HProfile::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingConfig {
    pub lambda: f64,
    pub h: HProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    /// Gaussian `j⁻²` coefficients rescaled to `2E(0) = two_e`.
    Random {
        two_e: f64,
    },
    /// Displacement `amplitude·w_j`, zero velocity.
    Mode {
        j: usize,
        amplitude: f64,
    },
}

/// Experiment id plus the optional keys that driver understands. Keys left
/// at `None` fall back to the driver defaults at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub initial: InitialData,
    pub count: Option<usize>,
    pub window: Option<(f64, f64)>,
    pub lambdas: Option<Vec<f64>>,
    pub lambda0: Option<f64>,
    pub t_probe: Option<f64>,
    pub s: Option<f64>,
    pub probe_modes: Option<Vec<usize>>,
    pub probe_size: Option<f64>,
    pub trials: Option<usize>,
    pub rhos: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    pub random_starts: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            initial: InitialData::Random { two_e: DEFAULT_ENERGY },
            count: None,
            window: None,
            lambdas: None,
            lambda0: None,
            t_probe: None,
            s: None,
            probe_modes: None,
            probe_size: None,
            trials: None,
            rhos: None,
            eps: None,
            random_starts: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub damping: DampingLaw,
    pub source: SourceLaw,
    pub forcing: ForcingConfig,
    pub integrator: IntegratorConfig,
    pub experiment: ExperimentConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("empty config is valid")
    }
}

/// Experiment ids accepted besides the plain `simulate` run, with the
/// optional keys each one reads.
const EXPERIMENT_KEYS: &[(&str, &[&str])] = &[
    ("simulate", &["initial", "energy"]),
    ("exp_k1_decay", &["initial", "energy", "window"]),
    ("exp_k2_exponential", &["initial", "energy", "window"]),
    ("exp_k3_ball", &["count"]),
    ("exp_two_trajectory", &["energy"]),
    (
        "exp_lambda_lipschitz",
        &["initial", "energy", "lambdas", "lambda0", "t_probe"],
    ),
    ("exp_decomposition", &["energy", "s", "probe_modes", "probe_size"]),
    ("box_count_entropy", &["count", "eps"]),
    ("nakao_suite", &["trials", "rhos"]),
    ("haraux_suite", &["trials"]),
    ("stationary", &["lambdas", "random_starts"]),
];

pub fn experiment_ids() -> impl Iterator<Item = &'static str> {
    EXPERIMENT_KEYS.iter().map(|(id, _)| *id)
}

// ---- raw layer -------------------------------------------------------------

type S<T> = Option<Spanned<T>>;

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: S<RawSeed>,
    output_dir: S<String>,
    model: Option<RawModel>,
    damping: Option<RawDamping>,
    source: Option<RawSource>,
    forcing: Option<RawForcing>,
    integrator: Option<RawIntegrator>,
    experiment: Option<RawExperiment>,
}

/// TOML integers are signed; seeds above `i64::MAX` travel as strings.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawSeed {
    Int(i64),
    Text(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n_modes: S<i64>,
    length: S<f64>,
    kappa: S<f64>,
    quad_points: S<i64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDamping {
    variant: S<String>,
    gamma: S<f64>,
    q: S<f64>,
    kind: S<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSource {
    variant: S<String>,
    delta: S<f64>,
    r: S<f64>,
    sigma: S<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawH {
    Preset(String),
    List(Vec<f64>),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    lambda: S<f64>,
    h: S<RawH>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    dt: S<f64>,
    scheme: S<String>,
    horizon: S<f64>,
    sample_stride: S<i64>,
    alpha: S<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    id: S<String>,
    initial: S<String>,
    energy: S<f64>,
    count: S<i64>,
    window: S<Vec<f64>>,
    lambdas: S<Vec<f64>>,
    lambda0: S<f64>,
    t_probe: S<f64>,
    s: S<f64>,
    probe_modes: S<Vec<i64>>,
    probe_size: S<f64>,
    trials: S<i64>,
    rhos: S<Vec<f64>>,
    eps: S<Vec<f64>>,
    random_starts: S<i64>,
}

// ---- resolution ------------------------------------------------------------

struct Ctx<'t> {
    text: &'t str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, span: Range<usize>, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line(span),
            msg: msg.into(),
        })
    }

    /// Value or default, keeping the span (`0..0` maps to line 1).
    fn get<T: Clone>(&self, v: &S<T>, default: T) -> (T, Range<usize>) {
        match v {
            Some(s) => (s.get_ref().clone(), s.span()),
            None => (default, 0..0),
        }
    }

    fn finite(&self, name: &str, v: &S<f64>, default: f64) -> Result<(f64, Range<usize>)> {
        let (x, sp) = self.get(v, default);
        if !x.is_finite() {
            return self.err(sp, format!("{name} must be finite, got {x}"));
        }
        Ok((x, sp))
    }

    fn count(&self, name: &str, v: &S<i64>, min: i64) -> Result<Option<usize>> {
        match v {
            None => Ok(None),
            Some(s) if *s.get_ref() < min => self.err(s.span(), format!("{name} must be ≥ {min}, got {}", s.get_ref())),
            Some(s) => Ok(Some(*s.get_ref() as usize)),
        }
    }

    fn reject_if<T>(&self, v: &S<T>, msg: impl Into<String>) -> Result<()> {
        match v {
            Some(s) => self.err(s.span(), msg),
            None => Ok(()),
        }
    }
}

/// `"mode:j:amplitude"` with 1-based `j`.
fn parse_mode(text: &str) -> Option<(usize, f64)> {
    let rest = text.strip_prefix("mode:")?;
    let (j, amp) = rest.split_once(':')?;
    let j: usize = j.trim().parse().ok()?;
    let amp: f64 = amp.trim().parse().ok()?;
    (amp.is_finite()).then_some((j, amp))
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        line: e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(1),
        msg: e.message().to_string(),
    })?;
    let cx = Ctx { text };

    let seed = match &raw.seed {
        None => 0,
        Some(s) => match s.get_ref() {
            RawSeed::Int(i) if *i >= 0 => *i as u64,
            RawSeed::Int(i) => return cx.err(s.span(), format!("seed must be ≥ 0, got {i}")),
            RawSeed::Text(t) => match t.parse::<u64>() {
                Ok(v) => v,
                Err(_) => return cx.err(s.span(), format!("seed must be a 64-bit unsigned integer, got {t:?}")),
            },
        },
    };
    let output_dir = PathBuf::from(cx.get(&raw.output_dir, DEFAULT_OUTPUT_DIR.to_string()).0);

    let m = raw.model.unwrap_or_default();
    let n_modes = cx.count("n_modes", &m.n_modes, 1)?.unwrap_or(DEFAULT_N_MODES);
    let (length, sp) = cx.finite("length", &m.length, PI)?;
    if !(length > 0.0) {
        return cx.err(sp, format!("length must be > 0, got {length}"));
    }
    let (kappa, sp) = cx.finite("kappa", &m.kappa, 0.0)?;
    if kappa < 0.0 {
        return cx.err(sp, format!("kappa must be ≥ 0, got {kappa}"));
    }
    let quad_points = match cx.count("quad_points", &m.quad_points, 1)? {
        None => 8 * n_modes,
        Some(q) if q < 2 * n_modes => {
            return cx.err(
                m.quad_points.as_ref().unwrap().span(),
                format!("quad_points must be ≥ 2·n_modes = {}, got {q}", 2 * n_modes),
            )
        }
        Some(q) => q,
    };
    let model = ModelConfig {
        n_modes,
        length,
        kappa,
        quad_points,
    };

    let damping = resolve_damping(&cx, raw.damping.unwrap_or_default())?;
    let source = resolve_source(&cx, raw.source.unwrap_or_default())?;

    let f = raw.forcing.unwrap_or_default();
    let (lambda, sp) = cx.finite("lambda", &f.lambda, 0.0)?;
    if !(0.0..=1.0).contains(&lambda) {
        return cx.err(sp, format!("λ ∈ [0, 1] violated: lambda = {lambda}"));
    }
    let h = match &f.h {
        None => HProfile::Zero,
        Some(s) => match s.get_ref() {
            RawH::Preset(p) if p == "zero" => HProfile::Zero,
            RawH::Preset(p) => match parse_mode(p) {
                Some((j, amplitude)) if (1..=n_modes).contains(&j) => HProfile::Mode { j, amplitude },
                Some((j, _)) => return cx.err(s.span(), format!("forcing mode {j} outside 1..={n_modes}")),
                None => {
                    return cx.err(
                        s.span(),
                        format!("h must be \"zero\", \"mode:j:amplitude\" or a list, got {p:?}"),
                    )
                }
            },
            RawH::List(v) if v.len() != n_modes => {
                return cx.err(
                    s.span(),
                    format!("h list needs n_modes = {n_modes} entries, got {}", v.len()),
                )
            }
            RawH::List(v) if v.iter().any(|x| !x.is_finite()) => return cx.err(s.span(), "h entries must be finite"),
            RawH::List(v) => HProfile::List(v.clone()),
        },
    };
    let forcing = ForcingConfig { lambda, h };

    let i = raw.integrator.unwrap_or_default();
    let (dt, sp_dt) = cx.finite("dt", &i.dt, 1e-3)?;
    if !(dt > 0.0) {
        return cx.err(sp_dt, format!("dt must be > 0, got {dt}"));
    }
    let (scheme_name, sp) = cx.get(&i.scheme, "strang".to_string());
    let scheme = match scheme_name.as_str() {
        "strang" => Scheme::SplitStrang,
        "rk4" => Scheme::Rk4,
        other => return cx.err(sp, format!("scheme must be \"strang\" or \"rk4\", got {other:?}")),
    };
    let (horizon, sp) = cx.finite("horizon", &i.horizon, 10.0)?;
    if !(horizon > 0.0) {
        return cx.err(sp, format!("horizon must be > 0, got {horizon}"));
    }
    let sample_stride = cx.count("sample_stride", &i.sample_stride, 1)?.unwrap_or(10);
    let (alpha, sp) = cx.finite("alpha", &i.alpha, 0.5)?;
    if !(0.0..=1.0).contains(&alpha) {
        return cx.err(sp, format!("alpha ∈ [0, 1] violated: alpha = {alpha}"));
    }
    let integrator = IntegratorConfig {
        dt,
        scheme,
        alpha,
        sample_stride,
        horizon,
    };
    // stability of RK4 depends on the model, so check it against the real one
    let probe = beamlab::SpectralModel::new(n_modes, length, kappa, quad_points).map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    if let Err(e) = integrator.validate(&probe) {
        return cx.err(sp_dt, e.to_string());
    }

    let experiment = resolve_experiment(&cx, raw.experiment.unwrap_or_default(), n_modes)?;

    Ok(RunConfig {
        model,
        damping,
        source,
        forcing,
        integrator,
        experiment,
        seed,
        output_dir,
    })
}

fn resolve_damping(cx: &Ctx<'_>, d: RawDamping) -> Result<DampingLaw> {
    let (variant, vsp) = cx.get(&d.variant, "k1".to_string());
    let (gamma, gsp) = cx.finite("gamma", &d.gamma, 1.0)?;
    let law = match variant.as_str() {
        "undamped" => {
            cx.reject_if(&d.gamma, "gamma does not apply to the undamped variant")?;
            cx.reject_if(&d.q, "q does not apply to the undamped variant")?;
            cx.reject_if(&d.kind, "kind does not apply to the undamped variant")?;
            DampingLaw::Undamped
        }
        "k1" => {
            cx.reject_if(&d.kind, "kind does not apply to the k1 variant")?;
            let (q, qsp) = cx.finite("q", &d.q, 1.0)?;
            if !(q >= 0.5) {
                return cx.err(qsp, format!("k1 needs q ≥ 1/2, got q = {q}"));
            }
            DampingLaw::K1Monomial { gamma, q }
        }
        "k2" => {
            cx.reject_if(&d.q, "q applies only to the k1 variant")?;
            let (kind, ksp) = cx.get(&d.kind, "constant".to_string());
            let kind = match kind.as_str() {
                "constant" => K2Kind::Constant,
                "exp_decay" => K2Kind::ExpDecay,
                "rational" => K2Kind::Rational,
                other => {
                    return cx.err(
                        ksp,
                        format!("k2 kind must be constant, exp_decay or rational, got {other:?}"),
                    )
                }
            };
            DampingLaw::K2Positive { gamma, kind }
        }
        "k3" => {
            cx.reject_if(&d.q, "q applies only to the k1 variant")?;
            let (kind, ksp) = cx.get(&d.kind, "rational".to_string());
            let kind = match kind.as_str() {
                "rational" => K3Kind::Rational,
                "shifted_exp" => K3Kind::ShiftedExp,
                other => return cx.err(ksp, format!("k3 kind must be rational or shifted_exp, got {other:?}")),
            };
            DampingLaw::K3Threshold { gamma, kind }
        }
        other => {
            return cx.err(
                vsp,
                format!("damping variant must be undamped, k1, k2 or k3, got {other:?}"),
            )
        }
    };
    if law != DampingLaw::Undamped && !(gamma > 0.0) {
        return cx.err(gsp, format!("damping needs γ > 0, got γ = {gamma}"));
    }
    law.validate().map_err(|e| Error::Parse {
        line: cx.line(vsp),
        msg: e.to_string(),
    })?;
    Ok(law)
}

fn resolve_source(cx: &Ctx<'_>, s: RawSource) -> Result<SourceLaw> {
    let (variant, vsp) = cx.get(&s.variant, "zero".to_string());
    match variant.as_str() {
        "zero" => {
            for (v, k) in [(&s.delta, "delta"), (&s.r, "r"), (&s.sigma, "sigma")] {
                cx.reject_if(v, format!("{k} does not apply to the zero source"))?;
            }
            Ok(SourceLaw::Zero)
        }
        "double_power" => {
            let (delta, dsp) = cx.finite("delta", &s.delta, 2.0)?;
            let (r, rsp) = cx.finite("r", &s.r, 1.0)?;
            let (sigma_c, ssp) = cx.finite("sigma", &s.sigma, 0.0)?;
            if !(r > 0.0) {
                return cx.err(rsp, format!("source needs 0 < r < δ, got r = {r}"));
            }
            if !(r < delta) {
                let sp = if s.delta.is_some() { dsp } else { rsp };
                return cx.err(sp, format!("source needs 0 < r < δ, got r = {r}, δ = {delta}"));
            }
            if sigma_c < 0.0 {
                return cx.err(ssp, format!("source needs σ ≥ 0, got σ = {sigma_c}"));
            }
            Ok(SourceLaw::DoublePower { delta, r, sigma_c })
        }
        other => cx.err(
            vsp,
            format!("source variant must be zero or double_power, got {other:?}"),
        ),
    }
}

fn resolve_experiment(cx: &Ctx<'_>, e: RawExperiment, n_modes: usize) -> Result<ExperimentConfig> {
    let (id, isp) = cx.get(&e.id, "simulate".to_string());
    let Some((_, allowed)) = EXPERIMENT_KEYS.iter().find(|(k, _)| *k == id) else {
        let known: Vec<&str> = experiment_ids().collect();
        return cx.err(
            isp,
            format!("unknown experiment {id:?}; expected one of {}", known.join(", ")),
        );
    };
    let present: [(&str, Option<Range<usize>>); 14] = [
        ("initial", e.initial.as_ref().map(|s| s.span())),
        ("energy", e.energy.as_ref().map(|s| s.span())),
        ("count", e.count.as_ref().map(|s| s.span())),
        ("window", e.window.as_ref().map(|s| s.span())),
        ("lambdas", e.lambdas.as_ref().map(|s| s.span())),
        ("lambda0", e.lambda0.as_ref().map(|s| s.span())),
        ("t_probe", e.t_probe.as_ref().map(|s| s.span())),
        ("s", e.s.as_ref().map(|s| s.span())),
        ("probe_modes", e.probe_modes.as_ref().map(|s| s.span())),
        ("probe_size", e.probe_size.as_ref().map(|s| s.span())),
        ("trials", e.trials.as_ref().map(|s| s.span())),
        ("rhos", e.rhos.as_ref().map(|s| s.span())),
        ("eps", e.eps.as_ref().map(|s| s.span())),
        ("random_starts", e.random_starts.as_ref().map(|s| s.span())),
    ];
    for (key, span) in present {
        if let Some(sp) = span {
            if !allowed.contains(&key) {
                return cx.err(sp, format!("key {key} does not apply to experiment {id}"));
            }
        }
    }
    let mut out = ExperimentConfig::new(&id);

    let (energy, esp) = cx.finite("energy", &e.energy, DEFAULT_ENERGY)?;
    if !(energy >= 0.0) {
        return cx.err(esp, format!("energy must be ≥ 0, got {energy}"));
    }
    out.initial = match &e.initial {
        None => InitialData::Random { two_e: energy },
        Some(s) => {
            let v = s.get_ref().as_str();
            let data = if v == "random" {
                InitialData::Random { two_e: energy }
            } else if v == "zero" {
                InitialData::Zero
            } else if let Some((j, amplitude)) = parse_mode(v) {
                if !(1..=n_modes).contains(&j) {
                    return cx.err(s.span(), format!("initial mode {j} outside 1..={n_modes}"));
                }
                InitialData::Mode { j, amplitude }
            } else {
                return cx.err(
                    s.span(),
                    format!("initial must be \"random\", \"zero\" or \"mode:j:amplitude\", got {v:?}"),
                );
            };
            if !matches!(data, InitialData::Random { .. }) {
                cx.reject_if(&e.energy, "energy applies only to random initial data")?;
            }
            data
        }
    };

    out.count = cx.count("count", &e.count, 1)?;
    out.trials = cx.count("trials", &e.trials, 1)?;
    out.random_starts = cx.count("random_starts", &e.random_starts, 0)?;
    if let Some(w) = &e.window {
        match w.get_ref().as_slice() {
            [a, b] if a.is_finite() && b.is_finite() && 0.0 <= *a && a < b => out.window = Some((*a, *b)),
            _ => return cx.err(w.span(), "window must be [start, end] with 0 ≤ start < end"),
        }
    }
    if let Some(l) = &e.lambdas {
        let v = l.get_ref();
        if v.is_empty() || v.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return cx.err(l.span(), "lambdas must be a non-empty list with every λ ∈ [0, 1]");
        }
        out.lambdas = Some(v.clone());
    }
    if let Some(l) = &e.lambda0 {
        let v = *l.get_ref();
        if !(0.0..=1.0).contains(&v) {
            return cx.err(l.span(), format!("λ₀ ∈ [0, 1] violated: lambda0 = {v}"));
        }
        out.lambda0 = Some(v);
    }
    if e.t_probe.is_some() {
        let (t, sp) = cx.finite("t_probe", &e.t_probe, 0.0)?;
        if !(t > 0.0) {
            return cx.err(sp, format!("t_probe must be > 0, got {t}"));
        }
        out.t_probe = Some(t);
    }
    if e.s.is_some() {
        let (s, sp) = cx.finite("s", &e.s, 0.0)?;
        if !(s > 0.0 && s < 2.0) {
            return cx.err(sp, format!("s ∈ (0, 2) violated: s = {s}"));
        }
        out.s = Some(s);
    }
    if let Some(p) = &e.probe_modes {
        let v = p.get_ref();
        if v.is_empty() || v.iter().any(|&j| j < 1 || j as usize > n_modes) {
            return cx.err(
                p.span(),
                format!("probe_modes must be a non-empty list within 1..={n_modes}"),
            );
        }
        out.probe_modes = Some(v.iter().map(|&j| j as usize).collect());
    }
    if e.probe_size.is_some() {
        let (p, sp) = cx.finite("probe_size", &e.probe_size, 0.0)?;
        if !(p > 0.0) {
            return cx.err(sp, format!("probe_size must be > 0, got {p}"));
        }
        out.probe_size = Some(p);
    }
    if let Some(r) = &e.rhos {
        let v = r.get_ref();
        if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return cx.err(r.span(), "rhos must be a non-empty list of finite values ≥ 0");
        }
        out.rhos = Some(v.clone());
    }
    if let Some(r) = &e.eps {
        let v = r.get_ref();
        let ok = !v.is_empty() && v.iter().all(|x| x.is_finite() && *x > 0.0) && v.windows(2).all(|w| w[1] < w[0]);
        if !ok {
            return cx.err(
                r.span(),
                "eps must be a non-empty, strictly decreasing list of positive values",
            );
        }
        out.eps = Some(v.clone());
    }
    Ok(out)
}

// ---- emission --------------------------------------------------------------

/// `{:?}` prints the shortest string that parses back to the same `f64`
/// and always keeps a decimal point, so TOML reads it as a float.
fn float(x: f64) -> String {
    format!("{x:?}")
}

fn float_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| float(*x)).collect();
    format!("[{}]", items.join(", "))
}

fn toml_str(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

/// Canonical TOML text with every resolved value spelled out.
pub fn emit(c: &RunConfig) -> String {
    let mut o = String::new();
    if c.seed <= i64::MAX as u64 {
        let _ = writeln!(o, "seed = {}", c.seed);
    } else {
        let _ = writeln!(o, "seed = \"{}\"", c.seed);
    }
    let _ = writeln!(o, "output_dir = {}", toml_str(&c.output_dir.to_string_lossy()));

    let m = &c.model;
    let _ = writeln!(o, "\n[model]");
    let _ = writeln!(o, "n_modes = {}", m.n_modes);
    let _ = writeln!(o, "length = {}", float(m.length));
    let _ = writeln!(o, "kappa = {}", float(m.kappa));
    let _ = writeln!(o, "quad_points = {}", m.quad_points);

    let _ = writeln!(o, "\n[damping]");
    match c.damping {
        DampingLaw::Undamped => {
            let _ = writeln!(o, "variant = \"undamped\"");
        }
        DampingLaw::K1Monomial { gamma, q } => {
            let _ = writeln!(o, "variant = \"k1\"\ngamma = {}\nq = {}", float(gamma), float(q));
        }
        DampingLaw::K2Positive { gamma, kind } => {
            let k = match kind {
                K2Kind::Constant => "constant",
                K2Kind::ExpDecay => "exp_decay",
                K2Kind::Rational => "rational",
            };
            let _ = writeln!(o, "variant = \"k2\"\ngamma = {}\nkind = \"{k}\"", float(gamma));
        }
        DampingLaw::K3Threshold { gamma, kind } => {
            let k = match kind {
                K3Kind::Rational => "rational",
                K3Kind::ShiftedExp => "shifted_exp",
            };
            let _ = writeln!(o, "variant = \"k3\"\ngamma = {}\nkind = \"{k}\"", float(gamma));
        }
    }

    let _ = writeln!(o, "\n[source]");
    match c.source {
        SourceLaw::Zero => {
            let _ = writeln!(o, "variant = \"zero\"");
        }
        SourceLaw::DoublePower { delta, r, sigma_c } => {
            let _ = writeln!(
                o,
                "variant = \"double_power\"\ndelta = {}\nr = {}\nsigma = {}",
                float(delta),
                float(r),
                float(sigma_c)
            );
        }
    }

    let _ = writeln!(o, "\n[forcing]");
    let _ = writeln!(o, "lambda = {}", float(c.forcing.lambda));
    let h = match &c.forcing.h {
        HProfile::Zero => "\"zero\"".to_string(),
        HProfile::Mode { j, amplitude } => format!("\"mode:{j}:{}\"", float(*amplitude)),
        HProfile::List(v) => float_list(v),
    };
    let _ = writeln!(o, "h = {h}");

    let i = &c.integrator;
    let _ = writeln!(o, "\n[integrator]");
    let _ = writeln!(o, "dt = {}", float(i.dt));
    let scheme = match i.scheme {
        Scheme::SplitStrang => "strang",
        Scheme::Rk4 => "rk4",
    };
    let _ = writeln!(o, "scheme = \"{scheme}\"");
    let _ = writeln!(o, "horizon = {}", float(i.horizon));
    let _ = writeln!(o, "sample_stride = {}", i.sample_stride);
    let _ = writeln!(o, "alpha = {}", float(i.alpha));

    let e = &c.experiment;
    let _ = writeln!(o, "\n[experiment]");
    let _ = writeln!(o, "id = {}", toml_str(&e.id));
    let allowed = EXPERIMENT_KEYS
        .iter()
        .find(|(k, _)| *k == e.id)
        .map_or(&[][..], |(_, a)| *a);
    let uses_initial = allowed.contains(&"initial");
    match &e.initial {
        InitialData::Random { two_e } => {
            if uses_initial {
                let _ = writeln!(o, "initial = \"random\"");
            }
            if allowed.contains(&"energy") {
                let _ = writeln!(o, "energy = {}", float(*two_e));
            }
        }
        InitialData::Zero if uses_initial => {
            let _ = writeln!(o, "initial = \"zero\"");
        }
        InitialData::Mode { j, amplitude } if uses_initial => {
            let _ = writeln!(o, "initial = \"mode:{j}:{}\"", float(*amplitude));
        }
        _ => {}
    }
    if let Some(v) = e.count {
        let _ = writeln!(o, "count = {v}");
    }
    if let Some((a, b)) = e.window {
        let _ = writeln!(o, "window = {}", float_list(&[a, b]));
    }
    if let Some(v) = &e.lambdas {
        let _ = writeln!(o, "lambdas = {}", float_list(v));
    }
    if let Some(v) = e.lambda0 {
        let _ = writeln!(o, "lambda0 = {}", float(v));
    }
    if let Some(v) = e.t_probe {
        let _ = writeln!(o, "t_probe = {}", float(v));
    }
    if let Some(v) = e.s {
        let _ = writeln!(o, "s = {}", float(v));
    }
    if let Some(v) = &e.probe_modes {
        let items: Vec<String> = v.iter().map(|j| j.to_string()).collect();
        let _ = writeln!(o, "probe_modes = [{}]", items.join(", "));
    }
    if let Some(v) = e.probe_size {
        let _ = writeln!(o, "probe_size = {}", float(v));
    }
    if let Some(v) = e.trials {
        let _ = writeln!(o, "trials = {v}");
    }
    if let Some(v) = &e.rhos {
        let _ = writeln!(o, "rhos = {}", float_list(v));
    }
    if let Some(v) = &e.eps {
        let _ = writeln!(o, "eps = {}", float_list(v));
    }
    if let Some(v) = e.random_starts {
        let _ = writeln!(o, "random_starts = {v}");
    }
    o
}
