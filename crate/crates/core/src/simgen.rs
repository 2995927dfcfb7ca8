//! Simulation designs: correlated Gaussian and heavy-tailed predictors,
//! linear / transformation / single-index / additive responses, mixture-normal
//! censoring calibrated to a target censoring ratio, and outlier injection.
//!
//! Every replication draws from its own ChaCha20 stream derived from a master
//! seed and the replication index, so serial and parallel runs agree exactly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Cauchy, Distribution, Normal, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::screening::DataMatrix;
use crate::survival::SurvivalResponse;

/// Identifies the generator in exported metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20Rng (rand_chacha 0.9); seed_from_u64(master), stream = replication index";

/// Stream reserved for censoring calibration draws.
pub const CALIBRATION_STREAM: u64 = u64::MAX;

pub const CALIBRATION_DRAWS: usize = 10_000;

/// Mixture components `(mean, variance)` of the censoring distribution.
pub const CENSORING_COMPONENTS: [(f64, f64); 3] = [(-5.0, 2.0), (5.0, 1.0), (55.0, 1.0)];

pub fn replication_rng(master_seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Covariance {
    /// `σ_kj = ρ^{|k-j|}`.
    Ar { rho: f64 },
    /// `σ_kk = diag`, `σ_kj = 0`.
    CsLiteral { diag: f64 },
    /// Unit variances, common correlation `ρ`.
    CsExchangeable { rho: f64 },
    Independent,
    CauchyIid,
    UniformIid,
}

/// Strictly monotone univariate transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// Sign-preserving root `sign(x) |x|^{1/degree}`.
    OddRoot { degree: u32 },
    Log,
}

impl Transform {
    pub fn forward(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::OddRoot { degree } => x.signum() * x.abs().powf(1.0 / f64::from(degree)),
            Transform::Log => x.ln(),
        }
    }

    pub fn inverse(self, z: f64) -> f64 {
        match self {
            Transform::Identity => z,
            Transform::OddRoot { degree } => z.signum() * z.abs().powi(degree as i32),
            Transform::Log => z.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexLink {
    Cube,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermShape {
    /// `c x`
    Linear,
    /// `c tan(π x / 2)`
    HalfTan,
    /// `c x²`
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditiveTerm {
    pub feature: usize,
    pub coef: f64,
    pub shape: TermShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseModel {
    /// `Y = X β + ε`
    Linear,
    /// `T_y(Y) = T(X)ᵀ β + ε`; the sampled Gaussian design is `T(X)`.
    Transformed { response: Transform, predictors: Transform },
    /// `Y = m(Xᵀ β) + ε`
    SingleIndex { link: IndexLink },
    /// `Y = Σ g_j(X_j) + ε`
    Additive { terms: Vec<AdditiveTerm> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Normal { variance: f64 },
    StudentT { df: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoringSpec {
    /// Mixture weights `κ`; normalized as `|κ| / Σ|κ|`.
    pub weights: [f64; 3],
    /// Censoring ratio the shift is calibrated to. Without it the mixture is
    /// used unshifted.
    #[serde(default)]
    pub target_ratio: Option<f64>,
}

impl CensoringSpec {
    pub fn normalized_weights(&self) -> Result<[f64; 3]> {
        let total: f64 = self.weights.iter().map(|w| w.abs()).sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::InvalidParameter(
                "censoring mixture weights are all zero".into(),
            ));
        }
        Ok(self.weights.map(|w| w.abs() / total))
    }

    fn draw_base(&self, weights: &[f64; 3], rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut comp = 2;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                comp = i;
                break;
            }
        }
        // skip zero-weight components reached through rounding
        while weights[comp] == 0.0 {
            comp -= 1;
        }
        let (mean, var) = CENSORING_COMPONENTS[comp];
        let z: f64 = rng.sample(StandardNormal);
        mean + var.sqrt() * z
    }
}

/// A censoring spec with its calibrated location shift.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedCensoring {
    pub spec: CensoringSpec,
    pub shift: f64,
    /// Censoring ratio achieved on the calibration draws.
    pub calibration_ratio: f64,
    pub iterations: usize,
}

impl CalibratedCensoring {
    pub fn uncalibrated(spec: CensoringSpec) -> Self {
        Self {
            spec,
            shift: 0.0,
            calibration_ratio: f64::NAN,
            iterations: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierSpec {
    /// `(0-based observation index, multiplier)` pairs.
    pub scale: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub n: usize,
    pub p: usize,
    pub covariance: Covariance,
    /// Leading coefficients; features beyond the vector have zero weight.
    #[serde(default)]
    pub beta: Vec<f64>,
    pub model: ResponseModel,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub censoring: Option<CensoringSpec>,
    #[serde(default)]
    pub outliers: Option<OutlierSpec>,
}

impl SimScenario {
    /// Features the response depends on.
    pub fn true_active(&self) -> Vec<usize> {
        let mut active: Vec<usize> = match &self.model {
            ResponseModel::Additive { terms } => terms
                .iter()
                .filter(|t| t.coef != 0.0)
                .map(|t| t.feature)
                .collect(),
            _ => self
                .beta
                .iter()
                .enumerate()
                .filter(|(_, &b)| b != 0.0)
                .map(|(k, _)| k)
                .collect(),
        };
        active.sort_unstable();
        active.dedup();
        active
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("scenario {}: {msg}", self.name)));
        if self.n < 2 || self.p == 0 {
            return bad(format!("need n >= 2 and p >= 1, got n={} p={}", self.n, self.p));
        }
        if self.beta.len() > self.p {
            return bad(format!("{} coefficients for {} features", self.beta.len(), self.p));
        }
        let active = self.true_active();
        match active.last() {
            None => return bad("no active features".into()),
            Some(&k) if k >= self.p => return bad(format!("active feature {k} >= p")),
            _ => {}
        }
        if let Some(out) = &self.outliers {
            if let Some(&(i, _)) = out.scale.iter().find(|(i, _)| *i >= self.n) {
                return bad(format!("outlier index {i} >= n"));
            }
        }
        if let Some(c) = &self.censoring {
            c.normalized_weights()?;
            if let Some(t) = c.target_ratio {
                if !(0.0 < t && t < 1.0) {
                    return bad(format!("target censoring ratio {t} outside (0, 1)"));
                }
            }
        }
        check_covariance(&self.covariance)?;
        Ok(())
    }

    /// Same scenario with the censoring spec removed.
    pub fn uncensored(&self) -> SimScenario {
        SimScenario {
            censoring: None,
            ..self.clone()
        }
    }
}

fn check_covariance(cov: &Covariance) -> Result<()> {
    match *cov {
        Covariance::Ar { rho } if !(rho > -1.0 && rho < 1.0) => Err(Error::InvalidParameter(
            format!("AR correlation {rho} outside (-1, 1)"),
        )),
        Covariance::CsExchangeable { rho } if !(0.0..1.0).contains(&rho) => Err(
            Error::InvalidParameter(format!("exchangeable correlation {rho} outside [0, 1)")),
        ),
        Covariance::CsLiteral { diag } if !(diag >= 0.0 && diag.is_finite()) => Err(
            Error::InvalidParameter(format!("diagonal variance {diag} must be nonnegative")),
        ),
        _ => Ok(()),
    }
}

fn normals(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Draws an `n × p` design with the requested dependence structure.
///
/// AR columns follow `X_k = ρ X_{k-1} + √(1-ρ²) Z_k`, exchangeable columns
/// share one latent factor.
pub fn sample_mvn(n: usize, p: usize, covariance: &Covariance, rng: &mut impl Rng) -> Result<DataMatrix<f64>> {
    check_covariance(covariance)?;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
    match *covariance {
        Covariance::Ar { rho } => {
            let innov = (1.0 - rho * rho).sqrt();
            columns.push(normals(n, rng));
            for k in 1..p {
                let prev = &columns[k - 1];
                let col = prev
                    .iter()
                    .map(|&v| rho * v + innov * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                columns.push(col);
            }
        }
        Covariance::CsLiteral { diag } => {
            let sd = diag.sqrt();
            for _ in 0..p {
                columns.push(normals(n, rng).into_iter().map(|z| sd * z).collect());
            }
        }
        Covariance::CsExchangeable { rho } => {
            let shared = normals(n, rng);
            let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
            for _ in 0..p {
                let col = shared
                    .iter()
                    .map(|&w| a * w + b * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                columns.push(col);
            }
        }
        Covariance::Independent => {
            for _ in 0..p {
                columns.push(normals(n, rng));
            }
        }
        Covariance::CauchyIid => {
            let c = Cauchy::new(0.0, 1.0).unwrap();
            for _ in 0..p {
                columns.push((0..n).map(|_| c.sample(rng)).collect());
            }
        }
        Covariance::UniformIid => {
            for _ in 0..p {
                columns.push((0..n).map(|_| rng.random::<f64>()).collect());
            }
        }
    }
    DataMatrix::from_columns(columns)
}

pub fn draw_noise(spec: NoiseSpec, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    match spec {
        NoiseSpec::Normal { variance } => {
            let d = Normal::new(0.0, variance.sqrt())
                .map_err(|e| Error::InvalidParameter(format!("noise: {e}")))?;
            Ok((0..n).map(|_| d.sample(rng)).collect())
        }
        NoiseSpec::StudentT { df } => {
            let d = StudentT::new(df).map_err(|e| Error::InvalidParameter(format!("noise: {e}")))?;
            Ok((0..n).map(|_| d.sample(rng)).collect())
        }
    }
}

fn coef_sum(x: &DataMatrix<f64>, beta: &[f64], i: usize, t: Transform) -> f64 {
    beta.iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(k, &b)| b * t.forward(x.column(k)[i]))
        .sum()
}

/// Response for the observed design `x` and a given noise vector.
pub fn response_from_noise(x: &DataMatrix<f64>, scenario: &SimScenario, noise: &[f64]) -> Result<Vec<f64>> {
    if noise.len() != x.n() {
        return Err(Error::LengthMismatch {
            expected: x.n(),
            found: noise.len(),
        });
    }
    if scenario.beta.len() > x.p() || scenario.true_active().iter().any(|&k| k >= x.p()) {
        return Err(Error::InvalidParameter(format!(
            "scenario {} references features beyond p = {}",
            scenario.name,
            x.p()
        )));
    }
    let beta = &scenario.beta;
    let y: Vec<f64> = (0..x.n())
        .map(|i| match &scenario.model {
            ResponseModel::Linear => coef_sum(x, beta, i, Transform::Identity) + noise[i],
            ResponseModel::Transformed { response, predictors } => {
                response.inverse(coef_sum(x, beta, i, *predictors) + noise[i])
            }
            ResponseModel::SingleIndex { link } => {
                let index = coef_sum(x, beta, i, Transform::Identity);
                let m = match link {
                    IndexLink::Cube => index.powi(3),
                    IndexLink::Exp => index.exp(),
                };
                m + noise[i]
            }
            ResponseModel::Additive { terms } => {
                let g: f64 = terms
                    .iter()
                    .map(|t| {
                        let v = x.column(t.feature)[i];
                        t.coef
                            * match t.shape {
                                TermShape::Linear => v,
                                TermShape::HalfTan => (std::f64::consts::FRAC_PI_2 * v).tan(),
                                TermShape::Square => v * v,
                            }
                    })
                    .sum();
                g + noise[i]
            }
        })
        .collect();
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "generated response",
            index: i,
        });
    }
    Ok(y)
}

pub fn gen_response(x: &DataMatrix<f64>, scenario: &SimScenario, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let noise = draw_noise(scenario.noise, x.n(), rng)?;
    response_from_noise(x, scenario, &noise)
}

/// Observed predictors: the sampled design passed through `T⁻¹` for
/// transformation models, unchanged otherwise.
fn observed_design(latent: DataMatrix<f64>, model: &ResponseModel) -> Result<DataMatrix<f64>> {
    match model {
        ResponseModel::Transformed { predictors, .. } if *predictors != Transform::Identity => {
            let cols = latent
                .columns()
                .iter()
                .map(|c| c.iter().map(|&z| predictors.inverse(z)).collect())
                .collect();
            DataMatrix::new(cols, latent.feature_names().to_vec())
        }
        _ => Ok(latent),
    }
}

pub fn inject_outliers(y: &[f64], spec: &OutlierSpec) -> Result<Vec<f64>> {
    let mut out = y.to_vec();
    for &(i, mult) in &spec.scale {
        if i >= out.len() {
            return Err(Error::InvalidParameter(format!(
                "outlier index {i} out of range for {} observations",
                out.len()
            )));
        }
        out[i] *= mult;
    }
    Ok(out)
}

/// Draws `C_i` from the shifted mixture and returns `(min(Y, C), I(Y <= C))`.
pub fn apply_censoring(y: &[f64], censoring: &CalibratedCensoring, rng: &mut impl Rng) -> Result<SurvivalResponse<f64>> {
    let weights = censoring.spec.normalized_weights()?;
    let mut times = Vec::with_capacity(y.len());
    let mut events = Vec::with_capacity(y.len());
    for &yi in y {
        let c = censoring.spec.draw_base(&weights, rng) + censoring.shift;
        times.push(yi.min(c));
        events.push(yi <= c);
    }
    SurvivalResponse::new(times, events)
}

/// Finds the shift that makes `pr(Y > C + shift)` match the target ratio on
/// `CALIBRATION_DRAWS` simulated pairs.
///
/// The censoring ratio is a step function of the shift with jumps at the
/// sorted differences `Y - C`; the search bisects over those candidates and
/// settles on the midpoint between neighbouring differences.
pub fn calibrate_censoring(scenario: &SimScenario, master_seed: u64) -> Result<CalibratedCensoring> {
    let spec = scenario
        .censoring
        .clone()
        .ok_or_else(|| Error::InvalidParameter(format!("scenario {} has no censoring", scenario.name)))?;
    let Some(target) = spec.target_ratio else {
        return Ok(CalibratedCensoring::uncalibrated(spec));
    };
    let weights = spec.normalized_weights()?;
    let mut rng = replication_rng(master_seed, CALIBRATION_STREAM);

    // the response only depends on the leading active columns, whose joint law
    // does not change with p for every supported covariance
    let p_cal = scenario.true_active().last().map_or(1, |k| k + 1).max(scenario.beta.len());
    let latent = sample_mvn(CALIBRATION_DRAWS, p_cal, &scenario.covariance, &mut rng)?;
    let x = observed_design(latent, &scenario.model)?;
    let y = gen_response(&x, scenario, &mut rng)?;
    let mut diffs: Vec<f64> = y.iter().map(|&yi| yi - spec.draw_base(&weights, &mut rng)).collect();
    diffs.sort_by(f64::total_cmp);

    let total = diffs.len();
    let ratio_at = |k: usize| (total - k) as f64 / total as f64;
    // smallest k whose ratio does not exceed the target
    let (mut lo, mut hi) = (0usize, total);
    let mut iterations = 0;
    while lo < hi && iterations < 60 {
        iterations += 1;
        let mid = (lo + hi) / 2;
        if ratio_at(mid) > target {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let mut k = lo;
    if k > 0 && (ratio_at(k - 1) - target).abs() < (ratio_at(k) - target).abs() {
        k -= 1;
    }
    let k = k.clamp(1, total - 1);
    let shift = 0.5 * (diffs[k - 1] + diffs[k]);
    let achieved = diffs.iter().filter(|&&d| d > shift).count() as f64 / total as f64;
    Ok(CalibratedCensoring {
        spec,
        shift,
        calibration_ratio: achieved,
        iterations,
    })
}

/// One simulated replication.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub x: DataMatrix<f64>,
    /// Complete response, after outlier injection.
    pub y: Vec<f64>,
    /// Observed response; equals `y` with all events when uncensored.
    pub response: SurvivalResponse<f64>,
}

pub fn generate(scenario: &SimScenario, censoring: Option<&CalibratedCensoring>, rng: &mut impl Rng) -> Result<SimDataset> {
    let latent = sample_mvn(scenario.n, scenario.p, &scenario.covariance, rng)?;
    let x = observed_design(latent, &scenario.model)?;
    let mut y = gen_response(&x, scenario, rng)?;
    if let Some(out) = &scenario.outliers {
        y = inject_outliers(&y, out)?;
    }
    let response = match censoring {
        Some(c) => apply_censoring(&y, c, rng)?,
        None => SurvivalResponse::complete(y.clone())?,
    };
    Ok(SimDataset { x, y, response })
}

#[derive(Debug, Deserialize)]
struct CatalogFile {
    scenario: Vec<SimScenario>,
}

/// Named simulation scenarios.
#[derive(Debug, Clone)]
pub struct ScenarioCatalog {
    scenarios: Vec<SimScenario>,
}

const BUILTIN_CATALOG: &str = include_str!("../scenarios.toml");

impl ScenarioCatalog {
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN_CATALOG).expect("built-in scenario catalog is valid")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let file: CatalogFile = toml::from_str(s).map_err(|e| Error::Catalog(e.to_string()))?;
        let mut seen = std::collections::HashSet::new();
        for sc in &file.scenario {
            sc.validate()?;
            if !seen.insert(sc.name.clone()) {
                return Err(Error::Catalog(format!("duplicate scenario `{}`", sc.name)));
            }
        }
        Ok(Self {
            scenarios: file.scenario,
        })
    }

    pub fn scenarios(&self) -> &[SimScenario] {
        &self.scenarios
    }

    pub fn names(&self) -> Vec<&str> {
        self.scenarios.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&SimScenario> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownScenario {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }
}
