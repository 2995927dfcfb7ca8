//! Kaplan–Meier machinery for right-censored responses.
//!
//! The event-time distribution is estimated by inverse-probability-of-censoring
//! weighting: each observed event contributes `1 / Ĝ(Y*_i-)` where `Ĝ` is the
//! product-limit estimate of the censoring survival `pr(C > y)`. Each
//! observation is then replaced by the conditional expectation of `F(Y)` given
//! its censoring status, `(1 - δ)/2 + (1 + δ) F̂(Y*)/2`.
//!
//! At tied times, events are processed before censorings.

use crate::error::{check_finite, Error, Result};
use crate::rank::{sort_order, StepFunction};
use crate::scalar::Scalar;

/// Observed times `Y* = min(Y, C)` with event indicators `δ = I(Y <= C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalResponse<T> {
    times: Vec<T>,
    events: Vec<bool>,
}

impl<T: Scalar> SurvivalResponse<T> {
    pub fn new(times: Vec<T>, events: Vec<bool>) -> Result<Self> {
        if times.len() != events.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                found: events.len(),
            });
        }
        if times.is_empty() {
            return Err(Error::Empty("survival response"));
        }
        check_finite(&times, "survival times")?;
        Ok(Self { times, events })
    }

    /// Fully observed response (every `δ_i = 1`).
    pub fn complete(times: Vec<T>) -> Result<Self> {
        let events = vec![true; times.len()];
        Self::new(times, events)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.events.iter().all(|&d| d)
    }

    pub fn censoring_ratio(&self) -> f64 {
        self.events.iter().filter(|&&d| !d).count() as f64 / self.len() as f64
    }
}

/// Product-limit survival curve.
#[derive(Debug, Clone, PartialEq)]
pub struct KaplanMeierCurve<T> {
    pub curve: StepFunction<T>,
    /// Risk-set size at each jump of `curve`.
    pub risk_counts: Vec<usize>,
    pub n: usize,
}

impl<T: Scalar> KaplanMeierCurve<T> {
    pub fn eval(&self, t: T) -> T {
        self.curve.eval(t)
    }

    pub fn eval_left(&self, t: T) -> T {
        self.curve.eval_left(t)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Events,
    Censorings,
}

fn product_limit<T: Scalar>(resp: &SurvivalResponse<T>, target: Target) -> KaplanMeierCurve<T> {
    let n = resp.len();
    let order = sort_order(&resp.times);
    let mut at_risk = n;
    let mut surv = T::one();
    let mut jumps = Vec::new();
    let mut values = Vec::new();
    let mut risk_counts = Vec::new();

    let mut start = 0;
    while start < n {
        let t = resp.times[order[start]];
        let mut end = start;
        let (mut d_event, mut d_cens) = (0usize, 0usize);
        while end < n && resp.times[order[end]] == t {
            if resp.events[order[end]] {
                d_event += 1;
            } else {
                d_cens += 1;
            }
            end += 1;
        }
        // events leave the risk set before censorings at the same time
        let (risk, d) = match target {
            Target::Events => (at_risk, d_event),
            Target::Censorings => (at_risk - d_event, d_cens),
        };
        if d > 0 {
            surv = surv * (T::from_count(risk - d) / T::from_count(risk));
            jumps.push(t);
            values.push(surv);
            risk_counts.push(risk);
        }
        at_risk -= d_event + d_cens;
        start = end;
    }

    KaplanMeierCurve {
        curve: StepFunction::new(jumps, values, T::one()).expect("unique sorted times"),
        risk_counts,
        n,
    }
}

/// Kaplan–Meier estimate `Ĝ(y)` of the censoring survival `pr(C > y)`.
pub fn km_censoring_survival<T: Scalar>(resp: &SurvivalResponse<T>) -> KaplanMeierCurve<T> {
    product_limit(resp, Target::Censorings)
}

/// Ordinary Kaplan–Meier estimate of the event-time survival `pr(Y > y)`.
pub fn km_event_survival<T: Scalar>(resp: &SurvivalResponse<T>) -> KaplanMeierCurve<T> {
    product_limit(resp, Target::Events)
}

/// IPCW estimate of the event-time distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EventDistribution<T> {
    /// `F̂_n`, clamped to `[0, 1]`.
    pub curve: StepFunction<T>,
    /// Number of event weights whose denominator `Ĝ(Y*-)` fell below `1/n`
    /// and was capped there.
    pub capped_weights: usize,
}

struct IpcwSums<T> {
    /// `n · F̂_n(Y*_i)` per observation, clamped to `[0, n]`.
    scaled_at_obs: Vec<T>,
    jumps: Vec<T>,
    scaled_values: Vec<T>,
    capped: usize,
}

fn ipcw_sums<T: Scalar>(resp: &SurvivalResponse<T>) -> IpcwSums<T> {
    let n = resp.len();
    let nf = T::from_count(n);
    let floor = T::one() / nf;
    let g = km_censoring_survival(resp);
    let order = sort_order(&resp.times);

    let mut capped = 0;
    let mut cumulative = T::zero();
    let mut scaled_at_obs = vec![T::zero(); n];
    let mut jumps = Vec::new();
    let mut scaled_values = Vec::new();

    let mut start = 0;
    while start < n {
        let t = resp.times[order[start]];
        let mut end = start;
        let mut had_event = false;
        while end < n && resp.times[order[end]] == t {
            let i = order[end];
            if resp.events[i] {
                let mut denom = g.eval_left(t);
                if denom < floor {
                    denom = floor;
                    capped += 1;
                }
                cumulative = cumulative + T::one() / denom;
                had_event = true;
            }
            end += 1;
        }
        let clamped = cumulative.min(nf);
        for &i in &order[start..end] {
            scaled_at_obs[i] = clamped;
        }
        if had_event {
            jumps.push(t);
            scaled_values.push(clamped);
        }
        start = end;
    }

    IpcwSums {
        scaled_at_obs,
        jumps,
        scaled_values,
        capped,
    }
}

/// `F̂_n(y) = (1/n) Σ δ_i / Ĝ(Y*_i-) · I(Y*_i <= y)`, clamped to `[0, 1]`.
pub fn km_event_distribution<T: Scalar>(resp: &SurvivalResponse<T>) -> EventDistribution<T> {
    let nf = T::from_count(resp.len());
    let sums = ipcw_sums(resp);
    let values = sums.scaled_values.iter().map(|&w| w / nf).collect();
    EventDistribution {
        curve: StepFunction::new(sums.jumps, values, T::zero()).expect("unique sorted times"),
        capped_weights: sums.capped,
    }
}

/// Per-observation imputed values of `F(Y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputedDistribution<T> {
    /// `(1 - δ_i)/2 + (1 + δ_i) F̂_n(Y*_i)/2`, in `[0, 1]`.
    pub values: Vec<T>,
    /// `n` times `values`, computed without the final division so that
    /// uncensored entries stay integer-valued when all weights are one.
    pub scaled: Vec<T>,
    pub capped_weights: usize,
}

pub fn impute_distribution<T: Scalar>(resp: &SurvivalResponse<T>) -> ImputedDistribution<T> {
    let nf = T::from_count(resp.len());
    let sums = ipcw_sums(resp);
    let half = T::half();
    let scaled: Vec<T> = sums
        .scaled_at_obs
        .iter()
        .zip(&resp.events)
        .map(|(&w, &event)| if event { w } else { (nf + w) * half })
        .collect();
    let values = scaled.iter().map(|&s| s / nf).collect();
    ImputedDistribution {
        values,
        scaled,
        capped_weights: sums.capped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::ecdf;
    use proptest::prelude::*;

    fn resp(times: &[f64], events: &[u8]) -> SurvivalResponse<f64> {
        SurvivalResponse::new(times.to_vec(), events.iter().map(|&e| e == 1).collect()).unwrap()
    }

    #[test]
    fn censoring_km_no_censoring_is_one() {
        let g = km_censoring_survival(&resp(&[1.0, 2.0, 3.0], &[1, 1, 1]));
        for t in [-1.0, 0.0, 1.0, 2.5, 3.0, 100.0] {
            assert_eq!(g.eval(t), 1.0);
        }
        assert!(g.curve.jump_points().is_empty());
    }

    #[test]
    fn censoring_km_single_censoring_risk_one() {
        let g = km_censoring_survival(&resp(&[1.0, 2.0], &[1, 0]));
        assert_eq!(g.eval(1.0), 1.0);
        assert_eq!(g.eval(1.999), 1.0);
        assert_eq!(g.eval(2.0), 0.0);
        assert_eq!(g.eval(7.0), 0.0);
        assert_eq!(g.risk_counts, vec![1]);
    }

    #[test]
    fn censoring_km_two_censorings() {
        let g = km_censoring_survival(&resp(&[1.0, 2.0, 3.0], &[0, 1, 0]));
        assert_eq!(g.eval(0.5), 1.0);
        assert_eq!(g.eval(1.0), 2.0 / 3.0);
        assert_eq!(g.eval(2.5), 2.0 / 3.0);
        assert_eq!(g.eval(3.0), 0.0);
        assert_eq!(g.risk_counts, vec![3, 1]);
    }

    #[test]
    fn events_precede_censorings_at_ties() {
        // at t=2 one event and one censoring; the censoring risk set excludes the event
        let g = km_censoring_survival(&resp(&[1.0, 2.0, 2.0, 3.0], &[1, 1, 0, 1]));
        assert_eq!(g.risk_counts, vec![2]);
        assert_eq!(g.eval(2.0), 0.5);
        let s = km_event_survival(&resp(&[1.0, 2.0, 2.0, 3.0], &[1, 1, 0, 1]));
        assert_eq!(s.risk_counts, vec![4, 3, 1]);
    }

    #[test]
    fn event_distribution_examples() {
        let complete = resp(&[3.0, 1.0, 2.0, 2.0], &[1, 1, 1, 1]);
        let f = km_event_distribution(&complete);
        assert_eq!(f.curve, ecdf(complete.times()).unwrap());

        let f = km_event_distribution(&resp(&[1.0, 2.0], &[1, 0]));
        assert_eq!(f.curve.eval(1.5), 0.5);
        assert_eq!(f.curve.eval(2.0), 0.5);

        let none = km_event_distribution(&resp(&[1.0, 2.0, 3.0], &[0, 0, 0]));
        for t in [0.0, 1.0, 5.0] {
            assert_eq!(none.curve.eval(t), 0.0);
        }
    }

    #[test]
    fn imputation_formula() {
        // F̂ jumps to 0.5 at t=1 (weight 1) and, with Ĝ(2-)=2/3 after the
        // censoring at 1.5, adds (1/(2/3))/4 = 0.375 at t=2.
        let r = resp(&[1.0, 1.5, 2.0, 3.0], &[1, 0, 1, 0]);
        let imp = impute_distribution(&r);
        assert_eq!(imp.values[0], 0.25);
        assert_eq!(imp.values[1], (1.0 + 0.25) / 2.0);
        assert!((imp.values[2] - 0.625).abs() < 1e-15);
        assert!((imp.values[3] - (1.0 + 0.625) / 2.0).abs() < 1e-15);

        let all_cens = impute_distribution(&resp(&[1.0, 2.0], &[0, 0]));
        assert_eq!(all_cens.values, vec![0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SurvivalResponse::<f64>::new(vec![], vec![]).is_err());
        assert!(SurvivalResponse::new(vec![1.0], vec![true, false]).is_err());
        assert!(SurvivalResponse::new(vec![f64::NAN], vec![true]).is_err());
    }

    fn arb_response() -> impl Strategy<Value = SurvivalResponse<f64>> {
        prop::collection::vec((0u8..30, any::<bool>()), 1..80).prop_map(|v| {
            let (t, e): (Vec<f64>, Vec<bool>) = v.into_iter().map(|(t, e)| (t as f64, e)).unzip();
            SurvivalResponse::new(t, e).unwrap()
        })
    }

    proptest! {
        #[test]
        fn complete_reduction(t in prop::collection::vec(-50i32..50, 1..120)) {
            let times: Vec<f64> = t.into_iter().map(|v| v as f64 / 4.0).collect();
            let r = SurvivalResponse::complete(times.clone()).unwrap();
            let f = ecdf(&times).unwrap();
            let imp = impute_distribution(&r);
            for (i, &ti) in times.iter().enumerate() {
                prop_assert_eq!(imp.values[i], f.eval(ti));
            }
        }

        #[test]
        fn monotone_and_bounded(r in arb_response()) {
            let g = km_censoring_survival(&r);
            let s = km_event_survival(&r);
            for w in g.curve.values().windows(2) { prop_assert!(w[1] <= w[0]); }
            for w in s.curve.values().windows(2) { prop_assert!(w[1] <= w[0]); }
            prop_assert!(g.curve.values().iter().all(|v| (0.0..=1.0).contains(v)));
            let f = km_event_distribution(&r);
            for w in f.curve.values().windows(2) { prop_assert!(w[1] >= w[0]); }
            let imp = impute_distribution(&r);
            for (v, &e) in imp.values.iter().zip(r.events()) {
                prop_assert!((0.0..=1.0).contains(v));
                if !e { prop_assert!(*v >= 0.5); }
            }
        }

        // IPCW-weighted ECDF agrees with one minus the product-limit estimate
        // wherever no weight was capped.
        #[test]
        fn ipcw_matches_product_limit(r in arb_response()) {
            let f = km_event_distribution(&r);
            prop_assume!(f.capped_weights == 0);
            let s = km_event_survival(&r);
            for &t in r.times() {
                let want = (1.0 - s.eval(t)).clamp(0.0, 1.0);
                prop_assert!((f.curve.eval(t) - want).abs() < 1e-9, "t={} {} vs {}", t, f.curve.eval(t), want);
            }
        }
    }
}
