//! Parameter bundles, environment signals and trajectory containers.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};

/// Environment state u(t) ∈ {+1, −1}. Serialized as the integer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(format!("environment state must be +1 or -1, got {v}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Per-patch square-wave growth rates. During `u = +1` patch 1 grows at `r1`
/// and patch 2 decays at `d2`; during `u = −1` patch 1 decays at `d1` and
/// patch 2 grows at `r2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareRates {
    pub r1: f64,
    pub d1: f64,
    pub r2: f64,
    pub d2: f64,
}

impl SquareRates {
    /// The (±1) model: rates ±1 − ε in both patches.
    pub fn symmetric(epsilon: f64) -> Self {
        SquareRates {
            r1: 1.0 - epsilon,
            d1: 1.0 + epsilon,
            r2: 1.0 - epsilon,
            d2: 1.0 + epsilon,
        }
    }

    /// Growth rates (α₁, α₂) of both patches in state `u`.
    pub fn at(&self, u: Sign) -> (f64, f64) {
        match u {
            Sign::Plus => (self.r1, -self.d2),
            Sign::Minus => (-self.d1, self.r2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r1", self.r1), ("d1", self.d1), ("r2", self.r2), ("d2", self.d2)] {
            check(v.is_finite(), name, v, "rate must be finite")?;
        }
        Ok(())
    }
}

fn default_beta() -> f64 {
    0.5
}

fn default_phi() -> f64 {
    1.0
}

/// Scalar parameters shared by every computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub epsilon: f64,
    pub m: f64,
    /// Half-period (periodic case) or mean sojourn time (random case).
    #[serde(rename = "t", alias = "T")]
    pub half_period: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta_disp: f64,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<SquareRates>,
}

impl ModelParams {
    pub fn new(epsilon: f64, m: f64, half_period: f64) -> Result<Self> {
        let p = ModelParams {
            epsilon,
            m,
            half_period,
            alpha: 0.0,
            beta_disp: 0.5,
            phi: 1.0,
            rates: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_rates(mut self, rates: SquareRates) -> Self {
        self.rates = Some(rates);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta_disp = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check(
            (0.0..=1.0).contains(&self.epsilon),
            "epsilon",
            self.epsilon,
            "must lie in [0, 1]",
        )?;
        check(self.m >= 0.0, "m", self.m, "must be >= 0")?;
        check(self.half_period > 0.0, "t", self.half_period, "must be > 0")?;
        check(self.alpha >= 0.0, "alpha", self.alpha, "must be >= 0")?;
        check(
            self.beta_disp > 0.0 && self.beta_disp <= 0.5,
            "beta_disp",
            self.beta_disp,
            "must lie in (0, 0.5]",
        )?;
        check((0.0..=1.0).contains(&self.phi), "phi", self.phi, "must lie in [0, 1]")?;
        if let Some(r) = &self.rates {
            r.validate()?;
        }
        Ok(())
    }

    /// Explicit per-patch rates, falling back to the (±1) model.
    pub fn patch_rates(&self) -> SquareRates {
        self.rates.unwrap_or_else(|| SquareRates::symmetric(self.epsilon))
    }
}

/// Law of a single sojourn in one environment state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SojournDistribution {
    Dirac {
        t: f64,
    },
    Exponential {
        mean: f64,
    },
    /// Uniform on [t − eta, t + eta].
    Uniform {
        t: f64,
        eta: f64,
    },
}

impl SojournDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SojournDistribution::Dirac { t } => check(t > 0.0, "t", t, "sojourn must be > 0"),
            SojournDistribution::Exponential { mean } => check(mean > 0.0, "mean", mean, "mean sojourn must be > 0"),
            SojournDistribution::Uniform { t, eta } => {
                check(t > 0.0, "t", t, "sojourn must be > 0")?;
                check(eta >= 0.0 && eta < t, "eta", eta, "requires 0 <= eta < t")
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            SojournDistribution::Dirac { t } => t,
            SojournDistribution::Exponential { mean } => mean,
            SojournDistribution::Uniform { t, .. } => t,
        }
    }

    /// Inverse-CDF sample. Dirac consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SojournDistribution::Dirac { t } => t,
            SojournDistribution::Exponential { mean } => {
                // 1 − U lies in (0, 1], so the log is finite.
                let u: f64 = rng.random();
                -mean * (1.0 - u).ln()
            }
            SojournDistribution::Uniform { t, eta } => {
                let u: f64 = rng.random();
                t - eta + 2.0 * eta * u
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentKind {
    /// u = u₀ on [0, T), −u₀ on [T, 2T), ... `phase` shifts the time origin
    /// back by that amount.
    PeriodicSquare {
        t: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Exponential sojourns with switching rate σ.
    MarkovSwitch { rate: f64 },
    RenewalSwitch {
        minus: SojournDistribution,
        plus: SojournDistribution,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSignal {
    pub kind: EnvironmentKind,
    #[serde(default)]
    pub initial_state: Sign,
}

/// One environment switch: at `time` the state becomes `state`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Switch {
    pub time: f64,
    pub state: Sign,
}

impl EnvironmentSignal {
    pub fn periodic(t: f64) -> Self {
        EnvironmentSignal {
            kind: EnvironmentKind::PeriodicSquare { t, phase: 0.0 },
            initial_state: Sign::Plus,
        }
    }

    pub fn markov(rate: f64) -> Self {
        EnvironmentSignal {
            kind: EnvironmentKind::MarkovSwitch { rate },
            initial_state: Sign::Plus,
        }
    }

    pub fn renewal(minus: SojournDistribution, plus: SojournDistribution) -> Self {
        EnvironmentSignal {
            kind: EnvironmentKind::RenewalSwitch { minus, plus },
            initial_state: Sign::Plus,
        }
    }

    /// Stochastically approximately periodic environment: uniform sojourns on
    /// [t − eta, t + eta] in both states.
    pub fn sape(t: f64, eta: f64) -> Self {
        let d = SojournDistribution::Uniform { t, eta };
        Self::renewal(d, d)
    }

    pub fn with_initial_state(mut self, u0: Sign) -> Self {
        self.initial_state = u0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            EnvironmentKind::PeriodicSquare { t, phase } => {
                check(*t > 0.0, "t", *t, "half-period must be > 0")?;
                check(*phase >= 0.0 && *phase < *t, "phase", *phase, "requires 0 <= phase < t")
            }
            EnvironmentKind::MarkovSwitch { rate } => check(*rate > 0.0, "rate", *rate, "switching rate must be > 0"),
            EnvironmentKind::RenewalSwitch { minus, plus } => {
                minus.validate()?;
                plus.validate()
            }
        }
    }

    /// Mean sojourn time, averaged over both states.
    pub fn mean_sojourn(&self) -> f64 {
        match &self.kind {
            EnvironmentKind::PeriodicSquare { t, .. } => *t,
            EnvironmentKind::MarkovSwitch { rate } => 1.0 / rate,
            EnvironmentKind::RenewalSwitch { minus, plus } => 0.5 * (minus.mean() + plus.mean()),
        }
    }

    /// Unbounded stream of switches for the given seed.
    pub fn switches(&self, seed: u64) -> Result<SwitchStream> {
        self.validate()?;
        Ok(SwitchStream::new(self.clone(), seed_rng(seed, 0)))
    }

    /// Stream driven by an explicit generator (for replica streams).
    pub fn switches_with_rng(&self, rng: ChaCha8Rng) -> Result<SwitchStream> {
        self.validate()?;
        Ok(SwitchStream::new(self.clone(), rng))
    }
}

/// Generator for replica `stream` of the master `seed`.
pub fn seed_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

enum Schedule {
    /// Switch k (k ≥ 1) at k·t − offset.
    Grid { t: f64, offset: f64 },
    Random {
        minus: SojournDistribution,
        plus: SojournDistribution,
    },
}

pub struct SwitchStream {
    schedule: Schedule,
    rng: ChaCha8Rng,
    state: Sign,
    k: u64,
    time: f64,
}

impl SwitchStream {
    fn new(sig: EnvironmentSignal, rng: ChaCha8Rng) -> Self {
        let schedule = match sig.kind {
            EnvironmentKind::PeriodicSquare { t, phase } => Schedule::Grid { t, offset: phase },
            EnvironmentKind::MarkovSwitch { rate } => {
                let d = SojournDistribution::Exponential { mean: 1.0 / rate };
                Schedule::Random { minus: d, plus: d }
            }
            EnvironmentKind::RenewalSwitch {
                minus: SojournDistribution::Dirac { t: a },
                plus: SojournDistribution::Dirac { t: b },
            } if a == b => Schedule::Grid { t: a, offset: 0.0 },
            EnvironmentKind::RenewalSwitch { minus, plus } => Schedule::Random { minus, plus },
        };
        SwitchStream {
            schedule,
            rng,
            state: sig.initial_state,
            k: 0,
            time: 0.0,
        }
    }
}

impl Iterator for SwitchStream {
    type Item = Switch;

    fn next(&mut self) -> Option<Switch> {
        self.k += 1;
        self.time = match &self.schedule {
            Schedule::Grid { t, offset } => self.k as f64 * t - offset,
            Schedule::Random { minus, plus } => {
                let d = match self.state {
                    Sign::Plus => plus,
                    Sign::Minus => minus,
                };
                self.time + d.sample(&mut self.rng)
            }
        };
        self.state = self.state.flip();
        Some(Switch {
            time: self.time,
            state: self.state,
        })
    }
}

/// All switches in (0, horizon], in increasing order.
pub fn realize_environment(sig: &EnvironmentSignal, horizon: f64, seed: u64) -> Result<Vec<Switch>> {
    check(horizon > 0.0, "horizon", horizon, "must be > 0")?;
    Ok(sig.switches(seed)?.take_while(|s| s.time <= horizon).collect())
}

/// A realized environment u(t) on [0, horizon].
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub initial_state: Sign,
    pub switches: Vec<Switch>,
    pub horizon: f64,
}

impl Realization {
    pub fn new(sig: &EnvironmentSignal, horizon: f64, seed: u64) -> Result<Self> {
        Ok(Realization {
            initial_state: sig.initial_state,
            switches: realize_environment(sig, horizon, seed)?,
            horizon,
        })
    }

    /// Constant-state pieces `(start, end, u)` covering [0, horizon].
    pub fn segments(&self) -> Vec<(f64, f64, Sign)> {
        let mut out = Vec::with_capacity(self.switches.len() + 1);
        let mut a = 0.0;
        let mut u = self.initial_state;
        for s in &self.switches {
            if s.time > a {
                out.push((a, s.time, u));
            }
            a = s.time;
            u = s.state;
        }
        if self.horizon > a {
            out.push((a, self.horizon, u));
        }
        out
    }

    pub fn switch_times(&self) -> Vec<f64> {
        self.switches.iter().map(|s| s.time).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coords {
    /// (x₁, x₂)
    X,
    /// (U, V) = (ln x₁x₂, ln x₁/x₂)
    UV,
    /// (S₁, I₁, S₂, I₂)
    Sir,
}

impl Coords {
    pub fn dim(self) -> usize {
        match self {
            Coords::X | Coords::UV => 2,
            Coords::Sir => 4,
        }
    }

    fn header(self) -> &'static str {
        match self {
            Coords::X => "t,x1,x2",
            Coords::UV => "t,U,V,u",
            Coords::Sir => "t,S1,I1,S2,I2",
        }
    }
}

/// Sampled time series. States are stored row-major, `coords.dim()` per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub coords: Coords,
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    /// Environment state in force from each sample onward.
    pub signs: Vec<Sign>,
    pub env_trace: Vec<f64>,
}

impl Trajectory {
    pub fn new(coords: Coords) -> Self {
        Trajectory {
            coords,
            times: Vec::new(),
            states: Vec::new(),
            signs: Vec::new(),
            env_trace: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, state: &[f64], u: Sign) {
        debug_assert_eq!(state.len(), self.coords.dim());
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.states.extend_from_slice(state);
        self.signs.push(u);
    }

    pub fn state(&self, i: usize) -> &[f64] {
        let d = self.coords.dim();
        &self.states[i * d..(i + 1) * d]
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        (!self.is_empty()).then(|| self.state(self.len() - 1))
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times.iter().copied().zip(self.states.chunks(self.coords.dim()))
    }

    /// Re-express an X trajectory in (U, V), where V is shifted by `v_shift`.
    pub fn to_uv(&self, v_shift: f64) -> Trajectory {
        assert_eq!(self.coords, Coords::X, "to_uv needs X coordinates");
        let mut out = Trajectory::new(Coords::UV);
        out.env_trace = self.env_trace.clone();
        for (i, (t, s)) in self.rows().enumerate() {
            let (l1, l2) = (s[0].ln(), s[1].ln());
            out.push(t, &[l1 + l2, l1 - l2 - v_shift], self.signs[i]);
        }
        out
    }

    /// Checks strictly increasing times, matching lengths and, in X
    /// coordinates, positivity.
    pub fn check_invariants(&self) -> Result<()> {
        if self.states.len() != self.times.len() * self.coords.dim() || self.signs.len() != self.times.len() {
            return Err(Error::InvariantViolation("state/time length mismatch".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvariantViolation("times not strictly increasing".into()));
        }
        if self.coords == Coords::X && self.states.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvariantViolation("non-positive state in X coordinates".into()));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.coords.header())?;
        for (i, (t, s)) in self.rows().enumerate() {
            write!(w, "{t}")?;
            for x in s {
                write!(w, ",{x}")?;
            }
            if self.coords == Coords::UV {
                write!(w, ",{}", i8::from(self.signs[i]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Spectral,
    OrbitQuadrature,
    DensityQuadrature,
    MonteCarlo,
}

/// A growth exponent with its provenance. `stderr` is present exactly for
/// Monte-Carlo estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub value: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GrowthReport {
    pub fn exact(value: f64, method: Method) -> Self {
        assert_ne!(method, Method::MonteCarlo, "Monte-Carlo reports need a stderr");
        GrowthReport {
            value,
            method,
            stderr: None,
            horizon: None,
            samples: None,
            seed: None,
        }
    }

    pub fn monte_carlo(value: f64, stderr: f64, horizon: f64, samples: u64, seed: u64) -> Self {
        GrowthReport {
            value,
            method: Method::MonteCarlo,
            stderr: Some(stderr.max(0.0)),
            horizon: Some(horizon),
            samples: Some(samples),
            seed: Some(seed),
        }
    }

    pub fn stderr_or_zero(&self) -> f64 {
        self.stderr.unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(sw: &[Switch]) -> Vec<f64> {
        sw.iter().map(|s| s.time).collect()
    }

    #[test]
    fn periodic_schedule() {
        let sw = realize_environment(&EnvironmentSignal::periodic(2.0), 7.0, 99).unwrap();
        assert_eq!(times(&sw), vec![2.0, 4.0, 6.0]);
        assert_eq!(sw[0].state, Sign::Minus);
        assert_eq!(sw[1].state, Sign::Plus);
    }

    #[test]
    fn dirac_renewal_equals_periodic() {
        let d = SojournDistribution::Dirac { t: 3.0 };
        let sw = realize_environment(&EnvironmentSignal::renewal(d, d), 10.0, 1).unwrap();
        assert_eq!(times(&sw), vec![3.0, 6.0, 9.0]);
        let long_r = realize_environment(&EnvironmentSignal::renewal(d, d), 1e5, 5).unwrap();
        let long_p = realize_environment(&EnvironmentSignal::periodic(3.0), 1e5, 5).unwrap();
        assert!(long_r.len() > 10_000);
        assert_eq!(long_r, long_p);
    }

    #[test]
    fn markov_mean_sojourn() {
        let sw = realize_environment(&EnvironmentSignal::markov(0.4), 1e5, 17).unwrap();
        let t = times(&sw);
        let gaps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let n = gaps.len() as f64;
        let mean = gaps.iter().sum::<f64>() / n;
        let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - 2.5).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn markov_switch_rate() {
        let rate = 0.4;
        let horizon = 1e5 / rate;
        let sw = realize_environment(&EnvironmentSignal::markov(rate), horizon, 3).unwrap();
        let est = sw.len() as f64 / horizon;
        assert!((est / rate - 1.0).abs() < 0.05);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(realize_environment(&EnvironmentSignal::periodic(2.0), 0.0, 0).is_err());
        assert!(realize_environment(&EnvironmentSignal::sape(1.0, 1.0), 5.0, 0).is_err());
        assert!(ModelParams::new(1.5, 0.2, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0.2, 1.0)
            .unwrap()
            .with_beta(0.7)
            .validate()
            .is_err());
    }

    #[test]
    fn sojourns_positive_and_in_range() {
        let mut rng = seed_rng(4, 0);
        let u = SojournDistribution::Uniform { t: 4.0, eta: 0.4 };
        for _ in 0..10_000 {
            let s = u.sample(&mut rng);
            assert!((3.6..=4.4).contains(&s));
        }
        let e = SojournDistribution::Exponential { mean: 2.0 };
        assert!((0..10_000).all(|_| e.sample(&mut rng) > 0.0));
    }

    #[test]
    fn segments_cover_horizon() {
        let r = Realization::new(&EnvironmentSignal::periodic(2.0), 7.0, 0).unwrap();
        let seg = r.segments();
        assert_eq!(
            seg,
            vec![
                (0.0, 2.0, Sign::Plus),
                (2.0, 4.0, Sign::Minus),
                (4.0, 6.0, Sign::Plus),
                (6.0, 7.0, Sign::Minus)
            ]
        );
    }

    #[test]
    fn phase_shifts_origin() {
        let sig = EnvironmentSignal {
            kind: EnvironmentKind::PeriodicSquare { t: 30.0, phase: 26.0 },
            initial_state: Sign::Minus,
        };
        let sw = realize_environment(&sig, 100.0, 0).unwrap();
        assert_eq!(times(&sw), vec![4.0, 34.0, 64.0, 94.0]);
        assert_eq!(sw[0].state, Sign::Plus);
    }

    #[test]
    fn params_json_schema() {
        let p: ModelParams = serde_json::from_str(r#"{"epsilon":0.5,"m":0.2,"t":2.5}"#).unwrap();
        assert_eq!(p.beta_disp, 0.5);
        assert_eq!(p.phi, 1.0);
        assert!(serde_json::from_str::<ModelParams>(r#"{"epsilon":0.5,"m":0.2,"t":2.5,"mm":1}"#).is_err());
        let s: EnvironmentSignal = serde_json::from_str(
            r#"{"kind":{"type":"renewal_switch","minus":{"type":"uniform","t":4,"eta":0.2},"plus":{"type":"dirac","t":4}},"initial_state":-1}"#,
        )
        .unwrap();
        assert_eq!(s.initial_state, Sign::Minus);
    }

    #[test]
    fn report_stderr_only_for_monte_carlo() {
        let r = GrowthReport::exact(0.1, Method::ClosedForm);
        assert!(r.stderr.is_none());
        let j = serde_json::to_string(&r).unwrap();
        assert!(!j.contains("stderr"));
        let mc = GrowthReport::monte_carlo(0.1, 0.01, 10.0, 5, 7);
        assert_eq!(mc.stderr, Some(0.01));
    }
}
