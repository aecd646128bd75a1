use super::{FrontEndModel, SimError};
use crate::BUFFER_SAMPLES;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampMode {
    SingleUpsweep,
    ChirpSequence,
}

/// One period of the DAC control-voltage waveform driving the VCO.
///
/// Sample `i` is output at `i / dac_rate`; between samples the voltage is
/// linearly interpolated. Within a bare ramp the last sample is held.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningRamp {
    samples: Vec<f64>,
    dac_rate: f64,
    mode: RampMode,
    n_chirps: usize,
    v_lo: f64,
    v_hi: f64,
}

impl TuningRamp {
    pub fn new(
        samples: Vec<f64>,
        dac_rate: f64,
        mode: RampMode,
        n_chirps: usize,
        v_lo: f64,
        v_hi: f64,
    ) -> Result<Self, SimError> {
        if samples.len() > BUFFER_SAMPLES {
            return Err(SimError::BufferOverflow { requested: samples.len() });
        }
        let bad = |why: String| Err(SimError::InvalidRamp(why));
        if !(dac_rate > 0.0 && dac_rate.is_finite()) {
            return bad(format!("dac rate {dac_rate} must be positive"));
        }
        if n_chirps == 0 {
            return bad("at least one chirp required".into());
        }
        if mode == RampMode::SingleUpsweep && n_chirps != 1 {
            return bad("a single upsweep has exactly one chirp".into());
        }
        if !(v_lo >= 0.0 && v_lo <= v_hi && v_hi.is_finite()) {
            return bad(format!("voltage span [{v_lo}, {v_hi}] invalid"));
        }
        if let Some(v) = samples.iter().find(|v| !(**v >= v_lo && **v <= v_hi)) {
            return bad(format!("sample {v} V outside [{v_lo}, {v_hi}]"));
        }
        Ok(Self { samples, dac_rate, mode, n_chirps, v_lo, v_hi })
    }

    /// `n` samples rising from `v_lo` with slope `(v_hi - v_lo) / duration`.
    /// The nominal top voltage is reached one sample interval after the last sample.
    pub fn linear_upsweep(v_lo: f64, v_hi: f64, duration: f64, n: usize) -> Result<Self, SimError> {
        let samples = (0..n).map(|i| v_lo + (v_hi - v_lo) * i as f64 / n as f64).collect();
        Self::new(samples, n as f64 / duration, RampMode::SingleUpsweep, 1, v_lo, v_hi)
    }

    /// Sawtooth of `n_chirps` identical upchirps, `per_chirp` samples each.
    pub fn chirp_sequence(
        v_lo: f64,
        v_hi: f64,
        n_chirps: usize,
        per_chirp: usize,
        dac_rate: f64,
    ) -> Result<Self, SimError> {
        if per_chirp == 0 {
            return Err(SimError::InvalidRamp("empty chirp".into()));
        }
        let one: Vec<f64> = (0..per_chirp).map(|i| v_lo + (v_hi - v_lo) * i as f64 / per_chirp as f64).collect();
        let total = n_chirps.saturating_mul(per_chirp);
        if total > BUFFER_SAMPLES {
            return Err(SimError::BufferOverflow { requested: total });
        }
        let samples = one.iter().copied().cycle().take(total).collect();
        let mode = if n_chirps == 1 { RampMode::SingleUpsweep } else { RampMode::ChirpSequence };
        Self::new(samples, dac_rate, mode, n_chirps, v_lo, v_hi)
    }

    /// Interprets an uploaded waveform: the voltage span is the sample range and
    /// every drop of more than half the span starts a new chirp.
    pub fn from_upload(samples: Vec<f64>, dac_rate: f64) -> Result<Self, SimError> {
        if samples.is_empty() {
            return Err(SimError::InvalidRamp("empty waveform".into()));
        }
        let v_lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let v_hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let half = (v_hi - v_lo) / 2.0;
        let drops = samples.windows(2).filter(|w| w[0] - w[1] > half && half > 0.0).count();
        let n_chirps = drops + 1;
        let mode = if n_chirps == 1 { RampMode::SingleUpsweep } else { RampMode::ChirpSequence };
        Self::new(samples, dac_rate, mode, n_chirps, v_lo, v_hi)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dac_rate(&self) -> f64 {
        self.dac_rate
    }

    pub fn mode(&self) -> RampMode {
        self.mode
    }

    pub fn n_chirps(&self) -> usize {
        self.n_chirps
    }

    pub fn v_lo(&self) -> f64 {
        self.v_lo
    }

    pub fn v_hi(&self) -> f64 {
        self.v_hi
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length of one waveform period, s.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.dac_rate
    }

    pub fn chirp_duration(&self) -> f64 {
        self.duration() / self.n_chirps as f64
    }

    /// RF sweep of one chirp, Hz.
    pub fn bandwidth(&self, fe: &FrontEndModel) -> f64 {
        fe.rf_frequency(self.v_hi) - fe.rf_frequency(self.v_lo)
    }

    /// Mean chirp slope, Hz/s.
    pub fn slope(&self, fe: &FrontEndModel) -> f64 {
        self.bandwidth(fe) / self.chirp_duration()
    }

    /// RF frequency at the middle of the voltage span.
    pub fn center_frequency(&self, fe: &FrontEndModel) -> f64 {
        fe.rf_frequency(0.5 * (self.v_lo + self.v_hi))
    }

    /// Tuning voltage at `t` within one period.
    pub fn voltage_at(&self, t: f64) -> Result<f64, SimError> {
        if !(t >= 0.0 && t < self.duration()) {
            return Err(SimError::TimeOutOfRange { t, duration: self.duration() });
        }
        let mut x = t * self.dac_rate;
        if (x - x.round()).abs() < 1e-7 {
            x = x.round();
        }
        let i = (x.floor() as usize).min(self.samples.len() - 1);
        let frac = x - i as f64;
        let a = self.samples[i];
        let b = self.samples.get(i + 1).copied().unwrap_or(a);
        Ok(a + (b - a) * frac)
    }
}

/// Generator playback mode for a loaded waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Playback {
    /// Plays `cycles` periods from t = 0, then holds the last sample.
    Burst { cycles: u32 },
    /// Repeats the waveform indefinitely.
    Continuous,
}

/// A waveform as played out by the generator, evaluated at any t ≥ 0,
/// together with the exact time integral of the resulting VCO frequency.
#[derive(Debug, Clone)]
pub struct Drive {
    ramp: TuningRamp,
    playback: Playback,
}

impl Drive {
    pub fn new(ramp: TuningRamp, playback: Playback) -> Result<Self, SimError> {
        if ramp.is_empty() {
            return Err(SimError::InvalidRamp("empty waveform".into()));
        }
        if let Playback::Burst { cycles: 0 } = playback {
            return Err(SimError::InvalidRamp("burst needs at least one cycle".into()));
        }
        Ok(Self { ramp, playback })
    }

    /// One burst cycle, then hold.
    pub fn single(ramp: TuningRamp) -> Result<Self, SimError> {
        Self::new(ramp, Playback::Burst { cycles: 1 })
    }

    pub fn ramp(&self) -> &TuningRamp {
        &self.ramp
    }

    pub fn playback(&self) -> Playback {
        self.playback
    }

    /// Segment containing `t`: (start voltage, end voltage, seconds into the
    /// segment, segment index within the period, period index). `None` once a
    /// burst has finished.
    fn segment(&self, t: f64) -> Option<(f64, f64, f64, usize, u64)> {
        let s = &self.ramp.samples;
        let n = s.len();
        let dt = 1.0 / self.ramp.dac_rate;
        let period = self.ramp.duration();
        let k = (t / period).floor().max(0.0) as u64;
        let last_cycle = match self.playback {
            Playback::Burst { cycles } => {
                if k >= u64::from(cycles) {
                    return None;
                }
                k + 1 == u64::from(cycles)
            }
            Playback::Continuous => false,
        };
        let local = t - k as f64 * period;
        // snap times that land on a DAC sample to that sample
        let mut x = local * self.ramp.dac_rate;
        if (x - x.round()).abs() < 1e-7 {
            x = x.round();
        }
        let i = (x.floor().max(0.0) as usize).min(n - 1);
        let a = s[i];
        let b = match s.get(i + 1) {
            Some(&b) => b,
            None if last_cycle => a,
            None => s[0],
        };
        let into = ((x - i as f64) * dt).clamp(0.0, dt);
        Some((a, b, into, i, k))
    }

    pub fn voltage_at(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some((a, b, into, _, _)) => a + (b - a) * into * self.ramp.dac_rate,
            None => *self.ramp.samples.last().expect("non-empty"),
        }
    }

    /// Rate of change of the tuning voltage arriving at `t`, V/s. At a DAC
    /// sample instant this is the slope of the segment that ends there.
    pub fn voltage_slope_at(&self, t: f64) -> f64 {
        let eps = 1e-3 / self.ramp.dac_rate;
        let probe = if t > eps { t - eps } else { t };
        match self.segment(probe) {
            Some((a, b, _, _, _)) => (b - a) * self.ramp.dac_rate,
            None => 0.0,
        }
    }

    pub fn profile<'a>(&'a self, fe: &'a FrontEndModel) -> RfProfile<'a> {
        RfProfile::new(self, fe)
    }
}

/// VCO frequency and accumulated phase for a [`Drive`] on a given front end.
pub struct RfProfile<'a> {
    drive: &'a Drive,
    fe: &'a FrontEndModel,
    /// `cum[i]` = ∫ (f_rf - f_base) dt from period start to sample i.
    cum: Vec<f64>,
    /// Integral over one full period when the next period follows.
    period_wrap: f64,
    /// Integral over the final burst period (last segment held).
    period_hold: f64,
}

impl<'a> RfProfile<'a> {
    fn new(drive: &'a Drive, fe: &'a FrontEndModel) -> Self {
        let s = drive.ramp.samples();
        let dt = 1.0 / drive.ramp.dac_rate();
        let seg = |a: f64, b: f64, h: f64| -> f64 {
            // Simpson is exact: the offset is a cubic in v, v is linear in t.
            h / 6.0 * (fe.frequency_offset(a) + 4.0 * fe.frequency_offset(0.5 * (a + b)) + fe.frequency_offset(b))
        };
        let mut cum = Vec::with_capacity(s.len());
        let mut acc = 0.0;
        for i in 0..s.len() {
            cum.push(acc);
            if i + 1 < s.len() {
                acc += seg(s[i], s[i + 1], dt);
            }
        }
        let last = *s.last().expect("non-empty");
        let period_wrap = acc + seg(last, s[0], dt);
        let period_hold = acc + seg(last, last, dt);
        Self { drive, fe, cum, period_wrap, period_hold }
    }

    pub fn frequency(&self, t: f64) -> f64 {
        self.fe.rf_frequency(self.drive.voltage_at(t))
    }

    /// d f_rf / dt at `t`, Hz/s.
    pub fn chirp_rate(&self, t: f64) -> f64 {
        self.fe.sensitivity(self.drive.voltage_at(t)) * self.drive.voltage_slope_at(t)
    }

    /// ∫₀ᵗ (f_rf − f_base) dτ, in cycles.
    pub fn offset_phase(&self, t: f64) -> f64 {
        let fe = self.fe;
        let ramp = &self.drive.ramp;
        match self.drive.segment(t) {
            Some((a, b, into, i, k)) => {
                let v_end = a + (b - a) * into * ramp.dac_rate();
                let partial = into / 6.0
                    * (fe.frequency_offset(a)
                        + 4.0 * fe.frequency_offset(0.5 * (a + v_end))
                        + fe.frequency_offset(v_end));
                k as f64 * self.period_wrap + self.cum[i] + partial
            }
            None => {
                let Playback::Burst { cycles } = self.drive.playback else {
                    unreachable!("continuous playback never ends")
                };
                let end = f64::from(cycles) * ramp.duration();
                let last = *ramp.samples().last().expect("non-empty");
                f64::from(cycles - 1) * self.period_wrap + self.period_hold + fe.frequency_offset(last) * (t - end)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_ramp() -> TuningRamp {
        TuningRamp::linear_upsweep(0.7, 1.0, 800e-6, BUFFER_SAMPLES).unwrap()
    }

    #[test]
    fn ramp_invariants() {
        assert!(matches!(
            TuningRamp::linear_upsweep(0.7, 1.0, 1e-3, BUFFER_SAMPLES + 1),
            Err(SimError::BufferOverflow { requested: 16385 })
        ));
        assert!(TuningRamp::new(vec![0.5], 1.0, RampMode::SingleUpsweep, 1, 0.7, 1.0).is_err());
        assert!(TuningRamp::new(vec![], 1.0, RampMode::SingleUpsweep, 1, -0.1, 1.0).is_err());
        let r = reference_ramp();
        assert!((r.duration() - 800e-6).abs() < 1e-15);
        assert_eq!(r.voltage_at(400e-6).unwrap(), 0.85);
        assert!(r.voltage_at(800e-6).is_err());
        assert!(r.voltage_at(-1e-9).is_err());
    }

    #[test]
    fn upload_detects_chirps() {
        let seq = TuningRamp::chirp_sequence(0.7, 1.0, 128, 128, 122070.3125).unwrap();
        let up = TuningRamp::from_upload(seq.samples().to_vec(), seq.dac_rate()).unwrap();
        assert_eq!(up.n_chirps(), 128);
        assert_eq!(up.mode(), RampMode::ChirpSequence);
        let single = TuningRamp::from_upload(reference_ramp().samples().to_vec(), 1.0).unwrap();
        assert_eq!(single.n_chirps(), 1);
    }

    #[test]
    fn burst_holds_last_value() {
        let r = reference_ramp();
        let last = *r.samples().last().unwrap();
        let d = Drive::single(r).unwrap();
        assert_eq!(d.voltage_at(900e-6), last);
        assert_eq!(d.voltage_slope_at(900e-6), 0.0);
        let c = Drive::new(reference_ramp(), Playback::Continuous).unwrap();
        assert!((c.voltage_at(800e-6 + 400e-6) - 0.85).abs() < 1e-12);
    }

    #[test]
    fn phase_integral_matches_closed_form() {
        // linear VCO, linear ramp: ∫ k·s·t dt = k·s·t²/2 with s in V/s
        let fe = FrontEndModel::ivs947();
        let d = Drive::single(reference_ramp()).unwrap();
        let p = d.profile(&fe);
        let s = 0.3 / 800e-6;
        for t in [0.0, 1e-6, 123.456e-6, 400e-6, 799e-6] {
            let expect = fe.k_vco * s * t * t / 2.0;
            assert!((p.offset_phase(t) - expect).abs() < 1e-6 * expect.max(1.0), "{t}");
        }
        // after the burst the frequency is constant
        let t1 = 900e-6;
        let t2 = 1000e-6;
        let df = p.offset_phase(t2) - p.offset_phase(t1);
        assert!((df - fe.frequency_offset(d.voltage_at(t1)) * 100e-6).abs() < 1e-6);
    }

    #[test]
    fn phase_integral_cubic_against_quadrature() {
        let fe = FrontEndModel::ivs947().with_vco_cubic(2e9);
        let d = Drive::new(TuningRamp::chirp_sequence(0.7, 1.0, 4, 64, 1e5).unwrap(), Playback::Continuous).unwrap();
        let p = d.profile(&fe);
        let t_end = 3.7e-3;
        let steps = 200_000;
        let h = t_end / steps as f64;
        let mut acc = 0.0;
        for j in 0..steps {
            let t = (j as f64 + 0.5) * h;
            acc += fe.frequency_offset(d.voltage_at(t)) * h;
        }
        let got = p.offset_phase(t_end);
        assert!((got - acc).abs() < 1e-6 * acc, "{got} vs {acc}");
    }
}
