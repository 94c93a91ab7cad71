//! Event-level simulation of one run, split into independent segments.
//!
//! Every segment draws its own pairs over `[start - pre_roll, end + post_roll)`
//! (no pre-roll for the first) with a private RNG stream and only books
//! triggers that fall inside `[start, end)`. Segments run in parallel and are merged in order, so the
//! result depends on the seed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric, Normal};
use rayon::prelude::*;

use super::config::{to_ps, GatingMode, PumpMode, SimConfig, PS_PER_S};
use super::Result;

/// Half-open time window in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn contains(&self, t: i64) -> bool {
        t >= self.start && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Routing {
    pub signal: bool,
    pub idler: bool,
}

/// Categorical split over the coupling Venn diagram followed by the
/// in-band and transmission draws.
pub fn route_pair<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Routing {
    let c = config.coupling;
    let u: f64 = rng.random();
    let (signal, idler) = if u < c.gamma_c {
        (true, true)
    } else if u < c.gamma_s {
        (true, false)
    } else if u < c.gamma_s + c.gamma_i - c.gamma_c {
        (false, true)
    } else {
        (false, false)
    };
    let signal = signal && rng.random::<f64>() < config.zeta * config.delta_s;
    let idler = idler && rng.random::<f64>() < config.delta_i;
    Routing { signal, idler }
}

/// A signal photon at its detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalPhoton {
    pub time: i64,
    pub pair: u64,
    /// Arrival of the twin at the idler detector, if it got there.
    pub twin: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdlerPhoton {
    pub time: i64,
    pub pair: u64,
}

/// Photons reaching the detectors, both sorted by time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pairs {
    /// Creation times of every generated pair.
    pub created: Vec<i64>,
    pub signal: Vec<SignalPhoton>,
    pub idler: Vec<IdlerPhoton>,
}

/// Pairs created in `window`. Pair ids are `id_base + index`.
pub fn generate_pairs<R: Rng + ?Sized>(
    config: &SimConfig,
    window: Window,
    id_base: u64,
    rng: &mut R,
) -> Pairs {
    let mut out = Pairs::default();
    let idler_delay = to_ps(config.idler_delay);
    let emit = |t: i64, rng: &mut R, out: &mut Pairs| {
        let pair = id_base + out.created.len() as u64;
        out.created.push(t);
        let r = route_pair(config, rng);
        let twin = r.idler.then_some(t + idler_delay);
        if r.signal {
            out.signal.push(SignalPhoton {
                time: t,
                pair,
                twin,
            });
        }
        if let Some(ti) = twin {
            out.idler.push(IdlerPhoton { time: ti, pair });
        }
    };
    match config.pump {
        PumpMode::Cw { pair_rate } => {
            if pair_rate > 0.0 {
                let gap = Exp::new(pair_rate / PS_PER_S).expect("positive rate");
                let mut t = window.start as f64;
                loop {
                    t += gap.sample(rng);
                    let ti = t.floor() as i64;
                    if ti >= window.end {
                        break;
                    }
                    emit(ti, rng, &mut out);
                }
            }
        }
        PumpMode::Pulsed {
            mean_per_pulse,
            pulse_rate,
        } => {
            if mean_per_pulse > 0.0 {
                let period = to_ps(1.0 / pulse_rate).max(1);
                let nonempty = mean_per_pulse / (1.0 + mean_per_pulse);
                // failures before the next non-empty pulse
                let skip = Geometric::new(nonempty).expect("probability in (0, 1)");
                // extra pairs beyond the first in a non-empty pulse
                let extra = Geometric::new(1.0 / (1.0 + mean_per_pulse)).expect("probability");
                let mut k = window.start.div_euclid(period);
                if k * period < window.start {
                    k += 1;
                }
                loop {
                    k += skip.sample(rng) as i64;
                    let t = k * period;
                    if t >= window.end {
                        break;
                    }
                    let n = 1 + extra.sample(rng);
                    for _ in 0..n {
                        emit(t, rng, &mut out);
                    }
                    k += 1;
                }
            }
        }
    }
    out.idler.sort_by_key(|p| p.time);
    out
}

/// A detector click, possibly carrying the arrival time of its twin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Click {
    pub time: i64,
    /// `None` for dark counts.
    pub pair: Option<u64>,
    pub twin: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignalDetection {
    /// Darks drawn in the window.
    pub darks: Vec<i64>,
    /// Detector output after its dead time.
    pub clicks: Vec<Click>,
    /// Generator output after its own dead time.
    pub heralds: Vec<Click>,
}

fn poisson_times<R: Rng + ?Sized>(rate: f64, window: Window, rng: &mut R) -> Vec<i64> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let gap = Exp::new(rate / PS_PER_S).expect("positive rate");
    let mut t = window.start as f64;
    loop {
        t += gap.sample(rng);
        let ti = t.floor() as i64;
        if ti >= window.end {
            return out;
        }
        out.push(ti);
    }
}

fn non_paralyzable(clicks: &[Click], dead: i64) -> Vec<Click> {
    let mut out = Vec::with_capacity(clicks.len());
    let mut live_from = i64::MIN;
    for c in clicks {
        if c.time >= live_from {
            out.push(*c);
            live_from = c.time.saturating_add(dead);
        }
    }
    out
}

/// Detection efficiency, darks, jitter, detector dead time, then the
/// generator dead time.
pub fn detect_signal<R: Rng + ?Sized>(
    photons: &[SignalPhoton],
    config: &SimConfig,
    window: Window,
    rng: &mut R,
) -> SignalDetection {
    let eta = config.signal.efficiency;
    let mut raw: Vec<Click> = photons
        .iter()
        .filter(|_| rng.random::<f64>() < eta)
        .map(|p| Click {
            time: p.time,
            pair: Some(p.pair),
            twin: p.twin,
        })
        .collect();
    let darks = poisson_times(config.signal.dark_rate, window, rng);
    raw.extend(darks.iter().map(|&time| Click {
        time,
        pair: None,
        twin: None,
    }));
    if config.signal.jitter > 0.0 {
        let jitter = Normal::new(0.0, config.signal.jitter * PS_PER_S).expect("finite sigma");
        for c in &mut raw {
            c.time += jitter.sample(rng).round() as i64;
        }
    }
    raw.sort_by_key(|c| c.time);
    let clicks = non_paralyzable(&raw, config.effective_signal_dead_time_ps());
    let heralds = non_paralyzable(&clicks, to_ps(config.generator_dead_time));
    SignalDetection {
        darks,
        clicks,
        heralds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateRecord {
    /// Trigger that opened the gate (herald or gating-train event).
    pub trigger: i64,
    pub gate_open: i64,
    pub gate_close: i64,
    /// Idler photons that reached the detector inside the gate.
    pub photon_count_in_fiber: u32,
    pub contains_twin: bool,
    pub click: bool,
    /// Gate fell inside a hold-off interval and could not click.
    pub blocked: bool,
}

/// Idler detector state carried from gate to gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdlerState {
    pub holdoff_until: i64,
}

impl Default for IdlerState {
    fn default() -> Self {
        IdlerState {
            holdoff_until: i64::MIN,
        }
    }
}

/// Detection weight of a photon at `offset` ps into a gate of length
/// `period`, with a linear ramp of `rise` ps at both edges.
fn ramp(offset: i64, period: i64, rise: i64) -> f64 {
    if rise == 0 {
        return 1.0;
    }
    let edge = offset.min(period - offset) as f64 + 0.5;
    (edge / rise as f64).min(1.0)
}

/// Opens one gate per trigger and decides each click.
///
/// Triggers must be sorted. Overlapping gates are handled independently;
/// each sees every photon inside it. `book` selects which gates are kept
/// in the output, the rest only advance the hold-off state.
pub fn gate_idler<R: Rng + ?Sized>(
    triggers: &[Click],
    idler: &[IdlerPhoton],
    config: &SimConfig,
    state: &mut IdlerState,
    book: Window,
    rng: &mut R,
) -> Vec<GateRecord> {
    let delay = to_ps(config.gate_delay);
    let period = to_ps(config.gate_period).max(1);
    let rise = to_ps(config.idler.rise_time);
    let holdoff = to_ps(config.idler.holdoff);
    let eta = config.idler.efficiency;
    let dark = -(-config.idler.dark_rate * config.gate_period).exp_m1();
    let mut out = Vec::new();
    let mut lo = 0usize;
    for trig in triggers {
        if trig.time >= book.end {
            break;
        }
        let open = trig.time + delay;
        let close = open + period;
        while lo < idler.len() && idler[lo].time < open {
            lo += 1;
        }
        let mut survive = 1.0 - dark;
        let mut count = 0u32;
        for ph in idler[lo..].iter().take_while(|p| p.time < close) {
            count += 1;
            survive *= 1.0 - eta * ramp(ph.time - open, period, rise);
        }
        let contains_twin = trig.twin.is_some_and(|t| t >= open && t < close);
        let blocked = open < state.holdoff_until;
        let click = !blocked && rng.random::<f64>() >= survive;
        if click {
            state.holdoff_until = open + holdoff;
        }
        if book.contains(trig.time) {
            out.push(GateRecord {
                trigger: trig.time,
                gate_open: open,
                gate_close: close,
                photon_count_in_fiber: count,
                contains_twin,
                click,
                blocked,
            });
        }
    }
    out
}

/// Event counts booked inside a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub pairs: u64,
    pub signal_photons: u64,
    pub idler_photons: u64,
    /// Pairs with both photons at their detectors.
    pub coincident_pairs: u64,
    pub signal_darks: u64,
    pub signal_clicks: u64,
    pub heralds: u64,
    pub gates: u64,
    pub gate_clicks: u64,
    pub blocked_gates: u64,
}

impl Tally {
    pub fn merge(&mut self, o: &Tally) {
        self.pairs += o.pairs;
        self.signal_photons += o.signal_photons;
        self.idler_photons += o.idler_photons;
        self.coincident_pairs += o.coincident_pairs;
        self.signal_darks += o.signal_darks;
        self.signal_clicks += o.signal_clicks;
        self.heralds += o.heralds;
        self.gates += o.gates;
        self.gate_clicks += o.gate_clicks;
        self.blocked_gates += o.blocked_gates;
    }
}

/// Kinds of tagged events in an exported stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[repr(u8)]
pub enum EventTag {
    SignalPhoton = 0,
    IdlerPhoton = 1,
    SignalDark = 2,
    IdlerDark = 3,
    Herald = 4,
    IdlerClick = 5,
}

impl EventTag {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => EventTag::SignalPhoton,
            1 => EventTag::IdlerPhoton,
            2 => EventTag::SignalDark,
            3 => EventTag::IdlerDark,
            4 => EventTag::Herald,
            5 => EventTag::IdlerClick,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: i64,
    pub tag: EventTag,
    /// Links the signal and idler photons of one pair.
    pub pair: Option<u64>,
}

/// Time-ordered tagged events.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventStream {
    pub events: Vec<Event>,
}

/// Output of a complete run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimRun {
    pub duration: f64,
    pub records: Vec<GateRecord>,
    pub tally: Tally,
    /// Present when requested.
    pub events: Option<EventStream>,
}

struct Segment {
    records: Vec<GateRecord>,
    tally: Tally,
    events: Vec<Event>,
}

fn segment_rng(seed: u64, pass: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((pass << 40) | index);
    rng
}

fn run_segment(
    config: &SimConfig,
    pass: u64,
    index: u64,
    book: Window,
    keep_events: bool,
) -> Segment {
    let mut rng = segment_rng(config.seed, pass, index);
    // The first segment starts with idle detectors, like a real run.
    let pre = if index == 0 {
        0
    } else {
        to_ps(config.pre_roll())
    };
    let span = Window {
        start: book.start - pre,
        end: book.end + to_ps(config.post_roll()),
    };
    let pairs = generate_pairs(config, span, index << 32, &mut rng);
    let det = detect_signal(&pairs.signal, config, span, &mut rng);
    let triggers: Vec<Click> = match config.gating {
        GatingMode::Heralded => det.heralds.clone(),
        GatingMode::Random { rate } => poisson_times(rate, span, &mut rng)
            .into_iter()
            .map(|time| Click {
                time,
                pair: None,
                twin: None,
            })
            .collect(),
        GatingMode::Periodic { rate, phase } => {
            let period = to_ps(1.0 / rate).max(1);
            let phase = to_ps(phase);
            let mut k = (span.start - phase).div_euclid(period);
            let mut out = Vec::new();
            loop {
                let t = k * period + phase;
                if t >= span.end {
                    break;
                }
                if t >= span.start {
                    out.push(Click {
                        time: t,
                        pair: None,
                        twin: None,
                    });
                }
                k += 1;
            }
            out
        }
    };
    let mut state = IdlerState::default();
    let records = gate_idler(&triggers, &pairs.idler, config, &mut state, book, &mut rng);

    let mut tally = Tally {
        pairs: pairs.created.iter().filter(|t| book.contains(**t)).count() as u64,
        signal_photons: pairs
            .signal
            .iter()
            .filter(|p| book.contains(p.time))
            .count() as u64,
        idler_photons: pairs.idler.iter().filter(|p| book.contains(p.time)).count() as u64,
        coincident_pairs: pairs
            .signal
            .iter()
            .filter(|p| p.twin.is_some() && book.contains(p.time))
            .count() as u64,
        signal_darks: det.darks.iter().filter(|t| book.contains(**t)).count() as u64,
        signal_clicks: det.clicks.iter().filter(|c| book.contains(c.time)).count() as u64,
        heralds: det.heralds.iter().filter(|c| book.contains(c.time)).count() as u64,
        ..Tally::default()
    };
    tally.gates = records.len() as u64;
    tally.gate_clicks = records.iter().filter(|r| r.click).count() as u64;
    tally.blocked_gates = records.iter().filter(|r| r.blocked).count() as u64;

    let mut events = Vec::new();
    if keep_events {
        let booked = |t: i64| book.contains(t);
        events.extend(
            pairs
                .signal
                .iter()
                .filter(|p| booked(p.time))
                .map(|p| Event {
                    time: p.time,
                    tag: EventTag::SignalPhoton,
                    pair: Some(p.pair),
                }),
        );
        events.extend(
            pairs
                .idler
                .iter()
                .filter(|p| booked(p.time))
                .map(|p| Event {
                    time: p.time,
                    tag: EventTag::IdlerPhoton,
                    pair: Some(p.pair),
                }),
        );
        events.extend(det.darks.iter().filter(|t| booked(**t)).map(|&time| Event {
            time,
            tag: EventTag::SignalDark,
            pair: None,
        }));
        events.extend(
            det.heralds
                .iter()
                .filter(|c| booked(c.time))
                .map(|c| Event {
                    time: c.time,
                    tag: EventTag::Herald,
                    pair: c.pair,
                }),
        );
        events.extend(records.iter().filter(|r| r.click).map(|r| Event {
            time: r.gate_open,
            tag: if r.photon_count_in_fiber == 0 {
                EventTag::IdlerDark
            } else {
                EventTag::IdlerClick
            },
            pair: None,
        }));
        events.sort_by_key(|e| (e.time, e.tag));
    }
    Segment {
        records,
        tally,
        events,
    }
}

/// Runs `config` as simulation pass `pass`. Different passes with the same
/// seed use disjoint RNG streams.
pub fn run_pass(config: &SimConfig, pass: u64, keep_events: bool) -> Result<SimRun> {
    config.validate()?;
    let total = to_ps(config.duration);
    let seg = to_ps(config.segment_seconds()).max(1);
    let n = (total + seg - 1) / seg;
    let segments: Vec<Segment> = (0..n)
        .into_par_iter()
        .map(|i| {
            let book = Window {
                start: i * seg,
                end: ((i + 1) * seg).min(total),
            };
            run_segment(config, pass, i as u64, book, keep_events)
        })
        .collect();
    let mut run = SimRun {
        duration: total as f64 / PS_PER_S,
        events: keep_events.then(EventStream::default),
        ..SimRun::default()
    };
    for s in segments {
        run.records.extend(s.records);
        run.tally.merge(&s.tally);
        if let Some(ev) = run.events.as_mut() {
            ev.events.extend(s.events);
        }
    }
    Ok(run)
}

/// Runs the configuration as pass 0.
pub fn run(config: &SimConfig) -> Result<SimRun> {
    run_pass(config, 0, false)
}

/// Runs the configuration and keeps the tagged event stream.
pub fn simulate_events(config: &SimConfig) -> Result<SimRun> {
    run_pass(config, 0, true)
}
