//! Event-driven simulation of the push/block/reflect dynamics.
//!
//! State is kept in intro coordinates y^m_k (m = 1..M, k = 1..⌈m/2⌉) with
//! y ≥ 0 on odd levels and y ≥ 1 on even levels.

use crate::error::{Error, Result};
use crate::lattice::{count_of, LozengeEntry, ParticleConfiguration};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClockMode {
    Both,
    /// Test hook: left clocks never ring.
    RightOnly,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub dt: f64,
    pub m: usize,
    pub k: usize,
    pub direction: Direction,
}

/// Moved particles: (m+i, k) for i < len when moving right,
/// (m+j, k+j) for j < len when moving left. len = 0 means blocked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Move {
    pub m: usize,
    pub k: usize,
    pub direction: Direction,
    pub len: usize,
}

impl Move {
    pub fn particles(&self) -> Vec<(usize, usize)> {
        (0..self.len)
            .map(|i| match self.direction {
                Direction::Right => (self.m + i, self.k),
                Direction::Left => (self.m + i, self.k + i),
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct SimState {
    m_max: usize,
    y: Vec<i64>,
    offset: Vec<usize>,
    who: Vec<(u32, u32)>,
    clock: f64,
    rng: ChaCha8Rng,
    mode: ClockMode,
}

impl SimState {
    /// Packed start; the RNG stream is (seed, stream).
    pub fn new(m_max: usize, seed: u64, stream: u64) -> Result<Self> {
        if m_max == 0 {
            return Err(Error::InvalidArgument("cutoff M must be >= 1".into()));
        }
        let mut offset = vec![0; m_max + 2];
        for m in 1..=m_max {
            offset[m + 1] = offset[m] + count_of(m);
        }
        let mut y = Vec::with_capacity(offset[m_max + 1]);
        let mut who = Vec::with_capacity(offset[m_max + 1]);
        for m in 1..=m_max {
            for k in 1..=count_of(m) {
                y.push(m as i64 - 2 * k as i64 + 1);
                who.push((m as u32, k as u32));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(SimState { m_max, y, offset, who, clock: 0.0, rng, mode: ClockMode::Both })
    }

    pub fn with_mode(mut self, mode: ClockMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn cutoff(&self) -> usize {
        self.m_max
    }

    pub fn particles(&self) -> usize {
        self.y.len()
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    #[inline]
    pub fn y(&self, m: usize, k: usize) -> i64 {
        self.y[self.offset[m] + k - 1]
    }

    #[inline]
    fn bump(&mut self, m: usize, k: usize, by: i64) {
        self.y[self.offset[m] + k - 1] += by;
    }

    pub fn next_event(&mut self) -> Event {
        let p = self.y.len();
        let e: f64 = self.rng.sample(Exp1);
        match self.mode {
            ClockMode::Both => {
                let r = self.rng.random_range(0..2 * p);
                let (m, k) = self.who[r >> 1];
                let direction = if r & 1 == 0 { Direction::Left } else { Direction::Right };
                Event { dt: e / p as f64, m: m as usize, k: k as usize, direction }
            }
            ClockMode::RightOnly => {
                let (m, k) = self.who[self.rng.random_range(0..p)];
                Event { dt: 2.0 * e / p as f64, m: m as usize, k: k as usize, direction: Direction::Right }
            }
        }
    }

    pub fn attempt_right(&mut self, m: usize, k: usize) -> Move {
        let y0 = self.y(m, k);
        if m > 1 && k > 1 && self.y(m - 1, k - 1) == y0 + 1 {
            return Move { m, k, direction: Direction::Right, len: 0 };
        }
        let mut len = 1;
        while m + len <= self.m_max && self.y(m + len, k) == y0 + len as i64 {
            len += 1;
        }
        for i in 0..len {
            self.bump(m + i, k, 1);
        }
        Move { m, k, direction: Direction::Right, len }
    }

    pub fn attempt_left(&mut self, m: usize, k: usize) -> Move {
        let y0 = self.y(m, k);
        if y0 == 0 {
            return self.attempt_right(m, k);
        }
        if m > 1 && k <= count_of(m - 1) && self.y(m - 1, k) == y0 - 1 {
            return Move { m, k, direction: Direction::Left, len: 0 };
        }
        let mut len = 1;
        while m + len <= self.m_max && k + len <= count_of(m + len) && self.y(m + len, k + len) == y0 - len as i64 {
            len += 1;
        }
        for j in 0..len {
            self.bump(m + j, k + j, -1);
        }
        Move { m, k, direction: Direction::Left, len }
    }

    pub fn apply(&mut self, ev: Event) -> Move {
        self.clock += ev.dt;
        match ev.direction {
            Direction::Right => self.attempt_right(ev.m, ev.k),
            Direction::Left => self.attempt_left(ev.m, ev.k),
        }
    }

    pub fn step(&mut self) -> Move {
        let ev = self.next_event();
        self.apply(ev)
    }

    /// Runs until `t`, leaving the clock exactly at `t`.
    pub fn advance_to(&mut self, t: f64) {
        loop {
            let ev = self.next_event();
            if self.clock + ev.dt > t {
                // memoryless: the overshooting draw is discarded
                self.clock = t;
                return;
            }
            self.apply(ev);
        }
    }

    /// s-position of particle k on linear level ℓ.
    #[inline]
    pub fn s(&self, l: usize, k: usize) -> i64 {
        self.y(l, k) + k as i64 - 1 - (l / 2) as i64
    }

    pub fn height(&self, x: i64, l: usize) -> usize {
        // s is strictly decreasing in k
        (1..=count_of(l)).take_while(|&k| self.s(l, k) > x).count()
    }

    pub fn occupied(&self, x: i64, l: usize) -> bool {
        (1..=count_of(l)).any(|k| self.s(l, k) == x)
    }

    pub fn configuration(&self) -> ParticleConfiguration {
        let levels = (1..=self.m_max).map(|l| (1..=count_of(l)).map(|k| self.s(l, k)).collect()).collect();
        ParticleConfiguration::new(levels).expect("level counts are fixed by construction")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    pub m_max: usize,
    pub t_end: f64,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    #[serde(default)]
    pub sample_times: Vec<f64>,
    #[serde(default)]
    pub height_probes: Vec<(i64, usize)>,
    #[serde(default)]
    pub lozenge_probes: Vec<LozengeEntry>,
}

impl SimPlan {
    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 {
            return Err(Error::InvalidArgument("cutoff M must be >= 1".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.sample_times.windows(2).any(|w| w[1] < w[0])
            || self.sample_times.iter().any(|&t| !(0.0..=self.t_end).contains(&t))
        {
            return Err(Error::InvalidArgument("sample times must be sorted within [0, t_end]".into()));
        }
        let top = self
            .height_probes
            .iter()
            .map(|p| p.1)
            .chain(self.lozenge_probes.iter().map(|e| e.level))
            .max()
            .unwrap_or(0);
        if top > self.m_max {
            return Err(Error::InvalidArgument(format!("probe level {top} exceeds cutoff {}", self.m_max)));
        }
        if self.height_probes.iter().any(|p| p.1 == 0) {
            return Err(Error::InvalidArgument("probe levels start at 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRow {
    pub time: f64,
    pub probe: usize,
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub heights: Vec<ObservationRow>,
    pub lozenges: Vec<ObservationRow>,
    pub final_configuration: ParticleConfiguration,
}

/// Runs one trajectory from the packed state, calling `observe` at each
/// sample time.
pub fn run_observed<F>(
    m_max: usize,
    seed: u64,
    stream: u64,
    times: &[f64],
    t_end: f64,
    mut observe: F,
) -> Result<SimState>
where
    F: FnMut(usize, &SimState),
{
    let mut st = SimState::new(m_max, seed, stream)?;
    for (i, &t) in times.iter().enumerate() {
        st.advance_to(t);
        observe(i, &st);
    }
    st.advance_to(t_end);
    Ok(st)
}

pub fn simulate(plan: &SimPlan) -> Result<ObservationRecord> {
    plan.validate()?;
    let mut heights = Vec::new();
    let mut lozenges = Vec::new();
    let mut err = None;
    let st = run_observed(plan.m_max, plan.seed, plan.stream, &plan.sample_times, plan.t_end, |i, st| {
        let time = plan.sample_times[i];
        for (p, &(x, l)) in plan.height_probes.iter().enumerate() {
            heights.push(ObservationRow { time, probe: p, value: st.height(x, l) as i64 });
        }
        if !plan.lozenge_probes.is_empty() {
            let cfg = st.configuration();
            for (p, e) in plan.lozenge_probes.iter().enumerate() {
                match crate::lattice::lozenge_indicator(&cfg, e.x, e.level, e.kind) {
                    Ok(v) => lozenges.push(ObservationRow { time, probe: p, value: v as i64 }),
                    Err(e) => err = Some(e),
                }
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(ObservationRecord { heights, lozenges, final_configuration: st.configuration() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{check_interlacing, packed_configuration};

    #[test]
    fn packed_start_matches_lattice() {
        let st = SimState::new(7, 1, 0).unwrap();
        assert_eq!(st.configuration(), packed_configuration(7).unwrap());
        assert_eq!(st.particles(), (1..=7).map(count_of).sum::<usize>());
    }

    #[test]
    fn packed_moves() {
        let mut st = SimState::new(8, 1, 0).unwrap();
        // leftmost particle of level 1 reflects and drags the k = 1 column
        let mv = st.attempt_left(1, 1);
        assert_eq!(mv.direction, Direction::Right);
        assert_eq!(mv.len, 8);
        let mut st = SimState::new(8, 1, 0).unwrap();
        assert_eq!(st.attempt_left(2, 1).len, 0);
        let mv = st.attempt_right(5, 1);
        assert_eq!(mv.particles(), (5..=8).map(|m| (m, 1)).collect::<Vec<_>>());
        let mut st = SimState::new(1, 1, 0).unwrap();
        assert_eq!(st.attempt_right(1, 1).len, 1);
        assert_eq!(st.y(1, 1), 1);
    }

    #[test]
    fn blocked_right() {
        let mut st = SimState::new(3, 1, 0).unwrap();
        // y^2_1 = 1, y^3_2 = 0: y^3_2 + 1 = y^2_1 blocks
        assert_eq!(st.attempt_right(3, 2).len, 0);
    }

    #[test]
    fn isolated_left_move() {
        let mut st = SimState::new(1, 1, 0).unwrap();
        for _ in 0..5 {
            st.attempt_right(1, 1);
        }
        let mv = st.attempt_left(1, 1);
        assert_eq!((mv.direction, mv.len, st.y(1, 1)), (Direction::Left, 1, 4));
    }

    #[test]
    fn invariants_hold_along_trajectory() {
        let mut st = SimState::new(9, 3, 0).unwrap();
        for i in 0..100_000 {
            st.step();
            if i % 97 == 0 {
                assert!(check_interlacing(&st.configuration()).is_empty(), "event {i}");
            }
        }
    }

    #[test]
    fn deterministic() {
        let plan = SimPlan {
            m_max: 6,
            t_end: 2.0,
            seed: 42,
            stream: 0,
            sample_times: vec![0.5, 1.0, 2.0],
            height_probes: vec![(0, 1), (1, 5)],
            lozenge_probes: vec![],
        };
        assert_eq!(simulate(&plan).unwrap(), simulate(&plan).unwrap());
        let zero = SimPlan { t_end: 0.0, sample_times: vec![], ..plan };
        assert_eq!(simulate(&zero).unwrap().final_configuration, packed_configuration(6).unwrap());
    }

    #[test]
    fn plan_validation() {
        let plan = SimPlan {
            m_max: 3,
            t_end: 1.0,
            seed: 0,
            stream: 0,
            sample_times: vec![],
            height_probes: vec![(0, 4)],
            lozenge_probes: vec![],
        };
        assert!(simulate(&plan).is_err());
    }

    #[test]
    fn right_only_is_monotone() {
        let mut st = SimState::new(6, 5, 0).unwrap().with_mode(ClockMode::RightOnly);
        let mut prev = st.configuration();
        for _ in 0..5000 {
            st.step();
            let cur = st.configuration();
            for l in 1..=6 {
                for (a, b) in prev.level(l).iter().zip(cur.level(l)) {
                    assert!(b >= a);
                }
            }
            prev = cur;
        }
    }
}
