//! Levels, particle configurations in s-coordinates, heights and lozenges.
//!
//! Level ℓ = 2n − 1 carries a = −1/2 and level ℓ = 2n carries a = +1/2;
//! both hold n particles. Positions are stored decreasing per level.

use crate::error::{Error, Result};
use crate::specialfn::JacobiParam;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelIndex {
    pub n: u32,
    pub a: JacobiParam,
}

impl LevelIndex {
    pub fn new(n: u32, a: JacobiParam) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("level needs n >= 1".into()));
        }
        Ok(LevelIndex { n, a })
    }

    pub fn from_linear(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidArgument("linear level starts at 1".into()));
        }
        let n = l.div_ceil(2) as u32;
        let a = if l % 2 == 1 { JacobiParam::MinusHalf } else { JacobiParam::PlusHalf };
        Ok(LevelIndex { n, a })
    }

    pub fn linear(self) -> usize {
        match self.a {
            JacobiParam::MinusHalf => 2 * self.n as usize - 1,
            JacobiParam::PlusHalf => 2 * self.n as usize,
        }
    }

    pub fn count(self) -> usize {
        self.n as usize
    }

    pub fn delta(self) -> i64 {
        self.a.delta()
    }

    /// The ordering (n₁,a₁) ⊵ (n₂,a₂), i.e. 2n₁ + a₁ ≥ 2n₂ + a₂.
    pub fn dominates(self, other: LevelIndex) -> bool {
        self.linear() >= other.linear()
    }
}

/// δ of a linear level.
pub fn delta_of(l: usize) -> i64 {
    if l.is_multiple_of(2) {
        1
    } else {
        0
    }
}

pub fn count_of(l: usize) -> usize {
    l.div_ceil(2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration")]
pub struct ParticleConfiguration {
    levels: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
struct RawConfiguration {
    levels: Vec<Vec<i64>>,
}

impl TryFrom<RawConfiguration> for ParticleConfiguration {
    type Error = Error;
    fn try_from(raw: RawConfiguration) -> Result<Self> {
        ParticleConfiguration::new(raw.levels)
    }
}

impl ParticleConfiguration {
    /// Checks only the per-level counts; interlacing is reported by
    /// [`check_interlacing`].
    pub fn new(levels: Vec<Vec<i64>>) -> Result<Self> {
        for (i, lv) in levels.iter().enumerate() {
            let l = i + 1;
            if lv.len() != count_of(l) {
                return Err(Error::Malformed(format!(
                    "level {l} holds {} positions, expected {}",
                    lv.len(),
                    count_of(l)
                )));
            }
        }
        Ok(ParticleConfiguration { levels })
    }

    pub fn max_level(&self) -> usize {
        self.levels.len()
    }

    /// Positions at linear level ℓ (1-based).
    pub fn level(&self, l: usize) -> &[i64] {
        &self.levels[l - 1]
    }

    pub fn levels(&self) -> &[Vec<i64>] {
        &self.levels
    }

    pub fn height(&self, x: i64, l: usize) -> usize {
        self.level(l).iter().filter(|&&s| s > x).count()
    }

    pub fn occupied(&self, x: i64, l: usize) -> bool {
        self.level(l).contains(&x)
    }
}

pub fn packed_configuration(m: usize) -> Result<ParticleConfiguration> {
    if m == 0 {
        return Err(Error::InvalidArgument("packed configuration needs M >= 1".into()));
    }
    let levels = (1..=m)
        .map(|l| {
            let n = count_of(l) as i64;
            (1..=n).map(|k| n - k).collect()
        })
        .collect();
    Ok(ParticleConfiguration { levels })
}

/// Intro coordinates (m, k, y) to (level, s). The wall is y ≥ 0 for odd m
/// and y ≥ 1 for even m.
pub fn intro_to_internal(m: usize, k: usize, y: i64) -> Result<(LevelIndex, i64)> {
    let lv = LevelIndex::from_linear(m)?;
    if k == 0 || k > lv.count() {
        return Err(Error::InvalidArgument(format!("level {m} has no particle {k}")));
    }
    let wall = delta_of(m);
    if y < wall {
        return Err(Error::WallViolation { level: m, y, wall });
    }
    Ok((lv, y + k as i64 - 1 - (m / 2) as i64))
}

pub fn internal_to_intro(lv: LevelIndex, k: usize, s: i64) -> (usize, i64) {
    let m = lv.linear();
    (m, s - k as i64 + 1 + (m / 2) as i64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub level: usize,
    pub k: usize,
    pub what: String,
}

pub fn check_interlacing(cfg: &ParticleConfiguration) -> Vec<Violation> {
    let mut out = Vec::new();
    for l in 1..=cfg.max_level() {
        let cur = cfg.level(l);
        for (k, &s) in cur.iter().enumerate() {
            if s < 0 {
                out.push(Violation { level: l, k: k + 1, what: format!("position {s} below wall") });
            }
            if k > 0 && cur[k - 1] <= s {
                out.push(Violation { level: l, k: k + 1, what: "positions not strictly decreasing".into() });
            }
        }
        if l == cfg.max_level() {
            break;
        }
        let up = cfg.level(l + 1);
        let d = delta_of(l);
        for (k, &s) in cur.iter().enumerate() {
            // δ = 0: up[k+1] < s ≤ up[k];  δ = 1: up[k+1] ≤ s < up[k]
            let (lo_ok, hi_ok) = if d == 0 {
                (up.get(k + 1).is_none_or(|&u| u < s), s <= up[k])
            } else {
                (up.get(k + 1).is_none_or(|&u| u <= s), s < up[k])
            };
            if !lo_ok || !hi_ok {
                out.push(Violation {
                    level: l,
                    k: k + 1,
                    what: format!("interlacing with level {} fails at s = {s}", l + 1),
                });
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LozengeType {
    I,
    II,
    III,
}

pub fn lozenge_indicator(cfg: &ParticleConfiguration, x: i64, l: usize, kind: LozengeType) -> Result<u8> {
    if l == 0 || l > cfg.max_level() {
        return Err(Error::InvalidArgument(format!("level {l} outside 1..={}", cfg.max_level())));
    }
    let one = cfg.occupied(x, l) as i64;
    if kind == LozengeType::I {
        return Ok(one as u8);
    }
    if l < 2 {
        return Err(Error::InvalidArgument("types II and III need level >= 2".into()));
    }
    let two = cfg.height(x, l) as i64 - cfg.height(x - delta_of(l - 1), l - 1) as i64;
    let three = 1 - one - two;
    let v = match kind {
        LozengeType::II => two,
        _ => three,
    };
    if !(0..=1).contains(&two) || !(0..=1).contains(&three) {
        return Err(Error::Malformed(format!("lozenge indicators at ({x},{l}) leave {{0,1}}")));
    }
    Ok(v as u8)
}

/// h(x,ℓ) − h(x + δ_ℓ + … + δ_{ℓ′−1}, ℓ′) − H_{ℓ,ℓ′}(x), H = −Σ 1(type II).
pub fn height_decomposition_check(cfg: &ParticleConfiguration, x: i64, l: usize, lp: usize) -> Result<i64> {
    if !(l < lp && lp <= cfg.max_level()) {
        return Err(Error::InvalidArgument(format!("need {l} < {lp} <= {}", cfg.max_level())));
    }
    let mut shift = 0;
    let mut h_sum = 0i64;
    for p in l + 1..=lp {
        shift += delta_of(p - 1);
        h_sum -= lozenge_indicator(cfg, x + shift, p, LozengeType::II)? as i64;
    }
    Ok(cfg.height(x, l) as i64 - cfg.height(x + shift, lp) as i64 - h_sum)
}

/// One lozenge, named by its white triangle (x′, ℓ′) and type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LozengeEntry {
    pub x: i64,
    pub level: usize,
    pub kind: LozengeType,
}

impl LozengeEntry {
    pub fn white(self) -> (i64, usize) {
        (self.x, self.level)
    }

    /// Black triangle paired with the white one.
    pub fn black(self) -> (i64, usize) {
        let d = delta_of(self.level);
        match self.kind {
            LozengeType::I => (self.x, self.level),
            LozengeType::II => (self.x + d, self.level - 1),
            LozengeType::III => (self.x - 1 + d, self.level - 1),
        }
    }

    /// Inverse of [`black`]/[`white`]: (x,ℓ) black, (x′,ℓ′) white.
    pub fn from_pair(x: i64, l: usize, xp: i64, lp: usize) -> Result<Self> {
        let d = delta_of(l);
        let kind = if (xp, lp) == (x, l) {
            LozengeType::I
        } else if lp == l + 1 && xp == x - 1 + d {
            LozengeType::II
        } else if lp == l + 1 && xp == x + d {
            LozengeType::III
        } else {
            return Err(Error::InvalidArgument(format!("({x},{l}) and ({xp},{lp}) are not adjacent")));
        };
        Ok(LozengeEntry { x: xp, level: lp, kind })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<LozengeEntry>", into = "Vec<LozengeEntry>")]
pub struct LozengePattern {
    entries: Vec<LozengeEntry>,
}

impl TryFrom<Vec<LozengeEntry>> for LozengePattern {
    type Error = Error;
    fn try_from(entries: Vec<LozengeEntry>) -> Result<Self> {
        LozengePattern::new(entries)
    }
}

impl From<LozengePattern> for Vec<LozengeEntry> {
    fn from(p: LozengePattern) -> Self {
        p.entries
    }
}

impl LozengePattern {
    pub fn new(entries: Vec<LozengeEntry>) -> Result<Self> {
        let mut blacks = HashSet::new();
        let mut whites = HashSet::new();
        for e in &entries {
            if e.level == 0 || (e.kind != LozengeType::I && e.level < 2) {
                return Err(Error::InvalidArgument(format!("lozenge {e:?} is not viable")));
            }
            if !blacks.insert(e.black()) || !whites.insert(e.white()) {
                return Err(Error::InvalidArgument(format!("lozenge {e:?} overlaps another entry")));
            }
        }
        Ok(LozengePattern { entries })
    }

    pub fn entries(&self) -> &[LozengeEntry] {
        &self.entries
    }

    pub fn max_level(&self) -> usize {
        self.entries.iter().map(|e| e.level).max().unwrap_or(0)
    }

    pub fn occurs_in(&self, cfg: &ParticleConfiguration) -> Result<bool> {
        for e in &self.entries {
            if lozenge_indicator(cfg, e.x, e.level, e.kind)? == 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_index_roundtrip() {
        for l in 1..40 {
            let lv = LevelIndex::from_linear(l).unwrap();
            assert_eq!(lv.linear(), l);
            assert_eq!(lv.count(), l.div_ceil(2));
            assert_eq!(lv.delta(), delta_of(l));
        }
        assert!(LevelIndex::from_linear(0).is_err());
    }

    #[test]
    fn intro_examples() {
        let (lv, s) = intro_to_internal(1, 1, 0).unwrap();
        assert_eq!((lv.n, lv.a, s), (1, JacobiParam::MinusHalf, 0));
        let (lv, s) = intro_to_internal(2, 1, 1).unwrap();
        assert_eq!((lv.n, lv.a, s), (1, JacobiParam::PlusHalf, 0));
        // packed intro state y = m − 2k + 1 lands on s = n − k
        let (lv, s) = intro_to_internal(5, 1, 4).unwrap();
        assert_eq!((lv.n, s), (3, 2));
        let (_, s) = intro_to_internal(5, 3, 0).unwrap();
        assert_eq!(s, 0);
        assert!(matches!(intro_to_internal(2, 1, 0), Err(Error::WallViolation { .. })));
    }

    #[test]
    fn packed_examples() {
        let c = packed_configuration(1).unwrap();
        assert_eq!(c.level(1), &[0]);
        let c = packed_configuration(5).unwrap();
        assert_eq!(c.level(5), &[2, 1, 0]);
        assert_eq!(c.level(4), &[1, 0]);
        assert!(check_interlacing(&packed_configuration(6).unwrap()).is_empty());
        assert_eq!(c.height(1, 5), 1);
        assert_eq!(c.height(2, 5), 0);
        assert_eq!(c.height(-1, 5), 3);
    }

    #[test]
    fn interlacing_boundaries() {
        let ok = ParticleConfiguration::new(vec![vec![0], vec![0]]).unwrap();
        assert!(check_interlacing(&ok).is_empty());
        let bad = ParticleConfiguration::new(vec![vec![0], vec![0], vec![0, 0]]).unwrap();
        assert!(!check_interlacing(&bad).is_empty());
        let bad = ParticleConfiguration::new(vec![vec![1], vec![1], vec![1, 0]]).unwrap();
        assert!(check_interlacing(&bad).iter().any(|v| v.level == 2));
        assert!(ParticleConfiguration::new(vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn lozenge_examples_packed() {
        let c = packed_configuration(3).unwrap();
        assert_eq!(lozenge_indicator(&c, 0, 1, LozengeType::I).unwrap(), 1);
        // h(0,2) − h(0,1) = 0
        assert_eq!(lozenge_indicator(&c, 0, 2, LozengeType::II).unwrap(), 0);
        // level 3 = (1,0): particle at 1
        assert_eq!(lozenge_indicator(&c, 1, 3, LozengeType::I).unwrap(), 1);
        assert_eq!(lozenge_indicator(&c, 1, 3, LozengeType::III).unwrap(), 0);
        assert_eq!(lozenge_indicator(&c, 2, 3, LozengeType::III).unwrap(), 1);
        assert!(lozenge_indicator(&c, 0, 1, LozengeType::II).is_err());
    }

    #[test]
    fn height_decomposition_packed() {
        let c = packed_configuration(6).unwrap();
        for l in 1..6 {
            for lp in l + 1..=6 {
                for x in -2..8 {
                    assert_eq!(height_decomposition_check(&c, x, l, lp).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn pattern_pairs() {
        for l in 1..6 {
            for x in 0..5 {
                for (xp, lp) in [(x, l), (x - 1 + delta_of(l), l + 1), (x + delta_of(l), l + 1)] {
                    let e = LozengeEntry::from_pair(x, l, xp, lp).unwrap();
                    assert_eq!(e.black(), (x, l));
                    assert_eq!(e.white(), (xp, lp));
                }
            }
        }
        let a = LozengeEntry { x: 3, level: 3, kind: LozengeType::II };
        let b = LozengeEntry::from_pair(a.black().0, a.black().1, a.black().0 + 1, 3).unwrap();
        assert!(LozengePattern::new(vec![a, b]).is_err());
    }
}
