//! Random daily contacts drawn from a static pairwise contact structure.
//!
//! The structure has two tiers. Every node gets a few recurrent partners
//! (household, colleagues) that it meets with high probability, and all
//! remaining pairs share one small background probability that models
//! sporadic encounters. Background pairs are never materialised; a day's
//! background contacts are found by geometric skipping over the implicit
//! list of pairs, which costs time proportional to the output.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, RngExt};
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::health::AgentId;

/// A contact between two agents on one day. The event is undirected: the
/// constructor stores the smaller id in `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub u: AgentId,
    pub v: AgentId,
    pub day: u32,
    /// Metres.
    pub distance: f64,
    /// Minutes.
    pub duration: f64,
}

impl Contact {
    pub fn new(
        a: AgentId,
        b: AgentId,
        day: u32,
        distance: f64,
        duration: f64,
    ) -> Result<Self, CoreError> {
        if a == b {
            return Err(CoreError::param("contact", format!("self contact of {a}")));
        }
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(CoreError::param(
                "distance",
                format!("{distance} must be positive"),
            ));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(CoreError::param(
                "duration",
                format!("{duration} must be positive"),
            ));
        }
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Ok(Contact {
            u,
            v,
            day,
            distance,
            duration,
        })
    }

    /// The counterpart of `me` in this contact, if `me` took part.
    pub fn peer_of(&self, me: AgentId) -> Option<AgentId> {
        if me == self.u {
            Some(self.v)
        } else if me == self.v {
            Some(self.u)
        } else {
            None
        }
    }
}

/// Exponential distribution with scale `scale`, truncated to `(0, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedExp {
    pub scale: f64,
    pub max: f64,
}

impl TruncatedExp {
    pub fn new(scale: f64, max: f64) -> Result<Self, CoreError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CoreError::param("scale", "must be positive"));
        }
        if !(max > 0.0 && max.is_finite()) {
            return Err(CoreError::param("max", "must be positive"));
        }
        Ok(TruncatedExp { scale, max })
    }

    pub fn mean(&self) -> f64 {
        let tail = (-self.max / self.scale).exp();
        self.scale - self.max * tail / (1.0 - tail)
    }
}

impl Distribution<f64> for TruncatedExp {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mass = 1.0 - (-self.max / self.scale).exp();
        loop {
            let u: f64 = rng.random();
            let x = -self.scale * (-u * mass).ln_1p();
            if x > 0.0 {
                return x.min(self.max);
            }
        }
    }
}

/// Parameters of the two-tier contact structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    /// Expected number of contacts per node per day.
    pub mean_degree: f64,
    /// Share of `mean_degree` carried by recurrent partners, in `[0, 1]`.
    pub heavy_share: f64,
    /// Target daily meeting probability of a recurrent pair.
    pub heavy_weight: f64,
    pub distance: TruncatedExp,
    pub duration: TruncatedExp,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            mean_degree: 10.0,
            heavy_share: 0.2,
            heavy_weight: 0.9,
            distance: TruncatedExp {
                scale: 1.5,
                max: 5.0,
            },
            duration: TruncatedExp {
                scale: 15.0,
                max: 120.0,
            },
        }
    }
}

/// Static contact probabilities `w(u, v)` for a population of `n` agents.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactGraph {
    n: usize,
    /// Recurrent pairs `(u, v)` with `u < v`, sorted.
    heavy: Vec<(AgentId, AgentId, f64)>,
    heavy_set: HashSet<(u32, u32)>,
    background: f64,
    distance: TruncatedExp,
    duration: TruncatedExp,
}

impl ContactGraph {
    /// Draws a two-tier graph whose expected daily degree, averaged over
    /// nodes, equals `params.mean_degree`.
    ///
    /// Each node receives `k` recurrent partners through `k` random
    /// matchings, with `k` chosen so that each recurrent weight is close to
    /// `heavy_weight` and `k * w = heavy_share * mean_degree`. The remaining
    /// degree is spread uniformly over every other pair.
    pub fn build<R: Rng + ?Sized>(
        n: usize,
        params: &GraphParams,
        rng: &mut R,
    ) -> Result<Self, CoreError> {
        if n < 2 {
            return Err(CoreError::param(
                "n",
                "population needs at least two agents",
            ));
        }
        let deg = params.mean_degree;
        if !(deg > 0.0) {
            return Err(CoreError::param("mean_degree", "must be positive"));
        }
        if deg >= n as f64 {
            return Err(CoreError::param(
                "mean_degree",
                format!("{deg} exceeds the complete-graph degree {}", n - 1),
            ));
        }
        if !(0.0..=1.0).contains(&params.heavy_share) {
            return Err(CoreError::param("heavy_share", "must lie in [0, 1]"));
        }
        if !(params.heavy_weight > 0.0 && params.heavy_weight <= 1.0) {
            return Err(CoreError::param("heavy_weight", "must lie in (0, 1]"));
        }

        let heavy_degree = params.heavy_share * deg;
        let mut heavy: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        if heavy_degree > 0.0 {
            let mut k = ((heavy_degree / params.heavy_weight).round() as usize).max(1);
            while heavy_degree / (k as f64) > 1.0 {
                k += 1;
            }
            if k > n - 1 {
                return Err(CoreError::param(
                    "heavy_share",
                    format!("{k} recurrent partners per node do not fit in {n} agents"),
                ));
            }
            let w = heavy_degree / k as f64;
            let mut order: Vec<u32> = (0..n as u32).collect();
            for _ in 0..k {
                add_matching(&mut order, &mut heavy, w, rng);
            }
        }

        let total_pairs = (n as f64) * (n as f64 - 1.0) / 2.0;
        let heavy_mass: f64 = heavy.values().sum();
        let background_pairs = total_pairs - heavy.len() as f64;
        let remaining = n as f64 * deg / 2.0 - heavy_mass;
        let background = if background_pairs > 0.0 {
            (remaining / background_pairs).max(0.0)
        } else {
            0.0
        };
        if background > 1.0 {
            return Err(CoreError::param(
                "mean_degree",
                "background contact probability exceeds 1",
            ));
        }

        Ok(Self::from_parts(
            n,
            heavy
                .into_iter()
                .map(|((u, v), w)| (AgentId(u), AgentId(v), w))
                .collect(),
            background,
            params.distance,
            params.duration,
        ))
    }

    fn from_parts(
        n: usize,
        mut heavy: Vec<(AgentId, AgentId, f64)>,
        background: f64,
        distance: TruncatedExp,
        duration: TruncatedExp,
    ) -> Self {
        heavy.sort_by_key(|&(u, v, _)| (u, v));
        let heavy_set = heavy.iter().map(|&(u, v, _)| (u.0, v.0)).collect();
        ContactGraph {
            n,
            heavy,
            heavy_set,
            background,
            distance,
            duration,
        }
    }

    pub fn population(&self) -> usize {
        self.n
    }

    pub fn background_weight(&self) -> f64 {
        self.background
    }

    pub fn heavy_pairs(&self) -> &[(AgentId, AgentId, f64)] {
        &self.heavy
    }

    /// Daily contact probability of the pair; symmetric in its arguments.
    pub fn weight(&self, a: AgentId, b: AgentId) -> f64 {
        if a == b || a.index() >= self.n || b.index() >= self.n {
            return 0.0;
        }
        let key = if a < b { (a.0, b.0) } else { (b.0, a.0) };
        if self.heavy_set.contains(&key) {
            let i = self
                .heavy
                .binary_search_by_key(&key, |&(u, v, _)| (u.0, v.0))
                .expect("heavy index out of sync");
            self.heavy[i].2
        } else {
            self.background
        }
    }

    /// Expected daily contacts of every node, `sum_v w(u, v)`.
    pub fn expected_degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        let mut partners = vec![0usize; self.n];
        for &(u, v, w) in &self.heavy {
            deg[u.index()] += w;
            deg[v.index()] += w;
            partners[u.index()] += 1;
            partners[v.index()] += 1;
        }
        for (d, k) in deg.iter_mut().zip(partners) {
            *d += (self.n - 1 - k) as f64 * self.background;
        }
        deg
    }

    /// Samples the contacts of `day` among agents flagged in `active`
    /// (indexed by agent id). Each undirected pair appears at most once.
    pub fn sample_day<R: Rng + ?Sized>(
        &self,
        day: u32,
        active: &[bool],
        rng: &mut R,
    ) -> Vec<Contact> {
        debug_assert_eq!(active.len(), self.n);
        let is_active = |a: AgentId| active.get(a.index()).copied().unwrap_or(false);
        let mut out = Vec::new();

        for &(u, v, w) in &self.heavy {
            if rng.random_bool(w) && is_active(u) && is_active(v) {
                out.push(self.make_contact(u, v, day, rng));
            }
        }

        if self.background > 0.0 {
            let skip = Geometric::new(self.background).expect("background in (0, 1]");
            let mut row: usize = 0;
            let mut row_start: u64 = 0;
            let total = (self.n as u64) * (self.n as u64 - 1) / 2;
            let mut next: u64 = 0;
            loop {
                next = next.saturating_add(skip.sample(rng));
                if next >= total {
                    break;
                }
                let mut row_len = (self.n - 1 - row) as u64;
                while next >= row_start + row_len {
                    row_start += row_len;
                    row += 1;
                    row_len = (self.n - 1 - row) as u64;
                }
                let u = AgentId(row as u32);
                let v = AgentId((row as u64 + 1 + (next - row_start)) as u32);
                next += 1;
                if self.heavy_set.contains(&(u.0, v.0)) || !is_active(u) || !is_active(v) {
                    continue;
                }
                out.push(self.make_contact(u, v, day, rng));
            }
        }
        out
    }

    fn make_contact<R: Rng + ?Sized>(
        &self,
        u: AgentId,
        v: AgentId,
        day: u32,
        rng: &mut R,
    ) -> Contact {
        Contact {
            u,
            v,
            day,
            distance: self.distance.sample(rng),
            duration: self.duration.sample(rng),
        }
    }

    /// Writes the graph as text: a header `n <count>`, a line
    /// `background <w>`, then one `u v w` line per recurrent pair.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n {}", self.n)?;
        writeln!(out, "background {:e}", self.background)?;
        for &(u, v, w) in &self.heavy {
            writeln!(out, "{} {} {}", u.0, v.0, w)?;
        }
        Ok(())
    }

    pub fn read_edge_list<B: BufRead>(
        input: B,
        distance: TruncatedExp,
        duration: TruncatedExp,
    ) -> Result<Self, CoreError> {
        let bad = |line: usize, reason: &str| CoreError::EdgeList {
            line,
            reason: reason.to_string(),
        };
        let mut n = None;
        let mut background = None;
        let mut heavy = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| bad(lineno, &e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                ["n", count] => {
                    n = Some(count.parse::<usize>().map_err(|_| bad(lineno, "bad n"))?);
                }
                ["background", w] => {
                    background = Some(w.parse::<f64>().map_err(|_| bad(lineno, "bad weight"))?);
                }
                [a, b, w] => {
                    let n = n.ok_or_else(|| bad(lineno, "edge before header"))?;
                    let a: u32 = a.parse().map_err(|_| bad(lineno, "bad node"))?;
                    let b: u32 = b.parse().map_err(|_| bad(lineno, "bad node"))?;
                    let w: f64 = w.parse().map_err(|_| bad(lineno, "bad weight"))?;
                    if a == b || a as usize >= n || b as usize >= n {
                        return Err(bad(lineno, "node out of range"));
                    }
                    if !(0.0..=1.0).contains(&w) {
                        return Err(bad(lineno, "weight outside [0, 1]"));
                    }
                    let key = (a.min(b), a.max(b));
                    if !seen.insert(key) {
                        return Err(bad(lineno, "duplicate pair"));
                    }
                    heavy.push((AgentId(key.0), AgentId(key.1), w));
                }
                _ => return Err(bad(lineno, "expected `u v w`")),
            }
        }
        let n = n.ok_or_else(|| bad(0, "missing `n` header"))?;
        let background = background.ok_or_else(|| bad(0, "missing `background` header"))?;
        if !(0.0..=1.0).contains(&background) {
            return Err(bad(0, "background outside [0, 1]"));
        }
        Ok(Self::from_parts(n, heavy, background, distance, duration))
    }
}

/// Pairs up a random permutation of `order`, skipping pairs that already
/// exist. Colliding nodes get a few reshuffle attempts among the leftovers.
fn add_matching<R: Rng + ?Sized>(
    order: &mut [u32],
    heavy: &mut BTreeMap<(u32, u32), f64>,
    w: f64,
    rng: &mut R,
) {
    order.shuffle(rng);
    let mut leftovers = Vec::new();
    for pair in order.chunks_exact(2) {
        let key = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if heavy.contains_key(&key) {
            leftovers.extend_from_slice(pair);
        } else {
            heavy.insert(key, w);
        }
    }
    for _ in 0..8 {
        if leftovers.len() < 2 {
            break;
        }
        leftovers.shuffle(rng);
        let mut still = Vec::new();
        for pair in leftovers.chunks(2) {
            if let [a, b] = *pair {
                let key = (a.min(b), a.max(b));
                if heavy.contains_key(&key) {
                    still.extend_from_slice(pair);
                } else {
                    heavy.insert(key, w);
                }
            }
        }
        leftovers = still;
    }
}
