//! Integer solver over [`MixState`].
//!
//! Levels live in each track's `[level_min, level_max]`. A listener action
//! pins some levels; the solver picks the feasible completion with the
//! smallest L1 distance to the levels before the action, breaking ties by the
//! lexicographically smallest level vector.
//!
//! Tracks tied by equality collapse into one variable. Variables linked by
//! inequality or balance form independent components, each solved by
//! branch and bound with interval propagation: a first pass finds the optimal
//! cost exploring values nearest the reference first, a second pass walks
//! values in ascending order and stops at the first solution at that cost.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::model::{MixConstraint, MixState, Piece, TrackId};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PinnedLevel {
    pub assignments: BTreeMap<TrackId, u32>,
}

impl PinnedLevel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(track: TrackId, level: u32) -> Self {
        Self::new().pin(track, level)
    }

    #[must_use]
    pub fn pin(mut self, track: TrackId, level: u32) -> Self {
        self.assignments.insert(track, level);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, track: TrackId) -> Option<u32> {
        self.assignments.get(&track).copied()
    }
}

impl FromIterator<(TrackId, u32)> for PinnedLevel {
    fn from_iter<I: IntoIterator<Item = (TrackId, u32)>>(iter: I) -> Self {
        Self {
            assignments: iter.into_iter().collect(),
        }
    }
}

/// One automatic level change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelChange {
    pub track: TrackId,
    pub from: u32,
    pub to: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixSolution {
    pub state: MixState,
    /// Ascending by track, pinned tracks excluded.
    pub changed: Vec<LevelChange>,
}

pub(crate) fn constraint_holds(constraint: &MixConstraint, state: &MixState) -> bool {
    let level = |t: &TrackId| state.level[t.index()];
    match constraint {
        MixConstraint::Equality { members } => {
            members.windows(2).all(|w| level(&w[0]) == level(&w[1]))
        }
        MixConstraint::Inequality { higher, lower } => level(higher) >= level(lower),
        MixConstraint::Balance { members, sum } => {
            members.iter().map(|t| u64::from(level(t))).sum::<u64>() == u64::from(*sum)
        }
    }
}

fn within_bounds(piece: &Piece, state: &MixState) -> bool {
    state.len() == piece.tracks.len()
        && piece
            .tracks
            .iter()
            .zip(&state.level)
            .all(|(t, l)| t.admits(*l))
}

pub fn is_level_feasible(piece: &Piece, state: &MixState) -> bool {
    within_bounds(piece, state)
        && piece
            .mix_constraints
            .iter()
            .all(|c| constraint_holds(c, state))
}

/// Indices of mix constraints `state` violates, ascending.
pub fn violated(piece: &Piece, state: &MixState) -> Vec<usize> {
    piece
        .mix_constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| !constraint_holds(c, state))
        .map(|(i, _)| i)
        .collect()
}

/// L1 distance over tracks the listener did not pin.
pub fn distance(state: &MixState, reference: &MixState, pins: &PinnedLevel) -> u64 {
    state
        .level
        .iter()
        .zip(&reference.level)
        .enumerate()
        .filter(|(i, _)| pins.get(TrackId::from(*i)).is_none())
        .map(|(_, (a, b))| u64::from(a.abs_diff(*b)))
        .sum()
}

pub(crate) fn check_pins(
    piece: &Piece,
    reference: &MixState,
    pins: &PinnedLevel,
) -> Result<(), SolveError> {
    if reference.len() != piece.tracks.len() {
        return Err(SolveError::StateLength {
            expected: piece.tracks.len(),
            found: reference.len(),
        });
    }
    if pins.is_empty() {
        return Err(SolveError::EmptyPins);
    }
    for (&track, &level) in &pins.assignments {
        let t = piece
            .track(track)
            .ok_or(SolveError::UnknownTrack { track })?;
        if !t.admits(level) {
            return Err(SolveError::PinOutOfBounds {
                track,
                level,
                min: t.level_min,
                max: t.level_max,
            });
        }
    }
    Ok(())
}

pub(crate) fn solution_from(
    state: MixState,
    reference: &MixState,
    pins: &PinnedLevel,
) -> MixSolution {
    let changed = state
        .level
        .iter()
        .zip(&reference.level)
        .enumerate()
        .filter(|&(i, (new, old))| new != old && pins.get(TrackId::from(i)).is_none())
        .map(|(i, (new, old))| LevelChange {
            track: TrackId::from(i),
            from: *old,
            to: *new,
        })
        .collect();
    MixSolution { state, changed }
}

/// Resolves a level action to the nearest feasible mix.
pub fn solve_levels(
    piece: &Piece,
    reference: &MixState,
    pins: &PinnedLevel,
) -> Result<MixSolution, SolveError> {
    check_pins(piece, reference, pins)?;
    let n = piece.tracks.len();

    let mut classes = UnionFind::new(n);
    for c in &piece.mix_constraints {
        if let MixConstraint::Equality { members } = c {
            for w in members.windows(2) {
                classes.union(w[0].index(), w[1].index());
            }
        }
    }

    // One variable per equality class that any constraint touches, numbered
    // by the smallest track in the class.
    let mut involved = vec![false; n];
    for c in &piece.mix_constraints {
        for t in c.tracks() {
            involved[t.index()] = true;
        }
    }
    let mut var_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vars: Vec<Var> = Vec::new();
    let mut var_of_track = vec![None; n];
    for t in 0..n {
        if !involved[t] {
            continue;
        }
        let root = classes.find(t);
        let v = *var_of_root.entry(root).or_insert_with(|| {
            vars.push(Var::default());
            vars.len() - 1
        });
        var_of_track[t] = Some(v);
        let track = &piece.tracks[t];
        let var = &mut vars[v];
        var.members.push(t);
        var.lo = var.lo.max(i64::from(track.level_min));
        var.hi = var.hi.min(i64::from(track.level_max));
        match pins.get(TrackId::from(t)) {
            Some(p) => {
                let p = i64::from(p);
                if var.pinned.is_some_and(|q| q != p) {
                    return Err(SolveError::Infeasible);
                }
                var.pinned = Some(p);
            }
            None => var.refs.push(i64::from(reference.level[t])),
        }
    }
    for var in &mut vars {
        if let Some(p) = var.pinned {
            if p < var.lo || p > var.hi {
                return Err(SolveError::Infeasible);
            }
            var.lo = p;
            var.hi = p;
        }
        if var.lo > var.hi {
            return Err(SolveError::Infeasible);
        }
    }

    let mut relations = Vec::new();
    for c in &piece.mix_constraints {
        let var = |t: &TrackId| var_of_track[t.index()].expect("constrained track has a var");
        match c {
            MixConstraint::Equality { .. } => {}
            MixConstraint::Inequality { higher, lower } => {
                let (h, l) = (var(higher), var(lower));
                if h != l {
                    relations.push(Relation::AtLeast(h, l));
                }
            }
            MixConstraint::Balance { members, sum } => {
                let mut coef: BTreeMap<usize, i64> = BTreeMap::new();
                for t in members {
                    *coef.entry(var(t)).or_default() += 1;
                }
                relations.push(Relation::Sum(coef.into_iter().collect(), i64::from(*sum)));
            }
        }
    }

    let mut values = vec![0i64; vars.len()];
    let mut components = UnionFind::new(vars.len());
    for r in &relations {
        let vs = r.vars();
        for w in vs.windows(2) {
            components.union(w[0], w[1]);
        }
    }
    let mut grouped: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..vars.len() {
        grouped.entry(components.find(v)).or_default().push(v);
    }
    for members in grouped.values() {
        let local: BTreeMap<usize, usize> =
            members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let comp_relations = relations
            .iter()
            .filter(|r| local.contains_key(&r.vars()[0]))
            .map(|r| r.remap(&local))
            .collect();
        let comp_vars = members.iter().map(|&v| vars[v].clone()).collect();
        let solved = Component::new(comp_vars, comp_relations)
            .solve()
            .ok_or(SolveError::Infeasible)?;
        for (i, &v) in members.iter().enumerate() {
            values[v] = solved[i];
        }
    }

    let level = (0..n)
        .map(|t| match var_of_track[t] {
            Some(v) => values[v] as u32,
            None => pins.get(TrackId::from(t)).unwrap_or(reference.level[t]),
        })
        .collect();
    let state = MixState::new(level);
    debug_assert!(is_level_feasible(piece, &state));
    Ok(solution_from(state, reference, pins))
}

#[derive(Debug, Clone)]
struct Var {
    members: Vec<usize>,
    lo: i64,
    hi: i64,
    pinned: Option<i64>,
    /// Reference levels of unpinned members; cost is the L1 gap to these.
    refs: Vec<i64>,
}

impl Default for Var {
    fn default() -> Self {
        Self {
            members: Vec::new(),
            lo: i64::MIN,
            hi: i64::MAX,
            pinned: None,
            refs: Vec::new(),
        }
    }
}

impl Var {
    fn cost(&self, value: i64) -> i64 {
        self.refs.iter().map(|r| (value - r).abs()).sum()
    }

    /// Minimum of the convex cost over `[lo, hi]`.
    fn min_cost(&self, lo: i64, hi: i64) -> i64 {
        if self.refs.is_empty() {
            return 0;
        }
        let mut best = self.cost(lo).min(self.cost(hi));
        for r in &self.refs {
            best = best.min(self.cost((*r).clamp(lo, hi)));
        }
        best
    }
}

#[derive(Debug, Clone)]
enum Relation {
    /// `v[a] >= v[b]`
    AtLeast(usize, usize),
    /// `sum(coef * v) == total`
    Sum(Vec<(usize, i64)>, i64),
}

impl Relation {
    fn vars(&self) -> Vec<usize> {
        match self {
            Self::AtLeast(a, b) => vec![*a, *b],
            Self::Sum(terms, _) => terms.iter().map(|(v, _)| *v).collect(),
        }
    }

    fn remap(&self, local: &BTreeMap<usize, usize>) -> Self {
        match self {
            Self::AtLeast(a, b) => Self::AtLeast(local[a], local[b]),
            Self::Sum(terms, total) => {
                Self::Sum(terms.iter().map(|(v, c)| (local[v], *c)).collect(), *total)
            }
        }
    }
}

type Domains = Vec<(i64, i64)>;

struct Component {
    vars: Vec<Var>,
    relations: Vec<Relation>,
    best_cost: i64,
    best: Option<Vec<i64>>,
}

impl Component {
    fn new(vars: Vec<Var>, relations: Vec<Relation>) -> Self {
        Self {
            vars,
            relations,
            best_cost: i64::MAX,
            best: None,
        }
    }

    fn solve(mut self) -> Option<Vec<i64>> {
        let root: Domains = self.vars.iter().map(|v| (v.lo, v.hi)).collect();
        let root = self.propagate(root)?;
        self.search_cost(&root, 0, 0);
        self.best.as_ref()?;
        let target = self.best_cost;
        self.best = None;
        self.search_lex(&root, 0, 0, target);
        self.best
    }

    /// Interval bounds consistency, to a fixpoint.
    fn propagate(&self, mut d: Domains) -> Option<Domains> {
        loop {
            let mut changed = false;
            for r in &self.relations {
                match *r {
                    Relation::AtLeast(h, l) => {
                        if d[l].1 > d[h].1 {
                            d[l].1 = d[h].1;
                            changed = true;
                        }
                        if d[h].0 < d[l].0 {
                            d[h].0 = d[l].0;
                            changed = true;
                        }
                    }
                    Relation::Sum(ref terms, total) => {
                        let lo: i64 = terms.iter().map(|(v, c)| c * d[*v].0).sum();
                        let hi: i64 = terms.iter().map(|(v, c)| c * d[*v].1).sum();
                        if lo > total || hi < total {
                            return None;
                        }
                        for (v, c) in terms {
                            let others_lo = lo - c * d[*v].0;
                            let others_hi = hi - c * d[*v].1;
                            let new_hi = (total - others_lo).div_euclid(*c);
                            let new_lo = -(-(total - others_hi)).div_euclid(*c);
                            if new_hi < d[*v].1 {
                                d[*v].1 = new_hi;
                                changed = true;
                            }
                            if new_lo > d[*v].0 {
                                d[*v].0 = new_lo;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if d.iter().any(|(lo, hi)| lo > hi) {
                return None;
            }
            if !changed {
                return Some(d);
            }
        }
    }

    fn bound(&self, d: &Domains, from: usize) -> i64 {
        (from..self.vars.len())
            .map(|i| self.vars[i].min_cost(d[i].0, d[i].1))
            .sum()
    }

    fn assign(&self, d: &Domains, i: usize, value: i64) -> Option<Domains> {
        let mut next = d.clone();
        next[i] = (value, value);
        self.propagate(next)
    }

    fn search_cost(&mut self, d: &Domains, i: usize, spent: i64) {
        if spent + self.bound(d, i) >= self.best_cost {
            return;
        }
        if i == self.vars.len() {
            self.best_cost = spent;
            self.best = Some(d.iter().map(|(lo, _)| *lo).collect());
            return;
        }
        let var = &self.vars[i];
        let mut order: Vec<(i64, i64)> = (d[i].0..=d[i].1).map(|v| (var.cost(v), v)).collect();
        order.sort_unstable();
        for (cost, value) in order {
            if spent + cost >= self.best_cost {
                break;
            }
            if let Some(next) = self.assign(d, i, value) {
                self.search_cost(&next, i + 1, spent + cost);
            }
        }
    }

    fn search_lex(&mut self, d: &Domains, i: usize, spent: i64, target: i64) -> bool {
        if spent + self.bound(d, i) > target {
            return false;
        }
        if i == self.vars.len() {
            self.best = Some(d.iter().map(|(lo, _)| *lo).collect());
            return true;
        }
        for value in d[i].0..=d[i].1 {
            let cost = self.vars[i].cost(value);
            if spent + cost > target {
                continue;
            }
            if let Some(next) = self.assign(d, i, value) {
                if self.search_lex(&next, i + 1, spent + cost, target) {
                    return true;
                }
            }
        }
        false
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Keeps the smaller index as root.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}
