//! Boolean solver over [`SelectionState`].
//!
//! A listener action pins one or more tracks. The solver returns the
//! feasible state that agrees with the pins and flips the fewest other
//! tracks relative to the state before the action. Among equally short
//! answers it picks the one whose sorted list of flipped tracks is
//! lexicographically smallest.
//!
//! Operand activity: a track operand is active when the track plays. A
//! constraint operand is active when any track reachable from it (following
//! nested constraint operands, each constraint visited once) plays. Under
//! this reading every operand is a disjunction over a fixed track set, which
//! is what [`Compiled`] precomputes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::model::{ConstraintOperand, SelectionConstraint, SelectionState, TrackId};

/// The listener's requested flags. Always honoured or rejected whole.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PinnedSelection {
    pub assignments: BTreeMap<TrackId, bool>,
}

impl PinnedSelection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(track: TrackId, active: bool) -> Self {
        Self::new().pin(track, active)
    }

    #[must_use]
    pub fn pin(mut self, track: TrackId, active: bool) -> Self {
        self.assignments.insert(track, active);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, track: TrackId) -> Option<bool> {
        self.assignments.get(&track).copied()
    }
}

impl FromIterator<(TrackId, bool)> for PinnedSelection {
    fn from_iter<I: IntoIterator<Item = (TrackId, bool)>>(iter: I) -> Self {
        Self {
            assignments: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionSolution {
    pub state: SelectionState,
    /// Automatic changes, ascending by track, pinned tracks excluded.
    pub changed: Vec<(TrackId, bool)>,
}

/// Whether `op` is active in `state`.
pub fn operand_active(
    op: ConstraintOperand,
    state: &SelectionState,
    constraints: &[SelectionConstraint],
) -> bool {
    let mut visited = vec![false; constraints.len()];
    let mut stack = vec![op];
    while let Some(op) = stack.pop() {
        match op {
            ConstraintOperand::Track(t) => {
                if state.active.get(t.index()).copied().unwrap_or(false) {
                    return true;
                }
            }
            ConstraintOperand::Constraint(c) => {
                if c < constraints.len() && !visited[c] {
                    visited[c] = true;
                    stack.extend(constraints[c].operands());
                }
            }
        }
    }
    false
}

/// Whether a single constraint holds in `state`.
pub fn constraint_holds(
    constraint: &SelectionConstraint,
    state: &SelectionState,
    constraints: &[SelectionConstraint],
) -> bool {
    let active = |op: &ConstraintOperand| operand_active(*op, state, constraints);
    match constraint {
        SelectionConstraint::Exclusion { a, b } => !(active(a) && active(b)),
        SelectionConstraint::Implication {
            antecedent,
            consequent,
        } => !active(antecedent) || active(consequent),
        SelectionConstraint::GroupCardinality { members, min, max } => {
            let on = members.iter().filter(|m| active(m)).count() as u64;
            u64::from(*min) <= on && on <= u64::from(*max)
        }
    }
}

pub fn is_feasible(constraints: &[SelectionConstraint], state: &SelectionState) -> bool {
    constraints
        .iter()
        .all(|c| constraint_holds(c, state, constraints))
}

/// Indices of constraints `state` violates, ascending.
pub fn violated(constraints: &[SelectionConstraint], state: &SelectionState) -> Vec<usize> {
    constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| !constraint_holds(c, state, constraints))
        .map(|(i, _)| i)
        .collect()
}

/// Resolves a listener action to the nearest feasible state.
pub fn solve_selection(
    constraints: &[SelectionConstraint],
    reference: &SelectionState,
    pins: &PinnedSelection,
) -> Result<SelectionSolution, SolveError> {
    check_pins(reference.len(), pins)?;
    let compiled = Compiled::new(constraints, reference.len());
    let mut search = Search::new(&compiled, reference, pins);
    let free = search.free.len();
    if !search.root_consistent() {
        return Err(SolveError::Infeasible);
    }
    for budget in 0..=free {
        if search.descend(0, budget) {
            let state = SelectionState::new(
                search
                    .assignment
                    .iter()
                    .map(|v| v.expect("complete assignment"))
                    .collect(),
            );
            debug_assert!(is_feasible(constraints, &state));
            return Ok(solution_from(state, reference, pins));
        }
    }
    Err(SolveError::Infeasible)
}

pub(crate) fn check_pins(n: usize, pins: &PinnedSelection) -> Result<(), SolveError> {
    if pins.is_empty() {
        return Err(SolveError::EmptyPins);
    }
    if let Some((&t, _)) = pins.assignments.iter().find(|(t, _)| t.index() >= n) {
        return Err(SolveError::UnknownTrack { track: t });
    }
    Ok(())
}

pub(crate) fn solution_from(
    state: SelectionState,
    reference: &SelectionState,
    pins: &PinnedSelection,
) -> SelectionSolution {
    let changed = state
        .active
        .iter()
        .zip(&reference.active)
        .enumerate()
        .filter(|&(i, (new, old))| new != old && pins.get(TrackId::from(i)).is_none())
        .map(|(i, (new, _))| (TrackId::from(i), *new))
        .collect();
    SelectionSolution { state, changed }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    True,
    False,
    Unknown,
}

/// Constraint set with every operand flattened to its reachable track set.
#[derive(Debug)]
struct Compiled {
    rules: Vec<Rule>,
    /// For each track, the rules whose operands mention it.
    watches: Vec<Vec<usize>>,
}

#[derive(Debug)]
enum Rule {
    Exclusion(Vec<usize>, Vec<usize>),
    Implication(Vec<usize>, Vec<usize>),
    Cardinality {
        members: Vec<Vec<usize>>,
        min: usize,
        max: usize,
    },
}

impl Compiled {
    fn new(constraints: &[SelectionConstraint], n: usize) -> Self {
        let reach = |op: ConstraintOperand| reachable_tracks(op, constraints, n);
        let rules: Vec<Rule> = constraints
            .iter()
            .map(|c| match c {
                SelectionConstraint::Exclusion { a, b } => Rule::Exclusion(reach(*a), reach(*b)),
                SelectionConstraint::Implication {
                    antecedent,
                    consequent,
                } => Rule::Implication(reach(*antecedent), reach(*consequent)),
                SelectionConstraint::GroupCardinality { members, min, max } => Rule::Cardinality {
                    members: members.iter().map(|m| reach(*m)).collect(),
                    min: *min as usize,
                    max: *max as usize,
                },
            })
            .collect();
        let mut watches = vec![Vec::new(); n];
        for (i, rule) in rules.iter().enumerate() {
            let sets: Vec<&Vec<usize>> = match rule {
                Rule::Exclusion(a, b) | Rule::Implication(a, b) => vec![a, b],
                Rule::Cardinality { members, .. } => members.iter().collect(),
            };
            for t in sets.into_iter().flatten() {
                if watches[*t].last() != Some(&i) {
                    watches[*t].push(i);
                }
            }
        }
        Self { rules, watches }
    }
}

fn reachable_tracks(
    op: ConstraintOperand,
    constraints: &[SelectionConstraint],
    n: usize,
) -> Vec<usize> {
    let mut visited = vec![false; constraints.len()];
    let mut tracks = Vec::new();
    let mut stack = vec![op];
    while let Some(op) = stack.pop() {
        match op {
            ConstraintOperand::Track(t) if t.index() < n => tracks.push(t.index()),
            ConstraintOperand::Track(_) => {}
            ConstraintOperand::Constraint(c) => {
                if c < constraints.len() && !visited[c] {
                    visited[c] = true;
                    stack.extend(constraints[c].operands());
                }
            }
        }
    }
    tracks.sort_unstable();
    tracks.dedup();
    tracks
}

struct Search<'a> {
    compiled: &'a Compiled,
    reference: &'a SelectionState,
    /// Unpinned tracks, ascending.
    free: Vec<usize>,
    assignment: Vec<Option<bool>>,
}

impl<'a> Search<'a> {
    fn new(compiled: &'a Compiled, reference: &'a SelectionState, pins: &PinnedSelection) -> Self {
        let mut assignment = vec![None; reference.len()];
        for (t, v) in &pins.assignments {
            assignment[t.index()] = Some(*v);
        }
        let free = (0..reference.len())
            .filter(|&i| assignment[i].is_none())
            .collect();
        Self {
            compiled,
            reference,
            free,
            assignment,
        }
    }

    fn root_consistent(&self) -> bool {
        (0..self.compiled.rules.len()).all(|r| self.rule_possible(r))
    }

    fn any_on(&self, set: &[usize]) -> Tri {
        let mut unknown = false;
        for &t in set {
            match self.assignment[t] {
                Some(true) => return Tri::True,
                Some(false) => {}
                None => unknown = true,
            }
        }
        if unknown {
            Tri::Unknown
        } else {
            Tri::False
        }
    }

    /// False only when the rule is violated under every completion.
    fn rule_possible(&self, rule: usize) -> bool {
        match &self.compiled.rules[rule] {
            Rule::Exclusion(a, b) => !(self.any_on(a) == Tri::True && self.any_on(b) == Tri::True),
            Rule::Implication(a, b) => {
                !(self.any_on(a) == Tri::True && self.any_on(b) == Tri::False)
            }
            Rule::Cardinality { members, min, max } => {
                let (mut on, mut open) = (0, 0);
                for m in members {
                    match self.any_on(m) {
                        Tri::True => on += 1,
                        Tri::Unknown => open += 1,
                        Tri::False => {}
                    }
                }
                on <= *max && on + open >= *min
            }
        }
    }

    fn consistent_after(&self, tracks: &[usize]) -> bool {
        tracks.iter().all(|&t| {
            self.compiled.watches[t]
                .iter()
                .all(|&r| self.rule_possible(r))
        })
    }

    /// Depth-first over `free[pos..]` spending exactly `budget` flips,
    /// trying "flip" before "keep" so that the first hit has the
    /// lexicographically smallest flip list.
    fn descend(&mut self, pos: usize, budget: usize) -> bool {
        let remaining = self.free.len() - pos;
        if budget > remaining {
            return false;
        }
        if budget == 0 {
            let rest: Vec<usize> = self.free[pos..].to_vec();
            for &t in &rest {
                self.assignment[t] = Some(self.reference.active[t]);
            }
            if self.consistent_after(&rest) {
                return true;
            }
            for &t in &rest {
                self.assignment[t] = None;
            }
            return false;
        }
        let t = self.free[pos];
        let kept = self.reference.active[t];
        for (value, cost) in [(!kept, 1), (kept, 0)] {
            self.assignment[t] = Some(value);
            if self.consistent_after(&[t]) && self.descend(pos + 1, budget - cost) {
                return true;
            }
        }
        self.assignment[t] = None;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn on(n: usize, tracks: &[usize]) -> SelectionState {
        SelectionState::with_active(n, tracks.iter().copied())
    }

    #[test]
    fn track_operand_activity() {
        let piece = fixtures::three_instruments();
        let state = on(9, &[fixtures::G1]);
        assert!(operand_active(
            ConstraintOperand::track(fixtures::G1),
            &state,
            &piece.selection_constraints
        ));
    }

    #[test]
    fn constraint_operand_sees_any_reachable_track() {
        let piece = fixtures::three_instruments();
        // constraint 0 is excl(G1, P2)
        let state = on(9, &[fixtures::P2]);
        assert!(operand_active(
            ConstraintOperand::Constraint(0),
            &state,
            &piece.selection_constraints
        ));
    }

    #[test]
    fn cyclic_references_terminate() {
        let constraints = vec![
            SelectionConstraint::Implication {
                antecedent: ConstraintOperand::Constraint(1),
                consequent: ConstraintOperand::track(0),
            },
            SelectionConstraint::Exclusion {
                a: ConstraintOperand::Constraint(0),
                b: ConstraintOperand::track(1),
            },
        ];
        let state = on(3, &[2]);
        assert!(!operand_active(
            ConstraintOperand::Constraint(0),
            &state,
            &constraints
        ));
        let self_ref = vec![SelectionConstraint::Exclusion {
            a: ConstraintOperand::Constraint(0),
            b: ConstraintOperand::Constraint(0),
        }];
        assert!(is_feasible(&self_ref, &on(1, &[])));
        assert!(is_feasible(&self_ref, &on(1, &[0])));
    }

    #[test]
    fn feasibility_of_worked_states() {
        use fixtures::*;
        let c = three_instruments().selection_constraints;
        assert!(!is_feasible(&c, &on(9, &[G1, P2, D1])));
        assert!(is_feasible(&c, &on(9, &[G2, D1])));
        assert!(!is_feasible(&c, &on(9, &[G2, D2])));
        assert!(!is_feasible(&c, &on(9, &[G1])));
        assert!(!is_feasible(&c, &on(9, &[D1, D2, D3])));
    }

    #[test]
    fn exclusion_stops_other_track() {
        use fixtures::*;
        let c = three_instruments().selection_constraints;
        let sol = solve_selection(
            &c,
            &on(9, &[P2, D1]),
            &PinnedSelection::single(TrackId::from(G1), true),
        )
        .unwrap();
        assert_eq!(sol.state, on(9, &[G1, D1]));
        assert_eq!(sol.changed, vec![(TrackId::from(P2), false)]);
    }

    #[test]
    fn implication_starts_consequent() {
        use fixtures::*;
        let c = three_instruments().selection_constraints;
        let sol = solve_selection(
            &c,
            &on(9, &[D2]),
            &PinnedSelection::single(TrackId::from(G2), true),
        )
        .unwrap();
        assert_eq!(sol.changed, vec![(TrackId::from(D1), true)]);
        assert_eq!(sol.state, on(9, &[G2, D1, D2]));
    }

    #[test]
    fn stopping_all_drums_is_rejected() {
        use fixtures::*;
        let c = three_instruments().selection_constraints;
        let pins: PinnedSelection = [D1, D2, D3]
            .into_iter()
            .map(|t| (TrackId::from(t), false))
            .collect();
        assert_eq!(
            solve_selection(&c, &on(9, &[D1]), &pins),
            Err(SolveError::Infeasible)
        );
    }

    #[test]
    fn stopping_one_drum_starts_lowest_other() {
        use fixtures::*;
        let c = three_instruments().selection_constraints;
        let sol = solve_selection(
            &c,
            &on(9, &[D1]),
            &PinnedSelection::single(TrackId::from(D1), false),
        )
        .unwrap();
        assert_eq!(sol.state, on(9, &[D2]));
        assert_eq!(sol.changed, vec![(TrackId::from(D2), true)]);
    }

    #[test]
    fn satisfied_pin_changes_nothing() {
        use fixtures::*;
        let c = three_instruments().selection_constraints;
        let reference = on(9, &[G1, D1]);
        let sol = solve_selection(
            &c,
            &reference,
            &PinnedSelection::single(TrackId::from(G1), true),
        )
        .unwrap();
        assert_eq!(sol.state, reference);
        assert!(sol.changed.is_empty());
    }

    #[test]
    fn pin_errors() {
        let reference = on(2, &[]);
        assert_eq!(
            solve_selection(&[], &reference, &PinnedSelection::new()),
            Err(SolveError::EmptyPins)
        );
        assert_eq!(
            solve_selection(&[], &reference, &PinnedSelection::single(TrackId(5), true)),
            Err(SolveError::UnknownTrack { track: TrackId(5) })
        );
    }

    #[test]
    fn constraint_operand_in_cardinality() {
        // group over {excl(0,1), track 2} with min 2: track 2 and one of 0/1 must play
        let constraints = vec![
            SelectionConstraint::exclusion(0, 1),
            SelectionConstraint::GroupCardinality {
                members: vec![
                    ConstraintOperand::Constraint(0),
                    ConstraintOperand::track(2),
                ],
                min: 2,
                max: 2,
            },
        ];
        let reference = on(3, &[1, 2]);
        assert!(is_feasible(&constraints, &reference));
        let sol = solve_selection(
            &constraints,
            &reference,
            &PinnedSelection::single(TrackId(1), false),
        )
        .unwrap();
        assert_eq!(sol.state, on(3, &[0, 2]));
    }
}
