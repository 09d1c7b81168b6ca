//! Exhaustive reference solvers.
//!
//! These enumerate the whole search space and apply the distance and
//! tie-break rules literally. They share no search code with
//! [`crate::selection`] or [`crate::mixing`]; only the plain feasibility
//! predicates are reused.

use crate::error::SolveError;
use crate::mixing::{self, MixSolution, PinnedLevel};
use crate::model::{MixState, Piece, SelectionConstraint, SelectionState, TrackId};
use crate::selection::{self, PinnedSelection, SelectionSolution};

/// Largest track count [`oracle_solve_selection`] accepts.
pub const SELECTION_TRACK_LIMIT: usize = 20;
/// Largest candidate count [`oracle_solve_levels`] accepts.
pub const LEVEL_CANDIDATE_LIMIT: u64 = 10_000_000;

pub fn oracle_solve_selection(
    constraints: &[SelectionConstraint],
    reference: &SelectionState,
    pins: &PinnedSelection,
) -> Result<SelectionSolution, SolveError> {
    let n = reference.len();
    if n > SELECTION_TRACK_LIMIT {
        return Err(SolveError::InstanceTooLarge {
            size: 1u64.checked_shl(n as u32).unwrap_or(u64::MAX),
            limit: 1u64 << SELECTION_TRACK_LIMIT,
        });
    }
    selection::check_pins(n, pins)?;

    // (distance, sorted list of changed unpinned tracks, state)
    let mut best: Option<(usize, Vec<usize>, SelectionState)> = None;
    for mask in 0u32..(1u32 << n) {
        let state = SelectionState::new((0..n).map(|i| mask >> i & 1 == 1).collect());
        let agrees = pins
            .assignments
            .iter()
            .all(|(t, v)| state.active[t.index()] == *v);
        if !agrees || !selection::is_feasible(constraints, &state) {
            continue;
        }
        let flips: Vec<usize> = (0..n)
            .filter(|&i| {
                pins.get(TrackId::from(i)).is_none() && state.active[i] != reference.active[i]
            })
            .collect();
        let better = match &best {
            None => true,
            Some((d, f, _)) => (flips.len(), &flips) < (*d, f),
        };
        if better {
            best = Some((flips.len(), flips, state));
        }
    }
    best.map(|(_, _, state)| selection::solution_from(state, reference, pins))
        .ok_or(SolveError::Infeasible)
}

pub fn oracle_solve_levels(
    piece: &Piece,
    reference: &MixState,
    pins: &PinnedLevel,
) -> Result<MixSolution, SolveError> {
    mixing::check_pins(piece, reference, pins)?;
    let n = piece.tracks.len();
    let mut constrained = vec![false; n];
    for c in &piece.mix_constraints {
        for t in c.tracks() {
            constrained[t.index()] = true;
        }
    }
    let free: Vec<usize> = (0..n)
        .filter(|&i| constrained[i] && pins.get(TrackId::from(i)).is_none())
        .collect();
    let size = free.iter().fold(1u64, |acc, &i| {
        acc.saturating_mul(u64::from(
            piece.tracks[i].level_max - piece.tracks[i].level_min + 1,
        ))
    });
    if size > LEVEL_CANDIDATE_LIMIT {
        return Err(SolveError::InstanceTooLarge {
            size,
            limit: LEVEL_CANDIDATE_LIMIT,
        });
    }

    let mut state = reference.clone();
    for (t, l) in &pins.assignments {
        state.level[t.index()] = *l;
    }
    for &i in &free {
        state.level[i] = piece.tracks[i].level_min;
    }

    // Odometer over `free`, last track fastest, so candidates arrive in
    // ascending lexicographic order and the first at the best cost wins.
    let mut best: Option<(u64, MixState)> = None;
    loop {
        if mixing::is_level_feasible(piece, &state) {
            let d = mixing::distance(&state, reference, pins);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, state.clone()));
            }
        }
        let mut k = free.len();
        loop {
            if k == 0 {
                return best
                    .map(|(_, s)| mixing::solution_from(s, reference, pins))
                    .ok_or(SolveError::Infeasible);
            }
            k -= 1;
            let i = free[k];
            if state.level[i] < piece.tracks[i].level_max {
                state.level[i] += 1;
                break;
            }
            state.level[i] = piece.tracks[i].level_min;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, D1, D2, G1, G2, P2};
    use crate::model::{GroupNode, MixConstraint, Track};

    #[test]
    fn worked_selection_examples() {
        let c = fixtures::three_instruments().selection_constraints;
        let on = |ts: &[usize]| SelectionState::with_active(9, ts.iter().copied());
        let sol = oracle_solve_selection(
            &c,
            &on(&[P2, D1]),
            &PinnedSelection::single(TrackId::from(G1), true),
        )
        .unwrap();
        assert_eq!(sol.changed, vec![(TrackId::from(P2), false)]);
        let sol = oracle_solve_selection(
            &c,
            &on(&[D2]),
            &PinnedSelection::single(TrackId::from(G2), true),
        )
        .unwrap();
        assert_eq!(sol.changed, vec![(TrackId::from(D1), true)]);
        let sol = oracle_solve_selection(
            &c,
            &on(&[D1]),
            &PinnedSelection::single(TrackId::from(D1), false),
        )
        .unwrap();
        assert_eq!(sol.changed, vec![(TrackId::from(D2), true)]);
    }

    #[test]
    fn pin_only_change() {
        let sol = oracle_solve_selection(
            &[],
            &SelectionState::all_off(3),
            &PinnedSelection::single(TrackId(0), true),
        )
        .unwrap();
        assert_eq!(sol.state, SelectionState::with_active(3, [0]));
        assert!(sol.changed.is_empty());
    }

    #[test]
    fn single_exclusion() {
        let c = vec![SelectionConstraint::exclusion(0, 1)];
        let sol = oracle_solve_selection(
            &c,
            &SelectionState::with_active(2, [1]),
            &PinnedSelection::single(TrackId(0), true),
        )
        .unwrap();
        assert_eq!(sol.state, SelectionState::with_active(2, [0]));
    }

    #[test]
    fn too_many_tracks() {
        let err = oracle_solve_selection(
            &[],
            &SelectionState::all_off(21),
            &PinnedSelection::single(TrackId(0), true),
        )
        .unwrap_err();
        assert!(matches!(err, SolveError::InstanceTooLarge { .. }));
    }

    fn pair(constraint: MixConstraint, b_max: u32) -> Piece {
        Piece {
            title: "t".into(),
            sample_rate: 8000,
            tracks: vec![
                Track::new("A", true, 0),
                Track::new("B", true, 0).with_bounds(0, b_max),
            ],
            group_tree: GroupNode::of_tracks("t", [TrackId(0), TrackId(1)]),
            selection_constraints: Vec::new(),
            mix_constraints: vec![constraint],
        }
    }

    #[test]
    fn level_examples() {
        let (a, b) = (TrackId(0), TrackId(1));
        let eq = pair(
            MixConstraint::Equality {
                members: vec![a, b],
            },
            100,
        );
        let sol = oracle_solve_levels(
            &eq,
            &MixState::new(vec![40, 40]),
            &PinnedLevel::single(a, 55),
        )
        .unwrap();
        assert_eq!(sol.state.level, vec![55, 55]);

        let ineq = pair(
            MixConstraint::Inequality {
                higher: a,
                lower: b,
            },
            100,
        );
        let sol = oracle_solve_levels(
            &ineq,
            &MixState::new(vec![60, 60]),
            &PinnedLevel::single(a, 50),
        )
        .unwrap();
        assert_eq!(sol.state.level, vec![50, 50]);

        let bal = pair(
            MixConstraint::Balance {
                members: vec![a, b],
                sum: 100,
            },
            40,
        );
        assert_eq!(
            oracle_solve_levels(
                &bal,
                &MixState::new(vec![70, 30]),
                &PinnedLevel::single(a, 50)
            ),
            Err(SolveError::Infeasible)
        );
    }

    #[test]
    fn no_constraint_pin() {
        let piece = fixtures::unconstrained(4);
        let sol = oracle_solve_levels(
            &piece,
            &MixState::new(vec![100; 4]),
            &PinnedLevel::single(TrackId(2), 5),
        )
        .unwrap();
        assert_eq!(sol.state.level, vec![100, 100, 5, 100]);
        assert!(sol.changed.is_empty());
    }

    #[test]
    fn level_enumeration_bound() {
        let mut piece = fixtures::unconstrained(5);
        piece.mix_constraints.push(MixConstraint::Equality {
            members: (0..5).map(TrackId::from).collect(),
        });
        let err = oracle_solve_levels(
            &piece,
            &MixState::new(vec![100; 5]),
            &PinnedLevel::single(TrackId(0), 100),
        )
        .unwrap_err();
        assert!(matches!(err, SolveError::InstanceTooLarge { .. }));
    }
}
