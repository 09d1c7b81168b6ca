//! Ready-made pieces used by tests, examples and the CLI demo.

use crate::model::{
    GroupChild, GroupNode, MixConstraint, Piece, SelectionConstraint, Track, TrackId,
};

pub const G1: usize = 0;
pub const G2: usize = 1;
pub const G3: usize = 2;
pub const P1: usize = 3;
pub const P2: usize = 4;
pub const P3: usize = 5;
pub const D1: usize = 6;
pub const D2: usize = 7;
pub const D3: usize = 8;

pub const SAMPLE_RATE: u32 = 44_100;

/// Guitar, piano and drums, three versions each, with G1 excluding P2, G2
/// implying D1, and one or two drums always playing. G1, P1 and D1 start
/// selected; every level starts at 80 within `0..=100`.
pub fn three_instruments() -> Piece {
    three_instruments_with(&[G1, P1, D1])
}

/// [`three_instruments`] with a custom initial selection.
pub fn three_instruments_with(selected: &[usize]) -> Piece {
    let names = ["G1", "G2", "G3", "P1", "P2", "P3", "D1", "D2", "D3"];
    let tracks = names
        .iter()
        .enumerate()
        .map(|(i, name)| Track::new(*name, selected.contains(&i), 80))
        .collect();
    let section = |name: &str, first: usize| {
        GroupChild::Group(GroupNode::of_tracks(
            name,
            (first..first + 3).map(TrackId::from),
        ))
    };
    Piece {
        title: "Three instruments".into(),
        sample_rate: SAMPLE_RATE,
        tracks,
        group_tree: GroupNode::new(
            "Three instruments",
            vec![
                section("Guitar", G1),
                section("Piano", P1),
                section("Drums", D1),
            ],
        ),
        selection_constraints: vec![
            SelectionConstraint::exclusion(G1, P2),
            SelectionConstraint::implication(G2, D1),
            SelectionConstraint::group([D1, D2, D3], 1, 2),
        ],
        mix_constraints: Vec::new(),
    }
}

/// [`three_instruments`] with every drum's `level_min` set to `floor`.
pub fn three_instruments_drum_floor(floor: u32) -> Piece {
    let mut piece = three_instruments();
    for t in [D1, D2, D3] {
        piece.tracks[t].level_min = floor;
    }
    piece
}

/// Two tracks A and B whose levels always total 100, starting at 70/30.
pub fn balanced_pair() -> Piece {
    Piece {
        title: "Balanced pair".into(),
        sample_rate: SAMPLE_RATE,
        tracks: vec![Track::new("A", true, 70), Track::new("B", true, 30)],
        group_tree: GroupNode::of_tracks("Balanced pair", [TrackId(0), TrackId(1)]),
        selection_constraints: Vec::new(),
        mix_constraints: vec![MixConstraint::Balance {
            members: vec![TrackId(0), TrackId(1)],
            sum: 100,
        }],
    }
}

/// `n` unconstrained tracks, all selected at level 100, in one flat group.
pub fn unconstrained(n: usize) -> Piece {
    Piece {
        title: "Unconstrained".into(),
        sample_rate: SAMPLE_RATE,
        tracks: (0..n)
            .map(|i| Track::new(format!("T{i}"), true, 100))
            .collect(),
        group_tree: GroupNode::of_tracks("Unconstrained", (0..n).map(TrackId::from)),
        selection_constraints: Vec::new(),
        mix_constraints: Vec::new(),
    }
}
