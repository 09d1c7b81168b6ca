//! Seeded generators of random instances whose reference state is feasible
//! by construction.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use slax_core::mixing::PinnedLevel;
use slax_core::selection::{operand_active, PinnedSelection};
use slax_core::wav::PcmBuffer;
use slax_core::{
    ConstraintOperand, GroupChild, GroupNode, MixConstraint, MixState, Piece, SelectionConstraint,
    SelectionState, Track, TrackId,
};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn operand(rng: &mut TestRng, n: usize, m: usize, ref_prob: f64) -> ConstraintOperand {
    if m > 0 && rng.gen_bool(ref_prob) {
        ConstraintOperand::Constraint(rng.gen_range(0..m))
    } else {
        ConstraintOperand::track(rng.gen_range(0..n))
    }
}

/// `m` selection constraints over `n` tracks, all satisfied by `reference`.
/// Roughly a quarter of operands point at other constraints (self and
/// cyclic references included).
pub fn selection_constraints(
    rng: &mut TestRng,
    n: usize,
    m: usize,
    reference: &SelectionState,
) -> Vec<SelectionConstraint> {
    // Operand activity depends only on the reference graph, so shapes are
    // drawn first and kinds/bounds fixed up afterwards.
    let mut constraints: Vec<SelectionConstraint> = (0..m)
        .map(|_| match rng.gen_range(0..3) {
            0 => SelectionConstraint::Exclusion {
                a: operand(rng, n, m, 0.25),
                b: operand(rng, n, m, 0.25),
            },
            1 => SelectionConstraint::Implication {
                antecedent: operand(rng, n, m, 0.25),
                consequent: operand(rng, n, m, 0.25),
            },
            _ => {
                let k = rng.gen_range(1..=4);
                SelectionConstraint::GroupCardinality {
                    members: (0..k).map(|_| operand(rng, n, m, 0.25)).collect(),
                    min: 0,
                    max: k as u32,
                }
            }
        })
        .collect();
    let graph = constraints.clone();
    let active = |op: &ConstraintOperand| operand_active(*op, reference, &graph);
    for c in &mut constraints {
        *c = match c.clone() {
            SelectionConstraint::Exclusion { a, b } if active(&a) && active(&b) => {
                SelectionConstraint::Implication {
                    antecedent: a,
                    consequent: b,
                }
            }
            SelectionConstraint::Implication {
                antecedent,
                consequent,
            } if active(&antecedent) && !active(&consequent) => SelectionConstraint::Exclusion {
                a: antecedent,
                b: consequent,
            },
            SelectionConstraint::GroupCardinality { members, .. } => {
                let on = members.iter().filter(|m| active(m)).count() as u32;
                let min = rng.gen_range(0..=on);
                let max = rng.gen_range(on..=members.len() as u32);
                SelectionConstraint::GroupCardinality { members, min, max }
            }
            other => other,
        };
    }
    constraints
}

pub fn random_selection(rng: &mut TestRng, n: usize) -> SelectionState {
    SelectionState::new((0..n).map(|_| rng.gen_bool(0.5)).collect())
}

pub fn selection_pins(rng: &mut TestRng, n: usize) -> PinnedSelection {
    let k = rng.gen_range(1..=3.min(n));
    (0..k)
        .map(|_| (TrackId::from(rng.gen_range(0..n)), rng.gen_bool(0.5)))
        .collect()
}

pub struct SelectionInstance {
    pub constraints: Vec<SelectionConstraint>,
    pub reference: SelectionState,
    pub pins: PinnedSelection,
}

pub fn selection_instance(rng: &mut TestRng) -> SelectionInstance {
    let n = rng.gen_range(1..=10);
    let m = rng.gen_range(0..=8);
    let reference = random_selection(rng, n);
    let constraints = selection_constraints(rng, n, m, &reference);
    let pins = selection_pins(rng, n);
    SelectionInstance {
        constraints,
        reference,
        pins,
    }
}

/// Mix constraints over `tracks` satisfied by `reference`, at most `max_count`.
pub fn mix_constraints(
    rng: &mut TestRng,
    tracks: &[Track],
    reference: &MixState,
    max_count: usize,
) -> Vec<MixConstraint> {
    let n = tracks.len();
    let count = rng.gen_range(0..=max_count);
    let mut out = Vec::new();
    for _ in 0..count {
        if n < 2 {
            break;
        }
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(rng);
        match rng.gen_range(0..3) {
            0 => {
                // members sharing the first pick's level
                let level = reference.level[ids[0]];
                let same: Vec<TrackId> = ids
                    .iter()
                    .filter(|&&i| reference.level[i] == level)
                    .take(3)
                    .map(|&i| TrackId::from(i))
                    .collect();
                if same.len() >= 2 {
                    out.push(MixConstraint::Equality { members: same });
                }
            }
            1 => {
                let (a, b) = (ids[0], ids[1]);
                let (higher, lower) = if reference.level[a] >= reference.level[b] {
                    (a, b)
                } else {
                    (b, a)
                };
                out.push(MixConstraint::Inequality {
                    higher: TrackId::from(higher),
                    lower: TrackId::from(lower),
                });
            }
            _ => {
                let k = rng.gen_range(2..=3.min(n));
                let members: Vec<TrackId> = ids[..k].iter().map(|&i| TrackId::from(i)).collect();
                let sum = members.iter().map(|t| reference.level[t.index()]).sum();
                out.push(MixConstraint::Balance { members, sum });
            }
        }
    }
    out
}

/// Tracks with bounds inside `0..=ceiling`, initial levels drawn from a small
/// palette so equalities are possible.
pub fn bounded_tracks(rng: &mut TestRng, n: usize, ceiling: u32) -> Vec<Track> {
    let palette: Vec<u32> = (0..3).map(|_| rng.gen_range(0..=ceiling)).collect();
    (0..n)
        .map(|i| {
            let (lo, hi) = if rng.gen_bool(0.3) {
                (0, ceiling)
            } else {
                (
                    rng.gen_range(0..=ceiling / 2),
                    rng.gen_range(ceiling / 2..=ceiling),
                )
            };
            let level = (*palette.choose(rng).unwrap()).clamp(lo, hi);
            Track::new(format!("T{i}"), rng.gen_bool(0.5), level).with_bounds(lo, hi)
        })
        .collect()
}

pub fn flat_tree(n: usize) -> GroupNode {
    GroupNode::of_tracks("root", (0..n).map(TrackId::from))
}

pub fn level_pins(rng: &mut TestRng, tracks: &[Track]) -> PinnedLevel {
    let k = rng.gen_range(1..=2.min(tracks.len()));
    (0..k)
        .map(|_| {
            let t = rng.gen_range(0..tracks.len());
            let level = rng.gen_range(tracks[t].level_min..=tracks[t].level_max);
            (TrackId::from(t), level)
        })
        .collect()
}

pub struct MixInstance {
    pub piece: Piece,
    pub reference: MixState,
    pub pins: PinnedLevel,
}

pub fn mix_instance(rng: &mut TestRng) -> MixInstance {
    let n = rng.gen_range(2..=6);
    let tracks = bounded_tracks(rng, n, 20);
    let reference = MixState::new(tracks.iter().map(|t| t.initial_level).collect());
    let mix_constraints = mix_constraints(rng, &tracks, &reference, 4);
    let pins = level_pins(rng, &tracks);
    let piece = Piece {
        title: "random".into(),
        sample_rate: 8000,
        tracks,
        group_tree: flat_tree(n),
        selection_constraints: Vec::new(),
        mix_constraints,
    };
    MixInstance {
        piece,
        reference,
        pins,
    }
}

fn random_name(rng: &mut TestRng) -> String {
    const PIECES: [&str; 8] = ["Gtr", "Pno", "Drm", "voix ", "é", "\"q\"", "\\", "♪"];
    (0..rng.gen_range(1..=3))
        .map(|_| *PIECES.choose(rng).unwrap())
        .collect()
}

fn random_tree(rng: &mut TestRng, n: usize) -> GroupNode {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let mut root = GroupNode::new(random_name(rng), Vec::new());
    let mut groups: Vec<GroupNode> = Vec::new();
    for id in ids {
        if rng.gen_bool(0.3) || groups.is_empty() {
            groups.push(GroupNode::new(random_name(rng), Vec::new()));
        }
        groups
            .last_mut()
            .unwrap()
            .children
            .push(GroupChild::Track(TrackId::from(id)));
    }
    for g in groups {
        if rng.gen_bool(0.2) {
            root.children.extend(g.children);
        } else {
            root.children.push(GroupChild::Group(g));
        }
    }
    root
}

/// A valid piece with `n` tracks, levels in `0..=100`, and both kinds of
/// constraint, its initial state feasible.
pub fn valid_piece(rng: &mut TestRng, n: usize) -> Piece {
    let mut tracks = bounded_tracks(rng, n, 100);
    for t in &mut tracks {
        t.name = random_name(rng);
    }
    let selection = SelectionState::new(tracks.iter().map(|t| t.initial_selected).collect());
    let mix = MixState::new(tracks.iter().map(|t| t.initial_level).collect());
    let m = rng.gen_range(0..=6);
    let selection_constraints = selection_constraints(rng, n, m, &selection);
    let mix_constraints = mix_constraints(rng, &tracks, &mix, 4);
    let piece = Piece {
        title: random_name(rng),
        sample_rate: [8000, 22_050, 44_100][rng.gen_range(0..3)],
        group_tree: random_tree(rng, n),
        tracks,
        selection_constraints,
        mix_constraints,
    };
    let report = slax_core::validate_piece(&piece);
    assert!(
        report.is_ok(),
        "generator produced an invalid piece:\n{report}"
    );
    piece
}

pub fn random_stems(rng: &mut TestRng, piece: &Piece, max_frames: usize) -> Vec<PcmBuffer> {
    piece
        .tracks
        .iter()
        .map(|_| {
            let len = rng.gen_range(0..=max_frames);
            PcmBuffer::new((0..len).map(|_| rng.gen()).collect(), piece.sample_rate)
        })
        .collect()
}
