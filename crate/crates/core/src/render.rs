//! Offline mixdown of stems under a timeline of session states.
//!
//! For frame `f`, the output is the hard-clamped sum over tracks active at
//! `f` of `round_half_away_from_zero(sample * level / 100)`, where the state
//! at `f` is the latest timeline entry at or before `f`. All arithmetic is
//! integer, so renders are bit-reproducible.

use num_rational::Ratio;
use thiserror::Error;

use crate::mixing::is_level_feasible;
use crate::model::{MixState, Piece, SelectionState, LEVEL_CEILING};
use crate::selection::is_feasible;
use crate::wav::PcmBuffer;

/// Linear amplitude factor for a level: `level / 100`.
pub fn gain_of(level: u32) -> Ratio<u32> {
    debug_assert!(level <= LEVEL_CEILING);
    Ratio::new(level, LEVEL_CEILING)
}

/// `sample * gain`, rounded half away from zero.
pub fn apply_gain(sample: i16, gain: Ratio<u32>) -> i32 {
    let num = i64::from(sample) * i64::from(*gain.numer());
    let den = i64::from(*gain.denom());
    let magnitude = (2 * num.abs() + den) / (2 * den);
    (num.signum() * magnitude) as i32
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimelineEntry {
    pub frame: u64,
    pub selection: SelectionState,
    pub mix: MixState,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateTimeline {
    pub entries: Vec<TimelineEntry>,
}

impl StateTimeline {
    /// A timeline holding one state from frame 0 on.
    pub fn constant(selection: SelectionState, mix: MixState) -> Self {
        Self {
            entries: vec![TimelineEntry {
                frame: 0,
                selection,
                mix,
            }],
        }
    }

    pub fn push(&mut self, frame: u64, selection: SelectionState, mix: MixState) {
        self.entries.push(TimelineEntry {
            frame,
            selection,
            mix,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("timeline is empty")]
    EmptyTimeline,
    #[error("timeline must start at frame 0, starts at {0}")]
    TimelineStart(u64),
    #[error("timeline entry {0} does not come strictly after its predecessor")]
    TimelineOrder(usize),
    #[error("timeline entry {0} is not a feasible state for this piece")]
    InfeasibleState(usize),
    #[error("stem {index} is {found} Hz, piece is {expected} Hz")]
    SampleRateMismatch {
        index: usize,
        found: u32,
        expected: u32,
    },
    #[error("{found} stems for {expected} tracks")]
    StemCount { expected: usize, found: usize },
}

fn check_timeline(piece: &Piece, timeline: &StateTimeline) -> Result<(), RenderError> {
    let first = timeline.entries.first().ok_or(RenderError::EmptyTimeline)?;
    if first.frame != 0 {
        return Err(RenderError::TimelineStart(first.frame));
    }
    for (i, e) in timeline.entries.iter().enumerate() {
        if i > 0 && e.frame <= timeline.entries[i - 1].frame {
            return Err(RenderError::TimelineOrder(i));
        }
        if e.selection.len() != piece.tracks.len()
            || !is_feasible(&piece.selection_constraints, &e.selection)
            || !is_level_feasible(piece, &e.mix)
        {
            return Err(RenderError::InfeasibleState(i));
        }
    }
    Ok(())
}

pub fn render(
    piece: &Piece,
    stems: &[PcmBuffer],
    timeline: &StateTimeline,
    length_frames: usize,
) -> Result<PcmBuffer, RenderError> {
    if stems.len() != piece.tracks.len() {
        return Err(RenderError::StemCount {
            expected: piece.tracks.len(),
            found: stems.len(),
        });
    }
    if let Some((index, s)) = stems
        .iter()
        .enumerate()
        .find(|(_, s)| s.sample_rate != piece.sample_rate)
    {
        return Err(RenderError::SampleRateMismatch {
            index,
            found: s.sample_rate,
            expected: piece.sample_rate,
        });
    }
    check_timeline(piece, timeline)?;

    let mut acc = vec![0i32; length_frames];
    for (seg, entry) in timeline.entries.iter().enumerate() {
        let start = usize::try_from(entry.frame)
            .unwrap_or(usize::MAX)
            .min(length_frames);
        let end = timeline.entries.get(seg + 1).map_or(length_frames, |next| {
            usize::try_from(next.frame)
                .unwrap_or(usize::MAX)
                .min(length_frames)
        });
        for (t, stem) in stems.iter().enumerate() {
            if !entry.selection.active[t] {
                continue;
            }
            let gain = gain_of(entry.mix.level[t]);
            let stop = end.min(stem.samples.len()).max(start);
            for (out, &x) in acc[start..stop].iter_mut().zip(&stem.samples[start..stop]) {
                *out += apply_gain(x, gain);
            }
        }
    }
    let samples = acc
        .into_iter()
        .map(|s| s.clamp(i32::from(i16::MIN), i32::from(i16::MAX)) as i16)
        .collect();
    Ok(PcmBuffer::new(samples, piece.sample_rate))
}
