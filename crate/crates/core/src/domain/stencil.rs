//! The 16-neighbour move set used for grid curves and grid path metrics.
//!
//! In two dimensions a move is an axis step `(1,0)`, a diagonal step `(1,1)`
//! or a knight step `(2,1)` (all sign and axis permutations). In one dimension
//! only the two axis steps exist. Path lengths are tracked as integer counts
//! per move kind so that a length is an exact function of the move multiset.

use std::f64::consts::SQRT_2;

/// `sqrt(5)`, the length of a knight step in cell units.
pub const SQRT_5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Axis = 0,
    Diagonal = 1,
    Knight = 2,
}

impl MoveKind {
    /// Length of the move in cell units.
    pub fn unit_length(self) -> f64 {
        match self {
            MoveKind::Axis => 1.0,
            MoveKind::Diagonal => SQRT_2,
            MoveKind::Knight => SQRT_5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub di: i64,
    pub dj: i64,
    pub kind: MoveKind,
}

const fn mv(di: i64, dj: i64, kind: MoveKind) -> Move {
    Move { di, dj, kind }
}

static MOVES_1D: [Move; 2] = [mv(1, 0, MoveKind::Axis), mv(-1, 0, MoveKind::Axis)];

static MOVES_2D: [Move; 16] = [
    mv(1, 0, MoveKind::Axis),
    mv(-1, 0, MoveKind::Axis),
    mv(0, 1, MoveKind::Axis),
    mv(0, -1, MoveKind::Axis),
    mv(1, 1, MoveKind::Diagonal),
    mv(1, -1, MoveKind::Diagonal),
    mv(-1, 1, MoveKind::Diagonal),
    mv(-1, -1, MoveKind::Diagonal),
    mv(2, 1, MoveKind::Knight),
    mv(2, -1, MoveKind::Knight),
    mv(-2, 1, MoveKind::Knight),
    mv(-2, -1, MoveKind::Knight),
    mv(1, 2, MoveKind::Knight),
    mv(1, -2, MoveKind::Knight),
    mv(-1, 2, MoveKind::Knight),
    mv(-1, -2, MoveKind::Knight),
];

/// The move set for a grid of the given dimension (1 or 2).
pub fn moves(dim: usize) -> &'static [Move] {
    if dim == 1 {
        &MOVES_1D
    } else {
        &MOVES_2D
    }
}

/// Longest single move, in cell units.
pub fn reach(dim: usize) -> f64 {
    if dim == 1 {
        1.0
    } else {
        SQRT_5
    }
}

/// Move counts `[axis, diagonal, knight]` of a grid path.
pub type MoveCounts = [u32; 3];

/// Canonical length, in cell units, of a path with the given move counts.
#[inline]
pub fn units_length(counts: MoveCounts) -> f64 {
    counts[0] as f64 + counts[1] as f64 * SQRT_2 + counts[2] as f64 * SQRT_5
}

#[inline]
pub fn add_move(mut counts: MoveCounts, kind: MoveKind) -> MoveCounts {
    counts[kind as usize] += 1;
    counts
}

/// Worst-case ratio of the 16-neighbour path metric to the Euclidean metric.
///
/// Attained halfway between the axis and knight directions, which are
/// `atan(1/2)` apart.
pub fn chamfer_max_ratio() -> f64 {
    1.0 / (0.5f64.atan() / 2.0).cos()
}
