//! NEWSUD direction strings and their geometry on the simple cubic lattice.
//!
//! A NEWSUD string spells out a walk on the integer grid Z^3, one unit step
//! per letter: North/South along +y/-y, East/West along +x/-x, Up/Down
//! along +z/-z. A closed walk that revisits no vertex and traverses no edge
//! twice is a self-avoiding polygon; the shortest such polygon that forms a
//! knot takes 24 steps.
//!
//! Validation never rejects a sequence: geometric defects are reported as
//! fields of a [`ValidationReport`] so that downstream consumers (entropy
//! measurement of randomised controls, for instance) can proceed on walks
//! that were never meant to be polygons.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("empty direction string")]
    Empty,
    #[error(
        "illegal character {found:?} at position {position} (expected one of N, E, W, S, U, D)"
    )]
    IllegalChar { position: usize, found: char },
}

/// Steps shorter than this cannot close into a knot.
pub const MIN_KNOT_STEPS: usize = 24;

/// One of the six axis directions of the simple cubic lattice.
///
/// Axis convention: N = +y, E = +x, U = +z. All geometric verdicts
/// (closure, self-avoidance) are invariant under any consistent relabeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    North,
    East,
    West,
    South,
    Up,
    Down,
}

impl Direction {
    /// Canonical N, E, W, S, U, D order used by file headers and
    /// distribution tables.
    pub const ALL: [Direction; 6] = [
        Direction::North,
        Direction::East,
        Direction::West,
        Direction::South,
        Direction::Up,
        Direction::Down,
    ];

    pub fn letter(self) -> char {
        match self {
            Direction::North => 'N',
            Direction::East => 'E',
            Direction::West => 'W',
            Direction::South => 'S',
            Direction::Up => 'U',
            Direction::Down => 'D',
        }
    }

    pub fn from_letter(ch: char) -> Option<Direction> {
        match ch.to_ascii_uppercase() {
            'N' => Some(Direction::North),
            'E' => Some(Direction::East),
            'W' => Some(Direction::West),
            'S' => Some(Direction::South),
            'U' => Some(Direction::Up),
            'D' => Some(Direction::Down),
            _ => None,
        }
    }

    /// Unit step vector as (x, y, z).
    pub fn step(self) -> [i64; 3] {
        match self {
            Direction::North => [0, 1, 0],
            Direction::South => [0, -1, 0],
            Direction::East => [1, 0, 0],
            Direction::West => [-1, 0, 0],
            Direction::Up => [0, 0, 1],
            Direction::Down => [0, 0, -1],
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::East => Direction::West,
            Direction::West => Direction::East,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    /// Index into [`Direction::ALL`].
    pub fn index(self) -> usize {
        match self {
            Direction::North => 0,
            Direction::East => 1,
            Direction::West => 2,
            Direction::South => 3,
            Direction::Up => 4,
            Direction::Down => 5,
        }
    }
}

/// A parsed NEWSUD string.
///
/// Parsing is case-insensitive and skips whitespace; the stored text is the
/// normalized uppercase letter sequence, so `to_string` round-trips exactly
/// through `parse`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionSequence {
    directions: Vec<Direction>,
    text: String,
}

impl DirectionSequence {
    pub fn parse(input: &str) -> Result<Self, LatticeError> {
        let mut directions = Vec::new();
        let mut text = String::new();
        for (i, ch) in input.chars().enumerate() {
            if ch.is_whitespace() {
                continue;
            }
            let dir = Direction::from_letter(ch).ok_or(LatticeError::IllegalChar {
                position: i + 1,
                found: ch,
            })?;
            directions.push(dir);
            text.push(dir.letter());
        }
        if directions.is_empty() {
            return Err(LatticeError::Empty);
        }
        Ok(DirectionSequence { directions, text })
    }

    pub fn from_directions(directions: Vec<Direction>) -> Result<Self, LatticeError> {
        if directions.is_empty() {
            return Err(LatticeError::Empty);
        }
        let text = directions.iter().map(|d| d.letter()).collect();
        Ok(DirectionSequence { directions, text })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Occurrences of each direction, in [`Direction::ALL`] order.
    pub fn letter_counts(&self) -> [usize; 6] {
        let mut counts = [0usize; 6];
        for d in &self.directions {
            counts[d.index()] += 1;
        }
        counts
    }

    /// Cyclic shift of the letter sequence by `k` positions.
    pub fn rotate_left(&self, k: usize) -> DirectionSequence {
        let n = self.directions.len();
        let k = k % n;
        let mut dirs = Vec::with_capacity(n);
        dirs.extend_from_slice(&self.directions[k..]);
        dirs.extend_from_slice(&self.directions[..k]);
        DirectionSequence::from_directions(dirs).expect("non-empty")
    }
}

impl fmt::Display for DirectionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl std::str::FromStr for DirectionSequence {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DirectionSequence::parse(s)
    }
}

/// Geometric verdict on a direction sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Number of steps.
    pub length: usize,
    /// Whether the walk returns to its start.
    pub closed: bool,
    /// End vertex minus start vertex.
    pub displacement: [i64; 3],
    /// No repeated vertex (other than the shared start/end of a closed
    /// walk) and no lattice edge traversed twice in either direction.
    pub self_avoiding: bool,
    /// Vertex indices `(i, j)` of the first coincident pair, if any.
    pub first_vertex_collision: Option<(usize, usize)>,
    /// Step indices `(i, j)` of the first repeated undirected edge, if any.
    pub repeated_edge: Option<(usize, usize)>,
    /// Whether the walk is long enough to close into a knot (>= 24 steps).
    pub meets_min_knot_length: bool,
}

/// Vertices visited by the walk, starting from the origin; `n+1` entries
/// for an `n`-step sequence.
pub fn path_vertices(seq: &DirectionSequence) -> Vec<[i64; 3]> {
    let mut vertices = Vec::with_capacity(seq.len() + 1);
    let mut pos = [0i64; 3];
    vertices.push(pos);
    for dir in seq.directions() {
        let step = dir.step();
        pos = [pos[0] + step[0], pos[1] + step[1], pos[2] + step[2]];
        vertices.push(pos);
    }
    vertices
}

/// Full geometric report on a sequence. Defects are report fields, never
/// errors.
pub fn validate_polygon(seq: &DirectionSequence) -> ValidationReport {
    let vertices = path_vertices(seq);
    let n = seq.len();
    let displacement = vertices[n];
    let closed = displacement == [0, 0, 0];

    let mut first_vertex_collision = None;
    let mut seen: HashMap<[i64; 3], usize> = HashMap::with_capacity(n + 1);
    for (i, v) in vertices.iter().enumerate() {
        match seen.get(v) {
            Some(&j) if j == 0 && i == n && closed => {} // shared start/end
            Some(&j) => {
                first_vertex_collision = Some((j, i));
                break;
            }
            None => {
                seen.insert(*v, i);
            }
        }
    }

    let mut repeated_edge = None;
    let mut edges: HashMap<([i64; 3], [i64; 3]), usize> = HashMap::with_capacity(n);
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[i + 1]);
        let key = if a <= b { (a, b) } else { (b, a) };
        match edges.get(&key) {
            Some(&j) => {
                repeated_edge = Some((j, i));
                break;
            }
            None => {
                edges.insert(key, i);
            }
        }
    }

    ValidationReport {
        length: n,
        closed,
        displacement,
        self_avoiding: first_vertex_collision.is_none() && repeated_edge.is_none(),
        first_vertex_collision,
        repeated_edge,
        meets_min_knot_length: n >= MIN_KNOT_STEPS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // the 23-letter trefoil print with the leading step dropped
    const SHORT_TREFOIL: &str = "DDDEEUUSWWNNEEDSSSUUNNW";

    #[test]
    fn parse_examples() {
        let seq = DirectionSequence::parse("DEUW").unwrap();
        assert_eq!(
            seq.directions(),
            &[
                Direction::Down,
                Direction::East,
                Direction::Up,
                Direction::West
            ]
        );
        assert_eq!(DirectionSequence::parse(SHORT_TREFOIL).unwrap().len(), 23);
        assert_eq!(
            DirectionSequence::parse("DEXW"),
            Err(LatticeError::IllegalChar {
                position: 3,
                found: 'X'
            })
        );
        assert_eq!(DirectionSequence::parse("   "), Err(LatticeError::Empty));
    }

    #[test]
    fn parse_normalizes_case_and_whitespace() {
        let seq = DirectionSequence::parse(" de uw\n").unwrap();
        assert_eq!(seq.text(), "DEUW");
        assert_eq!(DirectionSequence::parse(seq.text()).unwrap(), seq);
    }

    #[test]
    fn vertices_examples() {
        let seq = DirectionSequence::parse("DEUW").unwrap();
        assert_eq!(
            path_vertices(&seq),
            vec![[0, 0, 0], [0, 0, -1], [1, 0, -1], [1, 0, 0], [0, 0, 0]]
        );
        let seq = DirectionSequence::parse("N").unwrap();
        assert_eq!(path_vertices(&seq), vec![[0, 0, 0], [0, 1, 0]]);
    }

    #[test]
    fn unknot_is_a_valid_polygon() {
        let report = validate_polygon(&DirectionSequence::parse("DEUW").unwrap());
        assert!(report.closed);
        assert!(report.self_avoiding);
        assert!(!report.meets_min_knot_length);
        assert_eq!(report.displacement, [0, 0, 0]);
    }

    #[test]
    fn short_trefoil_print_fails_closure() {
        let seq = DirectionSequence::parse(SHORT_TREFOIL).unwrap();
        let counts = seq.letter_counts();
        // N, E, W, S, U, D
        assert_eq!(counts, [4, 4, 3, 4, 4, 4]);
        let report = validate_polygon(&seq);
        assert!(!report.closed);
        assert_eq!(report.displacement, [1, 0, 0]);
    }

    #[test]
    fn back_and_forth_walk_repeats_an_edge() {
        let report = validate_polygon(&DirectionSequence::parse("NS").unwrap());
        assert!(report.closed);
        assert!(!report.self_avoiding);
        assert_eq!(report.repeated_edge, Some((0, 1)));
        assert_eq!(report.first_vertex_collision, None);
    }

    #[test]
    fn open_walk_revisiting_a_vertex_is_flagged() {
        // NESW closes at step 4, then the walk passes through the origin again
        let report = validate_polygon(&DirectionSequence::parse("NESWWNES").unwrap());
        assert!(report.first_vertex_collision.is_some());
        assert!(!report.self_avoiding);
    }

    fn arb_letters() -> impl Strategy<Value = String> {
        proptest::collection::vec(
            proptest::sample::select(vec!['N', 'E', 'W', 'S', 'U', 'D']),
            1..60,
        )
        .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn closure_iff_balanced_letter_counts(text in arb_letters()) {
            let seq = DirectionSequence::parse(&text).unwrap();
            let report = validate_polygon(&seq);
            let [n, e, w, s, u, d] = seq.letter_counts();
            prop_assert_eq!(report.closed, n == s && e == w && u == d);
        }

        #[test]
        fn vertex_count_and_unit_steps(text in arb_letters()) {
            let seq = DirectionSequence::parse(&text).unwrap();
            let vertices = path_vertices(&seq);
            prop_assert_eq!(vertices.len(), seq.len() + 1);
            for pair in vertices.windows(2) {
                let dist: i64 = (0..3).map(|a| (pair[1][a] - pair[0][a]).abs()).sum();
                prop_assert_eq!(dist, 1);
            }
        }

        #[test]
        fn rotating_a_closed_polygon_preserves_verdicts(text in arb_letters(), k in 0usize..60) {
            let seq = DirectionSequence::parse(&text).unwrap();
            let report = validate_polygon(&seq);
            if report.closed {
                let rotated = validate_polygon(&seq.rotate_left(k));
                prop_assert!(rotated.closed);
                prop_assert_eq!(rotated.self_avoiding, report.self_avoiding);
            }
        }
    }
}
