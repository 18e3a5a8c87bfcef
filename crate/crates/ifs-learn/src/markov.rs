//! Finite-state Markov chains: row-stochastic transition matrices, seeded
//! sampling, irreducibility, and empirical estimation from symbol sequences.
//!
//! Symbols are 1-based (`1..=k`) everywhere in the public interface.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Row-sum slack accepted on input matrices before normalization.
pub const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MarkovError {
    #[error("transition matrix is not square: row {row} has {len} entries, expected {k}")]
    NotSquare { row: usize, len: usize, k: usize },
    #[error("row {row} sums to {sum}, which deviates from 1 by more than {ROW_SUM_TOL}")]
    NotStochastic { row: usize, sum: f64 },
    #[error("entry ({row},{col}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("matrix must have at least one state")]
    Empty,
    #[error("sequence length must be at least {min}, got {got}")]
    SequenceTooShort { min: usize, got: usize },
    #[error("symbol {symbol} at position {pos} is outside the alphabet 1..={k}")]
    SymbolOutOfRange { symbol: usize, pos: usize, k: usize },
    #[error("states {missing:?} never occur in the sequence; not enough data to estimate a {k}-state matrix")]
    MissingStates { missing: Vec<usize>, k: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Row-stochastic `k x k` transition matrix.
///
/// Rows are normalized on construction, so stored row sums are 1 up to
/// floating-point roundoff; inputs whose row sums deviate from 1 by more
/// than [`ROW_SUM_TOL`] are rejected instead of silently rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    k: usize,
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, MarkovError> {
        let k = rows.len();
        if k == 0 {
            return Err(MarkovError::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(MarkovError::NotSquare {
                    row: i + 1,
                    len: row.len(),
                    k,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(0.0..=1.0 + ROW_SUM_TOL).contains(&v) {
                    return Err(MarkovError::EntryOutOfRange {
                        row: i + 1,
                        col: j + 1,
                        value: v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(MarkovError::NotStochastic { row: i + 1, sum });
            }
        }
        let rows = rows
            .into_iter()
            .map(|row| {
                let sum: f64 = row.iter().sum();
                row.into_iter().map(|v| v / sum).collect()
            })
            .collect();
        Ok(Self { k, rows })
    }

    /// Uniform chain on `k` states: every entry `1/k`.
    pub fn uniform(k: usize) -> Result<Self, MarkovError> {
        if k == 0 {
            return Err(MarkovError::Empty);
        }
        Self::new(vec![vec![1.0 / k as f64; k]; k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Probability of moving from state `a` to state `b` (1-based).
    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.rows[a - 1][b - 1]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Largest absolute entrywise difference to another matrix of the same size.
    pub fn max_entry_distance(&self, other: &TransitionMatrix) -> f64 {
        assert_eq!(self.k, other.k, "matrices must have the same state count");
        let mut worst = 0.0f64;
        for i in 0..self.k {
            for j in 0..self.k {
                worst = worst.max((self.rows[i][j] - other.rows[i][j]).abs());
            }
        }
        worst
    }

    /// Plain-text form: first line `k`, then `k` whitespace-separated rows.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.k);
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, MarkovError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let k: usize = lines
            .next()
            .ok_or_else(|| MarkovError::Parse("empty input".into()))?
            .trim()
            .parse()
            .map_err(|e| MarkovError::Parse(format!("bad state count: {e}")))?;
        let mut rows = Vec::with_capacity(k);
        for _ in 0..k {
            let line = lines
                .next()
                .ok_or_else(|| MarkovError::Parse(format!("expected {k} rows")))?;
            let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            rows.push(row.map_err(|e| MarkovError::Parse(format!("bad entry: {e}")))?);
        }
        Self::new(rows)
    }
}

/// Realized driving sequence over the alphabet `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    k: usize,
    symbols: Vec<usize>,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<usize>, k: usize) -> Result<Self, MarkovError> {
        for (pos, &s) in symbols.iter().enumerate() {
            if s < 1 || s > k {
                return Err(MarkovError::SymbolOutOfRange { symbol: s, pos, k });
            }
        }
        Ok(Self { k, symbols })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// One integer per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.symbols {
            out.push_str(&format!("{s}\n"));
        }
        out
    }

    pub fn from_text(text: &str, k: usize) -> Result<Self, MarkovError> {
        let symbols: Result<Vec<usize>, _> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse())
            .collect();
        let symbols = symbols.map_err(|e| MarkovError::Parse(format!("bad symbol: {e}")))?;
        Self::new(symbols, k)
    }
}

/// Draw a length-`n` sample path. The RNG is ChaCha8 seeded with `seed`, so
/// identical `(matrix, n, seed, initial)` always reproduce the same sequence.
/// When `initial` is absent the start state is drawn uniformly.
pub fn sample_chain(
    matrix: &TransitionMatrix,
    n: usize,
    seed: u64,
    initial: Option<usize>,
) -> Result<SymbolSequence, MarkovError> {
    if n == 0 {
        return Err(MarkovError::SequenceTooShort { min: 1, got: 0 });
    }
    let k = matrix.k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = match initial {
        Some(s) => {
            if s < 1 || s > k {
                return Err(MarkovError::SymbolOutOfRange { symbol: s, pos: 0, k });
            }
            s
        }
        None => rng.gen_range(1..=k),
    };
    let mut symbols = Vec::with_capacity(n);
    symbols.push(state);
    for _ in 1..n {
        state = next_state(matrix, state, rng.gen::<f64>());
        symbols.push(state);
    }
    Ok(SymbolSequence { k, symbols })
}

fn next_state(matrix: &TransitionMatrix, state: usize, u: f64) -> usize {
    let row = &matrix.rows[state - 1];
    let mut acc = 0.0;
    for (j, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j + 1;
        }
    }
    // roundoff pushed the cumulative sum slightly below u: take the last
    // positive entry
    row.iter().rposition(|&p| p > 0.0).map(|j| j + 1).unwrap_or(state)
}

/// True iff the digraph of positive entries is strongly connected.
pub fn is_irreducible(matrix: &TransitionMatrix) -> bool {
    let k = matrix.k();
    let forward = |s: usize| -> Vec<usize> {
        (0..k).filter(|&t| matrix.rows[s][t] > 0.0).collect()
    };
    let backward = |s: usize| -> Vec<usize> {
        (0..k).filter(|&t| matrix.rows[t][s] > 0.0).collect()
    };
    reaches_all(k, forward) && reaches_all(k, backward)
}

fn reaches_all(k: usize, neighbors: impl Fn(usize) -> Vec<usize>) -> bool {
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(s) = stack.pop() {
        for t in neighbors(s) {
            if !seen[t] {
                seen[t] = true;
                count += 1;
                stack.push(t);
            }
        }
    }
    count == k
}

/// Result of [`estimate_transition_matrix`]: the estimate plus warnings for
/// rows that were never observed as a source state and were set uniform.
#[derive(Debug, Clone)]
pub struct EstimatedMatrix {
    pub matrix: TransitionMatrix,
    pub warnings: Vec<String>,
}

/// Empirical transition matrix: entry `(a,b)` is `count(a->b) / count(a as a
/// non-final symbol)`. Rows with no outgoing observation are set uniform and
/// reported in `warnings`.
pub fn estimate_transition_matrix(
    seq: &SymbolSequence,
    k: usize,
) -> Result<EstimatedMatrix, MarkovError> {
    if seq.len() < 2 {
        return Err(MarkovError::SequenceTooShort { min: 2, got: seq.len() });
    }
    let mut present = vec![false; k];
    for (pos, &s) in seq.symbols.iter().enumerate() {
        if s < 1 || s > k {
            return Err(MarkovError::SymbolOutOfRange { symbol: s, pos, k });
        }
        present[s - 1] = true;
    }
    let missing: Vec<usize> = (1..=k).filter(|&s| !present[s - 1]).collect();
    if !missing.is_empty() {
        return Err(MarkovError::MissingStates { missing, k });
    }
    let mut counts = vec![vec![0u64; k]; k];
    for pair in seq.symbols.windows(2) {
        counts[pair[0] - 1][pair[1] - 1] += 1;
    }
    let mut warnings = Vec::new();
    let rows: Vec<Vec<f64>> = counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                warnings.push(format!(
                    "state {} has no observed outgoing transition; row set uniform",
                    i + 1
                ));
                vec![1.0 / k as f64; k]
            } else {
                row.iter().map(|&c| c as f64 / total as f64).collect()
            }
        })
        .collect();
    Ok(EstimatedMatrix {
        matrix: TransitionMatrix::new(rows)?,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reachability oracle: Floyd–Warshall transitive closure.
    fn strongly_connected_oracle(pattern: &[Vec<bool>]) -> bool {
        let k = pattern.len();
        let mut reach = pattern.to_vec();
        for v in 0..k {
            reach[v][v] = true;
        }
        for via in 0..k {
            for a in 0..k {
                for b in 0..k {
                    reach[a][b] = reach[a][b] || (reach[a][via] && reach[via][b]);
                }
            }
        }
        (0..k).all(|a| (0..k).all(|b| reach[a][b]))
    }

    fn matrix_from_pattern(pattern: &[Vec<bool>]) -> Option<TransitionMatrix> {
        let k = pattern.len();
        let mut rows = Vec::with_capacity(k);
        for row in pattern {
            let deg = row.iter().filter(|&&e| e).count();
            if deg == 0 {
                return None; // not stochastic, skip
            }
            rows.push(
                row.iter()
                    .map(|&e| if e { 1.0 / deg as f64 } else { 0.0 })
                    .collect(),
            );
        }
        Some(TransitionMatrix::new(rows).unwrap())
    }

    #[test]
    fn single_state_chain_is_constant() {
        let p = TransitionMatrix::new(vec![vec![1.0]]).unwrap();
        let seq = sample_chain(&p, 5, 0, None).unwrap();
        assert_eq!(seq.symbols(), &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn deterministic_alternation() {
        let p = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let seq = sample_chain(&p, 4, 42, Some(1)).unwrap();
        assert_eq!(seq.symbols(), &[1, 2, 1, 2]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = TransitionMatrix::uniform(3).unwrap();
        let a = sample_chain(&p, 500, 7, None).unwrap();
        let b = sample_chain(&p, 500, 7, None).unwrap();
        assert_eq!(a, b);
        let c = sample_chain(&p, 500, 8, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_three_state_pair_frequencies() {
        let p = TransitionMatrix::uniform(3).unwrap();
        let seq = sample_chain(&p, 2200, 11, None).unwrap();
        let mut counts = [[0u64; 3]; 3];
        for w in seq.symbols().windows(2) {
            counts[w[0] - 1][w[1] - 1] += 1;
        }
        for row in &counts {
            let total: u64 = row.iter().sum();
            for &c in row {
                let freq = c as f64 / total as f64;
                assert!(
                    (freq - 1.0 / 3.0).abs() < 0.05,
                    "pair frequency {freq} deviates from 1/3 by 0.05 or more"
                );
            }
        }
    }

    #[test]
    fn sample_respects_zero_entries() {
        let p = TransitionMatrix::new(vec![
            vec![0.0, 0.5, 0.5],
            vec![1.0, 0.0, 0.0],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        let seq = sample_chain(&p, 5000, 3, None).unwrap();
        for w in seq.symbols().windows(2) {
            assert!(p.prob(w[0], w[1]) > 0.0, "forbidden pair {:?} sampled", w);
        }
    }

    #[test]
    fn rejects_zero_length_and_non_stochastic() {
        let p = TransitionMatrix::uniform(2).unwrap();
        assert!(matches!(
            sample_chain(&p, 0, 0, None),
            Err(MarkovError::SequenceTooShort { .. })
        ));
        assert!(matches!(
            TransitionMatrix::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]),
            Err(MarkovError::NotStochastic { row: 1, .. })
        ));
        assert!(matches!(
            TransitionMatrix::new(vec![vec![1.5, -0.5], vec![0.5, 0.5]]),
            Err(MarkovError::EntryOutOfRange { .. })
        ));
    }

    #[test]
    fn irreducibility_simple_cases() {
        let cycle = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(is_irreducible(&cycle));
        let absorbing =
            TransitionMatrix::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert!(!is_irreducible(&absorbing));
    }

    #[test]
    fn irreducibility_matches_reachability_oracle_exhaustively() {
        // all positive/zero patterns with non-empty rows, k <= 3, plus a
        // random slice of k = 4
        for k in 1..=3usize {
            let cells = k * k;
            for mask in 0..(1u32 << cells) {
                let pattern: Vec<Vec<bool>> = (0..k)
                    .map(|i| (0..k).map(|j| mask >> (i * k + j) & 1 == 1).collect())
                    .collect();
                if let Some(p) = matrix_from_pattern(&pattern) {
                    assert_eq!(
                        is_irreducible(&p),
                        strongly_connected_oracle(&pattern),
                        "pattern {pattern:?}"
                    );
                }
            }
        }
        use rand::prelude::*;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..2000 {
            let k = 4;
            let pattern: Vec<Vec<bool>> =
                (0..k).map(|_| (0..k).map(|_| rng.gen_bool(0.4)).collect()).collect();
            if let Some(p) = matrix_from_pattern(&pattern) {
                assert_eq!(is_irreducible(&p), strongly_connected_oracle(&pattern));
            }
        }
    }

    #[test]
    fn estimate_exact_alternation() {
        let seq = SymbolSequence::new(vec![1, 2, 1, 2, 1], 2).unwrap();
        let est = estimate_transition_matrix(&seq, 2).unwrap();
        assert_eq!(est.matrix.rows(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(est.warnings.is_empty());
    }

    #[test]
    fn estimate_single_state() {
        let seq = SymbolSequence::new(vec![1, 1, 1], 1).unwrap();
        let est = estimate_transition_matrix(&seq, 1).unwrap();
        assert_eq!(est.matrix.rows(), &[vec![1.0]]);
    }

    #[test]
    fn estimate_rejects_missing_states() {
        let seq = SymbolSequence::new(vec![1, 1, 1], 3).unwrap();
        match estimate_transition_matrix(&seq, 3) {
            Err(MarkovError::MissingStates { missing, .. }) => {
                assert_eq!(missing, vec![2, 3]);
            }
            other => panic!("expected MissingStates, got {other:?}"),
        }
    }

    #[test]
    fn estimate_flags_unobserved_rows() {
        // state 2 occurs only as the final symbol
        let seq = SymbolSequence::new(vec![1, 1, 2], 2).unwrap();
        let est = estimate_transition_matrix(&seq, 2).unwrap();
        assert_eq!(est.warnings.len(), 1);
        assert_eq!(est.matrix.rows()[1], vec![0.5, 0.5]);
    }

    #[test]
    fn estimate_recovers_generating_matrix_at_large_n() {
        let p = TransitionMatrix::new(vec![
            vec![0.1, 0.6, 0.3],
            vec![0.5, 0.25, 0.25],
            vec![0.2, 0.3, 0.5],
        ])
        .unwrap();
        let seq = sample_chain(&p, 100_000, 5, None).unwrap();
        let est = estimate_transition_matrix(&seq, 3).unwrap();
        assert!(
            est.matrix.max_entry_distance(&p) <= 0.02,
            "estimation error {} exceeds 0.02",
            est.matrix.max_entry_distance(&p)
        );
    }

    #[test]
    fn text_round_trip() {
        let p = TransitionMatrix::new(vec![
            vec![0.1, 0.9, 0.0],
            vec![0.5, 0.25, 0.25],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let back = TransitionMatrix::from_text(&p.to_text()).unwrap();
        assert_eq!(p, back);
        let seq = SymbolSequence::new(vec![3, 1, 2, 2], 3).unwrap();
        let back = SymbolSequence::from_text(&seq.to_text(), 3).unwrap();
        assert_eq!(seq, back);
    }
}
