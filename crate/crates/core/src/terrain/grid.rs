use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Smallest admissible grid side.
pub const MIN_GRID_SIZE: usize = 4;

/// Square elevation grid over `[−1, 1]²`, stored row-major.
///
/// Node `(i, j)` sits at `x = −1 + 2j/(cols−1)`, `y = −1 + 2i/(rows−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationGrid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ElevationGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows != cols {
            return Err(Error::Grid(format!("grid must be square, got {rows}x{cols}")));
        }
        if rows < MIN_GRID_SIZE {
            return Err(Error::Grid(format!(
                "grid must be at least {MIN_GRID_SIZE}x{MIN_GRID_SIZE}, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Grid(format!("expected {} values, got {}", rows * cols, values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("non-finite value at row {}, column {}", k / cols, k % cols)));
        }
        Ok(ElevationGrid { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    /// Domain coordinates `(x, y)` of node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (-1.0 + 2.0 * j as f64 / (self.cols - 1) as f64, -1.0 + 2.0 * i as f64 / (self.rows - 1) as f64)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Parses the text grid format:
///
/// ```text
/// # optional comments
/// rows cols
/// v00 v01 ... v0(cols-1)
/// ...
/// ```
///
/// Lines starting with `#` and blank lines are skipped. Line numbers in errors
/// are 1-based.
pub fn parse_grid(text: &str) -> Result<ElevationGrid> {
    let mut lines =
        text.lines().enumerate().map(|(k, l)| (k + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::Parse { line: hline, msg: format!("header must be 'rows cols', got '{header}'") });
    }
    let parse_dim =
        |s: &str| s.parse::<usize>().map_err(|_| Error::Parse { line: hline, msg: format!("invalid dimension '{s}'") });
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;
    if rows != cols {
        return Err(Error::Grid(format!("grid must be square, got {rows}x{cols}")));
    }
    if rows < MIN_GRID_SIZE {
        return Err(Error::Grid(format!("grid must be at least {MIN_GRID_SIZE}x{MIN_GRID_SIZE}, got {rows}x{cols}")));
    }

    let mut values = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 24));
    let mut last_line = hline;
    for r in 0..rows {
        let (ln, line) = lines.next().ok_or_else(|| Error::Parse {
            line: last_line + 1,
            msg: format!("expected {rows} data rows, found {r}"),
        })?;
        last_line = ln;
        let before = values.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse { line: ln, msg: format!("invalid number '{tok}'") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: ln, msg: format!("non-finite value '{tok}'") });
            }
            values.push(v);
        }
        let got = values.len() - before;
        if got != cols {
            return Err(Error::Parse { line: ln, msg: format!("expected {cols} values, got {got}") });
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse { line: ln, msg: "unexpected data after last row".into() });
    }
    ElevationGrid::new(rows, cols, values)
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<ElevationGrid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_grid(&text)
}

/// Serializes in the format read by [`parse_grid`]; values are written in
/// shortest round-trip form.
pub fn format_grid(grid: &ElevationGrid) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", grid.rows, grid.cols).unwrap();
    for row in grid.values.chunks(grid.cols) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_grid(grid: &ElevationGrid, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_grid(grid))?;
    Ok(())
}

/// A sum of `n_bumps` Gaussian hills and pits with random centers, widths and
/// signed heights, sampled on a `size × size` grid. Deterministic in `seed`.
pub fn synth_grid(seed: u64, size: usize, n_bumps: usize) -> Result<ElevationGrid> {
    if size < MIN_GRID_SIZE {
        return Err(Error::Grid(format!("grid must be at least {MIN_GRID_SIZE}x{MIN_GRID_SIZE}, got {size}x{size}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..n_bumps)
        .map(|_| {
            let cx = rng.random_range(-1.0..1.0);
            let cy = rng.random_range(-1.0..1.0);
            let width = rng.random_range(0.15..0.5);
            let height = rng.random_range(-1.0..1.0);
            (cx, cy, width, height)
        })
        .collect();
    let step = 2.0 / (size - 1) as f64;
    let mut values = Vec::with_capacity(size * size);
    for i in 0..size {
        let y = -1.0 + step * i as f64;
        for j in 0..size {
            let x = -1.0 + step * j as f64;
            let v: f64 = bumps
                .iter()
                .map(|&(cx, cy, w, a)| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * w * w)).exp())
                .sum();
            values.push(v);
        }
    }
    ElevationGrid::new(size, size, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_parse() {
        let g = parse_grid("4 4\n0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n").unwrap();
        assert_eq!(g.rows(), 4);
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn comments_are_skipped() {
        let g = parse_grid("# terrain\n4 4\n1 2 3 4\n# mid\n5 6 7 8\n9 10 11 12\n13 14 15 16\n").unwrap();
        assert_eq!(g.get(1, 2), 7.0);
    }

    #[test]
    fn rejects_non_square_and_small() {
        let text = "3 5\n0 0 0 0 0\n0 0 0 0 0\n0 0 0 0 0\n";
        assert!(matches!(parse_grid(text), Err(Error::Grid(_))));
        assert!(matches!(parse_grid("3 3\n0 0 0\n0 0 0\n0 0 0\n"), Err(Error::Grid(_))));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "4 4\n0 0 0 0\n0 x 0 0\n0 0 0 0\n0 0 0 0\n";
        assert_eq!(parse_grid(text).unwrap_err(), Error::Parse { line: 3, msg: "invalid number 'x'".into() });
        let text = "4 4\n0 0 0 0\n0 0 0\n0 0 0 0\n0 0 0 0\n";
        assert!(matches!(parse_grid(text), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_grid("4 4\n0 0 0 0\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_grid(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_grid("4 4\n0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 nan\n"), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn round_trip() {
        let g = synth_grid(3, 9, 4).unwrap();
        assert_eq!(parse_grid(&format_grid(&g)).unwrap(), g);
    }

    #[test]
    fn synthetic_grids() {
        let flat = synth_grid(1, 8, 0).unwrap();
        assert!(flat.values().iter().all(|&v| v == 0.0));
        assert_eq!(synth_grid(7, 122, 8).unwrap(), synth_grid(7, 122, 8).unwrap());
        let g = synth_grid(7, 122, 8).unwrap();
        let (lo, hi) = g.min_max();
        assert!(lo < hi);
        assert!(synth_grid(7, 3, 8).is_err());
    }

    #[test]
    fn node_mapping() {
        let g = synth_grid(0, 5, 0).unwrap();
        assert_eq!(g.node(0, 0), (-1.0, -1.0));
        assert_eq!(g.node(4, 0), (-1.0, 1.0));
        assert_eq!(g.node(2, 4), (1.0, 0.0));
    }
}
