//! Tape course as a scaled reflectance grid.
//!
//! Row 0 is the minimum-y edge of the course. Cells are half-open: a point
//! belongs to the cell `floor(coord * cells_per_meter)` on each axis, and
//! anything outside the grid reads as bare floor.

use std::fmt::Write as _;

use thiserror::Error;

pub const DEFAULT_DARK: f64 = 0.1;
pub const DEFAULT_LIGHT: f64 = 0.9;

const MAGIC: &str = "TRACK v1";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("line {line}: expected `{MAGIC}`")]
    BadMagic { line: usize },
    #[error("line {line}: malformed header: {reason}")]
    BadHeader { line: usize, reason: String },
    #[error("row length mismatch at line {line}: expected {expected} cells, found {found}")]
    RowLengthMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: unknown cell character {ch:?}")]
    UnknownCell {
        line: usize,
        column: usize,
        ch: char,
    },
    #[error("line {line}: expected {expected} grid rows, found {found}")]
    RowCountMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid track: {0}")]
    Invalid(String),
}

/// Immutable reflectance grid with physical scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    width_cells: usize,
    height_cells: usize,
    cells_per_meter: f64,
    reflectance: Vec<f64>,
    dark_value: f64,
    light_value: f64,
}

impl Track {
    /// Builds a track from a row-major grid (row 0 = minimum y).
    pub fn from_grid(
        width_cells: usize,
        height_cells: usize,
        cells_per_meter: f64,
        reflectance: Vec<f64>,
        dark_value: f64,
        light_value: f64,
    ) -> Result<Self, TrackError> {
        if width_cells == 0 || height_cells == 0 {
            return Err(TrackError::Invalid("grid must be at least 1x1".into()));
        }
        if !(cells_per_meter.is_finite() && cells_per_meter > 0.0) {
            return Err(TrackError::Invalid(format!(
                "cells_per_meter must be positive, got {cells_per_meter}"
            )));
        }
        if reflectance.len() != width_cells * height_cells {
            return Err(TrackError::Invalid(format!(
                "grid has {} values, expected {}",
                reflectance.len(),
                width_cells * height_cells
            )));
        }
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(dark_value) || !in_unit(light_value) {
            return Err(TrackError::Invalid("dark/light values must lie in [0,1]".into()));
        }
        if let Some(bad) = reflectance.iter().find(|v| !in_unit(**v)) {
            return Err(TrackError::Invalid(format!("reflectance {bad} outside [0,1]")));
        }
        Ok(Self {
            width_cells,
            height_cells,
            cells_per_meter,
            reflectance,
            dark_value,
            light_value,
        })
    }

    /// Builds a two-tone track from a dark-cell predicate over (column, row).
    pub fn from_fn(
        width_cells: usize,
        height_cells: usize,
        cells_per_meter: f64,
        mut is_dark: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, TrackError> {
        let mut grid = Vec::with_capacity(width_cells * height_cells);
        for row in 0..height_cells {
            for col in 0..width_cells {
                grid.push(if is_dark(col, row) { DEFAULT_DARK } else { DEFAULT_LIGHT });
            }
        }
        Self::from_grid(
            width_cells,
            height_cells,
            cells_per_meter,
            grid,
            DEFAULT_DARK,
            DEFAULT_LIGHT,
        )
    }

    pub fn width_cells(&self) -> usize {
        self.width_cells
    }

    pub fn height_cells(&self) -> usize {
        self.height_cells
    }

    pub fn cells_per_meter(&self) -> f64 {
        self.cells_per_meter
    }

    pub fn dark_value(&self) -> f64 {
        self.dark_value
    }

    pub fn light_value(&self) -> f64 {
        self.light_value
    }

    /// Physical extent in meters as (width, height).
    pub fn extent(&self) -> (f64, f64) {
        (
            self.width_cells as f64 / self.cells_per_meter,
            self.height_cells as f64 / self.cells_per_meter,
        )
    }

    pub fn cell(&self, col: usize, row: usize) -> Option<f64> {
        (col < self.width_cells && row < self.height_cells)
            .then(|| self.reflectance[row * self.width_cells + col])
    }

    /// Cell index containing `p`, if it lies on the grid.
    pub fn cell_index(&self, p: Point2) -> Option<(usize, usize)> {
        let cx = (p.x * self.cells_per_meter).floor();
        let cy = (p.y * self.cells_per_meter).floor();
        if !(cx >= 0.0 && cy >= 0.0) {
            return None;
        }
        let (col, row) = (cx as usize, cy as usize);
        (col < self.width_cells && row < self.height_cells).then_some((col, row))
    }

    /// Reflectance under `p`; off-grid points see the light floor.
    pub fn sample_reflectance(&self, p: Point2) -> f64 {
        match self.cell_index(p) {
            Some((col, row)) => self.reflectance[row * self.width_cells + col],
            None => self.light_value,
        }
    }

    /// Serializes to the `TRACK v1` text format. Cells darker than the
    /// midpoint of dark and light are written as `#`.
    pub fn to_text(&self) -> String {
        let cpm = self.cells_per_meter.round() as u64;
        let mid = 0.5 * (self.dark_value + self.light_value);
        let mut out = String::with_capacity((self.width_cells + 1) * self.height_cells + 64);
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "cells_per_meter {cpm}");
        let _ = writeln!(out, "size {} {}", self.width_cells, self.height_cells);
        for row in (0..self.height_cells).rev() {
            let cells = &self.reflectance[row * self.width_cells..(row + 1) * self.width_cells];
            out.extend(cells.iter().map(|&v| if v < mid { '#' } else { '.' }));
            out.push('\n');
        }
        out
    }
}

/// Parses the `TRACK v1` text format.
pub fn load_track(text: &str) -> Result<Track, TrackError> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));

    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(TrackError::BadMagic { line: 1 }),
    }

    let (line, cpm_line) = lines.next().ok_or(TrackError::BadHeader {
        line: 2,
        reason: "missing cells_per_meter".into(),
    })?;
    let cpm: u64 = header_fields(cpm_line, "cells_per_meter", 1, line)?[0];
    if cpm == 0 {
        return Err(TrackError::BadHeader {
            line,
            reason: "cells_per_meter must be positive".into(),
        });
    }

    let (line, size_line) = lines.next().ok_or(TrackError::BadHeader {
        line: 3,
        reason: "missing size".into(),
    })?;
    let dims = header_fields(size_line, "size", 2, line)?;
    let (width, height) = (dims[0] as usize, dims[1] as usize);
    if width == 0 || height == 0 {
        return Err(TrackError::BadHeader {
            line,
            reason: "size must be at least 1x1".into(),
        });
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(height);
    let mut last_line = line;
    for (line, raw) in lines {
        last_line = line;
        if rows.len() == height {
            // only a single terminating newline may follow the grid
            if raw.is_empty() {
                continue;
            }
            return Err(TrackError::RowCountMismatch {
                line,
                expected: height,
                found: rows.len() + 1,
            });
        }
        let found = raw.chars().count();
        if found != width {
            if raw.is_empty() {
                break;
            }
            return Err(TrackError::RowLengthMismatch {
                line,
                expected: width,
                found,
            });
        }
        let mut row = Vec::with_capacity(width);
        for (i, ch) in raw.chars().enumerate() {
            row.push(match ch {
                '#' => DEFAULT_DARK,
                '.' => DEFAULT_LIGHT,
                _ => {
                    return Err(TrackError::UnknownCell {
                        line,
                        column: i + 1,
                        ch,
                    })
                }
            });
        }
        rows.push(row);
    }
    if rows.len() != height {
        return Err(TrackError::RowCountMismatch {
            line: last_line,
            expected: height,
            found: rows.len(),
        });
    }

    // first grid line is the maximum-y row
    let grid: Vec<f64> = rows.into_iter().rev().flatten().collect();
    Track::from_grid(width, height, cpm as f64, grid, DEFAULT_DARK, DEFAULT_LIGHT)
}

fn header_fields(raw: &str, key: &str, count: usize, line: usize) -> Result<Vec<u64>, TrackError> {
    let bad = |reason: String| TrackError::BadHeader { line, reason };
    let mut parts = raw.split(' ');
    if parts.next() != Some(key) {
        return Err(bad(format!("expected `{key}`")));
    }
    let values = parts
        .map(|p| {
            p.parse::<u64>()
                .map_err(|_| bad(format!("`{p}` is not a non-negative integer")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != count {
        return Err(bad(format!("`{key}` takes {count} value(s)")));
    }
    Ok(values)
}

/// Paints tape onto a blank floor. A cell turns dark when its center lies
/// inside any painted shape.
#[derive(Debug, Clone)]
pub struct TrackCanvas {
    width_cells: usize,
    height_cells: usize,
    cells_per_meter: f64,
    dark: Vec<bool>,
}

impl TrackCanvas {
    pub fn new(width_m: f64, height_m: f64, cells_per_meter: f64) -> Self {
        let width_cells = (width_m * cells_per_meter).round().max(1.0) as usize;
        let height_cells = (height_m * cells_per_meter).round().max(1.0) as usize;
        Self {
            width_cells,
            height_cells,
            cells_per_meter,
            dark: vec![false; width_cells * height_cells],
        }
    }

    fn paint(&mut self, lo: Point2, hi: Point2, inside: impl Fn(Point2) -> bool) {
        let cpm = self.cells_per_meter;
        let clamp_col = |v: f64| (v * cpm).floor().clamp(0.0, self.width_cells as f64) as usize;
        let clamp_row = |v: f64| (v * cpm).floor().clamp(0.0, self.height_cells as f64) as usize;
        let (c0, c1) = (clamp_col(lo.x), (clamp_col(hi.x) + 1).min(self.width_cells));
        let (r0, r1) = (clamp_row(lo.y), (clamp_row(hi.y) + 1).min(self.height_cells));
        for row in r0..r1 {
            for col in c0..c1 {
                let center = Point2::new((col as f64 + 0.5) / cpm, (row as f64 + 0.5) / cpm);
                if inside(center) {
                    self.dark[row * self.width_cells + col] = true;
                }
            }
        }
    }

    /// Axis-aligned filled rectangle.
    pub fn fill_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) -> &mut Self {
        let (xa, xb) = (x0.min(x1), x0.max(x1));
        let (ya, yb) = (y0.min(y1), y0.max(y1));
        self.paint(Point2::new(xa, ya), Point2::new(xb, yb), |p| {
            p.x >= xa && p.x < xb && p.y >= ya && p.y < yb
        });
        self
    }

    /// Straight tape of the given width from `a` to `b` with square ends.
    pub fn stroke_segment(&mut self, a: Point2, b: Point2, tape_width: f64) -> &mut Self {
        let half = tape_width / 2.0;
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len = dx.hypot(dy);
        if len == 0.0 {
            return self;
        }
        let (ux, uy) = (dx / len, dy / len);
        let lo = Point2::new(a.x.min(b.x) - half, a.y.min(b.y) - half);
        let hi = Point2::new(a.x.max(b.x) + half, a.y.max(b.y) + half);
        self.paint(lo, hi, |p| {
            let (px, py) = (p.x - a.x, p.y - a.y);
            let along = px * ux + py * uy;
            let across = -px * uy + py * ux;
            (0.0..=len).contains(&along) && across.abs() <= half
        });
        self
    }

    /// Circular tape arc about `center`, sweeping counterclockwise from
    /// `start_angle` by `sweep` radians (negative sweeps run clockwise).
    pub fn stroke_arc(
        &mut self,
        center: Point2,
        radius: f64,
        start_angle: f64,
        sweep: f64,
        tape_width: f64,
    ) -> &mut Self {
        use std::f64::consts::TAU;
        let half = tape_width / 2.0;
        let (from, span) = if sweep >= 0.0 {
            (start_angle, sweep)
        } else {
            (start_angle + sweep, -sweep)
        };
        let reach = radius + half;
        let lo = Point2::new(center.x - reach, center.y - reach);
        let hi = Point2::new(center.x + reach, center.y + reach);
        self.paint(lo, hi, |p| {
            let (dx, dy) = (p.x - center.x, p.y - center.y);
            if (dx.hypot(dy) - radius).abs() > half {
                return false;
            }
            let rel = (dy.atan2(dx) - from).rem_euclid(TAU);
            rel <= span || span >= TAU
        });
        self
    }

    pub fn finish(&self) -> Track {
        Track::from_fn(
            self.width_cells,
            self.height_cells,
            self.cells_per_meter,
            |col, row| self.dark[row * self.width_cells + col],
        )
        .expect("canvas dimensions are validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_text(cpm: u32, rows: &[&str]) -> String {
        let mut s = format!("TRACK v1\ncells_per_meter {cpm}\nsize {} {}\n", rows[0].len(), rows.len());
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    #[test]
    fn uniform_light_field() {
        let t = load_track(&grid_text(1000, &["...", "...", "..."])).unwrap();
        assert_eq!((t.width_cells(), t.height_cells()), (3, 3));
        for row in 0..3 {
            for col in 0..3 {
                assert_eq!(t.cell(col, row), Some(0.9));
            }
        }
    }

    #[test]
    fn middle_column_dark() {
        let t = load_track(&grid_text(1000, &[".#.", ".#.", ".#."])).unwrap();
        for row in 0..3 {
            assert_eq!(t.cell(0, row), Some(0.9));
            assert_eq!(t.cell(1, row), Some(0.1));
            assert_eq!(t.cell(2, row), Some(0.9));
        }
    }

    #[test]
    fn first_grid_line_is_max_y() {
        let t = load_track(&grid_text(10, &["#..", "...", "..."])).unwrap();
        assert_eq!(t.cell(0, 2), Some(0.1));
        assert_eq!(t.cell(0, 0), Some(0.9));
    }

    #[test]
    fn short_row_reports_line() {
        let text = "TRACK v1\ncells_per_meter 1000\nsize 4 2\n....\n...\n";
        let err = load_track(text).unwrap_err();
        assert_eq!(
            err,
            TrackError::RowLengthMismatch {
                line: 5,
                expected: 4,
                found: 3
            }
        );
        assert!(err.to_string().contains("row length mismatch at line 5"));
    }

    #[test]
    fn header_errors() {
        assert_eq!(load_track("TRACK v2\n").unwrap_err(), TrackError::BadMagic { line: 1 });
        assert!(matches!(
            load_track("TRACK v1\ncells_per_meter x\nsize 1 1\n.\n"),
            Err(TrackError::BadHeader { line: 2, .. })
        ));
        assert!(matches!(
            load_track("TRACK v1\ncells_per_meter 0\nsize 1 1\n.\n"),
            Err(TrackError::BadHeader { line: 2, .. })
        ));
        assert!(matches!(
            load_track("TRACK v1\ncells_per_meter 10\nsize 1\n.\n"),
            Err(TrackError::BadHeader { line: 3, .. })
        ));
        assert!(matches!(
            load_track("TRACK v1\ncells_per_meter 10\nsize 1 1 \n.\n"),
            Err(TrackError::BadHeader { line: 3, .. })
        ));
    }

    #[test]
    fn unknown_cell_and_row_count() {
        assert_eq!(
            load_track("TRACK v1\ncells_per_meter 10\nsize 2 1\n.x\n").unwrap_err(),
            TrackError::UnknownCell {
                line: 4,
                column: 2,
                ch: 'x'
            }
        );
        assert!(matches!(
            load_track("TRACK v1\ncells_per_meter 10\nsize 2 2\n..\n"),
            Err(TrackError::RowCountMismatch { expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            load_track("TRACK v1\ncells_per_meter 10\nsize 2 1\n..\n..\n"),
            Err(TrackError::RowCountMismatch { line: 5, .. })
        ));
        // trailing space is not a cell
        assert!(matches!(
            load_track("TRACK v1\ncells_per_meter 10\nsize 2 1\n.. \n"),
            Err(TrackError::RowLengthMismatch { line: 4, .. })
        ));
    }

    #[test]
    fn missing_final_newline_is_accepted() {
        let t = load_track("TRACK v1\ncells_per_meter 10\nsize 2 1\n#.").unwrap();
        assert_eq!(t.cell(0, 0), Some(0.1));
    }

    #[test]
    fn sampling_rules() {
        // 1 cell = 1 mm
        let t = load_track(&grid_text(1000, &[".#.", ".#.", ".#."])).unwrap();
        assert_eq!(t.sample_reflectance(Point2::new(0.0015, 0.0015)), 0.1);
        assert_eq!(t.sample_reflectance(Point2::new(-0.0001, 0.0015)), 0.9);
        assert_eq!(t.sample_reflectance(Point2::new(0.0015, 0.0031)), 0.9);
        // boundary between column 0 ('.') and column 1 ('#') belongs to column 1
        assert_eq!(t.sample_reflectance(Point2::new(0.001, 0.0005)), 0.1);
        // boundary between column 1 and column 2 belongs to column 2
        assert_eq!(t.sample_reflectance(Point2::new(0.002, 0.0005)), 0.9);
        assert_eq!(t.sample_reflectance(Point2::new(f64::NAN, 0.0)), 0.9);
    }

    #[test]
    fn canvas_segment_and_text_roundtrip() {
        let mut c = TrackCanvas::new(0.05, 0.02, 1000.0);
        c.stroke_segment(Point2::new(0.0, 0.01), Point2::new(0.05, 0.01), 0.006);
        let t = c.finish();
        assert_eq!(t.sample_reflectance(Point2::new(0.02, 0.01)), 0.1);
        assert_eq!(t.sample_reflectance(Point2::new(0.02, 0.0025)), 0.9);
        let text = t.to_text();
        assert_eq!(load_track(&text).unwrap(), t);
    }

    #[test]
    fn canvas_arc_respects_sweep() {
        let mut c = TrackCanvas::new(1.0, 1.0, 200.0);
        c.stroke_arc(Point2::new(0.5, 0.5), 0.3, 0.0, std::f64::consts::FRAC_PI_2, 0.02);
        let t = c.finish();
        assert_eq!(t.sample_reflectance(Point2::new(0.8, 0.55)), 0.1);
        assert_eq!(t.sample_reflectance(Point2::new(0.52, 0.8)), 0.1);
        assert_eq!(t.sample_reflectance(Point2::new(0.2, 0.5)), 0.9);
        assert_eq!(t.sample_reflectance(Point2::new(0.5, 0.2)), 0.9);
    }
}
