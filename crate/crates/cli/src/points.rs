//! Textual form of lattice points used by flags, reports, and CSV columns.
//!
//! One point is its integer coordinates joined by commas (`0,1,-1`); a list
//! of points is joined by semicolons (`0,0;1,0`). Whitespace around either
//! separator is tolerated on input.

use anyhow::{anyhow, Result};
use blockspin_core::lattice::Point;

/// Parses a single point, e.g. `"3"` or `"0,1,-1"`.
pub fn parse_point(text: &str) -> Result<Point> {
    let coords = text
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<i64>()
                .map_err(|e| anyhow!("bad coordinate {:?} in point {:?}: {e}", c.trim(), text))
        })
        .collect::<Result<Vec<i64>>>()?;
    if coords.is_empty() {
        return Err(anyhow!("empty point"));
    }
    Ok(Point::new(&coords))
}

/// Parses a semicolon-separated point list; all points must share one
/// dimension.
pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    let points = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_point)
        .collect::<Result<Vec<Point>>>()?;
    if points.is_empty() {
        return Err(anyhow!("empty point list"));
    }
    let dim = points[0].dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(anyhow!(
            "points in {:?} have mixed dimensions; give every point the same number of coordinates",
            text
        ));
    }
    Ok(points)
}

/// Renders a point in the same syntax `parse_point` accepts.
pub fn render_point(p: &Point) -> String {
    p.coords()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for text in ["0", "-3", "0,1,-1", "5,5"] {
            let p = parse_point(text).unwrap();
            assert_eq!(render_point(&p), text);
        }
        let ps = parse_points(" 0,0 ; 1,0 ").unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(render_point(&ps[0]), "0,0");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_point("").is_err());
        assert!(parse_point("1,x").is_err());
        assert!(parse_points(";").is_err());
        assert!(parse_points("0;1,2").is_err());
    }
}
