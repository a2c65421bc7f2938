//! Plain-text chart files.
//!
//! ```text
//! dim 2 charts 1
//! chart 64 64
//! box 0 6.283185307179586 0 6.283185307179586
//! periodic 1 1
//! x0 x1 x2 x3        # one line per grid node, last axis fastest
//! ...
//! ```
//!
//! Blank lines and text after `#` are ignored.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;

use super::{Chart, Family, GeometryError, ParametrizedHypersurface, SplineChart};

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-empty line, split into tokens.
    fn next_tokens(&mut self) -> Result<Option<Vec<String>>, GeometryError> {
        for line in self.inner.by_ref() {
            self.number += 1;
            let line = line?;
            let content = line.split('#').next().unwrap_or("");
            let tokens: Vec<String> = content.split_whitespace().map(str::to_owned).collect();
            if !tokens.is_empty() {
                return Ok(Some(tokens));
            }
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<Vec<String>, GeometryError> {
        self.next_tokens()?
            .ok_or_else(|| self.error(format!("unexpected end of file, expected {what}")))
    }

    fn error(&self, message: impl Into<String>) -> GeometryError {
        GeometryError::Parse {
            line: self.number,
            message: message.into(),
        }
    }

    fn keyword(&mut self, key: &str, count: usize) -> Result<Vec<String>, GeometryError> {
        let tokens = self.expect(key)?;
        if tokens[0] != key {
            return Err(self.error(format!("expected `{key}`, found `{}`", tokens[0])));
        }
        if tokens.len() != count + 1 {
            return Err(self.error(format!(
                "`{key}` takes {count} values, found {}",
                tokens.len() - 1
            )));
        }
        Ok(tokens[1..].to_vec())
    }

    fn parse<T: std::str::FromStr>(&self, token: &str) -> Result<T, GeometryError> {
        token
            .parse()
            .map_err(|_| self.error(format!("cannot parse `{token}`")))
    }
}

/// Reads a chart file; every chart becomes a [`SplineChart`].
pub fn read_chart_file<R: BufRead>(reader: R) -> Result<ParametrizedHypersurface, GeometryError> {
    let mut lines = Lines {
        inner: reader.lines(),
        number: 0,
    };
    let header = lines.expect("header")?;
    if header.len() != 4 || header[0] != "dim" || header[2] != "charts" {
        return Err(lines.error("header must read `dim <n> charts <c>`"));
    }
    let n: usize = lines.parse(&header[1])?;
    let count: usize = lines.parse(&header[3])?;
    if n == 0 || count == 0 {
        return Err(lines.error("dimension and chart count must be positive"));
    }
    let mut charts = Vec::with_capacity(count);
    for _ in 0..count {
        let resolution = lines
            .keyword("chart", n)?
            .iter()
            .map(|t| lines.parse::<usize>(t))
            .collect::<Result<Vec<_>, _>>()?;
        let bounds = lines
            .keyword("box", 2 * n)?
            .iter()
            .map(|t| lines.parse::<f64>(t))
            .collect::<Result<Vec<_>, _>>()?;
        let domain: Vec<(f64, f64)> = bounds.chunks(2).map(|c| (c[0], c[1])).collect();
        let periodic = lines
            .keyword("periodic", n)?
            .iter()
            .map(|t| match t.as_str() {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(lines.error(format!("periodicity flag must be 0 or 1, found `{t}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let total: usize = resolution.iter().product();
        let mut samples = Vec::with_capacity(total);
        for _ in 0..total {
            let tokens = lines.expect("a sample point")?;
            if tokens.len() != n + 2 {
                return Err(lines.error(format!(
                    "sample points have {} coordinates, found {}",
                    n + 2,
                    tokens.len()
                )));
            }
            let coords = tokens
                .iter()
                .map(|t| lines.parse::<f64>(t))
                .collect::<Result<Vec<_>, _>>()?;
            samples.push(DVector::from_vec(coords));
        }
        let spline = SplineChart::new(&domain, &periodic, &resolution, samples)?;
        charts.push(Chart::new(domain, periodic, Arc::new(spline))?);
    }
    if lines.next_tokens()?.is_some() {
        return Err(lines.error("trailing data after the last chart"));
    }
    ParametrizedHypersurface::new(n, charts, Family::Custom, "chart file")
}

pub fn load_chart_file(path: impl AsRef<Path>) -> Result<ParametrizedHypersurface, GeometryError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut surface = read_chart_file(BufReader::new(file))?;
    surface.label = path.display().to_string();
    Ok(surface)
}

/// Samples every chart of `surface` on `resolution` nodes per axis in the
/// chart-file layout.
pub fn write_chart_file<W: Write>(
    surface: &ParametrizedHypersurface,
    resolution: usize,
    mut out: W,
) -> Result<(), GeometryError> {
    let n = surface.dim();
    writeln!(out, "dim {n} charts {}", surface.charts().len())?;
    for chart in surface.charts() {
        writeln!(out, "chart{}", format!(" {resolution}").repeat(n))?;
        let bounds: Vec<String> = chart
            .domain()
            .iter()
            .flat_map(|&(lo, hi)| [lo, hi])
            .map(|v| format!("{v:?}"))
            .collect();
        writeln!(out, "box {}", bounds.join(" "))?;
        let flags: Vec<&str> = chart
            .periodic()
            .iter()
            .map(|&p| if p { "1" } else { "0" })
            .collect();
        writeln!(out, "periodic {}", flags.join(" "))?;
        let axis_nodes: Vec<Vec<f64>> = chart
            .domain()
            .iter()
            .zip(chart.periodic())
            .map(|(&(lo, hi), &p)| {
                let cells = if p { resolution } else { resolution - 1 };
                (0..resolution)
                    .map(|j| lo + (hi - lo) * j as f64 / cells as f64)
                    .collect()
            })
            .collect();
        let mut index = vec![0usize; n];
        for _ in 0..resolution.pow(n as u32) {
            let u: Vec<f64> = index.iter().enumerate().map(|(a, &i)| axis_nodes[a][i]).collect();
            let x = chart.point(&u);
            let coords: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", coords.join(" "))?;
            for axis in (0..n).rev() {
                index[axis] += 1;
                if index[axis] < resolution {
                    break;
                }
                index[axis] = 0;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{clifford_hypersurface, CliffordSpec};

    #[test]
    fn roundtrip_of_clifford_torus() {
        let m = clifford_hypersurface(CliffordSpec::new(1, 1).unwrap());
        let mut buf = Vec::new();
        write_chart_file(&m, 64, &mut buf).unwrap();
        let back = read_chart_file(buf.as_slice()).unwrap();
        assert_eq!(back.dim(), 2);
        assert_eq!(back.family(), Family::Custom);
        for u in [[0.3, 1.1], [2.0, 5.5], [4.4, 0.05]] {
            let exact = m.charts()[0].point(&u);
            let approx = back.charts()[0].point(&u);
            assert!((exact - approx).norm() < 1e-5);
            let s = back.shape_at(0, &u).unwrap();
            assert!((s.norm_a2 - 2.0).abs() < 2e-3, "{}", s.norm_a2);
            assert!(s.mean_curvature.abs() < 5e-3);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "dim 1 charts 1\nchart 3\nbox 0 1\nperiodic 2\n";
        match read_chart_file(text.as_bytes()).unwrap_err() {
            GeometryError::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e}"),
        }
        let text = "# a circle\ndim 1 charts 1\nchart 3\nbox 0 1\nperiodic 1\n1 0 0\n0 1 0\n";
        assert!(matches!(
            read_chart_file(text.as_bytes()).unwrap_err(),
            GeometryError::Parse { .. }
        ));
        assert!(read_chart_file("dims 1".as_bytes()).is_err());
    }
}
