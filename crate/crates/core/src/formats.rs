//! Text formats: domain files, defining-grid files, and experiment
//! configurations.
//!
//! Domain and grid files are line-oriented plain text (`#` starts a
//! comment, blank lines are ignored); configurations are TOML with unknown
//! keys rejected.  All parsers report the offending line number, and every
//! writer round-trips bit-exactly through its parser.
//!
//! Domain file grammar:
//!
//! ```text
//! domain circles            |  domain samples
//! outer <cx> <cy> <r>       |  basepoint <x> <y>
//! hole <cx> <cy> <r>        |  curve <n>
//! ...                       |  <x> <y>            (n sample lines; the
//!                           |  ...                 first curve is the
//!                           |  curve <n> ...        outer boundary)
//! ```
//!
//! Grid file grammar:
//!
//! ```text
//! grid <dim>
//! axis <min> <max> <count>   (dim lines)
//! values
//! <v> ...                    (whitespace-separated, row-major)
//! ```

use serde::{Deserialize, Serialize};

use crate::curves::{ClosedCurve, SampledDomain};
use crate::error::{Error, Result};
use crate::grid::DefiningGrid;
use crate::mobius::{Circle, CircleDomain};
use crate::C;

// ---------------------------------------------------------------------------
// Domain files.
// ---------------------------------------------------------------------------

/// A domain read from a file: either exact circle data or sampled boundary
/// curves.
#[derive(Debug, Clone)]
pub enum DomainSpec {
    Circles(CircleDomain),
    Sampled(SampledDomain),
}

impl DomainSpec {
    pub fn connectivity(&self) -> usize {
        match self {
            DomainSpec::Circles(cd) => cd.connectivity(),
            DomainSpec::Sampled(sd) => sd.connectivity(),
        }
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("expected a number, got {token:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite number {token:?}")));
    }
    Ok(v)
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("expected a count, got {token:?}")))
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn expect_fields<'a>(
    line_no: usize,
    line: &'a str,
    keyword: &str,
    count: usize,
) -> Result<Vec<&'a str>> {
    let mut parts = line.split_whitespace();
    let head = parts.next().unwrap_or("");
    if head != keyword {
        return Err(parse_err(
            line_no,
            format!("expected {keyword:?}, got {head:?}"),
        ));
    }
    let fields: Vec<&str> = parts.collect();
    if fields.len() != count {
        return Err(parse_err(
            line_no,
            format!(
                "{keyword:?} takes {count} fields, got {}",
                fields.len()
            ),
        ));
    }
    Ok(fields)
}

pub fn parse_domain(text: &str) -> Result<DomainSpec> {
    let mut lines = content_lines(text);
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty domain file"))?;
    let kind = expect_fields(first_no, first, "domain", 1)?[0];
    match kind {
        "circles" => parse_circle_domain(lines),
        "samples" => parse_sampled_domain(lines),
        other => Err(parse_err(
            first_no,
            format!("unknown domain kind {other:?} (expected circles or samples)"),
        )),
    }
}

fn parse_circle_domain<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<DomainSpec> {
    let mut outer: Option<(usize, Circle)> = None;
    let mut holes = Vec::new();
    let mut last_line = 1;
    for (no, line) in lines {
        last_line = no;
        let keyword = line.split_whitespace().next().unwrap_or("");
        let fields = expect_fields(no, line, keyword, 3)?;
        let center = C::new(parse_f64(fields[0], no)?, parse_f64(fields[1], no)?);
        let radius = parse_f64(fields[2], no)?;
        let circle = Circle::new(center, radius)
            .map_err(|e| parse_err(no, e.to_string()))?;
        match keyword {
            "outer" => {
                if outer.is_some() {
                    return Err(parse_err(no, "duplicate outer circle"));
                }
                outer = Some((no, circle));
            }
            "hole" => holes.push(circle),
            other => {
                return Err(parse_err(
                    no,
                    format!("expected \"outer\" or \"hole\", got {other:?}"),
                ))
            }
        }
    }
    let (outer_no, outer) =
        outer.ok_or_else(|| parse_err(last_line, "missing outer circle"))?;
    let cd = CircleDomain::new(outer, holes).map_err(|e| parse_err(outer_no, e.to_string()))?;
    Ok(DomainSpec::Circles(cd))
}

fn parse_sampled_domain<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<DomainSpec> {
    let mut lines = lines.peekable();
    let (bp_no, bp_line) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing basepoint"))?;
    let fields = expect_fields(bp_no, bp_line, "basepoint", 2)?;
    let basepoint = C::new(parse_f64(fields[0], bp_no)?, parse_f64(fields[1], bp_no)?);
    let mut curves = Vec::new();
    let mut last_line = bp_no;
    while let Some((no, line)) = lines.next() {
        last_line = no;
        let fields = expect_fields(no, line, "curve", 1)?;
        let n = parse_usize(fields[0], no)?;
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let (pno, pline) = lines
                .next()
                .ok_or_else(|| parse_err(last_line, "curve ends before its declared count"))?;
            last_line = pno;
            let tokens: Vec<&str> = pline.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(parse_err(pno, "sample lines take two fields: x y"));
            }
            points.push(C::new(parse_f64(tokens[0], pno)?, parse_f64(tokens[1], pno)?));
        }
        curves.push((no, points));
    }
    if curves.is_empty() {
        return Err(parse_err(last_line, "missing outer curve"));
    }
    let mut built = Vec::with_capacity(curves.len());
    for (no, points) in curves {
        built.push(ClosedCurve::new(points).map_err(|e| parse_err(no, e.to_string()))?);
    }
    let outer = built.remove(0);
    let sd = SampledDomain::new(outer, built, basepoint)
        .map_err(|e| parse_err(last_line, e.to_string()))?;
    Ok(DomainSpec::Sampled(sd))
}

pub fn write_domain(spec: &DomainSpec) -> String {
    let mut out = String::new();
    match spec {
        DomainSpec::Circles(cd) => {
            out.push_str("domain circles\n");
            out.push_str(&format!(
                "outer {} {} {}\n",
                cd.outer.center.re, cd.outer.center.im, cd.outer.radius
            ));
            for h in &cd.holes {
                out.push_str(&format!("hole {} {} {}\n", h.center.re, h.center.im, h.radius));
            }
        }
        DomainSpec::Sampled(sd) => {
            out.push_str("domain samples\n");
            out.push_str(&format!(
                "basepoint {} {}\n",
                sd.basepoint.re, sd.basepoint.im
            ));
            for curve in std::iter::once(&sd.outer).chain(&sd.holes) {
                out.push_str(&format!("curve {}\n", curve.points.len()));
                for p in &curve.points {
                    out.push_str(&format!("{} {}\n", p.re, p.im));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Grid files.
// ---------------------------------------------------------------------------

pub fn parse_grid(text: &str) -> Result<DefiningGrid> {
    let mut lines = content_lines(text);
    let (no, line) = lines.next().ok_or_else(|| parse_err(1, "empty grid file"))?;
    let dim = parse_usize(expect_fields(no, line, "grid", 1)?[0], no)?;
    if dim == 0 || dim > 8 {
        return Err(parse_err(no, format!("grid dimension {dim} out of range 1..=8")));
    }
    let mut mins = Vec::with_capacity(dim);
    let mut maxs = Vec::with_capacity(dim);
    let mut counts = Vec::with_capacity(dim);
    let mut last_line = no;
    for _ in 0..dim {
        let (no, line) = lines
            .next()
            .ok_or_else(|| parse_err(last_line, "missing axis line"))?;
        last_line = no;
        let fields = expect_fields(no, line, "axis", 3)?;
        mins.push(parse_f64(fields[0], no)?);
        maxs.push(parse_f64(fields[1], no)?);
        counts.push(parse_usize(fields[2], no)?);
    }
    let (vno, vline) = lines
        .next()
        .ok_or_else(|| parse_err(last_line, "missing values section"))?;
    expect_fields(vno, vline, "values", 0)?;
    let expected: usize = counts
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| parse_err(vno, "sample count overflow"))?;
    let mut values = Vec::with_capacity(expected);
    let mut end_line = vno;
    for (no, line) in lines {
        end_line = no;
        for token in line.split_whitespace() {
            values.push(parse_f64(token, no)?);
        }
        if values.len() > expected {
            return Err(parse_err(no, format!("more than {expected} values")));
        }
    }
    if values.len() != expected {
        return Err(parse_err(
            end_line,
            format!("expected {expected} values, got {}", values.len()),
        ));
    }
    DefiningGrid::new(mins, maxs, counts, values).map_err(|e| parse_err(end_line, e.to_string()))
}

pub fn write_grid(grid: &DefiningGrid) -> String {
    let mut out = format!("grid {}\n", grid.dim());
    for k in 0..grid.dim() {
        out.push_str(&format!(
            "axis {} {} {}\n",
            grid.mins()[k],
            grid.maxs()[k],
            grid.counts()[k]
        ));
    }
    out.push_str("values\n");
    for row in grid.values().chunks(8) {
        let joined: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&joined.join(" "));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Experiment configurations (TOML).
// ---------------------------------------------------------------------------

/// Which domain an experiment runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    /// One of "disc", "annulus", "circles", or "file".
    pub kind: String,
    /// Inner radius for kind = "annulus".
    pub inner_radius: f64,
    /// Outer circle (cx, cy, r) for kind = "circles".
    pub outer: [f64; 3],
    /// Hole circles (cx, cy, r) for kind = "circles".
    pub holes: Vec<[f64; 3]>,
    /// Domain file path for kind = "file".
    pub path: Option<String>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            kind: "disc".into(),
            inner_radius: 0.4,
            outer: [0.0, 0.0, 1.0],
            holes: Vec::new(),
            path: None,
        }
    }
}

/// Numeric knobs shared by the experiment drivers; every field has a
/// documented default and `--quick` halves the resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    /// Bergman basis truncation N.
    pub truncation: usize,
    /// Flow stage count J for the two-variable constructions.
    pub stages: usize,
    /// Bump count K for the two-variable constructions.
    pub bumps: usize,
    /// Boundary nodes per curve for uniformization.
    pub nodes: usize,
    /// Uniformization residual target.
    pub tolerance: f64,
    /// Automorphism acceptance tolerance.
    pub enumeration_tolerance: f64,
    /// Probe count for kernel/metric scans.
    pub probes: usize,
    /// Samples per axis for defining-function grids.
    pub grid_resolution: usize,
    /// Perturbation sizes for stability/semicontinuity families.
    pub epsilons: Vec<f64>,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            truncation: 30,
            stages: 8,
            bumps: 12,
            nodes: 256,
            tolerance: 1e-8,
            enumeration_tolerance: 1e-6,
            probes: 50,
            grid_resolution: 17,
            epsilons: vec![0.02, 0.01, 0.005],
        }
    }
}

/// A full experiment description, parsed from TOML with unknown keys
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Free-form experiment label recorded in the run manifest.
    pub name: String,
    /// Output directory for result files.
    pub out: Option<String>,
    pub domain: DomainConfig,
    pub numerics: NumericsConfig,
}

impl ExperimentConfig {
    /// Structural validation beyond what deserialization enforces.
    pub fn validate(&self) -> Result<()> {
        match self.domain.kind.as_str() {
            "disc" | "circles" => {}
            "annulus" => {
                if !(0.0 < self.domain.inner_radius && self.domain.inner_radius < 1.0) {
                    return Err(Error::ParameterDomain {
                        reason: format!(
                            "annulus inner radius must lie in (0, 1), got {}",
                            self.domain.inner_radius
                        ),
                    });
                }
            }
            "file" => {
                if self.domain.path.is_none() {
                    return Err(Error::ParameterDomain {
                        reason: "domain.kind = \"file\" requires domain.path".into(),
                    });
                }
            }
            other => {
                return Err(Error::ParameterDomain {
                    reason: format!(
                        "unknown domain.kind {other:?} (expected disc, annulus, circles, or file)"
                    ),
                });
            }
        }
        if self.numerics.nodes < 16 {
            return Err(Error::ParameterDomain {
                reason: format!("numerics.nodes must be at least 16, got {}", self.numerics.nodes),
            });
        }
        if !(self.numerics.tolerance > 0.0) || !(self.numerics.enumeration_tolerance > 0.0) {
            return Err(Error::ParameterDomain {
                reason: "tolerances must be positive".into(),
            });
        }
        if self.numerics.epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::ParameterDomain {
                reason: "numerics.epsilons must lie in (0, 1)".into(),
            });
        }
        Ok(())
    }

    /// Builds the configured circle domain (kinds other than "file").
    pub fn circle_domain(&self) -> Result<CircleDomain> {
        match self.domain.kind.as_str() {
            "disc" => Ok(CircleDomain::disc()),
            "annulus" => CircleDomain::annulus(self.domain.inner_radius),
            "circles" => {
                let [cx, cy, r] = self.domain.outer;
                let outer = Circle::new(C::new(cx, cy), r)?;
                let holes = self
                    .domain
                    .holes
                    .iter()
                    .map(|&[hx, hy, hr]| Circle::new(C::new(hx, hy), hr))
                    .collect::<Result<Vec<_>>>()?;
                CircleDomain::new(outer, holes)
            }
            other => Err(Error::ParameterDomain {
                reason: format!("domain.kind {other:?} does not describe inline circles"),
            }),
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|span| text[..span.start.min(text.len())].lines().count().max(1))
            .unwrap_or(1);
        parse_err(line, e.message().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

pub fn write_config(config: &ExperimentConfig) -> String {
    toml::to_string_pretty(config).expect("config serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_domain_file_round_trips() {
        let text = "# two-hole test domain\ndomain circles\nouter 0 0 1\nhole 0.45 0.1 0.12\nhole -0.3 -0.25 0.18\n";
        let spec = parse_domain(text).unwrap();
        assert_eq!(spec.connectivity(), 3);
        let written = write_domain(&spec);
        let again = parse_domain(&written).unwrap();
        assert_eq!(write_domain(&again), written);
    }

    #[test]
    fn sampled_domain_file_round_trips() {
        let circle = Circle::unit();
        let outer = ClosedCurve::circle(&circle, 32, true);
        let hole = ClosedCurve::circle(&Circle::new(C::new(0.2, 0.0), 0.3).unwrap(), 16, false);
        let sd = SampledDomain::new(outer, vec![hole], C::new(0.6, 0.0)).unwrap();
        let written = write_domain(&DomainSpec::Sampled(sd));
        let spec = parse_domain(&written).unwrap();
        assert_eq!(spec.connectivity(), 2);
        assert_eq!(write_domain(&spec), written);
    }

    #[test]
    fn domain_parse_errors_carry_line_numbers() {
        let cases = [
            ("", 1),
            ("domain polygons\n", 1),
            ("domain circles\nouter 0 0\n", 2),
            ("domain circles\nouter 0 0 1\nhole 2 zero 0.1\n", 3),
            ("domain circles\nhole 0 0 0.2\n", 2),
            ("domain samples\nbasepoint 0 0\ncurve 4\n0 0\n1 0\n", 5),
        ];
        for (text, want_line) in cases {
            match parse_domain(text) {
                Err(Error::Parse { line, .. }) => {
                    assert_eq!(line, want_line, "wrong line for {text:?}")
                }
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_geometry_is_a_parse_error_with_location() {
        // A hole escaping the outer circle is rejected by domain validation,
        // surfaced at the file level.
        let text = "domain circles\nouter 0 0 1\nhole 0.9 0 0.5\n";
        assert!(matches!(parse_domain(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn grid_file_round_trips() {
        let grid = DefiningGrid::sample(
            vec![-1.0, 0.0],
            vec![1.0, 2.0],
            vec![5, 4],
            |x| x[0] * x[0] - 0.5 * x[1],
        )
        .unwrap();
        let written = write_grid(&grid);
        let parsed = parse_grid(&written).unwrap();
        assert_eq!(parsed, grid);
        assert_eq!(write_grid(&parsed), written);
    }

    #[test]
    fn grid_parse_errors_carry_line_numbers() {
        let cases = [
            ("", 1),
            ("grid 0\n", 1),
            ("grid 1\naxis 0 1\n", 2),
            ("grid 1\naxis 0 1 3\nvalues\n1 2\n", 4),
            ("grid 1\naxis 0 1 3\nvalues\n1 2 3 4\n", 4),
            ("grid 1\naxis 1 0 3\nvalues\n1 2 3\n", 4),
        ];
        for (text, want_line) in cases {
            match parse_grid(text) {
                Err(Error::Parse { line, .. }) => {
                    assert_eq!(line, want_line, "wrong line for {text:?}")
                }
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn empty_config_gets_all_defaults() {
        let config = parse_config("").unwrap();
        assert_eq!(config, ExperimentConfig::default());
        assert_eq!(config.numerics.truncation, 30);
        assert_eq!(config.domain.kind, "disc");
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut config = ExperimentConfig::default();
        config.name = "stability-annulus".into();
        config.domain.kind = "annulus".into();
        config.domain.inner_radius = 0.4;
        config.numerics.epsilons = vec![0.01, 0.005];
        let text = write_config(&config);
        assert_eq!(parse_config(&text).unwrap(), config);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            parse_config("truncattion = 12\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_config("[numerics]\ntruncattion = 12\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        assert!(parse_config("[domain]\nkind = \"annulus\"\ninner_radius = 1.5\n").is_err());
        assert!(parse_config("[domain]\nkind = \"file\"\n").is_err());
        assert!(parse_config("[domain]\nkind = \"squares\"\n").is_err());
        assert!(parse_config("[numerics]\nnodes = 4\n").is_err());
        assert!(parse_config("[numerics]\nepsilons = [0.5, -0.1]\n").is_err());
    }

    #[test]
    fn config_builds_the_described_circle_domain() {
        let config = parse_config(
            "[domain]\nkind = \"circles\"\nouter = [0.0, 0.0, 1.0]\nholes = [[0.3, 0.0, 0.2]]\n",
        )
        .unwrap();
        let cd = config.circle_domain().unwrap();
        assert_eq!(cd.connectivity(), 2);
        assert!((cd.holes[0].center - C::new(0.3, 0.0)).norm() < 1e-15);
    }
}
