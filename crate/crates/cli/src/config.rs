//! Job files: `key = value` lines, then optional `[domain]`, `[k]` and `[g]`
//! sections holding set trees.
//!
//! ```text
//! command = classify
//! n = 2
//! p = 2
//!
//! [domain]
//! complement {
//!   sequence {
//!     center = 0.75*pow2(4^j), 0
//!     radius = pow2(-(8^j))
//!     start = 1
//!     closed = true
//!   }
//! }
//! ```
//!
//! A `[domain]` section may instead name a registered family with
//! `family = ...` and its parameters. `#` starts a comment.

use std::fmt::{self, Write as _};

use clap::ValueEnum;
use thiserror::Error;

use infreg_core::{parse_expr, BallSequence, DomainSpec, Expr, Exponents, Family, SetDescriptor, Weight};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Capacity,
    Wiener,
    Classify,
    Invert,
    Solve,
    Examples,
    Poincare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantName {
    /// `cap(B̄_r, Ω ∪ B_{2r})` at infinity.
    Ball,
    /// Complement in `r ≤ |x| ≤ r²`, against `B_{e^{r²}}`.
    SquareShell,
    /// Complement in `r ≤ |x| ≤ e^r`, against `B_{e^{e^r}}`.
    ExpShell,
    /// The integral at the finite point `point`.
    Classic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    SparseBalls,
    ClusteredBalls,
}

/// Boundary data for `solve`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryData {
    Constant(f64),
    /// The coordinate `x_k`, 1-based.
    Coordinate(usize),
    /// 1 on `|x| ≤ r`, 0 outside.
    Step(f64),
    /// `max(0, 1 - |x| / r)`.
    Bump(f64),
}

impl BoundaryData {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        match *self {
            BoundaryData::Constant(c) => c,
            BoundaryData::Coordinate(k) => x[k - 1],
            BoundaryData::Step(s) => f64::from(r <= s),
            BoundaryData::Bump(s) => (1.0 - r / s).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainConfig {
    Family { family: Family, inverted: bool },
    Set(SetDescriptor),
}

impl DomainConfig {
    pub fn spec(&self, n: usize) -> infreg_core::Result<DomainSpec> {
        match self {
            DomainConfig::Family { family, inverted } => {
                let d = family.domain(n)?;
                if *inverted {
                    d.inverted()
                } else {
                    Ok(d)
                }
            }
            DomainConfig::Set(s) => Ok(DomainSpec::new(s.clone())),
        }
    }
}

/// Optional per-command parameters; unset keys take command defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    pub variant: Option<VariantName>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub samples_per_decade: Option<usize>,
    pub grid_h: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub point: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub which: Option<ExampleName>,
    pub terms: Option<u32>,
    pub data: Option<BoundaryData>,
    pub half_width: Option<f64>,
    pub probe_radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    pub exponents: Exponents,
    pub weight: Weight,
    pub domain: Option<DomainConfig>,
    pub k: Option<SetDescriptor>,
    pub g: Option<SetDescriptor>,
    pub params: Params,
}

impl JobConfig {
    pub fn new(command: Command, exponents: Exponents) -> Self {
        Self { command, exponents, weight: Weight::Constant, domain: None, k: None, g: None, params: Params::default() }
    }

    /// Command-level checks that need the whole file.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let v = |m: String| Err(ConfigError::Validation(m));
        let (n, p) = (self.exponents.n(), self.exponents.p());
        let at_infinity = match self.command {
            Command::Classify => true,
            Command::Wiener => self.params.variant != Some(VariantName::Classic),
            _ => false,
        };
        if at_infinity && p < n as f64 {
            return v(format!("{:?} at infinity requires p ≥ n (got n = {n}, p = {p})", self.command).to_lowercase());
        }
        let needs_domain = matches!(self.command, Command::Wiener | Command::Classify | Command::Invert | Command::Solve);
        if needs_domain && self.domain.is_none() {
            return v("this command needs a [domain] section".into());
        }
        if self.command == Command::Classify {
            if let Some(DomainConfig::Set(s)) = &self.domain {
                if DomainSpec::new(s.clone()).is_whole_space() {
                    return v("classify refuses the whole space: it has no boundary at infinity".into());
                }
            }
        }
        if self.command == Command::Capacity && (self.k.is_none() || self.g.is_none()) {
            return v("capacity needs [k] and [g] sections".into());
        }
        if self.command == Command::Solve {
            if n != 2 {
                return v(format!("solve runs on planar grids only (got n = {n})"));
            }
            if self.params.data.is_none() {
                return v("solve needs `data`".into());
            }
            if let Some(BoundaryData::Coordinate(k)) = self.params.data {
                if k == 0 || k > n {
                    return v(format!("coordinate({k}) is out of range for n = {n}"));
                }
            }
        }
        if let Some(s) = self.params.samples_per_decade {
            if s < 4 {
                return v(format!("samples_per_decade = {s} must be at least 4"));
            }
        }
        if self.command == Command::Wiener && self.params.variant == Some(VariantName::Classic) && self.params.point.is_none() {
            return v("the classic variant needs `point`".into());
        }
        for (name, x) in [("grid_h", self.params.grid_h), ("tol", self.params.tol), ("radius", self.params.radius), ("half_width", self.params.half_width)] {
            if let Some(x) = x {
                if !(x > 0.0 && x.is_finite()) {
                    return v(format!("{name} = {x} must be positive"));
                }
            }
        }
        if let Some(pt) = &self.params.point {
            if pt.len() != n {
                return v(format!("point has {} coordinates, expected {n}", pt.len()));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// parsing

#[derive(Debug, Clone, Copy)]
struct Line<'a> {
    no: usize,
    /// Character column of `text`, 1-based.
    col: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ConfigError> {
        let chars = self.text.get(..offset).map_or(offset, |s| s.chars().count());
        Err(ConfigError::Parse { line: self.no, column: self.col + chars, message: message.into() })
    }

    /// `(key, value, value offset)` of a `key = value` line.
    fn key_value(self) -> Result<(&'a str, &'a str, usize), ConfigError> {
        let Some(eq) = self.text.find('=') else {
            return self.err(self.text.len(), "expected '='");
        };
        let key = self.text[..eq].trim_end();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return self.err(0, format!("expected a key, found '{key}'"));
        }
        let rest = &self.text[eq + 1..];
        let lead = rest.len() - rest.trim_start().len();
        Ok((key, rest.trim(), eq + 1 + lead))
    }
}

fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let trimmed = body.trim();
            if trimmed.is_empty() {
                return None;
            }
            let lead = body.len() - body.trim_start().len();
            Some(Line { no: i + 1, col: body[..lead].chars().count() + 1, text: trimmed })
        })
        .collect()
}

fn float(line: &Line, value: &str, at: usize) -> Result<f64, ConfigError> {
    value.trim().parse().or_else(|_| line.err(at, format!("expected a number, found '{}'", value.trim())))
}

fn integer<T: std::str::FromStr>(line: &Line, value: &str, at: usize) -> Result<T, ConfigError> {
    value.parse().or_else(|_| line.err(at, format!("expected a non-negative integer, found '{value}'")))
}

fn boolean(line: &Line, value: &str, at: usize) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => line.err(at, format!("expected true or false, found '{value}'")),
    }
}

/// Comma-separated pieces with their offsets.
fn pieces(value: &str, at: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in value.char_indices().chain(std::iter::once((value.len(), ','))) {
        if c == ',' {
            let piece = &value[start..i];
            let lead = piece.len() - piece.trim_start().len();
            out.push((piece.trim(), at + start + lead));
            start = i + 1;
        }
    }
    out
}

fn floats(line: &Line, value: &str, at: usize) -> Result<Vec<f64>, ConfigError> {
    pieces(value, at).into_iter().map(|(p, o)| float(line, p, o)).collect()
}

fn expr(line: &Line, value: &str, at: usize) -> Result<Expr, ConfigError> {
    parse_expr(value).or_else(|e| line.err(at + e.offset, format!("expected {}, found {}", e.expected.join(" or "), e.found)))
}

/// `name(arg)` with a numeric argument.
fn call<'a>(line: &Line, value: &'a str, at: usize) -> Result<(&'a str, Option<(&'a str, usize)>), ConfigError> {
    match value.find('(') {
        None => Ok((value, None)),
        Some(open) => {
            if !value.ends_with(')') {
                return line.err(at + value.len(), "expected ')'");
            }
            Ok((value[..open].trim(), Some((&value[open + 1..value.len() - 1], at + open + 1))))
        }
    }
}

fn weight(line: &Line, value: &str, at: usize) -> Result<Weight, ConfigError> {
    match call(line, value, at)? {
        ("constant", None) => Ok(Weight::Constant),
        ("power", Some((arg, o))) => Ok(Weight::power(float(line, arg, o)?)),
        _ => line.err(at, format!("expected constant or power(delta), found '{value}'")),
    }
}

fn data(line: &Line, value: &str, at: usize) -> Result<BoundaryData, ConfigError> {
    let expected = "expected constant(c), coordinate(k), step(r) or bump(r)";
    let (name, Some((arg, o))) = call(line, value, at)? else {
        return line.err(at, format!("{expected}, found '{value}'"));
    };
    match name {
        "constant" => Ok(BoundaryData::Constant(float(line, arg, o)?)),
        "coordinate" => Ok(BoundaryData::Coordinate(integer(line, arg.trim(), o)?)),
        "step" => Ok(BoundaryData::Step(float(line, arg, o)?)),
        "bump" => Ok(BoundaryData::Bump(float(line, arg, o)?)),
        _ => line.err(at, format!("{expected}, found '{value}'")),
    }
}

fn choice<T: ValueEnum>(line: &Line, value: &str, at: usize) -> Result<T, ConfigError> {
    T::from_str(value, false).or_else(|_| {
        let names: Vec<String> = T::value_variants().iter().filter_map(|v| v.to_possible_value()).map(|p| p.get_name().to_string()).collect();
        line.err(at, format!("expected one of {}, found '{value}'", names.join(", ")))
    })
}

fn name_of<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn family_name(line: &Line, value: &str, at: usize) -> Result<&'static str, ConfigError> {
    const NAMES: [&str; 5] = ["sparse-balls", "clustered-balls", "excluded-ball", "half-space", "ball-chain"];
    NAMES.into_iter().find(|n| *n == value).map_or_else(|| line.err(at, format!("expected one of {}, found '{value}'", NAMES.join(", "))), Ok)
}

/// Keyed body of a block, up to and including its closing `}`.
fn block_keys<'a>(ls: &[Line<'a>], i: &mut usize, open: &Line<'a>) -> Result<Vec<(Line<'a>, &'a str, &'a str, usize)>, ConfigError> {
    let mut out: Vec<(Line<'a>, &'a str, &'a str, usize)> = Vec::new();
    loop {
        let Some(line) = ls.get(*i).copied() else {
            return open.err(open.text.len(), "unclosed '{'");
        };
        *i += 1;
        if line.text == "}" {
            return Ok(out);
        }
        let (k, v, at) = line.key_value()?;
        if out.iter().any(|(_, k2, _, _)| *k2 == k) {
            return line.err(0, format!("duplicate key '{k}'"));
        }
        out.push((line, k, v, at));
    }
}

type Keys<'a> = Vec<(Line<'a>, &'a str, &'a str, usize)>;

fn take<'a>(keys: &mut Keys<'a>, key: &str) -> Option<(Line<'a>, &'a str, usize)> {
    let pos = keys.iter().position(|(_, k, _, _)| *k == key)?;
    let (l, _, v, at) = keys.remove(pos);
    Some((l, v, at))
}

fn need<'a>(keys: &mut Keys<'a>, key: &str, open: &Line) -> Result<(Line<'a>, &'a str, usize), ConfigError> {
    take(keys, key).map_or_else(|| open.err(0, format!("missing key '{key}'")), Ok)
}

fn no_extra(keys: &Keys) -> Result<(), ConfigError> {
    match keys.first() {
        Some((l, k, _, _)) => l.err(0, format!("unexpected key '{k}'")),
        None => Ok(()),
    }
}

fn geometry<T>(line: &Line, r: infreg_core::Result<T>) -> Result<T, ConfigError> {
    r.or_else(|e| line.err(0, e.to_string()))
}

fn set_node(ls: &[Line], i: &mut usize) -> Result<SetDescriptor, ConfigError> {
    let open = ls[*i];
    *i += 1;
    let (name, block) = match open.text.strip_suffix('{') {
        Some(head) => (head.trim_end(), true),
        None => (open.text, false),
    };
    let expected = "expected origin, whole_space, ball, closed_ball, annulus, half_space, sequence, complement, union or intersection";
    if !block {
        return match name {
            "origin" => Ok(SetDescriptor::Origin),
            "whole_space" => Ok(SetDescriptor::WholeSpace),
            "}" => open.err(0, "unexpected '}'"),
            _ => open.err(0, format!("{expected}, found '{name}'")),
        };
    }
    match name {
        "complement" | "union" | "intersection" => {
            let mut children = Vec::new();
            loop {
                match ls.get(*i) {
                    None => return open.err(open.text.len() - 1, "unclosed '{'"),
                    Some(l) if l.text == "}" => {
                        *i += 1;
                        break;
                    }
                    Some(_) => children.push(set_node(ls, i)?),
                }
            }
            Ok(match name {
                "complement" => {
                    if children.len() != 1 {
                        return open.err(0, format!("complement takes one set, found {}", children.len()));
                    }
                    children.pop().unwrap().complement()
                }
                "union" => SetDescriptor::Union(children),
                _ => SetDescriptor::Intersection(children),
            })
        }
        "ball" | "closed_ball" => {
            let mut keys = block_keys(ls, i, &open)?;
            let (l, v, at) = need(&mut keys, "center", &open)?;
            let center = floats(&l, v, at)?;
            let (l, v, at) = need(&mut keys, "radius", &open)?;
            let radius = float(&l, v, at)?;
            no_extra(&keys)?;
            let s = if name == "ball" { SetDescriptor::ball(center, radius) } else { SetDescriptor::closed_ball(center, radius) };
            geometry(&l, s)
        }
        "annulus" => {
            let mut keys = block_keys(ls, i, &open)?;
            let (l, v, at) = need(&mut keys, "center", &open)?;
            let center = floats(&l, v, at)?;
            let (l, v, at) = need(&mut keys, "inner", &open)?;
            let inner = float(&l, v, at)?;
            let (l, v, at) = need(&mut keys, "outer", &open)?;
            let outer = float(&l, v, at)?;
            let closed = match take(&mut keys, "closed") {
                Some((l, v, at)) => boolean(&l, v, at)?,
                None => false,
            };
            no_extra(&keys)?;
            if !(0.0 <= inner && inner < outer) {
                return l.err(0, format!("annulus needs 0 ≤ inner < outer (got {inner}, {outer})"));
            }
            Ok(SetDescriptor::Annulus { center, inner, outer, closed })
        }
        "half_space" => {
            let mut keys = block_keys(ls, i, &open)?;
            let (l, v, at) = need(&mut keys, "normal", &open)?;
            let normal = floats(&l, v, at)?;
            let offset = match take(&mut keys, "offset") {
                Some((l, v, at)) => float(&l, v, at)?,
                None => 0.0,
            };
            no_extra(&keys)?;
            Ok(SetDescriptor::HalfSpace { normal, offset })
        }
        "sequence" => {
            let mut keys = block_keys(ls, i, &open)?;
            let (l, v, at) = need(&mut keys, "center", &open)?;
            let center = pieces(v, at).into_iter().map(|(p, o)| expr(&l, p, o)).collect::<Result<Vec<_>, _>>()?;
            let (l, v, at) = need(&mut keys, "radius", &open)?;
            let radius = expr(&l, v, at)?;
            let start = match take(&mut keys, "start") {
                Some((l, v, at)) => v.parse().or_else(|_| l.err(at, format!("expected an integer, found '{v}'")))?,
                None => 1,
            };
            let closed = match take(&mut keys, "closed") {
                Some((l, v, at)) => boolean(&l, v, at)?,
                None => false,
            };
            no_extra(&keys)?;
            Ok(SetDescriptor::SequenceUnion { seq: BallSequence { center, radius, start }, closed })
        }
        _ => open.err(0, format!("{expected}, found '{name}'")),
    }
}

fn set_section(ls: &[Line], header: &Line) -> Result<SetDescriptor, ConfigError> {
    if ls.is_empty() {
        return header.err(header.text.len(), "expected a set");
    }
    let mut i = 0;
    let s = set_node(ls, &mut i)?;
    match ls.get(i) {
        Some(extra) => extra.err(0, "expected one set per section"),
        None => Ok(s),
    }
}

fn domain_section(ls: &[Line], header: &Line) -> Result<DomainConfig, ConfigError> {
    let is_family = ls.first().is_some_and(|l| l.key_value().is_ok_and(|(k, _, _)| k == "family"));
    if !is_family {
        return set_section(ls, header).map(DomainConfig::Set);
    }
    let mut keys: Keys = Vec::new();
    for l in ls {
        let (k, v, at) = l.key_value()?;
        if keys.iter().any(|(_, k2, _, _)| *k2 == k) {
            return l.err(0, format!("duplicate key '{k}'"));
        }
        keys.push((*l, k, v, at));
    }
    let (l, v, at) = take(&mut keys, "family").unwrap();
    let family = match family_name(&l, v, at)? {
        "sparse-balls" => Family::SparseBalls,
        "clustered-balls" => Family::ClusteredBalls,
        "half-space" => Family::HalfSpace,
        "excluded-ball" => {
            let (l, v, at) = need(&mut keys, "radius", header)?;
            let radius = float(&l, v, at)?;
            if !(radius > 0.0 && radius.is_finite()) {
                return l.err(at, format!("radius {radius} must be positive"));
            }
            Family::ExcludedBall { radius }
        }
        _ => {
            let (l, v, at) = need(&mut keys, "center", header)?;
            let center = expr(&l, v, at)?;
            let (l, v, at) = need(&mut keys, "radius", header)?;
            Family::BallChain { center, radius: expr(&l, v, at)? }
        }
    };
    let inverted = match take(&mut keys, "inverted") {
        Some((l, v, at)) => boolean(&l, v, at)?,
        None => false,
    };
    no_extra(&keys)?;
    Ok(DomainConfig::Family { family, inverted })
}

/// Parses and validates a job file.
pub fn parse_config(text: &str) -> Result<JobConfig, ConfigError> {
    let ls = lines(text);
    let split = ls.iter().position(|l| l.text.starts_with('[')).unwrap_or(ls.len());
    let (top, rest) = ls.split_at(split);

    let mut command = None;
    let mut n = None;
    let mut p = None;
    let mut w = Weight::Constant;
    let mut pr = Params::default();
    let mut seen: Vec<&str> = Vec::new();
    for l in top {
        let (k, v, at) = l.key_value()?;
        if seen.contains(&k) {
            return l.err(0, format!("duplicate key '{k}'"));
        }
        seen.push(k);
        match k {
            "command" => command = Some(choice::<Command>(l, v, at)?),
            "n" => n = Some(integer::<usize>(l, v, at)?),
            "p" => p = Some(float(l, v, at)?),
            "weight" => w = weight(l, v, at)?,
            "variant" => pr.variant = Some(choice(l, v, at)?),
            "r_min" => pr.r_min = Some(float(l, v, at)?),
            "r_max" => pr.r_max = Some(float(l, v, at)?),
            "samples_per_decade" => pr.samples_per_decade = Some(integer(l, v, at)?),
            "grid_h" => pr.grid_h = Some(float(l, v, at)?),
            "tol" => pr.tol = Some(float(l, v, at)?),
            "max_iter" => pr.max_iter = Some(integer(l, v, at)?),
            "seed" => pr.seed = Some(integer(l, v, at)?),
            "point" => pr.point = Some(floats(l, v, at)?),
            "radius" => pr.radius = Some(float(l, v, at)?),
            "which" => pr.which = Some(choice(l, v, at)?),
            "terms" => pr.terms = Some(integer(l, v, at)?),
            "data" => pr.data = Some(data(l, v, at)?),
            "half_width" => pr.half_width = Some(float(l, v, at)?),
            "probe_radii" => pr.probe_radii = Some(floats(l, v, at)?),
            _ => return l.err(0, format!("unknown key '{k}'")),
        }
    }
    let missing = |key: &str| ConfigError::Parse { line: top.last().map_or(1, |l| l.no), column: 1, message: format!("missing key '{key}'") };
    let command = command.ok_or_else(|| missing("command"))?;
    let n = n.ok_or_else(|| missing("n"))?;
    let p = p.ok_or_else(|| missing("p"))?;
    let exponents = Exponents::new(n, p).map_err(|e| ConfigError::Validation(e.to_string()))?;
    let mut cfg = JobConfig { command, exponents, weight: w, domain: None, k: None, g: None, params: pr };

    let mut at = 0;
    while at < rest.len() {
        let header = rest[at];
        let end = rest[at + 1..].iter().position(|l| l.text.starts_with('[')).map_or(rest.len(), |e| at + 1 + e);
        let body = &rest[at + 1..end];
        match header.text {
            "[domain]" if cfg.domain.is_none() => cfg.domain = Some(domain_section(body, &header)?),
            "[k]" if cfg.k.is_none() => cfg.k = Some(set_section(body, &header)?),
            "[g]" if cfg.g.is_none() => cfg.g = Some(set_section(body, &header)?),
            "[domain]" | "[k]" | "[g]" => return header.err(0, format!("duplicate section {}", header.text)),
            other => return header.err(0, format!("expected [domain], [k] or [g], found {other}")),
        }
        at = end;
    }
    cfg.validate()?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// printing

/// Shortest round-tripping form, with `-0` printed as `0`.
fn real(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        x.to_string()
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| real(x)).collect::<Vec<_>>().join(", ")
}

fn print_set(s: &SetDescriptor, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let key = |out: &mut String, k: &str, v: String| {
        let _ = writeln!(out, "{pad}  {k} = {v}");
    };
    match s {
        SetDescriptor::Origin => {
            let _ = writeln!(out, "{pad}origin");
        }
        SetDescriptor::WholeSpace => {
            let _ = writeln!(out, "{pad}whole_space");
        }
        SetDescriptor::Ball(b) | SetDescriptor::ClosedBall(b) => {
            let name = if matches!(s, SetDescriptor::Ball(_)) { "ball" } else { "closed_ball" };
            let _ = writeln!(out, "{pad}{name} {{");
            key(out, "center", join(&b.center));
            key(out, "radius", real(b.radius));
            let _ = writeln!(out, "{pad}}}");
        }
        SetDescriptor::Annulus { center, inner, outer, closed } => {
            let _ = writeln!(out, "{pad}annulus {{");
            key(out, "center", join(center));
            key(out, "inner", real(*inner));
            key(out, "outer", real(*outer));
            key(out, "closed", closed.to_string());
            let _ = writeln!(out, "{pad}}}");
        }
        SetDescriptor::HalfSpace { normal, offset } => {
            let _ = writeln!(out, "{pad}half_space {{");
            key(out, "normal", join(normal));
            key(out, "offset", real(*offset));
            let _ = writeln!(out, "{pad}}}");
        }
        SetDescriptor::SequenceUnion { seq, closed } => {
            let _ = writeln!(out, "{pad}sequence {{");
            key(out, "center", seq.center.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "));
            key(out, "radius", seq.radius.to_string());
            key(out, "start", seq.start.to_string());
            key(out, "closed", closed.to_string());
            let _ = writeln!(out, "{pad}}}");
        }
        SetDescriptor::Complement(c) => {
            let _ = writeln!(out, "{pad}complement {{");
            print_set(c, depth + 1, out);
            let _ = writeln!(out, "{pad}}}");
        }
        SetDescriptor::Union(cs) | SetDescriptor::Intersection(cs) => {
            let name = if matches!(s, SetDescriptor::Union(_)) { "union" } else { "intersection" };
            let _ = writeln!(out, "{pad}{name} {{");
            for c in cs {
                print_set(c, depth + 1, out);
            }
            let _ = writeln!(out, "{pad}}}");
        }
    }
}

impl fmt::Display for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Constant(c) => write!(f, "constant({c})"),
            BoundaryData::Coordinate(k) => write!(f, "coordinate({k})"),
            BoundaryData::Step(r) => write!(f, "step({r})"),
            BoundaryData::Bump(r) => write!(f, "bump({r})"),
        }
    }
}

pub fn weight_name(w: Weight) -> String {
    match w {
        Weight::Constant => "constant".into(),
        Weight::PowerAtOrigin { delta } => format!("power({delta})"),
    }
}

/// Canonical text of `cfg`; `parse_config` reads it back to an equal value.
pub fn print_config(cfg: &JobConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("command", name_of(&cfg.command));
    kv("n", cfg.exponents.n().to_string());
    kv("p", real(cfg.exponents.p()));
    kv("weight", weight_name(cfg.weight));
    let pr = &cfg.params;
    if let Some(v) = &pr.variant {
        kv("variant", name_of(v));
    }
    let scalars = [("r_min", pr.r_min), ("r_max", pr.r_max), ("grid_h", pr.grid_h), ("tol", pr.tol), ("radius", pr.radius), ("half_width", pr.half_width)];
    for (k, v) in scalars {
        if let Some(v) = v {
            kv(k, real(v));
        }
    }
    if let Some(v) = pr.samples_per_decade {
        kv("samples_per_decade", v.to_string());
    }
    if let Some(v) = pr.max_iter {
        kv("max_iter", v.to_string());
    }
    if let Some(v) = pr.seed {
        kv("seed", v.to_string());
    }
    if let Some(v) = &pr.point {
        kv("point", join(v));
    }
    if let Some(v) = &pr.which {
        kv("which", name_of(v));
    }
    if let Some(v) = pr.terms {
        kv("terms", v.to_string());
    }
    if let Some(v) = &pr.data {
        kv("data", v.to_string());
    }
    if let Some(v) = &pr.probe_radii {
        kv("probe_radii", join(v));
    }
    match &cfg.domain {
        Some(DomainConfig::Family { family, inverted }) => {
            let _ = writeln!(out, "\n[domain]\nfamily = {}", family.name());
            match family {
                Family::ExcludedBall { radius } => {
                    let _ = writeln!(out, "radius = {}", real(*radius));
                }
                Family::BallChain { center, radius } => {
                    let _ = writeln!(out, "center = {center}\nradius = {radius}");
                }
                _ => {}
            }
            if *inverted {
                let _ = writeln!(out, "inverted = true");
            }
        }
        Some(DomainConfig::Set(s)) => {
            out.push_str("\n[domain]\n");
            print_set(s, 0, &mut out);
        }
        None => {}
    }
    for (name, s) in [("k", &cfg.k), ("g", &cfg.g)] {
        if let Some(s) = s {
            let _ = writeln!(out, "\n[{name}]");
            print_set(s, 0, &mut out);
        }
    }
    out
}

/// A set tree in the section syntax.
pub fn print_set_tree(s: &SetDescriptor) -> String {
    let mut out = String::new();
    print_set(s, 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPARSE: &str = "command = classify\nn = 2\np = 2\n\n[domain]\nfamily = sparse-balls\n";

    #[test]
    fn family_config_parses() {
        let c = parse_config(SPARSE).unwrap();
        assert_eq!(c.command, Command::Classify);
        assert_eq!(c.domain, Some(DomainConfig::Family { family: Family::SparseBalls, inverted: false }));
    }

    #[test]
    fn radius_expression_becomes_an_ast() {
        let text = "command = wiener\nn = 2\np = 2\n[domain]\ncomplement {\n  sequence {\n    center = 0.75*pow2(4^j), 0\n    radius = pow2(-(8^j))\n  }\n}\n";
        let c = parse_config(text).unwrap();
        let Some(DomainConfig::Set(SetDescriptor::Complement(inner))) = c.domain else { panic!() };
        let SetDescriptor::SequenceUnion { seq, closed } = *inner else { panic!() };
        assert!(!closed);
        assert_eq!(seq.start, 1);
        for j in 1..4 {
            assert_eq!(seq.radius.eval(j as f64).unwrap(), 2f64.powf(-(8f64.powi(j))));
        }
        assert_eq!(seq.radius, parse_expr("pow2(-(8^j))").unwrap());
    }

    #[test]
    fn p_below_n_fails_validation_for_classify() {
        let err = parse_config("command = classify\nn = 2\np = 1.5\n[domain]\nfamily = half-space\n").unwrap_err();
        assert!(matches!(&err, ConfigError::Validation(m) if m.contains("requires p ≥ n")), "{err}");
    }

    #[test]
    fn whole_space_is_refused_for_classify() {
        let err = parse_config("command = classify\nn = 2\np = 2\n[domain]\nwhole_space\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)));
    }

    #[test]
    fn errors_carry_line_and_column() {
        let err = parse_config("command = classify\nn = 2\np = 2\n[domain]\ncomplement {\n  sequence {\n    center = 1 +, 0\n    radius = 1\n  }\n}\n").unwrap_err();
        assert_eq!(err, ConfigError::Parse { line: 7, column: 17, message: "expected number or 'j' or exp or log or pow2 or '(' or '-', found end of input".into() });
        let err = parse_config("command = frobnicate\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, column: 11, .. }), "{err:?}");
        let err = parse_config("command = classify\nn = 2\np = 2\n[domain]\nunion {\n  origin\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 5, .. }), "{err:?}");
        let err = parse_config("command = classify\nn = 2\n   bogus = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, column: 4, .. }), "{err:?}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let c = parse_config("# job\ncommand = classify # trailing\n\nn = 2\np = 2\n[domain]\n# note\nfamily = half-space\n").unwrap();
        assert_eq!(c.domain, Some(DomainConfig::Family { family: Family::HalfSpace, inverted: false }));
    }

    #[test]
    fn full_config_round_trips() {
        let text = "command = capacity\nn = 2\np = 3\nweight = power(2)\ngrid_h = 0.0625\ntol = 1e-9\nseed = 7\n\
                    [k]\nunion {\n  closed_ball {\n    center = 3, 0\n    radius = 0.5\n  }\n  annulus {\n    center = 0, 0\n    inner = 1\n    outer = inf\n    closed = true\n  }\n  origin\n}\n\
                    [g]\nintersection {\n  half_space {\n    normal = 1, 0\n    offset = -2.5\n  }\n  complement {\n    ball {\n      center = 0, 0\n      radius = 0.25\n    }\n  }\n}\n";
        let c = parse_config(text).unwrap();
        assert_eq!(parse_config(&print_config(&c)).unwrap(), c);
    }
}
