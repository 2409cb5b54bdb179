//! Text formats for systems and web maps.
//!
//! ```text
//! # comment
//! vars: x1 x2
//! f1 = x2^2
//! f2 = 1
//! box: x2 in [1, 3]
//! ```
//!
//! Map files use the same layout with `phi0 = <expr in t>` and
//! `phi<i> = <expr in x_i>` lines; a `vars:` line is optional.

use std::fmt;

use webgeom::coframe::{is_identifier, Interval, OdeSystem};
use webgeom::equivalence::WebMap;
use webgeom::{parse, Expr, Func, ParseError, Symbol, TIME_VAR};

pub const DEFAULT_BOX: Interval = Interval { lo: 1.0, hi: 2.0 };

/// A format error located by line (1-based) and byte offset into the file.
#[derive(Clone, Debug, PartialEq)]
pub struct FileError {
    pub line: usize,
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, byte {}: {}",
            self.line, self.offset, self.message
        )
    }
}

impl std::error::Error for FileError {}

struct Line<'a> {
    number: usize,
    /// Byte offset of `text` in the file.
    start: usize,
    text: &'a str,
}

/// Non-empty lines with comments and surrounding whitespace removed.
fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let body = raw.trim_end_matches(['\n', '\r']);
        let body = body.split('#').next().unwrap_or("");
        let lead = body.len() - body.trim_start().len();
        let trimmed = body.trim();
        if !trimmed.is_empty() {
            out.push(Line {
                number: i + 1,
                start: start + lead,
                text: trimmed,
            });
        }
        start += raw.len();
    }
    out
}

fn err(line: &Line, at: usize, message: impl Into<String>) -> FileError {
    FileError {
        line: line.number,
        offset: line.start + at,
        message: message.into(),
    }
}

/// An assignment `name = expr` with the byte offset of `expr` within the line.
fn assignment<'a>(line: &Line<'a>) -> Option<(&'a str, &'a str, usize)> {
    let eq = line.text.find('=')?;
    let lhs = line.text[..eq].trim();
    let rest = &line.text[eq + 1..];
    let lead = rest.len() - rest.trim_start().len();
    Some((lhs, rest.trim(), eq + 1 + lead))
}

fn parse_vars(line: &Line, list: &str, at: usize) -> Result<Vec<String>, FileError> {
    let mut vars: Vec<String> = Vec::new();
    for name in list
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
    {
        let pos = at + (name.as_ptr() as usize - list.as_ptr() as usize);
        if !is_identifier(name) {
            return Err(err(
                line,
                pos,
                format!("`{name}` is not a valid variable name"),
            ));
        }
        if name == TIME_VAR || Func::from_name(name).is_some() {
            return Err(err(line, pos, format!("`{name}` is reserved")));
        }
        if vars.iter().any(|v| v == name) {
            return Err(err(line, pos, format!("duplicate variable `{name}`")));
        }
        vars.push(name.to_string());
    }
    if vars.is_empty() {
        return Err(err(line, at, "no variables declared"));
    }
    Ok(vars)
}

/// `x2 in [1, 3]`.
fn parse_box(line: &Line, decl: &str, at: usize) -> Result<(String, Interval), FileError> {
    let bad = || {
        err(
            line,
            at,
            format!("expected `<var> in [a, b]`, found `{decl}`"),
        )
    };
    let (name, range) = decl.split_once(" in ").ok_or_else(bad)?;
    let range = range.trim();
    let inner = range
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(bad)?;
    let (a, b) = inner.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let iv = Interval::new(a, b).map_err(|e| err(line, at, e.to_string()))?;
    Ok((name.trim().to_string(), iv))
}

/// Index `k` of a left-hand side `<prefix><k>`.
fn indexed(lhs: &str, prefix: &str) -> Option<usize> {
    let digits = lhs.strip_prefix(prefix)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

struct Pending<'a> {
    line: Line<'a>,
    index: usize,
    text: &'a str,
    at: usize,
}

fn parse_expr(p: &Pending, allowed: &[&str]) -> Result<Expr, FileError> {
    parse(p.text, allowed).map_err(|e| {
        let message = match &e {
            ParseError::Syntax { message, .. } => format!("syntax error: {message}"),
            ParseError::UnknownVariable { name, .. } => format!("unknown variable `{name}`"),
        };
        err(&p.line, p.at + e.offset(), message)
    })
}

/// Parses a system file; variables default to the box `[1, 2]`.
pub fn parse_system(text: &str) -> Result<OdeSystem, FileError> {
    let mut vars: Option<(Vec<String>, usize)> = None;
    let mut boxes: Vec<(Line, String, Interval)> = Vec::new();
    let mut rhs: Vec<Pending> = Vec::new();
    let mut last_line = 0;
    for line in lines(text) {
        last_line = line.number;
        if let Some(list) = line.text.strip_prefix("vars:") {
            if vars.is_some() {
                return Err(err(&line, 0, "second `vars:` line"));
            }
            let at = line.text.len() - list.len();
            vars = Some((parse_vars(&line, list, at)?, line.number));
        } else if let Some(decl) = line.text.strip_prefix("box:") {
            let at = line.text.len() - decl.len() + (decl.len() - decl.trim_start().len());
            let (name, iv) = parse_box(&line, decl.trim(), at)?;
            boxes.push((line, name, iv));
        } else if let Some((lhs, expr, at)) = assignment(&line) {
            let index = indexed(lhs, "f")
                .filter(|&k| k >= 1)
                .ok_or_else(|| err(&line, 0, format!("expected `f<i> = ...`, found `{lhs} =`")))?;
            if rhs.iter().any(|p| p.index == index) {
                return Err(err(&line, 0, format!("f{index} defined twice")));
            }
            rhs.push(Pending {
                line,
                index,
                text: expr,
                at,
            });
        } else {
            return Err(err(&line, 0, format!("unrecognized line `{}`", line.text)));
        }
    }
    let eof = FileError {
        line: last_line,
        offset: text.len(),
        message: String::new(),
    };
    let (vars, _) = vars.ok_or_else(|| FileError {
        message: "missing `vars:` line".into(),
        ..eof.clone()
    })?;
    let n = vars.len();
    let mut allowed: Vec<&str> = vec![TIME_VAR];
    allowed.extend(vars.iter().map(String::as_str));
    let mut exprs: Vec<Option<Expr>> = vec![None; n];
    for p in &rhs {
        if p.index > n {
            return Err(err(
                &p.line,
                0,
                format!("f{} but only {n} variables", p.index),
            ));
        }
        exprs[p.index - 1] = Some(parse_expr(p, &allowed)?);
    }
    let exprs: Vec<Expr> = exprs
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            e.ok_or_else(|| FileError {
                message: format!("missing f{}", i + 1),
                ..eof.clone()
            })
        })
        .collect::<Result<_, _>>()?;
    let mut bbox = vec![DEFAULT_BOX; n];
    for (line, name, iv) in &boxes {
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| err(line, 0, format!("box for unknown variable `{name}`")))?;
        bbox[i] = *iv;
    }
    OdeSystem::new(&vars, exprs, bbox).map_err(|e| FileError {
        message: e.to_string(),
        ..eof
    })
}

/// Parses a map file against the variables of the source system.
pub fn parse_map(text: &str, vars: &[Symbol]) -> Result<WebMap, FileError> {
    let n = vars.len();
    let mut allowed: Vec<&str> = vec![TIME_VAR];
    allowed.extend(vars.iter().map(|v| &**v));
    let mut comps: Vec<Option<Expr>> = vec![None; n + 1];
    let mut last_line = 0;
    for line in lines(text) {
        last_line = line.number;
        if let Some(list) = line.text.strip_prefix("vars:") {
            let at = line.text.len() - list.len();
            let declared = parse_vars(&line, list, at)?;
            if declared
                .iter()
                .map(String::as_str)
                .ne(vars.iter().map(|v| &**v))
            {
                return Err(err(&line, at, "map variables differ from the system's"));
            }
            continue;
        }
        let (lhs, expr, at) = assignment(&line)
            .ok_or_else(|| err(&line, 0, format!("unrecognized line `{}`", line.text)))?;
        let index = indexed(lhs, "phi").filter(|&k| k <= n).ok_or_else(|| {
            err(
                &line,
                0,
                format!("expected `phi0..phi{n} = ...`, found `{lhs} =`"),
            )
        })?;
        if comps[index].is_some() {
            return Err(err(&line, 0, format!("phi{index} defined twice")));
        }
        let p = Pending {
            line,
            index,
            text: expr,
            at,
        };
        comps[index] = Some(parse_expr(&p, &allowed)?);
    }
    let eof = |message: String| FileError {
        line: last_line,
        offset: text.len(),
        message,
    };
    let mut comps = comps
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| eof(format!("missing phi{i}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let time = comps.remove(0);
    WebMap::new(time, comps, vars).map_err(|e| eof(e.to_string()))
}

/// Writes a system in the file format; `None` if an expression has no
/// textual form (numerical inverses).
pub fn render_system(sys: &OdeSystem) -> Option<String> {
    let mut out = String::new();
    out.push_str("vars:");
    for v in sys.vars() {
        out.push(' ');
        out.push_str(v);
    }
    out.push('\n');
    let allowed: Vec<&str> = sys.names().iter().map(|s| &**s).collect();
    for (i, f) in sys.rhs().iter().enumerate() {
        let text = f.to_string();
        if parse(&text, &allowed).ok()? != *f {
            return None;
        }
        out.push_str(&format!("f{} = {text}\n", i + 1));
    }
    for (v, iv) in sys.vars().iter().zip(sys.bbox()) {
        out.push_str(&format!("box: {v} in [{:?}, {:?}]\n", iv.lo, iv.hi));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_with_boxes_and_comments() {
        let text =
            "# square\r\nvars: x1 x2\r\nf2 = 1   # constant\r\nf1 = x2^2\r\nbox: x2 in [1, 3]\r\n";
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.n(), 2);
        assert_eq!(sys.rhs()[0].to_string(), "x2^2");
        assert_eq!(sys.bbox()[0], DEFAULT_BOX);
        assert_eq!(sys.bbox()[1], Interval::new(1.0, 3.0).unwrap());
    }

    #[test]
    fn syntax_error_offset_is_a_file_offset() {
        let text = "vars: x1 x2\nf1 = x1*\nf2 = 1\n";
        let e = parse_system(text).unwrap_err();
        assert_eq!(e.line, 2);
        // "f1 = " starts at byte 12; the error is 3 bytes into "x1*".
        assert_eq!(e.offset, 12 + 5 + 3);
    }

    #[test]
    fn format_errors() {
        for (text, needle) in [
            ("f1 = 1\n", "missing `vars:`"),
            ("vars: x1 x2\nf1 = 1\n", "missing f2"),
            ("vars: x1 t\n", "reserved"),
            ("vars: x1 exp\n", "reserved"),
            ("vars: x1 x1\n", "duplicate"),
            ("vars: 1x\n", "not a valid"),
            ("vars: x1\nf1 = 1\nf1 = 2\n", "twice"),
            ("vars: x1\nf1 = y\n", "unknown variable"),
            ("vars: x1\nf1 = 1\nbox: x1 in [2, 1]\n", "bad interval"),
            ("vars: x1\nf1 = 1\nbox: x2 in [1, 2]\n", "unknown variable"),
            ("vars: x1\ng1 = 1\n", "expected `f<i>"),
            ("vars: x1\nf1 = 1\nhello\n", "unrecognized"),
        ] {
            let e = parse_system(text).unwrap_err();
            assert!(e.message.contains(needle), "{text:?}: {e}");
        }
    }

    #[test]
    fn map_file() {
        let sys = parse_system("vars: x1 x2\nf1 = x2^2\nf2 = 1\n").unwrap();
        let m = parse_map("phi0 = 2*t\nphi1 = exp(x1)\nphi2 = 3*x2 - 1\n", sys.vars()).unwrap();
        assert_eq!(m.space()[0].to_string(), "exp(x1)");
        let e = parse_map("phi0 = t\nphi1 = x1 + x2\nphi2 = x2\n", sys.vars()).unwrap_err();
        assert!(e.message.contains("phi1 depends on x2"), "{e}");
        let e = parse_map("phi0 = t\nphi1 = x1\n", sys.vars()).unwrap_err();
        assert!(e.message.contains("missing phi2"), "{e}");
        let e = parse_map("vars: y1 y2\n", sys.vars()).unwrap_err();
        assert!(e.message.contains("differ"), "{e}");
    }

    #[test]
    fn render_round_trip() {
        let text = "vars: x1 x2\nf1 = x1*x2\nf2 = 2/x2\nbox: x2 in [0.5, 3]\n";
        let sys = parse_system(text).unwrap();
        let again = parse_system(&render_system(&sys).unwrap()).unwrap();
        assert_eq!(again.rhs(), sys.rhs());
        assert_eq!(again.bbox(), sys.bbox());
    }
}
