use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::expr::{parse, Expr, Func, Point, Symbol, TIME_VAR};
use crate::{Error, Result};

/// Time interval used when sample points need a `t` coordinate.
pub const TIME_INTERVAL: Interval = Interval { lo: 0.0, hi: 1.0 };

/// Values this small count as a zero of a right-hand side.
pub const VANISHING_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidSystem(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Point at fraction `u` in `[0, 1]` of the interval.
    pub fn lerp(&self, u: f64) -> f64 {
        self.lo + u * (self.hi - self.lo)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A right-hand side that vanishes at a checked point.
#[derive(Clone, Debug, PartialEq)]
pub struct VanishingAt {
    /// 0-based index of the right-hand side.
    pub rhs: usize,
    pub point: Vec<f64>,
    pub at_center: bool,
}

/// Outcome of [`validate_system`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    /// 0-based indices of right-hand sides mentioning `t`.
    pub autonomy_violations: Vec<usize>,
    pub vanishing: Vec<VanishingAt>,
    /// Evaluation failures at the box center or corners.
    pub faults: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.autonomy_violations.is_empty() && self.vanishing.is_empty() && self.faults.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        for i in &self.autonomy_violations {
            parts.push(format!("f{} depends on t", i + 1));
        }
        for v in &self.vanishing {
            let place = if v.at_center { "center" } else { "corner" };
            parts.push(format!("f{} vanishes at {place} {:?}", v.rhs + 1, v.point));
        }
        parts.extend(self.faults.iter().cloned());
        if parts.is_empty() {
            format!("valid (n = {})", self.n)
        } else {
            parts.join("; ")
        }
    }
}

/// `dx_i/dt = f_i(x_1..x_n)` together with a sampling box.
#[derive(Clone, Debug)]
pub struct OdeSystem {
    /// `t` followed by the spatial variables.
    names: Arc<[Symbol]>,
    rhs: Vec<Expr>,
    bbox: Vec<Interval>,
    report: ValidationReport,
}

impl OdeSystem {
    /// Builds a system and runs the center/corner spot check.
    ///
    /// Structural problems (length mismatch, reserved or duplicate names,
    /// unknown variables) are errors; autonomy and vanishing problems are
    /// recorded in the [`ValidationReport`].
    pub fn new(vars: &[impl AsRef<str>], rhs: Vec<Expr>, bbox: Vec<Interval>) -> Result<OdeSystem> {
        let n = vars.len();
        if n == 0 {
            return Err(Error::InvalidSystem("no variables".into()));
        }
        if rhs.len() != n || bbox.len() != n {
            return Err(Error::InvalidSystem(format!(
                "{n} variables but {} right-hand sides and {} box intervals",
                rhs.len(),
                bbox.len()
            )));
        }
        let mut names: Vec<Symbol> = vec![Symbol::from(TIME_VAR)];
        for v in vars {
            let v = v.as_ref();
            if !is_identifier(v) || v == TIME_VAR || Func::from_name(v).is_some() {
                return Err(Error::InvalidSystem(format!("invalid variable name `{v}`")));
            }
            if names.iter().any(|n| &**n == v) {
                return Err(Error::InvalidSystem(format!("duplicate variable `{v}`")));
            }
            names.push(Symbol::from(v));
        }
        for (i, f) in rhs.iter().enumerate() {
            if let Some(bad) = f.variables().into_iter().find(|v| !names.contains(v)) {
                return Err(Error::InvalidSystem(format!(
                    "f{} mentions unknown variable `{bad}`",
                    i + 1
                )));
            }
        }
        let mut sys = OdeSystem {
            names: names.into(),
            rhs,
            bbox,
            report: ValidationReport::default(),
        };
        sys.report = sys.spot_check();
        Ok(sys)
    }

    /// Parses right-hand sides given as text.
    pub fn parse(vars: &[&str], rhs: &[&str], bbox: Vec<Interval>) -> Result<OdeSystem> {
        let mut allowed: Vec<&str> = vec![TIME_VAR];
        allowed.extend_from_slice(vars);
        let rhs = rhs
            .iter()
            .map(|s| parse(s, &allowed))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        OdeSystem::new(vars, rhs, bbox)
    }

    /// Same as [`OdeSystem::parse`] with every variable on `[lo, hi]`.
    pub fn parse_uniform(vars: &[&str], rhs: &[&str], lo: f64, hi: f64) -> Result<OdeSystem> {
        let bbox = vec![Interval::new(lo, hi)?; vars.len()];
        OdeSystem::parse(vars, rhs, bbox)
    }

    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    /// `t, x_1, ..., x_n`.
    pub fn names(&self) -> &Arc<[Symbol]> {
        &self.names
    }

    /// Spatial variables.
    pub fn vars(&self) -> &[Symbol] {
        &self.names[1..]
    }

    pub fn var(&self, i: usize) -> &Symbol {
        &self.names[i + 1]
    }

    pub fn rhs(&self) -> &[Expr] {
        &self.rhs
    }

    pub fn bbox(&self) -> &[Interval] {
        &self.bbox
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn point(&self, t: f64, x: &[f64]) -> Point {
        assert_eq!(x.len(), self.n());
        let mut values = Vec::with_capacity(x.len() + 1);
        values.push(t);
        values.extend_from_slice(x);
        Point::new(self.names.clone(), values)
    }

    pub fn center(&self) -> Point {
        let x: Vec<f64> = self.bbox.iter().map(Interval::center).collect();
        self.point(TIME_INTERVAL.center(), &x)
    }

    pub fn corners(&self) -> Vec<Point> {
        let n = self.n();
        (0..1usize << n.min(16))
            .map(|mask| {
                let x: Vec<f64> = self
                    .bbox
                    .iter()
                    .enumerate()
                    .map(|(i, iv)| if mask >> i & 1 == 1 { iv.hi } else { iv.lo })
                    .collect();
                self.point(TIME_INTERVAL.center(), &x)
            })
            .collect()
    }

    /// Uniform random point with each coordinate at least `margin` (as a
    /// fraction of the interval width) away from the box faces.
    pub fn random_point(&self, rng: &mut impl Rng, margin: f64) -> Point {
        let t = TIME_INTERVAL.lerp(rng.gen_range(margin..1.0 - margin));
        let x: Vec<f64> = self
            .bbox
            .iter()
            .map(|iv| iv.lerp(rng.gen_range(margin..1.0 - margin)))
            .collect();
        self.point(t, &x)
    }

    /// Point at unit-cube coordinates `u` (length n), mapped into the box.
    pub fn point_at_fraction(&self, t: f64, u: &[f64]) -> Point {
        let x: Vec<f64> = self.bbox.iter().zip(u).map(|(iv, &s)| iv.lerp(s)).collect();
        self.point(t, &x)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.bbox.iter().zip(p.x()).all(|(iv, &x)| iv.contains(x))
    }

    fn spot_check(&self) -> ValidationReport {
        let mut report = ValidationReport {
            n: self.n(),
            ..Default::default()
        };
        for (i, f) in self.rhs.iter().enumerate() {
            if f.depends_on(TIME_VAR) {
                report.autonomy_violations.push(i);
            }
        }
        let mut points = vec![(self.center(), true)];
        points.extend(self.corners().into_iter().map(|p| (p, false)));
        for (p, at_center) in &points {
            for (i, f) in self.rhs.iter().enumerate() {
                match f.eval(p) {
                    Ok(v) if v.abs() <= VANISHING_TOL => report.vanishing.push(VanishingAt {
                        rhs: i,
                        point: p.x().to_vec(),
                        at_center: *at_center,
                    }),
                    Ok(_) => {}
                    Err(e) => report.faults.push(format!("f{}: {e}", i + 1)),
                }
            }
        }
        report
    }
}

impl fmt::Display for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, rhs) in self.rhs.iter().enumerate() {
            writeln!(f, "d{}/dt = {}   on {}", self.var(i), rhs, self.bbox[i])?;
        }
        Ok(())
    }
}

/// Autonomy, nonvanishing at the box center and corners, and dimension.
pub fn validate_system(sys: &OdeSystem) -> ValidationReport {
    sys.report().clone()
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_box_is_valid() {
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], &["x1*x2", "x2"], 1.0, 2.0).unwrap();
        let r = validate_system(&sys);
        assert!(r.is_valid(), "{}", r.summary());
        assert_eq!(r.n, 2);
    }

    #[test]
    fn time_dependence_is_reported() {
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], &["t*x1", "x2"], 1.0, 2.0).unwrap();
        let r = validate_system(&sys);
        assert_eq!(r.autonomy_violations, vec![0]);
        assert!(!r.is_valid());
    }

    #[test]
    fn vanishing_at_center() {
        let sys = OdeSystem::parse_uniform(&["x1", "x2"], &["x1", "x2"], -1.0, 1.0).unwrap();
        let r = validate_system(&sys);
        let at_center: Vec<_> = r.vanishing.iter().filter(|v| v.at_center).collect();
        assert_eq!(at_center.len(), 2);
        assert_eq!(at_center[0].point, vec![0.0, 0.0]);
    }

    #[test]
    fn domain_fault_at_corner() {
        let sys = OdeSystem::parse_uniform(&["x1"], &["ln(x1)"], -1.0, 2.0).unwrap();
        assert!(!sys.report().faults.is_empty());
    }

    #[test]
    fn structural_errors() {
        assert!(OdeSystem::parse_uniform(&["x1", "x1"], &["1", "1"], 1.0, 2.0).is_err());
        assert!(OdeSystem::parse_uniform(&["t"], &["1"], 1.0, 2.0).is_err());
        assert!(OdeSystem::parse_uniform(&["exp"], &["1"], 1.0, 2.0).is_err());
        assert!(OdeSystem::parse_uniform(&["x1"], &["1", "2"], 1.0, 2.0).is_err());
        assert!(OdeSystem::parse_uniform(&["x1"], &["x2"], 1.0, 2.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
    }
}
