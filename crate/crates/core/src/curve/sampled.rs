//! Curves given by samples, interpolated by cubic Hermite segments.

use super::{Curve, Vec3};
use crate::error::{Error, Result};
use crate::quadrature::kronrod21;
use std::io::Read;
use std::path::Path;

const MIN_SAMPLES: usize = 8;

/// Cubic `c0 + c1 τ + c2 τ² + c3 τ³` on `[t0, t0 + h]`, `τ = (t - t0)/h`.
#[derive(Debug, Clone, Copy)]
struct Cubic {
    t0: f64,
    h: f64,
    c: [Vec3; 4],
}

impl Cubic {
    fn hermite(t0: f64, h: f64, p0: Vec3, p1: Vec3, m0: Vec3, m1: Vec3) -> Self {
        let c2 = 3.0 * (p1 - p0) - h * (2.0 * m0 + m1);
        let c3 = 2.0 * (p0 - p1) + h * (m0 + m1);
        Cubic {
            t0,
            h,
            c: [p0, h * m0, c2, c3],
        }
    }

    fn at(&self, tau: f64) -> Vec3 {
        let [c0, c1, c2, c3] = self.c;
        c0 + (c1 + (c2 + c3 * tau) * tau) * tau
    }

    /// `dH/dτ`.
    fn slope(&self, tau: f64) -> Vec3 {
        let [_, c1, c2, c3] = self.c;
        c1 + (2.0 * c2 + 3.0 * c3 * tau) * tau
    }

    fn second(&self, tau: f64) -> Vec3 {
        let [_, _, c2, c3] = self.c;
        2.0 * c2 + 6.0 * c3 * tau
    }

    /// `H(τ₁ + d) - H(τ₁)` without subtracting nearly equal positions.
    fn difference(&self, tau1: f64, d: f64) -> Vec3 {
        let [_, c1, c2, c3] = self.c;
        let tau2 = tau1 + d;
        d * (c1 + c2 * (tau1 + tau2) + c3 * (tau1 * tau1 + tau1 * tau2 + tau2 * tau2))
    }

    fn arc(&self, tau1: f64, tau2: f64) -> f64 {
        if tau1 == tau2 {
            return 0.0;
        }
        kronrod21(|x| self.slope(x).norm(), tau1, tau2).abs()
    }
}

/// A sampled curve: parameters, points and tangents `dγ/dt`.
///
/// Positions between samples come from cubic Hermite interpolation, and
/// arclength is the exact arclength of that interpolant, so chords never
/// exceed the intrinsic distance. A closed curve wraps from the last sample
/// back to the first; if the last point repeats the first it is dropped,
/// otherwise the closing gap in `t` is the mean sample spacing.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    params: Vec<f64>,
    points: Vec<Vec3>,
    tangents: Vec<Vec3>,
    closed: bool,
    period: f64,
    segments: Vec<Cubic>,
    // Arclength at the start of each segment, plus the total.
    cumulative: Vec<f64>,
}

/// Where an (unwrapped) parameter falls: period index, segment, local τ.
#[derive(Debug, Clone, Copy)]
struct Locus {
    lap: i64,
    seg: usize,
    tau: f64,
}

impl SampledCurve {
    pub fn new(params: Vec<f64>, points: Vec<Vec3>, tangents: Vec<Vec3>, closed: bool) -> Result<Self> {
        if tangents.len() != points.len() {
            return Err(Error::Input(format!(
                "{} points but {} tangents",
                points.len(),
                tangents.len()
            )));
        }
        let (params, points, keep, period) = normalize(params, points, closed)?;
        let mut tangents = tangents;
        tangents.truncate(keep);
        if let Some(i) = tangents.iter().position(|m| !(m.norm() > 0.0) || !m.iter().all(|x| x.is_finite())) {
            return Err(Error::Input(format!("tangent {i} is zero or not finite")));
        }
        Ok(Self::build(params, points, tangents, closed, period))
    }

    /// Tangents from the C² cubic spline through the points.
    pub fn from_points(params: Vec<f64>, points: Vec<Vec3>, closed: bool) -> Result<Self> {
        let (params, points, _, period) = normalize(params, points, closed)?;
        let tangents = spline_tangents(&params, &points, closed, period);
        if let Some(i) = tangents.iter().position(|m| !(m.norm() > 0.0)) {
            return Err(Error::Degenerate(format!("zero tangent at sample {i}")));
        }
        Ok(Self::build(params, points, tangents, closed, period))
    }

    /// Sample `f` at `n` equally spaced parameters of `[a, b]` (`b`
    /// excluded for closed curves).
    pub fn from_fn<F: Fn(f64) -> Vec3>(f: F, a: f64, b: f64, n: usize, closed: bool) -> Result<Self> {
        let steps = if closed { n } else { n.saturating_sub(1).max(1) };
        let h = (b - a) / steps as f64;
        let params: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
        let points = params.iter().map(|&t| f(t)).collect();
        Self::from_points(params, points, closed)
    }

    /// Read `t,x,y,z` CSV; a comment line `# closed=true` marks a closed curve.
    pub fn from_csv_reader<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| Error::Input(e.to_string()))?;
        let closed = text.lines().any(|line| {
            line.trim_start()
                .strip_prefix('#')
                .map(|rest| rest.replace(' ', "").eq_ignore_ascii_case("closed=true"))
                .unwrap_or(false)
        });
        let mut csv = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = csv.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["t", "x", "y", "z"] {
            return Err(Error::Input(format!(
                "expected header t,x,y,z, found {}",
                names.join(",")
            )));
        }
        let mut params = Vec::new();
        let mut points = Vec::new();
        for (line, record) in csv.deserialize::<(f64, f64, f64, f64)>().enumerate() {
            let (t, x, y, z) = record.map_err(|e| Error::Input(format!("row {}: {e}", line + 1)))?;
            params.push(t);
            points.push(Vec3::new(x, y, z));
        }
        Self::from_points(params, points, closed)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Input(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    fn build(params: Vec<f64>, points: Vec<Vec3>, tangents: Vec<Vec3>, closed: bool, period: f64) -> Self {
        let n = params.len();
        let count = if closed { n } else { n - 1 };
        let segments: Vec<Cubic> = (0..count)
            .map(|i| {
                let next = (i + 1) % n;
                let end = if next == 0 { params[0] + period } else { params[next] };
                Cubic::hermite(params[i], end - params[i], points[i], points[next], tangents[i], tangents[next])
            })
            .collect();
        let mut cumulative = Vec::with_capacity(count + 1);
        let mut total = 0.0;
        cumulative.push(0.0);
        for seg in &segments {
            // Two halves keep the fixed rule accurate on bent segments.
            total += seg.arc(0.0, 0.5) + seg.arc(0.5, 1.0);
            cumulative.push(total);
        }
        SampledCurve {
            params,
            points,
            tangents,
            closed,
            period,
            segments,
            cumulative,
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn tangents(&self) -> &[Vec3] {
        &self.tangents
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    fn locate(&self, t: f64) -> Locus {
        let t0 = self.params[0];
        let (lap, y) = if self.closed {
            let lap = ((t - t0) / self.period).floor();
            (lap as i64, t - lap * self.period)
        } else {
            (0, t)
        };
        let idx = self.params.partition_point(|&p| p <= y);
        let seg = idx.saturating_sub(1).min(self.segments.len() - 1);
        let s = &self.segments[seg];
        Locus {
            lap,
            seg,
            tau: (y - s.t0) / s.h,
        }
    }

    fn global(&self, l: &Locus) -> i64 {
        l.lap * self.segments.len() as i64 + l.seg as i64
    }

    /// Arclength coordinate of `t` (unwrapped for closed curves).
    fn arc_coordinate(&self, t: f64) -> f64 {
        let l = self.locate(t);
        let total = *self.cumulative.last().unwrap();
        l.lap as f64 * total + self.cumulative[l.seg] + self.segments[l.seg].arc(0.0, l.tau)
    }

    /// Pieces `(segment, τ_start, Δτ)` covering `[s, t]` for `s ≤ t` when
    /// they span at most three segments.
    fn pieces(&self, s: f64, t: f64) -> Option<Vec<(usize, f64, f64)>> {
        let ls = self.locate(s);
        let lt = self.locate(t);
        let (gs, gt) = (self.global(&ls), self.global(&lt));
        if gt - gs > 2 {
            return None;
        }
        if gs == gt {
            let seg = &self.segments[ls.seg];
            return Some(vec![(ls.seg, ls.tau, (t - s) / seg.h)]);
        }
        let n = self.segments.len();
        let mut out = vec![(ls.seg, ls.tau, 1.0 - ls.tau)];
        for g in gs + 1..gt {
            out.push((g.rem_euclid(n as i64) as usize, 0.0, 1.0));
        }
        out.push((lt.seg, 0.0, lt.tau));
        Some(out)
    }
}

impl Curve for SampledCurve {
    fn domain(&self) -> (f64, f64) {
        let a = self.params[0];
        if self.closed {
            (a, a + self.period)
        } else {
            (a, *self.params.last().unwrap())
        }
    }

    fn is_closed(&self) -> bool {
        self.closed
    }

    fn position(&self, t: f64) -> Vec3 {
        let l = self.locate(t);
        self.segments[l.seg].at(l.tau)
    }

    fn velocity(&self, t: f64) -> Vec3 {
        let l = self.locate(t);
        let s = &self.segments[l.seg];
        s.slope(l.tau) / s.h
    }

    fn acceleration(&self, t: f64) -> Vec3 {
        let l = self.locate(t);
        let s = &self.segments[l.seg];
        s.second(l.tau) / (s.h * s.h)
    }

    fn chord(&self, s: f64, t: f64) -> Vec3 {
        if t < s {
            return -self.chord(t, s);
        }
        match self.pieces(s, t) {
            Some(pieces) => pieces
                .iter()
                .map(|&(seg, tau, d)| self.segments[seg].difference(tau, d))
                .fold(Vec3::zeros(), |acc, v| acc + v),
            None => self.position(t) - self.position(s),
        }
    }

    fn arc_length(&self, s: f64, t: f64) -> f64 {
        let (s, t) = if t < s { (t, s) } else { (s, t) };
        match self.pieces(s, t) {
            Some(pieces) => pieces
                .iter()
                .map(|&(seg, tau, d)| self.segments[seg].arc(tau, tau + d))
                .sum(),
            None => self.arc_coordinate(t) - self.arc_coordinate(s),
        }
    }

    fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn panel_width(&self) -> f64 {
        let (a, b) = self.domain();
        // A few samples per panel.
        (b - a) * 4.0 / self.segments.len() as f64
    }
}

type Normalized = (Vec<f64>, Vec<Vec3>, usize, f64);

fn normalize(mut params: Vec<f64>, mut points: Vec<Vec3>, closed: bool) -> Result<Normalized> {
    if params.len() != points.len() {
        return Err(Error::Input(format!(
            "{} parameters but {} points",
            params.len(),
            points.len()
        )));
    }
    if params.len() < MIN_SAMPLES {
        return Err(Error::Input(format!(
            "a sampled curve needs at least {MIN_SAMPLES} samples, got {}",
            params.len()
        )));
    }
    if !params.iter().all(|t| t.is_finite()) || !points.iter().all(|p| p.iter().all(|x| x.is_finite())) {
        return Err(Error::Input("samples must be finite".into()));
    }
    if let Some(i) = params.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Input(format!(
            "parameters must increase strictly (sample {})",
            i + 1
        )));
    }
    let n = params.len();
    let mut period = 0.0;
    if closed {
        let scale = points.iter().map(|p| p.amax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        if (points[n - 1] - points[0]).amax() <= 1e-12 * scale {
            period = params[n - 1] - params[0];
            params.pop();
            points.pop();
            if params.len() < MIN_SAMPLES {
                return Err(Error::Input(format!(
                    "a closed curve needs at least {MIN_SAMPLES} distinct samples"
                )));
            }
        } else {
            period = (params[n - 1] - params[0]) * n as f64 / (n - 1) as f64;
        }
    }
    let keep = params.len();
    Ok((params, points, keep, period))
}

/// Slopes of the C² cubic spline through the samples: periodic when
/// closed, clamped to three-point one-sided differences at open ends.
fn spline_tangents(params: &[f64], points: &[Vec3], closed: bool, period: f64) -> Vec<Vec3> {
    let n = params.len();
    let h: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { params[i + 1] - params[i] } else { params[0] + period - params[n - 1] })
        .collect();
    let slope = |i: usize| (points[(i + 1) % n] - points[i]) / h[i];
    if closed {
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![Vec3::zeros(); n];
        for i in 0..n {
            let prev = (i + n - 1) % n;
            lower[i] = h[i];
            diag[i] = 2.0 * (h[prev] + h[i]);
            upper[i] = h[prev];
            rhs[i] = 3.0 * (slope(prev) * h[i] + slope(i) * h[prev]);
        }
        return solve_cyclic(&lower, &diag, &upper, rhs);
    }
    let (h0, h1) = (h[0], h[1]);
    let first = points[0] * (-(2.0 * h0 + h1) / (h0 * (h0 + h1))) + points[1] * ((h0 + h1) / (h0 * h1))
        - points[2] * (h0 / (h1 * (h0 + h1)));
    let (g0, g1) = (h[n - 2], h[n - 3]);
    let last = points[n - 1] * ((2.0 * g0 + g1) / (g0 * (g0 + g1))) - points[n - 2] * ((g0 + g1) / (g0 * g1))
        + points[n - 3] * (g0 / (g1 * (g0 + g1)));
    let mut lower = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![Vec3::zeros(); n];
    rhs[0] = first;
    rhs[n - 1] = last;
    for i in 1..n - 1 {
        lower[i] = h[i];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        upper[i] = h[i - 1];
        rhs[i] = 3.0 * (slope(i - 1) * h[i] + slope(i) * h[i - 1]);
    }
    solve_tridiagonal(&lower, &diag, &upper, rhs)
}

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], mut rhs: Vec<Vec3>) -> Vec<Vec3> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        let prev = rhs[i - 1];
        rhs[i] = (rhs[i] - prev * lower[i]) / m;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= next * c[i];
    }
    rhs
}

/// Cyclic tridiagonal system (`lower[0]` couples to the last unknown,
/// `upper[n-1]` to the first) by Sherman–Morrison.
fn solve_cyclic(lower: &[f64], diag: &[f64], upper: &[f64], rhs: Vec<Vec3>) -> Vec<Vec3> {
    let n = diag.len();
    let alpha = upper[n - 1];
    let beta = lower[0];
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(lower, &d, upper, rhs);
    let mut u = vec![Vec3::zeros(); n];
    u[0] = Vec3::repeat(gamma);
    u[n - 1] = Vec3::repeat(alpha);
    let z = solve_tridiagonal(lower, &d, upper, u);
    let fact_num = x[0] + x[n - 1] * (beta / gamma);
    let fact_den = z[0] + z[n - 1] * (beta / gamma) + Vec3::repeat(1.0);
    let fact = fact_num.component_div(&fact_den);
    x.iter().zip(&z).map(|(xi, zi)| xi - zi.component_mul(&fact)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(n: usize) -> SampledCurve {
        SampledCurve::from_fn(|t| Vec3::new(t.cos(), t.sin(), 0.0), 0.0, 2.0 * PI, n, true).unwrap()
    }

    #[test]
    fn interpolates_samples() {
        let c = circle(64);
        for (t, p) in c.params().iter().zip(c.points()) {
            assert!((c.position(*t) - p).norm() < 1e-15);
        }
        assert!((c.position(0.123) - Vec3::new(0.123f64.cos(), 0.123f64.sin(), 0.0)).norm() < 1e-5);
    }

    #[test]
    fn closed_length_converges() {
        let err64 = (circle(64).length() - 2.0 * PI).abs();
        let err256 = (circle(256).length() - 2.0 * PI).abs();
        assert!(err256 < 1e-6 && err256 < err64 / 8.0, "{err64} {err256}");
    }

    #[test]
    fn chord_and_arc_consistent_across_seam() {
        let c = circle(32);
        let (s, t) = (2.0 * PI - 0.01, 2.0 * PI + 0.02);
        let chord = c.chord(s, t);
        let direct = c.position(t) - c.position(s);
        assert!((chord - direct).norm() < 1e-14);
        let arc = c.arc_length(s, t);
        assert!(chord.norm() <= arc && (arc - 0.03).abs() < 1e-6, "{arc}");
    }

    #[test]
    fn repeated_endpoint_is_dropped() {
        let params: Vec<f64> = (0..=16).map(|i| i as f64 * 2.0 * PI / 16.0).collect();
        let points = params.iter().map(|t| Vec3::new(t.cos(), t.sin(), 0.0)).collect();
        let c = SampledCurve::from_points(params, points, true).unwrap();
        assert_eq!(c.len(), 16);
        assert!((c.domain().1 - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let mut text = String::from("# closed=true\nt,x,y,z\n");
        for i in 0..12 {
            let t = i as f64 * 2.0 * PI / 12.0;
            text.push_str(&format!("{t},{},{},0\n", t.cos(), t.sin()));
        }
        let c = SampledCurve::from_csv_reader(text.as_bytes()).unwrap();
        assert!(c.is_closed());
        assert_eq!(c.len(), 12);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(SampledCurve::from_csv_reader("a,b,c\n1,2,3\n".as_bytes()).is_err());
        assert!(SampledCurve::from_csv_reader("t,x,y,z\n0,0,0,0\n".as_bytes()).is_err());
        let rows: String = (0..10).map(|i| format!("{},{i},0,0\n", 9 - i)).collect();
        assert!(SampledCurve::from_csv_reader(format!("t,x,y,z\n{rows}").as_bytes()).is_err());
    }
}
