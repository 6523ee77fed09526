//! Numerical integration: composite Simpson with interval doubling,
//! adaptive 7/15-point Gauss–Kronrod, cumulative tables for sliding-window
//! integrals, and a classifier for integrals over `[a, ∞)`.

/// Default relative tolerance of [`simpson`].
pub const SIMPSON_REL_TOL: f64 = 1e-8;

const MAX_DOUBLINGS: u32 = 22;

/// Composite Simpson rule on `[a, b]`, doubling the panel count (reusing
/// previous evaluations) until two successive estimates agree to `rel_tol`.
pub fn simpson<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64, E> {
    if a == b {
        return Ok(0.0);
    }
    let h0 = b - a;
    // Sums of endpoint, even-interior and odd-interior samples.
    let ends = f(a)? + f(b)?;
    let mut evens = 0.0;
    let mut odds = f(a + 0.5 * h0)?;
    let mut n: u64 = 2;
    let mut prev = (ends + 4.0 * odds) * h0 / 6.0;
    for _ in 0..MAX_DOUBLINGS {
        n *= 2;
        let h = h0 / n as f64;
        evens += odds;
        odds = 0.0;
        for i in (1..n).step_by(2) {
            odds += f(a + i as f64 * h)?;
        }
        let est = (ends + 4.0 * odds + 2.0 * evens) * h / 3.0;
        let diff = (est - prev).abs();
        if n >= 8 && diff <= rel_tol * est.abs().max(1e-300) {
            return Ok(est);
        }
        if diff <= f64::MIN_POSITIVE {
            return Ok(est);
        }
        prev = est;
    }
    Ok(prev)
}

/// Simpson's rule with a fixed (even) number of panels.
pub fn simpson_fixed<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<f64, E> {
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod estimate with its embedded 7-point Gauss estimate.
pub fn kronrod15<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
) -> Result<(f64, f64), E> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (i, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let pair = f(c - h * x)? + f(c + h * x)?;
        kron += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Ok((kron * h, gauss * h))
}

/// Adaptive Gauss–Kronrod (G7/K15) integration to absolute tolerance
/// `abs_tol`, bisecting subintervals whose estimate disagrees with the
/// embedded Gauss rule.
pub fn gauss_kronrod<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<f64, E> {
    fn recurse<E>(
        f: &mut impl FnMut(f64) -> Result<f64, E>,
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, E> {
        let (k, g) = kronrod15(f, a, b)?;
        if (k - g).abs() <= tol || depth >= 40 {
            return Ok(k);
        }
        let m = 0.5 * (a + b);
        Ok(recurse(f, a, m, 0.5 * tol, depth + 1)? + recurse(f, m, b, 0.5 * tol, depth + 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    recurse(&mut f, a, b, abs_tol, 0)
}

/// Running integral `t -> ∫_{t0}^{t} F` tabulated on a uniform grid, for
/// sliding-window integrals `∫_t^{t+w} F`.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    t0: f64,
    step: f64,
    values: Vec<f64>,
}

impl CumulativeTable {
    /// Tabulate on `[t0, t1]` with `cells` cells; each cell is integrated by
    /// composite Simpson to the default tolerance.
    pub fn build<E>(
        mut f: impl FnMut(f64) -> Result<f64, E>,
        t0: f64,
        t1: f64,
        cells: usize,
    ) -> Result<Self, E> {
        let cells = cells.max(1);
        let step = (t1 - t0) / cells as f64;
        let mut values = Vec::with_capacity(cells + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            let a = t0 + i as f64 * step;
            acc += simpson(&mut f, a, a + step, SIMPSON_REL_TOL)?;
            values.push(acc);
        }
        Ok(CumulativeTable { t0, step, values })
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.step * (self.values.len() - 1) as f64
    }

    /// `∫_{t0}^{t} F`, interpolated linearly between tabulated nodes and
    /// clamped to the table range.
    pub fn integral_to(&self, t: f64) -> f64 {
        let pos = ((t - self.t0) / self.step).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// `∫_a^b F` for `a, b` inside the table.
    pub fn window(&self, a: f64, b: f64) -> f64 {
        self.integral_to(b) - self.integral_to(a)
    }
}

/// Outcome of integrating over `[a, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Improper {
    /// Chunk increments fell below the relative threshold.
    Converged(f64),
    /// Increments decay geometrically; the value includes the extrapolated
    /// tail.
    Extrapolated(f64),
    /// Increments do not decay; the partial integral up to the last chunk.
    Divergent { partial: f64, upper: f64 },
}

impl Improper {
    pub fn value(self) -> Option<f64> {
        match self {
            Improper::Converged(v) | Improper::Extrapolated(v) => Some(v),
            Improper::Divergent { .. } => None,
        }
    }
}

/// Integrate a non-negative `f` over `[a, ∞)` in chunks `[a_k, 2 a_k + 1]`
/// while the chunks stay below `upper_limit`. A chunk increment below `1e-13` of the running total
/// means convergence; otherwise the ratio of the last two increments decides
/// between geometric decay (ratio ≤ 0.9, tail extrapolated) and divergence.
pub fn improper_integral<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    upper_limit: f64,
) -> Result<Improper, E> {
    let mut total = 0.0;
    let mut lo = a;
    let mut prev_inc = f64::NAN;
    let mut last_inc = f64::NAN;
    while 2.0 * lo + 1.0 <= upper_limit {
        let hi = 2.0 * lo + 1.0;
        let inc = simpson(&mut f, lo, hi, SIMPSON_REL_TOL)?;
        total += inc;
        if inc.abs() <= 1e-13 * total.abs() {
            return Ok(Improper::Converged(total));
        }
        prev_inc = last_inc;
        last_inc = inc;
        lo = hi;
    }
    let ratio = last_inc / prev_inc;
    if ratio.is_finite() && (0.0..=0.9).contains(&ratio) {
        Ok(Improper::Extrapolated(total + last_inc * ratio / (1.0 - ratio)))
    } else {
        Ok(Improper::Divergent {
            partial: total,
            upper: lo,
        })
    }
}

/// Infallible helper for closures that cannot fail.
pub fn ok<T>(v: T) -> Result<T, std::convert::Infallible> {
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unwrap<T>(r: Result<T, std::convert::Infallible>) -> T {
        match r {
            Ok(v) => v,
            Err(e) => match e {},
        }
    }

    #[test]
    fn simpson_polynomials_and_exp() {
        let v = unwrap(simpson(|x| ok(x * x * x), 0.0, 2.0, 1e-12));
        assert_relative_eq!(v, 4.0, max_relative = 1e-14);
        let v = unwrap(simpson(|x| ok((-x).exp()), 0.0, 5.0, SIMPSON_REL_TOL));
        assert_relative_eq!(v, 1.0 - (-5.0f64).exp(), max_relative = 1e-9);
        let v = unwrap(simpson(|x| ok(x.sin()), 0.0, std::f64::consts::PI, 1e-10));
        assert_relative_eq!(v, 2.0, max_relative = 1e-10);
        assert_eq!(unwrap(simpson(|_| ok(0.0), 0.0, 3.0, 1e-8)), 0.0);
    }

    #[test]
    fn kronrod_weights_are_consistent() {
        let sum_k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let sum_g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert_relative_eq!(sum_k, 2.0, max_relative = 1e-15);
        assert_relative_eq!(sum_g, 2.0, max_relative = 1e-15);
        // Kronrod exact through degree 22, Gauss through degree 13.
        for deg in [2i32, 8, 14, 20, 22] {
            let (k, _) = unwrap(kronrod15(&mut |x: f64| ok(x.powi(deg)), -1.0, 1.0));
            assert_relative_eq!(k, 2.0 / (deg + 1) as f64, max_relative = 1e-13);
        }
        for deg in [2i32, 6, 12] {
            let (_, g) = unwrap(kronrod15(&mut |x: f64| ok(x.powi(deg)), -1.0, 1.0));
            assert_relative_eq!(g, 2.0 / (deg + 1) as f64, max_relative = 1e-13);
        }
        let (_, g) = unwrap(kronrod15(&mut |x: f64| ok(x.powi(14)), -1.0, 1.0));
        assert!((g - 2.0 / 15.0).abs() > 1e-6);
    }

    #[test]
    fn adaptive_kronrod() {
        let v = unwrap(gauss_kronrod(|x| ok((x * x).exp()), 0.0, 2.0, 1e-12));
        // ∫_0^2 e^{x^2} dx
        assert_relative_eq!(v, 16.452_627_765_507_23, max_relative = 1e-12);
        let v = unwrap(gauss_kronrod(|x: f64| ok(x.sqrt()), 0.0, 1.0, 1e-10));
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn cumulative_windows() {
        let table = unwrap(CumulativeTable::build(|t| ok((-t).exp()), 0.0, 10.0, 1000));
        let w = table.window(1.0, 3.0);
        assert_relative_eq!(w, (-1.0f64).exp() - (-3.0f64).exp(), max_relative = 1e-9);
        assert_relative_eq!(table.integral_to(20.0), 1.0 - (-10.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn improper_classification() {
        let r = unwrap(improper_integral(|t| ok((-t).exp()), 0.0, 1e12));
        assert!((r.value().unwrap() - 1.0).abs() < 1e-8, "{r:?}");
        let r = unwrap(improper_integral(|t| ok(1.0 / ((1.0 + t) * (1.0 + t))), 0.0, 1e12));
        assert!((r.value().unwrap() - 1.0).abs() < 1e-6, "{r:?}");
        let r = unwrap(improper_integral(|t| ok(1.0 / (1.0 + t)), 0.0, 1e12));
        assert!(matches!(r, Improper::Divergent { .. }), "{r:?}");
        let r = unwrap(improper_integral(|_| ok(0.0), 0.0, 1e12));
        assert_eq!(r, Improper::Converged(0.0));
    }
}
