/// Composite Simpson rule over `panels` uniform panels (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Integration policy for BD computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quadrature {
    /// Exactly this many Simpson panels.
    Fixed(usize),
    /// Start at `min_panels` and double until successive estimates agree to
    /// `rel_tol` (relative to max(1, |I|)), up to `max_panels`.
    Converged {
        min_panels: usize,
        max_panels: usize,
        rel_tol: f64,
    },
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::Converged {
            min_panels: 2048,
            max_panels: 1 << 20,
            rel_tol: 1e-12,
        }
    }
}

impl Quadrature {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.integrate_split(f, a, b, &[])
    }

    /// Integrates over [a, b] treating each point of `breaks` inside the
    /// interval as a panel boundary, so a piecewise-smooth integrand is
    /// handled one smooth piece at a time. Panels are shared out in
    /// proportion to piece width.
    pub fn integrate_split<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, breaks: &[f64]) -> f64 {
        let mut edges = vec![a];
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        edges.extend(inner);
        edges.push(b);
        let width = b - a;
        let total = |n: usize| -> f64 {
            edges
                .windows(2)
                .map(|w| {
                    let share = (n as f64 * (w[1] - w[0]) / width).ceil() as usize;
                    simpson(&f, w[0], w[1], share.max(2))
                })
                .sum()
        };
        match *self {
            Quadrature::Fixed(n) => total(n),
            Quadrature::Converged {
                min_panels,
                max_panels,
                rel_tol,
            } => {
                let mut n = min_panels.max(2);
                let mut prev = total(n);
                while n < max_panels {
                    n *= 2;
                    let next = total(n);
                    let done = (next - prev).abs() <= rel_tol * next.abs().max(1.0);
                    prev = next;
                    if done {
                        break;
                    }
                }
                prev
            }
        }
    }
}
