//! Derivative-free optimization: dense 2-D grids and Nelder-Mead.
//!
//! All routines are deterministic; multi-start searches take explicit
//! starting points so callers control the seed.

/// Nelder-Mead simplex settings.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Stop once the simplex diameter falls below this.
    pub xtol: f64,
    /// Stop once the spread of simplex values falls below this.
    pub ftol: f64,
    pub initial_step: f64,
    /// Number of restarts from the best vertex with a fresh simplex.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            xtol: 1e-11,
            ftol: 1e-14,
            initial_step: 0.25,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

impl NelderMead {
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: &F, x0: &[f64]) -> Optimum {
        let mut best = self.run(f, x0, self.initial_step);
        let mut step = self.initial_step;
        for _ in 0..self.restarts {
            step *= 0.1;
            let next = self.run(f, &best.x, step.max(1e-6));
            let evaluations = best.evaluations + next.evaluations;
            if next.value <= best.value {
                best = next;
            }
            best.evaluations = evaluations;
        }
        best
    }

    pub fn maximize<F: Fn(&[f64]) -> f64>(&self, f: &F, x0: &[f64]) -> Optimum {
        let neg = |x: &[f64]| -f(x);
        let mut opt = self.minimize(&neg, x0);
        opt.value = -opt.value;
        opt
    }

    fn run<F: Fn(&[f64]) -> f64>(&self, f: &F, x0: &[f64], step: f64) -> Optimum {
        let n = x0.len();
        let mut evaluations = 0;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        if n == 0 {
            let value = eval(x0);
            return Optimum { x: vec![], value, evaluations };
        }

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += step;
            let v = eval(&x);
            simplex.push((x, v));
        }

        // Standard coefficients.
        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        for _ in 0..self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| dist(x, &simplex[0].0))
                .fold(0.0, f64::max);
            if diameter < self.xtol || (spread.abs() < self.ftol && diameter < self.xtol.sqrt()) {
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
                .collect();
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect()
            };

            let xr = along(alpha);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(gamma);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < worst.1 {
                    let xc = along(rho);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(-rho);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < worst.1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = best
                            .iter()
                            .zip(&vertex.0)
                            .map(|(b, v)| b + sigma * (v - b))
                            .collect();
                        let v = eval(&x);
                        *vertex = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Optimum { x, value, evaluations }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Best point of `f` on a `points × points` grid over `[lo, hi]²`
/// (endpoints included). Ties keep the first point in row-major order.
pub fn grid_max_2d<F: Fn(f64, f64) -> f64>(f: &F, lo: f64, hi: f64, points: usize) -> (f64, f64, f64) {
    assert!(points >= 2, "grid needs at least two points per axis");
    let h = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, lo, f64::NEG_INFINITY);
    for i in 0..points {
        let x = lo + h * i as f64;
        for j in 0..points {
            let y = lo + h * j as f64;
            let v = f(x, y);
            if v > best.2 {
                best = (x, y, v);
            }
        }
    }
    best
}

/// Runs [`NelderMead::maximize`] from every start and keeps the best.
pub fn multi_start_maximize<F: Fn(&[f64]) -> f64>(nm: &NelderMead, f: &F, starts: &[Vec<f64>]) -> Optimum {
    let mut best: Option<Optimum> = None;
    let mut evaluations = 0;
    for s in starts {
        let opt = nm.maximize(f, s);
        evaluations += opt.evaluations;
        if best.as_ref().is_none_or(|b| opt.value > b.value) {
            best = Some(opt);
        }
    }
    let mut best = best.expect("at least one start");
    best.evaluations = evaluations;
    best
}
