//! Per-node optimization problems.
//!
//! Row partition: each node minimizes `‖x‖₁ + vᵀx + c‖x‖²` subject to
//! `A x = b`. The problem is solved through its dual, whose objective is
//! differentiable with gradient `b - A x(λ)` where `x(λ)` is given in
//! closed form by [`x_of_u`] applied to `u = v - Aᵀλ`.
//!
//! Column partition: each node minimizes the smooth, strongly convex
//! `Ψ_p(y) + wᵀy + q‖y‖²` directly.
//!
//! Both are solved by the Barzilai–Borwein method in [`bb_minimize`].

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, norm_inf, DenseMatrix, GramFactorization};
use crate::scalar::Real;

/// Unique minimizer of `|x| + u x + c x²` for `c > 0`.
#[inline]
pub fn x_of_u<T: Real>(u: T, c: T) -> T {
    debug_assert!(c > T::zero());
    let one = T::one();
    let two = one + one;
    if u > one {
        -(u - one) / (two * c)
    } else if u < -one {
        -(u + one) / (two * c)
    } else {
        T::zero()
    }
}

/// Unique minimizer of `|x| + u x + (δ/2) x²`; equal to `x_of_u(u, δ/2)`.
#[inline]
pub fn shrink_delta<T: Real>(u: T, delta: T) -> T {
    x_of_u(u, delta / (T::one() + T::one()))
}

/// `-min_x (|x| + u x + c x²) = (|u| - 1)₊² / (4c)`.
#[inline]
fn neg_inner_min<T: Real>(u: T, c: T) -> T {
    let e = (u.abs() - T::one()).max(T::zero());
    e * e / (T::lit(4.0) * c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbConfig<T> {
    /// Gradient infinity-norm threshold.
    pub grad_tol: T,
    pub max_iter: usize,
    pub step_min: T,
    pub step_max: T,
    /// Start each solve from the previous solution instead of zero.
    pub warm_start: bool,
}

impl<T: Real> BbConfig<T> {
    pub fn new(grad_tol: T, max_iter: usize) -> Result<Self> {
        let cfg = Self {
            grad_tol,
            max_iter,
            step_min: T::lit(1e-10),
            step_max: T::lit(1e10),
            warm_start: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Tight setting for reference solves.
    pub fn oracle_grade() -> Self {
        Self::new(T::lit(1e-10), 20_000).expect("valid defaults")
    }

    /// Setting used inside the distributed loops.
    pub fn distributed() -> Self {
        Self::new(T::lit(1e-8), 5_000).expect("valid defaults")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > T::zero()) {
            return Err(Error::InvalidInput(
                "BB gradient tolerance must be positive".into(),
            ));
        }
        if !(self.step_min > T::zero() && self.step_min < self.step_max) {
            return Err(Error::InvalidInput(
                "BB step clamp needs 0 < min < max".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput(
                "BB needs at least one iteration".into(),
            ));
        }
        Ok(())
    }
}

impl<T: Real> Default for BbConfig<T> {
    fn default() -> Self {
        Self::distributed()
    }
}

/// Result of one [`bb_minimize`] call.
#[derive(Debug, Clone, PartialEq)]
pub struct BbOutcome<T> {
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
    pub grad_norm: T,
    /// Objective at the start point and after every accepted safeguard step.
    pub safeguard_objectives: Vec<T>,
}

/// A smooth convex objective.
pub trait SmoothObjective<T: Real> {
    fn dim(&self) -> usize;
    /// Returns `f(z)` and writes `∇f(z)` into `grad`.
    fn eval(&mut self, z: &[T], grad: &mut [T]) -> T;
}

const NONMONOTONE_WINDOW: usize = 10;

/// Barzilai–Borwein minimization, in place on `z`.
///
/// Steps alternate between `sᵀs / sᵀy` and `sᵀy / yᵀy`, clamped to
/// `[step_min, step_max]`; the first step is `1 / ‖g₀‖`. If the gradient
/// norm grows beyond `1e6` times the best seen, the iteration restarts from
/// the lowest-objective point with an Armijo-backtracked steepest-descent
/// step. Stops when `‖∇f‖∞ <= threshold`; otherwise `z` is left at the
/// iterate with the smallest gradient norm. Trial points must pass a
/// nonmonotone Armijo test against the largest of the last ten objective
/// values, halving the step otherwise; without it BB can cycle on the
/// piecewise quadratic column objective.
pub fn bb_minimize<T: Real, F: SmoothObjective<T>>(
    f: &mut F,
    z: &mut Vec<T>,
    threshold: T,
    cfg: &BbConfig<T>,
) -> BbOutcome<T> {
    let n = f.dim();
    debug_assert_eq!(z.len(), n);
    let mut g = vec![T::zero(); n];
    let mut fz = f.eval(z, &mut g);
    let mut gn = norm_inf(&g);
    let mut out = BbOutcome {
        iterations: 0,
        converged: false,
        restarts: 0,
        grad_norm: gn,
        safeguard_objectives: vec![fz],
    };
    if gn <= threshold {
        out.converged = true;
        return out;
    }
    let clamp = |a: T| a.max(cfg.step_min).min(cfg.step_max);
    let mut best_grad = (z.clone(), gn);
    let mut best_obj = (z.clone(), g.clone(), fz);
    let mut alpha = clamp(T::one() / norm2(&g));
    let mut z_new = vec![T::zero(); n];
    let mut g_new = vec![T::zero(); n];
    let mut recent: Vec<T> = Vec::with_capacity(NONMONOTONE_WINDOW);

    for it in 1..=cfg.max_iter {
        out.iterations = it;
        for i in 0..n {
            z_new[i] = z[i] - alpha * g[i];
        }
        let mut f_new = f.eval(&z_new, &mut g_new);
        let mut gn_new = norm_inf(&g_new);
        if f_new.is_finite() && gn_new <= T::lit(1e6) * best_grad.1 {
            // nonmonotone acceptance against the recent maximum
            let gg = dot(&g, &g);
            let f_ref = recent.iter().copied().fold(fz, T::max);
            // below this, objective differences are rounding noise
            let slack = T::lit(16.0) * T::epsilon() * f_ref.abs();
            let mut t = alpha;
            for _ in 0..60 {
                if f_new <= f_ref - T::lit(1e-4) * t * gg + slack {
                    break;
                }
                t *= T::lit(0.5);
                for i in 0..n {
                    z_new[i] = z[i] - t * g[i];
                }
                f_new = f.eval(&z_new, &mut g_new);
                gn_new = norm_inf(&g_new);
            }
        }

        if !f_new.is_finite() || !(gn_new <= T::lit(1e6) * best_grad.1) {
            // safeguard: steepest descent with backtracking from the best point
            z.copy_from_slice(&best_obj.0);
            g.copy_from_slice(&best_obj.1);
            fz = best_obj.2;
            let gg = dot(&g, &g);
            let mut t = clamp(alpha.min(T::one() / gg.sqrt()));
            let mut accepted = false;
            for _ in 0..80 {
                for i in 0..n {
                    z_new[i] = z[i] - t * g[i];
                }
                let f_try = f.eval(&z_new, &mut g_new);
                if f_try.is_finite() && f_try <= fz - T::lit(1e-4) * t * gg {
                    accepted = true;
                    break;
                }
                t *= T::lit(0.5);
            }
            out.restarts += 1;
            if !accepted {
                break;
            }
            std::mem::swap(z, &mut z_new);
            std::mem::swap(&mut g, &mut g_new);
            fz = f.eval(z, &mut g);
            gn = norm_inf(&g);
            out.safeguard_objectives.push(fz);
            if gn < best_grad.1 {
                best_grad = (z.clone(), gn);
            }
            if fz < best_obj.2 {
                best_obj = (z.clone(), g.clone(), fz);
            }
            alpha = clamp(t);
            if gn <= threshold {
                out.converged = true;
                out.grad_norm = gn;
                return out;
            }
            continue;
        }

        let mut ss = T::zero();
        let mut sy = T::zero();
        let mut yy = T::zero();
        for i in 0..n {
            let s = z_new[i] - z[i];
            let y = g_new[i] - g[i];
            ss += s * s;
            sy += s * y;
            yy += y * y;
        }
        std::mem::swap(z, &mut z_new);
        std::mem::swap(&mut g, &mut g_new);
        fz = f_new;
        gn = gn_new;
        if recent.len() == NONMONOTONE_WINDOW {
            recent.remove(0);
        }
        recent.push(fz);
        if gn < best_grad.1 {
            best_grad = (z.clone(), gn);
        }
        if fz < best_obj.2 {
            best_obj = (z.clone(), g.clone(), fz);
        }
        if gn <= threshold {
            out.converged = true;
            out.grad_norm = gn;
            return out;
        }
        alpha = if sy > T::zero() {
            clamp(if it % 2 == 1 { ss / sy } else { sy / yy })
        } else {
            clamp(alpha + alpha)
        };
    }
    z.copy_from_slice(&best_grad.0);
    out.grad_norm = best_grad.1;
    out
}

/// Dual of `min ‖x‖₁ + vᵀx + c‖x‖²  s.t.  A x = b`, written as a
/// minimization over `λ`.
struct RowDual<'a, T> {
    a: &'a DenseMatrix<T>,
    b: &'a [T],
    v: &'a [T],
    c: T,
    u: Vec<T>,
    x: Vec<T>,
}

impl<'a, T: Real> RowDual<'a, T> {
    fn primal_at(&mut self, lambda: &[T]) {
        self.a.tr_mul_vec_into(lambda, &mut self.u);
        for ((ui, xi), &vi) in self.u.iter_mut().zip(self.x.iter_mut()).zip(self.v) {
            *ui = vi - *ui;
            *xi = x_of_u(*ui, self.c);
        }
    }
}

impl<'a, T: Real> SmoothObjective<T> for RowDual<'a, T> {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn eval(&mut self, lambda: &[T], grad: &mut [T]) -> T {
        self.primal_at(lambda);
        self.a.mul_vec_into(&self.x, grad);
        for (gi, &bi) in grad.iter_mut().zip(self.b) {
            *gi -= bi;
        }
        let c = self.c;
        self.u.iter().map(|&u| neg_inner_min(u, c)).sum::<T>() - dot(lambda, self.b)
    }
}

/// Row-partition node problem with its dual warm start.
#[derive(Debug, Clone)]
pub struct RowSubproblem<T> {
    a: DenseMatrix<T>,
    b: Vec<T>,
    gram: GramFactorization<T>,
    warm_lambda: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowSolution<T> {
    pub x: Vec<T>,
    pub lambda: Vec<T>,
    pub outcome: BbOutcome<T>,
}

impl<T: Real> RowSubproblem<T> {
    /// Rejects blocks without full row rank.
    pub fn new(a: DenseMatrix<T>, b: Vec<T>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::Dimension(format!(
                "b_p has {} entries for {} rows",
                b.len(),
                a.rows()
            )));
        }
        let gram = GramFactorization::new(&a)?;
        let warm_lambda = vec![T::zero(); a.rows()];
        Ok(Self {
            a,
            b,
            gram,
            warm_lambda,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.a
    }

    pub fn rhs(&self) -> &[T] {
        &self.b
    }

    pub fn gram(&self) -> &GramFactorization<T> {
        &self.gram
    }

    pub fn warm_lambda(&self) -> &[T] {
        &self.warm_lambda
    }

    pub fn reset_warm_start(&mut self) {
        self.warm_lambda.iter_mut().for_each(|l| *l = T::zero());
    }

    /// Solves `min ‖x‖₁ + vᵀx + c‖x‖²  s.t.  A x = b`. A solve that hits the
    /// iteration cap returns its best iterate with `outcome.converged = false`.
    pub fn solve(&mut self, v: &[T], c: T, cfg: &BbConfig<T>) -> Result<RowSolution<T>> {
        if !(c > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "quadratic coefficient {c} must be positive"
            )));
        }
        if v.len() != self.a.cols() {
            return Err(Error::Dimension(format!(
                "v has {} entries for {} columns",
                v.len(),
                self.a.cols()
            )));
        }
        if !cfg.warm_start {
            self.reset_warm_start();
        }
        let n = self.a.cols();
        let mut dual = RowDual {
            a: &self.a,
            b: &self.b,
            v,
            c,
            u: vec![T::zero(); n],
            x: vec![T::zero(); n],
        };
        let threshold = cfg.grad_tol * (T::one() + norm_inf(&self.b));
        let mut lambda = std::mem::take(&mut self.warm_lambda);
        let outcome = bb_minimize(&mut dual, &mut lambda, threshold, cfg);
        dual.primal_at(&lambda);
        let x = dual.x;
        self.warm_lambda = lambda.clone();
        Ok(RowSolution { x, lambda, outcome })
    }

    /// Solves `min w‖x‖₁ + vᵀx + c‖x‖²  s.t.  A x = b` for `w > 0` by
    /// dividing the objective through by `w`.
    pub fn solve_weighted(
        &mut self,
        l1_weight: T,
        v: &[T],
        c: T,
        cfg: &BbConfig<T>,
    ) -> Result<RowSolution<T>> {
        if !(l1_weight > T::zero()) {
            return Err(Error::InvalidInput("l1 weight must be positive".into()));
        }
        let scaled: Vec<T> = v.iter().map(|&vi| vi / l1_weight).collect();
        self.solve(&scaled, c / l1_weight, cfg)
    }
}

/// Column-partition node problem: `A_p` (`m x n_p`), `δ` and the warm start
/// for `y`.
#[derive(Debug, Clone)]
pub struct ColSubproblem<T> {
    a: DenseMatrix<T>,
    delta: T,
    warm_y: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColSolution<T> {
    pub y: Vec<T>,
    /// `x_p(y)`, this node's fragment of the primal solution.
    pub x: Vec<T>,
    pub outcome: BbOutcome<T>,
}

struct ColObjective<'a, T> {
    sp: &'a ColSubproblem<T>,
    w: Vec<T>,
    q: T,
    x: Vec<T>,
    u: Vec<T>,
}

impl<'a, T: Real> SmoothObjective<T> for ColObjective<'a, T> {
    fn dim(&self) -> usize {
        self.sp.a.rows()
    }

    fn eval(&mut self, y: &[T], grad: &mut [T]) -> T {
        let psi = self.sp.psi_into(y, &mut self.u, &mut self.x, grad);
        let two_q = self.q + self.q;
        for ((gi, &wi), &yi) in grad.iter_mut().zip(&self.w).zip(y) {
            *gi += wi + two_q * yi;
        }
        psi + dot(&self.w, y) + self.q * dot(y, y)
    }
}

impl<T: Real> ColSubproblem<T> {
    pub fn new(a: DenseMatrix<T>, delta: T) -> Result<Self> {
        if !(delta > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "delta {delta} must be positive"
            )));
        }
        let warm_y = vec![T::zero(); a.rows()];
        Ok(Self { a, delta, warm_y })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.a
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn warm_y(&self) -> &[T] {
        &self.warm_y
    }

    fn psi_into(&self, y: &[T], u: &mut [T], x: &mut [T], grad: &mut [T]) -> T {
        self.a.tr_mul_vec_into(y, u);
        let mut value = T::zero();
        let half_delta = self.delta / (T::one() + T::one());
        for (xi, &ui) in x.iter_mut().zip(u.iter()) {
            *xi = shrink_delta(ui, self.delta);
            value -= xi.abs() + ui * *xi + half_delta * *xi * *xi;
        }
        self.a.mul_vec_into(x, grad);
        grad.iter_mut().for_each(|g| *g = -*g);
        value
    }

    /// `Ψ_p(y)`, the fragment `x_p(y)` and `∇Ψ_p(y) = -A_p x_p(y)`.
    pub fn psi_p(&self, y: &[T]) -> (T, Vec<T>, Vec<T>) {
        let np = self.a.cols();
        let mut u = vec![T::zero(); np];
        let mut x = vec![T::zero(); np];
        let mut grad = vec![T::zero(); self.a.rows()];
        let value = self.psi_into(y, &mut u, &mut x, &mut grad);
        (value, x, grad)
    }

    /// Minimizes `Ψ_p(y) + (v + b/P)ᵀy + q‖y‖²`.
    pub fn solve(
        &mut self,
        v: &[T],
        b: &[T],
        nodes: usize,
        q: T,
        cfg: &BbConfig<T>,
    ) -> Result<ColSolution<T>> {
        if !(q > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "quadratic coefficient {q} must be positive"
            )));
        }
        let m = self.a.rows();
        if v.len() != m || b.len() != m {
            return Err(Error::Dimension(
                "column subproblem operands must have length m".into(),
            ));
        }
        if !cfg.warm_start {
            self.warm_y.iter_mut().for_each(|y| *y = T::zero());
        }
        let inv_p = T::one() / T::from_usize_lossy(nodes);
        let w = v.iter().zip(b).map(|(&vi, &bi)| vi + inv_p * bi).collect();
        let np = self.a.cols();
        let mut obj = ColObjective {
            sp: self,
            w,
            q,
            x: vec![T::zero(); np],
            u: vec![T::zero(); np],
        };
        let mut y = self.warm_y.clone();
        let outcome = bb_minimize(&mut obj, &mut y, cfg.grad_tol, cfg);
        let (_, x, _) = self.psi_p(&y);
        self.warm_y = y.clone();
        Ok(ColSolution { y, x, outcome })
    }
}
