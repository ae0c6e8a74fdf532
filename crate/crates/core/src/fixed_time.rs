//! Fixed-time problem: minimize the integral of the squared `(k-1)`th
//! derivative of a piecewise polynomial through pinned knot derivatives.
//!
//! The problem is posed in terms of the endpoint derivative stacks `f_i`
//! (derivatives `0..k` at both ends of every segment). On the normalized
//! domain the segment cost is `f_i^T M(delta_i) f_i` with
//!
//! ```text
//! M(delta) = delta^(3-2k) * D K D,   D = diag{delta^q},   K = V^-T H V^-1
//! ```
//!
//! where `V` is [`endpoint_map`] and `H` is [`cost_gram`]. Eliminating the pinned
//! entries leaves the free values `g`, coupled only through continuity of the
//! shared knot derivatives. The reduced KKT system is block tridiagonal and is
//! solved with a forward elimination / backward substitution sweep in
//! `O(k^3 l)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::spline::{
    cost_gram, endpoint_map, expand_pins, PinExpansion, PinSet, Spline, TimeAllocation,
};

/// Power of `delta` multiplying the normalized segment cost: `3 - 2k`.
pub fn cost_exponent(k: usize) -> i32 {
    3 - 2 * k as i32
}

/// The `delta^(1-2k)` scaling, i.e. `(2/Delta)^(2k-1)`, which does not follow
/// from the change of variables `tau = mid + delta * rho`. Kept for
/// comparisons against quadrature only.
pub fn uncorrected_cost_exponent(k: usize) -> i32 {
    1 - 2 * k as i32
}

/// Largest `l * k` accepted by the dense oracle.
pub const DENSE_ORACLE_LIMIT: usize = 2000;

/// Constant per-order matrices shared by every segment.
#[derive(Debug, Clone)]
pub struct SegmentBasis<T: Scalar> {
    k: usize,
    endpoint_inv: DMatrix<T>,
    gram: DMatrix<T>,
    normalized_cost: DMatrix<T>,
}

impl<T: Scalar> SegmentBasis<T> {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let v = endpoint_map::<T>(k);
        let endpoint_inv = v
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure(format!("endpoint map singular for k = {k}")))?;
        let gram = cost_gram::<T>(k);
        let mut normalized_cost = endpoint_inv.transpose() * &gram * &endpoint_inv;
        // exact symmetry
        normalized_cost = (&normalized_cost + normalized_cost.transpose()) * lit::<T>(0.5);
        Ok(Self {
            k,
            endpoint_inv,
            gram,
            normalized_cost,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `V^-1` for the normalized segment.
    pub fn endpoint_inverse(&self) -> &DMatrix<T> {
        &self.endpoint_inv
    }

    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    /// `K = V^-T H V^-1`: cost of a derivative stack on a unit half-duration.
    pub fn normalized_cost(&self) -> &DMatrix<T> {
        &self.normalized_cost
    }

    /// Derivative-stack cost matrix of one segment with half-duration `delta`.
    pub fn cost_matrix(&self, delta: T) -> Result<DMatrix<T>> {
        self.cost_matrix_with_exponent(delta, cost_exponent(self.k))
    }

    pub fn cost_matrix_with_exponent(&self, delta: T, exponent: i32) -> Result<DMatrix<T>> {
        if !(delta > T::zero()) {
            return Err(Error::invalid(format!(
                "half-duration must be positive, got {delta}"
            )));
        }
        let k = self.k;
        let pow: Vec<T> = (0..2 * k).map(|r| delta.powi((r % k) as i32)).collect();
        let scale = delta.powi(exponent);
        Ok(DMatrix::from_fn(2 * k, 2 * k, |r, c| {
            scale * pow[r] * self.normalized_cost[(r, c)] * pow[c]
        }))
    }

    /// Normalized coefficients from an endpoint derivative stack.
    pub fn coefficients(&self, delta: T, f: &DVector<T>) -> DVector<T> {
        let k = self.k;
        let scaled = DVector::from_fn(2 * k, |r, _| f[r] * delta.powi((r % k) as i32));
        &self.endpoint_inv * scaled
    }
}

/// Derivative-stack cost matrix of one segment; see [`SegmentBasis::cost_matrix`].
pub fn segment_cost_matrix<T: Scalar>(delta: T, k: usize) -> Result<DMatrix<T>> {
    SegmentBasis::new(k)?.cost_matrix(delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedTimeProblem<T: Scalar> {
    pub k: usize,
    pub times: TimeAllocation<T>,
    pub pins: PinSet<T>,
}

impl<T: Scalar> FixedTimeProblem<T> {
    pub fn new(k: usize, times: TimeAllocation<T>, pins: PinSet<T>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        pins.validate(times.num_segments(), k)?;
        Ok(Self { k, times, pins })
    }

    pub fn num_segments(&self) -> usize {
        self.times.num_segments()
    }
}

/// Symmetric positive-definite factor; empty matrices are legal.
#[derive(Debug, Clone)]
struct SpdFactor<T: Scalar> {
    chol: Option<Cholesky<T, Dyn>>,
}

impl<T: Scalar> SpdFactor<T> {
    fn new(m: DMatrix<T>, segment: usize) -> Result<Self> {
        if m.nrows() == 0 {
            return Ok(Self { chol: None });
        }
        let n = m.nrows();
        let max_diag = m
            .diagonal()
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()));
        let chol = Cholesky::new(m).ok_or(Error::InsufficientlyPinned { segment })?;
        let threshold = lit::<T>(n as f64) * T::default_epsilon() * max_diag;
        let l = chol.l_dirty();
        if (0..n).any(|i| {
            let p = l[(i, i)] * l[(i, i)];
            !(p > threshold) || !p.is_finite()
        }) {
            return Err(Error::InsufficientlyPinned { segment });
        }
        Ok(Self { chol: Some(chol) })
    }

    fn solve_vec(&self, rhs: &DVector<T>) -> DVector<T> {
        match &self.chol {
            Some(c) => c.solve(rhs),
            None => rhs.clone(),
        }
    }

    fn solve_mat(&self, rhs: &DMatrix<T>) -> DMatrix<T> {
        match &self.chol {
            Some(c) => c.solve(rhs),
            None => rhs.clone(),
        }
    }
}

/// Reduced KKT blocks of one segment.
///
/// `[A B; B^T C]` is the free-free part of the segment cost and
/// `(c^-; c^+) = -Z^T M fbar`, split by the left/right free values, so the
/// reduced stationarity conditions read `[A B; B^T C] g = c` plus the
/// continuity multipliers.
#[derive(Debug, Clone)]
pub struct SegmentBlocks<T: Scalar> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    pub c_minus: DVector<T>,
    pub c_plus: DVector<T>,
    /// Forward-elimination Schur complement, set by [`forward_elimination`].
    pub a_bar: Option<DMatrix<T>>,
    pub c_bar_minus: Option<DVector<T>>,
    a_bar_factor: Option<SpdFactor<T>>,
}

fn submatrix<T: Scalar>(m: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

fn subvector<T: Scalar>(v: &DVector<T>, idx: &[usize]) -> DVector<T> {
    DVector::from_fn(idx.len(), |r, _| v[idx[r]])
}

/// Partitions the reduced Hessian and linear term of segment `i`.
pub fn assemble_segment_blocks<T: Scalar>(
    basis: &SegmentBasis<T>,
    delta: T,
    expansion: &PinExpansion<T>,
    i: usize,
) -> Result<SegmentBlocks<T>> {
    let m = basis.cost_matrix(delta)?;
    Ok(blocks_from_cost(&m, expansion, i))
}

fn blocks_from_cost<T: Scalar>(
    m: &DMatrix<T>,
    expansion: &PinExpansion<T>,
    i: usize,
) -> SegmentBlocks<T> {
    let minus = expansion.free_minus(i);
    let plus = expansion.free_plus(i);
    let linear = -(m * &expansion.pinned_values[i]);
    SegmentBlocks {
        a: submatrix(m, minus, minus),
        b: submatrix(m, minus, plus),
        c: submatrix(m, plus, plus),
        c_minus: subvector(&linear, minus),
        c_plus: subvector(&linear, plus),
        a_bar: None,
        c_bar_minus: None,
        a_bar_factor: None,
    }
}

/// Forward sweep: `Abar_1 = A_1`,
/// `Abar_i = A_i + C_{i-1} - B_{i-1}^T Abar_{i-1}^-1 B_{i-1}` and the matching
/// `cbar_i^- = c_i^- + c_{i-1}^+ - B_{i-1}^T Abar_{i-1}^-1 cbar_{i-1}^-`.
///
/// Segment numbers in errors are 1-based.
pub fn forward_elimination<T: Scalar>(blocks: &mut [SegmentBlocks<T>]) -> Result<()> {
    for i in 0..blocks.len() {
        let (a_bar, c_bar) = if i == 0 {
            (blocks[0].a.clone(), blocks[0].c_minus.clone())
        } else {
            let prev = &blocks[i - 1];
            let factor = prev
                .a_bar_factor
                .as_ref()
                .expect("previous segment eliminated");
            let c_bar_prev = prev
                .c_bar_minus
                .as_ref()
                .expect("previous segment eliminated");
            let bt = prev.b.transpose();
            let a_bar = &blocks[i].a + &prev.c - &bt * factor.solve_mat(&prev.b);
            let c_bar = &blocks[i].c_minus + &prev.c_plus - &bt * factor.solve_vec(c_bar_prev);
            (a_bar, c_bar)
        };
        let sym = (&a_bar + a_bar.transpose()) * lit::<T>(0.5);
        let factor = SpdFactor::new(sym, i + 1)?;
        let blk = &mut blocks[i];
        blk.a_bar = Some(a_bar);
        blk.c_bar_minus = Some(c_bar);
        blk.a_bar_factor = Some(factor);
    }
    Ok(())
}

/// Free values and continuity multipliers from the eliminated blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BackSubstitution<T: Scalar> {
    /// `g_i = (g_i^-, g_i^+)` per segment.
    pub g: Vec<DVector<T>>,
    /// One multiplier vector per interior knot.
    pub lambdas: Vec<DVector<T>>,
}

/// Backward sweep:
/// `g_l^+ = (C_l - B_l^T Abar_l^-1 B_l)^-1 (c_l^+ - B_l^T Abar_l^-1 cbar_l^-)`,
/// `g_i^- = Abar_i^-1 (cbar_i^- - B_i g_i^+)`, `g_i^+ = g_{i+1}^-` and
/// `lambda_i = B_i^T g_i^- + C_i g_i^+ - c_i^+`.
pub fn backward_substitution<T: Scalar>(
    blocks: &[SegmentBlocks<T>],
) -> Result<BackSubstitution<T>> {
    let l = blocks.len();
    if l == 0 {
        return Err(Error::invalid("no segments"));
    }
    let factors: Vec<&SpdFactor<T>> = blocks
        .iter()
        .map(|b| {
            b.a_bar_factor
                .as_ref()
                .ok_or_else(|| Error::invalid("forward elimination has not been run"))
        })
        .collect::<Result<_>>()?;
    let last = &blocks[l - 1];
    let c_bar_last = last.c_bar_minus.as_ref().expect("eliminated");
    let bt = last.b.transpose();
    let schur = &last.c - &bt * factors[l - 1].solve_mat(&last.b);
    let schur = (&schur + schur.transpose()) * lit::<T>(0.5);
    let rhs = &last.c_plus - &bt * factors[l - 1].solve_vec(c_bar_last);
    let mut g_plus = SpdFactor::new(schur, l)?.solve_vec(&rhs);

    let mut g = vec![DVector::zeros(0); l];
    let mut lambdas = vec![DVector::zeros(0); l - 1];
    for i in (0..l).rev() {
        let blk = &blocks[i];
        let c_bar = blk.c_bar_minus.as_ref().expect("eliminated");
        let g_minus = factors[i].solve_vec(&(c_bar - &blk.b * &g_plus));
        if i + 1 < l {
            lambdas[i] = blk.b.transpose() * &g_minus + &blk.c * &g_plus - &blk.c_plus;
        }
        let mut gi = DVector::zeros(g_minus.len() + g_plus.len());
        gi.rows_mut(0, g_minus.len()).copy_from(&g_minus);
        gi.rows_mut(g_minus.len(), g_plus.len()).copy_from(&g_plus);
        g[i] = gi;
        g_plus = g_minus;
    }
    Ok(BackSubstitution { g, lambdas })
}

#[derive(Debug, Clone)]
pub struct FixedTimeSolution<T: Scalar> {
    pub spline: Spline<T>,
    /// Endpoint derivative stacks in absolute time, one per segment.
    pub f_star: Vec<DVector<T>>,
    pub g_star: Vec<DVector<T>>,
    pub lambdas: Vec<DVector<T>>,
    pub segment_costs: Vec<T>,
    pub cost: T,
}

/// Dense reduced KKT matrix with its right-hand side and block layout.
#[derive(Debug, Clone)]
pub struct DenseKkt<T: Scalar> {
    pub matrix: DMatrix<T>,
    pub rhs: DVector<T>,
    /// Offset of each segment's free block in the unknown vector.
    pub offsets: Vec<usize>,
    /// Number of free derivative values; the multipliers follow them.
    pub num_free: usize,
    pub expansion: PinExpansion<T>,
    pub costs: Vec<DMatrix<T>>,
}

/// Solver holding the per-order constants; reusable across problems with the
/// same `k`.
#[derive(Debug, Clone)]
pub struct FixedTimeSolver<T: Scalar> {
    basis: SegmentBasis<T>,
}

impl<T: Scalar> FixedTimeSolver<T> {
    pub fn new(k: usize) -> Result<Self> {
        Ok(Self {
            basis: SegmentBasis::new(k)?,
        })
    }

    pub fn basis(&self) -> &SegmentBasis<T> {
        &self.basis
    }

    pub fn k(&self) -> usize {
        self.basis.k
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k != self.basis.k {
            return Err(Error::invalid(format!(
                "solver built for k = {}, problem has k = {k}",
                self.basis.k
            )));
        }
        Ok(())
    }

    pub fn solve(&self, problem: &FixedTimeProblem<T>) -> Result<FixedTimeSolution<T>> {
        self.check_k(problem.k)?;
        let expansion = expand_pins(&problem.pins, problem.num_segments(), problem.k)?;
        self.solve_expanded(&problem.times, &expansion)
    }

    /// Block-tridiagonal solve for already expanded pins.
    pub fn solve_expanded(
        &self,
        times: &TimeAllocation<T>,
        expansion: &PinExpansion<T>,
    ) -> Result<FixedTimeSolution<T>> {
        self.check_k(expansion.k)?;
        if expansion.num_segments() != times.num_segments() {
            return Err(Error::invalid(
                "pin expansion and knot schedule disagree on l",
            ));
        }
        let costs: Vec<DMatrix<T>> = times
            .deltas()
            .iter()
            .map(|&d| self.basis.cost_matrix(d))
            .collect::<Result<_>>()?;
        let mut blocks: Vec<SegmentBlocks<T>> = costs
            .iter()
            .enumerate()
            .map(|(i, m)| blocks_from_cost(m, expansion, i))
            .collect();
        forward_elimination(&mut blocks)?;
        let back = backward_substitution(&blocks)?;
        self.finish(times, expansion, &costs, back.g, back.lambdas)
    }

    /// Dense reduced KKT system: free derivative blocks of every segment
    /// followed by one multiplier per continuity condition.
    pub fn dense_kkt(&self, problem: &FixedTimeProblem<T>) -> Result<DenseKkt<T>> {
        self.check_k(problem.k)?;
        let l = problem.num_segments();
        let k = problem.k;
        if l * k > DENSE_ORACLE_LIMIT {
            return Err(Error::invalid(format!(
                "dense oracle limited to l*k <= {DENSE_ORACLE_LIMIT}, got {}",
                l * k
            )));
        }
        let expansion = expand_pins(&problem.pins, l, k)?;
        let costs: Vec<DMatrix<T>> = problem
            .times
            .deltas()
            .iter()
            .map(|&d| self.basis.cost_matrix(d))
            .collect::<Result<_>>()?;

        let offsets: Vec<usize> = expansion
            .free
            .iter()
            .scan(0, |acc, f| {
                let o = *acc;
                *acc += f.len();
                Some(o)
            })
            .collect();
        let n_g: usize = expansion.free.iter().map(Vec::len).sum();
        let n_lambda: usize = (0..l.saturating_sub(1))
            .map(|i| k - expansion.mu_plus[i])
            .sum();
        let n = n_g + n_lambda;
        let mut kkt = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        for i in 0..l {
            let free = &expansion.free[i];
            let o = offsets[i];
            let linear = -(&costs[i] * &expansion.pinned_values[i]);
            for (r, &pr) in free.iter().enumerate() {
                rhs[o + r] = linear[pr];
                for (c, &pc) in free.iter().enumerate() {
                    kkt[(o + r, o + c)] = costs[i][(pr, pc)];
                }
            }
        }
        // continuity rows: g_{i+1}^- - g_i^+ = 0
        let mut row = n_g;
        for i in 0..l.saturating_sub(1) {
            let width = k - expansion.mu_plus[i];
            let left = offsets[i] + (k - expansion.mu_minus[i]);
            let right = offsets[i + 1];
            for j in 0..width {
                kkt[(row, left + j)] = -T::one();
                kkt[(row, right + j)] = T::one();
                kkt[(left + j, row)] = -T::one();
                kkt[(right + j, row)] = T::one();
                row += 1;
            }
        }
        Ok(DenseKkt {
            matrix: kkt,
            rhs,
            offsets,
            num_free: n_g,
            expansion,
            costs,
        })
    }

    /// Dense reference solve of the reduced KKT system.
    pub fn solve_dense(&self, problem: &FixedTimeProblem<T>) -> Result<FixedTimeSolution<T>> {
        let DenseKkt {
            matrix: kkt,
            rhs,
            offsets,
            num_free: n_g,
            expansion,
            costs,
        } = self.dense_kkt(problem)?;
        let l = problem.num_segments();
        let k = problem.k;
        let n = kkt.nrows();
        let lu = kkt.clone().full_piv_lu();
        let u = lu.u();
        let (mut umin, mut umax) = (T::max_value().unwrap_or(T::one()), T::zero());
        for i in 0..n {
            let v = u[(i, i)].abs();
            umin = umin.min(v);
            umax = umax.max(v);
        }
        if n > 0 && !(umin > lit::<T>(1e3) * T::default_epsilon() * umax) {
            return Err(Error::NumericalFailure(
                "reduced KKT matrix is singular (insufficiently pinned problem)".into(),
            ));
        }
        let sol = if n > 0 {
            lu.solve(&rhs)
                .ok_or_else(|| Error::NumericalFailure("dense KKT solve failed".into()))?
        } else {
            DVector::zeros(0)
        };
        let g = (0..l)
            .map(|i| sol.rows(offsets[i], expansion.free[i].len()).into_owned())
            .collect();
        let mut lambdas = Vec::with_capacity(l.saturating_sub(1));
        let mut row = n_g;
        for i in 0..l.saturating_sub(1) {
            let width = k - expansion.mu_plus[i];
            lambdas.push(sol.rows(row, width).into_owned());
            row += width;
        }
        self.finish(&problem.times, &expansion, &costs, g, lambdas)
    }

    fn finish(
        &self,
        times: &TimeAllocation<T>,
        expansion: &PinExpansion<T>,
        costs: &[DMatrix<T>],
        g: Vec<DVector<T>>,
        lambdas: Vec<DVector<T>>,
    ) -> Result<FixedTimeSolution<T>> {
        let l = times.num_segments();
        let mut f_star = Vec::with_capacity(l);
        let mut coeffs = Vec::with_capacity(l);
        let mut segment_costs = Vec::with_capacity(l);
        let mut cost = T::zero();
        for i in 0..l {
            let f = expansion.reconstruct(i, &g[i]);
            let delta = times.deltas()[i];
            coeffs.push(self.basis.coefficients(delta, &f));
            let ci = (f.transpose() * &costs[i] * &f)[(0, 0)].max(T::zero());
            segment_costs.push(ci);
            cost += ci;
            f_star.push(f);
        }
        if !cost.is_finite() {
            return Err(Error::NumericalFailure("non-finite cost".into()));
        }
        Ok(FixedTimeSolution {
            spline: Spline::new(self.basis.k, times.clone(), coeffs)?,
            f_star,
            g_star: g,
            lambdas,
            segment_costs,
            cost,
        })
    }
}

/// Solves the fixed-time problem with the linear-complexity sweep.
pub fn solve_fixed_time<T: Scalar>(problem: &FixedTimeProblem<T>) -> Result<FixedTimeSolution<T>> {
    FixedTimeSolver::new(problem.k)?.solve(problem)
}

/// Solves the fixed-time problem through the dense reduced KKT matrix.
pub fn solve_dense_oracle<T: Scalar>(
    problem: &FixedTimeProblem<T>,
) -> Result<FixedTimeSolution<T>> {
    FixedTimeSolver::new(problem.k)?.solve_dense(problem)
}
