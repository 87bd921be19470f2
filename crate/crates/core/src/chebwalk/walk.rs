use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::ledger::ResourceLedger;
use crate::registers::unitarity_deviation;
use crate::C64;

/// Largest system dimension the dense walk space is built for.
pub const MAX_WALK_DIM: usize = 64;

/// Row-sparse access to a Hermitian matrix: `nu(j, l)` is the column of the
/// `l`-th slot of row `j`. Rows with fewer than `d` nonzeros are padded with
/// zero columns so that each row has exactly `d` distinct slots.
#[derive(Clone, Debug)]
pub struct SparseOracle {
    pub entries: DMatrix<C64>,
    pub d: usize,
    nu: Vec<Vec<usize>>,
}

impl SparseOracle {
    /// `d` defaults to the largest row sparsity.
    pub fn new(entries: DMatrix<C64>, d: Option<usize>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::Dimension("sparse oracle needs a square matrix".into()));
        }
        let nz = |j: usize, k: usize| entries[(j, k)].norm() > 0.0;
        let rows: Vec<Vec<usize>> = (0..n).map(|j| (0..n).filter(|&k| nz(j, k)).collect()).collect();
        let need = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let d = d.unwrap_or(need);
        if d < need || d > n {
            return invalid(format!("sparsity {d} outside {need}..={n}"));
        }
        let nu = rows
            .into_iter()
            .enumerate()
            .map(|(j, mut r)| {
                r.extend((0..n).filter(|&k| !nz(j, k)).take(d - r.len()));
                r
            })
            .collect();
        Ok(Self { entries, d, nu })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn nu(&self, j: usize, l: usize) -> usize {
        self.nu[j][l]
    }

    pub fn entry(&self, j: usize, k: usize) -> C64 {
        self.entries[(j, k)]
    }
}

/// Amplitude on `|0>` of the slot ancilla for entry `(j, k)`: a square root of
/// `conj(H_jk)`, with the branch chosen so that `f(k, j) conj(f(j, k)) = H_jk`.
fn slot_amplitude(h: C64, j: usize, k: usize) -> C64 {
    let theta = if j <= k { h.arg() } else { -h.conj().arg() };
    C64::from_polar(h.norm().sqrt(), -theta / 2.0)
}

/// The walk on `C^{2N} (x) C^{2N}`. Index of `|j,b>|k,c>` is
/// `(2j + b) 2N + (2k + c)`. `T` is stored column-sparse.
#[derive(Clone, Debug)]
pub struct WalkSpace {
    pub n: usize,
    pub d: usize,
    /// `H / d`.
    pub h_over_d: DMatrix<C64>,
    psi: Vec<Vec<(usize, C64)>>,
}

impl WalkSpace {
    pub fn dim(&self) -> usize {
        4 * self.n * self.n
    }

    /// Qubits of the doubled space, `2 ceil(log2 N) + 2`.
    pub fn qubits(&self) -> usize {
        2 * self.n.next_power_of_two().trailing_zeros() as usize + 2
    }

    fn index(&self, j: usize, b: usize, k: usize, c: usize) -> usize {
        (2 * j + b) * 2 * self.n + 2 * k + c
    }

    /// `T c = sum_j c_j |psi_j>`.
    pub fn apply_t(&self, c: &[C64]) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        for (col, cj) in self.psi.iter().zip(c) {
            for &(i, a) in col {
                v[i] += a * cj;
            }
        }
        v
    }

    pub fn apply_t_adjoint(&self, v: &[C64]) -> Vec<C64> {
        self.psi.iter().map(|col| col.iter().map(|&(i, a)| a.conj() * v[i]).sum()).collect()
    }

    pub fn swap(&self, v: &[C64]) -> Vec<C64> {
        let m = 2 * self.n;
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for x in 0..m {
            for y in 0..m {
                out[y * m + x] = v[x * m + y];
            }
        }
        out
    }

    /// `W v = S (2 T T^+ - 1) v`.
    pub fn step(&self, v: &[C64]) -> Vec<C64> {
        let t = self.apply_t(&self.apply_t_adjoint(v));
        let r: Vec<C64> = t.iter().zip(v).map(|(a, b)| 2.0 * a - b).collect();
        self.swap(&r)
    }

    pub fn step_charged(&self, v: &[C64], ledger: &mut ResourceLedger) -> Vec<C64> {
        ledger.charge_walk(1);
        self.step(v)
    }

    pub fn t_matrix(&self) -> DMatrix<C64> {
        let mut t = DMatrix::zeros(self.dim(), self.n);
        for (j, col) in self.psi.iter().enumerate() {
            for &(i, a) in col {
                t[(i, j)] = a;
            }
        }
        t
    }

    /// Dense `W`; only sensible for small `N`.
    pub fn w_matrix(&self) -> Result<DMatrix<C64>> {
        if self.n > 16 {
            return invalid("dense walk matrix limited to N <= 16");
        }
        let dim = self.dim();
        let mut w = DMatrix::zeros(dim, dim);
        let mut e = vec![C64::new(0.0, 0.0); dim];
        for c in 0..dim {
            e[c] = C64::new(1.0, 0.0);
            for (r, z) in self.step(&e).into_iter().enumerate() {
                w[(r, c)] = z;
            }
            e[c] = C64::new(0.0, 0.0);
        }
        Ok(w)
    }

    /// `||T^+ T - 1||` and, for small `N`, the unitarity deviation of `W`.
    pub fn isometry_deviation(&self) -> f64 {
        let t = self.t_matrix();
        let g = t.adjoint() * &t - DMatrix::<C64>::identity(self.n, self.n);
        op_norm(&g)
    }

    pub fn unitarity_deviation(&self) -> Result<f64> {
        Ok(unitarity_deviation(&self.w_matrix()?))
    }

    /// `||T^+ S T - H/d||`.
    pub fn identity_deviation(&self) -> f64 {
        let mut g = DMatrix::<C64>::zeros(self.n, self.n);
        let mut e = vec![C64::new(0.0, 0.0); self.n];
        for k in 0..self.n {
            e[k] = C64::new(1.0, 0.0);
            let col = self.apply_t_adjoint(&self.swap(&self.apply_t(&e)));
            for (j, z) in col.into_iter().enumerate() {
                g[(j, k)] = z;
            }
            e[k] = C64::new(0.0, 0.0);
        }
        op_norm(&(g - &self.h_over_d))
    }

    /// `||(1 - P) W P||` for `P` the projector onto `span{T|j>, S T|j>}`.
    pub fn invariance_deviation(&self) -> f64 {
        let n = self.n;
        let t = self.t_matrix();
        let mut a = DMatrix::<C64>::zeros(self.dim(), 2 * n);
        a.columns_mut(0, n).copy_from(&t);
        for j in 0..n {
            let st = self.swap(t.column(j).as_slice());
            for (i, z) in st.into_iter().enumerate() {
                a[(i, n + j)] = z;
            }
        }
        let q = orthonormal_columns(&a);
        let mut worst = DMatrix::<C64>::zeros(self.dim(), q.ncols());
        for c in 0..q.ncols() {
            let wq = self.step(q.column(c).as_slice());
            for (i, z) in wq.into_iter().enumerate() {
                worst[(i, c)] = z;
            }
        }
        let proj = &q * (q.adjoint() * &worst);
        op_norm(&(worst - proj))
    }
}

fn orthonormal_columns(a: &DMatrix<C64>) -> DMatrix<C64> {
    let g = a.adjoint() * a;
    let eig = nalgebra::linalg::SymmetricEigen::new(g);
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 1e-10).collect();
    let mut q = DMatrix::<C64>::zeros(a.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let v = a * eig.eigenvectors.column(i) / C64::new(eig.eigenvalues[i].sqrt(), 0.0);
        q.set_column(c, &v);
    }
    q
}

/// Largest singular value.
pub(crate) fn op_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Builds `|psi_j> = |j,0> (x) d^{-1/2} sum_l |nu(j,l)> (f|0> + sqrt(1-|H|)|1>)`.
pub fn build_walk(oracle: &SparseOracle) -> Result<WalkSpace> {
    let n = oracle.dim();
    if n > MAX_WALK_DIM {
        return Err(Error::CapacityExceeded { needed: n, cap: MAX_WALK_DIM });
    }
    let d = oracle.d;
    for j in 0..n {
        let hjj = oracle.entry(j, j);
        if hjj.re < -1e-14 || hjj.im.abs() > 1e-12 {
            return invalid(format!("diagonal entry {j} is {hjj}; the walk needs it real and nonnegative"));
        }
        for k in 0..n {
            let m = oracle.entry(j, k).norm();
            if m > 1.0 + 1e-12 {
                return Err(Error::Modulus(m));
            }
        }
    }
    let mut ws = WalkSpace { n, d, h_over_d: oracle.entries.map(|z| z / d as f64), psi: Vec::with_capacity(n) };
    let s = 1.0 / (d as f64).sqrt();
    for j in 0..n {
        let mut col = Vec::with_capacity(2 * d);
        for l in 0..d {
            let k = oracle.nu(j, l);
            let mut h = oracle.entry(j, k);
            if j == k {
                h = C64::new(h.re.max(0.0), 0.0);
            }
            let f = slot_amplitude(h, j, k);
            col.push((ws.index(j, 0, k, 0), f * s));
            col.push((ws.index(j, 0, k, 1), C64::new((1.0 - h.norm()).max(0.0).sqrt() * s, 0.0)));
        }
        ws.psi.push(col);
    }
    Ok(ws)
}

/// `||T^+ W^k T - T_k(H/d)||` for `k = 0..=kmax`.
pub fn walk_block_deviations(ws: &WalkSpace, kmax: usize) -> Vec<f64> {
    let n = ws.n;
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            ws.apply_t(&e)
        })
        .collect();
    let x = &ws.h_over_d;
    let mut prev = DMatrix::<C64>::identity(n, n);
    let mut cur = x.clone();
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut block = DMatrix::<C64>::zeros(n, n);
        for (c, v) in cols.iter().enumerate() {
            for (r, z) in ws.apply_t_adjoint(v).into_iter().enumerate() {
                block[(r, c)] = z;
            }
        }
        let want = if k == 0 { &prev } else { &cur };
        out.push(op_norm(&(block - want)));
        if k >= 1 {
            let next = (x * &cur) * C64::new(2.0, 0.0) - &prev;
            prev = std::mem::replace(&mut cur, next);
        }
        for v in cols.iter_mut() {
            *v = ws.step(v);
        }
    }
    out
}

pub fn walk_block_check(ws: &WalkSpace, k: usize) -> f64 {
    *walk_block_deviations(ws, k).last().unwrap_or(&0.0)
}
