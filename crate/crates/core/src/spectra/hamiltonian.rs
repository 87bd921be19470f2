use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use rand::seq::SliceRandom;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{stream, STREAM_INSTANCE};
use crate::C64;

/// Headroom below 1 left for the energy shift.
pub const NORMALIZATION_MARGIN: f64 = 0.05;

/// Target spectral window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMode {
    /// Spectrum in `[0, 1 - NORMALIZATION_MARGIN]`.
    #[default]
    Standard,
    /// Spectrum in `[0, 1/2]`, as needed by the walk construction.
    Walk,
}

impl SpectrumMode {
    pub fn top(self) -> f64 {
        match self {
            SpectrumMode::Standard => 1.0 - NORMALIZATION_MARGIN,
            SpectrumMode::Walk => 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    /// Diagonal matrix with the given entries, used as is.
    Diagonal {
        eigenvalues: Vec<f64>,
        #[serde(default)]
        degeneracy: Option<usize>,
    },
    /// Explicit spectrum conjugated by a seeded Haar unitary. The ground energy
    /// is drawn from a fixed window unless given.
    RandomHermitian {
        dim: usize,
        gap: f64,
        #[serde(default)]
        ground: Option<f64>,
    },
    /// Open transverse-field Ising chain `-sum Z_i Z_{i+1} - field * sum X_i`,
    /// affinely rescaled into the target window.
    TransverseIsing { sites: usize, field: f64 },
    /// `(H' + c)/2^k` with distinct integer spectrum of `H'` in
    /// `[2^(k-2), 2^(k-1))`; the two lowest integers differ by `gap_units`.
    Adversarial {
        k: u32,
        c: f64,
        dim: usize,
        #[serde(default = "one")]
        gap_units: u64,
    },
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: Model,
    #[serde(default)]
    pub mode: SpectrumMode,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(model: Model, seed: u64) -> Self {
        Self { model, mode: SpectrumMode::Standard, seed }
    }

    pub fn walk(mut self) -> Self {
        self.mode = SpectrumMode::Walk;
        self
    }
}

/// Dense Hermitian operator with its spectral decomposition.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub dim: usize,
    pub entries: DMatrix<C64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<C64>,
    pub gap: f64,
    pub ground_degeneracy: usize,
    pub sparsity: usize,
    pub mode: SpectrumMode,
    pub model_tag: String,
    pub seed: Option<u64>,
}

/// Verification-only ground-space data.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub energy: f64,
    pub projector: DMatrix<C64>,
    pub gap: f64,
}

impl Hamiltonian {
    /// Assembles `V diag(spectrum) V^dagger`. `spectrum` must be ascending.
    pub fn from_spectrum(
        spectrum: Vec<f64>,
        eigenvectors: DMatrix<C64>,
        degeneracy: Option<usize>,
        mode: SpectrumMode,
        tag: &str,
        seed: Option<u64>,
    ) -> Result<Self> {
        let n = spectrum.len();
        check_dim(n)?;
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return invalid("eigenvector matrix does not match spectrum length");
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            spectrum.iter().map(|&x| C64::new(x, 0.0)),
        ));
        let mut entries = &eigenvectors * d * eigenvectors.adjoint();
        hermitize(&mut entries);
        let g = match degeneracy {
            Some(g) => g,
            None => detect_degeneracy(&spectrum, 1e-12),
        };
        let sparsity = row_sparsity(&entries);
        Self::assemble(entries, spectrum, eigenvectors, g, sparsity, mode, tag, seed)
    }

    /// Diagonalizes a Hermitian matrix and rescales it affinely into the
    /// target window.
    pub fn from_dense_normalized(
        raw: DMatrix<C64>,
        mode: SpectrumMode,
        tag: &str,
        seed: Option<u64>,
    ) -> Result<Self> {
        let n = raw.nrows();
        check_dim(n)?;
        if raw.ncols() != n {
            return invalid("matrix is not square");
        }
        let mut raw = raw;
        hermitize(&mut raw);
        let sparsity = row_sparsity(&raw);
        let (vals, vecs) = sorted_eigen(&raw);
        let lo = vals[0];
        let hi = vals[n - 1];
        let span = hi - lo;
        let top = mode.top();
        let (scale, shift) = if span > 0.0 { (top / span, -lo * top / span) } else { (0.0, 0.0) };
        let spectrum: Vec<f64> = vals.iter().map(|&v| (scale * v + shift).clamp(0.0, top)).collect();
        let mut entries = raw.map(|z| z * scale);
        for i in 0..n {
            entries[(i, i)] += C64::new(shift, 0.0);
        }
        let g = detect_degeneracy(&spectrum, 1e-10);
        Self::assemble(entries, spectrum, vecs, g, sparsity, mode, tag, seed)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        entries: DMatrix<C64>,
        spectrum: Vec<f64>,
        eigenvectors: DMatrix<C64>,
        g: usize,
        sparsity: usize,
        mode: SpectrumMode,
        tag: &str,
        seed: Option<u64>,
    ) -> Result<Self> {
        let n = spectrum.len();
        if g == 0 || g > n {
            return invalid(format!("ground degeneracy {g} outside 1..={n}"));
        }
        let gap = if g < n { spectrum[g] - spectrum[0] } else { 0.0 };
        Ok(Self {
            dim: n,
            entries,
            eigenvalues: spectrum,
            eigenvectors,
            gap,
            ground_degeneracy: g,
            sparsity,
            mode,
            model_tag: tag.to_string(),
            seed,
        })
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    /// Coordinates of `v` in the eigenbasis.
    pub fn to_eigen(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|r| self.eigenvectors[(r, i)].conj() * v[r]).sum())
            .collect()
    }

    /// Inverse of [`Hamiltonian::to_eigen`].
    pub fn from_eigen(&self, c: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n).map(|r| (0..n).map(|i| self.eigenvectors[(r, i)] * c[i]).sum()).collect()
    }

    /// Weight of `v` on the ground space, `||P v||^2`.
    pub fn projector_fidelity(&self, v: &[C64]) -> f64 {
        let c = self.to_eigen(v);
        c[..self.ground_degeneracy].iter().map(|z| z.norm_sqr()).sum()
    }

    /// Same as [`Hamiltonian::projector_fidelity`] for eigenbasis coordinates.
    pub fn projector_fidelity_eigen(&self, c: &[C64]) -> f64 {
        c[..self.ground_degeneracy].iter().map(|z| z.norm_sqr()).sum()
    }

    /// Spectrum of `entries` recomputed by the dense eigensolver, ascending.
    pub fn recomputed_spectrum(&self) -> Vec<f64> {
        sorted_eigen(&self.entries).0
    }
}

pub fn ground_truth(h: &Hamiltonian) -> GroundTruth {
    let n = h.dim;
    let mut p = DMatrix::<C64>::zeros(n, n);
    for c in 0..h.ground_degeneracy {
        let v = h.eigenvectors.column(c);
        p += &v * v.adjoint();
    }
    GroundTruth { energy: h.eigenvalues[0], projector: p, gap: h.gap }
}

pub fn build_hamiltonian(spec: &ModelSpec) -> Result<Hamiltonian> {
    let top = spec.mode.top();
    let seed = spec.seed;
    match &spec.model {
        Model::Diagonal { eigenvalues, degeneracy } => {
            let n = eigenvalues.len();
            check_dim(n)?;
            if eigenvalues.iter().any(|&x| !(0.0..=top).contains(&x)) {
                return invalid(format!("diagonal entries must lie in [0, {top}]"));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
            let spectrum: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
            let mut vecs = DMatrix::<C64>::zeros(n, n);
            for (col, &i) in order.iter().enumerate() {
                vecs[(i, col)] = C64::new(1.0, 0.0);
            }
            let mut entries = DMatrix::<C64>::zeros(n, n);
            for (i, &x) in eigenvalues.iter().enumerate() {
                entries[(i, i)] = C64::new(x, 0.0);
            }
            let g = degeneracy.unwrap_or_else(|| detect_degeneracy(&spectrum, 1e-12));
            let sparsity = row_sparsity(&entries);
            Hamiltonian::assemble(entries, spectrum, vecs, g, sparsity, spec.mode, "diagonal", None)
        }
        Model::RandomHermitian { dim, gap, ground } => {
            let n = *dim;
            check_dim(n)?;
            if n < 2 {
                return invalid("random-hermitian needs dim >= 2");
            }
            let (lo, hi) = match spec.mode {
                SpectrumMode::Standard => (0.1f64, 0.4f64),
                SpectrumMode::Walk => (0.05, 0.2),
            };
            if !(*gap > 0.0) || gap + lo >= top {
                return invalid(format!("gap {gap} incompatible with spectral window [0, {top}]"));
            }
            let mut rng = stream(seed, STREAM_INSTANCE);
            let l0 = match ground {
                Some(g0) => {
                    if !(0.0..top).contains(g0) || g0 + gap > top {
                        return invalid(format!("ground energy {g0} with gap {gap} leaves the window"));
                    }
                    *g0
                }
                None => {
                    let hi = hi.min(top - gap);
                    lo + (hi - lo) * rng.gen::<f64>()
                }
            };
            let l1 = l0 + gap;
            let mut spectrum = vec![l0, l1];
            for _ in 2..n {
                spectrum.push(l1 + (top - l1) * rng.gen::<f64>());
            }
            spectrum.sort_by(f64::total_cmp);
            let u = haar_unitary(n, &mut rng);
            Hamiltonian::from_spectrum(spectrum, u, Some(1), spec.mode, "random-hermitian", Some(seed))
        }
        Model::TransverseIsing { sites, field } => {
            let raw = tfim(*sites, *field)?;
            Hamiltonian::from_dense_normalized(raw, spec.mode, "transverse-ising", None)
        }
        Model::Adversarial { k, c, dim, gap_units } => {
            let (k, n) = (*k, *dim);
            check_dim(n)?;
            if !(0.0 < *c && *c < 0.5) {
                return invalid("adversarial offset c must lie in (0, 1/2)");
            }
            if !(2..=50).contains(&k) {
                return invalid("adversarial k must lie in 2..=50");
            }
            let lo_int = 1u64 << (k - 2);
            let hi_int = 1u64 << (k - 1);
            let avail = hi_int - lo_int;
            if (n as u64) > avail || (n > 1 && *gap_units + n as u64 - 2 >= avail) || *gap_units == 0 {
                return invalid(format!("dim {n} does not fit the integer window of k={k}"));
            }
            let mut rng = stream(seed, STREAM_INSTANCE);
            let mut ints: Vec<u64> = Vec::with_capacity(n);
            let base = lo_int;
            ints.push(base);
            if n > 1 {
                let second = base + gap_units;
                ints.push(second);
                let mut pool: Vec<u64> = (second + 1..hi_int).collect();
                pool.shuffle(&mut rng);
                ints.extend(pool.into_iter().take(n - 2));
            }
            ints.sort_unstable();
            let scale = (k as f64).exp2();
            let spectrum: Vec<f64> = ints.iter().map(|&x| (x as f64 + c) / scale).collect();
            let u = haar_unitary(n, &mut rng);
            let mut h = Hamiltonian::from_spectrum(spectrum, u, Some(1), spec.mode, "adversarial", Some(seed))?;
            if h.eigenvalues.iter().any(|&x| x > top) {
                return invalid("adversarial spectrum leaves the target window");
            }
            h.sparsity = row_sparsity(&h.entries);
            Ok(h)
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return invalid(format!("dimension {n} is not a power of two"));
    }
    if n > 4096 {
        return invalid(format!("dimension {n} above the dense limit 4096"));
    }
    Ok(())
}

fn hermitize(m: &mut DMatrix<C64>) {
    let adj = m.adjoint();
    *m += adj;
    *m *= C64::new(0.5, 0.0);
}

fn detect_degeneracy(spectrum: &[f64], tol: f64) -> usize {
    spectrum.iter().take_while(|&&x| x - spectrum[0] <= tol).count()
}

pub(crate) fn row_sparsity(m: &DMatrix<C64>) -> usize {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).filter(|&c| m[(r, c)].norm() > 1e-14).count())
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Ascending eigenvalues with matching eigenvector columns.
pub(crate) fn sorted_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<C64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal divided out.
pub(crate) fn haar_unitary(n: usize, rng: &mut crate::rng::Rng) -> DMatrix<C64> {
    let g = DMatrix::<C64>::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

fn tfim(sites: usize, field: f64) -> Result<DMatrix<C64>> {
    if sites == 0 || sites > 12 {
        return invalid("transverse-ising chain needs 1..=12 sites");
    }
    let n = 1usize << sites;
    let mut m = DMatrix::<C64>::zeros(n, n);
    for s in 0..n {
        let mut zz = 0.0;
        for i in 0..sites.saturating_sub(1) {
            let a = if s >> i & 1 == 0 { 1.0 } else { -1.0 };
            let b = if s >> (i + 1) & 1 == 0 { 1.0 } else { -1.0 };
            zz += a * b;
        }
        m[(s, s)] = C64::new(-zz, 0.0);
        for i in 0..sites {
            m[(s ^ (1 << i), s)] += C64::new(-field, 0.0);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op_norm(m: &DMatrix<C64>) -> f64 {
        m.clone().singular_values().max()
    }

    #[test]
    fn diagonal_example() {
        let spec = ModelSpec::new(Model::Diagonal { eigenvalues: vec![0.1, 0.3, 0.6, 0.9], degeneracy: None }, 0);
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.ground_energy(), 0.1);
        assert!((h.gap - 0.2).abs() < 1e-15);
        assert_eq!(h.ground_degeneracy, 1);
    }

    #[test]
    fn degenerate_diagonal_ground_truth() {
        let spec = ModelSpec::new(
            Model::Diagonal { eigenvalues: vec![0.1, 0.1, 0.6, 0.9], degeneracy: Some(2) },
            0,
        );
        let h = build_hamiltonian(&spec).unwrap();
        let gt = ground_truth(&h);
        assert_eq!(gt.energy, 0.1);
        assert!((gt.gap - 0.5).abs() < 1e-15);
        let trace: f64 = (0..4).map(|i| gt.projector[(i, i)].re).sum();
        assert!((trace - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_hermitian_gap_and_reconstruction() {
        let spec = ModelSpec::new(Model::RandomHermitian { dim: 64, gap: 0.05, ground: None }, 7);
        let h = build_hamiltonian(&spec).unwrap();
        assert!(h.gap >= 0.05 - 1e-15 && h.gap <= 0.06);
        let adj = h.entries.adjoint();
        let herm = (&h.entries - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(herm <= 1e-12);
        let gt = ground_truth(&h);
        let resid = &h.entries * &gt.projector - &gt.projector * C64::new(gt.energy, 0.0);
        assert!(op_norm(&resid) <= 1e-10);
        let again = h.recomputed_spectrum();
        for (a, b) in again.iter().zip(&h.eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(h.eigenvalues.iter().all(|&x| (0.0..=0.95).contains(&x)));
    }

    #[test]
    fn adversarial_fractional_offsets() {
        let spec = ModelSpec::new(Model::Adversarial { k: 6, c: 0.25, dim: 8, gap_units: 1 }, 3);
        let h = build_hamiltonian(&spec).unwrap();
        for &l in &h.eigenvalues {
            let y = 64.0 * l;
            assert_eq!((y - y.round()).abs(), 0.25);
        }
    }

    #[test]
    fn transverse_ising_window_and_sparsity() {
        let spec = ModelSpec::new(Model::TransverseIsing { sites: 4, field: 1.0 }, 0);
        let h = build_hamiltonian(&spec).unwrap();
        assert!(h.eigenvalues[0].abs() < 1e-12);
        assert!((h.eigenvalues[15] - 0.95).abs() < 1e-12);
        assert_eq!(h.sparsity, 5);
        let again = h.recomputed_spectrum();
        for (a, b) in again.iter().zip(&h.eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn walk_mode_window() {
        let spec = ModelSpec::new(Model::RandomHermitian { dim: 8, gap: 0.1, ground: None }, 1).walk();
        let h = build_hamiltonian(&spec).unwrap();
        assert!(h.eigenvalues.iter().all(|&x| (0.0..=0.5).contains(&x)));
    }

    #[test]
    fn rejects_bad_specs() {
        let bad_dim = ModelSpec::new(Model::RandomHermitian { dim: 12, gap: 0.1, ground: None }, 0);
        assert!(build_hamiltonian(&bad_dim).is_err());
        let bad_gap = ModelSpec::new(Model::RandomHermitian { dim: 8, gap: 0.9, ground: None }, 0);
        assert!(build_hamiltonian(&bad_gap).is_err());
        let bad_diag = ModelSpec::new(Model::Diagonal { eigenvalues: vec![0.1, 0.2, 0.3], degeneracy: None }, 0);
        assert!(build_hamiltonian(&bad_diag).is_err());
    }

    #[test]
    fn haar_columns_orthonormal() {
        let mut rng = stream(11, 0);
        let u = haar_unitary(16, &mut rng);
        let dev = (&u.adjoint() * &u - DMatrix::<C64>::identity(16, 16)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }
}
