use nalgebra::DMatrix;

use super::RegisterLayout;
use crate::error::{invalid, Error, Result};
use crate::ledger::ResourceLedger;
use crate::C64;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Normalized,
    Subnormalized,
}

/// Amplitude vector over a register layout.
#[derive(Clone, Debug)]
pub struct QState {
    layout: RegisterLayout,
    amps: Vec<C64>,
    kind: NormKind,
}

/// `register & mask == value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub reg: String,
    pub mask: usize,
    pub value: usize,
}

impl Condition {
    pub fn equals(reg: &str, value: usize) -> Self {
        Self { reg: reg.into(), mask: usize::MAX, value }
    }

    /// Top `k` of `bits` digits equal `prefix` (most significant first).
    pub fn prefix(reg: &str, bits: usize, k: usize, prefix: usize) -> Self {
        let shift = bits - k;
        Self { reg: reg.into(), mask: ((1usize << k) - 1) << shift, value: prefix << shift }
    }
}

/// Conjunction of register conditions; defines the flagged subspace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Projector {
    pub conditions: Vec<Condition>,
}

impl Projector {
    pub fn new(conditions: Vec<Condition>) -> Self {
        Self { conditions }
    }

    pub fn zeros(regs: &[&str]) -> Self {
        Self { conditions: regs.iter().map(|r| Condition::equals(r, 0)).collect() }
    }

    pub fn and(mut self, c: Condition) -> Self {
        self.conditions.push(c);
        self
    }

    fn resolve(&self, layout: &RegisterLayout) -> Result<Vec<(usize, usize, usize, usize)>> {
        self.conditions
            .iter()
            .map(|c| {
                let idx = layout.index_of(&c.reg)?;
                let dim = layout.reg_dim(idx);
                let mask = c.mask & (dim - 1);
                if c.value & !mask & (dim - 1) != 0 || c.value >= dim {
                    return invalid(format!("value {} outside register `{}`", c.value, c.reg));
                }
                Ok((layout.stride(idx), dim, mask, c.value))
            })
            .collect()
    }
}

/// Block-diagonal family `sum_k |k><k| (x) F(k)` acting on a target register.
pub trait LabelFamily {
    fn len(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn apply(&self, label: usize, fiber: &mut [C64]);
    /// Resource charge for one application of the whole controlled family.
    fn charge(&self, _ledger: &mut ResourceLedger) {}
}

/// Family of explicit unitaries, checked on construction.
pub struct MatrixFamily {
    mats: Vec<DMatrix<C64>>,
}

impl MatrixFamily {
    pub fn new(mats: Vec<DMatrix<C64>>) -> Result<Self> {
        let d = mats.first().map(|m| m.nrows()).unwrap_or(0);
        for m in &mats {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension("family members differ in size".into()));
            }
            let dev = unitarity_deviation(m);
            if dev > UNITARY_TOL {
                return Err(Error::NotUnitary(dev));
            }
        }
        Ok(Self { mats })
    }
}

impl LabelFamily for MatrixFamily {
    fn len(&self) -> usize {
        self.mats.len()
    }
    fn target_dim(&self) -> usize {
        self.mats.first().map(|m| m.nrows()).unwrap_or(0)
    }
    fn apply(&self, label: usize, fiber: &mut [C64]) {
        let out = matvec(&self.mats[label], fiber);
        fiber.copy_from_slice(&out);
    }
}

/// Family of diagonal phase operators stored as a `len x dim` table, with a
/// fixed simulation-time charge per application.
pub struct DiagonalPhaseFamily {
    pub table: Vec<C64>,
    pub dim: usize,
    pub time_charge: f64,
    pub gate_charge: u64,
}

impl LabelFamily for DiagonalPhaseFamily {
    fn len(&self) -> usize {
        self.table.len() / self.dim
    }
    fn target_dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, label: usize, fiber: &mut [C64]) {
        let row = &self.table[label * self.dim..(label + 1) * self.dim];
        for (z, p) in fiber.iter_mut().zip(row) {
            *z *= p;
        }
    }
    fn charge(&self, ledger: &mut ResourceLedger) {
        ledger.charge_time(self.time_charge);
        ledger.charge_gates(self.gate_charge);
    }
}

pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let p = u.adjoint() * u;
    let n = u.nrows();
    let mut dev = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let want = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((p[(r, c)] - C64::new(want, 0.0)).norm());
        }
    }
    dev
}

fn matvec(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    let n = m.nrows();
    (0..n).map(|r| (0..v.len()).map(|c| m[(r, c)] * v[c]).sum()).collect()
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

impl QState {
    /// All-zeros basis state.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
        amps[0] = C64::new(1.0, 0.0);
        Self { layout, amps, kind: NormKind::Normalized }
    }

    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<C64>, kind: NormKind) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::Dimension(format!("{} amplitudes for a {}-dim layout", amps.len(), layout.dim())));
        }
        Ok(Self { layout, amps, kind })
    }

    /// Product state from one vector per register, in layout order.
    pub fn product(layout: RegisterLayout, parts: &[Vec<C64>]) -> Result<Self> {
        let regs = layout.registers();
        if parts.len() != regs.len() {
            return Err(Error::Dimension("one vector per register required".into()));
        }
        let mut amps = vec![C64::new(1.0, 0.0)];
        for (i, p) in parts.iter().enumerate() {
            if p.len() != layout.reg_dim(i) {
                return Err(Error::Dimension(format!("register `{}` needs {} amplitudes", regs[i].name, layout.reg_dim(i))));
            }
            let mut next = Vec::with_capacity(amps.len() * p.len());
            for a in &amps {
                next.extend(p.iter().map(|b| a * b));
            }
            amps = next;
        }
        let kind = if (norm_sqr(&amps) - 1.0).abs() < 1e-12 { NormKind::Normalized } else { NormKind::Subnormalized };
        Ok(Self { layout, amps, kind })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|z| *z /= n);
        }
        self.kind = NormKind::Normalized;
    }

    pub fn inner(&self, other: &QState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Calls `f(first_index, block)` for every block in which register `reg`
    /// varies slowest and all later registers fastest: `block` is a row-major
    /// `dim(reg) x stride(reg)` matrix.
    pub fn for_each_block(&mut self, reg: &str, mut f: impl FnMut(usize, &mut [C64])) -> Result<()> {
        let idx = self.layout.index_of(reg)?;
        let size = self.layout.reg_dim(idx) * self.layout.stride(idx);
        for (b, chunk) in self.amps.chunks_mut(size).enumerate() {
            f(b * size, chunk);
        }
        Ok(())
    }

    /// Calls `f(base_index, fiber)` for every fiber along `reg`; the fiber is
    /// written back afterwards.
    pub fn for_each_fiber(&mut self, reg: &str, mut f: impl FnMut(usize, &mut [C64])) -> Result<()> {
        let idx = self.layout.index_of(reg)?;
        let d = self.layout.reg_dim(idx);
        let s = self.layout.stride(idx);
        if s == 1 {
            for (b, chunk) in self.amps.chunks_mut(d).enumerate() {
                f(b * d, chunk);
            }
            return Ok(());
        }
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for outer in (0..self.amps.len()).step_by(d * s) {
            for inner in 0..s {
                let base = outer + inner;
                for j in 0..d {
                    buf[j] = self.amps[base + j * s];
                }
                f(base, &mut buf);
                for j in 0..d {
                    self.amps[base + j * s] = buf[j];
                }
            }
        }
        Ok(())
    }

    /// `U (x) 1` on register `reg`.
    pub fn apply_on_register(&mut self, reg: &str, u: &DMatrix<C64>) -> Result<()> {
        let idx = self.layout.index_of(reg)?;
        let d = self.layout.reg_dim(idx);
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Dimension(format!("register `{reg}` has dimension {d}, operator is {}x{}", u.nrows(), u.ncols())));
        }
        let dev = unitarity_deviation(u);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        let s = self.layout.stride(idx);
        let mut out = vec![C64::new(0.0, 0.0); d * s];
        self.for_each_block(reg, |_, blk| {
            out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for r in 0..d {
                let orow = &mut out[r * s..(r + 1) * s];
                for c in 0..d {
                    let m = u[(r, c)];
                    if m == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (o, x) in orow.iter_mut().zip(&blk[c * s..(c + 1) * s]) {
                        *o += m * x;
                    }
                }
            }
            blk.copy_from_slice(&out);
        })
    }

    /// Householder reflection `1 - 2 w w^dagger / ||w||^2` on register `reg`.
    pub fn apply_reflector(&mut self, reg: &str, w: &[C64]) -> Result<()> {
        let idx = self.layout.index_of(reg)?;
        let d = self.layout.reg_dim(idx);
        if w.len() != d {
            return Err(Error::Dimension(format!("reflector of length {} on a {d}-dim register", w.len())));
        }
        let ww = norm_sqr(w);
        if ww == 0.0 {
            return Ok(());
        }
        let s = self.layout.stride(idx);
        let mut y = vec![C64::new(0.0, 0.0); s];
        self.for_each_block(reg, |_, blk| {
            y.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for (j, wj) in w.iter().enumerate() {
                if *wj == C64::new(0.0, 0.0) {
                    continue;
                }
                let c = wj.conj();
                for (acc, x) in y.iter_mut().zip(&blk[j * s..(j + 1) * s]) {
                    *acc += c * x;
                }
            }
            let f = 2.0 / ww;
            for (j, wj) in w.iter().enumerate() {
                if *wj == C64::new(0.0, 0.0) {
                    continue;
                }
                let c = wj * f;
                for (x, acc) in blk[j * s..(j + 1) * s].iter_mut().zip(&y) {
                    *x -= c * acc;
                }
            }
        })
    }

    /// `sum_k |k><k|_label (x) F(k)_target`. Errors only when a label outside
    /// the family carries nonzero amplitude.
    pub fn apply_label_controlled(
        &mut self,
        label_reg: &str,
        target_reg: &str,
        family: &dyn LabelFamily,
        ledger: &mut ResourceLedger,
    ) -> Result<()> {
        let li = self.layout.index_of(label_reg)?;
        let ti = self.layout.index_of(target_reg)?;
        if li == ti {
            return invalid("label and target registers coincide");
        }
        if family.target_dim() != self.layout.reg_dim(ti) {
            return Err(Error::Dimension(format!(
                "family acts on dimension {}, register `{target_reg}` has {}",
                family.target_dim(),
                self.layout.reg_dim(ti)
            )));
        }
        let ls = self.layout.stride(li);
        let ld = self.layout.reg_dim(li);
        let n = family.len();
        let mut bad = None;
        self.for_each_fiber(target_reg, |base, fiber| {
            let label = (base / ls) % ld;
            if label < n {
                family.apply(label, fiber);
            } else if bad.is_none() && fiber.iter().any(|z| z.norm_sqr() > 0.0) {
                bad = Some(label);
            }
        })?;
        if let Some(label) = bad {
            return Err(Error::LabelOutOfRange { label, size: n });
        }
        family.charge(ledger);
        Ok(())
    }

    /// Multiplies each basis state by `f(values of regs)`.
    pub fn apply_diagonal(&mut self, regs: &[&str], f: impl Fn(&[usize]) -> C64) -> Result<()> {
        let idx: Vec<(usize, usize)> = regs
            .iter()
            .map(|r| self.layout.index_of(r).map(|i| (self.layout.stride(i), self.layout.reg_dim(i))))
            .collect::<Result<_>>()?;
        let mut vals = vec![0usize; idx.len()];
        for (g, z) in self.amps.iter_mut().enumerate() {
            for (v, &(s, d)) in vals.iter_mut().zip(&idx) {
                *v = (g / s) % d;
            }
            *z *= f(&vals);
        }
        Ok(())
    }

    /// Multiplies the flagged subspace by `phase`.
    pub fn phase_on(&mut self, proj: &Projector, phase: C64) -> Result<()> {
        let conds = proj.resolve(&self.layout)?;
        for (g, z) in self.amps.iter_mut().enumerate() {
            if conds.iter().all(|&(s, d, m, v)| ((g / s) % d) & m == v) {
                *z *= phase;
            }
        }
        Ok(())
    }

    /// `||Pi s||`.
    pub fn projected_norm(&self, proj: &Projector) -> Result<f64> {
        let conds = proj.resolve(&self.layout)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(g, _)| conds.iter().all(|&(s, d, m, v)| ((g / s) % d) & m == v))
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Zeroes everything outside the flagged subspace (no renormalization).
    pub fn project(&mut self, proj: &Projector) -> Result<()> {
        let conds = proj.resolve(&self.layout)?;
        for (g, z) in self.amps.iter_mut().enumerate() {
            if !conds.iter().all(|&(s, d, m, v)| ((g / s) % d) & m == v) {
                *z = C64::new(0.0, 0.0);
            }
        }
        self.kind = NormKind::Subnormalized;
        Ok(())
    }

    /// Branch with the given registers fixed to basis values, as a state on
    /// the remaining registers, together with its norm.
    pub fn flagged_branch(&self, regs_and_values: &[(&str, usize)]) -> Result<(QState, f64)> {
        let mut fixed = Vec::new();
        for &(name, v) in regs_and_values {
            let idx = self.layout.index_of(name)?;
            if v >= self.layout.reg_dim(idx) {
                return invalid(format!("value {v} outside register `{name}`"));
            }
            fixed.push((idx, v));
        }
        let names: Vec<&str> = regs_and_values.iter().map(|(n, _)| *n).collect();
        let rest = self.layout.without(&names)?;
        let rest_idx: Vec<usize> = (0..self.layout.registers().len()).filter(|i| !fixed.iter().any(|(f, _)| f == i)).collect();
        let mut out = vec![C64::new(0.0, 0.0); rest.dim()];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut g = 0;
            for &(idx, v) in &fixed {
                g += v * self.layout.stride(idx);
            }
            for (ri, &idx) in rest_idx.iter().enumerate() {
                g += rest.value_in(ri, r) * self.layout.stride(idx);
            }
            *slot = self.amps[g];
        }
        let n = norm_sqr(&out).sqrt();
        Ok((QState { layout: rest, amps: out, kind: NormKind::Subnormalized }, n))
    }

    /// Marginal probabilities of the values of `reg`.
    pub fn register_probabilities(&self, reg: &str) -> Result<Vec<f64>> {
        let idx = self.layout.index_of(reg)?;
        let (s, d) = (self.layout.stride(idx), self.layout.reg_dim(idx));
        let mut p = vec![0.0; d];
        for (g, z) in self.amps.iter().enumerate() {
            p[(g / s) % d] += z.norm_sqr();
        }
        Ok(p)
    }

    /// Born-rule measurement of `reg`; the returned state is collapsed and
    /// renormalized.
    pub fn measure_register(mut self, reg: &str, rng: &mut impl rand::Rng) -> Result<(usize, QState)> {
        let idx = self.layout.index_of(reg)?;
        let (s, d) = (self.layout.stride(idx), self.layout.reg_dim(idx));
        let p = self.register_probabilities(reg)?;
        let total: f64 = p.iter().sum();
        if !(total > 0.0) {
            return invalid("cannot measure the zero vector");
        }
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = d - 1;
        for (v, pv) in p.iter().enumerate() {
            acc += pv;
            if u < acc && *pv > 0.0 {
                outcome = v;
                break;
            }
        }
        while p[outcome] == 0.0 {
            outcome -= 1;
        }
        let scale = 1.0 / p[outcome].sqrt();
        for (g, z) in self.amps.iter_mut().enumerate() {
            if (g / s) % d == outcome {
                *z *= scale;
            } else {
                *z = C64::new(0.0, 0.0);
            }
        }
        self.kind = NormKind::Normalized;
        Ok((outcome, self))
    }

    /// One line per nonzero amplitude: `index re im`.
    pub fn dump_text(&self) -> String {
        let mut s = String::new();
        for (g, z) in self.amps.iter().enumerate() {
            if z.norm_sqr() > 0.0 {
                s.push_str(&format!("{g} {:.17e} {:.17e}\n", z.re, z.im));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng as _;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn x_gate() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    fn hadamard() -> DMatrix<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
    }

    fn random_unitary(d: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = stream(seed, 0);
        crate::spectra::haar_unitary(d, &mut rng)
    }

    fn random_state(layout: RegisterLayout, seed: u64) -> QState {
        let mut rng = stream(seed, 1);
        let amps: Vec<C64> = (0..layout.dim()).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let mut s = QState::from_amplitudes(layout, amps, NormKind::Subnormalized).unwrap();
        s.normalize();
        s
    }

    #[test]
    fn bit_flip_and_identity() {
        let l = RegisterLayout::new(&[("a", 1), ("b", 2)]).unwrap();
        let mut s = QState::zero(l.clone());
        s.apply_on_register("b", &DMatrix::identity(4, 4)).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        s.apply_on_register("a", &x_gate()).unwrap();
        assert_eq!(s.amplitudes()[4], c(1.0, 0.0));
        assert!(s.apply_on_register("a", &DMatrix::identity(4, 4)).is_err());
        let mut bad = x_gate();
        bad[(0, 1)] = c(2.0, 0.0);
        assert!(matches!(s.apply_on_register("a", &bad), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn disjoint_registers_commute() {
        let l = RegisterLayout::new(&[("a", 2), ("b", 1), ("c", 2)]).unwrap();
        let s = random_state(l, 3);
        let (u, v) = (random_unitary(4, 1), random_unitary(4, 2));
        let mut x = s.clone();
        x.apply_on_register("a", &u).unwrap();
        x.apply_on_register("c", &v).unwrap();
        let mut y = s;
        y.apply_on_register("c", &v).unwrap();
        y.apply_on_register("a", &u).unwrap();
        for (p, q) in x.amplitudes().iter().zip(y.amplitudes()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn reflector_matches_dense() {
        let l = RegisterLayout::new(&[("a", 3), ("b", 2)]).unwrap();
        let s = random_state(l, 4);
        let w: Vec<C64> = (0..8).map(|i| c(i as f64 * 0.3 - 1.0, 0.2 * i as f64)).collect();
        let ww: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        let wv = nalgebra::DVector::from_vec(w.clone());
        let dense = DMatrix::<C64>::identity(8, 8) - (&wv * wv.adjoint()) * c(2.0 / ww, 0.0);
        let mut x = s.clone();
        x.apply_reflector("a", &w).unwrap();
        let mut y = s;
        y.apply_on_register("a", &dense).unwrap();
        for (p, q) in x.amplitudes().iter().zip(y.amplitudes()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn label_controlled_matches_branchwise_runs() {
        let l = RegisterLayout::new(&[("k", 1), ("sys", 2)]).unwrap();
        let s = random_state(l.clone(), 5);
        let fam = MatrixFamily::new(vec![random_unitary(4, 7), random_unitary(4, 8)]).unwrap();
        let mut led = ResourceLedger::new();
        let mut x = s.clone();
        x.apply_label_controlled("k", "sys", &fam, &mut led).unwrap();
        for k in 0..2 {
            let (branch, _) = s.flagged_branch(&[("k", k)]).unwrap();
            let mut v = branch.amplitudes().to_vec();
            fam.apply(k, &mut v);
            let (got, _) = x.flagged_branch(&[("k", k)]).unwrap();
            for (p, q) in v.iter().zip(got.amplitudes()) {
                assert!((p - q).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_family_equals_register_op() {
        let l = RegisterLayout::new(&[("k", 2), ("sys", 2)]).unwrap();
        let s = random_state(l, 6);
        let u = random_unitary(4, 9);
        let fam = MatrixFamily::new(vec![u.clone(); 4]).unwrap();
        let mut x = s.clone();
        x.apply_label_controlled("k", "sys", &fam, &mut ResourceLedger::new()).unwrap();
        let mut y = s;
        y.apply_on_register("sys", &u).unwrap();
        for (p, q) in x.amplitudes().iter().zip(y.amplitudes()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_label_only_errors_with_support() {
        let l = RegisterLayout::new(&[("k", 2), ("sys", 1)]).unwrap();
        let fam = MatrixFamily::new(vec![x_gate(); 3]).unwrap();
        let mut s = QState::zero(l.clone());
        s.apply_label_controlled("k", "sys", &fam, &mut ResourceLedger::new()).unwrap();
        assert_eq!(s.amplitudes()[1], c(1.0, 0.0));
        let mut amps = vec![c(0.0, 0.0); 8];
        amps[6] = c(1.0, 0.0);
        let mut t = QState::from_amplitudes(l, amps, NormKind::Normalized).unwrap();
        assert!(matches!(
            t.apply_label_controlled("k", "sys", &fam, &mut ResourceLedger::new()),
            Err(Error::LabelOutOfRange { label: 3, size: 3 })
        ));
    }

    #[test]
    fn flagged_branch_examples() {
        let l = RegisterLayout::new(&[("f", 1), ("sys", 1)]).unwrap();
        let psi = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let s = QState::product(l.clone(), &[vec![c(1.0, 0.0), c(0.0, 0.0)], psi.clone()]).unwrap();
        let (b, n) = s.flagged_branch(&[("f", 0)]).unwrap();
        assert!((n - 1.0).abs() < 1e-15);
        assert_eq!(b.amplitudes(), &psi[..]);
        let (_, n1) = s.flagged_branch(&[("f", 1)]).unwrap();
        assert_eq!(n1, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QState::from_amplitudes(l, vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)], NormKind::Normalized).unwrap();
        let (_, nb) = bell.flagged_branch(&[("f", 0)]).unwrap();
        assert!((nb - h).abs() < 1e-15);
    }

    #[test]
    fn prefix_projector_selects_high_digits() {
        let l = RegisterLayout::new(&[("lab", 3)]).unwrap();
        let amps: Vec<C64> = (0..8).map(|i| c(i as f64, 0.0)).collect();
        let s = QState::from_amplitudes(l, amps, NormKind::Subnormalized).unwrap();
        let p = Projector::new(vec![Condition::prefix("lab", 3, 2, 0b10)]);
        let n = s.projected_norm(&p).unwrap();
        assert!((n * n - (16.0 + 25.0)).abs() < 1e-12);
    }

    #[test]
    fn measurement_frequencies_and_collapse() {
        let l = RegisterLayout::new(&[("r", 2), ("sys", 1)]).unwrap();
        let mut s = QState::zero(l);
        s.apply_on_register("r", &nalgebra::DMatrix::from_fn(4, 4, |r, cc| {
            let hh = hadamard();
            hh[(r / 2, cc / 2)] * hh[(r % 2, cc % 2)]
        }))
        .unwrap();
        let mut rng = stream(42, 3);
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            let (o, post) = s.clone().measure_register("r", &mut rng).unwrap();
            counts[o] += 1;
            assert!((post.norm() - 1.0).abs() < 1e-12);
        }
        let chi2: f64 = counts.iter().map(|&k| (k as f64 - 2500.0).powi(2) / 2500.0).sum();
        assert!(chi2 < 16.27, "chi-square {chi2}");
        for k in counts {
            assert!((k as f64 / 1e4 - 0.25).abs() < 0.02);
        }
    }

    #[test]
    fn basis_state_measurement_is_deterministic_and_reproducible() {
        let l = RegisterLayout::new(&[("r", 2)]).unwrap();
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[2] = c(0.0, 1.0);
        let s = QState::from_amplitudes(l.clone(), amps, NormKind::Normalized).unwrap();
        let mut rng = stream(1, 1);
        assert_eq!(s.clone().measure_register("r", &mut rng).unwrap().0, 2);
        let u = random_state(l, 8);
        let seq = |seed| {
            let mut r = stream(seed, 3);
            (0..50).map(|_| u.clone().measure_register("r", &mut r).unwrap().0).collect::<Vec<_>>()
        };
        assert_eq!(seq(9), seq(9));
    }

    #[test]
    fn dump_lists_nonzero_amplitudes() {
        let l = RegisterLayout::new(&[("r", 1)]).unwrap();
        let s = QState::zero(l);
        assert_eq!(s.dump_text(), "0 1.00000000000000000e0 0.00000000000000000e0\n");
    }

    proptest! {
        #[test]
        fn branch_norms_partition_total(seed in 0u64..500, v in 0usize..4) {
            let l = RegisterLayout::new(&[("f", 2), ("sys", 2)]).unwrap();
            let s = random_state(l, seed);
            let total: f64 = (0..4).map(|k| s.flagged_branch(&[("f", k)]).unwrap().1.powi(2)).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            let (_, nv) = s.flagged_branch(&[("f", v)]).unwrap();
            prop_assert!(nv <= 1.0 + 1e-12);
        }

        #[test]
        fn register_ops_preserve_norm(seed in 0u64..200) {
            let l = RegisterLayout::new(&[("a", 2), ("b", 2)]).unwrap();
            let mut s = random_state(l, seed);
            s.apply_on_register("a", &random_unitary(4, seed + 1000)).unwrap();
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }
}
