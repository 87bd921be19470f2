//! Instance files: TOML with floats written as C99 hexadecimal literals so that
//! a write/read cycle reproduces every bit.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{row_sparsity, sorted_eigen};
use super::{Hamiltonian, SpectrumMode};
use crate::error::{Error, Result};
use crate::C64;

/// Hexadecimal float literal, e.g. `0x1.999999999999ap-4`.
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        format!("{sign}0x{lead}p{e}")
    } else {
        format!("{sign}0x{lead}.{digits}p{e}")
    }
}

pub fn parse_hex(s: &str) -> Result<f64> {
    match s {
        "nan" => return Ok(f64::NAN),
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    hexf_parse::parse_hexf64(s, false).map_err(|e| Error::Parse(format!("`{s}`: {e}")))
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    re: Vec<Vec<String>>,
    im: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct HamiltonianFile {
    dim: usize,
    model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default)]
    mode: SpectrumMode,
    degeneracy: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sparsity: Option<usize>,
    spectrum: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<MatrixFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eigenvectors: Option<MatrixFile>,
}

fn dump(m: &DMatrix<C64>) -> MatrixFile {
    let rows = |f: fn(&C64) -> f64| {
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| format_hex(f(&m[(r, c)]))).collect()).collect()
    };
    MatrixFile { re: rows(|z| z.re), im: rows(|z| z.im) }
}

fn load(mf: &MatrixFile, n: usize) -> Result<DMatrix<C64>> {
    if mf.re.len() != n || mf.im.len() != n || mf.re.iter().chain(&mf.im).any(|r| r.len() != n) {
        return Err(Error::Parse(format!("matrix block is not {n}x{n}")));
    }
    let mut m = DMatrix::<C64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            m[(r, c)] = C64::new(parse_hex(&mf.re[r][c])?, parse_hex(&mf.im[r][c])?);
        }
    }
    Ok(m)
}

pub fn hamiltonian_to_toml(h: &Hamiltonian) -> String {
    let file = HamiltonianFile {
        dim: h.dim,
        model: h.model_tag.clone(),
        seed: h.seed,
        mode: h.mode,
        degeneracy: h.ground_degeneracy,
        sparsity: Some(h.sparsity),
        spectrum: h.eigenvalues.iter().map(|&x| format_hex(x)).collect(),
        entries: Some(dump(&h.entries)),
        eigenvectors: Some(dump(&h.eigenvectors)),
    };
    toml::to_string(&file).expect("instance serializes")
}

pub fn hamiltonian_from_toml(text: &str) -> Result<Hamiltonian> {
    let f: HamiltonianFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = f.dim;
    if f.spectrum.len() != n {
        return Err(Error::Parse("spectrum length differs from dim".into()));
    }
    let spectrum = f.spectrum.iter().map(|s| parse_hex(s)).collect::<Result<Vec<_>>>()?;
    let entries = match &f.entries {
        Some(m) => Some(load(m, n)?),
        None => None,
    };
    let vecs = match (&f.eigenvectors, &entries) {
        (Some(m), _) => load(m, n)?,
        (None, Some(e)) => sorted_eigen(e).1,
        (None, None) => DMatrix::<C64>::identity(n, n),
    };
    let entries = match entries {
        Some(e) => e,
        None => {
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                spectrum.iter().map(|&x| C64::new(x, 0.0)),
            ));
            &vecs * d * vecs.adjoint()
        }
    };
    let sparsity = f.sparsity.unwrap_or_else(|| row_sparsity(&entries));
    Hamiltonian::assemble(entries, spectrum, vecs, f.degeneracy, sparsity, f.mode, &f.model, f.seed)
}

pub fn write_hamiltonian(h: &Hamiltonian, path: &Path) -> Result<()> {
    std::fs::write(path, hamiltonian_to_toml(h))?;
    Ok(())
}

pub fn read_hamiltonian(path: &Path) -> Result<Hamiltonian> {
    hamiltonian_from_toml(&std::fs::read_to_string(path)?)
}
