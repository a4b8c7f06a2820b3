//! On-disk cache of computed Frobenius series.
//!
//! Format: line 1 the magic `FROBCACHE1`; line 2 a canonical key-value
//! header; then `r^2` lines `row col c_0 c_1 ... c_(K-1)` with decimal
//! mantissas.  Byte output is deterministic for fixed inputs.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigUint;

use crate::arith::{PadicApprox, SeriesMat, ZpCtx};
use crate::error::{Error, Result};
use crate::frobenius::{FrobeniusData, Lift};

pub const MAGIC: &str = "FROBCACHE1";
pub const KERNEL_VERSION: u32 = 1;

pub fn header_line(data: &FrobeniusData) -> String {
    format!(
        "family={} p={} M={} Mw={} K={} lift={} version={}",
        data.family, data.p, data.m_target, data.mw, data.k, data.lift, KERNEL_VERSION
    )
}

pub fn render(data: &FrobeniusData) -> String {
    let r = data.phi.dim();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&header_line(data));
    out.push('\n');
    for row in 0..r {
        for col in 0..r {
            out.push_str(&format!("{row} {col}"));
            let s = &data.phi[(row, col)];
            for i in 0..data.k {
                out.push(' ');
                out.push_str(&s.coeff(i).mantissa().to_string());
            }
            out.push('\n');
        }
    }
    out
}

/// Write atomically: to a temporary sibling, then rename.
pub fn write_atomic(path: &Path, data: &FrobeniusData) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, render(data))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Cache file name for a deformation job.
pub fn cache_path(dir: &Path, family: &str, p: u64, m: u32, mw: u32, k: usize) -> PathBuf {
    dir.join(format!("{family}_p{p}_M{m}_Mw{mw}_K{k}_standard.frobcache"))
}

/// Load a cached series, verifying the header against the expected job.
pub fn load(
    path: &Path,
    family: &str,
    p: u64,
    m_target: u32,
    mw: u32,
    k: usize,
    r: usize,
) -> Result<Option<FrobeniusData>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(Error::Invalid(format!("{}: bad cache magic", path.display())));
    }
    let ctx = ZpCtx::new(p, mw)?;
    let expected_header = format!(
        "family={family} p={p} M={m_target} Mw={mw} K={k} lift=standard version={KERNEL_VERSION}"
    );
    match lines.next() {
        Some(h) if h == expected_header => {}
        Some(_) | None => return Ok(None),
    }
    let acc = mw.saturating_sub(crate::frobenius::solver_loss_budget(p, k));
    let mut phi = SeriesMat::zero(&ctx, r, k);
    for line in lines {
        let mut parts = line.split_ascii_whitespace();
        let row: usize = parse_field(&mut parts, path)?;
        let col: usize = parse_field(&mut parts, path)?;
        let mut coeffs = Vec::with_capacity(k);
        for part in parts {
            let n: BigUint = part
                .parse()
                .map_err(|_| Error::Invalid(format!("{}: bad mantissa", path.display())))?;
            coeffs.push(PadicApprox::from_biguint(&ctx, n).with_acc_floor(acc));
        }
        if coeffs.len() != k {
            return Err(Error::Invalid(format!("{}: wrong coefficient count", path.display())));
        }
        phi[(row, col)] = crate::arith::TruncSeries::from_coeffs(&ctx, coeffs, k);
    }
    let phi0 = phi.coeff_matrix(0);
    Ok(Some(FrobeniusData {
        family: family.to_string(),
        p,
        m_target,
        mw,
        k,
        lift: Lift::Standard,
        phi,
        phi0,
        acc,
    }))
}

fn parse_field<'a, T: std::str::FromStr>(
    parts: &mut impl Iterator<Item = &'a str>,
    path: &Path,
) -> Result<T> {
    parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Invalid(format!("{}: truncated cache line", path.display())))
}

/// Context helper for loaders.
pub fn ctx_for(p: u64, mw: u32) -> Result<Arc<ZpCtx>> {
    ZpCtx::new(p, mw)
}
