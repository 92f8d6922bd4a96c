//! Output rendering: sweep CSV with a self-describing comment header, the
//! single-run text report, and the raw binary matrix dump. All formats are
//! deterministic byte for byte; nothing here reads the clock.

use std::io::Write;

use num_complex::Complex64;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::qstate::{Basis, DensityMatrix};
use crate::smear::{RegimeReport, SectionalWidths};

pub const CSV_COLUMNS: &str =
    "s,sigma,trace,purity,entropy,w_x_diag,w_x_anti,w_p_diag,w_p_anti,prod1,prod2,regime";

/// Magic bytes opening a binary matrix dump.
pub const BIN_MAGIC: &[u8; 8] = b"QSMEARBM";
pub const BIN_VERSION: u32 = 1;
/// Total header size; the payload of n*n little-endian (re, im) f64 pairs
/// in row-major order follows immediately.
pub const BIN_HEADER_LEN: usize = 32;

/// Diagnostics of one (s, sigma) pipeline run. Width fields are measured on
/// the numerical matrices, not the analytic formulas.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub s: f64,
    pub sigma: f64,
    pub trace: f64,
    pub purity: f64,
    pub entropy: f64,
    pub widths: SectionalWidths,
    pub regime: String,
}

impl PointReport {
    pub fn products(&self) -> (f64, f64) {
        self.widths.products()
    }

    fn csv_row(&self) -> String {
        let (p1, p2) = self.products();
        format!(
            "{:.6e},{:.6e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            self.s,
            self.sigma,
            self.trace,
            self.purity,
            self.entropy,
            self.widths.x_diag,
            self.widths.x_anti,
            self.widths.p_diag,
            self.widths.p_anti,
            p1,
            p2,
            self.regime
        )
    }
}

/// Comment block identifying the run: version, conventions, grid, packet.
fn header_block(cfg: &RunConfig) -> String {
    let mut s = String::new();
    s.push_str(&format!("# qsmear {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("# convention: {}\n", cfg.convention()));
    s.push_str(&format!(
        "# grid: x_min={} x_max={} n={}\n",
        cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n
    ));
    s.push_str(&format!(
        "# wavefunction: type={} s={} x0={} p0={}\n",
        cfg.wavefunction.kind, cfg.wavefunction.s, cfg.wavefunction.x0, cfg.wavefunction.p0
    ));
    s.push_str(&format!(
        "# regime refs: ref_x={} ref_p={} factor={}\n",
        cfg.regime.ref_x, cfg.regime.ref_p, cfg.regime.factor
    ));
    s
}

/// Sweep table: comment header, pinned column list, one row per point.
pub fn render_csv(cfg: &RunConfig, rows: &[PointReport]) -> String {
    let mut out = header_block(cfg);
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}

/// Single-run text report. Sections honor the analysis flags.
pub fn render_report(cfg: &RunConfig, point: &PointReport, regime: Option<&RegimeReport>) -> String {
    let mut out = header_block(cfg);
    out.push_str(&format!("s: {:.9}\n", point.s));
    out.push_str(&format!("sigma: {:.9}\n", point.sigma));
    out.push_str(&format!("trace: {:.9}\n", point.trace));
    if cfg.analysis.purity {
        out.push_str(&format!("purity: {:.9}\n", point.purity));
    }
    if cfg.analysis.entropy {
        out.push_str(&format!("entropy: {:.9}\n", point.entropy));
    }
    if cfg.analysis.widths {
        out.push_str(&format!("w_x_diag: {:.9}\n", point.widths.x_diag));
        out.push_str(&format!("w_x_anti: {:.9}\n", point.widths.x_anti));
        if cfg.analysis.momentum {
            out.push_str(&format!("w_p_diag: {:.9}\n", point.widths.p_diag));
            out.push_str(&format!("w_p_anti: {:.9}\n", point.widths.p_anti));
            let (p1, p2) = point.products();
            out.push_str(&format!("prod_xdiag_panti: {:.9}\n", p1));
            out.push_str(&format!("prod_xanti_pdiag: {:.9}\n", p2));
        }
    }
    if let Some(r) = regime {
        out.push_str(&format!(
            "pattern: {} {} {} {}\n",
            r.pattern[0], r.pattern[1], r.pattern[2], r.pattern[3]
        ));
        out.push_str(&format!("regime: {}\n", r.regime));
    }
    out
}

fn basis_tag(basis: Basis) -> u32 {
    match basis {
        Basis::Position => 0,
        Basis::Momentum => 1,
        Basis::Finite => 2,
    }
}

/// Binary dump: 32-byte header (magic, format version, n, basis tag, zero
/// padding), then the kernel row-major as little-endian (re, im) f64 pairs.
pub fn write_matrix_bin<W: Write>(out: &mut W, rho: &DensityMatrix) -> Result<()> {
    let n = rho.len();
    out.write_all(BIN_MAGIC)?;
    out.write_all(&BIN_VERSION.to_le_bytes())?;
    out.write_all(&(n as u32).to_le_bytes())?;
    out.write_all(&basis_tag(rho.basis()).to_le_bytes())?;
    out.write_all(&[0u8; 12])?;
    for j in 0..n {
        for k in 0..n {
            let v = rho.mat()[(j, k)];
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Parse a binary dump back into (n, basis tag, row-major entries).
pub fn read_matrix_bin(bytes: &[u8]) -> Result<(usize, u32, Vec<Complex64>)> {
    let bad = |reason: &str| Error::InvalidParameter {
        name: "bytes",
        reason: reason.into(),
    };
    if bytes.len() < BIN_HEADER_LEN {
        return Err(bad("shorter than the 32-byte header"));
    }
    if &bytes[0..8] != BIN_MAGIC {
        return Err(bad("magic mismatch"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != BIN_VERSION {
        return Err(bad("unsupported format version"));
    }
    let n = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let tag = u32::from_le_bytes(bytes[16..20].try_into().unwrap());
    let expected = BIN_HEADER_LEN + n * n * 16;
    if bytes.len() != expected {
        return Err(bad("payload length does not match n"));
    }
    let mut entries = Vec::with_capacity(n * n);
    for chunk in bytes[BIN_HEADER_LEN..].chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        entries.push(Complex64::new(re, im));
    }
    Ok((n, tag, entries))
}
