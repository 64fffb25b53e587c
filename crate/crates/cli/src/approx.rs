//! The approximation file: a text header followed by the coefficient
//! tensor as little-endian binary64.
//!
//! Rigorous bounds are computed *from* the stored coefficients, so the
//! round-trip must be bit-exact: the domain corners travel as raw f64 bit
//! patterns and the payload is the coefficient array byte-for-byte.
//!
//! ```text
//! ellipcert-approx v1
//! n: 40
//! domain-bits: 0000000000000000 3ff0000000000000 0000000000000000 3ff0000000000000
//! domain: [0, 1] x [0, 1]
//! problem-digest: 9f2c…
//! coeff-count: 1600
//!
//! <1600 × 8 bytes, little endian, x-major>
//! ```
//!
//! Unknown header keys are ignored (the `domain:` line is informational).

use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use ellipcert_core::galerkin::ProblemSpec;
use ellipcert_core::legendre::{LegendreFunction, Rectangle};

const MAGIC: &str = "ellipcert-approx v1";

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("cannot access {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("malformed approximation file: {0}")]
    Malformed(String),
}

fn malformed(msg: impl Into<String>) -> ApproxError {
    ApproxError::Malformed(msg.into())
}

/// Digest binding an approximation file to the problem it was solved for:
/// λ, the nonlinear terms, and the domain, all as exact bit patterns.
pub fn problem_digest(p: &ProblemSpec) -> String {
    let mut h = Sha256::new();
    h.update(b"ellipcert-problem-v1");
    h.update(p.lambda().lo().to_bits().to_le_bytes());
    h.update(p.lambda().hi().to_bits().to_le_bytes());
    h.update((p.terms().len() as u64).to_le_bytes());
    for t in p.terms() {
        h.update(u64::from(t.exponent).to_le_bytes());
        h.update(t.coeff.lo().to_bits().to_le_bytes());
        h.update(t.coeff.hi().to_bits().to_le_bytes());
    }
    let d = p.domain();
    for v in [d.x0(), d.x1(), d.y0(), d.y1()] {
        h.update(v.to_bits().to_le_bytes());
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write(path: &Path, u: &LegendreFunction, problem_digest: &str) -> Result<(), ApproxError> {
    let d = u.domain();
    let mut head = String::new();
    head.push_str(MAGIC);
    head.push('\n');
    head.push_str(&format!("n: {}\n", u.n()));
    head.push_str(&format!(
        "domain-bits: {:016x} {:016x} {:016x} {:016x}\n",
        d.x0().to_bits(),
        d.x1().to_bits(),
        d.y0().to_bits(),
        d.y1().to_bits()
    ));
    head.push_str(&format!(
        "domain: [{}, {}] x [{}, {}]\n",
        d.x0(),
        d.x1(),
        d.y0(),
        d.y1()
    ));
    head.push_str(&format!("problem-digest: {problem_digest}\n"));
    head.push_str(&format!("coeff-count: {}\n", u.coeffs().len()));
    head.push('\n');

    let io_err = |err| ApproxError::Io {
        path: path.display().to_string(),
        err,
    };
    let mut f = std::fs::File::create(path).map_err(io_err)?;
    f.write_all(head.as_bytes()).map_err(io_err)?;
    let mut payload = Vec::with_capacity(u.coeffs().len() * 8);
    for &c in u.coeffs() {
        payload.extend_from_slice(&c.to_le_bytes());
    }
    f.write_all(&payload).map_err(io_err)?;
    Ok(())
}

/// Reads an approximation file; returns the function and the stored
/// problem digest.
pub fn read(path: &Path) -> Result<(LegendreFunction, String), ApproxError> {
    let bytes = std::fs::read(path).map_err(|err| ApproxError::Io {
        path: path.display().to_string(),
        err,
    })?;
    let split = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| malformed("missing blank line after the header"))?;
    let header = std::str::from_utf8(&bytes[..split])
        .map_err(|_| malformed("header is not UTF-8"))?;
    let payload = &bytes[split + 2..];

    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return Err(malformed(format!("first line is not {MAGIC:?}")));
    }
    let mut n: Option<usize> = None;
    let mut domain_bits: Option<[u64; 4]> = None;
    let mut digest: Option<String> = None;
    let mut count: Option<usize> = None;
    for line in lines {
        let Some((key, value)) = line.split_once(':') else {
            return Err(malformed(format!("header line without a key: {line:?}")));
        };
        let value = value.trim();
        match key {
            "n" => {
                n = Some(
                    value
                        .parse()
                        .map_err(|e| malformed(format!("n: {e}")))?,
                )
            }
            "domain-bits" => {
                let parts: Vec<u64> = value
                    .split_whitespace()
                    .map(|w| u64::from_str_radix(w, 16))
                    .collect::<Result<_, _>>()
                    .map_err(|e| malformed(format!("domain-bits: {e}")))?;
                let arr: [u64; 4] = parts
                    .try_into()
                    .map_err(|_| malformed("domain-bits needs 4 words"))?;
                domain_bits = Some(arr);
            }
            "problem-digest" => digest = Some(value.to_string()),
            "coeff-count" => {
                count = Some(
                    value
                        .parse()
                        .map_err(|e| malformed(format!("coeff-count: {e}")))?,
                )
            }
            _ => {} // informational / forward-compatible
        }
    }
    let n = n.ok_or_else(|| malformed("missing n"))?;
    let bits = domain_bits.ok_or_else(|| malformed("missing domain-bits"))?;
    let digest = digest.ok_or_else(|| malformed("missing problem-digest"))?;
    let count = count.ok_or_else(|| malformed("missing coeff-count"))?;
    if count != n * n {
        return Err(malformed(format!(
            "coeff-count {count} does not equal n² = {}",
            n * n
        )));
    }
    if payload.len() != count * 8 {
        return Err(malformed(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            count * 8
        )));
    }
    let coeffs: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let domain = Rectangle::new(
        f64::from_bits(bits[0]),
        f64::from_bits(bits[1]),
        f64::from_bits(bits[2]),
        f64::from_bits(bits[3]),
    )
    .map_err(|e| malformed(format!("stored domain: {e}")))?;
    let u = LegendreFunction::new(n, coeffs, domain)
        .map_err(|e| malformed(format!("stored coefficients: {e}")))?;
    Ok((u, digest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_function() -> LegendreFunction {
        let n = 5;
        let coeffs = (0..n * n)
            .map(|i| (i as f64 * 0.7372).sin() * 1e3)
            .collect();
        LegendreFunction::new(n, coeffs, Rectangle::UNIT).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = std::env::temp_dir().join("ellipcert-approx-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.approx");
        let u = sample_function();
        let digest = problem_digest(&ProblemSpec::emden(3));
        write(&path, &u, &digest).unwrap();
        let (v, stored) = read(&path).unwrap();
        assert_eq!(stored, digest);
        assert_eq!(u.n(), v.n());
        assert_eq!(u.domain(), v.domain());
        let a: Vec<u64> = u.coeffs().iter().map(|c| c.to_bits()).collect();
        let b: Vec<u64> = v.coeffs().iter().map(|c| c.to_bits()).collect();
        assert_eq!(a, b);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = std::env::temp_dir().join("ellipcert-approx-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("truncated.approx");
        let u = sample_function();
        write(&path, &u, "x").unwrap();
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() - 5]).unwrap();
        let err = read(&path).unwrap_err();
        assert!(err.to_string().contains("bytes"), "{err}");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn digest_separates_problems() {
        let a = problem_digest(&ProblemSpec::emden(3));
        let b = problem_digest(&ProblemSpec::emden(5));
        assert_ne!(a, b);
    }
}
