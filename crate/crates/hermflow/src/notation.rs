//! Text forms for complex numbers and vectors: `1.5-2i`, `i`, `-0.25i`, `3`;
//! vectors are comma-separated (`1,0,i`) or a basis shortcut `e1..en`.

use crate::{HermError, Result, C64};

fn bad(s: &str, why: &str) -> HermError {
    HermError::InvalidParameter(format!("cannot parse {s:?} as a complex number: {why}"))
}

fn parse_real(s: &str, whole: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| bad(whole, "bad real part"))?;
    if !v.is_finite() {
        return Err(bad(whole, "not finite"));
    }
    Ok(v)
}

fn parse_imag(s: &str, whole: &str) -> Result<f64> {
    // `s` is the text before the trailing `i`, sign included
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => parse_real(s, whole),
    }
}

pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad(text, "empty"));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(parse_real(&s, text)?, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    match split {
        Some(k) => Ok(C64::new(parse_real(&body[..k], text)?, parse_imag(&body[k..], text)?)),
        None => Ok(C64::new(0.0, parse_imag(body, text)?)),
    }
}

/// `e1..en` or a comma-separated list of exactly `n` entries.
pub fn parse_vector(text: &str, n: usize) -> Result<Vec<C64>> {
    let t = text.trim();
    if let Some(k) = t.strip_prefix('e').and_then(|r| r.parse::<usize>().ok()) {
        if k == 0 || k > n {
            return Err(HermError::InvalidParameter(format!("basis vector {t} outside e1..e{n}")));
        }
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[k - 1] = C64::new(1.0, 0.0);
        return Ok(v);
    }
    let v = t.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
    if v.len() != n {
        return Err(HermError::InvalidParameter(format!("vector {t:?} has {} entries, expected {n}", v.len())));
    }
    Ok(v)
}

fn fmt_real(x: f64) -> String {
    let s = format!("{x}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Inverse of [`parse_complex`] (round-trips exactly).
pub fn format_complex(z: C64) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => fmt_real(z.re),
        (true, false) => format!("{}i", fmt_real(z.im)),
        (false, false) => {
            let sign = if z.im < 0.0 { "-" } else { "+" };
            format!("{}{}{}i", fmt_real(z.re), sign, fmt_real(z.im.abs()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn forms() {
        assert_eq!(parse_complex("1+2i").unwrap(), C64::new(1.0, 2.0));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("0.5-i").unwrap(), C64::new(0.5, -1.0));
        assert_eq!(parse_complex("-3").unwrap(), C64::new(-3.0, 0.0));
        assert_eq!(parse_complex("1e-3+2e+2i").unwrap(), C64::new(1e-3, 200.0));
        assert_eq!(parse_complex(" 2 - 0.25i ").unwrap(), C64::new(2.0, -0.25));
        for bad in ["", "x", "1+", "1+2j", "ii", "nan"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("e2", 3).unwrap()[1], C64::new(1.0, 0.0));
        assert!(parse_vector("e4", 3).is_err());
        assert!(parse_vector("e0", 3).is_err());
        assert_eq!(parse_vector("1,i,0", 3).unwrap()[1], C64::new(0.0, 1.0));
        assert!(parse_vector("1,i", 3).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            let z = C64::new(re, im);
            prop_assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }
}
