//! Text forms of functions, e.g. `exp:t=1.0`, `inv_shift:l0=2+1i`,
//! `rational:p=1,0;q=1,-2`, `sep(exp:t=1|pow:2)`, `kernel:sylvester_w`.

use num_complex::Complex64;

use super::{HoloFun1, HoloFun2, ShiftSign};
use crate::error::{Error, Result};

/// Parses `3`, `-0.5i`, `i`, `2+1i`, `1e-3-2i` and similar literals.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("invalid complex number `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let real = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return Ok(Complex64::new(real(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => real(t),
    };
    let z = match split {
        Some(k) => Complex64::new(real(&body[..k])?, imag(&body[k..])?),
        None => Complex64::new(0.0, imag(body)?),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

fn parse_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',').map(parse_complex).collect()
}

/// `key=value` lookup in a comma-separated parameter string, also
/// accepting a bare positional value for single-parameter builtins.
fn param<'a>(params: &'a str, key: &str, positional: bool) -> Option<&'a str> {
    for part in params.split(',') {
        if let Some((k, v)) = part.split_once('=') {
            if k.trim() == key {
                return Some(v.trim());
            }
        } else if positional && !part.trim().is_empty() {
            return Some(part.trim());
        }
    }
    None
}

fn required<'a>(params: &'a str, key: &str, name: &str, positional: bool) -> Result<&'a str> {
    param(params, key, positional).ok_or_else(|| Error::InvalidParams(format!("`{name}` needs parameter `{key}`")))
}

fn parse_uint(s: &str, name: &str) -> Result<u32> {
    s.parse::<u32>()
        .map_err(|_| Error::InvalidParams(format!("`{name}` needs a non-negative integer exponent, got `{s}`")))
}

pub fn parse_f1(spec: &str) -> Result<HoloFun1> {
    let spec = spec.trim();
    let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
    let complex_param = |key: &str, default: Option<Complex64>| -> Result<Complex64> {
        match param(params, key, true) {
            Some(v) => parse_complex(v).map_err(|e| Error::InvalidParams(format!("`{name}`: {e}"))),
            None => default.ok_or_else(|| Error::InvalidParams(format!("`{name}` needs parameter `{key}`"))),
        }
    };
    match name {
        "const" => Ok(HoloFun1::Const(complex_param("c", None)?)),
        "id" => Ok(HoloFun1::Id),
        "pow" => Ok(HoloFun1::Pow(parse_uint(required(params, "n", name, true)?, name)?)),
        "exp" => Ok(HoloFun1::Exp { t: complex_param("t", Some(Complex64::new(1.0, 0.0)))? }),
        "xexp" => Ok(HoloFun1::XExp { t: complex_param("t", Some(Complex64::new(1.0, 0.0)))? }),
        "inv_shift" => Ok(HoloFun1::InvShift { l0: complex_param("l0", None)? }),
        "inv_shift_pow" => {
            let l0 = parse_complex(required(params, "l0", name, false)?)?;
            let n = parse_uint(required(params, "n", name, false)?, name)?;
            Ok(HoloFun1::InvShiftPow { l0, n })
        }
        "sqrt" | "sqrt_principal" => Ok(HoloFun1::Sqrt),
        "log" | "log_principal" => Ok(HoloFun1::Log),
        "poly" => {
            let c = parse_list(params).map_err(|e| Error::InvalidParams(format!("`poly`: {e}")))?;
            Ok(HoloFun1::Poly(super::poly::trim(c)))
        }
        "rational" => {
            let (p, q) = params
                .split_once(';')
                .ok_or_else(|| Error::InvalidParams("`rational` expects p=...;q=...".into()))?;
            let strip = |part: &str, key: &str| -> Result<Vec<Complex64>> {
                let v = part.trim().strip_prefix(key).and_then(|r| r.strip_prefix('=')).ok_or_else(|| {
                    Error::InvalidParams(format!("`rational` expects `{key}=` coefficients"))
                })?;
                parse_list(v).map_err(|e| Error::InvalidParams(format!("`rational`: {e}")))
            };
            HoloFun1::rational(strip(p, "p")?, strip(q, "q")?)
        }
        _ => Err(Error::UnknownBuiltin(name.to_string())),
    }
}

/// Splits `a|b` at the top-level bar, ignoring bars inside parentheses.
fn split_pair(s: &str) -> Result<(&str, &str)> {
    let mut depth = 0i32;
    for (k, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '|' if depth == 0 => return Ok((&s[..k], &s[k + 1..])),
            _ => {}
        }
    }
    Err(Error::Parse(format!("expected `f|g` inside `{s}`")))
}

fn call<'a>(spec: &'a str, head: &str) -> Option<&'a str> {
    spec.strip_prefix(head)?.strip_prefix('(')?.strip_suffix(')')
}

pub fn parse_f2(spec: &str) -> Result<HoloFun2> {
    let spec = spec.trim();
    if let Some(inner) = call(spec, "sep") {
        let (g, h) = split_pair(inner)?;
        return Ok(HoloFun2::Separable(parse_f1(g)?, parse_f1(h)?));
    }
    if let Some(inner) = call(spec, "dd") {
        return Ok(HoloFun2::DividedDifference(parse_f1(inner)?));
    }
    if let Some(inner) = call(spec, "bez") {
        let (g, h) = split_pair(inner)?;
        return Ok(HoloFun2::Bezoutian(parse_f1(g)?, parse_f1(h)?));
    }
    if let Some(inner) = call(spec, "compose") {
        let (f, g) = split_pair(inner)?;
        return Ok(HoloFun2::composed(parse_f1(f)?, parse_f2(g)?));
    }
    let body = spec.strip_prefix("kernel:").unwrap_or(spec);
    let (name, params) = body.split_once(':').unwrap_or((body, ""));
    match name {
        "sylvester_w" => Ok(HoloFun2::SylvesterW),
        "stein_s" => Ok(HoloFun2::SteinS),
        "diff" => Ok(HoloFun2::Diff),
        "sum" => Ok(HoloFun2::Sum),
        "shift_resolvent" => {
            let nu0 = parse_complex(required(params, "nu0", name, false)?)?;
            let sign = match param(params, "sign", false).unwrap_or("+") {
                "+" | "plus" => ShiftSign::Plus,
                "-" | "minus" => ShiftSign::Minus,
                other => return Err(Error::InvalidParams(format!("shift_resolvent sign must be + or -, got `{other}`"))),
            };
            Ok(HoloFun2::ShiftResolvent { nu0, sign })
        }
        _ => Err(Error::UnknownKernel(spec.to_string())),
    }
}
