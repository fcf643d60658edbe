//! Text formats: field definitions, multiplicative-function specs, elements and coloring
//! tables.
//!
//! All formats are line based, `key = value`, with `#` starting a comment.

use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multfn::{CmDefault, MultFnSpec, MultKind};
use crate::numfield::{builtin, Field, FieldElement, FieldSpec, BUILTIN_NAMES};

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

/// Non-empty lines with comments stripped, split at the first `=`.
fn pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(i + 1, format!("expected `key = value`, found {line:?}")))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Error::Parse(format!("expected `re` or `re,im`, found {s:?}"))),
    }
}

/// Field definition:
///
/// ```text
/// label = Qsqrt5
/// degree = 2
/// poly = -1,-1,1          # c0,…,cD, monic
/// ```
///
/// or a structure table, with `table[i][j] = k:c,…` listing the nonzero coordinates of
/// `b_i·b_j` and `one` the coordinates of 1. Entries given only for `i ≤ j` are mirrored.
pub fn parse_field(text: &str) -> Result<Field> {
    let mut label = None;
    let mut degree = None;
    let mut poly = None;
    let mut one = None;
    let mut entries: Vec<(usize, usize, usize, Vec<(usize, i64)>)> = Vec::new();
    for (ln, k, v) in pairs(text)? {
        match k.as_str() {
            "label" => label = Some(v),
            "degree" => degree = Some(v.parse::<usize>().map_err(|e| parse_err(ln, e))?),
            "poly" => poly = Some(parse_int_list(&v).map_err(|e| parse_err(ln, e))?),
            "one" => one = Some(parse_int_list(&v).map_err(|e| parse_err(ln, e))?),
            key if key.starts_with("table[") => {
                let idx: Vec<usize> = key
                    .trim_start_matches("table")
                    .split(['[', ']'])
                    .filter(|s| !s.is_empty())
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(ln, e))?;
                let [i, j] = idx[..] else {
                    return Err(parse_err(ln, format!("bad table key {key:?}")));
                };
                let coords = v
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| {
                        let (kk, c) = t.split_once(':').ok_or_else(|| parse_err(ln, format!("expected k:c, found {t:?}")))?;
                        Ok((
                            kk.trim().parse::<usize>().map_err(|e| parse_err(ln, e))?,
                            c.trim().parse::<i64>().map_err(|e| parse_err(ln, e))?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                entries.push((ln, i, j, coords));
            }
            other => return Err(parse_err(ln, format!("unknown key {other:?}"))),
        }
    }
    let label = label.ok_or_else(|| Error::Parse("missing `label`".into()))?;
    let degree = degree.ok_or_else(|| Error::Parse("missing `degree`".into()))?;
    match (poly, entries.is_empty()) {
        (Some(p), true) => {
            if one.is_some() {
                return Err(Error::Parse("`one` is only used with a table".into()));
            }
            if p.len() != degree + 1 {
                return Err(Error::Parse(format!("poly has {} coefficients, degree {degree} needs {}", p.len(), degree + 1)));
            }
            FieldSpec::from_poly(&label, &p)
        }
        (None, false) => {
            let one = one.ok_or_else(|| Error::Parse("a table needs `one`".into()))?;
            let d = degree;
            let mut table: Vec<Option<i64>> = vec![None; d * d * d];
            let mut set = |ln: usize, i: usize, j: usize, k: usize, c: i64| -> Result<()> {
                let slot = &mut table[(i * d + j) * d + k];
                match slot {
                    Some(old) if *old != c => Err(parse_err(ln, format!("conflicting entry for b{i}*b{j}"))),
                    _ => {
                        *slot = Some(c);
                        Ok(())
                    }
                }
            };
            for (ln, i, j, coords) in &entries {
                if *i >= d || *j >= d {
                    return Err(parse_err(*ln, format!("index out of range for degree {d}")));
                }
                let mut full = vec![0i64; d];
                for &(k, c) in coords {
                    if k >= d {
                        return Err(parse_err(*ln, format!("coordinate {k} out of range")));
                    }
                    full[k] += c;
                }
                for (k, &c) in full.iter().enumerate() {
                    set(*ln, *i, *j, k, c)?;
                    set(*ln, *j, *i, k, c)?;
                }
            }
            let table: Vec<i64> = table.into_iter().map(|c| c.unwrap_or(0)).collect();
            FieldSpec::from_table(&label, d, table, one)
        }
        (Some(_), false) => Err(Error::Parse("give either `poly` or a table, not both".into())),
        (None, true) => Err(Error::Parse("missing `poly` or table".into())),
    }
}

/// A builtin name or a path to a field-definition file.
pub fn load_field(spec: &str) -> Result<Field> {
    if BUILTIN_NAMES.contains(&spec) {
        return builtin(spec);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::InvalidField(format!(
            "{spec:?} is neither a builtin ({}) nor a readable file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{spec}: {e}")))?;
    parse_field(&text)
}

/// Multiplicative-function spec:
///
/// ```text
/// kind = cm                 # mobiusK | liouvilleK | one | cm | character
/// default = random:7        # cm only: one | random:SEED
/// prime 1,1 = 0,1           # cm: value re,im at the prime generated by (1,1)
/// modulus = 5               # character: generator of the modulus ideal
/// value 2 = 0,1             # character: value on the class of (2)
/// ```
pub fn parse_multfn(field: &Field, text: &str) -> Result<MultFnSpec> {
    let mut kind = None;
    let mut default = CmDefault::One;
    let mut modulus = None;
    let mut primes = Vec::new();
    let mut values = Vec::new();
    for (ln, k, v) in pairs(text)? {
        let (head, arg) = k.split_once(char::is_whitespace).map_or((k.as_str(), ""), |(h, a)| (h, a.trim()));
        match head {
            "kind" => kind = Some(v),
            "default" => {
                default = match v.as_str() {
                    "one" => CmDefault::One,
                    s if s.starts_with("random:") => {
                        CmDefault::RandomPhase(s["random:".len()..].parse().map_err(|e| parse_err(ln, e))?)
                    }
                    s => return Err(parse_err(ln, format!("unknown default {s:?}"))),
                }
            }
            "modulus" => modulus = Some(parse_int_list(&v).map_err(|e| parse_err(ln, e))?),
            "prime" => primes.push((parse_int_list(arg).map_err(|e| parse_err(ln, e))?, parse_complex(&v)?)),
            "value" => values.push((parse_int_list(arg).map_err(|e| parse_err(ln, e))?, parse_complex(&v)?)),
            other => return Err(parse_err(ln, format!("unknown key {other:?}"))),
        }
    }
    let kind = match kind.as_deref() {
        Some("mobiusK") => MultKind::Mobius,
        Some("liouvilleK") => MultKind::Liouville,
        Some("one") => MultKind::One,
        Some("cm") => MultKind::CompletelyMultiplicative { prime_values: primes, default },
        Some("character") => MultKind::Character {
            modulus: modulus.ok_or_else(|| Error::Parse("a character needs `modulus`".into()))?,
            values,
        },
        Some(other) => return Err(Error::Parse(format!("unknown kind {other:?}"))),
        None => return Err(Error::Parse("missing `kind`".into())),
    };
    MultFnSpec::new(field, kind)
}

/// Element with an optional power suffix.
///
/// The body is a comma-separated coordinate vector (`2,1`) or a sum of terms `c` and
/// `cw^i`, where `w^i` is the basis element `b_i` and a bare constant is a multiple of
/// `b_0` (`2+1w^1`). A trailing `^k`, possibly after whitespace, raises the element to the
/// `k`-th power: `2+1w^1 ^4`.
pub fn parse_element(field: &Field, text: &str) -> Result<FieldElement> {
    let text = text.trim();
    let (body, power) = match text.rsplit_once(char::is_whitespace) {
        Some((b, p)) if p.starts_with('^') => (b.trim(), Some(p)),
        _ => (text, None),
    };
    let power = power
        .map(|p| p[1..].parse::<u32>().map_err(|e| Error::Parse(format!("power {p:?}: {e}"))))
        .transpose()?;
    let d = field.degree();
    let coords: Vec<i64> = if body.contains('w') {
        let mut coords = vec![0i64; d];
        let normalized = body.replace(' ', "").replace('-', "+-");
        for term in normalized.split('+').filter(|t| !t.is_empty()) {
            let (coef, idx) = match term.split_once('w') {
                None => (term, 0usize),
                Some((c, rest)) => {
                    let idx = match rest.strip_prefix('^') {
                        Some(i) => i.parse::<usize>().map_err(|e| Error::Parse(format!("term {term:?}: {e}")))?,
                        None if rest.is_empty() => 1,
                        None => return Err(Error::Parse(format!("bad term {term:?}"))),
                    };
                    (c, idx)
                }
            };
            let c = match coef {
                "" => 1,
                "-" => -1,
                s => s.parse::<i64>().map_err(|e| Error::Parse(format!("term {term:?}: {e}")))?,
            };
            if idx >= d {
                return Err(Error::Parse(format!("w^{idx} is outside a degree-{d} basis")));
            }
            coords[idx] += c;
        }
        coords
    } else {
        let v = parse_int_list(body)?;
        if v.len() != d {
            return Err(Error::ShapeMismatch(format!("{} coordinates given for a degree-{d} field", v.len())));
        }
        v
    };
    let x = FieldElement::from_int(field, &coords);
    Ok(match power {
        Some(k) => x.pow(k),
        None => x,
    })
}

/// Coloring table: lines `c0,…,c(D−1) = color`.
pub fn parse_coloring_table(text: &str) -> Result<HashMap<Vec<i64>, i64>> {
    let mut out = HashMap::new();
    for (ln, k, v) in pairs(text)? {
        let key = parse_int_list(&k).map_err(|e| parse_err(ln, e))?;
        let color = v.parse::<i64>().map_err(|e| parse_err(ln, e))?;
        if out.insert(key, color).is_some() {
            return Err(parse_err(ln, "duplicate entry"));
        }
    }
    Ok(out)
}
