//! Argument values that need more than clap's scalar parsing.

use nilfourier::exact::Q;
use nilfourier::ideals::IdealLattice;
use nilfourier::io::{parse_coloring_table, parse_element, parse_int_list, parse_multfn};
use nilfourier::multfn::{CmDefault, MultFnSpec, MultKind};
use nilfourier::nilseq::PolySeq;
use nilfourier::numfield::{Field, FieldElement};
use nilfourier::partreg::{gerardin_quartic_spec, gerardin_spec, quad_parametrization, Coloring, KTypeSpec};
use nilfourier::{Error, Result};

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))
}

/// `mobius`, `liouville`, `one`, `random` (phases keyed by the seed), `legendre:P`, or a
/// path to a function-spec file.
pub fn multfn(field: &Field, name: &str, seed: u64) -> Result<MultFnSpec> {
    let kind = match name {
        "mobius" => MultKind::Mobius,
        "liouville" => MultKind::Liouville,
        "one" => MultKind::One,
        "random" => MultKind::CompletelyMultiplicative { prime_values: Vec::new(), default: CmDefault::RandomPhase(seed) },
        _ => {
            if let Some(p) = name.strip_prefix("legendre:") {
                let p = p.parse().map_err(|e| Error::Parse(format!("legendre modulus {p:?}: {e}")))?;
                return MultFnSpec::legendre(field, p);
            }
            return parse_multfn(field, &read(name)?);
        }
    };
    MultFnSpec::new(field, kind)
}

/// Elements separated by `;`.
pub fn elements(field: &Field, text: &str) -> Result<Vec<FieldElement>> {
    text.split(';').map(|t| parse_element(field, t)).collect()
}

pub fn floats(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

fn ratio_as_f64(t: &str) -> Result<f64> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}")));
    match t.split_once('/') {
        Some((a, b)) => Ok(num(a)? / num(b)?),
        None => num(t),
    }
}

/// Polynomial sequence from `J:V` terms, `J` a multi-index and `V` the coefficient vector.
///
/// The sequence is exact when every coefficient is an integer or a fraction `p/q`.
pub fn sequence(terms: &[String], monomial: bool, degree: Option<u32>) -> Result<PolySeq> {
    let mut parsed: Vec<(Vec<u32>, Vec<String>)> = Vec::new();
    for t in terms {
        let (j, v) = t
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `index:values`, found {t:?}")))?;
        let j = parse_int_list(j)?
            .into_iter()
            .map(|x| u32::try_from(x).map_err(|_| Error::Parse(format!("negative index in {t:?}"))))
            .collect::<Result<Vec<u32>>>()?;
        parsed.push((j, v.split(',').map(|s| s.trim().to_string()).collect()));
    }
    let (first_j, first_v) = parsed.first().ok_or_else(|| Error::Parse("at least one --coef is required".into()))?;
    let (dim, out) = (first_j.len(), first_v.len());
    let degree = degree.unwrap_or_else(|| parsed.iter().map(|(j, _)| j.iter().sum::<u32>()).max().unwrap_or(0));
    let exact: Option<Vec<(Vec<u32>, Vec<Q>)>> = parsed
        .iter()
        .map(|(j, v)| v.iter().map(|s| s.parse::<Q>().ok()).collect::<Option<Vec<Q>>>().map(|v| (j.clone(), v)))
        .collect();
    match exact {
        Some(t) if monomial => PolySeq::from_monomial_exact(dim, out, degree, &t),
        Some(t) => PolySeq::from_binomial_exact(dim, out, degree, &t),
        None => {
            let t = parsed
                .iter()
                .map(|(j, v)| Ok((j.clone(), v.iter().map(|s| ratio_as_f64(s)).collect::<Result<Vec<f64>>>()?)))
                .collect::<Result<Vec<_>>>()?;
            if monomial {
                PolySeq::from_monomial(dim, out, degree, &t)
            } else {
                PolySeq::from_binomial(dim, out, degree, &t)
            }
        }
    }
}

/// `gerardin`, `gerardin-quartic`, or six comma-separated quadratic-form coefficients.
pub fn ktype(preset: Option<&str>, quad: Option<&str>) -> Result<KTypeSpec> {
    match (preset, quad) {
        (Some("gerardin"), None) => gerardin_spec(),
        (Some("gerardin-quartic"), None) => gerardin_quartic_spec(),
        (Some(p), None) => Err(Error::Parse(format!("unknown preset {p:?}"))),
        (None, Some(q)) => match parse_int_list(q)?.as_slice() {
            &[a, b, c, d, e, f] => quad_parametrization(a, b, c, d, e, f),
            v => Err(Error::Parse(format!("--quad needs 6 coefficients, found {}", v.len()))),
        },
        _ => Err(Error::Parse("give exactly one of --preset and --quad".into())),
    }
}

/// `constant`, `parity`, `residue:ELEM` (classes mod the principal ideal) or `table:PATH`.
pub fn coloring(field: &Field, text: &str) -> Result<Coloring> {
    match text {
        "constant" => Ok(Coloring::Constant),
        "parity" => Ok(Coloring::Parity),
        _ => {
            if let Some(e) = text.strip_prefix("residue:") {
                Ok(Coloring::Residue(IdealLattice::principal(&parse_element(field, e)?)?))
            } else if let Some(p) = text.strip_prefix("table:") {
                Ok(Coloring::Table(parse_coloring_table(&read(p)?)?))
            } else {
                Err(Error::Parse(format!("unknown coloring {text:?}")))
            }
        }
    }
}
