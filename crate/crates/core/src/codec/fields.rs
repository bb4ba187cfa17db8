//! Small typed accessors shared by the message and command decoders.

use super::error::DecodeError;
use super::sexpr::SExpr;

pub(crate) fn number(e: &SExpr) -> Result<f64, DecodeError> {
    let text = e.as_atom().ok_or_else(|| DecodeError::NumericParseFailure(e.to_string()))?;
    let v: f64 = text
        .parse()
        .map_err(|_| DecodeError::NumericParseFailure(text.to_string()))?;
    if !v.is_finite() {
        return Err(DecodeError::NumericParseFailure(text.to_string()));
    }
    Ok(v)
}

pub(crate) fn unsigned(e: &SExpr) -> Result<u32, DecodeError> {
    let text = e.as_atom().ok_or_else(|| DecodeError::NumericParseFailure(e.to_string()))?;
    text.parse()
        .map_err(|_| DecodeError::NumericParseFailure(text.to_string()))
}

pub(crate) fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], DecodeError> {
    e.as_list().ok_or_else(|| DecodeError::Malformed(what.to_string()))
}

pub(crate) fn atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, DecodeError> {
    e.as_atom().ok_or_else(|| DecodeError::Malformed(what.to_string()))
}

pub(crate) fn expect_len(items: &[SExpr], n: usize, head: &str) -> Result<(), DecodeError> {
    if items.len() == n {
        Ok(())
    } else {
        Err(DecodeError::FieldCountMismatch(head.to_string()))
    }
}

pub(crate) fn in_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    hi_inclusive: bool,
) -> Result<f64, DecodeError> {
    let ok = value >= lo && if hi_inclusive { value <= hi } else { value < hi };
    if ok {
        Ok(value)
    } else {
        Err(DecodeError::OutOfRangeField { name, value })
    }
}
