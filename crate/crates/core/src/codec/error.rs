use super::sexpr::ParseError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown message head `{0}`")]
    UnknownMessageHead(String),
    #[error("unknown command head `{0}`")]
    UnknownCommandHead(String),
    #[error("wrong number of fields in `{0}`")]
    FieldCountMismatch(String),
    #[error("cannot parse `{0}` as a number")]
    NumericParseFailure(String),
    #[error("field `{name}` out of range: {value}")]
    OutOfRangeField { name: &'static str, value: f64 },
    #[error("unknown flag `{0}`")]
    UnknownFlag(String),
    #[error("malformed `{0}`")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodeError {
    #[error("field `{name}` out of range: {value}")]
    OutOfRangeField { name: &'static str, value: f64 },
    #[error("field `{0}` holds text that cannot be sent")]
    InvalidText(&'static str),
}
