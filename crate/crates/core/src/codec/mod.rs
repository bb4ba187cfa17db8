//! Text protocol spoken between the simulation server and its agents.

mod command;
mod error;
mod fields;
pub mod number;
mod server_msg;
mod sexpr;

pub use command::{decode_client_command, encode_client_command, is_team_name, Command, MoveTarget};
pub use error::{DecodeError, EncodeError};
pub use server_msg::{
    decode_server_message, decode_server_text, encode_server_message, LineId, ObjectKind,
    ObservedObject, ParamMap, ParamValue, ServerMessage,
};
pub use sexpr::{is_bare_token, parse_bytes, parse_sexpr, ParseError, SExpr, MAX_DEPTH};
