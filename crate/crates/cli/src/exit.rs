use treekit_core::Error;

pub const OK: i32 = 0;
pub const OTHER: i32 = 1;
pub const VALIDATION: i32 = 2;
pub const ALIGNMENT: i32 = 3;
pub const IO: i32 = 4;

/// Process exit status for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Io { .. } => IO,
                Error::Misaligned { .. } => ALIGNMENT,
                Error::PlacementInfeasible { .. } => OTHER,
                Error::Parse { .. }
                | Error::Invalid { .. }
                | Error::InvalidParameter(_)
                | Error::EmptyCloud
                | Error::DegenerateHull { .. }
                | Error::NoMatches(_)
                | Error::Undefined(_) => VALIDATION,
            };
        }
        if cause.is::<std::io::Error>() {
            return IO;
        }
        if cause.is::<serde_json::Error>() {
            return VALIDATION;
        }
    }
    OTHER
}
