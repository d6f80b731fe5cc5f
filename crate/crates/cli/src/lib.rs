//! Library surface of the benchmark driver: the timing harness, record
//! schema, performance models, proxy-ISA checks, and the verification
//! runner. The `dwbench` binary is a thin command-line front end over
//! these modules.

pub mod harness;
pub mod models;
pub mod pisa;
pub mod records;
pub mod verify;
