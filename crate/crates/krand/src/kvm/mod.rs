//! The fixed toy universal machine and exact description-length tables.

mod format;
mod machine;
mod table;

pub use format::{
    ktable_from_bytes, ktable_to_bytes, load_ktable, save_ktable, KtabError, KTAB_MAGIC,
    KTAB_VERSION,
};
pub use machine::{run_program, Opcode, VmOutcome, MACHINE_VERSION};
pub use table::{
    build_ktable, kt_exact, BuildParams, KTable, KvmError, TimeBound, DEFAULT_WORK_BUDGET,
    NO_PROGRAM,
};
