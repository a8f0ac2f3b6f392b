//! Table cache: stable, injective file names per build parameter set.

use std::path::{Path, PathBuf};

use krand::bits::Bitstring;

/// Cache file name for a table build. Injective over
/// (machine version, a, b, max_len, prog_bits, condition): every field is
/// delimited, and the condition encodes its exact bit length ("none" when
/// absent, which differs from an empty condition "0x").
pub fn cache_key(
    machine_version: u32,
    a: u32,
    b: u32,
    max_len: u32,
    prog_bits: u32,
    condition: Option<&Bitstring>,
) -> String {
    let cond = match condition {
        None => "none".to_string(),
        Some(c) => {
            let hex: String = c
                .pack_lsb_bytes()
                .iter()
                .map(|byte| format!("{byte:02x}"))
                .collect();
            format!("{}x{hex}", c.len())
        }
    };
    format!("ktab-m{machine_version}-a{a}-b{b}-n{max_len}-p{prog_bits}-c{cond}.ktab")
}

pub fn cache_path(
    dir: &Path,
    machine_version: u32,
    a: u32,
    b: u32,
    max_len: u32,
    prog_bits: u32,
    condition: Option<&Bitstring>,
) -> PathBuf {
    dir.join(cache_key(
        machine_version,
        a,
        b,
        max_len,
        prog_bits,
        condition,
    ))
}
