//! The KTAB on-disk format, bit-exact.
//!
//! ```text
//! "KTAB"                magic, 4 bytes
//! u32 LE                format version, 1
//! u32 LE                machine version, 1 for KVM-1
//! u32 LE x4             a, b, max_len, prog_bits
//! u32 LE                condition length in bits
//! bytes                 condition bits packed LSB-first
//! bytes                 one entry byte per string in (length, value) order
//!                       over lengths 0..=max_len; 0xFF means "none"
//! u64 LE                FNV-1a of all preceding bytes
//! ```

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::machine::MACHINE_VERSION;
use super::table::{KTable, TimeBound};
use crate::bits::{fnv1a64, Bitstring};

pub const KTAB_MAGIC: &[u8; 4] = b"KTAB";
pub const KTAB_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum KtabError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes, not a KTAB file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    VersionMismatch(u32),
    #[error("unsupported machine version {0}")]
    MachineVersionMismatch(u32),
    #[error("file truncated or trailing garbage ({0})")]
    Truncated(String),
    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("malformed field: {0}")]
    Malformed(String),
}

pub fn ktable_to_bytes(t: &KTable) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(KTAB_MAGIC);
    out.extend_from_slice(&KTAB_VERSION.to_le_bytes());
    out.extend_from_slice(&t.machine_version.to_le_bytes());
    out.extend_from_slice(&t.time_bound.a.to_le_bytes());
    out.extend_from_slice(&t.time_bound.b.to_le_bytes());
    out.extend_from_slice(&t.max_len.to_le_bytes());
    out.extend_from_slice(&t.prog_bits.to_le_bytes());
    match &t.condition {
        None => out.extend_from_slice(&0u32.to_le_bytes()),
        Some(c) => {
            out.extend_from_slice(&(c.len() as u32).to_le_bytes());
            out.extend_from_slice(&c.pack_lsb_bytes());
        }
    }
    out.extend_from_slice(t.raw_entries());
    let checksum = fnv1a64(&out);
    out.extend_from_slice(&checksum.to_le_bytes());
    out
}

pub fn ktable_from_bytes(bytes: &[u8]) -> Result<KTable, KtabError> {
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize, what: &str| -> Result<&[u8], KtabError> {
        if *pos + n > bytes.len() {
            return Err(KtabError::Truncated(what.to_string()));
        }
        let s = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    let read_u32 = |pos: &mut usize, what: &str| -> Result<u32, KtabError> {
        Ok(u32::from_le_bytes(take(pos, 4, what)?.try_into().unwrap()))
    };

    if take(&mut pos, 4, "magic")? != KTAB_MAGIC {
        return Err(KtabError::BadMagic);
    }
    let version = read_u32(&mut pos, "version")?;
    if version != KTAB_VERSION {
        return Err(KtabError::VersionMismatch(version));
    }
    let machine_version = read_u32(&mut pos, "machine version")?;
    if machine_version != MACHINE_VERSION {
        return Err(KtabError::MachineVersionMismatch(machine_version));
    }
    let a = read_u32(&mut pos, "a")?;
    let b = read_u32(&mut pos, "b")?;
    let max_len = read_u32(&mut pos, "max_len")?;
    if max_len > 30 {
        return Err(KtabError::Malformed(format!("max_len {max_len}")));
    }
    let prog_bits = read_u32(&mut pos, "prog_bits")?;
    let cond_len = read_u32(&mut pos, "condition length")? as usize;
    let condition = if cond_len == 0 {
        None
    } else {
        let raw = take(&mut pos, cond_len.div_ceil(8), "condition bits")?;
        Some(
            Bitstring::from_lsb_bytes(cond_len, raw)
                .ok_or_else(|| KtabError::Malformed("condition padding".into()))?,
        )
    };
    let n_entries = KTable::num_entries(max_len);
    let entries = take(&mut pos, n_entries, "entries")?.to_vec();

    let computed = fnv1a64(&bytes[..pos]);
    let stored = u64::from_le_bytes(take(&mut pos, 8, "checksum")?.try_into().unwrap());
    if pos != bytes.len() {
        return Err(KtabError::Truncated("trailing bytes".into()));
    }
    if stored != computed {
        return Err(KtabError::ChecksumMismatch { stored, computed });
    }

    Ok(KTable {
        machine_version,
        time_bound: TimeBound::new(a, b),
        max_len,
        prog_bits,
        condition,
        entries,
    })
}

pub fn save_ktable(t: &KTable, path: impl AsRef<Path>) -> Result<(), KtabError> {
    fs::write(path, ktable_to_bytes(t))?;
    Ok(())
}

pub fn load_ktable(path: impl AsRef<Path>) -> Result<KTable, KtabError> {
    ktable_from_bytes(&fs::read(path)?)
}
