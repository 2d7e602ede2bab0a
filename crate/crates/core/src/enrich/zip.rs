//! Minimal ZIP archive access: a central-directory reader covering stored
//! and deflate entries, and a deterministic stored-only writer used for
//! fixture jars. No zip64.

use std::io::Read;

use flate2::read::DeflateDecoder;

use super::MalformedArchive;

const EOCD_SIG: u32 = 0x0605_4b50;
const CENTRAL_SIG: u32 = 0x0201_4b50;
const LOCAL_SIG: u32 = 0x0403_4b50;
/// EOCD is 22 bytes plus up to a 65535-byte comment.
const EOCD_SEARCH_MAX: usize = 22 + 0xFFFF;

const METHOD_STORED: u16 = 0;
const METHOD_DEFLATE: u16 = 8;

/// One decompressed archive entry.
#[derive(Debug, Clone)]
pub struct ZipEntry {
    pub name: String,
    pub data: Vec<u8>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn at(bytes: &'a [u8], pos: usize) -> Cursor<'a> {
        Cursor { bytes, pos }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], MalformedArchive> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                MalformedArchive::new(format!("truncated archive at offset {}", self.pos))
            })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u16(&mut self) -> Result<u16, MalformedArchive> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, MalformedArchive> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Reads every entry of a ZIP archive by walking the central directory.
/// Directory entries (trailing `/`) are skipped. CRCs are verified.
pub fn read_archive(bytes: &[u8]) -> Result<Vec<ZipEntry>, MalformedArchive> {
    let eocd_pos = find_eocd(bytes)?;
    let mut eocd = Cursor::at(bytes, eocd_pos + 4);
    let _disk = eocd.u16()?;
    let _cd_disk = eocd.u16()?;
    let _disk_entries = eocd.u16()?;
    let total_entries = eocd.u16()?;
    let _cd_size = eocd.u32()?;
    let cd_offset = eocd.u32()? as usize;

    let mut entries = Vec::new();
    let mut cursor = Cursor::at(bytes, cd_offset);
    for i in 0..total_entries {
        if cursor.u32()? != CENTRAL_SIG {
            return Err(MalformedArchive::new(format!(
                "bad central directory signature for entry {i}"
            )));
        }
        let _version_made = cursor.u16()?;
        let _version_needed = cursor.u16()?;
        let _flags = cursor.u16()?;
        let method = cursor.u16()?;
        let _mtime = cursor.u16()?;
        let _mdate = cursor.u16()?;
        let crc = cursor.u32()?;
        let compressed_size = cursor.u32()? as usize;
        let uncompressed_size = cursor.u32()? as usize;
        let name_len = cursor.u16()? as usize;
        let extra_len = cursor.u16()? as usize;
        let comment_len = cursor.u16()? as usize;
        let _disk_start = cursor.u16()?;
        let _internal_attrs = cursor.u16()?;
        let _external_attrs = cursor.u32()?;
        let local_offset = cursor.u32()? as usize;
        let name = String::from_utf8_lossy(cursor.take(name_len)?).into_owned();
        cursor.take(extra_len)?;
        cursor.take(comment_len)?;

        if compressed_size == 0xFFFF_FFFF || uncompressed_size == 0xFFFF_FFFF {
            return Err(MalformedArchive::new("zip64 archives are not supported"));
        }
        if name.ends_with('/') {
            continue;
        }

        let data = read_entry_data(bytes, local_offset, method, compressed_size)?;
        if data.len() != uncompressed_size {
            return Err(MalformedArchive::new(format!(
                "entry {name:?}: expected {uncompressed_size} bytes, got {}",
                data.len()
            )));
        }
        if crc32fast::hash(&data) != crc {
            return Err(MalformedArchive::new(format!(
                "entry {name:?}: crc mismatch"
            )));
        }
        entries.push(ZipEntry { name, data });
    }
    Ok(entries)
}

fn find_eocd(bytes: &[u8]) -> Result<usize, MalformedArchive> {
    if bytes.len() < 22 {
        return Err(MalformedArchive::new("too short to be a zip archive"));
    }
    let start = bytes.len().saturating_sub(EOCD_SEARCH_MAX);
    for pos in (start..=bytes.len() - 22).rev() {
        if bytes[pos..pos + 4] == EOCD_SIG.to_le_bytes() {
            return Ok(pos);
        }
    }
    Err(MalformedArchive::new("no end-of-central-directory record"))
}

fn read_entry_data(
    bytes: &[u8],
    local_offset: usize,
    method: u16,
    compressed_size: usize,
) -> Result<Vec<u8>, MalformedArchive> {
    let mut local = Cursor::at(bytes, local_offset);
    if local.u32()? != LOCAL_SIG {
        return Err(MalformedArchive::new(format!(
            "bad local header signature at offset {local_offset}"
        )));
    }
    let _version = local.u16()?;
    let _flags = local.u16()?;
    let _method = local.u16()?;
    let _mtime = local.u16()?;
    let _mdate = local.u16()?;
    let _crc = local.u32()?;
    let _csize = local.u32()?;
    let _usize = local.u32()?;
    let name_len = local.u16()? as usize;
    let extra_len = local.u16()? as usize;
    local.take(name_len)?;
    local.take(extra_len)?;
    let compressed = local.take(compressed_size)?;

    match method {
        METHOD_STORED => Ok(compressed.to_vec()),
        METHOD_DEFLATE => {
            let mut out = Vec::new();
            DeflateDecoder::new(compressed)
                .read_to_end(&mut out)
                .map_err(|e| MalformedArchive::new(format!("deflate error: {e}")))?;
            Ok(out)
        }
        other => Err(MalformedArchive::new(format!(
            "unsupported compression method {other}"
        ))),
    }
}

// Fixed DOS timestamp (2024-01-01 00:00:00) so generated archives are
// byte-identical across runs.
const FIXED_DOS_DATE: u16 = ((2024 - 1980) << 9) | (1 << 5) | 1;
const FIXED_DOS_TIME: u16 = 0;

/// Writes a stored-only (uncompressed) ZIP archive with fixed timestamps,
/// entries in the given order.
pub fn write_stored_archive(entries: &[(String, Vec<u8>)]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut central = Vec::new();

    for (name, data) in entries {
        let name_bytes = name.as_bytes();
        let crc = crc32fast::hash(data);
        let offset = out.len() as u32;
        let size = data.len() as u32;

        out.extend_from_slice(&LOCAL_SIG.to_le_bytes());
        out.extend_from_slice(&20u16.to_le_bytes()); // version needed
        out.extend_from_slice(&0u16.to_le_bytes()); // flags
        out.extend_from_slice(&METHOD_STORED.to_le_bytes());
        out.extend_from_slice(&FIXED_DOS_TIME.to_le_bytes());
        out.extend_from_slice(&FIXED_DOS_DATE.to_le_bytes());
        out.extend_from_slice(&crc.to_le_bytes());
        out.extend_from_slice(&size.to_le_bytes());
        out.extend_from_slice(&size.to_le_bytes());
        out.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes()); // extra len
        out.extend_from_slice(name_bytes);
        out.extend_from_slice(data);

        central.extend_from_slice(&CENTRAL_SIG.to_le_bytes());
        central.extend_from_slice(&20u16.to_le_bytes()); // version made by
        central.extend_from_slice(&20u16.to_le_bytes()); // version needed
        central.extend_from_slice(&0u16.to_le_bytes());
        central.extend_from_slice(&METHOD_STORED.to_le_bytes());
        central.extend_from_slice(&FIXED_DOS_TIME.to_le_bytes());
        central.extend_from_slice(&FIXED_DOS_DATE.to_le_bytes());
        central.extend_from_slice(&crc.to_le_bytes());
        central.extend_from_slice(&size.to_le_bytes());
        central.extend_from_slice(&size.to_le_bytes());
        central.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        central.extend_from_slice(&0u16.to_le_bytes()); // extra len
        central.extend_from_slice(&0u16.to_le_bytes()); // comment len
        central.extend_from_slice(&0u16.to_le_bytes()); // disk start
        central.extend_from_slice(&0u16.to_le_bytes()); // internal attrs
        central.extend_from_slice(&0u32.to_le_bytes()); // external attrs
        central.extend_from_slice(&offset.to_le_bytes());
        central.extend_from_slice(name_bytes);
    }

    let cd_offset = out.len() as u32;
    let cd_size = central.len() as u32;
    let count = entries.len() as u16;
    out.extend_from_slice(&central);
    out.extend_from_slice(&EOCD_SIG.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes()); // disk
    out.extend_from_slice(&0u16.to_le_bytes()); // cd disk
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&cd_size.to_le_bytes());
    out.extend_from_slice(&cd_offset.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes()); // comment len
    out
}
