//! JVM class-file constant-pool scanning.
//!
//! Every named type a class mentions — method call owners, field owners,
//! `new` expressions, casts, class literals, supertypes — surfaces as a
//! `CONSTANT_Class` entry or inside a field/method descriptor string, so
//! collecting those covers statically explicit references without decoding a
//! single instruction. Reflective references (class names inside string
//! literals) deliberately stay invisible to this scan.

use std::collections::BTreeSet;

use super::MalformedClassFile;

const MAGIC: u32 = 0xCAFE_BABE;

// Constant pool tags (JVMS table 4.4-B).
const TAG_UTF8: u8 = 1;
const TAG_INTEGER: u8 = 3;
const TAG_FLOAT: u8 = 4;
const TAG_LONG: u8 = 5;
const TAG_DOUBLE: u8 = 6;
const TAG_CLASS: u8 = 7;
const TAG_STRING: u8 = 8;
const TAG_FIELDREF: u8 = 9;
const TAG_METHODREF: u8 = 10;
const TAG_INTERFACE_METHODREF: u8 = 11;
const TAG_NAME_AND_TYPE: u8 = 12;
const TAG_METHOD_HANDLE: u8 = 15;
const TAG_METHOD_TYPE: u8 = 16;
const TAG_DYNAMIC: u8 = 17;
const TAG_INVOKE_DYNAMIC: u8 = 18;
const TAG_MODULE: u8 = 19;
const TAG_PACKAGE: u8 = 20;

/// The named types one class file references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassReferenceSet {
    /// Internal (slash-separated) name of the scanned class.
    pub class_name: String,
    /// Internal names of referenced classes: array element types unwrapped,
    /// primitives dropped, self excluded.
    pub referenced: BTreeSet<String>,
}

enum PoolEntry {
    Utf8(String),
    Class { name_index: u16 },
    NameAndType { descriptor_index: u16 },
    Other,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], MalformedClassFile> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                MalformedClassFile::new(format!("truncated class file at offset {}", self.pos))
            })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, MalformedClassFile> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, MalformedClassFile> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, MalformedClassFile> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Scans a class file and returns the set of class names it references.
pub fn scan_class(bytes: &[u8]) -> Result<ClassReferenceSet, MalformedClassFile> {
    let mut r = Reader { bytes, pos: 0 };
    if r.u32()? != MAGIC {
        return Err(MalformedClassFile::new("missing 0xCAFEBABE magic"));
    }
    let _minor = r.u16()?;
    let _major = r.u16()?;

    let pool_count = r.u16()?;
    if pool_count == 0 {
        return Err(MalformedClassFile::new("constant pool count of zero"));
    }
    // Entries are indexed from 1; slot 0 stays unused, and longs/doubles
    // consume two slots.
    let mut pool: Vec<PoolEntry> = Vec::with_capacity(pool_count as usize);
    pool.push(PoolEntry::Other);
    let mut index = 1u16;
    while index < pool_count {
        let tag = r.u8()?;
        let (entry, extra_slot) = match tag {
            TAG_UTF8 => {
                let len = r.u16()? as usize;
                let raw = r.take(len)?;
                // Modified UTF-8 differs from standard only for NUL and
                // supplementary characters, which never occur in the names
                // this scan consumes.
                (
                    PoolEntry::Utf8(String::from_utf8_lossy(raw).into_owned()),
                    false,
                )
            }
            TAG_CLASS => (
                PoolEntry::Class {
                    name_index: r.u16()?,
                },
                false,
            ),
            TAG_NAME_AND_TYPE => {
                let _name_index = r.u16()?;
                (
                    PoolEntry::NameAndType {
                        descriptor_index: r.u16()?,
                    },
                    false,
                )
            }
            TAG_INTEGER | TAG_FLOAT => {
                r.take(4)?;
                (PoolEntry::Other, false)
            }
            TAG_LONG | TAG_DOUBLE => {
                r.take(8)?;
                (PoolEntry::Other, true)
            }
            TAG_STRING | TAG_METHOD_TYPE | TAG_MODULE | TAG_PACKAGE => {
                r.take(2)?;
                (PoolEntry::Other, false)
            }
            TAG_FIELDREF
            | TAG_METHODREF
            | TAG_INTERFACE_METHODREF
            | TAG_DYNAMIC
            | TAG_INVOKE_DYNAMIC => {
                r.take(4)?;
                (PoolEntry::Other, false)
            }
            TAG_METHOD_HANDLE => {
                r.take(3)?;
                (PoolEntry::Other, false)
            }
            other => {
                return Err(MalformedClassFile::new(format!(
                    "bad constant pool tag {other} at entry {index}"
                )))
            }
        };
        pool.push(entry);
        index += 1;
        if extra_slot {
            pool.push(PoolEntry::Other);
            index += 1;
        }
    }

    let _access_flags = r.u16()?;
    let this_class = r.u16()?;

    let utf8_at = |idx: u16| -> Result<&str, MalformedClassFile> {
        match pool.get(idx as usize) {
            Some(PoolEntry::Utf8(s)) => Ok(s.as_str()),
            _ => Err(MalformedClassFile::new(format!(
                "index {idx} is not a Utf8 entry"
            ))),
        }
    };
    let class_name_at = |idx: u16| -> Result<&str, MalformedClassFile> {
        match pool.get(idx as usize) {
            Some(PoolEntry::Class { name_index }) => utf8_at(*name_index),
            _ => Err(MalformedClassFile::new(format!(
                "index {idx} is not a Class entry"
            ))),
        }
    };

    let class_name = unwrap_class_name(class_name_at(this_class)?)
        .ok_or_else(|| MalformedClassFile::new("this_class names no concrete class"))?;

    let mut referenced = BTreeSet::new();
    for entry in &pool {
        match entry {
            PoolEntry::Class { name_index } => {
                if let Some(name) = unwrap_class_name(utf8_at(*name_index)?) {
                    referenced.insert(name);
                }
            }
            PoolEntry::NameAndType { descriptor_index } => {
                collect_descriptor_types(utf8_at(*descriptor_index)?, &mut referenced);
            }
            _ => {}
        }
    }
    referenced.remove(&class_name);

    Ok(ClassReferenceSet {
        class_name,
        referenced,
    })
}

/// Normalizes a CONSTANT_Class name: array descriptors are unwrapped to their
/// element type, primitive element types yield nothing.
fn unwrap_class_name(raw: &str) -> Option<String> {
    let stripped = raw.trim_start_matches('[');
    if stripped.len() < raw.len() {
        // Array form: element is a descriptor.
        if let Some(inner) = stripped.strip_prefix('L').and_then(|s| s.strip_suffix(';')) {
            return Some(inner.to_string());
        }
        return None; // primitive array
    }
    Some(raw.to_string())
}

/// Extracts every `L<name>;` object type from a field or method descriptor.
fn collect_descriptor_types(descriptor: &str, out: &mut BTreeSet<String>) {
    let bytes = descriptor.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'L' {
            if let Some(end) = descriptor[i + 1..].find(';') {
                out.insert(descriptor[i + 1..i + 1 + end].to_string());
                i += end + 2;
                continue;
            }
        }
        i += 1;
    }
}
