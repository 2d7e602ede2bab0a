//! Deterministic JVM class-file synthesis for benchmark fixtures.
//!
//! Emits a structurally valid class file whose constant pool carries exactly
//! the references a test case needs: class entries, method/field refs with
//! their descriptors, and string literals (for the reflective case, where
//! the class name must appear only as a string). No methods or attributes
//! are emitted; the scanners under test read only the pool.

use std::collections::BTreeMap;

const MAGIC: u32 = 0xCAFE_BABE;
const MAJOR_JAVA8: u16 = 52;
const ACC_PUBLIC_SUPER: u16 = 0x0021;

enum Entry {
    Utf8(String),
    Class(u16),
    NameAndType(u16, u16),
    MethodRef(u16, u16),
    InterfaceMethodRef(u16, u16),
    FieldRef(u16, u16),
    Str(u16),
}

#[derive(Default)]
struct Pool {
    entries: Vec<Entry>,
    utf8_index: BTreeMap<String, u16>,
    class_index: BTreeMap<String, u16>,
}

impl Pool {
    fn push(&mut self, entry: Entry) -> u16 {
        self.entries.push(entry);
        self.entries.len() as u16 // 1-based
    }

    fn utf8(&mut self, text: &str) -> u16 {
        if let Some(&idx) = self.utf8_index.get(text) {
            return idx;
        }
        let idx = self.push(Entry::Utf8(text.to_string()));
        self.utf8_index.insert(text.to_string(), idx);
        idx
    }

    fn class(&mut self, name: &str) -> u16 {
        if let Some(&idx) = self.class_index.get(name) {
            return idx;
        }
        let name_idx = self.utf8(name);
        let idx = self.push(Entry::Class(name_idx));
        self.class_index.insert(name.to_string(), idx);
        idx
    }

    fn name_and_type(&mut self, name: &str, descriptor: &str) -> u16 {
        let n = self.utf8(name);
        let d = self.utf8(descriptor);
        self.push(Entry::NameAndType(n, d))
    }
}

pub struct ClassBuilder {
    this: String,
    superclass: String,
    interfaces: Vec<String>,
    class_refs: Vec<String>,
    method_refs: Vec<(String, String, String)>,
    interface_method_refs: Vec<(String, String, String)>,
    field_refs: Vec<(String, String, String)>,
    string_literals: Vec<String>,
}

impl ClassBuilder {
    pub fn new(internal_name: &str) -> ClassBuilder {
        ClassBuilder {
            this: internal_name.to_string(),
            superclass: "java/lang/Object".to_string(),
            interfaces: Vec::new(),
            class_refs: Vec::new(),
            method_refs: Vec::new(),
            interface_method_refs: Vec::new(),
            field_refs: Vec::new(),
            string_literals: Vec::new(),
        }
    }

    pub fn extends(mut self, superclass: &str) -> Self {
        self.superclass = superclass.to_string();
        self
    }

    pub fn implements(mut self, interface: &str) -> Self {
        self.interfaces.push(interface.to_string());
        self
    }

    /// Adds a bare CONSTANT_Class entry (a cast, `new`, class literal or
    /// array type).
    pub fn class_ref(mut self, name: &str) -> Self {
        self.class_refs.push(name.to_string());
        self
    }

    pub fn method_ref(mut self, owner: &str, name: &str, descriptor: &str) -> Self {
        self.method_refs
            .push((owner.to_string(), name.to_string(), descriptor.to_string()));
        self
    }

    pub fn interface_method_ref(mut self, owner: &str, name: &str, descriptor: &str) -> Self {
        self.interface_method_refs.push((
            owner.to_string(),
            name.to_string(),
            descriptor.to_string(),
        ));
        self
    }

    pub fn field_ref(mut self, owner: &str, name: &str, descriptor: &str) -> Self {
        self.field_refs
            .push((owner.to_string(), name.to_string(), descriptor.to_string()));
        self
    }

    /// Adds a CONSTANT_String entry, the shape a `Class.forName("...")`
    /// argument takes in the pool.
    pub fn string_literal(mut self, text: &str) -> Self {
        self.string_literals.push(text.to_string());
        self
    }

    pub fn build(self) -> Vec<u8> {
        let mut pool = Pool::default();
        let this_idx = pool.class(&self.this);
        let super_idx = pool.class(&self.superclass);
        let iface_idxs: Vec<u16> = self.interfaces.iter().map(|i| pool.class(i)).collect();
        for name in &self.class_refs {
            pool.class(name);
        }
        for (owner, name, desc) in &self.method_refs {
            let c = pool.class(owner);
            let nt = pool.name_and_type(name, desc);
            pool.push(Entry::MethodRef(c, nt));
        }
        for (owner, name, desc) in &self.interface_method_refs {
            let c = pool.class(owner);
            let nt = pool.name_and_type(name, desc);
            pool.push(Entry::InterfaceMethodRef(c, nt));
        }
        for (owner, name, desc) in &self.field_refs {
            let c = pool.class(owner);
            let nt = pool.name_and_type(name, desc);
            pool.push(Entry::FieldRef(c, nt));
        }
        for text in &self.string_literals {
            let idx = pool.utf8(text);
            pool.push(Entry::Str(idx));
        }

        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC.to_be_bytes());
        out.extend_from_slice(&0u16.to_be_bytes()); // minor
        out.extend_from_slice(&MAJOR_JAVA8.to_be_bytes());
        out.extend_from_slice(&((pool.entries.len() as u16) + 1).to_be_bytes());
        for entry in &pool.entries {
            match entry {
                Entry::Utf8(text) => {
                    out.push(1);
                    out.extend_from_slice(&(text.len() as u16).to_be_bytes());
                    out.extend_from_slice(text.as_bytes());
                }
                Entry::Class(name_idx) => {
                    out.push(7);
                    out.extend_from_slice(&name_idx.to_be_bytes());
                }
                Entry::Str(utf8_idx) => {
                    out.push(8);
                    out.extend_from_slice(&utf8_idx.to_be_bytes());
                }
                Entry::FieldRef(c, nt) => {
                    out.push(9);
                    out.extend_from_slice(&c.to_be_bytes());
                    out.extend_from_slice(&nt.to_be_bytes());
                }
                Entry::MethodRef(c, nt) => {
                    out.push(10);
                    out.extend_from_slice(&c.to_be_bytes());
                    out.extend_from_slice(&nt.to_be_bytes());
                }
                Entry::InterfaceMethodRef(c, nt) => {
                    out.push(11);
                    out.extend_from_slice(&c.to_be_bytes());
                    out.extend_from_slice(&nt.to_be_bytes());
                }
                Entry::NameAndType(n, d) => {
                    out.push(12);
                    out.extend_from_slice(&n.to_be_bytes());
                    out.extend_from_slice(&d.to_be_bytes());
                }
            }
        }
        out.extend_from_slice(&ACC_PUBLIC_SUPER.to_be_bytes());
        out.extend_from_slice(&this_idx.to_be_bytes());
        out.extend_from_slice(&super_idx.to_be_bytes());
        out.extend_from_slice(&(iface_idxs.len() as u16).to_be_bytes());
        for idx in iface_idxs {
            out.extend_from_slice(&idx.to_be_bytes());
        }
        out.extend_from_slice(&0u16.to_be_bytes()); // fields
        out.extend_from_slice(&0u16.to_be_bytes()); // methods
        out.extend_from_slice(&0u16.to_be_bytes()); // attributes
        out
    }
}
