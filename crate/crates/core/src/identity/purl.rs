//! Package URL parsing and canonical printing.
//!
//! Supports the `pkg:type/namespace/name@version?qualifiers` form. Values are
//! percent-decoded in the model and re-encoded on output, so a parsed PURL
//! always serializes to a canonical string that parses back to an equal
//! value. Subpaths (`#...`) are accepted on input and dropped; they play no
//! role in identity matching.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

/// Everything except RFC 3986 unreserved characters gets escaped on output.
const ENCODE_SET: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'.')
    .remove(b'-')
    .remove(b'_')
    .remove(b'~');

/// Unusable package identity. Callers are expected to record the component
/// as unmatchable rather than abort a scan.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed purl {input:?}: {reason}")]
pub struct MalformedPurl {
    pub input: String,
    pub reason: String,
}

impl MalformedPurl {
    fn new(input: &str, reason: impl Into<String>) -> Self {
        MalformedPurl {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

/// A parsed Package URL.
///
/// The package type is lowercased on parse (it is case-insensitive by
/// definition); namespace, name and version preserve their input case, with
/// case-insensitive *matching* applied for Maven coordinates via
/// [`Purl::package_key`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Purl {
    ptype: String,
    namespace: Option<String>,
    name: String,
    version: Option<String>,
    qualifiers: BTreeMap<String, String>,
}

/// Canonicalized (type, namespace, name) triple used as a matching and
/// indexing key. Maven namespaces and names compare case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackageKey {
    pub ptype: String,
    pub namespace: Option<String>,
    pub name: String,
}

impl Purl {
    pub fn new(
        ptype: impl Into<String>,
        namespace: Option<String>,
        name: impl Into<String>,
        version: Option<String>,
    ) -> Result<Self, MalformedPurl> {
        let ptype = ptype.into().to_ascii_lowercase();
        let name = name.into();
        if ptype.is_empty() {
            return Err(MalformedPurl::new(&name, "empty package type"));
        }
        if name.is_empty() {
            return Err(MalformedPurl::new(&ptype, "empty package name"));
        }
        Ok(Purl {
            ptype,
            namespace,
            name,
            version,
            qualifiers: BTreeMap::new(),
        })
    }

    /// Parses a PURL string. The input must start with the `pkg:` scheme.
    pub fn parse(text: &str) -> Result<Self, MalformedPurl> {
        let rest = text
            .strip_prefix("pkg:")
            .ok_or_else(|| MalformedPurl::new(text, "missing pkg: scheme"))?;
        // Leading slashes after the scheme are tolerated per the spec.
        let rest = rest.trim_start_matches('/');

        // Subpath is accepted but not modeled.
        let rest = match rest.rsplit_once('#') {
            Some((head, _subpath)) => head,
            None => rest,
        };

        let (rest, qualifiers) = match rest.rsplit_once('?') {
            Some((head, qs)) => (head, parse_qualifiers(text, qs)?),
            None => (rest, BTreeMap::new()),
        };

        let (ptype, rest) = rest
            .split_once('/')
            .ok_or_else(|| MalformedPurl::new(text, "missing name component"))?;
        if ptype.is_empty() {
            return Err(MalformedPurl::new(text, "empty package type"));
        }
        if !ptype
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '+' | '-'))
        {
            return Err(MalformedPurl::new(
                text,
                format!("invalid package type {ptype:?}"),
            ));
        }
        let ptype = ptype.to_ascii_lowercase();

        let (rest, version) = match rest.rsplit_once('@') {
            Some((head, v)) => (head, Some(decode(text, v)?)),
            None => (rest, None),
        };

        let (namespace, name) = match rest.rsplit_once('/') {
            Some((ns, name)) => {
                let segments: Result<Vec<_>, _> = ns
                    .split('/')
                    .filter(|s| !s.is_empty())
                    .map(|s| decode(text, s))
                    .collect();
                let ns = segments?.join("/");
                (
                    if ns.is_empty() { None } else { Some(ns) },
                    decode(text, name)?,
                )
            }
            None => (None, decode(text, rest)?),
        };
        if name.is_empty() {
            return Err(MalformedPurl::new(text, "empty package name"));
        }
        if version.as_deref() == Some("") {
            return Err(MalformedPurl::new(text, "empty version after '@'"));
        }

        Ok(Purl {
            ptype,
            namespace,
            name,
            version,
            qualifiers,
        })
    }

    pub fn ptype(&self) -> &str {
        &self.ptype
    }

    pub fn namespace(&self) -> Option<&str> {
        self.namespace.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> Option<&str> {
        self.version.as_deref()
    }

    pub fn qualifiers(&self) -> &BTreeMap<String, String> {
        &self.qualifiers
    }

    pub fn with_qualifier(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.qualifiers
            .insert(key.into().to_ascii_lowercase(), value.into());
        self
    }

    /// Returns a copy without the version, the shape advisory records use to
    /// name an affected package.
    pub fn without_version(&self) -> Purl {
        Purl {
            version: None,
            ..self.clone()
        }
    }

    /// Canonical (type, namespace, name) matching key. Type is already
    /// lowercase; Maven namespace/name fold case because registry lookups for
    /// that ecosystem are case-insensitive. Qualifiers never participate.
    pub fn package_key(&self) -> PackageKey {
        let fold = self.ptype == "maven";
        let canon = |s: &str| {
            if fold {
                s.to_ascii_lowercase()
            } else {
                s.to_string()
            }
        };
        PackageKey {
            ptype: self.ptype.clone(),
            namespace: self.namespace.as_deref().map(canon),
            name: canon(&self.name),
        }
    }

    /// True when both purls name the same package.
    pub fn same_package(&self, other: &Purl) -> bool {
        self.package_key() == other.package_key()
    }

    /// Identity matching as used by VEX product/subcomponent scoping: same
    /// package, and when `self` carries a version it must equal the other's
    /// version exactly. A versionless pattern matches every version.
    pub fn matches_identity(&self, concrete: &Purl) -> bool {
        if !self.same_package(concrete) {
            return false;
        }
        match self.version() {
            None => true,
            Some(v) => concrete.version() == Some(v),
        }
    }
}

fn parse_qualifiers(input: &str, text: &str) -> Result<BTreeMap<String, String>, MalformedPurl> {
    let mut out = BTreeMap::new();
    for pair in text.split('&') {
        if pair.is_empty() {
            continue;
        }
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| MalformedPurl::new(input, format!("qualifier {pair:?} has no '='")))?;
        let key = k.to_ascii_lowercase();
        if key.is_empty() {
            return Err(MalformedPurl::new(input, "empty qualifier key"));
        }
        let value = decode(input, v)?;
        if value.is_empty() {
            continue;
        }
        if out.insert(key, value).is_some() {
            return Err(MalformedPurl::new(
                input,
                format!("duplicate qualifier key {k:?}"),
            ));
        }
    }
    Ok(out)
}

fn decode(input: &str, part: &str) -> Result<String, MalformedPurl> {
    percent_decode_str(part)
        .decode_utf8()
        .map(|s| s.into_owned())
        .map_err(|_| MalformedPurl::new(input, format!("invalid percent-encoding in {part:?}")))
}

fn encode(part: &str) -> String {
    utf8_percent_encode(part, ENCODE_SET).to_string()
}

impl fmt::Display for Purl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pkg:{}/", self.ptype)?;
        if let Some(ns) = &self.namespace {
            let encoded: Vec<String> = ns.split('/').map(encode).collect();
            write!(f, "{}/", encoded.join("/"))?;
        }
        write!(f, "{}", encode(&self.name))?;
        if let Some(v) = &self.version {
            write!(f, "@{}", encode(v))?;
        }
        if !self.qualifiers.is_empty() {
            let pairs: Vec<String> = self
                .qualifiers
                .iter()
                .map(|(k, v)| format!("{}={}", k, encode(v)))
                .collect();
            write!(f, "?{}", pairs.join("&"))?;
        }
        Ok(())
    }
}

impl FromStr for Purl {
    type Err = MalformedPurl;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Purl::parse(s)
    }
}
