//! Package identity: PURL parsing/printing, version ordering, and
//! version-range containment. Everything downstream (matching, suppression,
//! enrichment) resolves identity questions through this module.

mod purl;
mod version;

pub use purl::{MalformedPurl, PackageKey, Purl};
pub use version::{
    compare_versions, range_contains, RangeEvent, RangeEventKind, VersionKey, VersionRange,
};

use std::fmt;

/// Where a lineage entry was recorded in the source document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LineageSource {
    CycloneDxPedigree,
    SpdxHasVariant,
}

impl fmt::Display for LineageSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineageSource::CycloneDxPedigree => write!(f, "cyclonedx-pedigree"),
            LineageSource::SpdxHasVariant => write!(f, "spdx-has-variant"),
        }
    }
}

/// A component's package identity plus the upstream identities recorded as
/// variant lineage. Matching runs over the whole set; a hit on a lineage
/// entry is flagged so reports can say which identity fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentIdentity {
    primary: Purl,
    lineage: Vec<(Purl, LineageSource)>,
}

impl ComponentIdentity {
    pub fn new(primary: Purl) -> Self {
        ComponentIdentity {
            primary,
            lineage: Vec::new(),
        }
    }

    /// Adds an upstream identity. The primary is never admitted into the
    /// lineage set, and duplicate purls keep their first source tag.
    pub fn add_lineage(&mut self, upstream: Purl, source: LineageSource) {
        if upstream == self.primary {
            return;
        }
        if self.lineage.iter().any(|(p, _)| *p == upstream) {
            return;
        }
        self.lineage.push((upstream, source));
    }

    pub fn primary(&self) -> &Purl {
        &self.primary
    }

    pub fn lineage(&self) -> &[(Purl, LineageSource)] {
        &self.lineage
    }

    pub fn has_lineage(&self) -> bool {
        !self.lineage.is_empty()
    }

    /// Iterates the primary identity first, then lineage entries in insertion
    /// order. The flag is true for lineage entries.
    pub fn all(&self) -> impl Iterator<Item = (&Purl, bool)> {
        std::iter::once((&self.primary, false)).chain(self.lineage.iter().map(|(p, _)| (p, true)))
    }

    /// True when any identity in the set names the same package (and version,
    /// when `other` carries one) as `other`.
    pub fn matches(&self, other: &Purl) -> bool {
        self.all().any(|(p, _)| other.matches_identity(p))
    }
}
