//! SBOM-based software composition analysis with two accuracy upgrades that
//! mainstream scanners lack:
//!
//! * **Path-sensitive VEX suppression** — an OpenVEX `not_affected` statement
//!   suppresses a finding only along dependency paths that pass through the
//!   statement's declared product, so a hidden code-level dependency that
//!   bypasses the product keeps the finding visible.
//! * **Variant-lineage matching** — components recorded as clones or variants
//!   of an upstream artifact (CycloneDX `pedigree.variants`, SPDX
//!   `HAS_VARIANT`) are matched against advisories under their upstream
//!   identity as well as their own.
//!
//! The crate also ships the bytecode enrichment proof of concept (JAR
//! indexing plus constant-pool class scanning that writes hidden
//! statically-explicit edges back into CycloneDX SBOMs) and a benchmark
//! module that generates the fixture corpus the scanner is validated
//! against.

pub mod bench;
pub mod enrich;
pub mod identity;
pub mod sbom;
pub mod vex;
pub mod vulndb;

pub use identity::{ComponentIdentity, LineageSource, Purl, VersionRange};
pub use sbom::{Component, DependencyEdge, EdgeKind, SbomDocument, SbomFormat};
pub use vex::{SuppressionVerdict, VerdictOutcome, VexDocument, VexStatement};
pub use vulndb::{Finding, VulnDatabase, VulnRecord};
