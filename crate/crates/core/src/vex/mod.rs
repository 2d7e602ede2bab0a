//! OpenVEX ingestion and path-sensitive suppression.
//!
//! A VEX statement asserts something about a *product*. Suppression must
//! therefore stay inside the product's dependency scope: a `not_affected`
//! statement for `lib1` covers findings on a vulnerable component only along
//! dependency paths that pass through `lib1`. A code-level edge that reaches
//! the component around `lib1` stays uncovered and keeps the finding
//! reported. Identity-only scanners get this wrong in both directions —
//! matching on the product PURL alone never suppresses (the scanned artifact
//! is the downstream application, not the product), while matching on the
//! subcomponent alone suppresses globally.

mod paths;

pub use paths::{enumerate_paths, PathExplosion};

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use crate::identity::Purl;
use crate::sbom::{Component, SbomDocument};
use crate::vulndb::Finding;

/// Default ceiling on enumerated simple paths per finding.
pub const DEFAULT_PATH_CAP: usize = 10_000;

/// Document rejected (no statements array, malformed statement).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed vex at {path}: {reason}")]
pub struct MalformedVex {
    pub path: String,
    pub reason: String,
}

impl MalformedVex {
    fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        MalformedVex {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VexStatus {
    NotAffected,
    Affected,
    Fixed,
    UnderInvestigation,
}

impl VexStatus {
    pub fn token(&self) -> &'static str {
        match self {
            VexStatus::NotAffected => "not_affected",
            VexStatus::Affected => "affected",
            VexStatus::Fixed => "fixed",
            VexStatus::UnderInvestigation => "under_investigation",
        }
    }

    pub fn from_token(token: &str) -> Option<VexStatus> {
        match token {
            "not_affected" => Some(VexStatus::NotAffected),
            "affected" => Some(VexStatus::Affected),
            "fixed" => Some(VexStatus::Fixed),
            "under_investigation" => Some(VexStatus::UnderInvestigation),
            _ => None,
        }
    }

    /// `not_affected` and `fixed` suppress; `affected` and
    /// `under_investigation` only annotate.
    pub fn is_suppressing(&self) -> bool {
        matches!(self, VexStatus::NotAffected | VexStatus::Fixed)
    }
}

/// A product or subcomponent identifier. Non-PURL identifiers are retained
/// opaquely and match nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProductRef {
    Purl(Purl),
    Opaque(String),
}

impl ProductRef {
    fn parse(text: &str) -> ProductRef {
        match Purl::parse(text) {
            Ok(purl) => ProductRef::Purl(purl),
            Err(_) => ProductRef::Opaque(text.to_string()),
        }
    }

    pub fn as_purl(&self) -> Option<&Purl> {
        match self {
            ProductRef::Purl(p) => Some(p),
            ProductRef::Opaque(_) => None,
        }
    }

    pub fn display(&self) -> String {
        match self {
            ProductRef::Purl(p) => p.to_string(),
            ProductRef::Opaque(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VexStatement {
    /// Primary vulnerability identifier (CVE or GHSA id).
    pub vulnerability: String,
    pub vuln_aliases: Vec<String>,
    pub products: Vec<ProductRef>,
    pub subcomponents: Vec<ProductRef>,
    pub status: VexStatus,
    /// Present only when status is `not_affected`.
    pub justification: Option<String>,
    pub impact_statement: Option<String>,
}

impl VexStatement {
    /// True when the statement's vulnerability identifier (or an alias on
    /// either side) names the finding's advisory.
    pub fn matches_vulnerability(&self, finding: &Finding) -> bool {
        let stmt_ids = std::iter::once(self.vulnerability.as_str())
            .chain(self.vuln_aliases.iter().map(String::as_str));
        for id in stmt_ids {
            if finding.identifiers().any(|f| f == id) {
                return true;
            }
        }
        false
    }
}

#[derive(Debug, Clone)]
pub struct VexDocument {
    pub statements: Vec<VexStatement>,
    pub source_path: String,
}

/// Parses an OpenVEX JSON document (v0.2.0 subset). Subcomponents are
/// accepted both nested under each product entry and at statement level.
pub fn parse_openvex(text: &str, source_path: &str) -> Result<VexDocument, MalformedVex> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| MalformedVex::new("$", format!("invalid JSON: {e}")))?;
    let statements_value = value
        .get("statements")
        .and_then(Value::as_array)
        .ok_or_else(|| MalformedVex::new("statements", "missing statements array"))?;

    let mut statements = Vec::new();
    for (i, stmt) in statements_value.iter().enumerate() {
        let path = format!("statements[{i}]");
        let (vulnerability, vuln_aliases) = match stmt.get("vulnerability") {
            Some(Value::String(name)) => (name.clone(), Vec::new()),
            Some(Value::Object(v)) => {
                let name = v
                    .get("name")
                    .or_else(|| v.get("@id"))
                    .and_then(Value::as_str)
                    .ok_or_else(|| {
                        MalformedVex::new(format!("{path}.vulnerability"), "missing name")
                    })?;
                let aliases = v
                    .get("aliases")
                    .and_then(Value::as_array)
                    .into_iter()
                    .flatten()
                    .filter_map(Value::as_str)
                    .map(str::to_string)
                    .collect();
                (name.to_string(), aliases)
            }
            _ => {
                return Err(MalformedVex::new(
                    format!("{path}.vulnerability"),
                    "missing",
                ));
            }
        };

        let status_token = stmt
            .get("status")
            .and_then(Value::as_str)
            .ok_or_else(|| MalformedVex::new(format!("{path}.status"), "missing"))?;
        let status = VexStatus::from_token(status_token).ok_or_else(|| {
            MalformedVex::new(
                format!("{path}.status"),
                format!("unknown status {status_token:?}"),
            )
        })?;

        let mut products = Vec::new();
        let mut subcomponents = Vec::new();
        let product_entries = stmt
            .get("products")
            .and_then(Value::as_array)
            .ok_or_else(|| MalformedVex::new(format!("{path}.products"), "missing"))?;
        for entry in product_entries {
            let Some(id) = identifier_of(entry) else {
                return Err(MalformedVex::new(
                    format!("{path}.products"),
                    "product entry has no @id or identifiers.purl",
                ));
            };
            products.push(ProductRef::parse(&id));
            for sub in entry
                .get("subcomponents")
                .and_then(Value::as_array)
                .into_iter()
                .flatten()
            {
                if let Some(id) = identifier_of(sub) {
                    subcomponents.push(ProductRef::parse(&id));
                }
            }
        }
        if products.is_empty() {
            return Err(MalformedVex::new(
                format!("{path}.products"),
                "must be non-empty",
            ));
        }
        for sub in stmt
            .get("subcomponents")
            .and_then(Value::as_array)
            .into_iter()
            .flatten()
        {
            if let Some(id) = identifier_of(sub) {
                subcomponents.push(ProductRef::parse(&id));
            }
        }

        let justification = if status == VexStatus::NotAffected {
            stmt.get("justification")
                .and_then(Value::as_str)
                .map(str::to_string)
        } else {
            None
        };
        let impact_statement = stmt
            .get("impact_statement")
            .and_then(Value::as_str)
            .map(str::to_string);

        statements.push(VexStatement {
            vulnerability,
            vuln_aliases,
            products,
            subcomponents,
            status,
            justification,
            impact_statement,
        });
    }

    Ok(VexDocument {
        statements,
        source_path: source_path.to_string(),
    })
}

fn identifier_of(entry: &Value) -> Option<String> {
    match entry {
        Value::String(s) => Some(s.clone()),
        Value::Object(o) => o
            .get("@id")
            .and_then(Value::as_str)
            .or_else(|| {
                o.get("identifiers")
                    .and_then(|i| i.get("purl"))
                    .and_then(Value::as_str)
            })
            .map(str::to_string),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictOutcome {
    Reported,
    Suppressed,
    ReportedAnnotated,
}

impl VerdictOutcome {
    pub fn token(&self) -> &'static str {
        match self {
            VerdictOutcome::Reported => "reported",
            VerdictOutcome::Suppressed => "suppressed",
            VerdictOutcome::ReportedAnnotated => "reported-annotated",
        }
    }
}

/// A statement that took effect on a finding, with enough display context for
/// the rationale output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedStatement {
    /// Index of the statement within its source document.
    pub statement_index: usize,
    pub source_path: String,
    pub status: VexStatus,
    /// Display form of the product identifier that matched.
    pub product: String,
    /// True when the product matches the document root with an empty
    /// subcomponent list — the statement then scopes the whole tree, which is
    /// worth flagging because the OpenVEX spec leaves the case ambiguous.
    pub whole_tree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuppressionVerdict {
    pub outcome: VerdictOutcome,
    pub covered_paths: Vec<usize>,
    pub uncovered_paths: Vec<usize>,
    pub applied_statements: Vec<AppliedStatement>,
    /// Per-path index into `applied_statements` for the covering statement.
    pub path_coverage: Vec<Option<usize>>,
    /// True when path enumeration hit the cap and reachable-set semantics
    /// were used instead.
    pub fallback: bool,
}

struct StatementCtx<'a> {
    statement_index: usize,
    source_path: &'a str,
    statement: &'a VexStatement,
}

/// Fills in paths and suppression verdicts for each finding using the default
/// path cap.
pub fn apply_vex(
    findings: Vec<Finding>,
    doc: &SbomDocument,
    vex_docs: &[VexDocument],
) -> Vec<Finding> {
    apply_vex_with_cap(findings, doc, vex_docs, DEFAULT_PATH_CAP)
}

/// As [`apply_vex`], with an explicit simple-path cap. Past the cap the
/// verdict falls back to reachable-set semantics: suppress iff every
/// edge-reachable route to the component must pass through a product node of
/// an eligible statement.
pub fn apply_vex_with_cap(
    findings: Vec<Finding>,
    doc: &SbomDocument,
    vex_docs: &[VexDocument],
    cap: usize,
) -> Vec<Finding> {
    let statements: Vec<StatementCtx> = vex_docs
        .iter()
        .flat_map(|d| {
            d.statements.iter().enumerate().map(|(i, s)| StatementCtx {
                statement_index: i,
                source_path: &d.source_path,
                statement: s,
            })
        })
        .collect();

    findings
        .into_iter()
        .map(|mut finding| {
            match enumerate_paths(doc, &finding.component_ref, cap) {
                Ok(paths) => {
                    finding.paths = paths;
                    finding.verdict = Some(evaluate_paths(&finding, doc, &statements));
                }
                Err(explosion) => {
                    log::warn!("{explosion}");
                    finding.paths = Vec::new();
                    finding.verdict = Some(evaluate_fallback(&finding, doc, &statements));
                }
            }
            finding
        })
        .collect()
}

/// Resolves which suppressing-ness wins per product purl: for statements on
/// the same (product, vulnerability) with conflicting effect, the latest in
/// document order wins and earlier ones are inert for that product.
fn winning_effect<'a>(applicable: &[&StatementCtx<'a>]) -> BTreeMap<String, bool> {
    let mut winner: BTreeMap<String, bool> = BTreeMap::new();
    for ctx in applicable {
        for product in &ctx.statement.products {
            if let Some(purl) = product.as_purl() {
                let key = purl.to_string();
                let effect = ctx.statement.status.is_suppressing();
                if let Some(previous) = winner.insert(key.clone(), effect) {
                    if previous != effect {
                        log::warn!(
                            "conflicting vex statements for product {key}: latest wins ({})",
                            ctx.statement.status.token()
                        );
                    }
                }
            }
        }
    }
    winner
}

fn active_products<'a>(ctx: &'a StatementCtx, winner: &BTreeMap<String, bool>) -> Vec<&'a Purl> {
    let effect = ctx.statement.status.is_suppressing();
    ctx.statement
        .products
        .iter()
        .filter_map(ProductRef::as_purl)
        .filter(|p| winner.get(&p.to_string()).copied() == Some(effect))
        .collect()
}

fn identity_matches(component: Option<&Component>, pattern: &Purl) -> bool {
    component
        .and_then(|c| c.identity.as_ref())
        .map(|identity| identity.matches(pattern))
        .unwrap_or(false)
}

fn subcomponents_admit(statement: &VexStatement, doc: &SbomDocument, terminal: &str) -> bool {
    statement.subcomponents.is_empty()
        || statement
            .subcomponents
            .iter()
            .filter_map(ProductRef::as_purl)
            .any(|sub| identity_matches(doc.component(terminal), sub))
}

/// True when `product` scopes `path` for this statement: either the product
/// is the terminal component itself, or it matches a non-terminal node and
/// the subcomponent list admits the terminal.
fn product_covers_path(
    statement: &VexStatement,
    product: &Purl,
    path: &[String],
    doc: &SbomDocument,
) -> bool {
    let terminal = path.last().expect("paths are non-empty");
    if identity_matches(doc.component(terminal), product) {
        return true;
    }
    let on_interior = path[..path.len() - 1]
        .iter()
        .any(|node| identity_matches(doc.component(node), product));
    on_interior && subcomponents_admit(statement, doc, terminal)
}

fn evaluate_paths(
    finding: &Finding,
    doc: &SbomDocument,
    statements: &[StatementCtx],
) -> SuppressionVerdict {
    let applicable: Vec<&StatementCtx> = statements
        .iter()
        .filter(|ctx| ctx.statement.matches_vulnerability(finding))
        .collect();
    let winner = winning_effect(&applicable);

    let mut applied: Vec<AppliedStatement> = Vec::new();
    let mut applied_index: BTreeMap<(String, usize), usize> = BTreeMap::new();
    let mut record_applied = |ctx: &StatementCtx, product: &Purl, doc: &SbomDocument| -> usize {
        let key = (ctx.source_path.to_string(), ctx.statement_index);
        if let Some(&idx) = applied_index.get(&key) {
            return idx;
        }
        let whole_tree =
            ctx.statement.subcomponents.is_empty() && identity_matches(Some(doc.root()), product);
        let entry = AppliedStatement {
            statement_index: ctx.statement_index,
            source_path: ctx.source_path.to_string(),
            status: ctx.statement.status,
            product: product.to_string(),
            whole_tree,
        };
        applied.push(entry);
        applied_index.insert(key, applied.len() - 1);
        applied.len() - 1
    };

    let mut path_coverage: Vec<Option<usize>> = Vec::with_capacity(finding.paths.len());
    for path in &finding.paths {
        let mut coverage = None;
        'statements: for ctx in applicable
            .iter()
            .filter(|c| c.statement.status.is_suppressing())
        {
            for product in active_products(ctx, &winner) {
                if product_covers_path(ctx.statement, product, path, doc) {
                    coverage = Some(record_applied(ctx, product, doc));
                    break 'statements;
                }
            }
        }
        path_coverage.push(coverage);
    }

    // Non-suppressing statements annotate when they touch the finding's
    // component or any node on a path to it.
    for ctx in applicable
        .iter()
        .filter(|c| !c.statement.status.is_suppressing())
    {
        for product in active_products(ctx, &winner) {
            let touches_component =
                identity_matches(doc.component(&finding.component_ref), product);
            let touches_path = finding.paths.iter().any(|path| {
                path.iter()
                    .any(|node| identity_matches(doc.component(node), product))
            });
            if touches_component || touches_path {
                record_applied(ctx, product, doc);
                break;
            }
        }
    }

    let covered_paths: Vec<usize> = path_coverage
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_some())
        .map(|(i, _)| i)
        .collect();
    let uncovered_paths: Vec<usize> = path_coverage
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(i, _)| i)
        .collect();
    let suppressing_applied = applied.iter().any(|a| a.status.is_suppressing());
    let annotated = applied.iter().any(|a| !a.status.is_suppressing());

    let outcome = if !finding.paths.is_empty() && uncovered_paths.is_empty() && suppressing_applied
    {
        VerdictOutcome::Suppressed
    } else if annotated {
        VerdictOutcome::ReportedAnnotated
    } else {
        VerdictOutcome::Reported
    };

    SuppressionVerdict {
        outcome,
        covered_paths,
        uncovered_paths,
        applied_statements: applied,
        path_coverage,
        fallback: false,
    }
}

/// Reachable-set semantics for graphs past the path cap: a finding is
/// suppressed iff the component is unreachable from the root once every
/// product node of the eligible statements is removed (or an eligible product
/// names the component itself). Suppressing statements are recorded as
/// applied only when suppression succeeds, keeping the verdict invariant
/// (suppressed iff no uncovered paths and a suppressing statement applied)
/// intact in fallback mode.
fn evaluate_fallback(
    finding: &Finding,
    doc: &SbomDocument,
    statements: &[StatementCtx],
) -> SuppressionVerdict {
    let applicable: Vec<&StatementCtx> = statements
        .iter()
        .filter(|ctx| ctx.statement.matches_vulnerability(finding))
        .collect();
    let winner = winning_effect(&applicable);

    let mut applied: Vec<AppliedStatement> = Vec::new();
    let mut suppressed = false;

    let eligible: Vec<&&StatementCtx> = applicable
        .iter()
        .filter(|ctx| {
            ctx.statement.status.is_suppressing()
                && subcomponents_admit(ctx.statement, doc, &finding.component_ref)
        })
        .collect();

    // Product names the component directly: every route ends there.
    'direct: for ctx in &eligible {
        for product in active_products(ctx, &winner) {
            if identity_matches(doc.component(&finding.component_ref), product) {
                suppressed = true;
                push_applied(&mut applied, ctx, product, doc);
                break 'direct;
            }
        }
    }

    if !suppressed {
        let mut blocked: BTreeSet<&str> = BTreeSet::new();
        let mut blockers: Vec<(&StatementCtx, &Purl)> = Vec::new();
        for ctx in &eligible {
            for product in active_products(ctx, &winner) {
                let mut matched_any = false;
                for component in &doc.components {
                    if component.ref_id == finding.component_ref {
                        continue;
                    }
                    if identity_matches(Some(component), product) {
                        blocked.insert(component.ref_id.as_str());
                        matched_any = true;
                    }
                }
                if matched_any {
                    blockers.push((ctx, product));
                }
            }
        }
        if !blocked.is_empty() {
            let reachable = paths::reachable_avoiding(doc, &blocked);
            if !reachable.contains(finding.component_ref.as_str()) {
                suppressed = true;
                for (ctx, product) in blockers {
                    push_applied(&mut applied, ctx, product, doc);
                }
            }
        }
    }

    for ctx in applicable
        .iter()
        .filter(|c| !c.statement.status.is_suppressing())
    {
        for product in active_products(ctx, &winner) {
            let touches = doc
                .components
                .iter()
                .any(|c| identity_matches(Some(c), product));
            if touches {
                push_applied(&mut applied, ctx, product, doc);
                break;
            }
        }
    }

    let annotated = applied.iter().any(|a| !a.status.is_suppressing());
    let outcome = if suppressed {
        VerdictOutcome::Suppressed
    } else if annotated {
        VerdictOutcome::ReportedAnnotated
    } else {
        VerdictOutcome::Reported
    };

    SuppressionVerdict {
        outcome,
        covered_paths: Vec::new(),
        uncovered_paths: Vec::new(),
        applied_statements: applied,
        path_coverage: Vec::new(),
        fallback: true,
    }
}

fn push_applied(
    applied: &mut Vec<AppliedStatement>,
    ctx: &StatementCtx,
    product: &Purl,
    doc: &SbomDocument,
) {
    if applied
        .iter()
        .any(|a| a.statement_index == ctx.statement_index && a.source_path == ctx.source_path)
    {
        return;
    }
    applied.push(AppliedStatement {
        statement_index: ctx.statement_index,
        source_path: ctx.source_path.to_string(),
        status: ctx.statement.status,
        product: product.to_string(),
        whole_tree: ctx.statement.subcomponents.is_empty()
            && identity_matches(Some(doc.root()), product),
    });
}

/// A suppressing statement that scopes one concrete path, independent of any
/// advisory match. Used by path-inspection tooling.
#[derive(Debug, Clone)]
pub struct PathCover<'a> {
    pub statement_index: usize,
    pub source_path: &'a str,
    pub statement: &'a VexStatement,
    pub product: String,
}

/// Vulnerability-agnostic coverage check: the first suppressing statement
/// (document order) whose product scopes `path`.
pub fn covering_statement<'a>(
    doc: &SbomDocument,
    path: &[String],
    vex_docs: &'a [VexDocument],
) -> Option<PathCover<'a>> {
    for vex in vex_docs {
        for (statement_index, statement) in vex.statements.iter().enumerate() {
            if !statement.status.is_suppressing() {
                continue;
            }
            for product in statement.products.iter().filter_map(ProductRef::as_purl) {
                if product_covers_path(statement, product, path, doc) {
                    return Some(PathCover {
                        statement_index,
                        source_path: &vex.source_path,
                        statement,
                        product: product.to_string(),
                    });
                }
            }
        }
    }
    None
}

/// Renders a human-readable rationale for a finding's verdict. Wording is
/// stable for snapshot tests.
pub fn explain(finding: &Finding) -> String {
    let mut out = String::new();
    let lineage = if finding.via_lineage {
        " via lineage"
    } else {
        ""
    };
    let Some(verdict) = &finding.verdict else {
        out.push_str(&format!(
            "{} on \"{}\" ({}){}: no verdict computed\n",
            finding.vuln_id, finding.component_ref, finding.matched_identity, lineage
        ));
        return out;
    };
    let outcome = match verdict.outcome {
        VerdictOutcome::Reported => "reported",
        VerdictOutcome::Suppressed => "suppressed",
        VerdictOutcome::ReportedAnnotated => "reported (annotated)",
    };
    out.push_str(&format!(
        "{} on \"{}\" ({}){}: {}\n",
        finding.vuln_id, finding.component_ref, finding.matched_identity, lineage, outcome
    ));

    if verdict.fallback {
        out.push_str("  path enumeration exceeded the cap; reachable-set fallback applied\n");
    } else if finding.paths.is_empty() {
        out.push_str("  no dependency path from the document root reaches this component\n");
    }

    for (i, path) in finding.paths.iter().enumerate() {
        out.push_str(&format!("  path {}: {}\n", i + 1, path.join(" -> ")));
        match verdict.path_coverage.get(i).copied().flatten() {
            Some(applied_idx) => {
                let a = &verdict.applied_statements[applied_idx];
                out.push_str(&format!(
                    "    covered by statement #{} ({}): {}, product {}\n",
                    a.statement_index,
                    a.source_path,
                    a.status.token(),
                    a.product
                ));
            }
            None => out.push_str("    uncovered\n"),
        }
    }

    for a in &verdict.applied_statements {
        if !a.status.is_suppressing() {
            out.push_str(&format!(
                "  annotation: statement #{} ({}) is {} for this advisory\n",
                a.statement_index,
                a.source_path,
                a.status.token()
            ));
        }
        if a.whole_tree {
            out.push_str(&format!(
                "  note: statement #{} ({}) product matches the document root; treated as whole-tree scope\n",
                a.statement_index, a.source_path
            ));
        }
    }
    out
}
