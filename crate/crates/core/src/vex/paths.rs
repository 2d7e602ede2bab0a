//! Simple-path enumeration over the dependency graph.

use std::collections::BTreeSet;

use crate::sbom::SbomDocument;

/// Raised when the number of simple paths exceeds the configured cap.
/// Callers fall back to reachable-set semantics with a warning.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("more than {cap} simple paths to {target:?}; falling back to reachable-set semantics")]
pub struct PathExplosion {
    pub target: String,
    pub cap: usize,
}

/// Enumerates every simple path from the document root to `target` over the
/// union of declared and code-level edges, in lexicographic order of the ref
/// sequences. Cycles are broken by the simple-path constraint. A target equal
/// to the root yields the single zero-length path `[root]`; a target with no
/// route from the root yields no paths.
pub fn enumerate_paths(
    doc: &SbomDocument,
    target: &str,
    cap: usize,
) -> Result<Vec<Vec<String>>, PathExplosion> {
    if doc.component(target).is_none() {
        return Ok(Vec::new());
    }
    let adj = doc.adjacency();
    let mut out = Vec::new();
    let mut current = vec![doc.root_ref.as_str()];
    let mut visited: BTreeSet<&str> = BTreeSet::new();
    visited.insert(doc.root_ref.as_str());
    dfs(&adj, target, cap, &mut current, &mut visited, &mut out)?;
    Ok(out)
}

fn dfs<'a>(
    adj: &std::collections::BTreeMap<&'a str, Vec<&'a str>>,
    target: &str,
    cap: usize,
    current: &mut Vec<&'a str>,
    visited: &mut BTreeSet<&'a str>,
    out: &mut Vec<Vec<String>>,
) -> Result<(), PathExplosion> {
    let node = *current.last().expect("path never empty");
    if node == target {
        if out.len() >= cap {
            return Err(PathExplosion {
                target: target.to_string(),
                cap,
            });
        }
        out.push(current.iter().map(|s| s.to_string()).collect());
        return Ok(());
    }
    let Some(neighbors) = adj.get(node) else {
        return Ok(());
    };
    for &next in neighbors {
        if visited.contains(next) {
            continue;
        }
        visited.insert(next);
        current.push(next);
        let result = dfs(adj, target, cap, current, visited, out);
        current.pop();
        visited.remove(next);
        result?;
    }
    Ok(())
}

/// Refs reachable from the root without entering `blocked` nodes. Empty when
/// the root itself is blocked.
pub(crate) fn reachable_avoiding<'a>(
    doc: &'a SbomDocument,
    blocked: &BTreeSet<&str>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    if blocked.contains(doc.root_ref.as_str()) {
        return seen;
    }
    let adj = doc.adjacency();
    let mut queue = vec![doc.root_ref.as_str()];
    seen.insert(doc.root_ref.as_str());
    while let Some(node) = queue.pop() {
        for &next in adj.get(node).into_iter().flatten() {
            if blocked.contains(next) || !seen.insert(next) {
                continue;
            }
            queue.push(next);
        }
    }
    seen
}
