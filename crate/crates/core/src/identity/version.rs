//! Simplified Maven-style version ordering and OSV-style range containment.
//!
//! The ordering is a documented subset of Maven's `ComparableVersion`:
//!
//! 1. The string is lowercased and split into tokens on `.`, `-`, `_` and at
//!    digit/letter boundaries; empty tokens are dropped.
//! 2. Positive numeric tokens compare numerically (arbitrary length) and
//!    outrank every qualifier. Qualifier tokens compare by the fixed table
//!    `alpha < beta < milestone < rc < snapshot < release`, where *release*
//!    is the absent qualifier. Unknown qualifiers rank above release and
//!    sort lexically among themselves.
//! 3. A zero numeric token and a missing position both canonicalize to the
//!    release rank, so `1`, `1.0` and `1.0.0` are equal, `1.0-SNAPSHOT`
//!    sorts below `1.0`, and `2.6.3-CUSTOM` above `2.6.3`.
//!
//! Because every token maps to one canonical rank independent of what it is
//! compared against, the comparison is a lexicographic product of total
//! orders: total, antisymmetric and transitive over arbitrary strings.

use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    /// Digits with leading zeros stripped; compared by (length, lexical),
    /// which equals numeric order without an integer-width limit.
    Number(String),
    /// Lowercased qualifier text.
    Qualifier(String),
}

/// Rank of the implicit "release" qualifier in the ordering table.
const RELEASE_RANK: u8 = 5;
/// Rank shared by all unknown qualifiers (lexical tie-break among them).
const UNKNOWN_RANK: u8 = 6;

fn qualifier_rank(q: &str) -> u8 {
    match q {
        "alpha" => 0,
        "beta" => 1,
        "milestone" => 2,
        "rc" => 3,
        "snapshot" => 4,
        "" => RELEASE_RANK,
        _ => UNKNOWN_RANK,
    }
}

/// Context-free canonical form of a token slot. `Qualifier` sorts below
/// `Number` unconditionally.
#[derive(PartialEq, Eq)]
enum Canonical<'a> {
    Qualifier { rank: u8, text: &'a str },
    Number(&'a str),
}

fn canonicalize(token: Option<&Token>) -> Canonical<'_> {
    match token {
        None => Canonical::Qualifier {
            rank: RELEASE_RANK,
            text: "",
        },
        Some(Token::Number(n)) if n == "0" => Canonical::Qualifier {
            rank: RELEASE_RANK,
            text: "",
        },
        Some(Token::Number(n)) => Canonical::Number(n),
        Some(Token::Qualifier(q)) => Canonical::Qualifier {
            rank: qualifier_rank(q),
            text: q,
        },
    }
}

fn cmp_canonical(a: &Canonical, b: &Canonical) -> Ordering {
    match (a, b) {
        (Canonical::Number(x), Canonical::Number(y)) => {
            x.len().cmp(&y.len()).then_with(|| x.cmp(y))
        }
        (
            Canonical::Qualifier { rank: rx, text: tx },
            Canonical::Qualifier { rank: ry, text: ty },
        ) => rx.cmp(ry).then_with(|| {
            if *rx == UNKNOWN_RANK {
                tx.cmp(ty)
            } else {
                Ordering::Equal
            }
        }),
        (Canonical::Number(_), Canonical::Qualifier { .. }) => Ordering::Greater,
        (Canonical::Qualifier { .. }, Canonical::Number(_)) => Ordering::Less,
    }
}

/// Comparison key derived from a version string.
#[derive(Debug, Clone)]
pub struct VersionKey {
    tokens: Vec<Token>,
}

impl VersionKey {
    pub fn parse(version: &str) -> VersionKey {
        let lower = version.to_ascii_lowercase();
        let mut tokens = Vec::new();
        let mut current = String::new();
        let mut current_is_digit = false;

        let flush = |buf: &mut String, is_digit: bool, tokens: &mut Vec<Token>| {
            if buf.is_empty() {
                return;
            }
            if is_digit {
                let stripped = buf.trim_start_matches('0');
                let normalized = if stripped.is_empty() { "0" } else { stripped };
                tokens.push(Token::Number(normalized.to_string()));
            } else {
                tokens.push(Token::Qualifier(std::mem::take(buf)));
            }
            buf.clear();
        };

        for c in lower.chars() {
            if matches!(c, '.' | '-' | '_') {
                flush(&mut current, current_is_digit, &mut tokens);
                continue;
            }
            let is_digit = c.is_ascii_digit();
            if !current.is_empty() && is_digit != current_is_digit {
                flush(&mut current, current_is_digit, &mut tokens);
            }
            current_is_digit = is_digit;
            current.push(c);
        }
        flush(&mut current, current_is_digit, &mut tokens);

        // Trailing zeros canonicalize to the padding value anyway; trimming
        // them keeps keys small.
        while matches!(tokens.last(), Some(Token::Number(n)) if n == "0") {
            tokens.pop();
        }

        VersionKey { tokens }
    }
}

impl Ord for VersionKey {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.tokens.len().max(other.tokens.len());
        for i in 0..len {
            let ord = cmp_canonical(
                &canonicalize(self.tokens.get(i)),
                &canonicalize(other.tokens.get(i)),
            );
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for VersionKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for VersionKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for VersionKey {}

/// Orders two version strings under the documented subset.
pub fn compare_versions(a: &str, b: &str) -> Ordering {
    VersionKey::parse(a).cmp(&VersionKey::parse(b))
}

/// Event kinds in an OSV-style affected range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeEventKind {
    Introduced,
    Fixed,
    LastAffected,
}

#[derive(Debug, Clone)]
pub struct RangeEvent {
    pub kind: RangeEventKind,
    pub version: VersionKey,
}

/// An affected-version range: ordered introduce/fix events plus an optional
/// exact-version set. `Introduced v` opens a window containing `v`; `Fixed w`
/// closes it excluding `w`; `LastAffected w` closes it including `w`. A close
/// event with no prior open applies from the beginning of time, and an open
/// window with no close extends upward without bound.
#[derive(Debug, Clone, Default)]
pub struct VersionRange {
    pub events: Vec<RangeEvent>,
    pub exact: Vec<VersionKey>,
}

impl VersionRange {
    pub fn introduced_fixed(introduced: &str, fixed: &str) -> VersionRange {
        VersionRange {
            events: vec![
                RangeEvent {
                    kind: RangeEventKind::Introduced,
                    version: VersionKey::parse(introduced),
                },
                RangeEvent {
                    kind: RangeEventKind::Fixed,
                    version: VersionKey::parse(fixed),
                },
            ],
            exact: Vec::new(),
        }
    }

    pub fn exact_versions<'a>(versions: impl IntoIterator<Item = &'a str>) -> VersionRange {
        VersionRange {
            events: Vec::new(),
            exact: versions.into_iter().map(VersionKey::parse).collect(),
        }
    }

    pub fn contains(&self, version: &VersionKey) -> bool {
        if self.exact.iter().any(|v| v == version) {
            return true;
        }

        #[derive(Clone)]
        enum Close {
            Exclusive(VersionKey),
            Inclusive(VersionKey),
        }
        let mut windows: Vec<(Option<VersionKey>, Option<Close>)> = Vec::new();
        let mut open: Option<Option<VersionKey>> = None;
        for event in &self.events {
            match event.kind {
                RangeEventKind::Introduced => {
                    if open.is_none() {
                        open = Some(Some(event.version.clone()));
                    }
                }
                RangeEventKind::Fixed => {
                    let start = open.take().unwrap_or(None);
                    windows.push((start, Some(Close::Exclusive(event.version.clone()))));
                }
                RangeEventKind::LastAffected => {
                    let start = open.take().unwrap_or(None);
                    windows.push((start, Some(Close::Inclusive(event.version.clone()))));
                }
            }
        }
        if let Some(start) = open {
            windows.push((start, None));
        }

        windows.iter().any(|(start, close)| {
            let after_start = match start {
                Some(s) => version >= s,
                None => true,
            };
            let before_close = match close {
                Some(Close::Exclusive(c)) => version < c,
                Some(Close::Inclusive(c)) => version <= c,
                None => true,
            };
            after_start && before_close
        })
    }
}

/// True iff `version` falls inside the range.
pub fn range_contains(range: &VersionRange, version: &str) -> bool {
    range.contains(&VersionKey::parse(version))
}
