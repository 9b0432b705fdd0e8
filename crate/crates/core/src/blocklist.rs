//! URL-based content classes from domain blocklists.
//!
//! Classes annotate documents; they never cause removal. A UT1-style
//! directory (one subdirectory per class, each with a `domains` file) can be
//! loaded on top of two built-in classes: `wikipedia` (any subdomain of
//! wikipedia.org) and a small `religious` seed list.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;
use url::Url;

const RELIGIOUS_SEEDS: &str = include_str!("../data/religious_domains.txt");

#[derive(Debug, Error)]
pub enum BlocklistError {
    #[error("cannot read blocklist directory {path}: {source}")]
    Dir {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
}

/// Domain sets keyed by class name.
#[derive(Debug, Clone, Default)]
pub struct Blocklists {
    classes: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub classes_loaded: usize,
    pub domains_loaded: usize,
    pub lines_skipped: usize,
}

/// A domain entry is a bare lowercase host: no scheme, path, port, or
/// whitespace.
fn normalize_domain(line: &str) -> Option<String> {
    let d = line.trim();
    if d.is_empty()
        || d.contains(['/', ':', '@', '?', '#'])
        || d.contains(char::is_whitespace)
        || d.starts_with('.')
        || d.ends_with('.')
    {
        return None;
    }
    Some(d.to_lowercase())
}

impl Blocklists {
    /// Only the built-in classes.
    pub fn builtin() -> Self {
        let mut lists = Blocklists::default();
        lists.insert("wikipedia", "wikipedia.org");
        for line in RELIGIOUS_SEEDS.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(domain) = normalize_domain(line) {
                lists.insert("religious", &domain);
            }
        }
        lists
    }

    fn insert(&mut self, class: &str, domain: &str) {
        self.classes
            .entry(class.to_string())
            .or_default()
            .insert(domain.to_string());
    }

    pub fn class_names(&self) -> Vec<&str> {
        self.classes.keys().map(String::as_str).collect()
    }

    pub fn domains(&self, class: &str) -> Option<&BTreeSet<String>> {
        self.classes.get(class)
    }
}

/// Loads `<class>/domains` files from a UT1-style directory and merges the
/// built-in classes. Malformed lines are skipped and counted, not fatal.
pub fn load_blocklists(dir: &Path) -> Result<(Blocklists, LoadReport), BlocklistError> {
    let mut lists = Blocklists::builtin();
    let mut report = LoadReport::default();

    let entries = std::fs::read_dir(dir).map_err(|source| BlocklistError::Dir {
        path: dir.display().to_string(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| BlocklistError::Dir {
            path: dir.display().to_string(),
            source,
        })?;
        let path = entry.path();
        if !path.is_dir() {
            continue;
        }
        let domains_file = path.join("domains");
        if !domains_file.is_file() {
            continue;
        }
        let Some(class) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let text =
            std::fs::read_to_string(&domains_file).map_err(|source| BlocklistError::File {
                path: domains_file.display().to_string(),
                source,
            })?;
        report.classes_loaded += 1;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match normalize_domain(line) {
                Some(domain) => {
                    lists.insert(class, &domain);
                    report.domains_loaded += 1;
                }
                None => report.lines_skipped += 1,
            }
        }
    }
    Ok((lists, report))
}

fn host_matches(host: &str, domain: &str) -> bool {
    host == domain
        || (host.len() > domain.len()
            && host.ends_with(domain)
            && host.as_bytes()[host.len() - domain.len() - 1] == b'.')
}

/// Classes whose domain lists contain the URL's host or a parent domain of
/// it. An unparseable URL or one without a host yields the empty set.
pub fn classify_url(url: &str, lists: &Blocklists) -> BTreeSet<String> {
    let Ok(parsed) = Url::parse(url) else {
        return BTreeSet::new();
    };
    let Some(host) = parsed.host_str() else {
        return BTreeSet::new();
    };
    let host = host.to_lowercase();
    lists
        .classes
        .iter()
        .filter(|(_, domains)| domains.iter().any(|d| host_matches(&host, d)))
        .map(|(class, _)| class.clone())
        .collect()
}
