//! Text normal forms shared by names, organization variants and block keys.
//!
//! The normal form is: lowercase, compatibility-decomposed with combining
//! marks dropped, apostrophes removed, any other punctuation turned into a
//! separator, a hyphen kept only between two alphanumerics, whitespace
//! collapsed to single spaces and trimmed. `d'Amico` becomes `damico`,
//! `Univ. Roma "Tor Vergata"` becomes `univ roma tor vergata`,
//! `Lévy-Leblond` becomes `levy-leblond`.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2018}' | '`' | '\u{00B4}' | '\u{02BC}')
}

fn is_hyphen(c: char) -> bool {
    matches!(c, '-' | '\u{2010}' | '\u{2011}')
}

fn fold(s: &str) -> String {
    let lowered = s.to_lowercase();
    let folded: String = lowered.nfkd().filter(|c| !is_combining_mark(*c)).collect();
    // compatibility decomposition can reintroduce capitals (e.g. unit symbols)
    folded.to_lowercase()
}

/// Normalizes a personal name, surname, or organization string.
pub fn normalize(s: &str) -> String {
    let mut current = fold(s);
    // folding is not always a fixpoint in one pass for exotic input
    loop {
        let next = fold(&current);
        if next == current {
            break;
        }
        current = next;
    }

    let chars: Vec<char> = current.chars().filter(|c| !is_apostrophe(*c)).collect();
    let mut out = String::with_capacity(chars.len());
    let mut pending_space = false;
    for (i, &c) in chars.iter().enumerate() {
        let keep = if c.is_alphanumeric() {
            Some(c)
        } else if is_hyphen(c) {
            let prev = i.checked_sub(1).map(|j| chars[j]);
            let next = chars.get(i + 1).copied();
            match (prev, next) {
                (Some(p), Some(n)) if p.is_alphanumeric() && n.is_alphanumeric() => Some('-'),
                _ => None,
            }
        } else {
            None
        };
        match keep {
            Some(k) => {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(k);
            }
            None => pending_space = true,
        }
    }
    out
}

/// Lowercased, trimmed email; `None` when blank.
pub fn normalize_email(s: &str) -> Option<String> {
    let e = s.trim().to_lowercase();
    if e.is_empty() {
        None
    } else {
        Some(e)
    }
}

/// Lowercased domain with any leading `@`, `%` or `.` removed.
pub fn normalize_domain(s: &str) -> String {
    s.trim()
        .trim_start_matches(['@', '%', '.', '*'])
        .to_lowercase()
}

/// Whether `orcid` has the `0000-0000-0000-000X` shape.
pub fn is_valid_orcid(orcid: &str) -> bool {
    let groups: Vec<&str> = orcid.split('-').collect();
    if groups.len() != 4 {
        return false;
    }
    groups.iter().enumerate().all(|(i, g)| {
        g.len() == 4
            && g.chars().enumerate().all(|(j, c)| {
                c.is_ascii_digit() || (i == 3 && j == 3 && c == 'X')
            })
    })
}
