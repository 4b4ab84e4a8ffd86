use rand::Rng;

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "ch", "gr", "pr", "st", "tr",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
const ENDINGS: &[&str] = &["a", "i", "o"];
// consonant codas keep external surnames out of the staff name space
const FOREIGN_CODAS: &[&str] = &["k", "x", "th", "ck", "rg", "sk", "nn", "w"];

fn syllable(rng: &mut impl Rng) -> String {
    format!(
        "{}{}",
        ONSETS[rng.random_range(0..ONSETS.len())],
        VOWELS[rng.random_range(0..VOWELS.len())]
    )
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// A staff-style surname: two or three syllables ending in a vowel.
pub fn surname(rng: &mut impl Rng) -> String {
    let n = rng.random_range(2..=3);
    let mut s: String = (0..n).map(|_| syllable(rng)).collect();
    s.push_str(ENDINGS[rng.random_range(0..ENDINGS.len())]);
    capitalize(&s)
}

/// An external surname; always ends in a consonant, so never equals a
/// [`surname`].
pub fn foreign_surname(rng: &mut impl Rng) -> String {
    let n = rng.random_range(1..=2);
    let mut s: String = (0..n).map(|_| syllable(rng)).collect();
    s.push_str(FOREIGN_CODAS[rng.random_range(0..FOREIGN_CODAS.len())]);
    capitalize(&s)
}

pub fn first_name(rng: &mut impl Rng) -> String {
    let n = rng.random_range(2..=3);
    let mut s: String = (0..n).map(|_| syllable(rng)).collect();
    s.push_str(ENDINGS[rng.random_range(0..ENDINGS.len())]);
    capitalize(&s)
}

/// A first name starting with the same letter as `like` but spelled
/// differently.
pub fn first_name_like(rng: &mut impl Rng, like: &str) -> String {
    let initial = like.chars().next().unwrap_or('A');
    loop {
        let tail = first_name(rng);
        let candidate: String = std::iter::once(initial).chain(tail.to_lowercase().chars().skip(1)).collect();
        if candidate != like && candidate.chars().count() >= 3 {
            return candidate;
        }
    }
}

pub fn place(rng: &mut impl Rng) -> String {
    let n = rng.random_range(2..=3);
    let mut s: String = (0..n).map(|_| syllable(rng)).collect();
    s.push_str(ENDINGS[rng.random_range(0..ENDINGS.len())]);
    capitalize(&s)
}

/// ISO 7064 11,2 check character.
fn orcid_check(digits: &[u8]) -> char {
    let total = digits.iter().fold(0u32, |acc, d| (acc + *d as u32) * 2);
    let result = (12 - total % 11) % 11;
    if result == 10 {
        'X'
    } else {
        char::from_digit(result, 10).expect("digit")
    }
}

pub fn orcid(rng: &mut impl Rng) -> String {
    let mut digits: Vec<u8> = vec![0, 0, 0, 0];
    digits.extend((0..11).map(|_| rng.random_range(0..10u8)));
    let mut s: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
    s.push(orcid_check(&digits));
    format!("{}-{}-{}-{}", &s[0..4], &s[4..8], &s[8..12], &s[12..16])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyed::keyed_rng;
    use crate::normalize::is_valid_orcid;

    #[test]
    fn name_spaces_are_disjoint() {
        let mut rng = keyed_rng(1, &["names"]);
        for _ in 0..500 {
            let s = surname(&mut rng);
            let f = foreign_surname(&mut rng);
            assert!(s.ends_with(['a', 'i', 'o']));
            assert!(!f.ends_with(['a', 'e', 'i', 'o', 'u']));
        }
    }

    #[test]
    fn known_orcid_checksum() {
        // 0000-0002-1825-0097 is the registry's documented example
        let digits: Vec<u8> = "000000021825009".bytes().map(|b| b - b'0').collect();
        assert_eq!(orcid_check(&digits), '7');
        let mut rng = keyed_rng(3, &["orcid"]);
        assert!(is_valid_orcid(&orcid(&mut rng)));
    }

    #[test]
    fn homonym_first_names_share_initial() {
        let mut rng = keyed_rng(5, &["h"]);
        let a = first_name(&mut rng);
        let b = first_name_like(&mut rng, &a);
        assert_eq!(a.chars().next(), b.chars().next());
        assert_ne!(a, b);
    }
}
