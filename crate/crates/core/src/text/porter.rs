//! Classic Porter stemming algorithm (the original 1980 rule set).

use crate::error::{Error, Result};

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// The measure m: number of VC sequences in the word.
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut i = 0;
    let n = w.len();
    // Skip initial consonants.
    while i < n && is_consonant(w, i) {
        i += 1;
    }
    loop {
        // Vowel run.
        while i < n && !is_consonant(w, i) {
            i += 1;
        }
        if i >= n {
            return m;
        }
        // Consonant run closes a VC.
        while i < n && is_consonant(w, i) {
            i += 1;
        }
        m += 1;
        if i >= n {
            return m;
        }
    }
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// *o condition: stem ends cvc where the final consonant is not w, x or y.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

/// If `word` ends with `suffix`, returns the stem (word minus suffix).
fn stem_of<'a>(word: &'a str, suffix: &str) -> Option<&'a str> {
    word.strip_suffix(suffix)
}

/// Applies the first matching (suffix, replacement) rule whose stem satisfies
/// the measure condition. Returns true when a suffix matched (whether or not
/// the condition passed), mirroring the "first match wins" reading.
fn rule_list(word: &mut String, rules: &[(&str, &str)], min_measure: usize) {
    for (suffix, replacement) in rules {
        if let Some(stem) = stem_of(word, suffix) {
            if measure(stem.as_bytes()) > min_measure {
                let mut s = stem.to_string();
                s.push_str(replacement);
                *word = s;
            }
            return;
        }
    }
}

fn step_1a(word: &mut String) {
    if let Some(stem) = stem_of(word, "sses") {
        *word = format!("{stem}ss");
    } else if let Some(stem) = stem_of(word, "ies") {
        *word = format!("{stem}i");
    } else if word.ends_with("ss") {
        // keep
    } else if let Some(stem) = stem_of(word, "s") {
        *word = stem.to_string();
    }
}

fn step_1b(word: &mut String) {
    if let Some(stem) = stem_of(word, "eed") {
        if measure(stem.as_bytes()) > 0 {
            *word = format!("{stem}ee");
        }
        return;
    }
    let removed = if let Some(stem) = stem_of(word, "ed") {
        if has_vowel(stem.as_bytes()) {
            *word = stem.to_string();
            true
        } else {
            false
        }
    } else if let Some(stem) = stem_of(word, "ing") {
        if has_vowel(stem.as_bytes()) {
            *word = stem.to_string();
            true
        } else {
            false
        }
    } else {
        false
    };
    if !removed {
        return;
    }
    let w = word.as_bytes();
    if word.ends_with("at") || word.ends_with("bl") || word.ends_with("iz") {
        word.push('e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], b'l' | b's' | b'z') {
        word.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        word.push('e');
    }
}

fn step_1c(word: &mut String) {
    if let Some(stem) = stem_of(word, "y") {
        if has_vowel(stem.as_bytes()) {
            *word = format!("{stem}i");
        }
    }
}

fn step_2(word: &mut String) {
    rule_list(
        word,
        &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ],
        0,
    );
}

fn step_3(word: &mut String) {
    rule_list(
        word,
        &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ],
        0,
    );
}

fn step_4(word: &mut String) {
    // ION needs the extra "preceded by S or T" condition.
    for suffix in [
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion",
        "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    ] {
        if let Some(stem) = stem_of(word, suffix) {
            if suffix == "ion" && !(stem.ends_with('s') || stem.ends_with('t')) {
                return;
            }
            if measure(stem.as_bytes()) > 1 {
                *word = stem.to_string();
            }
            return;
        }
    }
}

fn step_5a(word: &mut String) {
    if let Some(stem) = stem_of(word, "e") {
        let m = measure(stem.as_bytes());
        if m > 1 || (m == 1 && !ends_cvc(stem.as_bytes())) {
            *word = stem.to_string();
        }
    }
}

fn step_5b(word: &mut String) {
    let w = word.as_bytes();
    if measure(w) > 1 && ends_double_consonant(w) && w[w.len() - 1] == b'l' {
        word.pop();
    }
}

/// Stems one lowercase alphabetic token.
pub fn stem(token: &str) -> Result<String> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return Err(Error::invalid(format!(
            "stem expects a nonempty [a-z]+ token, got {token:?}"
        )));
    }
    if token.len() <= 2 {
        return Ok(token.to_string());
    }
    let mut word = token.to_string();
    step_1a(&mut word);
    step_1b(&mut word);
    step_1c(&mut word);
    step_2(&mut word);
    step_3(&mut word);
    step_4(&mut word);
    step_5a(&mut word);
    step_5b(&mut word);
    Ok(word)
}
