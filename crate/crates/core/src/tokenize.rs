//! Token and character counting shared by the corpus filter, the rate predictor and the
//! validation harness.
//!
//! Tokens are whitespace-separated words, except that every CJK ideograph (and kana/hangul
//! syllable) is its own token. A run of non-CJK characters glued to CJK text counts once.

/// Whether `c` belongs to a script written without spaces between words.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF      // hiragana, katakana
        | 0x3400..=0x4DBF    // CJK extension A
        | 0x4E00..=0x9FFF    // CJK unified ideographs
        | 0xAC00..=0xD7AF    // hangul syllables
        | 0xF900..=0xFAFF    // compatibility ideographs
        | 0x20000..=0x2FA1F  // extensions B..F, compatibility supplement
    )
}

pub fn count_tokens(text: &str) -> usize {
    text.split_whitespace().map(count_in_word).sum()
}

fn count_in_word(word: &str) -> usize {
    let mut count = 0;
    let mut in_run = false;
    for c in word.chars() {
        if is_cjk(c) {
            count += 1;
            in_run = false;
        } else if !in_run {
            count += 1;
            in_run = true;
        }
    }
    count
}

/// Number of non-whitespace characters.
pub fn count_characters(text: &str) -> usize {
    text.chars().filter(|c| !c.is_whitespace()).count()
}
