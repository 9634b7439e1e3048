//! Dutch suffix-stripping stemmer (Snowball algorithm).
//!
//! Implemented step for step from the published algorithm definition:
//! accent removal and i/y consonantization in the prelude, the R1/R2
//! regions (R1 pushed to at least position 3), the four suffix steps and
//! the final vowel undoubling. Regions are absolute positions computed
//! once on the preluded word; every later edit is a suffix edit, so they
//! stay valid as the word shrinks.

const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u', 'y', 'è'];

fn is_vowel(c: char) -> bool {
    VOWELS.contains(&c)
}

fn map_accent(c: char) -> char {
    match c {
        'ä' | 'á' => 'a',
        'ë' | 'é' => 'e',
        'ï' | 'í' => 'i',
        'ö' | 'ó' => 'o',
        'ü' | 'ú' => 'u',
        other => other,
    }
}

/// Word state during stemming. Edits happen only at the tail.
struct Word {
    chars: Vec<char>,
    r1: usize,
    r2: usize,
    e_removed: bool,
}

impl Word {
    fn new(input: &str) -> Self {
        let mut chars: Vec<char> = input.chars().map(map_accent).collect();
        // Initial y, y after a vowel, and i between vowels become
        // consonants (upper case) so later vowel tests skip them.
        if let Some(first) = chars.first_mut() {
            if *first == 'y' {
                *first = 'Y';
            }
        }
        for i in 1..chars.len() {
            if chars[i] == 'y' && is_vowel(chars[i - 1]) {
                chars[i] = 'Y';
            } else if chars[i] == 'i'
                && is_vowel(chars[i - 1])
                && i + 1 < chars.len()
                && is_vowel(chars[i + 1])
            {
                chars[i] = 'I';
            }
        }
        let (r1, r2) = mark_regions(&chars);
        Word {
            chars,
            r1,
            r2,
            e_removed: false,
        }
    }

    fn len(&self) -> usize {
        self.chars.len()
    }

    fn ends_with(&self, suffix: &str) -> bool {
        let s: Vec<char> = suffix.chars().collect();
        self.len() >= s.len() && self.chars[self.len() - s.len()..] == s[..]
    }

    /// Start index of `suffix` when it matches the tail.
    fn suffix_start(&self, suffix: &str) -> usize {
        self.len() - suffix.chars().count()
    }

    fn truncate(&mut self, new_len: usize) {
        self.chars.truncate(new_len);
    }

    fn char_before(&self, pos: usize) -> Option<char> {
        if pos == 0 {
            None
        } else {
            Some(self.chars[pos - 1])
        }
    }

    /// Trailing kk/dd/tt loses its last letter.
    fn undouble_ending(&mut self) {
        let n = self.len();
        if n >= 2 {
            let (a, b) = (self.chars[n - 2], self.chars[n - 1]);
            if a == b && matches!(a, 'k' | 'd' | 't') {
                self.truncate(n - 1);
            }
        }
    }

    /// Non-vowel before the suffix, and the stem must not end in "gem".
    fn valid_en_ending(&self, start: usize) -> bool {
        match self.char_before(start) {
            Some(c) if !is_vowel(c) => {
                !(start >= 3 && self.chars[start - 3..start] == ['g', 'e', 'm'])
            }
            _ => false,
        }
    }

    /// Delete suffix e when in R1 and preceded by a non-vowel.
    fn try_remove_final_e(&mut self) {
        if self.ends_with("e") {
            let start = self.len() - 1;
            if start >= self.r1 {
                if let Some(c) = self.char_before(start) {
                    if !is_vowel(c) {
                        self.truncate(start);
                        self.e_removed = true;
                        self.undouble_ending();
                    }
                }
            }
        }
    }

    /// Suffix en as in step 1(b): R1, valid en-ending, delete, undouble.
    fn try_remove_en(&mut self, start: usize) {
        if start >= self.r1 && self.valid_en_ending(start) {
            self.truncate(start);
            self.undouble_ending();
        }
    }
}

/// R1 = after the first non-vowel following a vowel, pushed to at least 3;
/// R2 = the same scan continued from the unadjusted R1.
fn mark_regions(chars: &[char]) -> (usize, usize) {
    let n = chars.len();
    let mut i = 0;
    while i < n && !is_vowel(chars[i]) {
        i += 1;
    }
    while i < n && is_vowel(chars[i]) {
        i += 1;
    }
    if i >= n {
        return (n, n);
    }
    let cursor = i + 1;
    let r1 = cursor.max(3).min(n);
    let mut j = cursor;
    while j < n && !is_vowel(chars[j]) {
        j += 1;
    }
    while j < n && is_vowel(chars[j]) {
        j += 1;
    }
    let r2 = if j < n { j + 1 } else { n };
    (r1, r2)
}

/// Stem one lowercase token.
pub fn stem(token: &str) -> String {
    if token.is_empty() {
        return String::new();
    }
    let mut w = Word::new(token);

    // Step 1: longest of heden / ene / en / se / s.
    if w.ends_with("heden") {
        let start = w.suffix_start("heden");
        if start >= w.r1 {
            w.truncate(start);
            w.chars.extend(['h', 'e', 'i', 'd']);
        }
    } else if w.ends_with("ene") {
        let start = w.suffix_start("ene");
        w.try_remove_en(start);
    } else if w.ends_with("en") {
        let start = w.suffix_start("en");
        w.try_remove_en(start);
    } else if w.ends_with("se") {
        let start = w.suffix_start("se");
        if start >= w.r1 {
            if let Some(c) = w.char_before(start) {
                if !is_vowel(c) && c != 'j' {
                    w.truncate(start);
                }
            }
        }
    } else if w.ends_with("s") {
        let start = w.suffix_start("s");
        if start >= w.r1 {
            if let Some(c) = w.char_before(start) {
                if !is_vowel(c) && c != 'j' {
                    w.truncate(start);
                }
            }
        }
    }

    // Step 2: final e.
    w.try_remove_final_e();

    // Step 3a: heid, then a re-exposed en.
    if w.ends_with("heid") {
        let start = w.suffix_start("heid");
        if start >= w.r2 && w.char_before(start) != Some('c') {
            w.truncate(start);
            if w.ends_with("en") {
                let s2 = w.suffix_start("en");
                w.try_remove_en(s2);
            }
        }
    }

    // Step 3b: longest of end / ing / ig / lijk / baar / bar.
    if w.ends_with("end") || w.ends_with("ing") {
        let start = w.len() - 3;
        if start >= w.r2 {
            w.truncate(start);
            let mut ig_removed = false;
            if w.ends_with("ig") {
                let s2 = w.suffix_start("ig");
                if s2 >= w.r2 && w.char_before(s2) != Some('e') {
                    w.truncate(s2);
                    ig_removed = true;
                }
            }
            if !ig_removed {
                w.undouble_ending();
            }
        }
    } else if w.ends_with("lijk") {
        let start = w.suffix_start("lijk");
        if start >= w.r2 {
            w.truncate(start);
            w.try_remove_final_e();
        }
    } else if w.ends_with("baar") {
        let start = w.suffix_start("baar");
        if start >= w.r2 {
            w.truncate(start);
        }
    } else if w.ends_with("bar") {
        let start = w.suffix_start("bar");
        if start >= w.r2 && w.e_removed {
            w.truncate(start);
        }
    } else if w.ends_with("ig") {
        let start = w.suffix_start("ig");
        if start >= w.r2 && w.char_before(start) != Some('e') {
            w.truncate(start);
        }
    }

    // Step 4: undouble vowel in a trailing C-VV-D pattern.
    let n = w.len();
    if n >= 4 {
        let (c, v1, v2, d) = (
            w.chars[n - 4],
            w.chars[n - 3],
            w.chars[n - 2],
            w.chars[n - 1],
        );
        if !is_vowel(d)
            && d != 'I'
            && v1 == v2
            && matches!(v1, 'a' | 'e' | 'o' | 'u')
            && !is_vowel(c)
        {
            w.chars.remove(n - 2);
        }
    }

    w.chars
        .into_iter()
        .map(|c| match c {
            'I' => 'i',
            'Y' => 'y',
            other => other,
        })
        .collect()
}
