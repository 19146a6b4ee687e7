//! Romanian diacritic removal.
//!
//! Romanian corpora spell the same letters with comma-below, cedilla, or
//! combining-mark sequences depending on their source. Stripping maps all
//! of them to the bare ASCII base letter so the variants collapse.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Precomposed diacritic letters and the combining marks that form them.
#[derive(Debug, Clone)]
pub struct DiacriticMap {
    precomposed: HashMap<char, char>,
    combining: HashMap<(char, char), char>,
}

const COMBINING_BREVE: char = '\u{0306}';
const COMBINING_CIRCUMFLEX: char = '\u{0302}';
const COMBINING_CEDILLA: char = '\u{0327}';
const COMBINING_COMMA_BELOW: char = '\u{0326}';

impl DiacriticMap {
    /// The Romanian letter set: breve and circumflex vowels plus the
    /// comma-below and cedilla spellings of s and t, in both cases.
    pub fn romanian() -> &'static DiacriticMap {
        static MAP: OnceLock<DiacriticMap> = OnceLock::new();
        MAP.get_or_init(|| {
            let pairs = [
                ('ă', 'a'),
                ('Ă', 'A'),
                ('â', 'a'),
                ('Â', 'A'),
                ('î', 'i'),
                ('Î', 'I'),
                ('ș', 's'), // U+0219 comma below
                ('Ș', 'S'), // U+0218
                ('ț', 't'), // U+021B comma below
                ('Ț', 'T'), // U+021A
                ('ş', 's'), // U+015F cedilla
                ('Ş', 'S'), // U+015E
                ('ţ', 't'), // U+0163 cedilla
                ('Ţ', 'T'), // U+0162
            ];
            let precomposed: HashMap<char, char> = pairs.into_iter().collect();
            let mut combining = HashMap::new();
            for (base, mark) in [
                ('a', COMBINING_BREVE),
                ('a', COMBINING_CIRCUMFLEX),
                ('i', COMBINING_CIRCUMFLEX),
                ('s', COMBINING_COMMA_BELOW),
                ('s', COMBINING_CEDILLA),
                ('t', COMBINING_COMMA_BELOW),
                ('t', COMBINING_CEDILLA),
            ] {
                combining.insert((base, mark), base);
                let upper = base.to_ascii_uppercase();
                combining.insert((upper, mark), upper);
            }
            DiacriticMap {
                precomposed,
                combining,
            }
        })
    }

    /// Replaces every mapped scalar with its base letter. Combining-mark
    /// spellings of the same letters collapse too; everything else passes
    /// through unchanged. Idempotent, since no output is itself mapped.
    pub fn strip(&self, line: &str) -> String {
        let mut out = String::with_capacity(line.len());
        let mut chars = line.chars().peekable();
        while let Some(c) = chars.next() {
            if let Some(&base) = self.precomposed.get(&c) {
                out.push(base);
                continue;
            }
            if let Some(&next) = chars.peek() {
                if let Some(&base) = self.combining.get(&(c, next)) {
                    out.push(base);
                    chars.next();
                    continue;
                }
            }
            out.push(c);
        }
        out
    }
}

/// Strips Romanian diacritics with the default map.
pub fn strip_diacritics(line: &str) -> String {
    DiacriticMap::romanian().strip(line)
}
