//! ISO 9 transliteration between Cyrillic and Latin, and cross-alphabet
//! merge tables built on top of it.
//!
//! The bundled table is ISO 9:1995 system A, which maps each Cyrillic
//! letter to exactly one Latin scalar (diacritics keep the mapping
//! one-to-one). The standard transliterates the hard and soft signs to
//! caseless modifier primes; this table assigns their capital forms the
//! modifier apostrophes U+02EE and U+02BC so the mapping stays invertible.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::OnceLock;

use crate::bpe::{self, MergeRule, MergeTable, Segmenter, Symbol};
use crate::error::{Error, Result};

const ISO9_TABLE: &str = include_str!("iso9.tsv");

/// Scalar-to-scalar transliteration table, invertible on every mapped pair.
#[derive(Debug, Clone)]
pub struct TranslitTable {
    forward: HashMap<char, char>,
    inverse: HashMap<char, char>,
}

impl TranslitTable {
    /// The bundled ISO 9:1995 system A table.
    pub fn iso9() -> &'static TranslitTable {
        static TABLE: OnceLock<TranslitTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            TranslitTable::parse(ISO9_TABLE).expect("bundled table is well formed")
        })
    }

    /// Parses `<cyrillic><TAB><latin>` pairs, one per line.
    pub fn parse(text: &str) -> Result<TranslitTable> {
        let mut forward = HashMap::new();
        let mut inverse = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (cyr, lat) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(format!("line {}: missing tab", lineno + 1)))?;
            let cyr = single_char(cyr, lineno + 1)?;
            let lat = single_char(lat, lineno + 1)?;
            if forward.insert(cyr, lat).is_some() {
                return Err(Error::format(format!("duplicate source {cyr:?}")));
            }
            if inverse.insert(lat, cyr).is_some() {
                return Err(Error::format(format!("duplicate target {lat:?}")));
            }
        }
        Ok(TranslitTable { forward, inverse })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<TranslitTable> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        TranslitTable::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (char, char)> + '_ {
        self.forward.iter().map(|(c, l)| (*c, *l))
    }

    /// Replaces every mapped Cyrillic scalar with its Latin image.
    pub fn to_latin(&self, text: &str) -> String {
        text.chars()
            .map(|c| self.forward.get(&c).copied().unwrap_or(c))
            .collect()
    }

    /// Inverse direction: mapped Latin scalars back to Cyrillic.
    pub fn to_cyrillic(&self, text: &str) -> String {
        text.chars()
            .map(|c| self.inverse.get(&c).copied().unwrap_or(c))
            .collect()
    }

    fn symbol_to_cyrillic(&self, symbol: &Symbol) -> Symbol {
        let text = self.to_cyrillic(symbol.text());
        if symbol.is_eow() {
            Symbol::word_final(text)
        } else {
            Symbol::plain(text)
        }
    }
}

fn single_char(field: &str, lineno: usize) -> Result<char> {
    let mut chars = field.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::format(format!(
            "line {lineno}: field {field:?} is not a single scalar"
        ))),
    }
}

/// Transliterates with the bundled ISO 9 table.
pub fn to_latin(text: &str) -> String {
    TranslitTable::iso9().to_latin(text)
}

/// Inverse of [`to_latin`] on mapped scalars.
pub fn to_cyrillic(text: &str) -> String {
    TranslitTable::iso9().to_cyrillic(text)
}

/// A merge table in Latin script paired with its rule-for-rule image in
/// Cyrillic. Rule `i` of one table is the scalar-wise transliteration of
/// rule `i` of the other, at the same rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiScriptMergeTable {
    pub latin: MergeTable,
    pub cyrillic: MergeTable,
}

impl BiScriptMergeTable {
    /// Derives the Cyrillic table from a Latin one by inverse
    /// transliteration of every rule symbol.
    pub fn from_latin(latin: MergeTable, table: &TranslitTable) -> BiScriptMergeTable {
        let rules = latin
            .rules()
            .iter()
            .map(|r| MergeRule {
                left: table.symbol_to_cyrillic(&r.left),
                right: table.symbol_to_cyrillic(&r.right),
                rank: r.rank,
            })
            .collect();
        let note = format!("{} (inverse transliteration)", latin.source_note());
        let cyrillic = MergeTable::from_rules_unchecked(rules, note);
        BiScriptMergeTable { latin, cyrillic }
    }

    /// Saves both tables as `<basename>.lat` and `<basename>.cyr`.
    pub fn save(&self, basename: impl AsRef<Path>) -> Result<()> {
        let basename = basename.as_ref();
        self.latin.save(with_suffix(basename, "lat"))?;
        self.cyrillic.save(with_suffix(basename, "cyr"))?;
        Ok(())
    }

    /// Loads a pair of tables sharing `basename`.
    pub fn load(basename: impl AsRef<Path>) -> Result<BiScriptMergeTable> {
        let basename = basename.as_ref();
        Ok(BiScriptMergeTable {
            latin: MergeTable::load(with_suffix(basename, "lat"))?,
            cyrillic: MergeTable::load(with_suffix(basename, "cyr"))?,
        })
    }

    /// Segmenter over the union of both rule lists. Rules keep their rank;
    /// at equal rank the Cyrillic rule fires first, since the stacked
    /// segmenter is only used on Cyrillic-script data.
    pub fn segmenter(&self) -> Segmenter {
        Segmenter::from_tables(&[&self.cyrillic, &self.latin])
    }
}

fn with_suffix(basename: &Path, suffix: &str) -> std::path::PathBuf {
    let mut name = basename.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    std::path::PathBuf::from(name)
}

/// Learns one merge table over English text plus latinized Russian text,
/// then mirrors it back into Cyrillic.
pub fn learn_biscript_bpe<R1: BufRead, R2: BufRead>(
    english_corpus: R1,
    russian_corpus: R2,
    num_merges: usize,
) -> Result<BiScriptMergeTable> {
    let table = TranslitTable::iso9();
    let mut vocab = bpe::build_vocab(english_corpus)?;
    let russian = crate::textio::read_lines(russian_corpus)?;
    let mut latinized = bpe::VocabCounts::new();
    for line in &russian {
        for token in line.split_whitespace() {
            latinized.add(&table.to_latin(token), 1);
        }
    }
    vocab.merge(&latinized);
    let latin = bpe::learn_bpe(&vocab, num_merges)?;
    Ok(BiScriptMergeTable::from_latin(latin, table))
}

/// Segments a Russian line with the union of both rule lists. English data
/// should use the Latin table alone via [`bpe::segment_line`].
pub fn segment_russian(tables: &BiScriptMergeTable, line: &str) -> String {
    tables.segmenter().segment_line(line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn transliterates_examples() {
        assert_eq!(to_latin("Москва"), "Moskva");
        assert_eq!(to_latin("чай"), "čaj");
        assert_eq!(to_latin("abc 123"), "abc 123");
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(to_cyrillic("Moskva"), "Москва");
        assert_eq!(to_cyrillic(""), "");
    }

    #[test]
    fn table_is_bijective() {
        let table = TranslitTable::iso9();
        assert_eq!(table.len(), 66);
        for (cyr, lat) in table.pairs() {
            assert_eq!(
                table.to_cyrillic(&table.to_latin(&cyr.to_string())),
                cyr.to_string()
            );
            assert_eq!(
                table.to_latin(&table.to_cyrillic(&lat.to_string())),
                lat.to_string()
            );
        }
    }

    #[test]
    fn round_trip_on_cyrillic_text() {
        let text = "Съешь же ещё этих мягких французских булок, да выпей чаю.";
        assert_eq!(to_cyrillic(&to_latin(text)), text);
    }

    #[test]
    fn hard_and_soft_signs_keep_case() {
        assert_eq!(to_cyrillic(&to_latin("ОБЪЁМ объём")), "ОБЪЁМ объём");
        assert_eq!(to_cyrillic(&to_latin("ЬЪьъ")), "ЬЪьъ");
    }

    #[test]
    fn biscript_rules_align_rank_for_rank() {
        let tables = learn_biscript_bpe(
            Cursor::new("the the them"),
            Cursor::new("чай чай чайник"),
            30,
        )
        .unwrap();
        assert_eq!(tables.latin.len(), tables.cyrillic.len());
        let translit = TranslitTable::iso9();
        for (lat, cyr) in tables.latin.rules().iter().zip(tables.cyrillic.rules()) {
            assert_eq!(lat.rank, cyr.rank);
            assert_eq!(translit.symbol_to_cyrillic(&lat.left), cyr.left);
            assert_eq!(translit.symbol_to_cyrillic(&lat.right), cyr.right);
        }
    }

    #[test]
    fn latin_rule_maps_to_its_cyrillic_image() {
        let latin = MergeTable::new(
            vec![MergeRule {
                left: Symbol::plain("č"),
                right: Symbol::plain("a"),
                rank: 0,
            }],
            "toy",
        )
        .unwrap();
        let tables = BiScriptMergeTable::from_latin(latin, TranslitTable::iso9());
        let cyr = &tables.cyrillic.rules()[0];
        assert_eq!(cyr.left.text(), "ч");
        assert_eq!(cyr.right.text(), "а");
        assert_eq!(cyr.rank, 0);
    }

    #[test]
    fn two_rule_toy_table_segments_each_script() {
        let latin = MergeTable::new(
            vec![
                MergeRule {
                    left: Symbol::plain("m"),
                    right: Symbol::plain("o"),
                    rank: 0,
                },
                MergeRule {
                    left: Symbol::plain("mo"),
                    right: Symbol::eow_marker(),
                    rank: 1,
                },
            ],
            "toy",
        )
        .unwrap();
        let tables = BiScriptMergeTable::from_latin(latin, TranslitTable::iso9());
        // Each word only matches its own script's rules; the unmatched
        // word falls back to character pieces.
        assert_eq!(segment_russian(&tables, "мо mo ма"), "мо mo м@@ а");
    }

    #[test]
    fn segmentation_commutes_with_transliteration() {
        let tables = learn_biscript_bpe(
            Cursor::new("sea sea season"),
            Cursor::new("море море моряк ветер"),
            40,
        )
        .unwrap();
        for line in ["море ветер", "моряк", ""] {
            let segmented = segment_russian(&tables, line);
            assert_eq!(
                to_latin(&bpe::desegment_line(&segmented)),
                to_latin(line)
            );
        }
    }

    #[test]
    fn pure_cyrillic_line_matches_cyrillic_table_alone() {
        let tables = learn_biscript_bpe(
            Cursor::new("tea tea teapot"),
            Cursor::new("чай чай чайник да да"),
            40,
        )
        .unwrap();
        let line = "чайник да";
        let with_union = segment_russian(&tables, line);
        let with_cyr = bpe::segment_line(&tables.cyrillic, line);
        assert_eq!(with_union, with_cyr);
        assert_eq!(bpe::desegment_line(&with_union), line);
    }

    #[test]
    fn mixed_line_uses_matching_script_rules() {
        let tables = learn_biscript_bpe(
            Cursor::new("usa usa usb"),
            Cursor::new("мир мир миф"),
            40,
        )
        .unwrap();
        let segmented = segment_russian(&tables, "мир usa");
        assert_eq!(bpe::desegment_line(&segmented), "мир usa");
        // Both words found their own-script merges.
        let words: Vec<&str> = segmented.split(' ').collect();
        assert!(words.contains(&"мир"), "got {segmented:?}");
        assert!(words.contains(&"usa") || segmented.contains("us@@"), "got {segmented:?}");
    }

    #[test]
    fn empty_russian_corpus_degenerates_to_plain_learning() {
        let en = "ab ab cd cd";
        let tables = learn_biscript_bpe(Cursor::new(en), Cursor::new(""), 20).unwrap();
        let plain = bpe::learn_bpe(&bpe::build_vocab(Cursor::new(en)).unwrap(), 20).unwrap();
        assert_eq!(tables.latin.rules(), plain.rules());
        // Cyrillic image of pure-Latin rules replaces mapped scalars and
        // copies the rest unchanged.
        for (lat, cyr) in tables.latin.rules().iter().zip(tables.cyrillic.rules()) {
            assert_eq!(to_latin(cyr.left.text()), lat.left.text().to_string());
        }
    }

    #[test]
    fn save_and_load_pair(){
        let dir = tempfile::tempdir().unwrap();
        let tables = learn_biscript_bpe(
            Cursor::new("on on one"),
            Cursor::new("он он оно"),
            20,
        )
        .unwrap();
        let base = dir.path().join("model.bpe");
        tables.save(&base).unwrap();
        let loaded = BiScriptMergeTable::load(&base).unwrap();
        assert_eq!(loaded.latin.rules(), tables.latin.rules());
        assert_eq!(loaded.cyrillic.rules(), tables.cyrillic.rules());
    }
}
