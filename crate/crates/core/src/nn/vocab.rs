use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

pub const PAD: usize = 0;
pub const UNK: usize = 1;

/// Word and character indices. Index 0 is padding and 1 is the unknown
/// entry in both tables; lookups of unseen items return [`UNK`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocab {
    words: Vec<String>,
    chars: Vec<char>,
    #[serde(skip)]
    word_index: HashMap<String, usize>,
    #[serde(skip)]
    char_index: HashMap<char, usize>,
}

const PAD_WORD: &str = "<pad>";
const UNK_WORD: &str = "<unk>";
const PAD_CHAR: char = '\u{0}';
const UNK_CHAR: char = '\u{1}';

impl Vocab {
    /// Builds a vocabulary from tokenized texts. Entries are sorted, so the
    /// result does not depend on input order.
    pub fn build<'a>(token_lists: impl IntoIterator<Item = &'a [String]>) -> Vocab {
        let mut words = BTreeSet::new();
        let mut chars = BTreeSet::new();
        for tokens in token_lists {
            for t in tokens {
                chars.extend(t.chars().filter(|&c| c != PAD_CHAR && c != UNK_CHAR));
                words.insert(t.clone());
            }
        }
        words.remove(PAD_WORD);
        words.remove(UNK_WORD);
        Vocab::from_entries(words.into_iter().collect(), chars.into_iter().collect())
    }

    /// `words` and `chars` exclude the reserved entries.
    pub fn from_entries(words: Vec<String>, chars: Vec<char>) -> Vocab {
        let mut all_words = vec![PAD_WORD.to_string(), UNK_WORD.to_string()];
        all_words.extend(words);
        let mut all_chars = vec![PAD_CHAR, UNK_CHAR];
        all_chars.extend(chars);
        let mut v = Vocab {
            words: all_words,
            chars: all_chars,
            word_index: HashMap::new(),
            char_index: HashMap::new(),
        };
        v.reindex();
        v
    }

    fn reindex(&mut self) {
        self.word_index = self.words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        self.char_index = self.chars.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn char_count(&self) -> usize {
        self.chars.len()
    }

    pub fn word_id(&self, word: &str) -> usize {
        self.word_index.get(word).copied().unwrap_or(UNK)
    }

    pub fn char_id(&self, c: char) -> usize {
        match c {
            PAD_CHAR | UNK_CHAR => UNK,
            c => self.char_index.get(&c).copied().unwrap_or(UNK),
        }
    }

    /// Exact lookup without the unknown fallback.
    pub fn lookup_word(&self, word: &str) -> Option<usize> {
        self.word_index.get(word).copied()
    }

    /// Entries after the two reserved ones.
    pub fn words(&self) -> &[String] {
        &self.words[2..]
    }

    pub fn chars(&self) -> &[char] {
        &self.chars[2..]
    }
}
