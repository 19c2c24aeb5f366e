//! Baseline tokenizer: maximal runs of non-whitespace characters.
//!
//! Whitespace is the Unicode `White_Space` property (`char::is_whitespace`),
//! which includes space, `\t`, `\n`, `\r` and form feed. Punctuation stays
//! attached to the surrounding characters.

use crate::model::{Token, TokenizedSentence};

pub const PROFILE: &str = "whitespace";

/// Byte ranges of the maximal non-whitespace runs of `text`.
pub fn chunks(text: &str) -> impl Iterator<Item = (usize, usize)> + '_ {
    let mut iter = text.char_indices().peekable();
    std::iter::from_fn(move || {
        while iter.peek().is_some_and(|(_, c)| c.is_whitespace()) {
            iter.next();
        }
        let (start, _) = *iter.peek()?;
        let mut end = start;
        while let Some(&(i, c)) = iter.peek() {
            if c.is_whitespace() {
                break;
            }
            end = i + c.len_utf8();
            iter.next();
        }
        Some((start, end))
    })
}

pub fn tokenize_whitespace(text: &str) -> TokenizedSentence {
    let tokens = chunks(text)
        .map(|(s, e)| Token::from_span(text, s, e))
        .collect();
    TokenizedSentence::new(PROFILE, tokens)
}
