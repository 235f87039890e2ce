//! Small text helpers shared by retrieval, curation and parsing.

use std::collections::HashSet;
use std::sync::LazyLock;

/// Lowercased alphanumeric runs of `text`.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

pub static STOPWORDS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    [
        "a", "about", "an", "and", "any", "are", "as", "at", "be", "by", "can", "could", "do",
        "does", "for", "from", "get", "how", "i", "if", "in", "into", "is", "it", "its", "let",
        "lets", "like", "make", "me", "my", "of", "on", "or", "please", "s", "so", "some",
        "that", "the", "then", "this", "to", "up", "want", "we", "what", "with", "would",
        "you", "your", "m", "ll", "d", "ve", "re", "t", "im", "id", "wanna", "gonna", "need",
        "help", "show", "find", "cook", "recipe", "recipes", "task", "tasks", "something",
        "ideas", "idea", "today", "tonight", "now", "just", "maybe", "good", "nice",
    ]
    .into_iter()
    .collect()
});

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(word)
}

/// Lowercased words with stopwords removed.
pub fn content_words(text: &str) -> Vec<String> {
    words(text).into_iter().filter(|w| !is_stopword(w)).collect()
}

/// Fold simple English plurals ("tomatoes" -> "tomato", "berries" -> "berry").
pub fn singular(word: &str) -> String {
    let w = word;
    if w.len() <= 3 {
        return w.to_string();
    }
    if let Some(stem) = w.strip_suffix("ies") {
        return format!("{stem}y");
    }
    for suffix in ["oes", "ches", "shes", "sses", "xes"] {
        if w.ends_with(suffix) {
            return w[..w.len() - 2].to_string();
        }
    }
    if w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") {
        return w[..w.len() - 1].to_string();
    }
    w.to_string()
}

/// Upper-case the first character.
pub fn capitalize(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}
